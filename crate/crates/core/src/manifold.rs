//! Rank-one symmetric manifolds with closed-form geometry.
//!
//! Three models are supported: a circle of radius `a`, a flat torus with
//! arbitrary periods, and the round 2-sphere of radius `a`. Every geometric
//! quantity the propagator needs (distance, normal-coordinate metric
//! determinant, polar volume density) is exact.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ManifoldKind {
    Circle { radius: f64 },
    FlatTorus { periods: Vec<f64> },
    Sphere2 { radius: f64 },
}

/// Immutable descriptor of a supported manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldModel {
    kind: ManifoldKind,
    dimension: usize,
    scalar_curvature: f64,
    injectivity_radius: f64,
    total_volume: f64,
}

/// Chart coordinates of a point.
///
/// Circle: one angle in `[0, 2π)`. Flat torus: one position per period in
/// `[0, P_i)`. Sphere: colatitude in `[0, π]` and longitude in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point(coords.into())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

fn check_length(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::ManifoldParams(format!("{what} must be positive and finite, got {value}")))
    }
}

/// `x mod period` in `[0, period)`; `rem_euclid` can round up to `period`.
fn wrap(x: f64, period: f64) -> f64 {
    let w = x.rem_euclid(period);
    if w >= period {
        0.0
    } else {
        w
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

impl ManifoldModel {
    pub fn circle(radius: f64) -> Result<Self> {
        check_length(radius, "circle radius")?;
        Ok(Self {
            kind: ManifoldKind::Circle { radius },
            dimension: 1,
            scalar_curvature: 0.0,
            injectivity_radius: PI * radius,
            total_volume: 2.0 * PI * radius,
        })
    }

    pub fn flat_torus(periods: impl Into<Vec<f64>>) -> Result<Self> {
        let periods = periods.into();
        if periods.is_empty() {
            return Err(Error::ManifoldParams("torus needs at least one period".into()));
        }
        for &p in &periods {
            check_length(p, "torus period")?;
        }
        let min = periods.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            dimension: periods.len(),
            scalar_curvature: 0.0,
            injectivity_radius: min / 2.0,
            total_volume: periods.iter().product(),
            kind: ManifoldKind::FlatTorus { periods },
        })
    }

    pub fn sphere2(radius: f64) -> Result<Self> {
        check_length(radius, "sphere radius")?;
        Ok(Self {
            kind: ManifoldKind::Sphere2 { radius },
            dimension: 2,
            scalar_curvature: 2.0 / (radius * radius),
            injectivity_radius: PI * radius,
            total_volume: 4.0 * PI * radius * radius,
        })
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.scalar_curvature
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.injectivity_radius
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    /// Area of the unit sphere of directions `S^{n-1}`.
    pub fn directions_measure(&self) -> f64 {
        unit_sphere_area(self.dimension)
    }

    pub fn normalize(&self, p: &Point) -> Point {
        match &self.kind {
            ManifoldKind::Circle { .. } => Point(vec![wrap(p.0[0], 2.0 * PI)]),
            ManifoldKind::FlatTorus { periods } => {
                Point(p.0.iter().zip(periods).map(|(&x, &per)| wrap(x, per)).collect())
            }
            ManifoldKind::Sphere2 { .. } => {
                let mut theta = wrap(p.0[0], 2.0 * PI);
                let mut phi = p.0[1];
                if theta > PI {
                    theta = 2.0 * PI - theta;
                    phi += PI;
                }
                Point(vec![theta, wrap(phi, 2.0 * PI)])
            }
        }
    }

    /// Length of the minimizing geodesic between two points.
    pub fn geodesic_distance(&self, x: &Point, y: &Point) -> f64 {
        match &self.kind {
            ManifoldKind::Circle { radius } => {
                let d = wrap(x.0[0] - y.0[0], 2.0 * PI);
                radius * d.min(2.0 * PI - d)
            }
            ManifoldKind::FlatTorus { periods } => x
                .0
                .iter()
                .zip(&y.0)
                .zip(periods)
                .map(|((&a, &b), &per)| {
                    let d = wrap(a - b, per);
                    let d = d.min(per - d);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            ManifoldKind::Sphere2 { radius } => {
                let u = sphere_unit_vector(x.0[0], x.0[1]);
                let v = sphere_unit_vector(y.0[0], y.0[1]);
                radius * unit_vector_angle(&u, &v)
            }
        }
    }

    fn check_chart(&self, r: f64) -> Result<()> {
        if (0.0..self.injectivity_radius).contains(&r) {
            Ok(())
        } else {
            Err(Error::OutsideChart { r, limit: self.injectivity_radius })
        }
    }

    /// `det g_ij` in normal coordinates at geodesic distance `r` from the base point.
    pub fn normal_metric_det(&self, r: f64) -> Result<f64> {
        self.check_chart(r)?;
        Ok(match &self.kind {
            ManifoldKind::Circle { .. } | ManifoldKind::FlatTorus { .. } => 1.0,
            ManifoldKind::Sphere2 { radius } => sinc(r / radius).powi(2),
        })
    }

    /// Radial density `g(r)` with `dvol = g(r) dr dθ` in geodesic polar coordinates.
    pub fn polar_volume_density(&self, r: f64) -> Result<f64> {
        self.check_chart(r)?;
        Ok(match &self.kind {
            ManifoldKind::Circle { .. } => 1.0,
            ManifoldKind::FlatTorus { .. } => r.powi(self.dimension as i32 - 1),
            ManifoldKind::Sphere2 { radius } => radius * (r / radius).sin(),
        })
    }

    /// `g'(r)`, the radial derivative of [`Self::polar_volume_density`].
    pub fn polar_volume_density_derivative(&self, r: f64) -> Result<f64> {
        self.check_chart(r)?;
        let n = self.dimension as i32;
        Ok(match &self.kind {
            ManifoldKind::Circle { .. } => 0.0,
            ManifoldKind::FlatTorus { .. } if n == 1 => 0.0,
            ManifoldKind::FlatTorus { .. } => (n - 1) as f64 * r.powi(n - 2),
            ManifoldKind::Sphere2 { radius } => (r / radius).cos(),
        })
    }

    /// Canonical key, parseable by [`FromStr`].
    pub fn key(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn sphere_unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Angle between unit vectors, accurate near 0 and π.
pub(crate) fn unit_vector_angle(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    sin.atan2(cos)
}

/// `|S^{n-1}| = 2π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n - 2) as f64 * unit_sphere_area(n - 2),
    }
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ManifoldKind::Circle { radius } => write!(f, "circle:{radius}"),
            ManifoldKind::Sphere2 { radius } => write!(f, "sphere2:{radius}"),
            ManifoldKind::FlatTorus { periods } => {
                let parts: Vec<String> = periods.iter().map(|p| p.to_string()).collect();
                write!(f, "torus:{}", parts.join(","))
            }
        }
    }
}

/// Parses a number, also accepting multiples of π such as `pi`, `2pi`, `0.5pi`.
fn parse_length(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(prefix) = s.strip_suffix("pi") {
        let factor = if prefix.is_empty() { 1.0 } else { prefix.trim_end_matches('*').parse().ok()? };
        Some(factor * PI)
    } else {
        s.parse().ok()
    }
}

impl FromStr for ManifoldModel {
    type Err = Error;

    fn from_str(key: &str) -> Result<Self> {
        let bad = |reason: &str| Error::ManifoldKey { key: key.to_string(), reason: reason.to_string() };
        let (name, params) = key.split_once(':').ok_or_else(|| bad("expected `name:parameters`"))?;
        let values = params
            .split(',')
            .map(|p| parse_length(p).ok_or_else(|| bad(&format!("cannot parse {p:?} as a length"))))
            .collect::<Result<Vec<_>>>()?;
        let single = || match values.as_slice() {
            [v] => Ok(*v),
            _ => Err(bad("expected exactly one radius")),
        };
        let model = match name.trim() {
            "circle" => ManifoldModel::circle(single()?),
            "sphere2" => ManifoldModel::sphere2(single()?),
            "torus" => ManifoldModel::flat_torus(values.clone()),
            other => return Err(bad(&format!("unknown manifold {other:?} (circle, torus, sphere2)"))),
        };
        model.map_err(|e| bad(&e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn invariants_per_kind() {
        let c = ManifoldModel::circle(2.0).unwrap();
        assert_eq!((c.dimension(), c.scalar_curvature()), (1, 0.0));
        assert_eq!(c.injectivity_radius(), 2.0 * PI);

        let t = ManifoldModel::flat_torus(vec![3.0, 5.0, 4.0]).unwrap();
        assert_eq!((t.dimension(), t.scalar_curvature()), (3, 0.0));
        assert_eq!(t.injectivity_radius(), 1.5);
        assert_eq!(t.total_volume(), 60.0);

        let s = ManifoldModel::sphere2(2.0).unwrap();
        assert_eq!(s.dimension(), 2);
        assert_eq!(s.scalar_curvature(), 0.5);
        assert_eq!(s.injectivity_radius(), 2.0 * PI);

        assert!(ManifoldModel::circle(0.0).is_err());
        assert!(ManifoldModel::flat_torus(Vec::new()).is_err());
        assert!(ManifoldModel::sphere2(f64::INFINITY).is_err());
    }

    #[test]
    fn distance_examples() {
        let c = ManifoldModel::circle(1.0).unwrap();
        let d = c.geodesic_distance(&Point::new([0.0]), &Point::new([PI / 2.0]));
        assert!((d - PI / 2.0).abs() < 1e-15);

        let s = ManifoldModel::sphere2(1.0).unwrap();
        let d = s.geodesic_distance(&Point::new([0.0, 0.0]), &Point::new([PI, 0.0]));
        assert!((d - PI).abs() < 1e-15);

        let t = ManifoldModel::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        let d = t.geodesic_distance(&Point::new([0.0, 0.0]), &Point::new([1.5 * PI, 0.0]));
        assert!((d - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn normal_metric_det_examples() {
        let t = ManifoldModel::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        assert_eq!(t.normal_metric_det(1.3).unwrap(), 1.0);

        let s = ManifoldModel::sphere2(1.0).unwrap();
        assert_eq!(s.normal_metric_det(0.0).unwrap(), 1.0);
        assert!((s.normal_metric_det(1e-9).unwrap() - 1.0).abs() < 1e-15);
        let v = s.normal_metric_det(PI / 2.0).unwrap();
        assert!((v - 4.0 / (PI * PI)).abs() < 1e-15);
        assert!((v - 0.4053).abs() < 1e-4);

        // Lemma-style expansion det g = 1 - r²/3 + O(r⁴) on the unit sphere.
        let v = s.normal_metric_det(0.01).unwrap();
        assert!((v - (1.0 - 0.0001 / 3.0)).abs() < 1e-9);

        assert!(matches!(s.normal_metric_det(PI), Err(Error::OutsideChart { .. })));
        assert!(s.normal_metric_det(-0.1).is_err());
    }

    /// Integrates the Jacobi equation J'' + J = 0, J(0) = 0, J'(0) = 1 with RK4;
    /// `det g = (J(r)/r)²` in 2D normal coordinates.
    #[test]
    fn sphere_det_matches_jacobi_field() {
        let s = ManifoldModel::sphere2(1.0).unwrap();
        let (mut j, mut dj) = (0.0f64, 1.0f64);
        let steps = 2000;
        let h = (PI / 2.0) / steps as f64;
        for _ in 0..steps {
            let f = |y: f64, dy: f64| (dy, -y);
            let k1 = f(j, dj);
            let k2 = f(j + 0.5 * h * k1.0, dj + 0.5 * h * k1.1);
            let k3 = f(j + 0.5 * h * k2.0, dj + 0.5 * h * k2.1);
            let k4 = f(j + h * k3.0, dj + h * k3.1);
            j += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            dj += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        let r = PI / 2.0;
        let det = (j / r).powi(2);
        assert!((det - s.normal_metric_det(r).unwrap()).abs() < 1e-12);
        assert!((s.polar_volume_density(r).unwrap() - j).abs() < 1e-12);
    }

    #[test]
    fn polar_density_examples() {
        let c = ManifoldModel::circle(1.0).unwrap();
        assert_eq!(c.polar_volume_density(2.0).unwrap(), 1.0);
        let s = ManifoldModel::sphere2(1.0).unwrap();
        assert!((s.polar_volume_density(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        let g = s.polar_volume_density(0.1).unwrap();
        assert!((g - 0.099_833_416_646_828_15).abs() < 1e-15);
        assert!((g / 0.1 - (1.0 - 0.01 / 6.0)).abs() < 1e-6);
        assert!(s.polar_volume_density(PI).is_err());
    }

    #[test]
    fn keys_round_trip() {
        for key in ["circle:1", "torus:6.283185307179586,3", "sphere2:2.5"] {
            let m: ManifoldModel = key.parse().unwrap();
            assert_eq!(m.key(), key);
        }
        let m: ManifoldModel = "torus:2pi,2pi".parse().unwrap();
        assert_eq!(m, ManifoldModel::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap());
        let err = "sphere3:1".parse::<ManifoldModel>().unwrap_err();
        assert!(matches!(err, Error::ManifoldKey { .. }));
        assert!("circle:1,2".parse::<ManifoldModel>().is_err());
        assert!("circle:-1".parse::<ManifoldModel>().is_err());
        assert!("circle".parse::<ManifoldModel>().is_err());
    }

    #[test]
    fn unit_sphere_areas() {
        assert_eq!(unit_sphere_area(1), 2.0);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-14);
    }

    fn models() -> Vec<ManifoldModel> {
        vec![
            ManifoldModel::circle(1.3).unwrap(),
            ManifoldModel::flat_torus(vec![2.0 * PI, 3.0]).unwrap(),
            ManifoldModel::sphere2(0.7).unwrap(),
        ]
    }

    fn point_for(m: &ManifoldModel, raw: &[f64]) -> Point {
        Point::new(raw[..m.dimension()].to_vec())
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in prop::array::uniform3(-20.0f64..20.0)) {
            for m in models() {
                let p = m.normalize(&point_for(&m, &raw));
                prop_assert_eq!(m.normalize(&p), p);
            }
        }

        #[test]
        fn distance_is_a_metric(
            a in prop::array::uniform3(-10.0f64..10.0),
            b in prop::array::uniform3(-10.0f64..10.0),
            c in prop::array::uniform3(-10.0f64..10.0),
        ) {
            for m in models() {
                let (x, y, z) = (
                    m.normalize(&point_for(&m, &a)),
                    m.normalize(&point_for(&m, &b)),
                    m.normalize(&point_for(&m, &c)),
                );
                let dxy = m.geodesic_distance(&x, &y);
                prop_assert!(dxy >= 0.0);
                prop_assert!(m.geodesic_distance(&x, &x).abs() < 1e-12);
                prop_assert!((dxy - m.geodesic_distance(&y, &x)).abs() < 1e-12);
                prop_assert!(dxy <= m.geodesic_distance(&x, &z) + m.geodesic_distance(&z, &y) + 1e-12);
                if !matches!(m.kind(), ManifoldKind::FlatTorus { .. }) {
                    prop_assert!(dxy <= m.injectivity_radius() + 1e-12);
                }
            }
        }

        #[test]
        fn polar_density_positive_inside_chart(frac in 1e-6f64..0.999_999) {
            for m in models() {
                let r = frac * m.injectivity_radius();
                prop_assert!(m.polar_volume_density(r).unwrap() > 0.0);
            }
        }
    }
}
