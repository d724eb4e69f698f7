//! Analytic Laplace eigen-data, spectral states and the exact propagator.
//!
//! Functions are represented by complex coefficients against a real
//! orthonormal eigenbasis truncated at an energy `E_max`: Fourier modes on
//! the circle, plane-wave cos/sin pairs on the torus and real spherical
//! harmonics on the sphere. Eigenvalues are those of `-Δ` (so `E ≥ 0`).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldModel, Point};
use crate::special::normalized_associated_legendre;

const LEVEL_TOLERANCE: f64 = 1e-10;

/// Which quantum generator the exact propagator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// `Δ - R/6`, the limit of the time-sliced products.
    CurvatureCorrected,
    /// Plain `Δ`, without the curvature shift.
    Bare,
}

impl Generator {
    pub fn energy_shift(self, m: &ManifoldModel) -> f64 {
        match self {
            Generator::CurvatureCorrected => m.scalar_curvature() / 6.0,
            Generator::Bare => 0.0,
        }
    }

    /// Eigenvalue of `exp(it·generator/2)` on a level of `-Δ` with eigenvalue `energy`.
    pub fn multiplier(self, m: &ManifoldModel, t: f64, energy: f64) -> Complex64 {
        Complex64::from_polar(1.0, -t * (energy + self.energy_shift(m)) / 2.0)
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "corrected" | "curvature-corrected" => Ok(Generator::CurvatureCorrected),
            "bare" => Ok(Generator::Bare),
            other => Err(Error::config("generator", format!("unknown generator {other:?} (corrected, bare)"))),
        }
    }
}

/// How the orthonormal functions of one level are generated.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelBasis {
    /// `cos(kθ)`, `sin(kθ)` on the circle.
    Fourier { k: u64 },
    /// Real spherical harmonics `Y_l^m`, `m = -l..=l`.
    Harmonic { l: usize },
    /// cos/sin pairs for each representative wavevector (first nonzero entry positive).
    PlaneWaves { wavevectors: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenLevel {
    pub index: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub basis: LevelBasis,
}

impl EigenLevel {
    /// Evaluates the orthonormal eigenfunction `u_{j,m}` at a point.
    pub fn eval(&self, manifold: &ManifoldModel, m: usize, p: &Point) -> f64 {
        debug_assert!(m < self.multiplicity);
        let vol = manifold.total_volume();
        let x = p.coords();
        match (&self.basis, manifold.kind()) {
            (LevelBasis::Fourier { k: 0 }, _) => 1.0 / vol.sqrt(),
            (LevelBasis::Fourier { k }, ManifoldKind::Circle { .. }) => {
                let arg = *k as f64 * x[0];
                let trig = if m == 0 { arg.cos() } else { arg.sin() };
                (2.0 / vol).sqrt() * trig
            }
            (LevelBasis::Harmonic { l }, ManifoldKind::Sphere2 { radius }) => {
                let l = *l;
                let order = m as i64 - l as i64;
                let (s, c) = x[0].sin_cos();
                let table = normalized_associated_legendre(l, c, s);
                let p_lm = table[l * (l + 1) / 2 + order.unsigned_abs() as usize];
                let angular = match order.cmp(&0) {
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Greater => 2f64.sqrt() * (order as f64 * x[1]).cos(),
                    std::cmp::Ordering::Less => 2f64.sqrt() * (-order as f64 * x[1]).sin(),
                };
                p_lm * angular / radius
            }
            (LevelBasis::PlaneWaves { wavevectors }, ManifoldKind::FlatTorus { periods }) => {
                if wavevectors.len() == 1 && wavevectors[0].iter().all(|&k| k == 0) {
                    return 1.0 / vol.sqrt();
                }
                let k = &wavevectors[m / 2];
                let arg: f64 = k
                    .iter()
                    .zip(x)
                    .zip(periods)
                    .map(|((&ki, &xi), &p)| 2.0 * PI * ki as f64 * xi / p)
                    .sum();
                let trig = if m % 2 == 0 { arg.cos() } else { arg.sin() };
                (2.0 / vol).sqrt() * trig
            }
            _ => unreachable!("level basis does not belong to this manifold"),
        }
    }
}

fn within(e: f64, e_max: f64) -> bool {
    e <= e_max * (1.0 + 1e-12) + 1e-300
}

/// Complete list of Laplace eigenlevels with `E_j ≤ e_max`, in increasing order.
pub fn eigenlevels(m: &ManifoldModel, e_max: f64) -> Vec<EigenLevel> {
    let e_max = e_max.max(0.0);
    let mut levels = Vec::new();
    match m.kind() {
        ManifoldKind::Circle { radius } => {
            for k in 0u64.. {
                let e = (k as f64 / radius).powi(2);
                if !within(e, e_max) {
                    break;
                }
                let multiplicity = if k == 0 { 1 } else { 2 };
                levels.push(EigenLevel { index: levels.len(), eigenvalue: e, multiplicity, basis: LevelBasis::Fourier { k } });
            }
        }
        ManifoldKind::Sphere2 { radius } => {
            for l in 0usize.. {
                let e = (l * (l + 1)) as f64 / (radius * radius);
                if !within(e, e_max) {
                    break;
                }
                levels.push(EigenLevel { index: levels.len(), eigenvalue: e, multiplicity: 2 * l + 1, basis: LevelBasis::Harmonic { l } });
            }
        }
        ManifoldKind::FlatTorus { periods } => {
            let bounds: Vec<i64> =
                periods.iter().map(|p| (p * e_max.sqrt() / (2.0 * PI)).floor() as i64 + 1).collect();
            let mut modes: Vec<(f64, Vec<i64>)> = Vec::new();
            let mut k = bounds.iter().map(|b| -b).collect::<Vec<_>>();
            'outer: loop {
                let representative = k.iter().find(|&&ki| ki != 0).map_or(true, |&ki| ki > 0);
                if representative {
                    let e: f64 = k.iter().zip(periods).map(|(&ki, p)| (2.0 * PI * ki as f64 / p).powi(2)).sum();
                    if within(e, e_max) {
                        modes.push((e, k.clone()));
                    }
                }
                for d in 0..k.len() {
                    if k[d] < bounds[d] {
                        k[d] += 1;
                        continue 'outer;
                    }
                    k[d] = -bounds[d];
                }
                break;
            }
            modes.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            let mut groups: Vec<(f64, Vec<Vec<i64>>)> = Vec::new();
            for (e, k) in modes {
                match groups.last_mut() {
                    Some((e0, ks)) if (e - *e0).abs() <= LEVEL_TOLERANCE * e.max(1.0) => ks.push(k),
                    _ => groups.push((e, vec![k])),
                }
            }
            for (e, wavevectors) in groups {
                let zero = wavevectors[0].iter().all(|&ki| ki == 0);
                let multiplicity = if zero { 1 } else { 2 * wavevectors.len() };
                let eigenvalue = if zero { 0.0 } else { e };
                levels.push(EigenLevel { index: levels.len(), eigenvalue, multiplicity, basis: LevelBasis::PlaneWaves { wavevectors } });
            }
        }
    }
    levels
}

/// Truncated eigenbasis of a manifold, shared by the states built on it.
#[derive(Debug, PartialEq)]
pub struct Spectrum {
    manifold: ManifoldModel,
    e_max: f64,
    levels: Vec<EigenLevel>,
    offsets: Vec<usize>,
}

impl Spectrum {
    pub fn new(manifold: ManifoldModel, e_max: f64) -> Arc<Self> {
        let levels = eigenlevels(&manifold, e_max);
        let mut offsets = Vec::with_capacity(levels.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for level in &levels {
            acc += level.multiplicity;
            offsets.push(acc);
        }
        Arc::new(Spectrum { manifold, e_max, levels, offsets })
    }

    pub fn manifold(&self) -> &ManifoldModel {
        &self.manifold
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn levels(&self) -> &[EigenLevel] {
        &self.levels
    }

    /// Total number of basis functions.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn flat_index(&self, level: usize, m: usize) -> Option<usize> {
        let l = self.levels.get(level)?;
        (m < l.multiplicity).then(|| self.offsets[level] + m)
    }

    /// `(level, m)` for each flat index, in storage order.
    pub fn basis_labels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.levels.iter().flat_map(|l| (0..l.multiplicity).map(move |m| (l.index, m)))
    }

    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        self.offsets[level]..self.offsets[level + 1]
    }

    fn same_as(&self, other: &Spectrum) -> bool {
        std::ptr::eq(self, other) || (self.manifold == other.manifold && self.e_max == other.e_max)
    }
}

/// A function on the manifold as coefficients in the truncated eigenbasis.
#[derive(Clone, Debug)]
pub struct SpectralState {
    spectrum: Arc<Spectrum>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralState {
    fn eq(&self, other: &Self) -> bool {
        self.spectrum.same_as(&other.spectrum) && self.coeffs == other.coeffs
    }
}

impl SpectralState {
    pub fn zeros(spectrum: Arc<Spectrum>) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); spectrum.dim()];
        SpectralState { spectrum, coeffs }
    }

    /// Builds a state from `(level, m, amplitude)` triples; repeated entries add up.
    pub fn from_terms(spectrum: Arc<Spectrum>, terms: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut state = Self::zeros(spectrum);
        for &(level, m, c) in terms {
            let i = state.spectrum.flat_index(level, m).ok_or(Error::UnresolvableLevel {
                level,
                m,
                e_max: state.spectrum.e_max,
            })?;
            state.coeffs[i] += c;
        }
        Ok(state)
    }

    pub fn from_coefficients(spectrum: Arc<Spectrum>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != spectrum.dim() {
            return Err(Error::Mismatch(format!(
                "{} coefficients for a basis of dimension {}",
                coeffs.len(),
                spectrum.dim()
            )));
        }
        Ok(SpectralState { spectrum, coeffs })
    }

    /// Normalized state with independent complex Gaussian-like amplitudes on
    /// every basis function of the lowest `levels` levels.
    pub fn random_low_energy(spectrum: Arc<Spectrum>, levels: usize, rng: &mut impl Rng) -> Self {
        let mut state = Self::zeros(spectrum);
        let top = levels.min(state.spectrum.levels.len());
        let end = if top == 0 { 0 } else { state.spectrum.offsets[top] };
        for c in &mut state.coeffs[..end] {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let norm = state.norm();
        if norm > 0.0 {
            state.coeffs.iter_mut().for_each(|c| *c /= norm);
        }
        state
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn manifold(&self) -> &ManifoldModel {
        &self.spectrum.manifold
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, level: usize, m: usize) -> Option<Complex64> {
        self.spectrum.flat_index(level, m).map(|i| self.coeffs[i])
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.coeffs.iter_mut().for_each(|c| *c /= n);
        }
        self
    }

    /// Highest eigenvalue carrying a nonzero coefficient, if any.
    pub fn top_energy(&self) -> Option<f64> {
        self.spectrum
            .levels
            .iter()
            .rev()
            .find(|l| self.coeffs[self.spectrum.level_range(l.index)].iter().any(|c| c.norm_sqr() > 0.0))
            .map(|l| l.eigenvalue)
    }

    /// Multiplies each level's coefficients by `f(level)`.
    pub fn map_levels(&self, mut f: impl FnMut(&EigenLevel) -> Complex64) -> Self {
        let mut out = self.clone();
        for level in &self.spectrum.levels {
            let factor = f(level);
            for c in &mut out.coeffs[self.spectrum.level_range(level.index)] {
                *c *= factor;
            }
        }
        out
    }

    /// Spectral projector `ρ(E)`: zeroes every level with `E_j > energy`.
    pub fn project(&self, energy: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        self.map_levels(|l| if l.eigenvalue <= energy { one } else { zero })
    }

    /// `exp(it·generator/2)` applied exactly in the eigenbasis.
    pub fn exact_propagate(&self, t: f64, generator: Generator) -> Self {
        let m = self.spectrum.manifold.clone();
        self.map_levels(|l| generator.multiplier(&m, t, l.eigenvalue))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.spectrum.same_as(&other.spectrum) {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "{} (E_max {}) vs {} (E_max {})",
                self.spectrum.manifold, self.spectrum.e_max, other.spectrum.manifold, other.spectrum.e_max
            )))
        }
    }

    pub fn l2_error(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    /// `‖(−Δ+1)^{k/2} f‖`; `k` may be fractional.
    pub fn sobolev_norm(&self, k: f64) -> f64 {
        self.spectrum
            .levels
            .iter()
            .map(|l| {
                let w = (l.eigenvalue + 1.0).powf(k);
                w * self.coeffs[self.spectrum.level_range(l.index)].iter().map(|c| c.norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Pointwise evaluation `Σ c_{j,m} u_{j,m}(p)`.
    pub fn evaluate(&self, p: &Point) -> Complex64 {
        let m = &self.spectrum.manifold;
        self.spectrum
            .basis_labels()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|((j, k), c)| c * self.spectrum.levels[j].eval(m, k, p))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateRecord::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let record: StateRecord = serde_json::from_str(s)?;
        record.into_state()
    }
}

/// Wire format `{manifold, E_max, coefficients: [[j, m, re, im], …]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateRecord {
    pub manifold: String,
    #[serde(rename = "E_max")]
    pub e_max: f64,
    pub coefficients: Vec<(usize, usize, f64, f64)>,
}

impl From<&SpectralState> for StateRecord {
    fn from(s: &SpectralState) -> Self {
        StateRecord {
            manifold: s.spectrum.manifold.key(),
            e_max: s.spectrum.e_max,
            coefficients: s.spectrum.basis_labels().zip(&s.coeffs).map(|((j, m), c)| (j, m, c.re, c.im)).collect(),
        }
    }
}

impl StateRecord {
    pub fn into_state(self) -> Result<SpectralState> {
        let manifold: ManifoldModel = self.manifold.parse()?;
        let spectrum = Spectrum::new(manifold, self.e_max);
        let terms: Vec<_> = self.coefficients.iter().map(|&(j, m, re, im)| (j, m, Complex64::new(re, im))).collect();
        SpectralState::from_terms(spectrum, &terms)
    }
}

/// Free-function forms of the state operations.
pub fn project(f: &SpectralState, energy: f64) -> SpectralState {
    f.project(energy)
}

pub fn exact_propagate(t: f64, f: &SpectralState) -> SpectralState {
    f.exact_propagate(t, Generator::CurvatureCorrected)
}

pub fn l2_error(f: &SpectralState, g: &SpectralState) -> Result<f64> {
    f.l2_error(g)
}

pub fn sobolev_norm(f: &SpectralState, k: f64) -> f64 {
    f.sobolev_norm(k)
}

/// Smoothness exponent `α = 2 + ⌊(n+2)/2⌋ / 2` of the single-step bound.
pub fn smoothness_exponent(dimension: usize) -> f64 {
    2.0 + ((dimension + 2) / 2) as f64 / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss::gauss_legendre;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn summary(levels: &[EigenLevel]) -> Vec<(f64, usize)> {
        levels.iter().map(|l| (l.eigenvalue, l.multiplicity)).collect()
    }

    #[test]
    fn eigenlevel_examples() {
        let c = ManifoldModel::circle(1.0).unwrap();
        assert_eq!(summary(&eigenlevels(&c, 4.0)), vec![(0.0, 1), (1.0, 2), (4.0, 2)]);
        let s = ManifoldModel::sphere2(1.0).unwrap();
        assert_eq!(summary(&eigenlevels(&s, 6.0)), vec![(0.0, 1), (2.0, 3), (6.0, 5)]);
        let t = ManifoldModel::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        let lv = summary(&eigenlevels(&t, 1.0));
        assert_eq!(lv.len(), 2);
        assert_eq!(lv[0], (0.0, 1));
        assert!((lv[1].0 - 1.0).abs() < 1e-12 && lv[1].1 == 4);
    }

    #[test]
    fn torus_levels_merge_orbits_of_equal_energy() {
        let t = ManifoldModel::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        let levels = eigenlevels(&t, 25.0);
        let l25 = levels.iter().find(|l| (l.eigenvalue - 25.0).abs() < 1e-9).unwrap();
        // (5,0),(0,5),(3,4),(4,3),(3,-4),(4,-3) and their negatives
        assert_eq!(l25.multiplicity, 12);
        for w in levels.windows(2) {
            assert!(w[0].eigenvalue < w[1].eigenvalue);
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(smoothness_exponent(1), 2.5);
        assert_eq!(smoothness_exponent(2), 3.0);
        assert_eq!(smoothness_exponent(3), 3.0);
    }

    /// Quadrature rules exact for the products of basis functions involved.
    fn gram_matrix(m: &ManifoldModel, e_max: f64) -> Vec<Vec<f64>> {
        let spectrum = Spectrum::new(m.clone(), e_max);
        let mut points: Vec<(Point, f64)> = Vec::new();
        match m.kind() {
            ManifoldKind::Circle { radius } => {
                let n = 64;
                for i in 0..n {
                    points.push((Point::new([2.0 * PI * i as f64 / n as f64]), 2.0 * PI * radius / n as f64));
                }
            }
            ManifoldKind::FlatTorus { periods } => {
                let n = 24;
                for i in 0..n {
                    for j in 0..n {
                        let p = Point::new([periods[0] * i as f64 / n as f64, periods[1] * j as f64 / n as f64]);
                        points.push((p, periods[0] * periods[1] / (n * n) as f64));
                    }
                }
            }
            ManifoldKind::Sphere2 { radius } => {
                let (x, w) = gauss_legendre(20);
                let nlon = 40;
                for (xi, wi) in x.iter().zip(w.iter()) {
                    for k in 0..nlon {
                        let p = Point::new([xi.acos(), 2.0 * PI * k as f64 / nlon as f64]);
                        points.push((p, wi * 2.0 * PI / nlon as f64 * radius * radius));
                    }
                }
            }
        }
        let labels: Vec<_> = spectrum.basis_labels().collect();
        let values: Vec<Vec<f64>> = labels
            .iter()
            .map(|&(j, k)| points.iter().map(|(p, _)| spectrum.levels()[j].eval(m, k, p)).collect())
            .collect();
        values
            .iter()
            .map(|a| values.iter().map(|b| a.iter().zip(b).zip(&points).map(|((x, y), (_, w))| x * y * w).sum()).collect())
            .collect()
    }

    #[test]
    fn eigenbases_are_orthonormal() {
        let cases = [
            (ManifoldModel::circle(1.0).unwrap(), 100.0),
            (ManifoldModel::circle(1.7).unwrap(), 30.0),
            (ManifoldModel::flat_torus(vec![2.0 * PI, 4.0]).unwrap(), 20.0),
            (ManifoldModel::sphere2(1.0).unwrap(), 90.0),
            (ManifoldModel::sphere2(0.5).unwrap(), 100.0),
        ];
        for (m, e) in cases {
            let g = gram_matrix(&m, e);
            let worst = g
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (v - if i == j { 1.0 } else { 0.0 }).abs()))
                .fold(0.0, f64::max);
            assert!(worst < 1e-10, "{m}: orthonormality defect {worst}");
        }
    }

    #[test]
    fn constant_mode_and_ordering() {
        for m in [
            ManifoldModel::circle(2.0).unwrap(),
            ManifoldModel::flat_torus(vec![1.0, 2.0, 3.0]).unwrap(),
            ManifoldModel::sphere2(3.0).unwrap(),
        ] {
            let levels = eigenlevels(&m, 40.0);
            assert_eq!(levels[0].eigenvalue, 0.0);
            let u0 = levels[0].eval(&m, 0, &Point::new(vec![0.3; m.dimension()]));
            assert!((u0 - 1.0 / m.total_volume().sqrt()).abs() < 1e-14);
            assert!(levels.windows(2).all(|w| w[0].eigenvalue <= w[1].eigenvalue));
        }
    }

    #[test]
    fn projector_examples() {
        let s = Spectrum::new(ManifoldModel::circle(1.0).unwrap(), 4.0);
        let one = Complex64::new(1.0, 0.0);
        let f = SpectralState::from_terms(s, &[(0, 0, one), (1, 1, one), (2, 0, one)]).unwrap();
        let p = f.project(1.0);
        assert_eq!(p.coefficient(2, 0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(p.coefficient(1, 1).unwrap(), one);
        assert_eq!(p.project(1.0), p);
        assert!(p.norm() < f.norm());
        assert_eq!(f.project(4.0).norm(), f.norm());
    }

    #[test]
    fn exact_propagate_examples() {
        let c = Spectrum::new(ManifoldModel::circle(1.0).unwrap(), 1.0);
        let f = SpectralState::from_terms(c, &[(1, 0, Complex64::new(1.0, 0.0))]).unwrap();
        let g = f.exact_propagate(PI, Generator::CurvatureCorrected);
        assert!((g.coefficient(1, 0).unwrap() - Complex64::new(0.0, -1.0)).norm() < 1e-15);

        let s = Spectrum::new(ManifoldModel::sphere2(1.0).unwrap(), 2.0);
        let f = SpectralState::from_terms(s, &[(1, 1, Complex64::new(1.0, 0.0))]).unwrap();
        let g = f.exact_propagate(1.0, Generator::CurvatureCorrected);
        let expected = Complex64::from_polar(1.0, -7.0 / 6.0);
        assert!((g.coefficient(1, 1).unwrap() - expected).norm() < 1e-15);
        assert_eq!(f.exact_propagate(0.0, Generator::CurvatureCorrected), f);
    }

    #[test]
    fn sobolev_examples() {
        let c = Spectrum::new(ManifoldModel::circle(1.0).unwrap(), 9.0);
        let f = SpectralState::from_terms(c.clone(), &[(1, 0, Complex64::new(1.0, 0.0))]).unwrap();
        assert!((f.sobolev_norm(2.0) - 2.0).abs() < 1e-15);
        assert_eq!(f.l2_error(&f).unwrap(), 0.0);
        let r = SpectralState::random_low_energy(c, 3, &mut ChaCha8Rng::seed_from_u64(3));
        assert!((r.sobolev_norm(0.0) - r.norm()).abs() < 1e-15);
    }

    #[test]
    fn mismatched_states_are_rejected() {
        let a = SpectralState::zeros(Spectrum::new(ManifoldModel::circle(1.0).unwrap(), 4.0));
        let b = SpectralState::zeros(Spectrum::new(ManifoldModel::circle(1.0).unwrap(), 9.0));
        let c = SpectralState::zeros(Spectrum::new(ManifoldModel::sphere2(1.0).unwrap(), 4.0));
        assert!(matches!(a.l2_error(&b), Err(Error::Mismatch(_))));
        assert!(matches!(a.l2_error(&c), Err(Error::Mismatch(_))));
        let a2 = SpectralState::zeros(Spectrum::new(ManifoldModel::circle(1.0).unwrap(), 4.0));
        assert_eq!(a.l2_error(&a2).unwrap(), 0.0);
    }

    #[test]
    fn unknown_level_is_reported() {
        let s = Spectrum::new(ManifoldModel::sphere2(1.0).unwrap(), 2.0);
        let err = SpectralState::from_terms(s.clone(), &[(2, 0, Complex64::new(1.0, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::UnresolvableLevel { level: 2, .. }));
        assert!(SpectralState::from_terms(s, &[(1, 3, Complex64::new(1.0, 0.0))]).is_err());
    }

    #[test]
    fn json_wire_format() {
        let s = Spectrum::new(ManifoldModel::circle(1.0).unwrap(), 1.0);
        let f = SpectralState::from_terms(s, &[(1, 1, Complex64::new(0.5, -2.0))]).unwrap();
        let json = f.to_json().unwrap();
        assert_eq!(json, r#"{"manifold":"circle:1","E_max":1.0,"coefficients":[[0,0,0.0,0.0],[1,0,0.0,0.0],[1,1,0.5,-2.0]]}"#);
        assert_eq!(SpectralState::from_json(&json).unwrap(), f);
    }

    /// Parseval: grid quadrature of |f|² equals the coefficient norm.
    #[test]
    fn parseval_on_the_sphere() {
        let m = ManifoldModel::sphere2(1.0).unwrap();
        let f = SpectralState::random_low_energy(Spectrum::new(m, 12.0), 4, &mut ChaCha8Rng::seed_from_u64(11));
        let (x, w) = gauss_legendre(12);
        let nlon = 24;
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(w.iter()) {
            for k in 0..nlon {
                let p = Point::new([xi.acos(), 2.0 * PI * k as f64 / nlon as f64]);
                total += f.evaluate(&p).norm_sqr() * wi * 2.0 * PI / nlon as f64;
            }
        }
        assert!((total.sqrt() - f.norm()).abs() < 1e-12);
    }

    fn arb_state() -> impl Strategy<Value = SpectralState> {
        (0u64..1000, 1usize..5).prop_map(|(seed, levels)| {
            let s = Spectrum::new(ManifoldModel::sphere2(1.0).unwrap(), 20.0);
            SpectralState::random_low_energy(s, levels, &mut ChaCha8Rng::seed_from_u64(seed))
        })
    }

    proptest! {
        #[test]
        fn group_law(f in arb_state(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let g = Generator::CurvatureCorrected;
            let a = f.exact_propagate(t1, g).exact_propagate(t2, g);
            let b = f.exact_propagate(t1 + t2, g);
            prop_assert!(a.l2_error(&b).unwrap() < 1e-12);
            prop_assert!((b.norm() - f.norm()).abs() < 1e-12);
        }

        #[test]
        fn projector_properties(f in arb_state(), e in 0.0f64..25.0) {
            let p = f.project(e);
            prop_assert_eq!(p.project(e), p.clone());
            prop_assert!(p.norm() <= f.norm());
            let alpha = smoothness_exponent(2);
            prop_assert!(p.sobolev_norm(2.0 * alpha) <= (e + 1.0).powf(alpha) * f.norm() * (1.0 + 1e-12));
        }

        #[test]
        fn json_round_trip(f in arb_state()) {
            let back = SpectralState::from_json(&f.to_json().unwrap()).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
