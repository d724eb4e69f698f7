//! Direct grid quadrature of the short-time operator.
//!
//! Applies `U(t) f(x) = ∫ K(t, d(x, y)) f(y) dy` with the full double
//! integral: uniform trapezoid grids on the circle and torus, a
//! Gauss–Legendre × uniform product grid on the sphere. This path never uses
//! eigenspace diagonality and is the oracle for the radial multipliers.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::gauss::gauss_legendre;
use crate::error::{Error, Result};
use crate::kernel::{CutoffProfile, KernelFactors};
use crate::manifold::{ManifoldKind, ManifoldModel, Point};
use crate::spectral::{LevelBasis, SpectralState, Spectrum};

#[derive(Clone, Debug)]
pub struct DenseGrid {
    manifold: ManifoldModel,
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl DenseGrid {
    /// Tensor trapezoid grid with `per_dim[i]` points along each period.
    pub fn uniform(m: &ManifoldModel, per_dim: &[usize]) -> Result<Self> {
        let periods: Vec<f64> = match m.kind() {
            ManifoldKind::Circle { .. } => vec![2.0 * PI],
            ManifoldKind::FlatTorus { periods } => periods.clone(),
            ManifoldKind::Sphere2 { .. } => {
                return Err(Error::ManifoldParams("uniform grids need a flat manifold".into()));
            }
        };
        if per_dim.len() != periods.len() || per_dim.contains(&0) {
            return Err(Error::ManifoldParams(format!("grid shape {per_dim:?} does not match {m}")));
        }
        let cell = m.total_volume() / per_dim.iter().product::<usize>() as f64;
        let mut points = Vec::new();
        let mut idx = vec![0usize; per_dim.len()];
        'outer: loop {
            points.push(Point::new(
                idx.iter().zip(per_dim).zip(&periods).map(|((&i, &n), &p)| p * i as f64 / n as f64).collect::<Vec<_>>(),
            ));
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < per_dim[d] {
                    continue 'outer;
                }
                idx[d] = 0;
            }
            break;
        }
        let weights = vec![cell; points.len()];
        Ok(DenseGrid { manifold: m.clone(), points, weights })
    }

    /// Product rule on the sphere: Gauss–Legendre in `cos θ`, uniform in `φ`.
    /// Exact for spherical polynomials of degree `< min(2 nlat, nlon)`.
    pub fn gauss_product(m: &ManifoldModel, nlat: usize, nlon: usize) -> Result<Self> {
        let ManifoldKind::Sphere2 { radius } = m.kind() else {
            return Err(Error::ManifoldParams("product Gauss grids need a sphere".into()));
        };
        let (x, w) = gauss_legendre(nlat);
        let mut points = Vec::with_capacity(nlat * nlon);
        let mut weights = Vec::with_capacity(nlat * nlon);
        for (xi, wi) in x.iter().zip(&w) {
            for k in 0..nlon {
                points.push(Point::new([xi.acos(), 2.0 * PI * k as f64 / nlon as f64]));
                weights.push(wi * 2.0 * PI / nlon as f64 * radius * radius);
            }
        }
        Ok(DenseGrid { manifold: m.clone(), points, weights })
    }

    /// Grid with `budget` points per shortest wavelength of the kernel phase,
    /// for integrands whose smooth factor has frequency up to `sqrt(energy)`.
    pub fn resolving(m: &ManifoldModel, cutoff: &CutoffProfile, t: f64, budget: u32, energy: f64) -> Result<Self> {
        let wavenumber = cutoff.support() / t + energy.max(0.0).sqrt();
        let samples = |length: f64| ((budget as f64 * wavenumber * length / (2.0 * PI)).ceil() as usize).max(16);
        match m.kind() {
            ManifoldKind::Circle { radius } => Self::uniform(m, &[samples(2.0 * PI * radius)]),
            ManifoldKind::FlatTorus { periods } => {
                Self::uniform(m, &periods.iter().map(|&p| samples(p)).collect::<Vec<_>>())
            }
            ManifoldKind::Sphere2 { radius } => {
                let nlat = samples(PI * radius);
                Self::gauss_product(m, nlat, 2 * nlat)
            }
        }
    }

    pub fn manifold(&self) -> &ManifoldModel {
        &self.manifold
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples of a function on a [`DenseGrid`].
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<DenseGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn sample(grid: Arc<DenseGrid>, f: impl Fn(&Point) -> Complex64) -> Self {
        let values = grid.points.iter().map(f).collect();
        GridFunction { grid, values }
    }

    pub fn from_state(grid: Arc<DenseGrid>, state: &SpectralState) -> Self {
        Self::sample(grid, |p| state.evaluate(p))
    }

    pub fn from_values(grid: Arc<DenseGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("{} samples for a grid of {} points", values.len(), grid.len())));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &Arc<DenseGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `∫ conj(self) · other` by the grid rule.
    pub fn inner(&self, other: &GridFunction) -> Complex64 {
        self.values.iter().zip(&other.values).zip(&self.grid.weights).map(|((a, b), w)| a.conj() * b * *w).sum()
    }
}

/// Evaluates `U(t) f` at arbitrary target points by direct quadrature over the grid of `f`.
pub fn dense_apply_at(
    m: &ManifoldModel,
    cutoff: &CutoffProfile,
    t: f64,
    f: &GridFunction,
    targets: &[Point],
) -> Result<Vec<Complex64>> {
    let factors = KernelFactors::new(m, *cutoff, t)?;
    let grid = &f.grid;
    targets
        .iter()
        .map(|x| {
            let mut sum = Complex64::new(0.0, 0.0);
            for ((y, w), fy) in grid.points.iter().zip(&grid.weights).zip(&f.values) {
                let r = m.geodesic_distance(x, y);
                if r < cutoff.support() {
                    sum += factors.value(r)? * fy * *w;
                }
            }
            Ok(sum)
        })
        .collect()
}

/// `U(t) f` on the grid of `f`.
pub fn dense_apply(m: &ManifoldModel, cutoff: &CutoffProfile, t: f64, f: &GridFunction) -> Result<GridFunction> {
    let values = dense_apply_at(m, cutoff, t, f, f.grid.points())?;
    Ok(GridFunction { grid: Arc::clone(&f.grid), values })
}

/// Small grid on which products of two basis functions of `level` integrate exactly.
fn exact_output_grid(spectrum: &Spectrum, level: usize) -> Result<DenseGrid> {
    let m = spectrum.manifold();
    match &spectrum.levels()[level].basis {
        LevelBasis::Fourier { k } => DenseGrid::uniform(m, &[2 * *k as usize + 2]),
        LevelBasis::Harmonic { l } => DenseGrid::gauss_product(m, l + 1, 2 * l + 2),
        LevelBasis::PlaneWaves { wavevectors } => {
            let shape: Vec<usize> = (0..m.dimension())
                .map(|d| 2 * wavevectors.iter().map(|k| k[d].unsigned_abs() as usize).max().unwrap_or(0) + 2)
                .collect();
            DenseGrid::uniform(m, &shape)
        }
    }
}

/// Rayleigh quotient `⟨u, U(t) u⟩ / ⟨u, u⟩` of the basis function `u_{level, m}`,
/// with `U(t) u` computed by dense quadrature.
pub fn dense_rayleigh_quotient(
    spectrum: &Arc<Spectrum>,
    cutoff: &CutoffProfile,
    t: f64,
    level: usize,
    m_index: usize,
    budget: u32,
) -> Result<Complex64> {
    let manifold = spectrum.manifold();
    let lvl = spectrum
        .levels()
        .get(level)
        .filter(|l| m_index < l.multiplicity)
        .ok_or(Error::UnresolvableLevel { level, m: m_index, e_max: spectrum.e_max() })?;
    let u = |p: &Point| Complex64::new(lvl.eval(manifold, m_index, p), 0.0);
    let fine = Arc::new(DenseGrid::resolving(manifold, cutoff, t, budget, lvl.eigenvalue)?);
    let input = GridFunction::sample(fine, u);
    let out_grid = Arc::new(exact_output_grid(spectrum, level)?);
    let applied = dense_apply_at(manifold, cutoff, t, &input, out_grid.points())?;
    let applied = GridFunction::from_values(Arc::clone(&out_grid), applied)?;
    let u_out = GridFunction::sample(out_grid, u);
    Ok(u_out.inner(&applied) / u_out.inner(&u_out))
}
