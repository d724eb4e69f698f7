//! The short-time kernel `(2πi)^{-n/2} χ(r) a(t, r) e^{i r²/2t}`.
//!
//! `r` is the geodesic distance, `r²/2t` the action of the minimizing
//! geodesic and `a(t, r) = t^{-n/2} (det g(r))^{-1/4}` the square root of
//! the van Vleck determinant in normal coordinates. The cutoff `χ` keeps the
//! support strictly inside the injectivity radius.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;

/// Default support and plateau radii as fractions of the injectivity radius.
pub const DEFAULT_SUPPORT_FRACTION: f64 = 0.8;
pub const DEFAULT_PLATEAU_FRACTION: f64 = 0.4;

/// Smooth radial bump: `1` on `[0, plateau]`, `0` on `[support, ∞)`, with a
/// `C^∞` transition built from `exp(-1/s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    support: f64,
    plateau: f64,
}

fn flat_bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth step from 0 (at `s ≤ 0`) to 1 (at `s ≥ 1`).
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = flat_bump(s);
        a / (a + flat_bump(1.0 - s))
    }
}

impl CutoffProfile {
    /// Cutoff on a flat patch with no injectivity constraint.
    pub fn new(support: f64, plateau: f64) -> Result<Self> {
        if !(plateau > 0.0 && plateau < support && support.is_finite()) {
            return Err(Error::InvalidCutoff(format!("need 0 < plateau < support, got plateau {plateau}, support {support}")));
        }
        Ok(CutoffProfile { support, plateau })
    }

    /// Cutoff with radii given as fractions of the injectivity radius of `m`.
    pub fn for_manifold(m: &ManifoldModel, support_fraction: f64, plateau_fraction: f64) -> Result<Self> {
        if !(support_fraction < 1.0) {
            return Err(Error::InvalidCutoff(format!(
                "support fraction {support_fraction} must be below 1 (strictly inside the injectivity radius)"
            )));
        }
        let d = m.injectivity_radius();
        Self::new(support_fraction * d, plateau_fraction * d)
    }

    pub fn default_for(m: &ManifoldModel) -> Self {
        Self::for_manifold(m, DEFAULT_SUPPORT_FRACTION, DEFAULT_PLATEAU_FRACTION).expect("default fractions are valid")
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn eval(&self, r: f64) -> f64 {
        1.0 - smooth_step((r - self.plateau) / (self.support - self.plateau))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

/// Action of the minimizing geodesic of length `r` traversed in time `t`.
pub fn action(t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    Ok(r * r / (2.0 * t))
}

/// `a(t, r) = √V = t^{-n/2} (det g(r))^{-1/4}`.
pub fn van_vleck_sqrt(m: &ManifoldModel, t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    let det = m.normal_metric_det(r)?;
    Ok(t.powf(-(m.dimension() as f64) / 2.0) * det.powf(-0.25))
}

/// `(2πi)^{-n/2}` on the principal branch, `(2π)^{-n/2} e^{-iπn/4}`.
pub fn phase_prefactor(n: usize) -> Complex64 {
    let n = n as f64;
    Complex64::from_polar((2.0 * PI).powf(-n / 2.0), -PI * n / 4.0)
}

/// The kernel at geodesic distance `r`; zero outside the cutoff support.
pub fn kernel_value(m: &ManifoldModel, cutoff: &CutoffProfile, t: f64, r: f64) -> Result<Complex64> {
    let a = van_vleck_sqrt(m, t, r)?;
    if r >= cutoff.support() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phase = action(t, r)?;
    Ok(phase_prefactor(m.dimension()) * cutoff.eval(r) * a * Complex64::from_polar(1.0, phase))
}

/// The kernel's three radial factors at a fixed time, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct KernelFactors<'a> {
    manifold: &'a ManifoldModel,
    cutoff: CutoffProfile,
    t: f64,
    prefactor: Complex64,
}

impl<'a> KernelFactors<'a> {
    pub fn new(manifold: &'a ManifoldModel, cutoff: CutoffProfile, t: f64) -> Result<Self> {
        check_time(t)?;
        Ok(KernelFactors { manifold, cutoff, t, prefactor: phase_prefactor(manifold.dimension()) })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    pub fn action(&self, r: f64) -> f64 {
        r * r / (2.0 * self.t)
    }

    pub fn amplitude(&self, r: f64) -> Result<f64> {
        van_vleck_sqrt(self.manifold, self.t, r)
    }

    pub fn value(&self, r: f64) -> Result<Complex64> {
        if r >= self.cutoff.support() {
            self.manifold.normal_metric_det(r)?;
            return Ok(Complex64::new(0.0, 0.0));
        }
        let a = self.amplitude(r)?;
        Ok(self.prefactor * self.cutoff.eval(r) * a * Complex64::from_polar(1.0, self.action(r)))
    }
}

/// Mean-curvature term `H(r) = g'(r)/g(r)` of the geodesic sphere of radius `r`.
pub fn mean_curvature(m: &ManifoldModel, r: f64) -> Result<f64> {
    Ok(m.polar_volume_density_derivative(r)? / m.polar_volume_density(r)?)
}

/// Residual of the amplitude transport equation
/// `∂a/∂t + (r/t) ∂a/∂r + (a/2t)(1 + r H(r)) = 0`, by five-point central
/// differences with step `h`.
pub fn transport_residual(m: &ManifoldModel, t: f64, r: f64, h: f64) -> Result<f64> {
    let a = |t: f64, r: f64| van_vleck_sqrt(m, t, r);
    let stencil = |f0: f64, f1: f64, f2: f64, f3: f64| (f0 - 8.0 * f1 + 8.0 * f2 - f3) / (12.0 * h);
    let da_dt = stencil(a(t - 2.0 * h, r)?, a(t - h, r)?, a(t + h, r)?, a(t + 2.0 * h, r)?);
    let da_dr = stencil(a(t, r - 2.0 * h)?, a(t, r - h)?, a(t, r + h)?, a(t, r + 2.0 * h)?);
    let value = a(t, r)?;
    Ok(da_dt + r / t * da_dr + value / (2.0 * t) * (1.0 + r * mean_curvature(m, r)?))
}

fn flat_laplacian_at_origin(m: &ManifoldModel, t: f64, h: f64) -> Result<f64> {
    let center = van_vleck_sqrt(m, t, 0.0)?;
    // a depends on |x| only: ±h along every normal axis samples radius h.
    let off_axis = van_vleck_sqrt(m, t, h)?;
    Ok(m.dimension() as f64 * 2.0 * (off_axis - center) / (h * h))
}

/// `Δ_x a(t, x, y)` at `x = y` by central differences in normal coordinates,
/// Richardson-extrapolated from steps `h` and `h/2`. The limit is
/// `t^{-n/2} R/6`.
///
/// Fails with [`Error::StepTooLarge`] when the Richardson correction exceeds
/// `1e-6 · t^{-n/2}`, i.e. `h` is outside the asymptotic range.
pub fn curvature_limit_check(m: &ManifoldModel, t: f64, h: f64) -> Result<f64> {
    check_time(t)?;
    let coarse = flat_laplacian_at_origin(m, t, h)?;
    let fine = flat_laplacian_at_origin(m, t, h / 2.0)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let change = (extrapolated - fine).abs();
    let scale = t.powf(-(m.dimension() as f64) / 2.0);
    if change > 1e-6 * scale {
        return Err(Error::StepTooLarge { h, change });
    }
    Ok(extrapolated)
}
