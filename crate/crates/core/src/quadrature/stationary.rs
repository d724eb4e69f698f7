//! Quadratic-phase stationary phase on a flat patch.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::radial::{integrate_radial, QuadratureSettings};
use crate::error::Result;
use crate::kernel::CutoffProfile;
use crate::manifold::unit_sphere_area;

/// `(2πit)^{n/2} Σ_{j<k} (it/2)^j Δ^j u(0) / j!`, principal branch.
///
/// `laplacian_powers[j]` holds `Δ^j u(0)`; it must have at least `k` entries.
pub fn stationary_phase_expansion(n: usize, t: f64, laplacian_powers: &[f64], k: usize) -> Complex64 {
    let lead = Complex64::from_polar((2.0 * PI * t).powf(n as f64 / 2.0), PI * n as f64 / 4.0);
    let step = Complex64::new(0.0, t / 2.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for (j, &dj) in laplacian_powers.iter().take(k).enumerate() {
        if j > 0 {
            term *= step / j as f64;
        }
        sum += term * dj;
    }
    lead * sum
}

/// `|S^{n-1}| ∫_0^δ χ(r) u(r) e^{ir²/2t} r^{n-1} dr` for a radial `u`.
pub fn oscillatory_radial_integral(
    n: usize,
    t: f64,
    cutoff: &CutoffProfile,
    u: impl Fn(f64) -> f64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let integral = integrate_radial(t, cutoff, 0.0, settings, |r| {
        let amplitude = cutoff.eval(r) * u(r) * r.powi(n as i32 - 1);
        Ok(Complex64::from_polar(amplitude, r * r / (2.0 * t)))
    })?;
    Ok(unit_sphere_area(n) * integral.value)
}

/// `u(x) = exp(-|x|²)` on `ℝⁿ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBump {
    pub dimension: usize,
}

impl GaussianBump {
    pub fn new(dimension: usize) -> Self {
        GaussianBump { dimension }
    }

    pub fn value(&self, r: f64) -> f64 {
        (-r * r).exp()
    }

    /// `Δ^j u(0) = (-4)^j (n/2)_j`.
    pub fn laplacian_power_at_origin(&self, j: usize) -> f64 {
        let half = self.dimension as f64 / 2.0;
        (0..j).map(|i| -4.0 * (half + i as f64)).product()
    }

    pub fn laplacian_powers(&self, k: usize) -> Vec<f64> {
        (0..k).map(|j| self.laplacian_power_at_origin(j)).collect()
    }

    /// `∫_{ℝⁿ} u e^{i|x|²/2t} dx = (π / (1 - i/2t))^{n/2} = (2πit)^{n/2} (1 + 2it)^{-n/2}`.
    pub fn uncut_integral(&self, t: f64) -> Complex64 {
        let base = Complex64::new(PI, 0.0) / Complex64::new(1.0, -1.0 / (2.0 * t));
        base.powf(self.dimension as f64 / 2.0)
    }
}

/// Cutoff for the flat-patch experiments: plateau 4, support 6.
pub fn flat_patch_cutoff() -> CutoffProfile {
    CutoffProfile::new(6.0, 4.0).expect("static cutoff is valid")
}
