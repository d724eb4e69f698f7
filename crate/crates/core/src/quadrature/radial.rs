//! Radial quadrature for the eigenspace multipliers `λ_j(t)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss::{gauss_legendre, panel_rule, PANEL_ORDER};
use crate::error::{Error, Result};
use crate::kernel::{CutoffProfile, KernelFactors};
use crate::manifold::{ManifoldKind, ManifoldModel};
use crate::spectral::{EigenLevel, LevelBasis, SpectralState, Spectrum};
use crate::special::legendre;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Quadrature nodes per local wavelength of the integrand.
    pub oscillation_budget: u32,
    /// Accepted change between successive refinements, relative to `max(1, |I|)`.
    pub tolerance: f64,
    pub max_refinements: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { oscillation_budget: 16, tolerance: 1e-12, max_refinements: 6 }
    }
}

/// One level of the refinement trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub budget: u32,
    pub nodes: usize,
    pub value: Complex64,
    pub error_estimate: f64,
}

/// Composite Gauss–Legendre rule on `[0, support]`.
///
/// On the plateau the panels are graded so that each covers at most
/// `PANEL_ORDER / budget` local wavelengths of `e^{ir²/2t}` (plus an optional
/// extra wavenumber from the test function). The transition zone
/// `[plateau, support]` uses uniform panels sized for the worst-case
/// wavelength at `r = support`.
#[derive(Clone, Debug)]
pub struct RadialRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    budget: u32,
    oscillatory_nodes: usize,
}

impl RadialRule {
    pub fn build(t: f64, cutoff: &CutoffProfile, budget: u32, extra_wavenumber: f64) -> Self {
        let budget = budget.max(8);
        let wavenumber = |r: f64| r / t + extra_wavenumber;
        let span = |r: f64| PANEL_ORDER as f64 * 2.0 * PI / (budget as f64 * wavenumber(r));
        let (plateau, support) = (cutoff.plateau(), cutoff.support());

        let mut edges = vec![0.0];
        let mut r = 0.0;
        while r < plateau {
            let first = span(r).min(plateau / 4.0);
            let w = first.min(span(r + first));
            r = (r + w).min(plateau);
            if plateau - r < 1e-12 * plateau {
                r = plateau;
            }
            edges.push(r);
        }
        let width = support - plateau;
        let panels = (width / span(support).min(width / 8.0)).ceil() as usize;
        for i in 1..=panels {
            edges.push(plateau + width * i as f64 / panels as f64);
        }

        let (x, w) = panel_rule();
        let mut nodes = Vec::with_capacity(PANEL_ORDER * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (xi, wi) in x.iter().zip(w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        RadialRule { nodes, weights, budget, oscillatory_nodes: panels * PANEL_ORDER }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    /// Node count in the transition zone `[plateau, support]`.
    pub fn oscillatory_nodes(&self) -> usize {
        self.oscillatory_nodes
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> Result<Complex64>) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for (&r, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(r)?;
        }
        Ok(sum)
    }
}

/// Result of an adaptively refined radial integral.
#[derive(Clone, Debug)]
pub struct RadialIntegral {
    pub value: Complex64,
    pub error_estimate: f64,
    pub nodes: usize,
    pub trace: Vec<RefinementStep>,
}

/// Integrates `f` over `[0, support]`, doubling the oscillation budget until
/// two successive rules agree within the tolerance.
pub fn integrate_radial(
    t: f64,
    cutoff: &CutoffProfile,
    extra_wavenumber: f64,
    settings: &QuadratureSettings,
    mut f: impl FnMut(f64) -> Result<Complex64>,
) -> Result<RadialIntegral> {
    let mut budget = settings.oscillation_budget;
    let rule = RadialRule::build(t, cutoff, budget, extra_wavenumber);
    let mut previous = rule.integrate(&mut f)?;
    let mut trace = vec![RefinementStep { budget, nodes: rule.len(), value: previous, error_estimate: f64::INFINITY }];
    for _ in 0..settings.max_refinements.max(1) {
        budget *= 2;
        let rule = RadialRule::build(t, cutoff, budget, extra_wavenumber);
        let value = rule.integrate(&mut f)?;
        let error_estimate = (value - previous).norm();
        trace.push(RefinementStep { budget, nodes: rule.len(), value, error_estimate });
        if error_estimate <= settings.tolerance * value.norm().max(1.0) {
            return Ok(RadialIntegral { value, error_estimate, nodes: rule.len(), trace });
        }
        previous = value;
    }
    Err(Error::QuadratureNonConvergence { trace })
}

/// Distance-only profile through which a rotation-invariant kernel acts on a
/// level, normalized to 1 at `r = 0` (Funk–Hecke).
#[derive(Clone, Debug)]
pub enum ZonalProfile {
    Cosine { wavenumber: f64 },
    Legendre { l: usize, radius: f64 },
    /// Average of `cos(κ r ω·e)` over directions `ω ∈ S^{n-1}`, `n ≥ 2`.
    DirectionAverage { wavenumber: f64, cosines: Vec<f64>, weights: Vec<f64> },
}

impl ZonalProfile {
    /// `max_radius` bounds the arguments the profile will be evaluated at.
    pub fn new(m: &ManifoldModel, level: &EigenLevel, max_radius: f64) -> Self {
        let wavenumber = level.eigenvalue.sqrt();
        match (m.kind(), &level.basis) {
            (ManifoldKind::Sphere2 { radius }, LevelBasis::Harmonic { l }) => ZonalProfile::Legendre { l: *l, radius: *radius },
            (ManifoldKind::FlatTorus { .. }, _) if m.dimension() >= 2 && wavenumber > 0.0 => {
                let n = m.dimension();
                let nodes = 24 + 2 * (wavenumber * max_radius).ceil() as usize;
                let (x, w) = gauss_legendre(nodes);
                let mut cosines = Vec::with_capacity(nodes);
                let mut weights = Vec::with_capacity(nodes);
                for (xi, wi) in x.iter().zip(&w) {
                    let theta = 0.5 * PI * (xi + 1.0);
                    cosines.push(theta.cos());
                    weights.push(wi * theta.sin().powi(n as i32 - 2));
                }
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                ZonalProfile::DirectionAverage { wavenumber, cosines, weights }
            }
            _ => ZonalProfile::Cosine { wavenumber },
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ZonalProfile::Cosine { wavenumber } => (wavenumber * r).cos(),
            ZonalProfile::Legendre { l, radius } => legendre(*l, (r / radius).cos()),
            ZonalProfile::DirectionAverage { wavenumber, cosines, weights } => {
                cosines.iter().zip(weights).map(|(c, w)| w * (wavenumber * r * c).cos()).sum()
            }
        }
    }
}

/// Zonal profile `Φ_j(r)` of a level, with `Φ_j(0) = 1`.
pub fn zonal_profile(m: &ManifoldModel, level: &EigenLevel, r: f64) -> f64 {
    ZonalProfile::new(m, level, r).eval(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMultiplier {
    pub level: usize,
    pub eigenvalue: f64,
    pub value: Complex64,
    pub error_estimate: f64,
    pub nodes: usize,
}

/// `λ_j(t) = |S^{n-1}| ∫_0^δ K(t, r) Φ_j(r) g(r) dr`: the eigenvalue of the
/// short-time operator on level `j`.
pub fn multiplier(
    m: &ManifoldModel,
    cutoff: &CutoffProfile,
    t: f64,
    level: &EigenLevel,
    settings: &QuadratureSettings,
) -> Result<LevelMultiplier> {
    let factors = KernelFactors::new(m, *cutoff, t)?;
    let profile = ZonalProfile::new(m, level, cutoff.support());
    let directions = m.directions_measure();
    let integral = integrate_radial(t, cutoff, level.eigenvalue.sqrt(), settings, |r| {
        Ok(factors.value(r)? * (profile.eval(r) * m.polar_volume_density(r)?))
    })?;
    Ok(LevelMultiplier {
        level: level.index,
        eigenvalue: level.eigenvalue,
        value: directions * integral.value,
        error_estimate: directions * integral.error_estimate,
        nodes: integral.nodes,
    })
}

/// `U(t)` restricted to the levels with `E_j ≤ e_cap`, as one scalar per level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierTable {
    pub manifold: String,
    pub t: f64,
    pub cutoff: CutoffProfile,
    pub e_cap: f64,
    pub entries: Vec<LevelMultiplier>,
}

impl MultiplierTable {
    pub fn build(
        spectrum: &Spectrum,
        cutoff: &CutoffProfile,
        t: f64,
        e_cap: f64,
        settings: &QuadratureSettings,
    ) -> Result<Self> {
        let m = spectrum.manifold();
        let entries = spectrum
            .levels()
            .iter()
            .filter(|l| l.eigenvalue <= e_cap)
            .map(|l| multiplier(m, cutoff, t, l, settings))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiplierTable { manifold: m.key(), t, cutoff: *cutoff, e_cap, entries })
    }

    pub fn get(&self, level: usize) -> Option<Complex64> {
        self.entries.get(level).filter(|e| e.level == level).map(|e| e.value)
    }

    /// `U(t)ρ(e_cap) f`: levels outside the table are annihilated.
    pub fn apply(&self, f: &SpectralState) -> SpectralState {
        self.apply_power(f, 1)
    }

    /// `U(t)^N ρ(e_cap) f` with `λ_j^N` by repeated squaring.
    pub fn apply_power(&self, f: &SpectralState, n: u32) -> SpectralState {
        f.map_levels(|l| self.get(l.index).map_or(Complex64::new(0.0, 0.0), |lam| lam.powu(n)))
    }

    /// `max_j |λ_j|`, the operator norm of `U(t)ρ(e_cap)`.
    pub fn operator_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.value.norm()).fold(0.0, f64::max)
    }

    pub fn max_error_estimate(&self) -> f64 {
        self.entries.iter().map(|e| e.error_estimate).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    manifold: String,
    spectrum_e_max: u64,
    e_cap: u64,
    t: u64,
    support: u64,
    plateau: u64,
    budget: u32,
    tolerance: u64,
    max_refinements: u32,
}

/// Shared cache of multiplier tables: concurrent reads, exclusive inserts.
#[derive(Debug, Default)]
pub struct MultiplierCache {
    tables: RwLock<HashMap<CacheKey, Arc<MultiplierTable>>>,
}

impl MultiplierCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tables.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_build(
        &self,
        spectrum: &Spectrum,
        cutoff: &CutoffProfile,
        t: f64,
        e_cap: f64,
        settings: &QuadratureSettings,
    ) -> Result<Arc<MultiplierTable>> {
        let key = CacheKey {
            manifold: spectrum.manifold().key(),
            spectrum_e_max: spectrum.e_max().to_bits(),
            e_cap: e_cap.min(spectrum.e_max()).to_bits(),
            t: t.to_bits(),
            support: cutoff.support().to_bits(),
            plateau: cutoff.plateau().to_bits(),
            budget: settings.oscillation_budget,
            tolerance: settings.tolerance.to_bits(),
            max_refinements: settings.max_refinements,
        };
        if let Some(table) = self.tables.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(table));
        }
        let table = Arc::new(MultiplierTable::build(spectrum, cutoff, t, e_cap, settings)?);
        let mut guard = self.tables.write().expect("cache lock poisoned");
        Ok(Arc::clone(guard.entry(key).or_insert(table)))
    }
}

/// `‖U(t)ρ(E)‖ = max_{E_j ≤ E} |λ_j(t)|`.
pub fn operator_norm_estimate(
    m: &ManifoldModel,
    cutoff: &CutoffProfile,
    t: f64,
    energy: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let spectrum = Spectrum::new(m.clone(), energy);
    Ok(MultiplierTable::build(&spectrum, cutoff, t, energy, settings)?.operator_norm())
}
