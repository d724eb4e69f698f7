//! Time slicing `U(t/N)^N ρ(E)` and convergence measurement.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{fit_rate, RateFit};
use crate::kernel::CutoffProfile;
use crate::manifold::ManifoldModel;
use crate::quadrature::{MultiplierCache, MultiplierTable, QuadratureSettings};
use crate::spectral::{smoothness_exponent, Generator, SpectralState, Spectrum};

pub const DEFAULT_EPSILON: f64 = 0.1;

/// Energy cutoff of the spectral projector applied before slicing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum ProjectorPolicy {
    /// A fixed `E` for every `N`.
    FixedE { energy: f64 },
    /// `E = N`.
    RhoN,
    /// `E = N^{1/α - ε}`.
    RhoNPower { epsilon: f64 },
}

impl ProjectorPolicy {
    pub fn energy(&self, n: u32, dimension: usize) -> f64 {
        match *self {
            ProjectorPolicy::FixedE { energy } => energy,
            ProjectorPolicy::RhoN => n as f64,
            ProjectorPolicy::RhoNPower { epsilon } => (n as f64).powf(1.0 / smoothness_exponent(dimension) - epsilon),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ProjectorPolicy::FixedE { energy } => format!("fixed:{energy}"),
            ProjectorPolicy::RhoN => "rho-n".to_string(),
            ProjectorPolicy::RhoNPower { epsilon } => format!("rho-n-power:{epsilon}"),
        }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        match *self {
            ProjectorPolicy::FixedE { energy } if !(energy >= 0.0) => {
                Err(Error::config("energy", format!("projector energy must be nonnegative, got {energy}")))
            }
            ProjectorPolicy::RhoNPower { epsilon }
                if !(epsilon > 0.0 && epsilon < 1.0 / smoothness_exponent(dimension)) =>
            {
                Err(Error::config("energy", format!("epsilon must lie in (0, 1/α), got {epsilon}")))
            }
            _ => Ok(()),
        }
    }
}

/// Parses `fixed:E`, `rho-n`, `rho-n-power` or `rho-n-power:ε`.
impl FromStr for ProjectorPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("energy", format!("cannot parse {s:?}; expected fixed:E, rho-n or rho-n-power[:ε]"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim().parse::<f64>().map_err(|_| bad())?)),
            None => (s.trim(), None),
        };
        match (name, arg) {
            ("fixed", Some(energy)) => Ok(ProjectorPolicy::FixedE { energy }),
            ("rho-n", None) => Ok(ProjectorPolicy::RhoN),
            ("rho-n-power", epsilon) => Ok(ProjectorPolicy::RhoNPower { epsilon: epsilon.unwrap_or(DEFAULT_EPSILON) }),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicingPlan {
    pub t: f64,
    pub n: u32,
    pub policy: ProjectorPolicy,
}

impl SlicingPlan {
    pub fn new(t: f64, n: u32, policy: ProjectorPolicy, dimension: usize) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::config("t", format!("time must be positive, got {t}")));
        }
        if n == 0 {
            return Err(Error::config("n_list", "slice counts must be at least 1"));
        }
        policy.validate(dimension)?;
        Ok(SlicingPlan { t, n, policy })
    }

    pub fn step(&self) -> f64 {
        self.t / self.n as f64
    }

    pub fn effective_energy(&self, spectrum: &Spectrum) -> f64 {
        self.policy.energy(self.n, spectrum.manifold().dimension()).min(spectrum.e_max())
    }
}

/// `U(t/N)^N ρ(E) f`, with one multiplier table per step size.
pub fn sliced_apply(
    cache: &MultiplierCache,
    cutoff: &CutoffProfile,
    plan: &SlicingPlan,
    f: &SpectralState,
    settings: &QuadratureSettings,
) -> Result<SpectralState> {
    let spectrum = f.spectrum();
    let energy = plan.effective_energy(spectrum);
    let table = cache.get_or_build(spectrum, cutoff, plan.step(), energy, settings)?;
    Ok(table.apply_power(f, plan.n))
}

/// `‖U(t) f − exp(it·generator/2) f‖`.
pub fn single_step_error(
    cutoff: &CutoffProfile,
    t: f64,
    f: &SpectralState,
    generator: Generator,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let spectrum = f.spectrum();
    let table = MultiplierTable::build(spectrum, cutoff, t, spectrum.e_max(), settings)?;
    table.apply(f).l2_error(&f.exact_propagate(t, generator))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub t: f64,
    pub n_list: Vec<u32>,
    pub errors: Vec<f64>,
    #[serde(rename = "E_effective")]
    pub e_effective: Vec<f64>,
    pub runtime_ms: Vec<f64>,
    /// Log-log fit of error against `N`; absent with fewer than three positive errors.
    pub fit: Option<RateFit>,
}

impl ConvergenceRecord {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Errors `‖U(t/N)^N ρ(E_N) f − exp(it·generator/2) ρ(E_N) f‖` over `n_list`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    cache: &MultiplierCache,
    cutoff: &CutoffProfile,
    t: f64,
    f: &SpectralState,
    n_list: &[u32],
    policy: ProjectorPolicy,
    generator: Generator,
    settings: &QuadratureSettings,
) -> Result<ConvergenceRecord> {
    if n_list.is_empty() {
        return Err(Error::config("n_list", "at least one slice count is required"));
    }
    let dimension = f.manifold().dimension();
    let mut record = ConvergenceRecord {
        t,
        n_list: n_list.to_vec(),
        errors: Vec::with_capacity(n_list.len()),
        e_effective: Vec::with_capacity(n_list.len()),
        runtime_ms: Vec::with_capacity(n_list.len()),
        fit: None,
    };
    for &n in n_list {
        let plan = SlicingPlan::new(t, n, policy, dimension)?;
        let start = Instant::now();
        let energy = plan.effective_energy(f.spectrum());
        let sliced = sliced_apply(cache, cutoff, &plan, f, settings)?;
        let reference = f.project(energy).exact_propagate(t, generator);
        record.errors.push(sliced.l2_error(&reference)?);
        record.runtime_ms.push(start.elapsed().as_secs_f64() * 1e3);
        record.e_effective.push(energy);
    }
    if n_list.len() >= 3 && record.errors.iter().all(|&e| e > 0.0) {
        let points: Vec<(f64, f64)> = n_list.iter().map(|&n| n as f64).zip(record.errors.iter().copied()).collect();
        record.fit = Some(fit_rate(&points)?);
    }
    Ok(record)
}

/// `max_{E_j ≤ E} ||λ_j(t)| − 1|`.
pub fn unitarity_defect(
    m: &ManifoldModel,
    cutoff: &CutoffProfile,
    t: f64,
    energy: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let spectrum = Spectrum::new(m.clone(), energy);
    let table = MultiplierTable::build(&spectrum, cutoff, t, energy, settings)?;
    Ok(table.entries.iter().map(|e| (e.value.norm() - 1.0).abs()).fold(0.0, f64::max))
}

/// `(max_{E_j ≤ E} |λ_j(t/N)|)^N`, the norm bound of the sliced product.
pub fn product_bound(
    m: &ManifoldModel,
    cutoff: &CutoffProfile,
    t: f64,
    energy: f64,
    n: u32,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let spectrum = Spectrum::new(m.clone(), energy);
    let table = MultiplierTable::build(&spectrum, cutoff, t / n as f64, energy, settings)?;
    Ok(table.operator_norm().powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn circle_mode(k_level: usize, e_max: f64) -> SpectralState {
        let m = ManifoldModel::circle(1.0).unwrap();
        SpectralState::from_terms(Spectrum::new(m, e_max), &[(k_level, 0, Complex64::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn policies() {
        assert_eq!(ProjectorPolicy::RhoN.energy(16, 2), 16.0);
        assert_eq!(ProjectorPolicy::FixedE { energy: 4.0 }.energy(64, 1), 4.0);
        let e = ProjectorPolicy::RhoNPower { epsilon: 0.1 }.energy(1024, 2);
        assert!((e - 1024f64.powf(1.0 / 3.0 - 0.1)).abs() < 1e-12);
        assert!(ProjectorPolicy::RhoNPower { epsilon: 0.5 }.validate(2).is_err());
        assert!(SlicingPlan::new(1.0, 0, ProjectorPolicy::RhoN, 1).is_err());
        assert!(SlicingPlan::new(-1.0, 2, ProjectorPolicy::RhoN, 1).is_err());
        assert_eq!("fixed:4".parse::<ProjectorPolicy>().unwrap(), ProjectorPolicy::FixedE { energy: 4.0 });
        assert_eq!("rho-n".parse::<ProjectorPolicy>().unwrap(), ProjectorPolicy::RhoN);
        assert_eq!("rho-n-power".parse::<ProjectorPolicy>().unwrap(), ProjectorPolicy::RhoNPower { epsilon: 0.1 });
        assert!("fixed".parse::<ProjectorPolicy>().is_err());
    }

    #[test]
    fn one_slice_is_single_step() {
        let f = circle_mode(1, 9.0);
        let cutoff = CutoffProfile::default_for(f.manifold());
        let settings = QuadratureSettings::default();
        let cache = MultiplierCache::new();
        let plan = SlicingPlan::new(0.3, 1, ProjectorPolicy::FixedE { energy: 9.0 }, 1).unwrap();
        let sliced = sliced_apply(&cache, &cutoff, &plan, &f, &settings).unwrap();
        let table = MultiplierTable::build(f.spectrum(), &cutoff, 0.3, 9.0, &settings).unwrap();
        assert_eq!(sliced, table.apply(&f));
    }

    #[test]
    fn projected_out_states_vanish() {
        let f = circle_mode(3, 16.0);
        let cutoff = CutoffProfile::default_for(f.manifold());
        let plan = SlicingPlan::new(1.0, 8, ProjectorPolicy::FixedE { energy: 4.0 }, 1).unwrap();
        let out = sliced_apply(&MultiplierCache::new(), &cutoff, &plan, &f, &QuadratureSettings::default()).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn squaring_power_matches_naive_product() {
        let f = circle_mode(2, 9.0);
        let cutoff = CutoffProfile::default_for(f.manifold());
        let table = MultiplierTable::build(f.spectrum(), &cutoff, 1.0 / 64.0, 9.0, &QuadratureSettings::default()).unwrap();
        for n in [1u32, 7, 64, 1000] {
            let fast = table.apply_power(&f, n);
            let mut naive = f.clone();
            for _ in 0..n {
                naive = table.apply(&naive);
            }
            assert!(fast.l2_error(&naive).unwrap() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn projector_commutes_with_slicing() {
        let m = ManifoldModel::sphere2(1.0).unwrap();
        let spectrum = Spectrum::new(m, 12.0);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let f = SpectralState::random_low_energy(Arc::clone(&spectrum), 4, &mut rng);
        let cutoff = CutoffProfile::default_for(f.manifold());
        let settings = QuadratureSettings::default();
        let cache = MultiplierCache::new();
        let plan = SlicingPlan::new(0.5, 4, ProjectorPolicy::FixedE { energy: 6.0 }, 2).unwrap();
        for e in [6.0, 12.0] {
            let a = sliced_apply(&cache, &cutoff, &plan, &f.project(e), &settings).unwrap();
            let b = sliced_apply(&cache, &cutoff, &plan, &f, &settings).unwrap().project(e);
            assert_eq!(a, b);
        }
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn single_step_error_vanishes_as_t_shrinks() {
        let f = circle_mode(1, 4.0);
        let cutoff = CutoffProfile::default_for(f.manifold());
        let settings = QuadratureSettings::default();
        let errors: Vec<f64> = [0.2, 0.05, 0.0125]
            .iter()
            .map(|&t| single_step_error(&cutoff, t, &f, Generator::CurvatureCorrected, &settings).unwrap())
            .collect();
        assert!(errors[0] > errors[1] && errors[1] > errors[2] && errors[2] < 1e-6, "{errors:?}");
    }

    #[test]
    fn eigenstate_error_is_scalar_model() {
        let f = circle_mode(1, 1.0);
        let cutoff = CutoffProfile::default_for(f.manifold());
        let settings = QuadratureSettings::default();
        let cache = MultiplierCache::new();
        let ns = [4, 8, 16, 32, 64];
        let record = convergence_study(
            &cache,
            &cutoff,
            1.0,
            &f,
            &ns,
            ProjectorPolicy::FixedE { energy: 1.0 },
            Generator::CurvatureCorrected,
            &settings,
        )
        .unwrap();
        for (&n, &err) in ns.iter().zip(&record.errors) {
            let lam = cache.get_or_build(f.spectrum(), &cutoff, 1.0 / n as f64, 1.0, &settings).unwrap().get(1).unwrap();
            let scalar = (lam.powu(n) - Complex64::from_polar(1.0, -0.5)).norm();
            assert!((err - scalar).abs() < 1e-14);
        }
        assert!(record.errors.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(record.e_effective, vec![1.0; 5]);
    }

    #[test]
    fn unitarity_defect_shrinks_with_t() {
        let m = ManifoldModel::circle(1.0).unwrap();
        let cutoff = CutoffProfile::default_for(&m);
        let settings = QuadratureSettings::default();
        let coarse = unitarity_defect(&m, &cutoff, 0.2, 16.0, &settings).unwrap();
        let fine = unitarity_defect(&m, &cutoff, 0.01, 16.0, &settings).unwrap();
        assert!(fine < coarse && fine < 1e-3, "{coarse} {fine}");
    }
}
