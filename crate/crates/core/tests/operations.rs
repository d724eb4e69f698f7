//! Cross-module checks of the public operations against independent oracles.

use std::f64::consts::PI;
use std::sync::Arc;

use pathslice::propagator::{convergence_study, single_step_error, sliced_apply, unitarity_defect};
use pathslice::quadrature::{dense_apply_at, dense_rayleigh_quotient, multiplier, operator_norm_estimate, DenseGrid, GridFunction};
use pathslice::spectral::smoothness_exponent;
use pathslice::{
    Complex64, CutoffProfile, Generator, ManifoldModel, MultiplierCache, MultiplierTable, Point, ProjectorPolicy,
    QuadratureSettings, SlicingPlan, SpectralState, Spectrum,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(key: &str) -> ManifoldModel {
    key.parse().unwrap()
}

fn mode(m: &ManifoldModel, e_max: f64, level: usize, index: usize) -> SpectralState {
    SpectralState::from_terms(Spectrum::new(m.clone(), e_max), &[(level, index, Complex64::new(1.0, 0.0))]).unwrap()
}

#[test]
fn sphere_constant_multiplier_matches_dense_operator() {
    let m = unit("sphere2:1");
    let cutoff = CutoffProfile::default_for(&m);
    let t = 0.05;
    let spectrum = Spectrum::new(m.clone(), 0.0);
    let lam = multiplier(&m, &cutoff, t, &spectrum.levels()[0], &QuadratureSettings::default()).unwrap().value;
    let grid = Arc::new(DenseGrid::resolving(&m, &cutoff, t, 16, 0.0).unwrap());
    let ones = GridFunction::sample(grid, |_| Complex64::new(1.0, 0.0));
    let targets = [Point::new([0.0, 0.0]), Point::new([1.0, 2.0]), Point::new([PI / 2.0, 5.0])];
    for v in dense_apply_at(&m, &cutoff, t, &ones, &targets).unwrap() {
        assert!((v - lam).norm() < 1e-8, "{v} vs {lam}");
    }
}

#[test]
fn circle_slicing_error_is_bounded_by_first_point() {
    let m = unit("circle:1");
    let f = mode(&m, 1.0, 1, 0);
    let cutoff = CutoffProfile::default_for(&m);
    let record = convergence_study(
        &MultiplierCache::new(),
        &cutoff,
        1.0,
        &f,
        &[4, 64],
        ProjectorPolicy::FixedE { energy: 1.0 },
        Generator::CurvatureCorrected,
        &QuadratureSettings::default(),
    )
    .unwrap();
    let c = record.errors[0] * 4.0;
    assert!(record.errors[1] <= c / 64.0, "{:?}", record.errors);
    let plan = SlicingPlan::new(1.0, 64, ProjectorPolicy::FixedE { energy: 1.0 }, 1).unwrap();
    let out = sliced_apply(&MultiplierCache::new(), &cutoff, &plan, &f, &QuadratureSettings::default()).unwrap();
    let coefficient = out.coefficient(1, 0).unwrap();
    assert!((coefficient - Complex64::from_polar(1.0, -0.5)).norm() <= c / 64.0);
}

#[test]
fn single_step_error_is_controlled_by_sobolev_norm() {
    let settings = QuadratureSettings::default();
    let times = [0.2, 0.1, 0.05, 0.025];
    for (key, levels) in [("circle:1", 1..4), ("sphere2:1", 1..4)] {
        let m = unit(key);
        let cutoff = CutoffProfile::default_for(&m);
        let alpha = smoothness_exponent(m.dimension());
        for level in levels {
            let f = mode(&m, 12.0, level, 0);
            let weight = f.sobolev_norm(2.0 * alpha);
            let ratios: Vec<f64> = times
                .iter()
                .map(|&t| single_step_error(&cutoff, t, &f, Generator::CurvatureCorrected, &settings).unwrap() / (t * t * weight))
                .collect();
            // the constant fitted at the largest time covers every smaller one
            assert!(ratios.iter().all(|&r| r <= ratios[0] * (1.0 + 1e-9)), "{key} level {level}: {ratios:?}");
        }
    }
}

#[test]
fn unitarity_defect_over_t_is_bounded() {
    let m = unit("circle:1");
    let cutoff = CutoffProfile::default_for(&m);
    let settings = QuadratureSettings::default();
    let ratios: Vec<f64> = [0.01, 0.02, 0.05, 0.1, 0.2]
        .iter()
        .map(|&t| unitarity_defect(&m, &cutoff, t, 16.0, &settings).unwrap() / t)
        .collect();
    assert!(ratios.iter().all(|&r| r < 1.0), "{ratios:?}");
    assert!(unitarity_defect(&m, &cutoff, 1e-3, 16.0, &settings).unwrap() < 1e-12);
}

#[test]
fn operator_norm_tends_to_one() {
    let m = unit("circle:1");
    let cutoff = CutoffProfile::default_for(&m);
    let settings = QuadratureSettings::default();
    let small = operator_norm_estimate(&m, &cutoff, 1e-3, 25.0, &settings).unwrap();
    assert!((small - 1.0).abs() < 1e-12);
    let moderate = operator_norm_estimate(&m, &cutoff, 0.1, 25.0, &settings).unwrap();
    assert!(moderate < 1.0 + 0.1, "{moderate}");
}

#[test]
fn multiplier_tables_round_trip_through_json() {
    let m = unit("torus:2pi,2pi");
    let spectrum = Spectrum::new(m.clone(), 5.0);
    let table = MultiplierTable::build(&spectrum, &CutoffProfile::default_for(&m), 0.2, 5.0, &QuadratureSettings::default()).unwrap();
    assert_eq!(MultiplierTable::from_json(&table.to_json().unwrap()).unwrap(), table);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn circle_oracle_equivalence(t in 0.1f64..0.5, level in 0usize..5, index in 0usize..2) {
        let m = unit("circle:1");
        let spectrum = Spectrum::new(m.clone(), 16.0);
        let lvl = &spectrum.levels()[level];
        let index = index.min(lvl.multiplicity - 1);
        let cutoff = CutoffProfile::default_for(&m);
        let radial = multiplier(&m, &cutoff, t, lvl, &QuadratureSettings::default()).unwrap().value;
        let dense = dense_rayleigh_quotient(&spectrum, &cutoff, t, level, index, 16).unwrap();
        prop_assert!((radial - dense).norm() < 1e-6);
    }

    #[test]
    fn repeated_squaring_matches_naive_product(n in 1u32..200, t in 0.01f64..0.5, seed in any::<u64>()) {
        let m = unit("sphere2:1");
        let spectrum = Spectrum::new(m.clone(), 12.0);
        let f = SpectralState::random_low_energy(Arc::clone(&spectrum), 4, &mut ChaCha8Rng::seed_from_u64(seed));
        let table = MultiplierTable::build(&spectrum, &CutoffProfile::default_for(&m), t, 12.0, &QuadratureSettings::default()).unwrap();
        let mut naive = f.clone();
        for _ in 0..n {
            naive = table.apply(&naive);
        }
        let err = table.apply_power(&f, n).l2_error(&naive).unwrap();
        prop_assert!(err < 1e-12 * naive.norm().max(1.0), "err {} norm {} opnorm {}", err, naive.norm(), table.operator_norm());
    }

    #[test]
    fn projection_commutes_with_slicing(e in 0.0f64..20.0, n in 1u32..32, seed in any::<u64>()) {
        let m = unit("torus:2pi,2pi");
        let spectrum = Spectrum::new(m.clone(), 10.0);
        let f = SpectralState::random_low_energy(Arc::clone(&spectrum), 6, &mut ChaCha8Rng::seed_from_u64(seed));
        let cutoff = CutoffProfile::default_for(&m);
        let settings = QuadratureSettings::default();
        let cache = MultiplierCache::new();
        let plan = SlicingPlan::new(0.5, n, ProjectorPolicy::FixedE { energy: 5.0 }, 2).unwrap();
        let a = sliced_apply(&cache, &cutoff, &plan, &f.project(e), &settings).unwrap();
        let b = sliced_apply(&cache, &cutoff, &plan, &f, &settings).unwrap().project(e);
        prop_assert_eq!(a, b);
    }
}
