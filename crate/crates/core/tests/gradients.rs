//! Costate boundary values against central finite differences of the
//! functional, for every term separately.

use nalgebra::DMatrix;
use proptest::prelude::*;
use vibcool::functionals::{costate_boundary, eval_terms, FunctionalConfig, OverlapForm, TargetOperators, Variant};
use vibcool::propagator::TwoSurfaceState;
use vibcool::quantum_core::FranckCondonMap;
use vibcool::C64;

const NG: usize = 7;
const NE: usize = 5;
const N_MAX: usize = 4;

fn operators(eta_raw: &[f64]) -> TargetOperators {
    let eta = DMatrix::from_row_slice(NE, NG, eta_raw);
    // dipole large enough that every complement weight stays positive
    let fc = FranckCondonMap::from_matrix(eta, 3.0).unwrap();
    TargetOperators::new(&fc, N_MAX).unwrap()
}

fn states(raw: &[f64]) -> Vec<TwoSurfaceState> {
    let dim = NG + NE;
    (0..=N_MAX)
        .map(|n| {
            let chunk = &raw[2 * dim * n..2 * dim * (n + 1)];
            let amps: Vec<C64> = (0..dim).map(|j| C64::new(chunk[2 * j], chunk[2 * j + 1])).collect();
            TwoSurfaceState::from_parts(&amps[..NG], &amps[NG..])
        })
        .collect()
}

/// Configurations isolating one term each.
fn single_terms(variant: Variant, form: OverlapForm) -> Vec<(&'static str, FunctionalConfig)> {
    let zero = FunctionalConfig {
        lambda_ss: 0.0,
        lambda_leak: 0.0,
        lambda_yield: 0.0,
        lambda_sym: 0.0,
        lambda_ass: 0.0,
        ss_form: form,
        ass_form: form,
        n_star: 2,
        ..FunctionalConfig::default_for(variant, N_MAX)
    };
    let mut out = vec![
        ("ss", FunctionalConfig { lambda_ss: 1.0, ..zero.clone() }),
        ("leak", FunctionalConfig { lambda_leak: 1.0, ..zero.clone() }),
        ("yield", FunctionalConfig { lambda_yield: 1.0, ..zero.clone() }),
    ];
    match variant {
        Variant::Symmetrized => out.push(("sym", FunctionalConfig { lambda_sym: 1.0, ..zero })),
        Variant::Assembly => out.push(("ass", FunctionalConfig { lambda_ass: 1.0, ..zero })),
    }
    out
}

/// Largest deviation between `2 Re chi`, `2 Im chi` and the derivatives of
/// `J_T` along the real and imaginary directions of every amplitude,
/// relative to the largest gradient component.
fn max_relative_error(psi: &[TwoSurfaceState], cfg: &FunctionalConfig, ops: &TargetOperators) -> f64 {
    let chi = costate_boundary(psi, cfg, ops).unwrap();
    let j = |s: &[TwoSurfaceState]| eval_terms(s, cfg, ops).unwrap().j_t;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for n in 0..psi.len() {
        for i in 0..NG + NE {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut plus = psi.to_vec();
                let mut minus = psi.to_vec();
                plus[n].amplitudes_mut()[i] += dir * h;
                minus[n].amplitudes_mut()[i] -= dir * h;
                let fd = (j(&plus) - j(&minus)) / (2.0 * h);
                let c = chi[n].amplitudes()[i];
                let analytic = if dir.re != 0.0 { 2.0 * c.re } else { 2.0 * c.im };
                worst = worst.max((fd - analytic).abs());
                scale = scale.max(analytic.abs());
            }
        }
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

fn ensemble_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0f64..1.0, NE * NG),
        prop::collection::vec(-0.6f64..0.6, 2 * (NG + NE) * (N_MAX + 1)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn costates_match_finite_differences((eta, raw) in ensemble_strategy()) {
        let ops = operators(&eta);
        let psi = states(&raw);
        for variant in [Variant::Symmetrized, Variant::Assembly] {
            for form in [OverlapForm::SquareModulus, OverlapForm::RealPart] {
                for (name, cfg) in single_terms(variant, form) {
                    let err = max_relative_error(&psi, &cfg, &ops);
                    prop_assert!(err < 1e-5, "{:?}/{:?}/{}: relative error {:e}", variant, form, name, err);
                }
            }
        }
    }

    #[test]
    fn full_functional_gradient_is_sum_of_terms((eta, raw) in ensemble_strategy()) {
        let ops = operators(&eta);
        let psi = states(&raw);
        for variant in [Variant::Symmetrized, Variant::Assembly] {
            let cfg = FunctionalConfig { n_star: 2, ..FunctionalConfig::default_for(variant, N_MAX) };
            prop_assert!(max_relative_error(&psi, &cfg, &ops) < 1e-5);
        }
    }
}
