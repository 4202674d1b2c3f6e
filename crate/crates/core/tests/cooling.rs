//! Probability bookkeeping of the optical pumping cycle.

use nalgebra::DMatrix;
use proptest::prelude::*;
use vibcool::cooling::{build_cycle_map, simulate_cooling, CoolingState, CycleMap};
use vibcool::presets::preset;
use vibcool::pulse::Pulse;
use vibcool::system::MolecularSystem;

#[test]
fn cycle_map_columns_plus_losses_sum_to_one() {
    let p = preset("compact-parabola").unwrap();
    let sys = MolecularSystem::build(p.system.clone()).unwrap();
    let pulse = p.pulse.build(&sys).unwrap().scaled(20.0);
    let ham = sys.hamiltonian(pulse.omega_l()).unwrap();
    let map = build_cycle_map(&ham, &pulse, sys.emission()).unwrap();
    let mut moved = 0.0;
    for m in 0..map.n_levels() {
        let col: f64 = map.matrix().column(m).iter().sum();
        assert!((col + map.lost()[m] - 1.0).abs() < 1e-10, "column {m}: {col} + {}", map.lost()[m]);
        moved += 1.0 - map.matrix()[(m, m)];
    }
    // the audit is only meaningful if the pulse actually redistributes
    assert!(moved > 1e-3);
}

#[test]
fn zero_field_leaves_populations_untouched() {
    let p = preset("compact-parabola").unwrap();
    let sys = MolecularSystem::build(p.system.clone()).unwrap();
    let guess = p.pulse.build(&sys).unwrap();
    let pulse = Pulse::zero(*guess.grid(), guess.omega_l());
    let ham = sys.hamiltonian(pulse.omega_l()).unwrap();
    let map = build_cycle_map(&ham, &pulse, sys.emission()).unwrap();
    let id = CycleMap::identity(map.n_levels());
    for (a, b) in map.matrix().iter().zip(id.matrix().iter()) {
        assert!((a - b).abs() < 1e-12);
    }
}

fn substochastic(n: usize, raw: &[f64], keep: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::from_column_slice(n, n, raw);
    for (j, k) in keep.iter().enumerate() {
        let s: f64 = m.column(j).iter().sum();
        let mut col = m.column_mut(j);
        col *= k / s;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn probability_is_conserved_over_many_cycles(
        raw in prop::collection::vec(0.01f64..1.0, 36),
        keep in prop::collection::vec(0.9f64..1.0, 6),
        start in 0usize..6,
    ) {
        let map = CycleMap::from_matrix(substochastic(6, &raw, &keep)).unwrap();
        let init = CoolingState::equipartition(6, start, 5).unwrap();
        let h = simulate_cooling(&init, &map, 10_000).unwrap();
        for s in h.states.iter().step_by(500) {
            prop_assert!((s.retained() + s.lost - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn absorbing_target_population_never_decreases(
        raw in prop::collection::vec(0.01f64..1.0, 25),
        keep in prop::collection::vec(0.8f64..1.0, 5),
    ) {
        let mut m = substochastic(5, &raw, &keep);
        m.column_mut(0).fill(0.0);
        m[(0, 0)] = 1.0;
        let map = CycleMap::from_matrix(m).unwrap();
        let init = CoolingState::equipartition(5, 1, 4).unwrap();
        let h = simulate_cooling(&init, &map, 300).unwrap();
        for w in h.states.windows(2) {
            prop_assert!(w[1].target_population() >= w[0].target_population() - 1e-15);
        }
    }
}
