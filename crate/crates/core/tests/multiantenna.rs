use aircomp::model::{compute_mse, ChannelState, SystemParams};
use aircomp::montecarlo::sample_multiantenna_channel;
use aircomp::multiantenna::{
    antenna_selection, complex_form_mse, effective_channels, random_direction_search,
    solve_for_direction, Direction, MultiAntennaChannel,
};
use aircomp::policies::computation_optimal;
use num_complex::Complex64;
use proptest::prelude::*;

fn setup() -> impl Strategy<Value = (SystemParams, MultiAntennaChannel, u64)> {
    (
        1usize..=8,
        1usize..=10,
        0.1f64..100.0,
        0.01f64..10.0,
        any::<u64>(),
    )
        .prop_map(|(n, k, p, s2, seed)| {
            (
                SystemParams::new(k, p, s2).unwrap(),
                sample_multiantenna_channel(n, k, seed, 0),
                seed,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn complex_form_equals_reduced_mse((params, ch, seed) in setup(), idx in 0u64..1000) {
        let v = Direction::random(ch.antennas(), seed, idx);
        let sol = solve_for_direction(&params, &ch, &v).unwrap();
        let complex = complex_form_mse(&params, &ch, &sol.rx_vector, &sol.tx_scales).unwrap();
        prop_assert!((complex - sol.mse).abs() <= 1e-10 * sol.mse.max(1e-300), "{} vs {}", complex, sol.mse);
        let eff = effective_channels(&ch, &v).unwrap();
        let direct = computation_optimal(&params, &eff).unwrap();
        prop_assert_eq!(compute_mse(&params, &eff, &direct.policy).unwrap(), sol.mse);
    }

    #[test]
    fn phase_rotation_changes_nothing((params, ch, seed) in setup(), theta in 0.0f64..std::f64::consts::TAU) {
        let v = Direction::random(ch.antennas(), seed, 3);
        let w = v.scaled(Complex64::from_polar(1.0, theta));
        let e1 = effective_channels(&ch, &v).unwrap();
        let e2 = effective_channels(&ch, &w).unwrap();
        for (a, b) in e1.gains().iter().zip(e2.gains()) {
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
        let m1 = solve_for_direction(&params, &ch, &v).unwrap().mse;
        let m2 = solve_for_direction(&params, &ch, &w).unwrap().mse;
        prop_assert!((m1 - m2).abs() <= 1e-10 * m1);
    }

    #[test]
    fn random_search_improves_with_trials((params, ch, seed) in setup()) {
        let mut prev = f64::INFINITY;
        for trials in [1, 3, 10, 30, 100] {
            let m = random_direction_search(&params, &ch, trials, seed, false).unwrap().mse;
            prop_assert!(m <= prev);
            prev = m;
        }
    }

    #[test]
    fn basis_candidates_dominate_selection((params, ch, seed) in setup()) {
        let sel = antenna_selection(&params, &ch).unwrap().mse;
        let search = random_direction_search(&params, &ch, 5, seed, true).unwrap().mse;
        prop_assert!(search <= sel);
    }
}

#[test]
fn single_antenna_matches_scalar_optimum() {
    let params = SystemParams::new(5, 10.0, 1.0).unwrap();
    let ch = sample_multiantenna_channel(1, 5, 11, 0);
    let gains: Vec<f64> = (0..5).map(|k| ch.column(k)[0].norm()).collect();
    let scalar = ChannelState::from_gains(&gains).unwrap();
    let expect = compute_mse(
        &params,
        &scalar,
        &computation_optimal(&params, &scalar).unwrap().policy,
    )
    .unwrap();
    for idx in 0..20 {
        let m = solve_for_direction(&params, &ch, &Direction::random(1, 4, idx))
            .unwrap()
            .mse;
        assert!((m - expect).abs() <= 1e-12 * expect);
    }
    assert!((antenna_selection(&params, &ch).unwrap().mse - expect).abs() <= 1e-12 * expect);
}
