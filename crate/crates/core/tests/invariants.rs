use physlearn_core::contlearn::{drift_potential, weight_drift};
use physlearn_core::doublewell::{mean_displacement, stationary_density, DoubleWell};
use physlearn_core::ensemble::Sequential;
use physlearn_core::numeric::UniformGrid;
use physlearn_core::observer::bayes_update;
use physlearn_core::perceptron::{error_variance, fire_probability, mean_error};
use physlearn_core::qkernel::{kernel_matrix, Detection, Shots};
use physlearn_core::spiking::{neuron_step, NeuronState, SpikingNeuron};
use physlearn_core::switch::{ramp_propagate, steady_state, swap_statistics};
use physlearn_core::thermo::{LedgerMode, ThermoLedger, TrialInput};
use physlearn_core::RngStream;
use proptest::prelude::*;

fn rate() -> impl Strategy<Value = f64> {
    0.01f64..50.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_stream_same_samples(root in any::<u64>(), id in any::<u64>()) {
        let mut a = RngStream::new(root, id);
        let mut b = RngStream::new(root, id);
        for _ in 0..16 {
            prop_assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }

    #[test]
    fn steady_state_conserves_and_balances(mu in rate(), nu in rate()) {
        let (pm, pp) = steady_state(mu, nu).unwrap();
        prop_assert!((pm + pp - 1.0).abs() < 1e-12);
        prop_assert!((pp / pm - mu / nu).abs() <= 1e-10 * (mu / nu).max(1.0));
    }

    #[test]
    fn ramp_conserves_probability(mu in rate(), nu in rate(), tau in 0.01f64..20.0) {
        let (pm, pp) = ramp_propagate(mu, nu, tau).unwrap();
        prop_assert!((pm + pp - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&pp));
    }

    #[test]
    fn swap_outcomes_are_exhaustive(mu in rate(), nu in rate(), tau in 0.01f64..20.0) {
        let s = swap_statistics(mu, nu, tau).unwrap();
        prop_assert!((s.total() - 1.0).abs() < 1e-12);
        prop_assert!(s.no_switch >= 0.0 && s.up >= -1e-12 && s.down >= -1e-12);
    }

    #[test]
    fn double_well_density_mirrors_under_bias_flip(lambda in -0.3f64..0.3, d in 0.05f64..1.0) {
        let grid = UniformGrid::new(-2.5, 2.5, 1001).unwrap();
        let plus = stationary_density(&DoubleWell::new(lambda, d).unwrap(), &grid).unwrap();
        let minus = stationary_density(&DoubleWell::new(-lambda, d).unwrap(), &grid).unwrap();
        for (p, m) in plus.iter().zip(minus.iter().rev()) {
            prop_assert!((p - m).abs() <= 1e-10 * p.abs().max(1.0));
        }
        let up = mean_displacement(&DoubleWell::new(lambda, d).unwrap(), &grid).unwrap();
        let down = mean_displacement(&DoubleWell::new(-lambda, d).unwrap(), &grid).unwrap();
        prop_assert!((up + down).abs() < 1e-9);
    }

    #[test]
    fn bayes_updates_commute(
        prior in 0.01f64..0.99,
        x1 in -3.0f64..3.0,
        x2 in -3.0f64..3.0,
        chi in 0.1f64..1.0,
        delta in 1.0f64..4.0,
    ) {
        let p = (1.0 - prior, prior);
        let a = bayes_update(bayes_update(p, x1, chi, delta).unwrap(), x2, chi, delta).unwrap();
        let b = bayes_update(bayes_update(p, x2, chi, delta).unwrap(), x1, chi, delta).unwrap();
        prop_assert!((a.1 - b.1).abs() < 1e-10);
        prop_assert!((a.0 + a.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn error_variance_matches_binary_cost(
        w in prop::collection::vec(-5.0f64..5.0, 2),
        b in -5.0f64..5.0,
        beta in 0.1f64..5.0,
        bits in prop::collection::vec(any::<bool>(), 2),
        label in prop::bool::ANY,
    ) {
        let xi: Vec<f64> = bits.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
        let label = if label { 1.0 } else { -1.0 };
        let p = fire_probability(&w, b, &xi, beta).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        let e = mean_error(label, 2.0 * p - 1.0);
        prop_assert!((0.0..=1.0).contains(&e));
        // The cost is 0 or 1, so its second moment equals its mean.
        prop_assert!((error_variance(e) - (e - e * e)).abs() < 1e-15);
    }

    #[test]
    fn ledger_identities_are_exact(
        rows in prop::collection::vec((-1.0f64..1.0, 0.0f64..1.0, -0.1f64..0.1), 1..40),
        beta_th in 0.1f64..10.0,
    ) {
        let mut ledger = ThermoLedger::new(LedgerMode::Thermal { beta_th }).unwrap();
        for &(label, activation, delta_error) in &rows {
            let input = TrialInput { eta: 0.5, label: label.signum(), e0: 1.0, beta: 2.0, activation, delta_error };
            let row = *ledger.step(&input);
            let df = row.delta_free_energy.unwrap();
            prop_assert!((df - (row.delta_energy - row.delta_entropy / beta_th)).abs() < 1e-12);
        }
        prop_assert_eq!(ledger.len(), rows.len());
        let t = ledger.totals();
        prop_assert!((t.delta_free_energy - (t.delta_energy - t.delta_entropy / beta_th)).abs() < 1e-12);
    }

    #[test]
    fn learning_drift_is_minus_potential_slope(
        w in -3.0f64..3.0,
        x in prop::sample::select(vec![-1.0, 1.0]),
        l in 0.1f64..5.0,
        gw in 0.1f64..5.0,
        beta in 0.2f64..3.0,
    ) {
        let h = 1e-5;
        let slope = (drift_potential(w + h, x, l, gw, beta) - drift_potential(w - h, x, l, gw, beta)) / (2.0 * h);
        let drift = weight_drift(w, x, l, gw, beta);
        prop_assert!((drift + slope).abs() <= 1e-6 * drift.abs().max(1.0));
    }

    #[test]
    fn switch_output_stays_bounded(
        chi in 0.0f64..80.0,
        gamma in 0.1f64..20.0,
        sigma in 0.0f64..30.0,
        seed in any::<u64>(),
    ) {
        let neuron = SpikingNeuron::new(gamma, 1.0, chi, 0.1, sigma).unwrap();
        let mut state = NeuronState { v: 0.0, x: 0.5, y: 0.0 };
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..2000 {
            neuron_step(&neuron, &mut state, chi, 0.1, 1e-3, &mut rng).unwrap();
            prop_assert!((-1.0..=1.0).contains(&state.v));
        }
    }

    #[test]
    fn exact_kernel_is_symmetric_and_bounded(
        bits in prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 2..6),
        eta in 0.05f64..1.0,
    ) {
        let data: Vec<Vec<f64>> = bits
            .iter()
            .map(|row| row.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect())
            .collect();
        let k = kernel_matrix(&Sequential, &data, eta, Shots::Exact, Detection::Identity, 0).unwrap();
        for i in 0..data.len() {
            for j in 0..data.len() {
                let v = k.get(i, j);
                prop_assert_eq!(v.to_bits(), k.get(j, i).to_bits());
                prop_assert!((0.0..=eta + 1e-12).contains(&v));
            }
        }
    }
}
