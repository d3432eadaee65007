use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

use cusp::factor::implied_covariance;
use cusp::mcmc::LoadingsDraw;
use cusp::postprocess::{cusp_reorder_draws, hstar_summary, mse_omega};
use cusp::shrinkage::{esp_to_cusp, sticks_to_cusp, EspDraw};

fn sticks(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-9..=1.0f64, 1..=max_len)
}

fn slab_probs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-9..1.0f64, 1..=max_len)
}

proptest! {
    #[test]
    fn spike_and_slab_probabilities_sum_to_one(nu in sticks(50)) {
        let d = sticks_to_cusp(&nu).unwrap();
        for h in 0..nu.len() {
            prop_assert!((d.spike_probs[h] + d.slab_probs[h] - 1.0).abs() <= 1e-12);
            let product: f64 = nu[..=h].iter().map(|v| 1.0 - v).product();
            prop_assert!((d.slab_probs[h] - product).abs() <= 1e-12);
        }
        prop_assert!(d.spike_probs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn ordered_representation_round_trips(tau in slab_probs(30)) {
        let (cusp, rho) = esp_to_cusp(&EspDraw { slab_probs: tau.clone() }).unwrap();
        let mut seen = rho.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..tau.len()).collect::<Vec<_>>());
        prop_assert!(cusp.slab_probs.windows(2).all(|w| w[0] >= w[1]));
        let again = sticks_to_cusp(&cusp.sticks).unwrap();
        for h in 0..tau.len() {
            prop_assert!((again.spike_probs[h] - cusp.spike_probs[h]).abs() <= 1e-12);
            prop_assert!((again.slab_probs[h] - cusp.slab_probs[h]).abs() <= 1e-12);
        }
    }

    #[test]
    fn reordering_is_idempotent(tau in slab_probs(12), seed in any::<u64>()) {
        let theta: Vec<f64> = (0..tau.len()).map(|j| 1.0 + ((seed >> (j % 60)) & 7) as f64).collect();
        let once = cusp_reorder_draws(std::slice::from_ref(&tau), std::slice::from_ref(&theta)).unwrap();
        let twice = cusp_reorder_draws(&once.tau_sorted, &once.theta_star).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn hstar_pmf_ignores_column_labels(rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..40), shift in 0usize..6) {
        let count = |s: &[bool]| s.iter().filter(|&&x| x).count();
        let draws: Vec<usize> = rows.iter().map(|r| count(r)).collect();
        let rotated: Vec<usize> = rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.rotate_left(shift);
                count(&r)
            })
            .collect();
        let a = hstar_summary(&draws, 6, Some(2)).unwrap();
        prop_assert_eq!(&a, &hstar_summary(&rotated, 6, Some(2)).unwrap());
        prop_assert!((a.pmf.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn implied_covariance_is_symmetric_and_bounded(
        entries in prop::collection::vec(-3.0..3.0f64, 12),
        vars in prop::collection::vec(0.1..4.0f64, 4),
    ) {
        let beta = DMatrix::from_vec(4, 3, entries);
        let sigma2 = DVector::from_vec(vars.clone());
        let omega = implied_covariance(&beta, &sigma2);
        prop_assert_eq!(&omega, &omega.transpose());
        let min_eig = SymmetricEigen::new(omega).eigenvalues.min();
        prop_assert!(min_eig >= vars.iter().copied().fold(f64::INFINITY, f64::min) - 1e-10);
    }

    #[test]
    fn mse_is_rotation_invariant(entries in prop::collection::vec(-2.0..2.0f64, 8), angle in 0.0..6.3f64) {
        let beta = DMatrix::from_vec(4, 2, entries);
        let sigma2 = DVector::from_element(4, 1.0);
        let (c, s) = (angle.cos(), angle.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let omega0 = DMatrix::identity(4, 4) * 2.0;
        let draw = |b: DMatrix<f64>| vec![LoadingsDraw { iteration: 1, beta: b, sigma2: sigma2.clone() }];
        let a = mse_omega(&draw(beta.clone()), &omega0).unwrap();
        let b = mse_omega(&draw(&beta * rot), &omega0).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
    }
}
