//! Solver invariants on randomized data: box constraints, equality
//! constraint preservation, dual objective monotonicity and final KKT
//! satisfaction, across kernels and penalty scales.

use metonym_core::features::SparseVector;
use metonym_core::svm::{train_traced, GammaSpec, KernelKind, SvmParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_dataset(rng: &mut StdRng, n: usize, dim: usize) -> (Vec<SparseVector>, Vec<f64>) {
    loop {
        let xs: Vec<SparseVector> = (0..n)
            .map(|_| {
                let dense: Vec<f64> = (0..dim)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            0.0
                        } else {
                            rng.gen_range(-2.0..2.0)
                        }
                    })
                    .collect();
                SparseVector::from_dense(&dense)
            })
            .collect();
        let ys: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        if ys.contains(&1.0) && ys.iter().any(|&y| y == -1.0) {
            return (xs, ys);
        }
    }
}

#[test]
fn randomized_training_keeps_all_solver_invariants() {
    let mut rng = StdRng::seed_from_u64(999);
    for round in 0..20 {
        let n = rng.gen_range(4..51);
        let dim = rng.gen_range(1..21);
        let (xs, ys) = random_dataset(&mut rng, n, dim);
        let params = SvmParams {
            c: [0.5, 1.0, 10.0][round % 3],
            kernel: if round % 2 == 0 {
                KernelKind::Rbf
            } else {
                KernelKind::Linear
            },
            gamma: GammaSpec::Auto,
            seed: round as u64,
            ..SvmParams::default()
        };
        let (model, trace) = train_traced(&xs, &ys, &params).unwrap();
        assert!(
            trace.converged,
            "round {round} (n={n}, dim={dim}, C={}) did not converge",
            params.c
        );
        assert!(
            trace.kkt_violation <= params.tol,
            "round {round}: final KKT violation {}",
            trace.kkt_violation
        );

        let mut prev_objective = 0.0;
        for (step, record) in trace.steps.iter().enumerate() {
            assert!(
                record.sum_alpha_y.abs() <= 1e-9,
                "round {round} step {step}: sum alpha*y = {}",
                record.sum_alpha_y
            );
            assert!(
                record.min_alpha >= 0.0,
                "round {round} step {step}: alpha below 0"
            );
            assert!(
                record.max_alpha_excess <= 0.0,
                "round {round} step {step}: alpha above C"
            );
            assert!(
                record.objective >= prev_objective - 1e-9,
                "round {round} step {step}: objective fell {} -> {}",
                prev_objective,
                record.objective
            );
            prev_objective = record.objective;
        }

        let coef_sum: f64 = model.dual_coefs.iter().sum();
        assert!(
            coef_sum.abs() <= 1e-6,
            "round {round}: model sum alpha*y = {coef_sum}"
        );
    }
}
