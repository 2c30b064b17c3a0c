//! Kernel properties on random sparse vectors: symmetry, K(x,x) = 1 for the
//! RBF kernel, and positive semidefiniteness of Gram matrices checked with
//! an independent eigensolver.

use metonym_core::features::SparseVector;
use metonym_core::svm::{kernel_eval, GammaSpec, KernelKind, SvmParams};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_sparse(rng: &mut StdRng, dim: usize) -> SparseVector {
    let dense: Vec<f64> = (0..dim)
        .map(|_| {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(-3.0..3.0)
            }
        })
        .collect();
    SparseVector::from_dense(&dense)
}

#[test]
fn rbf_gram_matrices_are_symmetric_unit_diagonal_and_psd() {
    let mut rng = StdRng::seed_from_u64(2024);
    for round in 0..100 {
        let dim = rng.gen_range(1..12);
        let m = rng.gen_range(2..=20);
        let params = SvmParams {
            gamma: if round % 2 == 0 {
                GammaSpec::Auto
            } else {
                GammaSpec::Fixed(rng.gen_range(0.05..2.0))
            },
            kernel: KernelKind::Rbf,
            ..SvmParams::default()
        };
        let vectors: Vec<SparseVector> = (0..m).map(|_| random_sparse(&mut rng, dim)).collect();

        let mut gram = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                gram[(i, j)] = kernel_eval(&vectors[i], &vectors[j], &params).unwrap();
            }
        }

        for i in 0..m {
            assert_eq!(gram[(i, i)], 1.0, "round {round}: K(x,x) != 1");
            for j in 0..m {
                assert_eq!(
                    gram[(i, j)],
                    gram[(j, i)],
                    "round {round}: K not symmetric at ({i},{j})"
                );
                assert!(
                    gram[(i, j)] > 0.0 && gram[(i, j)] <= 1.0,
                    "round {round}: RBF out of (0,1]"
                );
            }
        }

        let min_eig = gram
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(
            min_eig >= -1e-8,
            "round {round}: Gram min eigenvalue {min_eig}"
        );
    }
}

#[test]
fn linear_kernel_is_symmetric() {
    let mut rng = StdRng::seed_from_u64(77);
    let params = SvmParams {
        kernel: KernelKind::Linear,
        ..SvmParams::default()
    };
    for _ in 0..200 {
        let dim = rng.gen_range(1..10);
        let x = random_sparse(&mut rng, dim);
        let y = random_sparse(&mut rng, dim);
        assert_eq!(
            kernel_eval(&x, &y, &params).unwrap(),
            kernel_eval(&y, &x, &params).unwrap()
        );
    }
}
