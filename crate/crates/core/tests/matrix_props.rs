//! Matrix layer properties: PSD verdicts carry checkable witnesses, kernels
//! annihilate, rank and nullity add up.

use num_traits::{Signed, Zero};
use proptest::prelude::*;
use soslab_core::matrix::{dot, primitive_integer, Mat, MultiRhsSolver, PsdOutcome};
use soslab_core::ratio::{irat, rat, Rat};

fn arb_int_mat(n: usize, lo: i64, hi: i64) -> impl Strategy<Value = Mat> {
    prop::collection::vec(lo..=hi, n * n).prop_map(move |v| {
        Mat::from_fn(n, n, |i, j| irat(v[i * n + j]))
    })
}

fn arb_sym_mat(n: usize) -> impl Strategy<Value = Mat> {
    arb_int_mat(n, -6, 6).prop_map(|a| {
        Mat::from_fn(a.rows(), a.cols(), |i, j| {
            if i <= j {
                a.at(i, j).clone()
            } else {
                a.at(j, i).clone()
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn gram_matrices_are_psd(a in arb_int_mat(4, -5, 5)) {
        let g = a.transpose().matmul(&a).unwrap();
        let outcome = g.psd_check().unwrap();
        prop_assert!(outcome.is_psd(), "A'A must be PSD, got {outcome:?}");
        if let PsdOutcome::Psd { rank } = outcome {
            prop_assert_eq!(rank + g.kernel_basis().len(), 4);
        }
    }

    #[test]
    fn not_psd_witness_is_negative(a in arb_sym_mat(5)) {
        match a.psd_check().unwrap() {
            PsdOutcome::Psd { rank } => {
                prop_assert_eq!(rank + a.kernel_basis().len(), 5);
            }
            PsdOutcome::NotPsd { witness } => {
                let q = a.quadratic_form(&witness).unwrap();
                prop_assert!(q.is_negative(), "witness form {q} not negative");
            }
        }
    }

    #[test]
    fn kernel_vectors_annihilate(a in arb_int_mat(4, -4, 4)) {
        let basis = a.kernel_basis();
        for v in &basis {
            let av = a.mul_vec(v).unwrap();
            prop_assert!(av.iter().all(Rat::is_zero));
            // Primitive: first nonzero entry positive, integer entries.
            let first = v.iter().find(|x| !x.is_zero()).unwrap();
            prop_assert!(first.is_positive());
            prop_assert_eq!(primitive_integer(v), v.clone());
        }
    }

    #[test]
    fn solver_solutions_satisfy_system(
        a in prop::collection::vec(-4i64..=4, 12),
        x in prop::collection::vec(-4i64..=4, 4),
    ) {
        // 3 equations, 4 unknowns; rhs built from a known solution.
        let mat = Mat::from_fn(3, 4, |i, j| irat(a[i * 4 + j]));
        let xs: Vec<Rat> = x.iter().map(|&v| irat(v)).collect();
        let b = mat.mul_vec(&xs).unwrap();
        let mut solver = MultiRhsSolver::new(4, 1);
        for i in 0..3 {
            let coeffs: Vec<(usize, Rat)> =
                (0..4).map(|j| (j, mat.at(i, j).clone())).collect();
            solver.add_row(&coeffs, &[(0, b[i].clone())]);
        }
        let sol = solver.solve().remove(0);
        let sol = sol.expect("constructed system must be consistent");
        prop_assert_eq!(mat.mul_vec(&sol).unwrap(), b);
    }
}

#[test]
fn psd_rank_matches_construction() {
    // Rank-2 Gram matrix of three vectors in the plane.
    let pts = [
        vec![irat(1), irat(0)],
        vec![irat(1), irat(1)],
        vec![rat(1, 2), irat(-3)],
    ];
    let g = Mat::from_fn(3, 3, |i, j| dot(&pts[i], &pts[j]));
    assert_eq!(g.psd_check().unwrap(), PsdOutcome::Psd { rank: 2 });
    assert_eq!(g.kernel_basis().len(), 1);
}
