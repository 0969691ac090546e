mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use slrm_core::grid::{grid_difference, CenteredGrid};
use slrm_core::hankel::{lift, lift_adjoint};
use slrm_core::solvers::soft_threshold;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn offsets_roundtrip(n1 in 1usize..20, n2 in 1usize..20, pick in 0usize..400) {
        let g = CenteredGrid::new(n1, n2).unwrap();
        let o = pick % g.len();
        let k = g.index_at(o);
        prop_assert!(g.contains(k));
        prop_assert_eq!(g.offset(k), Some(o));
        prop_assert_eq!(g.offset_periodic([k[0] + n1 as i64, k[1] - 3 * n2 as i64]), o);
    }

    #[test]
    fn difference_membership_is_brute_force(n1 in 1usize..12, n2 in 1usize..12, m1 in 1usize..12, m2 in 1usize..12) {
        prop_assume!(m1 <= n1 && m2 <= n2);
        let outer = CenteredGrid::new(n1, n2).unwrap();
        let inner = CenteredGrid::new(m1, m2).unwrap();
        let d = grid_difference(outer, inner).unwrap();
        let brute: Vec<[i64; 2]> = outer
            .indices()
            .filter(|k| inner.indices().all(|m| outer.contains([k[0] + m[0], k[1] + m[1]])))
            .collect();
        prop_assert_eq!(d.members().collect::<Vec<_>>(), brute);
    }

    #[test]
    fn soft_threshold_shrinks_by_t(re in -10.0f64..10.0, im in -10.0f64..10.0, t in 0.0f64..5.0) {
        let z = Complex64::new(re, im);
        let s = soft_threshold(z, t);
        if z.norm() <= t {
            prop_assert_eq!(s, Complex64::new(0.0, 0.0));
        } else {
            prop_assert!((s.norm() - (z.norm() - t)).abs() < 1e-12);
            prop_assert!((s * z.conj()).im.abs() < 1e-12 * z.norm_sqr());
        }
    }

    #[test]
    fn lift_adjoint_pairs(seed in 0u64..1000, order in 0usize..3, n in 3usize..9, m in 1usize..4) {
        let g = CenteredGrid::square(n).unwrap();
        let s = CenteredGrid::new(m, m.min(2)).unwrap();
        let mut r = rng(seed);
        let x = random_field(&mut r, order, g);
        let h = lift(&x, s).unwrap();
        let y = DMatrix::from_vec(h.matrix().nrows(), h.matrix().ncols(), random_complex(&mut r, h.matrix().len()));
        let lhs: Complex64 = h.matrix().iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum();
        let rhs = x.inner(&lift_adjoint(&y, order, g, s).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}
