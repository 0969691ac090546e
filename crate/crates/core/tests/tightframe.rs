mod common;

use common::*;
use num_complex::Complex64;
use slrm_core::diffops::{apply_d, apply_e};
use slrm_core::grid::{grid_difference, CenteredGrid};
use slrm_core::hankel::{lift, numerical_rank, svd_of, DEFAULT_RANK_TOL};
use slrm_core::oracle::{fourier_samples_2d, p_samples_2d};
use slrm_core::tightframe::*;
use slrm_core::SampleField;

fn random_stack(seed: u64, support: CenteredGrid) -> FilterStack {
    let mut r = rng(seed);
    let g = CenteredGrid::square(12).unwrap();
    let x = random_field(&mut r, 0, g);
    let dec = svd_of(&lift(&x, support).unwrap()).unwrap();
    filters_from_svd(&dec.right, &dec.values, support, 1.0, None).unwrap()
}

#[test]
fn analysis_matches_naive_periodic_convolution() {
    let mut r = rng(1);
    let g = CenteredGrid::square(8).unwrap();
    let stack = random_stack(2, CenteredGrid::new(3, 2).unwrap());
    let x = random_field(&mut r, 0, g);
    let coeffs = analysis(&stack, &x).unwrap();
    for (l, cf) in coeffs.iter().enumerate() {
        for k in g.indices() {
            let mut s = Complex64::new(0.0, 0.0);
            for n in stack.support().indices() {
                s += stack.tap(l, n) * x.component(0)[g.offset_periodic([k[0] + n[0], k[1] + n[1]])];
            }
            assert!((cf.get(0, k) - s).norm() < 1e-13);
        }
    }
}

#[test]
fn synthesis_inverts_analysis() {
    let mut r = rng(3);
    let g = CenteredGrid::new(16, 12).unwrap();
    let stack = random_stack(4, CenteredGrid::square(3).unwrap());
    assert!(stack.uep_residual() < 1e-10);
    let op = FrameOperator::new(stack, g).unwrap();
    for i in 0..100 {
        let x = random_field(&mut r, i % 3, g);
        let back = op.synthesis(&op.analysis(&x).unwrap()).unwrap();
        assert!(back.sub(&x).unwrap().norm() < 1e-10 * x.norm());
    }
}

#[test]
fn synthesis_is_adjoint_of_analysis() {
    let mut r = rng(5);
    let g = CenteredGrid::square(10).unwrap();
    let op = FrameOperator::new(random_stack(6, CenteredGrid::square(3).unwrap()), g).unwrap();
    let x = random_field(&mut r, 1, g);
    let cs: Vec<SampleField> = (0..op.len()).map(|_| random_field(&mut r, 1, g)).collect();
    let wx = op.analysis(&x).unwrap();
    let lhs: Complex64 = wx.iter().zip(&cs).map(|(a, b)| a.inner(b).unwrap()).sum();
    let rhs = x.inner(&op.synthesis(&cs).unwrap()).unwrap();
    assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    let zeros: Vec<SampleField> = (0..op.len()).map(|_| SampleField::zeros(1, g)).collect();
    assert_eq!(op.synthesis(&zeros).unwrap().max_abs(), 0.0);
    assert!(op.synthesis(&zeros[1..]).is_err());
}

#[test]
fn framelet_synthesis_inverts_analysis() {
    let mut r = rng(7);
    let g = CenteredGrid::square(16).unwrap();
    let op = FrameOperator::new(builtin_framelet_stack(), g).unwrap();
    let x = random_field(&mut r, 0, g);
    let back = op.synthesis(&op.analysis(&x).unwrap()).unwrap();
    assert!(back.sub(&x).unwrap().norm() < 1e-12 * x.norm());
}

#[test]
fn oracle_stacks_are_sparse_beyond_rank() {
    let g = CenteredGrid::square(32).unwrap();
    let m = two_region_phantom();
    let v = fourier_samples_2d(&m, g);
    let q = p_samples_2d(&m, g);
    let support = CenteredGrid::square(7).unwrap();
    let interior = grid_difference(g, support).unwrap();
    for field in [apply_d(&v).unwrap().sub(&q).unwrap(), apply_e(&q).unwrap()] {
        let dec = svd_of(&lift(&field, support).unwrap()).unwrap();
        let rank = numerical_rank(&dec.values, DEFAULT_RANK_TOL);
        assert!(rank < support.len());
        let stack = filters_from_svd(&dec.right, &dec.values, support, 1.0, None).unwrap();
        assert!(stack.uep_residual() < 1e-10);
        let coeffs = analysis(&stack, &field).unwrap();
        let mut worst = 0.0f64;
        for cf in &coeffs[rank..] {
            for k in interior.members() {
                for j in 0..cf.num_components() {
                    worst = worst.max(cf.get(j, k).norm());
                }
            }
        }
        assert!(worst < 1e-8, "worst {worst:e}");
        let back = synthesis(&stack, &coeffs).unwrap();
        assert!(back.sub(&field).unwrap().norm() < 1e-10 * field.norm());
    }
}

#[test]
fn weights_follow_singular_values() {
    let support = CenteredGrid::square(3).unwrap();
    let g = CenteredGrid::square(12).unwrap();
    let mut x = SampleField::zeros(0, g);
    x.set(0, [0, 0], c(1.0));
    let dec = svd_of(&lift(&x, support).unwrap()).unwrap();
    let stack = filters_from_svd(&dec.right, &dec.values, support, 2.0, Some(0.1)).unwrap();
    for (w, s) in stack.weights().iter().zip(&dec.values) {
        assert!((w - 2.0 / (s + 0.1)).abs() < 1e-14);
    }
    let rank = numerical_rank(&dec.values, DEFAULT_RANK_TOL);
    for w in &stack.weights()[rank..] {
        assert!((w - 20.0).abs() < 1e-9);
    }
}

#[test]
fn delta_stack_is_tight() {
    let s = delta_stack(CenteredGrid::new(3, 2).unwrap());
    assert!(s.uep_residual() < 1e-14);
    assert_eq!(StackOrigin::from_tag(s.origin().tag()), Some(s.origin()));
}
