#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slrm_core::grid::CenteredGrid;
use slrm_core::oracle::{PiecewiseLinear1D, PiecewiseLinear2D, Rect};
use slrm_core::SampleField;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_field(rng: &mut ChaCha8Rng, order: usize, grid: CenteredGrid) -> SampleField {
    let comps = (0..1usize << order).map(|_| random_complex(rng, grid.len())).collect();
    SampleField::from_components(order, grid, comps).unwrap()
}

/// Hat function with jumps: slopes ±1 meeting at 0, offset 5/4.
pub fn hat_signal() -> PiecewiseLinear1D {
    PiecewiseLinear1D::real(&[-0.25, 0.0, 0.25], &[1.0, -1.0], &[1.25, 1.25]).unwrap()
}

/// `u(x) = x` on `[-1/4, 1/4)`.
pub fn ramp_signal() -> PiecewiseLinear1D {
    PiecewiseLinear1D::real(&[-0.25, 0.25], &[1.0], &[0.0]).unwrap()
}

/// Two regions whose edges all lie on `x1, x2 ∈ {-1/4, 1/4}` modulo 1: an affine
/// square and a band that wraps around the `x1 = ±1/2` boundary.
pub fn two_region_phantom() -> PiecewiseLinear2D {
    let band = |lo: f64, hi: f64| Rect::new([lo, -0.25], [hi, 0.25], [0.0, 0.4], 0.8);
    PiecewiseLinear2D::new(vec![
        Rect::new([-0.25, -0.25], [0.25, 0.25], [0.3, -0.2], 0.5),
        band(0.25, 0.5),
        band(-0.5, -0.25),
    ])
    .unwrap()
}

pub const PHANTOM_LINES: [f64; 2] = [-0.25, 0.25];

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + i as f64 * h) * w;
    }
    s * (h / 3.0)
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Composite 5-point Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_panels(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 5);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// Tensor quadrature of `u(x) e^{-2πik·x}` over each rectangle.
pub fn quadrature_2d(model: &PiecewiseLinear2D, k: [i64; 2], panels: usize) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for r in model.regions() {
        let xs = gauss_panels(r.lo[0], r.hi[0], panels);
        let ys = gauss_panels(r.lo[1], r.hi[1], panels);
        for &(x, wx) in &xs {
            for &(y, wy) in &ys {
                let u = r.alpha[0] * x + r.alpha[1] * y + r.beta;
                let ph = Complex64::from_polar(1.0, -2.0 * PI * (k[0] as f64 * x + k[1] as f64 * y));
                total += u * ph * (wx * wy);
            }
        }
    }
    total
}

/// One-sided Jacobi singular values, written independently of the library routine.
pub fn jacobi_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut a = if m.nrows() >= m.ncols() { m.clone() } else { m.adjoint() };
    let n = a.ncols();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = a.column(p).iter().zip(a.column(q).iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..a.nrows() {
                    let xp = a[(i, p)];
                    let xq = a[(i, q)] * phase.conj();
                    a[(i, p)] = xp * cs - xq * sn;
                    a[(i, q)] = xp * sn + xq * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}
