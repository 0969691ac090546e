//! Discrete baselines with periodic forward differences: TGV, inf-convolution and
//! framelet analysis, all solved by split Bregman in the spectrum domain.
//!
//! Unknown images are carried as spectra `v = F u` (unnormalized DFT), so
//! `‖x‖² = ‖F x‖² / |O|` for every spatial quantity.

use num_complex::Complex64;

use super::pointwise::{assemble_block, cramer2, cramer3, soft_threshold, sym_grad_gram, Block3, TIKHONOV_FLOOR};
use super::problem::RestorationProblem;
use super::{diff_norm_sqr, norm_sqr, Diagnostics, IterationRecord};
use crate::dft::SpectrumTransform;
use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField, SpatialImage};
use crate::grid::{CenteredGrid, Index2};
use crate::tightframe::{builtin_framelet_stack, FrameOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineParams {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Split-Bregman penalties.
    pub mu1: f64,
    pub mu2: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Group the components of each pixel in the ℓ₁ norm.
    pub isotropic: bool,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self { gamma1: 1.0, gamma2: 1.0, mu1: 1.0, mu2: 1.0, max_iter: 500, tol: 1e-6, isotropic: false }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu1 > 0.0 && self.mu2 > 0.0) || !self.mu1.is_finite() || !self.mu2.is_finite() {
            return Err(SlrmError::InvalidParameter("penalties must be positive".into()));
        }
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0) {
            return Err(SlrmError::InvalidParameter("gamma must be nonnegative".into()));
        }
        if self.max_iter == 0 {
            return Err(SlrmError::InvalidParameter("iteration cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Frequency response `e^{2πi k_j/N_j} − 1` of the periodic forward difference.
pub fn forward_difference_weights(grid: CenteredGrid, k: Index2) -> [Complex64; 2] {
    let tau = 2.0 * std::f64::consts::PI;
    let one = Complex64::new(1.0, 0.0);
    [
        Complex64::from_polar(1.0, tau * k[0] as f64 / grid.n1() as f64) - one,
        Complex64::from_polar(1.0, tau * k[1] as f64 / grid.n2() as f64) - one,
    ]
}

fn sym_grad(g: [Complex64; 2], q: [Complex64; 2]) -> [Complex64; 4] {
    let off = 0.5 * (g[1] * q[0] + g[0] * q[1]);
    [g[0] * q[0], off, off, g[1] * q[1]]
}

fn sym_grad_adjoint(g: [Complex64; 2], y: [Complex64; 4]) -> [Complex64; 2] {
    let s = y[1] + y[2];
    [g[0].conj() * y[0] + 0.5 * g[1].conj() * s, 0.5 * g[0].conj() * s + g[1].conj() * y[3]]
}

fn hessian(g: [Complex64; 2]) -> [Complex64; 4] {
    let off = g[0] * g[1];
    [g[0] * g[0], off, off, g[1] * g[1]]
}

/// Auxiliary `c = shrink(a + d)` and Bregman variable `d` for one spatial penalty.
struct SpatialSplit {
    c: Vec<Vec<Complex64>>,
    d: Vec<Vec<Complex64>>,
    weight: f64,
    threshold: f64,
    isotropic: bool,
}

impl SpatialSplit {
    fn new(ncomp: usize, len: usize, gamma: f64, mu: f64, isotropic: bool) -> Self {
        Self {
            c: vec![vec![ZERO; len]; ncomp],
            d: vec![vec![ZERO; len]; ncomp],
            weight: gamma,
            threshold: gamma / mu,
            isotropic,
        }
    }

    fn gap(&self) -> Vec<Vec<Complex64>> {
        self.c
            .iter()
            .zip(&self.d)
            .map(|(c, d)| c.iter().zip(d).map(|(a, b)| a - b).collect())
            .collect()
    }

    fn update(&mut self, a: &[Vec<Complex64>]) -> f64 {
        let n = a[0].len();
        let mut res = 0.0;
        let mut z = vec![ZERO; a.len()];
        for o in 0..n {
            for (j, zj) in z.iter_mut().enumerate() {
                *zj = a[j][o] + self.d[j][o];
            }
            if self.isotropic {
                let m = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                let s = if m > self.threshold { (m - self.threshold) / m } else { 0.0 };
                z.iter_mut().for_each(|x| *x *= s);
            } else {
                z.iter_mut().for_each(|x| *x = soft_threshold(*x, self.threshold));
            }
            for j in 0..a.len() {
                self.c[j][o] = z[j];
                let g = a[j][o] - z[j];
                self.d[j][o] += g;
                res += g.norm_sqr();
            }
        }
        res
    }

    fn penalty(&self, a: &[Vec<Complex64>]) -> f64 {
        let n = a[0].len();
        let s: f64 = if self.isotropic {
            (0..n).map(|o| a.iter().map(|x| x[o].norm_sqr()).sum::<f64>().sqrt()).sum()
        } else {
            a.iter().flatten().map(|x| x.norm()).sum()
        };
        self.weight * s
    }
}

fn relative_change(change: f64, size: f64) -> f64 {
    if size > 0.0 {
        (change / size).sqrt()
    } else {
        change.sqrt()
    }
}

fn check_problem(problem: &RestorationProblem, params: &BaselineParams) -> Result<()> {
    params.validate()?;
    problem.observed().require_order(0)
}

#[derive(Clone, Debug)]
pub struct TgvSolution {
    pub image: SpatialImage,
    /// Spectrum of the restored image.
    pub v: SampleField,
    /// Spectrum of the discrete auxiliary field `p`.
    pub p_spectrum: SampleField,
    pub diagnostics: Diagnostics,
}

impl TgvSolution {
    /// `N_j · F p_j`: the auxiliary field rescaled from per-pixel differences to
    /// derivative samples on the spectrum scale.
    pub fn q_from_p(&self) -> SampleField {
        let grid = self.p_spectrum.grid();
        let scale = [grid.n1() as f64, grid.n2() as f64];
        let comps = (0..2)
            .map(|j| self.p_spectrum.component(j).iter().map(|z| z * scale[j]).collect())
            .collect();
        SampleField::from_components(1, grid, comps).expect("grid-consistent").with_source(FieldSource::Derived)
    }
}

/// `min ½‖R F u − f‖² + γ1‖∇u − p‖₁ + γ2‖∇_s p‖₁`
pub fn solve_tgv_discrete(problem: &RestorationProblem, params: &BaselineParams) -> Result<TgvSolution> {
    check_problem(problem, params)?;
    let grid = problem.grid();
    let n = grid.len();
    let scale = 1.0 / n as f64;
    let (b1, b2) = (params.mu1 * scale, params.mu2 * scale);
    let tr = SpectrumTransform::new(grid);
    let g: Vec<[Complex64; 2]> = grid.indices().map(|k| forward_difference_weights(grid, k)).collect();
    let blocks: Vec<Block3> = (0..n)
        .map(|o| assemble_block(problem.mask_weight(o), b1, b2, g[o], sym_grad_gram(g[o]), TIKHONOV_FLOOR))
        .collect();
    let f = problem.observed().component(0);
    let mut v = f.to_vec();
    let mut q = [vec![ZERO; n], vec![ZERO; n]];
    let mut s1 = SpatialSplit::new(2, n, params.gamma1, params.mu1, params.isotropic);
    let mut s2 = SpatialSplit::new(4, n, params.gamma2, params.mu2, params.isotropic);
    let mut diagnostics = Diagnostics::default();

    for iter in 1..=params.max_iter {
        let h1: Vec<Vec<Complex64>> = s1.gap().iter().map(|x| tr.forward(x)).collect();
        let h2: Vec<Vec<Complex64>> = s2.gap().iter().map(|x| tr.forward(x)).collect();
        let (v_old, q_old) = (v.clone(), q.clone());
        for o in 0..n {
            let go = g[o];
            let et = sym_grad_adjoint(go, [h2[0][o], h2[1][o], h2[2][o], h2[3][o]]);
            let rhs = [
                f[o] + b1 * (go[0].conj() * h1[0][o] + go[1].conj() * h1[1][o]),
                b2 * et[0] - b1 * h1[0][o],
                b2 * et[1] - b1 * h1[1][o],
            ];
            let x = cramer3(&blocks[o], rhs);
            v[o] = x[0];
            q[0][o] = x[1];
            q[1][o] = x[2];
        }
        let mut r1 = vec![vec![ZERO; n]; 2];
        let mut r2 = vec![vec![ZERO; n]; 4];
        for o in 0..n {
            let go = g[o];
            for j in 0..2 {
                r1[j][o] = go[j] * v[o] - q[j][o];
            }
            for (j, e) in sym_grad(go, [q[0][o], q[1][o]]).into_iter().enumerate() {
                r2[j][o] = e;
            }
        }
        let a1: Vec<Vec<Complex64>> = r1.iter().map(|x| tr.inverse(x)).collect();
        let a2: Vec<Vec<Complex64>> = r2.iter().map(|x| tr.inverse(x)).collect();
        let objective = problem.data_misfit(&v) + s1.penalty(&a1) + s2.penalty(&a2);
        let res1 = s1.update(&a1).sqrt();
        let res2 = s2.update(&a2).sqrt();
        let rel_change = relative_change(
            diff_norm_sqr(&v, &v_old) + diff_norm_sqr(&q[0], &q_old[0]) + diff_norm_sqr(&q[1], &q_old[1]),
            norm_sqr(&v) + norm_sqr(&q[0]) + norm_sqr(&q[1]),
        );
        diagnostics.records.push(IterationRecord { iteration: iter, objective, residual1: res1, residual2: res2, rel_change });
        if rel_change < params.tol {
            diagnostics.converged = true;
            break;
        }
    }
    let image = SpatialImage::new(grid, tr.inverse(&v))?;
    let [q0, q1] = q;
    Ok(TgvSolution {
        image,
        v: SampleField::scalar(grid, v)?.with_source(FieldSource::Solver),
        p_spectrum: SampleField::from_components(1, grid, vec![q0, q1])?.with_source(FieldSource::Solver),
        diagnostics,
    })
}

#[derive(Clone, Debug)]
pub struct InfConvSolution {
    pub image: SpatialImage,
    /// Piecewise-constant and piecewise-linear layers.
    pub u1: SpatialImage,
    pub u2: SpatialImage,
    pub diagnostics: Diagnostics,
}

/// `min ½‖R F (u1 + u2) − f‖² + γ1‖∇u1‖₁ + γ2‖∇²u2‖₁`
pub fn solve_infconv_discrete(problem: &RestorationProblem, params: &BaselineParams) -> Result<InfConvSolution> {
    check_problem(problem, params)?;
    let grid = problem.grid();
    let n = grid.len();
    let scale = 1.0 / n as f64;
    let (b1, b2) = (params.mu1 * scale, params.mu2 * scale);
    let tr = SpectrumTransform::new(grid);
    let g: Vec<[Complex64; 2]> = grid.indices().map(|k| forward_difference_weights(grid, k)).collect();
    let h: Vec<[Complex64; 4]> = g.iter().map(|&go| hessian(go)).collect();
    let f = problem.observed().component(0);
    let mut v1 = f.to_vec();
    let mut v2 = vec![ZERO; n];
    let mut s1 = SpatialSplit::new(2, n, params.gamma1, params.mu1, params.isotropic);
    let mut s2 = SpatialSplit::new(4, n, params.gamma2, params.mu2, params.isotropic);
    let mut diagnostics = Diagnostics::default();

    for iter in 1..=params.max_iter {
        let h1: Vec<Vec<Complex64>> = s1.gap().iter().map(|x| tr.forward(x)).collect();
        let h2: Vec<Vec<Complex64>> = s2.gap().iter().map(|x| tr.forward(x)).collect();
        let (v1_old, v2_old) = (v1.clone(), v2.clone());
        for o in 0..n {
            let m = problem.mask_weight(o);
            let gg = g[o][0].norm_sqr() + g[o][1].norm_sqr();
            let hh: f64 = h[o].iter().map(|z| z.norm_sqr()).sum();
            let mc = Complex64::new(m, 0.0);
            let block = [
                [Complex64::new(m + b1 * gg + TIKHONOV_FLOOR, 0.0), mc],
                [mc, Complex64::new(m + b2 * hh + TIKHONOV_FLOOR, 0.0)],
            ];
            let gt: Complex64 = (0..2).map(|j| g[o][j].conj() * h1[j][o]).sum();
            let ht: Complex64 = (0..4).map(|j| h[o][j].conj() * h2[j][o]).sum();
            let x = cramer2(block, [f[o] + b1 * gt, f[o] + b2 * ht]);
            v1[o] = x[0];
            v2[o] = x[1];
        }
        let a1: Vec<Vec<Complex64>> =
            (0..2).map(|j| tr.inverse(&(0..n).map(|o| g[o][j] * v1[o]).collect::<Vec<_>>())).collect();
        let a2: Vec<Vec<Complex64>> =
            (0..4).map(|j| tr.inverse(&(0..n).map(|o| h[o][j] * v2[o]).collect::<Vec<_>>())).collect();
        let sum: Vec<Complex64> = v1.iter().zip(&v2).map(|(a, b)| a + b).collect();
        let objective = problem.data_misfit(&sum) + s1.penalty(&a1) + s2.penalty(&a2);
        let res1 = s1.update(&a1).sqrt();
        let res2 = s2.update(&a2).sqrt();
        let rel_change = relative_change(
            diff_norm_sqr(&v1, &v1_old) + diff_norm_sqr(&v2, &v2_old),
            norm_sqr(&v1) + norm_sqr(&v2),
        );
        diagnostics.records.push(IterationRecord { iteration: iter, objective, residual1: res1, residual2: res2, rel_change });
        if rel_change < params.tol {
            diagnostics.converged = true;
            break;
        }
    }
    let u1 = SpatialImage::new(grid, tr.inverse(&v1))?;
    let u2 = SpatialImage::new(grid, tr.inverse(&v2))?;
    let image = SpatialImage::new(grid, u1.values().iter().zip(u2.values()).map(|(a, b)| a + b).collect())?;
    Ok(InfConvSolution { image, u1, u2, diagnostics })
}

#[derive(Clone, Debug)]
pub struct FrameletSolution {
    pub image: SpatialImage,
    pub diagnostics: Diagnostics,
}

/// `min ½‖R F u − f‖² + γ1 Σ_l w_l ‖(W u)_l‖₁` with the builtin one-level framelet.
/// Only `gamma1` and `mu1` are used.
pub fn solve_framelet_analysis(problem: &RestorationProblem, params: &BaselineParams) -> Result<FrameletSolution> {
    check_problem(problem, params)?;
    let grid = problem.grid();
    let n = grid.len();
    let b = params.mu1 / n as f64;
    let tr = SpectrumTransform::new(grid);
    let stack = builtin_framelet_stack();
    stack.validate()?;
    let op = FrameOperator::new(stack.clone(), grid)?;
    let weights = stack.weights().to_vec();
    let thresholds: Vec<f64> = weights.iter().map(|w| params.gamma1 * w / params.mu1).collect();
    let f = problem.observed().component(0);
    let mut v = f.to_vec();
    let mut c = vec![vec![ZERO; n]; op.len()];
    let mut d = vec![vec![ZERO; n]; op.len()];
    let mut diagnostics = Diagnostics::default();

    for iter in 1..=params.max_iter {
        let gaps: Vec<Vec<Complex64>> =
            c.iter().zip(&d).map(|(cl, dl)| cl.iter().zip(dl).map(|(x, y)| x - y).collect()).collect();
        let refs: Vec<&[Complex64]> = gaps.iter().map(|x| x.as_slice()).collect();
        let back = tr.forward(&op.synthesis_slice(&refs));
        let v_old = v.clone();
        for o in 0..n {
            v[o] = (f[o] + b * back[o]) / (problem.mask_weight(o) + b + TIKHONOV_FLOOR);
        }
        let a = op.analysis_slice(&tr.inverse(&v));
        let mut penalty = 0.0;
        let mut res = 0.0;
        for l in 0..a.len() {
            penalty += params.gamma1 * weights[l] * a[l].iter().map(|z| z.norm()).sum::<f64>();
            for o in 0..n {
                let z = soft_threshold(a[l][o] + d[l][o], thresholds[l]);
                c[l][o] = z;
                let gap = a[l][o] - z;
                d[l][o] += gap;
                res += gap.norm_sqr();
            }
        }
        let objective = problem.data_misfit(&v) + penalty;
        let rel_change = relative_change(diff_norm_sqr(&v, &v_old), norm_sqr(&v));
        diagnostics.records.push(IterationRecord {
            iteration: iter,
            objective,
            residual1: res.sqrt(),
            residual2: 0.0,
            rel_change,
        });
        if rel_change < params.tol {
            diagnostics.converged = true;
            break;
        }
    }
    Ok(FrameletSolution { image: SpatialImage::new(grid, tr.inverse(&v))?, diagnostics })
}
