//! Split-Bregman solver for
//! `min ½‖Av − f‖² + ‖γ1·W1(Dv − q)‖₁ + ‖γ2·W2(Eq)‖₁`.

use num_complex::Complex64;

use super::pointwise::{assemble_block, cramer3, soft_threshold, sym_grad_gram, Block3, TIKHONOV_FLOOR};
use super::problem::RestorationProblem;
use super::{diff_norm_sqr, norm_sqr, Diagnostics, IterationRecord};
use crate::diffops::d_weights;
use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField};
use crate::grid::{CenteredGrid, GridDifference, Index2};
use crate::tightframe::{FilterStack, FrameOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Operator coupling `v` to `q` in the first penalty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FirstOperator {
    /// `D v = (2πi k1 v, 2πi k2 v)`
    #[default]
    Derivative,
    /// `v ↦ (v, v)`, a diagnostic variant without frequency weights.
    Identity,
}

#[derive(Clone, Debug, Default)]
pub struct ProposedOptions {
    /// Starting `(v, q)`; defaults to `(A*f, 0)`.
    pub init: Option<(SampleField, SampleField)>,
    /// When false, coefficients at wrap-around indices (outside `O:K`) carry no penalty.
    pub unpenalized_wraparound: bool,
    pub first_operator: FirstOperator,
    /// Overrides [`TIKHONOV_FLOOR`].
    pub floor: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ProposedSolution {
    pub v: SampleField,
    pub q: SampleField,
    pub diagnostics: Diagnostics,
}

/// Solves the `3×3` per-frequency system with unknowns `(v(k), q1(k), q2(k))`.
pub fn assemble_and_solve_per_frequency(
    k: Index2,
    beta: f64,
    mask_indicator: f64,
    rhs: [Complex64; 3],
) -> [Complex64; 3] {
    let d = d_weights(k);
    let m = assemble_block(mask_indicator, beta, beta, d, sym_grad_gram(d), TIKHONOV_FLOOR);
    cramer3(&m, rhs)
}

struct Splitting {
    op: FrameOperator,
    /// Per-filter thresholds `γ_l / β`.
    thresholds: Vec<f64>,
    weights: Vec<f64>,
    /// `true` where coefficients are penalized.
    penalized: Vec<bool>,
    c: Vec<Vec<Vec<Complex64>>>,
    d: Vec<Vec<Vec<Complex64>>>,
}

impl Splitting {
    fn new(stack: &FilterStack, grid: CenteredGrid, beta: f64, ncomp: usize, wrap: bool) -> Result<Self> {
        stack.validate()?;
        let op = FrameOperator::new(stack.clone(), grid)?;
        let penalized = if wrap {
            vec![true; grid.len()]
        } else {
            let diff = GridDifference::new(grid, stack.support())?;
            let mut p = vec![false; grid.len()];
            for k in diff.members() {
                p[grid.offset_unchecked(k)] = true;
            }
            p
        };
        let l = stack.len();
        Ok(Self {
            op,
            thresholds: stack.weights().iter().map(|g| g / beta).collect(),
            weights: stack.weights().to_vec(),
            penalized,
            c: vec![vec![vec![ZERO; grid.len()]; ncomp]; l],
            d: vec![vec![vec![ZERO; grid.len()]; ncomp]; l],
        })
    }

    fn analysis(&self, x: &[Vec<Complex64>]) -> Vec<Vec<Vec<Complex64>>> {
        let per_comp: Vec<Vec<Vec<Complex64>>> = x.iter().map(|c| self.op.analysis_slice(c)).collect();
        let mut out: Vec<Vec<Vec<Complex64>>> = (0..self.op.len()).map(|_| Vec::with_capacity(x.len())).collect();
        for comp in per_comp {
            for (l, band) in comp.into_iter().enumerate() {
                out[l].push(band);
            }
        }
        out
    }

    /// `W*(c − d)`
    fn synthesis_of_gap(&self, ncomp: usize) -> Vec<Vec<Complex64>> {
        (0..ncomp)
            .map(|j| {
                let gaps: Vec<Vec<Complex64>> = self
                    .c
                    .iter()
                    .zip(&self.d)
                    .map(|(c, d)| c[j].iter().zip(&d[j]).map(|(a, b)| a - b).collect())
                    .collect();
                let refs: Vec<&[Complex64]> = gaps.iter().map(|g| g.as_slice()).collect();
                self.op.synthesis_slice(&refs)
            })
            .collect()
    }

    fn shrink(&self, l: usize, o: usize, z: Complex64) -> Complex64 {
        if self.penalized[o] {
            soft_threshold(z, self.thresholds[l])
        } else {
            z
        }
    }

    /// Shrinkage of `a + d`, returning `‖a − c‖²` of the new `c`.
    fn update(&mut self, a: &[Vec<Vec<Complex64>>]) -> f64 {
        let mut res = 0.0;
        for l in 0..a.len() {
            for j in 0..a[l].len() {
                for o in 0..a[l][j].len() {
                    let av = a[l][j][o];
                    let cv = self.shrink(l, o, av + self.d[l][j][o]);
                    self.c[l][j][o] = cv;
                    let gap = av - cv;
                    self.d[l][j][o] += gap;
                    res += gap.norm_sqr();
                }
            }
        }
        res
    }

    fn init_coefficients(&mut self, a: &[Vec<Vec<Complex64>>]) {
        for l in 0..a.len() {
            for j in 0..a[l].len() {
                for o in 0..a[l][j].len() {
                    self.c[l][j][o] = self.shrink(l, o, a[l][j][o]);
                }
            }
        }
    }

    fn penalty(&self, a: &[Vec<Vec<Complex64>>]) -> f64 {
        let mut s = 0.0;
        for (l, band) in a.iter().enumerate() {
            if self.weights[l] == 0.0 {
                continue;
            }
            let mut t = 0.0;
            for comp in band {
                for (o, z) in comp.iter().enumerate() {
                    if self.penalized[o] {
                        t += z.norm();
                    }
                }
            }
            s += self.weights[l] * t;
        }
        s
    }
}

struct Geometry {
    first: [Vec<Complex64>; 2],
    second: [Vec<Complex64>; 2],
    blocks: Vec<Block3>,
}

impl Geometry {
    fn new(problem: &RestorationProblem, op: FirstOperator, floor: f64) -> Self {
        let grid = problem.grid();
        let beta = problem.params.beta;
        let n = grid.len();
        let mut first = [vec![ZERO; n], vec![ZERO; n]];
        let mut second = [vec![ZERO; n], vec![ZERO; n]];
        let mut blocks = Vec::with_capacity(n);
        for (o, k) in grid.indices().enumerate() {
            let w = d_weights(k);
            let f = match op {
                FirstOperator::Derivative => w,
                FirstOperator::Identity => [Complex64::new(1.0, 0.0); 2],
            };
            first[0][o] = f[0];
            first[1][o] = f[1];
            second[0][o] = w[0];
            second[1][o] = w[1];
            blocks.push(assemble_block(problem.mask_weight(o), beta, beta, f, sym_grad_gram(w), floor));
        }
        Self { first, second, blocks }
    }

    fn residual1(&self, v: &[Complex64], q: &[Vec<Complex64>; 2]) -> Vec<Vec<Complex64>> {
        (0..2)
            .map(|j| v.iter().zip(&self.first[j]).zip(&q[j]).map(|((x, w), y)| w * x - y).collect())
            .collect()
    }

    fn residual2(&self, q: &[Vec<Complex64>; 2]) -> Vec<Vec<Complex64>> {
        let n = q[0].len();
        let mut out = vec![vec![ZERO; n]; 4];
        for o in 0..n {
            let (w0, w1) = (self.second[0][o], self.second[1][o]);
            let off = 0.5 * (w1 * q[0][o] + w0 * q[1][o]);
            out[0][o] = w0 * q[0][o];
            out[1][o] = off;
            out[2][o] = off;
            out[3][o] = w1 * q[1][o];
        }
        out
    }
}

pub fn solve_proposed(problem: &RestorationProblem, w1: &FilterStack, w2: &FilterStack) -> Result<ProposedSolution> {
    solve_proposed_with(problem, w1, w2, &ProposedOptions::default())
}

pub fn solve_proposed_with(
    problem: &RestorationProblem,
    w1: &FilterStack,
    w2: &FilterStack,
    opts: &ProposedOptions,
) -> Result<ProposedSolution> {
    let grid = problem.grid();
    let params = &problem.params;
    params.validate()?;
    let beta = params.beta;
    let wrap = !opts.unpenalized_wraparound;
    let mut s1 = Splitting::new(w1, grid, beta, 2, wrap)?;
    let mut s2 = Splitting::new(w2, grid, beta, 4, wrap)?;
    let geo = Geometry::new(problem, opts.first_operator, opts.floor.unwrap_or(TIKHONOV_FLOOR));
    let f = problem.observed().component(0);

    let (mut v, mut q) = match &opts.init {
        Some((v0, q0)) => {
            v0.require_order(0)?;
            q0.require_order(1)?;
            if v0.grid() != grid || q0.grid() != grid {
                return Err(SlrmError::ShapeMismatch("initial fields must live on the problem grid".into()));
            }
            (v0.component(0).to_vec(), [q0.component(0).to_vec(), q0.component(1).to_vec()])
        }
        None => (f.to_vec(), [vec![ZERO; grid.len()], vec![ZERO; grid.len()]]),
    };
    s1.init_coefficients(&s1.analysis(&geo.residual1(&v, &q)));
    s2.init_coefficients(&s2.analysis(&geo.residual2(&q)));

    let mut diagnostics = Diagnostics::default();
    for iter in 1..=params.max_iter {
        let g1 = s1.synthesis_of_gap(2);
        let g2 = s2.synthesis_of_gap(4);
        let (v_old, q_old) = (v.clone(), q.clone());
        for o in 0..grid.len() {
            let (a0, a1) = (geo.first[0][o], geo.first[1][o]);
            let (w0, w1) = (geo.second[0][o], geo.second[1][o]);
            let sym = g2[1][o] + g2[2][o];
            let et = [
                w0.conj() * g2[0][o] + 0.5 * w1.conj() * sym,
                0.5 * w0.conj() * sym + w1.conj() * g2[3][o],
            ];
            let rhs = [
                f[o] + beta * (a0.conj() * g1[0][o] + a1.conj() * g1[1][o]),
                beta * (et[0] - g1[0][o]),
                beta * (et[1] - g1[1][o]),
            ];
            let x = cramer3(&geo.blocks[o], rhs);
            if !(x[0].re.is_finite() && x[1].re.is_finite() && x[2].re.is_finite()) {
                return Err(SlrmError::NonFinite(format!("per-frequency solve at {:?}", grid.index_at(o))));
            }
            v[o] = x[0];
            q[0][o] = x[1];
            q[1][o] = x[2];
        }
        let a1 = s1.analysis(&geo.residual1(&v, &q));
        let a2 = s2.analysis(&geo.residual2(&q));
        let objective = problem.data_misfit(&v) + s1.penalty(&a1) + s2.penalty(&a2);
        let r1 = s1.update(&a1).sqrt();
        let r2 = s2.update(&a2).sqrt();
        let change = diff_norm_sqr(&v, &v_old) + diff_norm_sqr(&q[0], &q_old[0]) + diff_norm_sqr(&q[1], &q_old[1]);
        let size = norm_sqr(&v) + norm_sqr(&q[0]) + norm_sqr(&q[1]);
        let rel_change = if size > 0.0 { (change / size).sqrt() } else { change.sqrt() };
        diagnostics.records.push(IterationRecord { iteration: iter, objective, residual1: r1, residual2: r2, rel_change });
        if rel_change < params.tol {
            diagnostics.converged = true;
            break;
        }
    }
    let v = SampleField::scalar(grid, v)?.with_source(FieldSource::Solver);
    let [q0, q1] = q;
    let q = SampleField::from_components(1, grid, vec![q0, q1])?.with_source(FieldSource::Solver);
    Ok(ProposedSolution { v, q, diagnostics })
}
