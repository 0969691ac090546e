//! IRLS solvers for the smoothed Schatten-0 surrogates of the SLRM and GSLR models.
//!
//! With `ε` fixed, the objective
//! `J_ε = ½‖Av − f‖² + Σ_i γ_i/2 · ln det(H_i*H_i + ε²I) + δ/2 ‖x‖²`
//! is majorized at the current iterate by replacing each log-det with
//! `tr(Q_i H_i*H_i)`, `Q_i = (H_i*H_i + ε²I)^{-1}`. The resulting quadratic is
//! minimized by conjugate gradients warm-started at the current iterate, so `J` never
//! increases; `ε` is then reduced, which lowers `J` further.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::pointwise::TIKHONOV_FLOOR;
use super::problem::RestorationProblem;
use super::{Diagnostics, IterationRecord};
use crate::diffops::{adjoint_d, adjoint_d2, adjoint_e, apply_d, apply_d2, apply_e};
use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField};
use crate::hankel::{gram_eigen, lift, WeightedGram};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which pair of lifts is penalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IrlsModel {
    /// Unknowns `(v, q)`; lifts of `Dv − q` and `Eq`; data on `v`.
    Slrm,
    /// Unknowns `(v1, v2)`; lifts of `Dv1` and `D2 v2`; data on `v1 + v2`.
    Gslr,
}

#[derive(Clone, Debug)]
pub struct IrlsOptions {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Initial `ε`; `None` means `eps_factor · σ_max` over both initial lifts.
    pub eps0: Option<f64>,
    pub eps_factor: f64,
    /// Multiplier applied to `ε` after every iteration.
    pub eps_decay: f64,
    /// Lower bound for `ε`; `None` means `1e-6 · ε0`.
    pub eps_min: Option<f64>,
    pub max_iter: usize,
    pub tol: f64,
    pub cg_max_iter: usize,
    pub cg_tol: f64,
    /// Raise [`SlrmError::NotConverged`] when an inner CG solve hits its cap.
    pub strict_cg: bool,
    /// Keep the second unknown at zero.
    pub freeze_second: bool,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
            eps0: None,
            eps_factor: 1.0,
            eps_decay: 0.5,
            eps_min: None,
            max_iter: 30,
            tol: 1e-6,
            cg_max_iter: 200,
            cg_tol: 1e-8,
            strict_cg: false,
            freeze_second: false,
        }
    }
}

impl IrlsOptions {
    fn validate(&self) -> Result<()> {
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0) {
            return Err(SlrmError::InvalidParameter("gamma must be nonnegative".into()));
        }
        if !(self.eps_decay > 0.0 && self.eps_decay <= 1.0) {
            return Err(SlrmError::InvalidParameter("eps decay must lie in (0, 1]".into()));
        }
        if self.eps0.is_some_and(|e| !(e > 0.0)) || self.eps_min.is_some_and(|e| !(e > 0.0)) {
            return Err(SlrmError::InvalidParameter("eps must be positive".into()));
        }
        if self.max_iter == 0 || self.cg_max_iter == 0 {
            return Err(SlrmError::InvalidParameter("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IrlsSolution {
    /// `v` (SLRM) or `v1` (GSLR).
    pub first: SampleField,
    /// `q` (SLRM) or `v2` (GSLR).
    pub second: SampleField,
    pub diagnostics: Diagnostics,
    /// `ε` used in each iteration.
    pub eps: Vec<f64>,
    pub cg_iterations: Vec<usize>,
    /// Iterations whose CG solve stopped at the cap.
    pub cg_capped: Vec<usize>,
    /// `J_ε` at the initial iterate with `ε = ε0`.
    pub initial_objective: f64,
}

impl IrlsSolution {
    /// Data-domain estimate: `v` or `v1 + v2`.
    pub fn estimate(&self, model: IrlsModel) -> SampleField {
        match model {
            IrlsModel::Slrm => self.first.clone(),
            IrlsModel::Gslr => self.first.axpy(Complex64::new(1.0, 0.0), &self.second).expect("same grid"),
        }
    }
}

type Pair = [SampleField; 2];

struct Engine<'a> {
    model: IrlsModel,
    problem: &'a RestorationProblem,
    gamma: [f64; 2],
    freeze: bool,
}

impl Engine<'_> {
    fn lifted(&self, x: &Pair) -> Result<Pair> {
        match self.model {
            IrlsModel::Slrm => Ok([apply_d(&x[0])?.sub(&x[1])?, apply_e(&x[1])?]),
            IrlsModel::Gslr => Ok([apply_d(&x[0])?, apply_d2(&x[1])?]),
        }
    }

    fn lifted_adjoint(&self, y: &Pair) -> Result<Pair> {
        match self.model {
            IrlsModel::Slrm => Ok([adjoint_d(&y[0])?, adjoint_e(&y[1])?.sub(&y[0])?]),
            IrlsModel::Gslr => Ok([adjoint_d(&y[0])?, adjoint_d2(&y[1])?]),
        }
    }

    fn data_estimate(&self, x: &Pair) -> Vec<Complex64> {
        match self.model {
            IrlsModel::Slrm => x[0].component(0).to_vec(),
            IrlsModel::Gslr => x[0].component(0).iter().zip(x[1].component(0)).map(|(a, b)| a + b).collect(),
        }
    }

    /// `A*A` applied to the data estimate, distributed to the unknowns that feed it.
    fn data_normal(&self, x: &Pair) -> Result<Pair> {
        let s: Vec<Complex64> = self
            .data_estimate(x)
            .iter()
            .zip(self.problem.mask())
            .map(|(z, &m)| if m { *z } else { ZERO })
            .collect();
        let grid = self.problem.grid();
        let first = SampleField::scalar(grid, s)?;
        let second = match self.model {
            IrlsModel::Slrm => SampleField::zeros(1, grid),
            IrlsModel::Gslr => first.clone(),
        };
        Ok([first, second])
    }

    fn rhs(&self) -> Result<Pair> {
        let grid = self.problem.grid();
        let f = self.problem.observed().clone();
        let second = match self.model {
            IrlsModel::Slrm => SampleField::zeros(1, grid),
            IrlsModel::Gslr => f.clone(),
        };
        Ok(self.project([f, second]))
    }

    fn project(&self, mut x: Pair) -> Pair {
        if self.freeze {
            x[1] = SampleField::zeros(x[1].order(), x[1].grid());
        }
        x
    }

    /// `(A*A + Σ γ_i L_i* G_i L_i + δ) x`
    fn normal(&self, x: &Pair, grams: &[WeightedGram; 2]) -> Result<Pair> {
        let t = self.lifted(x)?;
        let g = [
            grams[0].apply(&t[0])?.scale(Complex64::new(self.gamma[0], 0.0)),
            grams[1].apply(&t[1])?.scale(Complex64::new(self.gamma[1], 0.0)),
        ];
        let r = self.lifted_adjoint(&g)?;
        let d = self.data_normal(x)?;
        let delta = Complex64::new(TIKHONOV_FLOOR, 0.0);
        let out = [
            r[0].axpy(Complex64::new(1.0, 0.0), &d[0])?.axpy(delta, &x[0])?,
            r[1].axpy(Complex64::new(1.0, 0.0), &d[1])?.axpy(delta, &x[1])?,
        ];
        Ok(self.project(out))
    }

    fn spectra(&self, x: &Pair) -> Result<[(Vec<f64>, DMatrix<Complex64>); 2]> {
        let t = self.lifted(x)?;
        let s = self.problem.support();
        Ok([gram_eigen(lift(&t[0], s)?.matrix()), gram_eigen(lift(&t[1], s)?.matrix())])
    }

    fn objective(&self, x: &Pair, eigs: &[Vec<f64>; 2], eps: f64) -> f64 {
        let data = self.problem.data_misfit(&self.data_estimate(x));
        let logdet: f64 = (0..2)
            .map(|i| 0.5 * self.gamma[i] * eigs[i].iter().map(|l| (l + eps * eps).ln()).sum::<f64>())
            .sum();
        data + logdet + 0.5 * TIKHONOV_FLOOR * (x[0].norm_sqr() + x[1].norm_sqr())
    }
}

fn inner(a: &Pair, b: &Pair) -> Complex64 {
    a[0].inner(&b[0]).expect("same shape") + a[1].inner(&b[1]).expect("same shape")
}

fn axpy(x: &Pair, alpha: Complex64, y: &Pair) -> Pair {
    [x[0].axpy(alpha, &y[0]).expect("same shape"), x[1].axpy(alpha, &y[1]).expect("same shape")]
}

/// Conjugate gradients from `x0`; returns the solution, iteration count and whether the
/// relative residual reached `tol`.
fn conjugate_gradient(
    engine: &Engine,
    grams: &[WeightedGram; 2],
    b: &Pair,
    x0: Pair,
    tol: f64,
    cap: usize,
) -> Result<(Pair, usize, bool)> {
    let bnorm = inner(b, b).re.sqrt();
    let mut x = x0;
    let ax = engine.normal(&x, grams)?;
    let mut r = axpy(b, Complex64::new(-1.0, 0.0), &ax);
    let mut rr = inner(&r, &r).re;
    let target = if bnorm > 0.0 { tol * bnorm } else { 0.0 };
    if rr.sqrt() <= target {
        return Ok((x, 0, true));
    }
    let mut p = r.clone();
    for it in 1..=cap {
        let ap = engine.normal(&p, grams)?;
        let pap = inner(&p, &ap).re;
        if !(pap > 0.0) {
            return Ok((x, it, rr.sqrt() <= target));
        }
        let alpha = rr / pap;
        x = axpy(&x, Complex64::new(alpha, 0.0), &p);
        r = axpy(&r, Complex64::new(-alpha, 0.0), &ap);
        let rr_new = inner(&r, &r).re;
        if !rr_new.is_finite() {
            return Err(SlrmError::NonFinite("conjugate gradient residual".into()));
        }
        if rr_new.sqrt() <= target {
            return Ok((x, it, true));
        }
        p = axpy(&r, Complex64::new(rr_new / rr, 0.0), &p);
        rr = rr_new;
    }
    Ok((x, cap, false))
}

fn weighted_grams(
    problem: &RestorationProblem,
    spectra: &[(Vec<f64>, DMatrix<Complex64>); 2],
    eps: f64,
) -> Result<[WeightedGram; 2]> {
    let build = |(vals, vecs): &(Vec<f64>, DMatrix<Complex64>)| {
        let w: Vec<f64> = vals.iter().map(|l| 1.0 / (l + eps * eps)).collect();
        WeightedGram::new(problem.grid(), problem.support(), vecs, &w)
    };
    Ok([build(&spectra[0])?, build(&spectra[1])?])
}

pub fn solve_irls(
    model: IrlsModel,
    problem: &RestorationProblem,
    init_first: &SampleField,
    init_second: &SampleField,
    opts: &IrlsOptions,
) -> Result<IrlsSolution> {
    opts.validate()?;
    let grid = problem.grid();
    let second_order = match model {
        IrlsModel::Slrm => 1,
        IrlsModel::Gslr => 0,
    };
    init_first.require_order(0)?;
    init_second.require_order(second_order)?;
    if init_first.grid() != grid || init_second.grid() != grid {
        return Err(SlrmError::ShapeMismatch("initial fields must live on the problem grid".into()));
    }
    let engine = Engine { model, problem, gamma: [opts.gamma1, opts.gamma2], freeze: opts.freeze_second };
    let mut x = engine.project([init_first.clone(), init_second.clone()]);
    let b = engine.rhs()?;

    let mut spectra = engine.spectra(&x)?;
    let smax = spectra
        .iter()
        .map(|(v, _)| v.first().copied().unwrap_or(0.0).sqrt())
        .fold(0.0f64, f64::max);
    let mut eps = match opts.eps0 {
        Some(e) => e,
        None if smax > 0.0 => opts.eps_factor * smax,
        None => 1.0,
    };
    let eps_min = opts.eps_min.unwrap_or(1e-6 * eps);
    let initial_objective = engine.objective(&x, &[spectra[0].0.clone(), spectra[1].0.clone()], eps);

    let mut sol = IrlsSolution {
        first: x[0].clone(),
        second: x[1].clone(),
        diagnostics: Diagnostics::default(),
        eps: Vec::new(),
        cg_iterations: Vec::new(),
        cg_capped: Vec::new(),
        initial_objective,
    };
    for iter in 1..=opts.max_iter {
        let grams = weighted_grams(problem, &spectra, eps)?;
        let (next, its, ok) = conjugate_gradient(&engine, &grams, &b, x.clone(), opts.cg_tol, opts.cg_max_iter)?;
        if !ok {
            if opts.strict_cg {
                return Err(SlrmError::NotConverged { what: format!("inner CG at IRLS iteration {iter}"), cap: opts.cg_max_iter });
            }
            sol.cg_capped.push(iter);
        }
        let change = next[0].sub(&x[0])?.norm_sqr() + next[1].sub(&x[1])?.norm_sqr();
        let size = next[0].norm_sqr() + next[1].norm_sqr();
        let rel_change = if size > 0.0 { (change / size).sqrt() } else { change.sqrt() };
        x = next;
        sol.eps.push(eps);
        sol.cg_iterations.push(its);
        spectra = engine.spectra(&x)?;
        eps = (eps * opts.eps_decay).max(eps_min);
        let objective = engine.objective(&x, &[spectra[0].0.clone(), spectra[1].0.clone()], eps);
        sol.diagnostics.records.push(IterationRecord { iteration: iter, objective, residual1: 0.0, residual2: 0.0, rel_change });
        if rel_change < opts.tol {
            sol.diagnostics.converged = true;
            break;
        }
    }
    let [a, b2] = x;
    sol.first = a.with_source(FieldSource::Solver);
    sol.second = b2.with_source(FieldSource::Solver);
    Ok(sol)
}

/// SLRM surrogate with unknowns `(v, q)`.
pub fn solve_irls_slrm(
    problem: &RestorationProblem,
    init_v: &SampleField,
    init_q: &SampleField,
    opts: &IrlsOptions,
) -> Result<IrlsSolution> {
    solve_irls(IrlsModel::Slrm, problem, init_v, init_q, opts)
}

/// GSLR surrogate with unknowns `(v1, v2)`.
pub fn solve_irls_gslr(
    problem: &RestorationProblem,
    init_v1: &SampleField,
    init_v2: &SampleField,
    opts: &IrlsOptions,
) -> Result<IrlsSolution> {
    solve_irls(IrlsModel::Gslr, problem, init_v1, init_v2, opts)
}
