//! End-to-end restoration: TGV pre-restoration, SVD-derived tight frames, then the
//! split-Bregman solve.

use super::baselines::{solve_tgv_discrete, BaselineParams};
use super::problem::RestorationProblem;
use super::proposed::{solve_proposed_with, ProposedOptions};
use super::Diagnostics;
use crate::dft::to_intensity;
use crate::diffops::{apply_d, apply_e};
use crate::error::Result;
use crate::field::{SampleField, SpatialImage};
use crate::hankel::{lift, svd_of};
use crate::tightframe::{filters_from_svd, FilterStack};

/// Source of the initial vector field `q̃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QInit {
    /// The TGV auxiliary field, rescaled to derivative samples.
    #[default]
    TgvAuxiliary,
    /// `D ṽ`
    Gradient,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    pub tgv: BaselineParams,
    pub q_init: QInit,
    pub proposed: ProposedOptions,
    /// Extra passes that rebuild the stacks from the previous result and solve again.
    pub refinements: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub image: SpatialImage,
    pub v: SampleField,
    pub q: SampleField,
    pub pre_restoration: SpatialImage,
    pub w1: FilterStack,
    pub w2: FilterStack,
    pub diagnostics: Diagnostics,
}

/// SVD-derived stacks for the lifts of `D v − q` and `E q`, using `ν1`, `ν2` and the
/// relative `ε` from the problem parameters.
pub fn stacks_from_estimate(
    problem: &RestorationProblem,
    v: &SampleField,
    q: &SampleField,
) -> Result<(FilterStack, FilterStack)> {
    let support = problem.support();
    let params = &problem.params;
    let h1 = svd_of(&lift(&apply_d(v)?.sub(q)?, support)?)?;
    let h2 = svd_of(&lift(&apply_e(q)?, support)?)?;
    let eps = |vals: &[f64]| Some(params.eps_rel * vals.first().copied().unwrap_or(0.0)).filter(|e| *e > 0.0).or(Some(params.eps_rel));
    let w1 = filters_from_svd(&h1.right, &h1.values, support, params.nu1, eps(&h1.values))?;
    let w2 = filters_from_svd(&h2.right, &h2.values, support, params.nu2, eps(&h2.values))?;
    Ok((w1, w2))
}

pub fn pipeline_proposed(problem: &RestorationProblem) -> Result<SpatialImage> {
    Ok(pipeline_proposed_with(problem, &PipelineOptions::default())?.image)
}

pub fn pipeline_proposed_with(problem: &RestorationProblem, opts: &PipelineOptions) -> Result<PipelineOutput> {
    let tgv = solve_tgv_discrete(problem, &opts.tgv)?;
    let q0 = match opts.q_init {
        QInit::TgvAuxiliary => tgv.q_from_p(),
        QInit::Gradient => apply_d(&tgv.v)?,
    };
    let (mut w1, mut w2) = stacks_from_estimate(problem, &tgv.v, &q0)?;
    let mut popts = opts.proposed.clone();
    popts.init = Some((tgv.v.clone(), q0));
    let mut sol = solve_proposed_with(problem, &w1, &w2, &popts)?;
    let mut diagnostics = sol.diagnostics.clone();
    for _ in 0..opts.refinements {
        (w1, w2) = stacks_from_estimate(problem, &sol.v, &sol.q)?;
        sol = solve_proposed_with(problem, &w1, &w2, &popts)?;
        let offset = diagnostics.records.len();
        diagnostics.records.extend(sol.diagnostics.records.iter().cloned().map(|mut r| {
            r.iteration += offset;
            r
        }));
        diagnostics.converged = sol.diagnostics.converged;
    }
    Ok(PipelineOutput {
        image: to_intensity(&sol.v)?,
        v: sol.v,
        q: sol.q,
        pre_restoration: tgv.image,
        w1,
        w2,
        diagnostics,
    })
}
