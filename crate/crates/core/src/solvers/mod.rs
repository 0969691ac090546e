//! Restoration solvers: the tight-frame split-Bregman scheme, IRLS rank surrogates
//! and discrete baselines.

pub mod baselines;
pub mod irls;
pub mod pipeline;
pub mod pointwise;
pub mod problem;
pub mod proposed;

pub use pointwise::{assemble_block, cramer3, soft_threshold, TIKHONOV_FLOOR};
pub use problem::{RestorationProblem, SolverParams};

/// One row of a solver's iteration log.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    /// Constraint residuals of the two splittings (zero where not applicable).
    pub residual1: f64,
    pub residual2: f64,
    pub rel_change: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

impl Diagnostics {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    /// CSV with header `iteration,objective,residual1,residual2,rel_change`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,objective,residual1,residual2,rel_change\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.iteration, r.objective, r.residual1, r.residual2, r.rel_change
            ));
        }
        s
    }
}

pub(crate) fn norm_sqr(x: &[num_complex::Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn diff_norm_sqr(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}
