//! Restoration problems `f = R_M v + ζ` and solver parameters.

use num_complex::Complex64;

use crate::error::{Result, SlrmError};
use crate::field::SampleField;
use crate::grid::CenteredGrid;

/// Parameters shared by the frequency-domain solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    /// Split-Bregman penalty `β`.
    pub beta: f64,
    /// Weight-rule numerators `ν1`, `ν2`.
    pub nu1: f64,
    pub nu2: f64,
    /// `ε / σ_max` in the weight rule `γ_l = ν/(σ_l + ε)`.
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Stop when the relative change of the iterate drops below this.
    pub tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { beta: 1.0, nu1: 1.0, nu2: 1.0, eps_rel: 1e-3, max_iter: 500, tol: 1e-6 }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(SlrmError::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        if self.max_iter == 0 {
            return Err(SlrmError::InvalidParameter("iteration cap must be at least 1".into()));
        }
        if !(self.nu1 >= 0.0 && self.nu2 >= 0.0) {
            return Err(SlrmError::InvalidParameter("nu must be nonnegative".into()));
        }
        if !(self.eps_rel > 0.0) {
            return Err(SlrmError::InvalidParameter("eps must be positive".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(SlrmError::InvalidParameter("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Observed samples on a mask `M ⊆ O`, the patch support and solver parameters.
#[derive(Clone, Debug)]
pub struct RestorationProblem {
    grid: CenteredGrid,
    mask: Vec<bool>,
    observed: SampleField,
    support: CenteredGrid,
    pub params: SolverParams,
    pub seed: u64,
}

impl RestorationProblem {
    /// `observed` is an order-0 field on `grid`, zero outside the mask.
    pub fn new(
        mask: Vec<bool>,
        observed: SampleField,
        support: CenteredGrid,
        params: SolverParams,
        seed: u64,
    ) -> Result<Self> {
        observed.require_order(0)?;
        let grid = observed.grid();
        if mask.len() != grid.len() {
            return Err(SlrmError::ShapeMismatch(format!(
                "mask of length {} for grid of size {}",
                mask.len(),
                grid.len()
            )));
        }
        if observed
            .component(0)
            .iter()
            .zip(&mask)
            .any(|(z, &m)| !m && *z != Complex64::new(0.0, 0.0))
        {
            return Err(SlrmError::InvalidParameter("observed samples must vanish off the mask".into()));
        }
        if !observed.is_finite() {
            return Err(SlrmError::NonFinite("observed samples".into()));
        }
        if support.n1() > grid.n1() || support.n2() > grid.n2() {
            return Err(SlrmError::InvalidGrid(format!(
                "support {:?} exceeds grid {:?}",
                support.extents(),
                grid.extents()
            )));
        }
        params.validate()?;
        Ok(Self { grid, mask, observed, support, params, seed })
    }

    /// Restricts a full field to the mask.
    pub fn from_full(
        full: &SampleField,
        mask: Vec<bool>,
        support: CenteredGrid,
        params: SolverParams,
        seed: u64,
    ) -> Result<Self> {
        full.require_order(0)?;
        if mask.len() != full.grid().len() {
            return Err(SlrmError::ShapeMismatch("mask length differs from grid size".into()));
        }
        let vals = full
            .component(0)
            .iter()
            .zip(&mask)
            .map(|(z, &m)| if m { *z } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self::new(mask, SampleField::scalar(full.grid(), vals)?, support, params, seed)
    }

    pub fn grid(&self) -> CenteredGrid {
        self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn observed(&self) -> &SampleField {
        &self.observed
    }

    pub fn support(&self) -> CenteredGrid {
        self.support
    }

    pub fn with_params(mut self, params: SolverParams) -> Result<Self> {
        params.validate()?;
        self.params = params;
        Ok(self)
    }

    /// `1` on the mask, `0` elsewhere (the diagonal of `A*A`).
    #[inline]
    pub fn mask_weight(&self, offset: usize) -> f64 {
        if self.mask[offset] {
            1.0
        } else {
            0.0
        }
    }

    /// `A v`, zero-filled off the mask.
    pub fn apply_mask(&self, v: &SampleField) -> SampleField {
        let vals = v
            .component(0)
            .iter()
            .zip(&self.mask)
            .map(|(z, &m)| if m { *z } else { Complex64::new(0.0, 0.0) })
            .collect();
        SampleField::scalar(self.grid, vals).expect("grid-sized buffer")
    }

    /// `½‖A v − f‖²`
    pub fn data_misfit(&self, v: &[Complex64]) -> f64 {
        0.5 * v
            .iter()
            .zip(self.observed.component(0))
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|((a, b), _)| (a - b).norm_sqr())
            .sum::<f64>()
    }

    pub fn sample_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}
