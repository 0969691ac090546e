//! Variable-density frequency masks and complex Gaussian noise.

use num_complex::Complex64;
use rand::seq::index::sample_weighted;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField};
use crate::grid::{CenteredGrid, Index2};

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingMask {
    grid: CenteredGrid,
    kept: Vec<bool>,
    fraction: f64,
    seed: u64,
}

impl SamplingMask {
    pub fn from_kept(grid: CenteredGrid, kept: Vec<bool>, fraction: f64, seed: u64) -> Result<Self> {
        if kept.len() != grid.len() {
            return Err(SlrmError::ShapeMismatch(format!("{} mask entries for grid of size {}", kept.len(), grid.len())));
        }
        Ok(Self { grid, kept, fraction, seed })
    }

    pub fn full(grid: CenteredGrid) -> Self {
        Self { grid, kept: vec![true; grid.len()], fraction: 1.0, seed: 0 }
    }

    pub fn grid(&self) -> CenteredGrid {
        self.grid
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One flag per grid offset.
    pub fn kept(&self) -> &[bool] {
        &self.kept
    }

    pub fn count(&self) -> usize {
        self.kept.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, k: Index2) -> bool {
        self.grid.offset(k).is_some_and(|o| self.kept[o])
    }

    pub fn kept_indices(&self) -> Vec<Index2> {
        self.grid.indices().zip(&self.kept).filter(|(_, &b)| b).map(|(k, _)| k).collect()
    }
}

fn radius(k: Index2) -> f64 {
    ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt()
}

/// Keeps `round(fraction·|O|)` frequencies: the disk `|k| ≤ center_radius` and a
/// weighted draw without replacement, weight `(1 + |k|/N)^{-decay_power}` with
/// `N = max(N1, N2)`.
pub fn variable_density_mask(
    grid: CenteredGrid,
    fraction: f64,
    seed: u64,
    decay_power: f64,
    center_radius: f64,
) -> Result<SamplingMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SlrmError::InvalidParameter(format!("sampling fraction {fraction} outside (0, 1]")));
    }
    if !(decay_power >= 0.0 && center_radius >= 0.0) {
        return Err(SlrmError::InvalidParameter("decay power and center radius must be nonnegative".into()));
    }
    let total = (fraction * grid.len() as f64).round() as usize;
    let mut kept: Vec<bool> = grid.indices().map(|k| radius(k) <= center_radius).collect();
    let center = kept.iter().filter(|&&b| b).count();
    if center > total {
        return Err(SlrmError::InvalidParameter(format!(
            "center disk holds {center} frequencies but the budget is {total}"
        )));
    }
    let rest: Vec<usize> = (0..grid.len()).filter(|&o| !kept[o]).collect();
    let scale = grid.n1().max(grid.n2()) as f64;
    let weights: Vec<f64> = rest
        .iter()
        .map(|&o| (1.0 + radius(grid.index_at(o)) / scale).powf(-decay_power))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample_weighted(&mut rng, rest.len(), |i| weights[i], total - center)
        .map_err(|e| SlrmError::InvalidParameter(format!("weighted draw failed: {e}")))?;
    for i in picks.iter() {
        kept[rest[i]] = true;
    }
    Ok(SamplingMask { grid, kept, fraction, seed })
}

/// Restriction of `field` to the mask plus i.i.d. complex Gaussian noise with
/// standard deviation `sigma` on each of the real and imaginary parts.
pub fn degrade(field: &SampleField, mask: &SamplingMask, sigma: f64, seed: u64) -> Result<SampleField> {
    field.require_order(0)?;
    if field.grid() != mask.grid() {
        return Err(SlrmError::ShapeMismatch("mask and field grids differ".into()));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(SlrmError::InvalidParameter(format!("noise level {sigma} must be nonnegative")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let vals = field
        .component(0)
        .iter()
        .zip(mask.kept())
        .map(|(z, &m)| {
            if !m {
                return Complex64::new(0.0, 0.0);
            }
            if sigma == 0.0 {
                return *z;
            }
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            z + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(SampleField::scalar(field.grid(), vals)?.with_source(FieldSource::Derived))
}
