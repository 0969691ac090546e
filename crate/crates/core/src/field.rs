//! Complex tensor fields on centered grids and spatial images.

use num_complex::Complex64;

use crate::error::{Result, SlrmError};
use crate::grid::{CenteredGrid, Index2};

/// Where the values of a field came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSource {
    /// Exact samples of the continuous Fourier transform of an analytic model.
    Analytic,
    /// Discrete Fourier transform of a pixel image.
    Dft,
    /// Output of a restoration solver.
    Solver,
    /// Computed from other fields by an operator.
    Derived,
    Unknown,
}

impl FieldSource {
    pub fn tag(&self) -> &'static str {
        match self {
            FieldSource::Analytic => "analytic",
            FieldSource::Dft => "dft",
            FieldSource::Solver => "solver",
            FieldSource::Derived => "derived",
            FieldSource::Unknown => "none",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "analytic" => FieldSource::Analytic,
            "dft" => FieldSource::Dft,
            "solver" => FieldSource::Solver,
            "derived" => FieldSource::Derived,
            "none" => FieldSource::Unknown,
            _ => return None,
        })
    }
}

/// A complex `2^order`-component field on a centered grid.
///
/// For order 2 the components are stored as `(11, 12, 21, 22)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleField {
    order: usize,
    grid: CenteredGrid,
    components: Vec<Vec<Complex64>>,
    pub source: FieldSource,
}

impl SampleField {
    pub fn zeros(order: usize, grid: CenteredGrid) -> Self {
        let n = 1usize << order;
        Self {
            order,
            grid,
            components: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; n],
            source: FieldSource::Derived,
        }
    }

    pub fn from_components(
        order: usize,
        grid: CenteredGrid,
        components: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if components.len() != 1 << order {
            return Err(SlrmError::ShapeMismatch(format!(
                "order {order} needs {} components, got {}",
                1 << order,
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| c.len() != grid.len()) {
            return Err(SlrmError::ShapeMismatch(format!(
                "component of length {} on a grid of {} points",
                c.len(),
                grid.len()
            )));
        }
        Ok(Self {
            order,
            grid,
            components,
            source: FieldSource::Derived,
        })
    }

    pub fn scalar(grid: CenteredGrid, values: Vec<Complex64>) -> Result<Self> {
        Self::from_components(0, grid, vec![values])
    }

    pub fn with_source(mut self, source: FieldSource) -> Self {
        self.source = source;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> CenteredGrid {
        self.grid
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        &self.components[j]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.components[j]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    /// Value of component `j` at centered index `k`, zero off the grid.
    pub fn get(&self, j: usize, k: Index2) -> Complex64 {
        match self.grid.offset(k) {
            Some(o) => self.components[j][o],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, j: usize, k: Index2, value: Complex64) {
        let o = self
            .grid
            .offset(k)
            .expect("index outside the field grid");
        self.components[j][o] = value;
    }

    pub fn require_order(&self, order: usize) -> Result<()> {
        if self.order != order {
            return Err(SlrmError::WrongOrder {
                expected: order,
                found: self.order,
            });
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &SampleField) -> bool {
        self.order == other.order && self.grid == other.grid
    }

    fn check_shape(&self, other: &SampleField) -> Result<()> {
        if !self.same_shape(other) {
            return Err(SlrmError::ShapeMismatch(format!(
                "order {} on {:?} vs order {} on {:?}",
                self.order,
                self.grid.extents(),
                other.order,
                other.grid.extents()
            )));
        }
        Ok(())
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: Complex64, other: &SampleField) -> Result<SampleField> {
        self.check_shape(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + alpha * y).collect())
            .collect();
        Ok(SampleField {
            order: self.order,
            grid: self.grid,
            components,
            source: FieldSource::Derived,
        })
    }

    pub fn sub(&self, other: &SampleField) -> Result<SampleField> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn scale(&self, alpha: Complex64) -> SampleField {
        SampleField {
            order: self.order,
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|x| alpha * x).collect())
                .collect(),
            source: self.source,
        }
    }

    /// Standard inner product `Σ x · conj(y)` over all components.
    pub fn inner(&self, other: &SampleField) -> Result<Complex64> {
        self.check_shape(other)?;
        Ok(self
            .components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(x, y)| x * y.conj())
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|x| x.norm_sqr())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .flatten()
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

/// Pixel image whose extents match a frequency grid.
///
/// Pixels are stored row-major in display order; pixel `(r, c)` sits at the
/// centered position `(r - ⌊N1/2⌋, c - ⌊N2/2⌋)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialImage {
    grid: CenteredGrid,
    values: Vec<Complex64>,
}

impl SpatialImage {
    pub fn new(grid: CenteredGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SlrmError::ShapeMismatch(format!(
                "{} pixels for a {}x{} image",
                values.len(),
                grid.n1(),
                grid.n2()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: CenteredGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(grid: CenteredGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> CenteredGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn pixel(&self, r: usize, c: usize) -> Complex64 {
        self.values[r * self.grid.n2() + c]
    }
}
