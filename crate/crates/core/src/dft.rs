//! Discrete Fourier transforms between pixel images and centered frequency fields.
//!
//! [`to_frequency`] / [`to_spatial`] are the unitary pair
//! `v(k) = |O|^{-1/2} Σ_m x(m) e^{-2πi(k1 m1/N1 + k2 m2/N2)}` with both `k` and
//! the pixel position `m` centered. [`to_spectrum`] / [`to_intensity`] use the
//! unnormalized forward sum instead, so that the spectrum of a pixel image with
//! values in `[0, 1]` is on the same scale as `N1·N2·û(k)` for the continuous
//! transform `û` of the function it samples.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField, SpatialImage};
use crate::grid::CenteredGrid;

/// Planned 2D FFT over row-major `n1 × n2` buffers in standard (uncentered) order.
#[derive(Clone)]
pub struct Fft2 {
    n1: usize,
    n2: usize,
    fwd_rows: Arc<dyn Fft<f64>>,
    inv_rows: Arc<dyn Fft<f64>>,
    fwd_cols: Arc<dyn Fft<f64>>,
    inv_cols: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.n1, self.n2)
    }
}

impl Fft2 {
    pub fn new(n1: usize, n2: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n1,
            n2,
            fwd_rows: planner.plan_fft_forward(n2),
            inv_rows: planner.plan_fft_inverse(n2),
            fwd_cols: planner.plan_fft_forward(n1),
            inv_cols: planner.plan_fft_inverse(n1),
        }
    }

    pub fn for_grid(grid: CenteredGrid) -> Self {
        Self::new(grid.n1(), grid.n2())
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    /// Unnormalized inverse transform in place (no `1/(n1 n2)` factor).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    fn run(&self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT extents");
        let (rows, cols) = if forward {
            (&self.fwd_rows, &self.fwd_cols)
        } else {
            (&self.inv_rows, &self.inv_cols)
        };
        if self.n2 > 1 {
            rows.process(data);
        }
        if self.n1 > 1 {
            let mut t = transpose(data, self.n1, self.n2);
            cols.process(&mut t);
            let back = transpose(&t, self.n2, self.n1);
            data.copy_from_slice(&back);
        }
    }
}

fn transpose(data: &[Complex64], n1: usize, n2: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..n1 {
        for c in 0..n2 {
            out[c * n1 + r] = data[r * n2 + c];
        }
    }
    out
}

/// Reorders a centered-storage buffer into standard FFT order.
pub fn centered_to_standard(data: &[Complex64], grid: CenteredGrid) -> Vec<Complex64> {
    let (n1, n2) = grid.extents();
    let (h1, h2) = (n1 / 2, n2 / 2);
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..n1 {
        let rs = (r + n1 - h1) % n1;
        for c in 0..n2 {
            let cs = (c + n2 - h2) % n2;
            out[rs * n2 + cs] = data[r * n2 + c];
        }
    }
    out
}

/// Inverse of [`centered_to_standard`].
pub fn standard_to_centered(data: &[Complex64], grid: CenteredGrid) -> Vec<Complex64> {
    let (n1, n2) = grid.extents();
    let (h1, h2) = (n1 / 2, n2 / 2);
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..n1 {
        let rc = (r + h1) % n1;
        for c in 0..n2 {
            let cc = (c + h2) % n2;
            out[rc * n2 + cc] = data[r * n2 + c];
        }
    }
    out
}

/// Planned spectrum-scale transform pair on centered-storage buffers.
#[derive(Clone, Debug)]
pub struct SpectrumTransform {
    grid: CenteredGrid,
    fft: Fft2,
}

impl SpectrumTransform {
    pub fn new(grid: CenteredGrid) -> Self {
        Self { grid, fft: Fft2::for_grid(grid) }
    }

    pub fn grid(&self) -> CenteredGrid {
        self.grid
    }

    fn run(&self, values: &[Complex64], forward: bool, scale: f64) -> Vec<Complex64> {
        let mut buf = centered_to_standard(values, self.grid);
        if forward {
            self.fft.forward(&mut buf);
        } else {
            self.fft.inverse(&mut buf);
        }
        let mut out = standard_to_centered(&buf, self.grid);
        if scale != 1.0 {
            for z in &mut out {
                *z *= scale;
            }
        }
        out
    }

    /// Pixels to spectrum, unnormalized.
    pub fn forward(&self, pixels: &[Complex64]) -> Vec<Complex64> {
        self.run(pixels, true, 1.0)
    }

    /// Spectrum to pixels, with the `1/|O|` factor.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        self.run(spectrum, false, 1.0 / self.grid.len() as f64)
    }
}

fn transform(values: &[Complex64], grid: CenteredGrid, forward: bool, scale: f64) -> Vec<Complex64> {
    SpectrumTransform::new(grid).run(values, forward, scale)
}

/// Unitary forward DFT of a pixel image to an order-0 frequency field.
pub fn to_frequency(image: &SpatialImage) -> SampleField {
    let grid = image.grid();
    let s = 1.0 / (grid.len() as f64).sqrt();
    let v = transform(image.values(), grid, true, s);
    SampleField::scalar(grid, v)
        .expect("grid-consistent transform")
        .with_source(FieldSource::Dft)
}

/// Unitary inverse DFT of an order-0 field.
pub fn to_spatial(field: &SampleField) -> Result<SpatialImage> {
    field.require_order(0)?;
    let grid = field.grid();
    let s = 1.0 / (grid.len() as f64).sqrt();
    SpatialImage::new(grid, transform(field.component(0), grid, false, s))
}

/// Unnormalized forward DFT (spectrum scale).
pub fn to_spectrum(image: &SpatialImage) -> SampleField {
    let grid = image.grid();
    let v = transform(image.values(), grid, true, 1.0);
    SampleField::scalar(grid, v)
        .expect("grid-consistent transform")
        .with_source(FieldSource::Dft)
}

/// Inverse of [`to_spectrum`].
pub fn to_intensity(field: &SampleField) -> Result<SpatialImage> {
    field.require_order(0)?;
    let grid = field.grid();
    let s = 1.0 / grid.len() as f64;
    SpatialImage::new(grid, transform(field.component(0), grid, false, s))
}

/// Either side of the transform pair.
#[derive(Clone, Debug)]
pub enum Representation {
    Spatial(SpatialImage),
    Frequency(SampleField),
}

/// Maps a representation to the other one with the unitary transform.
pub fn dft_pair(input: &Representation) -> Result<Representation> {
    Ok(match input {
        Representation::Spatial(img) => Representation::Frequency(to_frequency(img)),
        Representation::Frequency(f) => Representation::Spatial(to_spatial(f)?),
    })
}

/// Checks that a field and an image share extents.
pub fn check_extents(field: &SampleField, image: &SpatialImage) -> Result<()> {
    if field.grid() != image.grid() {
        return Err(SlrmError::ShapeMismatch(format!(
            "field {:?} vs image {:?}",
            field.grid().extents(),
            image.grid().extents()
        )));
    }
    Ok(())
}
