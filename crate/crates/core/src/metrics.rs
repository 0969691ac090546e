//! SNR, HFEN and SSIM on real (or magnitude) parts of pixel images.

use crate::constants::{LOG_SIGMA, LOG_SIZE, SSIM_DYNAMIC_RANGE, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
use crate::error::{Result, SlrmError};
use crate::field::SpatialImage;

/// Which real image a complex image is reduced to before comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MetricMode {
    #[default]
    RealPart,
    Magnitude,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    /// `+∞` when the images coincide.
    pub snr_db: f64,
    pub hfen: f64,
    pub ssim: f64,
}

fn reduce(img: &SpatialImage, mode: MetricMode) -> Vec<f64> {
    match mode {
        MetricMode::RealPart => img.real_part(),
        MetricMode::Magnitude => img.values().iter().map(|z| z.norm()).collect(),
    }
}

fn check(u: &SpatialImage, r: &SpatialImage) -> Result<()> {
    if u.grid() != r.grid() {
        return Err(SlrmError::ShapeMismatch(format!(
            "images of extents {:?} and {:?}",
            u.grid().extents(),
            r.grid().extents()
        )));
    }
    Ok(())
}

fn l2(x: impl Iterator<Item = f64>) -> f64 {
    x.map(|v| v * v).sum::<f64>().sqrt()
}

/// `20 log10(‖ref‖ / ‖u − ref‖)` on plain slices.
pub fn snr_db_values(u: &[f64], reference: &[f64]) -> Result<f64> {
    let rn = l2(reference.iter().copied());
    if rn == 0.0 {
        return Err(SlrmError::InvalidParameter("reference image is zero".into()));
    }
    let en = l2(u.iter().zip(reference).map(|(a, b)| a - b));
    if en == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (rn / en).log10())
}

pub fn snr_db(u: &SpatialImage, reference: &SpatialImage) -> Result<f64> {
    snr_db_with(u, reference, MetricMode::RealPart)
}

pub fn snr_db_with(u: &SpatialImage, reference: &SpatialImage, mode: MetricMode) -> Result<f64> {
    check(u, reference)?;
    snr_db_values(&reduce(u, mode), &reduce(reference, mode))
}

/// Zero-mean `size × size` Laplacian-of-Gaussian kernel.
pub fn log_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let h = (size as f64 - 1.0) / 2.0;
    let s2 = sigma * sigma;
    let mut g = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let (x, y) = (i as f64 - h, j as f64 - h);
            g.push((-(x * x + y * y) / (2.0 * s2)).exp());
        }
    }
    let total: f64 = g.iter().sum();
    let mut k: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (x, y) = ((idx / size) as f64 - h, (idx % size) as f64 - h);
            v / total * (x * x + y * y - 2.0 * s2) / (s2 * s2)
        })
        .collect();
    let mean = k.iter().sum::<f64>() / k.len() as f64;
    k.iter_mut().for_each(|v| *v -= mean);
    k
}

/// Normalized `size × size` Gaussian window.
pub fn gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let h = (size as f64 - 1.0) / 2.0;
    let mut g = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let (x, y) = (i as f64 - h, j as f64 - h);
            g.push((-(x * x + y * y) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= total);
    g
}

/// Same-size correlation with zero padding outside the image.
fn filter_same(x: &[f64], n1: usize, n2: usize, k: &[f64], size: usize) -> Vec<f64> {
    let h = (size / 2) as isize;
    let mut out = vec![0.0; n1 * n2];
    for r in 0..n1 {
        for c in 0..n2 {
            let mut s = 0.0;
            for i in 0..size {
                let rr = r as isize + i as isize - h;
                if rr < 0 || rr >= n1 as isize {
                    continue;
                }
                for j in 0..size {
                    let cc = c as isize + j as isize - h;
                    if cc < 0 || cc >= n2 as isize {
                        continue;
                    }
                    s += k[i * size + j] * x[rr as usize * n2 + cc as usize];
                }
            }
            out[r * n2 + c] = s;
        }
    }
    out
}

/// Correlation restricted to positions where the window fits.
fn filter_valid(x: &[f64], n1: usize, n2: usize, k: &[f64], size: usize) -> (Vec<f64>, usize, usize) {
    let (m1, m2) = (n1 + 1 - size, n2 + 1 - size);
    let mut out = vec![0.0; m1 * m2];
    for r in 0..m1 {
        for c in 0..m2 {
            let mut s = 0.0;
            for i in 0..size {
                let row = &x[(r + i) * n2 + c..(r + i) * n2 + c + size];
                s += k[i * size..(i + 1) * size].iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
            }
            out[r * m2 + c] = s;
        }
    }
    (out, m1, m2)
}

pub fn hfen(u: &SpatialImage, reference: &SpatialImage) -> Result<f64> {
    hfen_with(u, reference, MetricMode::RealPart)
}

/// `‖LoG(u) − LoG(ref)‖ / ‖LoG(ref)‖` with a 15×15 kernel, `σ = 1.5`, zero padding.
pub fn hfen_with(u: &SpatialImage, reference: &SpatialImage, mode: MetricMode) -> Result<f64> {
    check(u, reference)?;
    let (n1, n2) = u.grid().extents();
    let k = log_kernel(LOG_SIZE, LOG_SIGMA);
    let lu = filter_same(&reduce(u, mode), n1, n2, &k, LOG_SIZE);
    let lr = filter_same(&reduce(reference, mode), n1, n2, &k, LOG_SIZE);
    let den = l2(lr.iter().copied());
    if den == 0.0 {
        return Err(SlrmError::InvalidParameter("reference has no high-frequency content".into()));
    }
    Ok(l2(lu.iter().zip(&lr).map(|(a, b)| a - b)) / den)
}

pub fn ssim(u: &SpatialImage, reference: &SpatialImage) -> Result<f64> {
    ssim_with(u, reference, MetricMode::RealPart)
}

/// Mean SSIM over all positions where the 11×11 Gaussian window fits.
pub fn ssim_with(u: &SpatialImage, reference: &SpatialImage, mode: MetricMode) -> Result<f64> {
    check(u, reference)?;
    let (n1, n2) = u.grid().extents();
    if n1 < SSIM_WINDOW || n2 < SSIM_WINDOW {
        return Err(SlrmError::InvalidGrid(format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels")));
    }
    let w = gaussian_window(SSIM_WINDOW, SSIM_SIGMA);
    let x = reduce(u, mode);
    let y = reduce(reference, mode);
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let (mx, m1, m2) = filter_valid(&x, n1, n2, &w, SSIM_WINDOW);
    let (my, _, _) = filter_valid(&y, n1, n2, &w, SSIM_WINDOW);
    let (sxx, _, _) = filter_valid(&xx, n1, n2, &w, SSIM_WINDOW);
    let (syy, _, _) = filter_valid(&yy, n1, n2, &w, SSIM_WINDOW);
    let (sxy, _, _) = filter_valid(&xy, n1, n2, &w, SSIM_WINDOW);
    let c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE).powi(2);
    let total: f64 = (0..m1 * m2)
        .map(|i| {
            let (a, b) = (mx[i], my[i]);
            let va = sxx[i] - a * a;
            let vb = syy[i] - b * b;
            let cov = sxy[i] - a * b;
            ((2.0 * a * b + c1) * (2.0 * cov + c2)) / ((a * a + b * b + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / (m1 * m2) as f64)
}

pub fn evaluate(u: &SpatialImage, reference: &SpatialImage) -> Result<MetricReport> {
    evaluate_with(u, reference, MetricMode::RealPart)
}

pub fn evaluate_with(u: &SpatialImage, reference: &SpatialImage, mode: MetricMode) -> Result<MetricReport> {
    Ok(MetricReport {
        snr_db: snr_db_with(u, reference, mode)?,
        hfen: hfen_with(u, reference, mode)?,
        ssim: ssim_with(u, reference, mode)?,
    })
}
