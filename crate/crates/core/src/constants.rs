//! Fixed constants of the sampling and evaluation protocol.

/// Default exponent `p` of the sampling density `(1 + |k|/N)^{-p}`.
pub const DEFAULT_DECAY_POWER: f64 = 3.0;
/// Default radius (in frequency index units) of the fully sampled center disk.
pub const DEFAULT_CENTER_RADIUS: f64 = 4.0;

/// Laplacian-of-Gaussian kernel used by HFEN.
pub const LOG_SIZE: usize = 15;
pub const LOG_SIGMA: f64 = 1.5;

/// Gaussian window used by SSIM.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
/// Dynamic range `L` of the images compared by SSIM.
pub const SSIM_DYNAMIC_RANGE: f64 = 1.0;
