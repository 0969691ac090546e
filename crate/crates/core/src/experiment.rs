//! Phantom generation and method runs tying sampling, solvers and metrics together.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_phantom, ExperimentConfig, PhantomKind};
use crate::dft::{to_intensity, to_spectrum};
use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField, SpatialImage};
use crate::diffops::{apply_d, apply_e};
use crate::grid::{CenteredGrid, GridDifference};
use crate::hankel::{lift, numerical_rank, svd_of, DEFAULT_RANK_TOL};
use crate::io::decode_pgm;
use crate::metrics::{evaluate, MetricReport};
use crate::oracle::{
    fourier_samples_2d, minimal_filter_1d, p_samples_2d, residual_and_pprime_samples_1d, verify_annihilation,
    PiecewiseLinear1D, PiecewiseLinear2D, Rect,
};
use crate::sampling::{degrade, variable_density_mask, SamplingMask};
use crate::solvers::baselines::{solve_framelet_analysis, solve_infconv_discrete, solve_tgv_discrete};
use crate::solvers::irls::{solve_irls_gslr, solve_irls_slrm};
use crate::solvers::pipeline::{pipeline_proposed_with, PipelineOptions};
use crate::solvers::proposed::ProposedOptions;
use crate::solvers::{Diagnostics, RestorationProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Proposed,
    SlrmIrls,
    GslrIrls,
    Tgv,
    Infconv,
    Framelet,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Proposed, Method::SlrmIrls, Method::GslrIrls, Method::Tgv, Method::Infconv, Method::Framelet];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::SlrmIrls => "slrm-irls",
            Method::GslrIrls => "gslr-irls",
            Method::Tgv => "tgv",
            Method::Infconv => "infconv",
            Method::Framelet => "framelet",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = SlrmError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SlrmError::InvalidParameter(format!("unknown method {s}")))
    }
}

/// Seeded non-overlapping affine rectangles inside `[-0.45, 0.45]²` with corners on
/// multiples of `1/20`.
pub fn random_rect_phantom(seed: u64, count: usize) -> Result<PiecewiseLinear2D> {
    if count == 0 {
        return Err(SlrmError::InvalidParameter("phantom needs at least one rectangle".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 0.05;
    let mut rects: Vec<Rect> = Vec::with_capacity(count);
    let mut attempts = 0;
    while rects.len() < count {
        attempts += 1;
        if attempts > 10_000 {
            return Err(SlrmError::InvalidModel(format!("could not place {count} rectangles")));
        }
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for a in 0..2 {
            let size = rng.random_range(3..=8) as f64 * step;
            let start = rng.random_range(-9..=(9 - 3)) as f64 * step;
            lo[a] = start;
            hi[a] = start + size;
        }
        if hi[0] > 0.45 + 1e-12 || hi[1] > 0.45 + 1e-12 {
            continue;
        }
        let clear = rects.iter().all(|r| {
            (0..2).any(|a| hi[a] + step <= r.lo[a] + 1e-12 || r.hi[a] + step <= lo[a] + 1e-12)
        });
        if !clear {
            continue;
        }
        let alpha = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let beta = rng.random_range(0.3..0.9);
        rects.push(Rect::new(lo, hi, alpha, beta));
    }
    PiecewiseLinear2D::new(rects)
}

/// Affine square plus a band wrapping around the `x1 = ±1/2` boundary; all edges on
/// `x1, x2 ∈ {-1/4, 1/4}`.
pub fn two_region_phantom() -> PiecewiseLinear2D {
    let band = |lo: f64, hi: f64| Rect::new([lo, -0.25], [hi, 0.25], [0.0, 0.4], 0.8);
    PiecewiseLinear2D::new(vec![
        Rect::new([-0.25, -0.25], [0.25, 0.25], [0.3, -0.2], 0.5),
        band(0.25, 0.5),
        band(-0.5, -0.25),
    ])
    .expect("valid two-region phantom")
}

/// Analytic samples on the spectrum scale, `|O| · û(k)`.
pub fn analytic_spectrum(model: &PiecewiseLinear2D, grid: CenteredGrid) -> SampleField {
    fourier_samples_2d(model, grid).scale(Complex64::new(grid.len() as f64, 0.0)).with_source(FieldSource::Analytic)
}

/// Ground truth, mask and noisy observations of one experiment.
#[derive(Clone, Debug)]
pub struct ExperimentData {
    /// Inverse DFT of the noiseless spectrum on the full grid.
    pub reference: SpatialImage,
    pub spectrum: SampleField,
    pub mask: SamplingMask,
    pub observed: SampleField,
}

/// Seeds for the mask and noise streams derived from the experiment seed.
pub fn derived_seeds(seed: u64) -> (u64, u64) {
    (seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1), seed.wrapping_mul(0xBF58_476D_1CE4_E5B9).wrapping_add(2))
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<ExperimentData> {
    let grid = CenteredGrid::new(cfg.grid.n1, cfg.grid.n2)?;
    let spectrum = match cfg.phantom.kind {
        PhantomKind::Rectangles => analytic_spectrum(&random_rect_phantom(cfg.seed, cfg.phantom.count)?, grid),
        PhantomKind::TwoRegion => analytic_spectrum(&two_region_phantom(), grid),
        PhantomKind::File => {
            let path = cfg.phantom.path.as_ref().expect("validated");
            analytic_spectrum(&parse_phantom(&std::fs::read_to_string(path)?)?, grid)
        }
        PhantomKind::Image => {
            let path = cfg.phantom.path.as_ref().expect("validated");
            let (vals, n1, n2) = decode_pgm(&std::fs::read(path)?)?;
            if (n1, n2) != grid.extents() {
                return Err(SlrmError::ShapeMismatch(format!(
                    "image is {n1}x{n2}, config grid is {}x{}",
                    grid.n1(),
                    grid.n2()
                )));
            }
            to_spectrum(&SpatialImage::from_real(grid, &vals)?)
        }
    };
    let (mask_seed, noise_seed) = derived_seeds(cfg.seed);
    let mask = variable_density_mask(grid, cfg.mask.fraction, mask_seed, cfg.mask.decay_power, cfg.mask.center_radius)?;
    let observed = degrade(&spectrum, &mask, cfg.noise.sigma, noise_seed)?;
    Ok(ExperimentData { reference: to_intensity(&spectrum)?, spectrum, mask, observed })
}

pub fn build_problem(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<RestorationProblem> {
    let support = CenteredGrid::square(cfg.method.support)?;
    RestorationProblem::new(data.mask.kept().to_vec(), data.observed.clone(), support, cfg.solver_params(), cfg.seed)
}

#[derive(Clone, Debug)]
pub struct MethodResult {
    pub method: Method,
    pub image: SpatialImage,
    pub spectrum: SampleField,
    pub diagnostics: Diagnostics,
    pub runtime_s: f64,
}

pub fn run_method(method: Method, cfg: &ExperimentConfig, problem: &RestorationProblem) -> Result<MethodResult> {
    let t0 = Instant::now();
    let (image, diagnostics) = match method {
        Method::Proposed => {
            let opts = PipelineOptions {
                tgv: cfg.tgv.params(),
                q_init: cfg.q_init(),
                proposed: ProposedOptions {
                    unpenalized_wraparound: cfg.proposed.unpenalized_wraparound,
                    ..ProposedOptions::default()
                },
                refinements: cfg.proposed.refinements,
            };
            let out = pipeline_proposed_with(problem, &opts)?;
            (out.image, out.diagnostics)
        }
        Method::SlrmIrls => {
            let tgv = solve_tgv_discrete(problem, &cfg.tgv.params())?;
            let sol = solve_irls_slrm(problem, &tgv.v, &tgv.q_from_p(), &cfg.irls.options())?;
            (to_intensity(&sol.first)?, sol.diagnostics)
        }
        Method::GslrIrls => {
            let ic = solve_infconv_discrete(problem, &cfg.infconv.params())?;
            let sol = solve_irls_gslr(problem, &to_spectrum(&ic.u1), &to_spectrum(&ic.u2), &cfg.irls.options())?;
            let v = sol.first.axpy(Complex64::new(1.0, 0.0), &sol.second)?;
            (to_intensity(&v)?, sol.diagnostics)
        }
        Method::Tgv => {
            let s = solve_tgv_discrete(problem, &cfg.tgv.params())?;
            (s.image, s.diagnostics)
        }
        Method::Infconv => {
            let s = solve_infconv_discrete(problem, &cfg.infconv.params())?;
            (s.image, s.diagnostics)
        }
        Method::Framelet => {
            let s = solve_framelet_analysis(problem, &cfg.framelet.params())?;
            (s.image, s.diagnostics)
        }
    };
    if image.values().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SlrmError::NonFinite(format!("{} output", method.name())));
    }
    let spectrum = to_spectrum(&image).with_source(FieldSource::Solver);
    Ok(MethodResult { method, image, spectrum, diagnostics, runtime_s: t0.elapsed().as_secs_f64() })
}

/// One row of a comparison table.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub image: String,
    pub method: String,
    pub metrics: MetricReport,
    pub runtime_s: Option<f64>,
}

pub const REPORT_HEADER: &str = "image,method,snr,hfen,ssim,runtime_s";

impl ReportRow {
    pub fn new(image: &str, method: &str, u: &SpatialImage, reference: &SpatialImage, runtime_s: Option<f64>) -> Result<Self> {
        Ok(Self { image: image.into(), method: method.into(), metrics: evaluate(u, reference)?, runtime_s })
    }

    /// Runtime is written as `NA` unless recorded, so default reports are reproducible.
    pub fn to_csv(&self) -> String {
        let rt = self.runtime_s.map(|t| format!("{t:.3}")).unwrap_or_else(|| "NA".into());
        format!(
            "{},{},{:.6},{:.6},{:.6},{}",
            self.image, self.method, self.metrics.snr_db, self.metrics.hfen, self.metrics.ssim, rt
        )
    }
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Hat with jumps: slopes `±1` meeting at `0`, offset `5/4`, support `[-1/4, 1/4)`.
pub fn hat_signal() -> PiecewiseLinear1D {
    PiecewiseLinear1D::real(&[-0.25, 0.0, 0.25], &[1.0, -1.0], &[1.25, 1.25]).expect("valid hat")
}

/// `u(x) = x` on `[-1/4, 1/4)`.
pub fn ramp_signal() -> PiecewiseLinear1D {
    PiecewiseLinear1D::real(&[-0.25, 0.25], &[1.0], &[0.0]).expect("valid ramp")
}

/// Annihilation residuals and lift ranks of one 1D signal.
#[derive(Clone, Debug)]
pub struct DemoRow {
    pub name: String,
    /// Number of singular points, which bounds both ranks.
    pub singular_points: usize,
    pub residual_first: f64,
    pub residual_second: f64,
    pub rank_first: usize,
    pub rank_second: usize,
}

/// Minimal-filter residuals on `F(u' − p)` and `F(p')` for `n` samples, and ranks of
/// their lifts with a support of `support_len` taps.
pub fn demo_1d(model: &PiecewiseLinear1D, name: &str, n: usize, support_len: usize) -> Result<DemoRow> {
    let grid = CenteredGrid::line(n)?;
    let support = CenteredGrid::line(support_len)?;
    let filter = minimal_filter_1d(model.breakpoints())?;
    let (res, pp) = residual_and_pprime_samples_1d(model, grid)?;
    let rank = |f: &SampleField| -> Result<usize> {
        Ok(numerical_rank(&svd_of(&lift(f, support)?)?.values, DEFAULT_RANK_TOL))
    };
    Ok(DemoRow {
        name: name.into(),
        singular_points: model.breakpoints().len(),
        residual_first: verify_annihilation(&res, &filter)?,
        residual_second: verify_annihilation(&pp, &filter)?,
        rank_first: rank(&res)?,
        rank_second: rank(&pp)?,
    })
}

/// Lift ranks for one enlarged support `K'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub support: usize,
    pub rank_first: usize,
    pub rank_second: usize,
    /// `|K'| − |K':K|`
    pub bound: usize,
}

/// Ranks of the lifts of `D v − q` and `E q` for square supports `K'` against the
/// bound from a minimal `base × base` filter.
pub fn rank_sweep(model: &PiecewiseLinear2D, grid: CenteredGrid, base: usize, supports: &[usize]) -> Result<Vec<SweepRow>> {
    let v = fourier_samples_2d(model, grid);
    let q = p_samples_2d(model, grid);
    let first = apply_d(&v)?.sub(&q)?;
    let second = apply_e(&q)?;
    let k = CenteredGrid::square(base)?;
    supports
        .iter()
        .map(|&kp| {
            let sup = CenteredGrid::square(kp)?;
            let bound = sup.len() - GridDifference::new(sup, k)?.len();
            let rank = |f: &SampleField| -> Result<usize> {
                Ok(numerical_rank(&svd_of(&lift(f, sup)?)?.values, DEFAULT_RANK_TOL))
            };
            Ok(SweepRow { support: kp, rank_first: rank(&first)?, rank_second: rank(&second)?, bound })
        })
        .collect()
}
