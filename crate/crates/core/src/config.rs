//! Experiment configuration files: flat TOML sections, no nesting beyond one level.

use std::path::PathBuf;

use serde::Deserialize;

use crate::constants::{DEFAULT_CENTER_RADIUS, DEFAULT_DECAY_POWER};
use crate::error::{Result, SlrmError};
use crate::oracle::{PiecewiseLinear2D, Rect};
use crate::solvers::baselines::BaselineParams;
use crate::solvers::irls::IrlsOptions;
use crate::solvers::pipeline::QInit;
use crate::solvers::SolverParams;

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomKind {
    /// Seeded random non-overlapping affine rectangles.
    Rectangles,
    /// Affine square plus a band wrapping around the boundary.
    TwoRegion,
    /// A PGM image read from `path`.
    Image,
    /// A rectangle description file read from `path`.
    File,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSection {
    pub kind: PhantomKind,
    #[serde(default = "default_count")]
    pub count: usize,
    pub path: Option<PathBuf>,
}

fn default_count() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n1: usize,
    pub n2: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSection {
    pub fraction: f64,
    #[serde(default = "default_decay")]
    pub decay_power: f64,
    #[serde(default = "default_radius")]
    pub center_radius: f64,
}

fn default_decay() -> f64 {
    DEFAULT_DECAY_POWER
}

fn default_radius() -> f64 {
    DEFAULT_CENTER_RADIUS
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    /// Methods to run, in order.
    pub names: Vec<String>,
    /// Odd patch size `K` (square support).
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProposedSection {
    pub beta: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Relative `ε` (times `σ_max`) in the weight rule.
    pub eps_rel: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub unpenalized_wraparound: bool,
    /// `"tgv"` or `"gradient"`.
    pub q_init: String,
    /// Passes that re-estimate the stacks from the previous result.
    pub refinements: usize,
}

impl Default for ProposedSection {
    fn default() -> Self {
        Self {
            beta: 1e-2,
            nu1: 1e-5,
            nu2: 1e-5,
            eps_rel: 1e-3,
            max_iter: 500,
            tol: 1e-6,
            unpenalized_wraparound: false,
            q_init: "tgv".into(),
            refinements: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub gamma1: f64,
    pub gamma2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub isotropic: bool,
}

impl Default for BaselineSection {
    fn default() -> Self {
        let p = BaselineParams::default();
        Self {
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            mu1: p.mu1,
            mu2: p.mu2,
            max_iter: p.max_iter,
            tol: p.tol,
            isotropic: p.isotropic,
        }
    }
}

impl BaselineSection {
    pub fn params(&self) -> BaselineParams {
        BaselineParams {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            mu1: self.mu1,
            mu2: self.mu2,
            max_iter: self.max_iter,
            tol: self.tol,
            isotropic: self.isotropic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrlsSection {
    pub gamma1: f64,
    pub gamma2: f64,
    pub eps_factor: f64,
    pub eps_decay: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub cg_max_iter: usize,
    pub cg_tol: f64,
    pub strict_cg: bool,
}

impl Default for IrlsSection {
    fn default() -> Self {
        let o = IrlsOptions::default();
        Self {
            gamma1: o.gamma1,
            gamma2: o.gamma2,
            eps_factor: o.eps_factor,
            eps_decay: o.eps_decay,
            max_iter: o.max_iter,
            tol: o.tol,
            cg_max_iter: o.cg_max_iter,
            cg_tol: o.cg_tol,
            strict_cg: o.strict_cg,
        }
    }
}

impl IrlsSection {
    pub fn options(&self) -> IrlsOptions {
        IrlsOptions {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            eps_factor: self.eps_factor,
            eps_decay: self.eps_decay,
            max_iter: self.max_iter,
            tol: self.tol,
            cg_max_iter: self.cg_max_iter,
            cg_tol: self.cg_tol,
            strict_cg: self.strict_cg,
            ..IrlsOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub phantom: PhantomSection,
    pub grid: GridSection,
    pub mask: MaskSection,
    #[serde(default = "default_noise")]
    pub noise: NoiseSection,
    pub method: MethodSection,
    #[serde(default)]
    pub proposed: ProposedSection,
    #[serde(default)]
    pub tgv: BaselineSection,
    #[serde(default)]
    pub infconv: BaselineSection,
    #[serde(default)]
    pub framelet: BaselineSection,
    #[serde(default)]
    pub irls: IrlsSection,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_noise() -> NoiseSection {
    NoiseSection { sigma: 0.0 }
}

/// 1-based line of byte offset `pos`.
fn line_at(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `[section]` (or the top level for `""`), else 0.
pub fn line_of(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    0
}

const METHODS: [&str; 6] = ["proposed", "slrm-irls", "gslr-irls", "tgv", "infconv", "framelet"];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| SlrmError::Config {
            line: e.span().map(|s| line_at(text, s.start)).unwrap_or(0),
            msg: e.message().to_string(),
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::parse(&text)?, text))
    }

    fn validate(&self, text: &str) -> Result<()> {
        let err = |section: &str, key: &str, msg: String| SlrmError::Config { line: line_of(text, section, key), msg };
        let k = self.method.support;
        if k % 2 == 0 || k == 0 {
            return Err(err("method", "support", format!("support {k} must be odd")));
        }
        if k > self.grid.n1 || k > self.grid.n2 {
            return Err(err("method", "support", format!("support {k} exceeds the grid")));
        }
        if self.grid.n1 == 0 || self.grid.n2 == 0 {
            return Err(err("grid", "n1", "grid extents must be positive".into()));
        }
        if !(self.mask.fraction > 0.0 && self.mask.fraction <= 1.0) {
            return Err(err("mask", "fraction", format!("fraction {} outside (0, 1]", self.mask.fraction)));
        }
        if !(self.noise.sigma >= 0.0) {
            return Err(err("noise", "sigma", "sigma must be nonnegative".into()));
        }
        if self.method.names.is_empty() {
            return Err(err("method", "names", "no methods listed".into()));
        }
        for name in &self.method.names {
            if !METHODS.contains(&name.as_str()) {
                return Err(err("method", "names", format!("unknown method {name}; expected one of {METHODS:?}")));
            }
        }
        if matches!(self.phantom.kind, PhantomKind::Image | PhantomKind::File) && self.phantom.path.is_none() {
            return Err(err("phantom", "kind", "image and file phantoms need a path".into()));
        }
        if !(self.proposed.beta > 0.0) {
            return Err(err("proposed", "beta", "beta must be positive".into()));
        }
        if !matches!(self.proposed.q_init.as_str(), "tgv" | "gradient") {
            return Err(err("proposed", "q_init", format!("q_init must be tgv or gradient, got {}", self.proposed.q_init)));
        }
        Ok(())
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            beta: self.proposed.beta,
            nu1: self.proposed.nu1,
            nu2: self.proposed.nu2,
            eps_rel: self.proposed.eps_rel,
            max_iter: self.proposed.max_iter,
            tol: self.proposed.tol,
        }
    }

    pub fn q_init(&self) -> QInit {
        if self.proposed.q_init == "gradient" {
            QInit::Gradient
        } else {
            QInit::TgvAuxiliary
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionEntry {
    lo: [String; 2],
    hi: [String; 2],
    alpha: [f64; 2],
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhantomFile {
    region: Vec<RegionEntry>,
}

/// `p`, `p/q` or `-p/q` with `q` a power of two.
pub fn parse_dyadic(s: &str) -> Option<f64> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<u64>().ok()?),
        None => (s, 1),
    };
    if !den.is_power_of_two() || den > 1 << 52 {
        return None;
    }
    let num: i64 = num.parse().ok()?;
    if num.unsigned_abs() > 1 << 52 {
        return None;
    }
    Some(num as f64 / den as f64)
}

/// Rectangle phantom from a description file of `[[region]]` tables, each with
/// dyadic corner strings `lo`, `hi` and affine coefficients `alpha`, `beta`:
///
/// ```toml
/// [[region]]
/// lo = ["-1/4", "-1/4"]
/// hi = ["1/4", "1/4"]
/// alpha = [0.3, -0.2]
/// beta = 0.5
/// ```
pub fn parse_phantom(text: &str) -> Result<PiecewiseLinear2D> {
    let file: PhantomFile = toml::from_str(text).map_err(|e| SlrmError::Config {
        line: e.span().map(|s| line_at(text, s.start)).unwrap_or(0),
        msg: e.message().to_string(),
    })?;
    let corner = |s: &String| {
        parse_dyadic(s).ok_or_else(|| SlrmError::Config {
            line: text.find(&format!("\"{s}\"")).map(|p| line_at(text, p)).unwrap_or(0),
            msg: format!("corner {s:?} is not a dyadic rational"),
        })
    };
    let mut regions = Vec::with_capacity(file.region.len());
    for r in &file.region {
        regions.push(Rect::new(
            [corner(&r.lo[0])?, corner(&r.lo[1])?],
            [corner(&r.hi[0])?, corner(&r.hi[1])?],
            r.alpha,
            r.beta,
        ));
    }
    PiecewiseLinear2D::new(regions)
}
