//! Closed-form Fourier samples of piecewise-linear models and annihilating filters.
//!
//! Transforms follow `û(ξ) = ∫ u(x) e^{-2πi ξ·x} dx` on integer frequencies.
//! One-dimensional signals live on `n × 1` grids, with the frequency on axis 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField, SpatialImage};
use crate::grid::{CenteredGrid, Index2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `e^{-2πi k x}`
fn phase(k: f64, x: f64) -> Complex64 {
    cis(-2.0 * PI * k * x)
}

/// `∫_a^b x^order e^{-2πikx} dx` for `order ∈ {0, 1}`.
pub fn interval_moment(a: f64, b: f64, k: f64, order: u32) -> Complex64 {
    if k == 0.0 {
        return match order {
            0 => Complex64::new(b - a, 0.0),
            _ => Complex64::new(0.5 * (b * b - a * a), 0.0),
        };
    }
    let w = Complex64::new(0.0, -2.0 * PI * k);
    let (eb, ea) = (phase(k, b), phase(k, a));
    match order {
        0 => (eb - ea) / w,
        _ => eb * (b / w - 1.0 / (w * w)) - ea * (a / w - 1.0 / (w * w)),
    }
}

/// `∫_a^b (αx + β) e^{-2πikx} dx`
pub fn affine_interval_transform(a: f64, b: f64, alpha: Complex64, beta: Complex64, k: f64) -> Complex64 {
    alpha * interval_moment(a, b, k, 1) + beta * interval_moment(a, b, k, 0)
}

fn check_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(SlrmError::InvalidModel(format!("non-finite {what}")));
    }
    Ok(())
}

/// `u(x) = Σ_j (α_j x + β_j) 1_[x_j, x_{j+1})(x)` with breakpoints inside `(-1/2, 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear1D {
    breakpoints: Vec<f64>,
    slopes: Vec<Complex64>,
    intercepts: Vec<Complex64>,
}

impl PiecewiseLinear1D {
    /// `slopes` and `intercepts` hold one entry per interval, i.e. `breakpoints.len() - 1`.
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<Complex64>, intercepts: Vec<Complex64>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        let m = breakpoints.len() - 1;
        if slopes.len() != m || intercepts.len() != m {
            return Err(SlrmError::InvalidModel(format!(
                "{} breakpoints need {m} slopes and intercepts, got {} and {}",
                breakpoints.len(),
                slopes.len(),
                intercepts.len()
            )));
        }
        Ok(Self { breakpoints, slopes, intercepts })
    }

    /// Real-valued convenience constructor.
    pub fn real(breakpoints: &[f64], slopes: &[f64], intercepts: &[f64]) -> Result<Self> {
        Self::new(
            breakpoints.to_vec(),
            slopes.iter().map(|&s| Complex64::new(s, 0.0)).collect(),
            intercepts.iter().map(|&s| Complex64::new(s, 0.0)).collect(),
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[Complex64] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[Complex64] {
        &self.intercepts
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        for (j, w) in self.breakpoints.windows(2).enumerate() {
            if x >= w[0] && x < w[1] {
                return self.slopes[j] * x + self.intercepts[j];
            }
        }
        ZERO
    }

    /// Slope of the piecewise-constant part `p` at `x`.
    pub fn p_at(&self, x: f64) -> Complex64 {
        for (j, w) in self.breakpoints.windows(2).enumerate() {
            if x >= w[0] && x < w[1] {
                return self.slopes[j];
            }
        }
        ZERO
    }

    fn padded(v: &[Complex64], j: usize) -> Complex64 {
        // interval j-1 in 1-based notation; zero outside the support
        if j == 0 || j > v.len() {
            ZERO
        } else {
            v[j - 1]
        }
    }

    /// Jump weights `T_j = (α_j − α_{j−1}) x_j + (β_j − β_{j−1})` of `u′ − p`.
    pub fn jump_weights(&self) -> Vec<Complex64> {
        (1..=self.breakpoints.len())
            .map(|j| {
                let da = Self::padded(&self.slopes, j) - Self::padded(&self.slopes, j - 1);
                let db = Self::padded(&self.intercepts, j) - Self::padded(&self.intercepts, j - 1);
                da * self.breakpoints[j - 1] + db
            })
            .collect()
    }

    /// Weights `α_j − α_{j−1}` of the Dirac stream `p′`.
    pub fn slope_jumps(&self) -> Vec<Complex64> {
        (1..=self.breakpoints.len())
            .map(|j| Self::padded(&self.slopes, j) - Self::padded(&self.slopes, j - 1))
            .collect()
    }
}

fn check_breakpoints(xs: &[f64]) -> Result<()> {
    check_finite(xs, "breakpoint")?;
    if xs.is_empty() {
        return Err(SlrmError::InvalidModel("at least one breakpoint required".into()));
    }
    for w in xs.windows(2) {
        if w[1] == w[0] {
            return Err(SlrmError::InvalidModel(format!("duplicate breakpoint {}", w[0])));
        }
        if w[1] < w[0] {
            return Err(SlrmError::InvalidModel("breakpoints must be increasing".into()));
        }
    }
    if xs[0] <= -0.5 || xs[xs.len() - 1] >= 0.5 {
        return Err(SlrmError::InvalidModel("breakpoints must lie in (-1/2, 1/2)".into()));
    }
    Ok(())
}

fn line_values(grid: CenteredGrid, f: impl Fn(f64) -> Complex64) -> Result<SampleField> {
    if grid.n2() != 1 {
        return Err(SlrmError::InvalidGrid(format!(
            "1D samples need an n x 1 grid, got {:?}",
            grid.extents()
        )));
    }
    let values = grid.indices().map(|k| f(k[0] as f64)).collect();
    Ok(SampleField::scalar(grid, values)?.with_source(FieldSource::Analytic))
}

fn dirac_stream(positions: &[f64], weights: &[Complex64], k: f64) -> Complex64 {
    positions.iter().zip(weights).map(|(&x, &w)| w * phase(k, x)).sum()
}

/// Exact `û(k)` on an `n × 1` grid.
pub fn fourier_samples_1d(model: &PiecewiseLinear1D, grid: CenteredGrid) -> Result<SampleField> {
    line_values(grid, |k| {
        model
            .breakpoints
            .windows(2)
            .enumerate()
            .map(|(j, w)| affine_interval_transform(w[0], w[1], model.slopes[j], model.intercepts[j], k))
            .sum()
    })
}

/// Exact samples of `p̂` where `p` is the piecewise-constant slope field.
pub fn p_samples_1d(model: &PiecewiseLinear1D, grid: CenteredGrid) -> Result<SampleField> {
    line_values(grid, |k| {
        model
            .breakpoints
            .windows(2)
            .enumerate()
            .map(|(j, w)| model.slopes[j] * interval_moment(w[0], w[1], k, 0))
            .sum()
    })
}

/// Exact samples of `ℱ(u′ − p)` and `ℱ(p′)`.
pub fn residual_and_pprime_samples_1d(
    model: &PiecewiseLinear1D,
    grid: CenteredGrid,
) -> Result<(SampleField, SampleField)> {
    let t = model.jump_weights();
    let s = model.slope_jumps();
    let x = model.breakpoints.clone();
    let r = line_values(grid, |k| dirac_stream(&x, &t, k))?;
    let pp = line_values(grid, |k| dirac_stream(&x, &s, k))?;
    Ok((r, pp))
}

/// Axis-aligned rectangle `[lo1, hi1) × [lo2, hi2)` carrying `α·x + β`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub alpha: [Complex64; 2],
    pub beta: Complex64,
}

impl Rect {
    pub fn new(lo: [f64; 2], hi: [f64; 2], alpha: [f64; 2], beta: f64) -> Self {
        Self {
            lo,
            hi,
            alpha: [Complex64::new(alpha[0], 0.0), Complex64::new(alpha[1], 0.0)],
            beta: Complex64::new(beta, 0.0),
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|a| x[a] >= self.lo[a] && x[a] < self.hi[a])
    }

    fn value(&self, x: [f64; 2]) -> Complex64 {
        self.alpha[0] * x[0] + self.alpha[1] * x[1] + self.beta
    }

    fn overlaps(&self, other: &Rect) -> bool {
        (0..2).all(|a| self.lo[a] < other.hi[a] && other.lo[a] < self.hi[a])
    }

    /// `∫∫_rect (α·x + β) e^{-2πi k·x} dx`
    fn transform(&self, k: [f64; 2]) -> Complex64 {
        let i0 = interval_moment(self.lo[0], self.hi[0], k[0], 0);
        let i1 = interval_moment(self.lo[0], self.hi[0], k[0], 1);
        let j0 = interval_moment(self.lo[1], self.hi[1], k[1], 0);
        let j1 = interval_moment(self.lo[1], self.hi[1], k[1], 1);
        self.alpha[0] * i1 * j0 + self.alpha[1] * i0 * j1 + self.beta * i0 * j0
    }

    fn indicator_transform(&self, k: [f64; 2]) -> Complex64 {
        interval_moment(self.lo[0], self.hi[0], k[0], 0) * interval_moment(self.lo[1], self.hi[1], k[1], 0)
    }

    /// Transform of `(α·x + β) δ(x_axis − c)` restricted to the rectangle's other-axis range.
    fn edge_transform(&self, axis: usize, c: f64, k: [f64; 2]) -> Complex64 {
        let o = 1 - axis;
        let offset = self.alpha[axis] * c + self.beta;
        phase(k[axis], c) * affine_interval_transform(self.lo[o], self.hi[o], self.alpha[o], offset, k[o])
    }

    /// `e^{-2πik_a lo_a} − e^{-2πik_a hi_a}`, the transform of `δ(x_a − lo_a) − δ(x_a − hi_a)`.
    fn edge_pair(&self, axis: usize, k: [f64; 2]) -> Complex64 {
        phase(k[axis], self.lo[axis]) - phase(k[axis], self.hi[axis])
    }
}

/// Sum of affine functions on pairwise disjoint rectangles inside `[-1/2, 1/2]²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear2D {
    regions: Vec<Rect>,
}

impl PiecewiseLinear2D {
    pub fn new(regions: Vec<Rect>) -> Result<Self> {
        if regions.is_empty() {
            return Err(SlrmError::InvalidModel("at least one region required".into()));
        }
        for (i, r) in regions.iter().enumerate() {
            check_finite(&[r.lo[0], r.lo[1], r.hi[0], r.hi[1]], "corner")?;
            for a in 0..2 {
                if !(r.lo[a] < r.hi[a]) {
                    return Err(SlrmError::InvalidModel(format!("region {i} is empty along axis {}", a + 1)));
                }
                if r.lo[a] < -0.5 || r.hi[a] > 0.5 {
                    return Err(SlrmError::InvalidModel(format!("region {i} leaves [-1/2, 1/2]^2")));
                }
            }
            for (j, s) in regions.iter().enumerate().skip(i + 1) {
                if r.overlaps(s) {
                    return Err(SlrmError::InvalidModel(format!("regions {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { regions })
    }

    pub fn regions(&self) -> &[Rect] {
        &self.regions
    }

    pub fn evaluate(&self, x: [f64; 2]) -> Complex64 {
        self.regions
            .iter()
            .find(|r| r.contains(x))
            .map_or(ZERO, |r| r.value(x))
    }

    /// Piecewise-constant gradient part `p(x) = Σ_j α_j 1_{Ω_j}(x)`.
    pub fn p_at(&self, x: [f64; 2]) -> [Complex64; 2] {
        self.regions
            .iter()
            .find(|r| r.contains(x))
            .map_or([ZERO; 2], |r| r.alpha)
    }

    /// Pixel `m` sampled at position `(m1/N1, m2/N2)`.
    pub fn render(&self, grid: CenteredGrid) -> SpatialImage {
        let (n1, n2) = grid.extents();
        let values = grid
            .indices()
            .map(|m| self.evaluate([m[0] as f64 / n1 as f64, m[1] as f64 / n2 as f64]))
            .collect();
        SpatialImage::new(grid, values).expect("grid-sized buffer")
    }

    /// Edge coordinates per axis, deduplicated and sorted.
    pub fn edge_coordinates(&self, axis: usize) -> Vec<f64> {
        let mut xs: Vec<f64> = self.regions.iter().flat_map(|r| [r.lo[axis], r.hi[axis]]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// True when an edge on `x_axis = ±1/2` is matched by an identical region on the
    /// opposite side, so the periodic extension has no jump there.
    fn seamless_boundary_edge(&self, r: &Rect, axis: usize) -> bool {
        let o = 1 - axis;
        r.alpha[axis] == ZERO
            && self.regions.iter().any(|s| {
                let across = if r.hi[axis] == 0.5 {
                    s.lo[axis] == -0.5
                } else {
                    s.hi[axis] == 0.5
                };
                across && s.lo[o] == r.lo[o] && s.hi[o] == r.hi[o] && s.alpha == r.alpha && s.beta == r.beta
            })
    }

    /// Errors unless every rectangle edge lies on a declared line (modulo 1).
    pub fn check_lines(&self, x_lines: &[f64], y_lines: &[f64]) -> Result<()> {
        let covered = |c: f64, lines: &[f64]| lines.iter().any(|&l| ((c - l) - (c - l).round()).abs() == 0.0);
        for (i, r) in self.regions.iter().enumerate() {
            for (axis, lines) in [(0usize, x_lines), (1, y_lines)] {
                for c in [r.lo[axis], r.hi[axis]] {
                    if covered(c, lines) {
                        continue;
                    }
                    if c.abs() == 0.5 && self.seamless_boundary_edge(r, axis) {
                        continue;
                    }
                    return Err(SlrmError::InvalidModel(format!(
                        "edge x{}={c} of region {i} not covered by a declared line",
                        axis + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn grid_values(grid: CenteredGrid, ncomp: usize, f: impl Fn([f64; 2]) -> Vec<Complex64>) -> SampleField {
    let mut comps = vec![Vec::with_capacity(grid.len()); ncomp];
    for k in grid.indices() {
        let vals = f([k[0] as f64, k[1] as f64]);
        for (c, v) in comps.iter_mut().zip(vals) {
            c.push(v);
        }
    }
    let order = ncomp.trailing_zeros() as usize;
    SampleField::from_components(order, grid, comps)
        .expect("component count is a power of two")
        .with_source(FieldSource::Analytic)
}

/// Exact `û(k)` by separable integration over each rectangle.
pub fn fourier_samples_2d(model: &PiecewiseLinear2D, grid: CenteredGrid) -> SampleField {
    grid_values(grid, 1, |k| vec![model.regions.iter().map(|r| r.transform(k)).sum()])
}

/// Exact samples `q̂ = ℱ(p)` of the piecewise-constant gradient part.
pub fn p_samples_2d(model: &PiecewiseLinear2D, grid: CenteredGrid) -> SampleField {
    grid_values(grid, 2, |k| {
        let mut out = vec![ZERO; 2];
        for r in &model.regions {
            let ind = r.indicator_transform(k);
            out[0] += r.alpha[0] * ind;
            out[1] += r.alpha[1] * ind;
        }
        out
    })
}

/// Exact `ℱ(∇u − p)` from the boundary measure: per rectangle and axis,
/// `u(lo) δ(x_a − lo_a) − u(hi) δ(x_a − hi_a)` on the edge segments.
pub fn gradient_residual_samples_2d(model: &PiecewiseLinear2D, grid: CenteredGrid) -> SampleField {
    grid_values(grid, 2, |k| {
        let mut out = vec![ZERO; 2];
        for r in &model.regions {
            for (axis, o) in out.iter_mut().enumerate() {
                *o += r.edge_transform(axis, r.lo[axis], k) - r.edge_transform(axis, r.hi[axis], k);
            }
        }
        out
    })
}

/// Exact `ℱ(∇_s p)` from the boundary measure of the piecewise-constant field.
pub fn symmetric_gradient_samples_2d(model: &PiecewiseLinear2D, grid: CenteredGrid) -> SampleField {
    grid_values(grid, 4, |k| {
        let mut out = vec![ZERO; 4];
        for r in &model.regions {
            let i0 = interval_moment(r.lo[0], r.hi[0], k[0], 0);
            let j0 = interval_moment(r.lo[1], r.hi[1], k[1], 0);
            let d1 = r.edge_pair(0, k) * j0;
            let d2 = i0 * r.edge_pair(1, k);
            let off = 0.5 * (r.alpha[0] * d2 + r.alpha[1] * d1);
            out[0] += r.alpha[0] * d1;
            out[1] += off;
            out[2] += off;
            out[3] += r.alpha[1] * d2;
        }
        out
    })
}

/// Filter `a` on a rectangular index block starting at `origin`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilatingFilter {
    origin: Index2,
    extents: (usize, usize),
    coeffs: Vec<Complex64>,
}

impl AnnihilatingFilter {
    pub fn new(origin: Index2, extents: (usize, usize), coeffs: Vec<Complex64>) -> Result<Self> {
        if extents.0 == 0 || extents.1 == 0 || coeffs.len() != extents.0 * extents.1 {
            return Err(SlrmError::ShapeMismatch(format!(
                "{} coefficients for extents {extents:?}",
                coeffs.len()
            )));
        }
        Ok(Self { origin, extents, coeffs })
    }

    pub fn origin(&self) -> Index2 {
        self.origin
    }

    pub fn extents(&self) -> (usize, usize) {
        self.extents
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(index, coefficient)` pairs.
    pub fn taps(&self) -> impl Iterator<Item = (Index2, Complex64)> + '_ {
        let (e1, e2) = self.extents;
        (0..e1).flat_map(move |r| {
            (0..e2).map(move |c| {
                (
                    [self.origin[0] + r as i64, self.origin[1] + c as i64],
                    self.coeffs[r * e2 + c],
                )
            })
        })
    }

    /// Same coefficients moved by `shift`; `e^{-2πi shift·x} φ(x)` has the same zero set.
    pub fn translated(&self, shift: Index2) -> Self {
        Self {
            origin: [self.origin[0] + shift[0], self.origin[1] + shift[1]],
            ..self.clone()
        }
    }

    /// `φ(x) = Σ_k a(k) e^{-2πi k·x}`
    pub fn evaluate(&self, x: [f64; 2]) -> Complex64 {
        self.taps()
            .map(|(k, a)| a * cis(-2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1])))
            .sum()
    }
}

/// Coefficients of `∏_j (z − e^{-2πi x_j})` in powers of `z = e^{-2πix}`, lowest first.
pub fn polynomial_from_roots(points: &[f64]) -> Vec<Complex64> {
    let mut a = vec![Complex64::new(1.0, 0.0)];
    for &x in points {
        let r = phase(1.0, x);
        let mut next = vec![ZERO; a.len() + 1];
        for (i, &c) in a.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= r * c;
        }
        a = next;
    }
    a.iter().map(|z| snap(*z)).collect()
}

/// Rounds away floating noise below `1e-15` so dyadic inputs give exact integers.
fn snap(z: Complex64) -> Complex64 {
    let f = |t: f64| if t.abs() < 1e-15 { 0.0 } else { t };
    Complex64::new(f(z.re), f(z.im))
}

/// Minimal 1D filter, length `K + 1` on indices `0..=K` (frequency axis 1).
pub fn minimal_filter_1d(breakpoints: &[f64]) -> Result<AnnihilatingFilter> {
    check_breakpoints(breakpoints)?;
    let a = polynomial_from_roots(breakpoints);
    AnnihilatingFilter::new([0, 0], (a.len(), 1), a)
}

/// Tensor-product filter vanishing on the lines `x1 = c` and `x2 = c`.
pub fn separable_filter_2d(x_lines: &[f64], y_lines: &[f64]) -> Result<AnnihilatingFilter> {
    if x_lines.is_empty() || y_lines.is_empty() {
        return Err(SlrmError::InvalidModel("line sets must be nonempty".into()));
    }
    check_finite(x_lines, "line")?;
    check_finite(y_lines, "line")?;
    let ax = polynomial_from_roots(x_lines);
    let ay = polynomial_from_roots(y_lines);
    let coeffs = ax.iter().flat_map(|a| ay.iter().map(move |b| a * b)).collect();
    AnnihilatingFilter::new([0, 0], (ax.len(), ay.len()), coeffs)
}

/// [`separable_filter_2d`] after checking that the lines cover every edge of `model`.
pub fn separable_filter_for(
    model: &PiecewiseLinear2D,
    x_lines: &[f64],
    y_lines: &[f64],
) -> Result<AnnihilatingFilter> {
    model.check_lines(x_lines, y_lines)?;
    separable_filter_2d(x_lines, y_lines)
}

/// `max_{m, j} |Σ_k field_j(m + k) a(k)|` over all `m` keeping the filter inside the grid.
pub fn verify_annihilation(field: &SampleField, filter: &AnnihilatingFilter) -> Result<f64> {
    let grid = field.grid();
    let (e1, e2) = filter.extents();
    let (n1, n2) = grid.extents();
    if e1 > n1 || e2 > n2 {
        return Err(SlrmError::ShapeMismatch(format!(
            "filter {:?} exceeds grid {:?}",
            filter.extents(),
            grid.extents()
        )));
    }
    let lo = grid.lo();
    let start = [lo[0] - filter.origin[0], lo[1] - filter.origin[1]];
    let taps: Vec<(Index2, Complex64)> = filter.taps().collect();
    let mut worst = 0.0f64;
    for comp in field.components() {
        for i in 0..=(n1 - e1) as i64 {
            for j in 0..=(n2 - e2) as i64 {
                let m = [start[0] + i, start[1] + j];
                let s: Complex64 = taps
                    .iter()
                    .map(|(k, a)| comp[grid.offset_unchecked([m[0] + k[0], m[1] + k[1]])] * a)
                    .sum();
                worst = worst.max(s.norm());
            }
        }
    }
    Ok(worst)
}
