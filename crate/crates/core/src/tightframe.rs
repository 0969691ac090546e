//! Tight-frame filter banks: SVD-derived stacks, the piecewise-linear B-spline
//! framelet, UEP checks, and analysis/synthesis as periodic convolutions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dft::Fft2;
use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField};
use crate::grid::{CenteredGrid, Index2};
use crate::hankel::support_positions;

/// Tolerance used when validating a stack before use.
pub const UEP_TOL: f64 = 1e-10;
/// Maximum deviation of `Y*Y` from the identity accepted by [`filters_from_svd`].
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
/// Default `ε` in the weight rule, relative to the largest singular value.
pub const DEFAULT_EPS_REL: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StackOrigin {
    SvdDerived,
    BuiltinFramelet,
    Custom,
}

impl StackOrigin {
    pub fn tag(&self) -> &'static str {
        match self {
            StackOrigin::SvdDerived => "svd-derived",
            StackOrigin::BuiltinFramelet => "builtin-framelet",
            StackOrigin::Custom => "custom",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "svd-derived" => Some(StackOrigin::SvdDerived),
            "builtin-framelet" => Some(StackOrigin::BuiltinFramelet),
            "custom" => Some(StackOrigin::Custom),
            _ => None,
        }
    }
}

/// Filters `a_l` on a support `K` (taps in support storage order) with weights `γ_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterStack {
    support: CenteredGrid,
    filters: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
    origin: StackOrigin,
}

impl FilterStack {
    pub fn new(
        support: CenteredGrid,
        filters: Vec<Vec<Complex64>>,
        weights: Vec<f64>,
        origin: StackOrigin,
    ) -> Result<Self> {
        if filters.is_empty() || filters.len() != weights.len() {
            return Err(SlrmError::ShapeMismatch(format!(
                "{} filters with {} weights",
                filters.len(),
                weights.len()
            )));
        }
        if let Some(f) = filters.iter().find(|f| f.len() != support.len()) {
            return Err(SlrmError::ShapeMismatch(format!(
                "filter with {} taps on support of size {}",
                f.len(),
                support.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SlrmError::InvalidParameter("filter weights must be finite and nonnegative".into()));
        }
        Ok(Self { support, filters, weights, origin })
    }

    pub fn support(&self) -> CenteredGrid {
        self.support
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn filters(&self) -> &[Vec<Complex64>] {
        &self.filters
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn origin(&self) -> StackOrigin {
        self.origin
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.filters.len() {
            return Err(SlrmError::ShapeMismatch("weight count differs from filter count".into()));
        }
        self.weights = weights;
        Self::new(self.support, self.filters, self.weights, self.origin)
    }

    /// Tap `a_l(n)`; zero outside the support.
    pub fn tap(&self, l: usize, n: Index2) -> Complex64 {
        self.support.offset(n).map_or(ZERO, |o| self.filters[l][o])
    }

    /// `max_k |Σ_l Σ_m a_l(k + m) conj(a_l(m)) − δ(k)|`
    pub fn uep_residual(&self) -> f64 {
        let (k1, k2) = self.support.extents();
        let (r1, r2) = (k1 as i64 - 1, k2 as i64 - 1);
        let pos = support_positions(self.support);
        let mut worst = 0.0f64;
        for s1 in -r1..=r1 {
            for s2 in -r2..=r2 {
                let mut acc = ZERO;
                for l in 0..self.len() {
                    for (i, m) in pos.iter().enumerate() {
                        acc += self.tap(l, [m[0] + s1, m[1] + s2]) * self.filters[l][i].conj();
                    }
                }
                if s1 == 0 && s2 == 0 {
                    acc -= Complex64::new(1.0, 0.0);
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Errors with [`SlrmError::UepViolation`] when the residual exceeds [`UEP_TOL`].
    pub fn validate(&self) -> Result<()> {
        let r = self.uep_residual();
        if r.is_finite() && r < UEP_TOL {
            Ok(())
        } else {
            Err(SlrmError::UepViolation(r))
        }
    }
}

/// Weight rule `γ_l = ν / (σ_l + ε)`; missing singular values count as zero.
pub fn weights_from_singular_values(sing_values: &[f64], count: usize, nu: f64, eps: f64) -> Vec<f64> {
    (0..count)
        .map(|l| nu / (sing_values.get(l).copied().unwrap_or(0.0) + eps))
        .collect()
}

/// `a_l = M2^{-1/2} Y(:, l)` reshaped onto `support`, weights from [`weights_from_singular_values`].
/// `eps = None` uses `1e-3 · σ_max`.
pub fn filters_from_svd(
    right_vectors: &DMatrix<Complex64>,
    sing_values: &[f64],
    support: CenteredGrid,
    nu: f64,
    eps: Option<f64>,
) -> Result<FilterStack> {
    let m2 = support.len();
    if right_vectors.shape() != (m2, m2) {
        return Err(SlrmError::ShapeMismatch(format!(
            "right vectors {:?} for support of size {m2}",
            right_vectors.shape()
        )));
    }
    let gram = right_vectors.ad_mul(right_vectors);
    let dev = (gram - DMatrix::<Complex64>::identity(m2, m2))
        .iter()
        .fold(0.0f64, |a, z| a.max(z.norm()));
    if !(dev <= ORTHONORMALITY_TOL) {
        return Err(SlrmError::InvalidParameter(format!(
            "right vectors are not orthonormal (deviation {dev:.3e})"
        )));
    }
    if !(nu >= 0.0) {
        return Err(SlrmError::InvalidParameter("nu must be nonnegative".into()));
    }
    let smax = sing_values.iter().cloned().fold(0.0f64, f64::max);
    let eps = eps.unwrap_or(DEFAULT_EPS_REL * smax);
    if !(eps > 0.0) {
        return Err(SlrmError::InvalidParameter("eps must be positive".into()));
    }
    let scale = 1.0 / (m2 as f64).sqrt();
    let filters = right_vectors
        .column_iter()
        .map(|col| col.iter().map(|z| z * scale).collect())
        .collect();
    let weights = weights_from_singular_values(sing_values, m2, nu, eps);
    FilterStack::new(support, filters, weights, StackOrigin::SvdDerived)
}

/// Undecimated tensor-product piecewise-linear B-spline framelet on a 3×3 support.
/// The lowpass⊗lowpass filter comes first with weight 0; all others have weight 1.
pub fn builtin_framelet_stack() -> FilterStack {
    let r = std::f64::consts::SQRT_2 / 4.0;
    let masks = [[0.25, 0.5, 0.25], [r, 0.0, -r], [-0.25, 0.5, -0.25]];
    let mut filters = Vec::with_capacity(9);
    let mut weights = Vec::with_capacity(9);
    for (i, a) in masks.iter().enumerate() {
        for (j, b) in masks.iter().enumerate() {
            filters.push(
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| Complex64::new(x * y, 0.0)))
                    .collect(),
            );
            weights.push(if i == 0 && j == 0 { 0.0 } else { 1.0 });
        }
    }
    FilterStack::new(CenteredGrid::square(3).expect("3x3"), filters, weights, StackOrigin::BuiltinFramelet)
        .expect("consistent builtin stack")
}

/// Filters `δ(· − m)` for every `m` in the support, scaled by `M2^{-1/2}`.
pub fn delta_stack(support: CenteredGrid) -> FilterStack {
    let m2 = support.len();
    let s = Complex64::new(1.0 / (m2 as f64).sqrt(), 0.0);
    let filters = (0..m2)
        .map(|l| {
            let mut f = vec![ZERO; m2];
            f[l] = s;
            f
        })
        .collect();
    FilterStack::new(support, filters, vec![1.0; m2], StackOrigin::Custom).expect("consistent delta stack")
}

/// A stack prepared for periodic analysis and synthesis on a fixed grid.
#[derive(Clone, Debug)]
pub struct FrameOperator {
    stack: FilterStack,
    grid: CenteredGrid,
    fft: Fft2,
    /// FFT of `a_l` placed at raw storage index `-n mod N`.
    kernels: Vec<Vec<Complex64>>,
}

impl FrameOperator {
    pub fn new(stack: FilterStack, grid: CenteredGrid) -> Result<Self> {
        let (k1, k2) = stack.support().extents();
        if k1 > grid.n1() || k2 > grid.n2() {
            return Err(SlrmError::ShapeMismatch(format!(
                "support {k1}x{k2} exceeds grid {:?}",
                grid.extents()
            )));
        }
        let fft = Fft2::for_grid(grid);
        let (n1, n2) = grid.extents();
        let pos = support_positions(stack.support());
        let kernels = stack
            .filters()
            .iter()
            .map(|f| {
                let mut buf = vec![ZERO; grid.len()];
                for (i, n) in pos.iter().enumerate() {
                    let r = (-n[0]).rem_euclid(n1 as i64) as usize;
                    let c = (-n[1]).rem_euclid(n2 as i64) as usize;
                    buf[r * n2 + c] = f[i];
                }
                fft.forward(&mut buf);
                buf
            })
            .collect();
        Ok(Self { stack, grid, fft, kernels })
    }

    pub fn stack(&self) -> &FilterStack {
        &self.stack
    }

    pub fn grid(&self) -> CenteredGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    /// `(Wx)_l(k) = Σ_n a_l(n) x(k + n)` on one component, periodic.
    pub fn analysis_slice(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut xh = x.to_vec();
        self.fft.forward(&mut xh);
        let s = 1.0 / self.grid.len() as f64;
        self.kernels
            .iter()
            .map(|k| {
                let mut y: Vec<Complex64> = xh.iter().zip(k).map(|(a, b)| a * b * s).collect();
                self.fft.inverse(&mut y);
                y
            })
            .collect()
    }

    /// `Σ_l Σ_n conj(a_l(n)) c_l(k − n)` on one component, periodic.
    pub fn synthesis_slice(&self, coeffs: &[&[Complex64]]) -> Vec<Complex64> {
        let mut acc = vec![ZERO; self.grid.len()];
        let mut buf = vec![ZERO; self.grid.len()];
        for (c, k) in coeffs.iter().zip(&self.kernels) {
            buf.copy_from_slice(c);
            self.fft.forward(&mut buf);
            for ((a, b), kv) in acc.iter_mut().zip(&buf).zip(k) {
                *a += b * kv.conj();
            }
        }
        self.fft.inverse(&mut acc);
        let s = 1.0 / self.grid.len() as f64;
        acc.iter_mut().for_each(|v| *v *= s);
        acc
    }

    /// One coefficient field per filter, each of the input's order.
    pub fn analysis(&self, field: &SampleField) -> Result<Vec<SampleField>> {
        self.check_grid(field.grid())?;
        let per_comp: Vec<Vec<Vec<Complex64>>> =
            field.components().iter().map(|c| self.analysis_slice(c)).collect();
        let mut out = Vec::with_capacity(self.len());
        for l in 0..self.len() {
            let comps = per_comp.iter().map(|bands| bands[l].clone()).collect();
            out.push(SampleField::from_components(field.order(), self.grid, comps)?.with_source(FieldSource::Derived));
        }
        Ok(out)
    }

    pub fn synthesis(&self, coeffs: &[SampleField]) -> Result<SampleField> {
        if coeffs.len() != self.len() {
            return Err(SlrmError::ShapeMismatch(format!(
                "{} coefficient fields for {} filters",
                coeffs.len(),
                self.len()
            )));
        }
        let order = coeffs[0].order();
        for c in coeffs {
            self.check_grid(c.grid())?;
            c.require_order(order)?;
        }
        let comps = (0..1usize << order)
            .map(|j| {
                let slices: Vec<&[Complex64]> = coeffs.iter().map(|c| c.component(j)).collect();
                self.synthesis_slice(&slices)
            })
            .collect();
        Ok(SampleField::from_components(order, self.grid, comps)?.with_source(FieldSource::Derived))
    }

    fn check_grid(&self, g: CenteredGrid) -> Result<()> {
        if g != self.grid {
            return Err(SlrmError::ShapeMismatch(format!(
                "field grid {:?} differs from operator grid {:?}",
                g.extents(),
                self.grid.extents()
            )));
        }
        Ok(())
    }
}

/// Analysis with a freshly prepared operator.
pub fn analysis(stack: &FilterStack, field: &SampleField) -> Result<Vec<SampleField>> {
    FrameOperator::new(stack.clone(), field.grid())?.analysis(field)
}

/// Synthesis with a freshly prepared operator.
pub fn synthesis(stack: &FilterStack, coeffs: &[SampleField]) -> Result<SampleField> {
    let first = coeffs
        .first()
        .ok_or_else(|| SlrmError::ShapeMismatch("no coefficient fields".into()))?;
    FrameOperator::new(stack.clone(), first.grid())?.synthesis(coeffs)
}
