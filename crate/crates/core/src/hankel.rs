//! Multi-fold Hankel lifting of sample fields, its adjoint, SVD and numerical rank.
//!
//! Rows of one fold are indexed by `k ∈ O:K` in [`GridDifference`] member order and
//! columns by `m ∈ K` in support storage order; folds are stacked in component order.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::dft::Fft2;
use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField};
use crate::grid::{CenteredGrid, GridDifference, Index2};

/// Default relative tolerance for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Support positions in column order. Filters and Hankel columns share this layout.
pub fn support_positions(support: CenteredGrid) -> Vec<Index2> {
    support.indices().collect()
}

/// Dense multi-fold Hankel matrix together with the shape it was built from.
#[derive(Clone, Debug)]
pub struct HankelLift {
    matrix: DMatrix<Complex64>,
    order: usize,
    grid: CenteredGrid,
    support: CenteredGrid,
}

impl HankelLift {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> CenteredGrid {
        self.grid
    }

    pub fn support(&self) -> CenteredGrid {
        self.support
    }

    /// `(M1, M2)`: rows per fold and columns.
    pub fn block_dims(&self) -> (usize, usize) {
        (self.matrix.nrows() >> self.order, self.matrix.ncols())
    }
}

/// `(Hv)(k, m) = v(k + m)` per component, folds stacked vertically.
pub fn lift(field: &SampleField, support: CenteredGrid) -> Result<HankelLift> {
    let grid = field.grid();
    let diff = GridDifference::new(grid, support)?;
    let cols = support_positions(support);
    let m1 = diff.len();
    let folds = field.num_components();
    let mut matrix = DMatrix::from_element(folds * m1, cols.len(), ZERO);
    for (j, comp) in field.components().iter().enumerate() {
        for (r, k) in diff.members().enumerate() {
            let row = j * m1 + r;
            for (c, m) in cols.iter().enumerate() {
                matrix[(row, c)] = comp[grid.offset_unchecked([k[0] + m[0], k[1] + m[1]])];
            }
        }
    }
    Ok(HankelLift { matrix, order: field.order(), grid, support })
}

/// Adjoint of [`lift`]: every entry `Y(k, m)` is added back to index `k + m`.
pub fn lift_adjoint(
    matrix: &DMatrix<Complex64>,
    order: usize,
    grid: CenteredGrid,
    support: CenteredGrid,
) -> Result<SampleField> {
    let diff = GridDifference::new(grid, support)?;
    let cols = support_positions(support);
    let m1 = diff.len();
    let folds = 1usize << order;
    if matrix.nrows() != folds * m1 || matrix.ncols() != cols.len() {
        return Err(SlrmError::ShapeMismatch(format!(
            "matrix {}x{} does not match lift shape {}x{}",
            matrix.nrows(),
            matrix.ncols(),
            folds * m1,
            cols.len()
        )));
    }
    let mut out = SampleField::zeros(order, grid);
    for j in 0..folds {
        let comp = out.component_mut(j);
        for (r, k) in diff.members().enumerate() {
            let row = j * m1 + r;
            for (c, m) in cols.iter().enumerate() {
                comp[grid.offset_unchecked([k[0] + m[0], k[1] + m[1]])] += matrix[(row, c)];
            }
        }
    }
    Ok(out.with_source(FieldSource::Derived))
}

/// Singular triplets with values sorted nonincreasing.
#[derive(Clone, Debug)]
pub struct HankelSvd {
    /// `rows × min(rows, cols)` left vectors.
    pub left: DMatrix<Complex64>,
    pub values: Vec<f64>,
    /// `cols × cols` unitary matrix whose columns are the right vectors.
    pub right: DMatrix<Complex64>,
}

impl HankelSvd {
    /// `X Σ Y*` restricted to the available left vectors.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let r = self.left.ncols();
        let mut scaled = self.left.clone();
        for (l, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(self.values[l], 0.0);
        }
        scaled * self.right.columns(0, r).adjoint()
    }
}

/// SVD of a lift matrix. Tall matrices are first reduced by QR so that the
/// dense decomposition runs on a `cols × cols` triangle.
pub fn svd(matrix: &DMatrix<Complex64>) -> Result<HankelSvd> {
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SlrmError::NonFinite("lift matrix".into()));
    }
    let (rows, cols) = matrix.shape();
    if rows >= cols {
        let qr = matrix.clone().qr();
        let r = qr.r();
        let dec = sorted_svd(r)?;
        let left = qr.q() * dec.left;
        Ok(HankelSvd { left, values: dec.values, right: dec.right })
    } else {
        // pad with zero rows so every right vector is produced
        let mut padded = DMatrix::from_element(cols, cols, ZERO);
        padded.rows_mut(0, rows).copy_from(matrix);
        let dec = sorted_svd(padded)?;
        Ok(HankelSvd {
            left: dec.left.rows(0, rows).columns(0, rows).into_owned(),
            values: dec.values[..cols].to_vec(),
            right: dec.right,
        })
    }
}

/// Convenience wrapper: SVD of a lift.
pub fn svd_of(lift: &HankelLift) -> Result<HankelSvd> {
    svd(lift.matrix())
}

fn sorted_svd(square: DMatrix<Complex64>) -> Result<HankelSvd> {
    let n = square.ncols();
    let dec = SVD::try_new(square, true, true, f64::EPSILON, 10_000)
        .ok_or(SlrmError::NotConverged { what: "svd".into(), cap: 10_000 })?;
    let u = dec.u.expect("requested");
    let vt = dec.v_t.expect("requested");
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let mut left = DMatrix::from_element(u.nrows(), order.len(), ZERO);
    let mut right = DMatrix::from_element(n, n, ZERO);
    let mut values = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        left.set_column(dst, &u.column(src));
        right.set_column(dst, &vt.row(src).adjoint());
        values.push(dec.singular_values[src]);
    }
    Ok(HankelSvd { left, values, right })
}

/// Number of values above `tol_rel · σ_1`; zero for an all-zero spectrum.
pub fn numerical_rank(values: &[f64], tol_rel: f64) -> usize {
    let top = values.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > tol_rel * top).count()
}

/// Eigen-decomposition `H*H = V diag(λ) V*` of the `M2 × M2` Gram matrix, eigenvalues descending.
pub fn gram_eigen(matrix: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let gram = matrix.ad_mul(matrix);
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let n = order.len();
    let mut vecs = DMatrix::from_element(n, n, ZERO);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
        vals.push(eig.eigenvalues[src].max(0.0));
    }
    (vals, vecs)
}

/// Applies `z ↦ H*(H(z) V diag(w) V*)` and `z ↦ ‖H(z) V diag(w)^{1/2}‖_F²` through
/// FFT correlations, without forming the lift.
#[derive(Clone, Debug)]
pub struct WeightedGram {
    grid: CenteredGrid,
    fft: Fft2,
    weights: Vec<f64>,
    /// FFT of each vector placed at storage index `-m mod N` (correlation kernel).
    corr: Vec<Vec<Complex64>>,
    /// FFT of each conjugated vector placed at storage index `m mod N`.
    conv: Vec<Vec<Complex64>>,
    interior: Vec<bool>,
}

fn raw_index(grid: CenteredGrid, k: Index2) -> usize {
    let (n1, n2) = grid.extents();
    let r = k[0].rem_euclid(n1 as i64) as usize;
    let c = k[1].rem_euclid(n2 as i64) as usize;
    r * n2 + c
}

impl WeightedGram {
    /// `vectors` has one column per direction (length `|K|`), paired with `weights`.
    pub fn new(grid: CenteredGrid, support: CenteredGrid, vectors: &DMatrix<Complex64>, weights: &[f64]) -> Result<Self> {
        let diff = GridDifference::new(grid, support)?;
        let pos = support_positions(support);
        if vectors.nrows() != pos.len() || vectors.ncols() != weights.len() {
            return Err(SlrmError::ShapeMismatch(format!(
                "{}x{} vectors with {} weights for support of size {}",
                vectors.nrows(),
                vectors.ncols(),
                weights.len(),
                pos.len()
            )));
        }
        let fft = Fft2::for_grid(grid);
        let mut corr = Vec::with_capacity(weights.len());
        let mut conv = Vec::with_capacity(weights.len());
        for col in vectors.column_iter() {
            let mut a = vec![ZERO; grid.len()];
            let mut b = vec![ZERO; grid.len()];
            for (i, m) in pos.iter().enumerate() {
                a[raw_index(grid, [-m[0], -m[1]])] = col[i];
                b[raw_index(grid, *m)] = col[i].conj();
            }
            fft.forward(&mut a);
            fft.forward(&mut b);
            corr.push(a);
            conv.push(b);
        }
        let mut interior = vec![false; grid.len()];
        for k in diff.members() {
            interior[grid.offset_unchecked(k)] = true;
        }
        Ok(Self { grid, fft, weights: weights.to_vec(), corr, conv, interior })
    }

    fn correlations<'a>(&'a self, comp: &[Complex64]) -> impl Iterator<Item = (usize, Vec<Complex64>)> + 'a {
        let mut zhat = comp.to_vec();
        self.fft.forward(&mut zhat);
        let scale = 1.0 / self.grid.len() as f64;
        (0..self.weights.len()).map(move |l| {
            let mut g: Vec<Complex64> = zhat.iter().zip(&self.corr[l]).map(|(a, b)| a * b).collect();
            self.fft.inverse(&mut g);
            for (v, &keep) in g.iter_mut().zip(&self.interior) {
                *v = if keep { *v * scale } else { ZERO };
            }
            (l, g)
        })
    }

    /// `H*(H(z) V diag(w) V*)` per component.
    pub fn apply(&self, field: &SampleField) -> Result<SampleField> {
        if field.grid() != self.grid {
            return Err(SlrmError::ShapeMismatch("field grid differs from operator grid".into()));
        }
        let scale = 1.0 / self.grid.len() as f64;
        let comps = field
            .components()
            .iter()
            .map(|comp| {
                let mut acc = vec![ZERO; self.grid.len()];
                for (l, mut g) in self.correlations(comp) {
                    let w = self.weights[l];
                    if w == 0.0 {
                        continue;
                    }
                    self.fft.forward(&mut g);
                    for ((a, gv), kv) in acc.iter_mut().zip(&g).zip(&self.conv[l]) {
                        *a += gv * kv * w;
                    }
                }
                self.fft.inverse(&mut acc);
                acc.iter_mut().for_each(|v| *v *= scale);
                acc
            })
            .collect();
        Ok(SampleField::from_components(field.order(), self.grid, comps)?.with_source(FieldSource::Derived))
    }

    /// `Σ_l w_l ‖H(z) v_l‖²`
    pub fn energy(&self, field: &SampleField) -> f64 {
        field
            .components()
            .iter()
            .map(|comp| {
                self.correlations(comp)
                    .map(|(l, g)| self.weights[l] * g.iter().map(|v| v.norm_sqr()).sum::<f64>())
                    .sum::<f64>()
            })
            .sum()
    }
}
