//! Per-frequency Hermitian block systems and scalar shrinkage.

use num_complex::Complex64;

/// Diagonal floor added to every per-frequency block.
pub const TIKHONOV_FLOOR: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub type Block3 = [[Complex64; 3]; 3];

/// Soft threshold `max(|z| − t, 0) z/|z|` with `0/0 = 0`.
#[inline]
pub fn soft_threshold(z: Complex64, t: f64) -> Complex64 {
    let m = z.norm();
    if m <= t || m == 0.0 {
        ZERO
    } else {
        z * ((m - t) / m)
    }
}

/// Gram block `S*S` of the symmetric-gradient multiplier rows
/// `(d1, 0), (d2/2, d1/2), (d2/2, d1/2), (0, d2)`.
#[inline]
pub fn sym_grad_gram(d: [Complex64; 2]) -> [[Complex64; 2]; 2] {
    let (a, b) = (d[0].norm_sqr(), d[1].norm_sqr());
    let off = 0.5 * d[1].conj() * d[0];
    [
        [Complex64::new(a + 0.5 * b, 0.0), off],
        [off.conj(), Complex64::new(0.5 * a + b, 0.0)],
    ]
}

/// `[[a + b1|d|², −b1 d*], [−b1 d, b1 I + b2 G]]` plus `floor` on the diagonal.
#[inline]
pub fn assemble_block(a: f64, b1: f64, b2: f64, d: [Complex64; 2], g: [[Complex64; 2]; 2], floor: f64) -> Block3 {
    let dd = d[0].norm_sqr() + d[1].norm_sqr();
    let c = |x: f64| Complex64::new(x, 0.0);
    [
        [c(a + b1 * dd + floor), -b1 * d[0].conj(), -b1 * d[1].conj()],
        [-b1 * d[0], c(b1 + floor) + b2 * g[0][0], b2 * g[0][1]],
        [-b1 * d[1], b2 * g[1][0], c(b1 + floor) + b2 * g[1][1]],
    ]
}

#[inline]
fn det3(m: &Block3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer's rule for a 3×3 system.
#[inline]
pub fn cramer3(m: &Block3, rhs: [Complex64; 3]) -> [Complex64; 3] {
    let det = det3(m);
    let mut out = [ZERO; 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut mj = *m;
        for (row, r) in mj.iter_mut().zip(rhs) {
            row[j] = r;
        }
        *o = det3(&mj) / det;
    }
    out
}

/// Cramer's rule for a 2×2 system.
#[inline]
pub fn cramer2(m: [[Complex64; 2]; 2], rhs: [Complex64; 2]) -> [Complex64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ]
}
