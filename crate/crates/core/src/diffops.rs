//! Frequency-domain derivative operators acting pointwise on centered indices.
//!
//! `D v = (2πi k1 v, 2πi k2 v)`, `E q` is the symmetric gradient of `q`, and `D2 = E ∘ D`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{FieldSource, SampleField};
use crate::grid::Index2;

/// Operator selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOpTag {
    D,
    E,
    D2,
}

impl DiffOpTag {
    pub fn input_order(self) -> usize {
        match self {
            DiffOpTag::D | DiffOpTag::D2 => 0,
            DiffOpTag::E => 1,
        }
    }

    pub fn output_order(self) -> usize {
        match self {
            DiffOpTag::D => 1,
            DiffOpTag::E | DiffOpTag::D2 => 2,
        }
    }
}

/// `(2πi k1, 2πi k2)`
#[inline]
pub fn d_weights(k: Index2) -> [Complex64; 2] {
    [
        Complex64::new(0.0, 2.0 * PI * k[0] as f64),
        Complex64::new(0.0, 2.0 * PI * k[1] as f64),
    ]
}

/// Per-frequency block of `E*E`, a real symmetric 2×2 matrix.
#[inline]
pub fn e_gram(k: Index2) -> [[f64; 2]; 2] {
    let (k1, k2) = (k[0] as f64, k[1] as f64);
    let p2 = PI * PI;
    [
        [4.0 * p2 * k1 * k1 + 2.0 * p2 * k2 * k2, 2.0 * p2 * k1 * k2],
        [2.0 * p2 * k1 * k2, 4.0 * p2 * k2 * k2 + 2.0 * p2 * k1 * k1],
    ]
}

fn map_pointwise<F>(input: &SampleField, out_order: usize, f: F) -> SampleField
where
    F: Fn(Index2, &[Complex64]) -> Vec<Complex64>,
{
    let grid = input.grid();
    let n_in = input.num_components();
    let n_out = 1usize << out_order;
    let mut comps = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; n_out];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_in];
    for (o, k) in grid.indices().enumerate() {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = input.component(j)[o];
        }
        for (j, v) in f(k, &buf).into_iter().enumerate() {
            comps[j][o] = v;
        }
    }
    SampleField::from_components(out_order, grid, comps)
        .expect("pointwise map preserves grid")
        .with_source(FieldSource::Derived)
}

pub fn apply_d(v: &SampleField) -> Result<SampleField> {
    v.require_order(0)?;
    Ok(map_pointwise(v, 1, |k, x| {
        let w = d_weights(k);
        vec![w[0] * x[0], w[1] * x[0]]
    }))
}

pub fn apply_e(q: &SampleField) -> Result<SampleField> {
    q.require_order(1)?;
    Ok(map_pointwise(q, 2, |k, x| {
        let w = d_weights(k);
        let off = 0.5 * (w[1] * x[0] + w[0] * x[1]);
        vec![w[0] * x[0], off, off, w[1] * x[1]]
    }))
}

pub fn apply_d2(v: &SampleField) -> Result<SampleField> {
    v.require_order(0)?;
    Ok(map_pointwise(v, 2, |k, x| {
        let w = d_weights(k);
        let g = [w[0] * x[0], w[1] * x[0]];
        let off = 0.5 * (w[1] * g[0] + w[0] * g[1]);
        vec![w[0] * g[0], off, off, w[1] * g[1]]
    }))
}

pub fn adjoint_d(y: &SampleField) -> Result<SampleField> {
    y.require_order(1)?;
    Ok(map_pointwise(y, 0, |k, x| {
        let w = d_weights(k);
        vec![w[0].conj() * x[0] + w[1].conj() * x[1]]
    }))
}

pub fn adjoint_e(y: &SampleField) -> Result<SampleField> {
    y.require_order(2)?;
    Ok(map_pointwise(y, 1, |k, x| {
        let w = d_weights(k);
        let s = x[1] + x[2];
        vec![
            w[0].conj() * x[0] + 0.5 * w[1].conj() * s,
            0.5 * w[0].conj() * s + w[1].conj() * x[3],
        ]
    }))
}

pub fn adjoint_d2(y: &SampleField) -> Result<SampleField> {
    y.require_order(2)?;
    Ok(map_pointwise(y, 0, |k, x| {
        let w = d_weights(k);
        let m = [w[0] * w[0], w[0] * w[1], w[0] * w[1], w[1] * w[1]];
        vec![m.iter().zip(x).map(|(a, b)| a.conj() * b).sum()]
    }))
}

/// Applies the selected operator.
pub fn apply(op: DiffOpTag, field: &SampleField) -> Result<SampleField> {
    match op {
        DiffOpTag::D => apply_d(field),
        DiffOpTag::E => apply_e(field),
        DiffOpTag::D2 => apply_d2(field),
    }
}

/// Applies the adjoint of the selected operator.
pub fn adjoint_of(op: DiffOpTag, field: &SampleField) -> Result<SampleField> {
    match op {
        DiffOpTag::D => adjoint_d(field),
        DiffOpTag::E => adjoint_e(field),
        DiffOpTag::D2 => adjoint_d2(field),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CenteredGrid;

    fn delta(order: usize, comp: usize, k: Index2, g: CenteredGrid) -> SampleField {
        let mut f = SampleField::zeros(order, g);
        f.set(comp, k, Complex64::new(1.0, 0.0));
        f
    }

    #[test]
    fn formulas_on_deltas() {
        let g = CenteredGrid::square(8).unwrap();
        let dv = apply_d(&delta(0, 0, [1, 2], g)).unwrap();
        assert!((dv.get(0, [1, 2]) - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-15);
        assert!((dv.get(1, [1, 2]) - Complex64::new(0.0, 4.0 * PI)).norm() < 1e-15);

        let eq = apply_e(&delta(1, 0, [1, 1], g)).unwrap();
        let expect = [2.0 * PI, PI, PI, 0.0];
        for (j, e) in expect.iter().enumerate() {
            assert!((eq.get(j, [1, 1]) - Complex64::new(0.0, *e)).norm() < 1e-15);
        }

        let d2 = apply_d2(&delta(0, 0, [1, 0], g)).unwrap();
        assert!((d2.get(0, [1, 0]) + Complex64::new(4.0 * PI * PI, 0.0)).norm() < 1e-12);
        assert_eq!(d2.get(1, [1, 0]), Complex64::new(0.0, 0.0));

        let ad = adjoint_d(&delta(1, 0, [1, 2], g)).unwrap();
        assert!((ad.get(0, [1, 2]) - Complex64::new(0.0, -2.0 * PI)).norm() < 1e-15);
    }

    #[test]
    fn zero_frequency_vanishes() {
        let g = CenteredGrid::square(5).unwrap();
        let dv = apply_d(&delta(0, 0, [0, 0], g)).unwrap();
        assert_eq!(dv.max_abs(), 0.0);
    }

    #[test]
    fn wrong_orders_rejected() {
        let g = CenteredGrid::square(4).unwrap();
        assert!(apply_d(&SampleField::zeros(1, g)).is_err());
        assert!(apply_e(&SampleField::zeros(0, g)).is_err());
        assert!(adjoint_e(&SampleField::zeros(1, g)).is_err());
        assert_eq!(DiffOpTag::D2.output_order(), 2);
    }
}
