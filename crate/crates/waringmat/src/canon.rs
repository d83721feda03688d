//! Generalized Jordan normal form.
//!
//! Blocks are sorted by `f` in [`Poly`] order and then by multiplicity
//! descending, so the block list is a conjugacy-class key.

use serde_json::{json, Value};
use thiserror::Error;

use crate::gf::{Elem, FieldRef};
use crate::matgf::{Mat, Span};
use crate::poly::{self, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonError {
    #[error("{0} is not a monic irreducible polynomial")]
    NotIrreducible(String),
}

/// Generalized Jordan block of the monic irreducible `f`, multiplicity `m`.
pub fn gj_block(field: &FieldRef, f: &Poly, m: usize) -> Result<Mat, CanonError> {
    if !f.is_monic() || !poly::is_irreducible(field, f) {
        return Err(CanonError::NotIrreducible(f.display(field)));
    }
    Ok(gj_block_unchecked(field, f, m))
}

pub(crate) fn gj_block_unchecked(field: &FieldRef, f: &Poly, m: usize) -> Mat {
    let r = f.degree();
    let mut out = Mat::zero(field, r * m);
    for b in 0..m {
        let o = b * r;
        for i in 1..r {
            out.set(o + i, o + i - 1, 1);
        }
        for i in 0..r {
            out.set(o + i, o + r - 1, field.neg(f.coeff(i)));
        }
        if b + 1 < m {
            for i in 0..r {
                out.set(o + i, o + r + i, 1);
            }
        }
    }
    out
}

/// Companion matrix of a monic polynomial (same layout as a single block).
pub fn companion(field: &FieldRef, f: &Poly) -> Mat {
    gj_block_unchecked(field, f, 1)
}

/// Block list `(f, m)` of the generalized Jordan form.
pub fn structure(a: &Mat) -> Vec<(Poly, u32)> {
    let field = a.field();
    let n = a.n();
    let chi = a.char_poly();
    let mut out = Vec::new();
    for (f, mult) in poly::factor(field, &chi).factors {
        let r = f.degree();
        let target = r * mult as usize;
        if r * mult as usize == r {
            out.push((f, 1));
            continue;
        }
        let nf = a.eval_poly(&f);
        let mut dims = vec![0usize];
        let mut pw = nf.clone();
        loop {
            let d = n - pw.rank();
            dims.push(d);
            if d == target {
                break;
            }
            pw = pw.mul(&nf);
        }
        let at_least: Vec<usize> = (1..dims.len()).map(|j| (dims[j] - dims[j - 1]) / r).collect();
        for j in (1..=at_least.len()).rev() {
            let exact = at_least[j - 1] - at_least.get(j).copied().unwrap_or(0);
            for _ in 0..exact {
                out.push((f.clone(), j as u32));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct GjForm {
    pub blocks: Vec<(Poly, u32)>,
    /// `g` with `g A g^{-1}` block diagonal.
    pub transform: Mat,
    pub source: Mat,
}

impl GjForm {
    pub fn block_matrix(&self) -> Mat {
        let field = self.source.field();
        let blocks: Vec<Mat> =
            self.blocks.iter().map(|(f, m)| gj_block_unchecked(field, f, *m as usize)).collect();
        Mat::block_diag(field, &blocks)
    }

    /// Sizes `deg(f) * m` in block order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|(f, m)| f.degree() * *m as usize).collect()
    }

    pub fn to_json(&self) -> Value {
        let field = self.source.field();
        let blocks: Vec<Value> =
            self.blocks.iter().map(|(f, m)| json!({ "f": f.display(field), "m": m })).collect();
        json!({ "blocks": blocks, "transform": self.transform.to_json() })
    }
}

fn krylov_columns(a: &Mat, v: &[Elem], len: usize) -> Vec<Vec<Elem>> {
    let mut cols = Vec::with_capacity(len);
    let mut cur = v.to_vec();
    for _ in 0..len {
        let next = a.mul_vec(&cur);
        cols.push(cur);
        cur = next;
    }
    cols
}

pub fn gj_form(a: &Mat) -> GjForm {
    let field = a.field().clone();
    let f = &*field;
    let n = a.n();
    let chi = a.char_poly();
    let mut blocks = Vec::new();
    let mut basis_cols: Vec<Vec<Elem>> = Vec::with_capacity(n);
    for (fac, mult) in poly::factor(f, &chi).factors {
        let r = fac.degree();
        let target = r * mult as usize;
        let nf = a.eval_poly(&fac);
        let mut kernels: Vec<Vec<Vec<Elem>>> = vec![Vec::new()];
        let mut pw = nf.clone();
        loop {
            let k = pw.kernel();
            let done = k.len() == target;
            kernels.push(k);
            if done {
                break;
            }
            pw = pw.mul(&nf);
        }
        let top = kernels.len() - 1;
        let mut chosen: Vec<(usize, Vec<Elem>)> = Vec::new();
        for j in (1..=top).rev() {
            let mut span = Span::new(&field);
            for v in &kernels[j - 1] {
                span.insert(v);
            }
            if j < top {
                for v in &kernels[j + 1] {
                    span.insert(&nf.mul_vec(v));
                }
            }
            for (m, w) in &chosen {
                for v in krylov_columns(a, w, r * m) {
                    span.insert(&v);
                }
            }
            for v in &kernels[j] {
                if !span.contains(v) {
                    for u in krylov_columns(a, v, r * j) {
                        span.insert(&u);
                    }
                    chosen.push((j, v.clone()));
                }
            }
        }
        for (m, w) in chosen {
            let size = r * m;
            let jb = gj_block_unchecked(&field, &fac, m);
            let mut c = vec![0; size];
            c[(m - 1) * r] = 1;
            let kinv = Mat::from_columns(&field, &krylov_columns(&jb, &c, size))
                .inverse()
                .expect("last block vector generates the block");
            let powers = krylov_columns(a, &w, size);
            for i in 0..size {
                let mut b = vec![0; n];
                for (t, pt) in powers.iter().enumerate() {
                    let coef = kinv.get(t, i);
                    if coef != 0 {
                        for (x, &y) in b.iter_mut().zip(pt) {
                            *x = f.add(*x, f.mul(coef, y));
                        }
                    }
                }
                basis_cols.push(b);
            }
            blocks.push((fac.clone(), m as u32));
        }
    }
    let bmat = Mat::from_columns(&field, &basis_cols);
    let transform = bmat.inverse().expect("block bases form a basis");
    let form = GjForm { blocks, transform, source: a.clone() };
    debug_assert_eq!(form.transform.mul(a), form.block_matrix().mul(&form.transform));
    form
}

pub fn is_quasi_eligible(a: &Mat) -> bool {
    !a.is_scalar()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;
    use crate::matgf::enumerate_matrices;

    #[test]
    fn block_examples() {
        let f2 = build_field(2, 1).unwrap();
        assert_eq!(gj_block(&f2, &Poly::x(), 1).unwrap(), Mat::zero(&f2, 1));
        let b = gj_block(&f2, &Poly::new(vec![1, 1, 1]), 1).unwrap();
        assert_eq!(b.rows(), vec![vec![0, 1], vec![1, 1]]);
        let f3 = build_field(3, 1).unwrap();
        let j = gj_block(&f3, &Poly::new(vec![2, 1]), 2).unwrap();
        assert_eq!(j.rows(), vec![vec![1, 1], vec![0, 1]]);
        assert!(gj_block(&f2, &Poly::new(vec![1, 0, 1]), 1).is_err());
    }

    #[test]
    fn identity_form() {
        let f = build_field(5, 1).unwrap();
        let g = gj_form(&Mat::identity(&f, 3));
        assert_eq!(g.blocks, vec![(Poly::new(vec![4, 1]), 1); 3]);
    }

    #[test]
    fn exhaustive_round_trip_small() {
        for (p, l, n) in [(2, 1, 2), (2, 1, 3), (3, 1, 2), (2, 2, 2)] {
            let f = build_field(p, l).unwrap();
            for a in enumerate_matrices(&f, n, 1 << 24).unwrap() {
                let g = gj_form(&a);
                assert_eq!(g.transform.mul(&a), g.block_matrix().mul(&g.transform));
                assert_eq!(g.blocks, structure(&a));
                let total: usize = g.block_sizes().iter().sum();
                assert_eq!(total, n);
            }
        }
    }
}
