//! k-th roots of triangular, invertible and split-semisimple matrices.

use std::collections::HashMap;

use thiserror::Error;

use crate::canon;
use crate::gf::{self, Elem, Field};
use crate::matgf::{Mat, MatError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("characteristic {p} divides k = {k}")]
    CharDividesK { p: u32, k: u128 },
    #[error("diagonal entry {index} is not a k-th power")]
    DiagonalNotPower { index: usize },
    #[error("more than one zero on the diagonal")]
    TwoZeroDiagonal,
    #[error("matrix is not triangular")]
    NotTriangular,
    #[error("k = {k} is not coprime to the order {order}")]
    OrderNotCoprime { k: u128, order: u128 },
    #[error("matrix is not split semisimple")]
    NotSplitSemisimple,
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Smallest root per distinct value, so equal powers get equal roots.
fn diagonal_roots(field: &Field, diag: &[Elem], k: u128) -> Result<Vec<Elem>, LiftError> {
    let mut cache: HashMap<Elem, Elem> = HashMap::new();
    diag.iter()
        .enumerate()
        .map(|(i, &a)| {
            if let Some(&r) = cache.get(&a) {
                return Ok(r);
            }
            let r = field.smallest_kth_root(a, k).ok_or(LiftError::DiagonalNotPower { index: i })?;
            cache.insert(a, r);
            Ok(r)
        })
        .collect()
}

/// `X` triangular (same orientation as `T`) with `X^k = T`.
pub fn triangular_kth_root(t: &Mat, k: u128) -> Result<Mat, LiftError> {
    let field = t.field().clone();
    let f = &*field;
    if k.is_multiple_of(f.p() as u128) {
        return Err(LiftError::CharDividesK { p: f.p(), k });
    }
    if t.is_upper_triangular() {
        upper_root(t, k)
    } else if t.is_lower_triangular() {
        Ok(upper_root(&t.transpose(), k)?.transpose())
    } else {
        Err(LiftError::NotTriangular)
    }
}

fn upper_root(t: &Mat, k: u128) -> Result<Mat, LiftError> {
    let field = t.field().clone();
    let f = &*field;
    let n = t.n();
    let diag = t.diagonal();
    if diag.iter().filter(|&&a| a == 0).count() > 1 {
        return Err(LiftError::TwoZeroDiagonal);
    }
    let lam = diagonal_roots(f, &diag, k)?;
    let kk = f.from_u128(k);
    let mut scal = vec![0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let s = if lam[i] == lam[j] {
                f.mul(kk, f.pow(lam[i], k - 1))
            } else {
                f.div(f.sub(diag[i], diag[j]), f.sub(lam[i], lam[j])).unwrap()
            };
            assert!(s != 0, "lifting scalar vanished");
            scal[i * n + j] = s;
        }
    }
    let mut x = Mat::diag(&field, &lam);
    for m in 1..n {
        let r = t.sub(&x.pow(k));
        for i in 0..n - m {
            let j = i + m;
            let z = f.div(r.get(i, j), scal[i * n + j]).unwrap();
            x.set(i, j, f.add(x.get(i, j), z));
        }
    }
    assert_eq!(x.pow(k), *t, "triangular lifting failed to converge");
    Ok(x)
}

/// `X = A^s` with `s k = 1 mod o(A)`.
pub fn root_by_order(a: &Mat, k: u128) -> Result<Mat, LiftError> {
    let order = a.order()?;
    let s = gf::mod_inverse(k % order, order).ok_or(LiftError::OrderNotCoprime { k, order })?;
    let x = a.pow(s);
    debug_assert_eq!(x.pow(k), *a);
    Ok(x)
}

/// Split-semisimple `X` with `X^k = B` for split-semisimple `B` whose
/// eigenvalues are `k`-th powers.
pub fn diagonalizable_root(b: &Mat, k: u128) -> Result<Mat, LiftError> {
    let field = b.field().clone();
    let form = canon::gj_form(b);
    if form.blocks.iter().any(|(p, m)| *m != 1 || p.degree() != 1) {
        return Err(LiftError::NotSplitSemisimple);
    }
    let eig: Vec<Elem> = form.blocks.iter().map(|(p, _)| field.neg(p.coeff(0))).collect();
    let roots = diagonal_roots(&field, &eig, k)?;
    let h = &form.transform;
    let x = h.inverse()?.mul(&Mat::diag(&field, &roots)).mul(h);
    debug_assert_eq!(x.pow(k), *b);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    #[test]
    fn unipotent_cube_root() {
        let f = build_field(5, 1).unwrap();
        let t = Mat::from_ints(&f, &[&[1, 1], &[0, 1]]);
        let x = triangular_kth_root(&t, 3).unwrap();
        assert_eq!(x, Mat::from_ints(&f, &[&[1, 2], &[0, 1]]));
    }

    #[test]
    fn diagonal_and_identity() {
        let f = build_field(7, 1).unwrap();
        assert!(triangular_kth_root(&Mat::identity(&f, 4), 5).unwrap().is_identity());
        let d = Mat::diag(&f, &[1, 6, 0]);
        let x = triangular_kth_root(&d, 3).unwrap();
        assert_eq!(x.pow(3), d);
    }

    #[test]
    fn errors() {
        let f = build_field(3, 1).unwrap();
        let t = Mat::identity(&f, 2);
        assert_eq!(triangular_kth_root(&t, 3), Err(LiftError::CharDividesK { p: 3, k: 3 }));
        assert_eq!(triangular_kth_root(&Mat::zero(&f, 2), 2), Err(LiftError::TwoZeroDiagonal));
        assert_eq!(
            triangular_kth_root(&Mat::diag(&f, &[2, 1]), 2),
            Err(LiftError::DiagonalNotPower { index: 0 })
        );
    }

    #[test]
    fn order_seven_square_root() {
        let f = build_field(2, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[0, 0, 1], &[1, 0, 1], &[0, 1, 0]]);
        assert_eq!(a.order().unwrap(), 7);
        let x = root_by_order(&a, 2).unwrap();
        assert_eq!(x, a.pow(4));
        assert_eq!(x.pow(2), a);
    }
}
