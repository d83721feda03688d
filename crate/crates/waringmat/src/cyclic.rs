//! Prescribing diagonals up to similarity.
//!
//! A cyclic matrix is similar to a lower-Hessenberg companion-like matrix with
//! any diagonal of the right trace; a nonscalar matrix is similar to some
//! matrix with any diagonal of the right trace. Both constructions return the
//! similarity transform `g` with the target equal to `g A g^{-1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::canon::{self, gj_block_unchecked};
use crate::gf::{Elem, FieldRef};
use crate::matgf::{Mat, Span};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclicError {
    #[error("matrix is not cyclic")]
    NotCyclic,
    #[error("diagonal sums to {got}, trace is {expected}")]
    TraceMismatch { expected: String, got: String },
    #[error("scalar matrices only admit their own diagonal")]
    ScalarInput,
    #[error("diagonal has length {got}, matrix has size {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SlotTag {
    ZeroAllowed,
    MustBePower,
    MustBeNonzero,
}

/// Target diagonal together with per-slot requirements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagPlan {
    pub u: Vec<Elem>,
    pub tags: Vec<SlotTag>,
}

impl DiagPlan {
    pub fn free(u: Vec<Elem>) -> DiagPlan {
        let tags = vec![SlotTag::ZeroAllowed; u.len()];
        DiagPlan { u, tags }
    }

    pub fn sum(&self, field: &FieldRef) -> Elem {
        self.u.iter().fold(0, |acc, &x| field.add(acc, x))
    }

    /// Checks the slot tags; powers are `k`-th powers in the field.
    pub fn tags_hold(&self, field: &FieldRef, k: u128) -> bool {
        self.u.iter().zip(&self.tags).all(|(&x, tag)| match tag {
            SlotTag::ZeroAllowed => true,
            SlotTag::MustBeNonzero => x != 0,
            SlotTag::MustBePower => field.is_kth_power(x, k),
        })
    }
}

fn check_trace(a: &Mat, u: &[Elem]) -> Result<(), CyclicError> {
    let f = a.field();
    if u.len() != a.n() {
        return Err(CyclicError::Dimension { expected: a.n(), got: u.len() });
    }
    let s = u.iter().fold(0, |acc, &x| f.add(acc, x));
    if s != a.trace() {
        return Err(CyclicError::TraceMismatch { expected: f.format_elem(a.trace()), got: f.format_elem(s) });
    }
    Ok(())
}

fn krylov_rank(a: &Mat, v: &[Elem]) -> bool {
    let mut span = Span::new(a.field());
    let mut cur = v.to_vec();
    for _ in 0..a.n() {
        if !span.insert(&cur) {
            return false;
        }
        cur = a.mul_vec(&cur);
    }
    true
}

/// A vector whose Krylov sequence spans the whole space.
pub fn find_cyclic_vector(a: &Mat, seed: u64) -> Result<Vec<Elem>, CyclicError> {
    let n = a.n();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        if krylov_rank(a, &e) {
            return Ok(e);
        }
    }
    if !a.is_cyclic() {
        return Err(CyclicError::NotCyclic);
    }
    let q = a.field().q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<Elem> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        if krylov_rank(a, &v) {
            return Ok(v);
        }
    }
}

/// Result of [`cyclic_with_diagonal`]: `g A g^{-1}` has diagonal `u`,
/// subdiagonal ones, last column `a_0..a_{n-2}` above the corner.
#[derive(Clone, Debug)]
pub struct CyclicForm {
    pub g: Mat,
    pub last_column: Vec<Elem>,
}

pub fn cyclic_with_diagonal(a: &Mat, u: &[Elem]) -> Result<CyclicForm, CyclicError> {
    check_trace(a, u)?;
    let f = a.field().clone();
    let n = a.n();
    let v = find_cyclic_vector(a, 0)?;
    let mut cols = Vec::with_capacity(n);
    let mut w = v;
    for i in 0..n {
        let next: Vec<Elem> = if i + 1 < n {
            let aw = a.mul_vec(&w);
            aw.iter().zip(&w).map(|(&x, &y)| f.sub(x, f.mul(u[i], y))).collect()
        } else {
            Vec::new()
        };
        cols.push(w);
        w = next;
    }
    let g = Mat::from_columns(&f, &cols).inverse().expect("Krylov-type basis");
    let form = g.mul(a).mul(&g.inverse().unwrap());
    debug_assert_eq!(form.diagonal(), u);
    let last_column = (0..n.saturating_sub(1)).map(|i| form.get(i, n - 1)).collect();
    Ok(CyclicForm { g, last_column })
}

/// `g A g^{-1} = B + C` with the alternating subdiagonal patterns.
#[derive(Clone, Debug)]
pub struct LuSplit {
    pub b: Mat,
    pub c: Mat,
    pub g: Mat,
    pub parity: usize,
    pub last_column: Vec<Elem>,
}

/// Subdiagonal pattern of the lower summand: entry `(i+1, i)` (0-based `i`).
pub fn lower_subdiagonal_one(n: usize, i: usize) -> bool {
    // 1-based index i+1 even for odd n, odd for even n
    if n % 2 == 1 {
        (i + 1).is_multiple_of(2)
    } else {
        (i + 1) % 2 == 1
    }
}

pub fn cyclic_lu_split(a: &Mat, e: &[Elem], u: &[Elem]) -> Result<LuSplit, CyclicError> {
    let f = a.field().clone();
    let n = a.n();
    if e.len() != n || u.len() != n {
        return Err(CyclicError::Dimension { expected: n, got: e.len().min(u.len()) });
    }
    let sigma: Vec<Elem> = e.iter().zip(u).map(|(&x, &y)| f.add(x, y)).collect();
    let form = cyclic_with_diagonal(a, &sigma)?;
    let mut b = Mat::diag(&f, e);
    let mut c = Mat::diag(&f, u);
    for i in 0..n.saturating_sub(1) {
        if lower_subdiagonal_one(n, i) {
            b.set(i + 1, i, 1);
        } else {
            c.set(i + 1, i, 1);
        }
        c.set(i, n - 1, form.last_column[i]);
    }
    debug_assert_eq!(b.add(&c), a.conjugate(&form.g).unwrap());
    Ok(LuSplit { b, c, g: form.g, parity: n % 2, last_column: form.last_column })
}

/// Some `g` with `g x g^{-1} = y`, if the two matrices are similar.
pub fn similarity(x: &Mat, y: &Mat) -> Option<Mat> {
    let fx = canon::gj_form(x);
    let fy = canon::gj_form(y);
    if fx.blocks != fy.blocks {
        return None;
    }
    Some(fy.transform.inverse().ok()?.mul(&fx.transform))
}

/// Permutation matrix sending block `order[t]` of a block-diagonal matrix
/// with the given sizes to position `t`.
fn block_permutation(field: &FieldRef, sizes: &[usize], order: &[usize]) -> Mat {
    let n: usize = sizes.iter().sum();
    let mut starts = vec![0; sizes.len()];
    for i in 1..sizes.len() {
        starts[i] = starts[i - 1] + sizes[i - 1];
    }
    let mut p = Mat::zero(field, n);
    let mut row = 0;
    for &b in order {
        for t in 0..sizes[b] {
            p.set(row, starts[b] + t, 1);
            row += 1;
        }
    }
    p
}

fn embed(field: &FieldRef, n: usize, at: usize, g: &Mat) -> Mat {
    let mut m = Mat::identity(field, n);
    m.set_block(at, g);
    m
}

/// `b` with `A - bI` of rank one, if any.
fn rank_one_shift(a: &Mat) -> Option<Elem> {
    let f = a.field();
    let n = a.n();
    // eigenvalue of geometric multiplicity n-1 occurs on the diagonal n-2 times at least
    let mut candidates: Vec<Elem> = a.diagonal();
    candidates.sort_unstable();
    candidates.dedup();
    candidates.into_iter().chain(f.elements()).find(|&b| n >= 2 && a.shift(f.neg(b)).rank() == 1)
}

/// Diagonal `u` for a matrix with `A - bI` of rank one via the rank-one
/// matrix `(1, u_2, ..., u_n)^T (u_1, 1, ..., 1)` shifted by `b`.
fn rank_one_with_diagonal(a: &Mat, b: Elem, u: &[Elem]) -> Mat {
    let f = a.field().clone();
    let n = a.n();
    let shifted: Vec<Elem> = u.iter().map(|&x| f.sub(x, b)).collect();
    let mut col = shifted.clone();
    col[0] = 1;
    let mut row = vec![1; n];
    row[0] = shifted[0];
    let mut m = Mat::zero(&f, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, f.mul(col[i], row[j]));
        }
    }
    let target = m.shift(b);
    similarity(a, &target).expect("rank-one matrices with equal trace are similar")
}

/// `g` with `diag(g A g^{-1}) = u`, for nonscalar `A` (or `u = diag(A)`).
pub fn quasi_cyclic_with_diagonal(a: &Mat, u: &[Elem]) -> Result<Mat, CyclicError> {
    check_trace(a, u)?;
    let g = qc(a, u)?;
    let check = a.conjugate(&g).expect("transform is invertible");
    assert_eq!(check.diagonal(), u, "prescribed-diagonal construction produced a wrong diagonal");
    Ok(g)
}

fn qc(a: &Mat, u: &[Elem]) -> Result<Mat, CyclicError> {
    let field = a.field().clone();
    let f = &*field;
    let n = a.n();
    if a.diagonal() == u {
        return Ok(Mat::identity(&field, n));
    }
    if a.is_scalar() {
        return Err(CyclicError::ScalarInput);
    }
    if a.is_cyclic() {
        return Ok(cyclic_with_diagonal(a, u)?.g);
    }
    if let Some(b) = rank_one_shift(a) {
        return Ok(rank_one_with_diagonal(a, b, u));
    }
    // n >= 4, noncyclic, no rank-one shift
    let form = canon::gj_form(a);
    let sizes = form.block_sizes();
    let blocks = &form.blocks;
    let is_one = |i: usize| sizes[i] == 1;
    let rest_nonscalar = |skip: usize| {
        let others: Vec<usize> = (0..blocks.len()).filter(|&i| i != skip).collect();
        others.iter().any(|&i| !is_one(i)) || others.windows(2).any(|w| blocks[w[0]].0 != blocks[w[1]].0)
    };
    let split = (0..blocks.len()).find(|&i| is_one(i) && rest_nonscalar(i));
    let block_mats: Vec<Mat> =
        blocks.iter().map(|(p, m)| gj_block_unchecked(&field, p, *m as usize)).collect();
    match split {
        Some(s) => {
            let order: Vec<usize> = (0..blocks.len()).filter(|&i| i != s).chain([s]).collect();
            let g0 = block_permutation(&field, &sizes, &order).mul(&form.transform);
            let c = f.neg(blocks[s].0.coeff(0));
            let x: Vec<Mat> = order[..order.len() - 1].iter().map(|&i| block_mats[i].clone()).collect();
            let xs = Mat::block_diag(&field, &x).shift(f.neg(c));
            let us: Vec<Elem> = u.iter().map(|&v| f.sub(v, c)).collect();
            let un = us[n - 1];
            let avoid = f.sub(1, un);
            let u0 = f.elements().find(|&v| v != avoid).unwrap();
            let mut t = vec![0; n - 1];
            t[0] = u0;
            t[n - 2] = 1;
            t[1] = f.sub(f.sub(xs.trace(), u0), 1);
            let g1 = qc(&xs, &t)?;
            let mut bm = Mat::zero(&field, n);
            bm.set_block(0, &xs.conjugate(&g1).unwrap());
            let tail = bm.block(n - 2, 2);
            let g2 = cyclic_with_diagonal(&tail, &[avoid, un])?.g;
            let big2 = embed(&field, n, n - 2, &g2);
            let cm = bm.conjugate(&big2).unwrap();
            let g3 = qc(&cm.block(0, n - 1), &us[..n - 1])?;
            let big3 = embed(&field, n, 0, &g3);
            Ok(big3.mul(&big2).mul(&embed(&field, n, 0, &g1)).mul(&g0))
        }
        None => {
            let n1 = sizes[0];
            let x = &block_mats[0];
            let mut t: Vec<Elem> = u[..n1 - 1].to_vec();
            let used = t.iter().fold(0, |acc, &v| f.add(acc, v));
            t.push(f.sub(x.trace(), used));
            let g1 = cyclic_with_diagonal(x, &t)?.g;
            let mut bm = form.block_matrix();
            bm.set_block(0, &x.conjugate(&g1).unwrap());
            let tail = bm.block(n1 - 1, n - n1 + 1);
            let g2 = qc(&tail, &u[n1 - 1..])?;
            Ok(embed(&field, n, n1 - 1, &g2).mul(&embed(&field, n, 0, &g1)).mul(&form.transform))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;
    use crate::matgf::enumerate_matrices;

    #[test]
    fn companion_keeps_its_form() {
        let f = build_field(5, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[0, 0, 2], &[1, 0, 3], &[0, 1, 4]]);
        assert_eq!(find_cyclic_vector(&a, 0).unwrap(), vec![1, 0, 0]);
        let form = cyclic_with_diagonal(&a, &[0, 0, 4]).unwrap();
        assert!(form.g.is_identity());
        assert_eq!(form.last_column, vec![2, 3]);
    }

    #[test]
    fn gf4_generator_block_diagonal() {
        let f = build_field(2, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[0, 1], &[1, 1]]);
        let form = cyclic_with_diagonal(&a, &[1, 0]).unwrap();
        let t = a.conjugate(&form.g).unwrap();
        assert_eq!(t.diagonal(), vec![1, 0]);
        assert_eq!(t.get(1, 0), 1);
    }

    #[test]
    fn rank_one_example() {
        let f = build_field(3, 1).unwrap();
        let a = Mat::diag(&f, &[1, 0, 0]);
        let g = quasi_cyclic_with_diagonal(&a, &[2, 2, 0]).unwrap();
        assert_eq!(a.conjugate(&g).unwrap().diagonal(), vec![2, 2, 0]);
    }

    #[test]
    fn scalar_rejects_other_diagonals() {
        let f = build_field(3, 1).unwrap();
        let a = Mat::scalar(&f, 3, 1);
        assert!(quasi_cyclic_with_diagonal(&a, &[1, 1, 1]).unwrap().is_identity());
        assert_eq!(quasi_cyclic_with_diagonal(&a, &[0, 1, 2]).unwrap_err(), CyclicError::ScalarInput);
    }

    #[test]
    fn decompex_eigenspaces() {
        let f = build_field(5, 1).unwrap();
        let a = gj_block_unchecked(&f, &crate::poly::Poly::new(vec![1, 0, 0, 0, 0, 0, 1]), 1);
        let e = [1, 0, 2, 0, 2, 0];
        let u = [0, 1, 0, 2, 0, 3];
        let tr = a.trace();
        let total = e.iter().chain(&u).fold(0, |s, &x| f.add(s, x));
        // shift the last slot so the trace matches
        let mut u = u.to_vec();
        u[5] = f.add(u[5], f.sub(tr, total));
        let split = cyclic_lu_split(&a, &e, &u).unwrap();
        let dims: Vec<usize> = [0, 1, 2].iter().map(|&v| 6 - split.b.shift(f.neg(v)).rank()).collect();
        assert_eq!(dims, vec![3, 1, 2]);
        assert!(split.b.is_split_semisimple());
    }

    #[test]
    fn exhaustive_two_by_two() {
        for p in [2u64, 3] {
            let f = build_field(p, 1).unwrap();
            for a in enumerate_matrices(&f, 2, 1 << 20).unwrap().filter(|m| !m.is_scalar()) {
                for u1 in f.elements() {
                    let u = [u1, f.sub(a.trace(), u1)];
                    let g = quasi_cyclic_with_diagonal(&a, &u).unwrap();
                    assert_eq!(a.conjugate(&g).unwrap().diagonal(), u);
                }
            }
        }
    }

    #[test]
    fn noncyclic_four_by_four() {
        let f = build_field(3, 1).unwrap();
        let cases = [Mat::diag(&f, &[1, 1, 2, 2]), Mat::diag(&f, &[0, 0, 0, 1]), {
            let mut m = Mat::diag(&f, &[1, 1, 1, 1]);
            m.set(0, 1, 1);
            m.set(2, 3, 1);
            m
        }];
        for a in cases {
            for u0 in f.elements() {
                for u1 in f.elements() {
                    let u = [u0, u1, 2, f.sub(a.trace(), f.add(f.add(u0, u1), 2))];
                    let g = quasi_cyclic_with_diagonal(&a, &u).unwrap();
                    assert_eq!(a.conjugate(&g).unwrap().diagonal(), u);
                }
            }
        }
    }
}
