//! Dense square matrices over GF(q).

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::canon;
use crate::gf::{self, Elem, Field, FieldRef, GfError};
use crate::poly::{self, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatError {
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("malformed matrix: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Clone)]
pub struct Mat {
    field: FieldRef,
    n: usize,
    data: Vec<Elem>,
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.n == other.n && self.data == other.data
    }
}

impl Eq for Mat {}

impl std::hash::Hash for Mat {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{:?}", self.rows())
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Mat {
    pub fn zero(field: &FieldRef, n: usize) -> Mat {
        Mat { field: field.clone(), n, data: vec![0; n * n] }
    }

    pub fn identity(field: &FieldRef, n: usize) -> Mat {
        Mat::scalar(field, n, 1)
    }

    pub fn scalar(field: &FieldRef, n: usize, a: Elem) -> Mat {
        let mut m = Mat::zero(field, n);
        for i in 0..n {
            m.data[i * n + i] = a;
        }
        m
    }

    pub fn diag(field: &FieldRef, d: &[Elem]) -> Mat {
        let mut m = Mat::zero(field, d.len());
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    pub fn from_rows(field: &FieldRef, rows: &[Vec<Elem>]) -> Mat {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "rows must form a square matrix");
            data.extend(r.iter().map(|&x| {
                assert!(x < field.q(), "entry out of range");
                x
            }));
        }
        Mat { field: field.clone(), n, data }
    }

    /// Rows given as signed integers reduced into the prime subfield.
    pub fn from_ints(field: &FieldRef, rows: &[&[i64]]) -> Mat {
        let rows: Vec<Vec<Elem>> = rows.iter().map(|r| r.iter().map(|&x| field.from_int(x)).collect()).collect();
        Mat::from_rows(field, &rows)
    }

    pub fn from_data(field: &FieldRef, n: usize, data: Vec<Elem>) -> Mat {
        assert_eq!(data.len(), n * n);
        Mat { field: field.clone(), n, data }
    }

    /// Columns given as vectors.
    pub fn from_columns(field: &FieldRef, cols: &[Vec<Elem>]) -> Mat {
        let n = cols.len();
        let mut m = Mat::zero(field, n);
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn diagonal(&self) -> Vec<Elem> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == u32::from(i == j)))
    }

    pub fn is_scalar(&self) -> bool {
        let a = self.get(0, 0);
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == if i == j { a } else { 0 }))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == 0))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == 0))
    }

    pub fn add(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Mat { field: self.field.clone(), n: self.n, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Mat { field: self.field.clone(), n: self.n, data }
    }

    pub fn neg(&self) -> Mat {
        let f = &self.field;
        Mat { field: self.field.clone(), n: self.n, data: self.data.iter().map(|&a| f.neg(a)).collect() }
    }

    pub fn scale(&self, c: Elem) -> Mat {
        let f = &self.field;
        Mat { field: self.field.clone(), n: self.n, data: self.data.iter().map(|&a| f.mul(a, c)).collect() }
    }

    /// `self + c I`.
    pub fn shift(&self, c: Elem) -> Mat {
        let mut m = self.clone();
        for i in 0..self.n {
            m.set(i, i, self.field.add(m.get(i, i), c));
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let f = &*self.field;
        let mut out = vec![0u32; n * n];
        if f.l() == 1 && f.p() < (1 << 16) {
            let p = f.p() as u64;
            let mut acc = vec![0u64; n];
            for i in 0..n {
                acc.iter_mut().for_each(|x| *x = 0);
                for k in 0..n {
                    let a = self.data[i * n + k] as u64;
                    if a == 0 {
                        continue;
                    }
                    let row = &other.data[k * n..(k + 1) * n];
                    for (x, &b) in acc.iter_mut().zip(row) {
                        *x += a * b as u64;
                    }
                }
                for j in 0..n {
                    out[i * n + j] = (acc[j] % p) as Elem;
                }
            }
        } else {
            for i in 0..n {
                for k in 0..n {
                    let a = self.data[i * n + k];
                    if a == 0 {
                        continue;
                    }
                    for j in 0..n {
                        let b = other.data[k * n + j];
                        if b != 0 {
                            out[i * n + j] = f.add(out[i * n + j], f.mul(a, b));
                        }
                    }
                }
            }
        }
        Mat { field: self.field.clone(), n, data: out }
    }

    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        let f = &*self.field;
        (0..self.n)
            .map(|i| (0..self.n).fold(0, |acc, j| f.add(acc, f.mul(self.get(i, j), v[j]))))
            .collect()
    }

    pub fn pow(&self, mut e: u128) -> Mat {
        let mut base = self.clone();
        let mut acc = Mat::identity(&self.field, self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zero(&self.field, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }

    pub fn trace(&self) -> Elem {
        (0..self.n).fold(0, |acc, i| self.field.add(acc, self.get(i, i)))
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let pivots = rref_rows(&self.field, &mut m.data, self.n, self.n);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> Elem {
        let f = &*self.field;
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1;
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| a[r * n + c] != 0) else {
                return 0;
            };
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let pv = a[c * n + c];
            det = f.mul(det, pv);
            let inv = f.inv(pv).unwrap();
            for r in c + 1..n {
                let t = f.mul(a[r * n + c], inv);
                if t != 0 {
                    for j in c..n {
                        a[r * n + j] = f.sub(a[r * n + j], f.mul(t, a[c * n + j]));
                    }
                }
            }
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        self.det() != 0
    }

    pub fn inverse(&self) -> Result<Mat, MatError> {
        let n = self.n;
        let w = 2 * n;
        let mut aug = vec![0; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(&self.data[i * n..(i + 1) * n]);
            aug[i * w + n + i] = 1;
        }
        let pivots = rref_rows(&self.field, &mut aug, n, w);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(MatError::NotInvertible);
        }
        let mut out = Mat::zero(&self.field, n);
        for i in 0..n {
            out.data[i * n..(i + 1) * n].copy_from_slice(&aug[i * w + n..(i + 1) * w]);
        }
        Ok(out)
    }

    /// Basis of the right kernel `{v : A v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Elem>> {
        let f = &*self.field;
        let (r, pivots) = self.rref();
        let n = self.n;
        let mut basis = Vec::new();
        for free in (0..n).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0; n];
            v[free] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(row, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Entries of rows/columns `idx` (a principal submatrix).
    pub fn submatrix(&self, idx: &[usize]) -> Mat {
        let mut m = Mat::zero(&self.field, idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }

    /// Principal submatrix on the contiguous range `start..start+len`.
    pub fn block(&self, start: usize, len: usize) -> Mat {
        self.submatrix(&(start..start + len).collect::<Vec<_>>())
    }

    /// Writes `m` as a principal block starting at `start`.
    pub fn set_block(&mut self, start: usize, m: &Mat) {
        for i in 0..m.n {
            for j in 0..m.n {
                self.set(start + i, start + j, m.get(i, j));
            }
        }
    }

    pub fn block_diag(field: &FieldRef, blocks: &[Mat]) -> Mat {
        let n = blocks.iter().map(|b| b.n).sum();
        let mut m = Mat::zero(field, n);
        let mut at = 0;
        for b in blocks {
            m.set_block(at, b);
            at += b.n;
        }
        m
    }

    /// `g A g^{-1}`.
    pub fn conjugate(&self, g: &Mat) -> Result<Mat, MatError> {
        Ok(g.mul(self).mul(&g.inverse()?))
    }

    /// Index in the enumeration order `sum_t a_t q^t` with `t = i n + j`.
    pub fn to_index(&self) -> u128 {
        let q = self.field.q() as u128;
        self.data.iter().rev().fold(0u128, |acc, &x| acc * q + x as u128)
    }

    pub fn from_index(field: &FieldRef, n: usize, idx: u128) -> Mat {
        let q = field.q() as u128;
        let mut rest = idx;
        let data = (0..n * n)
            .map(|_| {
                let x = (rest % q) as Elem;
                rest /= q;
                x
            })
            .collect();
        Mat { field: field.clone(), n, data }
    }

    /// Evaluates a polynomial at this matrix.
    pub fn eval_poly(&self, f: &Poly) -> Mat {
        let mut acc = Mat::zero(&self.field, self.n);
        for &c in f.coeffs.iter().rev() {
            acc = acc.mul(self).shift(c);
        }
        acc
    }

    /// Characteristic polynomial by Hessenberg reduction.
    pub fn char_poly(&self) -> Poly {
        let f = &*self.field;
        let n = self.n;
        let mut h = self.data.clone();
        let at = |i: usize, j: usize| i * n + j;
        for j in 0..n.saturating_sub(2) {
            let Some(piv) = (j + 1..n).find(|&i| h[at(i, j)] != 0) else {
                continue;
            };
            if piv != j + 1 {
                for c in 0..n {
                    h.swap(at(piv, c), at(j + 1, c));
                }
                for r in 0..n {
                    h.swap(at(r, piv), at(r, j + 1));
                }
            }
            let inv = f.inv(h[at(j + 1, j)]).unwrap();
            for i in j + 2..n {
                let t = f.mul(h[at(i, j)], inv);
                if t == 0 {
                    continue;
                }
                for c in 0..n {
                    h[at(i, c)] = f.sub(h[at(i, c)], f.mul(t, h[at(j + 1, c)]));
                }
                for r in 0..n {
                    h[at(r, j + 1)] = f.add(h[at(r, j + 1)], f.mul(t, h[at(r, i)]));
                }
            }
        }
        // p_m = (x - h_mm) p_{m-1} - sum_{i<m} h_im (prod_{j=i+1}^{m} h_{j,j-1}) p_{i-1}
        let mut ps: Vec<Poly> = vec![Poly::one()];
        for m in 0..n {
            let mut pm = poly::mul(f, &Poly::linear(f, h[at(m, m)]), &ps[m]);
            let mut prod = 1;
            for i in (0..m).rev() {
                prod = f.mul(prod, h[at(i + 1, i)]);
                if prod == 0 {
                    break;
                }
                let c = f.mul(h[at(i, m)], prod);
                pm = poly::sub(f, &pm, &poly::scale(f, &ps[i], c));
            }
            ps.push(pm);
        }
        ps.pop().unwrap()
    }

    pub fn min_poly(&self) -> Poly {
        let f = &*self.field;
        canon::structure(self)
            .iter()
            .fold(Vec::<(Poly, u32)>::new(), |mut acc, (g, m)| {
                match acc.iter_mut().find(|(h, _)| h == g) {
                    Some(e) => e.1 = e.1.max(*m),
                    None => acc.push((g.clone(), *m)),
                }
                acc
            })
            .iter()
            .fold(Poly::one(), |acc, (g, m)| poly::mul(f, &acc, &poly::pow(f, g, *m)))
    }

    pub fn is_cyclic(&self) -> bool {
        let s = canon::structure(self);
        s.windows(2).all(|w| w[0].0 != w[1].0)
    }

    pub fn is_semisimple(&self) -> bool {
        canon::structure(self).iter().all(|(_, m)| *m == 1)
    }

    pub fn is_split_semisimple(&self) -> bool {
        canon::structure(self).iter().all(|(f, m)| *m == 1 && f.degree() == 1)
    }

    pub fn is_idempotent(&self) -> bool {
        &self.mul(self) == self
    }

    /// Multiplicative order, from the block structure.
    pub fn order(&self) -> Result<u128, MatError> {
        let f = &*self.field;
        let p = f.p() as u128;
        let mut ord = 1u128;
        for (g, m) in canon::structure(self) {
            if g == Poly::x() {
                return Err(MatError::NotInvertible);
            }
            let mut pt = 1u128;
            while pt < m as u128 {
                pt *= p;
            }
            ord = gf::lcm(ord, poly_order(f, &g) * pt);
        }
        Ok(ord)
    }

    pub fn to_text(&self) -> String {
        self.data
            .chunks(self.n)
            .map(|r| r.iter().map(|&x| self.field.format_elem(x)).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn parse_text(field: &FieldRef, s: &str) -> Result<Mat, MatError> {
        let rows: Vec<Vec<Elem>> = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().map(|t| field.parse_elem(t)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(MatError::Parse("expected n lines of n entries".into()));
        }
        Ok(Mat::from_rows(field, &rows))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<String>> =
            self.rows().iter().map(|r| r.iter().map(|&x| self.field.format_elem(x)).collect()).collect();
        json!({ "field": self.field.spec(), "n": self.n, "rows": rows })
    }

    /// Parses the JSON form. Entries may be integers or literal strings.
    pub fn from_json(v: &Value) -> Result<Mat, MatError> {
        let bad = |m: &str| MatError::Parse(m.to_string());
        let spec = v.get("field").and_then(Value::as_str).ok_or_else(|| bad("missing field"))?;
        let field = gf::field_from_spec(spec)?;
        let rows = v.get("rows").and_then(Value::as_array).ok_or_else(|| bad("missing rows"))?;
        let mut out = Vec::new();
        for r in rows {
            let r = r.as_array().ok_or_else(|| bad("row is not an array"))?;
            let mut row = Vec::new();
            for x in r {
                let e = match x {
                    Value::Number(num) => field.from_int(num.as_i64().ok_or_else(|| bad("bad number"))?),
                    Value::String(s) => field.parse_elem(s)?,
                    _ => return Err(bad("bad entry")),
                };
                row.push(e);
            }
            out.push(row);
        }
        let n = out.len();
        if n == 0 || out.iter().any(|r| r.len() != n) {
            return Err(bad("rows must form a square matrix"));
        }
        if let Some(declared) = v.get("n").and_then(Value::as_u64) {
            if declared as usize != n {
                return Err(bad("n does not match rows"));
            }
        }
        Ok(Mat::from_rows(&field, &out))
    }
}

/// In-place RREF of a row-major `rows x cols` buffer; returns pivot columns.
pub fn rref_rows(field: &Field, a: &mut [Elem], rows: usize, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(a[r * cols + c]).unwrap();
        for j in c..cols {
            a[r * cols + j] = field.mul(a[r * cols + j], inv);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let t = a[i * cols + c];
            if t != 0 {
                for j in c..cols {
                    a[i * cols + j] = field.sub(a[i * cols + j], field.mul(t, a[r * cols + j]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Multiplicative order of `x` modulo an irreducible `f != x`.
pub fn poly_order(field: &Field, f: &Poly) -> u128 {
    let group = (field.q() as u128).pow(f.degree() as u32) - 1;
    let mut ord = group;
    for r in gf::prime_factors(group) {
        while ord.is_multiple_of(r) && poly::pow_mod(field, &Poly::x(), ord / r, f) == Poly::one() {
            ord /= r;
        }
    }
    ord
}

/// Incrementally maintained echelon basis of a subspace of `F_q^n`.
#[derive(Clone, Debug)]
pub struct Span {
    field: FieldRef,
    rows: Vec<(usize, Vec<Elem>)>,
}

impl Span {
    pub fn new(field: &FieldRef) -> Span {
        Span { field: field.clone(), rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Elem]) -> Vec<Elem> {
        let f = &*self.field;
        let mut v = v.to_vec();
        for (piv, row) in &self.rows {
            let c = v[*piv];
            if c != 0 {
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v`; returns whether the dimension grew.
    pub fn insert(&mut self, v: &[Elem]) -> bool {
        let f = &*self.field;
        let mut r = self.reduce(v);
        let Some(piv) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(r[piv]).unwrap();
        r.iter_mut().for_each(|x| *x = f.mul(*x, inv));
        for (_, row) in self.rows.iter_mut() {
            let c = row[piv];
            if c != 0 {
                for (x, &y) in row.iter_mut().zip(&r) {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        self.rows.push((piv, r));
        true
    }
}

fn check_budget(field: &Field, n: usize, budget: u128) -> Result<u128, GfError> {
    let total = (field.q() as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(GfError::BudgetExceeded { needed: total, budget });
    }
    Ok(total)
}

/// All `q^{n^2}` matrices in index order.
pub fn enumerate_matrices(
    field: &FieldRef,
    n: usize,
    budget: u128,
) -> Result<impl Iterator<Item = Mat>, GfError> {
    let total = check_budget(field, n, budget)?;
    let field = field.clone();
    Ok((0..total).map(move |i| Mat::from_index(&field, n, i)))
}

pub fn enumerate_invertible(
    field: &FieldRef,
    n: usize,
    budget: u128,
) -> Result<impl Iterator<Item = Mat>, GfError> {
    Ok(enumerate_matrices(field, n, budget)?.filter(Mat::is_invertible))
}

/// Exponent of `GL_n(F_q)` and the product of its distinct prime divisors.
pub fn gl_exponent(field: &FieldRef, n: usize, budget: u128) -> Result<(u128, u128), GfError> {
    let e = enumerate_invertible(field, n, budget)?
        .map(|m| m.order().expect("invertible"))
        .fold(1u128, gf::lcm);
    let w = gf::prime_factors(e).iter().product();
    Ok((e, w))
}

/// Shared handle for building matrices over one field.
pub fn field_of(m: &Mat) -> FieldRef {
    Arc::clone(&m.field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    #[test]
    fn char_and_min_poly_examples() {
        let f3 = build_field(3, 1).unwrap();
        let z = Mat::zero(&f3, 3);
        assert_eq!(z.char_poly(), Poly::new(vec![0, 0, 0, 1]));
        assert_eq!(z.min_poly(), Poly::x());
        let j = Mat::from_ints(&f3, &[&[1, 1], &[0, 1]]);
        let sq = Poly::new(vec![1, 1, 1]);
        assert_eq!(j.char_poly(), sq);
        assert_eq!(j.min_poly(), sq);
        let f2 = build_field(2, 1).unwrap();
        let i2 = Mat::identity(&f2, 2);
        assert_eq!(i2.char_poly(), Poly::new(vec![1, 0, 1]));
        assert_eq!(i2.min_poly(), Poly::new(vec![1, 1]));
    }

    #[test]
    fn orders() {
        let f3 = build_field(3, 1).unwrap();
        assert_eq!(Mat::from_ints(&f3, &[&[0, 1], &[1, 2]]).order().unwrap(), 8);
        assert_eq!(Mat::identity(&f3, 3).order().unwrap(), 1);
        assert_eq!(Mat::zero(&f3, 2).order(), Err(MatError::NotInvertible));
    }

    #[test]
    fn enumeration_sizes() {
        let f2 = build_field(2, 1).unwrap();
        let f3 = build_field(3, 1).unwrap();
        assert_eq!(enumerate_matrices(&f2, 2, 1 << 24).unwrap().count(), 16);
        assert_eq!(enumerate_matrices(&f3, 2, 1 << 24).unwrap().count(), 81);
        assert_eq!(enumerate_matrices(&f2, 3, 1 << 24).unwrap().count(), 512);
        assert!(enumerate_matrices(&f2, 5, 1 << 24).is_err());
    }

    #[test]
    fn exponents() {
        let f2 = build_field(2, 1).unwrap();
        let f3 = build_field(3, 1).unwrap();
        assert_eq!(gl_exponent(&f2, 2, 1 << 24).unwrap(), (6, 6));
        assert_eq!(gl_exponent(&f2, 3, 1 << 24).unwrap(), (84, 42));
        assert_eq!(gl_exponent(&f3, 2, 1 << 24).unwrap(), (24, 6));
    }

    #[test]
    fn text_and_json_round_trip() {
        let f = build_field(3, 2).unwrap();
        let m = Mat::from_index(&f, 3, 123456789);
        assert_eq!(Mat::parse_text(&f, &m.to_text()).unwrap(), m);
        assert_eq!(Mat::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn companion_power_is_scalar() {
        let f5 = build_field(5, 1).unwrap();
        // companion of x^3 - 2
        let a = Mat::from_ints(&f5, &[&[0, 0, 2], &[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(a.pow(3), Mat::scalar(&f5, 3, 2));
    }
}
