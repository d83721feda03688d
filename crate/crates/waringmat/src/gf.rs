//! Finite fields GF(p^l), element arithmetic, and the scalar Waring layer.
//!
//! Elements are encoded as integers `c_0 + c_1 p + ... + c_{l-1} p^{l-1}`
//! where `(c_0, ..., c_{l-1})` are the coordinates in the power basis of the
//! generator `g`, a root of the field's modulus. Every "first element in
//! canonical order" search in this crate walks this encoding upwards.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::matgf::Mat;
use crate::poly::{self, Poly};

pub type Elem = u32;

/// Largest non-prime field order for which log/exp tables are built.
pub const MAX_TABLE_ORDER: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("field order {0} is too large for table arithmetic")]
    TooLarge(u128),
    #[error("malformed field spec '{0}' (expected p^l)")]
    BadSpec(String),
    #[error("malformed element literal '{0}'")]
    BadLiteral(String),
    #[error("no solution")]
    NoSolution,
    #[error("enumeration budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type FieldRef = Arc<Field>;

pub struct Field {
    p: u32,
    l: u32,
    q: u32,
    modulus: Vec<Elem>,
    pows: Vec<u32>,
    exp: Vec<Elem>,
    log: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.l)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.l == other.l
    }
}

impl Eq for Field {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u128)
}

/// Builds GF(p^l) with the canonical modulus.
pub fn build_field(p: u64, l: u32) -> Result<FieldRef, GfError> {
    Field::new(p, l).map(Arc::new)
}

impl Field {
    pub fn new(p: u64, l: u32) -> Result<Field, GfError> {
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(GfError::NotPrime(p));
        }
        if l == 0 {
            return Err(GfError::DegreeZero);
        }
        let p32 = p as u32;
        let prime = Field::prime(p32);
        if l == 1 {
            return Ok(prime);
        }
        let q = (p as u128).pow(l);
        if q > MAX_TABLE_ORDER as u128 {
            return Err(GfError::TooLarge(q));
        }
        let modulus = canonical_modulus(&prime, l as usize).coeffs;
        let mut pows = vec![1u32; l as usize];
        for i in 1..l as usize {
            pows[i] = pows[i - 1] * p32;
        }
        let mut field = Field { p: p32, l, q: q as u32, modulus, pows, exp: Vec::new(), log: Vec::new() };
        field.build_tables();
        Ok(field)
    }

    fn prime(p: u32) -> Field {
        Field { p, l: 1, q: p, modulus: vec![0, 1], pows: vec![1], exp: Vec::new(), log: Vec::new() }
    }

    fn build_tables(&mut self) {
        let q = self.q as u64;
        let order = q - 1;
        let factors = prime_factors(order as u128);
        let gen = (2..self.q)
            .chain(1..2)
            .find(|&c| factors.iter().all(|&r| self.slow_pow(c, order / r as u64) != 1))
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for i in 0..order as usize {
            exp[i] = cur;
            exp[i + order as usize] = cur;
            log[cur as usize] = i as u32;
            cur = self.slow_mul(cur, gen);
        }
        self.exp = exp;
        self.log = log;
    }

    fn slow_mul(&self, a: Elem, b: Elem) -> Elem {
        let l = self.l as usize;
        let p = self.p as u64;
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let mut prod = vec![0u64; 2 * l];
        for i in 0..l {
            for j in 0..l {
                prod[i + j] = (prod[i + j] + ca[i] as u64 * cb[j] as u64) % p;
            }
        }
        for d in (l..2 * l).rev() {
            let c = prod[d];
            if c != 0 {
                for (i, &m) in self.modulus.iter().enumerate().take(l) {
                    let t = d - l + i;
                    prod[t] = (prod[t] + (p - c) * m as u64) % p;
                }
                prod[d] = 0;
            }
        }
        self.from_coeffs(&prod[..l].iter().map(|&c| c as u32).collect::<Vec<_>>())
    }

    fn slow_pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Monic modulus, coefficients low to high (length `l + 1`).
    pub fn modulus(&self) -> &[Elem] {
        &self.modulus
    }

    /// Spec string `p^l`.
    pub fn spec(&self) -> String {
        format!("{}^{}", self.p, self.l)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> {
        1..self.q
    }

    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.l as usize);
        let mut a = a;
        for _ in 0..self.l {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Elem {
        c.iter().rev().fold(0u32, |acc, &x| acc * self.p + x % self.p)
    }

    /// The prime-subfield element `n mod p`.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.p as i64) as Elem
    }

    /// The generator `g` (a root of the modulus).
    pub fn generator(&self) -> Elem {
        if self.l == 1 {
            (self.p - self.modulus[0] % self.p) % self.p
        } else {
            self.p
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.l == 1 {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else if self.p == 2 {
            a ^ b
        } else {
            let (mut a, mut b) = (a, b);
            let mut r = 0;
            for &pw in &self.pows {
                let mut s = a % self.p + b % self.p;
                if s >= self.p {
                    s -= self.p;
                }
                r += s * pw;
                a /= self.p;
                b /= self.p;
            }
            r
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.l == 1 {
            if a == 0 {
                0
            } else {
                self.p - a
            }
        } else if self.p == 2 {
            a
        } else {
            let mut a = a;
            let mut r = 0;
            for &pw in &self.pows {
                let c = a % self.p;
                if c != 0 {
                    r += (self.p - c) * pw;
                }
                a /= self.p;
            }
            r
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.l == 1 {
            (a as u64 * b as u64 % self.p as u64) as Elem
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return None;
        }
        if self.l == 1 {
            mod_inverse(a as u128, self.p as u128).map(|x| x as Elem)
        } else {
            let order = self.q - 1;
            Some(self.exp[((order - self.log[a as usize]) % order) as usize])
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Elem, e: u128) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if self.l > 1 {
            let order = (self.q - 1) as u128;
            let t = (self.log[a as usize] as u128 * (e % order)) % order;
            return self.exp[t as usize];
        }
        let mut base = a;
        let mut acc = 1;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Embedding of the integers: `n · 1`.
    pub fn from_u128(&self, n: u128) -> Elem {
        (n % self.p as u128) as Elem
    }

    pub fn parse_elem(&self, s: &str) -> Result<Elem, GfError> {
        parse_element(self, s)
    }

    pub fn format_elem(&self, a: Elem) -> String {
        if self.l == 1 {
            return a.to_string();
        }
        let c = self.coeffs(a);
        let terms: Vec<String> = c
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| match (i, x) {
                (0, x) => x.to_string(),
                (1, 1) => "g".to_string(),
                (1, x) => format!("{x}g"),
                (i, 1) => format!("g^{i}"),
                (i, x) => format!("{x}g^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    }

    /// The set `{a^k : a in F_q}` in canonical order.
    pub fn kth_powers(&self, k: u128) -> Vec<Elem> {
        let d = gcd(k, (self.q - 1) as u128);
        let mut seen = vec![false; self.q as usize];
        for a in self.elements() {
            seen[self.pow(a, d) as usize] = true;
        }
        (0..self.q).filter(|&x| seen[x as usize]).collect()
    }

    pub fn is_kth_power(&self, a: Elem, k: u128) -> bool {
        if a == 0 {
            return true;
        }
        let d = gcd(k, (self.q - 1) as u128);
        self.pow(a, (self.q as u128 - 1) / d) == 1
    }

    /// Smallest `x` in canonical order with `x^k = a`.
    pub fn smallest_kth_root(&self, a: Elem, k: u128) -> Option<Elem> {
        self.elements().find(|&x| self.pow(x, k) == a)
    }
}

fn parse_element(field: &Field, s: &str) -> Result<Elem, GfError> {
    let bad = || GfError::BadLiteral(s.to_string());
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    if let Ok(n) = t.parse::<i64>() {
        return Ok(field.from_int(n));
    }
    let mut acc = 0;
    let mut rest = t.as_str();
    while !rest.is_empty() {
        let negative = rest.starts_with('-');
        if rest.starts_with('+') || rest.starts_with('-') {
            rest = &rest[1..];
        }
        let end = rest.find(['+', '-']).unwrap_or(rest.len());
        let term = &rest[..end];
        rest = &rest[end..];
        if term.is_empty() {
            return Err(bad());
        }
        let (coef, power) = match term.find('g') {
            None => (term.parse::<i64>().map_err(|_| bad())?, 0u32),
            Some(i) => {
                let c = term[..i].trim_end_matches('*');
                let c = if c.is_empty() { 1 } else { c.parse::<i64>().map_err(|_| bad())? };
                let e = &term[i + 1..];
                let e = if e.is_empty() {
                    1
                } else {
                    e.strip_prefix('^').ok_or_else(bad)?.parse::<u32>().map_err(|_| bad())?
                };
                (c, e)
            }
        };
        let mut term_val = field.pow(field.generator(), power as u128);
        term_val = field.mul(term_val, field.from_int(coef));
        if negative {
            term_val = field.neg(term_val);
        }
        acc = field.add(acc, term_val);
    }
    Ok(acc)
}

/// Parses `p^l` (or a bare prime `p`).
pub fn parse_field_spec(s: &str) -> Result<(u64, u32), GfError> {
    let bad = || GfError::BadSpec(s.to_string());
    let t = s.trim();
    match t.split_once('^') {
        Some((p, l)) => Ok((p.trim().parse().map_err(|_| bad())?, l.trim().parse().map_err(|_| bad())?)),
        None => Ok((t.parse().map_err(|_| bad())?, 1)),
    }
}

pub fn field_from_spec(s: &str) -> Result<FieldRef, GfError> {
    let (p, l) = parse_field_spec(s)?;
    build_field(p, l)
}

/// Lexicographically smallest monic irreducible of degree `l` over `base`,
/// comparing coefficient tuples `(c_0, ..., c_{l-1})` from `c_0`.
pub fn canonical_modulus(base: &Field, l: usize) -> Poly {
    let q = base.q() as u128;
    let total = q.pow(l as u32);
    for idx in 0..total {
        let mut coeffs = vec![0u32; l + 1];
        let mut rest = idx;
        for i in (0..l).rev() {
            coeffs[i] = (rest % q) as u32;
            rest /= q;
        }
        coeffs[l] = 1;
        let f = Poly::new(coeffs);
        if poly::is_irreducible(base, &f) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Split `k = k1 * k2` with `gcd(k2, q-1) = 1` and every prime of `k1` dividing `q-1`.
pub fn split_exponent(k: u128, q: u128) -> (u128, u128) {
    let mut k1 = 1;
    let mut k2 = k;
    loop {
        let g = gcd(k2, q - 1);
        if g == 1 {
            break;
        }
        k2 /= g;
        k1 *= g;
    }
    (k1, k2)
}

/// `gcd(k, q^m - 1)` without forming `q^m`.
pub fn gcd_k_qm_minus_one(k: u128, q: u128, m: u32) -> u128 {
    let mut r = 1u128 % k;
    for _ in 0..m {
        r = r * (q % k) % k;
    }
    gcd(k, (r + k - 1) % k)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ScalarWaringProfile {
    pub q: u32,
    pub k: u128,
    pub d: u128,
    /// `d_m` for `m = 1..=mmax`.
    pub d_m: Vec<u128>,
    pub residues: Vec<Elem>,
    pub gamma: u32,
    pub ell: u32,
    pub k1: u128,
    pub k2: u128,
}

/// Iterated sumsets `S, 2S, 3S, ...` of `base` until stable. Returns the
/// number of summands at which the chain stops growing and the final set.
pub fn sumset_closure(field: &Field, base: &[Elem]) -> (u32, Vec<bool>) {
    let q = field.q() as usize;
    let mut cur = vec![false; q];
    for &b in base {
        cur[b as usize] = true;
    }
    let mut steps = 1;
    loop {
        let mut next = cur.clone();
        for s in 0..q {
            if cur[s] {
                for &b in base {
                    next[field.add(s as Elem, b) as usize] = true;
                }
            }
        }
        if next == cur {
            return (steps, cur);
        }
        cur = next;
        steps += 1;
    }
}

pub fn scalar_profile(field: &Field, k: u128, mmax: u32) -> ScalarWaringProfile {
    assert!(k >= 1, "exponent must be positive");
    let q = field.q() as u128;
    let d = gcd(k, q - 1);
    let residues = field.kth_powers(d);
    let (gamma, closure) = sumset_closure(field, &residues);
    let size = closure.iter().filter(|&&b| b).count() as u128;
    let mut ell = 0;
    while (field.p() as u128).pow(ell) < size {
        ell += 1;
    }
    assert!(gamma as u128 <= d, "sumset chain must stabilise within d steps");
    let (k1, k2) = split_exponent(k, q);
    ScalarWaringProfile {
        q: field.q(),
        k,
        d,
        d_m: (1..=mmax).map(|m| gcd_k_qm_minus_one(k, q, m)).collect(),
        residues,
        gamma,
        ell,
        k1,
        k2,
    }
}

/// Finds `(x, y)` with `x^k + y^k = b`, `x` outside `excl_x`, `y` outside
/// `excl_y`, scanning `x` in canonical order and taking the smallest `y`.
pub fn two_power_solve(
    field: &Field,
    b: Elem,
    k: u128,
    excl_x: &BTreeSet<Elem>,
    excl_y: &BTreeSet<Elem>,
) -> Result<(Elem, Elem), GfError> {
    let q = field.q() as usize;
    let mut root_of = vec![u32::MAX; q];
    for y in field.elements() {
        if excl_y.contains(&y) {
            continue;
        }
        let v = field.pow(y, k) as usize;
        if root_of[v] == u32::MAX {
            root_of[v] = y;
        }
    }
    for x in field.elements() {
        if excl_x.contains(&x) {
            continue;
        }
        let need = field.sub(b, field.pow(x, k));
        let y = root_of[need as usize];
        if y != u32::MAX {
            return Ok((x, y));
        }
    }
    Err(GfError::NoSolution)
}

/// The hypothesis under which [`two_power_solve`] is guaranteed to succeed.
pub fn two_power_guaranteed(q: u128, d: u128, n1: u128, n2: u128) -> bool {
    let dm1 = d.saturating_sub(1);
    q > dm1.pow(4) + 2 * (n1 + n2) * d
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct JolyCount {
    pub count: u128,
    pub delta: u128,
    /// `|N_s(b) - q^{s-1}|`.
    pub residual: u128,
    /// Exact check of `residual <= delta * q^{(s-1)/2}`.
    pub within_bound: bool,
}

/// Value distributions `v -> #{x : a x^k = v}` for each term.
fn term_distribution(field: &Field, k: u128, a: Elem) -> Vec<u128> {
    let mut dist = vec![0u128; field.q() as usize];
    for x in field.elements() {
        dist[field.mul(a, field.pow(x, k)) as usize] += 1;
    }
    dist
}

fn convolve(field: &Field, f: &[u128], g: &[u128]) -> Vec<u128> {
    let mut out = vec![0u128; f.len()];
    for (a, &fa) in f.iter().enumerate() {
        if fa == 0 {
            continue;
        }
        for (b, &gb) in g.iter().enumerate() {
            if gb != 0 {
                out[field.add(a as Elem, b as Elem) as usize] += fa * gb;
            }
        }
    }
    out
}

/// Solution counts of `sum a_i x_i^{k_i} = b` for every right-hand side `b`.
pub fn joly_distribution(
    field: &Field,
    exponents: &[u128],
    coeffs: &[Elem],
    budget: u128,
) -> Result<Vec<u128>, GfError> {
    let s = exponents.len();
    if s < 2 || coeffs.len() != s {
        return Err(GfError::Invalid("need at least two terms with matching coefficients".into()));
    }
    if coeffs.contains(&0) {
        return Err(GfError::Invalid("coefficients must be nonzero".into()));
    }
    let needed = (field.q() as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(GfError::BudgetExceeded { needed, budget });
    }
    let mut acc = term_distribution(field, exponents[0], coeffs[0]);
    for i in 1..s {
        acc = convolve(field, &acc, &term_distribution(field, exponents[i], coeffs[i]));
    }
    Ok(acc)
}

/// Compares a count against the bound `Delta * q^{(s-1)/2}` exactly.
pub fn joly_bound_check(q: u128, s: u32, count: u128, exponents: &[u128]) -> JolyCount {
    let delta: u128 = exponents.iter().map(|&k| gcd(k, q - 1) - 1).product();
    let main = q.pow(s - 1);
    let residual = count.abs_diff(main);
    // residual^2 <= delta^2 q^{s-1}
    let within_bound = residual * residual <= delta * delta * main;
    JolyCount { count, delta, residual, within_bound }
}

pub fn joly_count(
    field: &Field,
    b: Elem,
    exponents: &[u128],
    coeffs: &[Elem],
    budget: u128,
) -> Result<JolyCount, GfError> {
    if b == 0 {
        return Err(GfError::Invalid("right-hand side must be nonzero".into()));
    }
    let dist = joly_distribution(field, exponents, coeffs, budget)?;
    Ok(joly_bound_check(field.q() as u128, exponents.len() as u32, dist[b as usize], exponents))
}

/// `F_{q^r}` realised as `F_q[y]/(h)` with `h` the canonical degree-`r`
/// modulus over `F_q`, together with its regular representation in `M_r(F_q)`.
#[derive(Debug, Clone)]
pub struct Extension {
    base: FieldRef,
    r: usize,
    modulus: Poly,
}

/// Element of an [`Extension`]: coordinates in the basis `1, y, ..., y^{r-1}`.
pub type ExtElem = Vec<Elem>;

pub fn embed_scalar(field: &FieldRef, r: usize) -> Extension {
    assert!(r >= 1, "extension degree must be positive");
    let modulus = if r == 1 { Poly::new(vec![0, 1]) } else { canonical_modulus(field, r) };
    Extension { base: field.clone(), r, modulus }
}

impl Extension {
    /// `F_q[y]/(h)` for a monic irreducible `h` of degree at least 1.
    pub fn with_modulus(field: &FieldRef, h: &Poly) -> Extension {
        assert!(h.is_monic() && h.degree() >= 1, "modulus must be monic of positive degree");
        Extension { base: field.clone(), r: h.degree(), modulus: h.clone() }
    }

    pub fn base(&self) -> &FieldRef {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.r
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn order(&self) -> u128 {
        (self.base.q() as u128).pow(self.r as u32)
    }

    /// Image of a base-field scalar.
    pub fn embed(&self, a: Elem) -> ExtElem {
        let mut v = vec![0; self.r];
        v[0] = a;
        v
    }

    pub fn one(&self) -> ExtElem {
        self.embed(1)
    }

    /// The `idx`-th element in the order `sum c_i q^i`.
    pub fn element(&self, idx: u128) -> ExtElem {
        let q = self.base.q() as u128;
        let mut rest = idx;
        (0..self.r)
            .map(|_| {
                let c = (rest % q) as Elem;
                rest /= q;
                c
            })
            .collect()
    }

    pub fn index(&self, a: &ExtElem) -> u128 {
        let q = self.base.q() as u128;
        a.iter().rev().fold(0u128, |acc, &c| acc * q + c as u128)
    }

    pub fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        a.iter().zip(b).map(|(&x, &y)| self.base.add(x, y)).collect()
    }

    pub fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        a.iter().zip(b).map(|(&x, &y)| self.base.sub(x, y)).collect()
    }

    pub fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let f = &*self.base;
        let prod = poly::mul(f, &Poly::new(a.clone()), &Poly::new(b.clone()));
        let rem = poly::rem(f, &prod, &self.modulus);
        let mut out = rem.coeffs;
        out.resize(self.r, 0);
        out
    }

    pub fn pow(&self, a: &ExtElem, mut e: u128) -> ExtElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, a: &ExtElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// Matrix of multiplication by `a` in the basis `1, y, ..., y^{r-1}`.
    pub fn to_matrix(&self, a: &ExtElem) -> Mat {
        let mut m = Mat::zero(&self.base, self.r);
        let mut basis = self.one();
        let y = if self.r == 1 { self.embed(0) } else { self.element(self.base.q() as u128) };
        for j in 0..self.r {
            let col = self.mul(a, &basis);
            for (i, &c) in col.iter().enumerate() {
                m.set(i, j, c);
            }
            if self.r > 1 {
                basis = self.mul(&basis, &y);
            }
        }
        m
    }

    /// Degree of `a` over the base field (size of the smallest subfield containing it).
    pub fn degree_of(&self, a: &ExtElem) -> usize {
        let q = self.base.q() as u128;
        let mut cur = a.clone();
        for s in 1..=self.r {
            cur = self.pow(&cur, q);
            if &cur == a {
                return s;
            }
        }
        self.r
    }

    /// `x^k + y^k = b` over the extension, scanning `x` in index order;
    /// `nonzero` excludes `x = 0` and `y = 0`.
    pub fn two_power_solve(
        &self,
        b: &ExtElem,
        k: u128,
        nonzero: bool,
        budget: u128,
    ) -> Result<(ExtElem, ExtElem), GfError> {
        let size = self.order();
        if size > budget {
            return Err(GfError::BudgetExceeded { needed: size, budget });
        }
        let mut root_of = std::collections::HashMap::new();
        let start = if nonzero { 1 } else { 0 };
        for idx in start..size {
            let y = self.element(idx);
            root_of.entry(self.pow(&y, k)).or_insert(idx);
        }
        for idx in start..size {
            let x = self.element(idx);
            let need = self.sub(b, &self.pow(&x, k));
            if let Some(&yi) = root_of.get(&need) {
                return Ok((x, self.element(yi)));
            }
        }
        Err(GfError::NoSolution)
    }
}
