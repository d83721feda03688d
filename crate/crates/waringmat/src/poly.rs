//! Univariate polynomials over GF(q) and their factorization.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf::{Elem, Field, GfError};

/// Largest `q^deg` handled by trial division against enumerated monics.
pub const TRIAL_DIVISION_LIMIT: u128 = 1 << 20;

/// Coefficients low to high, no trailing zeros. The zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    pub coeffs: Vec<Elem>,
}

/// Degree first, then the coefficient tuple from the constant term up.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.len().cmp(&other.coeffs.len()).then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Elem>) -> Poly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { coeffs: vec![1] }
    }

    /// `x`.
    pub fn x() -> Poly {
        Poly { coeffs: vec![0, 1] }
    }

    /// `x - a`.
    pub fn linear(field: &Field, a: Elem) -> Poly {
        Poly::new(vec![field.neg(a), 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Elem {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// The `idx`-th monic polynomial of degree `deg` in canonical order.
    pub fn monic_from_index(field: &Field, deg: usize, idx: u128) -> Poly {
        let q = field.q() as u128;
        let mut coeffs = vec![0; deg + 1];
        let mut rest = idx;
        for i in (0..deg).rev() {
            coeffs[i] = (rest % q) as Elem;
            rest /= q;
        }
        coeffs[deg] = 1;
        Poly { coeffs }
    }

    pub fn display(&self, field: &Field) -> String {
        format_poly(field, self)
    }
}

pub fn add(field: &Field, a: &Poly, b: &Poly) -> Poly {
    let n = a.coeffs.len().max(b.coeffs.len());
    Poly::new((0..n).map(|i| field.add(a.coeff(i), b.coeff(i))).collect())
}

pub fn sub(field: &Field, a: &Poly, b: &Poly) -> Poly {
    let n = a.coeffs.len().max(b.coeffs.len());
    Poly::new((0..n).map(|i| field.sub(a.coeff(i), b.coeff(i))).collect())
}

pub fn scale(field: &Field, a: &Poly, c: Elem) -> Poly {
    Poly::new(a.coeffs.iter().map(|&x| field.mul(x, c)).collect())
}

pub fn mul(field: &Field, a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let mut out = vec![0; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.coeffs.iter().enumerate() {
            out[i + j] = field.add(out[i + j], field.mul(x, y));
        }
    }
    Poly::new(out)
}

pub fn divrem(field: &Field, a: &Poly, b: &Poly) -> (Poly, Poly) {
    assert!(!b.is_zero(), "polynomial division by zero");
    if a.coeffs.len() < b.coeffs.len() {
        return (Poly::zero(), a.clone());
    }
    let inv_lead = field.inv(b.lead()).expect("nonzero leading coefficient");
    let db = b.degree();
    let mut r = a.coeffs.clone();
    let mut quot = vec![0; a.coeffs.len() - db];
    for i in (0..quot.len()).rev() {
        let c = field.mul(r[i + db], inv_lead);
        quot[i] = c;
        if c != 0 {
            for (j, &bj) in b.coeffs.iter().enumerate() {
                r[i + j] = field.sub(r[i + j], field.mul(c, bj));
            }
        }
    }
    r.truncate(db);
    (Poly::new(quot), Poly::new(r))
}

pub fn rem(field: &Field, a: &Poly, b: &Poly) -> Poly {
    divrem(field, a, b).1
}

pub fn make_monic(field: &Field, a: &Poly) -> Poly {
    if a.is_zero() {
        return Poly::zero();
    }
    scale(field, a, field.inv(a.lead()).unwrap())
}

/// Monic gcd (zero if both inputs vanish).
pub fn gcd(field: &Field, a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = rem(field, &a, &b);
        a = b;
        b = r;
    }
    make_monic(field, &a)
}

pub fn derivative(field: &Field, a: &Poly) -> Poly {
    Poly::new(
        a.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| field.mul(field.from_u128(i as u128), c))
            .collect(),
    )
}

pub fn mulmod(field: &Field, a: &Poly, b: &Poly, m: &Poly) -> Poly {
    rem(field, &mul(field, a, b), m)
}

pub fn pow_mod(field: &Field, a: &Poly, mut e: u128, m: &Poly) -> Poly {
    let mut base = rem(field, a, m);
    let mut acc = rem(field, &Poly::one(), m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(field, &acc, &base, m);
        }
        base = mulmod(field, &base, &base, m);
        e >>= 1;
    }
    acc
}

pub fn pow(field: &Field, a: &Poly, e: u32) -> Poly {
    (0..e).fold(Poly::one(), |acc, _| mul(field, &acc, a))
}

pub fn eval(field: &Field, a: &Poly, x: Elem) -> Elem {
    a.coeffs.iter().rev().fold(0, |acc, &c| field.add(field.mul(acc, x), c))
}

/// Ben-Or irreducibility test.
pub fn is_irreducible(field: &Field, f: &Poly) -> bool {
    let deg = f.degree();
    if f.is_zero() || deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    let f = make_monic(field, f);
    let q = field.q() as u128;
    let mut h = rem(field, &Poly::x(), &f);
    for _ in 0..deg / 2 {
        h = pow_mod(field, &h, q, &f);
        let g = gcd(field, &sub(field, &h, &Poly::x()), &f);
        if g.degree() > 0 {
            return false;
        }
    }
    true
}

/// Irreducible monic factors with multiplicities, sorted by [`Poly`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn product(&self, field: &Field) -> Poly {
        self.factors.iter().fold(Poly::one(), |acc, (f, m)| mul(field, &acc, &pow(field, f, *m)))
    }
}

pub fn factor(field: &Field, f: &Poly) -> Factorization {
    factor_seeded(field, f, 0)
}

/// Complete factorization of a monic polynomial. Uses trial division when
/// `q^deg` is small, otherwise squarefree + distinct-degree + equal-degree
/// splitting driven by a ChaCha stream seeded with `seed`.
pub fn factor_seeded(field: &Field, f: &Poly, seed: u64) -> Factorization {
    assert!(f.is_monic(), "factor expects a monic polynomial");
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    if f.degree() == 0 {
        return Factorization { factors };
    }
    let q = field.q() as u128;
    let small = q.checked_pow(f.degree() as u32).is_some_and(|v| v <= TRIAL_DIVISION_LIMIT);
    if small {
        trial_division(field, f, &mut factors);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (g, mult) in squarefree_decomposition(field, f) {
            for (deg, part) in distinct_degree(field, &g) {
                for irr in equal_degree(field, &part, deg, &mut rng) {
                    factors.push((irr, mult));
                }
            }
        }
    }
    factors.sort();
    let mut merged: Vec<(Poly, u32)> = Vec::new();
    for (p, m) in factors {
        match merged.last_mut() {
            Some((last, lm)) if *last == p => *lm += m,
            _ => merged.push((p, m)),
        }
    }
    Factorization { factors: merged }
}

fn trial_division(field: &Field, f: &Poly, out: &mut Vec<(Poly, u32)>) {
    let q = field.q() as u128;
    let mut rest = f.clone();
    let mut deg = 1;
    while 2 * deg <= rest.degree() {
        let count = q.pow(deg as u32);
        for idx in 0..count {
            if 2 * deg > rest.degree() {
                break;
            }
            let cand = Poly::monic_from_index(field, deg, idx);
            let mut m = 0;
            loop {
                let (quot, r) = divrem(field, &rest, &cand);
                if !r.is_zero() {
                    break;
                }
                rest = quot;
                m += 1;
            }
            if m > 0 {
                out.push((cand, m));
            }
        }
        deg += 1;
    }
    if rest.degree() > 0 {
        out.push((rest, 1));
    }
}

/// `f^(1/p)` for a polynomial with `f' = 0`.
fn pth_root(field: &Field, f: &Poly) -> Poly {
    let p = field.p() as usize;
    let e = (field.q() / field.p()) as u128;
    Poly::new(f.coeffs.iter().step_by(p).map(|&c| field.pow(c, e)).collect())
}

/// Yun-style squarefree decomposition in characteristic `p`.
pub fn squarefree_decomposition(field: &Field, f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    let df = derivative(field, f);
    if df.is_zero() {
        for (g, m) in squarefree_decomposition(field, &pth_root(field, f)) {
            out.push((g, m * field.p()));
        }
        return out;
    }
    let mut c = gcd(field, f, &df);
    let mut w = divrem(field, f, &c).0;
    let mut i = 1;
    while w.degree() > 0 {
        let y = gcd(field, &w, &c);
        let z = divrem(field, &w, &y).0;
        if z.degree() > 0 {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = divrem(field, &c, &w).0;
    }
    if c.degree() > 0 {
        for (g, m) in squarefree_decomposition(field, &pth_root(field, &c)) {
            out.push((g, m * field.p()));
        }
    }
    out
}

fn distinct_degree(field: &Field, f: &Poly) -> Vec<(usize, Poly)> {
    let mut out = Vec::new();
    let mut rest = f.clone();
    let q = field.q() as u128;
    let mut h = rem(field, &Poly::x(), &rest);
    let mut i = 0;
    while rest.degree() >= 2 * (i + 1) {
        i += 1;
        h = pow_mod(field, &h, q, &rest);
        let g = gcd(field, &sub(field, &h, &Poly::x()), &rest);
        if g.degree() > 0 {
            out.push((i, g.clone()));
            rest = divrem(field, &rest, &g).0;
            h = rem(field, &h, &rest);
        }
    }
    if rest.degree() > 0 {
        out.push((rest.degree(), rest));
    }
    out
}

fn equal_degree(field: &Field, f: &Poly, deg: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    if f.degree() == deg {
        return vec![f.clone()];
    }
    let q = field.q() as u128;
    loop {
        let a = Poly::new((0..f.degree()).map(|_| rng.gen_range(0..field.q())).collect());
        if a.degree() == 0 {
            continue;
        }
        let g = if field.p() == 2 {
            // trace map a + a^2 + ... + a^(2^(l deg - 1))
            let mut t = a.clone();
            let mut acc = a.clone();
            for _ in 1..(field.l() as usize * deg) {
                t = mulmod(field, &t, &t, f);
                acc = add(field, &acc, &t);
            }
            gcd(field, &acc, f)
        } else {
            let e = (q.pow(deg as u32) - 1) / 2;
            let b = pow_mod(field, &a, e, f);
            gcd(field, &sub(field, &b, &Poly::one()), f)
        };
        if g.degree() > 0 && g.degree() < f.degree() {
            let other = divrem(field, f, &g).0;
            let mut out = equal_degree(field, &g, deg, rng);
            out.extend(equal_degree(field, &other, deg, rng));
            return out;
        }
    }
}

/// Product of the distinct irreducible factors.
pub fn squarefree_part(field: &Field, f: &Poly) -> Poly {
    let monic = make_monic(field, f);
    factor(field, &monic).factors.iter().fold(Poly::one(), |acc, (g, _)| mul(field, &acc, g))
}

pub fn format_poly(field: &Field, f: &Poly) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let wrap = |s: String| if s.contains('+') { format!("({s})") } else { s };
    let terms: Vec<String> = f
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| {
            let cs = wrap(field.format_elem(c));
            match (i, c) {
                (0, _) => cs,
                (1, 1) => "x".to_string(),
                (1, _) => format!("{cs} x"),
                (_, 1) => format!("x^{i}"),
                _ => format!("{cs} x^{i}"),
            }
        })
        .collect();
    terms.join(" + ")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Parses `c0 + c1 x + ... + x^d`; coefficients are element literals,
/// optionally parenthesised.
pub fn parse_poly(field: &Field, s: &str) -> Result<Poly, GfError> {
    let bad = || GfError::BadLiteral(s.to_string());
    let mut coeffs: Vec<Elem> = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    let chars: Vec<char> = s.chars().collect();
    let mut terms = Vec::new();
    for (i, &ch) in chars.iter().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                terms.push(chars[start..i].iter().collect::<String>());
                start = i + 1;
            }
            _ => {}
        }
    }
    terms.push(chars[start..].iter().collect::<String>());
    for term in terms {
        let t = term.trim();
        if t.is_empty() {
            return Err(bad());
        }
        let (coef_str, power) = match t.rfind('x') {
            Some(i) => {
                let e = t[i + 1..].trim();
                let e = if e.is_empty() {
                    1
                } else {
                    e.strip_prefix('^').ok_or_else(bad)?.trim().parse::<usize>().map_err(|_| bad())?
                };
                (t[..i].trim().trim_end_matches('*').trim(), e)
            }
            None => (t, 0),
        };
        let inner = coef_str.trim_start_matches('(').trim_end_matches(')');
        let c = match inner {
            "" => 1,
            "-" => field.neg(1),
            lit => field.parse_elem(lit)?,
        };
        if coeffs.len() <= power {
            coeffs.resize(power + 1, 0);
        }
        coeffs[power] = field.add(coeffs[power], c);
    }
    Ok(Poly::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    #[test]
    fn small_factorizations() {
        let f2 = build_field(2, 1).unwrap();
        let f = Poly::new(vec![1, 1, 1]);
        assert!(is_irreducible(&f2, &f));
        assert_eq!(factor(&f2, &f).factors, vec![(f.clone(), 1)]);
        let g = Poly::new(vec![1, 0, 1]);
        assert_eq!(factor(&f2, &g).factors, vec![(Poly::new(vec![1, 1]), 2)]);
        let f3 = build_field(3, 1).unwrap();
        let h = Poly::new(vec![0, 2, 0, 1]);
        let fac = factor(&f3, &h);
        assert_eq!(fac.factors.len(), 3);
        assert!(fac.factors.iter().all(|(p, m)| p.degree() == 1 && *m == 1));
    }

    #[test]
    fn gcd_and_squarefree() {
        let f5 = build_field(5, 1).unwrap();
        let a = Poly::new(vec![4, 0, 1]);
        let b = Poly::new(vec![4, 1]);
        assert_eq!(gcd(&f5, &a, &b), b);
        let cube = pow(&f5, &b, 3);
        assert_eq!(squarefree_part(&f5, &cube), b);
    }

    #[test]
    fn randomized_path_matches_trial_division() {
        let f = build_field(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let deg = rng.gen_range(13..18);
            let mut c: Vec<Elem> = (0..deg).map(|_| rng.gen_range(0..3)).collect();
            c.push(1);
            let p = Poly::new(c);
            let fac = factor(&f, &p);
            assert_eq!(fac.product(&f), p);
            assert!(fac.factors.iter().all(|(g, _)| is_irreducible(&f, g)));
        }
    }

    #[test]
    fn parse_round_trip() {
        let f = build_field(3, 2).unwrap();
        let p = Poly::new(vec![5, 0, 1, 1]);
        let s = format_poly(&f, &p);
        assert_eq!(parse_poly(&f, &s).unwrap(), p);
        let f2 = build_field(2, 1).unwrap();
        assert_eq!(parse_poly(&f2, "1 + x + x^2").unwrap(), Poly::new(vec![1, 1, 1]));
    }
}
