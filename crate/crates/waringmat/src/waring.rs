//! Decomposing a matrix as `B^k + C^k`.
//!
//! [`decompose`] tries the constructive strategies in a fixed order and falls
//! back to exhaustive search when the matrix space is small enough. Every
//! returned decomposition is recomputed and its certificate rechecked before
//! it leaves this module.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::canon::{self, GjForm};
use crate::census;
use crate::config::Config;
use crate::cyclic::{self, CyclicError};
use crate::gf::{self, Elem, Extension, Field, FieldRef};
use crate::lift::{self, LiftError};
use crate::matgf::{Mat, MatError};
use crate::poly::{self, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WaringError {
    #[error("not decomposable ({citation})")]
    NotDecomposable { citation: String },
    #[error("unsupported: {reason}")]
    Unsupported { reason: String },
    #[error("hypothesis failed: {reason}")]
    HypothesisFailed { reason: String },
    #[error("no admissible block partition")]
    NoPartition,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

fn hypothesis(reason: impl Into<String>) -> WaringError {
    WaringError::HypothesisFailed { reason: reason.into() }
}

fn require(ok: bool, reason: &str) -> Result<(), WaringError> {
    if ok {
        Ok(())
    } else {
        Err(hypothesis(reason))
    }
}

/// Structural requirement on both roots `B` and `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    None,
    Invertible,
    Semisimple,
    SplitSemisimple,
    InvertibleSemisimple,
    InvertibleCyclic,
    IdempotentSummands,
}

impl Constraint {
    pub const ALL: [Constraint; 7] = [
        Constraint::None,
        Constraint::Invertible,
        Constraint::Semisimple,
        Constraint::SplitSemisimple,
        Constraint::InvertibleSemisimple,
        Constraint::InvertibleCyclic,
        Constraint::IdempotentSummands,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constraint::None => "NONE",
            Constraint::Invertible => "INVERTIBLE",
            Constraint::Semisimple => "SEMISIMPLE",
            Constraint::SplitSemisimple => "SPLIT_SEMISIMPLE",
            Constraint::InvertibleSemisimple => "INVERTIBLE_SEMISIMPLE",
            Constraint::InvertibleCyclic => "INVERTIBLE_CYCLIC",
            Constraint::IdempotentSummands => "IDEMPOTENT_SUMMANDS",
        }
    }

    /// Census flag bits every root must carry.
    pub fn mask(self) -> u8 {
        match self {
            Constraint::None => 0,
            Constraint::Invertible => census::INVERTIBLE,
            Constraint::Semisimple => census::SEMISIMPLE,
            Constraint::SplitSemisimple => census::SPLIT_SEMISIMPLE,
            Constraint::InvertibleSemisimple => census::INVERTIBLE | census::SEMISIMPLE,
            Constraint::InvertibleCyclic => census::INVERTIBLE | census::CYCLIC,
            Constraint::IdempotentSummands => census::IDEMPOTENT,
        }
    }

    pub fn requires_invertible(self) -> bool {
        self.mask() & census::INVERTIBLE != 0
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constraint {
    type Err = WaringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Constraint::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| WaringError::InvalidInput(format!("unknown constraint {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SummandFlags {
    pub invertible: bool,
    pub semisimple: bool,
    pub split_semisimple: bool,
    pub cyclic: bool,
    pub idempotent: bool,
}

impl SummandFlags {
    pub fn from_bits(bits: u8) -> SummandFlags {
        SummandFlags {
            invertible: bits & census::INVERTIBLE != 0,
            semisimple: bits & census::SEMISIMPLE != 0,
            split_semisimple: bits & census::SPLIT_SEMISIMPLE != 0,
            cyclic: bits & census::CYCLIC != 0,
            idempotent: bits & census::IDEMPOTENT != 0,
        }
    }

    pub fn bits(&self) -> u8 {
        let mut b = 0;
        for (set, bit) in [
            (self.invertible, census::INVERTIBLE),
            (self.semisimple, census::SEMISIMPLE),
            (self.split_semisimple, census::SPLIT_SEMISIMPLE),
            (self.cyclic, census::CYCLIC),
            (self.idempotent, census::IDEMPOTENT),
        ] {
            if set {
                b |= bit;
            }
        }
        b
    }

    /// Flags from one block-structure computation plus a direct idempotent check.
    pub fn of(m: &Mat) -> SummandFlags {
        let key = canon::structure(m);
        let bits = census::flags_of_key(&key, m.field().neg(1)) & !census::IDEMPOTENT;
        let mut out = SummandFlags::from_bits(bits);
        out.idempotent = m.is_idempotent();
        out
    }

    pub fn satisfies(&self, c: Constraint) -> bool {
        self.bits() & c.mask() == c.mask()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    #[serde(rename = "B")]
    pub b: SummandFlags,
    #[serde(rename = "C")]
    pub c: SummandFlags,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub b: Mat,
    pub c: Mat,
    pub k: u128,
    pub strategy: String,
    pub certificate: Certificate,
}

pub(crate) fn exponent_json(k: u128) -> Value {
    match u64::try_from(k) {
        Ok(v) => json!(v),
        Err(_) => json!(k.to_string()),
    }
}

impl Decomposition {
    pub fn to_json(&self) -> Value {
        json!({
            "B": self.b.to_json(),
            "C": self.c.to_json(),
            "k": exponent_json(self.k),
            "strategy": self.strategy,
            "certificate": serde_json::to_value(self.certificate).expect("flags serialize"),
        })
    }

    pub fn to_text(&self) -> String {
        let flags = |f: &SummandFlags| {
            let names = [
                (f.invertible, "invertible"),
                (f.semisimple, "semisimple"),
                (f.split_semisimple, "split-semisimple"),
                (f.cyclic, "cyclic"),
                (f.idempotent, "idempotent"),
            ];
            let set: Vec<&str> = names.iter().filter(|(s, _)| *s).map(|(_, n)| *n).collect();
            if set.is_empty() {
                "-".to_string()
            } else {
                set.join(", ")
            }
        };
        format!(
            "strategy: {}\nk: {}\nB: {}\n{}\nC: {}\n{}\n",
            self.strategy,
            self.k,
            flags(&self.certificate.b),
            self.b.to_text(),
            flags(&self.certificate.c),
            self.c.to_text()
        )
    }
}

/// Recomputes `B^k + C^k` and every certificate flag from the predicates.
pub fn verify_decomposition(a: &Mat, k: u128, dec: &Decomposition, c: Constraint) -> bool {
    if dec.k != k || dec.b.n() != a.n() || dec.c.n() != a.n() || dec.b.field() != a.field() {
        return false;
    }
    if dec.b.field() != dec.c.field() || dec.b.pow(k).add(&dec.c.pow(k)) != *a {
        return false;
    }
    let (fb, fc) = (census::flags_of(&dec.b), census::flags_of(&dec.c));
    fb == dec.certificate.b.bits()
        && fc == dec.certificate.c.bits()
        && fb & c.mask() == c.mask()
        && fc & c.mask() == c.mask()
}

/// Checks `B^k + C^k = A`, aborting on a mismatch; `None` when the roots miss the constraint.
fn finish(a: &Mat, k: u128, c: Constraint, b: Mat, cm: Mat, strategy: &str) -> Option<Decomposition> {
    let sum = b.pow(k).add(&cm.pow(k));
    assert!(
        sum == *a,
        "strategy {strategy} produced B^k + C^k != A for k = {k}\nA =\n{}\nB =\n{}\nC =\n{}",
        a.to_text(),
        b.to_text(),
        cm.to_text()
    );
    let certificate = Certificate { b: SummandFlags::of(&b), c: SummandFlags::of(&cm) };
    if !certificate.b.satisfies(c) || !certificate.c.satisfies(c) {
        return None;
    }
    Some(Decomposition { b, c: cm, k, strategy: strategy.to_string(), certificate })
}

pub fn decompose(a: &Mat, k: u128, c: Constraint) -> Result<Decomposition, WaringError> {
    decompose_with(a, k, c, &Config::default())
}

struct Ctx<'a> {
    a: &'a Mat,
    k: u128,
    c: Constraint,
    cfg: &'a Config,
    field: FieldRef,
    p: u32,
    q: u32,
    d: u128,
}

type Attempt = Result<(Mat, Mat, &'static str), WaringError>;

pub fn decompose_with(a: &Mat, k: u128, c: Constraint, cfg: &Config) -> Result<Decomposition, WaringError> {
    if k == 0 {
        return Err(WaringError::InvalidInput("k must be positive".into()));
    }
    if a.n() == 0 {
        return Err(WaringError::InvalidInput("matrix must be nonempty".into()));
    }
    let field = a.field().clone();
    let n = a.n();
    if c == Constraint::IdempotentSummands {
        return idempotent_route(a, k, cfg);
    }
    if c == Constraint::None {
        if let (Some(compl), Some(label)) =
            (census::table_complement(field.p(), field.l(), n, k), census::class_label(a))
        {
            if let Some((_, cite)) = compl.iter().find(|(l, _)| *l == label) {
                return Err(WaringError::NotDecomposable { citation: cite.to_string() });
            }
        }
    }
    let mut notes: Vec<String> = Vec::new();
    if k == 1 {
        if let Some(d) = finish(a, k, c, a.clone(), Mat::zero(&field, n), "trivial") {
            return Ok(d);
        }
    }
    if let Some(d) = lp_pattern(a, k, c) {
        return Ok(d);
    }
    if a.is_scalar() {
        match decompose_scalar(&field, a.get(0, 0), n, k, c, cfg) {
            Ok(d) => return Ok(d),
            Err(e) => notes.push(format!("scalar: {e}")),
        }
    } else {
        let cx = Ctx {
            a,
            k,
            c,
            cfg,
            field: field.clone(),
            p: field.p(),
            q: field.q(),
            d: gf::gcd(k, field.q() as u128 - 1),
        };
        let plan: Vec<fn(&Ctx) -> Attempt> = match c {
            Constraint::None => vec![thm2a, thm3, thm2b, generic_lu, thm7, cyclic_trace],
            Constraint::Invertible => vec![thm2a, thm4, thm2c, generic_lu],
            Constraint::Semisimple | Constraint::SplitSemisimple => vec![thm2b, thm7, cyclic_trace],
            Constraint::InvertibleSemisimple => vec![thm2c, thm5b],
            Constraint::InvertibleCyclic => vec![thm5a],
            Constraint::IdempotentSummands => unreachable!("handled above"),
        };
        for attempt in plan {
            match attempt(&cx) {
                Ok((b, cm, tag)) => match finish(a, k, c, b, cm, tag) {
                    Some(d) => return Ok(d),
                    None => notes.push(format!("{tag}: roots miss the constraint")),
                },
                Err(e) => notes.push(e.to_string()),
            }
        }
    }
    if let Some(res) = exhaustive(a, k, c, cfg) {
        return res;
    }
    Err(WaringError::Unsupported {
        reason: format!(
            "no strategy applies to this {n}x{n} matrix over GF({}) with k = {k}, constraint {c}; space exceeds the census budget ({})",
            field.q(),
            notes.join("; ")
        ),
    })
}

fn idempotent_route(a: &Mat, k: u128, cfg: &Config) -> Result<Decomposition, WaringError> {
    let c = Constraint::IdempotentSummands;
    if a.is_idempotent() {
        if let Some(d) = finish(a, k, c, a.clone(), Mat::zero(a.field(), a.n()), "idempotent") {
            return Ok(d);
        }
    }
    if let Some(d) = lp_pattern(a, k, c) {
        return Ok(d);
    }
    if let Some(res) = exhaustive(a, k, c, cfg) {
        return res;
    }
    Err(WaringError::Unsupported { reason: "no idempotent construction and the space exceeds the census budget".into() })
}

/// `[[1, x], [-1, 1]] = [[1, 0], [-1, 0]] + [[0, x], [0, 1]]`, both idempotent.
fn lp_pattern(a: &Mat, k: u128, c: Constraint) -> Option<Decomposition> {
    let f = a.field();
    if a.n() != 2 || a.get(0, 0) != 1 || a.get(1, 1) != 1 || a.get(1, 0) != f.neg(1) {
        return None;
    }
    let b = Mat::from_rows(f, &[vec![1, 0], vec![f.neg(1), 0]]);
    let cm = Mat::from_rows(f, &[vec![0, a.get(0, 1)], vec![0, 1]]);
    finish(a, k, c, b, cm, "LP")
}

fn exhaustive(a: &Mat, k: u128, c: Constraint, cfg: &Config) -> Option<Result<Decomposition, WaringError>> {
    let sp = census::space(a.field(), a.n(), cfg.budget).ok()?;
    let (kk, mask) = if c == Constraint::IdempotentSummands { (1, census::IDEMPOTENT) } else { (k, c.mask()) };
    let img = sp.image(kk, mask);
    let target = sp.index(a);
    for s in img.set.ones() {
        let t = sp.sub_index(target, s);
        if img.set.get(t) {
            let b = sp.matrix(img.root[s] as usize);
            let cm = sp.matrix(img.root[t] as usize);
            let d = finish(a, k, c, b, cm, "exhaustive").expect("census roots carry the requested flags");
            return Some(Ok(d));
        }
    }
    Some(Err(WaringError::NotDecomposable { citation: "exhaustive search".into() }))
}

// ---------------------------------------------------------------- helpers

fn lower_with_diag(a: &Mat, diag: &[Elem]) -> Mat {
    let mut m = Mat::zero(a.field(), a.n());
    for i in 0..a.n() {
        for j in 0..i {
            m.set(i, j, a.get(i, j));
        }
        m.set(i, i, diag[i]);
    }
    m
}

fn upper_with_diag(a: &Mat, diag: &[Elem]) -> Mat {
    let mut m = Mat::zero(a.field(), a.n());
    for i in 0..a.n() {
        for j in i + 1..a.n() {
            m.set(i, j, a.get(i, j));
        }
        m.set(i, i, diag[i]);
    }
    m
}

/// `g^{-1} X g` for each of the two matrices.
fn pull_back(g: &Mat, x: &Mat, y: &Mat) -> Result<(Mat, Mat), WaringError> {
    let gi = g.inverse()?;
    Ok((gi.mul(x).mul(g), gi.mul(y).mul(g)))
}

/// Roots given per generalized Jordan block, moved back to the basis of `A`.
fn assemble(form: &GjForm, bs: &[Mat], cs: &[Mat]) -> Result<(Mat, Mat), WaringError> {
    let field = form.source.field();
    pull_back(&form.transform, &Mat::block_diag(field, bs), &Mat::block_diag(field, cs))
}

fn power_table(field: &Field, k: u128) -> Vec<bool> {
    let mut t = vec![false; field.q() as usize];
    for v in field.kth_powers(k) {
        t[v as usize] = true;
    }
    t
}

fn sum_of(field: &Field, v: &[Elem]) -> Elem {
    v.iter().fold(0, |acc, &x| field.add(acc, x))
}

fn smallest_roots(field: &Field, v: &[Elem], k: u128) -> Vec<Elem> {
    v.iter().map(|&x| field.smallest_kth_root(x, k).expect("plan entries are k-th powers")).collect()
}

fn primitive_element(field: &Field) -> Elem {
    let order = field.q() as u128 - 1;
    let factors = gf::prime_factors(order);
    field
        .nonzero()
        .find(|&c| factors.iter().all(|&r| field.pow(c, order / r) != 1))
        .expect("multiplicative group is cyclic")
}

/// `base^exp > bound`, without overflow.
fn pow_exceeds(base: u128, exp: usize, bound: u128) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base) {
            Some(v) => v,
            None => return true,
        };
        if acc > bound {
            return true;
        }
    }
    acc > bound
}

/// `n > 4 ln(k-1) / ln q`, i.e. `q^n > (k-1)^4`; always true for `k <= 2`.
fn log_bound_holds(q: u128, n: usize, k: u128) -> bool {
    if k <= 2 {
        return true;
    }
    match (k - 1).checked_pow(4) {
        Some(b) => pow_exceeds(q, n, b),
        None => false,
    }
}

// ---------------------------------------------------------------- scalar

/// `x^k + y^k = a` in `F_q`, with both nonzero when asked.
fn scalar_pair(field: &Field, a: Elem, k: u128, nonzero: bool) -> Option<(Elem, Elem)> {
    let excl: BTreeSet<Elem> = if nonzero { [0].into() } else { BTreeSet::new() };
    gf::two_power_solve(field, a, k, &excl, &excl).ok()
}

const EXTENSION_CAP: u128 = 1 << 16;

/// Roots `(X, Y)` of size `r` with `X^k + Y^k = a I_r`.
fn scalar_block(field: &FieldRef, a: Elem, r: usize, k: u128, nonzero: bool, cfg: &Config) -> Option<(Mat, Mat, bool)> {
    let cap = cfg.budget.min(EXTENSION_CAP);
    let ext = gf::embed_scalar(field, r);
    if ext.order() <= cap {
        if let Ok((x, y)) = ext.two_power_solve(&ext.embed(a), k, nonzero, cap) {
            return Some((ext.to_matrix(&x), ext.to_matrix(&y), false));
        }
    }
    let q = field.q() as u128;
    let (k1, k2) = gf::split_exponent(k, q);
    if k1 as usize != r || k1 < 2 {
        return None;
    }
    let s = gf::mod_inverse(k2 % (q - 1), q - 1)?;
    let root = |v: Elem| canon::companion(field, &Poly::new(vec![field.neg(field.pow(v, s)), 0].into_iter().chain(std::iter::repeat_n(0, r - 2)).chain([1]).collect()));
    if !nonzero {
        return Some((root(a), Mat::zero(field, r), true));
    }
    let u = field.nonzero().find(|&u| u != a)?;
    Some((root(u), root(field.sub(a, u)), true))
}

/// Decomposes `a I_n` by a block partition of `n`.
pub fn decompose_scalar(
    field: &FieldRef,
    a: Elem,
    n: usize,
    k: u128,
    c: Constraint,
    cfg: &Config,
) -> Result<Decomposition, WaringError> {
    if n == 0 || k == 0 {
        return Err(WaringError::InvalidInput("n and k must be positive".into()));
    }
    let target = Mat::scalar(field, n, a);
    match c {
        Constraint::IdempotentSummands => {
            let (x, y) = match a {
                0 => (0, 0),
                1 => (1, 0),
                _ if a == field.from_int(2) => (1, 1),
                _ => return Err(WaringError::NoPartition),
            };
            let b = Mat::scalar(field, n, x);
            let cm = Mat::scalar(field, n, y);
            return finish(&target, k, c, b, cm, "idempotent").ok_or(WaringError::NoPartition);
        }
        Constraint::InvertibleCyclic => return scalar_distinct(field, a, n, k, &target),
        _ => {}
    }
    let nonzero = c.requires_invertible();
    let tag = if nonzero { "constQ" } else { "const" };
    if let Some((x, y)) = scalar_pair(field, a, k, nonzero) {
        let b = Mat::scalar(field, n, x);
        let cm = Mat::scalar(field, n, y);
        return finish(&target, k, c, b, cm, tag).ok_or(WaringError::NoPartition);
    }
    if c == Constraint::SplitSemisimple {
        return Err(WaringError::NoPartition);
    }
    let mut blocks: Vec<Option<(Mat, Mat, bool)>> = vec![None; n + 1];
    for r in 2..=n {
        blocks[r] = scalar_block(field, a, r, k, nonzero, cfg);
        if blocks[r].is_none() {
            continue;
        }
        // coin change over the feasible sizes
        let mut from = vec![usize::MAX; n + 1];
        from[0] = 0;
        for total in 1..=n {
            for s in 2..=r {
                if blocks[s].is_some() && s <= total && from[total - s] != usize::MAX {
                    from[total] = s;
                    break;
                }
            }
        }
        if from[n] == usize::MAX {
            continue;
        }
        let (mut bs, mut cs, mut companion) = (Vec::new(), Vec::new(), false);
        let mut rest = n;
        while rest > 0 {
            let s = from[rest];
            let (x, y, kd) = blocks[s].clone().expect("feasible size");
            bs.push(x);
            cs.push(y);
            companion |= kd;
            rest -= s;
        }
        let tag = if companion { "kdivn" } else { tag };
        let b = Mat::block_diag(field, &bs);
        let cm = Mat::block_diag(field, &cs);
        return finish(&target, k, c, b, cm, tag).ok_or(WaringError::NoPartition);
    }
    Err(WaringError::NoPartition)
}

/// Distinct nonzero diagonal pairs, so both roots are cyclic.
fn scalar_distinct(field: &FieldRef, a: Elem, n: usize, k: u128, target: &Mat) -> Result<Decomposition, WaringError> {
    let mut xs = Vec::new();
    let mut ys: Vec<Elem> = Vec::new();
    for x in field.nonzero() {
        if xs.len() == n {
            break;
        }
        let need = field.sub(a, field.pow(x, k));
        if let Some(y) = field.nonzero().find(|&y| !ys.contains(&y) && field.pow(y, k) == need) {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.len() < n {
        return Err(WaringError::NoPartition);
    }
    let b = Mat::diag(field, &xs);
    let cm = Mat::diag(field, &ys);
    finish(target, k, Constraint::InvertibleCyclic, b, cm, "constQ").ok_or(WaringError::NoPartition)
}

// ---------------------------------------------------------------- d = 1

/// Lower plus upper triangular split with unit-adjusted diagonal; roots by order.
fn thm2a(cx: &Ctx) -> Attempt {
    require(cx.d == 1 && cx.q >= 3 && !cx.k.is_multiple_of(cx.p as u128), "thm2a needs d = 1, q >= 3 and p not dividing k")?;
    let f = &*cx.field;
    let b = f.elements().find(|&x| x != 0 && x != 1).expect("q >= 3");
    let diag = cx.a.diagonal();
    let u: Vec<Elem> = diag.iter().map(|&x| if x != 1 { 1 } else { b }).collect();
    let ld: Vec<Elem> = diag.iter().zip(&u).map(|(&x, &y)| f.sub(x, y)).collect();
    let l = lower_with_diag(cx.a, &ld);
    let up = upper_with_diag(cx.a, &u);
    Ok((lift::root_by_order(&l, cx.k)?, lift::root_by_order(&up, cx.k)?, "thm2a"))
}

fn thm2b(cx: &Ctx) -> Attempt {
    require(cx.d == 1 && cx.q >= 3, "thm2b needs d = 1 and q >= 3")?;
    let (b, c) = blockwise_split(cx, false)?;
    Ok((b, c, "thm2b"))
}

fn thm2c(cx: &Ctx) -> Attempt {
    require(cx.d == 1 && cx.q >= 4, "thm2c needs d = 1 and q >= 4")?;
    let (b, c) = blockwise_split(cx, true)?;
    Ok((b, c, "thm2c"))
}

fn thm7(cx: &Ctx) -> Attempt {
    require(cx.d > 1 && thm7_holds(cx.q as u128, cx.d), "thm7 needs q >= (d-1)^4 + 6d")?;
    let (b, c) = blockwise_split(cx, false)?;
    Ok((b, c, "thm7"))
}

fn thm7_holds(q: u128, d: u128) -> bool {
    q >= (d - 1).pow(4) + 6 * d
}

fn blockwise_split(cx: &Ctx, invertible: bool) -> Result<(Mat, Mat), WaringError> {
    let form = canon::gj_form(cx.a);
    let (mut bs, mut cs) = (Vec::new(), Vec::new());
    for (f, m) in &form.blocks {
        let j = canon::gj_block_unchecked(&cx.field, f, *m as usize);
        let (x, y) = split_semisimple_pair_seeded(&j, cx.k, invertible, cx.cfg.seed)?;
        bs.push(x);
        cs.push(y);
    }
    assemble(&form, &bs, &cs)
}

/// Whether the lower/upper split of a cyclic matrix with diagonals `e`, `u`
/// gives two split-semisimple summands (and invertible ones when asked).
pub fn decompex_ok(e: &[Elem], u: &[Elem], invertible: bool) -> bool {
    let n = e.len();
    if u.len() != n || n == 0 {
        return false;
    }
    if invertible && e.iter().chain(u).any(|&x| x == 0) {
        return false;
    }
    for i in 0..n - 1 {
        if cyclic::lower_subdiagonal_one(n, i) {
            if e[i] == e[i + 1] {
                return false;
            }
        } else if i + 1 < n - 1 && u[i] == u[i + 1] {
            return false;
        }
    }
    !u[..n - 1].contains(&u[n - 1])
}

/// `(a, -a, b, -b, ..., c, t - c)` searched over `a, b, c`.
fn abc_vectors(field: &Field, t: Elem, s: usize, invertible: bool) -> Option<(Vec<Elem>, Vec<Elem>)> {
    let admissible = |x: Elem| !invertible || x != 0;
    if s == 1 {
        let c = field.elements().find(|&c| admissible(c) && admissible(field.sub(t, c)))?;
        return Some((vec![c], vec![field.sub(t, c)]));
    }
    for a in field.elements().filter(|&x| admissible(x)) {
        for b in field.elements().filter(|&x| x != a && admissible(x)) {
            for c in field.elements() {
                let mut e: Vec<Elem> = (0..s - 1).map(|j| if j % 2 == 0 { a } else { b }).collect();
                let mut u: Vec<Elem> = e.iter().map(|&x| field.neg(x)).collect();
                e.push(c);
                u.push(field.sub(t, c));
                if decompex_ok(&e, &u, invertible) {
                    return Some((e, u));
                }
            }
        }
    }
    None
}

/// Unit pattern with one free pair at the end; entries are `k`-th powers.
fn power_vectors(field: &Field, t: Elem, s: usize, is_pow: &[bool], seed: u64) -> Option<(Vec<Elem>, Vec<Elem>)> {
    let pw = |x: Elem| is_pow[x as usize];
    if s == 1 {
        let c = field.elements().find(|&c| pw(c) && pw(field.sub(t, c)))?;
        return Some((vec![c], vec![field.sub(t, c)]));
    }
    let mut e = Vec::with_capacity(s);
    let mut u = Vec::with_capacity(s);
    for j in 0..s - 1 {
        let one_in_e = if s % 2 == 1 { j % 2 == 0 } else { j % 2 == 1 };
        e.push(if one_in_e { 1 } else { 0 });
        u.push(if one_in_e { 0 } else { 1 });
    }
    let rest = field.sub(t, field.from_int((s - 1) as i64));
    for c in field.nonzero().filter(|&c| pw(c)) {
        let g = field.sub(rest, c);
        if pw(g) && g != 0 && g != 1 {
            let (mut e2, mut u2) = (e.clone(), u.clone());
            e2.push(c);
            u2.push(g);
            if decompex_ok(&e2, &u2, false) {
                return Some((e2, u2));
            }
        }
    }
    let powers: Vec<Elem> = field.elements().filter(|&x| pw(x)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2000 {
        let mut e: Vec<Elem> = (0..s - 1).map(|_| powers[rng.gen_range(0..powers.len())]).collect();
        let mut u: Vec<Elem> = (0..s - 1).map(|_| powers[rng.gen_range(0..powers.len())]).collect();
        let rest = field.sub(t, field.add(sum_of(field, &e), sum_of(field, &u)));
        if let Some(c) = powers.iter().copied().find(|&c| {
            let g = field.sub(rest, c);
            pw(g) && !u.contains(&g) && (s < 2 || e[s - 2] != c || !cyclic::lower_subdiagonal_one(s, s - 2))
        }) {
            e.push(c);
            u.push(field.sub(rest, c));
            if decompex_ok(&e, &u, false) {
                return Some((e, u));
            }
        }
    }
    None
}

/// Roots `(X, Y)` split semisimple with `X^k + Y^k = A` for cyclic `A`.
pub fn split_semisimple_pair(a: &Mat, k: u128, invertible: bool) -> Result<(Mat, Mat), WaringError> {
    split_semisimple_pair_seeded(a, k, invertible, 0)
}

fn split_semisimple_pair_seeded(a: &Mat, k: u128, invertible: bool, seed: u64) -> Result<(Mat, Mat), WaringError> {
    if k == 0 {
        return Err(WaringError::InvalidInput("k must be positive".into()));
    }
    if !a.is_cyclic() {
        return Err(WaringError::InvalidInput("matrix is not cyclic".into()));
    }
    let field = a.field().clone();
    let q = field.q() as u128;
    let d = gf::gcd(k, q - 1);
    let t = a.trace();
    let s = a.n();
    let (e, u) = if d == 1 {
        if invertible {
            require(q >= 4, "invertible split-semisimple pairs need q >= 4 when d = 1")?;
        } else {
            require(q >= 3, "split-semisimple pairs need q >= 3 when d = 1")?;
        }
        abc_vectors(&field, t, s, invertible).ok_or_else(|| hypothesis("no admissible (a, b, c)"))?
    } else {
        require(!invertible, "invertible split-semisimple pairs are only constructed for d = 1")?;
        require(thm7_holds(q, d), "q >= (d-1)^4 + 6d fails")?;
        let is_pow = power_table(&field, k);
        power_vectors(&field, t, s, &is_pow, seed).ok_or_else(|| hypothesis("no admissible diagonal pair"))?
    };
    realize_cyclic(a, &e, &u, k)
}

/// Lower/upper split of a cyclic matrix followed by diagonalizable roots.
fn realize_cyclic(a: &Mat, e: &[Elem], u: &[Elem], k: u128) -> Result<(Mat, Mat), WaringError> {
    let split = cyclic::cyclic_lu_split(a, e, u)?;
    let x = lift::diagonalizable_root(&split.b, k)?;
    let y = lift::diagonalizable_root(&split.c, k)?;
    pull_back(&split.g, &x, &y)
}

// ---------------------------------------------------------------- q = 2

fn thm3(cx: &Ctx) -> Attempt {
    require(cx.q == 2 && cx.k % 2 == 1, "thm3 needs q = 2 and k odd")?;
    let form = canon::gj_form(cx.a);
    let (mut bs, mut cs) = (Vec::new(), Vec::new());
    for (f, m) in &form.blocks {
        let (x, y) = thm3_block(&cx.field, f, *m as usize, cx.k)?;
        bs.push(x);
        cs.push(y);
    }
    let (b, c) = assemble(&form, &bs, &cs)?;
    Ok((b, c, "thm3"))
}

/// Roots of the lower and upper parts of `J_{f,m}`.
fn thm3_block(field: &FieldRef, f: &Poly, m: usize, k: u128) -> Result<(Mat, Mat), WaringError> {
    let r = f.degree();
    let coef: Vec<Elem> = (0..r).map(|i| field.neg(f.coeff(i))).collect();
    let mut l = Mat::zero(field, r);
    for i in 0..r {
        l.set(i, i, 1);
        if i > 0 {
            l.set(i, i - 1, 1);
        }
    }
    l.set(r - 1, r - 1, field.sub(coef[r - 1], 1));
    let mut u = Mat::identity(field, r);
    for i in 0..r - 1 {
        u.set(i, r - 1, coef[i]);
    }
    let mut big_u = Mat::zero(field, r * m);
    for b in 0..m {
        big_u.set_block(b * r, &u);
        if b + 1 < m {
            for i in 0..r {
                big_u.set(b * r + i, (b + 1) * r + i, 1);
            }
        }
    }
    let lroot = lift::triangular_kth_root(&l, k)?;
    let uroot = lift::triangular_kth_root(&big_u, k)?;
    Ok((Mat::block_diag(field, &vec![lroot; m]), uroot))
}

/// `X + Y = m` with `X, Y` in `GL_2(F_2)`.
fn split_gl2(m: &Mat) -> Option<(Mat, Mat)> {
    let f = m.field();
    (0..16u128).map(|i| Mat::from_index(f, 2, i)).find_map(|x| {
        let y = m.sub(&x);
        (x.is_invertible() && y.is_invertible()).then_some((x, y))
    })
}

/// Block lower/upper split into `2 x 2` invertible diagonal blocks.
fn thm4(cx: &Ctx) -> Attempt {
    require(cx.q == 2 && gf::gcd(cx.k, 6) == 1, "thm4 needs q = 2 and gcd(k, 6) = 1")?;
    let a = cx.a;
    let f = &cx.field;
    let n = a.n();
    let g = if n.is_multiple_of(2) || a.get(n - 1, n - 1) == 0 {
        Mat::identity(f, n)
    } else if let Some(i) = (0..n).find(|&i| a.get(i, i) == 0) {
        let mut perm = Mat::identity(f, n);
        perm.set(i, i, 0);
        perm.set(n - 1, n - 1, 0);
        perm.set(i, n - 1, 1);
        perm.set(n - 1, i, 1);
        perm
    } else if a.is_scalar() {
        return Err(hypothesis("odd-size identity has no zero diagonal entry"));
    } else {
        let mut u = vec![1; n];
        u[n - 1] = 0;
        u[n - 2] = f.sub(a.trace(), f.from_int(n as i64 - 2));
        cyclic::quasi_cyclic_with_diagonal(a, &u)?
    };
    let ap = a.conjugate(&g)?;
    let block = |i: usize| if i >= n - n % 2 { n / 2 } else { i / 2 };
    let mut l = Mat::zero(f, n);
    let mut u = Mat::zero(f, n);
    for i in 0..n {
        for j in 0..n {
            if block(i) > block(j) {
                l.set(i, j, ap.get(i, j));
            } else if block(i) < block(j) {
                u.set(i, j, ap.get(i, j));
            }
        }
    }
    for s in (0..n - n % 2).step_by(2) {
        let (x, y) = split_gl2(&ap.block(s, 2)).expect("every 2x2 matrix over GF(2) is a sum of two invertibles");
        l.set_block(s, &x);
        u.set_block(s, &y);
    }
    if n % 2 == 1 {
        l.set(n - 1, n - 1, 1);
        u.set(n - 1, n - 1, 1);
    }
    let x = lift::root_by_order(&l, cx.k)?;
    let y = lift::root_by_order(&u, cx.k)?;
    let (b, c) = pull_back(&g, &x, &y)?;
    Ok((b, c, "thm4"))
}

// ---------------------------------------------------------------- k = 1 style pairs

/// Root of a summand for `k > 1`, when its order is coprime to `k`.
fn lift_pair(b: Mat, c: Mat, k: u128) -> Result<(Mat, Mat), WaringError> {
    if k == 1 {
        return Ok((b, c));
    }
    Ok((lift::root_by_order(&b, k)?, lift::root_by_order(&c, k)?))
}

fn thm5a(cx: &Ctx) -> Attempt {
    let (b, c) = invertible_cyclic_pair(cx.a, cx.cfg.seed)?;
    let (x, y) = lift_pair(b, c, cx.k)?;
    Ok((x, y, "thm5a"))
}

fn thm5b(cx: &Ctx) -> Attempt {
    let (b, c) = invertible_semisimple_pair(cx.a)?;
    let (x, y) = lift_pair(b, c, cx.k)?;
    Ok((x, y, "thm5b"))
}

pub const CYCLIC_PAIR_ATTEMPTS: usize = 10_000;

/// `B + C = A` with both invertible and cyclic, by seeded rejection sampling.
pub fn invertible_cyclic_pair(a: &Mat, seed: u64) -> Result<(Mat, Mat), WaringError> {
    let field = a.field();
    let q = field.q();
    require(q >= 3, "invertible cyclic pairs need q >= 3")?;
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CYCLIC_PAIR_ATTEMPTS {
        let data: Vec<Elem> = (0..n * n).map(|_| rng.gen_range(0..q)).collect();
        let b = Mat::from_data(field, n, data);
        if !b.is_invertible() || !b.is_cyclic() {
            continue;
        }
        let c = a.sub(&b);
        if c.is_invertible() && c.is_cyclic() {
            return Ok((b, c));
        }
    }
    Err(WaringError::Unsupported { reason: format!("no invertible cyclic pair in {CYCLIC_PAIR_ATTEMPTS} samples") })
}

/// `B + C = A` with both invertible and semisimple, built per generalized Jordan block.
pub fn invertible_semisimple_pair(a: &Mat) -> Result<(Mat, Mat), WaringError> {
    let field = a.field().clone();
    require(field.q() >= 3, "invertible semisimple pairs need q >= 3")?;
    let form = canon::gj_form(a);
    let (mut bs, mut cs) = (Vec::new(), Vec::new());
    for (f, m) in &form.blocks {
        let (b, c) = semisimple_block_pair(&field, f, *m as usize);
        bs.push(b);
        cs.push(c);
    }
    assemble(&form, &bs, &cs)
}

fn semisimple_block_pair(field: &FieldRef, f: &Poly, m: usize) -> (Mat, Mat) {
    let r = f.degree();
    if r == 1 {
        return jordan_pair(field, field.neg(f.coeff(0)), m);
    }
    let ext = Extension::with_modulus(field, f);
    let alpha = ext.element(field.q() as u128);
    let zero = ext.embed(0);
    let one = ext.one();
    let beta2 = (2..ext.order()).map(|i| ext.element(i)).find(|x| *x != alpha && *x != one).expect("extension has more than 3 elements");
    let betas = [one, beta2];
    let mut b = Mat::zero(field, r * m);
    let mut c = Mat::zero(field, r * m);
    for i in 0..m {
        let beta = &betas[i % 2];
        b.set_block(i * r, &ext.to_matrix(beta));
        c.set_block(i * r, &ext.to_matrix(&ext.sub(&alpha, beta)));
        if i + 1 < m {
            let target = if i % 2 == 0 { &mut b } else { &mut c };
            for t in 0..r {
                target.set(i * r + t, (i + 1) * r + t, 1);
            }
        }
    }
    debug_assert!(!ext.is_zero(&ext.sub(&alpha, &zero)));
    (b, c)
}

/// `J_{x-a,m} = B + C` with both invertible and semisimple, `q >= 3`.
fn jordan_pair(field: &FieldRef, a: Elem, m: usize) -> (Mat, Mat) {
    let q = field.q();
    if q >= 4 || a == 0 {
        let mut betas = field.elements().filter(|&x| x != 0 && x != a);
        let b1 = betas.next().expect("two admissible values");
        let b2 = betas.next().expect("two admissible values");
        let mut b = Mat::zero(field, m);
        let mut c = Mat::zero(field, m);
        for i in 0..m {
            let beta = if i % 2 == 0 { b1 } else { b2 };
            b.set(i, i, beta);
            c.set(i, i, field.sub(a, beta));
            if i + 1 < m {
                if i % 2 == 0 {
                    b.set(i, i + 1, 1);
                } else {
                    c.set(i, i + 1, 1);
                }
            }
        }
        return (b, c);
    }
    assert_eq!(q, 3, "jordan_pair needs q >= 3");
    let (b1, c1) = ternary_unit_pair(field, m);
    if a == 1 {
        return (b1, c1);
    }
    // 2 J_{x-1,m} is similar to J_{x-2,m} via diag(2^i)
    let two = field.from_int(2);
    let scale: Vec<Elem> = (0..m).map(|i| field.pow(two, i as u128)).collect();
    let g = Mat::diag(field, &scale);
    let gi = g.inverse().expect("diagonal of units");
    (g.mul(&b1.scale(two)).mul(&gi), g.mul(&c1.scale(two)).mul(&gi))
}

fn ternary_rows(field: &FieldRef, rows: &[&[i64]]) -> Mat {
    Mat::from_ints(field, rows)
}

/// `B_3` invertible semisimple with `J_{x-1,3} - B_3` of irreducible
/// characteristic polynomial, first in enumeration order.
fn ternary_odd_block(field: &FieldRef) -> Mat {
    static INDEX: OnceLock<u128> = OnceLock::new();
    let j3 = canon::gj_block_unchecked(field, &Poly::new(vec![2, 1]), 3);
    let idx = *INDEX.get_or_init(|| {
        (0..3u128.pow(9))
            .find(|&i| {
                let b = Mat::from_index(field, 3, i);
                let c = j3.sub(&b);
                b.is_invertible() && b.is_semisimple() && poly::is_irreducible(field, &c.char_poly())
            })
            .expect("an admissible 3x3 block exists")
    });
    Mat::from_index(field, 3, idx)
}

/// `J_{x-1,m} = B + C` over `F_3` with both invertible and semisimple.
fn ternary_unit_pair(field: &FieldRef, m: usize) -> (Mat, Mat) {
    let j = canon::gj_block_unchecked(field, &Poly::new(vec![2, 1]), m);
    if m == 1 {
        return (Mat::scalar(field, 1, 2), Mat::scalar(field, 1, 2));
    }
    let b2 = ternary_rows(field, &[&[0, 1], &[1, 2]]);
    let head = m % 2 * 3;
    let mut b = Mat::zero(field, m);
    if head == 3 {
        b.set_block(0, &ternary_odd_block(field));
    }
    for s in (head..m).step_by(2) {
        b.set_block(s, &b2);
    }
    let c = j.sub(&b);
    (b, c)
}

// ---------------------------------------------------------------- trace plans

/// Named diagonal-planning patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceStrategy {
    Ones,
    Thm8,
    Thm9,
    Thm9b,
    Thm10,
    Thm16,
    Thm18,
    Nlarge,
    Generic,
}

impl TraceStrategy {
    pub const ALL: [TraceStrategy; 9] = [
        TraceStrategy::Ones,
        TraceStrategy::Thm8,
        TraceStrategy::Thm9,
        TraceStrategy::Thm9b,
        TraceStrategy::Thm10,
        TraceStrategy::Thm16,
        TraceStrategy::Thm18,
        TraceStrategy::Nlarge,
        TraceStrategy::Generic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceStrategy::Ones => "ones",
            TraceStrategy::Thm8 => "thm8",
            TraceStrategy::Thm9 => "thm9",
            TraceStrategy::Thm9b => "thm9b",
            TraceStrategy::Thm10 => "thm10",
            TraceStrategy::Thm16 => "thm16",
            TraceStrategy::Thm18 => "thm18",
            TraceStrategy::Nlarge => "nlarge",
            TraceStrategy::Generic => "generic",
        }
    }
}

impl FromStr for TraceStrategy {
    type Err = WaringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase();
        TraceStrategy::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| WaringError::InvalidInput(format!("unknown trace strategy {s:?}")))
    }
}

/// How a plan is realized: triangular roots after prescribing the diagonal,
/// or the lower/upper split of a cyclic matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanLayout {
    Triangular,
    CyclicLu,
}

/// Diagonals `b` (first summand) and `c` (second) of `k`-th powers with
/// `sum b_i + sum c_i = t`, and their smallest roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracePlan {
    pub strategy: TraceStrategy,
    pub layout: PlanLayout,
    pub b: Vec<Elem>,
    pub c: Vec<Elem>,
    pub b_roots: Vec<Elem>,
    pub c_roots: Vec<Elem>,
}

impl TracePlan {
    fn new(field: &Field, strategy: TraceStrategy, layout: PlanLayout, b: Vec<Elem>, c: Vec<Elem>, k: u128) -> TracePlan {
        let b_roots = smallest_roots(field, &b, k);
        let c_roots = smallest_roots(field, &c, k);
        TracePlan { strategy, layout, b, c, b_roots, c_roots }
    }

    pub fn total(&self, field: &Field) -> Elem {
        field.add(sum_of(field, &self.b), sum_of(field, &self.c))
    }

    /// Diagonal of the sum.
    pub fn sums(&self, field: &Field) -> Vec<Elem> {
        self.b.iter().zip(&self.c).map(|(&x, &y)| field.add(x, y)).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Any,
    NonZero,
}

struct Values<'a> {
    field: &'a Field,
    is_pow: Vec<bool>,
    nonzero: Vec<Elem>,
}

impl<'a> Values<'a> {
    fn new(field: &'a Field, k: u128) -> Values<'a> {
        let is_pow = power_table(field, k);
        let nonzero = field.nonzero().filter(|&x| is_pow[x as usize]).collect();
        Values { field, is_pow, nonzero }
    }

    fn fits(&self, v: Elem, s: Slot) -> bool {
        self.is_pow[v as usize] && (s == Slot::Any || v != 0)
    }

    fn candidates(&self, s: Slot) -> impl Iterator<Item = Elem> + '_ {
        let zero = (s == Slot::Any).then_some(0);
        zero.into_iter().chain(self.nonzero.iter().copied())
    }

    fn pair(&self, target: Elem, s1: Slot, s2: Slot) -> Option<(Elem, Elem)> {
        self.candidates(s1).map(|v| (v, self.field.sub(target, v))).find(|&(_, w)| self.fits(w, s2))
    }

    /// Values for the slots summing to `target`: ones everywhere except a
    /// few trailing slots, then seeded random fills.
    fn solve(&self, slots: &[Slot], target: Elem, seed: u64) -> Option<Vec<Elem>> {
        let f = self.field;
        let len = slots.len();
        match len {
            0 => return (target == 0).then(Vec::new),
            1 => return self.fits(target, slots[0]).then(|| vec![target]),
            _ => {}
        }
        let mut out = vec![1; len];
        let rest = f.sub(target, f.from_int(len as i64 - 2));
        if let Some((x, y)) = self.pair(rest, slots[len - 2], slots[len - 1]) {
            out[len - 2] = x;
            out[len - 1] = y;
            return Some(out);
        }
        if len >= 3 {
            let base = f.sub(target, f.from_int(len as i64 - 3));
            for v in self.candidates(slots[len - 3]).take(4096) {
                if let Some((x, y)) = self.pair(f.sub(base, v), slots[len - 2], slots[len - 1]) {
                    out[len - 3] = v;
                    out[len - 2] = x;
                    out[len - 1] = y;
                    return Some(out);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            let mut acc = 0;
            for i in 0..len - 2 {
                let v = if slots[i] == Slot::Any && rng.gen_range(0..self.nonzero.len() + 1) == 0 {
                    0
                } else {
                    self.nonzero[rng.gen_range(0..self.nonzero.len())]
                };
                out[i] = v;
                acc = f.add(acc, v);
            }
            if let Some((x, y)) = self.pair(f.sub(target, acc), slots[len - 2], slots[len - 1]) {
                out[len - 2] = x;
                out[len - 1] = y;
                return Some(out);
            }
        }
        None
    }
}

/// Triangular plan with at most one zero on each diagonal (none if `nonzero`),
/// the possible zeros sitting in the last slot of each.
fn generic_plan(field: &Field, t: Elem, n: usize, k: u128, nonzero: bool, seed: u64, strategy: TraceStrategy) -> Option<TracePlan> {
    let vals = Values::new(field, k);
    let last = if nonzero { Slot::NonZero } else { Slot::Any };
    let mut slots = vec![Slot::NonZero; 2 * n - 2];
    slots.push(last);
    slots.push(last);
    let v = vals.solve(&slots, t, seed)?;
    let mut b: Vec<Elem> = v[..n - 1].to_vec();
    let mut c: Vec<Elem> = v[n - 1..2 * n - 2].to_vec();
    b.push(v[2 * n - 2]);
    c.push(v[2 * n - 1]);
    Some(TracePlan::new(field, strategy, PlanLayout::Triangular, b, c, k))
}

fn thm8_reason(field: &Field, k: u128) -> Option<&'static str> {
    let q = field.q() as u128;
    let p = field.p() as u128;
    let d = gf::gcd(k, q - 1);
    let d2 = gf::gcd_k_qm_minus_one(k, q, 2);
    let d3 = gf::gcd_k_qm_minus_one(k, q, 3);
    if k.is_multiple_of(p) {
        return Some("p divides k");
    }
    if q * q < (d - 1).pow(6) + 6 * d {
        return Some("q >= sqrt((d-1)^6 + 6d) fails");
    }
    if q < (d2 - 1).pow(2) + 1 {
        return Some("q >= (d_2 - 1)^2 + 1 fails");
    }
    if (d3 - 1).pow(4) >= q.pow(3) {
        return Some("q >= floor((d_3 - 1)^(4/3)) + 1 fails");
    }
    None
}

/// Splits the trace `t` of an `n x n` matrix into `2n` diagonal `k`-th powers
/// following the named pattern, after checking its numeric hypotheses.
pub fn plan_trace_split(field: &FieldRef, t: Elem, n: usize, k: u128, strategy: TraceStrategy) -> Result<TracePlan, WaringError> {
    plan_trace_split_seeded(field, t, n, k, strategy, 0)
}

pub fn plan_trace_split_seeded(
    field: &FieldRef,
    t: Elem,
    n: usize,
    k: u128,
    strategy: TraceStrategy,
    seed: u64,
) -> Result<TracePlan, WaringError> {
    if n == 0 || k == 0 {
        return Err(WaringError::InvalidInput("n and k must be positive".into()));
    }
    let f = &**field;
    let q = f.q() as u128;
    let p = f.p() as u128;
    let d = gf::gcd(k, q - 1);
    let coprime = !k.is_multiple_of(p);
    let none = || hypothesis("no plan found");
    let plan = match strategy {
        TraceStrategy::Ones => {
            let last = f.sub(t, f.from_int(2 * n as i64 - 1));
            require(f.is_kth_power(last, k), "t - (2n - 1) is not a k-th power")?;
            let b = vec![1; n];
            let mut c = vec![1; n];
            c[n - 1] = last;
            TracePlan::new(f, strategy, PlanLayout::Triangular, b, c, k)
        }
        TraceStrategy::Thm8 => {
            if let Some(r) = thm8_reason(f, k) {
                return Err(hypothesis(r));
            }
            thm8_plan(f, t, n, k, seed).ok_or_else(none)?
        }
        TraceStrategy::Thm9 => thm9_plan(f, t, n, k)?,
        TraceStrategy::Thm9b => thm9b_plan(f, t, n, k)?,
        TraceStrategy::Thm10 => {
            require(f.l() == 1, "thm10 needs q = p")?;
            require(p > d + 1, "p > d + 1 fails")?;
            require(coprime, "p divides k")?;
            require(2 * n as u128 > p - 1, "n > (p - 1)/2 fails")?;
            require(log_bound_holds(q, n, k), "n > 4 ln(k-1)/ln p fails")?;
            thm10_plan(f, t, n, k)
        }
        TraceStrategy::Thm16 => {
            require(q > d * d, "q > d^2 fails")?;
            require(coprime, "p divides k")?;
            require(p == 2 || p == 3, "thm16 needs p in {2, 3}")?;
            require(n > 3, "n > 3 fails")?;
            require(log_bound_holds(q, n, k), "n > 4 ln(k-1)/ln q fails")?;
            generic_plan(f, t, n, k, false, seed, strategy).ok_or_else(none)?
        }
        TraceStrategy::Thm18 => {
            require(p >= 5, "thm18 needs p >= 5")?;
            require(q > d * d, "q > d^2 fails")?;
            require(coprime, "p divides k")?;
            require(gf::gcd((q - 1) / d, p - 1) >= 2, "gcd((q-1)/d, p-1) >= 2 fails")?;
            require(2 * n as u128 > p * p - 3 * p + 9, "n > (p^2 - 3p + 9)/2 fails")?;
            require(log_bound_holds(q, n, k), "n > 4 ln(k-1)/ln q fails")?;
            generic_plan(f, t, n, k, false, seed, strategy).ok_or_else(none)?
        }
        TraceStrategy::Nlarge => {
            let ell = gf::scalar_profile(f, k, 1).ell;
            require(ell == f.l(), "the k-th powers do not span the field additively")?;
            require(coprime, "p divides k")?;
            let wide = q > 3 * d;
            let narrow = q == 2 * d + 1;
            require(wide || narrow, "q >= 3d + 1 or q = 2d + 1 fails")?;
            let holds = d == 2
                || (wide && d > 2 && 2 * n as u128 > d - 1 && log_bound_holds(q, n, k))
                || (narrow && n as u128 > 2 * d - 1 && log_bound_holds(q, n, k));
            require(holds, "the size bound on n fails")?;
            generic_plan(f, t, n, k, true, seed, strategy).ok_or_else(none)?
        }
        TraceStrategy::Generic => generic_plan(f, t, n, k, false, seed, strategy).ok_or_else(none)?,
    };
    assert_eq!(plan.total(f), t, "{} plan does not sum to the trace", strategy.name());
    Ok(plan)
}

/// Ones padding with four free slots, trying the branch with the first free value 1.
fn thm8_plan(f: &Field, t: Elem, n: usize, k: u128, seed: u64) -> Option<TracePlan> {
    if n == 1 {
        return generic_plan(f, t, 1, k, false, seed, TraceStrategy::Thm8);
    }
    let vals = Values::new(f, k);
    let rest = f.sub(t, f.from_int(2 * n as i64 - 4));
    let mut quad = None;
    'outer: for v2 in vals.candidates(Slot::Any) {
        let r = f.sub(f.sub(rest, 1), v2);
        if let Some((v3, v4)) = vals.pair(r, Slot::NonZero, Slot::NonZero) {
            quad = Some([1, v2, v3, v4]);
            break 'outer;
        }
    }
    let quad = match quad {
        Some(qd) => qd,
        None => {
            let v = vals.solve(&[Slot::NonZero, Slot::NonZero, Slot::Any, Slot::Any], rest, seed)?;
            [v[0], v[1], v[2], v[3]]
        }
    };
    let mut b = vec![1; n];
    let mut c = vec![1; n];
    b[n - 2] = quad[0];
    c[n - 2] = quad[1];
    b[n - 1] = quad[2];
    c[n - 1] = quad[3];
    Some(TracePlan::new(f, TraceStrategy::Thm8, PlanLayout::Triangular, b, c, k))
}

/// `2c - r` copies of a nonunit power `a` and ones elsewhere.
fn thm10_plan(f: &Field, t: Elem, n: usize, k: u128) -> TracePlan {
    let p = f.p() as i64;
    let a = f.kth_powers(k).into_iter().find(|&x| x != 0 && x != 1).expect("p > d + 1");
    let c = (p + 2) / 2;
    let base = f.sub(t, f.from_int(2 * (n as i64 - c)));
    let x = f.div(f.sub(base, f.mul(f.from_int(2 * c), a)), f.sub(1, a)).expect("a != 1");
    let r = x as i64;
    let copies = (2 * c - r) as usize;
    let mut v = vec![1; 2 * n];
    for slot in v.iter_mut().take(copies) {
        *slot = a;
    }
    let b = v[..n].to_vec();
    let cc = v[n..].to_vec();
    TracePlan::new(f, TraceStrategy::Thm10, PlanLayout::Triangular, b, cc, k)
}

/// Places `vals` (length `n - 1`) on the cyclic split diagonals: position `j`
/// (1-based) goes to the second summand iff `j = n mod 2`; the last pair is `(0, last)`.
fn cyclic_arrangement(n: usize, vals: &[Elem], last: Elem) -> (Vec<Elem>, Vec<Elem>) {
    let mut e = vec![0; n];
    let mut u = vec![0; n];
    for (j0, &v) in vals.iter().enumerate() {
        if (j0 + 1) % 2 == n % 2 {
            u[j0] = v;
        } else {
            e[j0] = v;
        }
    }
    u[n - 1] = last;
    (e, u)
}

/// Solves `sum w_i basis_i = target` with `0 <= w_i < p` by enumeration.
fn small_coordinates(f: &Field, basis: &[Elem], target: Elem) -> Option<Vec<u32>> {
    let p = f.p();
    let total = (p as u128).checked_pow(basis.len() as u32)?;
    if total > gf::MAX_TABLE_ORDER as u128 {
        return None;
    }
    for idx in 0..total {
        let mut rest = idx;
        let mut w = Vec::with_capacity(basis.len());
        let mut acc = 0;
        for &b in basis {
            let c = (rest % p as u128) as u32;
            rest /= p as u128;
            w.push(c);
            acc = f.add(acc, f.mul(f.from_int(c as i64), b));
        }
        if acc == target {
            return Some(w);
        }
    }
    None
}

fn thm9_plan(f: &Field, t: Elem, n: usize, k: u128) -> Result<TracePlan, WaringError> {
    let q = f.q() as u128;
    let p = f.p() as usize;
    let d = gf::gcd(k, q - 1);
    require(d != q - 1, "d != q - 1 fails")?;
    let o = ((q - 1) / d) as usize;
    let a = f.pow(primitive_element(f), d);
    let mut ell = 1usize;
    let mut probe = f.pow(a, p as u128);
    while probe != a {
        probe = f.pow(probe, p as u128);
        ell += 1;
    }
    let first = o != ell + 1 && n > ell * (p - 1);
    let second = o == ell + 1 && n > (ell + 1) * (p - 1);
    require(first || second, "n > l(p-1) with q-1 != d(l+1), or n > (l+1)(p-1), fails")?;
    require(f.pow(t, (p as u128).pow(ell as u32)) == t, "trace is outside the subfield spanned by the k-th powers")?;
    let nm1 = f.from_int(n as i64 - 1);
    let (vals, last) = if first {
        let b = f.pow(a, ell as u128 + 1);
        let basis: Vec<Elem> = (1..=ell).map(|i| f.sub(f.pow(a, i as u128), 1)).collect();
        let target = f.sub(f.sub(t, b), nm1);
        let w = small_coordinates(f, &basis, target).ok_or_else(|| hypothesis("no coordinates"))?;
        let mut vals = Vec::with_capacity(n - 1);
        for (i, &wi) in w.iter().enumerate() {
            vals.extend(std::iter::repeat_n(f.pow(a, i as u128 + 1), wi as usize));
        }
        let pad = n - 1 - vals.len();
        vals.extend(std::iter::repeat_n(1, pad));
        (vals, b)
    } else {
        let basis: Vec<Elem> = (1..=ell).map(|i| f.sub(f.pow(a, i as u128 + 1), a)).collect();
        let target = f.sub(f.sub(t, 1), f.mul(nm1, a));
        let w = small_coordinates(f, &basis, target).ok_or_else(|| hypothesis("no coordinates"))?;
        let ones = w[ell - 1] as usize;
        let mut others = Vec::new();
        for (i, &wi) in w.iter().enumerate().take(ell - 1) {
            others.extend(std::iter::repeat_n(f.pow(a, i as u128 + 2), wi as usize));
        }
        let pad = n - 1 - ones - others.len();
        others.extend(std::iter::repeat_n(a, pad));
        let mut vals = vec![0; n - 1];
        let (mut os, mut rest) = (ones, others.into_iter());
        for (j0, slot) in vals.iter_mut().enumerate() {
            let to_e = (j0 + 1) % 2 != n % 2;
            if to_e && os > 0 {
                *slot = 1;
                os -= 1;
            } else {
                *slot = rest.next().expect("counts add up");
            }
        }
        (vals, 1)
    };
    let (e, u) = cyclic_arrangement(n, &vals, last);
    if !decompex_ok(&e, &u, false) {
        return Err(hypothesis("arrangement violates the distinctness conditions"));
    }
    Ok(TracePlan::new(f, TraceStrategy::Thm9, PlanLayout::CyclicLu, e, u, k))
}

fn thm9b_plan(f: &Field, t: Elem, n: usize, k: u128) -> Result<TracePlan, WaringError> {
    let q = f.q() as u128;
    let p = f.p();
    let d = gf::gcd(k, q - 1);
    require(gf::gcd((q - 1) / d, p as u128 - 1) >= 3, "gcd((q-1)/d, p-1) >= 3 fails")?;
    require(n > p as usize - 1, "n > p - 1 fails")?;
    require(t < p, "trace is outside the prime field")?;
    let units: Vec<Elem> = (2..p).filter(|&x| f.is_kth_power(x, k)).collect();
    let (x1, x2) = (units[0], units[1]);
    let nn = n as i64;
    let pp = p as i64;
    let num = f.sub(f.sub(f.sub(t, x2), f.from_int(nn - pp)), f.mul(f.from_int(pp - 1), x1));
    let c = f.div(num, f.sub(1, x1)).expect("x1 != 1") as usize;
    let mut vals = vec![x1; p as usize - 1 - c];
    vals.extend(std::iter::repeat_n(1, n - p as usize + c));
    let (e, u) = cyclic_arrangement(n, &vals, x2);
    if !decompex_ok(&e, &u, false) {
        return Err(hypothesis("arrangement violates the distinctness conditions"));
    }
    Ok(TracePlan::new(f, TraceStrategy::Thm9b, PlanLayout::CyclicLu, e, u, k))
}

// ---------------------------------------------------------------- general p not dividing k

/// Prescribed diagonal, then lower/upper triangular roots.
fn realize_triangular(a: &Mat, plan: &TracePlan, k: u128) -> Result<(Mat, Mat), WaringError> {
    let f = a.field();
    let g = cyclic::quasi_cyclic_with_diagonal(a, &plan.sums(f))?;
    let ap = a.conjugate(&g)?;
    let l = lower_with_diag(&ap, &plan.b);
    let u = upper_with_diag(&ap, &plan.c);
    let x = lift::triangular_kth_root(&l, k)?;
    let y = lift::triangular_kth_root(&u, k)?;
    pull_back(&g, &x, &y)
}

fn generic_lu(cx: &Ctx) -> Attempt {
    require(!cx.k.is_multiple_of(cx.p as u128), "p divides k")?;
    let nonzero = cx.c.requires_invertible();
    let n = cx.a.n();
    let plan = generic_plan(&cx.field, cx.a.trace(), n, cx.k, nonzero, cx.cfg.seed, TraceStrategy::Generic)
        .ok_or_else(|| hypothesis("no diagonal plan with the required zero pattern"))?;
    let (b, c) = realize_triangular(cx.a, &plan, cx.k)?;
    let tag = if thm8_reason(&cx.field, cx.k).is_none() { "thm8" } else { "generalLU" };
    Ok((b, c, tag))
}

/// Cyclic `A` whose trace lies in a subfield reached by the period patterns.
fn cyclic_trace(cx: &Ctx) -> Attempt {
    require(cx.a.is_cyclic(), "matrix is not cyclic")?;
    let mut last = hypothesis("no cyclic trace pattern applies");
    for strategy in [TraceStrategy::Thm9, TraceStrategy::Thm9b] {
        match plan_trace_split_seeded(&cx.field, cx.a.trace(), cx.a.n(), cx.k, strategy, cx.cfg.seed) {
            Ok(plan) => {
                let (b, c) = realize_cyclic(cx.a, &plan.b, &plan.c, cx.k)?;
                return Ok((b, c, strategy.name()));
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    fn check(a: &Mat, k: u128, c: Constraint) -> Decomposition {
        let d = decompose(a, k, c).unwrap();
        assert!(verify_decomposition(a, k, &d, c));
        d
    }

    #[test]
    fn lp_pattern_example() {
        let f = build_field(5, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[1, 3], &[-1, 1]]);
        let d = check(&a, 7, Constraint::None);
        assert_eq!(d.strategy, "LP");
        assert_eq!(d.b, Mat::from_ints(&f, &[&[1, 0], &[-1, 0]]));
        assert_eq!(d.c, Mat::from_ints(&f, &[&[0, 3], &[0, 1]]));
    }

    #[test]
    fn binary_companion_cube() {
        let f = build_field(2, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[0, 1], &[1, 1]]);
        let d = check(&a, 3, Constraint::None);
        assert_eq!(d.strategy, "thm3");
        assert_eq!(d.b, Mat::from_ints(&f, &[&[1, 0], &[1, 0]]));
        assert_eq!(d.c, Mat::from_ints(&f, &[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn nilpotent_ternary_sixth_powers() {
        let f = build_field(3, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[0, 1], &[0, 0]]);
        assert_eq!(
            decompose(&a, 6, Constraint::None),
            Err(WaringError::NotDecomposable { citation: "Lemma 23class1".into() })
        );
    }

    #[test]
    fn scalar_examples() {
        let f3 = build_field(3, 1).unwrap();
        let d = check(&Mat::scalar(&f3, 2, 2), 2, Constraint::None);
        assert!(d.b.is_identity() && d.c.is_identity());
        let f4 = build_field(2, 2).unwrap();
        for a in 0..4 {
            let m = Mat::scalar(&f4, 3, a);
            check(&m, 3, Constraint::None);
        }
        let d = decompose_scalar(&f4, 2, 3, 3, Constraint::None, &Config::default()).unwrap();
        assert_eq!(d.strategy, "const");
        let z = check(&Mat::zero(&f4, 4), 5, Constraint::None);
        assert!(z.b.is_zero() && z.c.is_zero());
    }

    #[test]
    fn trace_plan_examples() {
        let f7 = build_field(7, 1).unwrap();
        let err = plan_trace_split(&f7, 5, 4, 3, TraceStrategy::Thm8).unwrap_err();
        assert!(matches!(err, WaringError::HypothesisFailed { ref reason } if reason.contains("(d-1)^6")));
        let ones = plan_trace_split(&f7, 3, 4, 1, TraceStrategy::Ones).unwrap();
        assert_eq!(ones.b, vec![1; 4]);
        assert_eq!(ones.c, vec![1, 1, 1, f7.from_int(3 - 7)]);
        let f37 = build_field(37, 1).unwrap();
        let plan = plan_trace_split(&f37, 0, 4, 3, TraceStrategy::Thm8).unwrap();
        assert_eq!(plan.b[2], 1);
        assert_ne!(plan.b[3], 0);
        assert_ne!(plan.c[3], 0);
        assert_eq!(plan.total(&f37), 0);
    }

    #[test]
    fn trace_plans_sum_to_trace() {
        for (p, l, k, n) in [(7, 1, 3, 12), (13, 1, 2, 10), (2, 2, 3, 6), (5, 2, 4, 9), (31, 1, 3, 20)] {
            let f = build_field(p, l).unwrap();
            for t in f.elements() {
                for s in TraceStrategy::ALL {
                    if let Ok(plan) = plan_trace_split(&f, t, n, k, s) {
                        assert_eq!(plan.total(&f), t);
                        assert_eq!(plan.b.len(), n);
                        for (x, r) in plan.b.iter().zip(&plan.b_roots).chain(plan.c.iter().zip(&plan.c_roots)) {
                            assert_eq!(f.pow(*r, k), *x);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn split_pair_hypothesis_failure() {
        let f = build_field(3, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[2, 1], &[0, 2]]);
        assert!(matches!(split_semisimple_pair(&a, 1, true), Err(WaringError::HypothesisFailed { .. })));
        let (x, y) = split_semisimple_pair(&a, 1, false).unwrap();
        assert!(x.is_split_semisimple() && y.is_split_semisimple());
        assert_eq!(x.add(&y), a);
    }

    #[test]
    fn ternary_jordan_pairs_are_semisimple() {
        let f = build_field(3, 1).unwrap();
        for a in 0..3 {
            for m in 1..=9 {
                let j = canon::gj_block_unchecked(&f, &Poly::linear(&f, a), m);
                let (b, c) = jordan_pair(&f, a, m);
                assert_eq!(b.add(&c), j, "a = {a}, m = {m}");
                for x in [&b, &c] {
                    assert!(x.is_invertible() && x.is_semisimple(), "a = {a}, m = {m}\n{}", x.to_text());
                }
            }
        }
    }

    #[test]
    fn invertible_pairs() {
        let f = build_field(3, 1).unwrap();
        let (b, c) = invertible_cyclic_pair(&Mat::identity(&f, 2), 0).unwrap();
        assert_eq!(b.add(&c), Mat::identity(&f, 2));
        let (b, c) = invertible_cyclic_pair(&Mat::zero(&f, 3), 0).unwrap();
        assert_eq!(c, b.neg());
        let f2 = build_field(2, 1).unwrap();
        assert!(matches!(invertible_cyclic_pair(&Mat::zero(&f2, 2), 0), Err(WaringError::HypothesisFailed { .. })));
        assert!(matches!(invertible_semisimple_pair(&Mat::zero(&f2, 2)), Err(WaringError::HypothesisFailed { .. })));
        let f4 = build_field(2, 2).unwrap();
        let j = canon::gj_block_unchecked(&f4, &Poly::new(vec![2, 1, 1]), 3);
        let (b, c) = invertible_semisimple_pair(&j).unwrap();
        assert_eq!(b.add(&c), j);
        assert!(b.is_semisimple() && c.is_semisimple() && b.is_invertible() && c.is_invertible());
    }

    #[test]
    fn verify_rejects_corruption() {
        let f = build_field(5, 1).unwrap();
        let a = Mat::from_ints(&f, &[&[1, 2], &[3, 4]]);
        let d = check(&a, 2, Constraint::None);
        assert!(!verify_decomposition(&a, 3, &d, Constraint::None));
        let mut bad = d.clone();
        bad.b.set(0, 0, f.add(bad.b.get(0, 0), 1));
        assert!(!verify_decomposition(&a, 2, &bad, Constraint::None));
    }

    #[test]
    fn constraint_names_round_trip() {
        for c in Constraint::ALL {
            assert_eq!(c.name().parse::<Constraint>().unwrap(), c);
        }
        assert!("bogus".parse::<Constraint>().is_err());
    }
}
