//! Exhaustive census of small matrix rings.
//!
//! Every matrix of `M_n(F_q)` is addressed by its enumeration index, so sets
//! of matrices are bitmaps. Conjugacy classes come from the canonical block
//! list, which also yields the structural flags of every matrix.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::canon;
use crate::gf::{build_field, Elem, FieldRef, GfError};
use crate::matgf::{self, Mat};
use crate::poly::Poly;

pub const INVERTIBLE: u8 = 1;
pub const SEMISIMPLE: u8 = 2;
pub const SPLIT_SEMISIMPLE: u8 = 4;
pub const CYCLIC: u8 = 8;
pub const IDEMPOTENT: u8 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error("unknown theorem id {0:?}")]
    UnknownTheorem(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Bitmap {
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bitmap({}/{})", self.count(), self.len)
    }
}

impl Bitmap {
    pub fn new(len: usize) -> Bitmap {
        Bitmap { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn full(len: usize) -> Bitmap {
        let mut b = Bitmap::new(len);
        for i in 0..len {
            b.set(i);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn or(&mut self, other: &Bitmap) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }
}

pub(crate) fn flags_of_key(key: &[(Poly, u32)], neg_one: Elem) -> u8 {
    let mut flags = 0;
    if key.iter().all(|(f, _)| *f != Poly::x()) {
        flags |= INVERTIBLE;
    }
    if key.iter().all(|(_, m)| *m == 1) {
        flags |= SEMISIMPLE;
        if key.iter().all(|(f, _)| f.degree() == 1) {
            flags |= SPLIT_SEMISIMPLE;
            if key.iter().all(|(f, _)| f.coeff(0) == 0 || f.coeff(0) == neg_one) {
                flags |= IDEMPOTENT;
            }
        }
    }
    if key.windows(2).all(|w| w[0].0 != w[1].0) {
        flags |= CYCLIC;
    }
    flags
}

/// Structural flags of a single matrix, computed from scratch.
pub fn flags_of(a: &Mat) -> u8 {
    let mut flags = 0;
    for (bit, holds) in [
        (INVERTIBLE, a.is_invertible()),
        (SEMISIMPLE, a.is_semisimple()),
        (SPLIT_SEMISIMPLE, a.is_split_semisimple()),
        (CYCLIC, a.is_cyclic()),
        (IDEMPOTENT, a.is_idempotent()),
    ] {
        if holds {
            flags |= bit;
        }
    }
    flags
}

struct ClassData {
    class_of: Vec<u32>,
    keys: Vec<Vec<(Poly, u32)>>,
    flags: Vec<u8>,
}

/// All of `M_n(F_q)` with lazily computed per-matrix data.
pub struct Space {
    field: FieldRef,
    n: usize,
    size: usize,
    classes: OnceLock<ClassData>,
    powers: Mutex<HashMap<u128, Arc<Vec<u32>>>>,
    images: Mutex<HashMap<(u128, u8), Arc<Image>>>,
}

/// `{X^k : X has all flags in mask}` with the smallest root of each member.
pub struct Image {
    pub set: Bitmap,
    pub root: Vec<u32>,
}

type SpaceKey = (u32, u32, usize);

fn spaces() -> &'static Mutex<HashMap<SpaceKey, Arc<Space>>> {
    static SPACES: OnceLock<Mutex<HashMap<SpaceKey, Arc<Space>>>> = OnceLock::new();
    SPACES.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared enumeration of `M_n(F_q)`; errors when `q^{n^2}` exceeds the budget.
pub fn space(field: &FieldRef, n: usize, budget: u128) -> Result<Arc<Space>, CensusError> {
    let total = (field.q() as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(GfError::BudgetExceeded { needed: total, budget }.into());
    }
    if total > u32::MAX as u128 {
        return Err(GfError::TooLarge(total).into());
    }
    let key = (field.p(), field.l(), n);
    let mut map = spaces().lock().unwrap();
    let sp = map.entry(key).or_insert_with(|| {
        Arc::new(Space {
            field: field.clone(),
            n,
            size: total as usize,
            classes: OnceLock::new(),
            powers: Mutex::new(HashMap::new()),
            images: Mutex::new(HashMap::new()),
        })
    });
    Ok(sp.clone())
}

impl Space {
    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self, idx: usize) -> Mat {
        Mat::from_index(&self.field, self.n, idx as u128)
    }

    pub fn index(&self, a: &Mat) -> usize {
        a.to_index() as usize
    }

    fn digit_base(&self) -> (usize, usize) {
        let p = self.field.p() as usize;
        (p, self.n * self.n * self.field.l() as usize)
    }

    /// Index of the sum of two matrices given by index.
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let (p, digits) = self.digit_base();
        if p == 2 {
            return a ^ b;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        for _ in 0..digits {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        let (p, digits) = self.digit_base();
        if p == 2 {
            return a ^ b;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        for _ in 0..digits {
            out += ((a % p + p - b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    fn class_data(&self) -> &ClassData {
        self.classes.get_or_init(|| {
            let keys: Vec<Vec<(Poly, u32)>> =
                (0..self.size).into_par_iter().map(|i| canon::structure(&self.matrix(i))).collect();
            let mut distinct: Vec<Vec<(Poly, u32)>> = keys.clone();
            distinct.sort();
            distinct.dedup();
            let id: HashMap<&Vec<(Poly, u32)>, u32> =
                distinct.iter().enumerate().map(|(i, k)| (k, i as u32)).collect();
            let class_of = keys.iter().map(|k| id[k]).collect();
            let neg_one = self.field.neg(1);
            let flags = distinct.iter().map(|k| flags_of_key(k, neg_one)).collect();
            ClassData { class_of, keys: distinct, flags }
        })
    }

    pub fn flags(&self, idx: usize) -> u8 {
        let cd = self.class_data();
        cd.flags[cd.class_of[idx] as usize]
    }

    pub fn class_of(&self, idx: usize) -> usize {
        self.class_data().class_of[idx] as usize
    }

    pub fn class_keys(&self) -> &[Vec<(Poly, u32)>] {
        &self.class_data().keys
    }

    /// Members carrying every flag in `mask`.
    pub fn with_flags(&self, mask: u8) -> Bitmap {
        let mut b = Bitmap::new(self.size);
        for i in 0..self.size {
            if self.flags(i) & mask == mask {
                b.set(i);
            }
        }
        b
    }

    /// Index of `X^k` for every index `X`.
    pub fn power_map(&self, k: u128) -> Arc<Vec<u32>> {
        if let Some(m) = self.powers.lock().unwrap().get(&k) {
            return m.clone();
        }
        let map: Vec<u32> =
            (0..self.size).into_par_iter().map(|i| self.matrix(i).pow(k).to_index() as u32).collect();
        let map = Arc::new(map);
        self.powers.lock().unwrap().insert(k, map.clone());
        map
    }

    pub fn image(&self, k: u128, mask: u8) -> Arc<Image> {
        if let Some(m) = self.images.lock().unwrap().get(&(k, mask)) {
            return m.clone();
        }
        let pm = self.power_map(k);
        let mut set = Bitmap::new(self.size);
        let mut root = vec![u32::MAX; self.size];
        for (x, &y) in pm.iter().enumerate() {
            if self.flags(x) & mask == mask && root[y as usize] == u32::MAX {
                root[y as usize] = x as u32;
                set.set(y as usize);
            }
        }
        let img = Arc::new(Image { set, root });
        self.images.lock().unwrap().insert((k, mask), img.clone());
        img
    }

    /// `{a + b : a in s, b in t}`.
    pub fn sumset(&self, s: &Bitmap, t: &Bitmap) -> Bitmap {
        let a: Vec<usize> = s.ones().collect();
        let b: Vec<usize> = t.ones().collect();
        let same = s == t;
        let parts: Vec<Bitmap> = a
            .par_iter()
            .enumerate()
            .fold(
                || Bitmap::new(self.size),
                |mut acc, (i, &x)| {
                    let start = if same { i } else { 0 };
                    for &y in &b[start..] {
                        acc.set(self.add_index(x, y));
                    }
                    acc
                },
            )
            .collect();
        let mut out = Bitmap::new(self.size);
        for p in &parts {
            out.or(p);
        }
        out
    }

    /// Whether `a` is a sum of two members of `s`, by scanning `s`.
    pub fn in_sumset(&self, s: &Bitmap, a: usize) -> Option<(usize, usize)> {
        s.ones().map(|x| (x, self.sub_index(a, x))).find(|&(_, y)| s.get(y))
    }
}

/// Membership bitmaps of the sets built from `k`-th powers and idempotents.
#[derive(Clone, Debug)]
pub struct SumsetReport {
    pub field: FieldRef,
    pub n: usize,
    pub k: u128,
    pub size: usize,
    pub powers: Bitmap,
    pub p: Bitmap,
    pub q: Bitmap,
    pub p_ss: Bitmap,
    pub q_ss: Bitmap,
    pub idempotents: Bitmap,
    pub pi: Bitmap,
    pub classes: Vec<ClassRow>,
}

impl SumsetReport {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .classes
            .iter()
            .map(|c| {
                let members = |b: &Bitmap| c.members.iter().filter(|&&i| b.get(i as usize)).count();
                json!({
                    "label": c.label,
                    "blocks": c.blocks,
                    "size": c.size,
                    "in_P": members(&self.p),
                    "in_Q": members(&self.q),
                    "in_Pss": members(&self.p_ss),
                    "in_Qss": members(&self.q_ss),
                    "in_Pi": members(&self.pi),
                })
            })
            .collect();
        json!({
            "field": self.field.spec(),
            "n": self.n,
            "k": self.k.to_string(),
            "size": self.size,
            "powers": self.powers.count(),
            "P": self.p.count(),
            "Q": self.q.count(),
            "Pss": self.p_ss.count(),
            "Qss": self.q_ss.count(),
            "idempotents": self.idempotents.count(),
            "Pi": self.pi.count(),
            "classes": rows,
        })
    }
}

pub fn power_sumsets(field: &FieldRef, n: usize, k: u128, budget: u128) -> Result<SumsetReport, CensusError> {
    let sp = space(field, n, budget)?;
    let img = |mask| sp.image(k, mask).set.clone();
    let powers = img(0);
    let inv = img(INVERTIBLE);
    let ss = img(SPLIT_SEMISIMPLE);
    let inv_ss = img(INVERTIBLE | SPLIT_SEMISIMPLE);
    let idempotents = sp.with_flags(IDEMPOTENT);
    Ok(SumsetReport {
        field: field.clone(),
        n,
        k,
        size: sp.size(),
        p: sp.sumset(&powers, &powers),
        q: sp.sumset(&inv, &inv),
        p_ss: sp.sumset(&ss, &ss),
        q_ss: sp.sumset(&inv_ss, &inv_ss),
        pi: sp.sumset(&idempotents, &idempotents),
        powers,
        idempotents,
        classes: class_table(field, n, budget)?,
    })
}

/// `P_{k,n,q}` alone.
pub fn sumset_p(field: &FieldRef, n: usize, k: u128, budget: u128) -> Result<Bitmap, CensusError> {
    let sp = space(field, n, budget)?;
    let powers = sp.image(k, 0).set.clone();
    Ok(sp.sumset(&powers, &powers))
}

/// `Π_{n,q}`, sums of two idempotents.
pub fn sumset_pi(field: &FieldRef, n: usize, budget: u128) -> Result<Bitmap, CensusError> {
    let sp = space(field, n, budget)?;
    let idem = sp.with_flags(IDEMPOTENT);
    Ok(sp.sumset(&idem, &idem))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassRow {
    pub label: Option<String>,
    pub blocks: String,
    pub size: usize,
    #[serde(skip)]
    pub representative: Mat,
    #[serde(skip)]
    pub members: Vec<u32>,
    pub invertible: bool,
    pub semisimple: bool,
    pub split_semisimple: bool,
    pub cyclic: bool,
    pub idempotent: bool,
    pub order: Option<String>,
}

fn key_text(field: &FieldRef, key: &[(Poly, u32)]) -> String {
    key.iter().map(|(f, m)| format!("({})^{}", f.display(field), m)).collect::<Vec<_>>().join(" ")
}

/// Conjugacy classes in block-list order, labelled where a listing exists.
pub fn class_table(field: &FieldRef, n: usize, budget: u128) -> Result<Vec<ClassRow>, CensusError> {
    let sp = space(field, n, budget)?;
    let labels = labelled_keys(field.p(), field.l(), n);
    let keys = sp.class_keys();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); keys.len()];
    for i in 0..sp.size() {
        members[sp.class_of(i)].push(i as u32);
    }
    Ok(keys
        .iter()
        .zip(members)
        .enumerate()
        .map(|(c, (key, members))| {
            let representative = sp.matrix(members[0] as usize);
            let flags = sp.flags(members[0] as usize);
            let label = labels.iter().find(|(k, _)| k == key).map(|(_, l)| l.to_string());
            debug_assert!(c < keys.len());
            ClassRow {
                label,
                blocks: key_text(field, key),
                size: members.len(),
                order: representative.order().ok().map(|o| o.to_string()),
                representative,
                members,
                invertible: flags & INVERTIBLE != 0,
                semisimple: flags & SEMISIMPLE != 0,
                split_semisimple: flags & SPLIT_SEMISIMPLE != 0,
                cyclic: flags & CYCLIC != 0,
                idempotent: flags & IDEMPOTENT != 0,
            }
        })
        .collect())
}

type Rep = (&'static str, &'static [&'static [i64]]);

const REPS_22: &[Rep] = &[
    ("(i)", &[&[0, 0], &[0, 0]]),
    ("(ii)", &[&[0, 1], &[0, 0]]),
    ("(iii)", &[&[1, 0], &[0, 1]]),
    ("(iv)", &[&[1, 0], &[0, 0]]),
    ("(v)", &[&[1, 1], &[1, 0]]),
    ("(vi)", &[&[1, 1], &[0, 1]]),
];

const REPS_32: &[Rep] = &[
    ("M1", &[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]]),
    ("M2", &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
    ("M3", &[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]),
    ("M4", &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]),
    ("M5", &[&[1, 0, 0], &[0, 0, 1], &[0, 0, 0]]),
    ("M6", &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]),
    ("M7", &[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]),
    ("M8", &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 0]]),
    ("M9", &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]),
    ("M10", &[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]),
    ("M11", &[&[0, 1, 0], &[1, 1, 0], &[0, 0, 0]]),
    ("M12", &[&[0, 1, 0], &[1, 1, 0], &[0, 0, 1]]),
    ("M13", &[&[0, 0, 1], &[1, 0, 1], &[0, 1, 0]]),
    ("M14", &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 1]]),
];

const REPS_23: &[Rep] = &[
    ("N1", &[&[0, 0], &[0, 0]]),
    ("N2", &[&[1, 0], &[0, 1]]),
    ("N3", &[&[0, 0], &[0, 1]]),
    ("N4", &[&[1, 1], &[0, 1]]),
    ("N5", &[&[0, 1], &[0, 0]]),
    ("N6", &[&[0, 0], &[0, 2]]),
    ("N7", &[&[1, 0], &[0, 2]]),
    ("N8", &[&[2, 0], &[0, 2]]),
    ("N9", &[&[2, 1], &[0, 2]]),
    ("N10", &[&[0, 2], &[1, 0]]),
    ("N11", &[&[0, 1], &[1, 2]]),
    ("N12", &[&[0, 1], &[1, 1]]),
];

/// Listed class sizes in label order.
pub const SIZES_22: [usize; 6] = [1, 3, 1, 6, 2, 3];
pub const SIZES_32: [usize; 14] = [1, 1, 28, 28, 84, 21, 42, 84, 21, 42, 56, 56, 24, 24];
pub const SIZES_23: [usize; 12] = [1, 1, 12, 8, 8, 12, 12, 1, 8, 6, 6, 6];

/// The three tabulated rings as `(n, q)`.
pub const TABULATED: [(usize, u32); 3] = [(2, 2), (3, 2), (2, 3)];

fn reps_for(p: u32, l: u32, n: usize) -> &'static [Rep] {
    match (p, l, n) {
        (2, 1, 2) => REPS_22,
        (2, 1, 3) => REPS_32,
        (3, 1, 2) => REPS_23,
        _ => &[],
    }
}

/// Listed representatives as matrices, in label order.
pub fn representatives(field: &FieldRef, n: usize) -> Vec<(&'static str, Mat)> {
    reps_for(field.p(), field.l(), n).iter().map(|(l, rows)| (*l, Mat::from_ints(field, rows))).collect()
}

fn labelled_keys(p: u32, l: u32, n: usize) -> Arc<Vec<(Vec<(Poly, u32)>, &'static str)>> {
    static CACHE: OnceLock<Mutex<HashMap<SpaceKey, Arc<Vec<(Vec<(Poly, u32)>, &'static str)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry((p, l, n))
        .or_insert_with(|| {
            let reps = reps_for(p, l, n);
            if reps.is_empty() {
                return Arc::new(Vec::new());
            }
            let field = build_field(p as u64, l).expect("tabulated fields are valid");
            Arc::new(reps.iter().map(|(lab, rows)| (canon::structure(&Mat::from_ints(&field, rows)), *lab)).collect())
        })
        .clone()
}

/// Class label of a matrix from one of the tabulated rings.
pub fn class_label(a: &Mat) -> Option<&'static str> {
    let f = a.field();
    let keys = labelled_keys(f.p(), f.l(), a.n());
    if keys.is_empty() {
        return None;
    }
    let key = canon::structure(a);
    keys.iter().find(|(k, _)| *k == key).map(|(_, l)| *l)
}

/// Classes outside `P_{k,n,q}` by the closed-form tables, each with the
/// result that excludes it. `None` when `(n, q)` is not tabulated.
pub fn table_complement(p: u32, l: u32, n: usize, k: u128) -> Option<Vec<(&'static str, &'static str)>> {
    if l != 1 {
        return None;
    }
    let out = match (p, n) {
        (2, 2) => {
            if k >= 2 && k.is_multiple_of(6) {
                vec![("(v)", "Theorem M22")]
            } else {
                vec![]
            }
        }
        (2, 3) => {
            let mut v = Vec::new();
            if k >= 2 && k.is_multiple_of(84) {
                v.extend([("M11", "Lemma 32class1"), ("M12", "Lemma 32class1"), ("M13", "Lemma 32class1")]);
            }
            if k >= 2 && k.is_multiple_of(42) {
                v.push(("M14", "Lemma 32class2"));
            }
            v
        }
        (3, 2) => {
            let mut v = Vec::new();
            if k >= 2 && k.is_multiple_of(6) {
                v.push(("N5", "Lemma 23class1"));
            }
            if k >= 2 && k.is_multiple_of(12) {
                v.extend([("N9", "Lemma 23class2"), ("N10", "Lemma 23class2"), ("N12", "Lemma 23class2")]);
            }
            v
        }
        _ => return None,
    };
    Some(out)
}

/// Classes outside `Π_{n,q}` for the tabulated rings.
pub fn pi_complement(p: u32, l: u32, n: usize) -> Option<Vec<&'static str>> {
    match (p, l, n) {
        (2, 1, 2) => Some(vec!["(v)"]),
        (2, 1, 3) => Some(vec!["M11", "M12", "M13", "M14"]),
        (3, 1, 2) => Some(vec!["N5", "N9", "N10", "N12"]),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `{g invertible : g S = S}` (left) or `{g : S g = S}` (right), by brute force.
pub fn stabilizer(field: &FieldRef, n: usize, s: &Bitmap, side: Side, budget: u128) -> Result<Vec<Mat>, CensusError> {
    let sp = space(field, n, budget)?;
    let members: Vec<Mat> = s.ones().map(|i| sp.matrix(i)).collect();
    let units: Vec<usize> = (0..sp.size()).filter(|&i| sp.flags(i) & INVERTIBLE != 0).collect();
    let keep: Vec<usize> = units
        .into_par_iter()
        .filter(|&gi| {
            let g = sp.matrix(gi);
            members.iter().all(|m| {
                let prod = match side {
                    Side::Left => g.mul(m),
                    Side::Right => m.mul(&g),
                };
                s.get(prod.to_index() as usize)
            })
        })
        .collect();
    Ok(keep.into_iter().map(|i| sp.matrix(i)).collect())
}

fn is_normal(group: &[Mat], field: &FieldRef, n: usize, budget: u128) -> Result<bool, CensusError> {
    let sp = space(field, n, budget)?;
    let set: std::collections::HashSet<usize> = group.iter().map(|g| g.to_index() as usize).collect();
    for gi in (0..sp.size()).filter(|&i| sp.flags(i) & INVERTIBLE != 0) {
        let g = sp.matrix(gi);
        let gin = g.inverse().expect("unit");
        if group.iter().any(|h| !set.contains(&(g.mul(h).mul(&gin).to_index() as usize))) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicCount {
    pub n: usize,
    pub q: u32,
    pub count: u128,
    pub group_order: u128,
    /// `c >= |G| (1 - 1/(q(q^2-1)))`.
    pub lower_bound_holds: bool,
    /// `2 c > q^{n^2}`.
    pub exceeds_half: bool,
}

pub fn count_invertible_cyclic(field: &FieldRef, n: usize, budget: u128) -> Result<CyclicCount, CensusError> {
    let sp = space(field, n, budget)?;
    let mut count = 0u128;
    let mut group = 0u128;
    for i in 0..sp.size() {
        let f = sp.flags(i);
        if f & INVERTIBLE != 0 {
            group += 1;
            if f & CYCLIC != 0 {
                count += 1;
            }
        }
    }
    let q = field.q() as u128;
    let m = q * (q * q - 1);
    Ok(CyclicCount {
        n,
        q: field.q(),
        count,
        group_order: group,
        lower_bound_holds: count * m >= group * (m - 1),
        exceeds_half: 2 * count > sp.size() as u128,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremCheck {
    pub theorem: String,
    pub params: Value,
    pub status: Status,
    pub mismatches: Vec<Value>,
}

impl TheoremCheck {
    fn new(theorem: &str, params: Value, mismatches: Vec<Value>) -> TheoremCheck {
        let status = if mismatches.is_empty() { Status::Pass } else { Status::Fail };
        TheoremCheck { theorem: theorem.to_string(), params, status, mismatches }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

pub const THEOREM_IDS: &[&str] = &[
    "M22",
    "M32",
    "M23",
    "exponent",
    "idemp22",
    "idemp32",
    "idemp23",
    "HT88",
    "thm5a-count",
    "remark4-stabilizer",
    "EX1",
    "Yo98",
    "EX4",
    "EX5",
];

fn param_list(params: &Value, key: &str) -> Result<Option<Vec<u128>>, CensusError> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| v.as_u64().map(u128::from).ok_or_else(|| CensusError::BadParams(format!("{key} must hold integers"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(v) => v
            .as_u64()
            .map(|x| Some(vec![x as u128]))
            .ok_or_else(|| CensusError::BadParams(format!("{key} must be an integer"))),
    }
}

fn param_u64(params: &Value, key: &str) -> Result<Option<u64>, CensusError> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| CensusError::BadParams(format!("{key} must be an integer"))),
    }
}

fn param_cases(params: &Value, default: &[(usize, u32)]) -> Result<Vec<(usize, u32)>, CensusError> {
    match params.get("cases") {
        None => Ok(default.to_vec()),
        Some(Value::Array(a)) => a
            .iter()
            .map(|c| match c.as_array().map(|v| v.as_slice()) {
                Some([n, q]) => match (n.as_u64(), q.as_u64()) {
                    (Some(n), Some(q)) => Ok((n as usize, q as u32)),
                    _ => Err(CensusError::BadParams("cases must be [n, q] pairs".into())),
                },
                _ => Err(CensusError::BadParams("cases must be [n, q] pairs".into())),
            })
            .collect(),
        Some(_) => Err(CensusError::BadParams("cases must be a list".into())),
    }
}

fn field_of_order(q: u32) -> Result<FieldRef, CensusError> {
    let (p, l) = prime_power(q).ok_or_else(|| CensusError::BadParams(format!("{q} is not a prime power")))?;
    Ok(build_field(p as u64, l)?)
}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut r = q;
    let mut l = 0;
    while r.is_multiple_of(p) {
        r /= p;
        l += 1;
    }
    (r == 1).then_some((p, l))
}

fn labelled_members(sp: &Space, labels: &[&str]) -> Bitmap {
    let f = sp.field();
    let keys = labelled_keys(f.p(), f.l(), sp.n());
    let wanted: Vec<&Vec<(Poly, u32)>> =
        keys.iter().filter(|(_, l)| labels.contains(l)).map(|(k, _)| k).collect();
    let class_ids: Vec<usize> = sp
        .class_keys()
        .iter()
        .enumerate()
        .filter(|(_, k)| wanted.contains(k))
        .map(|(i, _)| i)
        .collect();
    let mut b = Bitmap::new(sp.size());
    for i in 0..sp.size() {
        if class_ids.contains(&sp.class_of(i)) {
            b.set(i);
        }
    }
    b
}

/// Compares `actual` against `M \ excluded`, recording one entry per differing matrix.
fn diff_against(sp: &Space, actual: &Bitmap, excluded: &Bitmap, context: Value, out: &mut Vec<Value>) {
    for i in 0..sp.size() {
        let expected = !excluded.get(i);
        if actual.get(i) != expected {
            out.push(json!({
                "context": context,
                "matrix": sp.matrix(i).to_json(),
                "expected": expected,
                "actual": actual.get(i),
            }));
        }
    }
}

fn table_check(id: &str, n: usize, q: u32, ks: &[u128], budget: u128) -> Result<Vec<Value>, CensusError> {
    let field = field_of_order(q)?;
    let sp = space(&field, n, budget)?;
    let mut mismatches = Vec::new();
    for &k in ks {
        if k == 0 {
            return Err(CensusError::BadParams("k must be positive".into()));
        }
        let labels: Vec<&str> = table_complement(field.p(), field.l(), n, k)
            .expect("tabulated case")
            .into_iter()
            .map(|(l, _)| l)
            .collect();
        let excluded = labelled_members(&sp, &labels);
        let p = sumset_p(&field, n, k, budget)?;
        diff_against(&sp, &p, &excluded, json!({ "theorem": id, "k": k.to_string() }), &mut mismatches);
    }
    Ok(mismatches)
}

/// Runs one registered check. Unknown ids and malformed parameters are errors.
pub fn check_theorem(id: &str, params: &Value, budget: u128) -> Result<TheoremCheck, CensusError> {
    let mismatches = match id {
        "M22" => {
            let kmax = param_u64(params, "kmax")?.unwrap_or(24) as u128;
            let ks = param_list(params, "ks")?.unwrap_or_else(|| (1..=kmax).collect());
            table_check(id, 2, 2, &ks, budget)?
        }
        "M32" => {
            let ks = param_list(params, "ks")?.unwrap_or_else(|| vec![6, 14, 21, 41, 42, 84, 126, 168]);
            table_check(id, 3, 2, &ks, budget)?
        }
        "M23" => {
            let kmin = param_u64(params, "kmin")?.unwrap_or(2) as u128;
            let kmax = param_u64(params, "kmax")?.unwrap_or(48) as u128;
            let ks = param_list(params, "ks")?.unwrap_or_else(|| (kmin..=kmax).collect());
            table_check(id, 2, 3, &ks, budget)?
        }
        "exponent" => check_exponent(params, budget)?,
        "idemp22" | "idemp32" | "idemp23" => {
            let (n, q) = match id {
                "idemp22" => (2, 2),
                "idemp32" => (3, 2),
                _ => (2, 3),
            };
            let field = field_of_order(q)?;
            let sp = space(&field, n, budget)?;
            let labels = pi_complement(field.p(), field.l(), n).expect("tabulated case");
            let excluded = labelled_members(&sp, &labels);
            let pi = sumset_pi(&field, n, budget)?;
            let mut out = Vec::new();
            diff_against(&sp, &pi, &excluded, json!({ "theorem": id }), &mut out);
            out
        }
        "HT88" => {
            let cases = param_cases(params, &[(2, 2), (3, 2), (2, 3), (2, 4), (2, 5), (3, 3)])?;
            let mut out = Vec::new();
            for (n, q) in cases {
                let field = field_of_order(q)?;
                let pi = sumset_pi(&field, n, budget)?;
                if pi.count() == pi.len() {
                    out.push(json!({ "n": n, "q": q, "claim": "Pi is a proper subset", "actual": "Pi = M" }));
                }
            }
            out
        }
        "thm5a-count" => {
            let cases = param_cases(params, &[(2, 3), (2, 4), (2, 5), (3, 3)])?;
            let mut out = Vec::new();
            for (n, q) in cases {
                let c = count_invertible_cyclic(&field_of_order(q)?, n, budget)?;
                if !c.exceeds_half || !c.lower_bound_holds {
                    out.push(serde_json::to_value(&c).expect("serializable"));
                }
            }
            out
        }
        "remark4-stabilizer" => {
            let f = field_of_order(2)?;
            let pi = sumset_pi(&f, 2, budget)?;
            let l = stabilizer(&f, 2, &pi, Side::Left, budget)?;
            if l.len() == 1 && l[0].is_identity() {
                vec![]
            } else {
                vec![json!({ "claim": "L_Pi = {I}", "actual": l.iter().map(Mat::to_json).collect::<Vec<_>>() })]
            }
        }
        "EX1" => check_ex1(params, budget)?,
        "Yo98" => {
            let cases = param_cases(params, &[(2, 3), (2, 4), (2, 5), (3, 3)])?;
            let mut out = Vec::new();
            for (n, q) in cases {
                let field = field_of_order(q)?;
                if q <= 2 {
                    return Err(CensusError::BadParams("requires q > 2".into()));
                }
                let sp = space(&field, n, budget)?;
                let inv = sp.image(2, INVERTIBLE).set.clone();
                let qset = sp.sumset(&inv, &inv);
                let identity = sp.index(&Mat::identity(&field, n));
                for i in 0..sp.size() {
                    let required = n % 2 == 0 || i != identity;
                    if required && !qset.get(i) {
                        out.push(json!({ "n": n, "q": q, "matrix": sp.matrix(i).to_json(), "expected": true, "actual": false }));
                    }
                }
            }
            out
        }
        "EX4" => {
            let cases = param_cases(params, &[(2, 3), (2, 4), (2, 5), (2, 7), (3, 3)])?;
            full_p_check(&cases, 2, budget)?
        }
        "EX5" => check_ex5(params, budget)?,
        other => return Err(CensusError::UnknownTheorem(other.to_string())),
    };
    Ok(TheoremCheck::new(id, params.clone(), mismatches))
}

fn full_p_check(cases: &[(usize, u32)], k: u128, budget: u128) -> Result<Vec<Value>, CensusError> {
    let mut out = Vec::new();
    for &(n, q) in cases {
        let field = field_of_order(q)?;
        let sp = space(&field, n, budget)?;
        let p = sumset_p(&field, n, k, budget)?;
        diff_against(&sp, &p, &Bitmap::new(sp.size()), json!({ "n": n, "q": q, "k": k.to_string() }), &mut out);
    }
    Ok(out)
}

const EXPONENTS: [(usize, u32, u128); 3] = [(2, 2, 6), (3, 2, 84), (2, 3, 24)];

fn check_exponent(params: &Value, budget: u128) -> Result<Vec<Value>, CensusError> {
    let mut out = Vec::new();
    let single = match (param_u64(params, "n")?, param_u64(params, "q")?) {
        (Some(n), Some(q)) => Some((n as usize, q as u32)),
        (None, None) => None,
        _ => return Err(CensusError::BadParams("give both n and q".into())),
    };
    let cases: Vec<(usize, u32, Option<u128>)> = match single {
        Some((n, q)) => vec![(n, q, EXPONENTS.iter().find(|c| c.0 == n && c.1 == q).map(|c| c.2))],
        None => EXPONENTS.iter().map(|&(n, q, e)| (n, q, Some(e))).collect(),
    };
    for (n, q, listed) in cases {
        let field = field_of_order(q)?;
        let sp = space(&field, n, budget)?;
        let (e, _) = matgf::gl_exponent(&field, n, budget)?;
        if let Some(listed) = listed {
            if e != listed {
                out.push(json!({ "n": n, "q": q, "claim": "exponent", "expected": listed.to_string(), "actual": e.to_string() }));
            }
        }
        let idem = sp.with_flags(IDEMPOTENT);
        let ks: Vec<u128> = match param_list(params, "k")? {
            Some(ks) => ks,
            None => (1..=e).collect(),
        };
        for k in ks {
            let powers = &sp.image(k, 0).set;
            let equal = *powers == idem;
            if equal != (k % e == 0) {
                out.push(json!({
                    "n": n, "q": q, "k": k.to_string(),
                    "claim": "k-th powers equal the idempotents iff the exponent divides k",
                    "expected": k % e == 0, "actual": equal,
                }));
            }
        }
    }
    Ok(out)
}

/// Whether `S` is stable under conjugation.
fn conjugation_stable(sp: &Space, s: &Bitmap) -> bool {
    let units: Vec<Mat> =
        (0..sp.size()).filter(|&i| sp.flags(i) & INVERTIBLE != 0).map(|i| sp.matrix(i)).collect();
    s.ones().all(|i| {
        let a = sp.matrix(i);
        units.iter().all(|g| s.get(a.conjugate(g).expect("unit").to_index() as usize))
    })
}

fn check_ex1(params: &Value, budget: u128) -> Result<Vec<Value>, CensusError> {
    let mut out = Vec::new();
    // left and right stabilizers agree on conjugation-stable sets, and are normal
    for (n, q) in param_cases(params, &[(2, 2), (2, 3), (3, 2)])? {
        let field = field_of_order(q)?;
        let sp = space(&field, n, budget)?;
        let mut sets: Vec<(String, Bitmap)> = vec![
            ("Pi".into(), sumset_pi(&field, n, budget)?),
            ("idempotents".into(), sp.with_flags(IDEMPOTENT)),
        ];
        for k in [2u128, 3, 6] {
            sets.push((format!("P_{k}"), sumset_p(&field, n, k, budget)?));
            sets.push((format!("powers_{k}"), sp.image(k, 0).set.clone()));
        }
        for (name, s) in sets {
            if !conjugation_stable(&sp, &s) {
                out.push(json!({ "n": n, "q": q, "set": name, "claim": "conjugation stable", "actual": false }));
                continue;
            }
            let mut l: Vec<u128> = stabilizer(&field, n, &s, Side::Left, budget)?.iter().map(Mat::to_index).collect();
            let mut r: Vec<u128> = stabilizer(&field, n, &s, Side::Right, budget)?.iter().map(Mat::to_index).collect();
            l.sort_unstable();
            r.sort_unstable();
            if l != r {
                out.push(json!({ "n": n, "q": q, "set": name, "claim": "L_S = R_S", "actual": false }));
            }
            let group: Vec<Mat> = l.iter().map(|&i| Mat::from_index(&field, n, i)).collect();
            if !is_normal(&group, &field, n, budget)? {
                out.push(json!({ "n": n, "q": q, "set": name, "claim": "L_S normal", "actual": false }));
            }
        }
    }
    // L_Pi meets the determinant-one subgroup trivially away from (2,2) and (2,3)
    for (n, q) in [(3usize, 2u32), (2, 4), (2, 5)] {
        let field = field_of_order(q)?;
        let pi = sumset_pi(&field, n, budget)?;
        let l = stabilizer(&field, n, &pi, Side::Left, budget)?;
        let bad: Vec<Value> =
            l.iter().filter(|g| g.det() == 1 && !g.is_identity()).map(Mat::to_json).collect();
        if !bad.is_empty() {
            out.push(json!({ "n": n, "q": q, "claim": "L_Pi meets SL trivially", "actual": bad }));
        }
    }
    Ok(out)
}

fn check_ex5(params: &Value, budget: u128) -> Result<Vec<Value>, CensusError> {
    let cases = param_cases(params, &[(2, 2), (3, 2), (2, 3), (2, 5), (2, 8), (2, 9)])?;
    if cases.iter().any(|&(_, q)| q == 4 || q == 7) {
        return Err(CensusError::BadParams("q = 4 and q = 7 are checked separately".into()));
    }
    let mut out = full_p_check(&cases, 3, budget)?;
    // q = 4: nonscalar matrices with trace in F_2, and scalars for n = 3
    let f4 = field_of_order(4)?;
    let sp = space(&f4, 2, budget)?;
    let powers = sp.image(3, 0).set.clone();
    for i in 0..sp.size() {
        let a = sp.matrix(i);
        if !a.is_scalar() && a.trace() < 2 && sp.in_sumset(&powers, i).is_none() {
            out.push(json!({ "q": 4, "claim": "nonscalar with trace in F_2", "matrix": a.to_json() }));
        }
    }
    if let Ok(sp3) = space(&f4, 3, budget) {
        let powers = sp3.image(3, 0).set.clone();
        for a in f4.elements() {
            let i = sp3.index(&Mat::scalar(&f4, 3, a));
            if sp3.in_sumset(&powers, i).is_none() {
                out.push(json!({ "q": 4, "n": 3, "claim": "scalar", "matrix": sp3.matrix(i).to_json() }));
            }
        }
    }
    // q = 7: scalars, and nonscalars with trace in {2n-2, 2n-1, 2n}
    let f7 = field_of_order(7)?;
    let sp = space(&f7, 2, budget)?;
    let powers = sp.image(3, 0).set.clone();
    let window: Vec<Elem> = [2i64, 3, 4].iter().map(|&t| f7.from_int(t)).collect();
    for i in 0..sp.size() {
        let a = sp.matrix(i);
        let required = a.is_scalar() || window.contains(&a.trace());
        if required && sp.in_sumset(&powers, i).is_none() {
            out.push(json!({ "q": 7, "claim": "scalar or trace window", "matrix": a.to_json() }));
        }
    }
    Ok(out)
}

/// Summary of the closed-form `P` tables against the census for `k <= kmax`.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub k: String,
    pub excluded: Vec<String>,
    pub census_size: usize,
    pub predicted_size: usize,
    pub agree: bool,
}

pub fn regenerate_table(n: usize, q: u32, kmax: u128, budget: u128) -> Result<Vec<TableRow>, CensusError> {
    let field = field_of_order(q)?;
    if !TABULATED.contains(&(n, q)) {
        return Err(CensusError::BadParams(format!("no table for n = {n}, q = {q}")));
    }
    let sp = space(&field, n, budget)?;
    (1..=kmax)
        .map(|k| {
            let labels: Vec<&str> =
                table_complement(field.p(), field.l(), n, k).expect("tabulated").into_iter().map(|(l, _)| l).collect();
            let excluded = labelled_members(&sp, &labels);
            let p = sumset_p(&field, n, k, budget)?;
            let mut diffs = Vec::new();
            diff_against(&sp, &p, &excluded, Value::Null, &mut diffs);
            Ok(TableRow {
                k: k.to_string(),
                excluded: labels.iter().map(|s| s.to_string()).collect(),
                census_size: p.count(),
                predicted_size: sp.size() - excluded.count(),
                agree: diffs.is_empty(),
            })
        })
        .collect()
}

/// Class sizes by label for a tabulated ring.
pub fn labelled_sizes(field: &FieldRef, n: usize, budget: u128) -> Result<BTreeMap<String, usize>, CensusError> {
    Ok(class_table(field, n, budget)?
        .into_iter()
        .filter_map(|row| row.label.map(|l| (l, row.size)))
        .collect())
}
