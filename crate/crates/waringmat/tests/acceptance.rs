//! Acceptance criteria, one PASS/FAIL line each.
//!
//! A criterion listed in `DOCUMENTED_FAILURES` still prints FAIL but does not
//! change the exit status; it becomes an error if it starts passing.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use waringmat::census;
use waringmat::cyclic;
use waringmat::gf::{self, Elem, Field, FieldRef};
use waringmat::lift;
use waringmat::matgf::{self, Mat};
use waringmat::waring::{self, Constraint, WaringError};
use waringmat::build_field;

const BUDGET: u128 = 1 << 24;

/// Criterion ids whose failure is explained in the project notes.
const DOCUMENTED_FAILURES: &[(u32, &str)] = &[(
    2,
    "class (13) is also outside P_{k,3,2} for k = 42 mod 84; the stated table keeps it",
)];

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn field(q: u32) -> FieldRef {
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
    let mut l = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        l += 1;
    }
    assert_eq!(r, 1, "{q} is not a prime power");
    build_field(p as u64, l).unwrap()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{} [{:.2} s]", o.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            o.ok = false;
            o.detail = format!("{} exceeds {:.0} s", o.detail, limit.as_secs_f64());
        }
    }
    o
}

/// `P_{k,n,q}` by powering every matrix and adding pairs, independent of the census bitsets.
fn naive_p(f: &FieldRef, n: usize, k: u128) -> HashSet<u128> {
    let all: Vec<Mat> = matgf::enumerate_matrices(f, n, BUDGET).unwrap().collect();
    let powers: Vec<Mat> = all.iter().map(|a| a.pow(k)).collect::<HashSet<_>>().into_iter().collect();
    let mut out = HashSet::new();
    for x in &powers {
        for y in &powers {
            out.insert(x.add(y).to_index());
        }
    }
    out
}

/// Census P must equal the closed-form table and the naive oracle; returns per-k mismatched class labels.
fn table_vs_oracles(id: &str, n: usize, q: u32, ks: &[u128]) -> (bool, String) {
    let check = census::check_theorem(id, &json!({ "ks": ks }), BUDGET).unwrap();
    let f = field(q);
    let sp = census::space(&f, n, BUDGET).unwrap();
    let mut oracle_ok = true;
    for &k in ks {
        let census_p = census::sumset_p(&f, n, k, BUDGET).unwrap();
        let naive = naive_p(&f, n, k);
        if (0..sp.size()).any(|i| census_p.get(i) != naive.contains(&sp.matrix(i).to_index())) {
            oracle_ok = false;
        }
    }
    let mut by_k: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for m in &check.mismatches {
        let k = m["context"]["k"].as_str().unwrap_or("?").to_string();
        let a = Mat::from_json(&m["matrix"]).unwrap();
        let label = census::class_label(&a).unwrap_or("?").to_string();
        *by_k.entry(k).or_default().entry(label).or_default() += 1;
    }
    let mut detail = format!("census vs naive oracle: {}", if oracle_ok { "agree" } else { "DISAGREE" });
    if by_k.is_empty() {
        detail.push_str("; table matches census for every k");
    } else {
        for (k, labels) in by_k {
            let desc: Vec<String> = labels.iter().map(|(l, c)| format!("{l} x{c}")).collect();
            detail.push_str(&format!("; k={k}: census excludes {} beyond the table", desc.join(", ")));
        }
    }
    (oracle_ok && check.passed(), detail)
}

fn criterion_1() -> Outcome {
    timed(Some(Duration::from_secs(1)), || {
        let check = census::check_theorem("M22", &json!({}), BUDGET).unwrap();
        outcome(check.passed(), format!("M22, k = 1..24: {} mismatches", check.mismatches.len()))
    })
}

fn criterion_1_oracle() -> Outcome {
    let ks: Vec<u128> = (1..=24).collect();
    let (ok, d) = table_vs_oracles("M22", 2, 2, &ks);
    outcome(ok, d)
}

fn criterion_2() -> Outcome {
    let ks = [6u128, 14, 21, 41, 42, 84, 126, 168];
    let timing = timed(Some(Duration::from_secs(10)), || {
        let c = census::check_theorem("M32", &json!({ "ks": ks }), BUDGET).unwrap();
        outcome(true, format!("census run with {} mismatches", c.mismatches.len()))
    });
    let (ok, detail) = table_vs_oracles("M32", 3, 2, &ks);
    outcome(ok && timing.ok, format!("M32 at k in {ks:?}: {detail}; timing {}", timing.detail))
}

fn criterion_3() -> Outcome {
    let timing = timed(Some(Duration::from_secs(5)), || {
        let c = census::check_theorem("M23", &json!({}), BUDGET).unwrap();
        outcome(c.passed(), format!("census run with {} mismatches", c.mismatches.len()))
    });
    let ks: Vec<u128> = (2..=48).collect();
    let (ok, detail) = table_vs_oracles("M23", 2, 3, &ks);
    outcome(ok && timing.ok, format!("M23, k = 2..48: {detail}; timing {}", timing.detail))
}

fn criterion_4() -> Outcome {
    let expected = [(2usize, 2u32, 6u128), (3, 2, 84), (2, 3, 24)];
    let mut bad = Vec::new();
    for (n, q, e) in expected {
        let (got, _) = matgf::gl_exponent(&field(q), n, BUDGET).unwrap();
        if got != e {
            bad.push(format!("e_({n},{q}) = {got}, expected {e}"));
        }
    }
    let check = census::check_theorem("exponent", &json!({}), BUDGET).unwrap();
    if !check.passed() {
        bad.push(format!("{} power-set mismatches", check.mismatches.len()));
    }
    outcome(bad.is_empty(), if bad.is_empty() { "exponents (6, 84, 24); powers equal idempotents exactly at multiples".into() } else { bad.join("; ") })
}

fn multiplicative_order(f: &Field, x: Elem) -> u128 {
    let mut o = 1;
    let mut y = x;
    while y != 1 {
        y = f.mul(y, x);
        o += 1;
    }
    o
}

fn criterion_5() -> Outcome {
    timed(Some(Duration::from_secs(60)), || {
        let qs: Vec<u32> = (2..=64).filter(|&q| (2..q).filter(|d| q % d == 0).all(|d| {
            let p = (2..=q).find(|x| q % x == 0).unwrap();
            d % p == 0
        })).collect();
        let results: Vec<(u64, Vec<String>)> = qs
            .par_iter()
            .map(|&q| {
                let f = field(q);
                let g = f.nonzero().find(|&x| multiplicative_order(&f, x) == q as u128 - 1).unwrap();
                let reps: Vec<Elem> = (0..6).map(|j| f.pow(g, j)).collect();
                let ds: Vec<u128> = (1..=6).filter(|d| (q as u128 - 1).is_multiple_of(*d)).collect();
                let mut checked = 0u64;
                let mut bad = Vec::new();
                for s in [2usize, 3] {
                    let mut tuples: Vec<Vec<u128>> = vec![vec![]];
                    for _ in 0..s {
                        let mut next = Vec::new();
                        for t in &tuples {
                            for &d in &ds {
                                let mut t2 = t.clone();
                                t2.push(d);
                                next.push(t2);
                            }
                        }
                        tuples = next;
                    }
                    for ex in tuples {
                        // coefficient cosets modulo d_i-th powers; the first one is absorbed into b
                        let mut coeff_sets: Vec<Vec<Elem>> = vec![vec![1]];
                        for &d in &ex[1..] {
                            let mut next = Vec::new();
                            for c in &coeff_sets {
                                for &r in &reps[..d as usize] {
                                    let mut c2 = c.clone();
                                    c2.push(r);
                                    next.push(c2);
                                }
                            }
                            coeff_sets = next;
                        }
                        for coeffs in coeff_sets {
                            let dist = gf::joly_distribution(&f, &ex, &coeffs, BUDGET).unwrap();
                            for b in 1..q as usize {
                                let r = gf::joly_bound_check(q as u128, s as u32, dist[b], &ex);
                                checked += 1;
                                if !r.within_bound {
                                    bad.push(format!("q={q} k={ex:?} a={coeffs:?} b={b}: N={}", dist[b]));
                                }
                            }
                        }
                    }
                }
                (checked, bad)
            })
            .collect();
        let checked: u64 = results.iter().map(|r| r.0).sum();
        let bad: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
        outcome(bad.is_empty(), format!("{checked} (q, s, k, a, b) instances over {} fields; violations: {}", qs.len(), if bad.is_empty() { "none".into() } else { bad.join(", ") }))
    })
}

fn criterion_6() -> Outcome {
    let qs = [2u32, 3, 4, 5, 7, 8, 9];
    let fields: Vec<FieldRef> = qs.iter().map(|&q| field(q)).collect();
    let failures: usize = (0..10_000u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = &fields[rng.gen_range(0..fields.len())];
            let n = rng.gen_range(1..=8);
            let k = loop {
                let k = rng.gen_range(1..=30u128);
                if k % f.p() as u128 != 0 {
                    break k;
                }
            };
            let powers = f.kth_powers(k);
            let nonzero: Vec<Elem> = powers.iter().copied().filter(|&x| x != 0).collect();
            let zero_at = if powers.contains(&0) && rng.gen_bool(0.3) { Some(rng.gen_range(0..n)) } else { None };
            let mut t = Mat::zero(f, n);
            let upper = rng.gen_bool(0.5);
            for i in 0..n {
                let d = if zero_at == Some(i) { 0 } else { nonzero[rng.gen_range(0..nonzero.len())] };
                t.set(i, i, d);
                for j in i + 1..n {
                    let v = rng.gen_range(0..f.q());
                    if upper {
                        t.set(i, j, v);
                    } else {
                        t.set(j, i, v);
                    }
                }
            }
            match lift::triangular_kth_root(&t, k) {
                Ok(x) if x.pow(k) == t && (if upper { x.is_upper_triangular() } else { x.is_lower_triangular() }) => 0,
                _ => 1,
            }
        })
        .sum();
    outcome(failures == 0, format!("10000 triangular instances, {failures} failures"))
}

fn diag_vectors(f: &Field, n: usize, trace: Elem) -> Vec<Vec<Elem>> {
    let q = f.q();
    let mut out = Vec::new();
    let total = (q as u64).pow(n as u32 - 1);
    for idx in 0..total {
        let mut u = Vec::with_capacity(n);
        let mut r = idx;
        for _ in 0..n - 1 {
            u.push((r % q as u64) as Elem);
            r /= q as u64;
        }
        let s = u.iter().fold(0, |a, &x| f.add(a, x));
        u.push(f.sub(trace, s));
        out.push(u);
    }
    out
}

fn qc_ok(a: &Mat, u: &[Elem]) -> bool {
    match cyclic::quasi_cyclic_with_diagonal(a, u) {
        Ok(g) => g.is_invertible() && a.conjugate(&g).map(|b| b.diagonal() == u).unwrap_or(false),
        Err(_) => false,
    }
}

fn criterion_7() -> Outcome {
    let mut exhaustive = 0u64;
    let mut bad = 0u64;
    for q in [2u32, 3] {
        let f = field(q);
        for a in matgf::enumerate_matrices(&f, 2, BUDGET).unwrap().filter(|m| !m.is_scalar()) {
            for u in diag_vectors(&f, 2, a.trace()) {
                exhaustive += 1;
                if !qc_ok(&a, &u) {
                    bad += 1;
                }
            }
        }
    }
    let qs = [2u32, 3, 4, 5, 7, 8, 9];
    let fields: Vec<FieldRef> = qs.iter().map(|&q| field(q)).collect();
    let random_bad: u64 = (0..10_000u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1_000_000 + seed);
            let f = &fields[rng.gen_range(0..fields.len())];
            let n = rng.gen_range(2..=8);
            let a = loop {
                let data: Vec<Elem> = (0..n * n).map(|_| rng.gen_range(0..f.q())).collect();
                let a = Mat::from_data(f, n, data);
                if !a.is_scalar() {
                    break a;
                }
            };
            let mut u: Vec<Elem> = (0..n - 1).map(|_| rng.gen_range(0..f.q())).collect();
            let s = u.iter().fold(0, |acc, &x| f.add(acc, x));
            u.push(f.sub(a.trace(), s));
            u64::from(!qc_ok(&a, &u))
        })
        .sum();
    outcome(
        bad == 0 && random_bad == 0,
        format!("{exhaustive} exhaustive (A, u) pairs over M_2(F_2), M_2(F_3): {bad} failures; 10000 random: {random_bad} failures"),
    )
}

fn criterion_8() -> Outcome {
    let mut bad = Vec::new();
    let mut total = 0usize;
    for (n, q) in census::TABULATED {
        let f = field(q);
        let sp = census::space(&f, n, BUDGET).unwrap();
        for k in 1..=24u128 {
            let p = census::sumset_p(&f, n, k, BUDGET).unwrap();
            let disagreements: Vec<usize> = (0..sp.size())
                .into_par_iter()
                .filter(|&i| {
                    let a = sp.matrix(i);
                    let res = waring::decompose(&a, k, Constraint::None);
                    let engine = match &res {
                        Ok(d) => waring::verify_decomposition(&a, k, d, Constraint::None),
                        Err(WaringError::NotDecomposable { .. }) => false,
                        Err(_) => !p.get(i),
                    };
                    engine != p.get(i) || matches!(res, Err(ref e) if !matches!(e, WaringError::NotDecomposable { .. }))
                })
                .collect();
            total += sp.size();
            for i in disagreements {
                bad.push(format!("n={n} q={q} k={k} A={}", sp.matrix(i).to_text().replace('\n', ";")));
            }
        }
    }
    outcome(bad.is_empty(), format!("{total} (A, k) pairs; disagreements: {}", if bad.is_empty() { "none".into() } else { bad.iter().take(5).cloned().collect::<Vec<_>>().join(", ") }))
}

fn criterion_9() -> Outcome {
    timed(Some(Duration::from_secs(60)), || {
        let mut triples = Vec::new();
        for k in [2u128, 3] {
            for q in 2..=49u32 {
                let p = match (2..=q).find(|d| q % d == 0) {
                    Some(p) => p,
                    None => continue,
                };
                if (2..q).any(|d| q % d == 0 && d % p != 0) || k % p as u128 == 0 {
                    continue;
                }
                if (q as u128) + 3 * k * k < k * k * k + 3 * k {
                    continue;
                }
                for n in 1..=6usize {
                    triples.push((k, q, n));
                }
            }
        }
        let bad: Vec<String> = triples
            .par_iter()
            .flat_map_iter(|&(k, q, n)| {
                let f = field(q);
                let mut rng = ChaCha8Rng::seed_from_u64((k as u64) << 40 | (q as u64) << 8 | n as u64);
                let mut out = Vec::new();
                for _ in 0..1000 {
                    let data: Vec<Elem> = (0..n * n).map(|_| rng.gen_range(0..q)).collect();
                    let a = Mat::from_data(&f, n, data);
                    match waring::decompose(&a, k, Constraint::None) {
                        Ok(d) if waring::verify_decomposition(&a, k, &d, Constraint::None) => {}
                        other => out.push(format!("k={k} q={q} n={n}: {:?}", other.err())),
                    }
                }
                out
            })
            .collect();
        outcome(bad.is_empty(), format!("{} triples x 1000 matrices; failures: {}", triples.len(), if bad.is_empty() { "none".into() } else { format!("{} e.g. {}", bad.len(), bad[0]) }))
    })
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let count = census::check_theorem("thm5a-count", &json!({}), BUDGET).unwrap();
    let mut ok = count.passed();
    notes.push(format!("2c > q^(n^2) on 4 cases: {}", if count.passed() { "holds" } else { "fails" }));
    let mut cases = Vec::new();
    for q in [3u32, 4, 5] {
        for n in [2usize, 3, 4] {
            cases.push((q, n));
        }
    }
    let failures: Vec<String> = cases
        .par_iter()
        .flat_map_iter(|&(q, n)| {
            let f = field(q);
            let mut rng = ChaCha8Rng::seed_from_u64(77 + q as u64 * 10 + n as u64);
            let mut out = Vec::new();
            for i in 0..1000u64 {
                let data: Vec<Elem> = (0..n * n).map(|_| rng.gen_range(0..q)).collect();
                let a = Mat::from_data(&f, n, data);
                let need_cyc = census::INVERTIBLE | census::CYCLIC;
                match waring::invertible_cyclic_pair(&a, i) {
                    Ok((b, c)) if b.add(&c) == a && census::flags_of(&b) & need_cyc == need_cyc && census::flags_of(&c) & need_cyc == need_cyc => {}
                    other => out.push(format!("cyclic q={q} n={n}: {:?}", other.err())),
                }
                let need_ss = census::INVERTIBLE | census::SEMISIMPLE;
                match waring::invertible_semisimple_pair(&a) {
                    Ok((b, c)) if b.add(&c) == a && census::flags_of(&b) & need_ss == need_ss && census::flags_of(&c) & need_ss == need_ss => {}
                    other => out.push(format!("semisimple q={q} n={n}: {:?}", other.err())),
                }
            }
            out
        })
        .collect();
    if !failures.is_empty() {
        ok = false;
    }
    notes.push(format!("18000 constructions over q in {{3,4,5}}, n in {{2,3,4}}: {} failures", failures.len()));
    let f2 = field(2);
    let a = Mat::from_ints(&f2, &[&[0, 1], &[1, 1]]);
    let hyp = |r: Result<(Mat, Mat), WaringError>| matches!(r, Err(WaringError::HypothesisFailed { .. }));
    let q2 = hyp(waring::invertible_cyclic_pair(&a, 0)) && hyp(waring::invertible_semisimple_pair(&a));
    ok &= q2;
    notes.push(format!("q = 2 reports HypothesisFailed: {q2}"));
    if let Some(first) = failures.first() {
        notes.push(format!("first failure: {first}"));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_11() -> Outcome {
    let r4 = census::check_theorem("remark4-stabilizer", &json!({}), BUDGET).unwrap();
    let ex1 = census::check_theorem("EX1", &json!({}), BUDGET).unwrap();
    let f = field(2);
    let full = census::Bitmap::full(16);
    let units = census::stabilizer(&f, 2, &full, census::Side::Left, BUDGET).unwrap();
    let whole = units.len() == 6;
    outcome(
        r4.passed() && ex1.passed() && whole,
        format!(
            "L_Pi(2,2) = {{I}}: {}; L_S = R_S and normality on the small grid: {}; L_M = GL_2(F_2): {}",
            r4.passed(),
            ex1.passed(),
            whole
        ),
    )
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "Theorem M22 reproduction", criterion_1),
        (1, "Theorem M22 against a naive oracle", criterion_1_oracle),
        (2, "Theorem M32 reproduction", criterion_2),
        (3, "Theorem M23 reproduction", criterion_3),
        (4, "Proposition exponent", criterion_4),
        (5, "Joly bound", criterion_5),
        (6, "Lifting soundness", criterion_6),
        (7, "Theorem nonscalar", criterion_7),
        (8, "Engine/census agreement", criterion_8),
        (9, "Corollary cor8", criterion_9),
        (10, "Theorem thm5 counting and constructions", criterion_10),
        (11, "Stabilizer claims", criterion_11),
    ];
    let mut unexpected = 0;
    let mut passed = BTreeMap::new();
    for (id, name, run) in criteria {
        let o = run();
        let documented = DOCUMENTED_FAILURES.iter().find(|(d, _)| *d == id);
        let status = if o.ok { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {id:>2} {name}: {}", o.detail);
        match (o.ok, documented) {
            (false, Some((_, why))) => line.push_str(&format!(" (documented: {why})")),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                line.push_str(" (listed as a documented failure but passed; update the list)");
                unexpected += 1;
            }
            (true, None) => {}
        }
        *passed.entry(id).or_insert(true) &= o.ok;
        println!("{line}");
    }
    let gated = (6..=10).all(|i| passed[&i]);
    println!(
        "{} 12 Asymptotic statements: covered by the hypothesis-gated suites 6-10 ({})",
        if gated { "PASS" } else { "FAIL" },
        if gated { "all passed" } else { "one failed" }
    );
    if !gated {
        unexpected += 1;
    }
    if unexpected > 0 {
        eprintln!("{unexpected} unexpected acceptance result(s)");
        std::process::exit(1);
    }
}
