//! Decomposition engine against worked examples and hypothesis-gated families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use waringmat::census;
use waringmat::gf::{self, Elem};
use waringmat::waring::{self, Constraint, TraceStrategy, WaringError};
use waringmat::{build_field, Mat};

fn random_matrix(rng: &mut ChaCha8Rng, f: &gf::FieldRef, n: usize) -> Mat {
    let data: Vec<Elem> = (0..n * n).map(|_| rng.gen_range(0..f.q())).collect();
    Mat::from_data(f, n, data)
}

#[test]
fn split_semisimple_when_field_is_large() {
    // q >= (d-1)^4 + 6d
    let cases = [(7u64, 1u32, 1u128), (2, 3, 1), (7, 1, 5), (2, 3, 3), (13, 1, 2), (17, 1, 2), (19, 1, 2), (3, 2, 5)];
    for (p, l, k) in cases {
        let f = build_field(p, l).unwrap();
        let d = gf::gcd(k, f.q() as u128 - 1);
        assert!(f.q() as u128 >= (d - 1).pow(4) + 6 * d);
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64 * 1000 + f.q() as u64);
        for _ in 0..60 {
            let n = rng.gen_range(1..=5);
            let a = random_matrix(&mut rng, &f, n);
            let d = waring::decompose(&a, k, Constraint::SplitSemisimple)
                .unwrap_or_else(|e| panic!("GF({}) k={k}\n{}\n{e}", f.q(), a.to_text()));
            assert!(waring::verify_decomposition(&a, k, &d, Constraint::SplitSemisimple));
        }
    }
}

#[test]
fn invertible_roots_for_coprime_exponents() {
    for (p, l, k) in [(5u64, 1u32, 3u128), (7, 1, 5), (2, 1, 5), (2, 1, 7), (3, 2, 7)] {
        let f = build_field(p, l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(p * 31 + k as u64);
        for _ in 0..60 {
            let n = rng.gen_range(2..=5);
            let a = random_matrix(&mut rng, &f, n);
            if a.is_scalar() {
                continue;
            }
            match waring::decompose(&a, k, Constraint::Invertible) {
                Ok(d) => assert!(waring::verify_decomposition(&a, k, &d, Constraint::Invertible)),
                Err(e) => panic!("GF({}) k={k}\n{}\n{e}", f.q(), a.to_text()),
            }
        }
    }
}

#[test]
fn binary_invertible_odd_identity_is_not_constructed() {
    // 1 is not a sum of two nonzero k-th powers in GF(2), so thm4 excludes odd-size identities
    let f = build_field(2, 1).unwrap();
    let i3 = Mat::identity(&f, 3);
    assert!(matches!(waring::decompose(&i3, 7, Constraint::Invertible), Err(WaringError::NotDecomposable { .. })));
    let i4 = Mat::identity(&f, 4);
    let d = waring::decompose(&i4, 5, Constraint::Invertible).unwrap();
    assert!(waring::verify_decomposition(&i4, 5, &d, Constraint::Invertible));
}

#[test]
fn scalar_strategies() {
    let f4 = build_field(2, 2).unwrap();
    let cfg = waringmat::config::Config::default();
    for a in 0..4 {
        let d = waring::decompose_scalar(&f4, a, 3, 3, Constraint::None, &cfg).unwrap();
        assert!(waring::verify_decomposition(&Mat::scalar(&f4, 3, a), 3, &d, Constraint::None));
    }
    // g I_2 over GF(4) with k = 3: engine and census must agree
    let gi = Mat::scalar(&f4, 2, 2);
    let sp = census::space(&f4, 2, 1 << 20).unwrap();
    let in_p = census::sumset_p(&f4, 2, 3, 1 << 20).unwrap().get(sp.index(&gi));
    assert_eq!(waring::decompose(&gi, 3, Constraint::None).is_ok(), in_p);
    let f3 = build_field(3, 1).unwrap();
    let d = waring::decompose_scalar(&f3, 2, 2, 2, Constraint::None, &cfg).unwrap();
    assert!(d.b.is_identity() && d.c.is_identity());
    let f7 = build_field(7, 1).unwrap();
    let d = waring::decompose_scalar(&f7, 2, 3, 3, Constraint::InvertibleCyclic, &cfg).unwrap();
    assert!(waring::verify_decomposition(&Mat::scalar(&f7, 3, 2), 3, &d, Constraint::InvertibleCyclic));
    assert!(matches!(
        waring::decompose_scalar(&f7, 3, 2, 1, Constraint::IdempotentSummands, &cfg),
        Err(WaringError::NoPartition)
    ));
}

#[test]
fn idempotent_sums() {
    let f2 = build_field(2, 1).unwrap();
    let sp = census::space(&f2, 2, 1 << 20).unwrap();
    let pi = census::sumset_pi(&f2, 2, 1 << 20).unwrap();
    for i in 0..sp.size() {
        let a = sp.matrix(i);
        match waring::decompose(&a, 1, Constraint::IdempotentSummands) {
            Ok(d) => {
                assert!(pi.get(i));
                assert!(d.b.is_idempotent() && d.c.is_idempotent());
            }
            Err(WaringError::NotDecomposable { .. }) => assert!(!pi.get(i)),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn trace_plan_hypotheses() {
    let f7 = build_field(7, 1).unwrap();
    assert!(matches!(
        waring::plan_trace_split(&f7, 0, 4, 3, TraceStrategy::Thm8),
        Err(WaringError::HypothesisFailed { .. })
    ));
    let f37 = build_field(37, 1).unwrap();
    let plan = waring::plan_trace_split(&f37, 0, 4, 3, TraceStrategy::Thm8).unwrap();
    assert_eq!(plan.total(&f37), 0);
    assert_eq!(plan.b[2], 1);
    let f11 = build_field(11, 1).unwrap();
    for t in 0..11 {
        let plan = waring::plan_trace_split(&f11, t, 8, 5, TraceStrategy::Thm10).unwrap();
        assert_eq!(plan.total(&f11), t);
    }
    assert!(waring::plan_trace_split(&f11, 0, 4, 5, TraceStrategy::Thm10).is_err());
}

#[test]
fn json_report_shape() {
    let f = build_field(5, 1).unwrap();
    let a = Mat::from_ints(&f, &[&[1, 3], &[-1, 1]]);
    let d = waring::decompose(&a, 4, Constraint::None).unwrap();
    let v = d.to_json();
    assert_eq!(v["strategy"], "LP");
    assert_eq!(v["k"], 4);
    assert_eq!(v["B"]["field"], "5^1");
    assert_eq!(v["certificate"]["B"]["idempotent"], true);
    assert!(d.to_text().contains("strategy: LP"));
}
