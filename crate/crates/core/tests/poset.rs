use kausal_core::bits::{sample_incompressible, BitString, Seed};
use kausal_core::complexity::Thresholds;
use kausal_core::compress::Stack;
use kausal_core::poset::*;

const N: usize = 20_000;

fn rand(n: usize, s: u64) -> BitString {
    sample_incompressible(n, &Seed::from_u64(s))
}

fn named(items: &[(&str, &BitString)]) -> Vec<(String, BitString)> {
    items.iter().map(|(n, s)| (n.to_string(), (*s).clone())).collect()
}

fn poset(items: &[(&str, &BitString)]) -> CausalPoset {
    build_poset(&named(items), &Thresholds::default(), &Stack::default()).unwrap()
}

fn check_antisymmetric_encoding(p: &CausalPoset) {
    for i in 0..p.len() {
        for j in 0..p.len() {
            let back = p.relation[j][i];
            match p.relation[i][j] {
                Relation::Precedes => assert_eq!(back, Relation::Succeeds),
                Relation::Succeeds => assert_eq!(back, Relation::Precedes),
                r => assert_eq!(back, r),
            }
        }
        assert_eq!(p.relation[i][i], Relation::Equivalent);
    }
}

#[test]
fn prefix_extension_is_an_effect() {
    let (s, t) = (rand(N, 1), rand(N, 2));
    let st = s.concat(&t);
    let p = poset(&[("s", &s), ("st", &st)]);
    assert!(p.precedes("s", "st").unwrap());
    assert!(!p.precedes("st", "s").unwrap());
    assert_eq!(p.relation_between("s", "st").unwrap(), Relation::Precedes);
    check_antisymmetric_encoding(&p);
}

#[test]
fn negation_is_equivalent_and_independent_is_spacelike() {
    let (s, t) = (rand(N, 3), rand(N, 4));
    let p = poset(&[("s", &s), ("not_s", &s.not())]);
    assert_eq!(p.relation_between("s", "not_s").unwrap(), Relation::Equivalent);
    let q = poset(&[("s", &s), ("t", &t)]);
    assert_eq!(q.relation_between("s", "t").unwrap(), Relation::Spacelike);
    let ex = q.detect_extremes();
    assert_eq!(ex.big_bang, None);
    assert_eq!(ex.causeless, vec!["s".to_string(), "t".to_string()]);
    assert_eq!(q.common_effect(&["s", "t"]).unwrap(), None);
    assert!(q.classify_determinism(&Stack::default()).unwrap().deterministic);
}

#[test]
fn common_effect_and_cause() {
    let (s, t) = (rand(N, 5), rand(N, 6));
    let st = s.concat(&t);
    let p = poset(&[("s", &s), ("t", &t), ("st", &st)]);
    assert_eq!(p.common_effect(&["s", "t"]).unwrap(), Some("st".into()));
    assert_eq!(p.common_effect(&["s"]).unwrap(), Some("s".into()));
    assert_eq!(p.common_cause(&["st"]).unwrap(), Some("st".into()));
    assert_eq!(p.common_cause(&["s", "t"]).unwrap(), None);
    assert!(p.common_effect(&[]).is_err());
}

#[test]
fn chain_has_big_bang_and_crunch() {
    let (s, t, u) = (rand(N, 7), rand(N, 8), rand(N, 9));
    let st = s.concat(&t);
    let stu = st.concat(&u);
    let p = poset(&[("s", &s), ("st", &st), ("stu", &stu)]);
    let ex = p.detect_extremes();
    assert_eq!(ex.big_bang.as_deref(), Some("s"));
    assert_eq!(ex.big_crunch.as_deref(), Some("stu"));
    assert!(p.violations.is_empty());
    let det = p.classify_determinism(&Stack::default()).unwrap();
    assert!(!det.deterministic);
    assert_eq!(p.check_triviality(&det), TrivialityReport::Skipped { reason: "probabilistic structure".into() });
}

#[test]
fn determinism_examples() {
    let (s, t) = (rand(N, 10), rand(N, 11));
    let sp = s.concat(&s.prefix(N / 3));
    let p = poset(&[("s", &s), ("sp", &sp)]);
    assert!(p.classify_determinism(&Stack::default()).unwrap().deterministic);
    let st = s.concat(&t);
    let q = poset(&[("s", &s), ("st", &st)]);
    let det = q.classify_determinism(&Stack::default()).unwrap();
    assert!(!det.deterministic);
    assert_eq!(det.witnesses, vec!["st".to_string()]);
}

#[test]
fn whole_class_is_both_extremes() {
    let b = rand(N, 12);
    let p = poset(&[("b", &b), ("nb", &b.not()), ("rot", &b.rotate_left(77))]);
    let ex = p.detect_extremes();
    assert_eq!(ex.big_bang.as_deref(), Some("b"));
    assert_eq!(ex.big_crunch.as_deref(), Some("b"));
    let det = p.classify_determinism(&Stack::default()).unwrap();
    assert!(matches!(p.check_triviality(&det), TrivialityReport::Confirmed { .. }));
}

#[test]
fn causal_distance_examples() {
    let th = Thresholds::default();
    let c = Stack::default();
    let (s, t) = (rand(N, 13), rand(N, 14));
    let st = s.concat(&t);
    assert!(causal_distance(("s", &s), ("s", &s), &th, &c).unwrap().value_bits as f64 <= 0.05 * N as f64);
    let d = causal_distance(("s", &s), ("st", &st), &th, &c).unwrap().value_bits as f64;
    assert!((d - N as f64).abs() <= 0.1 * N as f64, "{d}");
    let d = causal_distance(("s", &s), ("t", &t), &th, &c).unwrap().value_bits as f64;
    assert!((d - N as f64).abs() <= 0.1 * N as f64, "{d}");
    assert!(causal_distance(("s", &s.prefix(10)), ("t", &t), &th, &c).is_err());
}

#[test]
fn bit_permutation_leaves_verdicts_unchanged() {
    let (s, t) = (rand(N, 15), rand(N, 16));
    let set = [("s", s.clone()), ("ns", s.not()), ("t", t.clone()), ("x", s.xor(&t).unwrap())];
    // fixed permutation: multiply positions by a unit modulo N
    let perm = |b: &BitString| BitString::from_fn(N, |i| b.get((i * 7919) % N));
    let a = build_poset(&set.iter().map(|(n, b)| (n.to_string(), b.clone())).collect::<Vec<_>>(), &Thresholds::default(), &Stack::default()).unwrap();
    let b = build_poset(&set.iter().map(|(n, b)| (n.to_string(), perm(b))).collect::<Vec<_>>(), &Thresholds::default(), &Stack::default()).unwrap();
    assert_eq!(a.relation, b.relation);
    for i in 0..a.len() {
        for j in 0..a.len() {
            let d = a.cond_bits[i][j].abs_diff(b.cond_bits[i][j]) as f64;
            assert!(d <= 0.02 * N as f64);
        }
    }
}

#[test]
fn report_outputs() {
    let (s, t) = (rand(N, 17), rand(N, 18));
    let st = s.concat(&t);
    let p = poset(&[("s", &s), ("t", &t), ("st", &st)]);
    let dot = p.to_dot();
    assert!(dot.contains("\"s\" -> \"st\";") && dot.contains("\"t\" -> \"st\";"));
    let json = p.to_json();
    assert_eq!(json["names"].as_array().unwrap().len(), 3);
    assert_eq!(json["relation"][0][2], "precedes");
}

#[test]
fn input_validation() {
    let th = Thresholds::default();
    let c = Stack::default();
    let s = rand(N, 19);
    assert!(build_poset(&named(&[("s", &s)]), &th, &c).is_err());
    assert!(build_poset(&named(&[("s", &s), ("s", &s)]), &th, &c).is_err());
    let short = s.prefix(100);
    assert!(matches!(build_poset(&named(&[("s", &s), ("short", &short)]), &th, &c), Err(kausal_core::Error::TooShort { .. })));
}

#[test]
fn triviality_on_constructed_sets() {
    let th = Thresholds::default();
    let c = Stack::default();
    for (i, set) in triviality_corpus(20, 8192, &Seed::from_u64(20)).iter().enumerate() {
        let p = build_poset(set, &th, &c).unwrap();
        let det = p.classify_determinism(&c).unwrap();
        let r = p.check_triviality(&det);
        assert!(matches!(r, TrivialityReport::Confirmed { .. }), "set {i}: {r:?}");
    }
}

#[test]
fn transitivity_on_standard_corpus() {
    let (s, t, u) = (rand(N, 21), rand(N, 22), rand(N, 23));
    let st = s.concat(&t);
    let items = [
        ("s", s.clone()),
        ("t", t.clone()),
        ("u", u.clone()),
        ("ns", s.not()),
        ("st", st.clone()),
        ("stu", st.concat(&u)),
        ("x", s.xor(&t).unwrap()),
        ("zeros", BitString::zeros(N)),
    ];
    let p = build_poset(&items.iter().map(|(n, b)| (n.to_string(), b.clone())).collect::<Vec<_>>(), &Thresholds::default(), &Stack::default()).unwrap();
    assert!(p.violation_rate() <= 0.05, "{:?}", p.violations);
    check_antisymmetric_encoding(&p);
}
