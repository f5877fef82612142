use kausal_core::bits::{BitString, Seed, SymbolString};
use kausal_core::complexity::{estimate_k, estimate_k_cond, Outcome, Thresholds};
use kausal_core::compress::Stack;
use kausal_core::nonlocal::*;

const N: usize = 100_000;

/// Full search over every pair of `r`-round tables, independent of the
/// per-`b` optimization in the library.
fn brute_force_parallel_value(r: u32) -> u32 {
    let size = 1u32 << r;
    let tables: Vec<Vec<u32>> = (0..size.pow(size))
        .map(|mut i| {
            (0..size)
                .map(|_| {
                    let v = i % size;
                    i /= size;
                    v
                })
                .collect()
        })
        .collect();
    let mut best = 0;
    for f in &tables {
        for g in &tables {
            let mut wins = 0;
            for a in 0..size {
                for b in 0..size {
                    if f[a as usize] ^ g[b as usize] == a & b {
                        wins += 1;
                    }
                }
            }
            best = best.max(wins);
        }
    }
    best
}

/// Value frozen from `brute_force_parallel_value(2)`.
const PR_TWO_ROUND_VALUE: u32 = 10;

#[test]
fn parallel_value_oracles() {
    assert_eq!(brute_force_parallel_value(1), 3);
    assert_eq!(pr_parallel_value(1).unwrap().wins, 3);
    let two = brute_force_parallel_value(2);
    assert_eq!(two, PR_TWO_ROUND_VALUE);
    let v = pr_parallel_value(2).unwrap();
    assert_eq!((v.wins, v.total), (two, 16));
    assert_eq!(pr_parallel_wins(2, &v.f, &v.g), v.wins);
    assert!(matches!(pr_parallel_value(3), Err(kausal_core::Error::TooLarge(_))));
}

#[test]
fn magic_square_value_is_eight_ninths() {
    let v = magic_square_value();
    assert_eq!((v.wins, v.rounds), (8, 9));
    let q = gen_magic_square(N, &Seed::from_u64(5), &MagicStrategy::Deterministic { alice: v.alice, bob: v.bob }).unwrap();
    let frac = check_relation(&q).ok_count as f64 / N as f64;
    assert!((frac - 8.0 / 9.0).abs() <= 0.01, "{frac}");
}

#[test]
fn consistent_magic_square_never_loses() {
    for n in [1, 10, 5000] {
        let q = gen_magic_square(n, &Seed::from_u64(n as u64), &MagicStrategy::ConsistentPerRound).unwrap();
        assert!(check_relation(&q).violations.is_empty());
    }
}

#[test]
fn pr_relation_and_elementwise_identity() {
    let (q, _) = gen_pr(4096, &Seed::from_u64(1), &PrStrategy::NonlocalUnbiased).unwrap();
    assert!(check_relation(&q).violations.is_empty());
    let (a, b, x, y) = (q.a.bits().unwrap(), q.b.bits().unwrap(), q.x.bits().unwrap(), q.y.bits().unwrap());
    assert_eq!(&x.xor(&a.and(b).unwrap()).unwrap(), y);
    let (biased, _) = gen_pr(4096, &Seed::from_u64(1), &PrStrategy::Biased { p: 0.1 }).unwrap();
    assert!(check_relation(&biased).violations.is_empty());
}

#[test]
fn complexity_inheritance() {
    let c = Stack::default();
    let th = Thresholds::default();
    let (q, _) = gen_pr(N, &Seed::from_u64(7), &PrStrategy::NonlocalUnbiased).unwrap();
    let (a, x) = (q.a.bits().unwrap(), q.x.bits().unwrap());
    assert!(th.incompressible(&estimate_k(a, &c)).holds());
    assert!(estimate_k(x, &c).ratio() >= 0.5);
    assert!(estimate_k_cond(x, &[a], &c, None).unwrap().ratio() >= 0.3);
    let y_given_b = estimate_k_cond(q.y.bits().unwrap(), &[q.b.bits().unwrap()], &c, None).unwrap();
    assert!(y_given_b.ratio() >= 0.4);
    let ns = test_no_signaling(&q, &th, &c).unwrap();
    assert!(ns.verdict.holds(), "{ns:?}");
}

#[test]
fn signaling_construction_fails_first_equality() {
    let c = Stack::default();
    let a = kausal_core::bits::sample_incompressible(N, &Seed::from_u64(1));
    let b = kausal_core::bits::sample_incompressible(N, &Seed::from_u64(2));
    let x = b.clone();
    let y = x.xor(&a.and(&b).unwrap()).unwrap();
    let q = Quadruple::pr(a, b, x, y).unwrap();
    let ns = test_no_signaling(&q, &Thresholds::default(), &c).unwrap();
    assert_eq!(ns.checks[0].verdict.outcome, Outcome::Fails);
    assert!(ns.k_x_given_a.ratio() > 0.9 && ns.k_x_given_ab.ratio() < 0.05);
}

#[test]
fn local_strategies_collapse_and_do_not_signal() {
    let c = Stack::default();
    let th = Thresholds::default();
    for s in bundled_local_strategies() {
        let (q, lambda) = gen_pr(N, &Seed::from_u64(3), &PrStrategy::Local(s.clone())).unwrap();
        let mut cond = vec![q.a.bits().unwrap().clone()];
        if let Some(l) = &lambda {
            cond.extend(l.parts.iter().cloned());
        }
        let refs: Vec<&BitString> = cond.iter().collect();
        let e = estimate_k_cond(q.x.bits().unwrap(), &refs, &c, None).unwrap();
        assert!(e.ratio() <= 0.05, "{}: {}", s.name, e.ratio());
        assert!(test_no_signaling(&q, &th, &c).unwrap().verdict.holds(), "{}", s.name);
        if let Some(l) = &lambda {
            let loc = test_locality(&q, Some(l), &th, &c).unwrap();
            assert!(loc.local, "{}: {loc:?}", s.name);
        }
    }
}

#[test]
fn locality_certificates() {
    let c = Stack::default();
    let th = Thresholds::default();
    let z = BitString::zeros(N);
    let x = kausal_core::bits::sample_incompressible(N, &Seed::from_u64(9));
    let q = Quadruple::pr(z.clone(), z.clone(), x.clone(), x).unwrap();
    let r = test_locality(&q, None, &th, &c).unwrap();
    assert_eq!(r.certificate, Some(Certificate::SimpleInputs));

    let (pr, _) = gen_pr(N, &Seed::from_u64(8), &PrStrategy::NonlocalUnbiased).unwrap();
    let none = test_locality(&pr, None, &th, &c).unwrap();
    assert!(!none.local && none.certificate.is_none());
    let lambda = HiddenVariable { parts: vec![pr.x.bits().unwrap().clone(), pr.y.bits().unwrap().clone()] };
    let cand = test_locality(&pr, Some(&lambda), &th, &c).unwrap();
    assert!(!cand.local);
    assert_eq!(cand.checks[0].verdict.outcome, Outcome::Fails);
    assert!(cand.checks[1].verdict.holds() && cand.checks[2].verdict.holds());
}

#[test]
fn chained_bell_statistics() {
    let (n, m) = (1_000_000, 8u32);
    let rate = 1.0 / (m * m) as f64;
    let q = gen_chained(n, m, &Seed::from_u64(11), rate).unwrap();
    let (a, b) = (q.a.symbols().unwrap(), q.b.symbols().unwrap());
    let ones = b.indicator(1);
    let frac = ones.count_ones() as f64 / n as f64;
    assert!((frac - 0.125).abs() <= 0.01, "{frac}");
    let chi = chained_indicator(a, b);
    let mask = ones.ones_positions();
    let e = estimate_k_cond(&chi, &[], &Stack::default(), Some(&mask)).unwrap();
    let target = n as f64 / m as f64;
    assert!((e.value_bits as f64 - target).abs() <= 0.15 * target, "{} vs {target}", e.value_bits);
    let viol = check_relation(&q).violation_fraction();
    assert!((viol - rate).abs() <= 0.2 * rate, "{viol}");
    let kx = estimate_k(q.x.bits().unwrap(), &Stack::default());
    assert!(kx.value_bits as f64 >= n as f64 / (6.0 * m as f64));
}

#[test]
fn chained_without_errors_is_exact() {
    let q = gen_chained(20_000, 5, &Seed::from_u64(2), 0.0).unwrap();
    assert!(check_relation(&q).violations.is_empty());
    let a = SymbolString::new(vec![5, 1], 5).unwrap();
    let b = SymbolString::new(vec![1, 1], 5).unwrap();
    assert_eq!(chained_indicator(&a, &b).to_ascii(), "10");
}

#[test]
fn too_short_for_judgments() {
    let (q, _) = gen_pr(100, &Seed::from_u64(1), &PrStrategy::NonlocalUnbiased).unwrap();
    let th = Thresholds::default();
    assert!(matches!(test_no_signaling(&q, &th, &Stack::default()), Err(kausal_core::Error::TooShort { .. })));
    assert!(matches!(test_locality(&q, None, &th, &Stack::default()), Err(kausal_core::Error::TooShort { .. })));
}
