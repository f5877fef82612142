use kausal_core::bits::{sample_biased, sample_incompressible, BitString, Seed};
use kausal_core::complexity::*;
use kausal_core::compress::{builtin, decode_container, encode_container, Stack};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

const N: usize = 100_000;
const SLACK: u64 = 64;

fn rand(n: usize, s: u64) -> BitString {
    sample_incompressible(n, &Seed::from_u64(s))
}

#[test]
fn constant_string_is_nearly_free() {
    let e = estimate_k(&BitString::zeros(N), &Stack::default());
    assert!(e.ratio() <= 0.02, "{}", e.ratio());
}

#[test]
fn seeded_string_is_incompressible() {
    for seed in 0..4 {
        let e = estimate_k(&rand(N, seed), &Stack::default());
        assert!(e.ratio() >= 0.95, "{}", e.ratio());
        assert!(e.value_bits <= N as u64);
    }
}

#[test]
fn alternating_pattern_is_nearly_free() {
    let alt = BitString::from_fn(N, |i| i % 2 == 1);
    assert!(estimate_k(&alt, &Stack::default()).ratio() <= 0.02);
}

#[test]
fn self_condition_is_nearly_free() {
    let s = rand(N, 11);
    let e = estimate_k_cond(&s, &[&s], &Stack::default(), None).unwrap();
    assert!(e.ratio() <= 0.05, "{}", e.ratio());
}

#[test]
fn mutual_information_examples() {
    let c = Stack::default();
    let s = rand(N, 21);
    let t = rand(N, 22);
    assert!(mutual_info_k(&s, &t, &c).ratio() <= 0.05);
    assert!(mutual_info_k(&s, &s, &c).ratio() >= 0.9);
    assert!(mutual_info_k(&s, &s.not(), &c).ratio() >= 0.9);
}

#[test]
fn judge_examples() {
    let c = Stack::default();
    let th = Thresholds::default();
    let s = rand(N, 31);
    let t = rand(N, 32);
    assert!(judge(Judgment::ApproxZero(&BitString::zeros(N)), &th, &c).unwrap().holds());
    assert!(judge(Judgment::Incompressible(&s), &th, &c).unwrap().holds());
    assert_eq!(judge(Judgment::Independent(&s, &s), &th, &c).unwrap().outcome, Outcome::Fails);
    assert!(judge(Judgment::Independent(&s, &t), &th, &c).unwrap().holds());
    let parity = s.xor(&t).unwrap();
    assert_eq!(judge(Judgment::CondIndependent(&s, &t, &parity), &th, &c).unwrap().outcome, Outcome::Fails);
    let fresh = rand(N, 33);
    assert!(judge(Judgment::CondIndependent(&s, &t, &fresh), &th, &c).unwrap().holds());
}

#[test]
fn profile_slopes() {
    let c = Stack::default();
    let lens = [20_000, 40_000, 60_000, 80_000, 100_000];
    let zero = complexity_profile(&lens, BitString::zeros, &c).unwrap();
    assert!(zero.slope <= 0.02);
    let random = complexity_profile(&lens, |n| rand(n, 41), &c).unwrap();
    assert!(random.slope >= 0.95);
    let half = complexity_profile(&lens, |n| rand(n / 2, 42).concat(&BitString::zeros(n - n / 2)), &c).unwrap();
    assert!((half.slope - 0.5).abs() <= 0.05, "{}", half.slope);
    assert!(complexity_profile(&lens[..2], BitString::zeros, &c).is_err());
}

/// Pairs the invariants below are checked on.
fn corpus(n: usize) -> Vec<(&'static str, BitString, BitString)> {
    let x = rand(n, 51);
    let y = rand(n, 52);
    let half = rand(n / 2, 53).concat(&BitString::zeros(n - n / 2));
    vec![
        ("random", x.clone(), y.clone()),
        ("zeros", BitString::zeros(n), BitString::zeros(n)),
        ("ones-random", BitString::ones(n), x.clone()),
        ("alternating", BitString::from_fn(n, |i| i % 2 == 0), y.clone()),
        ("half-zeros", half.clone(), x.clone()),
        ("same-bias", sample_biased(n, 0.2, &Seed::from_u64(54)), sample_biased(n, 0.2, &Seed::from_u64(55))),
        ("copy", x.clone(), x.clone()),
        ("negation", x.clone(), x.not()),
    ]
}

#[test]
fn subadditivity_on_corpus() {
    let c = Stack::default();
    for (name, x, y) in corpus(20_000) {
        let joint = estimate_k(&x.concat(&y), &c).value_bits;
        let sum = estimate_k(&x, &c).value_bits + estimate_k(&y, &c).value_bits;
        assert!(joint <= sum + SLACK, "{name}: {joint} > {sum} + {SLACK}");
    }
}

#[test]
fn symmetry_of_information_on_corpus() {
    let c = Stack::default();
    for (name, x, y) in corpus(20_000) {
        let ixy = mutual_info_k(&x, &y, &c).value_bits as f64;
        let iyx = mutual_info_k(&y, &x, &c).value_bits as f64;
        let bound = 0.05 * x.len().min(y.len()) as f64;
        assert!((ixy - iyx).abs() <= bound, "{name}: {ixy} vs {iyx}");
    }
}

#[test]
fn more_condition_never_hurts_much() {
    let c = Stack::default();
    let z = rand(20_000, 56);
    for (name, x, y) in corpus(20_000) {
        let one = estimate_k_cond(&x, &[&y], &c, None).unwrap().value_bits;
        let two = estimate_k_cond(&x, &[&y, &z], &c, None).unwrap().value_bits;
        assert!(two <= one + SLACK, "{name}: {two} > {one} + {SLACK}");
    }
}

#[test]
fn lossless_on_ten_thousand_strings() {
    let codecs: Vec<_> = ["stack", "lz77", "cm"].iter().map(|id| builtin(id).unwrap()).collect();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(99);
    for i in 0..10_000u64 {
        let n = rng.random_range(0..1500);
        let s = match i % 5 {
            0 => rand(n, i),
            1 => BitString::from_fn(n, |_| rng.random_bool(0.05)),
            2 => {
                let p = rng.random_range(1..40);
                BitString::from_fn(n, |j| (j % p) < p / 2)
            }
            3 => {
                let h = rand(n / 2, i);
                h.concat(&h.not()).concat(&BitString::ones(n % 7))
            }
            _ => BitString::from_fn(n, |j| (j / 97) % 2 == 0),
        };
        let codec = &codecs[(i % 3) as usize];
        let bytes = encode_container(codec.as_ref(), &[], &[&s]);
        let back = decode_container(codec.as_ref(), &[], &bytes).unwrap();
        assert_eq!(back, vec![s], "string {i} under {}", codec.id());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimates_stay_within_bounds(bits in proptest::collection::vec(any::<bool>(), 1..3000)) {
        let s: BitString = bits.into_iter().collect();
        let e = estimate_k(&s, &Stack::default());
        prop_assert!(e.value_bits <= s.len() as u64);
    }

    #[test]
    fn subadditivity_random_pairs(a in 0u64..1000, b in 0u64..1000, la in 1usize..6000, lb in 1usize..6000) {
        let c = Stack::default();
        let x = rand(la, a);
        let y = rand(lb, b + 1000);
        let joint = estimate_k(&x.concat(&y), &c).value_bits;
        prop_assert!(joint <= estimate_k(&x, &c).value_bits + estimate_k(&y, &c).value_bits + SLACK);
    }

    #[test]
    fn round_trip_with_helper(a in 0u64..1000, la in 0usize..4000, lh in 0usize..4000, flip in any::<bool>()) {
        let h = rand(lh, a);
        let mut s = rand(la, a + 7);
        if flip {
            s = h.prefix(la.min(lh)).not().concat(&s);
        }
        for id in ["stack", "lz77", "cm"] {
            let codec = builtin(id).unwrap();
            let bytes = encode_container(codec.as_ref(), &[&h], &[&s, &h]);
            let back = decode_container(codec.as_ref(), &[&h], &bytes).unwrap();
            prop_assert_eq!(back, vec![s.clone(), h.clone()]);
        }
    }
}
