use converse_core::channel::{apply_noise, ChannelParams, NoiseSymbol, ReceivedSymbol};
use converse_core::codes::BipartiteCode;
use converse_core::decoders::{exact_majority_conditional_errors, map_decode_exhaustive};
use converse_core::entropy::{
    binary_entropy, conditional_entropy_bruteforce, fano_lower_bound, g_of_d,
};
use proptest::prelude::*;

fn code_strategy() -> impl Strategy<Value = BipartiteCode> {
    (2usize..=10, 1usize..=10, any::<u64>()).prop_flat_map(|(k, m, seed)| {
        (1usize..=k.min(4)).prop_map(move |c| BipartiteCode::random_regular(k, m, c, seed).unwrap())
    })
}

fn channel_strategy() -> impl Strategy<Value = ChannelParams> {
    (0.0f64..=1.0, 0.0f64..=1.0)
        .prop_filter("p1 + p_er <= 1", |(a, b)| a + b <= 1.0)
        .prop_map(|(a, b)| ChannelParams::new(a, b).unwrap())
}

/// Dense GF(2) generator rows: `x -> [x | x H^T]`.
fn dense_encode(code: &BipartiteCode, message: &[bool]) -> Vec<bool> {
    let mut rows = vec![vec![false; code.k()]; code.m()];
    for (j, row) in rows.iter_mut().enumerate() {
        for &i in code.parity_neighbors(j) {
            row[i] = true;
        }
    }
    let mut out = message.to_vec();
    out.extend(
        rows.iter()
            .map(|row| row.iter().zip(message).filter(|(h, x)| **h && **x).count() % 2 == 1),
    );
    out
}

proptest! {
    #[test]
    fn encoding_is_linear(code in code_strategy(), a in any::<u64>(), b in any::<u64>()) {
        let bits = |w: u64| (0..code.k()).map(|i| w >> i & 1 == 1).collect::<Vec<_>>();
        let (x, y) = (bits(a), bits(b));
        let sum: Vec<bool> = x.iter().zip(&y).map(|(p, q)| p ^ q).collect();
        let cx = code.encode(&x).unwrap().bits();
        let cy = code.encode(&y).unwrap().bits();
        let expected: Vec<bool> = cx.iter().zip(&cy).map(|(p, q)| p ^ q).collect();
        prop_assert_eq!(code.encode(&sum).unwrap().bits(), expected);
    }

    #[test]
    fn encoding_matches_dense_generator(code in code_strategy(), w in any::<u64>()) {
        let x: Vec<bool> = (0..code.k()).map(|i| w >> i & 1 == 1).collect();
        prop_assert_eq!(code.encode(&x).unwrap().bits(), dense_encode(&code, &x));
    }

    #[test]
    fn code_file_round_trip(code in code_strategy()) {
        let text = code.serialize();
        let parsed = BipartiteCode::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &code);
        prop_assert_eq!(parsed.serialize(), text);
    }

    #[test]
    fn g_is_bounded_and_nonincreasing(p in channel_strategy(), d in 0usize..200) {
        let (g0, g1) = (g_of_d(&p, d), g_of_d(&p, d + 1));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&g0));
        prop_assert!(g1 <= g0 + 1e-12);
    }

    #[test]
    fn g_is_symmetric_in_retain_and_flip(p in channel_strategy(), d in 0usize..60) {
        let swapped = ChannelParams::new(p.p0(), p.p_er()).unwrap();
        prop_assert!((g_of_d(&p, d) - g_of_d(&swapped, d)).abs() <= 1e-12);
    }

    #[test]
    fn single_copy_matches_closed_form(p in channel_strategy()) {
        let h = p.p_er() + (1.0 - p.p_er()) * binary_entropy((p.p1() / (1.0 - p.p_er()).max(f64::MIN_POSITIVE)).min(1.0)).unwrap();
        let expected = if p.p_er() >= 1.0 { 1.0 } else { h };
        prop_assert!((g_of_d(&p, 0) - expected).abs() <= 1e-12);
    }

    #[test]
    fn conditional_entropy_dominates_sum_of_g(
        k in 1usize..=4, m in 1usize..=4, seed in any::<u64>(), p in channel_strategy()
    ) {
        let code = BipartiteCode::random_regular(k, m, 1.max(k / 2), seed).unwrap();
        let exact = conditional_entropy_bruteforce(&code, &p).unwrap();
        let fano = fano_lower_bound(&code, &p);
        prop_assert!(exact >= fano.entropy_sum - 1e-9);
        prop_assert!(exact <= k as f64 + 1e-9);
    }

    #[test]
    fn majority_errors_differ_only_by_ties(p in channel_strategy(), r in 0usize..40) {
        let (e0, e1) = exact_majority_conditional_errors(&p, r);
        prop_assert!(e1 <= e0 + 1e-15);
        prop_assert!((0.0..=1.0).contains(&e0));
    }
}

#[test]
fn map_recovers_noiseless_codewords() {
    let code = BipartiteCode::random_regular(8, 8, 3, 11).unwrap();
    let p = ChannelParams::noiseless();
    for w in 0u32..256 {
        let x: Vec<bool> = (0..8).map(|i| w >> i & 1 == 1).collect();
        let received: Vec<ReceivedSymbol> = code
            .encode(&x)
            .unwrap()
            .bits()
            .into_iter()
            .map(|bit| apply_noise(bit, NoiseSymbol::Retain))
            .collect();
        let decoded = map_decode_exhaustive(&code, &received, &p).unwrap();
        assert_eq!(decoded.estimate, x);
        assert!(decoded.tie_flags.iter().all(|t| !t));
    }
}
