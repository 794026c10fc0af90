use proptest::prelude::*;

use fsdim::distributions::{kl_divergence, smooth, total_variation};
use fsdim::entropy::{
    block_entropy, chain_rule_decompose, cond_block_entropy, interleave_product_entropy_equal, mutual_info_rate,
};
use fsdim::gambler::{random_gambler, GamblerSpec};
use fsdim::ops::{doubled, interleave, interleave_strings, ApExtract};
use fsdim::string::{decode_product, encode_product};
use fsdim::{Alphabet, SequenceSource, SymbolString};
use rand::SeedableRng;

fn string(base: usize, max_len: usize) -> impl Strategy<Value = SymbolString> {
    prop::collection::vec(0..base as u16, 0..=max_len)
        .prop_map(move |v| SymbolString::new(Alphabet::digits(base).unwrap(), v).unwrap())
}

/// `d` strings of one common length over one alphabet.
fn parts(max_d: usize, max_len: usize) -> impl Strategy<Value = Vec<SymbolString>> {
    (2usize..=3, 1..=max_d, 0..=max_len).prop_flat_map(|(base, d, n)| {
        prop::collection::vec(prop::collection::vec(0..base as u16, n), d).prop_map(move |cols| {
            cols.into_iter()
                .map(|c| SymbolString::new(Alphabet::digits(base).unwrap(), c).unwrap())
                .collect()
        })
    })
}

fn simplex(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_len).prop_flat_map(simplex_of)
}

fn simplex_of(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], len).prop_filter_map("all zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 0.0).then(|| v.iter().map(|x| x / s).collect())
    })
}

proptest! {
    #[test]
    fn extract_inverts_interleave(ps in parts(6, 60)) {
        let x = interleave_strings(&ps).unwrap();
        prop_assert_eq!(x.len(), ps.len() * ps[0].len());
        for (i, p) in ps.iter().enumerate() {
            prop_assert_eq!(&x.ap_extract(ps.len(), i).unwrap(), p);
        }
    }

    #[test]
    fn extract_length_is_ceiling(x in string(3, 50), (d, i) in (1usize..6).prop_flat_map(|d| (Just(d), 0..d))) {
        let a = x.ap_extract(d, i).unwrap();
        let expect = if i >= x.len() { 0 } else { (x.len() - i).div_ceil(d) };
        prop_assert_eq!(a.len(), expect);
    }

    #[test]
    fn doubled_is_self_interleave(seed in any::<u64>(), n in 0usize..200) {
        let src = SequenceSource::random(Alphabet::digits(3).unwrap(), seed);
        let twice = interleave(&[src.clone(), src.clone()]).unwrap();
        prop_assert_eq!(doubled(&src).prefix(n).unwrap(), twice.prefix(n).unwrap());
    }

    #[test]
    fn product_round_trip(ps in parts(4, 40)) {
        let enc = encode_product(&ps).unwrap();
        prop_assert_eq!(decode_product(&enc).unwrap(), ps);
    }

    #[test]
    fn entropies_are_rates(x in string(3, 120), y in string(2, 120), ell in 1usize..4) {
        let n = x.len().min(y.len());
        prop_assume!(n >= ell);
        let (x, y) = (x.prefix(n), y.prefix(n));
        let h = block_entropy(&x, ell).unwrap();
        let hc = cond_block_entropy(&x, &y, ell).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((0.0..=1.0).contains(&hc));
        prop_assert!(hc <= h + 1e-12);
        prop_assert!(mutual_info_rate(&x, &y, ell).unwrap() >= -1e-12);
        prop_assert_eq!(cond_block_entropy(&x, &x, ell).unwrap(), 0.0);
    }

    #[test]
    fn chain_rule_and_interleave_identity(ps in parts(4, 90), ell in 1usize..4) {
        prop_assume!(ps[0].len() >= ell);
        let cr = chain_rule_decompose(&ps, ell).unwrap();
        prop_assert!(cr.residual() <= 1e-9);
        let (a, b) = interleave_product_entropy_equal(&ps, ell).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn smoothing_contract(p in simplex(12), frac in 0.001..0.999f64) {
        let eps = frac / p.len() as f64;
        let q = smooth(&p, eps).unwrap();
        prop_assert!(q.iter().all(|&v| v >= eps));
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() <= p.len() as f64 * eps));
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn divergence_ranges((p, q) in (2usize..=8).prop_flat_map(|n| (simplex_of(n), simplex_of(n)))) {
        let tv = total_variation(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
        if q.iter().all(|&v| v > 0.0) {
            let alpha = q.iter().copied().fold(f64::INFINITY, f64::min);
            let kl = kl_divergence(&p, &q).unwrap();
            prop_assert!(kl >= 0.0);
            prop_assert!(kl <= 2.0 / alpha * tv * tv * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn gambler_spec_round_trip(seed in any::<u64>(), window in 1usize..3, states in 1usize..4, accounts in 1usize..3) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = Alphabet::binary();
        let g = random_gambler(&Alphabet::digits(3).unwrap(), &b, window, states, accounts, &mut rng).unwrap();
        let spec = GamblerSpec::from_gambler(&g).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: GamblerSpec = serde_json::from_str(&text).unwrap();
        let h = back.to_gambler().unwrap();
        for q in 0..states {
            for y in 0..g.windows() {
                for a in 0..3 {
                    prop_assert_eq!(g.delta(q, y, a), h.delta(q, y, a));
                    for i in 0..accounts {
                        prop_assert!((g.beta(q, y, a, i) - h.beta(q, y, a, i)).abs() <= 1e-15);
                    }
                }
            }
        }
    }
}
