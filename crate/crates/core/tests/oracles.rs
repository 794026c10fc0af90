//! Library results against independent brute-force computations and the
//! measured behaviour of the standard constructions.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsdim::analysis::{
    verify_ap_lower, verify_ap_upper, verify_mutual_dim_sandwich, verify_regular_equation, verify_van_lambalgen,
    Status, Subject,
};
use fsdim::distributions::JointDistribution;
use fsdim::entropy::{cond_block_entropy, mutual_info_rate, KGrid};
use fsdim::gambler::{
    copy_gambler, cover_gambler, from_distribution, random_gambler, stretch, uniform_gambler, FsGambler, Fsrg,
};
use fsdim::ops::{champernowne, doubled, skip, ApExtract};
use fsdim::stages::{build_oscillating_lower, build_oscillating_upper, StageCaps};
use fsdim::{Alphabet, SequenceSource, SymbolString};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_string(a: &Alphabet, n: usize, r: &mut ChaCha8Rng) -> SymbolString {
    SequenceSource::random(a.clone(), r.gen()).prefix(n).unwrap()
}

fn champ(n: usize) -> SymbolString {
    champernowne(&Alphabet::binary()).prefix(n).unwrap()
}

/// `-(1/(l log|S1|)) sum P(u,v) log P(u|v)` straight from block strings.
fn naive_cond_entropy(x: &SymbolString, y: &SymbolString, ell: usize) -> f64 {
    let k = x.len() / ell;
    let mut joint: HashMap<(Vec<u16>, Vec<u16>), f64> = HashMap::new();
    let mut oracle: HashMap<Vec<u16>, f64> = HashMap::new();
    for i in 0..k {
        let u = x.symbols()[i * ell..(i + 1) * ell].to_vec();
        let v = y.symbols()[i * ell..(i + 1) * ell].to_vec();
        *joint.entry((u, v.clone())).or_default() += 1.0;
        *oracle.entry(v).or_default() += 1.0;
    }
    let mut h = 0.0;
    for ((_, v), c) in &joint {
        h -= c / k as f64 * (c / oracle[v]).ln();
    }
    h / (ell as f64 * (x.alphabet().size() as f64).ln())
}

/// Step-by-step capital of every account, in the log domain.
fn naive_log2_capitals(g: &Fsrg, x: &SymbolString, y: &SymbolString, s: f64) -> Vec<f64> {
    let (w, r2) = (g.window(), g.sigma2().size());
    let gain = s * (g.sigma1().size() as f64).log2();
    let mut q = g.start();
    let mut caps: Vec<f64> = g.capital().iter().map(|c| c.log2()).collect();
    for t in 0..x.len() {
        let yw = y.symbols()[t..t + w].iter().fold(0usize, |acc, &c| acc * r2 + c as usize);
        let a = x.symbols()[t];
        for (i, c) in caps.iter_mut().enumerate() {
            *c += gain + g.beta(q, yw, a, i).log2();
        }
        q = g.delta(q, yw, a);
    }
    caps
}

#[test]
fn conditional_entropy_matches_definition() {
    let mut r = rng(11);
    for _ in 0..200 {
        let (a, b) = (Alphabet::digits(r.gen_range(2..=4)).unwrap(), Alphabet::digits(r.gen_range(2..=3)).unwrap());
        let ell = r.gen_range(1..=3);
        let n = r.gen_range(ell..=600);
        let x = random_string(&a, n, &mut r);
        let y = if r.gen_bool(0.3) { SequenceSource::constant(b.clone(), '0').unwrap().prefix(n).unwrap() } else {
            random_string(&b, n, &mut r)
        };
        let lib = cond_block_entropy(&x, &y, ell).unwrap();
        let naive = naive_cond_entropy(&x, &y, ell);
        assert!((lib - naive).abs() < 1e-12, "{lib} vs {naive}");
    }
}

#[test]
fn gale_matches_step_by_step_simulation() {
    let mut r = rng(12);
    for _ in 0..100 {
        let (a, b) = (Alphabet::digits(r.gen_range(2..=3)).unwrap(), Alphabet::digits(r.gen_range(2..=3)).unwrap());
        let w = r.gen_range(1..=3);
        let g = random_gambler(&a, &b, w, r.gen_range(1..=5), r.gen_range(1..=3), &mut r).unwrap();
        let n = r.gen_range(0..=300);
        let x = random_string(&a, n, &mut r);
        let y = random_string(&b, n + w - 1, &mut r);
        let s = r.gen::<f64>();
        let lib = g.run(&x, &y).unwrap().log2_account_capitals(s, n).unwrap();
        let naive = naive_log2_capitals(&g, &x, &y, s);
        for (l, m) in lib.iter().zip(&naive) {
            assert!((l - m).abs() <= 1e-9 * m.abs().max(1.0), "{l} vs {m}");
        }
    }
}

#[test]
fn oracle_ignoring_wrapper_matches_classic_gale() {
    let mut r = rng(13);
    let a = Alphabet::digits(3).unwrap();
    let b = Alphabet::binary();
    for _ in 0..50 {
        let fg = FsGambler::random(&a, r.gen_range(1..=4), &mut r);
        let g = Fsrg::ignoring_oracle(&fg, &b, 2).unwrap();
        let x = random_string(&a, 200, &mut r);
        let y = random_string(&b, 201, &mut r);
        let s = r.gen::<f64>();
        let classic = fg.log2_gale(&x, s);
        let t = g.run(&x, &y).unwrap();
        for n in 0..=x.len() {
            assert!((t.log2_capital(s, n).unwrap() - classic[n]).abs() < 1e-9);
        }
    }
}

#[test]
fn copy_gambler_doubles_binary_capital_at_half() {
    let x = champ(10);
    let t = copy_gambler(&Alphabet::binary()).run(&x, &x).unwrap();
    assert_eq!(t.evaluate(0.5, 10).unwrap(), 32.0);
}

#[test]
fn uniform_distribution_gives_uniform_bets() {
    let a = Alphabet::digits(3).unwrap();
    let b = Alphabet::binary();
    let g = from_distribution(&JointDistribution::uniform(a.clone(), b.clone(), 2).unwrap()).unwrap();
    let u = uniform_gambler(&a, &b, 2).unwrap();
    let mut r = rng(14);
    let x = random_string(&a, 100, &mut r);
    let y = random_string(&b, 101, &mut r);
    for s in [0.0, 0.3, 1.0] {
        let (tg, tu) = (g.run(&x, &y).unwrap(), u.run(&x, &y).unwrap());
        for n in 0..=100 {
            assert!((tg.log2_capital(s, n).unwrap() - tu.log2_capital(s, n).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn stretched_uniform_bettor_is_still_uniform() {
    let b = Alphabet::binary();
    let u = uniform_gambler(&b, &b, 2).unwrap();
    let su = stretch(&u, 7).unwrap();
    let mut r = rng(15);
    let x = random_string(&b, 140, &mut r);
    let y = random_string(&b, 141, &mut r);
    let (a, c) = (u.run(&x, &y).unwrap(), su.run(&x, &y).unwrap());
    for n in 0..=140 {
        assert_eq!(a.log2_capital(0.6, n).unwrap(), c.log2_capital(0.6, n).unwrap());
    }
}

#[test]
fn cover_gambler_cannot_beat_champernowne() {
    let b = Alphabet::binary();
    let x = champ(1 << 16);
    let zeros = SequenceSource::constant(b.clone(), '0').unwrap().prefix((1 << 16) + 3).unwrap();
    for (ell, eps) in [(4, 0.002), (1, 0.05)] {
        let c = cover_gambler(ell, &b, &b, eps, 4096).unwrap();
        let s = c.gambler.run_at(&x, &zeros, &[1 << 16]).unwrap().break_even_exponent(1 << 16).unwrap();
        let split = (c.representatives.len() as f64).log2() / (1 << 16) as f64;
        assert!((0.9..=1.0 + split).contains(&s), "l = {ell}: s* = {s}");
    }
}

#[test]
fn cover_grid_is_an_eps_net() {
    let mut r = rng(16);
    let b = Alphabet::binary();
    let eps = 0.05;
    let c = cover_gambler(1, &b, &b, eps, 4096).unwrap();
    for _ in 0..500 {
        let w: Vec<f64> = (0..4).map(|_| r.gen::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let p = JointDistribution::new(b.clone(), b.clone(), 1, w.iter().map(|v| v / total).collect())
            .unwrap()
            .smoothed(eps)
            .unwrap();
        let (_, dist) = c.closest(p.weights());
        assert!(dist <= 2.0 * 4.0 * eps, "{dist}");
    }
}

#[test]
fn offset_champernowne_is_nearly_independent() {
    let x = champ(1 << 18);
    let y = skip(&champernowne(&Alphabet::binary()), 123_457).prefix(1 << 18).unwrap();
    assert!(mutual_info_rate(&x, &y, 2).unwrap() <= 0.05);
}

#[test]
fn ap_lower_on_champernowne() {
    let x = Subject::new("champernowne", champ(1 << 20));
    let r = verify_ap_lower(&x, 2, &[0, 1], 4, &KGrid::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert!(r.lhs >= 0.93 && r.rhs >= 0.93, "{} {}", r.lhs, r.rhs);
    assert!(r.residuals["chain_rule"] <= 1e-9);
}

#[test]
fn ap_lower_on_doubled_champernowne() {
    let x = Subject::new("doubled", doubled(&champernowne(&Alphabet::binary())).prefix(1 << 20).unwrap());
    let r = verify_ap_lower(&x, 2, &[0, 1], 2, &KGrid::default()).unwrap();
    assert!((r.lhs - 0.5).abs() <= 0.02, "{}", r.lhs);
    assert!(r.value("term0_tail_min").unwrap() >= 0.98);
    assert_eq!(r.value("term1_tail_max").unwrap(), 0.0);
}

#[test]
fn ap_bounds_hold_on_random_arrays() {
    let mut r = rng(17);
    for _ in 0..20 {
        let a = Alphabet::digits(r.gen_range(2..=3)).unwrap();
        let d = r.gen_range(1..=3);
        let x = Subject::new("random", random_string(&a, 12 * r.gen_range(20..=400), &mut r));
        let mut sigma: Vec<usize> = (0..d).collect();
        sigma.rotate_left(r.gen_range(0..d));
        assert_eq!(verify_ap_lower(&x, d, &sigma, 2, &KGrid::default()).unwrap().status, Status::Pass);
        assert_eq!(verify_ap_upper(&x, d, &sigma, None, 2, &KGrid::default()).unwrap().status, Status::Pass);
    }
}

#[test]
fn ap_upper_gap_on_lower_construction() {
    let (x, log) = build_oscillating_lower(&champernowne(&Alphabet::binary()), 4, &StageCaps::default()).unwrap();
    let grid = KGrid::Prefixes {
        lengths: log.boundaries(),
    };
    let r = verify_ap_upper(&Subject::new("lower", x), 2, &[0, 1], None, 4, &grid).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert!(r.lhs <= 0.1, "{}", r.lhs);
    assert!((0.35..=0.6).contains(&r.rhs), "{}", r.rhs);
}

#[test]
fn lower_construction_stage_entropies() {
    let (x, log) = build_oscillating_lower(&champernowne(&Alphabet::binary()), 4, &StageCaps::default()).unwrap();
    for rec in log.stages.iter().filter(|r| r.stage >= 2) {
        let h = fsdim::entropy::block_entropy(&x.prefix(rec.boundary), 1).unwrap();
        if rec.source == "zeros" {
            assert!(h <= 0.1, "stage {}: {h}", rec.stage);
        } else {
            assert!(h >= 0.9, "stage {}: {h}", rec.stage);
        }
    }
}

#[test]
fn stage_boundaries_divide_by_block_lengths() {
    let normal = champernowne(&Alphabet::binary());
    let caps = StageCaps::default();
    for (_, log) in [
        build_oscillating_upper(&normal, 4, &caps).unwrap(),
        build_oscillating_lower(&normal, 4, &caps).unwrap(),
    ] {
        for rec in &log.stages {
            for ell in 1..=rec.stage.clamp(1, caps.ell_cap) {
                assert_eq!(rec.boundary % ell, 0, "stage {} boundary {}", rec.stage, rec.boundary);
            }
        }
    }
}

#[test]
fn van_lambalgen_duplicate_pair() {
    let c = champ(1 << 16);
    let a = Subject::new("c", c.clone());
    let r = verify_van_lambalgen(&a, &a, 2, 0.1, &KGrid::default()).unwrap();
    let pa = fsdim::entropy::entropy_profile(&c, None, 4, &KGrid::default()).unwrap();
    assert_eq!(r.value("dim_B_given_A"), Some(0.0));
    assert!((r.value("dim_interleave").unwrap() - pa.tail_min[1] / 2.0).abs() < 1e-12);
}

#[test]
fn regular_equation_cases() {
    let b = Alphabet::binary();
    let n = 1 << 18;
    let zeros = Subject::new("zeros", SequenceSource::constant(b.clone(), '0').unwrap().prefix(n).unwrap());
    let c = Subject::new("champernowne", champ(n));
    let r = verify_regular_equation(&zeros, &c, 4, 0.1, &KGrid::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert!((r.rhs - 0.5).abs() <= 0.05);
    let r = verify_regular_equation(&c, &c, 4, 0.1, &KGrid::default()).unwrap();
    assert_eq!(r.status, Status::Pass);

    let (x, log) = build_oscillating_upper(&champernowne(&b), 4, &StageCaps::default()).unwrap();
    let half = x.ap_extract(2, 0).unwrap();
    let other = x.ap_extract(2, 1).unwrap().prefix(half.len());
    let grid = KGrid::Prefixes {
        lengths: log.boundaries().iter().map(|l| l / 2).collect(),
    };
    let r = verify_regular_equation(&Subject::new("A20", half), &Subject::new("A21", other), 4, 0.1, &grid).unwrap();
    assert_eq!(r.status, Status::Inapplicable);
}

#[test]
fn mutual_dimension_cases() {
    let c = champ(1 << 20);
    let x = Subject::new("c", c.clone());
    let r = verify_mutual_dim_sandwich(&x, &x, 4, &KGrid::default(), None).unwrap();
    assert_eq!(r.profiles["I"].h, r.profiles["X"].h);

    let (a0, a1) = (c.ap_extract(2, 0).unwrap(), c.ap_extract(2, 1).unwrap());
    let r = verify_mutual_dim_sandwich(&Subject::new("A0", a0), &Subject::new("A1", a1), 4, &KGrid::default(), Some(0.1))
        .unwrap();
    assert_eq!(r.status, Status::Pass);

    let mut g = rng(18);
    let b = Alphabet::binary();
    let (p, q) = (random_string(&b, 1 << 18, &mut g), random_string(&b, 1 << 18, &mut g));
    let r = verify_mutual_dim_sandwich(&Subject::new("p", p), &Subject::new("q", q), 4, &KGrid::default(), None).unwrap();
    assert!(r.value("mdim").unwrap() <= 0.05);
}
