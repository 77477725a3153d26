mod support;

use ellc::channel::{transmit_with, ChannelKind, ErasurePattern};
use ellc::codec::{decode, encode, stitch_sections, uniquely_decode, CodeConfig, Family, GeneratorSet, PartialPath};
use ellc::gf2::{BitVector, RngStream};
use support::{brute_decode, brute_stitch, brute_unique, random_instance};

#[test]
fn decoder_matches_exhaustive_search() {
    for seed in 0..300 {
        let inst = random_instance(seed);
        let got = decode(&inst.y, &inst.cfg, &inst.gens, &inst.policy);
        assert!(!got.overloaded, "{}", inst.label);
        let want = brute_decode(&inst.y, &inst.cfg, &inst.gens, &inst.policy);
        assert_eq!(got.codewords, want, "{}", inst.label);
    }
}

#[test]
fn stitching_matches_exhaustive_search_from_every_root() {
    for seed in 1000..1080 {
        let inst = random_instance(seed);
        for root in 0..inst.cfg.sections {
            for budget in 0..=1 {
                let got = stitch_sections(&inst.y, budget, root, &inst.gens, &inst.cfg, 1_000_000);
                let got: Vec<_> = got.found.into_iter().map(|s| (s.codeword, s.erased)).collect();
                let want = brute_stitch(&inst.y, budget, root, &inst.cfg, &inst.gens);
                assert_eq!(got, want, "{} root {root} budget {budget}", inst.label);
            }
        }
    }
}

#[test]
fn unique_decoding_matches_enumeration() {
    let mut s = RngStream::new(7, "ud");
    for seed in 0..400 {
        let inst = random_instance(5000 + seed);
        let cfg = &inst.cfg;
        let l = cfg.sections;
        let root = s.below(l as u64) as usize;
        // A transmitted codeword with up to two sections dropped, or random junk.
        let cw = &inst.sent[0];
        let mut path = PartialPath::new(root, cw.section(root));
        let mut syms = vec![None; l];
        syms[root] = Some(cw.section(root));
        let junk = s.below(4) == 0;
        let mut dropped = 0;
        for t in 1..l {
            let sec = (root + t) % l;
            let v = if dropped < 2 && s.below(3) == 0 {
                dropped += 1;
                None
            } else if junk {
                Some(s.bits(cfg.section_bits))
            } else {
                Some(cw.section(sec))
            };
            path.push(v);
            syms[sec] = v;
        }
        assert_eq!(
            uniquely_decode(&path, &inst.gens, cfg),
            brute_unique(cfg, &inst.gens, &syms),
            "{}",
            inst.label
        );
    }
}

#[test]
fn single_erasure_recovery_rate() {
    // One erased section of a (16, 2) code leaves 8 unknowns against 16
    // equations, solvable iff a uniform 8x16 matrix has full row rank.
    let cfg = CodeConfig::new(Family::TailBitingWindow { window: 2 }, 128, 16, 16, 1).unwrap();
    let n = 10_000;
    let mut s = RngStream::new(11, "recovery");
    let mut ok = 0;
    for seed in 0..n {
        let gens = GeneratorSet::build(&cfg, seed, "recovery");
        let payload = BitVector::from_bits((0..128).map(|_| s.next_u64() & 1 == 1));
        let cw = encode(&payload, &cfg, &gens).unwrap();
        let erased = 1 + s.below(15) as usize;
        let mut p = PartialPath::new(0, cw.section(0));
        for t in 1..16 {
            p.push((t != erased).then(|| cw.section(t)));
        }
        match uniquely_decode(&p, &gens, &cfg) {
            Some(c) => {
                assert_eq!(c, cw);
                ok += 1;
            }
            None => {}
        }
    }
    let expect: f64 = (0..8).map(|i| 1.0 - 2f64.powi(i - 16)).product();
    let rate = ok as f64 / n as f64;
    let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
    assert!((rate - expect).abs() < 4.0 * sigma, "rate {rate} expected {expect}");
}

#[test]
fn noiseless_small_populations_are_recovered() {
    let cfg = CodeConfig::new(Family::TailBitingWindow { window: 2 }, 128, 16, 16, 1).unwrap();
    let mut s = RngStream::new(12, "noiseless");
    for k in 1..=10 {
        for rep in 0..5 {
            let gens = GeneratorSet::build(&cfg, (k * 10 + rep) as u64, "noiseless");
            let sent: Vec<_> = (0..k)
                .map(|_| encode(&BitVector::from_bits((0..128).map(|_| s.next_u64() & 1 == 1)), &cfg, &gens).unwrap())
                .collect();
            for kind in [ChannelKind::AChannel, ChannelKind::BChannel] {
                let y = transmit_with(&sent, &ErasurePattern::none(k, 16), kind);
                let policy = ellc::codec::DecodePolicy::default();
                let d = decode(&y, &cfg, &gens, &policy);
                for c in &sent {
                    assert!(d.codewords.contains(c), "K={k} rep {rep} {kind:?}");
                }
            }
        }
    }
}

#[test]
fn two_placeholders_match_exhaustive_search() {
    let mut checked = 0;
    let mut seed = 20_000;
    while checked < 60 {
        seed += 1;
        let inst = random_instance(seed);
        if inst.cfg.sections > 5 || inst.cfg.section_bits > 5 {
            continue;
        }
        checked += 1;
        for root in 0..inst.cfg.sections {
            let got = stitch_sections(&inst.y, 2, root, &inst.gens, &inst.cfg, 1_000_000);
            let got: Vec<_> = got.found.into_iter().map(|s| (s.codeword, s.erased)).collect();
            let want = brute_stitch(&inst.y, 2, root, &inst.cfg, &inst.gens);
            assert_eq!(got, want, "{} root {root}", inst.label);
        }
    }
}
