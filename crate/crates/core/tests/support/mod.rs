//! Exhaustive reference decoder for small codes.
//!
//! Everything here is recomputed from the raw generator matrices with naive
//! GF(2) products, and every lexicographic tuple is enumerated, so it shares
//! no search or elimination code with the library decoder.

#![allow(dead_code)]

use ellc::channel::{transmit, ChannelKind, ChannelOutput};
use ellc::codec::{
    encode, CodeConfig, CodeParams, CodeRegistry, Codeword, DecodePolicy, Family, GeneratorSet, RootPolicy,
};
use ellc::gf2::{BitVector, RngStream};

pub fn sources(cfg: &CodeConfig, target: usize) -> Vec<usize> {
    let l = cfg.sections;
    match cfg.family {
        Family::TailBitingWindow { window } => (1..=window).map(|d| (target + l - d) % l).collect(),
        Family::FullHistoryTree => (0..target).collect(),
    }
}

fn info(cfg: &CodeConfig, s: usize, x: u64) -> u64 {
    x & ((1u64 << cfg.info_bits[s]) - 1)
}

fn parity(cfg: &CodeConfig, t: usize, x: u64) -> u64 {
    x >> cfg.info_bits[t]
}

/// `w(s) G_{s,t}` by the definition: bit `c` is the parity of `w AND column c`.
fn mul(cfg: &CodeConfig, gens: &GeneratorSet, s: usize, t: usize, w: u64) -> u64 {
    let g = &gens.get(s, t).expect("generator").matrix;
    let mut out = 0u64;
    for c in 0..cfg.parity_bits[t] {
        let mut bit = false;
        for r in 0..cfg.info_bits[s] {
            bit ^= (w >> r) & 1 == 1 && g.get(r, c);
        }
        if bit {
            out |= 1 << c;
        }
    }
    out
}

fn parity_rule(cfg: &CodeConfig, gens: &GeneratorSet, t: usize, infos: &[u64]) -> u64 {
    sources(cfg, t)
        .into_iter()
        .fold(0, |acc, s| acc ^ mul(cfg, gens, s, t, infos[s]))
}

/// Equation `t` on a section-indexed assignment; `None` if any party is unknown.
fn equation(cfg: &CodeConfig, gens: &GeneratorSet, t: usize, syms: &[Option<u64>]) -> Option<bool> {
    let own = syms[t]?;
    let mut acc = 0;
    for s in sources(cfg, t) {
        acc ^= mul(cfg, gens, s, t, info(cfg, s, syms[s]?));
    }
    Some(acc == parity(cfg, t, own))
}

/// Brute-force unique decoding by enumerating every value of the missing
/// information parts.
pub fn brute_unique(cfg: &CodeConfig, gens: &GeneratorSet, syms: &[Option<u64>]) -> Option<Codeword> {
    let l = cfg.sections;
    let missing: Vec<usize> = (0..l).filter(|&s| syms[s].is_none()).collect();
    let total: usize = missing.iter().map(|&s| cfg.info_bits[s]).sum();
    assert!(total <= 20, "oracle instance too large");
    let mut solution = None;
    for a in 0u64..(1 << total) {
        let mut infos: Vec<u64> = (0..l).map(|s| syms[s].map_or(0, |x| info(cfg, s, x))).collect();
        let mut shift = 0;
        for &s in &missing {
            infos[s] = (a >> shift) & ((1u64 << cfg.info_bits[s]) - 1);
            shift += cfg.info_bits[s];
        }
        let full: Vec<u64> = (0..l)
            .map(|s| match syms[s] {
                Some(x) => x,
                None => infos[s] | (parity_rule(cfg, gens, s, &infos) << cfg.info_bits[s]),
            })
            .collect();
        let ok = (0..l).all(|t| parity_rule(cfg, gens, t, &infos) == parity(cfg, t, full[t]));
        if ok {
            if solution.is_some() {
                return None;
            }
            solution = Some(Codeword::from_sections(full));
        }
    }
    solution
}

/// Every tuple in lexicographic order (ascending symbols, placeholder last)
/// that passes all fully-known equations and has at most `budget`
/// placeholders; the first uniquely decodable one per root symbol is kept.
pub fn brute_stitch(
    y: &ChannelOutput,
    budget: usize,
    root: usize,
    cfg: &CodeConfig,
    gens: &GeneratorSet,
) -> Vec<(Codeword, Vec<usize>)> {
    let l = cfg.sections;
    let options: Vec<Vec<Option<u64>>> = (0..l)
        .map(|s| {
            let mut v: Vec<Option<u64>> = y.section(s).symbols().map(Some).collect();
            v.sort();
            v.push(None);
            v
        })
        .collect();
    let mut found = Vec::new();
    let roots: Vec<u64> = y.section(root).symbols().collect();
    for x0 in roots {
        let mut tuples = Vec::new();
        let mut cur = vec![Some(x0)];
        enumerate(&options, root, l, &mut cur, &mut tuples);
        for tuple in tuples {
            let mut syms = vec![None; l];
            for (t, v) in tuple.iter().enumerate() {
                syms[(root + t) % l] = *v;
            }
            let na = syms.iter().filter(|v| v.is_none()).count();
            if na > budget {
                continue;
            }
            if (0..l).any(|t| equation(cfg, gens, t, &syms) == Some(false)) {
                continue;
            }
            if let Some(cw) = brute_unique(cfg, gens, &syms) {
                let erased = (0..l).filter(|&s| syms[s].is_none()).collect();
                found.push((cw, erased));
                break;
            }
        }
    }
    found
}

fn enumerate(
    options: &[Vec<Option<u64>>],
    root: usize,
    l: usize,
    cur: &mut Vec<Option<u64>>,
    out: &mut Vec<Vec<Option<u64>>>,
) {
    if cur.len() == l {
        out.push(cur.clone());
        return;
    }
    for &v in &options[(root + cur.len()) % l] {
        cur.push(v);
        enumerate(options, root, l, cur, out);
        cur.pop();
    }
}

fn argmin(y: &ChannelOutput) -> usize {
    let mut best = 0;
    for l in 1..y.len() {
        if y.section(l).cardinality() < y.section(best).cardinality() {
            best = l;
        }
    }
    best
}

fn argmax(y: &ChannelOutput) -> usize {
    let mut best = 0;
    for l in 1..y.len() {
        if y.section(l).cardinality() > y.section(best).cardinality() {
            best = l;
        }
    }
    best
}

/// Reference two-phase decoder; returns distinct codewords in discovery order.
pub fn brute_decode(y: &ChannelOutput, cfg: &CodeConfig, gens: &GeneratorSet, policy: &DecodePolicy) -> Vec<Codeword> {
    let pick = |y: &ChannelOutput, first: bool| match policy.root {
        RootPolicy::Fixed(r) => r,
        RootPolicy::Adaptive if first => argmin(y),
        RootPolicy::Adaptive => argmax(y),
    };
    let mut out: Vec<Codeword> = Vec::new();
    let mut working = y.clone();
    let mut round = brute_stitch(&working, 0, pick(&working, true), cfg, gens);
    let keep = |round: &[(Codeword, Vec<usize>)], out: &mut Vec<Codeword>| {
        for (c, _) in round {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
    };
    keep(&round, &mut out);
    for j in 1..=cfg.max_erasures {
        if policy.sic {
            for (c, erased) in &round {
                for s in 0..cfg.sections {
                    if !erased.contains(&s) {
                        working.sections[s].remove_one(c.section(s));
                    }
                }
            }
        }
        let budget = if policy.erasure_recovery { j } else { 0 };
        round = brute_stitch(&working, budget, pick(&working, false), cfg, gens);
        keep(&round, &mut out);
    }
    out
}

/// A random small instance: code, policy and one channel realization.
pub struct Instance {
    pub cfg: CodeConfig,
    pub gens: GeneratorSet,
    pub policy: DecodePolicy,
    pub y: ChannelOutput,
    pub sent: Vec<Codeword>,
    pub label: String,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut s = RngStream::new(seed, "oracle-instance");
    let registry = CodeRegistry::builtin();
    loop {
        let l = 3 + s.below(5) as usize;
        let j = 3 + s.below(4) as usize;
        let scheme = ["ellc", "ellc", "llc", "tree"][s.below(4) as usize];
        let window = (scheme != "tree").then(|| 1 + s.below(l as u64 - 1) as usize);
        let b_max = if scheme == "tree" { j + (l - 1) * (j - 1) } else { l * (j - 1) };
        let b = l + s.below((b_max - l + 1) as u64) as usize;
        let t = s.below(2) as usize;
        let params = CodeParams {
            payload_bits: b,
            sections: l,
            section_bits: j,
            window,
            max_erasures: t,
        };
        let Ok(cfg) = registry.get(scheme).unwrap().config(&params) else {
            continue;
        };
        let kind = if s.below(2) == 0 { ChannelKind::AChannel } else { ChannelKind::BChannel };
        let sic = if scheme == "llc" { None } else { [None, Some(true), Some(false)][s.below(3) as usize] };
        let policy = registry.get(scheme).unwrap().policy(kind, sic, 1_000_000).unwrap();
        let gens = GeneratorSet::build(&cfg, seed, "oracle");
        let k = 1 + s.below(3) as usize;
        let pe = if s.below(2) == 0 { 0.0 } else { 0.2 };
        let sent: Vec<Codeword> = (0..k)
            .map(|_| {
                let p = BitVector::from_bits((0..b).map(|_| s.next_u64() & 1 == 1));
                encode(&p, &cfg, &gens).unwrap()
            })
            .collect();
        let y = transmit(&sent, pe, kind, &mut s.substream("erasure"));
        let label = format!("seed {seed}: {scheme} L={l} J={j} B={b} M={window:?} T={t} K={k} pe={pe} {kind:?}");
        return Instance {
            cfg,
            gens,
            policy,
            y,
            sent,
            label,
        };
    }
}
