//! Two-phase list decoding with successive interference cancellation.

use std::collections::HashSet;

use crate::channel::ChannelOutput;
use crate::gf2::BitVector;

use super::stitch::{stitch_sections, Stitched, DEFAULT_LIST_CAP};
use super::{extract_info_bits, CodeConfig, Codeword, GeneratorSet};

/// Which section seeds each stitching pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootPolicy {
    /// Smallest section in phase 0, largest in later rounds; ties go to the
    /// lowest index.
    Adaptive,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodePolicy {
    pub root: RootPolicy,
    /// Subtract each round's codewords before the next round.
    pub sic: bool,
    /// Allow `n/a` placeholders in rounds `j ≥ 1`.
    pub erasure_recovery: bool,
    pub list_cap: usize,
}

impl Default for DecodePolicy {
    fn default() -> Self {
        DecodePolicy {
            root: RootPolicy::Adaptive,
            sic: true,
            erasure_recovery: true,
            list_cap: DEFAULT_LIST_CAP,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decoded {
    /// Distinct recovered codewords in discovery order.
    pub codewords: Vec<Codeword>,
    pub payloads: Vec<BitVector>,
    pub overloaded: bool,
    /// Codewords found per round (phase 0 first), before deduplication.
    pub per_round: Vec<usize>,
}

fn argmin_section(y: &ChannelOutput) -> usize {
    (0..y.len())
        .min_by_key(|&l| (y.section(l).cardinality(), l))
        .unwrap_or(0)
}

fn argmax_section(y: &ChannelOutput) -> usize {
    (0..y.len())
        .min_by_key(|&l| (std::cmp::Reverse(y.section(l).cardinality()), l))
        .unwrap_or(0)
}

/// Removes one copy of every received section symbol of each found codeword;
/// sections the codeword was missing are left alone.
pub fn sic_subtract(y: &ChannelOutput, found: &[Stitched]) -> ChannelOutput {
    let mut out = y.clone();
    for s in found {
        for (l, &x) in s.codeword.sections().iter().enumerate() {
            if !s.erased.contains(&l) {
                out.sections[l].remove_one(x);
            }
        }
    }
    out
}

/// Phase 0 stitches erasure-free codewords from the smallest section; rounds
/// `j = 1..=T` optionally cancel the previous round's codewords, re-root at
/// the largest section and stitch with up to `j` placeholders.
pub fn decode(y: &ChannelOutput, cfg: &CodeConfig, gens: &GeneratorSet, policy: &DecodePolicy) -> Decoded {
    let mut out = Decoded::default();
    if y.len() != cfg.sections {
        return out;
    }
    let mut seen: HashSet<Codeword> = HashSet::new();
    let mut working = y.clone();
    let root = match policy.root {
        RootPolicy::Adaptive => argmin_section(&working),
        RootPolicy::Fixed(r) => r,
    };
    let mut round = stitch_sections(&working, 0, root, gens, cfg, policy.list_cap);
    let mut absorb = |found: &[Stitched], out: &mut Decoded| {
        for s in found {
            if seen.insert(s.codeword.clone()) {
                out.payloads.push(extract_info_bits(&s.codeword, cfg));
                out.codewords.push(s.codeword.clone());
            }
        }
        out.per_round.push(found.len());
    };
    absorb(&round.found, &mut out);
    out.overloaded |= round.overloaded;
    for j in 1..=cfg.max_erasures {
        if policy.sic {
            working = sic_subtract(&working, &round.found);
        }
        let root = match policy.root {
            RootPolicy::Adaptive => argmax_section(&working),
            RootPolicy::Fixed(r) => r,
        };
        let budget = if policy.erasure_recovery { j } else { 0 };
        round = stitch_sections(&working, budget, root, gens, cfg, policy.list_cap);
        absorb(&round.found, &mut out);
        out.overloaded |= round.overloaded;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transmit_with, ChannelKind, ErasurePattern, MultisetSection};
    use crate::codec::{build_generators, encode, Family};
    use crate::gf2::RngStream;

    fn setup(seed: u64) -> (CodeConfig, GeneratorSet) {
        let cfg = CodeConfig::new(Family::TailBitingWindow { window: 2 }, 128, 16, 16, 1).unwrap();
        let gens = build_generators(&cfg, seed);
        (cfg, gens)
    }

    fn payloads(seed: u64, n: usize) -> Vec<BitVector> {
        let mut s = RngStream::new(seed, "payload");
        (0..n)
            .map(|_| BitVector::from_bits((0..128).map(|_| s.next_u64() & 1 == 1)))
            .collect()
    }

    #[test]
    fn empty_output_decodes_to_nothing() {
        let (cfg, gens) = setup(1);
        let y = ChannelOutput::empty(ChannelKind::BChannel, 16);
        let d = decode(&y, &cfg, &gens, &DecodePolicy::default());
        assert!(d.payloads.is_empty() && d.codewords.is_empty());
    }

    #[test]
    fn three_users_noiseless() {
        let (cfg, gens) = setup(2);
        let ps = payloads(2, 3);
        let cws: Vec<Codeword> = ps.iter().map(|p| encode(p, &cfg, &gens).unwrap()).collect();
        let y = transmit_with(&cws, &ErasurePattern::none(3, 16), ChannelKind::BChannel);
        let d = decode(&y, &cfg, &gens, &DecodePolicy::default());
        let mut got = d.payloads.clone();
        got.sort();
        let mut want = ps;
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn second_round_recovers_the_erased_user() {
        let (cfg, gens) = setup(3);
        let ps = payloads(3, 2);
        let cws: Vec<Codeword> = ps.iter().map(|p| encode(p, &cfg, &gens).unwrap()).collect();
        // User 0 loses section 9; user 1 loses nothing.
        let mut flags = vec![false; 32];
        flags[9] = true;
        let y = transmit_with(&cws, &ErasurePattern::from_flags(16, flags), ChannelKind::BChannel);
        let d = decode(&y, &cfg, &gens, &DecodePolicy::default());
        assert_eq!(d.per_round, vec![1, 1]);
        assert_eq!(d.codewords, vec![cws[1].clone(), cws[0].clone()]);
        assert_eq!(d.payloads, vec![ps[1].clone(), ps[0].clone()]);
    }

    #[test]
    fn identical_users_come_back_once() {
        let (cfg, gens) = setup(4);
        let p = payloads(4, 1).remove(0);
        let cw = encode(&p, &cfg, &gens).unwrap();
        let y = transmit_with(&[cw.clone(), cw.clone()], &ErasurePattern::none(2, 16), ChannelKind::BChannel);
        let d = decode(&y, &cfg, &gens, &DecodePolicy::default());
        assert_eq!(d.codewords, vec![cw]);
        // Found again after SIC, but deduplicated.
        assert_eq!(d.per_round, vec![1, 1]);
    }

    #[test]
    fn root_collision_recovered_after_sic() {
        let (cfg, gens) = setup(5);
        let ps = payloads(5, 2);
        // User 1 copies sections 1..=3 of user 0, so both share the symbol in
        // section 3 (its parity only reads sections 1 and 2).
        let mut p1 = ps[1].clone();
        for i in 8..32 {
            p1.set(i, ps[0].get(i));
        }
        let mut cws = vec![encode(&ps[0], &cfg, &gens).unwrap(), encode(&p1, &cfg, &gens).unwrap()];
        assert_eq!(cws[0].section(3), cws[1].section(3));
        let y = transmit_with(&cws, &ErasurePattern::none(2, 16), ChannelKind::BChannel);
        let policy = DecodePolicy {
            root: RootPolicy::Fixed(3),
            ..DecodePolicy::default()
        };
        let d = decode(&y, &cfg, &gens, &policy);
        // One root value, so phase 0 keeps one codeword; SIC exposes the other.
        assert_eq!(d.per_round[0], 1);
        let mut got = d.codewords.clone();
        got.sort();
        cws.sort();
        assert_eq!(got, cws);
        let no_sic = decode(&y, &cfg, &gens, &DecodePolicy { sic: false, ..policy });
        assert_eq!(no_sic.codewords.len(), 1);
    }

    #[test]
    fn subtracting_the_only_codeword_empties_the_output() {
        let (cfg, gens) = setup(6);
        let cw = encode(&payloads(6, 1)[0], &cfg, &gens).unwrap();
        let y = transmit_with(&[cw.clone()], &ErasurePattern::none(1, 16), ChannelKind::BChannel);
        let z = sic_subtract(&y, &[Stitched { codeword: cw, erased: vec![] }]);
        assert_eq!(z.total(), 0);
    }

    #[test]
    fn subtraction_keeps_multiplicity() {
        let mut y = ChannelOutput::empty(ChannelKind::BChannel, 4);
        y.sections[3] = MultisetSection::from_iter([7, 7, 2]);
        let cw = Codeword::from_sections(vec![1, 1, 1, 7]);
        let z = sic_subtract(&y, &[Stitched { codeword: cw, erased: vec![] }]);
        assert_eq!(z.sections[3].count(7), 1);
        assert_eq!(z.sections[3].count(2), 1);
        assert!(z.sections[..3].iter().all(MultisetSection::is_empty));
    }

    #[test]
    fn subtraction_skips_erased_sections() {
        let mut y = ChannelOutput::empty(ChannelKind::BChannel, 8);
        for l in 0..8 {
            y.sections[l] = MultisetSection::from_iter([l as u64, 100]);
        }
        let cw = Codeword::from_sections((0..8).map(|l| l as u64).collect());
        let z = sic_subtract(&y, &[Stitched { codeword: cw, erased: vec![5] }]);
        for l in 0..8 {
            let expect = if l == 5 { 2 } else { 1 };
            assert_eq!(z.sections[l].cardinality(), expect, "section {l}");
        }
    }

    #[test]
    fn root_selection_tie_breaks_low() {
        let mut y = ChannelOutput::empty(ChannelKind::BChannel, 4);
        y.sections[1] = MultisetSection::from_iter([1, 2]);
        y.sections[2] = MultisetSection::from_iter([1, 2]);
        y.sections[3] = MultisetSection::from_iter([1]);
        y.sections[0] = MultisetSection::from_iter([1]);
        assert_eq!(argmin_section(&y), 0);
        assert_eq!(argmax_section(&y), 1);
    }
}
