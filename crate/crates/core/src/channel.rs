//! Unsourced A- and B-channels with i.i.d. symbol erasures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::codec::Codeword;
use crate::gf2::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Output per channel use is the set of non-erased symbols.
    #[serde(rename = "a")]
    AChannel,
    /// Output per channel use is the multiset of non-erased symbols.
    #[serde(rename = "b")]
    BChannel,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::AChannel => "a",
            ChannelKind::BChannel => "b",
        }
    }
}

/// One channel use: symbol → positive multiplicity, iterated in ascending
/// symbol order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultisetSection {
    counts: BTreeMap<u64, u32>,
}

impl MultisetSection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, symbol: u64) {
        *self.counts.entry(symbol).or_insert(0) += 1;
    }

    /// Removes one copy; returns whether a copy was present.
    pub fn remove_one(&mut self, symbol: u64) -> bool {
        match self.counts.get_mut(&symbol) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(&symbol);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, symbol: u64) -> u32 {
        self.counts.get(&symbol).copied().unwrap_or(0)
    }

    pub fn contains(&self, symbol: u64) -> bool {
        self.counts.contains_key(&symbol)
    }

    /// Total multiplicity `|y(ℓ)|`.
    pub fn cardinality(&self) -> usize {
        self.counts.values().map(|&c| c as usize).sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Distinct symbols in ascending order.
    pub fn symbols(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.counts.iter().map(|(&s, &c)| (s, c))
    }

    /// The support of this section, every multiplicity flattened to 1.
    pub fn support(&self) -> MultisetSection {
        MultisetSection {
            counts: self.counts.keys().map(|&s| (s, 1)).collect(),
        }
    }
}

impl FromIterator<u64> for MultisetSection {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut s = MultisetSection::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

/// `Y = [y(0), …, y(L-1)]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelOutput {
    pub kind: ChannelKind,
    pub sections: Vec<MultisetSection>,
}

impl ChannelOutput {
    pub fn empty(kind: ChannelKind, sections: usize) -> Self {
        ChannelOutput {
            kind,
            sections: vec![MultisetSection::new(); sections],
        }
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn section(&self, l: usize) -> &MultisetSection {
        &self.sections[l]
    }

    pub fn total(&self) -> usize {
        self.sections.iter().map(MultisetSection::cardinality).sum()
    }

    /// The A-channel view of this output.
    pub fn flatten(&self) -> ChannelOutput {
        ChannelOutput {
            kind: ChannelKind::AChannel,
            sections: self.sections.iter().map(MultisetSection::support).collect(),
        }
    }
}

/// `δ_E(x)`: the symbol survives iff `erased` is false.
pub fn erase(symbol: u64, erased: bool) -> Option<u64> {
    (!erased).then_some(symbol)
}

/// Per-(user, section) erasure indicators drawn user-major from `stream`.
///
/// Each indicator compares a fresh uniform draw with `p_e`, so for a fixed
/// stream the erasure pattern at a smaller `p_e` is a subset of the pattern
/// at a larger one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    sections: usize,
    erased: Vec<bool>,
}

impl ErasurePattern {
    pub fn draw(users: usize, sections: usize, p_e: f64, stream: &mut RngStream) -> Self {
        let erased = (0..users * sections).map(|_| stream.bernoulli(p_e)).collect();
        ErasurePattern { sections, erased }
    }

    pub fn none(users: usize, sections: usize) -> Self {
        ErasurePattern {
            sections,
            erased: vec![false; users * sections],
        }
    }

    pub fn from_flags(sections: usize, erased: Vec<bool>) -> Self {
        assert!(sections > 0 && erased.len() % sections == 0);
        ErasurePattern { sections, erased }
    }

    pub fn is_erased(&self, user: usize, section: usize) -> bool {
        self.erased[user * self.sections + section]
    }

    pub fn user_erasures(&self, user: usize) -> usize {
        (0..self.sections).filter(|&l| self.is_erased(user, l)).count()
    }

    pub fn total(&self) -> usize {
        self.erased.iter().filter(|&&e| e).count()
    }
}

/// Applies an erasure pattern and forms the (bag) union per section.
pub fn transmit_with(codewords: &[Codeword], pattern: &ErasurePattern, kind: ChannelKind) -> ChannelOutput {
    let sections = codewords.first().map_or(pattern.sections, Codeword::len);
    let mut out = ChannelOutput::empty(ChannelKind::BChannel, sections);
    for (k, cw) in codewords.iter().enumerate() {
        for (l, &x) in cw.sections().iter().enumerate() {
            if let Some(x) = erase(x, pattern.is_erased(k, l)) {
                out.sections[l].insert(x);
            }
        }
    }
    match kind {
        ChannelKind::BChannel => out,
        ChannelKind::AChannel => out.flatten(),
    }
}

/// Transmits every codeword through the UACE/UBCE with erasure probability
/// `p_e`, one independent erasure draw per (user, section).
pub fn transmit(codewords: &[Codeword], p_e: f64, kind: ChannelKind, stream: &mut RngStream) -> ChannelOutput {
    let sections = codewords.first().map_or(0, Codeword::len);
    let pattern = ErasurePattern::draw(codewords.len(), sections, p_e, stream);
    transmit_with(codewords, &pattern, kind)
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `Pr[Y_A = Y_B]` for one channel use: the probability that all non-erased
/// symbols of `users` uniform users over an alphabet of size `q` differ.
///
/// Evaluates `Σ_m [C(Q,m)·m!/Q^m]·C(K,m)·(1-p_e)^m·p_e^{K-m}` term by term in
/// the log domain; terms with `m > Q` vanish.
pub fn prob_outputs_equal(users: u64, q: f64, p_e: f64) -> f64 {
    assert!(q >= 1.0, "alphabet size must be positive");
    assert!((0.0..=1.0).contains(&p_e), "p_e outside [0, 1]");
    let k = users as f64;
    let mut total = 0.0;
    // ln(C(Q,m)·m!/Q^m) = Σ_{i<m} ln(1 - i/Q), accumulated as m grows.
    let mut ln_distinct = 0.0;
    for m in 0..=users {
        let mf = m as f64;
        if m > 0 {
            let ratio = (mf - 1.0) / q;
            if ratio >= 1.0 {
                break;
            }
            ln_distinct += (-ratio).ln_1p();
        }
        let binom = match (p_e, m) {
            (p, _) if p == 0.0 => {
                if m == users {
                    0.0
                } else {
                    continue;
                }
            }
            (p, _) if p == 1.0 => {
                if m == 0 {
                    0.0
                } else {
                    continue;
                }
            }
            (p, _) => ln_choose(k, mf) + mf * (1.0 - p).ln() + (k - mf) * p.ln(),
        };
        total += (ln_distinct + binom).exp();
    }
    total.min(1.0)
}

/// Monte-Carlo estimate of `Pr[Y_A = Y_B]` from coupled single-use outputs:
/// the A-channel output is the flattened B-channel output of the same
/// realization, so they agree iff no multiplicity exceeds one.
pub fn estimate_outputs_equal(users: usize, q: u64, p_e: f64, trials: usize, stream: &mut RngStream) -> f64 {
    let mut equal = 0usize;
    for _ in 0..trials {
        let codewords: Vec<Codeword> = (0..users)
            .map(|_| Codeword::from_sections(vec![stream.below(q)]))
            .collect();
        let b = transmit(&codewords, p_e, ChannelKind::BChannel, stream);
        let a = b.flatten();
        if a.sections[0].cardinality() == b.sections[0].cardinality() {
            equal += 1;
        }
    }
    equal as f64 / trials as f64
}
