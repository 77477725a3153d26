//! Linked-loop outer codes: configuration, generator matrices, encoding,
//! stitching and the two-phase list decoder.
//!
//! Sections are packed into `u64` symbols. Bits `0..b` of a symbol hold the
//! information part `w(ℓ)` and bits `b..J` the parity part `p(ℓ)`, so the
//! symbol is the concatenation `w(ℓ).p(ℓ)` read bit 0 first.

mod decoder;
mod registry;
mod stitch;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{bernoulli_matrix, low_mask, BitMatrix, BitVector, MulTable, RngStream};

pub use decoder::{decode, sic_subtract, Decoded, DecodePolicy, RootPolicy};
pub use registry::{CodeParams, CodeRegistry, Ellc, Llc, OuterCode, TreeCode};
pub use stitch::{
    parity_check, stitch_sections, uniquely_decode, PartialPath, StitchOutcome, Stitched,
    DEFAULT_LIST_CAP,
};

/// Widest section supported by the packed representation.
pub const MAX_SECTION_BITS: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("payload of {payload} bits does not fit {sections} sections of {section_bits} bits")]
    PayloadTooLarge {
        payload: usize,
        sections: usize,
        section_bits: usize,
    },
    #[error("tree allocation needs {parity} parity bits but sections 1..L hold at most {capacity}")]
    TreeParityOverflow { parity: usize, capacity: usize },
    #[error("window size {window} must satisfy 1 <= M < L = {sections}")]
    BadWindow { window: usize, sections: usize },
    #[error("section width {0} outside 1..={MAX_SECTION_BITS}")]
    BadSectionBits(usize),
    #[error("need at least {min} sections, got {got}")]
    TooFewSections { min: usize, got: usize },
    #[error("erasure budget {budget} too large: at most {max} for this layout")]
    ErasureBudget { budget: usize, max: usize },
    #[error("allocation mismatch: {0}")]
    Allocation(String),
    #[error("length mismatch: expected {expected} bits, found {found}")]
    Length { expected: usize, found: usize },
    #[error("symbol {symbol:#x} in section {section} exceeds {bits} bits")]
    SymbolRange {
        section: usize,
        symbol: u64,
        bits: usize,
    },
    #[error("unknown code scheme {0:?}")]
    UnknownScheme(String),
    #[error("{0}")]
    Unsupported(String),
}

/// How parity sections depend on information sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `p(ℓ)` depends on `w([ℓ-1]_L) … w([ℓ-M]_L)`.
    TailBitingWindow { window: usize },
    /// `p(ℓ)` depends on every `w(s)` with `s < ℓ`; `p(0)` is empty.
    FullHistoryTree,
}

/// Splits `payload_bits` information bits across `sections` sections of
/// `section_bits` bits each.
///
/// Tail-biting codes spread information bits evenly with the surplus on the
/// lowest-index sections. Tree codes give section 0 no parity and spread the
/// parity budget over sections `1..L`, surplus on the highest-index sections.
pub fn allocate_sections(
    payload_bits: usize,
    sections: usize,
    section_bits: usize,
    family: Family,
) -> Result<(Vec<usize>, Vec<usize>), CodeError> {
    if section_bits == 0 || section_bits > MAX_SECTION_BITS {
        return Err(CodeError::BadSectionBits(section_bits));
    }
    if sections == 0 {
        return Err(CodeError::TooFewSections { min: 1, got: 0 });
    }
    let capacity = sections * section_bits;
    if payload_bits > capacity {
        return Err(CodeError::PayloadTooLarge {
            payload: payload_bits,
            sections,
            section_bits,
        });
    }
    match family {
        Family::TailBitingWindow { .. } => {
            let base = payload_bits / sections;
            let surplus = payload_bits % sections;
            let info: Vec<usize> = (0..sections).map(|l| base + usize::from(l < surplus)).collect();
            let parity = info.iter().map(|b| section_bits - b).collect();
            Ok((info, parity))
        }
        Family::FullHistoryTree => {
            let parity_total = capacity - payload_bits;
            let tail = sections - 1;
            if parity_total > tail * section_bits || (tail == 0 && parity_total > 0) {
                return Err(CodeError::TreeParityOverflow {
                    parity: parity_total,
                    capacity: tail * section_bits,
                });
            }
            let mut parity = vec![0; sections];
            if tail > 0 {
                let base = parity_total / tail;
                let surplus = parity_total % tail;
                for (i, p) in parity.iter_mut().skip(1).enumerate() {
                    *p = base + usize::from(i >= tail - surplus);
                }
            }
            let info = parity.iter().map(|p| section_bits - p).collect();
            Ok((info, parity))
        }
    }
}

/// Layout and decoding budget of one outer code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeConfig {
    pub sections: usize,
    pub section_bits: usize,
    pub family: Family,
    pub info_bits: Vec<usize>,
    pub parity_bits: Vec<usize>,
    /// Most erasures per codeword the decoder tries to fill in.
    pub max_erasures: usize,
}

impl CodeConfig {
    pub fn new(
        family: Family,
        payload_bits: usize,
        sections: usize,
        section_bits: usize,
        max_erasures: usize,
    ) -> Result<Self, CodeError> {
        let (info_bits, parity_bits) =
            allocate_sections(payload_bits, sections, section_bits, family)?;
        Self::with_allocation(family, section_bits, info_bits, parity_bits, max_erasures)
    }

    pub fn with_allocation(
        family: Family,
        section_bits: usize,
        info_bits: Vec<usize>,
        parity_bits: Vec<usize>,
        max_erasures: usize,
    ) -> Result<Self, CodeError> {
        let cfg = CodeConfig {
            sections: info_bits.len(),
            section_bits,
            family,
            info_bits,
            parity_bits,
            max_erasures,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CodeError> {
        let l = self.sections;
        if self.section_bits == 0 || self.section_bits > MAX_SECTION_BITS {
            return Err(CodeError::BadSectionBits(self.section_bits));
        }
        if self.info_bits.len() != l || self.parity_bits.len() != l {
            return Err(CodeError::Allocation("allocation vectors must have L entries".into()));
        }
        if let Some(s) = (0..l).find(|&s| self.info_bits[s] + self.parity_bits[s] != self.section_bits) {
            return Err(CodeError::Allocation(format!("b + p != J in section {s}")));
        }
        match self.family {
            Family::TailBitingWindow { window } => {
                if l < 2 {
                    return Err(CodeError::TooFewSections { min: 2, got: l });
                }
                if window == 0 || window >= l {
                    return Err(CodeError::BadWindow { window, sections: l });
                }
            }
            Family::FullHistoryTree => {
                if l == 0 {
                    return Err(CodeError::TooFewSections { min: 1, got: 0 });
                }
                if self.parity_bits[0] != 0 {
                    return Err(CodeError::Allocation("tree codes need p_0 = 0".into()));
                }
            }
        }
        if self.max_erasures >= l {
            return Err(CodeError::ErasureBudget {
                budget: self.max_erasures,
                max: l - 1,
            });
        }
        // Unknown info bits of all erased sections must fit one packed system.
        let mut widest: Vec<usize> = self.info_bits.clone();
        widest.sort_unstable_by(|a, b| b.cmp(a));
        let worst: usize = widest.iter().take(self.max_erasures).sum();
        if worst > crate::gf2::IncrementalSystem::MAX_UNKNOWNS {
            return Err(CodeError::ErasureBudget {
                budget: self.max_erasures,
                max: (0..=self.max_erasures)
                    .rev()
                    .find(|&t| widest.iter().take(t).sum::<usize>() <= crate::gf2::IncrementalSystem::MAX_UNKNOWNS)
                    .unwrap_or(0),
            });
        }
        Ok(())
    }

    pub fn payload_bits(&self) -> usize {
        self.info_bits.iter().sum()
    }

    pub fn rate(&self) -> f64 {
        self.payload_bits() as f64 / (self.sections * self.section_bits) as f64
    }

    /// Information sections feeding the parity of `target`.
    pub fn sources(&self, target: usize) -> Vec<usize> {
        let l = self.sections;
        match self.family {
            Family::TailBitingWindow { window } => {
                (0..window).map(|r| (target + l - r - 1) % l).collect()
            }
            Family::FullHistoryTree => (0..target).collect(),
        }
    }

    pub fn info_of(&self, section: usize, symbol: u64) -> u64 {
        symbol & low_mask(self.info_bits[section])
    }

    pub fn parity_of(&self, section: usize, symbol: u64) -> u64 {
        symbol >> self.info_bits[section]
    }

    pub fn symbol(&self, section: usize, info: u64, parity: u64) -> u64 {
        info | (parity << self.info_bits[section])
    }
}

/// One `b_s × p_ℓ` generator matrix and its packed forms.
#[derive(Debug, Clone)]
pub struct Generator {
    pub source: usize,
    pub target: usize,
    pub matrix: BitMatrix,
    table: MulTable,
    /// Column `j` of the matrix packed over the source's info bits.
    columns: Vec<u64>,
}

impl Generator {
    fn new(source: usize, target: usize, matrix: BitMatrix) -> Self {
        let table = MulTable::new(&matrix);
        let columns = (0..matrix.cols()).map(|c| matrix.column(c).to_u64()).collect();
        Generator {
            source,
            target,
            matrix,
            table,
            columns,
        }
    }

    #[inline]
    pub fn apply(&self, info: u64) -> u64 {
        self.table.mul(info)
    }

    pub fn columns(&self) -> &[u64] {
        &self.columns
    }
}

/// All generator matrices of one code instance.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    generators: Vec<Generator>,
    by_target: Vec<Vec<usize>>,
    seed: u64,
    scope: String,
}

impl GeneratorSet {
    /// Builds every matrix the dependency relation needs from its own
    /// substream `"{scope}/gen/{s}/{ℓ}"`.
    pub fn build(cfg: &CodeConfig, seed: u64, scope: &str) -> Self {
        let mut generators = Vec::new();
        let mut by_target = vec![Vec::new(); cfg.sections];
        for target in 0..cfg.sections {
            for source in cfg.sources(target) {
                let mut stream = RngStream::new(seed, format!("{scope}/gen/{source}/{target}"));
                let m = bernoulli_matrix(cfg.info_bits[source], cfg.parity_bits[target], &mut stream);
                by_target[target].push(generators.len());
                generators.push(Generator::new(source, target, m));
            }
        }
        GeneratorSet {
            generators,
            by_target,
            seed,
            scope: scope.to_string(),
        }
    }

    /// Wraps explicit matrices; `matrices[i]` pairs with `cfg`'s dependency
    /// relation in target-major order.
    pub fn from_matrices(cfg: &CodeConfig, matrices: Vec<BitMatrix>) -> Result<Self, CodeError> {
        let mut generators = Vec::new();
        let mut by_target = vec![Vec::new(); cfg.sections];
        let mut iter = matrices.into_iter();
        for target in 0..cfg.sections {
            for source in cfg.sources(target) {
                let m = iter
                    .next()
                    .ok_or_else(|| CodeError::Allocation("too few matrices".into()))?;
                if m.rows() != cfg.info_bits[source] || m.cols() != cfg.parity_bits[target] {
                    return Err(CodeError::Allocation(format!(
                        "matrix ({source},{target}) has shape {}x{}",
                        m.rows(),
                        m.cols()
                    )));
                }
                by_target[target].push(generators.len());
                generators.push(Generator::new(source, target, m));
            }
        }
        if iter.next().is_some() {
            return Err(CodeError::Allocation("too many matrices".into()));
        }
        Ok(GeneratorSet {
            generators,
            by_target,
            seed: 0,
            scope: String::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scope(&self) -> &str {
        &self.scope
    }

    pub fn iter(&self) -> impl Iterator<Item = &Generator> {
        self.generators.iter()
    }

    /// Generators whose product lands in the parity of `target`.
    pub fn into_target(&self, target: usize) -> impl Iterator<Item = &Generator> {
        self.by_target[target].iter().map(move |&i| &self.generators[i])
    }

    pub fn get(&self, source: usize, target: usize) -> Option<&Generator> {
        self.into_target(target).find(|g| g.source == source)
    }

    /// `Σ_s w(s)·G_{s,target}` over the given symbols.
    pub fn parity_for(&self, cfg: &CodeConfig, target: usize, symbols: &[u64]) -> u64 {
        self.into_target(target)
            .fold(0, |acc, g| acc ^ g.apply(cfg.info_of(g.source, symbols[g.source])))
    }

    /// Does section `target`'s parity equation hold for these symbols?
    pub fn equation_holds(&self, cfg: &CodeConfig, target: usize, symbols: &[u64]) -> bool {
        cfg.parity_of(target, symbols[target]) == self.parity_for(cfg, target, symbols)
    }
}

/// Builds the generator set for `cfg` from `seed` under the default scope.
pub fn build_generators(cfg: &CodeConfig, seed: u64) -> GeneratorSet {
    GeneratorSet::build(cfg, seed, "codebook")
}

/// `L` packed sections `w(0).p(0) … w(L-1).p(L-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Codeword {
    sections: Vec<u64>,
}

impl Codeword {
    pub fn from_sections(sections: Vec<u64>) -> Self {
        Codeword { sections }
    }

    pub fn sections(&self) -> &[u64] {
        &self.sections
    }

    pub fn section(&self, l: usize) -> u64 {
        self.sections[l]
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// The `LJ`-bit row vector form.
    pub fn to_bits(&self, section_bits: usize) -> BitVector {
        BitVector::from_bits(
            self.sections
                .iter()
                .flat_map(|&s| (0..section_bits).map(move |i| (s >> i) & 1 == 1)),
        )
    }

    /// Inverse of [`Codeword::to_bits`].
    pub fn from_bits(bits: &BitVector, section_bits: usize) -> Result<Self, CodeError> {
        if section_bits == 0 || bits.len() % section_bits != 0 {
            return Err(CodeError::Length {
                expected: section_bits,
                found: bits.len(),
            });
        }
        let sections = (0..bits.len() / section_bits)
            .map(|l| bits.bits_u64(l * section_bits, section_bits))
            .collect();
        Ok(Codeword { sections })
    }

    /// Checks shape and every parity equation.
    pub fn is_valid(&self, cfg: &CodeConfig, gens: &GeneratorSet) -> bool {
        self.sections.len() == cfg.sections
            && self.sections.iter().all(|&s| s <= low_mask(cfg.section_bits))
            && (0..cfg.sections).all(|l| gens.equation_holds(cfg, l, &self.sections))
    }
}

/// Encodes `payload` (length `B`, split into `w(0)…w(L-1)` in order).
pub fn encode(payload: &BitVector, cfg: &CodeConfig, gens: &GeneratorSet) -> Result<Codeword, CodeError> {
    if payload.len() != cfg.payload_bits() {
        return Err(CodeError::Length {
            expected: cfg.payload_bits(),
            found: payload.len(),
        });
    }
    let mut offset = 0;
    let mut sections: Vec<u64> = cfg
        .info_bits
        .iter()
        .map(|&b| {
            let w = payload.bits_u64(offset, b);
            offset += b;
            w
        })
        .collect();
    let parities: Vec<u64> = (0..cfg.sections)
        .map(|l| gens.parity_for(cfg, l, &sections))
        .collect();
    for (l, p) in parities.into_iter().enumerate() {
        sections[l] = cfg.symbol(l, sections[l], p);
    }
    Ok(Codeword { sections })
}

/// `w(0).w(1)…w(L-1)` of a codeword.
pub fn extract_info_bits(codeword: &Codeword, cfg: &CodeConfig) -> BitVector {
    BitVector::from_bits(codeword.sections.iter().enumerate().flat_map(|(l, &s)| {
        let w = cfg.info_of(l, s);
        (0..cfg.info_bits[l]).map(move |i| (w >> i) & 1 == 1)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::matvec;
    use proptest::prelude::*;

    fn tail(window: usize) -> Family {
        Family::TailBitingWindow { window }
    }

    fn random_payload(stream: &mut RngStream, bits: usize) -> BitVector {
        BitVector::from_bits((0..bits).map(|_| stream.next_u64() & 1 == 1))
    }

    #[test]
    fn allocation_half_rate_sixteen_sections() {
        let (b, p) = allocate_sections(128, 16, 16, tail(2)).unwrap();
        assert_eq!(b, vec![8; 16]);
        assert_eq!(p, vec![8; 16]);
    }

    #[test]
    fn allocation_fifteen_sections_puts_surplus_first() {
        let (b, p) = allocate_sections(128, 15, 16, tail(2)).unwrap();
        let mut expect = vec![9; 8];
        expect.extend(vec![8; 7]);
        assert_eq!(b, expect);
        assert_eq!(b.iter().sum::<usize>(), 128);
        assert!(b.iter().zip(&p).all(|(b, p)| b + p == 16));
    }

    #[test]
    fn allocation_empty_payload() {
        let (b, p) = allocate_sections(0, 4, 16, tail(1)).unwrap();
        assert_eq!(b, vec![0; 4]);
        assert_eq!(p, vec![16; 4]);
    }

    #[test]
    fn allocation_rejects_oversized_payload() {
        assert!(matches!(
            allocate_sections(257, 16, 16, tail(2)),
            Err(CodeError::PayloadTooLarge { .. })
        ));
        assert!(matches!(
            allocate_sections(10, 4, 16, Family::FullHistoryTree),
            Err(CodeError::TreeParityOverflow { .. })
        ));
    }

    #[test]
    fn tree_allocation_grows_toward_the_end() {
        let (b, p) = allocate_sections(128, 16, 16, Family::FullHistoryTree).unwrap();
        assert_eq!(p[0], 0);
        assert_eq!(b[0], 16);
        assert_eq!(p.iter().sum::<usize>(), 128);
        assert!(p.windows(2).skip(1).all(|w| w[0] <= w[1]));
        assert_eq!(p[15], *p.iter().max().unwrap());
        assert_eq!(&p[1..8], &[8; 7]);
        assert_eq!(&p[8..], &[9; 8]);
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            CodeConfig::new(tail(16), 128, 16, 16, 1),
            Err(CodeError::BadWindow { .. })
        ));
        assert!(matches!(
            CodeConfig::new(tail(0), 128, 16, 16, 1),
            Err(CodeError::BadWindow { .. })
        ));
        assert!(matches!(
            CodeConfig::new(tail(2), 128, 16, 16, 16),
            Err(CodeError::ErasureBudget { .. })
        ));
        // Eight erased 8-bit sections need 64 unknowns.
        assert!(matches!(
            CodeConfig::new(tail(2), 128, 16, 16, 8),
            Err(CodeError::ErasureBudget { max: 7, .. })
        ));
        let cfg = CodeConfig::new(tail(2), 128, 16, 16, 1).unwrap();
        assert_eq!(cfg.rate(), 0.5);
    }

    #[test]
    fn sixteen_section_window_two_dependency_pairs() {
        let cfg = CodeConfig::new(tail(2), 128, 16, 16, 1).unwrap();
        let gens = build_generators(&cfg, 1);
        assert_eq!(gens.len(), 32);
        let pairs: Vec<(usize, usize)> = gens.iter().map(|g| (g.source, g.target)).collect();
        for p in [(14, 0), (15, 0), (15, 1), (0, 1), (0, 2), (1, 2)] {
            assert!(pairs.contains(&p), "missing {p:?}");
        }
        for g in gens.iter() {
            assert!(g.target == (g.source + 1) % 16 || g.target == (g.source + 2) % 16);
            assert_eq!((g.matrix.rows(), g.matrix.cols()), (8, 8));
        }
    }

    #[test]
    fn full_cyclic_window() {
        let cfg = CodeConfig::new(tail(3), 16, 4, 8, 1).unwrap();
        let gens = build_generators(&cfg, 2);
        assert_eq!(gens.len(), 12);
        for l in 0..4 {
            let mut s: Vec<usize> = gens.into_target(l).map(|g| g.source).collect();
            s.sort_unstable();
            let others: Vec<usize> = (0..4).filter(|&x| x != l).collect();
            assert_eq!(s, others);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let cfg = CodeConfig::new(tail(2), 128, 16, 16, 1).unwrap();
        let a = build_generators(&cfg, 9);
        let b = build_generators(&cfg, 9);
        let c = build_generators(&cfg, 10);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x.matrix == y.matrix));
        assert!(a.iter().zip(c.iter()).any(|(x, y)| x.matrix != y.matrix));
    }

    #[test]
    fn tree_dependencies_only_look_back() {
        let cfg = CodeConfig::new(Family::FullHistoryTree, 128, 16, 16, 1).unwrap();
        let gens = build_generators(&cfg, 3);
        assert_eq!(gens.len(), 16 * 15 / 2);
        assert!(gens.iter().all(|g| g.source < g.target));
        assert_eq!(cfg.parity_bits[0], 0);
    }

    #[test]
    fn zero_payload_encodes_to_zero() {
        let cfg = CodeConfig::new(tail(2), 128, 16, 16, 1).unwrap();
        let gens = build_generators(&cfg, 4);
        let cw = encode(&BitVector::zeros(128), &cfg, &gens).unwrap();
        assert!(cw.sections().iter().all(|&s| s == 0));
        assert!(extract_info_bits(&cw, &cfg).is_zero());
    }

    #[test]
    fn window_parity_follows_the_coding_rule() {
        let cfg = CodeConfig::new(tail(2), 128, 16, 16, 1).unwrap();
        let gens = build_generators(&cfg, 5);
        let mut s = RngStream::new(5, "payload");
        let payload = random_payload(&mut s, 128);
        let cw = encode(&payload, &cfg, &gens).unwrap();
        let w = |l: usize| BitVector::from_u64(cfg.info_of(l, cw.section(l)), 8);
        // p(1) = w(15)·G_{15,1} ⊕ w(0)·G_{0,1}
        let expect = matvec(&w(15), &gens.get(15, 1).unwrap().matrix)
            .unwrap()
            .xor(&matvec(&w(0), &gens.get(0, 1).unwrap().matrix).unwrap())
            .unwrap();
        assert_eq!(cfg.parity_of(1, cw.section(1)), expect.to_u64());
        // p(0) = w(14)·G_{14,0} ⊕ w(15)·G_{15,0}
        let expect0 = matvec(&w(14), &gens.get(14, 0).unwrap().matrix)
            .unwrap()
            .xor(&matvec(&w(15), &gens.get(15, 0).unwrap().matrix).unwrap())
            .unwrap();
        assert_eq!(cfg.parity_of(0, cw.section(0)), expect0.to_u64());
    }

    #[test]
    fn parity_matches_naive_summation() {
        // Independent recomputation through generic BitVector/BitMatrix ops.
        let cfg = CodeConfig::new(tail(2), 12, 4, 6, 1).unwrap();
        let gens = build_generators(&cfg, 6);
        let mut s = RngStream::new(6, "payload");
        for _ in 0..50 {
            let payload = random_payload(&mut s, 12);
            let cw = encode(&payload, &cfg, &gens).unwrap();
            let bits = cw.to_bits(6);
            for l in 0..4 {
                let mut acc = BitVector::zeros(cfg.parity_bits[l]);
                for r in 0..2 {
                    let src = (l + 4 - r - 1) % 4;
                    let w = bits.slice(src * 6, cfg.info_bits[src]);
                    acc.xor_assign(&matvec(&w, &gens.get(src, l).unwrap().matrix).unwrap())
                        .unwrap();
                }
                let p = bits.slice(l * 6 + cfg.info_bits[l], cfg.parity_bits[l]);
                assert_eq!(p, acc);
            }
        }
    }

    #[test]
    fn extract_uses_per_section_prefixes() {
        let cfg = CodeConfig::new(tail(2), 128, 15, 16, 1).unwrap();
        let gens = build_generators(&cfg, 7);
        let mut s = RngStream::new(7, "payload");
        let payload = random_payload(&mut s, 128);
        let cw = encode(&payload, &cfg, &gens).unwrap();
        let bits = cw.to_bits(16);
        let manual = (0..15).fold(BitVector::zeros(0), |acc, l| {
            acc.concat(&bits.slice(l * 16, cfg.info_bits[l]))
        });
        assert_eq!(manual, payload);
        assert_eq!(extract_info_bits(&cw, &cfg), payload);
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let cfg = CodeConfig::new(tail(2), 128, 16, 16, 1).unwrap();
        let gens = build_generators(&cfg, 7);
        assert!(matches!(
            encode(&BitVector::zeros(127), &cfg, &gens),
            Err(CodeError::Length { .. })
        ));
    }

    #[test]
    fn tail_biting_rotation_symmetry() {
        // Rotating the section assignment by `shift` together with the
        // generator matrices rotates the codeword.
        let cfg = CodeConfig::new(tail(3), 48, 6, 16, 1).unwrap();
        let gens = build_generators(&cfg, 8);
        let shift = 2;
        let l = cfg.sections;
        let rotated: Vec<BitMatrix> = (0..l)
            .flat_map(|t| cfg.sources(t).into_iter().map(move |s| (s, t)))
            .map(|(s, t)| gens.get((s + l - shift) % l, (t + l - shift) % l).unwrap().matrix.clone())
            .collect();
        let rgens = GeneratorSet::from_matrices(&cfg, rotated).unwrap();
        let mut s = RngStream::new(8, "payload");
        for _ in 0..20 {
            let payload = random_payload(&mut s, 48);
            let cw = encode(&payload, &cfg, &gens).unwrap();
            let w: Vec<BitVector> = (0..l).map(|x| payload.slice(x * 8, 8)).collect();
            let rpayload = (0..l).fold(BitVector::zeros(0), |acc, x| acc.concat(&w[(x + l - shift) % l]));
            let rcw = encode(&rpayload, &cfg, &rgens).unwrap();
            for x in 0..l {
                assert_eq!(rcw.section(x), cw.section((x + l - shift) % l));
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(seed in any::<u64>(), l in 2usize..20, j in 4usize..=16) {
            let b = (seed as usize) % (l * j + 1);
            let cfg = CodeConfig::new(tail(1 + (seed as usize) % (l - 1)), b, l, j, 0).unwrap();
            let gens = build_generators(&cfg, seed);
            let mut s = RngStream::new(seed, "payload");
            let payload = random_payload(&mut s, b);
            let cw = encode(&payload, &cfg, &gens).unwrap();
            prop_assert!(cw.is_valid(&cfg, &gens));
            prop_assert_eq!(extract_info_bits(&cw, &cfg), payload);
            prop_assert_eq!(Codeword::from_bits(&cw.to_bits(j), j).unwrap(), cw);
        }
    }
}
