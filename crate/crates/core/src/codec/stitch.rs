//! Stitching channel-output symbols into codeword candidates.
//!
//! A stitch starts from each distinct symbol of the root section and walks
//! the remaining sections cyclically, keeping every prefix consistent with
//! the parity equations that its known sections fully determine. Prefixes
//! may skip up to `budget` sections with an `n/a` placeholder; completed
//! paths are resolved by [`uniquely_decode`] and the first success per root
//! symbol is kept.
//!
//! Besides the plain parity checks the stitcher tracks, per prefix, the
//! linear system that the known sections impose on the information bits of
//! its `n/a` sections. A prefix whose system becomes inconsistent cannot be
//! completed into a uniquely decodable path, so it is dropped early. This
//! does not change which path is the first to decode for a root symbol; it
//! keeps the live list small when placeholders are present.

use crate::channel::ChannelOutput;
use crate::gf2::{low_mask, solve, BitMatrix, BitVector, IncrementalSystem, Insert, Solution, RHS};

use super::{CodeConfig, Codeword, Family, GeneratorSet};

/// Live-path limit per root symbol before the root is abandoned.
pub const DEFAULT_LIST_CAP: usize = 1_000_000;

/// A stitching hypothesis: one entry per visited position, `None` standing
/// for an `n/a` placeholder. Position `t` is section `[root_offset + t]_L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPath {
    pub root_offset: usize,
    pub entries: Vec<Option<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Unvisited,
    Missing,
    Known(u64),
}

impl PartialPath {
    pub fn new(root_offset: usize, root_symbol: u64) -> Self {
        PartialPath {
            root_offset,
            entries: vec![Some(root_symbol)],
        }
    }

    pub fn push(&mut self, entry: Option<u64>) {
        self.entries.push(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn na_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_none()).count()
    }

    pub fn section_at(&self, position: usize, sections: usize) -> usize {
        (self.root_offset + position) % sections
    }

    /// Absolute sections held as `n/a`, ascending.
    pub fn missing_sections(&self, sections: usize) -> Vec<usize> {
        let mut m: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_none())
            .map(|(t, _)| self.section_at(t, sections))
            .collect();
        m.sort_unstable();
        m
    }

    fn slots(&self, sections: usize) -> Vec<Slot> {
        let mut slots = vec![Slot::Unvisited; sections];
        for (t, e) in self.entries.iter().enumerate() {
            slots[self.section_at(t, sections)] = match e {
                Some(x) => Slot::Known(*x),
                None => Slot::Missing,
            };
        }
        slots
    }
}

fn equation_known(cfg: &CodeConfig, gens: &GeneratorSet, target: usize, slots: &[Slot]) -> Option<bool> {
    let Slot::Known(own) = slots[target] else {
        return None;
    };
    let mut acc = 0;
    for g in gens.into_target(target) {
        match slots[g.source] {
            Slot::Known(x) => acc ^= g.apply(cfg.info_of(g.source, x)),
            _ => return None,
        }
    }
    Some(cfg.parity_of(target, own) == acc)
}

/// Extends `path` with `candidate` at its next position and reports whether
/// every parity equation fully determined by known sections still holds.
/// Equations touching an `n/a` entry or an unvisited section are deferred.
pub fn parity_check(path: &PartialPath, candidate: u64, gens: &GeneratorSet, cfg: &CodeConfig) -> bool {
    let mut slots = path.slots(cfg.sections);
    let section = path.section_at(path.len(), cfg.sections);
    slots[section] = Slot::Known(candidate);
    (0..cfg.sections).all(|e| equation_known(cfg, gens, e, &slots).unwrap_or(true))
}

/// Fills in the `n/a` sections of a completed path.
///
/// The unknowns are the information bits of the missing sections. Every
/// equation whose parity section is known and whose window touches a missing
/// section contributes its rows; a unique solution is completed through the
/// coding rule and accepted only if the whole codeword checks.
pub fn uniquely_decode(path: &PartialPath, gens: &GeneratorSet, cfg: &CodeConfig) -> Option<Codeword> {
    let l = cfg.sections;
    if path.len() != l {
        return None;
    }
    let slots = path.slots(l);
    let missing = path.missing_sections(l);
    let mut symbols: Vec<u64> = slots
        .iter()
        .map(|s| match s {
            Slot::Known(x) => *x,
            _ => 0,
        })
        .collect();
    if !missing.is_empty() {
        let mut offsets = vec![usize::MAX; l];
        let mut unknowns = 0;
        for &s in &missing {
            offsets[s] = unknowns;
            unknowns += cfg.info_bits[s];
        }
        let mut columns: Vec<BitVector> = Vec::new();
        let mut rhs: Vec<bool> = Vec::new();
        for e in 0..l {
            let Slot::Known(own) = slots[e] else {
                continue;
            };
            if !gens.into_target(e).any(|g| slots[g.source] == Slot::Missing) {
                continue;
            }
            let mut known = cfg.parity_of(e, own);
            let mut block = vec![BitVector::zeros(unknowns); cfg.parity_bits[e]];
            for g in gens.into_target(e) {
                match slots[g.source] {
                    Slot::Known(x) => known ^= g.apply(cfg.info_of(g.source, x)),
                    _ => {
                        for i in 0..g.matrix.rows() {
                            for (j, col) in block.iter_mut().enumerate() {
                                if g.matrix.get(i, j) {
                                    col.set(offsets[g.source] + i, true);
                                }
                            }
                        }
                    }
                }
            }
            for (j, col) in block.into_iter().enumerate() {
                columns.push(col);
                rhs.push((known >> j) & 1 == 1);
            }
        }
        let a = BitMatrix::from_rows(unknowns, columns).ok()?.transpose();
        let b = BitVector::from_bits(rhs);
        let Ok(Solution::Unique(x)) = solve(&a, &b) else {
            return None;
        };
        for &s in &missing {
            symbols[s] = x.bits_u64(offsets[s], cfg.info_bits[s]);
        }
        for &s in &missing {
            let p = gens.parity_for(cfg, s, &symbols);
            symbols[s] = cfg.symbol(s, symbols[s], p);
        }
    }
    let cw = Codeword::from_sections(symbols);
    cw.is_valid(cfg, gens).then_some(cw)
}

/// A codeword recovered by stitching, with the sections it was missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stitched {
    pub codeword: Codeword,
    pub erased: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct StitchOutcome {
    pub found: Vec<Stitched>,
    /// Some root hit the live-path cap and was abandoned.
    pub overloaded: bool,
    pub peak_live: usize,
}

const NONE: u32 = u32::MAX;
const NA: u64 = u64::MAX;
const UNVISITED: u64 = u64::MAX - 1;

#[derive(Clone, Copy)]
struct Node {
    parent: u32,
    symbol: u64,
    /// Index into the system arena; `NONE` while the path has no `n/a`.
    state: u32,
}

/// Constraints on the information bits of a path's `n/a` sections. The
/// unknowns of each missing section are numbered in path order.
#[derive(Clone)]
enum PathSystem {
    Open(IncrementalSystem),
    /// Fully determined, holding the packed solution.
    Solved(u64),
}

/// Distinct symbols of one section, plain and grouped by parity.
struct SectionIndex {
    sorted: Vec<u64>,
    by_parity: Vec<(u64, u64)>,
}

impl SectionIndex {
    fn new(y: &ChannelOutput, cfg: &CodeConfig, section: usize) -> Self {
        let sorted: Vec<u64> = y.section(section).symbols().collect();
        let mut by_parity: Vec<(u64, u64)> = sorted.iter().map(|&x| (cfg.parity_of(section, x), x)).collect();
        by_parity.sort_unstable();
        SectionIndex { sorted, by_parity }
    }

    fn with_parity(&self, parity: u64) -> impl Iterator<Item = u64> + '_ {
        let lo = self.by_parity.partition_point(|&(p, _)| p < parity);
        self.by_parity[lo..]
            .iter()
            .take_while(move |&&(p, _)| p == parity)
            .map(|&(_, x)| x)
    }
}

/// The system a candidate is checked against: its parent's until the first
/// new row, then the scratch copy.
#[derive(Clone, Copy)]
struct Work {
    base: u32,
    dirty: bool,
}

struct Stitcher<'a> {
    cfg: &'a CodeConfig,
    gens: &'a GeneratorSet,
    budget: usize,
    list_cap: usize,
    index: Vec<SectionIndex>,
    nodes: Vec<Node>,
    systems: Vec<PathSystem>,
    scratch: IncrementalSystem,
    // Filled by `materialize`.
    slots: Vec<u64>,
    offsets: Vec<usize>,
    unknowns: usize,
    na: usize,
    // Per root.
    root: usize,
    completes_at: Vec<Vec<usize>>,
    own_complete: Vec<bool>,
    tail: Vec<Vec<(u64, u64)>>,
}

/// The equations completed at one position, eliminated once per parent with
/// symbolic right-hand sides so that each real candidate only evaluates
/// parities. Bit `k` of a form selects the `k`-th known bit of the candidate;
/// bit 63 is the constant.
struct Prepared {
    plan: Vec<Plan>,
    checks: Vec<u64>,
    /// `(coefficients, form)`, fully reduced.
    rows: Vec<(u64, u64)>,
    unknowns: usize,
}

#[derive(Clone, Copy)]
enum Plan {
    Skip,
    /// No unknowns: the known part must vanish.
    Plain,
    /// Known bits start at this offset of the symbolic vector.
    Symbolic(usize),
}

fn eval(form: u64, known: u64) -> bool {
    (form & (known | RHS)).count_ones() & 1 == 1
}

enum Candidates {
    All,
    Exact(u64),
    Affine(Vec<u64>),
}

fn solved_part(cfg: &CodeConfig, sol: u64, offset: usize, section: usize) -> u64 {
    (sol >> offset) & low_mask(cfg.info_bits[section])
}

impl<'a> Stitcher<'a> {
    fn position(&self, section: usize) -> usize {
        (section + self.cfg.sections - self.root) % self.cfg.sections
    }

    fn set_root(&mut self, root: usize) {
        let l = self.cfg.sections;
        self.root = root;
        self.completes_at = vec![Vec::new(); l];
        self.own_complete = vec![false; l];
        for e in 0..l {
            let own = self.position(e);
            let last = self
                .gens
                .into_target(e)
                .map(|g| self.position(g.source))
                .fold(own, usize::max);
            self.completes_at[last].push(e);
            self.own_complete[own] = last == own;
        }
        self.tail.clear();
        if let Family::TailBitingWindow { window } = self.cfg.family {
            if l > 2 * window {
                for i in 1..=window {
                    let s = (root + l - i) % l;
                    let g = self.gens.get(s, (root + window - i) % l).expect("window generator");
                    let mut keyed: Vec<(u64, u64)> = self.index[s]
                        .sorted
                        .iter()
                        .map(|&x| (g.apply(self.cfg.info_of(s, x)), x))
                        .collect();
                    keyed.sort_unstable();
                    self.tail.push(keyed);
                }
            }
        }
    }

    /// Whether the last `M` sections can still close the wrap-around
    /// equations of the first `M` positions. Only meaningful once a prefix
    /// has spent its placeholder budget (the tail must then be real symbols),
    /// while the tail is unvisited and positions `0..M` are known.
    fn tail_feasible(&mut self) -> bool {
        self.tail_step(1)
    }

    fn tail_step(&mut self, i: usize) -> bool {
        let m = self.tail.len();
        if i > m {
            return true;
        }
        let l = self.cfg.sections;
        let cfg = self.cfg;
        let src = (self.root + l - i) % l;
        let target = (self.root + m - i) % l;
        let mut need = cfg.parity_of(target, self.slots[target]);
        for g in self.gens.into_target(target) {
            if g.source != src {
                need ^= g.apply(cfg.info_of(g.source, self.slots[g.source]));
            }
        }
        let mut at = self.tail[i - 1].partition_point(|&(k, _)| k < need);
        while at < self.tail[i - 1].len() && self.tail[i - 1][at].0 == need {
            self.slots[src] = self.tail[i - 1][at].1;
            let ok = self.tail_step(i + 1);
            self.slots[src] = UNVISITED;
            if ok {
                return true;
            }
            at += 1;
        }
        false
    }

    /// Positions `1..M` are known and the tail has not been reached.
    fn tail_applies(&self, t: usize) -> bool {
        let m = self.tail.len();
        let l = self.cfg.sections;
        m > 0 && t + m < l && (1..m).all(|p| self.slots[(self.root + p) % l] != NA)
    }

    fn materialize(&mut self, mut id: u32, depth: usize) {
        let l = self.cfg.sections;
        self.slots.iter_mut().for_each(|s| *s = UNVISITED);
        for t in (0..=depth).rev() {
            let n = self.nodes[id as usize];
            self.slots[(self.root + t) % l] = n.symbol;
            id = n.parent;
        }
        self.unknowns = 0;
        self.na = 0;
        for t in 0..=depth {
            let s = (self.root + t) % l;
            if self.slots[s] == NA {
                self.offsets[s] = self.unknowns;
                self.unknowns += self.cfg.info_bits[s];
                self.na += 1;
            }
        }
    }

    /// Checks equation `e` against the current slots, recording new rows in
    /// the scratch system. Returns `false` on a contradiction.
    fn apply_equation(&mut self, e: usize, work: &mut Work) -> bool {
        let own = self.slots[e];
        if own == NA {
            return true;
        }
        let cfg = self.cfg;
        let mut known = cfg.parity_of(e, own);
        let mut has_unknown = false;
        for g in self.gens.into_target(e) {
            let x = self.slots[g.source];
            if x == NA {
                has_unknown = true;
            } else {
                known ^= g.apply(cfg.info_of(g.source, x));
            }
        }
        if !has_unknown {
            return known == 0;
        }
        let solved = if work.dirty {
            self.scratch.is_determined().then(|| self.scratch.particular())
        } else {
            match &self.systems[work.base as usize] {
                PathSystem::Solved(sol) => Some(*sol),
                PathSystem::Open(sys) => {
                    self.scratch.clone_from(sys);
                    work.dirty = true;
                    None
                }
            }
        };
        if let Some(sol) = solved {
            for g in self.gens.into_target(e) {
                if self.slots[g.source] == NA {
                    known ^= g.apply(solved_part(cfg, sol, self.offsets[g.source], g.source));
                }
            }
            return known == 0;
        }
        for j in 0..cfg.parity_bits[e] {
            let mut mask = 0u64;
            for g in self.gens.into_target(e) {
                if self.slots[g.source] == NA {
                    mask |= g.columns()[j] << self.offsets[g.source];
                }
            }
            if self.scratch.insert(mask, (known >> j) & 1 == 1) == Insert::Inconsistent {
                return false;
            }
        }
        true
    }

    /// Parity of equation `e`'s own section plus its known sources.
    fn known_part(&self, e: usize) -> u64 {
        let cfg = self.cfg;
        let mut known = cfg.parity_of(e, self.slots[e]);
        for g in self.gens.into_target(e) {
            let x = self.slots[g.source];
            if x != NA {
                known ^= g.apply(cfg.info_of(g.source, x));
            }
        }
        known
    }

    fn prepare(&self, completes: &[usize], section: usize, own_enforced: bool, base: &IncrementalSystem) -> Option<Prepared> {
        let cfg = self.cfg;
        let mut plan = Vec::with_capacity(completes.len());
        let mut bits = 0;
        let mut fresh: Vec<(u64, u64)> = Vec::new();
        for &e in completes {
            if (e == section && own_enforced) || self.slots[e] == NA {
                plan.push(Plan::Skip);
                continue;
            }
            if !self.gens.into_target(e).any(|g| self.slots[g.source] == NA) {
                plan.push(Plan::Plain);
                continue;
            }
            if bits + cfg.parity_bits[e] > 63 {
                return None;
            }
            for j in 0..cfg.parity_bits[e] {
                let mut mask = 0u64;
                for g in self.gens.into_target(e) {
                    if self.slots[g.source] == NA {
                        mask |= g.columns()[j] << self.offsets[g.source];
                    }
                }
                fresh.push((mask, 1 << (bits + j)));
            }
            plan.push(Plan::Symbolic(bits));
            bits += cfg.parity_bits[e];
        }
        let mut rows: Vec<(u64, u64)> = base.rows().iter().map(|&r| (r & !RHS, r & RHS)).collect();
        let mut checks = Vec::new();
        for (mut c, mut f) in fresh {
            for &(rc, rf) in &rows {
                if (c >> rc.trailing_zeros()) & 1 == 1 {
                    c ^= rc;
                    f ^= rf;
                }
            }
            if c == 0 {
                if f != 0 {
                    checks.push(f);
                }
                continue;
            }
            let bit = c.trailing_zeros();
            for r in rows.iter_mut() {
                if (r.0 >> bit) & 1 == 1 {
                    r.0 ^= c;
                    r.1 ^= f;
                }
            }
            rows.push((c, f));
        }
        Some(Prepared {
            plan,
            checks,
            rows,
            unknowns: base.unknowns(),
        })
    }

    /// Symbolic vector of the current candidate, or `None` if a plain
    /// equation or a consistency check fails.
    fn evaluate(&self, prep: &Prepared, completes: &[usize]) -> Option<u64> {
        let mut known = 0u64;
        for (&e, plan) in completes.iter().zip(&prep.plan) {
            match *plan {
                Plan::Skip => {}
                Plan::Plain => {
                    if self.known_part(e) != 0 {
                        return None;
                    }
                }
                Plan::Symbolic(off) => known |= self.known_part(e) << off,
            }
        }
        prep.checks.iter().all(|&c| !eval(c, known)).then_some(known)
    }

    fn finalize_prepared(&mut self, prep: &Prepared, known: u64) -> u32 {
        let sys = if prep.rows.len() == prep.unknowns {
            PathSystem::Solved(prep.rows.iter().fold(0, |acc, &(c, f)| {
                if eval(f, known) {
                    acc | 1 << c.trailing_zeros()
                } else {
                    acc
                }
            }))
        } else {
            let rows = prep
                .rows
                .iter()
                .map(|&(c, f)| if eval(f, known) { c | RHS } else { c })
                .collect();
            PathSystem::Open(IncrementalSystem::from_reduced_rows(prep.unknowns, rows))
        };
        self.systems.push(sys);
        (self.systems.len() - 1) as u32
    }

    fn finalize(&mut self, work: Work) -> u32 {
        if !work.dirty {
            return work.base;
        }
        let sys = if self.scratch.is_determined() {
            PathSystem::Solved(self.scratch.particular())
        } else {
            PathSystem::Open(self.scratch.clone())
        };
        self.systems.push(sys);
        (self.systems.len() - 1) as u32
    }

    /// Loads the parent's system into scratch and adds the unknowns of a new
    /// `n/a` section.
    fn open_placeholder(&mut self, base: u32, section: usize) {
        let prior = self.unknowns;
        if base == NONE {
            self.scratch = IncrementalSystem::new(0);
        } else {
            match &self.systems[base as usize] {
                PathSystem::Open(sys) => self.scratch.clone_from(sys),
                PathSystem::Solved(sol) => {
                    self.scratch = IncrementalSystem::new(prior);
                    for i in 0..prior {
                        self.scratch.insert(1 << i, (sol >> i) & 1 == 1);
                    }
                }
            }
        }
        self.offsets[section] = prior;
        self.scratch.extend_unknowns(self.cfg.info_bits[section]);
    }

    /// How the candidates for position `t` are narrowed by its own equation.
    fn candidates(&self, t: usize, section: usize, state: u32) -> Candidates {
        if !self.own_complete[t] {
            return Candidates::All;
        }
        let cfg = self.cfg;
        let mut known = 0u64;
        let mut unknown = Vec::new();
        for g in self.gens.into_target(section) {
            let x = self.slots[g.source];
            if x == NA {
                unknown.push(g);
            } else {
                known ^= g.apply(cfg.info_of(g.source, x));
            }
        }
        if unknown.is_empty() {
            return Candidates::Exact(known);
        }
        let image = |u: u64| {
            unknown
                .iter()
                .fold(0, |acc, g| acc ^ g.apply(solved_part(cfg, u, self.offsets[g.source], g.source)))
        };
        let sys = match &self.systems[state as usize] {
            PathSystem::Solved(sol) => return Candidates::Exact(known ^ image(*sol)),
            PathSystem::Open(sys) => sys,
        };
        let base = known ^ image(sys.particular());
        // Span of the kernel's image in parity space, kept in decreasing
        // order so each element reduces against the ones before it.
        let mut basis: Vec<u64> = Vec::new();
        for k in sys.kernel() {
            let mut v = image(k);
            for &b in &basis {
                v = v.min(v ^ b);
            }
            if v != 0 {
                let at = basis.partition_point(|&b| b > v);
                basis.insert(at, v);
            }
        }
        let distinct = self.index[section].sorted.len();
        if basis.len() >= 63 || (1usize << basis.len()) > distinct {
            return Candidates::All;
        }
        let mut targets = Vec::with_capacity(1 << basis.len());
        let mut cur = base;
        targets.push(cur);
        for i in 1u64..(1 << basis.len()) {
            cur ^= basis[i.trailing_zeros() as usize];
            targets.push(cur);
        }
        Candidates::Affine(targets)
    }

    fn run_root(&mut self, root_symbol: u64, outcome: &mut StitchOutcome) {
        let l = self.cfg.sections;
        self.nodes.clear();
        self.systems.clear();
        self.slots.iter_mut().for_each(|s| *s = UNVISITED);
        self.slots[self.root] = root_symbol;
        for e in self.completes_at[0].clone() {
            let mut work = Work { base: NONE, dirty: false };
            if !self.apply_equation(e, &mut work) {
                return;
            }
        }
        self.nodes.push(Node {
            parent: NONE,
            symbol: root_symbol,
            state: NONE,
        });
        let m = self.tail.len();
        let mut live: Vec<u32> = vec![0];
        let mut next: Vec<u32> = Vec::new();
        let mut picked: Vec<u64> = Vec::new();
        for t in 1..l {
            let section = (self.root + t) % l;
            let completes = std::mem::take(&mut self.completes_at[t]);
            next.clear();
            for &pid in &live {
                self.materialize(pid, t - 1);
                let pstate = self.nodes[pid as usize].state;
                let na = self.na;
                let cands = self.candidates(t, section, pstate);
                // The own equation is already enforced by an exact lookup.
                let own_enforced = matches!(cands, Candidates::Exact(_));
                picked.clear();
                match cands {
                    Candidates::All => picked.extend_from_slice(&self.index[section].sorted),
                    Candidates::Exact(p) => picked.extend(self.index[section].with_parity(p)),
                    Candidates::Affine(targets) => {
                        for p in targets {
                            picked.extend(self.index[section].with_parity(p));
                        }
                        picked.sort_unstable();
                    }
                }
                let check_tail = na == self.budget && t + 1 == m && self.tail_applies(t);
                let prepared = match self.systems.get(pstate as usize) {
                    Some(PathSystem::Open(sys)) => self.prepare(&completes, section, own_enforced, sys),
                    _ => None,
                };
                if let Some(prep) = &prepared {
                    for &x in &picked {
                        self.slots[section] = x;
                        let Some(known) = self.evaluate(prep, &completes) else {
                            continue;
                        };
                        if check_tail && !self.tail_feasible() {
                            continue;
                        }
                        let state = self.finalize_prepared(prep, known);
                        self.nodes.push(Node {
                            parent: pid,
                            symbol: x,
                            state,
                        });
                        next.push((self.nodes.len() - 1) as u32);
                    }
                    picked.clear();
                }
                for &x in &picked {
                    self.slots[section] = x;
                    let mut work = Work {
                        base: pstate,
                        dirty: false,
                    };
                    let ok = completes
                        .iter()
                        .all(|&e| (e == section && own_enforced) || self.apply_equation(e, &mut work));
                    if ok && !(check_tail && !self.tail_feasible()) {
                        let state = self.finalize(work);
                        self.nodes.push(Node {
                            parent: pid,
                            symbol: x,
                            state,
                        });
                        next.push((self.nodes.len() - 1) as u32);
                    }
                }
                if na < self.budget {
                    self.slots[section] = NA;
                    self.open_placeholder(pstate, section);
                    let mut work = Work {
                        base: pstate,
                        dirty: true,
                    };
                    let ok = completes.iter().all(|&e| self.apply_equation(e, &mut work));
                    let check_tail = na + 1 == self.budget && t >= m && self.tail_applies(t);
                    if ok && !(check_tail && !self.tail_feasible()) {
                        let state = self.finalize(work);
                        self.nodes.push(Node {
                            parent: pid,
                            symbol: NA,
                            state,
                        });
                        next.push((self.nodes.len() - 1) as u32);
                    }
                }
            }
            self.completes_at[t] = completes;
            outcome.peak_live = outcome.peak_live.max(next.len());
            if next.len() > self.list_cap {
                outcome.overloaded = true;
                return;
            }
            std::mem::swap(&mut live, &mut next);
            if live.is_empty() {
                return;
            }
        }
        for &id in &live {
            let path = self.path_of(id);
            if let Some(codeword) = uniquely_decode(&path, self.gens, self.cfg) {
                let erased = path.missing_sections(l);
                outcome.found.push(Stitched { codeword, erased });
                return;
            }
        }
    }

    fn path_of(&self, mut id: u32) -> PartialPath {
        let mut entries = Vec::with_capacity(self.cfg.sections);
        while id != NONE {
            let n = self.nodes[id as usize];
            entries.push((n.symbol != NA).then_some(n.symbol));
            id = n.parent;
        }
        entries.reverse();
        PartialPath {
            root_offset: self.root,
            entries,
        }
    }
}

/// Runs the stitching pass from section `root` with at most `budget`
/// placeholders per path.
pub fn stitch_sections(
    y: &ChannelOutput,
    budget: usize,
    root: usize,
    gens: &GeneratorSet,
    cfg: &CodeConfig,
    list_cap: usize,
) -> StitchOutcome {
    let l = cfg.sections;
    assert_eq!(y.len(), l, "channel output has the wrong number of sections");
    let mut outcome = StitchOutcome::default();
    let mut st = Stitcher {
        cfg,
        gens,
        budget,
        list_cap,
        index: (0..l).map(|s| SectionIndex::new(y, cfg, s)).collect(),
        nodes: Vec::new(),
        systems: Vec::new(),
        scratch: IncrementalSystem::new(0),
        slots: vec![UNVISITED; l],
        offsets: vec![0; l],
        unknowns: 0,
        na: 0,
        root: 0,
        completes_at: Vec::new(),
        own_complete: Vec::new(),
        tail: Vec::new(),
    };
    st.set_root(root);
    let roots = st.index[root].sorted.clone();
    for x0 in roots {
        st.run_root(x0, &mut outcome);
    }
    outcome
}
