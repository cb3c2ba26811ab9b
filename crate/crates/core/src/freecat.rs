//! Free premonoidal and free effectful categories.
//!
//! A morphism of the free premonoidal category over a device graph is a
//! resourceful trace: a flat sequence of whiskered generators threaded through
//! intermediate boundaries. Associativity and unit laws hold on the nose
//! because the sequence is flat, so the only quotient left is interchange:
//! two adjacent events may be exchanged when they share no device and their
//! spans do not overlap.
//!
//! [`PremonoidalMorphism::canonical_form`] picks a representative of each
//! interchange class; [`PremonoidalMorphism::bfs_equiv`] is an independent,
//! brute-force check of the same relation.

mod canonical;
mod enumerate;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graphs::{
    DeviceGraph, DeviceGraphMorphism, DeviceId, EffectfulGraph, GeneratorId, ObjectId, Violations, Word,
};

pub use canonical::{CanonicalForm, CLOSURE_CAP};
pub use enumerate::ENUMERATION_CAP;

/// Why two adjacent events cannot be exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapBlock {
    SharedDevice,
    OverlappingSpan,
}

impl fmt::Display for SwapBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwapBlock::SharedDevice => "shared device",
            SwapBlock::OverlappingSpan => "overlapping span",
        })
    }
}

pub(crate) fn show_word(w: &Word) -> String {
    if w.is_empty() {
        "I".to_string()
    } else {
        w.items().iter().map(|o| o.as_str()).collect::<Vec<_>>().join("⊗")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeCatError {
    #[error("invalid graph: {0}")]
    InvalidGraph(Violations),
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("unknown generator {0}")]
    UnknownGenerator(GeneratorId),
    #[error("boundary mismatch: expected {}, got {}", show_word(.expected), show_word(.got))]
    BoundaryMismatch { expected: Word, got: Word },
    #[error("morphisms live over different graphs")]
    GraphMismatch,
    #[error("events {index} and {next} cannot be swapped: {reason}", next = .index + 1)]
    NotSwappable { index: usize, reason: SwapBlock },
    #[error("swap index {index} out of range for {len} events")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("event {0} carries devices, so the morphism is not pure")]
    NotPure(GeneratorId),
    #[error("generator {0} has no embedding")]
    UnknownEmbedding(GeneratorId),
    #[error("invalid graph morphism: {0}")]
    InvalidMorphism(Violations),
    #[error("budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },
}

type Result<T> = std::result::Result<T, FreeCatError>;

#[derive(Debug)]
pub(crate) struct GenInfo {
    pub name: GeneratorId,
    pub dom: Vec<u32>,
    pub cod: Vec<u32>,
    /// Sorted device indices.
    pub devs: Vec<u32>,
}

impl GenInfo {
    pub fn d(&self) -> u32 {
        self.dom.len() as u32
    }

    pub fn c(&self) -> u32 {
        self.cod.len() as u32
    }

    /// 0 for ε→ε, 1 for producers, 2 for anything with inputs.
    pub fn kind(&self) -> u8 {
        match (self.dom.is_empty(), self.cod.is_empty()) {
            (true, true) => 0,
            (true, false) => 1,
            _ => 2,
        }
    }
}

fn disjoint(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// A device graph compiled to dense indices.
#[derive(Debug)]
pub(crate) struct Signature {
    pub graph: DeviceGraph,
    pub objects: Vec<ObjectId>,
    object_index: BTreeMap<ObjectId, u32>,
    pub gens: Vec<GenInfo>,
    gen_index: BTreeMap<GeneratorId, u32>,
    pub devices: Vec<DeviceId>,
}

impl Signature {
    fn compile(graph: &DeviceGraph) -> Result<Self> {
        graph.validate().map_err(FreeCatError::InvalidGraph)?;
        let objects: Vec<ObjectId> = graph.objects().iter().cloned().collect();
        let object_index = objects.iter().enumerate().map(|(i, o)| (o.clone(), i as u32)).collect();
        let devices: Vec<DeviceId> = graph.devices.iter().cloned().collect();
        let device_index: BTreeMap<&DeviceId, u32> =
            devices.iter().enumerate().map(|(i, d)| (d, i as u32)).collect();
        let mut sig = Signature {
            graph: graph.clone(),
            objects,
            object_index,
            gens: Vec::new(),
            gen_index: BTreeMap::new(),
            devices: devices.clone(),
        };
        for (i, (name, arity)) in graph.generators().iter().enumerate() {
            let dom = sig.word_indices(&arity.dom)?;
            let cod = sig.word_indices(&arity.cod)?;
            let devs = graph.dev[name].iter().map(|d| device_index[d]).collect();
            sig.gens.push(GenInfo { name: name.clone(), dom, cod, devs });
            sig.gen_index.insert(name.clone(), i as u32);
        }
        Ok(sig)
    }

    pub fn word_indices(&self, w: &Word) -> Result<Vec<u32>> {
        w.iter()
            .map(|o| self.object_index.get(o).copied().ok_or_else(|| FreeCatError::UnknownObject(o.clone())))
            .collect()
    }

    pub fn word(&self, idx: &[u32]) -> Word {
        idx.iter().map(|&i| self.objects[i as usize].clone()).collect()
    }

    pub fn gen(&self, name: &GeneratorId) -> Result<u32> {
        self.gen_index.get(name).copied().ok_or_else(|| FreeCatError::UnknownGenerator(name.clone()))
    }

    pub fn info(&self, step: Step) -> &GenInfo {
        &self.gens[step.gen as usize]
    }
}

/// One event in dense form: generator index and span start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Step {
    pub gen: u32,
    pub start: u32,
}

/// All ways of exchanging adjacent steps `a; b`, right-of-`a` case first.
pub(crate) fn swap_options(sig: &Signature, a: Step, b: Step) -> std::result::Result<Vec<(Step, Step)>, SwapBlock> {
    let (ga, gb) = (sig.info(a), sig.info(b));
    if !disjoint(&ga.devs, &gb.devs) {
        return Err(SwapBlock::SharedDevice);
    }
    let (d1, c1, s1) = (ga.d(), ga.c(), a.start);
    let (d2, c2, s2) = (gb.d(), gb.c(), b.start);
    let mut out = Vec::with_capacity(2);
    if s2 >= s1 + c1 {
        out.push((Step { gen: b.gen, start: s2 - c1 + d1 }, a));
    }
    if s2 + d2 <= s1 {
        let v = (b, Step { gen: a.gen, start: s1 - d2 + c2 });
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        Err(SwapBlock::OverlappingSpan)
    } else {
        Ok(out)
    }
}

/// Applies `step` to `boundary` in place, checking the domain matches.
pub(crate) fn apply(sig: &Signature, boundary: &mut Vec<u32>, step: Step) -> Result<()> {
    let info = sig.info(step);
    let s = step.start as usize;
    let d = info.dom.len();
    if s + d > boundary.len() || boundary[s..s + d] != info.dom[..] {
        let got = if s <= boundary.len() { &boundary[s..(s + d).min(boundary.len())] } else { &[][..] };
        return Err(FreeCatError::BoundaryMismatch { expected: sig.word(&info.dom), got: sig.word(got) });
    }
    boundary.splice(s..s + d, info.cod.iter().copied());
    Ok(())
}

/// Free premonoidal category over a device graph.
#[derive(Debug, Clone)]
pub struct FreeCategory {
    sig: Arc<Signature>,
}

impl PartialEq for FreeCategory {
    fn eq(&self, other: &Self) -> bool {
        same_sig(&self.sig, &other.sig)
    }
}

fn same_sig(a: &Arc<Signature>, b: &Arc<Signature>) -> bool {
    Arc::ptr_eq(a, b) || a.graph == b.graph
}

impl FreeCategory {
    pub fn new(graph: &DeviceGraph) -> Result<Self> {
        Ok(Self { sig: Arc::new(Signature::compile(graph)?) })
    }

    pub fn graph(&self) -> &DeviceGraph {
        &self.sig.graph
    }

    pub(crate) fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn identity(&self, w: &Word) -> Result<PremonoidalMorphism> {
        let source = self.sig.word_indices(w)?;
        Ok(PremonoidalMorphism { sig: self.sig.clone(), target: source.clone(), source, steps: Vec::new() })
    }

    /// The single event `x ▷ f ◁ y`.
    pub fn gen_event(&self, x: &Word, f: &GeneratorId, y: &Word) -> Result<PremonoidalMorphism> {
        let gen = self.sig.gen(f)?;
        let (x, y) = (self.sig.word_indices(x)?, self.sig.word_indices(y)?);
        let info = &self.sig.gens[gen as usize];
        let source = [&x[..], &info.dom, &y].concat();
        let target = [&x[..], &info.cod, &y].concat();
        Ok(PremonoidalMorphism {
            sig: self.sig.clone(),
            source,
            target,
            steps: vec![Step { gen, start: x.len() as u32 }],
        })
    }

    /// Builds a morphism from explicit `(generator, span start)` pairs.
    pub fn from_steps(&self, source: &Word, steps: &[(GeneratorId, usize)]) -> Result<PremonoidalMorphism> {
        let source = self.sig.word_indices(source)?;
        let steps = steps
            .iter()
            .map(|(g, s)| Ok(Step { gen: self.sig.gen(g)?, start: *s as u32 }))
            .collect::<Result<Vec<_>>>()?;
        self.from_raw(source, steps)
    }

    /// Builds a morphism from whiskered events, checking every boundary.
    pub fn from_events(&self, source: &Word, events: &[Event]) -> Result<PremonoidalMorphism> {
        let mut m = self.identity(source)?;
        for e in events {
            let next = self.gen_event(&e.left, &e.gen, &e.right)?;
            m = m.compose(&next)?;
        }
        Ok(m)
    }

    pub(crate) fn from_raw(&self, source: Vec<u32>, steps: Vec<Step>) -> Result<PremonoidalMorphism> {
        let mut boundary = source.clone();
        for &s in &steps {
            apply(&self.sig, &mut boundary, s)?;
        }
        Ok(PremonoidalMorphism { sig: self.sig.clone(), source, target: boundary, steps })
    }

    /// Image of `f` under a device-graph morphism into this category's graph.
    pub fn map_morphism(&self, alpha: &DeviceGraphMorphism, f: &PremonoidalMorphism) -> Result<PremonoidalMorphism> {
        alpha.check(&f.sig.graph, &self.sig.graph).map_err(FreeCatError::InvalidMorphism)?;
        let map_obj = |w: &[u32]| -> Result<Vec<u32>> {
            let word = alpha.map.map_word(&f.sig.word(w)).expect("checked total");
            self.sig.word_indices(&word)
        };
        let source = map_obj(&f.source)?;
        let steps = f
            .steps
            .iter()
            .map(|s| {
                let image = &alpha.map.generators[&f.sig.info(*s).name];
                Ok(Step { gen: self.sig.gen(image)?, start: s.start })
            })
            .collect::<Result<Vec<_>>>()?;
        self.from_raw(source, steps)
    }
}

/// One whiskered generator `left ▷ gen ◁ right`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub gen: GeneratorId,
    pub left: Word,
    pub right: Word,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{} | {}]", self.gen, self.left, self.right)
    }
}

/// Which strand occupies each slot of each intermediate boundary.
///
/// Strands `0..source.len()` come from the source; each event then consumes
/// its input strands and emits fresh ones, numbered in order of creation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrandThreading {
    pub boundaries: Vec<Vec<usize>>,
    pub inputs: Vec<Vec<usize>>,
    pub outputs: Vec<Vec<usize>>,
    pub strand_count: usize,
}

impl StrandThreading {
    /// Event producing each strand, or `None` for source strands.
    pub fn producers(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.strand_count];
        for (i, outs) in self.outputs.iter().enumerate() {
            for &s in outs {
                out[s] = Some(i);
            }
        }
        out
    }

    /// Event consuming each strand, or `None` for target strands.
    pub fn consumers(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.strand_count];
        for (i, ins) in self.inputs.iter().enumerate() {
            for &s in ins {
                out[s] = Some(i);
            }
        }
        out
    }
}

/// Result of the brute-force swap search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfsOutcome {
    Equal,
    Unequal,
    Inconclusive,
}

/// A resourceful trace: a morphism of the free premonoidal category.
#[derive(Clone)]
pub struct PremonoidalMorphism {
    sig: Arc<Signature>,
    source: Vec<u32>,
    target: Vec<u32>,
    steps: Vec<Step>,
}

impl PartialEq for PremonoidalMorphism {
    /// Equality of representations; use [`PremonoidalMorphism::equals`] for the congruence.
    fn eq(&self, other: &Self) -> bool {
        same_sig(&self.sig, &other.sig) && self.source == other.source && self.steps == other.steps
    }
}

impl Eq for PremonoidalMorphism {}

impl fmt::Debug for PremonoidalMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PremonoidalMorphism({self})")
    }
}

fn write_word(f: &mut fmt::Formatter<'_>, w: &Word) -> fmt::Result {
    write!(f, "{w}")
}

impl fmt::Display for PremonoidalMorphism {
    /// Expression syntax accepted by the command-line parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            f.write_str("id(")?;
            write_word(f, &self.source())?;
            return f.write_str(")");
        }
        for (i, e) in self.events().iter().enumerate() {
            if i > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl PremonoidalMorphism {
    pub fn category(&self) -> FreeCategory {
        FreeCategory { sig: self.sig.clone() }
    }

    pub fn graph(&self) -> &DeviceGraph {
        &self.sig.graph
    }

    pub fn source(&self) -> Word {
        self.sig.word(&self.source)
    }

    pub fn target(&self) -> Word {
        self.sig.word(&self.target)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub(crate) fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub(crate) fn raw_source(&self) -> &[u32] {
        &self.source
    }

    pub(crate) fn raw_target(&self) -> &[u32] {
        &self.target
    }

    pub(crate) fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Generator names in sequence order.
    pub fn generators(&self) -> Vec<GeneratorId> {
        self.steps.iter().map(|s| self.sig.info(*s).name.clone()).collect()
    }

    /// The events with their whiskers, recomputed from the boundaries.
    pub fn events(&self) -> Vec<Event> {
        let mut boundary = self.source.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for &step in &self.steps {
            let info = self.sig.info(step);
            let s = step.start as usize;
            out.push(Event {
                gen: info.name.clone(),
                left: self.sig.word(&boundary[..s]),
                right: self.sig.word(&boundary[s + info.dom.len()..]),
            });
            boundary.splice(s..s + info.dom.len(), info.cod.iter().copied());
        }
        out
    }

    /// Source, every intermediate boundary, and the target.
    pub fn boundaries(&self) -> Vec<Word> {
        let mut boundary = self.source.clone();
        let mut out = vec![self.sig.word(&boundary)];
        for &step in &self.steps {
            apply(&self.sig, &mut boundary, step).expect("threaded on construction");
            out.push(self.sig.word(&boundary));
        }
        out
    }

    pub fn strand_threading(&self) -> StrandThreading {
        let mut boundary: Vec<usize> = (0..self.source.len()).collect();
        let mut next = boundary.len();
        let mut t = StrandThreading {
            boundaries: vec![boundary.clone()],
            inputs: Vec::new(),
            outputs: Vec::new(),
            strand_count: 0,
        };
        for &step in &self.steps {
            let info = self.sig.info(step);
            let s = step.start as usize;
            let outs: Vec<usize> = (next..next + info.cod.len()).collect();
            next += outs.len();
            let ins: Vec<usize> = boundary.splice(s..s + info.dom.len(), outs.iter().copied()).collect();
            t.inputs.push(ins);
            t.outputs.push(outs);
            t.boundaries.push(boundary.clone());
        }
        t.strand_count = next;
        t
    }

    pub(crate) fn check_same_graph(&self, other: &Self) -> Result<()> {
        if same_sig(&self.sig, &other.sig) {
            Ok(())
        } else {
            Err(FreeCatError::GraphMismatch)
        }
    }

    /// `self ; other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_graph(other)?;
        if self.target != other.source {
            return Err(FreeCatError::BoundaryMismatch { expected: self.target(), got: other.source() });
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Ok(Self { sig: self.sig.clone(), source: self.source.clone(), target: other.target.clone(), steps })
    }

    /// `a ⋉ self`.
    pub fn left_whisker(&self, a: &Word) -> Result<Self> {
        let a = self.sig.word_indices(a)?;
        Ok(self.left_whisker_raw(&a))
    }

    /// `self ⋊ a`.
    pub fn right_whisker(&self, a: &Word) -> Result<Self> {
        let a = self.sig.word_indices(a)?;
        Ok(self.right_whisker_raw(&a))
    }

    pub(crate) fn left_whisker_raw(&self, a: &[u32]) -> Self {
        let shift = a.len() as u32;
        Self {
            sig: self.sig.clone(),
            source: [a, &self.source[..]].concat(),
            target: [a, &self.target[..]].concat(),
            steps: self.steps.iter().map(|s| Step { gen: s.gen, start: s.start + shift }).collect(),
        }
    }

    pub(crate) fn right_whisker_raw(&self, a: &[u32]) -> Self {
        Self {
            sig: self.sig.clone(),
            source: [&self.source[..], a].concat(),
            target: [&self.target[..], a].concat(),
            steps: self.steps.clone(),
        }
    }

    fn then_raw(mut self, other: Self) -> Self {
        debug_assert_eq!(self.target, other.source);
        self.steps.extend(other.steps);
        self.target = other.target;
        self
    }

    /// Union of the devices of all events.
    pub fn devices_of(&self) -> BTreeSet<DeviceId> {
        self.steps
            .iter()
            .flat_map(|s| self.sig.info(*s).devs.iter().map(|&d| self.sig.devices[d as usize].clone()))
            .collect()
    }

    pub fn is_pure(&self) -> bool {
        self.steps.iter().all(|s| self.sig.info(*s).devs.is_empty())
    }

    fn swap_check(&self, k: usize) -> Result<Vec<(Step, Step)>> {
        if k + 1 >= self.steps.len() {
            return Err(FreeCatError::IndexOutOfRange { index: k, len: self.steps.len() });
        }
        swap_options(&self.sig, self.steps[k], self.steps[k + 1])
            .map_err(|reason| FreeCatError::NotSwappable { index: k, reason })
    }

    /// Exchanges events `k` and `k + 1`.
    ///
    /// When both events have a zero-width side meeting at the same position
    /// the exchange can go two ways; this picks the one placing the later
    /// event to the right. [`Self::swap_variants`] returns both.
    pub fn swap_adjacent(&self, k: usize) -> Result<Self> {
        let (a, b) = self.swap_check(k)?[0];
        let mut out = self.clone();
        out.steps[k] = a;
        out.steps[k + 1] = b;
        Ok(out)
    }

    pub fn swap_variants(&self, k: usize) -> Result<Vec<Self>> {
        Ok(self
            .swap_check(k)?
            .into_iter()
            .map(|(a, b)| {
                let mut out = self.clone();
                out.steps[k] = a;
                out.steps[k + 1] = b;
                out
            })
            .collect())
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        canonical::canonical_form(self)
    }

    /// Equality in the free premonoidal category.
    pub fn equals(&self, other: &Self) -> Result<bool> {
        self.check_same_graph(other)?;
        Ok(self.equals_unchecked(other))
    }

    pub(crate) fn equals_unchecked(&self, other: &Self) -> bool {
        if self.source != other.source || self.target != other.target || self.steps.len() != other.steps.len() {
            return false;
        }
        if self.steps == other.steps {
            return true;
        }
        let mut a: Vec<u32> = self.steps.iter().map(|s| s.gen).collect();
        let mut b: Vec<u32> = other.steps.iter().map(|s| s.gen).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b && canonical::canonical_steps(self) == canonical::canonical_steps(other)
    }

    /// Every representation reachable by adjacent swaps, or `None` past `max_states`.
    pub fn swap_closure(&self, max_states: usize) -> Option<Vec<Self>> {
        let mut seen: HashSet<Vec<Step>> = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(self.steps.clone());
        queue.push_back(self.steps.clone());
        while let Some(state) = queue.pop_front() {
            for k in 0..state.len().saturating_sub(1) {
                let Ok(options) = swap_options(&self.sig, state[k], state[k + 1]) else {
                    continue;
                };
                for (a, b) in options {
                    let mut next = state.clone();
                    next[k] = a;
                    next[k + 1] = b;
                    if seen.insert(next.clone()) {
                        if seen.len() > max_states {
                            return None;
                        }
                        queue.push_back(next);
                    }
                }
            }
            order.push(state);
        }
        Some(
            order
                .into_iter()
                .map(|steps| Self { sig: self.sig.clone(), source: self.source.clone(), target: self.target.clone(), steps })
                .collect(),
        )
    }

    /// Breadth-first search of the swap closure of `self` for `other`.
    pub fn bfs_equiv(&self, other: &Self, max_states: usize) -> Result<BfsOutcome> {
        self.check_same_graph(other)?;
        if self.source != other.source || self.target != other.target || self.steps.len() != other.steps.len() {
            return Ok(BfsOutcome::Unequal);
        }
        let mut seen: HashSet<Vec<Step>> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.steps.clone());
        queue.push_back(self.steps.clone());
        while let Some(state) = queue.pop_front() {
            if state == other.steps {
                return Ok(BfsOutcome::Equal);
            }
            for k in 0..state.len().saturating_sub(1) {
                let Ok(options) = swap_options(&self.sig, state[k], state[k + 1]) else {
                    continue;
                };
                for (a, b) in options {
                    let mut next = state.clone();
                    next[k] = a;
                    next[k + 1] = b;
                    if seen.insert(next.clone()) {
                        if seen.len() > max_states {
                            return Ok(BfsOutcome::Inconclusive);
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(BfsOutcome::Unequal)
    }

    /// `(f ⋊ A′);(B ⋉ g) = (A ⋉ g);(f ⋊ B′)` for `f = self : A → B`, `g : A′ → B′`.
    fn parallel_with(&self, g: &Self) -> bool {
        let lhs = self.right_whisker_raw(&g.source).then_raw(g.left_whisker_raw(&self.target));
        let rhs = g.left_whisker_raw(&self.source).then_raw(self.right_whisker_raw(&g.target));
        lhs.equals_unchecked(&rhs)
    }

    /// Whether `self` and `g` interchange, in both orientations.
    pub fn interchanges_with(&self, g: &Self) -> Result<bool> {
        self.check_same_graph(g)?;
        Ok(self.parallel_with(g) && g.parallel_with(self))
    }

    /// Monoidal product `(f ⋊ dom g);(cod f ⋉ g)` of two device-free morphisms.
    pub fn tensor_pure(&self, g: &Self) -> Result<Self> {
        self.check_same_graph(g)?;
        for m in [self, g] {
            if let Some(s) = m.steps.iter().find(|s| !m.sig.info(**s).devs.is_empty()) {
                return Err(FreeCatError::NotPure(m.sig.info(*s).name.clone()));
            }
        }
        Ok(self.right_whisker_raw(&g.source).then_raw(g.left_whisker_raw(&self.target)))
    }
}

/// Equality in the free premonoidal category.
pub fn morphisms_equal(f: &PremonoidalMorphism, g: &PremonoidalMorphism) -> Result<bool> {
    f.equals(g)
}

/// Whether `f` and `g` interchange in both orientations.
pub fn interchange_holds(f: &PremonoidalMorphism, g: &PremonoidalMorphism) -> Result<bool> {
    f.interchanges_with(g)
}

/// The free effectful category on an effectful graph: a device-free pure side
/// embedded into the impure side.
#[derive(Debug, Clone)]
pub struct FreeEffectfulCategory {
    graph: EffectfulGraph,
    pure: FreeCategory,
    impure: FreeCategory,
}

impl FreeEffectfulCategory {
    pub fn new(graph: &EffectfulGraph) -> Result<Self> {
        graph.validate().map_err(FreeCatError::InvalidGraph)?;
        Ok(Self {
            graph: graph.clone(),
            pure: FreeCategory::new(&DeviceGraph::device_free(graph.pure.clone()))?,
            impure: FreeCategory::new(&graph.impure)?,
        })
    }

    pub fn graph(&self) -> &EffectfulGraph {
        &self.graph
    }

    pub fn pure(&self) -> &FreeCategory {
        &self.pure
    }

    pub fn impure(&self) -> &FreeCategory {
        &self.impure
    }

    /// Image of a pure morphism in the impure category.
    pub fn embed_pure(&self, f: &PremonoidalMorphism) -> Result<PremonoidalMorphism> {
        if !same_sig(&f.sig, &self.pure.sig) {
            return Err(FreeCatError::GraphMismatch);
        }
        let steps = f
            .steps
            .iter()
            .map(|s| {
                let name = &f.sig.info(*s).name;
                let image = self.graph.embed.get(name).ok_or_else(|| FreeCatError::UnknownEmbedding(name.clone()))?;
                Ok(Step { gen: self.impure.sig.gen(image)?, start: s.start })
            })
            .collect::<Result<Vec<_>>>()?;
        let source = self.impure.sig.word_indices(&f.source())?;
        self.impure.from_raw(source, steps)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graphs::tests::{d, g, o, printer, w};

    pub fn one_printer() -> FreeCategory {
        FreeCategory::new(&printer().impure).unwrap()
    }

    pub fn two_printers() -> FreeCategory {
        let graph = DeviceGraph::new()
            .with_object(o("Doc"))
            .with_device(d("l·p"))
            .with_device(d("r·p"))
            .with_generator(g("doc"), w(""), w("Doc"), [])
            .with_generator(g("l·print"), w("Doc"), w(""), [d("l·p")])
            .with_generator(g("r·print"), w("Doc"), w(""), [d("r·p")]);
        FreeCategory::new(&graph).unwrap()
    }

    #[test]
    fn identities() {
        let c = one_printer();
        let id = c.identity(&w("")).unwrap();
        assert_eq!((id.source(), id.target(), id.len()), (w(""), w(""), 0));
        let id_doc = c.identity(&w("Doc")).unwrap();
        assert_eq!(id_doc.target(), w("Doc"));
        let print = c.gen_event(&w(""), &g("print"), &w("")).unwrap();
        assert_eq!(id_doc.compose(&print).unwrap(), print);
        assert_eq!(print.compose(&c.identity(&w("")).unwrap()).unwrap(), print);
        assert_eq!(c.identity(&w("X")).unwrap_err(), FreeCatError::UnknownObject(o("X")));
    }

    #[test]
    fn generator_events() {
        let c = one_printer();
        let p = c.gen_event(&w(""), &g("print"), &w("Doc")).unwrap();
        assert_eq!((p.source(), p.target()), (w("Doc Doc"), w("Doc")));
        let doc = c.gen_event(&w(""), &g("doc"), &w("")).unwrap();
        assert_eq!((doc.source(), doc.target()), (w(""), w("Doc")));
        assert_eq!(
            p.events(),
            vec![Event { gen: g("print"), left: w(""), right: w("Doc") }]
        );
        assert_eq!(c.gen_event(&w(""), &g("scan"), &w("")).unwrap_err(), FreeCatError::UnknownGenerator(g("scan")));

        let graph = DeviceGraph::new()
            .with_object(o("A"))
            .with_generator(g("f"), w(""), w(""), []);
        let c = FreeCategory::new(&graph).unwrap();
        let f = c.gen_event(&w("A"), &g("f"), &w("")).unwrap();
        assert_eq!((f.source(), f.target()), (w("A"), w("A")));
        assert_eq!(f.steps()[0].start, 1);
    }

    #[test]
    fn composition() {
        let c = one_printer();
        let p1 = c.gen_event(&w(""), &g("print"), &w("Doc")).unwrap();
        let p2 = c.gen_event(&w(""), &g("print"), &w("")).unwrap();
        let both = p1.compose(&p2).unwrap();
        assert_eq!((both.source(), both.target(), both.len()), (w("Doc Doc"), w(""), 2));
        assert_eq!(both.to_string(), "print[ | Doc] ; print[ | ]");

        let doc = c.gen_event(&w(""), &g("doc"), &w("")).unwrap();
        let fresh = doc.compose(&p2).unwrap();
        assert_eq!((fresh.source(), fresh.target(), fresh.len()), (w(""), w(""), 2));

        assert_eq!(
            p2.compose(&p2).unwrap_err(),
            FreeCatError::BoundaryMismatch { expected: w(""), got: w("Doc") }
        );
        assert_eq!(p1.compose(&two_printers().identity(&w("Doc")).unwrap()).unwrap_err(), FreeCatError::GraphMismatch);
    }

    #[test]
    fn whiskering() {
        let c = one_printer();
        let p = c.gen_event(&w(""), &g("print"), &w("")).unwrap();
        assert_eq!(p.left_whisker(&w("")).unwrap(), p);
        assert_eq!(p.right_whisker(&w("")).unwrap(), p);
        assert_eq!(
            p.left_whisker(&w("Doc")).unwrap().left_whisker(&w("Doc")).unwrap(),
            p.left_whisker(&w("Doc Doc")).unwrap()
        );
        assert_eq!(p.left_whisker(&w("Doc")).unwrap(), c.gen_event(&w("Doc"), &g("print"), &w("")).unwrap());
        assert_eq!(p.right_whisker(&w("Doc")).unwrap(), c.gen_event(&w(""), &g("print"), &w("Doc")).unwrap());
    }

    #[test]
    fn devices() {
        let c = two_printers();
        assert!(c.identity(&w("Doc")).unwrap().devices_of().is_empty());
        let l = c.gen_event(&w(""), &g("l·print"), &w("Doc")).unwrap();
        let r = c.gen_event(&w(""), &g("r·print"), &w("")).unwrap();
        let both = l.compose(&r).unwrap();
        assert_eq!(both.devices_of(), [d("l·p"), d("r·p")].into());
        let p = one_printer().gen_event(&w(""), &g("print"), &w("")).unwrap();
        assert_eq!(p.devices_of(), [d("p1")].into());
    }

    #[test]
    fn swaps() {
        let c = two_printers();
        let f = c.from_steps(&w("Doc Doc"), &[(g("l·print"), 0), (g("r·print"), 0)]).unwrap();
        let s = f.swap_adjacent(0).unwrap();
        assert_eq!(s.generators(), vec![g("r·print"), g("l·print")]);
        assert_eq!((s.source(), s.target()), (f.source(), f.target()));
        assert_eq!(s.swap_adjacent(0).unwrap(), f);
        assert_eq!(f.swap_adjacent(1).unwrap_err(), FreeCatError::IndexOutOfRange { index: 1, len: 2 });

        let c = one_printer();
        let f = c.from_steps(&w("Doc Doc"), &[(g("print"), 0), (g("print"), 0)]).unwrap();
        assert_eq!(
            f.swap_adjacent(0).unwrap_err(),
            FreeCatError::NotSwappable { index: 0, reason: SwapBlock::SharedDevice }
        );

        let graph = DeviceGraph::new()
            .with_object(o("A"))
            .with_device(d("p"))
            .with_device(d("q"))
            .with_generator(g("a"), w(""), w(""), [d("p")])
            .with_generator(g("b"), w(""), w(""), [d("q")]);
        let c = FreeCategory::new(&graph).unwrap();
        let f = c.from_steps(&w("A"), &[(g("a"), 1), (g("b"), 1)]).unwrap();
        let s = f.swap_adjacent(0).unwrap();
        assert_eq!(s.generators(), vec![g("b"), g("a")]);
        assert_eq!(s.steps(), &[Step { gen: 1, start: 1 }, Step { gen: 0, start: 1 }]);
    }

    #[test]
    fn overlapping_spans_block_swaps() {
        let graph = DeviceGraph::new()
            .with_object(o("A"))
            .with_generator(g("f"), w("A"), w("A"), [])
            .with_generator(g("h"), w("A"), w("A"), []);
        let c = FreeCategory::new(&graph).unwrap();
        let f = c.from_steps(&w("A"), &[(g("f"), 0), (g("h"), 0)]).unwrap();
        assert_eq!(
            f.swap_adjacent(0).unwrap_err(),
            FreeCatError::NotSwappable { index: 0, reason: SwapBlock::OverlappingSpan }
        );
    }

    #[test]
    fn ambiguous_zero_width_swap_has_two_variants() {
        // A consumer followed by a producer at the same position: the
        // producer may land on either side of the consumed wire.
        let c = one_printer();
        let f = c.from_steps(&w("Doc Doc"), &[(g("print"), 0), (g("doc"), 0)]).unwrap();
        let variants = f.swap_variants(0).unwrap();
        assert_eq!(variants.len(), 2);
        assert_eq!(variants[0].steps()[0].start, 1);
        assert_eq!(variants[1].steps()[0].start, 0);
        assert!(variants.iter().all(|v| v.target() == f.target()));
    }

    #[test]
    fn equality_of_print_orders() {
        let c = one_printer();
        let a = c.from_steps(&w("Doc Doc"), &[(g("print"), 0), (g("print"), 0)]).unwrap();
        let b = c.from_steps(&w("Doc Doc"), &[(g("print"), 1), (g("print"), 0)]).unwrap();
        assert!(!a.equals(&b).unwrap());
        assert_eq!(a.bfs_equiv(&b, 1000).unwrap(), BfsOutcome::Unequal);
        assert_eq!(a.swap_closure(1000).unwrap().len(), 1);
        assert!(a.equals(&a).unwrap());

        let c = two_printers();
        let a = c.from_steps(&w("Doc Doc"), &[(g("l·print"), 0), (g("r·print"), 0)]).unwrap();
        let b = c.from_steps(&w("Doc Doc"), &[(g("r·print"), 1), (g("l·print"), 0)]).unwrap();
        assert!(a.equals(&b).unwrap());
        assert_eq!(a.bfs_equiv(&b, 1000).unwrap(), BfsOutcome::Equal);
    }

    #[test]
    fn three_independent_events_have_six_arrangements() {
        let graph = DeviceGraph::new()
            .with_device(d("p"))
            .with_device(d("q"))
            .with_device(d("r"))
            .with_generator(g("a"), w(""), w(""), [d("p")])
            .with_generator(g("b"), w(""), w(""), [d("q")])
            .with_generator(g("c"), w(""), w(""), [d("r")]);
        let c = FreeCategory::new(&graph).unwrap();
        let f = c.from_steps(&w(""), &[(g("a"), 0), (g("b"), 0), (g("c"), 0)]).unwrap();
        let closure = f.swap_closure(100).unwrap();
        assert_eq!(closure.len(), 6);
        assert!(closure.iter().all(|h| h.equals(&f).unwrap()));
        assert!(f.swap_closure(3).is_none());
        assert_eq!(f.bfs_equiv(&closure[5], 3).unwrap(), BfsOutcome::Inconclusive);
    }

    #[test]
    fn interchange() {
        let c = one_printer();
        let p = c.gen_event(&w(""), &g("print"), &w("")).unwrap();
        assert!(!p.interchanges_with(&p).unwrap());
        let id = c.identity(&w("Doc")).unwrap();
        assert!(p.interchanges_with(&id).unwrap());
        let doc = c.gen_event(&w(""), &g("doc"), &w("")).unwrap();
        assert!(doc.interchanges_with(&p).unwrap());

        let c = two_printers();
        let l = c.gen_event(&w(""), &g("l·print"), &w("")).unwrap();
        let r = c.gen_event(&w(""), &g("r·print"), &w("")).unwrap();
        assert!(interchange_holds(&l, &r).unwrap());
        assert!(!interchange_holds(&l, &l).unwrap());
    }

    #[test]
    fn pure_tensor() {
        let fe = FreeEffectfulCategory::new(&printer()).unwrap();
        let pc = fe.pure();
        let id = pc.identity(&w("")).unwrap();
        assert_eq!(id.tensor_pure(&id).unwrap(), id);
        let doc = pc.gen_event(&w(""), &g("doc"), &w("")).unwrap();
        let dd = doc.tensor_pure(&doc).unwrap();
        assert_eq!(dd.events().len(), 2);
        assert_eq!(dd.canonical_form().events[0].left, w(""));
        assert_eq!(dd.target(), w("Doc Doc"));

        let p = one_printer().gen_event(&w(""), &g("print"), &w("")).unwrap();
        assert_eq!(p.tensor_pure(&p).unwrap_err(), FreeCatError::NotPure(g("print")));
    }

    #[test]
    fn tensor_is_functorial_on_pure_morphisms() {
        let graph = DeviceGraph::new()
            .with_object(o("A"))
            .with_object(o("B"))
            .with_generator(g("f"), w("A"), w("B"), [])
            .with_generator(g("h"), w("B"), w("A B"), [])
            .with_generator(g("k"), w(""), w("A"), []);
        let c = FreeCategory::new(&graph).unwrap();
        let f1 = c.gen_event(&w(""), &g("f"), &w("")).unwrap();
        let g1 = c.gen_event(&w(""), &g("h"), &w("")).unwrap();
        let f2 = c.gen_event(&w(""), &g("k"), &w("")).unwrap();
        let g2 = c.gen_event(&w(""), &g("f"), &w("")).unwrap();
        let lhs = f1.tensor_pure(&f2).unwrap().compose(&g1.tensor_pure(&g2).unwrap()).unwrap();
        let rhs = f1.compose(&g1).unwrap().tensor_pure(&f2.compose(&g2).unwrap()).unwrap();
        assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn embedding_pure_morphisms() {
        let fe = FreeEffectfulCategory::new(&printer()).unwrap();
        let id = fe.pure().identity(&w("Doc")).unwrap();
        assert_eq!(fe.embed_pure(&id).unwrap(), fe.impure().identity(&w("Doc")).unwrap());
        let doc = fe.pure().gen_event(&w(""), &g("doc"), &w("")).unwrap();
        let image = fe.embed_pure(&doc).unwrap();
        assert!(image.devices_of().is_empty());
        let print = fe.impure().gen_event(&w(""), &g("print"), &w("")).unwrap();
        assert!(image.interchanges_with(&print).unwrap());
        assert_eq!(fe.embed_pure(&print).unwrap_err(), FreeCatError::GraphMismatch);
    }

    #[test]
    fn mapping_along_graph_morphisms() {
        let one = one_printer();
        let two = two_printers();
        let alpha = DeviceGraphMorphism::new(crate::graphs::MonoidalGraphMorphism {
            objects: [(o("Doc"), o("Doc"))].into(),
            generators: [(g("doc"), g("doc")), (g("print"), g("l·print"))].into(),
        });
        let f = one.from_steps(&w("Doc Doc"), &[(g("print"), 0), (g("print"), 0)]).unwrap();
        let image = two.map_morphism(&alpha, &f).unwrap();
        assert_eq!(image.generators(), vec![g("l·print"), g("l·print")]);

        let id = DeviceGraphMorphism::identity(one.graph());
        assert_eq!(one.map_morphism(&id, &f).unwrap(), f);

        // Retypes doc and leaves print unmapped.
        let bad = DeviceGraphMorphism::new(crate::graphs::MonoidalGraphMorphism {
            objects: [(o("Doc"), o("Doc"))].into(),
            generators: [(g("doc"), g("l·print"))].into(),
        });
        assert!(matches!(two.map_morphism(&bad, &f), Err(FreeCatError::InvalidMorphism(_))));
    }

    #[test]
    fn strand_threading_tracks_wires() {
        let c = one_printer();
        let f = c.from_steps(&w("Doc"), &[(g("doc"), 1), (g("print"), 0), (g("print"), 0)]).unwrap();
        let t = f.strand_threading();
        assert_eq!(t.boundaries, vec![vec![0], vec![0, 1], vec![1], vec![]]);
        assert_eq!(t.inputs, vec![vec![], vec![0], vec![1]]);
        assert_eq!(t.producers(), vec![None, Some(0)]);
        assert_eq!(t.consumers(), vec![Some(1), Some(2)]);
    }
}
