//! Mazurkiewicz traces, distributions and the cliques construction.
//!
//! Trace equality is decided two independent ways: by the projection
//! criterion (equal letter counts, and equal projections onto every dependent
//! pair) and by comparing Foata normal forms. A distribution is a device graph
//! with no objects whose generators are all `ε → ε`; its free premonoidal
//! category is the trace monoid, which [`trace_vs_freecat`] exploits.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::freecat::{FreeCatError, FreeCategory};
use crate::graphs::{DeviceGraph, DeviceId, GeneratorId, Word};
use crate::interference::maximal_cliques_of;

pub type Symbol = GeneratorId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("unknown symbol {0}")]
    UnknownSymbol(Symbol),
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("not a distribution: {0}")]
    NotADistribution(String),
    #[error(transparent)]
    FreeCat(#[from] FreeCatError),
}

/// A reflexive, symmetric relation on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyRelation {
    alphabet: BTreeSet<Symbol>,
    /// Unordered pairs of distinct symbols, stored smaller first.
    pairs: BTreeSet<(Symbol, Symbol)>,
}

impl DependencyRelation {
    /// Builds the least dependency relation containing `pairs`.
    pub fn new(
        alphabet: impl IntoIterator<Item = Symbol>,
        pairs: impl IntoIterator<Item = (Symbol, Symbol)>,
    ) -> Result<Self, TraceError> {
        let alphabet: BTreeSet<Symbol> = alphabet.into_iter().collect();
        let mut out = Self { alphabet, pairs: BTreeSet::new() };
        for (a, b) in pairs {
            for s in [&a, &b] {
                if !out.alphabet.contains(s) {
                    return Err(TraceError::UnknownSymbol(s.clone()));
                }
            }
            if a != b {
                out.pairs.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
        Ok(out)
    }

    /// Only the reflexive pairs.
    pub fn discrete(alphabet: impl IntoIterator<Item = Symbol>) -> Self {
        Self { alphabet: alphabet.into_iter().collect(), pairs: BTreeSet::new() }
    }

    pub fn alphabet(&self) -> &BTreeSet<Symbol> {
        &self.alphabet
    }

    /// Dependent pairs of distinct symbols, each once.
    pub fn pairs(&self) -> &BTreeSet<(Symbol, Symbol)> {
        &self.pairs
    }

    pub fn dependent(&self, a: &Symbol, b: &Symbol) -> bool {
        a == b || self.pairs.contains(&if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) })
    }

    fn check(&self, word: &[Symbol]) -> Result<(), TraceError> {
        match word.iter().find(|s| !self.alphabet.contains(*s)) {
            Some(s) => Err(TraceError::UnknownSymbol(s.clone())),
            None => Ok(()),
        }
    }
}

/// Projection criterion: same letter counts and same projection onto every dependent pair.
pub fn projection_equal(d: &DependencyRelation, w1: &[Symbol], w2: &[Symbol]) -> Result<bool, TraceError> {
    d.check(w1)?;
    d.check(w2)?;
    fn count(w: &[Symbol]) -> BTreeMap<&Symbol, usize> {
        let mut m = BTreeMap::new();
        for s in w {
            *m.entry(s).or_default() += 1;
        }
        m
    }
    if count(w1) != count(w2) {
        return Ok(false);
    }
    let project = |w: &[Symbol], a: &Symbol, b: &Symbol| -> Vec<Symbol> {
        w.iter().filter(|s| *s == a || *s == b).cloned().collect()
    };
    Ok(d.pairs.iter().all(|(a, b)| project(w1, a, b) == project(w2, a, b)))
}

/// Foata normal form: layers of pairwise independent letters, each sorted.
pub fn foata_nf(d: &DependencyRelation, w: &[Symbol]) -> Result<Vec<Vec<Symbol>>, TraceError> {
    d.check(w)?;
    let mut heights: Vec<usize> = Vec::with_capacity(w.len());
    let mut layers: Vec<Vec<Symbol>> = Vec::new();
    for (i, s) in w.iter().enumerate() {
        let h = (0..i).filter(|&j| d.dependent(&w[j], s)).map(|j| heights[j] + 1).max().unwrap_or(0);
        heights.push(h);
        if layers.len() <= h {
            layers.resize_with(h + 1, Vec::new);
        }
        layers[h].push(s.clone());
    }
    for layer in &mut layers {
        layer.sort();
    }
    Ok(layers)
}

pub fn foata_equal(d: &DependencyRelation, w1: &[Symbol], w2: &[Symbol]) -> Result<bool, TraceError> {
    Ok(foata_nf(d, w1)? == foata_nf(d, w2)?)
}

/// Trace equality. Both criteria are computed; they always agree.
pub fn trace_equal(d: &DependencyRelation, w1: &[Symbol], w2: &[Symbol]) -> Result<bool, TraceError> {
    let by_projection = projection_equal(d, w1, w2)?;
    debug_assert_eq!(by_projection, foata_equal(d, w1, w2)?);
    Ok(by_projection)
}

/// A device graph with no objects and only `ε → ε` generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution(DeviceGraph);

impl Distribution {
    pub fn new(graph: DeviceGraph) -> Result<Self, TraceError> {
        graph.validate().map_err(|v| TraceError::NotADistribution(v.to_string()))?;
        if let Some(o) = graph.objects().iter().next() {
            return Err(TraceError::NotADistribution(format!("object {o} declared")));
        }
        // With no objects every arity is necessarily empty; validation has checked that.
        Ok(Self(graph))
    }

    /// The distribution seen as a device graph.
    pub fn as_device_graph(&self) -> &DeviceGraph {
        &self.0
    }

    pub fn alphabet(&self) -> BTreeSet<Symbol> {
        self.0.generators().keys().cloned().collect()
    }

    pub fn dev(&self, a: &Symbol) -> Option<&BTreeSet<DeviceId>> {
        self.0.dev.get(a)
    }

    fn overlap(&self, a: &Symbol, b: &Symbol) -> bool {
        match (self.dev(a), self.dev(b)) {
            (Some(x), Some(y)) => !x.is_disjoint(y),
            _ => false,
        }
    }
}

pub fn distribution_as_device_graph(d: &Distribution) -> &DeviceGraph {
    d.as_device_graph()
}

/// One device per non-trivial maximal clique of the dependency graph, named
/// by its sorted members joined with `+`.
pub fn dependency_to_distribution(d: &DependencyRelation) -> Distribution {
    let symbols: Vec<&Symbol> = d.alphabet.iter().collect();
    let cliques = maximal_cliques_of(symbols.len(), |i, j| d.dependent(symbols[i], symbols[j]));
    let mut graph = DeviceGraph::new();
    let mut dev: BTreeMap<&Symbol, Vec<DeviceId>> = symbols.iter().map(|s| (*s, Vec::new())).collect();
    for clique in cliques.iter().filter(|c| c.len() >= 2) {
        let name = clique.iter().map(|&i| symbols[i].as_str()).collect::<Vec<_>>().join("+");
        let device = DeviceId::new(name).expect("symbol names are valid device names");
        graph = graph.with_device(device.clone());
        for &i in clique {
            dev.get_mut(symbols[i]).expect("present").push(device.clone());
        }
    }
    for (s, devices) in dev {
        graph = graph.with_generator(s.clone(), Word::empty(), Word::empty(), devices);
    }
    Distribution(graph)
}

/// Symbols are dependent exactly when their device sets overlap.
pub fn distribution_to_dependency(d: &Distribution) -> DependencyRelation {
    let alphabet = d.alphabet();
    let mut pairs = BTreeSet::new();
    for a in &alphabet {
        for b in alphabet.range(a..).skip(1) {
            if d.overlap(a, b) {
                pairs.insert((a.clone(), b.clone()));
            }
        }
    }
    DependencyRelation { alphabet, pairs }
}

/// Inclusion of relations.
pub fn dep_leq(d1: &DependencyRelation, d2: &DependencyRelation) -> Result<bool, TraceError> {
    if d1.alphabet != d2.alphabet {
        return Err(TraceError::AlphabetMismatch);
    }
    Ok(d1.pairs.is_subset(&d2.pairs))
}

/// `d1 ≤ d2`: every overlap in `d1`, including a symbol with itself, is an overlap in `d2`.
pub fn dist_leq(d1: &Distribution, d2: &Distribution) -> Result<bool, TraceError> {
    let alphabet = d1.alphabet();
    if alphabet != d2.alphabet() {
        return Err(TraceError::AlphabetMismatch);
    }
    Ok(alphabet.iter().all(|a| alphabet.range(a..).all(|b| !d1.overlap(a, b) || d2.overlap(a, b))))
}

/// Whether the cliques distribution gives back `d`.
pub fn galois_check(d: &DependencyRelation) -> bool {
    distribution_to_dependency(&dependency_to_distribution(d)) == *d
}

/// Trace equality decided in the free premonoidal category of the cliques distribution.
pub fn trace_vs_freecat(d: &DependencyRelation, w1: &[Symbol], w2: &[Symbol]) -> Result<bool, TraceError> {
    d.check(w1)?;
    d.check(w2)?;
    let cat = FreeCategory::new(dependency_to_distribution(d).as_device_graph())?;
    let as_morphism = |w: &[Symbol]| {
        let steps: Vec<(GeneratorId, usize)> = w.iter().map(|s| (s.clone(), 0)).collect();
        cat.from_steps(&Word::empty(), &steps)
    };
    Ok(as_morphism(w1)?.equals(&as_morphism(w2)?)?)
}
