//! Interference graphs, maximal cliques and the bounded underlying device graph.
//!
//! Two morphisms interfere when they fail to interchange. Non-trivial maximal
//! cliques of the interference graph on a finite sample of morphisms become
//! the devices of the sample's underlying device graph. The unit and counit
//! of the free/underlying adjunction are provided in executable form, with a
//! sampled check of both triangle identities.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::freecat::{show_word, FreeCatError, FreeCategory, PremonoidalMorphism};
use crate::graphs::{DeviceGraph, DeviceId, GeneratorId, ObjectId, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterferenceError {
    #[error(transparent)]
    FreeCat(#[from] FreeCatError),
    #[error("nested event {index}: boundary {} does not match {}", show_list(.expected), show_list(.got))]
    NestedBoundary { index: usize, expected: Vec<Word>, got: Vec<Word> },
    #[error("arrow listing {} does not flatten to {}", show_list(.listing), show_word(.word))]
    BadListing { listing: Vec<Word>, word: Word },
}

fn show_list(ws: &[Word]) -> String {
    format!("({})", ws.iter().map(show_word).collect::<Vec<_>>().join(", "))
}

/// Maximal cliques of the simple graph on `0..n` given by `adjacent`.
///
/// Bron–Kerbosch with the lowest-index vertex of `P ∪ X` as pivot. Each
/// clique is sorted and the list is sorted, so the output depends only on
/// the graph.
pub fn maximal_cliques_of(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let neighbours: Vec<BTreeSet<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| j != i && adjacent(i, j)).collect()).collect();
    let mut out = Vec::new();
    bron_kerbosch(&neighbours, Vec::new(), (0..n).collect(), BTreeSet::new(), &mut out);
    out.sort();
    out
}

fn bron_kerbosch(
    nb: &[BTreeSet<usize>],
    r: Vec<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let Some(&pivot) = p.iter().chain(x.iter()).min() else {
        let mut clique = r;
        clique.sort_unstable();
        out.push(clique);
        return;
    };
    let candidates: Vec<usize> = p.difference(&nb[pivot]).copied().collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.intersection(&nb[v]).copied().collect();
        let x2 = x.intersection(&nb[v]).copied().collect();
        bron_kerbosch(nb, r2, p2, x2, out);
        p.remove(&v);
        x.insert(v);
    }
}

/// Graph on a finite list of morphisms with an edge wherever they interfere.
#[derive(Debug, Clone)]
pub struct InterferenceGraph {
    pub vertices: Vec<PremonoidalMorphism>,
    /// Pairs `(i, j)` with `i <= j`; `(i, i)` marks a morphism interfering with itself.
    pub edges: BTreeSet<(usize, usize)>,
}

impl InterferenceGraph {
    pub fn new(vertices: Vec<PremonoidalMorphism>) -> Result<Self, FreeCatError> {
        let mut edges = BTreeSet::new();
        for i in 0..vertices.len() {
            for j in i..vertices.len() {
                if !vertices[i].interchanges_with(&vertices[j])? {
                    edges.insert((i, j));
                }
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn interfere(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// All maximal cliques, trivial ones included.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        maximal_cliques_of(self.vertices.len(), |i, j| self.interfere(i, j))
    }

    /// Maximal cliques with at least two members.
    pub fn nontrivial_cliques(&self) -> Vec<Vec<usize>> {
        self.maximal_cliques().into_iter().filter(|c| c.len() >= 2).collect()
    }
}

pub fn interference_graph(ms: &[PremonoidalMorphism]) -> Result<InterferenceGraph, FreeCatError> {
    InterferenceGraph::new(ms.to_vec())
}

/// Object of the underlying graph standing for a word.
pub fn word_object(w: &Word) -> ObjectId {
    ObjectId::new(show_word(w)).expect("object names are valid")
}

/// All ways of cutting `w` into non-empty consecutive pieces.
pub fn listings(w: &Word) -> Vec<Vec<Word>> {
    let items = w.items();
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let cuts = items.len() - 1;
    (0u64..1 << cuts)
        .map(|mask| {
            let mut pieces = Vec::new();
            let mut start = 0;
            for k in 0..cuts {
                if mask >> (cuts - 1 - k) & 1 == 1 {
                    pieces.push(Word::new(items[start..=k].to_vec()));
                    start = k + 1;
                }
            }
            pieces.push(Word::new(items[start..].to_vec()));
            pieces
        })
        .collect()
}

/// One arrow of the underlying graph: a morphism read with given boundary listings.
#[derive(Debug, Clone)]
pub struct UnderlyingArrow {
    pub name: GeneratorId,
    pub morphism: usize,
    pub dom: Vec<Word>,
    pub cod: Vec<Word>,
}

/// The underlying device graph of a finite sample of morphisms.
#[derive(Debug, Clone)]
pub struct BoundedUnderlying {
    pub graph: DeviceGraph,
    pub arrows: Vec<UnderlyingArrow>,
    pub interference: InterferenceGraph,
    /// Non-trivial maximal cliques, as sample indices; device `c{k}` is clique `k`.
    pub cliques: Vec<Vec<usize>>,
}

impl BoundedUnderlying {
    pub fn sample(&self) -> &[PremonoidalMorphism] {
        &self.interference.vertices
    }

    /// Device graph on the arrows of the given morphisms only.
    ///
    /// Each device is cut down to the chosen arrows; cut-down devices that are
    /// singletons or contained in another are dropped, and the rest are named
    /// by their sorted arrow names joined with `+`.
    pub fn restrict(&self, morphisms: &[usize]) -> DeviceGraph {
        let keep: BTreeSet<usize> = morphisms.iter().copied().collect();
        let arrows: Vec<&UnderlyingArrow> = self.arrows.iter().filter(|a| keep.contains(&a.morphism)).collect();
        let mut sets: Vec<BTreeSet<GeneratorId>> = Vec::new();
        for clique in &self.cliques {
            let set: BTreeSet<GeneratorId> =
                arrows.iter().filter(|a| clique.contains(&a.morphism)).map(|a| a.name.clone()).collect();
            if set.len() >= 2 && !sets.contains(&set) {
                sets.push(set);
            }
        }
        let maximal: Vec<&BTreeSet<GeneratorId>> =
            sets.iter().filter(|s| !sets.iter().any(|t| t != *s && s.is_subset(t))).collect();
        let mut graph = DeviceGraph::new();
        for o in self.graph.objects() {
            graph = graph.with_object(o.clone());
        }
        let names: Vec<DeviceId> = maximal
            .iter()
            .map(|s| DeviceId::new(s.iter().map(|g| g.as_str()).collect::<Vec<_>>().join("+")).expect("valid"))
            .collect();
        for name in &names {
            graph = graph.with_device(name.clone());
        }
        for a in arrows {
            let arity = &self.graph.generators()[&a.name];
            let devs = maximal.iter().zip(&names).filter(|(s, _)| s.contains(&a.name)).map(|(_, n)| n.clone());
            graph = graph.with_generator(a.name.clone(), arity.dom.clone(), arity.cod.clone(), devs);
        }
        graph
    }
}

/// Underlying device graph of the sample `enumerate_morphisms(max_events, pool, cap)`.
///
/// Objects are the words occurring in boundary listings, named by joining
/// with `⊗` (`I` for the empty word). Every sampled morphism contributes one
/// arrow `u{k}.{j}` per pair of listings of its source and target into
/// non-empty words.
pub fn underlying_device_graph_bounded(
    cat: &FreeCategory,
    max_events: usize,
    pool: &[Word],
    cap: usize,
) -> Result<BoundedUnderlying, FreeCatError> {
    let sample = cat.enumerate_morphisms(max_events, pool, cap)?;
    underlying_of_sample(sample)
}

pub fn underlying_of_sample(sample: Vec<PremonoidalMorphism>) -> Result<BoundedUnderlying, FreeCatError> {
    let interference = InterferenceGraph::new(sample)?;
    let cliques = interference.nontrivial_cliques();
    let mut graph = DeviceGraph::new();
    let device = |k: usize| DeviceId::new(format!("c{k}")).expect("valid");
    for k in 0..cliques.len() {
        graph = graph.with_device(device(k));
    }
    let mut arrows = Vec::new();
    for (k, m) in interference.vertices.iter().enumerate() {
        let devs: Vec<DeviceId> =
            cliques.iter().enumerate().filter(|(_, c)| c.contains(&k)).map(|(i, _)| device(i)).collect();
        let mut j = 0;
        for dom in listings(&m.source()) {
            for cod in listings(&m.target()) {
                for w in dom.iter().chain(&cod) {
                    graph = graph.with_object(word_object(w));
                }
                let name = GeneratorId::new(format!("u{k}.{j}")).expect("valid");
                let dom_w: Word = dom.iter().map(word_object).collect();
                let cod_w: Word = cod.iter().map(word_object).collect();
                graph = graph.with_generator(name.clone(), dom_w, cod_w, devs.clone());
                arrows.push(UnderlyingArrow { name, morphism: k, dom: dom.clone(), cod: cod.clone() });
                j += 1;
            }
        }
    }
    Ok(BoundedUnderlying { graph, arrows, interference, cliques })
}

/// Unit of the adjunction on a generator: the unwhiskered single event.
pub fn unit_map(cat: &FreeCategory, f: &GeneratorId) -> Result<PremonoidalMorphism, FreeCatError> {
    cat.gen_event(&Word::empty(), f, &Word::empty())
}

/// An arrow of the underlying graph of a free category, used as a generator.
#[derive(Debug, Clone)]
pub struct NestedArrow {
    pub morphism: PremonoidalMorphism,
    pub dom: Vec<Word>,
    pub cod: Vec<Word>,
}

impl NestedArrow {
    pub fn new(morphism: PremonoidalMorphism, dom: Vec<Word>, cod: Vec<Word>) -> Result<Self, InterferenceError> {
        for (listing, word) in [(&dom, morphism.source()), (&cod, morphism.target())] {
            if flatten(listing) != word {
                return Err(InterferenceError::BadListing { listing: listing.clone(), word });
            }
        }
        Ok(Self { morphism, dom, cod })
    }
}

/// `left ▷ arrow ◁ right`, with whiskers given as lists of words.
#[derive(Debug, Clone)]
pub struct NestedEvent {
    pub left: Vec<Word>,
    pub arrow: NestedArrow,
    pub right: Vec<Word>,
}

/// A morphism of the free category on the underlying graph of a free category.
#[derive(Debug, Clone)]
pub struct NestedMorphism {
    pub source: Vec<Word>,
    pub events: Vec<NestedEvent>,
}

fn flatten(ws: &[Word]) -> Word {
    ws.iter().fold(Word::empty(), |acc, w| acc.concat(w))
}

/// Counit: evaluates every nested event as a whiskered morphism and composes.
pub fn counit_eval(cat: &FreeCategory, nested: &NestedMorphism) -> Result<PremonoidalMorphism, InterferenceError> {
    let mut boundary = nested.source.clone();
    let mut out = cat.identity(&flatten(&boundary))?;
    for (index, e) in nested.events.iter().enumerate() {
        let expected: Vec<Word> = [&e.left[..], &e.arrow.dom, &e.right].concat();
        if expected != boundary {
            return Err(InterferenceError::NestedBoundary { index, expected, got: boundary });
        }
        let step = e.arrow.morphism.right_whisker(&flatten(&e.right))?.left_whisker(&flatten(&e.left))?;
        out = out.compose(&step)?;
        boundary = [&e.left[..], &e.arrow.cod, &e.right].concat();
    }
    Ok(out)
}

fn singletons(w: &Word) -> Vec<Word> {
    w.iter().map(|o| Word::new(vec![o.clone()])).collect()
}

/// Relabels every event `X ▷ g ◁ Y` as `[X] ▷ η(g) ◁ [Y]`.
pub fn eta_relabel(f: &PremonoidalMorphism) -> Result<NestedMorphism, InterferenceError> {
    let cat = f.category();
    let mut events = Vec::new();
    for e in f.events() {
        let unit = unit_map(&cat, &e.gen)?;
        let (dom, cod) = (singletons(&unit.source()), singletons(&unit.target()));
        events.push(NestedEvent {
            left: singletons(&e.left),
            arrow: NestedArrow::new(unit, dom, cod)?,
            right: singletons(&e.right),
        });
    }
    Ok(NestedMorphism { source: singletons(&f.source()), events })
}

/// Outcome of [`triangle_checks`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriangleReport {
    pub morphisms_checked: usize,
    pub arrows_checked: usize,
    pub failures: Vec<String>,
}

impl TriangleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks both triangle identities on a sample.
///
/// For every morphism `f`, evaluating its relabelling gives back `f`. For
/// every listing of every morphism's boundaries, evaluating the single nested
/// event on that arrow gives back the morphism itself.
pub fn triangle_checks(cat: &FreeCategory, samples: &[PremonoidalMorphism]) -> TriangleReport {
    let mut report = TriangleReport::default();
    for f in samples {
        report.morphisms_checked += 1;
        match eta_relabel(f).and_then(|n| counit_eval(cat, &n)) {
            Ok(g) if g.equals(f).unwrap_or(false) => {}
            Ok(g) => report.failures.push(format!("relabelling {f} evaluates to {g}")),
            Err(e) => report.failures.push(format!("relabelling {f}: {e}")),
        }
        for dom in listings(&f.source()) {
            for cod in listings(&f.target()) {
                report.arrows_checked += 1;
                let result = NestedArrow::new(f.clone(), dom.clone(), cod.clone()).and_then(|arrow| {
                    counit_eval(
                        cat,
                        &NestedMorphism {
                            source: dom.clone(),
                            events: vec![NestedEvent { left: Vec::new(), arrow, right: Vec::new() }],
                        },
                    )
                });
                match result {
                    Ok(g) if &g == f => {}
                    Ok(g) => report.failures.push(format!("arrow {f} {} evaluates to {g}", show_list(&dom))),
                    Err(e) => report.failures.push(format!("arrow {f} {}: {e}", show_list(&dom))),
                }
            }
        }
    }
    report
}

/// Devices of the bounded underlying graph, as sets of sample indices.
pub fn device_members(u: &BoundedUnderlying) -> BTreeMap<DeviceId, BTreeSet<usize>> {
    u.cliques
        .iter()
        .enumerate()
        .map(|(k, c)| (DeviceId::new(format!("c{k}")).expect("valid"), c.iter().copied().collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freecat::tests::{one_printer, two_printers};
    use crate::freecat::ENUMERATION_CAP;
    use crate::graphs::tests::{g, w};

    #[test]
    fn cliques_of_small_graphs() {
        let triangle = maximal_cliques_of(3, |_, _| true);
        assert_eq!(triangle, vec![vec![0, 1, 2]]);
        let path = maximal_cliques_of(3, |i, j| i.abs_diff(j) == 1);
        assert_eq!(path, vec![vec![0, 1], vec![1, 2]]);
        let empty = maximal_cliques_of(3, |_, _| false);
        assert_eq!(empty, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(maximal_cliques_of(0, |_, _| true), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn cliques_do_not_depend_on_vertex_order() {
        // Two triangles sharing an edge, plus a pendant vertex.
        let edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)];
        let adj = |i: usize, j: usize| edges.contains(&(i.min(j), i.max(j)));
        let direct = maximal_cliques_of(5, adj);
        let perm = [4, 2, 0, 3, 1];
        let permuted = maximal_cliques_of(5, |i, j| adj(perm[i], perm[j]));
        let mut mapped: Vec<Vec<usize>> = permuted
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|v| perm[v]).collect();
                c.sort();
                c
            })
            .collect();
        mapped.sort();
        assert_eq!(direct, mapped);
        assert_eq!(direct, vec![vec![0, 1, 2], vec![1, 2, 3], vec![3, 4]]);
    }

    #[test]
    fn interference_between_prints() {
        let c = one_printer();
        let p = c.gen_event(&w(""), &g("print"), &w("")).unwrap();
        let ig = interference_graph(&[p.clone(), p.clone()]).unwrap();
        assert!(ig.interfere(0, 1));
        assert!(ig.interfere(0, 0));

        let c = two_printers();
        let l = c.gen_event(&w(""), &g("l·print"), &w("")).unwrap();
        let r = c.gen_event(&w(""), &g("r·print"), &w("")).unwrap();
        let ig = interference_graph(&[l, r]).unwrap();
        assert!(!ig.interfere(0, 1));

        let ids = [c.identity(&w("")).unwrap(), c.identity(&w("Doc")).unwrap()];
        assert!(interference_graph(&ids).unwrap().edges.is_empty());
    }

    #[test]
    fn listings_cut_words() {
        assert_eq!(listings(&w("")), vec![Vec::<Word>::new()]);
        assert_eq!(listings(&w("A")), vec![vec![w("A")]]);
        assert_eq!(
            listings(&w("A B C")),
            vec![
                vec![w("A B C")],
                vec![w("A B"), w("C")],
                vec![w("A"), w("B C")],
                vec![w("A"), w("B"), w("C")],
            ]
        );
    }

    #[test]
    fn one_printer_prints_share_a_device() {
        let u = underlying_device_graph_bounded(&one_printer(), 2, &[w(""), w("Doc"), w("Doc Doc")], ENUMERATION_CAP)
            .unwrap();
        assert!(u.graph.validate().is_ok());
        let single_print = u
            .sample()
            .iter()
            .position(|m| m.len() == 1 && m.generators() == vec![g("print")] && m.source() == w("Doc"))
            .unwrap();
        let print_left = u
            .sample()
            .iter()
            .position(|m| m.len() == 1 && m.generators() == vec![g("print")] && m.source() == w("Doc Doc"))
            .unwrap();
        let arrow = |k: usize| u.arrows.iter().find(|a| a.morphism == k).unwrap().name.clone();
        assert!(!u.graph.orthogonal(&arrow(single_print), &arrow(print_left)).unwrap());
        let doc = u.sample().iter().position(|m| m.generators() == vec![g("doc")] && m.source() == w("")).unwrap();
        assert!(u.graph.devices_of(&arrow(doc)).unwrap().is_empty());
    }

    #[test]
    fn pure_graphs_have_no_devices() {
        let pure = DeviceGraph::device_free(crate::graphs::tests::printer().pure);
        let c = FreeCategory::new(&pure).unwrap();
        let u = underlying_device_graph_bounded(&c, 2, &[w(""), w("Doc")], ENUMERATION_CAP).unwrap();
        assert!(u.graph.devices.is_empty());
        assert!(u.graph.dev.values().all(|d| d.is_empty()));
    }

    #[test]
    fn unit_preserves_orthogonality() {
        let c = two_printers();
        let l = unit_map(&c, &g("l·print")).unwrap();
        let r = unit_map(&c, &g("r·print")).unwrap();
        assert_eq!(l, c.gen_event(&w(""), &g("l·print"), &w("")).unwrap());
        assert!(l.interchanges_with(&r).unwrap());
        assert!(unit_map(&c, &g("doc")).unwrap().devices_of().is_empty());
    }

    #[test]
    fn counit_flattens_nested_events() {
        let c = one_printer();
        let id = NestedMorphism { source: vec![w("Doc")], events: Vec::new() };
        assert_eq!(counit_eval(&c, &id).unwrap(), c.identity(&w("Doc")).unwrap());

        let doc = unit_map(&c, &g("doc")).unwrap();
        let print2 = c.from_steps(&w("Doc Doc"), &[(g("print"), 0), (g("print"), 0)]).unwrap();
        let nested = NestedMorphism {
            source: vec![w("Doc")],
            events: vec![
                NestedEvent {
                    left: vec![w("Doc")],
                    arrow: NestedArrow::new(doc, vec![], vec![w("Doc")]).unwrap(),
                    right: vec![],
                },
                NestedEvent {
                    left: vec![],
                    arrow: NestedArrow::new(print2, vec![w("Doc"), w("Doc")], vec![]).unwrap(),
                    right: vec![],
                },
            ],
        };
        let flat = counit_eval(&c, &nested).unwrap();
        let expected = c.from_steps(&w("Doc"), &[(g("doc"), 1), (g("print"), 0), (g("print"), 0)]).unwrap();
        assert_eq!(flat, expected);

        let mut broken = nested.clone();
        broken.events.swap(0, 1);
        assert!(matches!(counit_eval(&c, &broken), Err(InterferenceError::NestedBoundary { index: 0, .. })));
        let p = unit_map(&c, &g("print")).unwrap();
        assert!(matches!(NestedArrow::new(p, vec![], vec![]), Err(InterferenceError::BadListing { .. })));
    }

    #[test]
    fn triangles_on_printer_morphisms() {
        let c = one_printer();
        let ids = [c.identity(&w("")).unwrap(), c.identity(&w("Doc Doc")).unwrap()];
        assert!(triangle_checks(&c, &ids).passed());
        let sample = c.enumerate_morphisms(3, &[w(""), w("Doc"), w("Doc Doc")], ENUMERATION_CAP).unwrap();
        let report = triangle_checks(&c, &sample);
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.morphisms_checked, sample.len());
        assert!(report.arrows_checked > sample.len());
    }
}
