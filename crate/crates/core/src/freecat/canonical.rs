//! Canonical representatives of interchange classes.
//!
//! Every class is represented by its least member under the order comparing
//! events by (Foata height, span start, kind, generator), position by
//! position. Heights come from the relation "occurrence `a` precedes
//! occurrence `b` in every member of the class".
//!
//! The fast path computes that relation directly: device edges and wire edges
//! are always respected, and the remaining spatial edges are found by
//! arranging each unordered pair next to each other and trying the swap. It
//! then fires events layer by layer, least key first. This is only sound
//! when no two unordered events can meet as a consumer-side zero-width event
//! followed by a producer-side one at the same position, because that is the
//! only situation where a swap can go two ways and where the position of an
//! event is no longer determined by which events precede it. Such classes,
//! and any class where the fast path gets stuck, are handled by enumerating
//! the swap closure and taking the least member outright.

use std::collections::{HashSet, VecDeque};

use super::{swap_options, Event, PremonoidalMorphism, Signature, Step};
use crate::graphs::Word;

/// State cap for the exhaustive path.
pub const CLOSURE_CAP: usize = 1 << 18;

/// Canonical representative of an interchange class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub source: Word,
    pub target: Word,
    pub events: Vec<Event>,
    /// Foata height of each event, starting at 1; nondecreasing.
    pub heights: Vec<usize>,
}

impl CanonicalForm {
    /// Events grouped by height.
    pub fn layers(&self) -> Vec<Vec<Event>> {
        let mut out: Vec<Vec<Event>> = Vec::new();
        for (e, &h) in self.events.iter().zip(&self.heights) {
            if out.len() < h {
                out.resize_with(h, Vec::new);
            }
            out[h - 1].push(e.clone());
        }
        out
    }
}

pub(crate) struct Canon {
    pub steps: Vec<Step>,
    pub heights: Vec<usize>,
}

pub(crate) fn canonical_form(m: &PremonoidalMorphism) -> CanonicalForm {
    let (c, morphism) = canonical_morphism(m);
    CanonicalForm { source: m.source(), target: m.target(), events: morphism.events(), heights: c.heights }
}

/// The canonical representative as a morphism, with its heights.
pub(crate) fn canonical_morphism(m: &PremonoidalMorphism) -> (Canon, PremonoidalMorphism) {
    let c = compute(m.sig(), m.raw_source().len(), m.steps());
    let morphism = m
        .category()
        .from_raw(m.raw_source().to_vec(), c.steps.clone())
        .expect("canonical forms are threaded");
    (c, morphism)
}

pub(crate) fn canonical_steps(m: &PremonoidalMorphism) -> Vec<Step> {
    compute(m.sig(), m.raw_source().len(), m.steps()).steps
}

fn compute(sig: &Signature, width: usize, steps: &[Step]) -> Canon {
    if let Some(c) = fast(sig, width, steps, true) {
        return c;
    }
    if let Some(c) = exhaustive(sig, steps, CLOSURE_CAP) {
        return c;
    }
    // Past the cap: best effort, no longer guaranteed class-invariant.
    fast(sig, width, steps, false).unwrap_or_else(|| Canon { steps: steps.to_vec(), heights: (1..=steps.len()).collect() })
}

/// Square boolean matrix stored as bit rows.
#[derive(Clone)]
pub(crate) struct Rel {
    words: usize,
    bits: Vec<u64>,
}

impl Rel {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self { words, bits: vec![0; words * n] }
    }

    pub fn full(n: usize) -> Self {
        let mut r = Self::new(n);
        for i in 0..n {
            for j in 0..n {
                r.set(i, j);
            }
        }
        r
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    /// Row `dst` gains every bit of row `src`.
    pub fn absorb(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            let v = self.bits[src * self.words + w];
            self.bits[dst * self.words + w] |= v;
        }
    }

    fn mask_out(&mut self, row: usize, mask: &[u64]) {
        for (w, m) in mask.iter().enumerate() {
            self.bits[row * self.words + w] &= !m;
        }
    }
}

type Key = (usize, u32, u8, u32);

fn key(sig: &Signature, height: usize, step: Step) -> Key {
    (height, step.start, sig.info(step).kind(), step.gen)
}

/// Swaps positions `q` and `q + 1`. In strict mode a swap that can go two ways fails.
fn swap_at(sig: &Signature, seq: &mut [(usize, Step)], q: usize, strict: bool) -> bool {
    match swap_options(sig, seq[q].1, seq[q + 1].1) {
        Ok(options) if !strict || options.len() == 1 => {
            let (a, b) = options[0];
            let (oa, ob) = (seq[q].0, seq[q + 1].0);
            seq[q] = (ob, a);
            seq[q + 1] = (oa, b);
            true
        }
        _ => false,
    }
}

fn bubble_to(sig: &Signature, seq: &mut [(usize, Step)], from: usize, to: usize, strict: bool) -> bool {
    (to..from).rev().all(|q| swap_at(sig, seq, q, strict))
}

fn fast(sig: &Signature, width: usize, steps: &[Step], strict: bool) -> Option<Canon> {
    let n = steps.len();
    let info: Vec<_> = steps.iter().map(|s| sig.info(*s)).collect();

    let mut direct: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut producer: Vec<Option<usize>> = vec![None; width];
    let mut boundary: Vec<usize> = (0..width).collect();
    for (j, step) in steps.iter().enumerate() {
        let s = step.start as usize;
        let d = info[j].dom.len();
        let fresh = producer.len();
        producer.extend(std::iter::repeat_n(Some(j), info[j].cod.len()));
        for strand in boundary.splice(s..s + d, fresh..producer.len()) {
            if let Some(p) = producer[strand] {
                direct[p].push(j);
            }
        }
        for i in 0..j {
            if !super::disjoint(&info[i].devs, &info[j].devs) {
                direct[i].push(j);
            }
        }
    }
    let mut rel = Rel::new(n);
    for i in (0..n).rev() {
        for &j in &direct[i] {
            rel.set(i, j);
            rel.absorb(i, j);
        }
    }

    if strict {
        for i in 0..n {
            if info[i].c() != 0 {
                continue;
            }
            for j in 0..n {
                if i != j
                    && info[j].d() == 0
                    && info[i].d() + info[j].c() > 0
                    && !rel.get(i, j)
                    && !rel.get(j, i)
                {
                    return None;
                }
            }
        }
    }

    let original: Vec<(usize, Step)> = steps.iter().copied().enumerate().collect();
    for dist in 1..n {
        for i in 0..n - dist {
            let j = i + dist;
            if rel.get(i, j) {
                continue;
            }
            if !can_reorder(sig, &original, &rel, i, j, strict)? {
                for x in 0..=i {
                    if x == i || rel.get(x, i) {
                        rel.set(x, j);
                        rel.absorb(x, j);
                    }
                }
            }
        }
    }

    let mut heights = vec![1; n];
    for j in 0..n {
        for i in 0..j {
            if rel.get(i, j) {
                heights[j] = heights[j].max(heights[i] + 1);
            }
        }
    }
    let fired = fire(sig, original, &heights, strict)?;
    Some(Canon {
        heights: fired.iter().map(|(o, _)| heights[*o]).collect(),
        steps: fired.into_iter().map(|(_, s)| s).collect(),
    })
}

/// Places `j` right after `i`, with everything between them that must follow
/// `i` moved past `j`, and tries the swap. `None` if the arrangement itself fails.
fn can_reorder(sig: &Signature, original: &[(usize, Step)], rel: &Rel, i: usize, j: usize, strict: bool) -> Option<bool> {
    let mut seq = original.to_vec();
    let mut t = i;
    for k in i + 1..j {
        if !rel.get(i, k) {
            let p = seq.iter().position(|(o, _)| *o == k).expect("present");
            if !bubble_to(sig, &mut seq, p, t, strict) {
                return None;
            }
            t += 1;
        }
    }
    debug_assert_eq!(seq[t].0, i);
    let p = seq.iter().position(|(o, _)| *o == j).expect("present");
    if !bubble_to(sig, &mut seq, p, t + 1, strict) {
        return None;
    }
    Some(swap_options(sig, seq[t].1, seq[t + 1].1).is_ok())
}

/// Fires layer by layer, least key first. Identical keys branch and keep the least result.
fn fire(sig: &Signature, mut rest: Vec<(usize, Step)>, heights: &[usize], strict: bool) -> Option<Vec<(usize, Step)>> {
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let h = rest.iter().map(|(o, _)| heights[*o]).min().expect("non-empty");
        let mut best: Option<Key> = None;
        let mut ties: Vec<Vec<(usize, Step)>> = Vec::new();
        for p in 0..rest.len() {
            if heights[rest[p].0] != h {
                continue;
            }
            let mut trial = rest.clone();
            if !bubble_to(sig, &mut trial, p, 0, strict) {
                return None;
            }
            let k = key(sig, h, trial[0].1);
            match best {
                Some(b) if k > b => {}
                Some(b) if k == b => ties.push(trial),
                _ => {
                    best = Some(k);
                    ties = vec![trial];
                }
            }
        }
        if ties.len() == 1 {
            let mut trial = ties.pop().expect("one");
            out.push(trial[0]);
            trial.remove(0);
            rest = trial;
            continue;
        }
        let mut winner: Option<Vec<(usize, Step)>> = None;
        for trial in ties {
            let mut full = vec![trial[0]];
            full.extend(fire(sig, trial[1..].to_vec(), heights, strict)?);
            let better = match &winner {
                None => true,
                Some(w) => keys(sig, heights, &full) < keys(sig, heights, w),
            };
            if better {
                winner = Some(full);
            }
        }
        out.extend(winner.expect("ties non-empty"));
        return Some(out);
    }
    Some(out)
}

fn keys(sig: &Signature, heights: &[usize], seq: &[(usize, Step)]) -> Vec<Key> {
    seq.iter().map(|(o, s)| key(sig, heights[*o], *s)).collect()
}

/// Least member of the full swap closure, with heights from the order every member respects.
fn exhaustive(sig: &Signature, steps: &[Step], cap: usize) -> Option<Canon> {
    let n = steps.len();
    let init: Vec<(usize, Step)> = steps.iter().copied().enumerate().collect();
    let mut seen: HashSet<Vec<(usize, Step)>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(init.clone());
    queue.push_back(init);
    while let Some(state) = queue.pop_front() {
        for k in 0..n.saturating_sub(1) {
            let Ok(options) = swap_options(sig, state[k].1, state[k + 1].1) else {
                continue;
            };
            for (a, b) in options {
                let mut next = state.clone();
                next[k] = (state[k + 1].0, a);
                next[k + 1] = (state[k].0, b);
                if seen.insert(next.clone()) {
                    if seen.len() > cap {
                        return None;
                    }
                    queue.push_back(next);
                }
            }
        }
    }

    let mut before = Rel::full(n);
    let mut mask = vec![0u64; n.div_ceil(64).max(1)];
    for state in &seen {
        mask.iter_mut().for_each(|m| *m = 0);
        for (o, _) in state {
            mask[o / 64] |= 1 << (o % 64);
            before.mask_out(*o, &mask);
        }
    }
    let mut heights = vec![1; n];
    for b in 0..n {
        for a in 0..b {
            if before.get(a, b) {
                heights[b] = heights[b].max(heights[a] + 1);
            }
        }
    }
    let best = seen
        .iter()
        .min_by(|x, y| {
            x.iter().map(|(o, s)| key(sig, heights[*o], *s)).cmp(y.iter().map(|(o, s)| key(sig, heights[*o], *s)))
        })
        .expect("closure contains the input");
    Some(Canon { heights: best.iter().map(|(o, _)| heights[*o]).collect(), steps: best.iter().map(|(_, s)| *s).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freecat::tests::{one_printer, two_printers};
    use crate::freecat::{BfsOutcome, FreeCategory};
    use crate::graphs::tests::{d, g, o, w};
    use crate::graphs::{DeviceGraph, GeneratorId};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn swapped_orders_share_a_canonical_form() {
        let graph = DeviceGraph::new()
            .with_object(o("A"))
            .with_object(o("A2"))
            .with_object(o("B"))
            .with_object(o("B2"))
            .with_device(d("p"))
            .with_device(d("q"))
            .with_generator(g("a"), w("A"), w("A2"), [d("p")])
            .with_generator(g("b"), w("B"), w("B2"), [d("q")]);
        let c = FreeCategory::new(&graph).unwrap();
        let f = c.from_steps(&w("A B"), &[(g("a"), 0), (g("b"), 1)]).unwrap();
        let h = c.from_steps(&w("A B"), &[(g("b"), 1), (g("a"), 0)]).unwrap();
        assert_eq!(f.canonical_form(), h.canonical_form());
        let cf = f.canonical_form();
        assert_eq!(cf.events.iter().map(|e| e.gen.clone()).collect::<Vec<_>>(), vec![g("a"), g("b")]);
        assert_eq!(cf.heights, vec![1, 1]);
    }

    #[test]
    fn identity_has_empty_form() {
        let cf = one_printer().identity(&w("Doc")).unwrap().canonical_form();
        assert!(cf.events.is_empty());
        assert!(cf.layers().is_empty());
    }

    fn trace_graph() -> FreeCategory {
        // Dependent pairs {α,β} and {β,δ}; γ is independent of everything.
        let graph = DeviceGraph::new()
            .with_device(d("α+β"))
            .with_device(d("β+δ"))
            .with_generator(g("α"), w(""), w(""), [d("α+β")])
            .with_generator(g("β"), w(""), w(""), [d("α+β"), d("β+δ")])
            .with_generator(g("γ"), w(""), w(""), [])
            .with_generator(g("δ"), w(""), w(""), [d("β+δ")]);
        FreeCategory::new(&graph).unwrap()
    }

    fn word(c: &FreeCategory, s: &str) -> PremonoidalMorphism {
        let steps: Vec<(GeneratorId, usize)> = s.chars().map(|ch| (g(&ch.to_string()), 0)).collect();
        c.from_steps(&w(""), &steps).unwrap()
    }

    #[test]
    fn trace_words_get_foata_layers() {
        let c = trace_graph();
        let f = word(&c, "γαβαδ");
        let layers: Vec<String> = f
            .canonical_form()
            .layers()
            .iter()
            .map(|l| l.iter().map(|e| e.gen.to_string()).collect())
            .collect();
        assert_eq!(layers, vec!["αγ", "β", "αδ"]);
        assert!(f.equals(&word(&c, "αβγδα")).unwrap());
        assert!(!word(&c, "αβ").equals(&word(&c, "βα")).unwrap());
    }

    #[test]
    fn producer_slides_around_a_consumed_wire() {
        let c = one_printer();
        let f = c.from_steps(&w("Doc Doc"), &[(g("print"), 0), (g("doc"), 0)]).unwrap();
        let h = c.from_steps(&w("Doc Doc"), &[(g("doc"), 1), (g("print"), 0)]).unwrap();
        let k = c.from_steps(&w("Doc Doc"), &[(g("doc"), 0), (g("print"), 1)]).unwrap();
        assert!(f.equals(&h).unwrap());
        assert!(f.equals(&k).unwrap());
        assert_eq!(f.bfs_equiv(&k, 100).unwrap(), BfsOutcome::Equal);
    }

    #[test]
    fn identical_producers_tie_break_by_outcome() {
        let c = one_printer();
        // Two fresh documents, the left one printed: equal to printing the right one first
        // only up to which copy is which.
        let f = c.from_steps(&w(""), &[(g("doc"), 0), (g("doc"), 0), (g("print"), 0)]).unwrap();
        let h = c.from_steps(&w(""), &[(g("doc"), 0), (g("doc"), 1), (g("print"), 1)]).unwrap();
        assert_eq!(f.bfs_equiv(&h, 1000).unwrap() == BfsOutcome::Equal, f.equals(&h).unwrap());
    }

    #[test]
    fn two_printer_orders_agree() {
        let c = two_printers();
        let f = c.from_steps(&w("Doc Doc"), &[(g("l·print"), 0), (g("r·print"), 0)]).unwrap();
        let h = f.swap_adjacent(0).unwrap();
        assert_eq!(f.canonical_form(), h.canonical_form());
    }

    /// Random device graph with a mix of widths.
    pub(crate) fn random_graph(rng: &mut StdRng, gens: usize, devices: usize, zero_width: bool) -> DeviceGraph {
        let objects = ["A", "B"];
        let mut graph = DeviceGraph::new();
        for ob in objects {
            graph = graph.with_object(o(ob));
        }
        for k in 0..devices {
            graph = graph.with_device(d(&format!("d{k}")));
        }
        for k in 0..gens {
            let lo = if zero_width { 0 } else { 1 };
            let dl = rng.gen_range(lo..=2);
            let cl = rng.gen_range(lo..=2);
            let dom: Vec<&str> = (0..dl).map(|_| objects[rng.gen_range(0..2)]).collect();
            let cod: Vec<&str> = (0..cl).map(|_| objects[rng.gen_range(0..2)]).collect();
            let devs: Vec<_> = (0..devices).filter(|_| rng.gen_bool(0.3)).map(|i| d(&format!("d{i}"))).collect();
            graph = graph.with_generator(g(&format!("g{k}")), w(&dom.join(" ")), w(&cod.join(" ")), devs);
        }
        graph
    }

    pub(crate) fn random_morphism(rng: &mut StdRng, c: &FreeCategory, len: usize) -> PremonoidalMorphism {
        let objects: Vec<_> = c.graph().objects().iter().cloned().collect();
        let width = rng.gen_range(0..=3);
        let src: Vec<_> = (0..width).map(|_| objects[rng.gen_range(0..objects.len())].clone()).collect();
        let mut m = c.identity(&Word::new(src)).unwrap();
        for _ in 0..len {
            let b = m.raw_target().to_vec();
            let mut options = Vec::new();
            for (gi, info) in c.sig().gens.iter().enumerate() {
                let dl = info.dom.len();
                if dl > b.len() {
                    continue;
                }
                for s in 0..=b.len() - dl {
                    if b[s..s + dl] == info.dom[..] {
                        options.push(Step { gen: gi as u32, start: s as u32 });
                    }
                }
            }
            if options.is_empty() {
                break;
            }
            let step = options[rng.gen_range(0..options.len())];
            let mut steps = m.steps().to_vec();
            steps.push(step);
            m = c.from_raw(m.raw_source().to_vec(), steps).unwrap();
        }
        m
    }

    #[test]
    fn fast_path_matches_exhaustive_path() {
        let mut rng = StdRng::seed_from_u64(7);
        let mut compared = 0;
        for _ in 0..400 {
            let zero = rng.gen_bool(0.5);
            let graph = random_graph(&mut rng, 4, 2, zero);
            let c = FreeCategory::new(&graph).unwrap();
            let m = random_morphism(&mut rng, &c, 6);
            let width = m.raw_source().len();
            if let Some(f) = fast(c.sig(), width, m.steps(), true) {
                let e = exhaustive(c.sig(), m.steps(), CLOSURE_CAP).unwrap();
                assert_eq!(f.steps, e.steps, "{m}");
                assert_eq!(f.heights, e.heights, "{m}");
                compared += 1;
            }
        }
        assert!(compared > 100);
    }

    #[test]
    fn canonical_form_decides_swap_closure() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..300 {
            let graph = random_graph(&mut rng, 4, 2, true);
            let c = FreeCategory::new(&graph).unwrap();
            let m = random_morphism(&mut rng, &c, 5);
            let closure = m.swap_closure(100_000).unwrap();
            let cf = m.canonical_form();
            for other in &closure {
                assert_eq!(other.canonical_form(), cf, "{m} vs {other}");
            }
        }
    }
}
