//! Exhaustive enumeration of small morphisms.

use std::collections::{BTreeSet, HashSet};

use super::canonical::canonical_steps;
use super::{FreeCatError, FreeCategory, PremonoidalMorphism, Step};
use crate::graphs::Word;

/// Default cap on the number of distinct classes explored.
pub const ENUMERATION_CAP: usize = 100_000;

impl FreeCategory {
    /// All morphisms with at most `max_events` events whose source and target
    /// are both in `pool`, one per interchange class.
    ///
    /// Breadth-first by event count; within a level, in order of discovery with
    /// generators by name and spans left to right. Intermediate boundaries may
    /// leave the pool. Fails if more than `cap` classes are explored.
    pub fn enumerate_morphisms(
        &self,
        max_events: usize,
        pool: &[Word],
        cap: usize,
    ) -> Result<Vec<PremonoidalMorphism>, FreeCatError> {
        let mut words: Vec<Vec<u32>> = Vec::new();
        for w in pool {
            let idx = self.sig().word_indices(w)?;
            if !words.contains(&idx) {
                words.push(idx);
            }
        }
        let in_pool: BTreeSet<&Vec<u32>> = words.iter().collect();

        let mut explored = 0usize;
        let mut seen: HashSet<(Vec<u32>, Vec<Step>)> = HashSet::new();
        let mut frontier: Vec<PremonoidalMorphism> = Vec::new();
        for w in &words {
            frontier.push(self.from_raw(w.clone(), Vec::new())?);
        }
        let mut out: Vec<PremonoidalMorphism> = frontier.clone();
        for _ in 0..max_events {
            let mut next = Vec::new();
            for m in &frontier {
                let b = m.raw_target();
                for (gi, info) in self.sig().gens.iter().enumerate() {
                    let d = info.dom.len();
                    if d > b.len() {
                        continue;
                    }
                    for s in 0..=b.len() - d {
                        if b[s..s + d] != info.dom[..] {
                            continue;
                        }
                        let mut steps = m.steps().to_vec();
                        steps.push(Step { gen: gi as u32, start: s as u32 });
                        let ext = self.from_raw(m.raw_source().to_vec(), steps)?;
                        if seen.insert((ext.raw_source().to_vec(), canonical_steps(&ext))) {
                            explored += 1;
                            if explored > cap {
                                return Err(FreeCatError::BudgetExceeded { cap });
                            }
                            if in_pool.contains(&ext.raw_target().to_vec()) {
                                out.push(ext.clone());
                            }
                            next.push(ext);
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(out)
    }
}
