//! Commuting tensor product of effectful graphs over a shared pure part.
//!
//! Impure generators of the product are the pushout of the two generator sets
//! over the shared pure generators: embedded pure images are identified under
//! the pure generator's own name, everything else is kept and tagged `l·` or
//! `r·`. Devices are the tagged disjoint union, so generators from opposite
//! sides never share a device.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::freecat::{FreeCatError, FreeCategory, PremonoidalMorphism};
use crate::graphs::{
    DeviceGraph, DeviceGraphMorphism, DeviceId, EffectfulGraph, EffectfulGraphMorphism, GeneratorId,
    MonoidalGraphMorphism, Violations, Word,
};

pub const LEFT_TAG: &str = "l·";
pub const RIGHT_TAG: &str = "r·";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("invalid graph: {0}")]
    InvalidGraph(Violations),
    #[error("the two graphs have different pure parts")]
    PureMismatch,
    #[error("generator name {0} is used twice in the product")]
    NameCollision(GeneratorId),
    #[error("the legs disagree on the shared pure part at {0}")]
    PureDisagreement(String),
    #[error("the cospan does not commute: {f} and {g} fail to interchange")]
    NotCommuting { f: String, g: String },
    #[error("mediating map is not a morphism: {0}")]
    InvalidMediator(Violations),
    #[error(transparent)]
    FreeCat(#[from] FreeCatError),
}

/// Which factor of a tensor product a name came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Left,
    Right,
}

impl Tag {
    fn prefix(self) -> &'static str {
        match self {
            Tag::Left => LEFT_TAG,
            Tag::Right => RIGHT_TAG,
        }
    }

    pub fn generator(self, g: &GeneratorId) -> GeneratorId {
        GeneratorId::new(format!("{}{g}", self.prefix())).expect("tagged names are valid")
    }

    pub fn device(self, d: &DeviceId) -> DeviceId {
        DeviceId::new(format!("{}{d}", self.prefix())).expect("tagged names are valid")
    }
}

/// The product together with both injections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorResult {
    pub product: EffectfulGraph,
    pub left: EffectfulGraphMorphism,
    pub right: EffectfulGraphMorphism,
}

fn injection_map(side: &EffectfulGraph, tag: Tag) -> BTreeMap<GeneratorId, GeneratorId> {
    side.impure
        .generators()
        .keys()
        .map(|x| {
            let image = match side.pure_preimage(x) {
                Some(pure) => pure.clone(),
                None => tag.generator(x),
            };
            (x.clone(), image)
        })
        .collect()
}

pub fn commuting_tensor(g: &EffectfulGraph, h: &EffectfulGraph) -> Result<TensorResult, TensorError> {
    g.validate().map_err(TensorError::InvalidGraph)?;
    h.validate().map_err(TensorError::InvalidGraph)?;
    if g.pure != h.pure {
        return Err(TensorError::PureMismatch);
    }
    let pure = g.pure.clone();
    let mut impure = DeviceGraph::new();
    for o in &pure.objects {
        impure = impure.with_object(o.clone());
    }
    for (side, tag) in [(g, Tag::Left), (h, Tag::Right)] {
        for d in &side.impure.devices {
            impure = impure.with_device(tag.device(d));
        }
    }
    for (name, arity) in &pure.generators {
        impure = impure.with_generator(name.clone(), arity.dom.clone(), arity.cod.clone(), []);
    }
    let mut maps = Vec::new();
    for (side, tag) in [(g, Tag::Left), (h, Tag::Right)] {
        let map = injection_map(side, tag);
        for (x, image) in &map {
            if side.pure_preimage(x).is_some() {
                continue;
            }
            if impure.generators().contains_key(image) {
                return Err(TensorError::NameCollision(image.clone()));
            }
            let arity = &side.impure.generators()[x];
            let devs = side.impure.dev[x].iter().map(|d| tag.device(d));
            impure = impure.with_generator(image.clone(), arity.dom.clone(), arity.cod.clone(), devs);
        }
        maps.push(map);
    }
    let embed = pure.generators.keys().map(|p| (p.clone(), p.clone())).collect();
    let product = EffectfulGraph { pure: pure.clone(), impure, embed };
    let injection = |generators: BTreeMap<GeneratorId, GeneratorId>| EffectfulGraphMorphism {
        pure: MonoidalGraphMorphism::identity(&pure),
        impure: DeviceGraphMorphism::new(MonoidalGraphMorphism {
            objects: pure.objects.iter().map(|o| (o.clone(), o.clone())).collect(),
            generators,
        }),
    };
    let right = injection(maps.pop().expect("two sides"));
    let left = injection(maps.pop().expect("two sides"));
    Ok(TensorResult { product, left, right })
}

/// Bounds for sampling morphisms of a free category.
#[derive(Debug, Clone)]
pub struct SampleBudget {
    pub max_events: usize,
    pub pool: Vec<Word>,
    pub cap: usize,
}

impl SampleBudget {
    fn sample(&self, cat: &FreeCategory) -> Result<Vec<PremonoidalMorphism>, FreeCatError> {
        let pool: Vec<Word> = self.pool.iter().filter(|w| cat.identity(w).is_ok()).cloned().collect();
        cat.enumerate_morphisms(self.max_events, &pool, self.cap)
    }
}

/// `(f ⋉ B) ; (A' ⋊ g)` equals `(A ⋊ g) ; (f ⋉ B')`.
pub fn commutes_past(f: &PremonoidalMorphism, g: &PremonoidalMorphism) -> Result<bool, FreeCatError> {
    let first = f.right_whisker(&g.source())?.compose(&g.left_whisker(&f.target())?)?;
    let second = g.left_whisker(&f.source())?.compose(&f.right_whisker(&g.target())?)?;
    first.equals(&second)
}

/// A pair of effectful graph morphisms `G → K ← H`, read as functors between free categories.
#[derive(Debug, Clone)]
pub struct Cospan<'a> {
    pub left_graph: &'a EffectfulGraph,
    pub p: &'a EffectfulGraphMorphism,
    pub right_graph: &'a EffectfulGraph,
    pub q: &'a EffectfulGraphMorphism,
    pub apex: &'a EffectfulGraph,
}

impl Cospan<'_> {
    /// First sampled pair `(P f, Q g)` that fails to commute.
    pub fn counterexample(
        &self,
        budget: &SampleBudget,
    ) -> Result<Option<(PremonoidalMorphism, PremonoidalMorphism)>, TensorError> {
        let apex = FreeCategory::new(&self.apex.impure)?;
        let image = |graph: &EffectfulGraph, leg: &EffectfulGraphMorphism| -> Result<Vec<_>, FreeCatError> {
            let cat = FreeCategory::new(&graph.impure)?;
            budget.sample(&cat)?.iter().map(|m| apex.map_morphism(&leg.impure, m)).collect()
        };
        let fs = image(self.left_graph, self.p)?;
        let gs = image(self.right_graph, self.q)?;
        for f in &fs {
            for g in &gs {
                if !commutes_past(f, g)? {
                    return Ok(Some((f.clone(), g.clone())));
                }
            }
        }
        Ok(None)
    }

    pub fn is_commuting(&self, budget: &SampleBudget) -> Result<bool, TensorError> {
        Ok(self.counterexample(budget)?.is_none())
    }
}

pub fn is_commuting_cospan(cospan: &Cospan<'_>, budget: &SampleBudget) -> Result<bool, TensorError> {
    cospan.is_commuting(budget)
}

fn candidate_map(cospan: &Cospan<'_>, tensor: &TensorResult) -> Result<EffectfulGraphMorphism, TensorError> {
    let (p, q) = (cospan.p, cospan.q);
    if p.pure != q.pure {
        return Err(TensorError::PureDisagreement("pure maps".into()));
    }
    if p.impure.map.objects != q.impure.map.objects {
        return Err(TensorError::PureDisagreement("object maps".into()));
    }
    let mut generators = BTreeMap::new();
    for (leg, side, inj) in [(p, cospan.left_graph, &tensor.left), (q, cospan.right_graph, &tensor.right)] {
        for (x, image) in &inj.impure.map.generators {
            let target = leg.impure.map.generators.get(x).ok_or_else(|| {
                TensorError::PureDisagreement(format!("leg undefined on {x}"))
            })?;
            if let Some(previous) = generators.insert(image.clone(), target.clone()) {
                if &previous != target {
                    let pure = side.pure_preimage(x).map_or(x.to_string(), |v| v.to_string());
                    return Err(TensorError::PureDisagreement(pure));
                }
            }
        }
    }
    Ok(EffectfulGraphMorphism {
        pure: p.pure.clone(),
        impure: DeviceGraphMorphism::new(MonoidalGraphMorphism { objects: p.impure.map.objects.clone(), generators }),
    })
}

/// The map out of the product sending `l·x ↦ P(x)` and `r·y ↦ Q(y)`.
pub fn mediating_morphism(
    cospan: &Cospan<'_>,
    tensor: &TensorResult,
    budget: &SampleBudget,
) -> Result<EffectfulGraphMorphism, TensorError> {
    let mediator = candidate_map(cospan, tensor)?;
    if let Some((f, g)) = cospan.counterexample(budget)? {
        return Err(TensorError::NotCommuting { f: f.to_string(), g: g.to_string() });
    }
    mediator.check(&tensor.product, cospan.apex).map_err(TensorError::InvalidMediator)?;
    Ok(mediator)
}

/// Generator maps out of the product that recover both legs, found by brute force.
pub fn factorizations(cospan: &Cospan<'_>, tensor: &TensorResult) -> Vec<BTreeMap<GeneratorId, GeneratorId>> {
    let objects = &cospan.p.impure.map.objects;
    let gens: Vec<(&GeneratorId, Word, Word)> = tensor
        .product
        .impure
        .generators()
        .iter()
        .filter_map(|(x, a)| {
            let map = |w: &Word| w.iter().map(|o| objects.get(o).cloned()).collect::<Option<Word>>();
            Some((x, map(&a.dom)?, map(&a.cod)?))
        })
        .collect();
    let candidates: Vec<Vec<&GeneratorId>> = gens
        .iter()
        .map(|(_, dom, cod)| {
            cospan.apex.impure.generators().iter().filter(|(_, a)| &a.dom == dom && &a.cod == cod).map(|(k, _)| k).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    if candidates.iter().any(|c| c.is_empty()) {
        return out;
    }
    loop {
        let map: BTreeMap<GeneratorId, GeneratorId> =
            gens.iter().zip(&choice).zip(&candidates).map(|(((x, _, _), &i), c)| ((*x).clone(), c[i].clone())).collect();
        let recovers = |leg: &EffectfulGraphMorphism, inj: &EffectfulGraphMorphism| {
            inj.impure.map.generators.iter().all(|(x, image)| leg.impure.map.generators.get(x) == map.get(image))
        };
        if recovers(cospan.p, &tensor.left) && recovers(cospan.q, &tensor.right) {
            out.push(map);
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                return out;
            }
            choice[k] += 1;
            if choice[k] < candidates[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Outcome of [`universal_property_check`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UniversalPropertyReport {
    pub left_sample: usize,
    pub right_sample: usize,
    pub cross_pairs: usize,
    pub cross_failures: Vec<String>,
    pub cospans: usize,
    pub mediator_failures: Vec<String>,
}

impl UniversalPropertyReport {
    pub fn passed(&self) -> bool {
        self.cross_failures.is_empty() && self.mediator_failures.is_empty()
    }
}

/// Checks that images of the two sides interchange in the free category on
/// the product, and that the cospans built from the injections (both ways
/// round when the factors coincide) have exactly one mediating generator map.
pub fn universal_property_check(g: &EffectfulGraph, h: &EffectfulGraph, budget: &SampleBudget) -> Result<UniversalPropertyReport, TensorError> {
    let tensor = commuting_tensor(g, h)?;
    let product = FreeCategory::new(&tensor.product.impure)?;
    let image = |graph: &EffectfulGraph, inj: &EffectfulGraphMorphism| -> Result<Vec<_>, FreeCatError> {
        let cat = FreeCategory::new(&graph.impure)?;
        budget.sample(&cat)?.iter().map(|m| product.map_morphism(&inj.impure, m)).collect()
    };
    let lefts = image(g, &tensor.left)?;
    let rights = image(h, &tensor.right)?;
    let mut report = UniversalPropertyReport { left_sample: lefts.len(), right_sample: rights.len(), ..Default::default() };
    for f in &lefts {
        for k in &rights {
            report.cross_pairs += 1;
            if !crate::freecat::interchange_holds(f, k)? {
                report.cross_failures.push(format!("{f} and {k}"));
            }
        }
    }

    let mut cospans = vec![(&tensor.left, &tensor.right)];
    if g == h {
        cospans.push((&tensor.right, &tensor.left));
    }
    for (p, q) in cospans {
        report.cospans += 1;
        let cospan = Cospan { left_graph: g, p, right_graph: h, q, apex: &tensor.product };
        match mediating_morphism(&cospan, &tensor, budget) {
            Ok(m) => {
                let all = factorizations(&cospan, &tensor);
                if all != vec![m.impure.map.generators.clone()] {
                    report.mediator_failures.push(format!("{} factorizations", all.len()));
                }
                let recomposed = (tensor.left.then(&m), tensor.right.then(&m));
                if recomposed.0.impure.map.generators != p.impure.map.generators
                    || recomposed.1.impure.map.generators != q.impure.map.generators
                {
                    report.mediator_failures.push("mediator does not recover the legs".into());
                }
            }
            Err(e) => report.mediator_failures.push(e.to_string()),
        }
    }
    Ok(report)
}

/// Devices of `l·`-tagged and `r·`-tagged generators, for checking disjointness.
pub fn tagged_devices(product: &EffectfulGraph, tag: Tag) -> BTreeSet<DeviceId> {
    product
        .impure
        .dev
        .iter()
        .filter(|(x, _)| x.as_str().starts_with(tag.prefix()))
        .flat_map(|(_, ds)| ds.iter().cloned())
        .collect()
}
