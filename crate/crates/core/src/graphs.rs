//! Monoidal graphs, device graphs and effectful graphs.
//!
//! A [`MonoidalGraph`] is a signature: objects plus generators typed by lists
//! of objects. A [`DeviceGraph`] additionally assigns every generator a set of
//! devices; generators sharing a device can never be reordered past each
//! other. An [`EffectfulGraph`] embeds a device-free monoidal graph of *pure*
//! generators into a device graph over the same objects.
//!
//! All validation returns the full list of [`Violation`]s rather than stopping
//! at the first one, and every collection is ordered, so reports are stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Characters that may not occur in any name.
pub const RESERVED_CHARS: &[char] = &['#', ';', '@', '|', '(', ')', '[', ']', ',', ':'];

/// Returns whether `s` is a usable object/generator/device name.
pub fn is_valid_name(s: &str) -> bool {
    !s.is_empty() && s != "->" && !s.chars().any(|c| c.is_whitespace() || RESERVED_CHARS.contains(&c))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid name {0:?}")]
pub struct InvalidName(pub String);

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Result<Self, InvalidName> {
                let name = name.into();
                if is_valid_name(&name) {
                    Ok(Self(name))
                } else {
                    Err(InvalidName(name))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl std::str::FromStr for $name {
            type Err = InvalidName;
            fn from_str(s: &str) -> Result<Self, InvalidName> {
                Self::new(s)
            }
        }
    };
}

name_type!(
    /// Name of an object (a resource type).
    ObjectId
);
name_type!(
    /// Name of a generator (an action).
    GeneratorId
);
name_type!(
    /// Name of a device.
    DeviceId
);

/// A finite list of objects; the tensor of objects is concatenation.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<ObjectId>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(items: Vec<ObjectId>) -> Self {
        Self(items)
    }

    /// Parses a whitespace-separated list of object names.
    pub fn parse(s: &str) -> Result<Self, InvalidName> {
        s.split_whitespace().map(ObjectId::new).collect::<Result<Vec<_>, _>>().map(Self)
    }

    pub fn items(&self) -> &[ObjectId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut items = self.0.clone();
        items.extend(other.0.iter().cloned());
        Word(items)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObjectId> {
        self.0.iter()
    }
}

impl FromIterator<ObjectId> for Word {
    fn from_iter<I: IntoIterator<Item = ObjectId>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

/// Source and target lists of a generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arity {
    pub dom: Word,
    pub cod: Word,
}

impl Arity {
    pub fn new(dom: Word, cod: Word) -> Self {
        Self { dom, cod }
    }
}

/// Which side of a generator's typing a violation concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Dom,
    Cod,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Dom => "domain",
            Side::Cod => "codomain",
        })
    }
}

/// One failed well-formedness condition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("generator {generator}: unknown object {object}")]
    UnknownObject { generator: GeneratorId, object: ObjectId },
    #[error("generator {generator}: unknown device {device}")]
    UnknownDevice { generator: GeneratorId, device: DeviceId },
    #[error("generator {generator} has no device assignment")]
    MissingDevices { generator: GeneratorId },
    #[error("device assignment for unknown generator {generator}")]
    DevicesForUnknownGenerator { generator: GeneratorId },
    #[error("object {object} is declared on only one side of the embedding")]
    ObjectSetMismatch { object: ObjectId },
    #[error("pure generator {pure} is not embedded")]
    NotEmbedded { pure: GeneratorId },
    #[error("embedding mentions unknown pure generator {pure}")]
    EmbedUnknownSource { pure: GeneratorId },
    #[error("pure generator {pure} embeds as unknown generator {target}")]
    EmbedUnknownTarget { pure: GeneratorId, target: GeneratorId },
    #[error("pure generator {pure} and its image {target} have different types")]
    EmbedTypeMismatch { pure: GeneratorId, target: GeneratorId },
    #[error("pure generator {pure} embeds as {target}, which has devices")]
    EmbeddedHasDevices { pure: GeneratorId, target: GeneratorId },
    #[error("embedding is not injective: {first} and {second} both map to {target}")]
    EmbedNotInjective { first: GeneratorId, second: GeneratorId, target: GeneratorId },
    #[error("object map is undefined on {object}")]
    ObjectUnmapped { object: ObjectId },
    #[error("object {object} maps to unknown object {image}")]
    ObjectImageUnknown { object: ObjectId, image: ObjectId },
    #[error("generator map is undefined on {generator}")]
    GeneratorUnmapped { generator: GeneratorId },
    #[error("generator {generator} maps to unknown generator {image}")]
    GeneratorImageUnknown { generator: GeneratorId, image: GeneratorId },
    #[error("generator {generator} maps to {image}, whose {side} is {found} instead of {expected}")]
    TypeNotPreserved { generator: GeneratorId, image: GeneratorId, side: Side, expected: Word, found: Word },
    #[error("orthogonal generators {first} and {second} map to non-orthogonal {first_image} and {second_image}")]
    OrthogonalityLost { first: GeneratorId, second: GeneratorId, first_image: GeneratorId, second_image: GeneratorId },
    #[error("embedding square fails on pure generator {pure}: {via_impure} vs {via_pure}")]
    SquareFails { pure: GeneratorId, via_impure: GeneratorId, via_pure: GeneratorId },
}

/// A non-empty list of violations, usable as an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

fn into_result(violations: Vec<Violation>) -> Result<(), Violations> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Violations(violations))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown generator {0}")]
    UnknownGenerator(GeneratorId),
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
}

/// Objects and generators typed by lists of objects.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonoidalGraph {
    pub objects: BTreeSet<ObjectId>,
    pub generators: BTreeMap<GeneratorId, Arity>,
}

impl MonoidalGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_object(mut self, object: ObjectId) -> Self {
        self.objects.insert(object);
        self
    }

    pub fn with_generator(mut self, name: GeneratorId, dom: Word, cod: Word) -> Self {
        self.generators.insert(name, Arity::new(dom, cod));
        self
    }

    pub fn arity(&self, generator: &GeneratorId) -> Result<&Arity, GraphError> {
        self.generators.get(generator).ok_or_else(|| GraphError::UnknownGenerator(generator.clone()))
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, arity) in &self.generators {
            for object in arity.dom.iter().chain(arity.cod.iter()) {
                if !self.objects.contains(object) {
                    out.push(Violation::UnknownObject { generator: name.clone(), object: object.clone() });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Violations> {
        into_result(self.violations())
    }
}

/// A monoidal graph whose generators carry sets of devices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviceGraph {
    pub underlying: MonoidalGraph,
    pub devices: BTreeSet<DeviceId>,
    pub dev: BTreeMap<GeneratorId, BTreeSet<DeviceId>>,
}

impl DeviceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Device graph with no devices at all over `graph`.
    pub fn device_free(graph: MonoidalGraph) -> Self {
        let dev = graph.generators.keys().map(|g| (g.clone(), BTreeSet::new())).collect();
        Self { underlying: graph, devices: BTreeSet::new(), dev }
    }

    pub fn with_object(mut self, object: ObjectId) -> Self {
        self.underlying.objects.insert(object);
        self
    }

    pub fn with_device(mut self, device: DeviceId) -> Self {
        self.devices.insert(device);
        self
    }

    pub fn with_generator(
        mut self,
        name: GeneratorId,
        dom: Word,
        cod: Word,
        devices: impl IntoIterator<Item = DeviceId>,
    ) -> Self {
        self.underlying.generators.insert(name.clone(), Arity::new(dom, cod));
        self.dev.insert(name, devices.into_iter().collect());
        self
    }

    pub fn objects(&self) -> &BTreeSet<ObjectId> {
        &self.underlying.objects
    }

    pub fn generators(&self) -> &BTreeMap<GeneratorId, Arity> {
        &self.underlying.generators
    }

    pub fn arity(&self, generator: &GeneratorId) -> Result<&Arity, GraphError> {
        self.underlying.arity(generator)
    }

    pub fn devices_of(&self, generator: &GeneratorId) -> Result<&BTreeSet<DeviceId>, GraphError> {
        self.dev.get(generator).ok_or_else(|| GraphError::UnknownGenerator(generator.clone()))
    }

    /// True when the two generators share no device.
    pub fn orthogonal(&self, f: &GeneratorId, h: &GeneratorId) -> Result<bool, GraphError> {
        let df = self.devices_of(f)?;
        let dh = self.devices_of(h)?;
        Ok(df.is_disjoint(dh))
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = self.underlying.violations();
        for name in self.underlying.generators.keys() {
            match self.dev.get(name) {
                None => out.push(Violation::MissingDevices { generator: name.clone() }),
                Some(devices) => {
                    for d in devices {
                        if !self.devices.contains(d) {
                            out.push(Violation::UnknownDevice { generator: name.clone(), device: d.clone() });
                        }
                    }
                }
            }
        }
        for name in self.dev.keys() {
            if !self.underlying.generators.contains_key(name) {
                out.push(Violation::DevicesForUnknownGenerator { generator: name.clone() });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Violations> {
        into_result(self.violations())
    }
}

/// Pure generators embedded device-freely into a device graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EffectfulGraph {
    pub pure: MonoidalGraph,
    pub impure: DeviceGraph,
    pub embed: BTreeMap<GeneratorId, GeneratorId>,
}

impl EffectfulGraph {
    /// An effectful graph with no pure generators.
    pub fn from_device_graph(impure: DeviceGraph) -> Self {
        let pure = MonoidalGraph { objects: impure.objects().clone(), generators: BTreeMap::new() };
        Self { pure, impure, embed: BTreeMap::new() }
    }

    /// Embedded image of a pure generator.
    pub fn embedded(&self, pure: &GeneratorId) -> Option<&GeneratorId> {
        self.embed.get(pure)
    }

    /// Pure generator whose image is `impure`, if any.
    pub fn pure_preimage(&self, impure: &GeneratorId) -> Option<&GeneratorId> {
        self.embed.iter().find(|(_, t)| *t == impure).map(|(s, _)| s)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = self.pure.violations();
        out.extend(self.impure.violations());
        for object in self.pure.objects.symmetric_difference(self.impure.objects()) {
            out.push(Violation::ObjectSetMismatch { object: object.clone() });
        }
        for pure in self.pure.generators.keys() {
            if !self.embed.contains_key(pure) {
                out.push(Violation::NotEmbedded { pure: pure.clone() });
            }
        }
        let mut seen: BTreeMap<&GeneratorId, &GeneratorId> = BTreeMap::new();
        for (pure, target) in &self.embed {
            let Some(arity) = self.pure.generators.get(pure) else {
                out.push(Violation::EmbedUnknownSource { pure: pure.clone() });
                continue;
            };
            let Some(image) = self.impure.generators().get(target) else {
                out.push(Violation::EmbedUnknownTarget { pure: pure.clone(), target: target.clone() });
                continue;
            };
            if arity != image {
                out.push(Violation::EmbedTypeMismatch { pure: pure.clone(), target: target.clone() });
            }
            if self.impure.dev.get(target).is_some_and(|d| !d.is_empty()) {
                out.push(Violation::EmbeddedHasDevices { pure: pure.clone(), target: target.clone() });
            }
            if let Some(first) = seen.insert(target, pure) {
                out.push(Violation::EmbedNotInjective {
                    first: first.clone(),
                    second: pure.clone(),
                    target: target.clone(),
                });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Violations> {
        into_result(self.violations())
    }
}

/// Object and generator maps between monoidal graphs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonoidalGraphMorphism {
    pub objects: BTreeMap<ObjectId, ObjectId>,
    pub generators: BTreeMap<GeneratorId, GeneratorId>,
}

impl MonoidalGraphMorphism {
    pub fn identity(graph: &MonoidalGraph) -> Self {
        Self {
            objects: graph.objects.iter().map(|o| (o.clone(), o.clone())).collect(),
            generators: graph.generators.keys().map(|g| (g.clone(), g.clone())).collect(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &MonoidalGraphMorphism) -> Self {
        Self {
            objects: self
                .objects
                .iter()
                .filter_map(|(k, v)| next.objects.get(v).map(|w| (k.clone(), w.clone())))
                .collect(),
            generators: self
                .generators
                .iter()
                .filter_map(|(k, v)| next.generators.get(v).map(|w| (k.clone(), w.clone())))
                .collect(),
        }
    }

    pub fn map_object(&self, object: &ObjectId) -> Option<&ObjectId> {
        self.objects.get(object)
    }

    pub fn map_generator(&self, generator: &GeneratorId) -> Option<&GeneratorId> {
        self.generators.get(generator)
    }

    /// Maps a word objectwise; `None` if some object is unmapped.
    pub fn map_word(&self, word: &Word) -> Option<Word> {
        word.iter().map(|o| self.objects.get(o).cloned()).collect::<Option<Vec<_>>>().map(Word::new)
    }

    pub fn violations(&self, src: &MonoidalGraph, dst: &MonoidalGraph) -> Vec<Violation> {
        let mut out = Vec::new();
        for object in &src.objects {
            match self.objects.get(object) {
                None => out.push(Violation::ObjectUnmapped { object: object.clone() }),
                Some(image) if !dst.objects.contains(image) => {
                    out.push(Violation::ObjectImageUnknown { object: object.clone(), image: image.clone() })
                }
                Some(_) => {}
            }
        }
        for (name, arity) in &src.generators {
            let Some(image) = self.generators.get(name) else {
                out.push(Violation::GeneratorUnmapped { generator: name.clone() });
                continue;
            };
            let Some(image_arity) = dst.generators.get(image) else {
                out.push(Violation::GeneratorImageUnknown { generator: name.clone(), image: image.clone() });
                continue;
            };
            for (side, word, found) in
                [(Side::Dom, &arity.dom, &image_arity.dom), (Side::Cod, &arity.cod, &image_arity.cod)]
            {
                // An unmapped object is already reported above.
                if let Some(expected) = self.map_word(word) {
                    if &expected != found {
                        out.push(Violation::TypeNotPreserved {
                            generator: name.clone(),
                            image: image.clone(),
                            side,
                            expected,
                            found: found.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn check(&self, src: &MonoidalGraph, dst: &MonoidalGraph) -> Result<(), Violations> {
        into_result(self.violations(src, dst))
    }
}

/// A monoidal graph morphism between device graphs that preserves orthogonality.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviceGraphMorphism {
    pub map: MonoidalGraphMorphism,
}

impl DeviceGraphMorphism {
    pub fn new(map: MonoidalGraphMorphism) -> Self {
        Self { map }
    }

    pub fn identity(graph: &DeviceGraph) -> Self {
        Self { map: MonoidalGraphMorphism::identity(&graph.underlying) }
    }

    pub fn then(&self, next: &DeviceGraphMorphism) -> Self {
        Self { map: self.map.then(&next.map) }
    }

    pub fn violations(&self, src: &DeviceGraph, dst: &DeviceGraph) -> Vec<Violation> {
        let mut out = self.map.violations(&src.underlying, &dst.underlying);
        if !out.is_empty() {
            return out;
        }
        let gens: Vec<&GeneratorId> = src.generators().keys().collect();
        for (i, f) in gens.iter().enumerate() {
            for h in &gens[i..] {
                if !src.orthogonal(f, h).unwrap_or(false) {
                    continue;
                }
                let fi = &self.map.generators[*f];
                let hi = &self.map.generators[*h];
                if !dst.orthogonal(fi, hi).unwrap_or(false) {
                    out.push(Violation::OrthogonalityLost {
                        first: (*f).clone(),
                        second: (*h).clone(),
                        first_image: fi.clone(),
                        second_image: hi.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn check(&self, src: &DeviceGraph, dst: &DeviceGraph) -> Result<(), Violations> {
        into_result(self.violations(src, dst))
    }
}

/// A pair of maps on pure and impure parts making the embedding square commute.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EffectfulGraphMorphism {
    pub pure: MonoidalGraphMorphism,
    pub impure: DeviceGraphMorphism,
}

impl EffectfulGraphMorphism {
    pub fn identity(graph: &EffectfulGraph) -> Self {
        Self {
            pure: MonoidalGraphMorphism::identity(&graph.pure),
            impure: DeviceGraphMorphism::identity(&graph.impure),
        }
    }

    pub fn then(&self, next: &EffectfulGraphMorphism) -> Self {
        Self { pure: self.pure.then(&next.pure), impure: self.impure.then(&next.impure) }
    }

    pub fn violations(&self, src: &EffectfulGraph, dst: &EffectfulGraph) -> Vec<Violation> {
        let mut out = self.pure.violations(&src.pure, &dst.pure);
        out.extend(self.impure.violations(&src.impure, &dst.impure));
        if !out.is_empty() {
            return out;
        }
        for pure in src.pure.generators.keys() {
            let (Some(embedded), Some(mapped)) = (src.embed.get(pure), self.pure.generators.get(pure)) else {
                continue;
            };
            let via_impure = &self.impure.map.generators[embedded];
            match dst.embed.get(mapped) {
                Some(via_pure) if via_pure == via_impure => {}
                other => out.push(Violation::SquareFails {
                    pure: pure.clone(),
                    via_impure: via_impure.clone(),
                    via_pure: other.cloned().unwrap_or_else(|| mapped.clone()),
                }),
            }
        }
        out
    }

    pub fn check(&self, src: &EffectfulGraph, dst: &EffectfulGraph) -> Result<(), Violations> {
        into_result(self.violations(src, dst))
    }
}
