//! Resourceful traces: morphisms of free effectful categories generated by
//! effectful graphs.
//!
//! * [`graphs`]: monoidal, device and effectful graphs and their morphisms.
//! * [`freecat`]: free premonoidal and effectful categories, canonical forms
//!   and equality.
//! * [`traces`]: the classical trace monoid, distributions and cliques.
//! * [`interference`]: interference graphs, maximal cliques, the bounded
//!   underlying device graph and the unit and counit of the free/underlying
//!   adjunction.
//! * [`tensor`]: the commuting tensor product of effectful graphs.
//! * [`render`]: string-diagram layout, SVG and text output.

pub mod freecat;
pub mod graphs;
pub mod interference;
pub mod render;
pub mod tensor;
pub mod traces;

pub use freecat::{
    interchange_holds, morphisms_equal, BfsOutcome, CanonicalForm, Event, FreeCatError, FreeCategory,
    FreeEffectfulCategory, PremonoidalMorphism,
};
pub use graphs::{
    DeviceGraph, DeviceGraphMorphism, DeviceId, EffectfulGraph, EffectfulGraphMorphism, GeneratorId,
    MonoidalGraph, MonoidalGraphMorphism, ObjectId, Violation, Violations, Word,
};
