//! Model-based metacontrol for robot architectures.
//!
//! A managed system reports component health and quality measurements; a
//! MAPE-K loop folds them into a closed-world knowledge base, derives which
//! objectives are in error with a small set of Horn rules, and re-grounds
//! failing objectives on the best feasible function design.
//!
//! ```
//! use metacontrol::model::{parse_model, builtin};
//! let model = parse_model(builtin::PYRAMID).unwrap();
//! assert_eq!(model.designs.len(), 4);
//! ```

pub mod harness;
pub mod mapek;
pub mod model;
pub mod navsim;
pub mod reasoner;
pub mod tomasys;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/models.md")]
    pub struct Models;
    #[doc = include_str!("../../../book/src/reasoning.md")]
    pub struct Reasoning;
    #[doc = include_str!("../../../book/src/loop.md")]
    pub struct Loop;
    #[doc = include_str!("../../../book/src/navigation.md")]
    pub struct Navigation;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}
