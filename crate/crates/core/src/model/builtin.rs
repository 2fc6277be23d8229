//! Example models and the factory world shipped with the crate.

/// Dual-arm pyramid builder: pick-and-place with both arms or a single arm
/// plus base repositioning, and tag detection under normal or low light.
pub const PYRAMID: &str = include_str!("../../../../models/pyramid.archmodel");

/// The generated 27-design navigation model, as text.
pub const NAVIGATION: &str = include_str!("../../../../models/navigation.archmodel");

/// 20 m × 16 m factory floor with three workstation blocks.
pub const FACTORY_GRID: &str = include_str!("../../../../models/factory.grid");
