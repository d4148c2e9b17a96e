//! Multi-attribute choice models and multiple price list (MPL) quality elicitation.
//!
//! - [`model`]: alternatives, menus and the model catalog.
//! - [`audit`]: grid checks of the injective, symmetry and linearity conditions.
//! - [`elicit`]: m-MPL / p-MPL encodings, switch points and closed-form inversion.
//! - [`cohort`]: synthetic experiment datasets.
//! - [`stats`]: sign tests, type classification, CDFs and fixed-effects regression.
//! - [`regions`]: three-alternative prediction regions over a price grid.
//! - [`io`]: run configuration and the dataset CSV schema.

pub mod audit;
pub mod cohort;
pub mod elicit;
pub mod error;
pub mod io;
pub mod model;
pub mod regions;
pub mod stats;

pub use error::{AuditError, ElicitError, IoError, ModelError, RegionError, SimulationError, StatsError};
pub use model::{Alternative, Menu, ModelKind, ModelSpec, UtilitySpec, WeightSpec};
