//! Data-driven balanced truncation in the Loewner framework.
//!
//! Builds reduced-order models for the balanced-truncation family (BT, FLBT,
//! TLBT, SWBT, LQGBT, H∞BT, PRBT, BRBT, BST) purely from transfer-function
//! samples on the imaginary axis. The pipeline is
//!
//! ```text
//! samples H(jω) ──> Loewner quadruplet (L, Ls, B̂, Ĉ)
//!                ──> variant Gramian factors Z_p, Z_q
//!                ──> square-root balancing of Z_q* L Z_p
//!                ──> reduced model (Ã, B̃, C̃, D)
//! ```
//!
//! Intrusive reference solvers (Lyapunov/Riccati/limited Gramians) live in
//! [`oracle`] and back the `compare` workflow and the test suite. [`theory`]
//! holds the closed-form Sylvester solutions and diagonal-dominance
//! diagnostics that justify the per-sample weight formulas.

pub mod balance;
pub mod data;
pub mod error;
pub mod grid;
pub mod la;
pub mod loewner;
pub mod metrics;
pub mod model;
pub mod oracle;
pub(crate) mod par;
pub mod theory;
pub mod weights;

pub use balance::{balance_reduce, evaluate_rom, ReducedModel};
pub use data::{conjugate_close, validate_for_variant, SampleSet};
pub use error::{Error, Result};
pub use grid::InterpolationGrid;
pub use loewner::{build_loewner, interpolation_check, LoewnerQuadruplet};
pub use model::{generate_model, sample_transfer, ModelKind, StateSpaceModel};
pub use weights::{GramianFactors, Variant, VariantConfig};
