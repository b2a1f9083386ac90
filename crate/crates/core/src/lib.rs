//! Static risk gate for metric SQL.
//!
//! A query is parsed, embedded, scored by a boosted-tree model and then
//! either approved or blocked with a plain-language explanation.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod explain;
pub mod features;
pub mod gate;
pub mod gbdt;
pub mod metrics;
pub mod sql;

pub use error::{Error, Result};
pub use explain::{RiskReason, RuleCode, Status};
pub use gate::{Gate, GateConfig, Pipeline, Verdict};
pub use gbdt::{GbdtHyperparams, GbdtModel};
