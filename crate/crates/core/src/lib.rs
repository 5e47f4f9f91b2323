//! Privacy mechanisms that minimise expected Hamming distortion under a
//! maximal-leakage budget.
//!
//! - [`types`]: validated priors, mechanisms, budgets and prior sets.
//! - [`majorization`]: rearrangements and the majorization orders.
//! - [`channel`]: maximal leakage and expected distortion.
//! - [`design`]: optimal mechanism for a known prior.
//! - [`robust`]: worst-case design over a set of priors.
//! - [`ordering`]: worst-case distortion of a mechanism over all priors.
//! - [`oracle`]: linear-programming and grid cross-checks.
//! - [`cli`]: the `maxleak` command-line front end.

pub mod channel;
pub mod cli;
pub mod design;
pub mod error;
pub mod majorization;
pub mod oracle;
pub mod ordering;
pub mod robust;
pub mod sampling;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use types::{DesignResult, LeakageBudget, Mechanism, Prior, PriorSet, Segment};
