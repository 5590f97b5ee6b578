//! Two-sample location-scale testing built on the Lepage statistic.
//!
//! The classical Lepage statistic adds the squared standardized
//! Wilcoxon–Mann–Whitney `U` and the squared standardized Ansari–Bradley `C`.
//! This crate computes it together with five robustified variants that
//! replace one or both null variances by data-driven estimates:
//!
//! | statistic | `U` variance        | `C` variance      |
//! |-----------|---------------------|-------------------|
//! | `L0`      | null                | null              |
//! | `L1`      | Fligner–Policello   | null              |
//! | `L2`      | Fong–Huang          | null              |
//! | `L3`      | null                | empirical         |
//! | `L4`      | Fligner–Policello   | empirical         |
//! | `L5`      | Fong–Huang          | empirical         |
//!
//! Around the statistics sit a permutation engine (exact enumeration and
//! seeded Monte Carlo), seeded variate generation for the families used in
//! size/power studies, a simulation harness and the I/O used by the `lepage`
//! command-line tool.

pub mod cstat;
pub mod distributions;
mod error;
pub mod io;
pub mod lepage;
pub mod permutation;
pub mod rank;
pub mod report;
pub mod simulation;
mod standardized;
pub mod ustat;

pub use error::{Error, Result};
pub use lepage::{chisq2_sf, lepage_suite, LepageSuite, Statistic};
pub use rank::{Group, TwoSample};
pub use standardized::Standardized;
