//! Finite groupoids, Fell bundles over them, their section \*-algebras, and
//! constructive Morita-equivalence certificates for commuting free group
//! actions on Fell bundles.

pub mod cli;
pub mod error;
pub mod fell;
pub mod groupoid;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod morita;
pub mod report;
pub mod star;

pub use error::{Error, Result};
pub use report::ValidationReport;
