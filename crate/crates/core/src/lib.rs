#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod bounds;
pub mod error;
pub mod exec;
pub mod export;
mod fourier;
pub mod grid;
pub mod identities;
pub mod norms;
pub mod report;
pub mod special;
pub mod uncertainty;
pub mod tfr;
pub mod weights;

pub use error::{Error, Result};
pub use exec::Exec;
