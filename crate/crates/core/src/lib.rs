//! Exact apolarity invariants of homogeneous forms and certified Waring-rank
//! bounds.

pub mod apolarity;
pub mod bounds;
pub mod certificate;
pub mod cli;
pub mod construct;
pub mod decompose;
pub mod error;
pub mod polyring;
pub mod qlinalg;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
