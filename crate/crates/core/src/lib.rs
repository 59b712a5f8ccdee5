#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod decomposition;
pub mod descriptor;
pub mod error;
pub mod experiments;
pub mod luxemburg;
pub mod maximal;
pub mod mesh;
pub mod weights;
pub mod young;

pub use error::{Error, Result};
