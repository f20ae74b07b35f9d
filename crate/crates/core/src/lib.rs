#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod agm1;
pub mod agm2;
pub mod cmfield;
pub mod curves;
pub mod fp;
pub mod gf2m;
pub mod jacobian;
pub mod padic;
pub mod pipeline;
pub mod poly;
pub mod recognize;

pub use error::{Error, Result};
