#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod domain;
pub mod energy;
pub mod error;
pub mod limits;
pub mod optimizer;
pub mod quadrature;
pub mod variations;
