//! Upper bounds on bidirectional quantum channel capacities and on the
//! private reading capacity of wiretap memory cells, computed by
//! semidefinite programming.

pub mod bounds;
pub mod channels;
pub mod error;
pub mod measures;
pub mod operator;
pub mod parallel;
pub mod reading;
pub mod solver;

pub use error::{Error, Result};
