//! Non-orientable regular maps whose Euler characteristic is minus an odd
//! prime power: permutation-group engine, group constructors, census
//! checks, kernel homology and the family tables.

pub mod algebra;
pub mod constructors;
pub mod error;
pub mod families;
pub mod homology;
pub mod mapcore;
pub mod permgrp;

pub use error::{Error, Result};
