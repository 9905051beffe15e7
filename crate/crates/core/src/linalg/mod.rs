//! Banded complex linear algebra.

pub mod banded;
pub mod svd;

pub use banded::{BandedLu, BandedMatrix};
pub use svd::{dense_smallest_singular_value, smallest_singular_value, smallest_singular_value_with, SigmaMinOptions};
