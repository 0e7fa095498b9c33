//! Hybrid generic pipe dreams and their polynomials.

pub mod grid;
pub mod poly;
pub mod schubert;
pub mod yangbaxter;
pub mod flux;
