//! Sums of two k-th powers of matrices over finite fields.
//!
//! The crate builds finite fields with canonical moduli, does exact linear
//! algebra over them, computes generalized Jordan forms with explicit
//! similarity transforms, and decomposes a matrix `A` as `B^k + C^k` under
//! optional structural constraints on `B` and `C`. The [`census`] module
//! enumerates small matrix spaces exhaustively and checks closed-form
//! membership statements against brute force.

pub mod canon;
pub mod census;
pub mod cli;
pub mod config;
pub mod cyclic;
pub mod gf;
pub mod lift;
pub mod matgf;
pub mod poly;
pub mod waring;

pub use gf::{build_field, Elem, Field};
pub use matgf::Mat;
pub use poly::Poly;
