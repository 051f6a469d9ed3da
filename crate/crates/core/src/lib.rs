//! Tensor-train toolkit for multidimensional convolution.

pub mod cli;
pub mod conv;
pub mod cross;
pub mod dense;
pub mod dft;
pub mod error;
pub mod hf;
pub mod kernels;
pub mod linalg;
pub mod tt;

pub type C64 = num_complex::Complex64;

pub use error::{Error, Result};
pub use tt::{TTCore, TTTensor};
