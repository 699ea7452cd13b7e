//! Building high-dimensional expanders by randomly pruning a complex against a
//! Cayley clique complex, lifting it to simplicial covers, and certifying the
//! result spectrally.

pub mod combine;
pub mod complex;
pub mod covers;
pub mod groups;
pub mod harness;
pub mod pruning;
pub mod sparsify;
pub mod spectral;

pub use complex::{Face, PureComplex, Vertex};
pub use spectral::{HdxMode, WGraph};
