pub mod analysis;
pub mod bytelm;
pub mod cli;
pub mod coder;
pub mod compressors;
pub mod corpus;
pub mod error;
pub mod mixer;
pub mod segmenter;
pub mod vocab;

pub use error::{Error, Result};
