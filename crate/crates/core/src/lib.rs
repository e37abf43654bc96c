//! Exact modular character table workbench.
//!
//! Character tables are stored in an all-integer format over integral bases of
//! abelian number fields. Around that format sit exact linear algebra over the
//! integers, an all-integer simplex for integer programs, and the machinery
//! that turns basic sets of Brauer and projective characters into proofs about
//! decomposition matrices.

pub mod basis;
pub mod chartable;
pub mod charops;
pub mod cyclo;
pub mod error;
pub mod exactnum;
pub mod fixtures;
pub mod ilp;
pub mod improve;
pub mod intlin;
pub mod numfield;
pub mod session;

pub use error::{Error, Result};
pub use exactnum::{BigInt, BigRational, LegacyRecord};
pub use intlin::IntMatrix;
