//! Classical workbench for a block bit-plane multi-image cipher built on
//! quantum baker-map circuits and a sine-chaotified hyperchaotic keystream.

pub mod analysis;
pub mod baker;
pub mod chaos;
pub mod cipher;
pub mod circuit;
pub mod circuit_sim;
pub mod error;
pub mod image_model;
pub mod keystream;

pub use analysis::Protocol;
pub use baker::{BakerPartition, Permutation, Point};
pub use chaos::{ChaoticSequences, ScmParams, ScmState};
pub use cipher::{Ciphertext, KeySchedule, MasterKey, Mode};
pub use circuit::{Circuit, ControlCondition, Gate, GateKind, Wire};
pub use circuit_sim::{BasisState, Equivalence};
pub use error::{Error, Result};
pub use image_model::{BitTensor, BlockLayout, ImageSet};
pub use keystream::{KeyTable, Seed};
