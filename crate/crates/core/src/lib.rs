//! AMP and GNN-enhanced AMP detection for massive MIMO.
//!
//! The library provides:
//! - a minimal f64 numeric kernel with reverse-mode gradients ([`numkit`]),
//! - the system model and dataset generation ([`comms`]),
//! - the iterative AMP detector ([`amp`]),
//! - MMSE and exact-enumeration baselines ([`baselines`]),
//! - the message-passing network that replaces the AMP posterior denoiser
//!   ([`gnn`]) and the unfolded detector built from it ([`net`]),
//! - a trainer with checkpointing ([`trainer`]) and benchmark drivers
//!   ([`bench`], [`report`], [`complexity`]).

#![allow(clippy::needless_range_loop)]

pub mod amp;
pub mod baselines;
pub mod bench;
pub mod comms;
pub mod complexity;
pub mod container;
pub mod error;
pub mod gnn;
pub mod net;
pub mod numkit;
pub mod report;
pub mod seeds;
pub mod testkit;
pub mod trainer;

pub use error::{Error, Result};
