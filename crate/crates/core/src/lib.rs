//! Exact arithmetic for cyclotomic ring towers, their residue rings mod p,
//! norm maps, unit filtrations and the finite p-groups built from them.

pub mod abgroup;
pub mod arith;
pub mod bernoulli;
pub mod error;
pub mod exactpoly;
pub mod fpfilter;
pub mod normtower;
pub mod phimaps;
pub mod units;
pub mod verify;
pub mod vplus;

pub use error::{Error, Result};
