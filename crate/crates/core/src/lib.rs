//! Generalized toric codes over F_q and the affine ring geometry over
//! Z/(q-1) that governs their minimum distance.

pub mod bounds;
pub mod cli;
pub mod gf;
pub mod pointfile;
pub mod ringgeo;
pub mod search;
pub mod torcode;
