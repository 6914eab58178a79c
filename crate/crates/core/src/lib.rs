//! Magic measures of qudit states produced by random brickwork circuits.
//!
//! The crate has two halves. The simulation side builds exact states
//! ([`densesim`]), samples Haar and Clifford gates ([`cliffordgen`]) and
//! evaluates Wigner negativity, mana and stabilizer Rényi entropy
//! ([`phasespace`]). The prediction side maps circuit averages onto
//! replica spin models ([`commutant`], [`statmech`]) whose large-q limit
//! reduces to minimal cuts. [`ensembles`] runs Monte Carlo experiments and
//! compares the two.

pub mod cliffordgen;
pub mod commutant;
pub mod densesim;
pub mod ensembles;
pub mod error;
pub mod fqarith;
pub mod operator;
pub mod phasespace;
pub mod statmech;

pub use error::{Error, ErrorKind, Result};
pub use operator::DenseOperator;
