//! Decoration transformations for classical spin models.
//!
//! A central spin `S0` coupled to `m` peripheral spins is traced out and the
//! resulting associated Boltzmann weights are mapped onto an effective
//! undecorated Hamiltonian. The map is linear in the log-weights and is given
//! by the Kronecker product of inverses of Vandermonde matrices built on the
//! equidistant magnetic moments of each leg.
//!
//! Modules:
//! - [`spin`]: spins, node conventions, multi-indices and coupling vectors.
//! - [`vanderm`]: exact rational Vandermonde matrices, inverses, Kronecker products.
//! - [`transform`]: associated weights and effective couplings.
//! - [`correlate`]: correlation vectors and expansion coefficients.
//! - [`mixed`]: the mixed spin-(1/2, S) square lattice and its critical curve.
//! - [`oracle`]: brute-force enumeration of small lattices.
//! - [`format`]: JSON documents for cells and lattices.

pub mod correlate;
pub mod error;
pub mod format;
pub mod mixed;
pub mod numeric;
pub mod oracle;
pub mod spin;
pub mod transform;
pub mod vanderm;

pub use error::{Error, Result};
pub use spin::{CouplingVector, LegConfiguration, Legs, MultiIndex, NodeConvention, SpinValue};
