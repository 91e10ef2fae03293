//! Simulation and optimal control of local-detuning quantum annealing on
//! Rydberg atom arrays, for weighted Max-Cut and maximum independent set.
//!
//! The crate covers the whole chain: problem graphs with exact oracles
//! ([`graph`]), encoding into detunings, interactions and atom positions
//! ([`encoding`]), the spin and Rydberg Hamiltonians ([`hamiltonian`]),
//! state-vector time evolution ([`evolution`]), spline pulse schedules with
//! laser noise ([`pulse`]), the BFGS / Nelder-Mead optimisers
//! ([`optimize`]), a classical simulated-annealing baseline ([`sa`]), and
//! end-to-end experiment drivers ([`experiment`]).

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod encoding;
pub mod evolution;
pub mod experiment;
pub mod graph;
pub mod hamiltonian;
pub mod optimize;
pub mod pulse;
pub mod sa;
