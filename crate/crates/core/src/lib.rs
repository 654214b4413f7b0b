//! Verification toolkit for two-trace power side-channel leakage checks.
//!
//! The pipeline: encode a leakage property over two execution traces of a
//! toy XOR cipher as CNF ([`encoder`]), solve it classically for ground
//! truth ([`cnf`]), search for leakage witnesses with a simulated
//! Grover/BBHT loop ([`grover`] on top of the dense statevector backend in
//! [`sim`]), turn flat measurement histograms into quantified UNSAT
//! evidence ([`certify`]), and project the logical cost of running the same
//! search on hard residual instances ([`resources`]).

pub mod certify;
pub mod cnf;
pub mod encoder;
pub mod grover;
pub mod resources;
pub mod sim;

pub use cnf::{Assignment, Clause, Cnf, Literal, SatStatus, SolveResult};
pub use encoder::{LeakageInstance, LeakageSpec, PropertyMode};
pub use grover::{BbhtConfig, BbhtReport, BbhtVerdict, GroverConfig};
pub use sim::{Circuit, Gate, Histogram, NoiseModel, StateVector};
