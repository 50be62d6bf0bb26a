//! Two-state-vector simulation of photons in interferometers: circuits,
//! weak values, weakly coupled Gaussian pointers and Monte Carlo ensembles.

pub mod circuit;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod pointer;
pub mod scenarios;
pub mod state;
pub mod tsvf;

pub use circuit::{Circuit, CircuitDefinition, Element, PostSelection};
pub use error::{Error, Result};
pub use pointer::{Coupling, PointerConfig};
pub use state::{BasisLabel, LocalProjector, PureState, Space};
pub use tsvf::{TwoStateVector, WeakValue};
