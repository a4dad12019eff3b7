//! Multi-valued (qudit) quantum logic.
//!
//! * [`linalg`] and [`system`]: dense complex algebra and base-d indexing.
//! * [`gates`]: the Z_d / X_d / P_d gate family and its controlled forms.
//! * [`synthesis`]: decomposition of arbitrary unitaries into those gates.
//! * [`circuit`]: circuit IR, execution and verification.
//! * [`iontrap`]: pulse-level realization of the gates on trapped ions.
//! * [`io`]: the JSON file formats for unitaries, circuits and pulse programs.

pub mod circuit;
pub mod error;
pub mod gates;
pub mod io;
pub mod iontrap;
pub mod linalg;
pub mod synthesis;
pub mod system;

pub use circuit::{Circuit, Gate, GateCounts, SynthesisReport};
pub use error::{Error, Result};
pub use gates::{Completion, LocalGate, PdSpec, XdSpec, ZdSpec};
pub use linalg::{ComplexMatrix, StateVector};
pub use synthesis::{synthesize_unitary, SynthesisOptions};
pub use system::QuditSystem;
