//! Pulse-level realization of the gates on trapped ions.
//!
//! Units: hbar = 1, all frequencies angular, times in their reciprocal unit.

mod config;
mod hamiltonian;
mod phase;
mod protocol;
mod solve;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{LevelScheme, TrapConfig, ETA_WARN};
pub use hamiltonian::{
    assemble, conserved_number, evolve, hamiltonian_u, hamiltonian_v, segment_hamiltonian,
    segment_transitions, Drive, PhononOp, Space, HERMITIAN_TOL,
};
pub use phase::{detuning_for_phase, two_pi_phase_pulse, PhasePulse};
pub use protocol::{gamma2_protocol, ProtocolResult, TargetGate, LEAKAGE_TOL};
pub use solve::{
    solve_z2_controls, solve_z3_controls, solve_z_controls, solve_zd_controls, ControlOptions,
    Method, ZSolution, EPS_DEG,
};

/// Interaction picture of a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interaction {
    /// Resonant carrier at a field antinode.
    V,
    /// Upper sideband at a node: internal raise with phonon creation.
    #[serde(rename = "U+")]
    UPlus,
    /// Lower sideband at a node: internal raise with phonon annihilation.
    #[serde(rename = "U-")]
    UMinus,
}

impl Interaction {
    /// Standing-wave phase the interaction requires.
    pub fn sw_phase(self) -> f64 {
        match self {
            Interaction::V => 0.0,
            _ => FRAC_PI_2,
        }
    }
}

/// Which set of transitions a segment drives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// Neighbouring computational levels, `d - 1` lasers.
    #[default]
    Ladder,
    /// Each computational level to its auxiliary partner, `d` lasers.
    Partner,
    /// `|d-1>` to the shelf level, one laser.
    Shelf,
}

/// A constant-amplitude drive of fixed duration on one ion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub interaction: Interaction,
    #[serde(default)]
    pub ion: usize,
    #[serde(default)]
    pub coupling: Coupling,
    pub rabi: Vec<C64>,
    pub t: f64,
    pub sw_phase: f64,
    /// Detuning of the upper levels; only the shelf drive uses it.
    #[serde(default)]
    pub detuning: f64,
}

impl PulseSegment {
    pub fn new(interaction: Interaction, coupling: Coupling, ion: usize, rabi: Vec<C64>, t: f64) -> Self {
        Self {
            interaction,
            ion,
            coupling,
            rabi,
            t,
            sw_phase: interaction.sw_phase(),
            detuning: 0.0,
        }
    }

    /// A zero-duration carrier segment on the ladder.
    pub fn idle(d: usize) -> Self {
        Self::new(Interaction::V, Coupling::Ladder, 0, vec![C64::new(0.0, 0.0); d - 1], 0.0)
    }

    /// The same drive with every Rabi frequency negated: its propagator is
    /// the inverse of the original.
    pub fn reversed(&self) -> Self {
        let mut seg = self.clone();
        seg.rabi.iter_mut().for_each(|w| *w = -*w);
        seg.detuning = -seg.detuning;
        seg
    }

    pub fn validate(&self, scheme: &LevelScheme) -> Result<()> {
        let expected = segment_transitions(scheme, self.coupling).len();
        if self.rabi.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: format!("{expected} Rabi frequencies"),
                found: format!("{}", self.rabi.len()),
            });
        }
        if (self.sw_phase - self.interaction.sw_phase()).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "{:?} needs standing-wave phase {}, got {}",
                self.interaction,
                self.interaction.sw_phase(),
                self.sw_phase
            )));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::Domain(format!("segment duration {} is not valid", self.t)));
        }
        if !self.detuning.is_finite() || self.detuning != 0.0 && self.coupling != Coupling::Shelf {
            return Err(Error::Domain("detuning is only supported on the shelf drive".into()));
        }
        if self.rabi.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::Domain("Rabi frequencies must be finite".into()));
        }
        Ok(())
    }
}

/// An ordered pulse sequence together with the hardware it targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub d: usize,
    pub scheme: LevelScheme,
    pub trap: TrapConfig,
    pub segments: Vec<PulseSegment>,
    /// Infidelity left by the solve that produced the program, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl PulseProgram {
    pub fn validate(&self) -> Result<()> {
        if self.scheme.d() != self.d {
            return Err(Error::ShapeMismatch {
                expected: format!("scheme for d={}", self.d),
                found: format!("d={}", self.scheme.d()),
            });
        }
        self.scheme.validate()?;
        self.trap.validate(self.d)?;
        for seg in &self.segments {
            seg.validate(&self.scheme)?;
            if seg.ion >= self.trap.ions {
                return Err(Error::Domain(format!(
                    "segment addresses ion {} of {}",
                    seg.ion, self.trap.ions
                )));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.t).sum()
    }
}
