//! Detuned 2pi-pulse on `|d-1> <-> shelf` as a phase gate on `|d-1>`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use super::hamiltonian::evolve;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePulse {
    /// Phase gained by `|d-1>` relative to untouched levels, in [0, 2pi).
    pub phase: f64,
    /// Duration of one full generalized Rabi cycle.
    pub t: f64,
    /// Population left on the shelf after the pulse.
    pub shelf_population: f64,
}

/// Exact two-level evolution of `|d-1>` and the shelf under a constant
/// drive `omega` detuned by `detuning`, for one generalized Rabi cycle.
pub fn two_pi_phase_pulse(omega: C64, detuning: f64) -> Result<PhasePulse> {
    let generalized = (omega.norm_sqr() + detuning * detuning / 4.0).sqrt();
    if !(generalized > 0.0 && generalized.is_finite()) {
        return Err(Error::Domain("generalized Rabi frequency must be positive".into()));
    }
    let t = PI / generalized;
    let h = ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), -omega.conj()],
        vec![-omega, C64::new(detuning, 0.0)],
    ])?;
    let u = evolve(&h, t)?;
    let mut phase = u[(0, 0)].arg();
    if phase < 0.0 {
        phase += TAU;
    }
    Ok(PhasePulse {
        phase,
        t,
        shelf_population: u[(1, 0)].norm_sqr(),
    })
}

/// Detuning that makes a 2pi-pulse of strength `omega_abs` imprint `phi`.
///
/// The imprinted phase falls monotonically from 2pi to 0 as the detuning
/// runs over the real line, so the root is bracketed and bisected.
pub fn detuning_for_phase(phi: f64, omega_abs: f64) -> Result<f64> {
    if !(omega_abs > 0.0 && omega_abs.is_finite()) {
        return Err(Error::Domain("Rabi frequency must be positive".into()));
    }
    let target = phi.rem_euclid(TAU);
    if target < 1e-12 || TAU - target < 1e-12 {
        return Err(Error::Domain("a zero phase needs no pulse".into()));
    }
    let phase_at = |x: f64| -> Result<f64> {
        Ok(two_pi_phase_pulse(C64::new(omega_abs, 0.0), x * omega_abs)?.phase)
    };
    let mut span = 1.0f64;
    while phase_at(span)? > target || phase_at(-span)? < target {
        span *= 2.0;
        if span > 1e15 {
            return Err(Error::Domain(format!("phase {phi} is out of reach")));
        }
    }
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if phase_at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) * omega_abs)
}
