//! Controlled gate between two ions through the shared phonon mode.
//!
//! Ion 0 is the control, ion 1 the target, and the trap starts in its ground
//! state. Every transfer pulse is a pi-pulse whose laser phase makes the
//! transfer amplitude exactly 1, so the reversal cancels it identically.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::config::{LevelScheme, TrapConfig};
use super::hamiltonian::{evolve, segment_hamiltonian, Space};
use super::phase::detuning_for_phase;
use super::solve::{solve_z_controls, ControlOptions};
use super::{Coupling, Interaction, PulseProgram, PulseSegment};
use crate::error::{Error, Result};
use crate::linalg::{wrap_phase, ComplexMatrix, StateVector, I, ZERO};

/// Largest population allowed outside the computational subspace, and at
/// the phonon cutoff at any stage boundary.
pub const LEAKAGE_TOL: f64 = 1e-10;

const CONTROL: usize = 0;
const TARGET: usize = 1;

/// Single-qudit gate applied to the target when the control is in `|d-1>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetGate {
    /// Maps the given superposition onto `|d-1>`.
    Z { coefficients: Vec<C64> },
    /// Phase `phi` on `|d-1>`.
    X { phi: f64 },
}

#[derive(Clone, Debug)]
pub struct ProtocolResult {
    pub program: PulseProgram,
    /// Propagator of each segment on control (x) target (x) trap.
    pub stages: Vec<ComplexMatrix>,
    pub operator: ComplexMatrix,
    /// `operator` on computational (x) computational (x) trap ground state,
    /// indexed `control * d + target`.
    pub restricted: ComplexMatrix,
    /// Gate the target stage realizes on the computational levels.
    pub y_realized: ComplexMatrix,
    /// Worst population that leaves the computational subspace.
    pub leakage: f64,
    /// Worst population at the phonon cutoff after any segment.
    pub cutoff_population: f64,
    /// Infidelity of the carrier solve behind a `Z` gate (0 otherwise).
    pub control_infidelity: f64,
}

impl ProtocolResult {
    pub fn space(&self) -> Space {
        protocol_space(&self.program.scheme, &self.program.trap)
    }
}

fn protocol_space(scheme: &LevelScheme, trap: &TrapConfig) -> Space {
    Space {
        levels: scheme.levels(),
        ions: 2,
        phonons: trap.n_max + 1,
    }
}

/// Sideband pi-pulse on the partner transitions of `ion`, with the laser
/// phase set so that each transfer amplitude is `+1`.
fn sideband_transfer(trap: &TrapConfig, interaction: Interaction, ion: usize, active: &[bool], omega_max: f64) -> PulseSegment {
    let g_min = trap
        .eta_partner
        .iter()
        .zip(active)
        .filter(|(_, &on)| on)
        .map(|(&e, _)| trap.coupling(e))
        .fold(f64::INFINITY, f64::min);
    let t = FRAC_PI_2 / (g_min * omega_max);
    let rabi = trap
        .eta_partner
        .iter()
        .zip(active)
        .map(|(&e, &on)| if on { I * (FRAC_PI_2 / (trap.coupling(e) * t)) } else { ZERO })
        .collect();
    PulseSegment::new(interaction, Coupling::Partner, ion, rabi, t)
}

/// Carrier pi-pulse `|aux_j> -> |j>` with amplitude `+1`.
fn carrier_return(active: &[bool], ion: usize, omega_max: f64) -> PulseSegment {
    let rabi = active
        .iter()
        .map(|&on| if on { I * omega_max } else { ZERO })
        .collect();
    PulseSegment::new(Interaction::V, Coupling::Partner, ion, rabi, FRAC_PI_2 / omega_max)
}

/// Detuned 2pi-pulse on the target shelf imprinting `phi` on `|d-1>`;
/// `None` when `phi` is a multiple of 2pi.
fn phase_segment(phi: f64, omega_max: f64) -> Result<Option<PulseSegment>> {
    if wrap_phase(phi).abs() < 1e-14 {
        return Ok(None);
    }
    let detuning = detuning_for_phase(phi, omega_max)?;
    let generalized = (omega_max * omega_max + detuning * detuning / 4.0).sqrt();
    let mut seg = PulseSegment::new(
        Interaction::V,
        Coupling::Shelf,
        TARGET,
        vec![C64::new(omega_max, 0.0)],
        std::f64::consts::PI / generalized,
    );
    seg.detuning = detuning;
    Ok(Some(seg))
}

/// Propagator of `segments` on a single ion, restricted to its
/// computational levels.
fn single_ion_gate(scheme: &LevelScheme, trap: &TrapConfig, segments: &[PulseSegment]) -> Result<ComplexMatrix> {
    let d = scheme.d();
    let space = Space {
        levels: scheme.levels(),
        ions: 1,
        phonons: 1,
    };
    let mut total = ComplexMatrix::identity(space.dim());
    for seg in segments {
        let mut local = seg.clone();
        local.ion = 0;
        let u = evolve(&segment_hamiltonian(scheme, trap, &local, space)?, seg.t)?;
        total = u.matmul(&total)?;
    }
    let mut y = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            y[(i, j)] = total[(i, j)];
        }
    }
    Ok(y)
}

/// Simulate the five-stage controlled-`Y` protocol.
///
/// Stages: sideband transfer of every control level but `|d-1>` to its
/// partner with one phonon; carrier return of those partners; sideband
/// transfer of the target to its partners that absorbs the phonon; `Y` on
/// the target computational levels; the first three stages undone in reverse.
pub fn gamma2_protocol(
    scheme: &LevelScheme,
    trap: &TrapConfig,
    gate: &TargetGate,
    opts: &ControlOptions,
) -> Result<ProtocolResult> {
    let d = scheme.d();
    scheme.validate()?;
    trap.validate(d)?;
    if !scheme.is_zigzag() {
        return Err(Error::Unsupported("carrier solutions need the zig-zag ladder".into()));
    }
    if trap.ions < 2 {
        return Err(Error::Unsupported("the protocol needs two ions".into()));
    }
    if trap.n_max < 2 {
        return Err(Error::Domain("the protocol needs a phonon cutoff n_max >= 2".into()));
    }
    let omega = opts.omega_max;
    let mut control_infidelity = 0.0;
    let mut target_stage = Vec::new();
    match gate {
        TargetGate::Z { coefficients } => {
            if coefficients.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: format!("{d} coefficients"),
                    found: format!("{}", coefficients.len()),
                });
            }
            let sol = solve_z_controls(coefficients, opts)?;
            if !sol.converged(opts.target_infidelity) {
                return Err(Error::NonConvergence {
                    infidelity: sol.infidelity,
                });
            }
            control_infidelity = sol.infidelity;
            let mut carrier = sol.segment.clone();
            carrier.ion = TARGET;
            if carrier.t > 0.0 {
                target_stage.push(carrier);
            }
            target_stage.extend(phase_segment(-sol.phase, omega)?);
        }
        TargetGate::X { phi } => target_stage.extend(phase_segment(*phi, omega)?),
    }

    let mut control_active = vec![true; d];
    control_active[d - 1] = false;
    let target_active = vec![true; d];
    let forward = [
        sideband_transfer(trap, Interaction::UPlus, CONTROL, &control_active, omega),
        carrier_return(&control_active, CONTROL, omega),
        sideband_transfer(trap, Interaction::UMinus, TARGET, &target_active, omega),
    ];
    let mut segments: Vec<PulseSegment> = forward.to_vec();
    segments.extend(target_stage.iter().cloned());
    segments.extend(forward.iter().rev().map(PulseSegment::reversed));

    let program = PulseProgram {
        d,
        scheme: scheme.clone(),
        trap: trap.clone(),
        segments,
        residual: None,
    };
    program.validate()?;

    let space = protocol_space(scheme, trap);
    let dim = space.dim();
    let stages = program
        .segments
        .iter()
        .map(|seg| evolve(&segment_hamiltonian(scheme, trap, seg, space)?, seg.t))
        .collect::<Result<Vec<_>>>()?;

    let inputs: Vec<usize> = (0..d * d).map(|k| space.index(&[k / d, k % d], 0)).collect();
    let cutoff = trap.n_max;
    let mut cutoff_population: f64 = 0.0;
    for &k in &inputs {
        let mut psi = StateVector::basis(dim, k);
        for u in &stages {
            psi = StateVector::new(u.mul_vec(psi.amplitudes())?);
            let at_cutoff: f64 = (0..dim)
                .filter(|&m| space.phonon(m) == cutoff)
                .map(|m| psi[m].norm_sqr())
                .sum();
            cutoff_population = cutoff_population.max(at_cutoff);
        }
    }
    if cutoff_population > LEAKAGE_TOL {
        return Err(Error::Truncation {
            population: cutoff_population,
        });
    }

    let mut operator = ComplexMatrix::identity(dim);
    for u in &stages {
        operator = u.matmul(&operator)?;
    }
    let mut restricted = ComplexMatrix::zeros(d * d, d * d);
    let mut leakage: f64 = 0.0;
    for (col, &k) in inputs.iter().enumerate() {
        let mut kept = 0.0;
        for (row, &m) in inputs.iter().enumerate() {
            restricted[(row, col)] = operator[(m, k)];
            kept += operator[(m, k)].norm_sqr();
        }
        leakage = leakage.max(1.0 - kept);
    }
    if leakage > LEAKAGE_TOL {
        return Err(Error::Leakage { population: leakage });
    }

    let y_realized = single_ion_gate(scheme, trap, &target_stage)?;
    Ok(ProtocolResult {
        program,
        stages,
        operator,
        restricted,
        y_realized,
        leakage,
        cutoff_population,
        control_infidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{gamma2_matrix, xd_matrix, XdSpec};
    use crate::linalg::{equal_up_to_global_phase, seeded_rng};
    use std::f64::consts::PI;

    fn run(d: usize, gate: TargetGate) -> ProtocolResult {
        let scheme = LevelScheme::zigzag(d).unwrap();
        gamma2_protocol(&scheme, &TrapConfig::standard(d), &gate, &ControlOptions::default()).unwrap()
    }

    #[test]
    fn x_pi_matches_controlled_gate() {
        let res = run(3, TargetGate::X { phi: PI });
        let expected = gamma2_matrix(3, &xd_matrix(3, XdSpec::new(PI)).unwrap()).unwrap();
        let cmp = equal_up_to_global_phase(&expected, &res.restricted, 1e-8).unwrap();
        assert!(cmp.matches, "deviation {:e}", cmp.max_deviation);
        assert!(res.leakage < 1e-10 && res.cutoff_population < 1e-10);
        assert!(res.operator.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn z_gate_branches() {
        let d = 3;
        let coefficients = StateVector::random(d, &mut seeded_rng(4)).into_amplitudes();
        let res = run(d, TargetGate::Z { coefficients: coefficients.clone() });
        let y = &res.y_realized;
        let image = y.mul_vec(&coefficients).unwrap();
        assert!((image[d - 1] - 1.0).norm() < 1e-9);
        for k in 0..d {
            for j in 0..d {
                let col = k * d + j;
                for row in 0..d * d {
                    let expected = if k == d - 1 {
                        if row / d == d - 1 { y[(row % d, j)] } else { ZERO }
                    } else if row == col {
                        C64::new(1.0, 0.0)
                    } else {
                        ZERO
                    };
                    assert!((res.restricted[(row, col)] - expected).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn other_dimensions() {
        for d in [2, 4] {
            let coefficients = StateVector::random(d, &mut seeded_rng(d as u64)).into_amplitudes();
            let res = run(d, TargetGate::Z { coefficients });
            let expected = gamma2_matrix(d, &res.y_realized).unwrap();
            assert!(expected.max_abs_diff(&res.restricted) < 1e-8);
            let res = run(d, TargetGate::X { phi: 0.4 });
            let expected = gamma2_matrix(d, &xd_matrix(d, XdSpec::new(0.4)).unwrap()).unwrap();
            assert!(expected.max_abs_diff(&res.restricted) < 1e-8);
        }
    }

    #[test]
    fn first_two_stages_entangle_control_with_trap() {
        let d = 3;
        let res = run(d, TargetGate::X { phi: PI / 2.0 });
        let space = res.space();
        let mut rng = seeded_rng(8);
        for _ in 0..5 {
            let ctrl = StateVector::random(d, &mut rng);
            let targ = StateVector::random(d, &mut rng);
            let mut input = vec![ZERO; space.dim()];
            let mut expected = vec![ZERO; space.dim()];
            for a in 0..d {
                for b in 0..d {
                    let amp = ctrl[a] * targ[b];
                    input[space.index(&[a, b], 0)] = amp;
                    let n = if a == d - 1 { 0 } else { 1 };
                    expected[space.index(&[a, b], n)] = amp;
                }
            }
            let after = res.stages[1].mul_vec(&res.stages[0].mul_vec(&input).unwrap()).unwrap();
            let overlap: C64 = expected.iter().zip(&after).map(|(e, a)| e.conj() * a).sum();
            assert!(overlap.norm() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn rejects_bad_setups() {
        let scheme = LevelScheme::zigzag(3).unwrap();
        let opts = ControlOptions::default();
        let mut trap = TrapConfig::standard(3);
        trap.n_max = 1;
        assert!(gamma2_protocol(&scheme, &trap, &TargetGate::X { phi: 1.0 }, &opts).is_err());
        let mut trap = TrapConfig::standard(3);
        trap.ions = 1;
        assert!(gamma2_protocol(&scheme, &trap, &TargetGate::X { phi: 1.0 }, &opts).is_err());
        let up = LevelScheme::new(vec![10.0, 11.0], vec![100.0, 101.0, 102.0], 1000.0).unwrap();
        let err = gamma2_protocol(&up, &TrapConfig::standard(3), &TargetGate::X { phi: 1.0 }, &opts);
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }
}
