//! Decomposition of an arbitrary n-qudit unitary into one-qudit gates and
//! two-qudit controlled gates.
//!
//! The unitary is split into one phase-imprinting factor per eigenvector,
//! `W_m = Z_m^-1 X_m Z_m`, where `Z_m` rotates the eigenvector onto the last
//! basis state and `X_m` is a fully controlled phase gate. `Z_m` is built by
//! repeatedly applying a fully controlled `Z_d` to the last `d` amplitudes and
//! swapping fresh amplitudes into that block. Fully controlled gates are then
//! lowered onto two-qudit gates through a chain of ancilla qudits.

use num_complex::Complex64 as C64;

use crate::circuit::{apply_gate, verify_synthesis, Circuit, Gate, SynthesisReport};
use crate::error::{Error, Result};
use crate::gates::{Completion, LocalGate, PdSpec, XdSpec, ZdSpec};
use crate::linalg::{spectral_decompose, ComplexMatrix, StateVector};
use crate::system::QuditSystem;

/// Amplitudes (and eigenphases) below this are treated as zero.
pub const NEGLIGIBLE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisOptions {
    /// Unitarity tolerance on the input and deviation tolerance on the result.
    pub tol: f64,
    /// Drop factors with vanishing eigenphase and identity Z_d blocks.
    pub prune_identity: bool,
    /// Lower fully controlled gates onto two-qudit gates with ancillas.
    pub lower_to_two_qudit: bool,
    pub completion: Completion,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            prune_identity: true,
            lower_to_two_qudit: true,
            completion: Completion::Canonical,
        }
    }
}

/// Decompose `u` on `sys` and verify the result.
pub fn synthesize_unitary(
    u: &ComplexMatrix,
    sys: QuditSystem,
    opts: &SynthesisOptions,
) -> Result<(Circuit, SynthesisReport)> {
    if opts.tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if (u.rows(), u.cols()) != (sys.dim(), sys.dim()) {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0}", sys.dim()),
            found: format!("{}x{}", u.rows(), u.cols()),
        });
    }
    if opts.lower_to_two_qudit && sys.d() == 2 && sys.n() >= 3 {
        return Err(Error::Unsupported(
            "lowering onto two-qudit gates needs d >= 3 when n >= 3".into(),
        ));
    }
    let spectrum = spectral_decompose(u, opts.tol)?;
    let mut circuit = Circuit::new(sys, 0);
    for (&phase, vector) in spectrum.phases.iter().zip(&spectrum.vectors) {
        if opts.prune_identity && phase.abs() < NEGLIGIBLE {
            continue;
        }
        let factor = build_wm(phase, vector, sys, opts.completion, opts.prune_identity)?;
        if opts.lower_to_two_qudit {
            circuit.append(&lower_circuit(&factor)?);
        } else {
            circuit.append(&factor);
        }
    }
    if opts.lower_to_two_qudit {
        circuit.set_ancillas(ancillas_needed(sys.n(), sys.d())?);
    }
    let report = verify_synthesis(u, &circuit, opts.tol)?;
    Ok((circuit, report))
}

/// Circuit for `W_m`: multiplies `eigvec` by `e^{i phase}` and fixes its
/// orthogonal complement. Fully controlled gates are left unlowered.
pub fn synthesize_wm(
    phase: f64,
    eigvec: &StateVector,
    sys: QuditSystem,
    completion: Completion,
) -> Result<Circuit> {
    build_wm(phase, eigvec, sys, completion, false)
}

fn build_wm(
    phase: f64,
    eigvec: &StateVector,
    sys: QuditSystem,
    completion: Completion,
    prune: bool,
) -> Result<Circuit> {
    let zm = build_zm(eigvec, sys, completion, prune)?;
    let mut circuit = zm.clone();
    circuit.push(Gate::controlled(
        &all_but(sys.n(), sys.n() - 1),
        sys.n() - 1,
        LocalGate::X(XdSpec::new(phase)),
    ));
    circuit.append(&zm.inverse());
    Ok(circuit)
}

/// Circuit mapping `eigvec` onto the last basis state `|N-1>`.
pub fn synthesize_zm(eigvec: &StateVector, sys: QuditSystem, completion: Completion) -> Result<Circuit> {
    build_zm(eigvec, sys, completion, false)
}

fn build_zm(
    eigvec: &StateVector,
    sys: QuditSystem,
    completion: Completion,
    prune: bool,
) -> Result<Circuit> {
    if eigvec.dim() != sys.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("state of dimension {}", sys.dim()),
            found: format!("{}", eigvec.dim()),
        });
    }
    eigvec.check_normalized(1e-10)?;
    let (d, n, big_n) = (sys.d(), sys.n(), sys.dim());
    let controls = all_but(n, n - 1);
    let mut circuit = Circuit::new(sys, 0);
    let mut state = eigvec.clone();

    let absorb = |state: &mut StateVector, circuit: &mut Circuit| -> Result<()> {
        let block = &state.amplitudes()[big_n - d..];
        let norm = block.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < NEGLIGIBLE {
            return Ok(());
        }
        let coeffs: Vec<C64> = block.iter().map(|z| z / norm).collect();
        if prune && (coeffs[d - 1] - 1.0).norm() < 1e-15 {
            return Ok(());
        }
        let spec = ZdSpec::new(coeffs)?.with_completion(completion);
        let gate = Gate::controlled(&controls, n - 1, LocalGate::Z(spec));
        *state = apply_gate(state, &gate, &sys)?;
        circuit.push(gate);
        Ok(())
    };

    absorb(&mut state, &mut circuit)?;
    let pending: Vec<usize> = (0..big_n - d).rev().collect();
    for chunk in pending.chunks(d - 1) {
        let mut sources = chunk.to_vec();
        sources.sort_unstable();
        let mut moved = false;
        for (src, slot) in sources.into_iter().zip(big_n - d..big_n - 1) {
            if state[src].norm() < NEGLIGIBLE {
                continue;
            }
            let swap = synthesize_basis_permutation(&sys.digits(src)?, &sys.digits(slot)?, sys)?;
            for gate in swap.gates() {
                state = apply_gate(&state, gate, &sys)?;
            }
            circuit.append(&swap);
            moved = true;
        }
        if moved {
            absorb(&mut state, &mut circuit)?;
        }
    }
    Ok(circuit)
}

/// Circuit exchanging basis states `|j>` and `|k>` (given as digit strings).
///
/// The exchange walks from `j` to `k` one differing qudit at a time. Each
/// step maps the other qudits to `|d-1>` with local transpositions, applies a
/// transposition to the stepping qudit controlled on all others, and undoes
/// the local transpositions. The walk is then retraced back to its start so
/// the intermediate strings end where they began.
pub fn synthesize_basis_permutation(j: &[usize], k: &[usize], sys: QuditSystem) -> Result<Circuit> {
    let (d, n) = (sys.d(), sys.n());
    sys.index(j)?;
    sys.index(k)?;
    let mut circuit = Circuit::new(sys, 0);
    let diffs: Vec<usize> = (0..n).filter(|&i| j[i] != k[i]).collect();
    if diffs.is_empty() {
        return Ok(circuit);
    }

    // path[t] -> path[t + 1] changes qudit diffs[t]
    let mut path = vec![j.to_vec()];
    for &i in &diffs {
        let mut next = path.last().unwrap().clone();
        next[i] = k[i];
        path.push(next);
    }

    let step = |t: usize, circuit: &mut Circuit| -> Result<()> {
        let i = diffs[t];
        let here = &path[t];
        let convert: Vec<Gate> = (0..n)
            .filter(|&q| q != i && here[q] != d - 1)
            .map(|q| {
                Ok(Gate::Local {
                    target: q,
                    gate: LocalGate::P(PdSpec::new(here[q], d - 1)?),
                })
            })
            .collect::<Result<_>>()?;
        circuit.extend(convert.iter().cloned());
        circuit.push(Gate::controlled(
            &all_but(n, i),
            i,
            LocalGate::P(PdSpec::new(here[i], path[t + 1][i])?),
        ));
        circuit.extend(convert);
        Ok(())
    };

    for t in 0..diffs.len() {
        step(t, &mut circuit)?;
    }
    for t in (0..diffs.len() - 1).rev() {
        step(t, &mut circuit)?;
    }
    Ok(circuit)
}

/// Ancillas needed to lower a gate spanning `span` qudits (controls plus
/// target): `ceil((span - 2) / (d - 2))`, zero for `span <= 2`.
pub fn ancillas_needed(span: usize, d: usize) -> Result<usize> {
    if span <= 2 {
        return Ok(0);
    }
    if d < 3 {
        return Err(Error::Unsupported(format!(
            "ancilla chain needs d >= 3 (got d={d}) for {span}-qudit controlled gates"
        )));
    }
    Ok((span - 2).div_ceil(d - 2))
}

/// Two-qudit realization of "apply `gate` to `target` iff all `controls` are `|d-1>`".
///
/// Ancilla qudits `aux_offset .. aux_offset + r` must start (and end) in
/// `|0>`; `available` bounds how many of them may be used.
pub fn synthesize_gamman(
    d: usize,
    controls: &[usize],
    target: usize,
    gate: LocalGate,
    aux_offset: usize,
    available: usize,
) -> Result<(Vec<Gate>, usize)> {
    if controls.len() <= 1 {
        return Ok((vec![Gate::controlled(controls, target, gate)], 0));
    }
    let r = ancillas_needed(controls.len() + 1, d)?;
    if r > available {
        return Err(Error::Capacity {
            needed: r,
            available,
        });
    }

    let mut chain = Vec::new();
    let mut queue = controls.iter().copied();
    for a in 0..r {
        let ancilla = aux_offset + a;
        let mut feeders: Vec<usize> = Vec::with_capacity(d - 1);
        if a > 0 {
            feeders.push(ancilla - 1);
        }
        feeders.extend(queue.by_ref().take(d - 1 - feeders.len()));
        // 0 -> d-f -> d-f+1 -> ... -> d-1, one step per feeder
        let f = feeders.len();
        let levels: Vec<usize> = std::iter::once(0).chain(d - f..d).collect();
        for (step, &control) in feeders.iter().enumerate() {
            chain.push(Gate::Controlled2 {
                control,
                target: ancilla,
                gate: LocalGate::P(PdSpec::new(levels[step], levels[step + 1])?),
            });
        }
    }
    debug_assert!(queue.next().is_none(), "every control feeds the chain");

    let mut gates = chain.clone();
    gates.push(Gate::Controlled2 {
        control: aux_offset + r - 1,
        target,
        gate,
    });
    gates.extend(chain.into_iter().rev());
    Ok((gates, r))
}

/// Replace every multi-controlled gate with its two-qudit ancilla chain.
/// Ancillas are appended after the computational qudits and reused.
pub fn lower_circuit(circuit: &Circuit) -> Result<Circuit> {
    let sys = circuit.sys();
    let available = ancillas_needed(sys.n(), sys.d()).unwrap_or(0).max(circuit.ancillas());
    let mut out = Circuit::new(sys, circuit.ancillas());
    let mut used = circuit.ancillas();
    for gate in circuit.gates() {
        match gate {
            Gate::ControlledN {
                controls,
                target,
                gate,
            } => {
                let (gates, r) =
                    synthesize_gamman(sys.d(), controls, *target, gate.clone(), sys.n(), available)?;
                used = used.max(r);
                out.extend(gates);
            }
            other => out.push(other.clone()),
        }
    }
    out.set_ancillas(used);
    Ok(out)
}

fn all_but(n: usize, skip: usize) -> Vec<usize> {
    (0..n).filter(|&q| q != skip).collect()
}

/// Register size and relative time cost of a d-level encoding of an
/// N-dimensional space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceEstimate {
    pub big_n: f64,
    pub d: usize,
    /// Qudits needed, `log2 N / log2 d`.
    pub n: f64,
    /// Qubits needed, `log2 N`.
    pub n2: f64,
    /// Advantage of the qudit gate count over the qubit one, `(log2 d)^2`.
    pub time_ratio: f64,
}

pub fn estimate_resources(big_n: f64, d: usize) -> Result<ResourceEstimate> {
    if d < 2 {
        return Err(Error::Domain(format!("d={d} must be >= 2")));
    }
    if !big_n.is_finite() || big_n < 1.0 {
        return Err(Error::Domain(format!("N={big_n} must be finite and >= 1")));
    }
    let n2 = big_n.log2();
    let log_d = (d as f64).log2();
    let n = exact_log(big_n, d).map_or(n2 / log_d, |k| k as f64);
    let n2 = exact_log(big_n, 2).map_or(n2, |k| k as f64);
    Ok(ResourceEstimate {
        big_n,
        d,
        n,
        n2,
        time_ratio: log_d * log_d,
    })
}

/// `Some(k)` when `x == base^k` exactly.
fn exact_log(x: f64, base: usize) -> Option<u32> {
    if x.fract() != 0.0 || x > u64::MAX as f64 {
        return None;
    }
    let mut v = x as u64;
    let base = base as u64;
    let mut k = 0;
    while v > 1 {
        if !v.is_multiple_of(base) {
            return None;
        }
        v /= base;
        k += 1;
    }
    Some(k)
}
