//! Circuit representation, execution and verification.
//!
//! Gates act on a register of `n` computational qudits followed by `aux`
//! ancilla qudits (the ancillas take the least significant digits). The gate
//! list is applied front to back.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{check_support, LocalGate};
use crate::linalg::{equal_up_to_global_phase, ComplexMatrix, StateVector, ZERO};
use crate::system::QuditSystem;

/// Largest register dimension `circuit_to_matrix` will build by default.
pub const DEFAULT_MAX_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Local {
        target: usize,
        gate: LocalGate,
    },
    /// Two-qudit controlled gate, fires when `control` is `|d-1>`.
    Controlled2 {
        control: usize,
        target: usize,
        gate: LocalGate,
    },
    /// Multi-controlled gate; only present before lowering.
    ControlledN {
        controls: Vec<usize>,
        target: usize,
        gate: LocalGate,
    },
}

impl Gate {
    /// Picks the narrowest variant for the given number of controls.
    pub fn controlled(controls: &[usize], target: usize, gate: LocalGate) -> Self {
        match controls {
            [] => Gate::Local { target, gate },
            [c] => Gate::Controlled2 {
                control: *c,
                target,
                gate,
            },
            _ => Gate::ControlledN {
                controls: controls.to_vec(),
                target,
                gate,
            },
        }
    }

    pub fn target(&self) -> usize {
        match self {
            Gate::Local { target, .. }
            | Gate::Controlled2 { target, .. }
            | Gate::ControlledN { target, .. } => *target,
        }
    }

    pub fn controls(&self) -> &[usize] {
        match self {
            Gate::Local { .. } => &[],
            Gate::Controlled2 { control, .. } => std::slice::from_ref(control),
            Gate::ControlledN { controls, .. } => controls,
        }
    }

    pub fn local(&self) -> &LocalGate {
        match self {
            Gate::Local { gate, .. }
            | Gate::Controlled2 { gate, .. }
            | Gate::ControlledN { gate, .. } => gate,
        }
    }

    pub fn inverse(&self) -> Self {
        Gate::controlled(self.controls(), self.target(), self.local().inverse())
    }

    /// Kind tag: `Z`, `C2X`, `CNP`, ...
    pub fn kind(&self) -> String {
        let prefix = match self {
            Gate::Local { .. } => "",
            Gate::Controlled2 { .. } => "C2",
            Gate::ControlledN { .. } => "CN",
        };
        format!("{prefix}{}", self.local().tag())
    }

    pub fn validate(&self, register: &QuditSystem) -> Result<()> {
        check_support(register.n(), self.controls(), self.target())?;
        self.local().validate(register.d())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    sys: QuditSystem,
    ancillas: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(sys: QuditSystem, ancillas: usize) -> Self {
        Self {
            sys,
            ancillas,
            gates: Vec::new(),
        }
    }

    /// Build and validate every gate against the extended register.
    pub fn with_gates(sys: QuditSystem, ancillas: usize, gates: Vec<Gate>) -> Result<Self> {
        let circuit = Self {
            sys,
            ancillas,
            gates,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn validate(&self) -> Result<()> {
        let register = self.register()?;
        self.gates.iter().try_for_each(|g| g.validate(&register))
    }

    pub fn sys(&self) -> QuditSystem {
        self.sys
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Computational qudits plus ancillas.
    pub fn register(&self) -> Result<QuditSystem> {
        self.sys.extended(self.ancillas)
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) {
        self.gates.extend(gates);
    }

    /// Append another circuit's gates, widening the ancilla space if needed.
    pub fn append(&mut self, other: &Circuit) {
        self.ancillas = self.ancillas.max(other.ancillas);
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn set_ancillas(&mut self, ancillas: usize) {
        self.ancillas = ancillas;
    }

    /// Reversed order, each gate inverted.
    pub fn inverse(&self) -> Self {
        Self {
            sys: self.sys,
            ancillas: self.ancillas,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.kind()).or_insert(0) += 1;
        }
        GateCounts(counts)
    }

    /// Precompute the local matrix of every gate.
    pub fn compile(&self) -> Result<CompiledCircuit> {
        self.validate()?;
        let register = self.register()?;
        let ops = self
            .gates
            .iter()
            .map(|g| {
                Ok(CompiledGate {
                    controls: g.controls().to_vec(),
                    target: g.target(),
                    matrix: g.local().matrix(register.d())?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(CompiledCircuit { register, ops })
    }
}

/// Gate tallies keyed by kind tag.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateCounts(pub BTreeMap<String, usize>);

impl GateCounts {
    pub fn get(&self, kind: &str) -> usize {
        self.0.get(kind).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn local(&self) -> usize {
        self.get("Z") + self.get("X") + self.get("P")
    }

    pub fn two_qudit(&self) -> usize {
        self.get("C2Z") + self.get("C2X") + self.get("C2P")
    }

    pub fn multi_controlled(&self) -> usize {
        self.get("CNZ") + self.get("CNX") + self.get("CNP")
    }
}

#[derive(Clone, Debug)]
struct CompiledGate {
    controls: Vec<usize>,
    target: usize,
    matrix: ComplexMatrix,
}

/// A circuit with gate matrices resolved, ready for repeated execution.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    register: QuditSystem,
    ops: Vec<CompiledGate>,
}

impl CompiledCircuit {
    pub fn register(&self) -> QuditSystem {
        self.register
    }

    /// Run every gate over `amps` in place.
    pub fn run_in_place(&self, amps: &mut [C64]) -> Result<()> {
        if amps.len() != self.register.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("state of dimension {}", self.register.dim()),
                found: format!("{}", amps.len()),
            });
        }
        let mut scratch = vec![ZERO; self.register.d()];
        for op in &self.ops {
            apply_local(amps, &self.register, &op.controls, op.target, &op.matrix, &mut scratch);
        }
        Ok(())
    }

    pub fn run(&self, state: &StateVector) -> Result<StateVector> {
        let mut amps = state.amplitudes().to_vec();
        self.run_in_place(&mut amps)?;
        Ok(StateVector::new(amps))
    }
}

/// Apply a controlled local matrix over strided amplitude groups.
fn apply_local(
    amps: &mut [C64],
    register: &QuditSystem,
    controls: &[usize],
    target: usize,
    matrix: &ComplexMatrix,
    scratch: &mut [C64],
) {
    let d = register.d();
    let stride = register.stride(target);
    let block = stride * d;
    let dim = amps.len();
    let control_strides: Vec<usize> = controls.iter().map(|&c| register.stride(c)).collect();
    let mut hi = 0;
    while hi < dim {
        for lo in 0..stride {
            let base = hi + lo;
            if !control_strides.iter().all(|&s| (base / s) % d == d - 1) {
                continue;
            }
            for (t, slot) in scratch.iter_mut().enumerate() {
                *slot = amps[base + t * stride];
            }
            for t_out in 0..d {
                let row = matrix.row(t_out);
                amps[base + t_out * stride] = row.iter().zip(scratch.iter()).map(|(a, b)| a * b).sum();
            }
        }
        hi += block;
    }
}

/// Apply one gate to a state on `register` (computational qudits plus ancillas).
pub fn apply_gate(state: &StateVector, gate: &Gate, register: &QuditSystem) -> Result<StateVector> {
    if state.dim() != register.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("state of dimension {}", register.dim()),
            found: format!("{}", state.dim()),
        });
    }
    gate.validate(register)?;
    let matrix = gate.local().matrix(register.d())?;
    let mut amps = state.amplitudes().to_vec();
    let mut scratch = vec![ZERO; register.d()];
    apply_local(&mut amps, register, gate.controls(), gate.target(), &matrix, &mut scratch);
    Ok(StateVector::new(amps))
}

/// Full matrix of the circuit on its extended register.
pub fn circuit_to_matrix(circuit: &Circuit, max_dim: usize) -> Result<ComplexMatrix> {
    let register = circuit.register()?;
    let dim = register.dim();
    if dim > max_dim {
        return Err(Error::DimensionCap { dim, cap: max_dim });
    }
    let compiled = circuit.compile()?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut amps = vec![ZERO; dim];
    for k in 0..dim {
        amps.iter_mut().for_each(|z| *z = ZERO);
        amps[k] = crate::linalg::ONE;
        compiled.run_in_place(&mut amps)?;
        out.set_column(k, &amps);
    }
    Ok(out)
}

/// Outcome of checking a circuit against a target unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    /// `theta` with `e^{i theta} U ~ circuit`.
    pub global_phase: f64,
    pub max_deviation: f64,
    pub tol: f64,
    pub passed: bool,
    pub counts: GateCounts,
    /// Number of ancilla qudits `r`.
    pub r: usize,
    /// Largest population left outside the ancilla-zero subspace.
    pub residual: f64,
}

/// Restricted operator of a circuit on the ancilla-`|0..0>` subspace, plus the
/// worst leaked population over computational basis inputs.
pub fn restricted_operator(circuit: &Circuit) -> Result<(ComplexMatrix, f64)> {
    let n_dim = circuit.sys().dim();
    let register = circuit.register()?;
    let aux_dim = register.dim() / n_dim;
    let compiled = circuit.compile()?;
    let mut out = ComplexMatrix::zeros(n_dim, n_dim);
    let mut amps = vec![ZERO; register.dim()];
    let mut residual = 0.0f64;
    for k in 0..n_dim {
        amps.iter_mut().for_each(|z| *z = ZERO);
        amps[k * aux_dim] = crate::linalg::ONE;
        compiled.run_in_place(&mut amps)?;
        let mut kept = 0.0;
        for j in 0..n_dim {
            let z = amps[j * aux_dim];
            out[(j, k)] = z;
            kept += z.norm_sqr();
        }
        residual = residual.max((1.0 - kept).max(0.0));
    }
    Ok((out, residual))
}

/// Compare a circuit with `u` up to one global phase on the ancilla-zero
/// subspace. Passing also requires the ancillas to come back within `tol`.
pub fn verify_synthesis(u: &ComplexMatrix, circuit: &Circuit, tol: f64) -> Result<SynthesisReport> {
    let n_dim = circuit.sys().dim();
    if (u.rows(), u.cols()) != (n_dim, n_dim) {
        return Err(Error::ShapeMismatch {
            expected: format!("{n_dim}x{n_dim}"),
            found: format!("{}x{}", u.rows(), u.cols()),
        });
    }
    let (restricted, residual) = restricted_operator(circuit)?;
    let cmp = equal_up_to_global_phase(u, &restricted, tol)?;
    Ok(SynthesisReport {
        global_phase: cmp.phase,
        max_deviation: cmp.max_deviation,
        tol,
        passed: cmp.matches && residual <= tol,
        counts: circuit.gate_counts(),
        r: circuit.ancillas(),
        residual,
    })
}
