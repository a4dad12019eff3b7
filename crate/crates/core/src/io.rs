//! JSON documents for unitaries, circuits, pulse programs and reports.
//!
//! Complex numbers are `[re, im]` pairs. Floats are written in shortest
//! round-trip form, so every document reloads bit-for-bit.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{Completion, LocalGate, PdSpec, XdSpec, ZdSpec};
use crate::iontrap::PulseProgram;
use crate::linalg::ComplexMatrix;
use crate::system::QuditSystem;

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryDoc {
    d: usize,
    n: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Parse a unitary document; the matrix must be `d^n x d^n`. Unitarity is
/// left to the consumer.
pub fn parse_unitary(text: &str) -> Result<(QuditSystem, ComplexMatrix)> {
    let doc: UnitaryDoc = serde_json::from_str(text)?;
    let sys = QuditSystem::new(doc.d, doc.n).map_err(|e| Error::Parse(e.to_string()))?;
    let dim = sys.dim();
    if doc.matrix.len() != dim || doc.matrix.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!(
            "matrix must be {dim}x{dim} for d={}, n={}",
            doc.d, doc.n
        )));
    }
    let rows: Vec<Vec<C64>> = doc
        .matrix
        .into_iter()
        .map(|r| r.into_iter().map(complex).collect())
        .collect();
    Ok((sys, ComplexMatrix::from_rows(&rows)?))
}

pub fn unitary_to_json(sys: QuditSystem, u: &ComplexMatrix) -> Result<String> {
    if u.rows() != sys.dim() || u.cols() != sys.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0}", sys.dim()),
            found: format!("{}x{}", u.rows(), u.cols()),
        });
    }
    let doc = UnitaryDoc {
        d: sys.d(),
        n: sys.n(),
        matrix: (0..u.rows())
            .map(|i| u.row(i).iter().copied().map(pair).collect())
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    adjoint: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    completion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    kind: String,
    target: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    controls: Vec<usize>,
    params: ParamsDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    d: usize,
    n: usize,
    aux: usize,
    gates: Vec<GateDoc>,
}

fn local_to_doc(gate: &LocalGate) -> ParamsDoc {
    match gate {
        LocalGate::Z(z) => ParamsDoc {
            coefficients: Some(z.coefficients().iter().copied().map(pair).collect()),
            adjoint: z.adjoint,
            completion: (z.completion == Completion::Reversed).then(|| "reversed".to_string()),
            ..ParamsDoc::default()
        },
        LocalGate::X(x) => ParamsDoc {
            phi: Some(x.phi()),
            ..ParamsDoc::default()
        },
        LocalGate::P(p) => ParamsDoc {
            levels: Some([p.p(), p.q()]),
            ..ParamsDoc::default()
        },
    }
}

fn local_from_doc(tag: char, params: ParamsDoc) -> Result<LocalGate> {
    let unexpected = |what: &str| Error::Parse(format!("{what} is not a parameter of a {tag} gate"));
    match tag {
        'Z' => {
            if params.phi.is_some() || params.levels.is_some() {
                return Err(unexpected("phi/levels"));
            }
            let coeffs = params
                .coefficients
                .ok_or_else(|| Error::Parse("Z gate needs coefficients".into()))?;
            let mut spec = ZdSpec::new(coeffs.into_iter().map(complex).collect())
                .map_err(|e| Error::Parse(e.to_string()))?;
            spec.adjoint = params.adjoint;
            spec.completion = match params.completion.as_deref() {
                None | Some("canonical") => Completion::Canonical,
                Some("reversed") => Completion::Reversed,
                Some(other) => return Err(Error::Parse(format!("unknown completion {other:?}"))),
            };
            Ok(LocalGate::Z(spec))
        }
        'X' => {
            if params.coefficients.is_some() || params.levels.is_some() || params.adjoint || params.completion.is_some() {
                return Err(unexpected("coefficients/levels/adjoint/completion"));
            }
            let phi = params.phi.ok_or_else(|| Error::Parse("X gate needs phi".into()))?;
            Ok(LocalGate::X(XdSpec::new(phi)))
        }
        'P' => {
            if params.coefficients.is_some() || params.phi.is_some() || params.adjoint || params.completion.is_some() {
                return Err(unexpected("coefficients/phi/adjoint/completion"));
            }
            let [p, q] = params
                .levels
                .ok_or_else(|| Error::Parse("P gate needs levels".into()))?;
            Ok(LocalGate::P(PdSpec::new(p, q).map_err(|e| Error::Parse(e.to_string()))?))
        }
        _ => Err(Error::Parse(format!("unknown gate tag {tag:?}"))),
    }
}

pub fn circuit_to_json(circuit: &Circuit) -> Result<String> {
    let sys = circuit.sys();
    let doc = CircuitDoc {
        d: sys.d(),
        n: sys.n(),
        aux: circuit.ancillas(),
        gates: circuit
            .gates()
            .iter()
            .map(|g| GateDoc {
                kind: g.kind(),
                target: g.target(),
                controls: g.controls().to_vec(),
                params: local_to_doc(g.local()),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parse and validate a circuit document. The `kind` prefix must agree with
/// the number of controls.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let doc: CircuitDoc = serde_json::from_str(text)?;
    let sys = QuditSystem::new(doc.d, doc.n).map_err(|e| Error::Parse(e.to_string()))?;
    let mut gates = Vec::with_capacity(doc.gates.len());
    for (i, g) in doc.gates.into_iter().enumerate() {
        let tag = g
            .kind
            .chars()
            .last()
            .ok_or_else(|| Error::Parse(format!("gate {i}: empty kind")))?;
        let local = local_from_doc(tag, g.params).map_err(|e| Error::Parse(format!("gate {i}: {e}")))?;
        let gate = Gate::controlled(&g.controls, g.target, local);
        if gate.kind() != g.kind {
            return Err(Error::Parse(format!(
                "gate {i}: kind {:?} does not match {} controls",
                g.kind,
                g.controls.len()
            )));
        }
        gates.push(gate);
    }
    Circuit::with_gates(sys, doc.aux, gates).map_err(|e| Error::Parse(e.to_string()))
}

pub fn pulse_program_to_json(program: &PulseProgram) -> Result<String> {
    Ok(serde_json::to_string_pretty(program)?)
}

pub fn parse_pulse_program(text: &str) -> Result<PulseProgram> {
    let program: PulseProgram = serde_json::from_str(text)?;
    program.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(program)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientsDoc {
    coefficients: Vec<[f64; 2]>,
}

/// `{"coefficients": [[re, im], ...]}`, normalized within `1e-10`.
pub fn parse_coefficients(text: &str) -> Result<Vec<C64>> {
    let doc: CoefficientsDoc = serde_json::from_str(text)?;
    let coeffs: Vec<C64> = doc.coefficients.into_iter().map(complex).collect();
    ZdSpec::new(coeffs.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(coeffs)
}

pub fn coefficients_to_json(coeffs: &[C64]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CoefficientsDoc {
        coefficients: coeffs.iter().copied().map(pair).collect(),
    })?)
}

/// Any serializable report as pretty JSON.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}
