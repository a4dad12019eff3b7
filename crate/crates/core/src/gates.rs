//! The elementary gate family: Y2/Z2/X2 for qubits, and Z_d, X_d, P_d with
//! their controlled forms for qudits.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{arg0, wrap_phase, ComplexMatrix, ONE, ZERO};
use crate::system::QuditSystem;

/// Tolerance for the normalization of gate coefficients.
pub const COEFF_TOL: f64 = 1e-10;

/// How the rows of a Z_d matrix orthogonal to the target state are completed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Completion {
    /// Gram-Schmidt over the standard basis in ascending index order.
    #[default]
    Canonical,
    /// Same, in descending index order.
    Reversed,
}

/// Parameters of a Z_d gate: the state it sends to `|d-1>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZdSpec {
    coefficients: Vec<C64>,
    pub completion: Completion,
    /// Apply the inverse transform instead.
    pub adjoint: bool,
}

impl ZdSpec {
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::Domain("Z_d needs at least two coefficients".into()));
        }
        let norm_sqr: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > COEFF_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self {
            coefficients,
            completion: Completion::Canonical,
            adjoint: false,
        })
    }

    pub fn with_completion(mut self, completion: Completion) -> Self {
        self.completion = completion;
        self
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn d(&self) -> usize {
        self.coefficients.len()
    }

    pub fn inverse(&self) -> Self {
        Self {
            adjoint: !self.adjoint,
            ..self.clone()
        }
    }
}

/// Phase advanced on `|d-1>` by X_d, kept in (-pi, pi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XdSpec {
    phi: f64,
}

impl XdSpec {
    pub fn new(phi: f64) -> Self {
        Self {
            phi: wrap_phase(phi),
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Level pair of a transposition, stored with `p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PdSpec {
    p: usize,
    q: usize,
}

impl PdSpec {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == q {
            return Err(Error::Domain(format!("P_d({p},{q}) needs distinct levels")));
        }
        Ok(Self {
            p: p.min(q),
            q: p.max(q),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Z_d coefficients with `c_p = -c_q = 1/sqrt(2)`.
    pub fn z_spec(&self, d: usize) -> Result<ZdSpec> {
        if self.q >= d {
            return Err(Error::Domain(format!("level {} out of range for d={d}", self.q)));
        }
        let mut c = vec![ZERO; d];
        c[self.p] = C64::new(FRAC_1_SQRT_2, 0.0);
        c[self.q] = C64::new(-FRAC_1_SQRT_2, 0.0);
        ZdSpec::new(c)
    }
}

/// A single-qudit gate from the elementary family.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalGate {
    Z(ZdSpec),
    X(XdSpec),
    P(PdSpec),
}

impl LocalGate {
    pub fn matrix(&self, d: usize) -> Result<ComplexMatrix> {
        match self {
            LocalGate::Z(spec) => {
                if spec.d() != d {
                    return Err(Error::ShapeMismatch {
                        expected: format!("{d} coefficients"),
                        found: format!("{}", spec.d()),
                    });
                }
                Ok(zd_matrix(spec))
            }
            LocalGate::X(spec) => xd_matrix(d, *spec),
            LocalGate::P(spec) => pd_matrix(d, *spec),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            LocalGate::Z(spec) => LocalGate::Z(spec.inverse()),
            LocalGate::X(spec) => LocalGate::X(XdSpec::new(-spec.phi())),
            // Z^dag X(pi) Z is Hermitian and unitary
            LocalGate::P(spec) => LocalGate::P(*spec),
        }
    }

    /// One-letter kind tag used in the circuit format.
    pub fn tag(&self) -> char {
        match self {
            LocalGate::Z(_) => 'Z',
            LocalGate::X(_) => 'X',
            LocalGate::P(_) => 'P',
        }
    }

    /// Check that the gate's parameters fit a `d`-level qudit.
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            LocalGate::Z(spec) if spec.d() != d => Err(Error::Domain(format!(
                "Z gate has {} coefficients, qudits have {d} levels",
                spec.d()
            ))),
            LocalGate::P(spec) if spec.q() >= d => Err(Error::Domain(format!(
                "P({},{}) out of range for d={d}",
                spec.p(),
                spec.q()
            ))),
            _ => Ok(()),
        }
    }
}

/// The qubit family `Y2(lambda, nu, phi)`.
pub fn y2_matrix(lambda: f64, nu: f64, phi: f64) -> ComplexMatrix {
    let (s, c) = lambda.sin_cos();
    let rows = vec![
        vec![C64::new(c, 0.0), -C64::from_polar(s, nu)],
        vec![C64::from_polar(s, phi - nu), C64::from_polar(c, phi)],
    ];
    ComplexMatrix::from_rows(&rows).expect("2x2")
}

/// Parameters `(lambda, nu, phi)` of the Y2 member that sends `c0|0> + c1|1>` to `|1>`.
pub fn z2_params(c0: C64, c1: C64) -> Result<(f64, f64, f64)> {
    let norm_sqr = c0.norm_sqr() + c1.norm_sqr();
    if (norm_sqr - 1.0).abs() > COEFF_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let lambda = c1.norm().min(1.0).acos();
    Ok((lambda, arg0(c0 * c1.conj()), arg0(c1.conj())))
}

/// `diag(1, .., 1, e^{i phi})`.
pub fn xd_matrix(d: usize, spec: XdSpec) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::Domain(format!("d={d} must be >= 2")));
    }
    let mut diag = vec![ONE; d];
    diag[d - 1] = C64::from_polar(1.0, spec.phi());
    Ok(ComplexMatrix::from_diagonal(&diag))
}

/// A unitary whose last row is `psi^dag`, so `psi -> |d-1>` exactly.
///
/// The remaining rows are the standard basis vectors, minus the one that
/// overlaps `psi` the most, orthonormalized against `psi` in the order set by
/// `spec.completion`.
pub fn zd_matrix(spec: &ZdSpec) -> ComplexMatrix {
    let psi = spec.coefficients();
    let d = psi.len();
    let skip = psi
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (k, c)| if c.norm() > best.1 { (k, c.norm()) } else { best })
        .0;
    let order: Vec<usize> = match spec.completion {
        Completion::Canonical => (0..d).filter(|&k| k != skip).collect(),
        Completion::Reversed => (0..d).rev().filter(|&k| k != skip).collect(),
    };

    let mut basis: Vec<Vec<C64>> = vec![psi.to_vec()];
    for &k in &order {
        let mut v = vec![ZERO; d];
        v[k] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let overlap: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        basis.push(v);
    }

    let mut z = ComplexMatrix::zeros(d, d);
    for (row, v) in basis[1..].iter().chain(std::iter::once(&basis[0])).enumerate() {
        for (col, x) in v.iter().enumerate() {
            z[(row, col)] = x.conj();
        }
    }
    if spec.adjoint {
        z.dagger()
    } else {
        z
    }
}

/// Level transposition `Z^dag X(pi) Z` built from the Z_d/X_d factors.
pub fn pd_matrix(d: usize, spec: PdSpec) -> Result<ComplexMatrix> {
    let z = zd_matrix(&spec.z_spec(d)?);
    let x = xd_matrix(d, XdSpec::new(PI))?;
    Ok(&(&z.dagger() * &x) * &z)
}

/// Two-qudit gate applying `y` to the second qudit iff the first is `|d-1>`.
pub fn gamma2_matrix(d: usize, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    let sys = QuditSystem::new(d, 2)?;
    gamman_matrix(&sys, &[0], 1, y)
}

/// Apply `y` to `target` iff every qudit in `controls` is `|d-1>`.
pub fn gamman_matrix(
    sys: &QuditSystem,
    controls: &[usize],
    target: usize,
    y: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let d = sys.d();
    if (y.rows(), y.cols()) != (d, d) {
        return Err(Error::ShapeMismatch {
            expected: format!("{d}x{d}"),
            found: format!("{}x{}", y.rows(), y.cols()),
        });
    }
    y.check_unitary(crate::linalg::DEFAULT_TOL)?;
    check_support(sys.n(), controls, target)?;
    let dim = sys.dim();
    let stride = sys.stride(target);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        let fires = controls.iter().all(|&c| sys.digit(k, c) == d - 1);
        if !fires {
            out[(k, k)] = ONE;
            continue;
        }
        let t = sys.digit(k, target);
        let base = k - t * stride;
        for t_out in 0..d {
            out[(base + t_out * stride, k)] = y[(t_out, t)];
        }
    }
    Ok(out)
}

/// Indices in range, target not a control, no repeated controls.
pub(crate) fn check_support(n: usize, controls: &[usize], target: usize) -> Result<()> {
    if target >= n {
        return Err(Error::Domain(format!("target {target} out of range for {n} qudits")));
    }
    for (i, &c) in controls.iter().enumerate() {
        if c >= n {
            return Err(Error::Domain(format!("control {c} out of range for {n} qudits")));
        }
        if c == target {
            return Err(Error::Domain(format!("qudit {c} is both control and target")));
        }
        if controls[..i].contains(&c) {
            return Err(Error::Domain(format!("control {c} repeated")));
        }
    }
    Ok(())
}
