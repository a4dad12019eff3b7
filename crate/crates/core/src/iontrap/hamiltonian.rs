//! Interaction-picture Hamiltonians (hbar = 1) and their propagators.

use num_complex::Complex64 as C64;

use super::config::{LevelScheme, TrapConfig};
use super::{Coupling, Interaction, PulseSegment};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, ZERO};

/// Relative Hermiticity tolerance accepted by [`evolve`].
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhononOp {
    None,
    Raise,
    Lower,
}

/// Product space of `ions` identical ions with `levels` levels each and a
/// phonon mode truncated to `phonons` Fock states. Phonon number is the
/// fastest-varying index, ion 0 the slowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Space {
    pub levels: usize,
    pub ions: usize,
    pub phonons: usize,
}

impl Space {
    pub fn dim(&self) -> usize {
        self.levels.pow(self.ions as u32) * self.phonons
    }

    pub fn index(&self, levels: &[usize], n: usize) -> usize {
        levels.iter().fold(0, |acc, &l| acc * self.levels + l) * self.phonons + n
    }

    pub fn phonon(&self, k: usize) -> usize {
        k % self.phonons
    }

    pub fn level(&self, k: usize, ion: usize) -> usize {
        let stride = self.levels.pow((self.ions - 1 - ion) as u32) * self.phonons;
        (k / stride) % self.levels
    }

    fn with_level(&self, k: usize, ion: usize, level: usize) -> usize {
        let stride = self.levels.pow((self.ions - 1 - ion) as u32) * self.phonons;
        k - self.level(k, ion) * stride + level * stride
    }

    fn with_phonon(&self, k: usize, n: usize) -> usize {
        k - self.phonon(k) + n
    }
}

/// One driven transition: `coef * |upper><lower| (x) phonon op + h.c.`
#[derive(Clone, Copy, Debug)]
pub struct Drive {
    pub ion: usize,
    pub lower: usize,
    pub upper: usize,
    pub coef: C64,
    pub phonon: PhononOp,
}

/// Assemble a Hamiltonian from drives plus diagonal level energies
/// `(ion, level, energy)`.
pub fn assemble(space: Space, drives: &[Drive], energies: &[(usize, usize, f64)]) -> ComplexMatrix {
    let dim = space.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        for &(ion, level, e) in energies {
            if space.level(k, ion) == level {
                h[(k, k)] += e;
            }
        }
        for dr in drives {
            if dr.coef == ZERO || space.level(k, dr.ion) != dr.lower {
                continue;
            }
            let n = space.phonon(k);
            let (n2, amp) = match dr.phonon {
                PhononOp::None => (n, 1.0),
                PhononOp::Raise if n + 1 < space.phonons => (n + 1, ((n + 1) as f64).sqrt()),
                PhononOp::Lower if n > 0 => (n - 1, (n as f64).sqrt()),
                _ => continue,
            };
            let to = space.with_phonon(space.with_level(k, dr.ion, dr.upper), n2);
            h[(to, k)] += dr.coef * amp;
            h[(k, to)] += dr.coef.conj() * amp;
        }
    }
    h
}

fn check_rabi(rabi: &[C64], expected: usize) -> Result<()> {
    if rabi.len() != expected {
        return Err(Error::ShapeMismatch {
            expected: format!("{expected} Rabi frequencies"),
            found: format!("{}", rabi.len()),
        });
    }
    Ok(())
}

/// Resonant carrier drive on the computational ladder:
/// `-sum_j [Omega_j s_j^dag + Omega_j^* s_j]`, a `d x d` matrix.
pub fn hamiltonian_v(scheme: &LevelScheme, rabi: &[C64]) -> Result<ComplexMatrix> {
    let d = scheme.d();
    check_rabi(rabi, d - 1)?;
    let space = Space {
        levels: d,
        ions: 1,
        phonons: 1,
    };
    let drives: Vec<Drive> = rabi
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            let (lower, upper) = scheme.ladder_ends(j);
            Drive {
                ion: 0,
                lower,
                upper,
                coef: -w,
                phonon: PhononOp::None,
            }
        })
        .collect();
    Ok(assemble(space, &drives, &[]))
}

/// Sideband drive on the ladder, on `internal (x) phonon` with Fock states
/// `0..=n_max`. `raise` selects `s^dag a^dag` (upper sideband) over `s^dag a`.
pub fn hamiltonian_u(
    scheme: &LevelScheme,
    trap: &TrapConfig,
    rabi: &[C64],
    raise: bool,
) -> Result<ComplexMatrix> {
    let d = scheme.d();
    check_rabi(rabi, d - 1)?;
    trap.validate(d)?;
    let space = Space {
        levels: d,
        ions: 1,
        phonons: trap.n_max + 1,
    };
    let op = if raise { PhononOp::Raise } else { PhononOp::Lower };
    let drives: Vec<Drive> = rabi
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            let (lower, upper) = scheme.ladder_ends(j);
            Drive {
                ion: 0,
                lower,
                upper,
                coef: w * trap.coupling(trap.eta[j]),
                phonon: op,
            }
        })
        .collect();
    Ok(assemble(space, &drives, &[]))
}

/// Diagonal operator `height(level) -/+ n` conserved by the upper/lower
/// sideband Hamiltonian; `height` climbs by one along each upward transition.
pub fn conserved_number(scheme: &LevelScheme, n_max: usize, raise: bool) -> ComplexMatrix {
    let d = scheme.d();
    let mut height = vec![0i64; d];
    for j in 0..d - 1 {
        height[j + 1] = height[j] + if scheme.ladder()[j] > 0.0 { 1 } else { -1 };
    }
    let p = n_max + 1;
    let diag: Vec<C64> = (0..d * p)
        .map(|k| {
            let (l, n) = (k / p, (k % p) as i64);
            let v = if raise { height[l] - n } else { height[l] + n };
            C64::new(v as f64, 0.0)
        })
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// `exp(-i H t)` through the eigen-decomposition of the Hermitian `H`.
pub fn evolve(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch {
            expected: "square Hamiltonian".into(),
            found: format!("{}x{}", h.rows(), h.cols()),
        });
    }
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    if t == 0.0 {
        return Ok(ComplexMatrix::identity(h.rows()));
    }
    let (vals, vecs) = hermitian_eigen(h)?;
    let dim = h.rows();
    let phases: Vec<C64> = vals.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
    let mut u = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += vecs[(i, k)] * phases[k] * vecs[(j, k)].conj();
            }
            u[(i, j)] = acc;
        }
    }
    Ok(u)
}

/// Transitions addressed by a segment, as `(lower, upper)` level pairs.
pub fn segment_transitions(scheme: &LevelScheme, coupling: Coupling) -> Vec<(usize, usize)> {
    let d = scheme.d();
    match coupling {
        Coupling::Ladder => (0..d - 1).map(|j| scheme.ladder_ends(j)).collect(),
        Coupling::Partner => (0..d).map(|j| (j, scheme.aux(j))).collect(),
        Coupling::Shelf => vec![(d - 1, scheme.shelf_level())],
    }
}

/// Hamiltonian of one segment acting on the given space.
///
/// `space.levels` must equal the full per-ion level count of `scheme`.
pub fn segment_hamiltonian(
    scheme: &LevelScheme,
    trap: &TrapConfig,
    segment: &PulseSegment,
    space: Space,
) -> Result<ComplexMatrix> {
    segment.validate(scheme)?;
    if space.levels != scheme.levels() || segment.ion >= space.ions {
        return Err(Error::ShapeMismatch {
            expected: format!("{} levels per ion and ion < {}", scheme.levels(), space.ions),
            found: format!("{} levels, ion {}", space.levels, segment.ion),
        });
    }
    let transitions = segment_transitions(scheme, segment.coupling);
    let etas: &[f64] = match segment.coupling {
        Coupling::Ladder => &trap.eta,
        Coupling::Partner => &trap.eta_partner,
        Coupling::Shelf => &[],
    };
    let mut drives = Vec::with_capacity(transitions.len());
    for (k, (&(lower, upper), &w)) in transitions.iter().zip(&segment.rabi).enumerate() {
        let (coef, phonon) = match segment.interaction {
            Interaction::V => (-w, PhononOp::None),
            Interaction::UPlus | Interaction::UMinus => {
                let eta = *etas.get(k).ok_or_else(|| {
                    Error::Unsupported("sideband drive on the shelf transition".into())
                })?;
                let op = if segment.interaction == Interaction::UPlus {
                    PhononOp::Raise
                } else {
                    PhononOp::Lower
                };
                (w * trap.coupling(eta), op)
            }
        };
        drives.push(Drive {
            ion: segment.ion,
            lower,
            upper,
            coef,
            phonon,
        });
    }
    let energies: Vec<(usize, usize, f64)> = if segment.detuning != 0.0 {
        transitions
            .iter()
            .map(|&(_, upper)| (segment.ion, upper, segment.detuning))
            .collect()
    } else {
        Vec::new()
    };
    Ok(assemble(space, &drives, &energies))
}
