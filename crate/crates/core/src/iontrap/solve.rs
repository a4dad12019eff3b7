//! Carrier controls that steer a given state onto `|d-1>`.
//!
//! All solvers assume the zig-zag level orientation of
//! [`LevelScheme::zigzag`] and return a ladder segment on ion 0.

use argmin::core::{CostFunction, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::BFGS;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::LevelScheme;
use super::hamiltonian::{evolve, hamiltonian_v};
use super::{Coupling, Interaction, PulseSegment};
use crate::error::{Error, Result};
use crate::linalg::{arg0, hermitian_eigen, seeded_rng, ComplexMatrix, I, ZERO};

/// Coefficient moduli below this route the closed forms to the optimizer.
pub const EPS_DEG: f64 = 1e-8;

/// Below this the optimizer stops trying further starts.
const SETTLED: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlOptions {
    /// Largest allowed Rabi modulus; closed forms drive at exactly this.
    pub omega_max: f64,
    pub t_max: f64,
    /// Optimizer starting points (at least 8), tried in order until one settles.
    pub starts: usize,
    pub seed: u64,
    pub target_infidelity: f64,
    pub max_iters: u64,
    pub eps_deg: f64,
}

impl Default for ControlOptions {
    fn default() -> Self {
        Self {
            omega_max: 1.0,
            t_max: 100.0,
            starts: 32,
            seed: 0,
            target_infidelity: 1e-6,
            max_iters: 500,
            eps_deg: EPS_DEG,
        }
    }
}

impl ControlOptions {
    fn validate(&self) -> Result<()> {
        if !(self.omega_max > 0.0 && self.t_max > 0.0 && self.target_infidelity > 0.0) {
            return Err(Error::Domain("control bounds and target must be positive".into()));
        }
        if self.starts < 8 {
            return Err(Error::Domain(format!(
                "optimizer needs at least 8 starts, got {}",
                self.starts
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Target already reached; zero-duration segment.
    Trivial,
    ClosedForm,
    Optimizer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZSolution {
    pub segment: PulseSegment,
    /// `1 - |<d-1|V psi>|^2` from forward evolution of the segment.
    pub infidelity: f64,
    /// `arg <d-1|V psi>`: the propagator realizes `Z_d` followed by this phase.
    pub phase: f64,
    pub method: Method,
    /// Optimizer starts actually run (0 for closed forms).
    pub starts_used: usize,
}

impl ZSolution {
    pub fn converged(&self, target: f64) -> bool {
        self.infidelity < target
    }

    /// Carrier propagator of the segment on the computational levels.
    pub fn propagator(&self) -> Result<ComplexMatrix> {
        let d = self.segment.rabi.len() + 1;
        let scheme = LevelScheme::zigzag(d)?;
        evolve(&hamiltonian_v(&scheme, &self.segment.rabi)?, self.segment.t)
    }
}

fn check_coeffs(coeffs: &[C64]) -> Result<()> {
    if coeffs.len() < 2 {
        return Err(Error::Domain("need at least two coefficients".into()));
    }
    let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(())
}

fn finish(coeffs: &[C64], rabi: Vec<C64>, t: f64, method: Method, starts_used: usize) -> Result<ZSolution> {
    let d = coeffs.len();
    let segment = PulseSegment::new(Interaction::V, Coupling::Ladder, 0, rabi, t);
    let mut sol = ZSolution {
        segment,
        infidelity: 1.0,
        phase: 0.0,
        method,
        starts_used,
    };
    let v = sol.propagator()?;
    let amp: C64 = v.row(d - 1).iter().zip(coeffs).map(|(a, c)| a * c).sum();
    sol.infidelity = (1.0 - amp.norm_sqr()).max(0.0);
    sol.phase = arg0(amp);
    Ok(sol)
}

fn trivial(coeffs: &[C64]) -> Result<ZSolution> {
    finish(coeffs, vec![ZERO; coeffs.len() - 1], 0.0, Method::Trivial, 0)
}

/// Binary closed form: `Omega_01 / Omega = c0^* c1 / (i |c0 c1|)`,
/// `cos(Omega t) = |c1|` on the `sin(Omega t) = +|c0|` branch.
pub fn solve_z2_controls(c0: C64, c1: C64, opts: &ControlOptions) -> Result<ZSolution> {
    let coeffs = [c0, c1];
    check_coeffs(&coeffs)?;
    if c0.norm() <= opts.eps_deg {
        return trivial(&coeffs);
    }
    if c1.norm() <= opts.eps_deg {
        return Err(Error::Degenerate(format!("|c1| = {:e}", c1.norm())));
    }
    let ratio = c0.conj() * c1 / (I * (c0 * c1).norm());
    let angle = c1.norm().min(1.0).acos();
    let omega = opts.omega_max;
    finish(&coeffs, vec![ratio * omega], angle / omega, Method::ClosedForm, 0)
}

/// Ternary closed form on the Lambda system. `C = cos(Omega t)` comes first,
/// then `S = +sqrt(1 - C^2)`, then both Rabi ratios.
pub fn solve_z3_controls(c0: C64, c1: C64, c2: C64, opts: &ControlOptions) -> Result<ZSolution> {
    let coeffs = [c0, c1, c2];
    check_coeffs(&coeffs)?;
    let (m1, m2) = (c1.norm(), c2.norm());
    if m1 <= opts.eps_deg || m2 <= opts.eps_deg {
        return Err(Error::Degenerate(format!("|c1| = {m1:e}, |c2| = {m2:e}")));
    }
    let cos = (m1 * m1 / (1.0 - m2) - 1.0).clamp(-1.0, 1.0);
    if 1.0 - cos <= opts.eps_deg {
        return Err(Error::Degenerate(format!("cos(Omega t) = {cos}")));
    }
    let sin = (1.0 - cos * cos).sqrt();
    let r01 = c0.conj() * c1 / (I * m1 * m1) * (sin / (1.0 - cos));
    let r12 = I * c1 * c2.conj() / (sin * m2);
    let omega = opts.omega_max;
    finish(
        &coeffs,
        vec![r01 * omega, r12 * omega],
        cos.acos() / omega,
        Method::ClosedForm,
        0,
    )
}

/// Infidelity of `exp(-i H(A))` on `psi`, with `H` the carrier Hamiltonian for
/// pulse areas `A_j = x[2j] + i x[2j+1]`.
struct Inversion<'a> {
    scheme: LevelScheme,
    psi: &'a [C64],
}

impl Inversion<'_> {
    fn areas(x: &[f64]) -> Vec<C64> {
        x.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
    }

    fn amplitude(&self, x: &[f64]) -> Result<C64> {
        let d = self.psi.len();
        let v = evolve(&hamiltonian_v(&self.scheme, &Self::areas(x))?, 1.0)?;
        Ok(v.row(d - 1).iter().zip(self.psi).map(|(a, c)| a * c).sum())
    }

    /// Cost and exact gradient through the eigenbasis of `H`.
    fn cost_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let d = self.psi.len();
        let h = hamiltonian_v(&self.scheme, &Self::areas(x))?;
        let (vals, q) = hermitian_eigen(&h)?;
        let ph: Vec<C64> = vals.iter().map(|&e| C64::from_polar(1.0, -e)).collect();
        // amp = sum_k u_k ph_k w_k with u_k = Q[d-1, k], w = Q^dag psi.
        let u: Vec<C64> = (0..d).map(|k| q[(d - 1, k)]).collect();
        let w: Vec<C64> = (0..d)
            .map(|k| (0..d).map(|i| q[(i, k)].conj() * self.psi[i]).sum())
            .collect();
        let amp: C64 = (0..d).map(|k| u[k] * ph[k] * w[k]).sum();
        // d amp = sum_ij E_ij B_ij, B = conj(Q) M Q^T, M_kl = u_k G_kl w_l.
        let mut m = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            for l in 0..d {
                let gap = vals[k] - vals[l];
                let g = if gap.abs() < 1e-9 {
                    -I * C64::from_polar(1.0, -0.5 * (vals[k] + vals[l]))
                } else {
                    (ph[k] - ph[l]) / gap
                };
                m[(k, l)] = u[k] * g * w[l];
            }
        }
        let b = |i: usize, j: usize| -> C64 {
            let mut acc = ZERO;
            for k in 0..d {
                for l in 0..d {
                    acc += q[(i, k)].conj() * m[(k, l)] * q[(j, l)];
                }
            }
            acc
        };
        let mut grad = Vec::with_capacity(x.len());
        for j in 0..d - 1 {
            let (lo, up) = self.scheme.ladder_ends(j);
            let (bul, blu) = (b(up, lo), b(lo, up));
            // dH/dRe A = -(|up><lo| + |lo><up|), dH/dIm A = -i(|up><lo| - |lo><up|).
            let d_re = -(bul + blu);
            let d_im = -I * (bul - blu);
            grad.push(-2.0 * (amp.conj() * d_re).re);
            grad.push(-2.0 * (amp.conj() * d_im).re);
        }
        Ok((1.0 - amp.norm_sqr(), grad))
    }
}

impl CostFunction for Inversion<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(1.0 - self.amplitude(x).map_err(argmin::core::Error::new)?.norm_sqr())
    }
}

impl Gradient for Inversion<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Self::Param) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.cost_and_gradient(x).map_err(argmin::core::Error::new)?.1)
    }
}

fn local_search(problem: Inversion<'_>, x0: Vec<f64>, max_iters: u64) -> Option<(Vec<f64>, f64)> {
    let n = x0.len();
    let eye: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let solver = BFGS::new(MoreThuenteLineSearch::new())
        .with_tolerance_grad(1e-13)
        .ok()?
        .with_tolerance_cost(0.0)
        .ok()?;
    let res = Executor::new(problem, solver)
        .configure(|s| s.param(x0).inv_hessian(eye).max_iters(max_iters).target_cost(1e-15))
        .run()
        .ok()?;
    let state = res.state();
    Some((state.get_best_param()?.clone(), state.get_best_cost()))
}

/// Seeded multi-start BFGS over the complex pulse areas. Starts run in order
/// and stop once one settles; the best result wins, ties by start index.
/// Non-convergence shows up in the returned infidelity.
pub fn solve_zd_controls(coeffs: &[C64], opts: &ControlOptions) -> Result<ZSolution> {
    check_coeffs(coeffs)?;
    opts.validate()?;
    let d = coeffs.len();
    if 1.0 - coeffs[d - 1].norm_sqr() <= 1e-15 {
        return trivial(coeffs);
    }
    let scheme = LevelScheme::zigzag(d)?;
    let mut rng = seeded_rng(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.starts)
        .map(|_| (0..2 * (d - 1)).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let max_area = opts.omega_max * opts.t_max;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut used = 0;
    for x0 in starts {
        used += 1;
        let problem = Inversion {
            scheme: scheme.clone(),
            psi: coeffs,
        };
        let Some((x, cost)) = local_search(problem, x0, opts.max_iters) else {
            continue;
        };
        if Inversion::areas(&x).iter().any(|a| a.norm() > max_area) {
            continue;
        }
        if best.as_ref().is_none_or(|b| cost < b.1) {
            best = Some((x, cost));
        }
        if best.as_ref().is_some_and(|b| b.1 < SETTLED) {
            break;
        }
    }
    let Some((x, _)) = best else {
        let mut sol = trivial(coeffs)?;
        sol.method = Method::Optimizer;
        sol.starts_used = used;
        return Ok(sol);
    };
    let areas = Inversion::areas(&x);
    let t = areas.iter().map(|a| a.norm()).fold(0.0, f64::max) / opts.omega_max;
    let rabi = if t > 0.0 {
        areas.iter().map(|a| a / t).collect()
    } else {
        vec![ZERO; d - 1]
    };
    finish(coeffs, rabi, t, Method::Optimizer, used)
}

/// Closed form where one applies, optimizer otherwise.
pub fn solve_z_controls(coeffs: &[C64], opts: &ControlOptions) -> Result<ZSolution> {
    let closed = match coeffs {
        [c0, c1] => solve_z2_controls(*c0, *c1, opts),
        [c0, c1, c2] => solve_z3_controls(*c0, *c1, *c2, opts),
        _ => Err(Error::Degenerate("no closed form".into())),
    };
    match closed {
        Err(Error::Degenerate(_)) => solve_zd_controls(coeffs, opts),
        other => other,
    }
}
