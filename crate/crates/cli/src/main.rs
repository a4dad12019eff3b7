//! `qudit`: batch front end for synthesis, verification, resource estimates
//! and pulse design.
//!
//! Exit codes: 0 success, 2 parse/input error, 3 verification failure
//! (including a non-unitary input), 4 unsupported configuration,
//! 5 non-convergence.

mod output;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use num_complex::Complex64 as C64;

use qudit::circuit::verify_synthesis;
use qudit::gates::{gamma2_matrix, xd_matrix};
use qudit::io;
use qudit::iontrap::{
    detuning_for_phase, gamma2_protocol, solve_z_controls, two_pi_phase_pulse, ControlOptions,
    Coupling, Interaction, LevelScheme, PulseProgram, PulseSegment, TargetGate, TrapConfig,
};
use qudit::linalg::wrap_phase;
use qudit::synthesis::estimate_resources;
use qudit::{synthesize_unitary, Error, QuditSystem, SynthesisOptions, XdSpec};

use output::{kv, kv_num, write_atomic};

#[derive(Parser)]
#[command(name = "qudit", version, about = "Qudit gate synthesis, verification and ion-trap pulse design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a unitary file into elementary gates.
    Decompose {
        unitary: PathBuf,
        /// Circuit output file.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON copy of the report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Reinterpret the matrix with this qudit dimension.
        #[arg(long)]
        d: Option<usize>,
        /// Reinterpret the matrix with this register size.
        #[arg(long)]
        n: Option<usize>,
        /// Keep multi-controlled gates instead of lowering to two-qudit gates.
        #[arg(long)]
        no_lower: bool,
    },
    /// Check a circuit file against a unitary file.
    Verify {
        unitary: PathBuf,
        circuit: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Qudit count and time ratio for storing an N-dimensional space.
    Estimate {
        /// Hilbert-space dimension N.
        big_n: f64,
        /// Qudit dimensions: `8`, `2..8` or `2,3,5`.
        #[arg(long, default_value = "2..8")]
        d: String,
    },
    /// Solve laser controls for a Z gate (coefficient file) or X gate (spec).
    #[command(group(ArgGroup::new("input").required(true).args(["coeffs", "gate"])))]
    Pulse {
        /// JSON file `{"coefficients": [[re, im], ...]}` for a Z gate.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Phase gate spec such as `X3(pi/2)`.
        #[arg(long)]
        gate: Option<String>,
        /// Pulse-program output file.
        #[arg(long)]
        out: PathBuf,
        /// Build the two-ion controlled version through the phonon bus.
        #[arg(long)]
        controlled: bool,
        /// Success threshold on the reported infidelity or deviation.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Phonon cutoff.
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        /// Optimizer starting points (at least 8).
        #[arg(long, default_value_t = 32)]
        budget: usize,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Unsupported(_) | Error::Capacity { .. } | Error::DimensionCap { .. } => 4,
            Error::NonConvergence { .. } | Error::Degenerate(_) => 5,
            Error::NotUnitary { .. } | Error::Truncation { .. } | Error::Leakage { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    write_atomic(path, contents).map_err(|e| Failure {
        code: 2,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn verdict(passed: bool, code: u8, what: &str) -> Result<(), Failure> {
    kv("passed", passed);
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code,
            message: format!("{what} above tolerance"),
        })
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: "--tol must be positive".into(),
        })
    }
}

fn print_report(report: &qudit::SynthesisReport) {
    kv_num("global_phase", report.global_phase);
    kv_num("max_deviation", report.max_deviation);
    kv_num("ancilla_residual", report.residual);
    kv_num("tol", report.tol);
    kv("ancillas", report.r);
    kv("gates", report.counts.total());
    for (kind, count) in &report.counts.0 {
        kv(&format!("count.{kind}"), count);
    }
}

fn decompose(
    unitary: &Path,
    out: &Path,
    report_path: Option<&Path>,
    tol: f64,
    d: Option<usize>,
    n: Option<usize>,
    no_lower: bool,
) -> Result<(), Failure> {
    check_tol(tol)?;
    let (file_sys, u) = io::parse_unitary(&read(unitary)?)?;
    let sys = QuditSystem::new(d.unwrap_or(file_sys.d()), n.unwrap_or(file_sys.n()))?;
    if sys.dim() != file_sys.dim() {
        return Err(Failure {
            code: 2,
            message: format!("d={} n={} does not fit a {}x{} matrix", sys.d(), sys.n(), u.rows(), u.cols()),
        });
    }
    let opts = SynthesisOptions {
        tol,
        lower_to_two_qudit: !no_lower,
        ..SynthesisOptions::default()
    };
    let (circuit, report) = synthesize_unitary(&u, sys, &opts)?;
    write(out, &io::circuit_to_json(&circuit)?)?;
    if let Some(path) = report_path {
        write(path, &io::to_json(&report)?)?;
    }
    kv("d", sys.d());
    kv("n", sys.n());
    print_report(&report);
    verdict(report.passed, 3, "deviation")
}

fn verify(unitary: &Path, circuit_path: &Path, tol: f64) -> Result<(), Failure> {
    check_tol(tol)?;
    let (sys, u) = io::parse_unitary(&read(unitary)?)?;
    let circuit = io::parse_circuit(&read(circuit_path)?)?;
    if circuit.sys() != sys {
        return Err(Failure {
            code: 2,
            message: format!(
                "circuit is for d={} n={}, unitary for d={} n={}",
                circuit.sys().d(),
                circuit.sys().n(),
                sys.d(),
                sys.n()
            ),
        });
    }
    let report = verify_synthesis(&u, &circuit, tol)?;
    print_report(&report);
    verdict(report.passed, 3, "deviation")
}

fn estimate(big_n: f64, dims: &str) -> Result<(), Failure> {
    let dims = spec::parse_dims(dims).map_err(|message| Failure { code: 2, message })?;
    for d in dims {
        let e = estimate_resources(big_n, d)?;
        println!(
            "d={} n={} n2={} time_ratio={}",
            e.d,
            output::num(e.n),
            output::num(e.n2),
            output::num(e.time_ratio)
        );
    }
    Ok(())
}

struct PulseArgs {
    tol: f64,
    nmax: usize,
    controlled: bool,
    opts: ControlOptions,
}

fn program_for(d: usize, nmax: usize, segments: Vec<PulseSegment>, residual: f64) -> Result<PulseProgram, Failure> {
    let trap = TrapConfig {
        n_max: nmax,
        ..TrapConfig::standard(d)
    };
    Ok(PulseProgram {
        d,
        scheme: LevelScheme::zigzag(d)?,
        trap,
        segments,
        residual: Some(residual),
    })
}

fn pulse_controlled(gate: TargetGate, d: usize, out: &Path, args: &PulseArgs) -> Result<(), Failure> {
    let trap = TrapConfig {
        n_max: args.nmax,
        ..TrapConfig::standard(d)
    };
    let res = gamma2_protocol(&LevelScheme::zigzag(d)?, &trap, &gate, &args.opts)?;
    let expected = match &gate {
        TargetGate::Z { .. } => gamma2_matrix(d, &res.y_realized)?,
        TargetGate::X { phi } => gamma2_matrix(d, &xd_matrix(d, XdSpec::new(*phi))?)?,
    };
    let deviation = expected.max_abs_diff(&res.restricted);
    let mut program = res.program.clone();
    program.residual = Some(deviation);
    write(out, &io::pulse_program_to_json(&program)?)?;
    kv("d", d);
    kv("segments", program.segments.len());
    kv_num("duration", program.duration());
    kv_num("control_infidelity", res.control_infidelity);
    kv_num("max_deviation", deviation);
    kv_num("leakage", res.leakage);
    kv_num("cutoff_population", res.cutoff_population);
    verdict(deviation < args.tol, 3, "deviation")
}

fn pulse_z(coeffs: Vec<C64>, out: &Path, args: &PulseArgs) -> Result<(), Failure> {
    let d = coeffs.len();
    if args.controlled {
        return pulse_controlled(TargetGate::Z { coefficients: coeffs }, d, out, args);
    }
    let sol = solve_z_controls(&coeffs, &args.opts)?;
    let program = program_for(d, args.nmax, vec![sol.segment.clone()], sol.infidelity)?;
    write(out, &io::pulse_program_to_json(&program)?)?;
    kv("d", d);
    kv("method", io::to_json(&sol.method)?.trim_matches('"'));
    kv("starts", sol.starts_used);
    kv_num("duration", sol.segment.t);
    kv_num("phase", sol.phase);
    kv_num("infidelity", sol.infidelity);
    verdict(sol.converged(args.tol), 5, "infidelity")
}

fn pulse_x(d: usize, phi: f64, out: &Path, args: &PulseArgs) -> Result<(), Failure> {
    if args.controlled {
        return pulse_controlled(TargetGate::X { phi }, d, out, args);
    }
    let omega = args.opts.omega_max;
    let (segments, achieved, detuning) = if wrap_phase(phi) == 0.0 {
        (Vec::new(), 0.0, 0.0)
    } else {
        let detuning = detuning_for_phase(phi, omega)?;
        let pulse = two_pi_phase_pulse(C64::new(omega, 0.0), detuning)?;
        let mut seg = PulseSegment::new(Interaction::V, Coupling::Shelf, 0, vec![C64::new(omega, 0.0)], pulse.t);
        seg.detuning = detuning;
        (vec![seg], pulse.phase, detuning)
    };
    let error = wrap_phase(achieved - phi);
    let overlap = (C64::new((d - 1) as f64, 0.0) + C64::from_polar(1.0, error)) / d as f64;
    let infidelity = (1.0 - overlap.norm_sqr()).max(0.0);
    let program = program_for(d, args.nmax, segments, infidelity)?;
    write(out, &io::pulse_program_to_json(&program)?)?;
    kv("d", d);
    kv_num("phi", phi);
    kv_num("detuning", detuning);
    kv_num("phase", achieved);
    kv_num("phase_error", error);
    kv_num("infidelity", infidelity);
    verdict(infidelity < args.tol, 5, "infidelity")
}

#[allow(clippy::too_many_arguments)]
fn pulse(
    coeffs: Option<&Path>,
    gate: Option<&str>,
    out: &Path,
    controlled: bool,
    tol: f64,
    seed: u64,
    nmax: usize,
    budget: usize,
) -> Result<(), Failure> {
    check_tol(tol)?;
    let args = PulseArgs {
        tol,
        nmax,
        controlled,
        opts: ControlOptions {
            seed,
            starts: budget,
            target_infidelity: tol,
            ..ControlOptions::default()
        },
    };
    match (coeffs, gate) {
        (Some(path), _) => pulse_z(io::parse_coefficients(&read(path)?)?, out, &args),
        (None, Some(spec)) => {
            let (d, phi) = spec::parse_phase_gate(spec).map_err(|message| Failure { code: 2, message })?;
            pulse_x(d, phi, out, &args)
        }
        (None, None) => unreachable!("clap requires one input"),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Decompose {
            unitary,
            out,
            report,
            tol,
            d,
            n,
            no_lower,
        } => decompose(&unitary, &out, report.as_deref(), tol, d, n, no_lower),
        Command::Verify { unitary, circuit, tol } => verify(&unitary, &circuit, tol),
        Command::Estimate { big_n, d } => estimate(big_n, &d),
        Command::Pulse {
            coeffs,
            gate,
            out,
            controlled,
            tol,
            seed,
            nmax,
            budget,
        } => pulse(coeffs.as_deref(), gate.as_deref(), &out, controlled, tol, seed, nmax, budget),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
