//! `dcnot`: simplify, compare and inspect dressed-CNOT circuits.
//!
//! Exit codes: 0 success or equivalent, 1 not equivalent or not reduced,
//! 2 parse or usage error, 3 numeric failure.

use clap::{Parser, Subcommand, ValueEnum};
use dcnot_core::circuit::{circuit_unitary, dcnots_unitary, parse, random_circuit, serialize, Circuit};
use dcnot_core::invariants::{
    diagonalize_g2, diagonalize_g3, factor_tensor_product, lo_rhs_equivalent, quad_invariant, split_parts,
    VecPair,
};
use dcnot_core::linalg::{c, CMat, RMat3};
use dcnot_core::optimizer::{optimize, push_locals_out, OptimizeConfig, OptimizeReport};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const OK: u8 = 0;
const DIFFERENT: u8 = 1;
const USAGE: u8 = 2;
const NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "dcnot", version, about = "Simplify 2- and 3-qubit dressed-CNOT circuits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    LoRhs,
    Exact,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize a circuit file.
    Simplify {
        input: PathBuf,
        /// Output file; the circuit goes to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// End-to-end tolerance per gate.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        max_iter: usize,
        /// Fail with exit code 1 when the end-to-end check does not pass.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum)]
        report: Option<ReportFormat>,
        /// Rules to switch off, e.g. `--disable pt3 --disable 3to2`.
        #[arg(long)]
        disable: Vec<String>,
    },
    /// Compare two circuits.
    Verify {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "lo-rhs")]
        mode: VerifyMode,
        /// Frobenius tolerance per unit of matrix dimension in exact mode.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Print the quadratic invariant of a 2-qubit circuit.
    Invariant {
        input: PathBuf,
        #[arg(long)]
        diagonalize: bool,
    },
    /// Write a seeded random circuit.
    Random {
        #[arg(long)]
        nbits: usize,
        #[arg(long)]
        dcnots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Error carrying its exit code.
struct Fail(u8, String);

type Res = Result<u8, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail(USAGE, msg.into())
}

fn load(path: &Path) -> Result<Circuit, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PassJson<'a> {
    rule: &'a str,
    position: usize,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    initial_dcnot_count: usize,
    final_dcnot_count: usize,
    passes_applied: Vec<PassJson<'a>>,
    total_residual: f64,
    error: f64,
    verified: bool,
    iterations: usize,
    no_solution: usize,
}

fn report_text(r: &OptimizeReport, fmt: ReportFormat) -> String {
    match fmt {
        ReportFormat::Json => {
            let j = ReportJson {
                initial_dcnot_count: r.initial_dcnot_count,
                final_dcnot_count: r.final_dcnot_count,
                passes_applied: r
                    .passes_applied
                    .iter()
                    .map(|p| PassJson { rule: &p.rule, position: p.position })
                    .collect(),
                total_residual: r.total_residual,
                error: r.error,
                verified: r.verified,
                iterations: r.iterations,
                no_solution: r.no_solution,
            };
            serde_json::to_string(&j).expect("report serializes") + "\n"
        }
        ReportFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "initial_dcnot_count: {}", r.initial_dcnot_count);
            let _ = writeln!(s, "final_dcnot_count: {}", r.final_dcnot_count);
            let _ = writeln!(s, "passes_applied: {}", r.passes_applied.len());
            for p in &r.passes_applied {
                let _ = writeln!(s, "  {} @ {}", p.rule, p.position);
            }
            let _ = writeln!(s, "total_residual: {:e}", r.total_residual);
            let _ = writeln!(s, "error: {:e}", r.error);
            let _ = writeln!(s, "verified: {}", r.verified);
            let _ = writeln!(s, "iterations: {}", r.iterations);
            let _ = writeln!(s, "no_solution: {}", r.no_solution);
            s
        }
    }
}

fn cmd_simplify(
    input: &Path,
    output: Option<&Path>,
    tol: f64,
    max_iter: usize,
    verify: bool,
    report: Option<ReportFormat>,
    disable: &[String],
) -> Res {
    let circ = load(input)?;
    for d in disable {
        if !dcnot_core::optimizer::RULES.contains(&d.as_str()) {
            return Err(usage(format!("unknown rule `{d}`")));
        }
    }
    let config = OptimizeConfig { max_iter, verify_tol: tol, disabled: disable.iter().cloned().collect() };
    let (out, rep) = optimize(&circ, &config).map_err(|e| usage(e.to_string()))?;
    emit(output, &serialize(&out))?;
    if let Some(fmt) = report {
        let text = report_text(&rep, fmt);
        // Keep stdout clean for the circuit when no output file is given.
        if output.is_some() {
            print!("{text}");
        } else {
            eprint!("{text}");
        }
    }
    if !rep.error.is_finite() {
        return Err(Fail(NUMERIC, "end-to-end check produced a non-finite error".into()));
    }
    if verify && !rep.verified {
        eprintln!("verification failed: error {:e}", rep.error);
        return Ok(DIFFERENT);
    }
    if circ.nbits == 2 && out.dcnot_count() > 3 {
        eprintln!("not reduced: {} DC-NOTs remain", out.dcnot_count());
        return Ok(DIFFERENT);
    }
    Ok(OK)
}

fn cmd_verify(a: &Path, b: &Path, mode: VerifyMode, tol: f64) -> Res {
    let (ca, cb) = (load(a)?, load(b)?);
    if ca.nbits != cb.nbits {
        return Err(usage(format!("bit counts differ: {} vs {}", ca.nbits, cb.nbits)));
    }
    let num = |e: &dyn std::fmt::Display| Fail(NUMERIC, e.to_string());
    let ua = circuit_unitary(&ca).map_err(|e| num(&e))?;
    let ub = circuit_unitary(&cb).map_err(|e| num(&e))?;
    let (equal, detail) = match mode {
        VerifyMode::Exact => {
            let t = (ub.adjoint() * &ua).trace();
            let z = if t.norm() > 1e-12 { t / t.norm() } else { c(1.0, 0.0) };
            let d = (&ua - &ub * z).norm();
            (d <= tol * (ua.nrows() as f64), format!("phase-aligned distance {d:e}"))
        }
        VerifyMode::LoRhs if ca.nbits == 2 => {
            let (eq, zeta) = lo_rhs_equivalent(&ua, &ub).map_err(|e| num(&e))?;
            (eq, format!("zeta {zeta}"))
        }
        // Any 1-qubit unitary is itself local.
        VerifyMode::LoRhs if ca.nbits == 1 => (true, "single wire".to_string()),
        VerifyMode::LoRhs => {
            // A ∼ B iff B†A is a tensor product of single-qubit unitaries.
            match factor_tensor_product(&(ub.adjoint() * &ua), ca.nbits) {
                Ok(f) => (true, format!("factor residual {:e}", f.residual)),
                Err(e) => (false, e.to_string()),
            }
        }
    };
    println!("{} ({detail})", if equal { "equivalent" } else { "not equivalent" });
    Ok(if equal { OK } else { DIFFERENT })
}

fn fmt_cmat(m: &CMat) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:+.6}{:+.6}i", m[(i, j)].re, m[(i, j)].im)).collect();
        let _ = writeln!(s, "  [{}]", row.join(", "));
    }
    s
}

fn fmt_rmat(m: &RMat3) -> String {
    let mut s = String::new();
    for i in 0..3 {
        let _ = writeln!(s, "  [{:+.6}, {:+.6}, {:+.6}]", m[(i, 0)], m[(i, 1)], m[(i, 2)]);
    }
    s
}

fn fmt_pairs(p: &[VecPair]) -> String {
    let mut s = String::new();
    for (k, (a, b)) in p.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {k}: wire0 [{:+.9}, {:+.9}, {:+.9}]  wire1 [{:+.9}, {:+.9}, {:+.9}]",
            a.x, a.y, a.z, b.x, b.y, b.z
        );
    }
    s
}

fn cmd_invariant(input: &Path, diag: bool) -> Res {
    let circ = load(input)?;
    if circ.nbits != 2 {
        return Err(usage("the invariant command takes 2-qubit circuits"));
    }
    let u = circuit_unitary(&circ).map_err(|e| Fail(NUMERIC, e.to_string()))?;
    let a2 = quad_invariant(&u, 2).map_err(|e| Fail(NUMERIC, e.to_string()))?;
    let parts = split_parts(&a2);
    print!("A2 =\n{}", fmt_cmat(&a2));
    println!("lambda_r = {:+.9}", parts.lam_r);
    println!("lambda_i = {:+.9}", parts.lam_i);
    print!("Gamma(Lambda_r) =\n{}", fmt_rmat(&parts.gamma_r()));
    print!("Gamma(Lambda_i) =\n{}", fmt_rmat(&parts.gamma_i()));
    if !diag {
        return Ok(OK);
    }
    // Diagonalize the DC-NOT part; trailing locals only conjugate the invariant.
    let (ds, _) = push_locals_out(&circ.gates, 2);
    let g = quad_invariant(&dcnots_unitary(&ds, 2), 2).map_err(|e| Fail(NUMERIC, e.to_string()))?;
    match ds.len() {
        2 => match diagonalize_g2(&g) {
            Ok((pp, pairs)) => {
                println!("alpha = {:+.12}", pp.alpha);
                println!("alpha_prime = {:+.12}", pp.alpha_prime);
                print!("vectors =\n{}", fmt_pairs(&pairs));
                Ok(OK)
            }
            Err(e) => Err(Fail(NUMERIC, format!("diagonalization failed: {e}"))),
        },
        3 => match diagonalize_g3(&g) {
            Ok((pp, pairs)) => {
                println!("beta = {:+.12}", pp.beta);
                println!("beta1 = {:+.12}", pp.beta1);
                println!("beta2 = {:+.12}", pp.beta2);
                println!("xi = {:+.12}", pp.xi);
                print!("vectors =\n{}", fmt_pairs(&pairs));
                Ok(OK)
            }
            Err(e) => Err(Fail(NUMERIC, format!("diagonalization failed: {e}"))),
        },
        n => Err(Fail(NUMERIC, format!("diagonalization needs 2 or 3 DC-NOTs, found {n}"))),
    }
}

fn cmd_random(nbits: usize, dcnots: usize, seed: u64, output: Option<&Path>) -> Res {
    let circ = random_circuit(nbits, dcnots, seed).map_err(|e| usage(e.to_string()))?;
    emit(output, &serialize(&circ))?;
    Ok(OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Simplify { input, output, tol, max_iter, verify, report, disable } => {
            cmd_simplify(input, output.as_deref(), *tol, *max_iter, *verify, *report, disable)
        }
        Cmd::Verify { a, b, mode, tol } => cmd_verify(a, b, *mode, *tol),
        Cmd::Invariant { input, diagonalize } => cmd_invariant(input, *diagonalize),
        Cmd::Random { nbits, dcnots, seed, output } => cmd_random(*nbits, *dcnots, *seed, output.as_deref()),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
