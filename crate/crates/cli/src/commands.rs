use std::path::Path;
use std::time::Instant;

use cone_riccati::instances::{generate, InstanceKind, InstanceRecipe};
use cone_riccati::linalg::{from_rows, to_rows};
use cone_riccati::riccati::{check_sufficiency, verify_necessity, VERIFY_TOL};
use cone_riccati::spectral::{self, StabilityReport};
use cone_riccati::{solve as run_solver, SolveError, SolveOptions};

use crate::schema::{
    check_version, eig_list, read_json, to_json, vec_list, write_text, Eigenvalues,
    NecessityJson, OptionsJson, ProblemFile, ReportFile, Timings, TraceJson, Verdict,
    WitnessJson,
};
use crate::{CliError, Exit};

pub struct SolveFlags {
    pub tol: f64,
    pub max_iter: usize,
    pub margin: f64,
    pub trace: bool,
}

fn sorted_eigs(report: &StabilityReport) -> Vec<[f64; 2]> {
    eig_list(&report.sorted_eigenvalues())
}

pub fn solve(input: &Path, flags: &SolveFlags, out: Option<&Path>) -> Result<Exit, CliError> {
    let started = Instant::now();
    if !(flags.tol.is_finite() && flags.tol > 0.0) {
        return Err(CliError::Schema(format!("--tol must be positive, got {}", flags.tol)));
    }
    if !(flags.margin.is_finite() && flags.margin >= 0.0) {
        return Err(CliError::Schema(format!("--margin must be nonnegative, got {}", flags.margin)));
    }
    let problem: ProblemFile = read_json(input)?;
    let (cone, sys) = problem.build()?;
    let opts = SolveOptions {
        max_iter: flags.max_iter,
        tol: flags.tol,
        record_trace: flags.trace,
        margin: flags.margin,
        ..SolveOptions::default()
    };

    let solve_started = Instant::now();
    let outcome = run_solver(&cone, &sys, &opts);
    let solve_seconds = solve_started.elapsed().as_secs_f64();

    let mut report = ReportFile {
        schema_version: crate::schema::SCHEMA_VERSION.into(),
        verdict: Verdict::Certificate,
        message: String::new(),
        n: sys.n(),
        x: None,
        residual: None,
        iterations: None,
        eigenvalues: Eigenvalues::default(),
        failing_blocks: Vec::new(),
        witness: None,
        trace: None,
        necessity: None,
        options: OptionsJson {
            tol: flags.tol,
            max_iter: flags.max_iter,
            margin: flags.margin,
        },
        timings: Timings {
            solve_seconds,
            total_seconds: 0.0,
        },
    };

    let exit = match outcome {
        Ok(cert) => {
            let w = &cert.witness;
            report.message = format!(
                "stabilizing K-nonnegative solution after {} iterations",
                cert.solution.iterations
            );
            report.x = Some(to_rows(cert.x_star()));
            report.residual = Some(cert.solution.residual);
            report.iterations = Some(cert.solution.iterations);
            report.eigenvalues = Eigenvalues {
                l: Some(sorted_eigs(&cert.l_stability)),
                closed_loop_a: Some(sorted_eigs(&cert.closed_loop_a_stability)),
                closed_loop_d: Some(sorted_eigs(&cert.closed_loop_d_stability)),
            };
            report.witness = Some(WitnessJson {
                v1: vec_list(&w.v1),
                v2: vec_list(&w.v2),
                u1: vec_list(&w.u1),
                u2: vec_list(&w.u2),
                bound_s: vec_list(&cert.bound_s),
            });
            report.trace = Some(TraceJson {
                len: cert.trace.len,
                monotone: cert.trace.monotone(),
                bounded: cert.trace.bounded(),
                converged: cert.trace.converged,
                stalled: cert.trace.stalled,
                cauchy_tail: cert.trace.cauchy_tail,
                gaps: cert.trace.gaps.clone(),
                iterates: cert
                    .iterates
                    .as_ref()
                    .map(|its| its.iter().map(to_rows).collect()),
            });
            report.necessity = Some(NecessityJson {
                l_stable_implied: cert.necessity.l_stable_implied,
                block_inverse_nonneg: cert.necessity.block_inverse_nonneg,
                relative_mismatch: cert.necessity.relative_mismatch,
            });
            Exit::Ok
        }
        Err(err) => {
            report.message = err.to_string();
            match err {
                SolveError::EquivalenceNegative(l) => {
                    report.verdict = Verdict::EquivalenceNegative;
                    let offending: Vec<String> = l
                        .offending_eigenvalues()
                        .iter()
                        .map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im))
                        .collect();
                    report.message = format!("{}; unstable eigenvalues: {}", report.message, offending.join(", "));
                    report.eigenvalues.l = Some(sorted_eigs(&l));
                    Exit::EquivalenceNegative
                }
                SolveError::InconclusiveAtMargin(l) => {
                    report.verdict = Verdict::InconclusiveAtMargin;
                    report.eigenvalues.l = Some(sorted_eigs(&l));
                    Exit::InconclusiveAtMargin
                }
                SolveError::HypothesisFailure(blocks) => {
                    report.verdict = Verdict::HypothesisFailure;
                    report.failing_blocks =
                        blocks.failing_blocks().iter().map(|s| s.to_string()).collect();
                    Exit::HypothesisFailure
                }
                SolveError::NonConverged {
                    iterations,
                    residual,
                    trace,
                    iterates,
                } => {
                    report.verdict = Verdict::NonConverged;
                    report.residual = Some(residual);
                    report.iterations = Some(iterations);
                    report.trace = Some(TraceJson {
                        len: trace.len,
                        monotone: trace.monotone(),
                        bounded: trace.bounded(),
                        converged: trace.converged,
                        stalled: trace.stalled,
                        cauchy_tail: trace.cauchy_tail,
                        gaps: trace.gaps.clone(),
                        iterates: iterates.map(|its| its.iter().map(to_rows).collect()),
                    });
                    if let Ok(l) = spectral::eigenvalues_with_margin(sys.l(), flags.margin) {
                        report.eigenvalues.l = Some(sorted_eigs(&l));
                    }
                    Exit::NonConverged
                }
                SolveError::Numerical(_) => {
                    report.verdict = Verdict::NumericalFailure;
                    Exit::Numerical
                }
            }
        }
    };
    report.timings.total_seconds = started.elapsed().as_secs_f64();
    eprintln!("{}: {}", verdict_label(report.verdict), report.message);
    write_text(out, &to_json(&report))?;
    Ok(exit)
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Certificate => "certificate",
        Verdict::EquivalenceNegative => "equivalence-negative",
        Verdict::HypothesisFailure => "hypothesis-failure",
        Verdict::NonConverged => "non-converged",
        Verdict::InconclusiveAtMargin => "inconclusive-at-margin",
        Verdict::NumericalFailure => "numerical-failure",
    }
}

pub fn check(report_path: &Path, problem_path: &Path) -> Result<Exit, CliError> {
    let report: ReportFile = read_json(report_path)?;
    check_version(&report.schema_version)?;
    let problem: ProblemFile = read_json(problem_path)?;
    let (cone, sys) = problem.build()?;

    if report.verdict != Verdict::Certificate {
        eprintln!("fail: report verdict is {}, not a certificate", verdict_label(report.verdict));
        return Ok(Exit::CheckFailed);
    }
    let Some(rows) = report.x.as_ref() else {
        return Err(CliError::Schema("certificate report without X".into()));
    };
    if report.n != sys.n() || rows.len() != sys.n() || rows.iter().any(|r| r.len() != sys.n()) {
        eprintln!("fail: report solves an n = {} problem, problem file has n = {}", report.n, sys.n());
        return Ok(Exit::CheckFailed);
    }
    let x = from_rows(rows)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Schema("non-finite entry in X".into()));
    }
    let margin = report.options.margin;

    let sufficiency = check_sufficiency(&cone, &sys, &x, VERIFY_TOL, margin)?;
    if !sufficiency.holds() {
        eprintln!("fail: {}", sufficiency.failures().join("; "));
        return Ok(Exit::CheckFailed);
    }
    let necessity = verify_necessity(&cone, &sys, &x, margin)?;
    if !necessity.holds() {
        eprintln!(
            "fail: necessity check (L stable {}, block inverse nonnegative {}, mismatch {:.3e})",
            necessity.l_stable_implied, necessity.block_inverse_nonneg, necessity.relative_mismatch
        );
        return Ok(Exit::CheckFailed);
    }
    eprintln!(
        "pass: residual {:.3e}, -L^-1 block mismatch {:.3e}",
        sufficiency.residual, necessity.relative_mismatch
    );
    Ok(Exit::Ok)
}

pub fn gen(
    kind: InstanceKind,
    n: usize,
    seed: u64,
    shift: f64,
    cond_cap: f64,
    out: Option<&Path>,
) -> Result<Exit, CliError> {
    let recipe = InstanceRecipe::new(kind, n, seed)
        .with_shift(shift)
        .with_cond_cap(cond_cap);
    let inst = generate(&recipe)?;
    let problem = ProblemFile::new(&inst.cone, &inst.sys, Some(&inst.recipe));
    write_text(out, &to_json(&problem))?;
    Ok(Exit::Ok)
}
