//! Linear-programming method for the sup-norm ratio (`q = infinity`).
//!
//! On the scaled form, maximizing `||v||_inf` splits into one linear program
//! per coordinate: insert a negated copy of column `i` so that
//! `v_i = v~_i - v~_{i+1}` with both parts sign-constrained, and maximize
//! `v~_i + v~_{i+1}`, which equals `|v_i|` at the optimum.  The best of the
//! `N` programs wins; ties go to the smallest index, and the run is
//! deterministic regardless of how the programs are scheduled.

use std::time::Instant;

use rayon::prelude::*;

use super::{certify, polish_on_support, precheck, Precheck, SolverOptions};
use crate::conic::{solve_lp, solve_subproblem, ConicProgram, ConicStatus, Objective};
use crate::model::{l1_norm, DenseMatrix, SolveReport, Termination};
use crate::{Error, Float, RecoveryProblem, Result};

struct SplitCandidate<F> {
    objective: F,
    v: Vec<F>,
    t: F,
    iterations: usize,
}

fn split_program<F: Float>(
    problem: &RecoveryProblem<F>,
    i: usize,
    t_lower: F,
) -> Result<ConicProgram<F>> {
    let a = &problem.matrix;
    let (m, n) = (a.rows(), a.cols());
    let mut data = vec![F::zero(); m * (n + 1)];
    for r in 0..m {
        let row = a.row(r);
        let out = &mut data[r * (n + 1)..(r + 1) * (n + 1)];
        out[..=i].copy_from_slice(&row[..=i]);
        out[i + 1] = -row[i];
        out[i + 2..].copy_from_slice(&row[i + 1..]);
    }
    let split = DenseMatrix::new(m, n + 1, data)?;
    Ok(ConicProgram::scaled_form(
        &split,
        problem.measurements.as_slice(),
        problem.noise_bound,
        t_lower,
    )?
    .with_nonneg(&[i, i + 1]))
}

fn solve_split<F: Float>(
    problem: &RecoveryProblem<F>,
    i: usize,
    t_lower: F,
    opts: &SolverOptions<F>,
) -> Result<Option<SplitCandidate<F>>> {
    let n = problem.dimension();
    let program = split_program(problem, i, t_lower)?;
    let mut c = vec![F::zero(); n + 2];
    c[i] = F::one();
    c[i + 1] = F::one();
    let (sol, _) = solve_lp(&program, c, &opts.engine, None);
    match sol.status {
        ConicStatus::Infeasible | ConicStatus::Unbounded => Ok(None),
        _ => {
            let t = sol.point[n + 1];
            if !(t > F::zero()) {
                return Ok(None);
            }
            let mut v = Vec::with_capacity(n);
            v.extend_from_slice(&sol.point[..i]);
            v.push(sol.point[i] - sol.point[i + 1]);
            v.extend_from_slice(&sol.point[i + 2..n + 1]);
            Ok(Some(SplitCandidate {
                objective: sol.point[i] + sol.point[i + 1],
                v,
                t,
                iterations: sol.iterations,
            }))
        }
    }
}

/// Minimize the `l1`-over-sup-norm ratio by solving one linear program per
/// coordinate on the scaled form and keeping the best.
pub fn lp_solve_linf<F: Float>(problem: &RecoveryProblem<F>) -> Result<SolveReport<F>> {
    lp_solve_linf_with(problem, &SolverOptions::default())
}

/// [`lp_solve_linf`] with explicit options.
pub fn lp_solve_linf_with<F: Float>(
    problem: &RecoveryProblem<F>,
    opts: &SolverOptions<F>,
) -> Result<SolveReport<F>> {
    if !problem.q.is_infinite() {
        return Err(Error::InvalidParameter(
            "the per-coordinate linear-programming method requires q = infinity".into(),
        ));
    }
    let clock = Instant::now();
    if let Precheck::DegenerateZero = precheck(problem)? {
        return super::degenerate_report("lp-inf", problem, clock.elapsed().as_secs_f64());
    }

    let n = problem.dimension();
    let y = problem.measurements.as_slice();
    let mut inner_iterations = 0;

    // The l1-minimal point sets the scale cap, exactly as in the ascent
    // method, so the two share a feasible region.
    let t1 = ConicProgram::residual_form(&problem.matrix, y, problem.noise_bound)?;
    let (l1_sol, _) = solve_subproblem(&t1, &Objective::l1(F::one()), &opts.engine, None);
    inner_iterations += l1_sol.iterations;
    if l1_sol.status == ConicStatus::Infeasible {
        return Err(Error::Infeasible {
            excess: l1_sol.primal_residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    let l1b = l1_norm(&l1_sol.point);
    if l1b <= F::c(1e-12) {
        return super::degenerate_report("lp-inf", problem, clock.elapsed().as_secs_f64());
    }
    let t_lower = (opts.a_cap_factor * l1b).recip();

    let candidates: Vec<Option<SplitCandidate<F>>> = (0..n)
        .into_par_iter()
        .map(|i| solve_split(problem, i, t_lower, opts))
        .collect::<Result<_>>()?;

    let mut best: Option<SplitCandidate<F>> = None;
    for cand in candidates.into_iter().flatten() {
        inner_iterations += cand.iterations;
        let better = match &best {
            None => true,
            // Strict improvement beyond a tie margin, scanned in index
            // order: equal objectives keep the smallest index.
            Some(b) => cand.objective > b.objective + F::c(1e-9),
        };
        if better {
            best = Some(cand);
        }
    }
    let best = best.ok_or(Error::Infeasible { excess: 0.0 })?;

    let mut notes = Vec::new();
    if best.t <= t_lower * (F::one() + F::c(1e-6)) {
        notes.push("l1_cap_active".to_string());
    }
    let mut solution: Vec<F> = best.v.iter().map(|&e| e / best.t).collect();
    if opts.polish {
        if let Some(refined) = polish_on_support(problem, &solution) {
            solution = refined;
        }
    }
    let termination = certify(problem, &mut solution, Termination::Converged);

    let mut report = SolveReport::finish(
        "lp-inf",
        problem,
        solution,
        n,
        inner_iterations,
        termination,
        clock.elapsed().as_secs_f64(),
    )?;
    report.notes = notes;
    Ok(report)
}
