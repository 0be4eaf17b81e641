//! Parametric (Dinkelbach-style) method for the ratio problem: root-finding
//! on `F(lambda) = min { lambda ||z||_1 - ||z||_q : z feasible }`.
//!
//! `F` is concave and strictly increasing with a unique root `lambda*`, and
//! the minimizer at the root solves the original ratio problem.  Starting
//! from `lambda = 0`, each outer step solves `Q(lambda)` with the
//! difference-of-convex inner loop and updates
//! `lambda <- ||x||_q / ||x||_1`, which is the classic Dinkelbach update and
//! keeps the lambda sequence nondecreasing when the inner solves are exact.

use std::time::Instant;

use super::dca::{candidate_starts, dca_best_over_starts};
use super::{certify, polish_on_support, precheck, Precheck, SolverOptions};
use crate::conic::ConicProgram;
use crate::model::{l1_norm, linalg::KernelSpace, lq_norm, SignalVector, SolveReport, Termination};
use crate::{Error, Float, RecoveryProblem, Result};

/// State of the outer root-finding iteration on `F(lambda)`.
#[derive(Clone, Debug)]
pub struct ParametricState<F: Float> {
    /// Current weight `lambda`.
    pub lambda: F,
    /// `F(lambda)` at the current iterate.
    pub f_value: F,
    /// Minimizer of the current subproblem.
    pub iterate: SignalVector<F>,
    /// Stopping tolerance `delta` on `|F(lambda)|`.
    pub delta: F,
    /// `(lambda, F(lambda))` after each outer step.
    pub history: Vec<(F, F)>,
}

/// Minimize the norm ratio by the parametric method with tolerance `delta`
/// on `|F(lambda)|` (default-quality engine and start set).
pub fn pm_solve<F: Float>(problem: &RecoveryProblem<F>, delta: F) -> Result<SolveReport<F>> {
    pm_solve_with(problem, delta, &SolverOptions::default())
}

/// [`pm_solve`] with explicit options.
pub fn pm_solve_with<F: Float>(
    problem: &RecoveryProblem<F>,
    delta: F,
    opts: &SolverOptions<F>,
) -> Result<SolveReport<F>> {
    if !(delta > F::zero() && delta.is_finite()) {
        return Err(Error::InvalidParameter(
            "stopping tolerance delta must be finite and positive".into(),
        ));
    }
    let clock = Instant::now();
    if let Precheck::DegenerateZero = precheck(problem)? {
        return super::degenerate_report("pm", problem, clock.elapsed().as_secs_f64());
    }

    let program = ConicProgram::residual_form_with_bounds(
        &problem.matrix,
        problem.measurements.as_slice(),
        problem.noise_bound,
        opts.box_bounds,
    )?;
    let kernel = KernelSpace::new(&problem.matrix);
    let (starts, start_iterations) = candidate_starts(problem, &kernel, &program, opts)?;

    let mut state = ParametricState {
        lambda: F::zero(),
        f_value: F::neg_infinity(),
        iterate: SignalVector::zeros(problem.dimension()),
        delta,
        history: Vec::new(),
    };
    let mut lambda_history = vec![F::zero()];
    let mut trace = Vec::new();
    let mut notes = Vec::new();
    let mut inner_iterations = start_iterations;
    let mut outer_iterations = 0;
    let mut termination = Termination::MaxIterations;

    for _ in 0..opts.max_outer {
        let (best, iters) =
            dca_best_over_starts(&program, problem, &kernel, state.lambda, &starts, opts)?;
        inner_iterations += iters;
        outer_iterations += 1;
        // When the subproblem is unbounded (small lambda), the inner loop
        // still hands back its last feasible iterate; its finite objective
        // value is what the update rule needs.
        state.f_value = best.f_value;
        state.iterate = SignalVector::new(best.iterate)?;
        state.history.push((state.lambda, state.f_value));
        trace.push(state.f_value);
        if state.f_value.abs() <= delta && !best.unbounded {
            termination = Termination::Converged;
            break;
        }
        let next = lq_norm(&state.iterate, problem.q) / l1_norm(&state.iterate);
        if !(next > state.lambda) {
            // The update should strictly increase lambda until the root;
            // a stall means the inner loop returned a non-optimal point.
            notes.push("lambda_nonmonotone".to_string());
            break;
        }
        state.lambda = next;
        lambda_history.push(next);
    }

    let mut solution = state.iterate.clone().into_vec();
    if opts.polish {
        if let Some(refined) = polish_on_support(problem, &solution) {
            solution = refined;
        }
    }

    let mut report = SolveReport::finish(
        "pm",
        problem,
        solution,
        outer_iterations,
        inner_iterations,
        termination,
        clock.elapsed().as_secs_f64(),
    )?;
    report.lambda_history = lambda_history;
    report.objective_trace = trace;
    report.notes = notes;
    Ok(report)
}
