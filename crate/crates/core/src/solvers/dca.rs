//! Difference-of-convex inner loop for the parametric subproblem
//! `Q(lambda): minimize lambda ||z||_1 - ||z||_q over the feasible set`.
//!
//! Each step linearizes the concave part `-||z||_q` at the current iterate
//! and solves the resulting convex problem
//! `minimize lambda ||z||_1 - g . z` with the subproblem engine, warm-started
//! from the previous step.  The loop is a local method, so the driver runs it
//! from a small deterministic set of starting points and keeps the best
//! outcome; the zero start of the base iteration is always included.

use super::subgrad::lq_subgradient;
use super::sweep::coordinate_sweep;
use super::{Precheck, SolverOptions};
use crate::conic::{solve_subproblem, ConicProgram, ConicStatus, Objective};
use crate::model::{l1_norm, l2_distance, l2_norm, linalg::KernelSpace, linf_norm, lq_norm, SignalVector};
use crate::{Error, Float, RecoveryProblem, Result};

/// Result of one difference-of-convex run.
pub(crate) struct DcaOutcome<F> {
    /// Final iterate.
    pub iterate: Vec<F>,
    /// `lambda ||x||_1 - ||x||_q` at the final iterate.
    pub f_value: F,
    /// Linearization steps taken.
    pub steps: usize,
    /// Engine iterations consumed.
    pub engine_iterations: usize,
    /// Objective value after each feasible iterate (nonincreasing).
    pub trace: Vec<F>,
    /// The subproblem was certified unbounded (the true `F(lambda)` is
    /// `-inf`; `f_value` still reports the last iterate's finite value).
    pub unbounded: bool,
    /// The relative-step stopping rule fired (as opposed to running out of
    /// steps or hitting the unbounded certificate).
    pub converged: bool,
}

/// One difference-of-convex run from a fixed start.
pub(crate) fn dca_run<F: Float>(
    program: &ConicProgram<F>,
    problem: &RecoveryProblem<F>,
    kernel: &KernelSpace<F>,
    lambda: F,
    start: Option<&[F]>,
    opts: &SolverOptions<F>,
) -> Result<DcaOutcome<F>> {
    let q = problem.q;
    let mut x: Vec<F> = match start {
        Some(s) => s.to_vec(),
        None => vec![F::zero(); problem.dimension()],
    };
    let mut warm = None;
    let mut engine_iterations = 0;
    let mut trace = Vec::new();
    let mut steps = 0;
    let mut unbounded = false;
    let mut converged = false;
    // Objective at the last accepted iterate.  A zero (or otherwise
    // infeasible) start carries no descent guarantee into the first step,
    // so monotonicity is enforced from the first accepted iterate on.
    let mut last_obj = F::infinity();

    for _ in 0..opts.dca_max_steps {
        let objective = if l2_norm(&x) == F::zero() {
            Objective::l1(lambda)
        } else {
            let g = lq_subgradient(&x, q)?;
            // `lambda ||z||_1 - g . z` is unbounded along a kernel direction
            // h whenever lambda ||h||_1 < g . h; for lambda = 0 that reduces
            // to g having any kernel component.
            if lambda == F::zero() && l2_norm(&kernel.project_kernel(&g)) > F::c(1e-10) {
                unbounded = true;
                break;
            }
            Objective::l1_minus_linear(lambda, g)
        };
        let tol = opts
            .engine
            .clone()
            .with_diverge_cap(F::c(1e6) * (F::one() + linf_norm(&x)));
        let (sol, next_warm) = solve_subproblem(program, &objective, &tol, warm.as_ref());
        warm = Some(next_warm);
        engine_iterations += sol.iterations;
        match sol.status {
            ConicStatus::Unbounded => {
                unbounded = true;
                break;
            }
            // The feasible set never changes between steps and passed the
            // range-distance precheck, so an infeasible verdict is an engine
            // artifact on a hard subproblem: stop descending from this start
            // and keep the current iterate.
            ConicStatus::Infeasible => {
                break;
            }
            _ => {}
        }
        let cand_obj = lambda * l1_norm(&sol.point) - lq_norm(&sol.point, q);
        if cand_obj > last_obj + F::c(1e-12) * (F::one() + last_obj.abs()) {
            // An exact linearized step never ascends; a rise means the
            // engine's accuracy floor is reached, so keep the last iterate.
            converged = true;
            break;
        }
        steps += 1;
        let step_size = l2_distance(&sol.point, &x) / l2_norm(&x).max(F::one());
        x = sol.point;
        last_obj = cand_obj;
        trace.push(cand_obj);
        if step_size < opts.dca_step_tol {
            converged = true;
            break;
        }
    }

    let f_value = lambda * l1_norm(&x) - lq_norm(&x, q);
    Ok(DcaOutcome {
        iterate: x,
        f_value,
        steps,
        engine_iterations,
        trace,
        unbounded,
        converged,
    })
}

/// Deterministic starting points shared by the descent drivers: the zero
/// start, the least-norm feasible point, and (on small problems) the best
/// three coordinate-sweep extremes ranked by the ratio objective.
pub(crate) fn candidate_starts<F: Float>(
    problem: &RecoveryProblem<F>,
    kernel: &KernelSpace<F>,
    t1: &ConicProgram<F>,
    opts: &SolverOptions<F>,
) -> Result<(Vec<Option<Vec<F>>>, usize)> {
    let y = problem.measurements.as_slice();
    let mut starts: Vec<Option<Vec<F>>> = vec![None];
    starts.push(Some(kernel.least_norm_solution(y)));
    let mut engine_iterations = 0;

    if opts.sweep && problem.dimension() <= opts.sweep_max_dim {
        // The sweep needs the l1-cap scale, taken from the plain-l1 solution.
        let (l1_sol, _) = solve_subproblem(t1, &Objective::l1(F::one()), &opts.engine, None);
        engine_iterations += l1_sol.iterations;
        let l1_scale = l1_norm(&l1_sol.point);
        if l1_scale > F::zero() {
            let t_lower = (opts.a_cap_factor * l1_scale).recip();
            let scaled = ConicProgram::scaled_form(
                &problem.matrix,
                y,
                problem.noise_bound,
                t_lower,
            )?;
            let mut ranked: Vec<(F, Vec<F>)> = Vec::new();
            for cand in coordinate_sweep(&scaled, problem.dimension(), &opts.engine, opts.sweep_iter_cap)
            {
                engine_iterations += cand.iterations;
                if cand.t > F::zero() && l1_norm(&cand.v) > F::c(1e-12) {
                    let z: Vec<F> = cand.v.iter().map(|&e| e / cand.t).collect();
                    let ratio = l1_norm(&z) / lq_norm(&z, problem.q);
                    ranked.push((ratio, z));
                }
            }
            ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("ratios are finite"));
            for (_, z) in ranked.into_iter().take(3) {
                starts.push(Some(z));
            }
        }
    }
    Ok((starts, engine_iterations))
}

/// Best outcome of the inner loop over a set of starts (smallest `f_value`;
/// zero iterates are skipped since the ratio is undefined there).
pub(crate) fn dca_best_over_starts<F: Float>(
    program: &ConicProgram<F>,
    problem: &RecoveryProblem<F>,
    kernel: &KernelSpace<F>,
    lambda: F,
    starts: &[Option<Vec<F>>],
    opts: &SolverOptions<F>,
) -> Result<(DcaOutcome<F>, usize)> {
    let mut engine_iterations = 0;
    let mut best: Option<DcaOutcome<F>> = None;
    for start in starts {
        let outcome = dca_run(program, problem, kernel, lambda, start.as_deref(), opts)?;
        engine_iterations += outcome.engine_iterations;
        if l2_norm(&outcome.iterate) == F::zero() {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => outcome.f_value < b.f_value,
        };
        if better {
            best = Some(outcome);
        }
    }
    let best = best.ok_or_else(|| {
        Error::InvalidParameter(
            "every inner run collapsed to the zero vector; the instance is degenerate".into(),
        )
    })?;
    Ok((best, engine_iterations))
}

/// Solve `Q(lambda)` and return the minimizer with its objective value
/// `F(lambda) = lambda ||x||_1 - ||x||_q` (`-inf` when the subproblem is
/// unbounded, which happens for small lambda whenever `A` has a nontrivial
/// kernel).
///
/// The inner loop is run from the deterministic multi-start set (zero start
/// included) and the best outcome is returned, since a single local descent
/// can stall in a shallow basin.
pub fn dca_solve_q<F: Float>(
    problem: &RecoveryProblem<F>,
    lambda: F,
) -> Result<(SignalVector<F>, F)> {
    dca_solve_q_with(problem, lambda, &SolverOptions::default())
}

/// [`dca_solve_q`] with explicit options.
pub fn dca_solve_q_with<F: Float>(
    problem: &RecoveryProblem<F>,
    lambda: F,
    opts: &SolverOptions<F>,
) -> Result<(SignalVector<F>, F)> {
    if !(lambda >= F::zero() && lambda.is_finite()) {
        return Err(Error::InvalidParameter(
            "lambda must be finite and nonnegative".into(),
        ));
    }
    if let Precheck::DegenerateZero = super::precheck(problem)? {
        let zero = SignalVector::new(vec![F::zero(); problem.dimension()])?;
        return Ok((zero, F::zero()));
    }
    let program = ConicProgram::residual_form_with_bounds(
        &problem.matrix,
        problem.measurements.as_slice(),
        problem.noise_bound,
        opts.box_bounds,
    )?;
    let kernel = KernelSpace::new(&problem.matrix);
    let (starts, _) = candidate_starts(problem, &kernel, &program, opts)?;
    let (best, _) = dca_best_over_starts(&program, problem, &kernel, lambda, &starts, opts)?;
    let f_value = if best.unbounded {
        F::neg_infinity()
    } else {
        best.f_value
    };
    Ok((SignalVector::new(best.iterate)?, f_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DenseMatrix;
    use crate::RatioQ;

    fn toy_problem() -> RecoveryProblem<f64> {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, -1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            vec![2.0, 2.0, 0.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        let y = SignalVector::new(vec![0.0, 0.0, 20.0, 40.0, 18.0]).unwrap();
        RecoveryProblem::new(a, y, 0.0, RatioQ::new(2.0).unwrap()).unwrap()
    }

    #[test]
    fn f_is_positive_at_unit_weight_on_the_toy_instance() {
        let (x, f) = dca_solve_q(&toy_problem(), 1.0).unwrap();
        assert!(f > 0.0, "F(1) = {f}");
        assert!(l2_norm(x.as_slice()) > 0.0);
    }

    #[test]
    fn f_is_negative_at_half_weight_on_the_toy_instance() {
        let (_, f) = dca_solve_q(&toy_problem(), 0.5).unwrap();
        assert!(f < 0.0, "F(0.5) = {f}");
    }

    #[test]
    fn trace_is_nonincreasing() {
        let problem = toy_problem();
        let program = ConicProgram::residual_form(
            &problem.matrix,
            problem.measurements.as_slice(),
            0.0,
        )
        .unwrap();
        let kernel = KernelSpace::new(&problem.matrix);
        let opts = SolverOptions::default();
        let run = dca_run(&program, &problem, &kernel, 1.0, None, &opts).unwrap();
        for pair in run.trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "trace {:?}", run.trace);
        }
    }

    #[test]
    fn rejects_negative_lambda() {
        assert!(dca_solve_q(&toy_problem(), -0.1).is_err());
    }
}
