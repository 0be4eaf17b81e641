//! Convex and nonconvex baselines the ratio methods are compared against:
//! basis-pursuit denoising (plain l1 minimization over the residual ball)
//! and the l1-minus-l2 penalty, which is exactly one difference-of-convex
//! run of the parametric subproblem at fixed unit weight.

use std::time::Instant;

use super::dca::dca_run;
use super::{precheck, Precheck, SolverOptions};
use crate::conic::{solve_subproblem, ConicProgram, ConicStatus, Objective};
use crate::model::{linalg::KernelSpace, SolveReport, Termination};
use crate::{Error, Float, RatioQ, RecoveryProblem, Result};

/// Minimize `||z||_1` subject to `||A z - y||_2 <= eta`.
///
/// The recovery baseline and the initializer of the ascent method.  `q` on
/// the problem is ignored (the report echoes it for bookkeeping).
pub fn bpdn_solve<F: Float>(problem: &RecoveryProblem<F>) -> Result<SolveReport<F>> {
    bpdn_solve_with(problem, &SolverOptions::default())
}

/// [`bpdn_solve`] with explicit options.
pub fn bpdn_solve_with<F: Float>(
    problem: &RecoveryProblem<F>,
    opts: &SolverOptions<F>,
) -> Result<SolveReport<F>> {
    let clock = Instant::now();
    // No degenerate short-circuit: when the origin is feasible the engine
    // returns it as the exact minimizer.  Only infeasibility is screened.
    precheck(problem)?;
    let program = ConicProgram::residual_form_with_bounds(
        &problem.matrix,
        problem.measurements.as_slice(),
        problem.noise_bound,
        opts.box_bounds,
    )?;
    let (sol, _) = solve_subproblem(&program, &Objective::l1(F::one()), &opts.engine, None);
    if sol.status == ConicStatus::Infeasible {
        return Err(Error::Infeasible {
            excess: sol.primal_residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    SolveReport::finish(
        "bpdn",
        problem,
        sol.point,
        1,
        sol.iterations,
        super::termination_of(sol.status),
        clock.elapsed().as_secs_f64(),
    )
}

/// Minimize `||z||_1 - ||z||_2` subject to `||A z - y||_2 <= eta`: a single
/// difference-of-convex run at unit weight, from the zero start.
///
/// Defined for `q = 2` only, since the subtracted norm is the l2 norm.
pub fn l1_minus_l2_solve<F: Float>(problem: &RecoveryProblem<F>) -> Result<SolveReport<F>> {
    l1_minus_l2_solve_with(problem, &SolverOptions::default())
}

/// [`l1_minus_l2_solve`] with explicit options.
pub fn l1_minus_l2_solve_with<F: Float>(
    problem: &RecoveryProblem<F>,
    opts: &SolverOptions<F>,
) -> Result<SolveReport<F>> {
    match problem.q {
        RatioQ::Finite(q) if (q - F::c(2.0)).abs() < F::c(1e-12) => {}
        _ => {
            return Err(Error::InvalidParameter(
                "the l1-minus-l2 baseline is defined for q = 2 only".into(),
            ));
        }
    }
    let clock = Instant::now();
    if let Precheck::DegenerateZero = precheck(problem)? {
        return super::degenerate_report("l1l2", problem, clock.elapsed().as_secs_f64());
    }
    let program = ConicProgram::residual_form_with_bounds(
        &problem.matrix,
        problem.measurements.as_slice(),
        problem.noise_bound,
        opts.box_bounds,
    )?;
    let kernel = KernelSpace::new(&problem.matrix);
    let run = dca_run(&program, problem, &kernel, F::one(), None, opts)?;
    let termination = if run.converged {
        Termination::Converged
    } else {
        Termination::MaxIterations
    };
    let mut report = SolveReport::finish(
        "l1l2",
        problem,
        run.iterate,
        run.steps,
        run.engine_iterations,
        termination,
        clock.elapsed().as_secs_f64(),
    )?;
    report.lambda_history = vec![F::one()];
    report.objective_trace = run.trace;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{l1_norm, DenseMatrix, SignalVector};

    fn toy_problem(eta: f64) -> RecoveryProblem<f64> {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, -1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            vec![2.0, 2.0, 0.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        let y = SignalVector::new(vec![0.0, 0.0, 20.0, 40.0, 18.0]).unwrap();
        RecoveryProblem::new(a, y, eta, RatioQ::new(2.0).unwrap()).unwrap()
    }

    #[test]
    fn l1_minimization_shrinks_each_coordinate_toward_the_ball() {
        let a = DenseMatrix::<f64>::identity(2);
        let y = SignalVector::new(vec![5.0, 0.0]).unwrap();
        let problem = RecoveryProblem::new(a, y, 1.0, RatioQ::new(2.0).unwrap()).unwrap();
        let report = bpdn_solve(&problem).unwrap();
        assert!((report.solution[0] - 4.0).abs() < 1e-6, "{:?}", report.solution);
        assert!(report.solution[1].abs() < 1e-6);
    }

    #[test]
    fn wide_noise_ball_gives_the_zero_solution() {
        let a = DenseMatrix::<f64>::identity(2);
        let y = SignalVector::new(vec![0.5, 0.2]).unwrap();
        let problem = RecoveryProblem::new(a, y, 2.0, RatioQ::new(2.0).unwrap()).unwrap();
        let report = bpdn_solve(&problem).unwrap();
        assert!(report.solution.iter().all(|e| e.abs() < 1e-6));
        assert_eq!(report.termination, Termination::Converged);
    }

    #[test]
    fn l1_minimum_on_the_toy_instance_reaches_the_known_value() {
        // The l1 minimum over this solution family is 32; the minimizer need
        // not be the sparsest point.
        let report = bpdn_solve(&toy_problem(0.0)).unwrap();
        assert!(report.residual_norm < 1e-5);
        assert!(l1_norm(&report.solution) <= 32.0 + 1e-4, "{:?}", report.solution);
        assert!(l1_norm(&report.solution) >= 32.0 - 1e-4);
    }

    #[test]
    fn penalty_baseline_rejects_other_exponents() {
        let a = DenseMatrix::<f64>::identity(2);
        let y = SignalVector::new(vec![1.0, 0.0]).unwrap();
        let problem = RecoveryProblem::new(a, y, 0.0, RatioQ::new(3.0).unwrap()).unwrap();
        assert!(l1_minus_l2_solve(&problem).is_err());
    }

    #[test]
    fn penalty_objective_decreases_along_the_run() {
        let report = l1_minus_l2_solve(&toy_problem(0.0)).unwrap();
        for pair in report.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "{:?}", report.objective_trace);
        }
        assert!(report.residual_norm < 1e-5);
    }
}
