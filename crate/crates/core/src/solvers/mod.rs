//! Outer algorithms for sparse recovery by norm-ratio minimization.
//!
//! * [`pm_solve`] — parametric (Dinkelbach-style) outer iteration with a
//!   difference-of-convex inner loop, for any `q` in `(1, inf]`.
//! * [`ccp_solve`] — convex-concave procedure on the scaled reformulation
//!   of the ratio problem.
//! * [`lp_solve_linf`] — the per-coordinate linear-program method, `q = inf`
//!   only.
//! * [`bpdn_solve`] — the plain l1 baseline (basis-pursuit denoising).
//! * [`l1_minus_l2_solve`] — the l1-minus-l2 baseline, a single
//!   difference-of-convex run at unit weight, `q = 2` only.
//!
//! All methods share the convex subproblem engine in [`crate::conic`], the
//! same feasibility pre-checks, and the same report format.

mod baselines;
mod ccp;
mod dca;
mod lp_inf;
mod pm;
mod subgrad;
mod sweep;

pub use baselines::{bpdn_solve, bpdn_solve_with, l1_minus_l2_solve, l1_minus_l2_solve_with};
pub use ccp::{ccp_solve, ccp_solve_with, CcpState};
pub use dca::{dca_solve_q, dca_solve_q_with};
pub use lp_inf::{lp_solve_linf, lp_solve_linf_with};
pub use pm::{pm_solve, pm_solve_with, ParametricState};
pub use subgrad::lq_subgradient;

use crate::conic::Tolerances;
use crate::model::{l2_norm, linalg, linf_norm, DenseMatrix, SolveReport, Termination};
use crate::{Error, Float, RecoveryProblem, Result};

/// Shared tuning knobs for every solver.
#[derive(Debug, Clone)]
pub struct SolverOptions<F> {
    /// Tolerances for the inner subproblem engine.
    pub engine: Tolerances<F>,
    /// Enable the deterministic per-coordinate start sweep on small problems.
    pub sweep: bool,
    /// Largest signal dimension the sweep is attempted on.
    pub sweep_max_dim: usize,
    /// Engine iteration cap while generating sweep candidates (candidates
    /// need not be solved to optimality).
    pub sweep_iter_cap: usize,
    /// Outer iteration cap for the parametric method.
    pub max_outer: usize,
    /// Step cap for each difference-of-convex inner run.
    pub dca_max_steps: usize,
    /// Relative step tolerance `||x+ - x|| / max(||x||, 1)` for the inner run.
    pub dca_step_tol: F,
    /// Step cap for the convex-concave procedure.
    pub ccp_max_steps: usize,
    /// Relative objective tolerance for the convex-concave procedure.
    pub ccp_step_tol: F,
    /// The l1-norm cap is `a_cap_factor` times the l1 norm of the plain-l1
    /// solution when no explicit cap is given.
    pub a_cap_factor: F,
    /// Refine final iterates by re-solving on the detected support
    /// (accepted only when feasibility holds and the objective improves).
    pub polish: bool,
    /// Optional coordinate bounds for the residual-form subproblems.
    pub box_bounds: Option<(F, F)>,
}

impl<F: Float> Default for SolverOptions<F> {
    fn default() -> Self {
        SolverOptions {
            engine: Tolerances::default(),
            sweep: true,
            sweep_max_dim: 64,
            sweep_iter_cap: 2000,
            max_outer: 50,
            dca_max_steps: 100,
            dca_step_tol: F::c(1e-8),
            ccp_max_steps: 100,
            ccp_step_tol: F::c(1e-8),
            a_cap_factor: F::c(100.0),
            polish: true,
            box_bounds: None,
        }
    }
}

/// Outcome of the shared feasibility pre-checks.
#[derive(Debug)]
pub(crate) enum Precheck {
    /// `||y||_2 <= eta`: zero is feasible and the ratio is undefined there.
    DegenerateZero,
    /// The problem has feasible points away from zero.
    Proceed,
}

/// Degeneracy and infeasibility checks run before any iteration: the zero
/// case short-circuits, and measurements certifiably outside the feasible
/// range error out with the distance excess.
pub(crate) fn precheck<F: Float>(problem: &RecoveryProblem<F>) -> Result<Precheck> {
    let y = problem.measurements.as_slice();
    if l2_norm(y) <= problem.noise_bound {
        return Ok(Precheck::DegenerateZero);
    }
    let dist = linalg::range_distance(&problem.matrix, y);
    let slack = F::c(1e-9) * (F::one() + l2_norm(y));
    if dist > problem.noise_bound + slack {
        return Err(Error::Infeasible {
            excess: (dist - problem.noise_bound).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(Precheck::Proceed)
}

/// Zero-solution report for degenerate instances.
pub(crate) fn degenerate_report<F: Float>(
    method: &'static str,
    problem: &RecoveryProblem<F>,
    wall_time: f64,
) -> Result<SolveReport<F>> {
    SolveReport::finish(
        method,
        problem,
        vec![F::zero(); problem.dimension()],
        0,
        0,
        Termination::DegenerateZero,
        wall_time,
    )
}

/// Support-restricted refinement of a candidate solution: least-squares
/// re-solve on the detected support, accepted only when the result stays
/// feasible and does not worsen the ratio objective beyond first-order
/// engine accuracy.  (An inexact engine point can undershoot the true ratio
/// by its own feasibility error, so the margin must cover that scale or the
/// exact refit would be rejected.)  Returns `None` when no acceptable
/// refinement exists.
pub(crate) fn polish_on_support<F: Float>(
    problem: &RecoveryProblem<F>,
    z: &[F],
) -> Option<Vec<F>> {
    let m = problem.measurement_count();
    let n = problem.dimension();
    let peak = linf_norm(z);
    if peak <= F::zero() {
        return None;
    }
    let cutoff = F::c(1e-5) * peak;
    let support: Vec<usize> = (0..n).filter(|&j| z[j].abs() > cutoff).collect();
    if support.is_empty() || support.len() > m {
        return None;
    }
    let mut cols = vec![F::zero(); m * support.len()];
    for i in 0..m {
        for (js, &j) in support.iter().enumerate() {
            cols[i * support.len() + js] = problem.matrix.get(i, j);
        }
    }
    let sub = DenseMatrix::new(m, support.len(), cols).ok()?;
    let qr = linalg::PivotedQr::factor(&sub);
    let (coef, _) = qr.least_squares(problem.measurements.as_slice());
    let mut refined = vec![F::zero(); n];
    for (js, &j) in support.iter().enumerate() {
        refined[j] = coef[js];
    }
    let slack = F::c(1e-9) * (F::one() + l2_norm(problem.measurements.as_slice()));
    if problem.residual_norm(&refined) > problem.noise_bound + slack {
        return None;
    }
    match (
        problem.ratio_objective(&refined),
        problem.ratio_objective(z),
    ) {
        (Some(new), Some(old)) if new <= old * (F::one() + F::c(1e-5)) => Some(refined),
        _ => None,
    }
}

/// Map an engine status to a report termination for methods where the
/// subproblems are known bounded.
pub(crate) fn termination_of(status: crate::conic::ConicStatus) -> Termination {
    match status {
        crate::conic::ConicStatus::Optimal => Termination::Converged,
        crate::conic::ConicStatus::Infeasible => Termination::Infeasible,
        _ => Termination::MaxIterations,
    }
}

/// Pull a final iterate back inside the noise ball.  Solvers assemble their
/// answer from first-order subproblem iterates that satisfy the constraint
/// only to engine accuracy — and the scaled-form methods divide by the scale
/// variable, which amplifies that slack — so the returned point can sit a
/// hair outside the ball.  Subtracting the least-squares correction `d` with
/// `A d = ` (in-range part of `A x - y`), scaled so the corrected residual
/// lands just inside the bound, removes exactly the violation: the move is
/// proportional to it, and an already-feasible point is returned untouched.
/// Returns whether the final point satisfies the constraint within rounding
/// slack.
pub(crate) fn restore_feasibility<F: Float>(
    problem: &RecoveryProblem<F>,
    x: &mut [F],
) -> bool {
    let y = problem.measurements.as_slice();
    let eta = problem.noise_bound;
    let slack = F::c(1e-9) * (F::one() + l2_norm(y));
    let mut r = problem
        .matrix
        .matvec(x)
        .expect("solution length matches the matrix");
    for (ri, &yi) in r.iter_mut().zip(y) {
        *ri -= yi;
    }
    let rho = l2_norm(&r);
    if rho <= eta + slack {
        return true;
    }
    let (d, perp) = linalg::PivotedQr::factor(&problem.matrix).least_squares(&r);
    let range_part = (rho * rho - perp * perp).max(F::zero()).sqrt();
    if range_part <= F::zero() {
        // The violation lies entirely outside range(A); no correction can
        // shrink it, and the infeasibility precheck bounds it by the same
        // slack used here.
        return perp <= eta + slack;
    }
    // Shrink the in-range residual so the total lands a hair inside the
    // bound, absorbing the rounding of the recomputation below.
    let target =
        (eta * eta - perp * perp).max(F::zero()).sqrt() * (F::one() - F::c(1e-12));
    let shrink = F::one() - target / range_part;
    for (xi, &di) in x.iter_mut().zip(d.iter()) {
        *xi -= shrink * di;
    }
    problem.residual_norm(x) <= eta + slack
}

/// Run the final feasibility restoration and keep a convergence claim only
/// when the restored point actually satisfies the constraint.
pub(crate) fn certify<F: Float>(
    problem: &RecoveryProblem<F>,
    solution: &mut [F],
    termination: Termination,
) -> Termination {
    let feasible = restore_feasibility(problem, solution);
    match termination {
        Termination::Converged if !feasible => Termination::MaxIterations,
        t => t,
    }
}
