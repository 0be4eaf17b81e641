//! Operator-splitting loop shared by every subproblem template.
//!
//! The iteration splits the variable into a separable copy `s` (which absorbs
//! the l1 term, sign constraints, l1-ball cap, and scale floor) and an image
//! copy `w = M x` (which is projected onto the residual ball or second-order
//! cone).  The linear-system step uses the identity
//! `(I + M^T M)^{-1} v = v - M^T (I + M M^T)^{-1} M v`, so only a small
//! `p x p` Cholesky factor is kept, computed once per program.

use super::{ConeTarget, ConicProgram, Objective};
use crate::model::{l2_norm, linf_norm};
use crate::Float;

/// Outcome classification for one engine run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    /// Both residuals met their tolerances.
    Optimal,
    /// Iteration budget exhausted without a verdict.
    MaxIter,
    /// Iteration budget exhausted with the primal residual stuck far above
    /// its tolerance: the constraints admit no common point.
    Infeasible,
    /// Iterates diverged; the objective is unbounded below on the feasible
    /// set.
    Unbounded,
}

impl ConicStatus {
    /// Stable lowercase identifier used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            ConicStatus::Optimal => "optimal",
            ConicStatus::MaxIter => "max_iter",
            ConicStatus::Infeasible => "infeasible",
            ConicStatus::Unbounded => "unbounded",
        }
    }
}

/// Solution of one subproblem solve.
#[derive(Debug, Clone)]
pub struct ConicSolution<F> {
    /// Primal point in the template's variable space.
    pub point: Vec<F>,
    /// Objective value `l1_weight * ||x||_1 - linear . x` at the point.
    pub objective: F,
    /// Final primal residual.
    pub primal_residual: F,
    /// Final dual residual.
    pub dual_residual: F,
    /// Iterations consumed.
    pub iterations: usize,
    /// Status classification.
    pub status: ConicStatus,
}

/// Full iterate state, returned from every solve so a caller can warm-start
/// the next one in a sequence of slowly varying objectives.
#[derive(Debug, Clone)]
pub struct WarmState<F> {
    pub(crate) x: Vec<F>,
    pub(crate) s: Vec<F>,
    pub(crate) w: Vec<F>,
    pub(crate) u_s: Vec<F>,
    pub(crate) u_w: Vec<F>,
    pub(crate) rho: F,
}

/// Stopping and safety parameters for the engine.
#[derive(Debug, Clone)]
pub struct Tolerances<F> {
    /// Absolute residual tolerance.
    pub eps_abs: F,
    /// Relative residual tolerance.
    pub eps_rel: F,
    /// Iteration budget.
    pub max_iter: usize,
    /// Sup-norm bound beyond which iterates count as divergent.
    pub diverge_cap: F,
}

impl<F: Float> Default for Tolerances<F> {
    fn default() -> Self {
        Tolerances {
            eps_abs: F::c(1e-7),
            eps_rel: F::c(1e-7),
            max_iter: 20_000,
            diverge_cap: F::c(1e9),
        }
    }
}

impl<F: Float> Tolerances<F> {
    /// Same tolerances with a different iteration budget.
    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// Same tolerances with a different divergence cap.
    pub fn with_diverge_cap(mut self, cap: F) -> Self {
        self.diverge_cap = cap;
        self
    }
}

const OVER_RELAXATION: f64 = 1.7;
const CHECK_EVERY: usize = 10;
const ADAPT_EVERY: usize = 50;
const RHO_MIN: f64 = 1e-4;
const RHO_MAX: f64 = 1e4;
// Hopeless-run exit: compare residual progress across windows of this many
// iterations, starting only after the run has had time to adapt its step.
const STALL_WINDOW: usize = 2_000;
const STALL_MIN_ITERS: usize = 4_000;

impl<F: Float> ConicProgram<F> {
    /// Run the splitting iteration for one objective, optionally warm-started
    /// from a previous solve on the same program.
    pub fn solve(
        &self,
        objective: &Objective<F>,
        tol: &Tolerances<F>,
        warm: Option<&WarmState<F>>,
    ) -> (ConicSolution<F>, WarmState<F>) {
        let d = self.variable_dim();
        let p = self.image_dim();
        objective.check_dims(d, self.l1_ball.is_some());

        let mut state = match warm {
            Some(ws) => {
                debug_assert_eq!(ws.x.len(), d);
                debug_assert_eq!(ws.w.len(), p);
                ws.clone()
            }
            None => WarmState {
                x: vec![F::zero(); d],
                s: vec![F::zero(); d],
                w: vec![F::zero(); p],
                u_s: vec![F::zero(); d],
                u_w: vec![F::zero(); p],
                rho: F::one(),
            },
        };

        let alpha = F::c(OVER_RELAXATION);
        let one_minus_alpha = F::one() - alpha;

        // Scratch buffers reused across iterations.
        let mut rhs = vec![F::zero(); d];
        let mut buf_p = vec![F::zero(); p];
        let mut buf_d = vec![F::zero(); d];
        let mut mx = vec![F::zero(); p];
        let mut xs_relaxed = vec![F::zero(); d];
        let mut xw_relaxed = vec![F::zero(); p];
        let mut s_prev = vec![F::zero(); d];
        let mut w_prev = vec![F::zero(); p];
        let mut x_check = vec![F::zero(); d];

        let mut primal_residual = F::infinity();
        let mut dual_residual = F::infinity();
        let mut primal_tol = F::zero();
        let mut halfway_residual: Option<F> = None;
        // (iteration, max normalized residual, primal residual) one stall
        // window ago, for the hopeless-run extrapolation.
        let mut stall_mark: Option<(usize, F, F)> = None;
        let mut status = ConicStatus::MaxIter;
        let mut iterations = tol.max_iter;

        for iter in 0..tol.max_iter {
            // x-update: (I + M^T M)^{-1} ((s - u_s) + M^T (w - u_w)).
            for j in 0..p {
                buf_p[j] = state.w[j] - state.u_w[j];
            }
            self.matrix.mul_t_vec(&buf_p, &mut rhs);
            for j in 0..d {
                rhs[j] += state.s[j] - state.u_s[j];
            }
            self.matrix.mul_vec(&rhs, &mut buf_p);
            self.cache.solve_in_place(&mut buf_p);
            self.matrix.mul_t_vec(&buf_p, &mut buf_d);
            for j in 0..d {
                state.x[j] = rhs[j] - buf_d[j];
            }
            self.matrix.mul_vec(&state.x, &mut mx);

            // Over-relaxed mixes feeding the s- and w-updates.
            for j in 0..d {
                xs_relaxed[j] = alpha * state.x[j] + one_minus_alpha * state.s[j];
            }
            for j in 0..p {
                xw_relaxed[j] = alpha * mx[j] + one_minus_alpha * state.w[j];
            }

            s_prev.copy_from_slice(&state.s);
            w_prev.copy_from_slice(&state.w);

            for j in 0..d {
                state.s[j] = xs_relaxed[j] + state.u_s[j];
            }
            self.prox_separable(&mut state.s, state.rho, objective);

            for j in 0..p {
                state.w[j] = xw_relaxed[j] + state.u_w[j];
            }
            self.project_cone(&mut state.w);

            for j in 0..d {
                state.u_s[j] += xs_relaxed[j] - state.s[j];
            }
            for j in 0..p {
                state.u_w[j] += xw_relaxed[j] - state.w[j];
            }

            if (iter + 1) % CHECK_EVERY == 0 || iter + 1 == tol.max_iter {
                // Primal residual over both splits.
                let mut rp = F::zero();
                for j in 0..d {
                    let e = state.x[j] - state.s[j];
                    rp += e * e;
                }
                for j in 0..p {
                    let e = mx[j] - state.w[j];
                    rp += e * e;
                }
                let rp = rp.sqrt();

                // Dual residual rho * ||(s - s_prev) + M^T (w - w_prev)||.
                for j in 0..p {
                    buf_p[j] = state.w[j] - w_prev[j];
                }
                self.matrix.mul_t_vec(&buf_p, &mut buf_d);
                let mut rd = F::zero();
                for j in 0..d {
                    let e = state.s[j] - s_prev[j] + buf_d[j];
                    rd += e * e;
                }
                let rd = state.rho * rd.sqrt();

                let norm_x = l2_norm(&state.x);
                let norm_mx = l2_norm(&mx);
                let norm_s = l2_norm(&state.s);
                let norm_w = l2_norm(&state.w);
                let scale_p = (norm_x + norm_mx).max(norm_s + norm_w);
                let ep = F::from_usize(d + p).expect("dimension fits scalar").sqrt()
                    * tol.eps_abs
                    + tol.eps_rel * scale_p;

                self.matrix.mul_t_vec(&state.u_w, &mut buf_d);
                let mut dual_vec = F::zero();
                for j in 0..d {
                    let e = state.u_s[j] + buf_d[j];
                    dual_vec += e * e;
                }
                let ed = F::from_usize(d).expect("dimension fits scalar").sqrt() * tol.eps_abs
                    + tol.eps_rel * state.rho * dual_vec.sqrt();

                primal_residual = rp;
                dual_residual = rd;
                primal_tol = ep;
                if halfway_residual.is_none() && iter + 1 >= tol.max_iter / 2 {
                    halfway_residual = Some(rp);
                }

                if rp <= ep && rd <= ed {
                    status = ConicStatus::Optimal;
                    iterations = iter + 1;
                    break;
                }
                if linf_norm(&state.x) > tol.diverge_cap
                    || self.certifies_unbounded(&state.x, &x_check, objective, &mut buf_d, &mut buf_p)
                {
                    status = ConicStatus::Unbounded;
                    iterations = iter + 1;
                    break;
                }
                x_check.copy_from_slice(&state.x);

                // Hopeless-run exit: extrapolate the geometric decay of the
                // worse normalized residual over the last window; if even
                // triple the remaining budget cannot reach tolerance, stop
                // now.  A run that would have converged within the budget is
                // never cut off by this test, and the magnitude gate keeps
                // nearly-converged crawlers running — their iterates are
                // already usable, so cutting them off would change outcomes
                // rather than save wasted work.
                if iter + 1 >= STALL_MIN_ITERS {
                    let progress = (rp / ep).max(rd / ed);
                    match stall_mark {
                        Some((mark_iter, mark_progress, mark_rp))
                            if iter + 1 - mark_iter >= STALL_WINDOW =>
                        {
                            let rate = progress / mark_progress;
                            let far_from_tolerance = progress > F::c(50.0);
                            let hopeless = rate >= F::one() || {
                                let windows_needed = progress.ln() / -rate.ln();
                                let remaining =
                                    F::from_usize(tol.max_iter - (iter + 1)).unwrap_or(F::zero());
                                F::from_usize(STALL_WINDOW).expect("window fits scalar")
                                    * windows_needed
                                    > F::c(3.0) * remaining
                            };
                            if far_from_tolerance && hopeless {
                                // Let the final classification judge the last
                                // window rather than a never-reached halfway
                                // point.
                                halfway_residual.get_or_insert(mark_rp);
                                iterations = iter + 1;
                                break;
                            }
                            stall_mark = Some((iter + 1, progress, rp));
                        }
                        Some(_) => {}
                        None => stall_mark = Some((iter + 1, progress, rp)),
                    }
                }

                if (iter + 1) % ADAPT_EVERY == 0 {
                    let ten = F::c(10.0);
                    if rp > ten * rd && state.rho < F::c(RHO_MAX) {
                        state.rho *= F::c(2.0);
                        scale_duals(&mut state.u_s, &mut state.u_w, F::c(0.5));
                    } else if rd > ten * rp && state.rho > F::c(RHO_MIN) {
                        state.rho *= F::c(0.5);
                        scale_duals(&mut state.u_s, &mut state.u_w, F::c(2.0));
                    }
                }
            }
        }

        // An infeasible instance drives the splitting to a fixed positive
        // residual, while a slow-but-convergent solve keeps shrinking it, so
        // the verdict needs both a large final residual and stagnation over
        // the second half of the run.
        if status == ConicStatus::MaxIter
            && primal_residual > F::c(1e3) * primal_tol
            && halfway_residual.is_none_or(|h| primal_residual > F::c(0.5) * h)
        {
            status = ConicStatus::Infeasible;
        }

        let objective_value = objective.evaluate(&state.x, self.t_index);
        let solution = ConicSolution {
            point: state.x.clone(),
            objective: objective_value,
            primal_residual,
            dual_residual,
            iterations,
            status,
        };
        (solution, state)
    }

    /// Separable prox: linear shift, soft-threshold, sign clamps, l1-ball
    /// cap, and scale floor, in that order.  The l1 weight and the l1-ball
    /// cap never co-occur in the templates this engine serves.
    fn prox_separable(&self, s: &mut [F], rho: F, objective: &Objective<F>) {
        let tau = rho.recip();
        let lam = objective.l1_weight;
        for (j, e) in s.iter_mut().enumerate() {
            let mut v = *e;
            if let Some(c) = objective.linear.as_ref() {
                v += tau * c[j];
            }
            if Some(j) == self.t_index {
                v = v.max(self.t_lower);
            } else {
                if lam > F::zero() {
                    v = super::proj::soft_threshold(v, tau * lam);
                }
                if self.nonneg[j] {
                    v = v.max(F::zero());
                }
                if let Some((lo, hi)) = self.box_bounds {
                    v = v.max(lo).min(hi);
                }
            }
            *e = v;
        }
        if let Some(radius) = self.l1_ball {
            super::proj::project_l1_ball_in_place(s, radius, self.t_index);
        }
    }

    /// Unboundedness certificate: the normalized step direction between two
    /// residual checks lies in the recession cone of every constraint and
    /// strictly decreases the objective along its ray, so the iterates are
    /// tracking an unbounded descent direction.
    fn certifies_unbounded(
        &self,
        x: &[F],
        x_check: &[F],
        objective: &Objective<F>,
        dir: &mut [F],
        image: &mut [F],
    ) -> bool {
        let mut step = F::zero();
        for j in 0..x.len() {
            let e = x[j] - x_check[j];
            step += e * e;
        }
        let step = step.sqrt();
        if step <= F::c(1e-12) * (F::one() + l2_norm(x)) {
            return false;
        }
        for j in 0..x.len() {
            dir[j] = (x[j] - x_check[j]) / step;
        }
        let tol_dir = F::c(1e-6);

        // Separable-set recession: sign-constrained and floor-bounded
        // coordinates may not decrease; l1-capped and box-bounded
        // coordinates may not move.
        let mut capped_l1 = F::zero();
        for (j, &dj) in dir.iter().enumerate() {
            if Some(j) == self.t_index {
                if dj < -tol_dir {
                    return false;
                }
            } else {
                if self.nonneg[j] && dj < -tol_dir {
                    return false;
                }
                if self.box_bounds.is_some() && dj.abs() > tol_dir {
                    return false;
                }
                if self.l1_ball.is_some() {
                    capped_l1 += dj.abs();
                }
            }
        }
        if self.l1_ball.is_some() && capped_l1 > tol_dir {
            return false;
        }

        // Cone recession: a ball only absorbs the zero direction, the
        // second-order cone absorbs itself.
        self.matrix.mul_vec(dir, image);
        match &self.cone {
            ConeTarget::Ball { .. } => {
                if l2_norm(image) > tol_dir {
                    return false;
                }
            }
            ConeTarget::Soc => {
                let p = image.len();
                if l2_norm(&image[..p - 1]) > image[p - 1] + tol_dir {
                    return false;
                }
            }
        }

        // Objective must fall strictly along the ray.
        let mut growth = F::zero();
        if objective.l1_weight > F::zero() {
            let mut l1 = F::zero();
            for (j, &dj) in dir.iter().enumerate() {
                if Some(j) != self.t_index {
                    l1 += dj.abs();
                }
            }
            growth += objective.l1_weight * l1;
        }
        let mut c_scale = F::zero();
        if let Some(c) = objective.linear.as_ref() {
            growth -= crate::model::dot(c, dir);
            c_scale = l2_norm(c);
        }
        growth < -F::c(1e-6) * (F::one() + c_scale)
    }

    fn project_cone(&self, w: &mut [F]) {
        match &self.cone {
            ConeTarget::Ball { center, radius } => {
                super::proj::project_ball_in_place(w, center, *radius);
            }
            ConeTarget::Soc => super::proj::project_soc_in_place(w),
        }
    }
}

fn scale_duals<F: Float>(u_s: &mut [F], u_w: &mut [F], factor: F) {
    for e in u_s.iter_mut() {
        *e *= factor;
    }
    for e in u_w.iter_mut() {
        *e *= factor;
    }
}
