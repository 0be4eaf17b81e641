//! Recovery certificates for a measurement matrix: kernel ratio infima, the
//! sufficient condition for uniform recovery, ratio-constrained minimal
//! singular values, and evaluated error bounds.
//!
//! Everything in this module is diagnostic. The solvers never consult these
//! quantities; they exist so that a matrix can be judged before (or an output
//! audited after) a recovery run. Each estimated quantity is labeled with the
//! direction it can err in: the `q = infinity` kernel ratio infimum is exact,
//! while the finite-`q` variant and the minimal-singular-value search are
//! multi-start local methods whose results are upper bounds on the true
//! infima.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::conic::{
    solve_subproblem, ConicProgram, ConicStatus, Objective, Tolerances,
};
use crate::error::Error;
use crate::model::linalg::{kernel_basis, KernelSpace};
use crate::model::rng::{derive_seed, seeded_rng};
use crate::model::{
    l1_norm, l2_norm, linf_norm, lq_norm, DenseMatrix, RatioQ, RecoveryProblem, SignalVector,
};
use crate::solvers::{lq_subgradient, pm_solve};
use crate::sparsity::{best_k_term_error, q_ratio_sparsity};
use crate::{Float, Result};

/// Default master seed for the multi-start searches. Fixed so that repeated
/// calls with the same inputs return the same estimate; callers who want
/// independent replicates pass their own seed through the `_with` variants.
const MASTER_SEED: u64 = 1729;

/// Default number of random restarts for the kernel ratio search.
const KERNEL_RESTARTS: usize = 50;

/// Default number of random starts for the minimal-singular-value search.
const CMSV_STARTS: usize = 100;

/// Certificate quantities for one matrix at one sparsity order.
///
/// Fields are optional because each entry point fills in only what it
/// computes; `notes` records the direction of every estimate ("exact",
/// "upper_bound") so a consumer never mistakes a local search result for a
/// certified value.
#[derive(Debug, Clone)]
pub struct CertificateReport<F: Float> {
    /// Infimum of `‖h‖₁ / ‖h‖_q` over the nonzero kernel of the matrix.
    pub kernel_ratio_inf: Option<F>,
    /// Largest sparsity level for which the kernel condition guarantees
    /// uniform recovery (the recovery threshold).
    pub sufficient_k: Option<F>,
    /// Estimated ratio-constrained minimal singular value.
    pub cmsv_estimate: Option<F>,
    /// Sparsity level the minimal-singular-value estimate was taken at.
    pub cmsv_level: Option<F>,
    /// Observed `‖x̂ − x‖_q` when a ground truth was supplied.
    pub error_q: Option<F>,
    /// Observed `‖x̂ − x‖₁` when a ground truth was supplied.
    pub error_l1: Option<F>,
    /// Exact-sparsity bound on `‖x̂ − x‖_q`.
    pub theorem1_bound_q: Option<F>,
    /// Exact-sparsity bound on `‖x̂ − x‖₁`.
    pub theorem1_bound_l1: Option<F>,
    /// Compressible-signal bound on `‖x̂ − x‖_q`, split into its noise term
    /// and its tail term (their sum is the bound).
    pub theorem2_components: Option<(F, F)>,
    /// Compressible-signal bound on `‖x̂ − x‖₁`.
    pub theorem2_bound_l1: Option<F>,
    /// Sparsity level at which the compressible-signal bound needs the
    /// minimal singular value.
    pub c_q: Option<F>,
    /// Best `k`-term approximation error `σ_k(x)₁` of the ground truth.
    pub sigma_k1: Option<F>,
    /// Provenance labels, e.g. which quantities are exact vs. upper bounds.
    pub notes: Vec<String>,
}

impl<F: Float> Default for CertificateReport<F> {
    fn default() -> Self {
        Self {
            kernel_ratio_inf: None,
            sufficient_k: None,
            cmsv_estimate: None,
            cmsv_level: None,
            error_q: None,
            error_l1: None,
            theorem1_bound_q: None,
            theorem1_bound_l1: None,
            theorem2_components: None,
            theorem2_bound_l1: None,
            c_q: None,
            sigma_k1: None,
            notes: Vec::new(),
        }
    }
}

impl<F: Float> CertificateReport<F> {
    pub fn to_json(&self) -> Value {
        fn num<F: Float>(v: Option<F>) -> Value {
            match v {
                Some(x) if x == F::infinity() => json!("inf"),
                Some(x) => json!(x.to_f64().unwrap_or(f64::NAN)),
                None => Value::Null,
            }
        }
        json!({
            "kernel_ratio_inf": num(self.kernel_ratio_inf),
            "sufficient_k": num(self.sufficient_k),
            "cmsv_estimate": num(self.cmsv_estimate),
            "cmsv_level": num(self.cmsv_level),
            "error_q": num(self.error_q),
            "error_l1": num(self.error_l1),
            "theorem1_bound_q": num(self.theorem1_bound_q),
            "theorem1_bound_l1": num(self.theorem1_bound_l1),
            "theorem2_components": self.theorem2_components.map(|(a, b)| {
                json!([a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN)])
            }).unwrap_or(Value::Null),
            "theorem2_bound_l1": num(self.theorem2_bound_l1),
            "c_q": num(self.c_q),
            "sigma_k1": num(self.sigma_k1),
            "notes": self.notes,
        })
    }
}

/// Exact infimum of `‖h‖₁ / ‖h‖_∞` over nonzero kernel vectors of `a`.
///
/// Every nonzero kernel vector can be scaled so that some coordinate equals
/// ±1 and no coordinate exceeds 1 in magnitude; the infimum is therefore the
/// minimum over all `2N` pinned linear programs
/// `min ‖h‖₁ s.t. A h = 0, ±h_i = 1`. The minimum over the pinned programs
/// is attained and equals the infimum, so the returned value is exact up to
/// engine tolerance. Returns `+∞` when the kernel is trivial.
pub fn kernel_ratio_inf_linf<F: Float>(a: &DenseMatrix<F>) -> Result<F> {
    let n = a.cols();
    let m = a.rows();
    let kernel = KernelSpace::new(a);
    if kernel.kernel_dim() == 0 {
        return Ok(F::infinity());
    }
    // A pinned program is feasible only if coordinate `i` is reachable inside
    // the kernel; skip coordinates whose kernel projection vanishes rather
    // than asking the engine to certify infeasibility.
    let mut jobs: Vec<(usize, F)> = Vec::new();
    for i in 0..n {
        let mut e = vec![F::zero(); n];
        e[i] = F::one();
        if l2_norm(&kernel.project_kernel(&e)) <= F::c(1e-10) {
            continue;
        }
        jobs.push((i, F::one()));
        jobs.push((i, -F::one()));
    }
    let tol = Tolerances::default();
    let values = jobs
        .par_iter()
        .map(|&(i, sign)| -> Result<F> {
            let mut data = Vec::with_capacity((m + 1) * n);
            for r in 0..m {
                data.extend_from_slice(a.row(r));
            }
            let mut pin = vec![F::zero(); n];
            pin[i] = sign;
            data.extend_from_slice(&pin);
            let stacked = DenseMatrix::new(m + 1, n, data)?;
            let mut target = vec![F::zero(); m + 1];
            target[m] = F::one();
            let program = ConicProgram::residual_form(&stacked, &target, F::zero())?;
            let (sol, _) = solve_subproblem(&program, &Objective::l1(F::one()), &tol, None);
            match sol.status {
                ConicStatus::Infeasible | ConicStatus::Unbounded => Ok(F::infinity()),
                _ => Ok(l1_norm(&sol.point)),
            }
        })
        .collect::<Result<Vec<F>>>()?;
    Ok(values.into_iter().fold(F::infinity(), F::min))
}

/// One ascent run of the linearized kernel-ratio search from `start`.
///
/// Maximizes `‖h‖_q` over `{A h = 0, ‖h‖₁ ≤ 1}` by repeatedly replacing the
/// objective with its supporting hyperplane at the current point. Every
/// accepted step does not decrease `‖h‖_q`; the run stops on stall,
/// convergence, or the step budget.
fn kernel_ascent_run<F: Float>(
    program: &ConicProgram<F>,
    start: &[F],
    q: RatioQ<F>,
    tol: &Tolerances<F>,
) -> Result<F> {
    let mut h = start.to_vec();
    let mut val = lq_norm(&h, q);
    let mut warm = None;
    for _ in 0..100 {
        let g = lq_subgradient(&h, q)?;
        let (sol, next_warm) = solve_subproblem(program, &Objective::linear(g), tol, warm.as_ref());
        warm = Some(next_warm);
        if matches!(sol.status, ConicStatus::Infeasible | ConicStatus::Unbounded) {
            break;
        }
        let new_val = lq_norm(&sol.point, q);
        if new_val < val - F::c(1e-12) {
            break;
        }
        let gain = (new_val - val).abs() / val.max(F::c(1e-12));
        h = sol.point;
        val = new_val;
        if gain < F::c(1e-8) {
            break;
        }
    }
    let l1 = l1_norm(&h);
    if l1 <= F::c(1e-12) {
        // The run collapsed to the origin; report no candidate.
        return Ok(F::infinity());
    }
    Ok(l1 / lq_norm(&h, q))
}

/// Multi-start estimate of the kernel ratio infimum for finite `q`.
///
/// Runs [`kernel_ascent_run`] from every kernel basis column and from
/// `restarts` random kernel vectors `h = Bξ`, `ξ ~ N(0, I)`, and returns the
/// smallest ratio found. The result is an **upper bound** on the true
/// infimum: each candidate is a feasible kernel vector, but the search is
/// local. Use [`kernel_ratio_inf_linf`] for the exact value at `q = ∞`.
pub fn kernel_ratio_inf_ccp<F: Float>(a: &DenseMatrix<F>, q: RatioQ<F>) -> Result<F> {
    kernel_ratio_inf_ccp_with(a, q, KERNEL_RESTARTS, MASTER_SEED)
}

/// [`kernel_ratio_inf_ccp`] with explicit restart count and seed.
pub fn kernel_ratio_inf_ccp_with<F: Float>(
    a: &DenseMatrix<F>,
    q: RatioQ<F>,
    restarts: usize,
    seed: u64,
) -> Result<F> {
    if q.is_infinite() {
        return Err(Error::InvalidParameter(
            "the linearized kernel search needs finite q; q = inf has the exact pinned-program method".into(),
        ));
    }
    let Some(basis) = kernel_basis(a) else {
        return Ok(F::infinity());
    };
    let n = a.cols();
    let d = basis.cols();
    let mut starts: Vec<Vec<F>> = Vec::with_capacity(d + restarts);
    for j in 0..d {
        let col = basis.col(j);
        let l1 = l1_norm(&col);
        if l1 > F::c(1e-12) {
            starts.push(col.iter().map(|&v| v / l1).collect());
        }
    }
    for r in 0..restarts {
        let mut rng = seeded_rng(derive_seed(seed, &[r as u64]));
        let xi: Vec<F> = (0..d)
            .map(|_| F::c(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let mut h = vec![F::zero(); n];
        basis.mul_vec(&xi, &mut h);
        let l1 = l1_norm(&h);
        if l1 > F::c(1e-12) {
            for v in h.iter_mut() {
                *v /= l1;
            }
            starts.push(h);
        }
    }
    if starts.is_empty() {
        return Ok(F::infinity());
    }
    let program = ConicProgram::kernel_form(a)?;
    let tol = Tolerances::default();
    let values = starts
        .par_iter()
        .map(|h0| kernel_ascent_run(&program, h0, q, &tol))
        .collect::<Result<Vec<F>>>()?;
    Ok(values.into_iter().fold(F::infinity(), F::min))
}

/// Checks the kernel sufficient condition for uniform recovery of all
/// `k`-sparse signals, returning `(satisfied, threshold)`.
///
/// The threshold is `inf_{h ∈ ker A \ {0}} 3^{q/(1-q)} · s_q(h)`, written as
/// `3^{-q/(q-1)} · r^{q/(q-1)}` with `r` the kernel ratio infimum; recovery
/// of every `k`-sparse signal is guaranteed when `k < threshold`. At
/// `q = ∞` the threshold uses the exact ratio and equals one third of it; at
/// finite `q` it inherits the upper-bound direction of the ratio estimate,
/// so `satisfied == true` may be optimistic while `false` is trustworthy
/// only relative to the estimate.
pub fn sufficient_condition_check<F: Float>(
    a: &DenseMatrix<F>,
    q: RatioQ<F>,
    k: usize,
) -> Result<(bool, F)> {
    let ratio = if q.is_infinite() {
        kernel_ratio_inf_linf(a)?
    } else {
        kernel_ratio_inf_ccp(a, q)?
    };
    if ratio == F::infinity() {
        return Ok((true, F::infinity()));
    }
    let e = q.sparsity_exponent();
    let threshold = F::c(3.0).powf(-e) * ratio.powf(e);
    let k_val = F::from_usize(k).unwrap_or_else(F::infinity);
    Ok((k_val < threshold, threshold))
}

/// Internal state for the minimal-singular-value search.
struct CmsvSearch<'a, F: Float> {
    a: &'a DenseMatrix<F>,
    q: RatioQ<F>,
    s: F,
}

impl<'a, F: Float> CmsvSearch<'a, F> {
    fn ratio(&self, z: &[F]) -> F {
        let mut az = vec![F::zero(); self.a.rows()];
        self.a.mul_vec(z, &mut az);
        l2_norm(&az) / lq_norm(z, self.q)
    }

    fn sparsity(&self, z: &[F]) -> F {
        q_ratio_sparsity(z, self.q.into())
            .map(|v| v.value)
            .unwrap_or_else(|_| F::infinity())
    }

    /// Projects `z` into the constraint set `{s_q(z) ≤ s}` by soft
    /// thresholding, then normalizes to `‖z‖_q = 1`.
    ///
    /// Soft thresholding at `τ = 0` leaves `z` unchanged; as `τ → ‖z‖_∞` it
    /// keeps only the peak coordinates, whose sparsity measure is their tie
    /// count (1 in general position). The measure is not monotone in `τ` in
    /// general, so a bisection tracks a certified-feasible upper endpoint
    /// and returns that endpoint's thresholded vector.
    fn project(&self, z: &[F]) -> Option<Vec<F>> {
        let peak = linf_norm(z);
        if peak <= F::c(1e-300) {
            return None;
        }
        let mut w = z.to_vec();
        if self.sparsity(&w) > self.s {
            let soft = |tau: F| -> Vec<F> {
                z.iter()
                    .map(|&v| {
                        let mag = v.abs() - tau;
                        if mag > F::zero() {
                            mag * v.signum()
                        } else {
                            F::zero()
                        }
                    })
                    .collect()
            };
            let mut lo = F::zero();
            let mut hi = peak * (F::one() - F::c(1e-12));
            if self.sparsity(&soft(hi)) > self.s {
                // Tied peaks outnumber the level; keep the single largest
                // coordinate, which is always feasible (s_q ≥ 1).
                let mut best = 0;
                for (i, v) in z.iter().enumerate() {
                    if v.abs() > z[best].abs() {
                        best = i;
                    }
                }
                w = vec![F::zero(); z.len()];
                w[best] = z[best];
            } else {
                for _ in 0..100 {
                    let mid = (lo + hi) / F::c(2.0);
                    if self.sparsity(&soft(mid)) <= self.s {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                w = soft(hi);
            }
        }
        let nq = lq_norm(&w, self.q);
        if nq <= F::c(1e-300) {
            return None;
        }
        for v in w.iter_mut() {
            *v /= nq;
        }
        Some(w)
    }

    /// Projected descent on the singular ratio from one start; returns the
    /// best feasible ratio seen. Steps are accepted only when they decrease
    /// the ratio, so the result is monotone in the iteration count.
    fn descend(&self, start: Vec<F>) -> F {
        let n = start.len();
        let Some(mut z) = self.project(&start) else {
            return F::infinity();
        };
        let mut best = self.ratio(&z);
        let mut step = F::c(0.25);
        for _ in 0..200 {
            let mut az = vec![F::zero(); self.a.rows()];
            self.a.mul_vec(&z, &mut az);
            let naz = l2_norm(&az);
            if naz <= F::c(1e-300) {
                return F::zero();
            }
            let mut grad_num = vec![F::zero(); n];
            self.a.mul_t_vec(&az, &mut grad_num);
            let Ok(gq) = lq_subgradient(&z, self.q) else {
                break;
            };
            // Gradient of the quotient at a point with ‖z‖_q = 1.
            let grad: Vec<F> = grad_num
                .iter()
                .zip(gq.iter())
                .map(|(&gn, &g)| gn / naz - naz * g)
                .collect();
            let gnorm = l2_norm(&grad);
            if gnorm <= F::c(1e-14) {
                break;
            }
            let mut accepted = false;
            while step > F::c(1e-12) {
                let trial: Vec<F> = z
                    .iter()
                    .zip(grad.iter())
                    .map(|(&zi, &gi)| zi - step * gi / gnorm)
                    .collect();
                if let Some(w) = self.project(&trial) {
                    let val = self.ratio(&w);
                    if val < best - F::c(1e-14) {
                        z = w;
                        best = val;
                        step = (step * F::c(1.2)).min(F::c(0.5));
                        accepted = true;
                        break;
                    }
                }
                step /= F::c(2.0);
            }
            if !accepted {
                break;
            }
        }
        best
    }
}

/// Multi-start estimate of the ratio-constrained minimal singular value
/// `min { ‖Az‖₂ / ‖z‖_q : z ≠ 0, s_q(z) ≤ s }`.
///
/// Each start is a random `⌊s⌋`-sparse Gaussian vector (feasible because a
/// `k`-sparse vector has `s_q ≤ k ≤ s`), refined by projected descent. The
/// returned minimum over starts is an **upper bound** on the true value:
/// every iterate is feasible, but the landscape is nonconvex.
pub fn cmsv_estimate<F: Float>(a: &DenseMatrix<F>, q: RatioQ<F>, s: F) -> Result<F> {
    cmsv_estimate_with(a, q, s, CMSV_STARTS, MASTER_SEED)
}

/// [`cmsv_estimate`] with explicit start count and seed.
pub fn cmsv_estimate_with<F: Float>(
    a: &DenseMatrix<F>,
    q: RatioQ<F>,
    s: F,
    starts: usize,
    seed: u64,
) -> Result<F> {
    let n = a.cols();
    let n_val = F::from_usize(n).unwrap_or_else(F::infinity);
    if !(s >= F::one() && s <= n_val) || !s.is_finite() {
        return Err(Error::InvalidParameter(
            "the sparsity level s must lie in [1, N]".into(),
        ));
    }
    if starts == 0 {
        return Err(Error::InvalidParameter(
            "the minimal-singular-value search needs at least one start".into(),
        ));
    }
    let k = s
        .floor()
        .to_usize()
        .map(|k| k.clamp(1, n))
        .unwrap_or(1);
    let search = CmsvSearch { a, q, s };
    let values: Vec<F> = (0..starts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(derive_seed(seed, &[r as u64]));
            let support = rand::seq::index::sample(&mut rng, n, k);
            let mut z = vec![F::zero(); n];
            for i in support {
                z[i] = F::c(rng.sample::<f64, _>(StandardNormal));
            }
            if l2_norm(&z) <= F::c(1e-300) {
                z = vec![F::zero(); n];
                z[r % n] = F::one();
            }
            search.descend(z)
        })
        .collect();
    Ok(values.into_iter().fold(F::infinity(), F::min))
}

/// Evaluates the recovery error bounds for a solved instance.
///
/// `x_true` is the ground truth, `x_hat` the solver output, `cmsv` a value
/// (or estimate) of the ratio-constrained minimal singular value at the
/// level each bound requires, and `k` the target sparsity. Produces observed
/// errors next to the bound values; it performs no pass/fail judgement,
/// since an estimated `cmsv` can make a bound spuriously tight or loose.
pub fn theorem_bounds<F: Float>(
    x_true: &[F],
    x_hat: &[F],
    problem: &RecoveryProblem<F>,
    cmsv: F,
    k: usize,
) -> Result<CertificateReport<F>> {
    if x_true.len() != x_hat.len() || x_true.len() != problem.dimension() {
        return Err(Error::DimensionMismatch(
            "ground truth, estimate, and problem must share one dimension".into(),
        ));
    }
    if !(cmsv > F::zero()) || !cmsv.is_finite() {
        return Err(Error::InvalidParameter(
            "the error bounds need a positive finite minimal singular value".into(),
        ));
    }
    if k == 0 || k > x_true.len() {
        return Err(Error::InvalidParameter(
            "the target sparsity k must lie in [1, N]".into(),
        ));
    }
    if l1_norm(x_true) <= F::c(1e-300) {
        return Err(Error::InvalidParameter(
            "the error bounds are stated for a nonzero ground truth".into(),
        ));
    }
    let q = problem.q;
    let eta = problem.noise_bound;
    let h: Vec<F> = x_hat
        .iter()
        .zip(x_true.iter())
        .map(|(&a, &b)| a - b)
        .collect();
    let e = q.sparsity_exponent();
    let omi = q.one_minus_inv();
    let k_val = F::from_usize(k).unwrap_or_else(F::infinity);
    let kq = q.pow_holder(k_val);
    let sq = q_ratio_sparsity(x_true, q.into())?.value;
    let sigma = best_k_term_error(x_true, k);

    let mut report = CertificateReport::default();
    report.error_q = Some(lq_norm(&h, q));
    report.error_l1 = Some(l1_norm(&h));
    report.cmsv_estimate = Some(cmsv);
    report.cmsv_level = Some(F::c(3.0).powf(e) * k_val);
    report.theorem1_bound_q = Some(F::c(2.0) * eta / cmsv);
    report.theorem1_bound_l1 = Some(F::c(6.0) * kq * eta / cmsv);
    let noise_term = F::c(2.0) * eta / cmsv;
    let tail_term = sigma / kq;
    report.theorem2_components = Some((noise_term, tail_term));
    report.theorem2_bound_l1 = Some(
        (F::c(4.0) * kq + F::c(2.0) * sq.powf(omi)) * eta / cmsv
            + (F::c(4.0) + (sq / k_val).powf(omi)) * sigma,
    );
    report.c_q = Some((F::c(4.0) * kq + sq.powf(omi)).powf(e));
    report.sigma_k1 = Some(sigma);
    report
        .notes
        .push("bounds_evaluated_with_supplied_cmsv".into());
    Ok(report)
}

/// Compares the constrained ratio infimum at measurements `y = Ax` against
/// the kernel ratio infimum, returning `(constrained, kernel)`.
///
/// For `x = 0` the constrained problem *is* the kernel problem, so both
/// entries repeat the kernel value. The kernel entry is exact at `q = ∞` and
/// an upper-bound estimate at finite `q`; the constrained entry comes from
/// the parametric solver at `η = 0`.
pub fn ratio_comparison<F: Float>(
    a: &DenseMatrix<F>,
    x: &[F],
    q: RatioQ<F>,
) -> Result<(F, F)> {
    if x.len() != a.cols() {
        return Err(Error::DimensionMismatch(
            "the signal length must match the matrix column count".into(),
        ));
    }
    let kernel_inf = if q.is_infinite() {
        kernel_ratio_inf_linf(a)?
    } else {
        kernel_ratio_inf_ccp(a, q)?
    };
    let mut y = vec![F::zero(); a.rows()];
    a.mul_vec(x, &mut y);
    if l2_norm(&y) <= F::c(1e-300) {
        return Ok((kernel_inf, kernel_inf));
    }
    let problem = RecoveryProblem::new(a.clone(), SignalVector::new(y)?, F::zero(), q)?;
    let report = pm_solve(&problem, F::c(1e-5))?;
    let constrained = report.objective_value.ok_or_else(|| {
        Error::InvalidParameter("the constrained ratio solve returned the zero vector".into())
    })?;
    Ok((constrained, kernel_inf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pinned_programs_find_the_two_coordinate_kernel_ratio() {
        // ker [1, -1] = span{(1, 1)}: ‖h‖₁/‖h‖_∞ = 2 on the whole line.
        let a = DenseMatrix::<f64>::new(1, 2, vec![1.0, -1.0]).unwrap();
        let r = kernel_ratio_inf_linf(&a).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn pinned_programs_see_a_free_coordinate() {
        // ker [1, 0] = span{(0, 1)}: the free coordinate gives ratio 1.
        let a = DenseMatrix::<f64>::new(1, 2, vec![1.0, 0.0]).unwrap();
        let r = kernel_ratio_inf_linf(&a).unwrap();
        assert_relative_eq!(r, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn trivial_kernel_reports_an_infinite_ratio() {
        let a = DenseMatrix::<f64>::identity(3);
        assert_eq!(kernel_ratio_inf_linf(&a).unwrap(), f64::INFINITY);
        let q = RatioQ::new(2.0).unwrap();
        assert_eq!(kernel_ratio_inf_ccp(&a, q).unwrap(), f64::INFINITY);
    }

    #[test]
    fn linearized_search_matches_the_one_line_kernel() {
        // On span{(1, 1)} the q = 2 ratio is 2/√2 = √2 everywhere.
        let a = DenseMatrix::<f64>::new(1, 2, vec![1.0, -1.0]).unwrap();
        let q = RatioQ::new(2.0).unwrap();
        let r = kernel_ratio_inf_ccp(&a, q).unwrap();
        assert_relative_eq!(r, std::f64::consts::SQRT_2, max_relative = 1e-6);
    }

    #[test]
    fn linearized_search_rejects_infinite_q() {
        let a = DenseMatrix::<f64>::new(1, 2, vec![1.0, -1.0]).unwrap();
        assert!(kernel_ratio_inf_ccp(&a, RatioQ::Infinity).is_err());
    }

    #[test]
    fn finite_q_ratio_never_exceeds_the_peak_ratio() {
        // For any h, ‖h‖_q ≥ ‖h‖_∞, so the q-ratio of the peak-ratio
        // infimizer is at most the peak ratio; the search must do no worse.
        let a = DenseMatrix::<f64>::new(
            2,
            4,
            vec![1.0, 2.0, -1.0, 0.5, 0.0, 1.0, 1.0, -1.5],
        )
        .unwrap();
        let q = RatioQ::new(2.0).unwrap();
        let ccp = kernel_ratio_inf_ccp(&a, q).unwrap();
        let linf = kernel_ratio_inf_linf(&a).unwrap();
        assert!(ccp <= linf + 1e-6, "ccp {ccp} vs linf {linf}");
        // And both sit in the generic range [1, N^{1-1/q}].
        assert!(ccp >= 1.0 - 1e-9);
        assert!(linf <= 4.0 + 1e-9);
    }

    #[test]
    fn kernel_search_is_reproducible_for_a_fixed_seed() {
        let a = DenseMatrix::<f64>::new(
            2,
            5,
            vec![1.0, 0.3, -1.0, 0.2, 0.9, -0.4, 1.0, 0.6, -0.8, 0.1],
        )
        .unwrap();
        let q = RatioQ::new(1.5).unwrap();
        let first = kernel_ratio_inf_ccp_with(&a, q, 10, 42).unwrap();
        let second = kernel_ratio_inf_ccp_with(&a, q, 10, 42).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn sufficient_condition_is_vacuous_for_injective_matrices() {
        let a = DenseMatrix::<f64>::identity(4);
        let (ok, threshold) = sufficient_condition_check(&a, RatioQ::Infinity, 4).unwrap();
        assert!(ok);
        assert_eq!(threshold, f64::INFINITY);
    }

    #[test]
    fn infinite_q_threshold_is_a_third_of_the_ratio() {
        let a = DenseMatrix::<f64>::new(1, 2, vec![1.0, -1.0]).unwrap();
        let (ok, threshold) = sufficient_condition_check(&a, RatioQ::Infinity, 1).unwrap();
        assert_relative_eq!(threshold, 2.0 / 3.0, max_relative = 1e-6);
        assert!(!ok, "k = 1 is not below 2/3");
    }

    #[test]
    fn identity_matrix_has_unit_minimal_singular_value() {
        let a = DenseMatrix::<f64>::identity(4);
        let q = RatioQ::new(2.0).unwrap();
        let v = cmsv_estimate_with(&a, q, 2.0, 20, 7).unwrap();
        // ‖z‖₂/‖z‖₂ = 1 for every z, so the search is flat at 1.
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn one_sparse_level_picks_the_smallest_column_gain() {
        // diag(2, 1) at s = 1 ranges over the axes; the minimum ratio is 1.
        let a = DenseMatrix::<f64>::new(2, 2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        let q = RatioQ::new(2.0).unwrap();
        let v = cmsv_estimate_with(&a, q, 1.0, 20, 7).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn cmsv_rejects_levels_outside_the_dimension_range() {
        let a = DenseMatrix::<f64>::identity(3);
        let q = RatioQ::new(2.0).unwrap();
        assert!(cmsv_estimate(&a, q, 0.5).is_err());
        assert!(cmsv_estimate(&a, q, 3.5).is_err());
    }

    #[test]
    fn exact_recovery_evaluates_to_zero_observed_error() {
        let a = DenseMatrix::<f64>::identity(4);
        let x = vec![1.0, 0.0, 0.0, 0.0];
        let y = x.clone();
        let q = RatioQ::new(2.0).unwrap();
        let problem = RecoveryProblem::new(
            a,
            SignalVector::new(y).unwrap(),
            0.0,
            q,
        )
        .unwrap();
        let report = theorem_bounds(&x, &x, &problem, 1.0, 1).unwrap();
        assert_eq!(report.error_q.unwrap(), 0.0);
        assert_eq!(report.error_l1.unwrap(), 0.0);
        // η = 0 and an exactly 1-sparse truth: both bounds collapse to 0.
        assert_eq!(report.theorem1_bound_q.unwrap(), 0.0);
        assert_eq!(report.sigma_k1.unwrap(), 0.0);
        let (noise, tail) = report.theorem2_components.unwrap();
        assert_eq!(noise, 0.0);
        assert_eq!(tail, 0.0);
    }

    #[test]
    fn bound_evaluation_rejects_a_zero_truth() {
        let a = DenseMatrix::<f64>::identity(2);
        let q = RatioQ::new(2.0).unwrap();
        let problem = RecoveryProblem::new(
            a,
            SignalVector::new(vec![1.0, 0.0]).unwrap(),
            0.0,
            q,
        )
        .unwrap();
        assert!(theorem_bounds(&[0.0, 0.0], &[1.0, 0.0], &problem, 1.0, 1).is_err());
    }

    #[test]
    fn zero_signal_comparison_repeats_the_kernel_value() {
        let a = DenseMatrix::<f64>::new(1, 2, vec![1.0, -1.0]).unwrap();
        let q = RatioQ::new(2.0).unwrap();
        let (constrained, kernel) = ratio_comparison(&a, &[0.0, 0.0], q).unwrap();
        assert_eq!(constrained, kernel);
        assert_relative_eq!(kernel, std::f64::consts::SQRT_2, max_relative = 1e-6);
    }

    #[test]
    fn report_serializes_infinities_as_strings() {
        let report = CertificateReport::<f64> {
            kernel_ratio_inf: Some(f64::INFINITY),
            sufficient_k: Some(2.5),
            ..CertificateReport::default()
        };
        let v = report.to_json();
        assert_eq!(v["kernel_ratio_inf"], "inf");
        assert_eq!(v["sufficient_k"], 2.5);
        assert!(v["cmsv_estimate"].is_null());
    }
}
