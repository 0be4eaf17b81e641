//! Randomized property suites over the solver stack: ascent/monotonicity
//! guarantees, feasibility of converged reports, the optimality cone
//! inequality, and numeric oracles for the subgradient and the projections.
//!
//! Each suite uses a bounded case count so the whole file stays well inside
//! a ten-minute budget on one core.

use proptest::prelude::*;

use qratio::conic::proj::{project_l1_ball, project_soc, soft_threshold};
use qratio::ensembles::{noisy_measurements, sparse_signal, EnsembleSpec};
use qratio::model::{l1_norm, l2_norm, lq_norm, RatioQ, Termination};
use qratio::solvers::{
    bpdn_solve, ccp_solve, l1_minus_l2_solve, lp_solve_linf, lq_subgradient, pm_solve,
};
use qratio::sparsity::{q_ratio_sparsity, SparsityOrder};
use qratio::{Problem, Report};

/// Random instance: Gaussian matrix, planted k-sparse signal, optional noise.
fn instance(m: usize, n: usize, k: usize, sigma: f64, seed: u64) -> (Problem, Vec<f64>) {
    let a = EnsembleSpec::<f64>::gaussian(m, n, seed).unwrap().draw();
    let truth = sparse_signal::<f64>(n, k, seed.wrapping_add(1)).unwrap();
    let (y, eta) = noisy_measurements(&a, &truth.signal, sigma, seed.wrapping_add(2)).unwrap();
    (
        Problem::new(a, y, eta, RatioQ::new(2.0).unwrap()).unwrap(),
        truth.signal.as_slice().to_vec(),
    )
}

fn q_values() -> Vec<RatioQ<f64>> {
    vec![
        RatioQ::new(1.5).unwrap(),
        RatioQ::new(2.0).unwrap(),
        RatioQ::new(5.0).unwrap(),
        RatioQ::Infinity,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The convex–concave ascent never decreases its objective trace.
    #[test]
    fn ccp_trace_is_nondecreasing(seed in 0u64..1000, qi in 0usize..4, k in 1usize..4) {
        let (mut problem, _) = instance(6, 12, k, 0.0, seed);
        problem.q = q_values()[qi];
        let report = ccp_solve(&problem, None).unwrap();
        for pair in report.objective_trace.windows(2) {
            prop_assert!(
                pair[1] >= pair[0] - 1e-9,
                "trace decreased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    /// The parametric outer loop produces a nondecreasing lambda sequence.
    #[test]
    fn pm_lambda_sequence_is_nondecreasing(seed in 0u64..1000, qi in 0usize..4, k in 1usize..4) {
        let (mut problem, _) = instance(6, 12, k, 0.0, seed);
        problem.q = q_values()[qi];
        let report = pm_solve(&problem, 1e-5).unwrap();
        for pair in report.lambda_history.windows(2) {
            prop_assert!(
                pair[1] >= pair[0] - 1e-9,
                "lambda decreased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }
}

/// Every report that claims convergence must actually satisfy the noise
/// constraint it was solved under (small tolerance for the first-order
/// engine's stopping accuracy).
fn assert_feasible_if_converged(report: &Report, problem: &Problem) {
    if report.termination == Termination::Converged {
        let slack = 1e-6 * (1.0 + l2_norm(&problem.measurements));
        assert!(
            report.residual_norm <= problem.noise_bound + slack,
            "{}: converged report violates the noise ball: residual {} > eta {}",
            report.method,
            report.residual_norm,
            problem.noise_bound
        );
    }
}

#[test]
fn converged_reports_are_feasible_across_methods_and_noise_levels() {
    for seed in 0..8u64 {
        for &sigma in &[0.0, 0.05] {
            let (problem, _) = instance(8, 16, 2, sigma, 1000 + seed);
            for q in q_values() {
                let mut p = problem.clone();
                p.q = q;
                assert_feasible_if_converged(&ccp_solve(&p, None).unwrap(), &p);
                assert_feasible_if_converged(&pm_solve(&p, 1e-5).unwrap(), &p);
                if q.is_infinite() {
                    assert_feasible_if_converged(&lp_solve_linf(&p).unwrap(), &p);
                }
            }
            assert_feasible_if_converged(&bpdn_solve(&problem).unwrap(), &problem);
            assert_feasible_if_converged(&l1_minus_l2_solve(&problem).unwrap(), &problem);
        }
    }
}

/// On a noiseless k-sparse instance, any feasible point whose norm ratio is
/// no worse than the planted signal's satisfies the support-splitting cone
/// inequality `‖h_{S^c}‖₁ ≤ ‖h_S‖₁ + s_q(x)^{1−1/q} ‖h‖_q` for the error
/// h = x̂ − x (a triangle-inequality consequence of ratio optimality).
#[test]
fn ratio_optimal_errors_lie_in_the_support_cone() {
    let mut checked = 0usize;
    for seed in 0..12u64 {
        for q in [RatioQ::new(1.5).unwrap(), RatioQ::new(2.0).unwrap()] {
            let (mut problem, truth) = instance(10, 20, 2, 0.0, 2000 + seed);
            problem.q = q;
            let report = ccp_solve(&problem, None).unwrap();
            if report.termination != Termination::Converged {
                continue;
            }
            let truth_ratio = l1_norm(&truth) / lq_norm(&truth, q);
            let found_ratio = match report.objective_value {
                Some(v) => v,
                None => continue,
            };
            if found_ratio > truth_ratio + 1e-9 {
                // The solver stopped at a worse point than the planted
                // signal; the cone derivation does not apply there.
                continue;
            }
            let h: Vec<f64> = report
                .solution
                .iter()
                .zip(&truth)
                .map(|(a, b)| a - b)
                .collect();
            if l2_norm(&h) == 0.0 {
                checked += 1;
                continue;
            }
            let support: Vec<bool> = truth.iter().map(|&e| e != 0.0).collect();
            let on: f64 = h
                .iter()
                .zip(&support)
                .filter(|(_, &s)| s)
                .map(|(e, _)| e.abs())
                .sum();
            let off: f64 = h
                .iter()
                .zip(&support)
                .filter(|(_, &s)| !s)
                .map(|(e, _)| e.abs())
                .sum();
            let sq = q_ratio_sparsity(&truth, SparsityOrder::from(q)).unwrap().value;
            let weight = sq.powf(q.one_minus_inv());
            assert!(
                off <= on + weight * lq_norm(&h, q) + 1e-6,
                "cone inequality violated at seed {seed}: off={off} on={on}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 12, "too few instances qualified: {checked}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The lq subgradient matches central finite differences away from kinks.
    #[test]
    fn subgradient_matches_finite_differences(
        raw in proptest::collection::vec(0.05f64..2.0, 3..8),
        signs in proptest::collection::vec(any::<bool>(), 8),
        qi in 0usize..4,
    ) {
        let q = [1.2, 1.5, 2.0, 3.0][qi];
        let v: Vec<f64> = raw
            .iter()
            .zip(&signs)
            .map(|(&m, &s)| if s { m } else { -m })
            .collect();
        let rq = RatioQ::new(q).unwrap();
        let g = lq_subgradient(&v, rq).unwrap();
        let delta = 1e-6;
        for i in 0..v.len() {
            let mut hi = v.clone();
            let mut lo = v.clone();
            hi[i] += delta;
            lo[i] -= delta;
            let fd = (lq_norm(&hi, rq) - lq_norm(&lo, rq)) / (2.0 * delta);
            prop_assert!(
                (g[i] - fd).abs() <= 1e-5,
                "coordinate {i}: subgradient {} vs finite difference {fd}",
                g[i]
            );
        }
    }

    /// Planar l1-ball projection beats every lattice point: no grid candidate
    /// is closer to the query than the returned projection (up to lattice
    /// resolution).
    #[test]
    fn l1_projection_beats_a_dense_planar_lattice(
        px in -2.0f64..2.0,
        py in -2.0f64..2.0,
        r in 0.1f64..1.5,
    ) {
        let p = [px, py];
        let proj = project_l1_ball(&p, r);
        prop_assert!(l1_norm(&proj) <= r + 1e-9);
        let d_proj = l2_norm(&[proj[0] - px, proj[1] - py]);
        let steps = 80;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = -r + 2.0 * r * (i as f64) / (steps as f64);
                let y = -r + 2.0 * r * (j as f64) / (steps as f64);
                if x.abs() + y.abs() > r {
                    continue;
                }
                let d = l2_norm(&[x - px, y - py]);
                prop_assert!(
                    d_proj <= d + 1e-3,
                    "lattice point ({x},{y}) beats projection: {d} < {d_proj}"
                );
            }
        }
    }

    /// Second-order-cone projection beats a dense planar lattice of feasible
    /// points (|w| <= t slice of the cone in two dimensions).
    #[test]
    fn soc_projection_beats_a_dense_planar_lattice(
        w in -2.0f64..2.0,
        t in -1.0f64..2.0,
    ) {
        let (pw, pt) = project_soc(&[w], t);
        prop_assert!(pw[0].abs() <= pt + 1e-9);
        let d_proj = l2_norm(&[pw[0] - w, pt - t]);
        let steps = 80;
        let span = 2.5;
        for i in 0..=steps {
            let tc = span * (i as f64) / (steps as f64);
            for j in 0..=steps {
                let wc = -tc + 2.0 * tc * (j as f64) / (steps as f64);
                let d = l2_norm(&[wc - w, tc - t]);
                prop_assert!(
                    d_proj <= d + 1e-3,
                    "cone point ({wc},{tc}) beats projection: {d} < {d_proj}"
                );
            }
        }
    }

    /// Soft-thresholding solves its scalar prox problem: compare against a
    /// dense line search of 0.5 (x - v)^2 + tau |x|.
    #[test]
    fn soft_threshold_minimizes_the_scalar_prox(
        v in -3.0f64..3.0,
        tau in 0.01f64..2.0,
    ) {
        let x = soft_threshold(v, tau);
        let obj = |z: f64| 0.5 * (z - v) * (z - v) + tau * z.abs();
        let best = obj(x);
        let steps = 600;
        for i in 0..=steps {
            let z = -3.5 + 7.0 * (i as f64) / (steps as f64);
            prop_assert!(
                best <= obj(z) + 1e-3,
                "line point {z} beats soft threshold {x}"
            );
        }
    }
}
