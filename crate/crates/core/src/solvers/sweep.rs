//! Deterministic per-coordinate start sweep.
//!
//! On the scaled feasible set `{ (v, t) : ||v||_1 <= 1, ||Av - ty|| <= t eta,
//! t >= t_lower }`, each coordinate is pushed to both extremes
//! (maximize `+v_i` and `-v_i`).  The extreme points favor feasible signals
//! whose mass concentrates on coordinate `i`, which makes them good starting
//! candidates for the nonconvex descent methods.  Candidates only need to be
//! roughly optimal, so the engine runs under a reduced iteration cap, and the
//! solves chain warm starts since only the objective changes.

use crate::conic::{solve_lp, ConicProgram, ConicStatus, Tolerances, WarmState};
use crate::Float;

pub(crate) struct SweepCandidate<F> {
    /// Signal part of the extreme point.
    pub v: Vec<F>,
    /// Scale part.
    pub t: F,
    /// Achieved reward `sign * v_i`.
    #[allow(dead_code)]
    pub reward: F,
    #[allow(dead_code)]
    pub status: ConicStatus,
    /// Engine iterations spent on this candidate.
    pub iterations: usize,
}

/// Push every coordinate to both extremes over the scaled feasible set.
pub(crate) fn coordinate_sweep<F: Float>(
    program: &ConicProgram<F>,
    n: usize,
    engine: &Tolerances<F>,
    iter_cap: usize,
) -> Vec<SweepCandidate<F>> {
    let d = program.variable_dim();
    debug_assert_eq!(d, n + 1, "sweep expects a scaled-form program");
    let tol = engine.clone().with_max_iter(iter_cap);
    let mut out = Vec::with_capacity(2 * n);
    let mut warm: Option<WarmState<F>> = None;
    for i in 0..n {
        for sign in [F::one(), -F::one()] {
            let mut c = vec![F::zero(); d];
            c[i] = sign;
            let (sol, next_warm) = solve_lp(program, c, &tol, warm.as_ref());
            warm = Some(next_warm);
            let mut v = sol.point;
            let t = v.pop().expect("scaled variable has a scale coordinate");
            let reward = sign * v[i];
            out.push(SweepCandidate {
                v,
                t,
                reward,
                status: sol.status,
                iterations: sol.iterations,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DenseMatrix;

    #[test]
    fn sweep_finds_coordinate_extremes() {
        // A = I2, y = (1, 1), eta = 0: v = t(1,1), so each coordinate peaks
        // at v_i = 1/2 (and the "-" direction is pinned at the floor).
        let a = DenseMatrix::<f64>::identity(2);
        let program = ConicProgram::scaled_form(&a, &[1.0, 1.0], 0.0, 1e-4).unwrap();
        let cands = coordinate_sweep(&program, 2, &Tolerances::default(), 2000);
        assert_eq!(cands.len(), 4);
        let plus_first = &cands[0];
        assert!((plus_first.reward - 0.5).abs() < 1e-4);
        assert!((plus_first.v[0] - 0.5).abs() < 1e-4);
        assert!((plus_first.t - 0.5).abs() < 1e-4);
    }
}
