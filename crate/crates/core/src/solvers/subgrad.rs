//! Subgradients of the lq norm used by the linearization steps.

use crate::model::lq_norm;
use crate::{Error, Float, RatioQ, Result};

/// A subgradient of `||.||_q` at `v != 0`.
///
/// For finite `q` this is the gradient
/// `g_i = (|v_i| / ||v||_q)^{q-1} * sign(v_i)`; for `q = inf` it is
/// `sign(v_j) e_j` with `j` the smallest index attaining the sup norm.
pub fn lq_subgradient<F: Float>(v: &[F], q: RatioQ<F>) -> Result<Vec<F>> {
    let norm = lq_norm(v, q);
    if norm <= F::zero() {
        return Err(Error::InvalidParameter(
            "the lq norm has no subgradient at the zero vector".into(),
        ));
    }
    let mut g = vec![F::zero(); v.len()];
    match q {
        RatioQ::Infinity => {
            let j = v
                .iter()
                .position(|e| e.abs() == norm)
                .expect("some entry attains the sup norm");
            g[j] = v[j].signum();
        }
        RatioQ::Finite(q) => {
            for (gi, &vi) in g.iter_mut().zip(v.iter()) {
                if vi != F::zero() {
                    *gi = (vi.abs() / norm).powf(q - F::one()) * vi.signum();
                }
            }
        }
    }
    Ok(g)
}
