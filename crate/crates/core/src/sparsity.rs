//! The q-ratio sparsity measure `s_q(z)`: an entropy-based, scale-invariant
//! effective-sparsity level ranging over `[1, N]`.
//!
//! For `q` outside `{0, 1, inf}` it equals `(||z||_1 / ||z||_q)^{q/(q-1)}`;
//! the limits give the support count (`q = 0`), the exponential of Shannon
//! entropy (`q = 1`), and `||z||_1 / ||z||_inf` (`q = inf`). Measuring is
//! defined for all `q` in `[0, inf]` even though the solvers only accept
//! `q > 1`.

use crate::model::{l1_norm, linf_norm};
use crate::{Error, Float, RatioQ, Result, SignalVector};

/// Relative threshold below which an entry counts as zero for `s_0`.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-12;

/// The measurement order `q` over the full range `[0, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SparsityOrder<F: Float> {
    /// Support counting.
    Zero,
    /// A finite positive order; `1` selects the Shannon-entropy limit.
    Finite(F),
    /// The `||z||_1 / ||z||_inf` limit.
    Infinity,
}

impl<F: Float> SparsityOrder<F> {
    /// Validates a finite order (`q > 0`); use the variants for the limits.
    pub fn new(q: F) -> Result<Self> {
        if !q.is_finite() || q < F::zero() {
            return Err(Error::InvalidParameter(format!(
                "sparsity order must lie in [0, inf], got {q}"
            )));
        }
        if q == F::zero() {
            Ok(SparsityOrder::Zero)
        } else {
            Ok(SparsityOrder::Finite(q))
        }
    }

    /// Parses `"0"`, `"inf"`, or a positive decimal.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(SparsityOrder::Infinity);
        }
        let q: F = t
            .parse()
            .map_err(|_| Error::Parse(format!("cannot parse sparsity order {t:?}")))?;
        Self::new(q)
    }
}

impl<F: Float> From<RatioQ<F>> for SparsityOrder<F> {
    fn from(q: RatioQ<F>) -> Self {
        match q {
            RatioQ::Finite(v) => SparsityOrder::Finite(v),
            RatioQ::Infinity => SparsityOrder::Infinity,
        }
    }
}

impl<F: Float> core::fmt::Display for SparsityOrder<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SparsityOrder::Zero => write!(f, "0"),
            SparsityOrder::Finite(q) => write!(f, "{q}"),
            SparsityOrder::Infinity => write!(f, "inf"),
        }
    }
}

/// The sparsity level of a vector at one order, together with the normalized
/// magnitude profile and the entropy it exponentiates.
#[derive(Clone, Debug)]
pub struct SparsityValue<F: Float> {
    /// The order the measure was evaluated at.
    pub q: SparsityOrder<F>,
    /// `s_q(z)`, in `[1, N]` for nonzero `z` (the support count at `q = 0`).
    pub value: F,
    /// `pi_i = |z_i| / ||z||_1`.
    pub normalized_profile: SignalVector<F>,
    /// Entropy of the profile at order `q`; `value = exp(entropy)`.
    pub entropy: F,
}

/// Number of entries with `|z_i| > 1e-12 * ||z||_inf`.
pub fn support_count<F: Float>(z: &[F]) -> usize {
    let m = linf_norm(z);
    if m == F::zero() {
        return 0;
    }
    let thr = F::c(SUPPORT_REL_THRESHOLD) * m;
    z.iter().filter(|e| e.abs() > thr).count()
}

/// Evaluates the q-ratio sparsity `s_q(z)`; the zero vector is rejected.
pub fn q_ratio_sparsity<F: Float>(z: &[F], q: SparsityOrder<F>) -> Result<SparsityValue<F>> {
    let l1 = l1_norm(z);
    if l1 == F::zero() {
        return Err(Error::InvalidParameter(
            "sparsity undefined at zero".into(),
        ));
    }
    let profile: Vec<F> = z.iter().map(|&e| e.abs() / l1).collect();
    let entropy = match q {
        SparsityOrder::Zero => F::from_usize(support_count(z))
            .expect("support count fits the scalar type")
            .ln(),
        SparsityOrder::Infinity => -linf_norm(&profile).ln(),
        SparsityOrder::Finite(qv) if qv == F::one() => {
            // Shannon entropy with 0 * ln 0 := 0.
            -profile
                .iter()
                .filter(|p| **p > F::zero())
                .map(|&p| p * p.ln())
                .sum::<F>()
        }
        SparsityOrder::Finite(qv) => {
            // Order-q entropy, H_q = ln(sum pi^q) / (1 - q), evaluated in the
            // log domain so exponents near 1 neither overflow nor underflow.
            let powsum: F = profile
                .iter()
                .filter(|p| **p > F::zero())
                .map(|&p| p.powf(qv))
                .sum();
            powsum.ln() / (F::one() - qv)
        }
    };
    let value = match q {
        SparsityOrder::Zero => {
            F::from_usize(support_count(z)).expect("support count fits the scalar type")
        }
        _ => entropy.exp(),
    };
    Ok(SparsityValue {
        q,
        value,
        normalized_profile: SignalVector::new(profile)?,
        entropy,
    })
}

/// Membership in the level set `S_{q,k} = { z : s_q(z) <= k }`.
pub fn level_set_member<F: Float>(z: &[F], q: SparsityOrder<F>, k: F) -> Result<bool> {
    Ok(q_ratio_sparsity(z, q)?.value <= k)
}

/// Best k-term approximation error `sigma_{k,1}(x)`: the sum of the `N - k`
/// smallest magnitudes (zero when `k >= N`).
pub fn best_k_term_error<F: Float>(x: &[F], k: usize) -> F {
    if k >= x.len() {
        return F::zero();
    }
    let mut mags: Vec<F> = x.iter().map(|e| e.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("magnitudes are finite"));
    mags[..x.len() - k].iter().copied().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(z: &[f64], q: SparsityOrder<f64>) -> f64 {
        q_ratio_sparsity(z, q).unwrap().value
    }

    #[test]
    fn matches_hand_computed_examples() {
        let v = [1.0, 1.0, 0.0, 0.0];
        assert!((sq(&v, SparsityOrder::Finite(2.0)) - 2.0).abs() < 1e-12);
        assert!((sq(&v, SparsityOrder::Finite(1.0)) - 2.0).abs() < 1e-12);

        let u = [10.0, 0.0, 1.0, 0.1, 0.0];
        // (11.1 / sqrt(101.01))^2 = 123.21 / 101.01
        assert!((sq(&u, SparsityOrder::Finite(2.0)) - 123.21 / 101.01).abs() < 1e-12);

        let compressible: Vec<f64> = (1..=50).map(|i| (i as f64).powi(-2)).collect();
        let expected: f64 = (1..=50).map(|i| (i as f64).powi(-2)).sum();
        assert!((sq(&compressible, SparsityOrder::Infinity) - expected).abs() < 1e-12);
        assert!((expected - 1.6251).abs() < 5e-4);
    }

    #[test]
    fn extremes_hit_range_endpoints() {
        for q in [
            SparsityOrder::Zero,
            SparsityOrder::Finite(0.5),
            SparsityOrder::Finite(1.0),
            SparsityOrder::Finite(2.0),
            SparsityOrder::Infinity,
        ] {
            let spike = [0.0, -3.5, 0.0];
            assert!((sq(&spike, q) - 1.0).abs() < 1e-12, "spike at {q}");
            let flat = [1.0; 7];
            assert!((sq(&flat, q) - 7.0).abs() < 1e-9, "flat at {q}");
        }
    }

    #[test]
    fn value_equals_exp_entropy_and_profile_sums_to_one() {
        let z = [0.3f64, -2.0, 0.0, 0.7, 1.1];
        for q in [
            SparsityOrder::Finite(0.5),
            SparsityOrder::Finite(1.0),
            SparsityOrder::Finite(3.0),
            SparsityOrder::Infinity,
        ] {
            let s = q_ratio_sparsity(&z, q).unwrap();
            let gap: f64 = s.value - s.entropy.exp();
            assert!(gap.abs() <= 1e-12 * s.value);
            let total: f64 = s.normalized_profile.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_nonincreasing_in_q() {
        let z = [0.1, -0.9, 2.2, 0.0, -3.3, 0.4];
        let orders = [
            SparsityOrder::Zero,
            SparsityOrder::Finite(0.5),
            SparsityOrder::Finite(1.0),
            SparsityOrder::Finite(1.5),
            SparsityOrder::Finite(2.0),
            SparsityOrder::Finite(5.0),
            SparsityOrder::Infinity,
        ];
        let mut last = f64::INFINITY;
        for q in orders {
            let v = sq(&z, q);
            assert!(v <= last + 1e-10, "s_q must not increase at {q}");
            last = v;
        }
    }

    #[test]
    fn approaches_the_sup_norm_limit() {
        let z = [1.0, -0.6, 0.25, 0.125, 0.0625];
        let s_inf = sq(&z, SparsityOrder::Infinity);
        let mut last = f64::INFINITY;
        for q in [10.0, 100.0, 1000.0] {
            let v = sq(&z, SparsityOrder::Finite(q));
            assert!(v >= s_inf - 1e-10);
            assert!(v <= last + 1e-12);
            last = v;
        }
        assert!((last - s_inf) / s_inf < 0.01);
    }

    #[test]
    fn support_count_uses_relative_threshold() {
        assert_eq!(support_count(&[1.0, 2e-12, 1e-15]), 2);
        assert_eq!(support_count(&[0.0, 0.0]), 0);
        assert_eq!(support_count(&[5.0, -1.0, 3.0]), 3);
    }

    #[test]
    fn level_sets_contain_sparse_vectors() {
        let z3 = [4.0, 0.0, -1.0, 0.0, 0.5];
        assert!(level_set_member(&z3, SparsityOrder::Finite(2.0), 3.0).unwrap());
        assert!(!level_set_member(&[1.0, 1.0], SparsityOrder::Finite(2.0), 1.5).unwrap());
        assert!(level_set_member(&[1.0, 0.0], SparsityOrder::Infinity, 1.0).unwrap());
    }

    #[test]
    fn best_k_term_error_matches_hand_values() {
        let x = [3.0f64, 1.0, 0.5, 0.1];
        assert!((best_k_term_error(&x, 2) - 0.6).abs() < 1e-15);
        assert_eq!(best_k_term_error(&x, 0), 4.6);
        assert_eq!(best_k_term_error(&x, 4), 0.0);
        let sparse = [0.0, 7.0, 0.0, -2.0];
        assert_eq!(best_k_term_error(&sparse, 2), 0.0);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(q_ratio_sparsity(&[0.0, 0.0], SparsityOrder::<f64>::Finite(2.0)).is_err());
        assert!(level_set_member(&[0.0], SparsityOrder::<f64>::Infinity, 1.0).is_err());
    }

    #[test]
    fn scale_invariant() {
        let z = [0.2, -1.4, 3.1, 0.0];
        for q in [
            SparsityOrder::Finite(1.5),
            SparsityOrder::Finite(1.0),
            SparsityOrder::Infinity,
        ] {
            let a = sq(&z, q);
            let scaled: Vec<f64> = z.iter().map(|e| e * -713.25).collect();
            let b = sq(&scaled, q);
            assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }
}
