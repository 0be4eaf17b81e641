//! Seeded measurement ensembles and ground-truth signals: Gaussian matrices,
//! oversampled-cosine matrices whose oversampling factor controls column
//! coherence, k-sparse and power-law-decay signals, and the noise model.
//!
//! Every generator is a pure function of its spec and seed, so output is
//! byte-identical across runs and thread counts. Draws are made in `f64` and
//! cast, keeping the stream identical at every precision.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::rng::seeded_rng;
use crate::model::{l2_norm, SignalVector};
use crate::{DenseMatrix, Error, Float, Result};

/// Which matrix family to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Entries i.i.d. `N(0, 1/m)`.
    Gaussian,
    /// Columns `(1/sqrt(m)) cos(2 pi w (j-1) / F)` with `w` uniform on
    /// `[0,1]^m`; larger `F` yields a more coherent matrix.
    OversampledDct,
}

impl EnsembleKind {
    /// Stable identifier used in CLI flags and metadata.
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::OversampledDct => "dct",
        }
    }
}

/// Description of one measurement-matrix draw.
///
/// Undersampling (`m <= N`) is the intended regime but larger `m` is
/// accepted; it simply describes an overdetermined experiment.
#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec<F: Float> {
    /// Matrix family.
    pub kind: EnsembleKind,
    /// Rows.
    pub m: usize,
    /// Columns.
    pub n: usize,
    /// Oversampling factor for the cosine family (ignored for Gaussian).
    pub oversampling: F,
    /// RNG seed for this draw.
    pub seed: u64,
}

impl<F: Float> EnsembleSpec<F> {
    /// Gaussian spec.
    pub fn gaussian(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(
                "ensemble dimensions must be >= 1".into(),
            ));
        }
        Ok(Self {
            kind: EnsembleKind::Gaussian,
            m,
            n,
            oversampling: F::one(),
            seed,
        })
    }

    /// Oversampled-cosine spec with factor `oversampling > 0`.
    pub fn oversampled_dct(m: usize, n: usize, oversampling: F, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(
                "ensemble dimensions must be >= 1".into(),
            ));
        }
        if !(oversampling > F::zero()) || !oversampling.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "oversampling factor must be positive, got {oversampling}"
            )));
        }
        Ok(Self {
            kind: EnsembleKind::OversampledDct,
            m,
            n,
            oversampling,
            seed,
        })
    }

    /// Draws the matrix this spec describes.
    pub fn draw(&self) -> DenseMatrix<F> {
        match self.kind {
            EnsembleKind::Gaussian => gaussian_matrix(self),
            EnsembleKind::OversampledDct => dct_matrix(self),
        }
    }
}

/// A sparse ground-truth signal with its support.
#[derive(Clone, Debug)]
pub struct GroundTruth<F: Float> {
    /// The signal `x`.
    pub signal: SignalVector<F>,
    /// Sorted indices of the nonzero entries.
    pub support: Vec<usize>,
    /// `|support|`.
    pub sparsity: usize,
}

/// Matrix with entries i.i.d. `N(0, 1/m)`.
pub fn gaussian_matrix<F: Float>(spec: &EnsembleSpec<F>) -> DenseMatrix<F> {
    let mut rng = seeded_rng(spec.seed);
    let scale = 1.0 / (spec.m as f64).sqrt();
    let data: Vec<F> = (0..spec.m * spec.n)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            F::c(g * scale)
        })
        .collect();
    DenseMatrix::new(spec.m, spec.n, data).expect("generated entries are finite")
}

/// Oversampled-cosine matrix: draws `w` uniform on `[0,1]^m` once, then sets
/// column `j` (1-based) to `(1/sqrt(m)) cos(2 pi w (j-1) / F)` entrywise.
pub fn dct_matrix<F: Float>(spec: &EnsembleSpec<F>) -> DenseMatrix<F> {
    let mut rng = seeded_rng(spec.seed);
    let w: Vec<f64> = (0..spec.m).map(|_| rng.gen::<f64>()).collect();
    let scale = 1.0 / (spec.m as f64).sqrt();
    let over = spec
        .oversampling
        .to_f64()
        .expect("oversampling factor is finite");
    let mut data = vec![F::zero(); spec.m * spec.n];
    for i in 0..spec.m {
        for j in 0..spec.n {
            let phase = 2.0 * std::f64::consts::PI * w[i] * (j as f64) / over;
            data[i * spec.n + j] = F::c(scale * phase.cos());
        }
    }
    DenseMatrix::new(spec.m, spec.n, data).expect("generated entries are finite")
}

/// k-sparse signal: uniformly random support, standard-normal values on it.
pub fn sparse_signal<F: Float>(n: usize, k: usize, seed: u64) -> Result<GroundTruth<F>> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "sparsity k must satisfy 1 <= k <= {n}, got {k}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut support: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut entries = vec![F::zero(); n];
    for &i in &support {
        let g: f64 = rng.sample(StandardNormal);
        entries[i] = F::c(g);
    }
    Ok(GroundTruth {
        signal: SignalVector::new(entries)?,
        support,
        sparsity: k,
    })
}

/// Power-law-decay signal `x_i = i^{-p}`, `i = 1..N`.
pub fn compressible_signal<F: Float>(n: usize, p: F) -> Result<SignalVector<F>> {
    if n == 0 || !(p > F::zero()) {
        return Err(Error::InvalidParameter(
            "compressible signal needs n >= 1 and decay exponent p > 0".into(),
        ));
    }
    let entries: Vec<F> = (1..=n)
        .map(|i| F::c(i as f64).powf(-p))
        .collect();
    SignalVector::new(entries)
}

/// Adds i.i.d. `N(0, sigma^2)` noise to `A x` and returns the measurement
/// vector together with the realized noise norm, which the harness uses as
/// the bound `eta` so the truth stays feasible.
pub fn noisy_measurements<F: Float>(
    a: &DenseMatrix<F>,
    x: &[F],
    sigma: F,
    seed: u64,
) -> Result<(SignalVector<F>, F)> {
    if sigma < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "noise level must be >= 0, got {sigma}"
        )));
    }
    let mut y = a.matvec(x)?;
    if sigma == F::zero() {
        return Ok((SignalVector::new(y)?, F::zero()));
    }
    let mut rng = seeded_rng(seed);
    let s = sigma.to_f64().expect("sigma is finite");
    let eps: Vec<F> = (0..y.len())
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            F::c(g * s)
        })
        .collect();
    for (yi, ei) in y.iter_mut().zip(eps.iter()) {
        *yi += *ei;
    }
    Ok((SignalVector::new(y)?, l2_norm(&eps)))
}

/// Deterministic fallback bound `sigma * sqrt(m)` for when the realized
/// noise vector is not available.
pub fn eta_fallback<F: Float>(sigma: F, m: usize) -> F {
    sigma * F::c(m as f64).sqrt()
}

/// Largest absolute inner product between distinct normalized columns.
pub fn mutual_coherence<F: Float>(a: &DenseMatrix<F>) -> F {
    let n = a.cols();
    let norms: Vec<F> = (0..n).map(|j| l2_norm(&a.col(j))).collect();
    let mut best = F::zero();
    for j in 0..n {
        let cj = a.col(j);
        for l in j + 1..n {
            if norms[j] == F::zero() || norms[l] == F::zero() {
                continue;
            }
            let mut ip = F::zero();
            for i in 0..a.rows() {
                ip += cj[i] * a.get(i, l);
            }
            best = best.max((ip / (norms[j] * norms[l])).abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsity::support_count;

    #[test]
    fn gaussian_is_deterministic_with_unit_columns() {
        let spec = EnsembleSpec::<f64>::gaussian(64, 256, 11).unwrap();
        let a = spec.draw();
        let b = spec.draw();
        assert_eq!(a, b);
        let mean_norm: f64 =
            (0..256).map(|j| l2_norm(&a.col(j))).sum::<f64>() / 256.0;
        assert!((mean_norm - 1.0).abs() < 0.1, "mean column norm {mean_norm}");
        let var: f64 = a.data().iter().map(|e| e * e).sum::<f64>() / (64.0 * 256.0);
        assert!((var - 1.0 / 64.0).abs() < 0.2 / 64.0, "entry variance {var}");
    }

    #[test]
    fn dct_first_column_is_constant_and_entries_bounded() {
        let spec = EnsembleSpec::<f64>::gaussian(16, 40, 3)
            .and_then(|_| EnsembleSpec::oversampled_dct(16, 40, 5.0, 3))
            .unwrap();
        let a = spec.draw();
        let scale = 1.0 / 16f64.sqrt();
        for i in 0..16 {
            assert_eq!(a.get(i, 0), scale);
        }
        assert!(a.data().iter().all(|e| e.abs() <= scale + 1e-15));
    }

    #[test]
    fn oversampling_raises_coherence() {
        let mut wins = 0;
        for seed in 0..20 {
            let lo = EnsembleSpec::oversampled_dct(64, 256, 2.0, seed)
                .unwrap()
                .draw();
            let hi = EnsembleSpec::oversampled_dct(64, 256, 10.0, seed)
                .unwrap()
                .draw();
            if mutual_coherence::<f64>(&hi) > mutual_coherence::<f64>(&lo) {
                wins += 1;
            }
        }
        assert!(wins >= 18, "high-F more coherent in only {wins}/20 seeds");
    }

    #[test]
    fn sparse_signal_has_requested_support() {
        let gt = sparse_signal::<f64>(256, 10, 5).unwrap();
        assert_eq!(support_count(&gt.signal), 10);
        assert_eq!(gt.support.len(), 10);
        for &i in &gt.support {
            assert!(gt.signal[i] != 0.0);
        }
        let again = sparse_signal::<f64>(256, 10, 5).unwrap();
        assert_eq!(gt.signal, again.signal);
        let dense = sparse_signal::<f64>(8, 8, 1).unwrap();
        assert_eq!(support_count(&dense.signal), 8);
        assert!(sparse_signal::<f64>(8, 0, 1).is_err());
        assert!(sparse_signal::<f64>(8, 9, 1).is_err());
    }

    #[test]
    fn compressible_signal_matches_closed_form() {
        let x = compressible_signal::<f64>(50, 2.0).unwrap();
        assert_eq!(x[0], 1.0);
        assert!((x[49] - 1.0 / 2500.0).abs() < 1e-18);
        assert_eq!(support_count(&x), 50);
        let one = compressible_signal::<f64>(1, 3.0).unwrap();
        assert_eq!(one.as_slice(), &[1.0]);
    }

    #[test]
    fn realized_noise_norm_is_the_bound() {
        let a = DenseMatrix::<f64>::identity(5);
        let x = [1.0, 0.0, 2.0, 0.0, 0.0];
        let (y, eta) = noisy_measurements(&a, &x, 0.1, 9).unwrap();
        let diff: Vec<f64> = y.iter().zip(a.matvec(&x).unwrap()).map(|(a, b)| a - b).collect();
        assert!((l2_norm(&diff) - eta).abs() < 1e-12);
        let (clean, eta0) = noisy_measurements(&a, &x, 0.0, 9).unwrap();
        assert_eq!(eta0, 0.0);
        assert_eq!(clean.as_slice(), a.matvec(&x).unwrap().as_slice());
        assert!((eta_fallback::<f64>(0.1, 64) - 0.8).abs() < 1e-15);
    }
}
