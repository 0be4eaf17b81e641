//! Dense linear-algebra primitives: Cholesky factorization and a pivoted
//! Householder QR used for rank decisions, kernel bases, least squares, and
//! range-distance certificates.

use crate::{DenseMatrix, Float};

/// Relative tolerance for rank decisions, applied as `1e-10 * ||A||_F`.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Cholesky factor `L` of a symmetric positive-definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<F: Float> {
    n: usize,
    l: Vec<F>,
}

impl<F: Float> Cholesky<F> {
    /// Factors an SPD matrix; returns `None` if a pivot is not positive.
    pub fn factor(a: &DenseMatrix<F>) -> Option<Self> {
        assert_eq!(a.rows(), a.cols(), "Cholesky needs a square matrix");
        let n = a.rows();
        let mut l = vec![F::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= F::zero() {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(Self { n, l })
    }

    /// Solves `A x = b` in place using the stored factor.
    pub fn solve_in_place(&self, b: &mut [F]) {
        assert_eq!(b.len(), self.n);
        // Forward: L w = b.
        for i in 0..self.n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.l[i * self.n + k] * b[k];
            }
            b[i] = sum / self.l[i * self.n + i];
        }
        // Backward: L^T x = w.
        for i in (0..self.n).rev() {
            let mut sum = b[i];
            for k in i + 1..self.n {
                sum -= self.l[k * self.n + i] * b[k];
            }
            b[i] = sum / self.l[i * self.n + i];
        }
    }
}

/// Householder QR with column pivoting: `A P = Q R`.
///
/// Reflectors are stored below the diagonal of `qr` (unit leading entry
/// implicit) with scalar factors in `tau`; `R` sits on and above the
/// diagonal. Rank is decided against `1e-10 * ||A||_F`.
#[derive(Clone, Debug)]
pub struct PivotedQr<F: Float> {
    m: usize,
    n: usize,
    qr: Vec<F>,
    tau: Vec<F>,
    perm: Vec<usize>,
    rank: usize,
}

impl<F: Float> PivotedQr<F> {
    /// Factors `a` with column pivoting.
    pub fn factor(a: &DenseMatrix<F>) -> Self {
        let m = a.rows();
        let n = a.cols();
        let mut qr = a.data().to_vec();
        let kmax = m.min(n);
        let mut tau = vec![F::zero(); kmax];
        let mut perm: Vec<usize> = (0..n).collect();
        let tol = F::c(RANK_REL_TOL) * a.frobenius_norm();
        let mut rank = 0;

        for k in 0..kmax {
            // Pivot on the largest remaining column norm, recomputed exactly.
            let mut best = k;
            let mut best_norm2 = F::zero();
            for j in k..n {
                let mut s = F::zero();
                for i in k..m {
                    let v = qr[i * n + j];
                    s += v * v;
                }
                if s > best_norm2 {
                    best_norm2 = s;
                    best = j;
                }
            }
            if best != k {
                for i in 0..m {
                    qr.swap(i * n + k, i * n + best);
                }
                perm.swap(k, best);
            }

            let normx = best_norm2.sqrt();
            if normx <= tol {
                // Remaining block is negligible; treat the rest as zero.
                break;
            }
            rank += 1;

            let x0 = qr[k * n + k];
            let alpha = if x0 >= F::zero() { -normx } else { normx };
            let v0 = x0 - alpha;
            qr[k * n + k] = alpha;
            for i in k + 1..m {
                qr[i * n + k] /= v0;
            }
            tau[k] = -v0 / alpha;

            // Apply the reflector to the trailing columns.
            for j in k + 1..n {
                let mut c = qr[k * n + j];
                for i in k + 1..m {
                    c += qr[i * n + k] * qr[i * n + j];
                }
                c *= tau[k];
                qr[k * n + j] -= c;
                for i in k + 1..m {
                    let w = qr[i * n + k];
                    qr[i * n + j] -= c * w;
                }
            }
        }

        Self {
            m,
            n,
            qr,
            tau,
            perm,
            rank,
        }
    }

    /// Numerical rank.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Applies `Q^T` in place to a length-`m` vector.
    pub fn apply_qt(&self, y: &mut [F]) {
        assert_eq!(y.len(), self.m);
        for k in 0..self.rank {
            let mut c = y[k];
            for i in k + 1..self.m {
                c += self.qr[i * self.n + k] * y[i];
            }
            c *= self.tau[k];
            y[k] -= c;
            for i in k + 1..self.m {
                y[i] -= c * self.qr[i * self.n + k];
            }
        }
    }

    /// Applies `Q` in place to a length-`m` vector.
    pub fn apply_q(&self, y: &mut [F]) {
        assert_eq!(y.len(), self.m);
        for k in (0..self.rank).rev() {
            let mut c = y[k];
            for i in k + 1..self.m {
                c += self.qr[i * self.n + k] * y[i];
            }
            c *= self.tau[k];
            y[k] -= c;
            for i in k + 1..self.m {
                y[i] -= c * self.qr[i * self.n + k];
            }
        }
    }

    /// Least-squares solve: returns `x` minimizing `||A x - y||_2` (basic
    /// solution on the pivoted leading columns) and the residual norm.
    pub fn least_squares(&self, y: &[F]) -> (Vec<F>, F) {
        assert_eq!(y.len(), self.m);
        let mut w = y.to_vec();
        self.apply_qt(&mut w);
        let r = self.rank;
        // Back substitution on the leading r x r block of R.
        let mut u = vec![F::zero(); r];
        for i in (0..r).rev() {
            let mut sum = w[i];
            for j in i + 1..r {
                sum -= self.qr[i * self.n + j] * u[j];
            }
            u[i] = sum / self.qr[i * self.n + i];
        }
        let mut x = vec![F::zero(); self.n];
        for (j, &uj) in u.iter().enumerate() {
            x[self.perm[j]] = uj;
        }
        let residual = w[r..self.m].iter().map(|&v| v * v).sum::<F>().sqrt();
        (x, residual)
    }

    /// Distance from `y` to the column space of the factored matrix.
    pub fn range_distance(&self, y: &[F]) -> F {
        let mut w = y.to_vec();
        self.apply_qt(&mut w);
        w[self.rank..self.m].iter().map(|&v| v * v).sum::<F>().sqrt()
    }
}

/// Rank of a matrix via pivoted QR.
pub fn rank<F: Float>(a: &DenseMatrix<F>) -> usize {
    PivotedQr::factor(a).rank()
}

/// Orthonormal basis of `ker(A)` as an `N x d` matrix, or `None` when the
/// kernel is trivial. Built from the full QR of `A^T`.
pub fn kernel_basis<F: Float>(a: &DenseMatrix<F>) -> Option<DenseMatrix<F>> {
    let at = a.transpose();
    let qr = PivotedQr::factor(&at);
    let n = a.cols();
    let r = qr.rank();
    if r >= n {
        return None;
    }
    let d = n - r;
    let mut data = vec![F::zero(); n * d];
    for (jcol, j) in (r..n).enumerate() {
        let mut e = vec![F::zero(); n];
        e[j] = F::one();
        qr.apply_q(&mut e);
        for i in 0..n {
            data[i * d + jcol] = e[i];
        }
    }
    Some(DenseMatrix::new(n, d, data).expect("kernel basis entries are finite"))
}

/// Kernel-space helper built once per matrix: projects vectors onto `ker(A)`
/// and produces the minimum-norm solution of `A x = y`.
#[derive(Clone, Debug)]
pub struct KernelSpace<F: Float> {
    qr_at: PivotedQr<F>,
    n: usize,
}

impl<F: Float> KernelSpace<F> {
    /// Factors `A^T` once.
    pub fn new(a: &DenseMatrix<F>) -> Self {
        Self {
            qr_at: PivotedQr::factor(&a.transpose()),
            n: a.cols(),
        }
    }

    /// Dimension of the kernel.
    pub fn kernel_dim(&self) -> usize {
        self.n - self.qr_at.rank()
    }

    /// Orthogonal projection of `v` onto `ker(A)`.
    pub fn project_kernel(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.n);
        let mut u = v.to_vec();
        self.qr_at.apply_qt(&mut u);
        for ui in u.iter_mut().take(self.qr_at.rank()) {
            *ui = F::zero();
        }
        self.qr_at.apply_q(&mut u);
        u
    }

    /// Minimum-norm solution of `A x = y`, assuming the system is consistent
    /// (callers verify the residual).
    pub fn least_norm_solution(&self, y: &[F]) -> Vec<F> {
        let r = self.qr_at.rank();
        // A = P R^T Q^T from A^T P = Q R, so R^T (Q^T x) = P^T y.
        let m = y.len();
        let mut py = vec![F::zero(); m];
        for (j, &pj) in self.qr_at.perm.iter().enumerate() {
            py[j] = y[pj];
        }
        let mut u = vec![F::zero(); self.n];
        let n_cols = self.qr_at.n;
        for i in 0..r {
            let mut sum = py[i];
            for j in 0..i {
                sum -= self.qr_at.qr[j * n_cols + i] * u[j];
            }
            u[i] = sum / self.qr_at.qr[i * n_cols + i];
        }
        self.qr_at.apply_q(&mut u);
        u
    }
}

/// Distance from `y` to `range(A)` (one-shot convenience).
pub fn range_distance<F: Float>(a: &DenseMatrix<F>, y: &[F]) -> F {
    PivotedQr::factor(a).range_distance(y)
}
