//! Core numeric types shared by every module: vectors, dense matrices, the
//! recovery problem description, and the solver report.

mod io;
pub mod linalg;
pub mod rng;

pub use io::{
    load_matrix, load_vector, read_matrix, read_vector, save_matrix, save_vector, write_matrix,
    write_vector,
};

use core::fmt;
use core::ops::Deref;

use crate::{Error, Float, Result};

/// A fixed-length real vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalVector<F: Float> {
    entries: Vec<F>,
}

impl<F: Float> SignalVector<F> {
    /// Wraps a vector of entries, rejecting empty or non-finite input.
    pub fn new(entries: Vec<F>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter(
                "signal vector must have length >= 1".into(),
            ));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter(
                "signal vector entries must be finite".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// Copies a slice into a new vector.
    pub fn from_slice(entries: &[F]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// Vector of zeros of length `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "signal vector must have length >= 1");
        Self {
            entries: vec![F::zero(); n],
        }
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false: the empty vector is rejected at construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Entries as a slice.
    pub fn as_slice(&self) -> &[F] {
        &self.entries
    }

    /// Consumes the vector and returns its entries.
    pub fn into_vec(self) -> Vec<F> {
        self.entries
    }
}

impl<F: Float> Deref for SignalVector<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.entries
    }
}

/// Row-major dense real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<F: Float> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Float> DenseMatrix<F> {
    /// Builds an `m x n` matrix from row-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimensions must be >= 1".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data length {} does not equal {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("matrix must have rows".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data: Vec<F> = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, data)
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![F::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = F::one();
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    /// Mutable entry at `(i, j)`.
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut F {
        &mut self.data[i * self.cols + j]
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` copied into a new vector.
    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Raw row-major data.
    pub fn data(&self) -> &[F] {
        &self.data
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Self {
        let mut data = vec![F::zero(); self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> F {
        self.data.iter().map(|&e| e * e).sum::<F>().sqrt()
    }

    /// Checked matrix-vector product `A z` with deterministic summation order.
    pub fn matvec(&self, z: &[F]) -> Result<Vec<F>> {
        if z.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: matrix has {} columns, vector has length {}",
                self.cols,
                z.len()
            )));
        }
        let mut out = vec![F::zero(); self.rows];
        self.mul_vec(z, &mut out);
        Ok(out)
    }

    /// Unchecked product `out = A z` (lengths asserted).
    pub fn mul_vec(&self, z: &[F], out: &mut [F]) {
        assert_eq!(z.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = F::zero();
            for (a, b) in row.iter().zip(z.iter()) {
                acc += *a * *b;
            }
            *o = acc;
        }
    }

    /// Unchecked transposed product `out = A^T z`.
    pub fn mul_t_vec(&self, z: &[F], out: &mut [F]) {
        assert_eq!(z.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        for o in out.iter_mut() {
            *o = F::zero();
        }
        for (i, &zi) in z.iter().enumerate() {
            let row = self.row(i);
            for (o, &a) in out.iter_mut().zip(row.iter()) {
                *o += a * zi;
            }
        }
    }
}

/// The norm-ratio parameter `q` with `q = inf` as an explicit variant.
///
/// Solvers accept `1 < q <= inf`; evaluating the sparsity measure at other
/// orders goes through [`crate::sparsity::SparsityOrder`] instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatioQ<F: Float> {
    /// Finite exponent, strictly greater than 1.
    Finite(F),
    /// The supremum norm.
    Infinity,
}

impl<F: Float> RatioQ<F> {
    /// Validates a finite exponent (`q > 1`).
    pub fn new(q: F) -> Result<Self> {
        if !q.is_finite() || q <= F::one() {
            return Err(Error::InvalidParameter(format!(
                "q must satisfy 1 < q <= inf, got {q}"
            )));
        }
        Ok(RatioQ::Finite(q))
    }

    /// Parses `"inf"` or a decimal exponent.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(RatioQ::Infinity);
        }
        let q: F = t
            .parse()
            .map_err(|_| Error::Parse(format!("cannot parse q value {t:?}")))?;
        Self::new(q)
    }

    /// True for the supremum-norm variant.
    pub fn is_infinite(&self) -> bool {
        matches!(self, RatioQ::Infinity)
    }

    /// The exponent `q/(q-1)` that turns a norm ratio into a sparsity level;
    /// tends to 1 as `q -> inf`.
    pub fn sparsity_exponent(&self) -> F {
        match *self {
            RatioQ::Finite(q) => q / (q - F::one()),
            RatioQ::Infinity => F::one(),
        }
    }

    /// The Hoelder exponent `1 - 1/q`; tends to 1 as `q -> inf`.
    pub fn one_minus_inv(&self) -> F {
        match *self {
            RatioQ::Finite(q) => F::one() - q.recip(),
            RatioQ::Infinity => F::one(),
        }
    }

    /// `k^{1-1/q}` with the `q = inf` limit `k`.
    pub fn pow_holder(&self, k: F) -> F {
        match *self {
            RatioQ::Finite(q) => k.powf(F::one() - q.recip()),
            RatioQ::Infinity => k,
        }
    }

    /// JSON representation: a number, or the string `"inf"`.
    pub fn to_json(&self) -> serde_json::Value {
        match *self {
            RatioQ::Finite(q) => serde_json::json!(q.to_f64().unwrap_or(f64::NAN)),
            RatioQ::Infinity => serde_json::json!("inf"),
        }
    }
}

impl<F: Float> fmt::Display for RatioQ<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioQ::Finite(q) => write!(f, "{q}"),
            RatioQ::Infinity => write!(f, "inf"),
        }
    }
}

/// Sum of absolute entries.
pub fn l1_norm<F: Float>(z: &[F]) -> F {
    z.iter().map(|&e| e.abs()).sum()
}

/// Euclidean norm.
pub fn l2_norm<F: Float>(z: &[F]) -> F {
    z.iter().map(|&e| e * e).sum::<F>().sqrt()
}

/// Largest absolute entry (zero for the empty slice).
pub fn linf_norm<F: Float>(z: &[F]) -> F {
    z.iter().fold(F::zero(), |m, &e| m.max(e.abs()))
}

/// The `lq` norm for `1 < q <= inf`.
///
/// Finite exponents are evaluated on magnitudes scaled by the max entry, so
/// large `q` neither overflows nor underflows.
pub fn lq_norm<F: Float>(z: &[F], q: RatioQ<F>) -> F {
    match q {
        RatioQ::Infinity => linf_norm(z),
        RatioQ::Finite(q) => {
            let m = linf_norm(z);
            if m == F::zero() {
                return F::zero();
            }
            let sum: F = z
                .iter()
                .map(|&e| {
                    let r = e.abs() / m;
                    if r == F::zero() {
                        F::zero()
                    } else {
                        r.powf(q)
                    }
                })
                .sum();
            m * sum.powf(q.recip())
        }
    }
}

/// Euclidean distance between two equal-length slices.
pub fn l2_distance<F: Float>(a: &[F], b: &[F]) -> F {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<F>()
        .sqrt()
}

/// Dot product.
pub fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum()
}

/// An instance of noisy sparse recovery: find the smallest-ratio `z` with
/// `||A z - y||_2 <= eta`.
#[derive(Clone, Debug)]
pub struct RecoveryProblem<F: Float> {
    /// Measurement matrix `A`, `m x N`.
    pub matrix: DenseMatrix<F>,
    /// Measurement vector `y`, length `m`.
    pub measurements: SignalVector<F>,
    /// Noise bound `eta >= 0`.
    pub noise_bound: F,
    /// Norm-ratio parameter.
    pub q: RatioQ<F>,
}

impl<F: Float> RecoveryProblem<F> {
    /// Validates dimensions and parameter domains.
    ///
    /// Feasibility is *not* checked here; solvers detect infeasible instances
    /// and report them.
    pub fn new(
        matrix: DenseMatrix<F>,
        measurements: SignalVector<F>,
        noise_bound: F,
        q: RatioQ<F>,
    ) -> Result<Self> {
        if measurements.len() != matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but y has length {}",
                matrix.rows(),
                measurements.len()
            )));
        }
        if !noise_bound.is_finite() || noise_bound < F::zero() {
            return Err(Error::InvalidParameter(format!(
                "noise bound must be finite and >= 0, got {noise_bound}"
            )));
        }
        Ok(Self {
            matrix,
            measurements,
            noise_bound,
            q,
        })
    }

    /// Number of unknowns `N`.
    pub fn dimension(&self) -> usize {
        self.matrix.cols()
    }

    /// Number of measurements `m`.
    pub fn measurement_count(&self) -> usize {
        self.matrix.rows()
    }

    /// Residual norm `||A z - y||_2` at a candidate point.
    pub fn residual_norm(&self, z: &[F]) -> F {
        let mut az = vec![F::zero(); self.matrix.rows()];
        self.matrix.mul_vec(z, &mut az);
        l2_distance(&az, &self.measurements)
    }

    /// The norm ratio `||z||_1 / ||z||_q`, or `None` at the zero vector.
    pub fn ratio_objective(&self, z: &[F]) -> Option<F> {
        let denom = lq_norm(z, self.q);
        if denom == F::zero() {
            None
        } else {
            Some(l1_norm(z) / denom)
        }
    }
}

/// How a solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Stopping criterion met.
    Converged,
    /// Iteration budget exhausted first.
    MaxIterations,
    /// The feasible set is empty (certified or detected by the engine).
    Infeasible,
    /// `||y||_2 <= eta`: the zero vector is feasible and the ratio is
    /// undefined there, so the zero solution is returned unoptimized.
    DegenerateZero,
}

impl Termination {
    /// Stable lowercase identifier used in JSON and CSV output.
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::Infeasible => "infeasible",
            Termination::DegenerateZero => "degenerate_zero",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one solver run.
#[derive(Clone, Debug)]
pub struct SolveReport<F: Float> {
    /// Method identifier (`pm`, `ccp`, `lp-inf`, `bpdn`, `l1l2`).
    pub method: &'static str,
    /// Norm-ratio parameter the run used.
    pub q: RatioQ<F>,
    /// Final iterate.
    pub solution: SignalVector<F>,
    /// `||z||_1 / ||z||_q` recomputed at the solution; `None` when the
    /// solution is the zero vector (degenerate instances).
    pub objective_value: Option<F>,
    /// `||A z - y||_2` recomputed at the solution.
    pub residual_norm: F,
    /// Outer-loop iterations (parametric steps, CCP steps, or LPs solved).
    pub outer_iterations: usize,
    /// Total inner first-order iterations across all subproblem solves.
    pub inner_iterations: usize,
    /// How the run ended.
    pub termination: Termination,
    /// Wall-clock seconds.
    pub wall_time: f64,
    /// Parametric methods: the lambda value after each outer step.
    pub lambda_history: Vec<F>,
    /// Ascent/descent trace of the outer objective, when the method has one.
    pub objective_trace: Vec<F>,
    /// Diagnostic flags (`lambda_nonmonotone`, `l1_cap_active`, ...).
    pub notes: Vec<String>,
}

impl<F: Float> SolveReport<F> {
    /// Assembles a report, recomputing the objective and residual from the
    /// solution so the stored values always match the returned point.
    pub fn finish(
        method: &'static str,
        problem: &RecoveryProblem<F>,
        solution: Vec<F>,
        outer_iterations: usize,
        inner_iterations: usize,
        termination: Termination,
        wall_time: f64,
    ) -> Result<Self> {
        let solution = SignalVector::new(solution)?;
        let objective_value = problem.ratio_objective(&solution);
        let residual_norm = problem.residual_norm(&solution);
        Ok(Self {
            method,
            q: problem.q,
            solution,
            objective_value,
            residual_norm,
            outer_iterations,
            inner_iterations,
            termination,
            wall_time,
            lambda_history: Vec::new(),
            objective_trace: Vec::new(),
            notes: Vec::new(),
        })
    }

    /// Full report as a JSON object.
    pub fn to_json(&self) -> serde_json::Value {
        let sol: Vec<f64> = self
            .solution
            .iter()
            .map(|e| e.to_f64().unwrap_or(f64::NAN))
            .collect();
        serde_json::json!({
            "method": self.method,
            "q": self.q.to_json(),
            "solution": sol,
            "objective_value": self.objective_value.map(|v| v.to_f64().unwrap_or(f64::NAN)),
            "residual_norm": self.residual_norm.to_f64().unwrap_or(f64::NAN),
            "outer_iterations": self.outer_iterations,
            "inner_iterations": self.inner_iterations,
            "termination": self.termination.as_str(),
            "wall_time": self.wall_time,
            "lambda_history": self.lambda_history.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>(),
            "objective_trace": self.objective_trace.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>(),
            "notes": self.notes,
            "rng_algorithm": rng::RNG_ALGORITHM,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_matches_toy_instance() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, -1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            vec![2.0, 2.0, 0.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        let z = [0.0, 0.0, 0.0, 20.0, 40.0, -18.0];
        let y = a.matvec(&z).unwrap();
        assert_eq!(y, vec![0.0, 0.0, 20.0, 40.0, 18.0]);
    }

    #[test]
    fn matvec_identity_and_zero() {
        let id = DenseMatrix::<f64>::identity(3);
        assert_eq!(id.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let zero = DenseMatrix::<f64>::zeros(2, 3);
        assert_eq!(zero.matvec(&[4.0, 5.0, 6.0]).unwrap(), vec![0.0, 0.0]);
        assert!(id.matvec(&[1.0]).is_err());
    }

    #[test]
    fn norms_match_hand_values() {
        assert_eq!(l1_norm(&[1.0, -2.0, 3.0]), 6.0);
        assert_eq!(l1_norm(&[0.0; 5]), 0.0);
        assert!((l1_norm::<f64>(&[10.0, 0.0, 1.0, 0.1, 0.0]) - 11.1).abs() < 1e-12);
        assert_eq!(lq_norm(&[3.0, 4.0], RatioQ::new(2.0).unwrap()), 5.0);
        assert_eq!(lq_norm(&[1.0, -7.0, 2.0], RatioQ::Infinity), 7.0);
        let q4 = RatioQ::new(4.0).unwrap();
        assert!((lq_norm(&[1.0, 1.0, 1.0, 1.0], q4) - 4f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn lq_norm_is_monotone_in_q() {
        let z = [0.3, -1.7, 0.0, 2.4, -0.2];
        let qs = [1.5, 2.0, 3.0, 8.0, 50.0];
        let mut last = f64::INFINITY;
        for &q in &qs {
            let n = lq_norm(&z, RatioQ::new(q).unwrap());
            assert!(n <= last + 1e-12);
            last = n;
        }
        assert!(lq_norm(&z, RatioQ::Infinity) <= last + 1e-12);
    }

    #[test]
    fn ratio_q_parses_and_rejects() {
        assert!(RatioQ::<f64>::parse("inf").unwrap().is_infinite());
        assert_eq!(RatioQ::<f64>::parse("2.5").unwrap(), RatioQ::Finite(2.5));
        assert!(RatioQ::<f64>::parse("1.0").is_err());
        assert!(RatioQ::<f64>::parse("0.5").is_err());
        assert!(RatioQ::<f64>::new(f64::NAN).is_err());
    }

    #[test]
    fn problem_construction_validates() {
        let a = DenseMatrix::<f64>::identity(2);
        let y = SignalVector::new(vec![1.0, 2.0]).unwrap();
        assert!(RecoveryProblem::new(a.clone(), y.clone(), -0.1, RatioQ::Infinity).is_err());
        let bad_y = SignalVector::new(vec![1.0]).unwrap();
        assert!(RecoveryProblem::new(a.clone(), bad_y, 0.0, RatioQ::Infinity).is_err());
        assert!(RecoveryProblem::new(a, y, 0.5, RatioQ::new(2.0).unwrap()).is_ok());
    }

    #[test]
    fn finite_entry_invariants_enforced() {
        assert!(SignalVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(SignalVector::new(Vec::<f64>::new()).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
    }
}
