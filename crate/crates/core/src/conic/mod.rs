//! Convex subproblem engine.
//!
//! Every solver in this crate reduces its inner step to one template:
//!
//! * **Residual form** — variable `z`, objective `lam * ||z||_1 - c . z`,
//!   constraint `||A z - y||_2 <= eta` (a ball around the measurements, with
//!   `eta = 0` pinning `A z = y`).
//! * **Scaled form** — joint variable `(v, t)`, linear objective,
//!   constraints `||v||_1 <= 1`, `||A v - t y||_2 <= t eta`, `t >= t_lower`,
//!   encoded through a second-order cone on `(y t - A v, eta t)`.
//! * **Kernel form** — variable `h`, linear objective, constraints
//!   `||h||_1 <= 1` and `A h = 0`.
//!
//! A [`ConicProgram`] freezes the geometry (matrix, cone, separable set) and
//! its factorization cache; [`Objective`] carries the parts that change
//! between successive solves, so sequences of related subproblems reuse the
//! cache and warm-start each other.

mod engine;
pub mod proj;

pub use engine::{ConicSolution, ConicStatus, Tolerances, WarmState};

use crate::model::{dot, DenseMatrix};
use crate::{Error, Float, Result};

/// Constraint set the image copy `w = M x` is projected onto.
#[derive(Debug, Clone)]
pub enum ConeTarget<F> {
    /// `||w - center||_2 <= radius`; radius zero is the equality `w = center`.
    Ball { center: Vec<F>, radius: F },
    /// Second-order cone on `(w_0..w_{p-2}, w_{p-1})`.
    Soc,
}

/// Separable constraints on the variable copy.
#[derive(Debug, Clone, Default)]
pub struct SeparableSet<F> {
    /// Radius of an l1-ball cap over the non-scale coordinates.
    pub l1_ball: Option<F>,
    /// Sign-constrained coordinates (`x_j >= 0`).
    pub nonneg: Vec<usize>,
    /// Index of a scale coordinate excluded from the l1 ball.
    pub t_index: Option<usize>,
    /// Lower bound enforced on the scale coordinate.
    pub t_lower: F,
    /// Optional interval `lo <= x_j <= hi` on every non-scale coordinate;
    /// the interval must contain zero and may not combine with the l1 ball.
    pub box_bounds: Option<(F, F)>,
}

/// Linear-plus-l1 objective `l1_weight * ||x||_1 - linear . x`, minimized.
#[derive(Debug, Clone)]
pub struct Objective<F> {
    /// Weight on the l1 term; must be zero when the program caps the l1 norm.
    pub l1_weight: F,
    /// Linear reward `c` (the engine minimizes `-c . x`); `None` means zero.
    pub linear: Option<Vec<F>>,
}

impl<F: Float> Objective<F> {
    /// Pure l1 objective `weight * ||x||_1`.
    pub fn l1(weight: F) -> Self {
        Objective {
            l1_weight: weight,
            linear: None,
        }
    }

    /// Pure linear objective `-c . x` (maximizes `c . x`).
    pub fn linear(c: Vec<F>) -> Self {
        Objective {
            l1_weight: F::zero(),
            linear: Some(c),
        }
    }

    /// l1 term plus linear reward.
    pub fn l1_minus_linear(weight: F, c: Vec<F>) -> Self {
        Objective {
            l1_weight: weight,
            linear: Some(c),
        }
    }

    fn check_dims(&self, d: usize, has_l1_ball: bool) {
        if let Some(c) = self.linear.as_ref() {
            assert_eq!(c.len(), d, "linear term length must match the variable");
        }
        assert!(
            !(self.l1_weight > F::zero() && has_l1_ball),
            "an l1 objective term and an l1-ball cap never co-occur in the templates",
        );
    }

    fn evaluate(&self, x: &[F], t_index: Option<usize>) -> F {
        let mut value = F::zero();
        if self.l1_weight > F::zero() {
            let mut l1 = F::zero();
            for (j, &e) in x.iter().enumerate() {
                if Some(j) != t_index {
                    l1 += e.abs();
                }
            }
            value += self.l1_weight * l1;
        }
        if let Some(c) = self.linear.as_ref() {
            value -= dot(c, x);
        }
        value
    }
}

/// Frozen geometry and factorization cache for one subproblem family.
#[derive(Debug, Clone)]
pub struct ConicProgram<F: Float> {
    matrix: DenseMatrix<F>,
    cone: ConeTarget<F>,
    l1_ball: Option<F>,
    nonneg: Vec<bool>,
    t_index: Option<usize>,
    t_lower: F,
    box_bounds: Option<(F, F)>,
    cache: crate::model::linalg::Cholesky<F>,
}

impl<F: Float> ConicProgram<F> {
    /// General constructor: image map `matrix`, cone on the image, and
    /// separable constraints on the variable.
    pub fn new(matrix: DenseMatrix<F>, cone: ConeTarget<F>, set: SeparableSet<F>) -> Result<Self> {
        let p = matrix.rows();
        let d = matrix.cols();
        match &cone {
            ConeTarget::Ball { center, radius } => {
                if center.len() != p {
                    return Err(Error::DimensionMismatch(format!(
                        "ball center has length {} but the image has dimension {p}",
                        center.len()
                    )));
                }
                if !(*radius >= F::zero()) {
                    return Err(Error::InvalidParameter(
                        "ball radius must be nonnegative".into(),
                    ));
                }
            }
            ConeTarget::Soc => {
                if p < 1 {
                    return Err(Error::InvalidParameter(
                        "second-order cone needs at least one image coordinate".into(),
                    ));
                }
            }
        }
        if let Some(r) = set.l1_ball {
            if !(r >= F::zero()) {
                return Err(Error::InvalidParameter(
                    "l1-ball radius must be nonnegative".into(),
                ));
            }
        }
        if let Some(t) = set.t_index {
            if t >= d {
                return Err(Error::InvalidParameter(format!(
                    "scale index {t} is out of range for dimension {d}"
                )));
            }
        }
        if let Some((lo, hi)) = set.box_bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi && lo <= F::zero() && hi >= F::zero())
            {
                return Err(Error::InvalidParameter(
                    "box bounds must be a finite interval containing zero".into(),
                ));
            }
            if set.l1_ball.is_some() {
                return Err(Error::InvalidParameter(
                    "box bounds cannot combine with an l1-ball cap".into(),
                ));
            }
        }
        let mut nonneg = vec![false; d];
        for &j in &set.nonneg {
            if j >= d {
                return Err(Error::InvalidParameter(format!(
                    "sign-constraint index {j} is out of range for dimension {d}"
                )));
            }
            nonneg[j] = true;
        }

        // I + M M^T, factored once; always symmetric positive definite.
        let mut gram = DenseMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let mut acc = dot(matrix.row(i), matrix.row(j));
                if i == j {
                    acc += F::one();
                }
                *gram.get_mut(i, j) = acc;
                *gram.get_mut(j, i) = acc;
            }
        }
        let cache = crate::model::linalg::Cholesky::factor(&gram)
            .expect("I + M M^T is symmetric positive definite");

        Ok(ConicProgram {
            matrix,
            cone,
            l1_ball: set.l1_ball,
            nonneg,
            t_index: set.t_index,
            t_lower: set.t_lower,
            box_bounds: set.box_bounds,
            cache,
        })
    }

    /// Residual form: variable `z`, constraint `||A z - y||_2 <= eta`.
    pub fn residual_form(a: &DenseMatrix<F>, y: &[F], eta: F) -> Result<Self> {
        Self::residual_form_with_bounds(a, y, eta, None)
    }

    /// Residual form with optional coordinate bounds `lo <= z_j <= hi`.
    pub fn residual_form_with_bounds(
        a: &DenseMatrix<F>,
        y: &[F],
        eta: F,
        box_bounds: Option<(F, F)>,
    ) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but the measurement vector has length {}",
                a.rows(),
                y.len()
            )));
        }
        if !(eta >= F::zero() && eta.is_finite()) {
            return Err(Error::InvalidParameter(
                "noise bound must be finite and nonnegative".into(),
            ));
        }
        Self::new(
            a.clone(),
            ConeTarget::Ball {
                center: y.to_vec(),
                radius: eta,
            },
            SeparableSet {
                box_bounds,
                ..SeparableSet::default()
            },
        )
    }

    /// Scaled form: joint variable `(v, t)` with `||v||_1 <= 1`,
    /// `||A v - t y||_2 <= t eta`, and `t >= t_lower`.
    ///
    /// With `eta > 0` the coupling is a second-order cone on
    /// `(t y - A v, t eta)`; with `eta = 0` it collapses to the equality
    /// `A v = t y`.
    pub fn scaled_form(a: &DenseMatrix<F>, y: &[F], eta: F, t_lower: F) -> Result<Self> {
        let m = a.rows();
        let n = a.cols();
        if y.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {m} rows but the measurement vector has length {}",
                y.len()
            )));
        }
        if !(eta >= F::zero() && eta.is_finite()) {
            return Err(Error::InvalidParameter(
                "noise bound must be finite and nonnegative".into(),
            ));
        }
        if !(t_lower > F::zero()) {
            return Err(Error::InvalidParameter(
                "scale lower bound must be positive".into(),
            ));
        }
        let p = if eta > F::zero() { m + 1 } else { m };
        let mut stacked = DenseMatrix::zeros(p, n + 1);
        for i in 0..m {
            for j in 0..n {
                *stacked.get_mut(i, j) = -a.get(i, j);
            }
            *stacked.get_mut(i, n) = y[i];
        }
        let cone = if eta > F::zero() {
            *stacked.get_mut(m, n) = eta;
            ConeTarget::Soc
        } else {
            ConeTarget::Ball {
                center: vec![F::zero(); m],
                radius: F::zero(),
            }
        };
        Self::new(
            stacked,
            cone,
            SeparableSet {
                l1_ball: Some(F::one()),
                t_index: Some(n),
                t_lower,
                ..SeparableSet::default()
            },
        )
    }

    /// Kernel form: variable `h` with `||h||_1 <= 1` and `A h = 0`.
    pub fn kernel_form(a: &DenseMatrix<F>) -> Result<Self> {
        Self::new(
            a.clone(),
            ConeTarget::Ball {
                center: vec![F::zero(); a.rows()],
                radius: F::zero(),
            },
            SeparableSet {
                l1_ball: Some(F::one()),
                ..SeparableSet::default()
            },
        )
    }

    /// Same program with additional sign constraints `x_j >= 0`.
    pub fn with_nonneg(mut self, indices: &[usize]) -> Self {
        for &j in indices {
            assert!(j < self.variable_dim(), "sign-constraint index in range");
            self.nonneg[j] = true;
        }
        self
    }

    /// Dimension of the variable `x`.
    pub fn variable_dim(&self) -> usize {
        self.matrix.cols()
    }

    /// Dimension of the image `M x`.
    pub fn image_dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Index of the scale coordinate, if the template has one.
    pub fn scale_index(&self) -> Option<usize> {
        self.t_index
    }
}

/// Solve one subproblem on a prepared program.
pub fn solve_subproblem<F: Float>(
    program: &ConicProgram<F>,
    objective: &Objective<F>,
    tol: &Tolerances<F>,
    warm: Option<&WarmState<F>>,
) -> (ConicSolution<F>, WarmState<F>) {
    program.solve(objective, tol, warm)
}

/// Solve a purely linear objective (`maximize c . x`) on a prepared program.
/// An unbounded direction is reported as [`ConicStatus::Unbounded`].
pub fn solve_lp<F: Float>(
    program: &ConicProgram<F>,
    c: Vec<F>,
    tol: &Tolerances<F>,
    warm: Option<&WarmState<F>>,
) -> (ConicSolution<F>, WarmState<F>) {
    program.solve(&Objective::linear(c), tol, warm)
}
