//! Experiment harness: toy-instance objective scans, solver agreement runs,
//! and method-comparison phase transitions with per-row reproducible seeds.
//!
//! Every row of every table carries the seed that regenerates its instance in
//! isolation, rows are computed in parallel but emitted in a canonical order,
//! and summaries are always recomputed from the raw rows, so two runs with
//! the same configuration produce byte-identical CSV regardless of thread
//! count.

use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ensembles::{noisy_measurements, sparse_signal, EnsembleKind, EnsembleSpec};
use crate::error::Error;
use crate::model::rng::{derive_seed, RNG_ALGORITHM};
use crate::model::{
    l1_norm, l2_distance, l2_norm, DenseMatrix, RatioQ, RecoveryProblem, SignalVector,
    SolveReport,
};
use crate::solvers::{bpdn_solve, ccp_solve, l1_minus_l2_solve, lp_solve_linf, pm_solve};
use crate::sparsity::{q_ratio_sparsity, SparsityOrder};
use crate::{Float, Result};

/// Solver selector for harness rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Parametric outer loop with difference-of-convex inner steps.
    Pm,
    /// Convex–concave ascent on the scaled reformulation.
    Ccp,
    /// Per-coordinate linear programs, `q = ∞` only.
    LpInf,
    /// Basis-pursuit denoising baseline.
    Bpdn,
    /// `ℓ1 − ℓ2` penalty baseline, `q = 2` only.
    L1MinusL2,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pm => "pm",
            Method::Ccp => "ccp",
            Method::LpInf => "lp-inf",
            Method::Bpdn => "bpdn",
            Method::L1MinusL2 => "l1l2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pm" => Ok(Method::Pm),
            "ccp" => Ok(Method::Ccp),
            "lp" | "lp-inf" | "lpinf" => Ok(Method::LpInf),
            "bpdn" => Ok(Method::Bpdn),
            "l1l2" | "l1-l2" | "l1minusl2" => Ok(Method::L1MinusL2),
            other => Err(Error::Parse(format!(
                "unknown method '{other}' (expected pm, ccp, lp, bpdn, or l1l2)"
            ))),
        }
    }

    /// Runs this method on `problem` with library-default options.
    pub fn solve<F: Float>(&self, problem: &RecoveryProblem<F>) -> Result<SolveReport<F>> {
        match self {
            Method::Pm => pm_solve(problem, F::c(1e-5)),
            Method::Ccp => ccp_solve(problem, None),
            Method::LpInf => lp_solve_linf(problem),
            Method::Bpdn => bpdn_solve(problem),
            Method::L1MinusL2 => l1_minus_l2_solve(problem),
        }
    }
}

/// Full description of one benchmark sweep.
#[derive(Clone, Debug)]
pub struct ExperimentSpec<F: Float> {
    /// Human-readable experiment name, echoed into the metadata.
    pub name: String,
    /// Matrix ensemble drawn fresh (reseeded) for every row.
    pub ensemble: EnsembleSpec<F>,
    /// Sparsity levels `k` to sweep.
    pub sparsity_grid: Vec<usize>,
    /// Ratio orders `q` to sweep.
    pub q_grid: Vec<RatioQ<F>>,
    /// Solvers to run on every cell.
    pub methods: Vec<Method>,
    /// Independent instance draws per cell.
    pub replications: usize,
    /// Relative-error bar under which a run counts as a success.
    pub success_threshold: F,
    /// Standard deviation of the measurement noise (0 = noiseless).
    pub noise_sigma: F,
    /// Root seed; every row derives its own seed from it.
    pub master_seed: u64,
}

impl<F: Float> ExperimentSpec<F> {
    /// Desk-scale defaults: Gaussian 64×256, `k ∈ {6, 8, …, 32}`,
    /// `q ∈ {1.1, 1.5, 2, 5, ∞}`, 20 replications, noiseless, with the
    /// convex–concave solver (the fastest of the ratio methods).
    pub fn desk_scale(master_seed: u64) -> Self {
        Self {
            name: "desk".into(),
            ensemble: EnsembleSpec::gaussian(64, 256, master_seed).expect("static dims"),
            sparsity_grid: (6..=32).step_by(2).collect(),
            q_grid: vec![
                RatioQ::Finite(F::c(1.1)),
                RatioQ::Finite(F::c(1.5)),
                RatioQ::Finite(F::c(2.0)),
                RatioQ::Finite(F::c(5.0)),
                RatioQ::Infinity,
            ],
            methods: vec![Method::Ccp],
            replications: 20,
            success_threshold: F::c(1e-3),
            noise_sigma: F::zero(),
            master_seed,
        }
    }

    /// Full-scale variant: 100 replications on 64×1024 Gaussian matrices.
    /// Same grids and methods as [`ExperimentSpec::desk_scale`]; expect a
    /// much longer runtime.
    pub fn full_scale(master_seed: u64) -> Self {
        let mut spec = Self::desk_scale(master_seed);
        spec.name = "full".into();
        spec.ensemble = EnsembleSpec::gaussian(64, 1024, master_seed).expect("static dims");
        spec.replications = 100;
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be >= 1".into(),
            ));
        }
        if !(self.success_threshold > F::zero()) || !self.success_threshold.is_finite() {
            return Err(Error::InvalidParameter(
                "success_threshold must be positive and finite".into(),
            ));
        }
        if !(self.noise_sigma >= F::zero()) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidParameter(
                "noise sigma must be >= 0 and finite".into(),
            ));
        }
        if self.sparsity_grid.is_empty() || self.q_grid.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidParameter(
                "sparsity, q, and method grids must be nonempty".into(),
            ));
        }
        for &k in &self.sparsity_grid {
            if k == 0 || k > self.ensemble.n {
                return Err(Error::InvalidParameter(format!(
                    "sparsity level {k} is outside [1, {}]",
                    self.ensemble.n
                )));
            }
        }
        Ok(())
    }
}

/// One solved cell of a sweep.
#[derive(Clone, Debug)]
pub struct ResultRow<F: Float> {
    pub method: Method,
    pub q: RatioQ<F>,
    pub k: usize,
    pub replication: usize,
    /// Seed that regenerates this row's matrix, signal, and noise.
    pub seed: u64,
    /// `‖x̂ − x‖₂ / ‖x‖₂`; `+∞` when the solver failed outright.
    pub relative_error: F,
    /// `relative_error <= success_threshold`.
    pub success: bool,
    pub wall_time: f64,
    /// Solver termination label, or "error" when the solve returned none.
    pub termination: String,
}

/// Per-cell aggregate recomputed from the raw rows.
#[derive(Clone, Debug)]
pub struct SummaryRow<F: Float> {
    pub method: Method,
    pub q: RatioQ<F>,
    pub k: usize,
    pub rows: usize,
    pub success_rate: F,
    /// Mean relative error over the rows with finite error.
    pub mean_error_finite: F,
    pub mean_wall_time: f64,
}

/// Raw rows plus their per-cell summary.
#[derive(Clone, Debug)]
pub struct PhaseTable<F: Float> {
    pub rows: Vec<ResultRow<F>>,
    pub summary: Vec<SummaryRow<F>>,
}

fn q_sort_key<F: Float>(q: RatioQ<F>) -> f64 {
    match q {
        RatioQ::Finite(v) => v.to_f64().unwrap_or(f64::NAN),
        RatioQ::Infinity => f64::INFINITY,
    }
}

fn q_label<F: Float>(q: RatioQ<F>) -> String {
    match q {
        RatioQ::Finite(v) => format!("{v}"),
        RatioQ::Infinity => "inf".into(),
    }
}

/// Runs one cell of a sweep. Row seeds depend only on `(k, replication)`, so
/// every method and every `q` sees the same instance at the same cell and
/// the curves are paired comparisons on common data.
pub fn run_single_cell<F: Float>(
    spec: &ExperimentSpec<F>,
    method: Method,
    q: RatioQ<F>,
    k: usize,
    replication: usize,
) -> ResultRow<F> {
    let seed = derive_seed(spec.master_seed, &[k as u64, replication as u64]);
    let started = Instant::now();
    let outcome = solve_cell(spec, method, q, k, seed);
    let wall = started.elapsed().as_secs_f64();
    match outcome {
        Ok((report, relative_error)) => ResultRow {
            method,
            q,
            k,
            replication,
            seed,
            relative_error,
            success: relative_error <= spec.success_threshold,
            wall_time: report.wall_time,
            termination: report.termination.as_str().into(),
        },
        Err(_) => ResultRow {
            method,
            q,
            k,
            replication,
            seed,
            relative_error: F::infinity(),
            success: false,
            wall_time: wall,
            termination: "error".into(),
        },
    }
}

fn solve_cell<F: Float>(
    spec: &ExperimentSpec<F>,
    method: Method,
    q: RatioQ<F>,
    k: usize,
    seed: u64,
) -> Result<(SolveReport<F>, F)> {
    let mut ensemble = spec.ensemble;
    ensemble.seed = derive_seed(seed, &[0]);
    let a = ensemble.draw();
    let truth = sparse_signal::<F>(ensemble.n, k, derive_seed(seed, &[1]))?;
    let (y, eta) = noisy_measurements(&a, &truth.signal, spec.noise_sigma, derive_seed(seed, &[2]))?;
    let problem = RecoveryProblem::new(a, y, eta, q)?;
    let report = method.solve(&problem)?;
    let err = l2_distance(&report.solution, &truth.signal) / l2_norm(&truth.signal);
    Ok((report, err))
}

/// Runs the full sweep: every `(method, q, k, replication)` cell in
/// parallel, rows sorted canonically by `(method, q, k, replication)`, and a
/// summary recomputed from the rows.
pub fn run_phase_transition<F: Float>(spec: &ExperimentSpec<F>) -> Result<PhaseTable<F>> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &method in &spec.methods {
        for &q in &spec.q_grid {
            for &k in &spec.sparsity_grid {
                for rep in 0..spec.replications {
                    jobs.push((method, q, k, rep));
                }
            }
        }
    }
    let mut rows: Vec<ResultRow<F>> = jobs
        .into_par_iter()
        .map(|(method, q, k, rep)| run_single_cell(spec, method, q, k, rep))
        .collect();
    rows.sort_by(|a, b| {
        a.method
            .as_str()
            .cmp(b.method.as_str())
            .then(q_sort_key(a.q).total_cmp(&q_sort_key(b.q)))
            .then(a.k.cmp(&b.k))
            .then(a.replication.cmp(&b.replication))
    });
    let summary = summarize(&rows);
    Ok(PhaseTable { rows, summary })
}

/// Aggregates rows per `(method, q, k)` cell. The rows must already be in
/// canonical order; cells are contiguous runs.
pub fn summarize<F: Float>(rows: &[ResultRow<F>]) -> Vec<SummaryRow<F>> {
    let mut out: Vec<SummaryRow<F>> = Vec::new();
    for row in rows {
        let same_cell = out.last().map(|s: &SummaryRow<F>| {
            s.method == row.method && q_sort_key(s.q) == q_sort_key(row.q) && s.k == row.k
        });
        if same_cell != Some(true) {
            out.push(SummaryRow {
                method: row.method,
                q: row.q,
                k: row.k,
                rows: 0,
                success_rate: F::zero(),
                mean_error_finite: F::zero(),
                mean_wall_time: 0.0,
            });
        }
        let cell = out.last_mut().expect("cell pushed above");
        cell.rows += 1;
        if row.success {
            cell.success_rate += F::one();
        }
        if row.relative_error.is_finite() {
            cell.mean_error_finite += row.relative_error;
        }
        cell.mean_wall_time += row.wall_time;
    }
    for cell in out.iter_mut() {
        let n = F::from_usize(cell.rows).expect("cell is nonempty");
        cell.success_rate /= n;
        cell.mean_error_finite /= n;
        cell.mean_wall_time /= cell.rows as f64;
    }
    out
}

impl<F: Float> PhaseTable<F> {
    /// CSV of the raw rows. Wall-clock timing is deliberately left out of
    /// the file (it lives on the in-memory rows): the emitted bytes must be
    /// identical across reruns and thread counts, and timing never is.
    pub fn rows_csv(&self) -> String {
        let mut out =
            String::from("method,q,k,replication,seed,relative_error,success,termination\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.method.as_str(),
                q_label(r.q),
                r.k,
                r.replication,
                r.seed,
                r.relative_error,
                r.success,
                r.termination
            ));
        }
        out
    }

    /// CSV of the per-cell summary; deterministic for the same reason as
    /// [`PhaseTable::rows_csv`].
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("method,q,k,rows,success_rate,mean_error_finite\n");
        for s in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.method.as_str(),
                q_label(s.q),
                s.k,
                s.rows,
                s.success_rate,
                s.mean_error_finite
            ));
        }
        out
    }

    /// Metadata sidecar: configuration echo, package version, and the RNG
    /// algorithm, so a table can be regenerated from its artifacts alone.
    pub fn meta_json(&self, spec: &ExperimentSpec<F>) -> Value {
        json!({
            "name": spec.name,
            "ensemble": {
                "kind": spec.ensemble.kind.as_str(),
                "m": spec.ensemble.m,
                "n": spec.ensemble.n,
                "oversampling": spec.ensemble.oversampling.to_f64().unwrap_or(f64::NAN),
            },
            "sparsity_grid": spec.sparsity_grid,
            "q_grid": spec.q_grid.iter().map(|&q| q.to_json()).collect::<Vec<_>>(),
            "methods": spec.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
            "replications": spec.replications,
            "success_threshold": spec.success_threshold.to_f64().unwrap_or(f64::NAN),
            "noise_sigma": spec.noise_sigma.to_f64().unwrap_or(f64::NAN),
            "master_seed": spec.master_seed,
            "rng_algorithm": RNG_ALGORITHM,
            "package_version": env!("CARGO_PKG_VERSION"),
            "rows": self.rows.len(),
        })
    }
}

// ---------------------------------------------------------------------------
// Toy instance and its objective scans
// ---------------------------------------------------------------------------

/// The 5×6 pedagogical system whose solution set is a line with three
/// candidate sparsity patterns.
pub fn toy_instance<F: Float>() -> (DenseMatrix<F>, Vec<F>) {
    let a = DenseMatrix::new(
        5,
        6,
        [
            1.0, -1.0, 0.0, 0.0, 0.0, 0.0, //
            1.0, 0.0, -1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 1.0, 1.0, 0.0, 0.0, //
            2.0, 2.0, 0.0, 0.0, 1.0, 0.0, //
            1.0, 1.0, 0.0, 0.0, 0.0, -1.0,
        ]
        .iter()
        .map(|&v| F::c(v))
        .collect(),
    )
    .expect("static dims");
    let y = [0.0, 0.0, 20.0, 40.0, 18.0].iter().map(|&v| F::c(v)).collect();
    (a, y)
}

/// The solution line of the toy system as `z(t) = z0 + t·h`.
pub fn toy_solution_line<F: Float>() -> (Vec<F>, Vec<F>) {
    let z0 = [0.0, 0.0, 0.0, 20.0, 40.0, -18.0]
        .iter()
        .map(|&v| F::c(v))
        .collect();
    let h = [1.0, 1.0, 1.0, -2.0, -4.0, 2.0]
        .iter()
        .map(|&v| F::c(v))
        .collect();
    (z0, h)
}

/// The toy system packaged as a noiseless recovery problem at order `q`.
pub fn toy_problem<F: Float>(q: RatioQ<F>) -> RecoveryProblem<F> {
    let (a, y) = toy_instance();
    RecoveryProblem::new(a, SignalVector::new(y).expect("static data"), F::zero(), q)
        .expect("static instance is well formed")
}

/// The balance weight at which the `ℓ1 − ℓ2` penalty vanishes on the toy
/// system's sparsest solution: `λ̄ = ‖z(0)‖₂ / ‖z(0)‖₁`, computed from the
/// solution rather than hard-coded.
pub fn toy_lambda_bar<F: Float>() -> F {
    let (z0, _) = toy_solution_line::<F>();
    l2_norm(&z0) / l1_norm(&z0)
}

/// Objective scans along the toy solution line.
#[derive(Clone, Debug)]
pub struct ToyScan<F: Float> {
    /// The parameter grid `t ∈ [−5, 15]`, step 0.01.
    pub grid: Vec<F>,
    /// `(q, s_q(z(t)) per grid point)` for `q ∈ {0.5, 1.5, 2, ∞}`.
    pub sparsity_curves: Vec<(SparsityOrder<F>, Vec<F>)>,
    /// `(λ, λ‖z(t)‖₁ − ‖z(t)‖₂ per grid point)` for `λ ∈ {0.5, λ̄, 1}`.
    pub penalty_curves: Vec<(F, Vec<F>)>,
    /// The computed balance weight.
    pub lambda_bar: F,
}

/// Evaluates the sparsity measures and the weighted penalties along the toy
/// solution line. Solving the recovery problem at `q ≤ 1` is undefined, but
/// evaluating the measure there is fine, which is why the scan includes
/// `q = 0.5`.
pub fn run_toy_scan<F: Float>() -> Result<ToyScan<F>> {
    let (z0, h) = toy_solution_line::<F>();
    let n = z0.len();
    let steps = 2000usize;
    let grid: Vec<F> = (0..=steps)
        .map(|i| F::c(-5.0) + F::c(0.01) * F::from_usize(i).expect("small index"))
        .collect();
    let points: Vec<Vec<F>> = grid
        .iter()
        .map(|&t| (0..n).map(|i| z0[i] + t * h[i]).collect())
        .collect();
    let orders = [
        SparsityOrder::Finite(F::c(0.5)),
        SparsityOrder::Finite(F::c(1.5)),
        SparsityOrder::Finite(F::c(2.0)),
        SparsityOrder::Infinity,
    ];
    let mut sparsity_curves = Vec::with_capacity(orders.len());
    for &q in &orders {
        let mut curve = Vec::with_capacity(points.len());
        for z in &points {
            curve.push(q_ratio_sparsity(z, q)?.value);
        }
        sparsity_curves.push((q, curve));
    }
    let lambda_bar = toy_lambda_bar::<F>();
    let weights = [F::c(0.5), lambda_bar, F::one()];
    let penalty_curves = weights
        .iter()
        .map(|&w| {
            let curve = points
                .iter()
                .map(|z| w * l1_norm(z) - l2_norm(z))
                .collect();
            (w, curve)
        })
        .collect();
    Ok(ToyScan {
        grid,
        sparsity_curves,
        penalty_curves,
        lambda_bar,
    })
}

/// Grid points strictly lower than both neighbors.
pub fn local_minima_on_grid<F: Float>(grid: &[F], values: &[F]) -> Vec<F> {
    let mut out = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        if values[i] < values[i - 1] && values[i] < values[i + 1] {
            out.push(grid[i]);
        }
    }
    out
}

impl<F: Float> ToyScan<F> {
    fn order_label(q: &SparsityOrder<F>) -> String {
        match q {
            SparsityOrder::Zero => "0".into(),
            SparsityOrder::Finite(v) => format!("{v}"),
            SparsityOrder::Infinity => "inf".into(),
        }
    }

    /// CSV of the sparsity-measure curves, one column per order.
    pub fn sparsity_csv(&self) -> String {
        let mut out = String::from("t");
        for (q, _) in &self.sparsity_curves {
            out.push_str(&format!(",s_q={}", Self::order_label(q)));
        }
        out.push('\n');
        for (i, t) in self.grid.iter().enumerate() {
            out.push_str(&format!("{t}"));
            for (_, curve) in &self.sparsity_curves {
                out.push_str(&format!(",{}", curve[i]));
            }
            out.push('\n');
        }
        out
    }

    /// CSV of the weighted-penalty curves; the header carries the exact
    /// weights, including the computed `λ̄`.
    pub fn penalty_csv(&self) -> String {
        let mut out = String::from("t");
        for (w, _) in &self.penalty_curves {
            out.push_str(&format!(",penalty_lambda={w}"));
        }
        out.push('\n');
        for (i, t) in self.grid.iter().enumerate() {
            out.push_str(&format!("{t}"));
            for (_, curve) in &self.penalty_curves {
                out.push_str(&format!(",{}", curve[i]));
            }
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Agreement runs
// ---------------------------------------------------------------------------

/// One agreement scenario: a fixed instance solved by several methods.
#[derive(Clone, Debug)]
pub struct AgreementScenario<F: Float> {
    pub label: String,
    pub q: RatioQ<F>,
    pub k: usize,
    pub sigma: F,
    pub methods: Vec<Method>,
}

/// Default agreement scenarios: the ratio methods at `q = 2` with and
/// without noise, and the three-way `q = ∞` comparison.
pub fn agreement_scenarios<F: Float>() -> Vec<AgreementScenario<F>> {
    let q2 = RatioQ::Finite(F::c(2.0));
    vec![
        AgreementScenario {
            label: "q2_k30_noiseless".into(),
            q: q2,
            k: 30,
            sigma: F::zero(),
            methods: vec![Method::Pm, Method::Ccp],
        },
        AgreementScenario {
            label: "q2_k15_sigma0.1".into(),
            q: q2,
            k: 15,
            sigma: F::c(0.1),
            methods: vec![Method::Pm, Method::Ccp],
        },
        AgreementScenario {
            label: "qinf_k10_noiseless".into(),
            q: RatioQ::Infinity,
            k: 10,
            sigma: F::zero(),
            methods: vec![Method::Pm, Method::Ccp, Method::LpInf],
        },
        AgreementScenario {
            label: "qinf_k10_sigma0.01".into(),
            q: RatioQ::Infinity,
            k: 10,
            sigma: F::c(0.01),
            methods: vec![Method::Pm, Method::Ccp, Method::LpInf],
        },
    ]
}

/// Agreement results for one scenario.
#[derive(Clone, Debug)]
pub struct AgreementRow<F: Float> {
    pub scenario: String,
    pub q: RatioQ<F>,
    pub k: usize,
    pub sigma: F,
    pub seed: u64,
    /// `(method, relative error to truth, wall time, termination)`.
    pub per_method: Vec<(Method, F, f64, String)>,
    /// `(method a, method b, ‖x̂_a − x̂_b‖₂ / max(‖x̂_a‖₂, ‖x̂_b‖₂))`.
    pub pairwise: Vec<(Method, Method, F)>,
}

/// Runs the default agreement scenarios on the spec's ensemble.
pub fn run_agreement<F: Float>(spec: &ExperimentSpec<F>) -> Result<Vec<AgreementRow<F>>> {
    run_agreement_with(spec, &agreement_scenarios())
}

/// Runs explicit agreement scenarios; per-method failures are recorded as
/// infinite error rather than aborting the table.
pub fn run_agreement_with<F: Float>(
    spec: &ExperimentSpec<F>,
    scenarios: &[AgreementScenario<F>],
) -> Result<Vec<AgreementRow<F>>> {
    let mut out = Vec::with_capacity(scenarios.len());
    for (idx, sc) in scenarios.iter().enumerate() {
        let seed = derive_seed(spec.master_seed, &[0xA6_EE, idx as u64]);
        let mut ensemble = spec.ensemble;
        ensemble.seed = derive_seed(seed, &[0]);
        let a = ensemble.draw();
        let mut per_method: Vec<(Method, F, f64, String)> = Vec::new();
        let mut solutions: Vec<(Method, Option<Vec<F>>)> = Vec::new();
        if sc.k == 0 || sc.k > ensemble.n {
            return Err(Error::InvalidParameter(format!(
                "agreement scenario '{}' has sparsity {} outside [1, {}]",
                sc.label, sc.k, ensemble.n
            )));
        }
        let truth = sparse_signal::<F>(ensemble.n, sc.k, derive_seed(seed, &[1]))?;
        let (y, eta) = noisy_measurements(&a, &truth.signal, sc.sigma, derive_seed(seed, &[2]))?;
        let problem = RecoveryProblem::new(a, y, eta, sc.q)?;
        for &method in &sc.methods {
            let started = Instant::now();
            match method.solve(&problem) {
                Ok(report) => {
                    let err = l2_distance(&report.solution, &truth.signal)
                        / l2_norm(&truth.signal);
                    per_method.push((
                        method,
                        err,
                        report.wall_time,
                        report.termination.as_str().into(),
                    ));
                    solutions.push((method, Some(report.solution.into_vec())));
                }
                Err(_) => {
                    per_method.push((
                        method,
                        F::infinity(),
                        started.elapsed().as_secs_f64(),
                        "error".into(),
                    ));
                    solutions.push((method, None));
                }
            }
        }
        let mut pairwise = Vec::new();
        for i in 0..solutions.len() {
            for j in i + 1..solutions.len() {
                let d = match (&solutions[i].1, &solutions[j].1) {
                    (Some(xa), Some(xb)) => {
                        let denom = l2_norm(xa).max(l2_norm(xb));
                        if denom > F::zero() {
                            l2_distance(xa, xb) / denom
                        } else {
                            F::zero()
                        }
                    }
                    _ => F::infinity(),
                };
                pairwise.push((solutions[i].0, solutions[j].0, d));
            }
        }
        out.push(AgreementRow {
            scenario: sc.label.clone(),
            q: sc.q,
            k: sc.k,
            sigma: sc.sigma,
            seed,
            per_method,
            pairwise,
        });
    }
    Ok(out)
}

/// CSV of the agreement rows, one line per (scenario, method) plus one line
/// per method pair.
pub fn agreement_csv<F: Float>(rows: &[AgreementRow<F>]) -> String {
    let mut out =
        String::from("scenario,q,k,sigma,seed,kind,method_a,method_b,value,wall_time,termination\n");
    for r in rows {
        for (m, err, wall, term) in &r.per_method {
            out.push_str(&format!(
                "{},{},{},{},{},relative_error,{},,{},{:.6},{}\n",
                r.scenario,
                q_label(r.q),
                r.k,
                r.sigma,
                r.seed,
                m.as_str(),
                err,
                wall,
                term
            ));
        }
        for (ma, mb, d) in &r.pairwise {
            out.push_str(&format!(
                "{},{},{},{},{},pairwise_difference,{},{},{},,\n",
                r.scenario,
                q_label(r.q),
                r.k,
                r.sigma,
                r.seed,
                ma.as_str(),
                mb.as_str(),
                d
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Flat key = value configuration
// ---------------------------------------------------------------------------

/// Parses a flat `key = value` experiment description. Keys mirror
/// [`ExperimentSpec`]: `name`, `ensemble` (gaussian | dct), `m`, `n`,
/// `oversampling`, `k` (comma list), `q` (comma list, `inf` allowed),
/// `methods` (comma list), `replications`, `success_threshold`, `sigma`,
/// `seed`. Lines starting with `#` and inline `# …` suffixes are comments;
/// unknown keys are errors.
pub fn parse_experiment_config<F: Float>(text: &str) -> Result<ExperimentSpec<F>> {
    let mut name = String::from("experiment");
    let mut kind = EnsembleKind::Gaussian;
    let mut m: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut oversampling = F::c(5.0);
    let mut sparsity_grid: Option<Vec<usize>> = None;
    let mut q_grid: Option<Vec<RatioQ<F>>> = None;
    let mut methods: Option<Vec<Method>> = None;
    let mut replications = 20usize;
    let mut success_threshold = F::c(1e-3);
    let mut sigma = F::zero();
    let mut seed = 0u64;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "line {}: expected `key = value`, got '{line}'",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let parse_usize = |v: &str, what: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: bad {what} '{v}'", lineno + 1)))
        };
        let parse_float = |v: &str, what: &str| -> Result<F> {
            v.parse::<F>()
                .map_err(|_| Error::Parse(format!("line {}: bad {what} '{v}'", lineno + 1)))
        };
        match key {
            "name" => name = value.to_string(),
            "ensemble" => {
                kind = match value.to_ascii_lowercase().as_str() {
                    "gaussian" => EnsembleKind::Gaussian,
                    "dct" | "oversampled_dct" | "cosine" => EnsembleKind::OversampledDct,
                    other => {
                        return Err(Error::Parse(format!(
                            "line {}: unknown ensemble '{other}'",
                            lineno + 1
                        )))
                    }
                }
            }
            "m" => m = Some(parse_usize(value, "row count")?),
            "n" => n = Some(parse_usize(value, "column count")?),
            "oversampling" => oversampling = parse_float(value, "oversampling factor")?,
            "k" => {
                let grid = value
                    .split(',')
                    .map(|v| parse_usize(v.trim(), "sparsity level"))
                    .collect::<Result<Vec<_>>>()?;
                sparsity_grid = Some(grid);
            }
            "q" => {
                let grid = value
                    .split(',')
                    .map(|v| RatioQ::parse(v.trim()))
                    .collect::<Result<Vec<_>>>()?;
                q_grid = Some(grid);
            }
            "methods" => {
                let list = value
                    .split(',')
                    .map(Method::parse)
                    .collect::<Result<Vec<_>>>()?;
                methods = Some(list);
            }
            "replications" => replications = parse_usize(value, "replication count")?,
            "success_threshold" => {
                success_threshold = parse_float(value, "success threshold")?
            }
            "sigma" => sigma = parse_float(value, "noise level")?,
            "seed" => {
                seed = value.parse::<u64>().map_err(|_| {
                    Error::Parse(format!("line {}: bad seed '{value}'", lineno + 1))
                })?
            }
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }

    let m = m.ok_or_else(|| Error::Parse("config is missing `m`".into()))?;
    let n = n.ok_or_else(|| Error::Parse("config is missing `n`".into()))?;
    let ensemble = match kind {
        EnsembleKind::Gaussian => EnsembleSpec::gaussian(m, n, seed)?,
        EnsembleKind::OversampledDct => EnsembleSpec::oversampled_dct(m, n, oversampling, seed)?,
    };
    let spec = ExperimentSpec {
        name,
        ensemble,
        sparsity_grid: sparsity_grid
            .ok_or_else(|| Error::Parse("config is missing `k`".into()))?,
        q_grid: q_grid.ok_or_else(|| Error::Parse("config is missing `q`".into()))?,
        methods: methods.ok_or_else(|| Error::Parse("config is missing `methods`".into()))?,
        replications,
        success_threshold,
        noise_sigma: sigma,
        master_seed: seed,
    };
    spec.validate()?;
    Ok(spec)
}
