use std::time::Instant;

use qratio::bench::{run_phase_transition, ExperimentSpec};
use qratio::model::RatioQ;

fn q_lab(q: &RatioQ<f64>) -> String {
    match q {
        RatioQ::Finite(v) => format!("{v}"),
        RatioQ::Infinity => "inf".into(),
    }
}

fn main() {
    let t = Instant::now();
    let spec = ExperimentSpec::<f64>::desk_scale(1729);
    let table = run_phase_transition(&spec).unwrap();
    println!("desk sweep: {} rows in {:?}", table.rows.len(), t.elapsed());
    for s in &table.summary {
        println!(
            "q={:<4} k={:2}: success={:.2} mean_err={:.2e}",
            q_lab(&s.q), s.k, s.success_rate, s.mean_error_finite
        );
    }
}
