//! Closed-form values as JSON.

use aloha_core::analytics::{self, AnalyticsError, MeanTime};
use aloha_core::percolation::critical_radius;
use serde_json::{json, Value};

/// Finite numbers as JSON numbers, infinities as the string `"inf"`.
pub fn number(v: f64) -> Value {
    if v.is_infinite() && v > 0.0 {
        Value::String("inf".into())
    } else {
        json!(v)
    }
}

pub fn mean_time(t: MeanTime) -> Value {
    match t {
        MeanTime::Finite(v) => json!(v),
        MeanTime::Divergent => Value::String("inf".into()),
    }
}

/// Every closed form that applies at `(lambda, p, beta, eta)`. Connection
/// times are listed for the interference-limited regime regardless of `eta`;
/// the opportunistic bound is `null` for `beta <= 1`.
pub fn closed_forms(lambda: f64, p: f64, beta: f64, eta: f64) -> Result<Value, AnalyticsError> {
    let opportunistic = if beta > 1.0 { mean_time(analytics::opportunistic_time_lb(p, beta)?) } else { Value::Null };
    Ok(json!({
        "lambda": lambda,
        "p": p,
        "beta": beta,
        "eta": number(eta),
        "expected_out_degree": analytics::expected_out_degree(lambda, p, beta, eta)?,
        "expected_in_degree": analytics::expected_in_degree(lambda, p, beta, eta)?,
        "isolation_probability_lb": analytics::isolation_probability_lb(lambda, p, beta, eta)?,
        "nu": analytics::nu(beta)?,
        "nn_cutoff_p": analytics::nn_cutoff(beta)?,
        "expected_nn_time": mean_time(analytics::expected_nn_time(p, beta)?),
        "opportunistic_time_lb": opportunistic,
        "critical_radius": critical_radius(lambda),
        "supercritical": eta > critical_radius(lambda),
    }))
}
