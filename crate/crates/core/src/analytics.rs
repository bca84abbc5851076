//! Closed-form degree and connection-time expressions, plus a numeric
//! oracle for the guard-disc area `nu(beta)`.

use core::f64::consts::PI;

use thiserror::Error;

use crate::quadrature::integrate_pieces;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("p must lie in (0, 1) (got {0})")]
    Probability(f64),
    #[error("lambda must be finite and > 0 (got {0})")]
    Lambda(f64),
    #[error("beta must be > 0 (got {0})")]
    Beta(f64),
    #[error("eta must be > 0 or +inf (got {0})")]
    Eta(f64),
    #[error("the opportunistic lower bound needs beta > 1 (got {0})")]
    OpportunisticDomain(f64),
}

/// Mean of a non-negative random time: finite, or infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanTime {
    Finite(f64),
    Divergent,
}

impl MeanTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            MeanTime::Finite(v) => Some(v),
            MeanTime::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, MeanTime::Divergent)
    }
}

fn check_p(p: f64) -> Result<(), AnalyticsError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(AnalyticsError::Probability(p))
    }
}

fn check_degree_args(lambda: f64, p: f64, beta: f64, eta: f64) -> Result<(), AnalyticsError> {
    check_p(p)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(AnalyticsError::Lambda(lambda));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(AnalyticsError::Beta(beta));
    }
    if !(eta > 0.0) {
        return Err(AnalyticsError::Eta(eta));
    }
    Ok(())
}

/// `(1 - e^{-x}) / x`, continuous at 0.
fn saturation(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        -libm::expm1(-x) / x
    }
}

/// `beta^{-2} (1 - exp(-pi beta^2 lambda p eta^2))` written so that the
/// `beta -> 0` and `eta -> inf` limits fall out: `lambda p pi eta^2 * saturation(..)`.
fn guard_term(lambda: f64, p: f64, beta: f64, eta: f64) -> f64 {
    if eta.is_infinite() {
        return 1.0 / (beta * beta);
    }
    let cover = lambda * p * PI * eta * eta;
    cover * saturation(cover * beta * beta)
}

/// Mean out-degree of a transmitting node,
/// `((1-p)/p) beta^{-2} (1 - exp(-lambda p pi beta^2 eta^2))`.
///
/// `eta = inf` gives the interference-limited value `((1-p)/p) beta^{-2}`;
/// `beta = 0` gives the noise-limited value `lambda (1-p) pi eta^2`.
pub fn expected_out_degree(lambda: f64, p: f64, beta: f64, eta: f64) -> Result<f64, AnalyticsError> {
    check_degree_args(lambda, p, beta, eta)?;
    Ok((1.0 - p) / p * guard_term(lambda, p, beta, eta))
}

/// Mean in-degree of a receiving node, `beta^{-2} (1 - exp(-pi beta^2 lambda p eta^2))`.
pub fn expected_in_degree(lambda: f64, p: f64, beta: f64, eta: f64) -> Result<f64, AnalyticsError> {
    check_degree_args(lambda, p, beta, eta)?;
    Ok(guard_term(lambda, p, beta, eta))
}

/// Jensen lower bound on the probability that a transmitter has no out-edge,
/// `exp(-E[N_t])`.
pub fn isolation_probability_lb(lambda: f64, p: f64, beta: f64, eta: f64) -> Result<f64, AnalyticsError> {
    Ok(libm::exp(-expected_out_degree(lambda, p, beta, eta)?))
}

/// Area of `B(z, beta |z|)` outside `B(o, |z|)`, in units of `pi |z|^2`.
pub fn nu(beta: f64) -> Result<f64, AnalyticsError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(AnalyticsError::Beta(beta));
    }
    if beta >= 2.0 {
        Ok(beta * beta - 1.0)
    } else {
        Ok(nu_lens_branch(beta))
    }
}

/// The `beta < 2` branch,
/// `beta^2 - (beta^2 acos(beta/2) + acos(1 - beta^2/2) - (beta/2) sqrt(4 - beta^2)) / pi`.
pub fn nu_lens_branch(beta: f64) -> f64 {
    let b2 = beta * beta;
    let lens = b2 * libm::acos(beta / 2.0) + libm::acos(1.0 - b2 / 2.0) - beta / 2.0 * libm::sqrt((4.0 - b2).max(0.0));
    b2 - lens / PI
}

/// Numeric `nu(beta)`: integrates the vertical chord of `B((1,0), beta)` that
/// lies outside the unit disc, then divides by `pi`.
pub fn nu_numeric(beta: f64) -> f64 {
    let outer = |x: f64| libm::sqrt((beta * beta - (x - 1.0) * (x - 1.0)).max(0.0));
    let inner = |x: f64| libm::sqrt((1.0 - x * x).max(0.0));
    let chord = |x: f64| 2.0 * (outer(x) - inner(x)).max(0.0);

    let (lo, hi) = (1.0 - beta, 1.0 + beta);
    // kinks: disc ends, unit-circle ends, circle crossing
    let mut pts = [lo, -1.0, 1.0 - beta * beta / 2.0, 1.0, hi].map(|b| b.clamp(lo, hi));
    pts.sort_by(f64::total_cmp);
    integrate_pieces(chord, &pts, 1e-12).value / PI
}

/// Largest transmit probability with finite mean nearest-neighbour time, `1 / (1 + nu)`.
pub fn nn_cutoff(beta: f64) -> Result<f64, AnalyticsError> {
    Ok(1.0 / (1.0 + nu(beta)?))
}

/// Mean slots until the origin reaches its nearest neighbour with no range
/// limit, `(p(1-p) - p^2 nu(beta))^{-1}` for `p < 1/(1 + nu)`. Independent
/// of the density.
pub fn expected_nn_time(p: f64, beta: f64) -> Result<MeanTime, AnalyticsError> {
    check_p(p)?;
    let nu = nu(beta)?;
    if p < 1.0 / (1.0 + nu) {
        Ok(MeanTime::Finite(1.0 / (p * (1.0 - p) - p * p * nu)))
    } else {
        Ok(MeanTime::Divergent)
    }
}

/// Lower bound on the mean opportunistic connection time (`beta > 1`).
///
/// For `1 < beta < 2`: `(beta-1)^2 (2 + p + (beta-1)^2) / (p (1 - p^2))`.
/// For `beta >= 2`: `(p - p^2 (beta-1)^2)^{-1}` when `p < (beta-1)^{-2}`, else divergent.
pub fn opportunistic_time_lb(p: f64, beta: f64) -> Result<MeanTime, AnalyticsError> {
    check_p(p)?;
    if !(beta.is_finite() && beta > 1.0) {
        return Err(AnalyticsError::OpportunisticDomain(beta));
    }
    let g = (beta - 1.0) * (beta - 1.0);
    if beta < 2.0 {
        Ok(MeanTime::Finite(g * (2.0 + p + g) / (p * (1.0 - p * p))))
    } else if p < 1.0 / g {
        Ok(MeanTime::Finite(1.0 / (p - p * p * g)))
    } else {
        Ok(MeanTime::Divergent)
    }
}
