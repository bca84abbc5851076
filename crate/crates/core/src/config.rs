use thiserror::Error;

/// Edge handling for the square window `[-L, L]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Plain Euclidean distance inside the window. Statistics that would be
    /// biased by the edge are restricted to interior nodes.
    #[default]
    Window,
    /// The window is wrapped into a flat torus (minimum-image distance).
    Torus,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Window => "window",
            Boundary::Torus => "torus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("lambda must be finite and > 0 (got {0})")]
    Lambda(f64),
    #[error("p must lie in (0, 1) (got {0})")]
    TransmitProbability(f64),
    #[error("beta must be finite and > 0 (got {0})")]
    Beta(f64),
    #[error("eta must be > 0 or +inf (got {0})")]
    Eta(f64),
    #[error("window_half must be finite and > 0 (got {0})")]
    WindowHalf(f64),
    #[error("window_half = {window_half} is smaller than 5 * eta = {min} in window mode")]
    WindowTooSmall { window_half: f64, min: f64 },
    #[error("max_slots must be >= 1")]
    MaxSlots,
}

/// Every model parameter of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Node density (nodes per unit area).
    pub lambda: f64,
    /// ALOHA transmit probability.
    pub p: f64,
    /// Interference guard factor.
    pub beta: f64,
    /// Maximum link distance; `f64::INFINITY` selects the interference-limited regime.
    pub eta: f64,
    /// Half side `L` of the window `[-L, L]^2`.
    pub window_half: f64,
    pub boundary: Boundary,
    pub seed: u64,
    /// Propagation / connection-time horizon in slots.
    pub max_slots: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            p: 0.2,
            beta: 1.2,
            eta: 1.5,
            window_half: 50.0,
            boundary: Boundary::Window,
            seed: 0,
            max_slots: 10_000,
        }
    }
}

impl NetworkConfig {
    pub fn interference_limited(&self) -> bool {
        self.eta.is_infinite()
    }

    /// Distance from the window edge beyond which window-mode statistics are
    /// collected.
    pub fn guard_distance(&self) -> f64 {
        if self.eta.is_finite() {
            self.eta.max(self.beta * self.eta)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(ConfigError::Lambda(self.lambda));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(ConfigError::TransmitProbability(self.p));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(ConfigError::Beta(self.beta));
        }
        if !(self.eta > 0.0) || self.eta == f64::NEG_INFINITY {
            return Err(ConfigError::Eta(self.eta));
        }
        if !(self.window_half.is_finite() && self.window_half > 0.0) {
            return Err(ConfigError::WindowHalf(self.window_half));
        }
        if self.boundary == Boundary::Window && self.eta.is_finite() && self.window_half < 5.0 * self.eta {
            return Err(ConfigError::WindowTooSmall { window_half: self.window_half, min: 5.0 * self.eta });
        }
        if self.max_slots == 0 {
            return Err(ConfigError::MaxSlots);
        }
        Ok(())
    }
}
