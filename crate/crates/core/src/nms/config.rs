use crate::error::{Error, Result};

/// Maps an overlap to a suppression weight in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pruning {
    /// `1` when the overlap exceeds the NMS threshold, else `0`.
    HardThreshold,
    /// `p(o) = o`.
    Linear,
    /// `p(o) = 1 - exp(-o^2 / tau)`.
    Exponential { tau: f64 },
    /// `p(o) = sigmoid((o - nt) / tau)`.
    Sigmoidal { tau: f64 },
}

impl Pruning {
    pub const DEFAULT_EXPONENTIAL_TAU: f64 = 0.5;
    pub const DEFAULT_SIGMOIDAL_TAU: f64 = 0.1;

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, Pruning::HardThreshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsConfig {
    /// NMS threshold `N_t` in `(0, 1)`.
    pub nt: f64,
    /// Rescores at or above this value are kept.
    pub valid_threshold: f64,
    /// Maximum group size; `None` is unbounded.
    pub max_group_size: Option<usize>,
    pub pruning: Pruning,
}

impl Default for NmsConfig {
    fn default() -> Self {
        Self {
            nt: 0.4,
            valid_threshold: 0.3,
            max_group_size: Some(100),
            pruning: Pruning::Linear,
        }
    }
}

impl NmsConfig {
    pub fn with_pruning(mut self, pruning: Pruning) -> Self {
        self.pruning = pruning;
        self
    }

    pub fn unbounded(mut self) -> Self {
        self.max_group_size = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nt > 0.0 && self.nt < 1.0) {
            return Err(Error::InvalidConfig(format!("nt must lie in (0, 1), got {}", self.nt)));
        }
        if !(0.0..=1.0).contains(&self.valid_threshold) {
            return Err(Error::InvalidConfig(format!(
                "valid threshold must lie in [0, 1], got {}",
                self.valid_threshold
            )));
        }
        if self.max_group_size == Some(0) {
            return Err(Error::InvalidConfig("max group size must be at least 1".into()));
        }
        match self.pruning {
            Pruning::Exponential { tau } | Pruning::Sigmoidal { tau } if !(tau > 0.0 && tau.is_finite()) => {
                Err(Error::InvalidConfig(format!("temperature must be positive, got {tau}")))
            }
            _ => Ok(()),
        }
    }

    /// Pruning weight for overlap `o`.
    pub fn prune(&self, o: f64) -> f64 {
        prune(o, self)
    }
}

/// Clamps `x` into `[0, 1]`.
#[inline]
pub fn clip01(x: f64) -> f64 {
    if x > 1.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        x
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn prune(o: f64, cfg: &NmsConfig) -> f64 {
    match cfg.pruning {
        Pruning::HardThreshold => {
            if o > cfg.nt {
                1.0
            } else {
                0.0
            }
        }
        Pruning::Linear => o,
        Pruning::Exponential { tau } => 1.0 - (-o * o / tau).exp(),
        Pruning::Sigmoidal { tau } => sigmoid((o - cfg.nt) / tau),
    }
}

/// `dp/do` for the soft pruning kinds.
pub fn prune_derivative(o: f64, cfg: &NmsConfig) -> Result<f64> {
    Ok(match cfg.pruning {
        Pruning::HardThreshold => return Err(Error::NonDifferentiablePruning),
        Pruning::Linear => 1.0,
        Pruning::Exponential { tau } => 2.0 * o / tau * (-o * o / tau).exp(),
        Pruning::Sigmoidal { tau } => {
            let s = sigmoid((o - cfg.nt) / tau);
            s * (1.0 - s) / tau
        }
    })
}
