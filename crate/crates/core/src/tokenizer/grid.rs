//! Logarithmic seconds quantizer and velocity buckets.

use super::TokenizeError;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Parameters of the log-spaced seconds grid used for delta onsets and
/// durations.
///
/// `token = round((N - 1) * ln(1 + x / eps) / ln(1 + max / eps))`, clipped to
/// `[0, N - 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct QuantGrid {
    pub bucket_count: u16,
    pub max_value: f64,
    pub epsilon: f64,
}

impl Default for QuantGrid {
    fn default() -> Self {
        Self { bucket_count: 200, max_value: 8.0, epsilon: 0.01 }
    }
}

impl QuantGrid {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), TokenizeError> {
        let ok = (2..=256).contains(&self.bucket_count)
            && self.max_value.is_finite()
            && self.max_value > 0.0
            && self.epsilon.is_finite()
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(TokenizeError::InvalidGrid)
        }
    }

    pub fn top_token(&self) -> u8 {
        (self.bucket_count - 1) as u8
    }

    fn scale(&self) -> f64 {
        libm::log1p(self.max_value / self.epsilon)
    }

    /// Continuous (unrounded) token position of `x` seconds.
    pub fn position(&self, x: f64) -> f64 {
        (self.bucket_count - 1) as f64 * libm::log1p(x / self.epsilon) / self.scale()
    }

    /// Seconds value at continuous token position `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        self.epsilon * libm::expm1(t / (self.bucket_count - 1) as f64 * self.scale())
    }

    pub fn quantize(&self, x: f64) -> Result<u8, TokenizeError> {
        if x.is_nan() || x < 0.0 {
            return Err(TokenizeError::NegativeTime);
        }
        if x >= self.max_value {
            return Ok(self.top_token());
        }
        let t = libm::round(self.position(x));
        Ok(t.clamp(0.0, self.top_token() as f64) as u8)
    }

    pub fn dequantize(&self, token: u8) -> Result<f64, TokenizeError> {
        if token as u16 >= self.bucket_count {
            return Err(TokenizeError::TokenOutOfRange { stream: "time", token, vocab: self.bucket_count });
        }
        if token == self.top_token() {
            return Ok(self.max_value);
        }
        Ok(self.value_at(token as f64))
    }

    /// Width in seconds of the bucket that `token` represents.
    pub fn bucket_width(&self, token: u8) -> f64 {
        let lo = if token == 0 { 0.0 } else { self.value_at(token as f64 - 0.5) };
        let hi = self.value_at(token as f64 + 0.5);
        hi - lo
    }
}

pub fn log_quantize(x: f64, grid: &QuantGrid) -> Result<u8, TokenizeError> {
    grid.quantize(x)
}

pub fn log_dequantize(token: u8, grid: &QuantGrid) -> Result<f64, TokenizeError> {
    grid.dequantize(token)
}

pub const VELOCITY_BUCKETS: u8 = 8;

pub fn quantize_velocity(velocity: u8) -> u8 {
    (velocity.min(127)) / 16
}

/// Bucket center of a velocity token.
pub fn dequantize_velocity(token: u8) -> u8 {
    16 * token.min(VELOCITY_BUCKETS - 1) + 8
}
