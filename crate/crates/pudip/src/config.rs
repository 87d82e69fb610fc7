use phz_core::WeightBounds;

use crate::error::{PudipError, Result};

/// Scalar removed from the generator output to fix the unwrapping constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffsetMode {
    /// Subtract the global minimum, making the output nonnegative.
    MinSubtract,
    /// Subtract the mean of the top-left `height x width` window.
    CornerMeanSubtract { height: usize, width: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    /// Channels of the fixed random input.
    pub input_channels: usize,
    /// Number of down/up levels.
    pub stages: usize,
    pub body_channels: usize,
    pub skip_channels: usize,
    pub offset_mode: OffsetMode,
}

impl GeneratorConfig {
    /// 128 channels and 5 levels, for 256x256 frames.
    pub fn paper() -> Self {
        Self {
            input_channels: 32,
            stages: 5,
            body_channels: 128,
            skip_channels: 4,
            offset_mode: OffsetMode::MinSubtract,
        }
    }

    /// 32 channels and 3 levels, for 64x64 frames.
    pub fn desk() -> Self {
        Self {
            stages: 3,
            body_channels: 32,
            ..Self::paper()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_channels == 0 || self.body_channels == 0 || self.skip_channels == 0 {
            return Err(PudipError::Config("channel counts must be positive".into()));
        }
        if self.stages == 0 || self.stages > 12 {
            return Err(PudipError::Config(format!(
                "stages must be in 1..=12, got {}",
                self.stages
            )));
        }
        if let OffsetMode::CornerMeanSubtract { height, width } = self.offset_mode {
            if height == 0 || width == 0 {
                return Err(PudipError::Config("corner window must be non-empty".into()));
            }
        }
        Ok(())
    }
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::paper()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub lr: f64,
    pub weight_bounds: WeightBounds,
    /// Weights are recomputed every `refresh_every` iterations, starting at 0.
    pub refresh_every: usize,
    /// Smoothing inside the per-pixel norm, `sqrt(|r|² + delta)`.
    pub delta: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
}

impl TrainConfig {
    /// 1000 iterations, bounds `[0.1, 8]`, refresh every 100.
    pub fn paper() -> Self {
        Self {
            iterations: 1000,
            lr: 0.01,
            weight_bounds: WeightBounds::new(0.1, 8.0).expect("valid bounds"),
            refresh_every: 100,
            delta: 1e-18,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
        }
    }

    /// 600 iterations, bounds `[0.1, 10]`.
    pub fn desk() -> Self {
        Self {
            iterations: 600,
            weight_bounds: WeightBounds::new(0.1, 10.0).expect("valid bounds"),
            ..Self::paper()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(PudipError::Config(m));
        if self.iterations == 0 {
            return err("iterations must be positive".into());
        }
        if self.refresh_every == 0 || self.refresh_every > self.iterations {
            return err(format!(
                "refresh_every must be in 1..={}, got {}",
                self.iterations, self.refresh_every
            ));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return err(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return err(format!("delta must be positive, got {}", self.delta));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return err(format!("{name} must be in (0, 1), got {b}"));
            }
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::paper()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_validate() {
        GeneratorConfig::paper().validate().unwrap();
        GeneratorConfig::desk().validate().unwrap();
        TrainConfig::paper().validate().unwrap();
        TrainConfig::desk().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut t = TrainConfig::desk();
        t.refresh_every = t.iterations + 1;
        assert!(t.validate().is_err());
        let mut t = TrainConfig::desk();
        t.beta2 = 1.0;
        assert!(t.validate().is_err());
        let mut g = GeneratorConfig::desk();
        g.stages = 0;
        assert!(g.validate().is_err());
        g = GeneratorConfig::desk();
        g.offset_mode = OffsetMode::CornerMeanSubtract { height: 0, width: 3 };
        assert!(g.validate().is_err());
    }
}
