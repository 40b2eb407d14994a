use crate::EngineError;

/// Tuned parameters for a segmentation session.
///
/// `threshold_prob` is the threshold frequency f_T = K / N where N is the
/// corpus letter count. The remaining defaults reproduce the reference
/// behavior and should rarely need changing.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Validity cutoff f_T for the frequency test.
    pub threshold_prob: f32,
    /// Constant subtracted from in_count in the frequency test; delays
    /// validity until roughly five observations.
    pub bias: f32,
    /// Ring capacity of the event window.
    pub window_capacity: usize,
    /// Minimum logical width before any detachment is considered.
    pub min_columns: usize,
    /// Average-word-score gate that must pass before detaching words.
    pub gate_score: f32,
    /// Letter injected by flush to trigger final detachment.
    pub flush_sentinel: char,
    /// Disable to select boundaries from first-level scores only.
    pub second_level: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            threshold_prob: (0.76 / 1149.0f64) as f32,
            bias: 4.567,
            window_capacity: 32,
            min_columns: 16,
            gate_score: 0.50,
            flush_sentinel: 'x',
            second_level: true,
        }
    }
}

impl EngineConfig {
    /// Config with a given threshold frequency and default everything else.
    pub fn with_threshold(threshold_prob: f32) -> Self {
        EngineConfig {
            threshold_prob,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.threshold_prob > 0.0 && self.threshold_prob < 1.0) {
            return Err(EngineError::InvalidConfig(
                "threshold_prob must be in (0, 1)".into(),
            ));
        }
        if self.window_capacity < 2 || self.min_columns > self.window_capacity / 2 {
            return Err(EngineError::InvalidConfig(
                "min_columns must not exceed window_capacity / 2".into(),
            ));
        }
        if !(self.gate_score > 0.0 && self.gate_score < 1.0) {
            return Err(EngineError::InvalidConfig(
                "gate_score must be in (0, 1)".into(),
            ));
        }
        if !self.flush_sentinel.is_ascii_lowercase() {
            return Err(EngineError::InvalidConfig(
                "flush_sentinel must be a letter a-z".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert!(EngineConfig::default().validate().is_ok());
    }

    #[test]
    fn bad_configs_rejected() {
        let mut c = EngineConfig::default();
        c.threshold_prob = 0.0;
        assert!(c.validate().is_err());

        let mut c = EngineConfig::default();
        c.min_columns = 17;
        assert!(c.validate().is_err());

        let mut c = EngineConfig::default();
        c.gate_score = 1.0;
        assert!(c.validate().is_err());

        let mut c = EngineConfig::default();
        c.flush_sentinel = '7';
        assert!(c.validate().is_err());
    }
}
