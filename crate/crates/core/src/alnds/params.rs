//! Search parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("scores must satisfy sigma1 > sigma2 > sigma3 > 0, got {0}, {1}, {2}")]
    ScoreOrder(f64, f64, f64),
    #[error("eta must lie in [0, 1], got {0}")]
    EtaRange(f64),
    #[error("cooling factor must lie in (0, 1), got {0}")]
    CoolingRange(f64),
    #[error("acceptance probability must lie in (0, 1), got {0}")]
    AcceptProbRange(f64),
    #[error("worse fraction must be positive, got {0}")]
    WorseFraction(f64),
    #[error("destroy fraction range must satisfy 0 < low <= high <= 1, got [{0}, {1}]")]
    DestroyRange(f64, f64),
    #[error("segment length must be positive")]
    SegmentLength,
    #[error("weights must be a non-empty list of positive values")]
    Weights,
}

/// Knobs of the adaptive search. Serializable in the same structured-text
/// format as instances, for experiment manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    pub iterations: usize,
    pub segment_length: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    /// Reaction factor blending old weights with segment performance.
    pub eta: f64,
    pub cooling_theta: f64,
    /// The start temperature accepts a solution `tstart_worse_fraction` worse
    /// than the initial one with probability `tstart_accept_prob`.
    pub tstart_worse_fraction: f64,
    pub tstart_accept_prob: f64,
    pub destroy_fraction_range: [f64; 2],
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            iterations: 25_000,
            segment_length: 100,
            sigma1: 33.0,
            sigma2: 13.0,
            sigma3: 9.0,
            eta: 0.1,
            cooling_theta: 0.99975,
            tstart_worse_fraction: 0.2,
            tstart_accept_prob: 0.3,
            destroy_fraction_range: [0.1, 0.4],
            seed: 0,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.sigma1 > self.sigma2 && self.sigma2 > self.sigma3 && self.sigma3 > 0.0) {
            return Err(ParamError::ScoreOrder(self.sigma1, self.sigma2, self.sigma3));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(ParamError::EtaRange(self.eta));
        }
        if !(self.cooling_theta > 0.0 && self.cooling_theta < 1.0) {
            return Err(ParamError::CoolingRange(self.cooling_theta));
        }
        if !(self.tstart_accept_prob > 0.0 && self.tstart_accept_prob < 1.0) {
            return Err(ParamError::AcceptProbRange(self.tstart_accept_prob));
        }
        if !(self.tstart_worse_fraction > 0.0) {
            return Err(ParamError::WorseFraction(self.tstart_worse_fraction));
        }
        let [lo, hi] = self.destroy_fraction_range;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(ParamError::DestroyRange(lo, hi));
        }
        if self.segment_length == 0 {
            return Err(ParamError::SegmentLength);
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert_eq!(SearchParams::default().validate(), Ok(()));
    }

    #[test]
    fn bad_score_order_is_rejected() {
        let mut p = SearchParams::default();
        p.sigma2 = p.sigma1 + 1.0;
        assert!(matches!(p.validate(), Err(ParamError::ScoreOrder(..))));
    }

    #[test]
    fn params_round_trip_as_json() {
        let p = SearchParams::default().with_seed(7);
        let text = serde_json::to_string(&p).unwrap();
        let back: SearchParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
