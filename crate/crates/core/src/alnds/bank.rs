//! Adaptive operator pools: roulette selection and segment weight updates.

use super::params::ParamError;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Roulette-wheel index selection: entry `o` wins with probability
/// `w_o / sum(w)`.
pub fn select_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize, ParamError> {
    if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(ParamError::Weights);
    }
    let total: f64 = weights.iter().sum();
    let mut ticket = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        ticket -= w;
        if ticket < 0.0 {
            return Ok(i);
        }
    }
    Ok(weights.len() - 1)
}

/// One weighted entry of a pool.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolEntry<T> {
    pub op: T,
    pub weight: f64,
    /// Score accumulated in the current segment.
    pub score: f64,
    /// Times selected in the current segment.
    pub uses: u64,
    /// Times selected over the whole run.
    pub total_uses: u64,
}

/// A weighted pool of operators with segment-wise adaptation.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPool<T> {
    pub entries: Vec<PoolEntry<T>>,
}

impl<T: Copy + PartialEq> WeightedPool<T> {
    pub fn new(ops: impl IntoIterator<Item = T>) -> Self {
        WeightedPool {
            entries: ops
                .into_iter()
                .map(|op| PoolEntry {
                    op,
                    weight: 1.0,
                    score: 0.0,
                    uses: 0,
                    total_uses: 0,
                })
                .collect(),
        }
    }

    /// Roulette over the subset of entries satisfying `allowed`.
    pub fn select<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        allowed: impl Fn(T) -> bool,
    ) -> Result<T, ParamError> {
        let candidates: Vec<(usize, f64)> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| allowed(e.op))
            .map(|(i, e)| (i, e.weight))
            .collect();
        let weights: Vec<f64> = candidates.iter().map(|&(_, w)| w).collect();
        let pick = select_weighted(&weights, rng)?;
        Ok(self.entries[candidates[pick].0].op)
    }

    pub fn record_use(&mut self, op: T, score: f64) {
        if let Some(e) = self.entries.iter_mut().find(|e| e.op == op) {
            e.uses += 1;
            e.total_uses += 1;
            e.score += score;
        }
    }

    /// End-of-segment update: operators used at least once blend their
    /// weight with score per use; unused operators keep their weight.
    /// Scores and segment counts reset afterwards.
    pub fn update_weights(&mut self, eta: f64) {
        for e in &mut self.entries {
            if e.uses > 0 {
                e.weight = (1.0 - eta) * e.weight + eta * e.score / e.uses as f64;
                // Keep the roulette well-defined even after zero-score segments.
                e.weight = e.weight.max(f64::MIN_POSITIVE);
            }
            e.score = 0.0;
            e.uses = 0;
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.weight).collect()
    }
}

/// Final pool statistics exposed in solve results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorStat {
    pub name: String,
    pub weight: f64,
    pub uses: u64,
}
