//! Exhaustive tiling search over the simulator.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{MachineConfig, ProblemSize, TilingConfig};
use crate::simulator::{simulate, SimulationResult};
use crate::Nanos;

/// Candidate values for each tile dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    candidates_m: BTreeSet<u64>,
    candidates_n: BTreeSet<u64>,
    candidates_k: BTreeSet<u64>,
}

fn candidates(name: &'static str, values: &[u64]) -> Result<BTreeSet<u64>, ModelError> {
    if values.is_empty() {
        return Err(ModelError::EmptySearchSpace(name));
    }
    if values.contains(&0) {
        return Err(ModelError::ZeroCandidate(name));
    }
    Ok(values.iter().copied().collect())
}

impl SearchSpace {
    pub fn new(m: &[u64], n: &[u64], k: &[u64]) -> Result<Self, ModelError> {
        Ok(Self {
            candidates_m: candidates("t_m", m)?,
            candidates_n: candidates("t_n", n)?,
            candidates_k: candidates("t_k", k)?,
        })
    }

    /// Same candidates for all three dimensions.
    pub fn uniform(values: &[u64]) -> Result<Self, ModelError> {
        Self::new(values, values, values)
    }

    pub fn len(&self) -> usize {
        self.candidates_m.len() * self.candidates_n.len() * self.candidates_k.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for SearchSpace {
    /// `{64, 128}` in every dimension.
    fn default() -> Self {
        Self::uniform(&[64, 128]).expect("static candidates are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    /// Predicted kernel time.
    #[serde(rename = "time")]
    MinOverallTime,
    /// Wave count times the per-wave MATH idle time.
    #[serde(rename = "wait")]
    MinTotalWait,
}

impl Objective {
    pub fn evaluate(&self, r: &SimulationResult) -> Nanos {
        match self {
            Objective::MinOverallTime => r.overall_time,
            Objective::MinTotalWait => r.total_wait,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimizationResult {
    pub best: TilingConfig,
    pub objective_value: Nanos,
    pub evaluated: usize,
    /// Every candidate with its objective value, in enumeration order.
    pub per_config: Vec<(TilingConfig, Nanos)>,
}

/// Cross product ordered by `t_m`, then `t_n`, then `t_k`, all ascending.
pub fn enumerate_tilings(space: &SearchSpace) -> Vec<TilingConfig> {
    let mut out = Vec::with_capacity(space.len());
    for &t_m in &space.candidates_m {
        for &t_n in &space.candidates_n {
            for &t_k in &space.candidates_k {
                out.push(TilingConfig::new(t_m, t_n, t_k).expect("candidates are nonzero"));
            }
        }
    }
    out
}

/// Simulates every candidate of `space` and returns the first one with the
/// minimum objective value.
pub fn optimize(
    p: &ProblemSize,
    mc: &MachineConfig,
    space: &SearchSpace,
    obj: Objective,
) -> Result<OptimizationResult, ModelError> {
    optimize_candidates(p, mc, &enumerate_tilings(space), obj)
}

/// [`optimize`] over an explicit candidate list; ties go to the earliest.
pub fn optimize_candidates(
    p: &ProblemSize,
    mc: &MachineConfig,
    candidates: &[TilingConfig],
    obj: Objective,
) -> Result<OptimizationResult, ModelError> {
    let per_config = candidates
        .iter()
        .map(|t| simulate(p, t, mc).map(|r| (*t, obj.evaluate(&r))))
        .collect::<Result<Vec<_>, _>>()?;

    let (best, objective_value) = per_config
        .iter()
        .copied()
        .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
        .ok_or(ModelError::EmptySearchSpace("candidates"))?;

    Ok(OptimizationResult {
        best,
        objective_value,
        evaluated: per_config.len(),
        per_config,
    })
}
