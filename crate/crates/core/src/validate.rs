//! Cross-checks the recurrence evaluation against the discrete-event
//! protocol simulation over a grid of problems and tilings. Whole timelines
//! are compared: the overall time alone does not move when the ring depth
//! changes between two and more stages.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::ModelError;
use crate::model::{self, MachineConfig, ProblemSize, TileTimes, TilingConfig};
use crate::optimizer::{enumerate_tilings, SearchSpace};
use crate::oracle::simulate_protocol;
use crate::simulator::{self, EventTimeline};
use crate::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridPoint {
    pub problem: ProblemSize,
    pub tiling: TilingConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub point: GridPoint,
    /// Overall time from the recurrences.
    pub recurrence: Nanos,
    /// Overall time from the reference timeline.
    pub reference: Nanos,
    /// First 1-based stage whose event times differ, if any.
    pub divergent_stage: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Every `(problem, tiling)` with `m, n, k` in `step, 2*step, ..., <= max`,
/// crossed with the tilings of `space`.
pub fn validation_grid(step: u64, max: u64, space: &SearchSpace) -> Vec<GridPoint> {
    assert!(step > 0, "grid step must be positive");
    let dims: Vec<u64> = (1..=max / step).map(|i| i * step).collect();
    let tilings = enumerate_tilings(space);
    let mut grid = Vec::with_capacity(dims.len().pow(3) * tilings.len());
    for &m in &dims {
        for &n in &dims {
            for &k in &dims {
                let problem = ProblemSize::new(m, n, k).expect("grid dims are positive");
                grid.extend(tilings.iter().map(|&tiling| GridPoint { problem, tiling }));
            }
        }
    }
    grid
}

/// `count` distinct points chosen with a seeded generator, in grid order.
/// Returns the whole grid when `count` covers it.
pub fn subsample(grid: &[GridPoint], count: usize, seed: u64) -> Vec<GridPoint> {
    if count >= grid.len() {
        return grid.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, grid.len(), count).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| grid[i]).collect()
}

pub fn cross_validate(grid: &[GridPoint], mc: &MachineConfig) -> Result<ValidationReport, ModelError> {
    cross_validate_against(grid, mc, simulate_protocol)
}

/// Like [`cross_validate`] with a caller-supplied reference timeline.
pub fn cross_validate_against<F>(
    grid: &[GridPoint],
    mc: &MachineConfig,
    reference: F,
) -> Result<ValidationReport, ModelError>
where
    F: Fn(usize, &TileTimes<Nanos>, usize) -> EventTimeline<Nanos>,
{
    mc.validate()?;
    let mut mismatches = Vec::new();
    for point in grid {
        let sim = simulator::simulate(&point.problem, &point.tiling, mc)?;
        let tt = model::tile_times(&point.tiling, mc);
        let s = model::stages(&point.problem, &point.tiling) as usize;
        let tl = reference(s, &tt, mc.buffer_depth as usize);
        let divergent_stage = first_divergence(&sim.timeline, &tl);
        let wave = simulator::wave_time(&tl, &tt, mc.t_epilogue, mc.wave_time_mode);
        let reference = simulator::overall_time(wave, model::waves(&point.problem, &point.tiling, mc), mc.t_init);

        let recurrence = sim.overall_time;
        if recurrence != reference || divergent_stage.is_some() {
            mismatches.push(Mismatch {
                point: *point,
                recurrence,
                reference,
                divergent_stage,
            });
        }
    }
    Ok(ValidationReport {
        checked: grid.len(),
        mismatches,
    })
}

fn first_divergence(a: &EventTimeline<Nanos>, b: &EventTimeline<Nanos>) -> Option<usize> {
    let len = a.stages().max(b.stages());
    (0..len)
        .find(|&i| {
            a.s_a.get(i) != b.s_a.get(i) || a.s_b.get(i) != b.s_b.get(i) || a.s_m.get(i) != b.s_m.get(i)
        })
        .map(|i| i + 1)
}
