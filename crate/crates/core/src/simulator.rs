//! Stage-order evaluation of the producer/consumer event recurrences.
//!
//! For stage `i` (1-based) with buffer depth `d`:
//!
//! ```text
//! s_a(i) = max(s_b(i-1) + t_load_b, s_m(i-d) + t_math)     s_a(1) = 0
//! s_b(i) = max(s_a(i) + t_load_a,   s_m(i-d) + t_math)
//! s_m(i) = max(s_m(i-1) + t_math,   s_b(i) + t_load_b)
//! ```
//!
//! A term whose history index is `<= 0` is dropped from its `max`.

use serde::Serialize;

use crate::error::ModelError;
use crate::model::{self, MachineConfig, ProblemSize, TileTimes, TilingConfig, WaveTimeMode};
use crate::num::{max_of, Time};
use crate::Nanos;

/// Start times of the A load, B load and multiplication of every stage.
/// Vectors are 0-based: element `i` belongs to stage `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventTimeline<T> {
    pub s_a: Vec<T>,
    pub s_b: Vec<T>,
    pub s_m: Vec<T>,
}

impl<T: Time> EventTimeline<T> {
    pub fn stages(&self) -> usize {
        self.s_m.len()
    }

    /// Start of the final multiplication.
    pub fn last_math_start(&self) -> T {
        *self.s_m.last().expect("timeline has at least one stage")
    }
}

/// Evaluates the recurrences for `stages` stages of one wave.
pub fn simulate_wave<T: Time>(
    stages: usize,
    tt: &TileTimes<T>,
    depth: usize,
) -> Result<EventTimeline<T>, ModelError> {
    if stages == 0 {
        return Err(ModelError::NoStages);
    }
    if (depth as u64) < MachineConfig::MIN_BUFFER_DEPTH {
        return Err(ModelError::BufferTooShallow(depth as u64));
    }
    tt.check()?;

    let mut s_a: Vec<T> = Vec::with_capacity(stages);
    let mut s_b: Vec<T> = Vec::with_capacity(stages);
    let mut s_m: Vec<T> = Vec::with_capacity(stages);

    for i in 0..stages {
        // slot freed when the multiplication `depth` stages back completes
        let release = (i >= depth).then(|| s_m[i - depth] + tt.t_math);

        let a = if i == 0 {
            T::zero()
        } else {
            let chain = s_b[i - 1] + tt.t_load_b;
            release.map_or(chain, |r| max_of(chain, r))
        };
        let after_a = a + tt.t_load_a;
        let b = release.map_or(after_a, |r| max_of(after_a, r));
        let ready = b + tt.t_load_b;
        let m = if i == 0 {
            ready
        } else {
            max_of(s_m[i - 1] + tt.t_math, ready)
        };

        s_a.push(a);
        s_b.push(b);
        s_m.push(m);
    }

    Ok(EventTimeline { s_a, s_b, s_m })
}

/// Duration of one wave under the chosen closing convention.
pub fn wave_time<T: Time>(
    tl: &EventTimeline<T>,
    tt: &TileTimes<T>,
    t_epilogue: T,
    mode: WaveTimeMode,
) -> T {
    let last = tl.last_math_start();
    match mode {
        WaveTimeMode::EquationAsWritten => last + t_epilogue,
        WaveTimeMode::ProseWithFinalMath => last + tt.t_math + t_epilogue,
    }
}

/// Idle time of the MATH warp before each stage. Stage 1 waits for the whole
/// prologue; later stages wait for whatever their inputs add past the end of
/// the previous multiplication.
pub fn wait_times<T: Time>(tl: &EventTimeline<T>, tt: &TileTimes<T>) -> Vec<T> {
    let mut wait = Vec::with_capacity(tl.stages());
    wait.push(tl.s_b[0] + tt.t_load_b);
    for i in 1..tl.stages() {
        wait.push(tl.s_m[i] - (tl.s_m[i - 1] + tt.t_math));
    }
    wait
}

/// Full prediction for one problem, tiling and machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationResult {
    pub tile_times: TileTimes<Nanos>,
    pub timeline: EventTimeline<Nanos>,
    pub stage_count: u64,
    pub wave_count: u64,
    pub wave_time: Nanos,
    pub t_epilogue: Nanos,
    pub wait: Vec<Nanos>,
    /// Sum of `wait` over the stages of a single wave.
    pub wave_wait: Nanos,
    /// `wave_count * wave_wait`, the MATH-idle objective.
    pub total_wait: Nanos,
    pub overall_time: Nanos,
}

pub fn simulate(
    p: &ProblemSize,
    t: &TilingConfig,
    mc: &MachineConfig,
) -> Result<SimulationResult, ModelError> {
    mc.validate()?;
    let stage_count = model::stages(p, t);
    let wave_count = model::waves(p, t, mc);
    let tt = model::tile_times(t, mc);
    let timeline = simulate_wave(stage_count as usize, &tt, mc.buffer_depth as usize)?;
    let wave_time = wave_time(&timeline, &tt, mc.t_epilogue, mc.wave_time_mode);
    let wait = wait_times(&timeline, &tt);
    let wave_wait: Nanos = wait.iter().sum();
    Ok(SimulationResult {
        tile_times: tt,
        timeline,
        stage_count,
        wave_count,
        wave_time,
        t_epilogue: mc.t_epilogue,
        wait,
        wave_wait,
        total_wait: wave_count * wave_wait,
        overall_time: overall_time(wave_time, wave_count, mc.t_init),
    })
}

pub(crate) fn overall_time(wave_time: Nanos, waves: u64, t_init: Nanos) -> Nanos {
    wave_time * waves + t_init
}
