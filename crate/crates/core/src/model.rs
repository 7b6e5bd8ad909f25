//! Domain types and the closed-form part of the model: tile, wave and stage
//! counts, per-tile costs and the no-overlap baseline.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::{Nanos, Rational};

fn positive(name: &'static str, v: u64) -> Result<u64, ModelError> {
    if v == 0 {
        Err(ModelError::ZeroDimension { name })
    } else {
        Ok(v)
    }
}

/// GeMM dimensions in elements: `A` is `m x k`, `B` is `k x n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSize {
    m: u64,
    n: u64,
    k: u64,
}

impl ProblemSize {
    pub fn new(m: u64, n: u64, k: u64) -> Result<Self, ModelError> {
        Ok(Self {
            m: positive("m", m)?,
            n: positive("n", n)?,
            k: positive("k", k)?,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }
}

/// Tile shape `(t_m, t_n, t_k)` in elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TilingConfig {
    t_m: u64,
    t_n: u64,
    t_k: u64,
}

impl TilingConfig {
    pub fn new(t_m: u64, t_n: u64, t_k: u64) -> Result<Self, ModelError> {
        Ok(Self {
            t_m: positive("t_m", t_m)?,
            t_n: positive("t_n", t_n)?,
            t_k: positive("t_k", t_k)?,
        })
    }

    pub fn t_m(&self) -> u64 {
        self.t_m
    }

    pub fn t_n(&self) -> u64 {
        self.t_n
    }

    pub fn t_k(&self) -> u64 {
        self.t_k
    }

    /// True when every tile dimension divides the matching problem dimension.
    /// Outside that regime every partial tile is costed as a full one.
    pub fn divides(&self, p: &ProblemSize) -> bool {
        p.m.is_multiple_of(self.t_m) && p.n.is_multiple_of(self.t_n) && p.k.is_multiple_of(self.t_k)
    }
}

impl std::fmt::Display for TilingConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.t_m, self.t_n, self.t_k)
    }
}

/// Which instant closes a wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum WaveTimeMode {
    /// Start of the last MATH stage plus the epilogue.
    #[default]
    #[serde(rename = "equation")]
    EquationAsWritten,
    /// End of the last MATH stage plus the epilogue.
    #[serde(rename = "prose")]
    ProseWithFinalMath,
}

/// Calibrated machine constants. Throughputs are exact elements per
/// nanosecond; every other time is integer nanoseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineConfig {
    pub num_sms: u64,
    /// In-flight stages (tile pairs) the shared-memory ring can hold.
    pub buffer_depth: u64,
    pub compute_throughput: Rational,
    pub load_throughput: Rational,
    pub compute_startup_latency: Nanos,
    pub load_startup_latency: Nanos,
    pub t_init: Nanos,
    pub t_epilogue: Nanos,
    pub wave_time_mode: WaveTimeMode,
}

impl MachineConfig {
    pub const MIN_BUFFER_DEPTH: u64 = 3;

    /// Unit throughputs, zero latencies and overheads, 84 SMs, depth 3.
    pub fn identity() -> Self {
        Self {
            num_sms: 84,
            buffer_depth: Self::MIN_BUFFER_DEPTH,
            compute_throughput: Ratio::from_integer(1),
            load_throughput: Ratio::from_integer(1),
            compute_startup_latency: 0,
            load_startup_latency: 0,
            t_init: 0,
            t_epilogue: 0,
            wave_time_mode: WaveTimeMode::EquationAsWritten,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.num_sms == 0 {
            return Err(ModelError::NoSms);
        }
        if self.buffer_depth < Self::MIN_BUFFER_DEPTH {
            return Err(ModelError::BufferTooShallow(self.buffer_depth));
        }
        if self.compute_throughput <= Rational::zero() {
            return Err(ModelError::NonPositiveThroughput("compute_throughput"));
        }
        if self.load_throughput <= Rational::zero() {
            return Err(ModelError::NonPositiveThroughput("load_throughput"));
        }
        Ok(())
    }
}

/// Per-stage costs of one MATH step and the two DMA loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileTimes<T> {
    pub t_math: T,
    pub t_load_a: T,
    pub t_load_b: T,
}

impl<T: crate::num::Time> TileTimes<T> {
    pub fn new(t_math: T, t_load_a: T, t_load_b: T) -> Result<Self, ModelError> {
        let tt = Self {
            t_math,
            t_load_a,
            t_load_b,
        };
        tt.check()?;
        Ok(tt)
    }

    pub(crate) fn check(&self) -> Result<(), ModelError> {
        let zero = T::zero();
        if self.t_math > zero && self.t_load_a > zero && self.t_load_b > zero {
            Ok(())
        } else {
            Err(ModelError::ZeroTileTime)
        }
    }

    /// Serialized cost of one stage with no overlap.
    pub fn stage_sum(&self) -> T {
        self.t_load_a + self.t_load_b + self.t_math
    }

    /// `t_math >= t_load_a + t_load_b`: the MATH warp paces the pipeline.
    pub fn is_compute_bound(&self) -> bool {
        self.t_math >= self.t_load_a + self.t_load_b
    }
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

pub fn output_tiles(p: &ProblemSize, t: &TilingConfig) -> u64 {
    ceil_div(p.m, t.t_m) * ceil_div(p.n, t.t_n)
}

/// Rounds needed to spread the output tiles over the SMs.
pub fn waves(p: &ProblemSize, t: &TilingConfig, mc: &MachineConfig) -> u64 {
    waves_for_tiles(output_tiles(p, t), mc.num_sms)
}

pub fn waves_for_tiles(tiles: u64, num_sms: u64) -> u64 {
    ceil_div(tiles, num_sms)
}

/// K-dimension iterations per output tile.
pub fn stages(p: &ProblemSize, t: &TilingConfig) -> u64 {
    ceil_div(p.k, t.t_k)
}

/// `ceil(elements / throughput) + latency`, with the quotient taken exactly.
fn cost(elements: u64, throughput: &Rational, latency: Nanos) -> Nanos {
    let q = (Rational::from_integer(elements as i128) / throughput).ceil();
    q.to_integer().to_u64().expect("tile cost exceeds u64 nanoseconds") + latency
}

/// Per-tile costs, linear in element count plus startup latency.
pub fn tile_times(t: &TilingConfig, mc: &MachineConfig) -> TileTimes<Nanos> {
    TileTimes {
        t_math: cost(
            t.t_m * t.t_n * t.t_k,
            &mc.compute_throughput,
            mc.compute_startup_latency,
        ),
        t_load_a: cost(t.t_m * t.t_k, &mc.load_throughput, mc.load_startup_latency),
        t_load_b: cost(t.t_k * t.t_n, &mc.load_throughput, mc.load_startup_latency),
    }
}

/// Overall time of a kernel that loads and multiplies each stage without any
/// overlap. Upper bound for the pipelined prediction.
pub fn synchronous_overall_time(p: &ProblemSize, t: &TilingConfig, mc: &MachineConfig) -> Nanos {
    let stage = tile_times(t, mc).stage_sum();
    synchronous_time(stage, stages(p, t), waves(p, t, mc), mc.t_init)
}

pub(crate) fn synchronous_time(stage: Nanos, stages: u64, waves: u64, t_init: Nanos) -> Nanos {
    stage * stages * waves + t_init
}
