//! Machine-constant estimation from microbenchmark measurements.
//!
//! Throughput and startup latency come from two-point fits of
//! `time = elements / throughput + latency`. The fits are generic over
//! [`Scalar`]; with an exact rational type they recover the generating
//! constants exactly.

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::error::ModelError;
use crate::model::{MachineConfig, WaveTimeMode};
use crate::num::Scalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("both samples have the same element count")]
    EqualSizes,
    #[error("both samples have the same duration")]
    EqualTimes,
    #[error("samples imply a non-positive throughput")]
    NonPositiveThroughput,
    #[error("no samples to summarize")]
    Empty,
    #[error("sample durations must be positive")]
    NonPositiveTime,
}

/// Duration of loading one `t_m x t_k` tile.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSample<F> {
    pub t_m: u64,
    pub t_k: u64,
    pub time: F,
}

/// Duration of one `t_m x t_n x t_k` tile multiply.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeSample<F> {
    pub t_m: u64,
    pub t_n: u64,
    pub t_k: u64,
    pub time: F,
}

impl<F> LoadSample<F> {
    pub fn elements(&self) -> u64 {
        self.t_m * self.t_k
    }
}

impl<F> ComputeSample<F> {
    pub fn elements(&self) -> u64 {
        self.t_m * self.t_n * self.t_k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatencyPolicy {
    /// Negative fitted latencies become zero.
    #[default]
    Clamp,
    /// Keep the raw value.
    AllowNegative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<F> {
    /// Elements per nanosecond.
    pub throughput: F,
    /// Nanoseconds.
    pub startup_latency: F,
    /// Set when a negative latency was replaced by zero.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSummary<F> {
    pub mean: F,
    /// Sample standard deviation (divisor `count - 1`); 0 for one sample.
    pub stddev: F,
    pub count: usize,
}

/// Two-point fit shared by the load and compute variants.
pub fn fit_two_point<F: Scalar>(
    e1: u64,
    time1: &F,
    e2: u64,
    time2: &F,
    policy: LatencyPolicy,
) -> Result<LinearFit<F>, FitError> {
    if *time1 <= F::zero() || *time2 <= F::zero() {
        return Err(FitError::NonPositiveTime);
    }
    if e1 == e2 {
        return Err(FitError::EqualSizes);
    }
    if time1 == time2 {
        return Err(FitError::EqualTimes);
    }
    let (x1, x2) = (F::from_count(e1), F::from_count(e2));
    let throughput = (x1.clone() - x2) / (time1.clone() - time2.clone());
    if throughput <= F::zero() {
        return Err(FitError::NonPositiveThroughput);
    }
    let latency = time1.clone() - x1 / throughput.clone();
    let negative = latency < F::zero();
    if negative && policy == LatencyPolicy::Clamp {
        log::warn!("fitted startup latency {latency:?} is negative; clamping to 0");
        return Ok(LinearFit {
            throughput,
            startup_latency: F::zero(),
            clamped: true,
        });
    }
    Ok(LinearFit {
        throughput,
        startup_latency: latency,
        clamped: false,
    })
}

pub fn fit_load<F: Scalar>(s1: &LoadSample<F>, s2: &LoadSample<F>) -> Result<LinearFit<F>, FitError> {
    fit_load_with(s1, s2, LatencyPolicy::Clamp)
}

pub fn fit_load_with<F: Scalar>(
    s1: &LoadSample<F>,
    s2: &LoadSample<F>,
    policy: LatencyPolicy,
) -> Result<LinearFit<F>, FitError> {
    fit_two_point(s1.elements(), &s1.time, s2.elements(), &s2.time, policy)
}

pub fn fit_compute<F: Scalar>(
    s1: &ComputeSample<F>,
    s2: &ComputeSample<F>,
) -> Result<LinearFit<F>, FitError> {
    fit_compute_with(s1, s2, LatencyPolicy::Clamp)
}

pub fn fit_compute_with<F: Scalar>(
    s1: &ComputeSample<F>,
    s2: &ComputeSample<F>,
    policy: LatencyPolicy,
) -> Result<LinearFit<F>, FitError> {
    fit_two_point(s1.elements(), &s1.time, s2.elements(), &s2.time, policy)
}

pub fn summarize<F: Scalar>(samples: &[F]) -> Result<MeasurementSummary<F>, FitError> {
    let count = samples.len();
    if count == 0 {
        return Err(FitError::Empty);
    }
    let n = F::from_count(count as u64);
    let mean = samples.iter().cloned().fold(F::zero(), |acc, x| acc + x) / n;
    let stddev = if count == 1 {
        F::zero()
    } else {
        let ss = samples.iter().fold(F::zero(), |acc, x| {
            let d = x.clone() - mean.clone();
            acc + d.clone() * d
        });
        (ss / F::from_count(count as u64 - 1)).sqrt()
    };
    Ok(MeasurementSummary { mean, stddev, count })
}

/// Nearest integer, halves away from zero.
fn round_ns(name: &'static str, q: &Rational) -> Result<u64, ModelError> {
    let r = q.round().to_integer();
    r.to_u64()
        .ok_or_else(|| ModelError::NegativeLatency(name, q.to_string()))
}

/// Assembles a machine profile from exact fits and summaries. Means and
/// latencies are rounded to the nearest nanosecond; throughputs are copied.
#[allow(clippy::too_many_arguments)]
pub fn build_machine_config(
    load_fit: &LinearFit<Rational>,
    compute_fit: &LinearFit<Rational>,
    init: &MeasurementSummary<Rational>,
    epilogue: &MeasurementSummary<Rational>,
    num_sms: u64,
    buffer_depth: u64,
    wave_time_mode: WaveTimeMode,
) -> Result<MachineConfig, ModelError> {
    let mc = MachineConfig {
        num_sms,
        buffer_depth,
        compute_throughput: compute_fit.throughput,
        load_throughput: load_fit.throughput,
        compute_startup_latency: round_ns("compute_startup_latency", &compute_fit.startup_latency)?,
        load_startup_latency: round_ns("load_startup_latency", &load_fit.startup_latency)?,
        t_init: round_ns("t_init", &init.mean)?,
        t_epilogue: round_ns("t_epilogue", &epilogue.mean)?,
        wave_time_mode,
    };
    mc.validate()?;
    Ok(mc)
}

impl<F: Scalar> LinearFit<F> {
    /// Predicted duration for `elements` elements.
    pub fn predict(&self, elements: u64) -> F {
        F::from_count(elements) / self.throughput.clone() + self.startup_latency.clone()
    }
}

impl<F: Zero> MeasurementSummary<F> {
    pub fn constant(value: F) -> Self {
        Self {
            mean: value,
            stddev: F::zero(),
            count: 1,
        }
    }
}
