//! Trace Event Format export of a simulated wave.
//!
//! Output is a JSON array of complete (`"ph": "X"`) events that Chrome's
//! `about:tracing`, Perfetto and speedscope load directly. Each warp role gets
//! its own thread lane; times are microseconds, so one nanosecond is `0.001`.

use serde::{Deserialize, Serialize};

use crate::model::TileTimes;
use crate::simulator::SimulationResult;
use crate::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    DmaA = 1,
    DmaB = 2,
    Math = 3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub name: String,
    pub cat: String,
    pub ph: String,
    /// Start, microseconds.
    pub ts: f64,
    /// Duration, microseconds.
    pub dur: f64,
    pub pid: u32,
    pub tid: u32,
}

fn micros(ns: Nanos) -> f64 {
    ns as f64 / 1000.0
}

fn span(name: String, cat: &str, lane: Lane, start: Nanos, len: Nanos) -> TraceEvent {
    TraceEvent {
        name,
        cat: cat.to_owned(),
        ph: "X".to_owned(),
        ts: micros(start),
        dur: micros(len),
        pid: 0,
        tid: lane as u32,
    }
}

/// One event per stage and role, plus the epilogue directly after the final
/// multiplication on the MATH lane.
pub fn export_trace(r: &SimulationResult, tt: &TileTimes<Nanos>) -> Vec<TraceEvent> {
    let tl = &r.timeline;
    let mut events = Vec::with_capacity(3 * tl.stages() + 1);
    for i in 0..tl.stages() {
        let stage = i + 1;
        events.push(span(format!("load A {stage}"), "dma", Lane::DmaA, tl.s_a[i], tt.t_load_a));
        events.push(span(format!("load B {stage}"), "dma", Lane::DmaB, tl.s_b[i], tt.t_load_b));
        events.push(span(format!("math {stage}"), "math", Lane::Math, tl.s_m[i], tt.t_math));
    }
    let epilogue_start = tl.last_math_start() + tt.t_math;
    events.push(span("epilogue".to_owned(), "epilogue", Lane::Math, epilogue_start, r.t_epilogue));
    events
}

pub fn to_json(events: &[TraceEvent]) -> String {
    serde_json::to_string_pretty(events).expect("trace events serialize")
}
