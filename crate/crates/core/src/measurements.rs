//! Measurement files and the calibration pipeline built on them.
//!
//! A measurement file is CSV with the header
//! `benchmark_name,t_m,t_n,t_k,duration_ns`, one row per run. Unused tile
//! columns are 0. Durations may be integers, decimals or `a/b` fractions.
//! Groups used by [`calibrate`]: `init`, `epilogue`, `load_a`, `math`.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

use crate::calibration::{
    build_machine_config, fit_compute, fit_load, summarize, ComputeSample, FitError, LinearFit,
    LoadSample, MeasurementSummary,
};
use crate::error::ModelError;
use crate::model::{MachineConfig, WaveTimeMode};
use crate::num::parse_rational;
use crate::Rational;

pub const INIT: &str = "init";
pub const EPILOGUE: &str = "epilogue";
pub const LOAD_A: &str = "load_a";
pub const MATH: &str = "math";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub benchmark_name: String,
    pub t_m: u64,
    pub t_n: u64,
    pub t_k: u64,
    pub duration_ns: Rational,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    benchmark_name: String,
    t_m: u64,
    t_n: u64,
    t_k: u64,
    duration_ns: String,
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: bad duration {text:?}")]
    Duration { line: u64, text: String },
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<Record>, ReadError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for row in reader.deserialize::<RawRecord>() {
        let raw = row?;
        let duration_ns = parse_rational(&raw.duration_ns).ok_or_else(|| ReadError::Duration {
            line: out.len() as u64 + 2,
            text: raw.duration_ns.clone(),
        })?;
        out.push(Record {
            benchmark_name: raw.benchmark_name,
            t_m: raw.t_m,
            t_n: raw.t_n,
            t_k: raw.t_k,
            duration_ns,
        });
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("group {0} has no records")]
    MissingGroup(&'static str),
    #[error("group {group}: {source}")]
    Fit {
        group: &'static str,
        #[source]
        source: FitError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Intermediate results kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub init: MeasurementSummary<Rational>,
    pub epilogue: MeasurementSummary<Rational>,
    pub load: LinearFit<Rational>,
    pub compute: LinearFit<Rational>,
    pub machine: MachineConfig,
}

fn group<'a>(records: &'a [Record], name: &'static str) -> Result<Vec<&'a Record>, CalibrateError> {
    let g: Vec<_> = records.iter().filter(|r| r.benchmark_name == name).collect();
    if g.is_empty() {
        Err(CalibrateError::MissingGroup(name))
    } else {
        Ok(g)
    }
}

fn durations(g: &[&Record]) -> Vec<Rational> {
    g.iter().map(|r| r.duration_ns).collect()
}

/// Mean duration and its element count.
type SizedMean = (Rational, u64);

/// Mean duration per element count, for the smallest and largest counts.
/// A group with a single size yields the same point twice so the fit
/// reports `EqualSizes`.
fn extreme_sizes(
    g: &[&Record],
    elements: impl Fn(&Record) -> u64,
    name: &'static str,
) -> Result<[SizedMean; 2], CalibrateError> {
    let mut by_size: BTreeMap<u64, Vec<Rational>> = BTreeMap::new();
    for r in g {
        by_size.entry(elements(r)).or_default().push(r.duration_ns);
    }
    let mean = |v: &Vec<Rational>| {
        summarize(v)
            .map(|s| s.mean)
            .map_err(|source| CalibrateError::Fit { group: name, source })
    };
    let (lo_e, lo) = by_size.first_key_value().expect("group is nonempty");
    let (hi_e, hi) = by_size.last_key_value().expect("group is nonempty");
    Ok([(mean(lo)?, *lo_e), (mean(hi)?, *hi_e)])
}

pub fn calibrate(
    records: &[Record],
    num_sms: u64,
    buffer_depth: u64,
    wave_time_mode: WaveTimeMode,
) -> Result<Calibration, CalibrateError> {
    let fit_err = |group| move |source| CalibrateError::Fit { group, source };

    let init = summarize(&durations(&group(records, INIT)?)).map_err(fit_err(INIT))?;
    let epilogue = summarize(&durations(&group(records, EPILOGUE)?)).map_err(fit_err(EPILOGUE))?;

    let loads = group(records, LOAD_A)?;
    let [(t1, e1), (t2, e2)] = extreme_sizes(&loads, |r| r.t_m * r.t_k, LOAD_A)?;
    // the fit only sees element counts, so encode each size as a 1 x e tile
    let load = fit_load(
        &LoadSample { t_m: e1, t_k: 1, time: t1 },
        &LoadSample { t_m: e2, t_k: 1, time: t2 },
    )
    .map_err(fit_err(LOAD_A))?;

    let maths = group(records, MATH)?;
    let [(t1, e1), (t2, e2)] = extreme_sizes(&maths, |r| r.t_m * r.t_n * r.t_k, MATH)?;
    let compute = fit_compute(
        &ComputeSample { t_m: e1, t_n: 1, t_k: 1, time: t1 },
        &ComputeSample { t_m: e2, t_n: 1, t_k: 1, time: t2 },
    )
    .map_err(fit_err(MATH))?;

    let machine = build_machine_config(
        &load,
        &compute,
        &init,
        &epilogue,
        num_sms,
        buffer_depth,
        wave_time_mode,
    )?;
    Ok(Calibration {
        init,
        epilogue,
        load,
        compute,
        machine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    const FILE: &str = "\
benchmark_name,t_m,t_n,t_k,duration_ns
init,0,0,0,1680
init,0,0,0,1680
epilogue,0,0,0,1543
load_a,64,0,64,41960
load_a,128,0,128,164840
load_a,128,0,128,164840
math,64,64,64,262144
math,128,128,128,2097152
";

    #[test]
    fn reads_and_calibrates() {
        let records = read_records(FILE.as_bytes()).unwrap();
        assert_eq!(records.len(), 8);
        let c = calibrate(&records, 84, 3, WaveTimeMode::EquationAsWritten).unwrap();
        assert_eq!(c.machine.t_init, 1680);
        assert_eq!(c.machine.t_epilogue, 1543);
        assert_eq!(c.machine.load_throughput, Ratio::new(1, 10));
        assert_eq!(c.machine.load_startup_latency, 1000);
        assert_eq!(c.machine.compute_throughput, Ratio::from_integer(1));
        assert_eq!(c.machine.compute_startup_latency, 0);
    }

    #[test]
    fn single_load_size_is_equal_sizes() {
        let text = FILE.replace("load_a,128,0,128,164840\n", "");
        let records = read_records(text.as_bytes()).unwrap();
        match calibrate(&records, 84, 3, WaveTimeMode::EquationAsWritten) {
            Err(CalibrateError::Fit { group, source }) => {
                assert_eq!(group, LOAD_A);
                assert_eq!(source, FitError::EqualSizes);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_group() {
        let text: String = FILE.lines().filter(|l| !l.starts_with("math")).map(|l| format!("{l}\n")).collect();
        let records = read_records(text.as_bytes()).unwrap();
        assert!(matches!(
            calibrate(&records, 84, 3, WaveTimeMode::EquationAsWritten),
            Err(CalibrateError::MissingGroup(MATH))
        ));
    }

    #[test]
    fn bad_duration_reports_line() {
        let text = "benchmark_name,t_m,t_n,t_k,duration_ns\ninit,0,0,0,fast\n";
        match read_records(text.as_bytes()) {
            Err(ReadError::Duration { line, text }) => {
                assert_eq!(line, 2);
                assert_eq!(text, "fast");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
