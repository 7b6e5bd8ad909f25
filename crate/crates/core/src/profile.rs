//! Machine profile documents.
//!
//! A profile is compact JSON with keys in sorted order and throughputs as
//! `"numer/denom"` strings, so a canonical document survives a
//! parse/serialize cycle byte for byte.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{MachineConfig, WaveTimeMode};
use crate::num::{fraction_string, parse_rational};

pub const SCHEMA_VERSION: u32 = 1;

// Field order is the serialized key order and must stay sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineProfileDocument {
    pub buffer_depth: u64,
    pub compute_startup_latency: u64,
    pub compute_throughput: String,
    pub load_startup_latency: u64,
    pub load_throughput: String,
    pub name: String,
    pub num_sms: u64,
    pub schema_version: u32,
    pub t_epilogue: u64,
    pub t_init: u64,
    pub wave_time_mode: WaveTimeMode,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("malformed profile: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0}, expected {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("{field}: not a fraction: {text:?}")]
    Fraction { field: &'static str, text: String },
}

impl MachineProfileDocument {
    pub fn from_machine(name: &str, mc: &MachineConfig) -> Self {
        Self {
            buffer_depth: mc.buffer_depth,
            compute_startup_latency: mc.compute_startup_latency,
            compute_throughput: fraction_string(&mc.compute_throughput),
            load_startup_latency: mc.load_startup_latency,
            load_throughput: fraction_string(&mc.load_throughput),
            name: name.to_owned(),
            num_sms: mc.num_sms,
            schema_version: SCHEMA_VERSION,
            t_epilogue: mc.t_epilogue,
            t_init: mc.t_init,
            wave_time_mode: mc.wave_time_mode,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(ProfileError::Schema(doc.schema_version));
        }
        Ok(doc)
    }

    /// Canonical text: no whitespace, sorted keys, reduced fractions.
    pub fn to_canonical(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }

    /// Converts to a machine. Model invariants (depth, positive throughput)
    /// are not checked here; see [`MachineConfig::validate`].
    pub fn to_machine(&self) -> Result<MachineConfig, ProfileError> {
        let frac = |field: &'static str, text: &str| {
            parse_rational(text).ok_or_else(|| ProfileError::Fraction {
                field,
                text: text.to_owned(),
            })
        };
        Ok(MachineConfig {
            num_sms: self.num_sms,
            buffer_depth: self.buffer_depth,
            compute_throughput: frac("compute_throughput", &self.compute_throughput)?,
            load_throughput: frac("load_throughput", &self.load_throughput)?,
            compute_startup_latency: self.compute_startup_latency,
            load_startup_latency: self.load_startup_latency,
            t_init: self.t_init,
            t_epilogue: self.t_epilogue,
            wave_time_mode: self.wave_time_mode,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    const CANONICAL: &str = r#"{"buffer_depth":3,"compute_startup_latency":0,"compute_throughput":"2461/100","load_startup_latency":770,"load_throughput":"478/3125","name":"a6000","num_sms":84,"schema_version":1,"t_epilogue":1543,"t_init":1680,"wave_time_mode":"equation"}"#;

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let doc = MachineProfileDocument::parse(CANONICAL).unwrap();
        assert_eq!(doc.to_canonical(), CANONICAL);
        let mc = doc.to_machine().unwrap();
        assert_eq!(mc.load_throughput, Ratio::new(15_296, 100_000));
        assert_eq!(MachineProfileDocument::from_machine("a6000", &mc).to_canonical(), CANONICAL);
    }

    #[test]
    fn non_canonical_input_is_normalized() {
        let text = CANONICAL.replace("\"2461/100\"", "\"4922/200\"").replace(",", ",\n  ");
        let doc = MachineProfileDocument::parse(&text).unwrap();
        assert_eq!(
            MachineProfileDocument::from_machine(&doc.name, &doc.to_machine().unwrap()).to_canonical(),
            CANONICAL
        );
    }

    #[test]
    fn rejects_bad_documents() {
        let v2 = CANONICAL.replace("\"schema_version\":1", "\"schema_version\":2");
        assert!(matches!(MachineProfileDocument::parse(&v2), Err(ProfileError::Schema(2))));
        let bad = CANONICAL.replace("\"2461/100\"", "\"fast\"");
        let doc = MachineProfileDocument::parse(&bad).unwrap();
        assert!(matches!(doc.to_machine(), Err(ProfileError::Fraction { field: "compute_throughput", .. })));
        let extra = CANONICAL.replace("{", "{\"color\":1,");
        assert!(MachineProfileDocument::parse(&extra).is_err());
    }
}
