//! TOML scenario files.
//!
//! Every key of [`ScenarioConfig`] is required and unknown keys are rejected.
//! Power, frequency and gain keys take either a bare SI number or a string
//! with a unit suffix. Per-round lists accept a single number, which is
//! repeated for every round.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use uavfl_core::model::{ScenarioConfig, UavConfig};

use crate::units::{Gain, Hertz, Watts};

const HEADER: &str = "\
# UAV federated learning scenario. All numbers are SI (W, Hz, s, m, bits, J).
# Power keys also accept \"<x> W|mW|dBm|dBW\", frequency keys \"<x> Hz|kHz|MHz|GHz\"
# and beta0 \"<x> dB\". dBm is referenced to 1 mW, dBW to 1 W.
";

/// A per-round list, or one value for every round.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct PerRound(Vec<f64>);

impl PerRound {
    fn expand(self, rounds: usize) -> Vec<f64> {
        match self.0.as_slice() {
            [v] if rounds > 1 => vec![*v; rounds],
            _ => self.0,
        }
    }
}

impl<'de> Deserialize<'de> for PerRound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = PerRound;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or an array with one number per round")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<PerRound, E> {
                Ok(PerRound(vec![v]))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<PerRound, E> {
                Ok(PerRound(vec![v as f64]))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<PerRound, E> {
                Ok(PerRound(vec![v as f64]))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<PerRound, A::Error> {
                let mut out = Vec::new();
                while let Some(v) = seq.next_element::<f64>()? {
                    out.push(v);
                }
                Ok(PerRound(out))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UavSection {
    initial_xy: [f64; 2],
    final_xy: [f64; 2],
    bandwidth: Hertz,
    samples: PerRound,
    cycles_per_sample: PerRound,
    switch_cap: PerRound,
    p_se_max: Watts,
    p_cm_max: Watts,
    f_max: Hertz,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    rounds: usize,
    slots_per_round: usize,
    slot_len: f64,
    altitude: f64,
    v_max: f64,
    beta0: Gain,
    noise_power: Watts,
    bw_bs: Hertz,
    unit_sense_time: f64,
    local_iters: u32,
    model_size_up: f64,
    model_size_down: f64,
    cycles_per_sample_bs: PerRound,
    agg_samples: PerRound,
    agg_scale: f64,
    p_bs_max: Watts,
    f_bs_max: Hertz,
    e_max: f64,
    uav: Vec<UavSection>,
}

impl ScenarioFile {
    fn into_config(self) -> ScenarioConfig {
        let k = self.rounds;
        ScenarioConfig {
            rounds: k,
            slots_per_round: self.slots_per_round,
            slot_len: self.slot_len,
            altitude: self.altitude,
            v_max: self.v_max,
            beta0: self.beta0.0,
            noise_power: self.noise_power.0,
            bw_bs: self.bw_bs.0,
            unit_sense_time: self.unit_sense_time,
            local_iters: self.local_iters,
            model_size_up: self.model_size_up,
            model_size_down: self.model_size_down,
            cycles_per_sample_bs: self.cycles_per_sample_bs.expand(k),
            agg_samples: self.agg_samples.expand(k),
            agg_scale: self.agg_scale,
            p_bs_max: self.p_bs_max.0,
            f_bs_max: self.f_bs_max.0,
            e_max: self.e_max,
            uavs: self
                .uav
                .into_iter()
                .map(|u| UavConfig {
                    initial_xy: u.initial_xy,
                    final_xy: u.final_xy,
                    bandwidth: u.bandwidth.0,
                    samples: u.samples.expand(k),
                    cycles_per_sample: u.cycles_per_sample.expand(k),
                    switch_cap: u.switch_cap.expand(k),
                    p_se_max: u.p_se_max.0,
                    p_cm_max: u.p_cm_max.0,
                    f_max: u.f_max.0,
                })
                .collect(),
        }
    }

    fn from_config(c: &ScenarioConfig) -> Self {
        ScenarioFile {
            rounds: c.rounds,
            slots_per_round: c.slots_per_round,
            slot_len: c.slot_len,
            altitude: c.altitude,
            v_max: c.v_max,
            beta0: Gain::new(c.beta0),
            noise_power: Watts::new(c.noise_power),
            bw_bs: Hertz::new(c.bw_bs),
            unit_sense_time: c.unit_sense_time,
            local_iters: c.local_iters,
            model_size_up: c.model_size_up,
            model_size_down: c.model_size_down,
            cycles_per_sample_bs: PerRound(c.cycles_per_sample_bs.clone()),
            agg_samples: PerRound(c.agg_samples.clone()),
            agg_scale: c.agg_scale,
            p_bs_max: Watts::new(c.p_bs_max),
            f_bs_max: Hertz::new(c.f_bs_max),
            e_max: c.e_max,
            uav: c
                .uavs
                .iter()
                .map(|u| UavSection {
                    initial_xy: u.initial_xy,
                    final_xy: u.final_xy,
                    bandwidth: Hertz::new(u.bandwidth),
                    samples: PerRound(u.samples.clone()),
                    cycles_per_sample: PerRound(u.cycles_per_sample.clone()),
                    switch_cap: PerRound(u.switch_cap.clone()),
                    p_se_max: Watts::new(u.p_se_max),
                    p_cm_max: Watts::new(u.p_cm_max),
                    f_max: Hertz::new(u.f_max),
                })
                .collect(),
        }
    }
}

/// A scenario file that could not be turned into a valid scenario.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ScenarioError {
    /// 1-based line of the offending entry, when it can be located.
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

/// Key assigned on the line containing byte `offset`, if any.
fn key_at(text: &str, offset: usize) -> (usize, Option<String>) {
    let line_no = text[..offset.min(text.len())].matches('\n').count() + 1;
    let line = text.lines().nth(line_no - 1).unwrap_or("");
    let key = line.split_once('=').map(|(k, _)| k.trim().to_string()).filter(|k| !k.is_empty());
    (line_no, key)
}

/// Line of `key` in the `n`-th `[[uav]]` section (or at top level when `uav` is `None`).
fn find_key(text: &str, uav: Option<usize>, key: &str) -> Option<usize> {
    let mut section: Option<usize> = None;
    let mut seen = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with("[[uav]]") {
            section = Some(seen);
            seen += 1;
            continue;
        }
        if section == uav && line.split_once('=').is_some_and(|(k, _)| k.trim() == key) {
            return Some(i + 1);
        }
    }
    None
}

/// Locates the field named at the start of a validation message, such as
/// `uav[1].samples has 3 entries` or `slot_len must be > 0`.
fn locate_validation(text: &str, message: &str) -> (Option<usize>, Option<String>) {
    let head = message.split_whitespace().next().unwrap_or("");
    let (uav, rest) = match head.strip_prefix("uav[").and_then(|r| r.split_once("].")) {
        Some((n, rest)) => (n.parse().ok(), rest),
        None => (None, head),
    };
    let key: String = rest.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
    if key.is_empty() {
        return (None, None);
    }
    (find_key(text, uav, &key), Some(key))
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let (line, key) = match e.span() {
            Some(span) => {
                let (l, k) = key_at(text, span.start);
                (Some(l), k)
            }
            None => (None, None),
        };
        ScenarioError { line, key, message: e.message().trim().to_string() }
    })?;
    let config = file.into_config();
    config.validate().map_err(|e| {
        let message = match e {
            uavfl_core::Error::InvalidConfig(m) => m,
            other => other.to_string(),
        };
        let (line, key) = locate_validation(text, &message);
        ScenarioError { line, key, message }
    })?;
    Ok(config)
}

/// Writes `config` in the file format, all values in SI.
pub fn to_toml(config: &ScenarioConfig) -> String {
    let body = toml::to_string(&ScenarioFile::from_config(config)).expect("scenario serializes");
    format!("{HEADER}\n{body}")
}

pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.toml");
pub const TINY_SCENARIO: &str = include_str!("../scenarios/tiny.toml");

#[cfg(test)]
mod tests {
    use super::*;
    use uavfl_core::scenarios::{default_scenario, tiny_scenario};

    #[test]
    fn bundled_files_match_the_builtin_scenarios() {
        assert_eq!(parse_scenario(DEFAULT_SCENARIO).unwrap(), default_scenario());
        assert_eq!(parse_scenario(TINY_SCENARIO).unwrap(), tiny_scenario());
    }

    #[test]
    fn written_files_read_back_identically() {
        for c in [default_scenario(), tiny_scenario()] {
            assert_eq!(parse_scenario(&to_toml(&c)).unwrap(), c);
        }
    }

    #[test]
    fn scalar_per_round_values_are_repeated() {
        let text = DEFAULT_SCENARIO.replace("agg_samples = [3, 3]", "agg_samples = 3");
        assert_ne!(text, DEFAULT_SCENARIO);
        assert_eq!(parse_scenario(&text).unwrap().agg_samples, vec![3.0, 3.0]);
    }

    #[test]
    fn bad_unit_names_line_and_key() {
        let text = DEFAULT_SCENARIO.replace("p_bs_max = \"30 dBm\"", "p_bs_max = \"30 dBx\"");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("p_bs_max"));
        let expected = text.lines().position(|l| l.starts_with("p_bs_max")).unwrap() + 1;
        assert_eq!(err.line, Some(expected));
        assert!(err.to_string().contains("not a power unit"), "{err}");
    }

    #[test]
    fn unknown_and_missing_keys_are_rejected() {
        let err = parse_scenario(&format!("{DEFAULT_SCENARIO}\n[extra]\n")).unwrap_err();
        assert!(err.message.contains("unknown field"), "{err}");
        let text: String = DEFAULT_SCENARIO.lines().filter(|l| !l.starts_with("altitude")).map(|l| format!("{l}\n")).collect();
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.message.contains("altitude"), "{err}");
    }

    #[test]
    fn validation_errors_point_at_the_uav_section() {
        let text = DEFAULT_SCENARIO.replacen("samples = [2000, 2000]", "samples = [2000, 2000, 1]", 1);
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("samples"));
        let line = err.line.unwrap();
        assert!(text.lines().nth(line - 1).unwrap().contains("2000, 2000, 1"));
    }
}
