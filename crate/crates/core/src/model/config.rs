use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-UAV parameters. Round-indexed quantities hold one entry per global round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavConfig {
    /// Horizontal start position (m).
    pub initial_xy: [f64; 2],
    /// Horizontal end-of-flight position (m).
    pub final_xy: [f64; 2],
    /// Uplink bandwidth B_n (Hz).
    pub bandwidth: f64,
    /// Sensed samples D_n per round.
    pub samples: Vec<f64>,
    /// CPU cycles per sample per local iteration, C_n per round.
    pub cycles_per_sample: Vec<f64>,
    /// Effective switched capacitance ζ_n per round.
    pub switch_cap: Vec<f64>,
    /// Sensing power cap (W).
    pub p_se_max: f64,
    /// Communication power cap (W).
    pub p_cm_max: f64,
    /// CPU frequency cap (cycles/s).
    pub f_max: f64,
}

/// Physical and system constants of one UAV-ISAC federated learning deployment.
///
/// All values are SI: watts, hertz, bits, seconds, meters, joules. The reference
/// SNR is derived from `beta0 / noise_power` and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of global rounds K.
    pub rounds: usize,
    /// Slots per round T.
    pub slots_per_round: usize,
    /// Slot length δ_t (s).
    pub slot_len: f64,
    /// Flight altitude H (m).
    pub altitude: f64,
    /// Maximum UAV speed (m/s).
    pub v_max: f64,
    /// Channel gain at 1 m, linear.
    pub beta0: f64,
    /// Receiver noise power σ² (W).
    pub noise_power: f64,
    /// Broadcast bandwidth of the BS (Hz).
    pub bw_bs: f64,
    /// Time to generate one sensing sample (s).
    pub unit_sense_time: f64,
    /// Local SGD iterations S per round.
    pub local_iters: u32,
    /// Local model payload s_l (bits).
    pub model_size_up: f64,
    /// Global model payload s_g (bits).
    pub model_size_down: f64,
    /// BS cycles per aggregation unit, per round.
    pub cycles_per_sample_bs: Vec<f64>,
    /// Aggregation units D_BS per round.
    pub agg_samples: Vec<f64>,
    /// Scale L on the aggregation term of the BS sub-problem.
    pub agg_scale: f64,
    /// BS transmit power cap (W).
    pub p_bs_max: f64,
    /// BS CPU frequency cap (cycles/s).
    pub f_bs_max: f64,
    /// Per-UAV energy budget over all rounds (J).
    pub e_max: f64,
    pub uavs: Vec<UavConfig>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn per_round(name: &str, v: &[f64], rounds: usize, strict: bool) -> Result<()> {
    if v.len() != rounds {
        return Err(Error::InvalidConfig(format!(
            "{name} has {} entries, expected one per round ({rounds})",
            v.len()
        )));
    }
    for (k, &x) in v.iter().enumerate() {
        let label = format!("{name}[{k}]");
        if strict {
            positive(&label, x)?;
        } else {
            nonnegative(&label, x)?;
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn n_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// Reference SNR γ₀ = β₀/σ².
    pub fn gamma0(&self) -> f64 {
        self.beta0 / self.noise_power
    }

    /// Flight budget of one round, δ_t·T.
    pub fn flight_time(&self) -> f64 {
        self.slot_len * self.slots_per_round as f64
    }

    /// Maximum displacement within one slot, V_max·δ_t.
    pub fn max_step(&self) -> f64 {
        self.v_max * self.slot_len
    }

    /// Payload carried in each slot, s_l/T.
    pub fn payload_per_slot(&self) -> f64 {
        self.model_size_up / self.slots_per_round as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.uavs.is_empty() {
            return Err(Error::InvalidConfig("at least one UAV is required".into()));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be >= 1".into()));
        }
        if self.slots_per_round == 0 {
            return Err(Error::InvalidConfig("slots_per_round must be >= 1".into()));
        }
        positive("slot_len", self.slot_len)?;
        positive("altitude", self.altitude)?;
        positive("v_max", self.v_max)?;
        positive("beta0", self.beta0)?;
        positive("noise_power", self.noise_power)?;
        positive("bw_bs", self.bw_bs)?;
        nonnegative("unit_sense_time", self.unit_sense_time)?;
        positive("model_size_up", self.model_size_up)?;
        positive("model_size_down", self.model_size_down)?;
        per_round("cycles_per_sample_bs", &self.cycles_per_sample_bs, self.rounds, false)?;
        per_round("agg_samples", &self.agg_samples, self.rounds, false)?;
        positive("agg_scale", self.agg_scale)?;
        positive("p_bs_max", self.p_bs_max)?;
        positive("f_bs_max", self.f_bs_max)?;
        nonnegative("e_max", self.e_max)?;
        for (n, u) in self.uavs.iter().enumerate() {
            for (i, &c) in u.initial_xy.iter().chain(u.final_xy.iter()).enumerate() {
                if !c.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "uav[{n}] endpoint coordinate {i} is not finite"
                    )));
                }
            }
            positive(&format!("uav[{n}].bandwidth"), u.bandwidth)?;
            per_round(&format!("uav[{n}].samples"), &u.samples, self.rounds, false)?;
            per_round(
                &format!("uav[{n}].cycles_per_sample"),
                &u.cycles_per_sample,
                self.rounds,
                false,
            )?;
            per_round(&format!("uav[{n}].switch_cap"), &u.switch_cap, self.rounds, false)?;
            positive(&format!("uav[{n}].p_se_max"), u.p_se_max)?;
            positive(&format!("uav[{n}].p_cm_max"), u.p_cm_max)?;
            positive(&format!("uav[{n}].f_max"), u.f_max)?;
        }
        Ok(())
    }

    /// Copy of the scenario restricted to a single UAV. BS-side per-round data
    /// (including `agg_samples`) is kept as is, so the single-UAV scenario sees
    /// the same aggregation load as the full one.
    pub fn single_uav(&self, n: usize) -> ScenarioConfig {
        let mut c = self.clone();
        c.uavs = vec![self.uavs[n].clone()];
        c
    }

    pub fn set_f_uav_max(&mut self, v: f64) {
        self.uavs.iter_mut().for_each(|u| u.f_max = v);
    }

    pub fn set_p_cm_max(&mut self, v: f64) {
        self.uavs.iter_mut().for_each(|u| u.p_cm_max = v);
    }
}
