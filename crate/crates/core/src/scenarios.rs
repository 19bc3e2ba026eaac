//! Bundled scenarios and a seeded generator of random feasible ones.
//!
//! Stated deployment values: 20 MHz bandwidth, -80 dBm noise, 2 GHz UAV and
//! 10 GHz BS CPU caps, ζ = 1e-28, S = 15. Everything else (fleet size, rounds,
//! geometry, workloads, payloads, channel gain, energy budget) is a documented
//! choice and does not reproduce any published absolute latency.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{evaluate_energy, ScenarioConfig, UavConfig};
use crate::solver::straight_line_start;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn uav(initial: [f64; 2], fin: [f64; 2], samples: f64, rounds: usize) -> UavConfig {
    UavConfig {
        initial_xy: initial,
        final_xy: fin,
        bandwidth: 20e6,
        samples: vec![samples; rounds],
        cycles_per_sample: vec![2e4; rounds],
        switch_cap: vec![1e-28; rounds],
        p_se_max: dbm_to_watts(20.0),
        p_cm_max: dbm_to_watts(20.0),
        f_max: 2e9,
    }
}

/// Three UAVs, two rounds, four slots per round, energy budget binding.
pub fn default_scenario() -> ScenarioConfig {
    let rounds = 2;
    ScenarioConfig {
        rounds,
        slots_per_round: 4,
        slot_len: 1.0,
        altitude: 100.0,
        v_max: 50.0,
        beta0: db_to_linear(-50.0),
        noise_power: dbm_to_watts(-80.0),
        bw_bs: 20e6,
        unit_sense_time: 1e-4,
        local_iters: 15,
        model_size_up: 1e7,
        model_size_down: 1e7,
        cycles_per_sample_bs: vec![1e9; rounds],
        agg_samples: vec![3.0; rounds],
        agg_scale: 1.0,
        p_bs_max: dbm_to_watts(30.0),
        f_bs_max: 10e9,
        e_max: 0.4,
        uavs: vec![
            uav([300.0, 200.0], [150.0, 100.0], 2000.0, rounds),
            uav([-250.0, 150.0], [-120.0, 60.0], 1800.0, rounds),
            uav([100.0, -350.0], [50.0, -200.0], 2200.0, rounds),
        ],
    }
}

/// One UAV, one round, two slots: small enough for exhaustive grid search.
pub fn tiny_scenario() -> ScenarioConfig {
    let mut c = default_scenario();
    c.rounds = 1;
    c.slots_per_round = 2;
    c.cycles_per_sample_bs = vec![1e9];
    c.agg_samples = vec![1.0];
    c.e_max = 0.2;
    c.uavs = vec![uav([200.0, 150.0], [130.0, 100.0], 2000.0, 1)];
    c
}

/// Size caps for [`random_scenario`].
#[derive(Debug, Clone, Copy)]
pub struct SizeCaps {
    pub max_uavs: usize,
    pub max_rounds: usize,
    pub max_slots: usize,
}

/// A random scenario whose straight-line start is reachable and whose energy
/// budget is between half and twice the largest per-UAV energy of that start,
/// but never below 1.5 times the energy that start needs at vanishing power
/// and frequency.
pub fn random_scenario(seed: u64, caps: SizeCaps) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=caps.max_uavs);
    let rounds = rng.gen_range(1..=caps.max_rounds);
    let slots = rng.gen_range(1..=caps.max_slots);
    let slot_len = rng.gen_range(0.5..2.0);
    let v_max = rng.gen_range(20.0..60.0);
    let reach = v_max * slot_len * slots as f64;

    let uavs = (0..n)
        .map(|_| {
            let r0 = rng.gen_range(100.0..400.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let initial = [r0 * phi.cos(), r0 * phi.sin()];
            let step = rng.gen_range(0.0..0.9) * reach;
            let psi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let fin = [initial[0] + step * psi.cos(), initial[1] + step * psi.sin()];
            UavConfig {
                initial_xy: initial,
                final_xy: fin,
                bandwidth: rng.gen_range(5e6..20e6),
                samples: (0..rounds).map(|_| rng.gen_range(500.0..3000.0f64).round()).collect(),
                cycles_per_sample: vec![rng.gen_range(1e4..3e4); rounds],
                switch_cap: vec![1e-28; rounds],
                p_se_max: dbm_to_watts(rng.gen_range(10.0..25.0)),
                p_cm_max: dbm_to_watts(rng.gen_range(5.0..25.0)),
                f_max: rng.gen_range(1e9..3e9),
            }
        })
        .collect();

    let mut config = ScenarioConfig {
        rounds,
        slots_per_round: slots,
        slot_len,
        altitude: rng.gen_range(50.0..150.0),
        v_max,
        beta0: db_to_linear(rng.gen_range(-55.0..-45.0)),
        noise_power: dbm_to_watts(-80.0),
        bw_bs: 20e6,
        unit_sense_time: rng.gen_range(5e-5..2e-4),
        local_iters: 15,
        model_size_up: rng.gen_range(2e6..2e7),
        model_size_down: rng.gen_range(2e6..2e7),
        cycles_per_sample_bs: vec![rng.gen_range(2e8..2e9); rounds],
        agg_samples: vec![n as f64; rounds],
        agg_scale: 1.0,
        p_bs_max: dbm_to_watts(rng.gen_range(15.0..35.0)),
        f_bs_max: rng.gen_range(5e9..2e10),
        e_max: f64::MAX,
        uavs,
    };
    let factor = rng.gen_range(0.5..2.0);
    let start = straight_line_start(&config).expect("endpoints are generated within reach");
    let energy = evaluate_energy(&config, &start).expect("straight-line start has positive rates");
    // Upload energy does not vanish as power goes to zero; keep the budget
    // above that floor so the scenario stays feasible.
    let mut idle = start.clone();
    idle.f_uav.iter_mut().flatten().for_each(|f| *f *= 1e-6);
    idle.p_cm.iter_mut().flatten().flatten().for_each(|p| *p *= 1e-6);
    let floor = evaluate_energy(&config, &idle).expect("scaled start has positive rates");
    let max_of = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    config.e_max = (factor * max_of(&energy.e_total)).max(1.5 * max_of(&floor.e_total));
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_validate() {
        default_scenario().validate().unwrap();
        tiny_scenario().validate().unwrap();
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-25);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((db_to_linear(-50.0) - 1e-5).abs() < 1e-20);
    }

    #[test]
    fn random_scenarios_are_valid_and_seeded() {
        let caps = SizeCaps { max_uavs: 4, max_rounds: 3, max_slots: 4 };
        for seed in 0..20 {
            let c = random_scenario(seed, caps);
            c.validate().unwrap();
            assert!(c.n_uavs() <= 4 && c.rounds <= 3 && c.slots_per_round <= 4);
            assert_eq!(c, random_scenario(seed, caps));
        }
        for seed in 0..200 {
            let c = random_scenario(seed, caps);
            assert!(crate::solver::init_feasible(&c).is_ok(), "seed {seed}");
        }
    }
}
