//! Closed-form latency, rate and energy terms of one federated learning round.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Line-of-sight distance from a UAV at horizontal `(x, y)` and altitude `h`
/// to the BS at the origin.
pub fn distance_to_bs(x: f64, y: f64, h: f64) -> f64 {
    (x * x + y * y + h * h).sqrt()
}

/// Shannon rate over a free-space LoS link: `bw·log2(1 + gamma0·p/d²)`.
fn los_rate(p: f64, d: f64, bw: f64, gamma0: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("link distance must be > 0, got {d}")));
    }
    if !(bw > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be > 0, got {bw}")));
    }
    if !(p >= 0.0) {
        return Err(Error::Domain(format!("transmit power must be >= 0, got {p}")));
    }
    let snr = gamma0 * p / (d * d);
    Ok(bw * snr.ln_1p() / LN_2)
}

/// Uplink rate of a UAV transmitting with `p_cm` watts from distance `d`.
pub fn uplink_rate(p_cm: f64, d: f64, bw: f64, gamma0: f64) -> Result<f64> {
    los_rate(p_cm, d, bw, gamma0)
}

/// Broadcast rate from the BS to a UAV at distance `d` (reciprocal channel).
pub fn downlink_rate(p_bs: f64, d: f64, bw_bs: f64, gamma0: f64) -> Result<f64> {
    los_rate(p_bs, d, bw_bs, gamma0)
}

pub fn sensing_time(unit_sense_time: f64, samples: f64) -> f64 {
    unit_sense_time * samples
}

pub fn sensing_energy(p_se: f64, t_sense: f64) -> f64 {
    p_se * t_sense
}

/// `S·C·D/f`.
pub fn training_time(local_iters: f64, cycles: f64, samples: f64, f: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("CPU frequency must be > 0, got {f}")));
    }
    Ok(local_iters * cycles * samples / f)
}

/// `S·ζ·C·D·f²`.
pub fn training_energy(local_iters: f64, zeta: f64, cycles: f64, samples: f64, f: f64) -> f64 {
    local_iters * zeta * cycles * samples * f * f
}

/// Upload time when the model is split evenly over the slots of a round:
/// `Σ_t payload/rate[t]`.
pub fn upload_time(payload_per_slot: f64, rates: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (t, &r) in rates.iter().enumerate() {
        if payload_per_slot == 0.0 {
            continue;
        }
        if !(r > 0.0) {
            return Err(Error::InfeasibleRate(format!("slot {t} has rate {r}")));
        }
        total += payload_per_slot / r;
    }
    Ok(total)
}

/// Transmit energy matching [`upload_time`]: `Σ_t p[t]·payload/rate[t]`.
///
/// A slot transmitting at zero power contributes no energy.
pub fn upload_energy(payload_per_slot: f64, rates: &[f64], p_cm: &[f64]) -> Result<f64> {
    if rates.len() != p_cm.len() {
        return Err(Error::Dimension(format!(
            "{} rates but {} power values",
            rates.len(),
            p_cm.len()
        )));
    }
    let mut total = 0.0;
    for (t, (&r, &p)) in rates.iter().zip(p_cm).enumerate() {
        if p == 0.0 || payload_per_slot == 0.0 {
            continue;
        }
        if !(r > 0.0) {
            return Err(Error::InfeasibleRate(format!("slot {t} has rate {r} at power {p}")));
        }
        total += p * payload_per_slot / r;
    }
    Ok(total)
}

/// `C_BS·D_BS/f_BS`.
pub fn aggregation_time(cycles_bs: f64, agg_samples: f64, f_bs: f64) -> Result<f64> {
    let work = cycles_bs * agg_samples;
    if work == 0.0 {
        return Ok(0.0);
    }
    if !(f_bs > 0.0) {
        return Err(Error::Domain(format!("BS frequency must be > 0, got {f_bs}")));
    }
    Ok(work / f_bs)
}

pub fn download_time(model_size_down: f64, rate_dl: f64) -> Result<f64> {
    if !(rate_dl > 0.0) {
        return Err(Error::InfeasibleRate(format!("downlink rate {rate_dl}")));
    }
    Ok(model_size_down / rate_dl)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA0: f64 = 1e-5 / 1e-11;

    #[test]
    fn distance_examples() {
        assert_eq!(distance_to_bs(0.0, 0.0, 100.0), 100.0);
        assert!((distance_to_bs(300.0, 400.0, 1e-4) - 500.0).abs() < 1e-9);
        // 120² + 50² + 100² = 14400 + 2500 + 10000 = 26900
        assert_eq!(distance_to_bs(120.0, 50.0, 100.0), 26900f64.sqrt());
    }

    #[test]
    fn uplink_examples() {
        assert_eq!(uplink_rate(0.0, 200.0, 20e6, GAMMA0).unwrap(), 0.0);
        let near = uplink_rate(0.1, 200.0, 20e6, GAMMA0).unwrap();
        let far = uplink_rate(0.1, 400.0, 20e6, GAMMA0).unwrap();
        assert!(far < near);
        // SNR = 1e6 * 0.1 / 4e4 = 2.5, rate = 20e6 * log2(3.5)
        let oracle = 20e6 * 3.5f64.log2();
        assert!((near - oracle).abs() / oracle < 1e-12);
        assert!(matches!(uplink_rate(0.1, 0.0, 20e6, GAMMA0), Err(Error::Domain(_))));
    }

    #[test]
    fn downlink_examples() {
        assert_eq!(downlink_rate(0.0, 150.0, 20e6, GAMMA0).unwrap(), 0.0);
        assert_eq!(
            downlink_rate(0.1, 200.0, 20e6, GAMMA0).unwrap(),
            uplink_rate(0.1, 200.0, 20e6, GAMMA0).unwrap()
        );
        // SNR = 1e6 / 22500 = 44.444..., rate = 20e6 * log2(1 + 400/9)
        let oracle = 20e6 * (1.0 + 400.0 / 9.0f64).log2();
        let r = downlink_rate(1.0, 150.0, 20e6, GAMMA0).unwrap();
        assert!((r - oracle).abs() / oracle < 1e-12);
    }

    #[test]
    fn sensing_examples() {
        assert_eq!(sensing_time(0.0, 500.0), 0.0);
        assert_eq!(sensing_time(1e-3, 1000.0), 1.0);
        assert_eq!(sensing_time(1e-3, 0.0), 0.0);
        assert_eq!(sensing_energy(0.0, 3.0), 0.0);
        assert_eq!(sensing_energy(0.5, 2.0), 1.0);
        assert_eq!(sensing_energy(0.5, sensing_time(1e-3, 1000.0)), 0.5 * 1e-3 * 1000.0);
    }

    #[test]
    fn training_examples() {
        let t = training_time(15.0, 1e3, 1e3, 2e9).unwrap();
        assert!((t - 7.5e-3).abs() < 1e-18);
        assert_eq!(training_time(15.0, 1e3, 1e3, 4e9).unwrap(), t / 2.0);
        assert_eq!(training_time(15.0, 1e3, 0.0, 2e9).unwrap(), 0.0);
        assert!(matches!(training_time(15.0, 1e3, 1e3, 0.0), Err(Error::Domain(_))));

        assert_eq!(training_energy(15.0, 1e-28, 1e3, 1e3, 0.0), 0.0);
        // 15 · 1e-28 · 1e3 · 1e3 · (2e9)² = 6.0e-3 J
        let e = training_energy(15.0, 1e-28, 1e3, 1e3, 2e9);
        assert!((e - 6.0e-3).abs() < 1e-15);
        let e2 = training_energy(15.0, 1e-28, 1e3, 1e3, 4e9);
        assert!((e2 - 4.0 * e).abs() < 1e-15);
    }

    #[test]
    fn upload_examples() {
        let s_l = 8e6;
        let t_slots = 4.0;
        let r = 2e7;
        let t = upload_time(s_l / t_slots, &[r; 4]).unwrap();
        assert!((t - s_l / r).abs() / (s_l / r) < 1e-12);
        assert_eq!(upload_time(s_l, &[r]).unwrap(), s_l / r);
        // harmonic sum: 1e6/1e6 + 1e6/2e6 + 1e6/4e6 = 1.75
        assert_eq!(upload_time(1e6, &[1e6, 2e6, 4e6]).unwrap(), 1.75);
        assert!(matches!(upload_time(1e6, &[1e6, 0.0]), Err(Error::InfeasibleRate(_))));

        assert_eq!(upload_energy(1e6, &[1e6, 2e6], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(upload_energy(s_l, &[r], &[0.2]).unwrap(), 0.2 * s_l / r);
        // 0.1*1 + 0.2*0.5 + 0.4*0.25 = 0.3
        let e = upload_energy(1e6, &[1e6, 2e6, 4e6], &[0.1, 0.2, 0.4]).unwrap();
        assert!((e - 0.3).abs() < 1e-15);
    }

    #[test]
    fn aggregation_and_download_examples() {
        let t = aggregation_time(1e4, 5.0, 1e10).unwrap();
        assert!((t - 5e-6).abs() < 1e-20);
        assert!(aggregation_time(1e4, 5.0, 1e300).unwrap() < 1e-290);
        assert_eq!(aggregation_time(1e4, 0.0, 1e10).unwrap(), 0.0);

        assert_eq!(download_time(1e6, 1e6).unwrap(), 1.0);
        let slow = download_time(1e7, downlink_rate(0.5, 150.0, 20e6, GAMMA0).unwrap()).unwrap();
        let fast = download_time(1e7, downlink_rate(1.0, 150.0, 20e6, GAMMA0).unwrap()).unwrap();
        assert!(fast < slow);
        // 1e7 / (20e6 * log2(1 + 400/9))
        let oracle = 1e7 / (20e6 * (1.0 + 400.0 / 9.0f64).log2());
        assert!((fast - oracle).abs() / oracle < 1e-12);
        assert!(matches!(download_time(1e6, 0.0), Err(Error::InfeasibleRate(_))));
    }
}
