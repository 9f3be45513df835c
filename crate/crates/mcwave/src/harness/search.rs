//! Eb/N0 needed to reach a target BER.
//!
//! Bisection over a bracket. Each evaluation simulates rounds of frames until
//! either the usual stopping rule fires or the estimate sits more than `z`
//! standard errors (computed at the target) away from the target. The last
//! bracket is resolved by interpolating `log10(BER)` linearly in dB.

use mcwave_core::link::{ErrorCount, LinkSetup};
use serde::Serialize;

use super::engine::{run_until, StopRule};
use super::scenario::Scenario;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchSettings {
    pub lo_db: f64,
    pub hi_db: f64,
    pub resolution_db: f64,
    pub z: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings { lo_db: -2.0, hi_db: 40.0, resolution_db: 0.1, z: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RequiredEbn0 {
    /// Crossing point in dB; the bracket top when `saturated`.
    pub ebn0_db: f64,
    /// The target is not reached anywhere in the bracket (BER floor).
    pub saturated: bool,
    pub evaluations: usize,
}

pub fn required_ebn0(
    link: &LinkSetup,
    target_ber: f64,
    seed: u64,
    stop: StopRule,
    settings: SearchSettings,
) -> Result<RequiredEbn0, HarnessError> {
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(HarnessError::Invalid(format!("target BER {target_ber} outside (0, 0.5)")));
    }
    let mut evaluations = 0;
    let mut eval = |e: f64| -> Result<f64, HarnessError> {
        evaluations += 1;
        let decided = |c: &ErrorCount| {
            let sigma = (target_ber * (1.0 - target_ber) / c.bits as f64).sqrt();
            (c.ber() - target_ber).abs() > settings.z * sigma
        };
        Ok(run_until(link, e, seed, stop, decided)?.ber())
    };
    let (mut lo, mut hi) = (settings.lo_db, settings.hi_db);
    let mut ber_hi = eval(hi)?;
    if ber_hi > target_ber {
        return Ok(RequiredEbn0 { ebn0_db: hi, saturated: true, evaluations });
    }
    let mut ber_lo = eval(lo)?;
    if ber_lo <= target_ber {
        return Ok(RequiredEbn0 { ebn0_db: lo, saturated: false, evaluations });
    }
    while hi - lo > settings.resolution_db {
        let mid = 0.5 * (lo + hi);
        let b = eval(mid)?;
        if b > target_ber {
            lo = mid;
            ber_lo = b;
        } else {
            hi = mid;
            ber_hi = b;
        }
    }
    let ebn0_db = if ber_hi > 0.0 {
        let (a, b, t) = (ber_lo.log10(), ber_hi.log10(), target_ber.log10());
        if a > b {
            lo + (a - t) / (a - b) * (hi - lo)
        } else {
            hi
        }
    } else {
        hi
    };
    Ok(RequiredEbn0 { ebn0_db, saturated: false, evaluations })
}

/// Required Eb/N0 for a scenario; the target comes from `target_ber`.
pub fn required_for(s: &Scenario, settings: SearchSettings) -> Result<RequiredEbn0, HarnessError> {
    s.validate()?;
    let target = s
        .target_ber
        .ok_or_else(|| HarnessError::Invalid("scenario has no target_ber".into()))?;
    required_ebn0(&s.link()?, target, s.seed, StopRule::new(s.min_errors, s.max_bits), settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::{Modulation, WaveformName, WaveformSpec};
    use mcwave_core::modem::{theoretical_ber, Constellation};

    fn cp_qpsk() -> Scenario {
        let mut s = Scenario::single_user(WaveformSpec::new(WaveformName::CpOfdm), Modulation::Qam4, vec![0.0]);
        s.target_ber = Some(1e-2);
        s.min_errors = 1000;
        s.max_bits = 2_000_000;
        s
    }

    /// Bisection on the closed form, used as the oracle.
    fn theory_crossing(target: f64, shift_db: f64) -> f64 {
        let c = Constellation::qam4();
        let (mut lo, mut hi) = (-2.0, 40.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if theoretical_ber(&c, mid - shift_db) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn finds_qpsk_crossing() {
        let r = required_for(&cp_qpsk(), SearchSettings::default()).unwrap();
        let expect = theory_crossing(1e-2, 10.0 * (288.0f64 / 256.0).log10());
        assert!(!r.saturated);
        assert!((r.ebn0_db - expect).abs() < 0.15, "{} vs {expect}", r.ebn0_db);
    }

    #[test]
    fn unreachable_target_saturates() {
        let mut s = cp_qpsk();
        s.users[0].dft = 0.45;
        let r = required_for(&s, SearchSettings::default()).unwrap();
        assert!(r.saturated);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn rejects_bad_target() {
        let s = cp_qpsk();
        let link = s.link().unwrap();
        assert!(required_ebn0(&link, 0.0, 1, StopRule::new(100, 1000), SearchSettings::default()).is_err());
    }
}
