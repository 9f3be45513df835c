//! Parallel Monte-Carlo BER estimation.
//!
//! Frames are simulated in rounds of [`ROUND_FRAMES`]; frame `t` of a point
//! always uses the RNG substreams keyed by `(seed, t)`, and the stopping rule
//! is checked only between rounds. Error and bit counts are summed, so the
//! result does not depend on how rayon schedules the frames.

use mcwave_core::link::{ErrorCount, LinkSetup};
use rayon::prelude::*;
use serde::Serialize;

use super::scenario::Scenario;
use super::HarnessError;

pub const ROUND_FRAMES: u64 = 8;

/// When to stop simulating one Eb/N0 point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl StopRule {
    pub fn new(min_errors: u64, max_bits: u64) -> Self {
        StopRule { min_errors, max_bits }
    }

    fn done(&self, c: &ErrorCount) -> bool {
        c.bit_errors >= self.min_errors || c.bits >= self.max_bits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRecord {
    pub ebn0_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub std_err: f64,
    pub scenario_digest: String,
    /// No errors were seen: `ber` is zero and only bounds the true value.
    pub upper_bound: bool,
}

impl BerRecord {
    pub fn new(ebn0_db: f64, count: ErrorCount, digest: &str) -> Self {
        let ber = count.ber();
        let std_err = if count.bits == 0 { 0.0 } else { (ber * (1.0 - ber) / count.bits as f64).sqrt() };
        BerRecord {
            ebn0_db,
            bit_errors: count.bit_errors,
            bits: count.bits,
            ber,
            std_err,
            scenario_digest: digest.to_string(),
            upper_bound: count.bit_errors == 0,
        }
    }
}

/// Runs rounds of frames until `stop` says enough, or `extra` returns true
/// for the running total.
pub fn run_until(
    link: &LinkSetup,
    ebn0_db: f64,
    seed: u64,
    stop: StopRule,
    mut extra: impl FnMut(&ErrorCount) -> bool,
) -> Result<ErrorCount, HarnessError> {
    let mut total = ErrorCount::default();
    let mut next = 0u64;
    loop {
        let round: Vec<ErrorCount> = (next..next + ROUND_FRAMES)
            .into_par_iter()
            .map(|t| link.run_frame(ebn0_db, seed, t))
            .collect::<Result<_, _>>()?;
        next += ROUND_FRAMES;
        total = total + round.into_iter().sum();
        if stop.done(&total) || extra(&total) {
            return Ok(total);
        }
    }
}

pub fn run_point(link: &LinkSetup, ebn0_db: f64, seed: u64, stop: StopRule) -> Result<ErrorCount, HarnessError> {
    run_until(link, ebn0_db, seed, stop, |_| false)
}

/// BER at every grid point of the scenario.
pub fn run_ber(s: &Scenario) -> Result<Vec<BerRecord>, HarnessError> {
    s.validate()?;
    let link = s.link()?;
    let digest = s.digest();
    let stop = StopRule::new(s.min_errors, s.max_bits);
    s.ebn0_db
        .iter()
        .map(|&e| Ok(BerRecord::new(e, run_point(&link, e, s.seed, stop)?, &digest)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::{Modulation, WaveformName, WaveformSpec};

    fn scenario() -> Scenario {
        let mut s = Scenario::single_user(WaveformSpec::new(WaveformName::CpOfdm), Modulation::Qam4, vec![2.0, 6.0]);
        s.min_errors = 100;
        s.max_bits = 100_000;
        s
    }

    #[test]
    fn records_satisfy_invariants() {
        let recs = run_ber(&scenario()).unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert!(r.bit_errors >= 100 || r.bits >= 100_000);
            assert!((r.ber - r.bit_errors as f64 / r.bits as f64).abs() < 1e-15);
            assert!((r.std_err - (r.ber * (1.0 - r.ber) / r.bits as f64).sqrt()).abs() < 1e-15);
            assert!(!r.upper_bound);
        }
        assert!(recs[1].ber < recs[0].ber);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = scenario();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_ber(&s)).unwrap();
        let b = four.install(|| run_ber(&s)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_errors_flagged() {
        let mut s = scenario();
        s.ebn0_db = vec![40.0];
        s.max_bits = 20_000;
        let r = &run_ber(&s).unwrap()[0];
        assert_eq!(r.bit_errors, 0);
        assert!(r.upper_bound);
        assert!(r.bits >= 20_000);
    }
}
