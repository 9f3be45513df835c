//! Canonical experiment families. Each writes one table per curve or figure
//! panel into an [`OutputDir`], with the resolved configuration recorded in
//! the manifest.

use std::fmt;
use std::str::FromStr;

use mcwave_core::analysis::{envelope_pcc, ici_freq, ici_time, ischi, oob_slope, psd_estimate, time_envelope};
use mcwave_core::modem::theoretical_ber;
use mcwave_core::numerics::{substream, SeededRng};
use mcwave_core::waveforms::SubbandAllocation;
use serde_json::json;

use super::engine::{run_ber, StopRule};
use super::output::{ber_table, num, required_table, OutputDir, Table};
use super::scenario::{Modulation, Scenario, UserSpec, WaveformName, WaveformSpec, TWO_USER_START};
use super::search::{required_ebn0, SearchSettings};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    AwgnCurves,
    TimeOffsetCurves,
    FreqOffsetCurves,
    RequiredVsTau,
    RequiredVsDft,
    TwoUserGrid,
    Spectra,
    Envelopes,
    IciSurfaces,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::AwgnCurves,
        Family::TimeOffsetCurves,
        Family::FreqOffsetCurves,
        Family::RequiredVsTau,
        Family::RequiredVsDft,
        Family::TwoUserGrid,
        Family::Spectra,
        Family::Envelopes,
        Family::IciSurfaces,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::AwgnCurves => "awgn_curves",
            Family::TimeOffsetCurves => "time_offset_curves",
            Family::FreqOffsetCurves => "freq_offset_curves",
            Family::RequiredVsTau => "required_vs_tau",
            Family::RequiredVsDft => "required_vs_dft",
            Family::TwoUserGrid => "two_user_grid",
            Family::Spectra => "spectra",
            Family::Envelopes => "envelopes",
            Family::IciSurfaces => "ici_surfaces",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown sweep family `{s}`")))
    }
}

/// Budget and seed shared by every scenario of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub seed: u64,
    pub stop: StopRule,
    pub target_ber: f64,
    pub search: SearchSettings,
    /// Symbols per PSD or envelope estimate.
    pub symbols: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            seed: 1,
            stop: StopRule::new(200, 20_000_000),
            target_ber: 1e-2,
            search: SearchSettings::default(),
            symbols: 400,
        }
    }
}

/// Eb/N0 grid (dB) for a constellation's BER curves.
pub fn awgn_grid(m: Modulation) -> Vec<f64> {
    let (lo, hi) = match m {
        Modulation::Qam4 => (-2, 10),
        Modulation::Qam16 => (0, 16),
        Modulation::Qam64 => (4, 22),
    };
    (lo..=hi).step_by(2).map(f64::from).collect()
}

/// Timing offsets for the required-Eb/N0 curves: -0.2 to 0.2 in steps of 0.02.
pub fn tau_grid() -> Vec<f64> {
    (-10..=10).map(|i| f64::from(i) * 0.02).collect()
}

/// Frequency offsets for the required-Eb/N0 curves: 0 to 0.3 in steps of 0.02.
pub fn dft_grid() -> Vec<f64> {
    (0..=15).map(|i| f64::from(i) * 0.02).collect()
}

/// The four receivers compared in the BER figures.
pub fn curve_waveforms() -> Vec<WaveformSpec> {
    let mut noweight = WaveformSpec::new(WaveformName::PccOfdm);
    noweight.pcc_weighting = false;
    vec![
        WaveformSpec::new(WaveformName::CpOfdm),
        WaveformSpec::new(WaveformName::PccOfdm),
        noweight,
        WaveformSpec::new(WaveformName::Ufmc),
    ]
}

fn main_waveforms() -> Vec<WaveformSpec> {
    [WaveformName::CpOfdm, WaveformName::PccOfdm, WaveformName::Ufmc]
        .into_iter()
        .map(WaveformSpec::new)
        .collect()
}

/// Interferer impairments `(tau, dfT, gain dB)` of the two-user grid.
pub fn two_user_cases() -> Vec<(f64, f64, f64)> {
    vec![
        (0.0, 0.0, 0.0),
        (0.0, 0.0, 10.0),
        (0.05, 0.0, 0.0),
        (0.05, 0.0, 10.0),
        (0.0, 0.05, 0.0),
        (0.0, 0.05, 10.0),
        (0.0, 0.2, 0.0),
        (0.0, 0.2, 10.0),
        (0.05, 0.05, 10.0),
        (0.05, 0.2, 10.0),
    ]
}

fn budget(mut s: Scenario, o: &SweepOptions) -> Scenario {
    s.seed = o.seed;
    s.min_errors = o.stop.min_errors;
    s.max_bits = o.stop.max_bits;
    s
}

fn write_curve(out: &mut OutputDir, stem: &str, s: &Scenario) -> Result<(), HarnessError> {
    let records = run_ber(s)?;
    out.write(stem, &ber_table(&records), s)?;
    Ok(())
}

fn curves_with_offset(out: &mut OutputDir, o: &SweepOptions, prefix: &str, tau: f64, dft: f64) -> Result<(), HarnessError> {
    for w in curve_waveforms() {
        for m in Modulation::ALL {
            let mut s = budget(Scenario::single_user(w.clone(), m, awgn_grid(m)), o);
            s.users[0].tau = tau;
            s.users[0].dft = dft;
            write_curve(out, &format!("{prefix}_{}_{m}", w.label()), &s)?;
        }
    }
    Ok(())
}

fn required_curves(
    out: &mut OutputDir,
    o: &SweepOptions,
    prefix: &str,
    grid: &[f64],
    apply: impl Fn(&mut UserSpec, f64),
) -> Result<(), HarnessError> {
    for w in main_waveforms() {
        for m in [Modulation::Qam4, Modulation::Qam16] {
            let base = budget(Scenario::single_user(w.clone(), m, vec![0.0]), o);
            let mut rows = Vec::with_capacity(grid.len());
            for &v in grid {
                let mut s = base.clone();
                apply(&mut s.users[0], v);
                let link = s.link()?;
                rows.push((v, required_ebn0(&link, o.target_ber, s.seed, o.stop, o.search)?));
            }
            let config = json!({ "scenario": base, "offsets": grid, "target_ber": o.target_ber, "search": o.search });
            out.write(&format!("{prefix}_{}_{m}", w.label()), &required_table(&rows), config)?;
        }
    }
    Ok(())
}

fn case_label(c: (f64, f64, f64)) -> String {
    format!("tau{}_dft{}_gain{}", c.0, c.1, c.2)
}

fn two_user_grid(out: &mut OutputDir, o: &SweepOptions) -> Result<(), HarnessError> {
    for w in main_waveforms() {
        for m in Modulation::ALL {
            let single = budget(Scenario::new(w.clone(), vec![UserSpec::contiguous(m, TWO_USER_START, 1)], awgn_grid(m)), o);
            write_curve(out, &format!("two_user_{}_{m}_single", w.label()), &single)?;
            for guard in [0, 12] {
                for case in two_user_cases() {
                    let s = budget(Scenario::two_user(w.clone(), m, guard, case, awgn_grid(m)), o);
                    let stem = format!("two_user_{}_{m}_guard{guard}_{}", w.label(), case_label(case));
                    write_curve(out, &stem, &s)?;
                }
            }
        }
    }
    Ok(())
}

fn spectra(out: &mut OutputDir, o: &SweepOptions) -> Result<(), HarnessError> {
    // two 12-subcarrier subbands with a 12-subcarrier guard
    let two = SubbandAllocation::new(12, vec![TWO_USER_START, TWO_USER_START + 24], 12);
    let pair = SubbandAllocation::new(2, vec![PAIR_START], 0);
    let mut slopes = Table::new(["waveform", "slope_db_per_decade", "fit_lo", "fit_hi"]);
    for w in main_waveforms() {
        let cfg = w.config();
        let mut rng = SeededRng::new(o.seed, substream(&[w.kind as u64, 0]));
        let psd = psd_estimate(&cfg, &two, o.symbols, &mut rng)?;
        let mut t = Table::new(["freq_subcarriers", "psd_db"]);
        for (f, p) in psd.freq.iter().zip(&psd.psd_db) {
            t.push(vec![num(*f), num(*p)]);
        }
        let config = json!({ "waveform": w, "allocation": [TWO_USER_START, TWO_USER_START + 24], "symbols": o.symbols });
        out.write(&format!("spectrum_{}", w.label()), &t, config)?;

        let mut rng = SeededRng::new(o.seed, substream(&[w.kind as u64, 1]));
        let psd = psd_estimate(&cfg, &pair, o.symbols, &mut rng)?;
        let slope = oob_slope(&psd, PAIR_CENTRE, OOB_FIT)?;
        slopes.push(vec![w.label(), num(slope), num(OOB_FIT.0), num(OOB_FIT.1)]);
    }
    let config = json!({ "allocation": "one subcarrier pair", "start": PAIR_START, "fit": OOB_FIT, "symbols": o.symbols });
    out.write("oob_slopes", &slopes, config)?;
    Ok(())
}

/// Single-pair allocation used for roll-off fits.
pub const PAIR_START: usize = 64;
pub const PAIR_CENTRE: f64 = PAIR_START as f64 + 0.5;
/// Fit span in subcarrier spacings from the allocation centre (one decade).
pub const OOB_FIT: (f64, f64) = (3.0, 30.0);

fn envelopes(out: &mut OutputDir, o: &SweepOptions) -> Result<(), HarnessError> {
    let alloc = SubbandAllocation::new(12, vec![TWO_USER_START], 0);
    for w in main_waveforms() {
        let cfg = w.config();
        let mut rng = SeededRng::new(o.seed, substream(&[w.kind as u64, 2]));
        let env = time_envelope(&cfg, &alloc, o.symbols, &mut rng)?;
        let analytic = (w.kind == WaveformName::PccOfdm).then(|| envelope_pcc(cfg.n)).transpose()?;
        let peak = analytic.as_ref().map(|a| a.iter().copied().fold(0.0, f64::max));
        let mut t = Table::new(["sample", "envelope", "analytic"]);
        for (i, e) in env.iter().enumerate() {
            let a = match (&analytic, peak) {
                (Some(a), Some(p)) => num(a[i] / p),
                _ => String::new(),
            };
            t.push(vec![i.to_string(), num(*e), a]);
        }
        let config = json!({ "waveform": w, "allocation": [TWO_USER_START], "symbols": o.symbols, "span": cfg.symbol_span() });
        out.write(&format!("envelope_{}", w.label()), &t, config)?;
    }
    Ok(())
}

/// Offsets swept by the surfaces: time `p/N` in steps of one sample up to
/// a quarter symbol, frequency in steps of 0.02 up to two spacings.
const SURFACE_N: usize = 256;
const SURFACE_DELTA: i64 = 16;

fn ici_surfaces(out: &mut OutputDir) -> Result<(), HarnessError> {
    let n = SURFACE_N;
    let time: Vec<f64> = (0..=n / 4).map(|p| p as f64).collect();
    let freq: Vec<f64> = (0..=100).map(|i| f64::from(i) * 0.02).collect();
    for (domain, offsets) in [("time", &time), ("freq", &freq)] {
        for variant in ["plain", "pcc_noweight", "pcc_weight"] {
            let mut t = Table::new(["offset", "delta", "magnitude"]);
            for &x in offsets.iter() {
                let plain = if domain == "time" { ici_time(n, x as usize)? } else { ici_freq(n, x, 0.0)? };
                let m = match variant {
                    "plain" => plain,
                    "pcc_noweight" => ischi(&plain, false)?,
                    _ => ischi(&plain, true)?,
                };
                let size = m.size() as i64;
                let k = size / 2;
                let offset = if domain == "time" { x / n as f64 } else { x };
                for d in -SURFACE_DELTA..=SURFACE_DELTA {
                    let l = (k + d).rem_euclid(size) as usize;
                    t.push(vec![num(offset), d.to_string(), num(m.magnitude(l, k as usize))]);
                }
            }
            let config = json!({ "n": n, "domain": domain, "variant": variant, "delta": SURFACE_DELTA });
            out.write(&format!("ici_{domain}_{variant}"), &t, config)?;
        }
    }
    Ok(())
}

/// Runs one family into `out`.
pub fn sweep(family: Family, o: &SweepOptions, out: &mut OutputDir) -> Result<(), HarnessError> {
    match family {
        Family::AwgnCurves => {
            let mut t = Table::new(["ebn0_db", "ber_4qam", "ber_16qam", "ber_64qam"]);
            for i in -4..=44 {
                let e = f64::from(i) * 0.5;
                let mut row = vec![num(e)];
                row.extend(Modulation::ALL.iter().map(|m| num(theoretical_ber(&m.constellation(), e))));
                t.push(row);
            }
            out.write("awgn_theory", &t, json!({ "kind": "Gray QAM closed form, no overhead" }))?;
            curves_with_offset(out, o, "awgn", 0.0, 0.0)
        }
        Family::TimeOffsetCurves => curves_with_offset(out, o, "tau0.05", 0.05, 0.0),
        Family::FreqOffsetCurves => curves_with_offset(out, o, "dft0.05", 0.0, 0.05),
        Family::RequiredVsTau => required_curves(out, o, "required_vs_tau", &tau_grid(), |u, v| u.tau = v),
        Family::RequiredVsDft => required_curves(out, o, "required_vs_dft", &dft_grid(), |u, v| u.dft = v),
        Family::TwoUserGrid => two_user_grid(out, o),
        Family::Spectra => spectra(out, o),
        Family::Envelopes => envelopes(out, o),
        Family::IciSurfaces => ici_surfaces(out),
    }
}
