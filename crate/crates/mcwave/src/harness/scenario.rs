//! Experiment description read from TOML, with field-level validation and a
//! stable digest.
//!
//! ```toml
//! seed = 1
//! measured_user = 0
//! frame_symbols = 20
//! ebn0_db = [0.0, 2.0, 4.0, 6.0]
//! target_ber = 1e-2
//! min_errors = 200
//! max_bits = 20000000
//!
//! [waveform]
//! kind = "pcc-ofdm"   # "cp-ofdm" | "pcc-ofdm" | "ufmc"
//! n = 256
//! n_cp = 32           # cp-ofdm
//! filter_len = 33     # ufmc
//! pcc_weighting = true
//!
//! [[users]]
//! modulation = "16qam"
//! subband_size = 12
//! start_indices = [100]
//! tau = 0.0
//! dft = 0.0
//! gain_db = 0.0
//! ```

use std::fmt;
use std::path::Path;

use mcwave_core::link::LinkSetup;
use mcwave_core::modem::Constellation;
use mcwave_core::uplink::UserScenario;
use mcwave_core::waveforms::{SubbandAllocation, WaveformConfig, WaveformKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveformName {
    #[serde(rename = "cp-ofdm", alias = "cp", alias = "ofdm")]
    CpOfdm,
    #[serde(rename = "pcc-ofdm", alias = "pcc")]
    PccOfdm,
    #[serde(rename = "ufmc")]
    Ufmc,
}

impl WaveformName {
    pub fn kind(self) -> WaveformKind {
        match self {
            WaveformName::CpOfdm => WaveformKind::CpOfdm,
            WaveformName::PccOfdm => WaveformKind::PccOfdm,
            WaveformName::Ufmc => WaveformKind::Ufmc,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            WaveformName::CpOfdm => "cp-ofdm",
            WaveformName::PccOfdm => "pcc-ofdm",
            WaveformName::Ufmc => "ufmc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "4qam", alias = "qpsk")]
    Qam4,
    #[serde(rename = "16qam")]
    Qam16,
    #[serde(rename = "64qam")]
    Qam64,
}

impl Modulation {
    pub const ALL: [Modulation; 3] = [Modulation::Qam4, Modulation::Qam16, Modulation::Qam64];

    pub fn order(self) -> usize {
        match self {
            Modulation::Qam4 => 4,
            Modulation::Qam16 => 16,
            Modulation::Qam64 => 64,
        }
    }

    pub fn constellation(self) -> Constellation {
        match self {
            Modulation::Qam4 => Constellation::qam4(),
            Modulation::Qam16 => Constellation::qam16(),
            Modulation::Qam64 => Constellation::qam64(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Modulation::Qam4 => "4qam",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "4qam" | "qpsk" | "4" => Some(Modulation::Qam4),
            "16qam" | "16" => Some(Modulation::Qam16),
            "64qam" | "64" => Some(Modulation::Qam64),
            _ => None,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSpec {
    pub kind: WaveformName,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_n_cp")]
    pub n_cp: usize,
    #[serde(default = "default_filter_len")]
    pub filter_len: usize,
    #[serde(default = "default_true")]
    pub pcc_weighting: bool,
    #[serde(default)]
    pub pcc_cp: usize,
    #[serde(default = "default_sidelobe")]
    pub sidelobe_db: f64,
}

impl WaveformSpec {
    pub fn new(kind: WaveformName) -> Self {
        WaveformSpec {
            kind,
            n: default_n(),
            n_cp: default_n_cp(),
            filter_len: default_filter_len(),
            pcc_weighting: true,
            pcc_cp: 0,
            sidelobe_db: default_sidelobe(),
        }
    }

    /// Core configuration; fields that do not apply to `kind` are dropped.
    pub fn config(&self) -> WaveformConfig {
        let mut cfg = match self.kind {
            WaveformName::CpOfdm => WaveformConfig::cp_ofdm(self.n, self.n_cp),
            WaveformName::PccOfdm => {
                let mut c = WaveformConfig::pcc_ofdm(self.n, self.pcc_weighting);
                c.pcc_cp = self.pcc_cp;
                c
            }
            WaveformName::Ufmc => WaveformConfig::ufmc(self.n, self.filter_len),
        };
        cfg.sidelobe_db = self.sidelobe_db;
        cfg
    }

    /// Short name used in file names, e.g. `pcc-ofdm` or `pcc-ofdm-noweight`.
    pub fn label(&self) -> String {
        if self.kind == WaveformName::PccOfdm && !self.pcc_weighting {
            "pcc-ofdm-noweight".into()
        } else {
            self.kind.label().into()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    pub modulation: Modulation,
    #[serde(default = "default_subband")]
    pub subband_size: usize,
    pub start_indices: Vec<usize>,
    #[serde(default)]
    pub guard: usize,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub dft: f64,
    #[serde(default)]
    pub gain_db: f64,
}

impl UserSpec {
    /// `count` contiguous subbands of 12 starting at subcarrier `first`.
    pub fn contiguous(modulation: Modulation, first: usize, count: usize) -> Self {
        UserSpec {
            modulation,
            subband_size: default_subband(),
            start_indices: (0..count).map(|i| first + i * default_subband()).collect(),
            guard: 0,
            tau: 0.0,
            dft: 0.0,
            gain_db: 0.0,
        }
    }

    pub fn with_offsets(mut self, tau: f64, dft: f64) -> Self {
        self.tau = tau;
        self.dft = dft;
        self
    }

    pub fn with_gain_db(mut self, gain_db: f64) -> Self {
        self.gain_db = gain_db;
        self
    }

    pub fn user(&self) -> UserScenario {
        let alloc = SubbandAllocation::new(self.subband_size, self.start_indices.clone(), self.guard);
        UserScenario::new(alloc, self.modulation.constellation())
            .with_offsets(self.tau, self.dft)
            .with_gain_db(self.gain_db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub measured_user: usize,
    #[serde(default = "default_frame_symbols")]
    pub frame_symbols: usize,
    pub ebn0_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_ber: Option<f64>,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_bits")]
    pub max_bits: u64,
    pub waveform: WaveformSpec,
    pub users: Vec<UserSpec>,
}

fn default_n() -> usize {
    256
}
fn default_n_cp() -> usize {
    32
}
fn default_filter_len() -> usize {
    33
}
fn default_true() -> bool {
    true
}
fn default_sidelobe() -> f64 {
    40.0
}
fn default_subband() -> usize {
    12
}
fn default_seed() -> u64 {
    1
}
fn default_frame_symbols() -> usize {
    20
}
fn default_min_errors() -> u64 {
    200
}
fn default_max_bits() -> u64 {
    20_000_000
}

/// Default single-user band: 20 subbands of 12 starting at subcarrier 8.
pub const SINGLE_USER_FIRST: usize = 8;
pub const SINGLE_USER_SUBBANDS: usize = 20;
/// First subcarrier of user 1 in two-user scenarios.
pub const TWO_USER_START: usize = 40;

impl Scenario {
    pub fn new(waveform: WaveformSpec, users: Vec<UserSpec>, ebn0_db: Vec<f64>) -> Self {
        Scenario {
            seed: default_seed(),
            measured_user: 0,
            frame_symbols: default_frame_symbols(),
            ebn0_db,
            target_ber: None,
            min_errors: default_min_errors(),
            max_bits: default_max_bits(),
            waveform,
            users,
        }
    }

    /// One user on the default wide band, no offsets.
    pub fn single_user(waveform: WaveformSpec, modulation: Modulation, ebn0_db: Vec<f64>) -> Self {
        let user = UserSpec::contiguous(modulation, SINGLE_USER_FIRST, SINGLE_USER_SUBBANDS);
        Scenario::new(waveform, vec![user], ebn0_db)
    }

    /// User 1 (measured, synchronized) on one subband, then `guard` empty
    /// subcarriers, then the interferer on the next subband.
    pub fn two_user(
        waveform: WaveformSpec,
        modulation: Modulation,
        guard: usize,
        interferer: (f64, f64, f64),
        ebn0_db: Vec<f64>,
    ) -> Self {
        let (tau, dft, gain_db) = interferer;
        let u1 = UserSpec::contiguous(modulation, TWO_USER_START, 1);
        let mut u2 = UserSpec::contiguous(modulation, TWO_USER_START + 12 + guard, 1)
            .with_offsets(tau, dft)
            .with_gain_db(gain_db);
        u2.guard = guard;
        Scenario::new(waveform, vec![u1, u2], ebn0_db)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|r| line_col(text, r.start))
                .unwrap_or((0, 0));
            ConfigError::Parse { line, column, message: e.message().to_string() }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario is representable in TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: String, message: String| Err(ConfigError::Field { field, message });
        if self.users.is_empty() {
            return bad("users".into(), "at least one user is required".into());
        }
        if self.measured_user >= self.users.len() {
            return bad(
                "measured_user".into(),
                format!("{} but only {} user(s) defined", self.measured_user, self.users.len()),
            );
        }
        if self.ebn0_db.is_empty() {
            return bad("ebn0_db".into(), "grid is empty".into());
        }
        if self.ebn0_db.iter().any(|v| !v.is_finite()) {
            return bad("ebn0_db".into(), "values must be finite".into());
        }
        if self.ebn0_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("ebn0_db".into(), "grid must be strictly increasing".into());
        }
        if let Some(t) = self.target_ber {
            if !(t > 0.0 && t < 0.5) {
                return bad("target_ber".into(), format!("{t} is outside (0, 0.5)"));
            }
        }
        if self.frame_symbols < 3 {
            return bad("frame_symbols".into(), "at least 3 symbols per frame".into());
        }
        if self.min_errors < 100 {
            return bad("min_errors".into(), format!("{} is below 100", self.min_errors));
        }
        if self.max_bits == 0 {
            return bad("max_bits".into(), "must be positive".into());
        }
        let cfg = self.waveform.config();
        if let Err(e) = cfg.validate() {
            return bad("waveform".into(), e.to_string());
        }
        for (i, u) in self.users.iter().enumerate() {
            let core_user = u.user();
            if let Err(e) = core_user.validate() {
                return bad(format!("users[{i}]"), e.to_string());
            }
            if let Err(e) = core_user.alloc.validate(&cfg) {
                return bad(format!("users[{i}].start_indices"), e.to_string());
            }
        }
        self.link().map_err(|e| ConfigError::Field { field: "users".into(), message: e.to_string() })?;
        Ok(())
    }

    pub fn link(&self) -> mcwave_core::Result<LinkSetup> {
        LinkSetup::new(
            &self.waveform.config(),
            self.users.iter().map(UserSpec::user).collect(),
            self.measured_user,
            self.frame_symbols,
        )
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}
