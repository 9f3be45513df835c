use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcwave::harness::output::{ber_table, matrix_table, num, required_table, Format, OutputDir, Table};
use mcwave::harness::sweep::{sweep, Family, SweepOptions};
use mcwave::harness::{
    required_ebn0, run_ber, HarnessError, Modulation, Scenario, SearchSettings, StopRule, WaveformName, WaveformSpec,
};
use mcwave_core::analysis::{ici_freq, ici_time, ischi, psd_estimate, time_envelope};
use mcwave_core::numerics::SeededRng;
use mcwave_core::waveforms::SubbandAllocation;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "mcwave", version, about = "Uplink multicarrier waveform experiments: BER, required Eb/N0, spectra, ICI")]
struct Cli {
    /// Scenario file (TOML); quick flags are ignored when given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WaveformArg {
    Cp,
    Pcc,
    PccNoweight,
    Ufmc,
}

impl WaveformArg {
    fn spec(self) -> WaveformSpec {
        let mut s = WaveformSpec::new(match self {
            WaveformArg::Cp => WaveformName::CpOfdm,
            WaveformArg::Pcc | WaveformArg::PccNoweight => WaveformName::PccOfdm,
            WaveformArg::Ufmc => WaveformName::Ufmc,
        });
        s.pcc_weighting = self != WaveformArg::PccNoweight;
        s
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum IciKind {
    Time,
    Freq,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PccArg {
    None,
    Unweighted,
    Weighted,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AllocArg {
    /// One 12-subcarrier subband.
    Subband,
    /// Two subbands separated by a 12-subcarrier guard.
    TwoUser,
    /// A single subcarrier pair.
    Pair,
    /// The default single-user band (20 subbands).
    Wide,
}

#[derive(Args, Debug, Clone)]
struct Quick {
    #[arg(long, value_enum, default_value_t = WaveformArg::Cp)]
    waveform: WaveformArg,
    #[arg(long = "mod", default_value = "4qam", value_parser = parse_mod)]
    modulation: Modulation,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dft: f64,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_bits: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BER over an Eb/N0 grid.
    Ber {
        #[command(flatten)]
        quick: Quick,
        /// Comma-separated Eb/N0 values in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ebn0: Option<Vec<f64>>,
    },
    /// Eb/N0 needed for a target BER.
    Required {
        #[command(flatten)]
        quick: Quick,
        #[arg(long)]
        target: Option<f64>,
    },
    /// One canonical experiment family.
    Sweep {
        #[arg(long)]
        family: String,
        #[arg(long)]
        min_errors: Option<u64>,
        #[arg(long)]
        max_bits: Option<u64>,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        symbols: Option<usize>,
    },
    /// ICI or ISCHI magnitude matrix.
    Ici {
        #[arg(long, value_enum)]
        kind: IciKind,
        #[arg(long = "N", default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dft: f64,
        #[arg(long, value_enum, default_value_t = PccArg::None)]
        pcc: PccArg,
    },
    /// Welch spectrum of a random-data transmit stream.
    Psd {
        #[arg(long, value_enum, default_value_t = WaveformArg::Cp)]
        waveform: WaveformArg,
        #[arg(long, value_enum, default_value_t = AllocArg::TwoUser)]
        alloc: AllocArg,
        #[arg(long, default_value_t = 400)]
        symbols: usize,
    },
    /// RMS time envelope of one symbol.
    Envelope {
        #[arg(long, value_enum, default_value_t = WaveformArg::Cp)]
        waveform: WaveformArg,
        #[arg(long, default_value_t = 400)]
        symbols: usize,
    },
}

fn parse_mod(s: &str) -> Result<Modulation, String> {
    Modulation::parse(s).ok_or_else(|| format!("unknown modulation `{s}` (4qam, 16qam, 64qam)"))
}

fn allocation(a: AllocArg) -> SubbandAllocation {
    match a {
        AllocArg::Subband => SubbandAllocation::new(12, vec![40], 0),
        AllocArg::TwoUser => SubbandAllocation::new(12, vec![40, 64], 12),
        AllocArg::Pair => SubbandAllocation::new(2, vec![64], 0),
        AllocArg::Wide => SubbandAllocation::contiguous(8, 20, 12),
    }
}

impl Cli {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    /// Scenario from `--config`, or the default single user built from the
    /// quick flags.
    fn scenario(&self, quick: &Quick, grid: Vec<f64>) -> Result<Scenario, HarnessError> {
        let mut s = match &self.config {
            Some(path) => Scenario::from_file(path)?,
            None => {
                let mut s = Scenario::single_user(quick.waveform.spec(), quick.modulation, grid);
                s.users[0].tau = quick.tau;
                s.users[0].dft = quick.dft;
                s
            }
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(m) = quick.min_errors {
            s.min_errors = m;
        }
        if let Some(b) = quick.max_bits {
            s.max_bits = b;
        }
        s.validate()?;
        Ok(s)
    }
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Ber { quick, ebn0 } => {
            let grid = ebn0.clone().unwrap_or_else(|| vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
            let mut s = cli.scenario(quick, grid)?;
            if cli.config.is_some() {
                if let Some(g) = ebn0 {
                    s.ebn0_db = g.clone();
                    s.validate()?;
                }
            }
            let records = run_ber(&s)?;
            let mut out = OutputDir::create(&cli.out_dir, cli.format(), "ber", s.seed)?;
            let path = out.write("ber", &ber_table(&records), &s)?;
            out.finish()?;
            for r in &records {
                println!("{:>6} dB  BER {:.4e}  ({} / {})", r.ebn0_db, r.ber, r.bit_errors, r.bits);
            }
            eprintln!("wrote {}", path.display());
        }
        Command::Required { quick, target } => {
            let mut s = cli.scenario(quick, vec![0.0])?;
            let target = target
                .or(s.target_ber)
                .ok_or_else(|| HarnessError::Invalid("no target BER (use --target or target_ber)".into()))?;
            s.target_ber = Some(target);
            s.validate()?;
            let stop = StopRule::new(s.min_errors, s.max_bits);
            let r = required_ebn0(&s.link()?, target, s.seed, stop, SearchSettings::default())?;
            let offset = s.users[s.measured_user].tau.max(s.users[s.measured_user].dft);
            let mut out = OutputDir::create(&cli.out_dir, cli.format(), "required", s.seed)?;
            out.write("required", &required_table(&[(offset, r)]), &s)?;
            out.finish()?;
            if r.saturated {
                println!("saturated: target {target} not reached by {} dB", r.ebn0_db);
            } else {
                println!("{:.3}", r.ebn0_db);
            }
        }
        Command::Sweep { family, min_errors, max_bits, target, symbols } => {
            let family: Family = family.parse()?;
            let mut o = SweepOptions { seed, ..SweepOptions::default() };
            if let Some(m) = min_errors {
                o.stop.min_errors = *m;
            }
            if let Some(b) = max_bits {
                o.stop.max_bits = *b;
            }
            if let Some(t) = target {
                o.target_ber = *t;
            }
            if let Some(n) = symbols {
                o.symbols = *n;
            }
            let mut out = OutputDir::create(&cli.out_dir, cli.format(), family.name(), seed)?;
            sweep(family, &o, &mut out)?;
            let manifest = out.finish()?;
            eprintln!("wrote {}", manifest.display());
        }
        Command::Ici { kind, n, p, dft, pcc } => {
            let plain = match kind {
                IciKind::Time => ici_time(*n, *p)?,
                IciKind::Freq => ici_freq(*n, *dft, 0.0)?,
            };
            let m = match pcc {
                PccArg::None => plain,
                PccArg::Unweighted => ischi(&plain, false)?,
                PccArg::Weighted => ischi(&plain, true)?,
            };
            let what = match kind {
                IciKind::Time => format!("time offset p={p}"),
                IciKind::Freq => format!("frequency offset dfT={dft}"),
            };
            let comment = format!("|Y(l,k)| for N={n}, {what}, pcc={pcc:?}; rows l (output), columns k (input)");
            let table = matrix_table(comment, m.size(), |l, k| m.magnitude(l, k));
            let mut out = OutputDir::create(&cli.out_dir, cli.format(), "ici", seed)?;
            let config = json!({ "kind": format!("{kind:?}"), "n": n, "p": p, "dft": dft, "pcc": format!("{pcc:?}") });
            let path = out.write("ici", &table, config)?;
            out.finish()?;
            eprintln!("wrote {}", path.display());
        }
        Command::Psd { waveform, alloc, symbols } => {
            let spec = waveform.spec();
            let mut rng = SeededRng::new(seed, 0);
            let psd = psd_estimate(&spec.config(), &allocation(*alloc), *symbols, &mut rng)?;
            let mut t = Table::new(["freq_subcarriers", "psd_db"]);
            for (f, v) in psd.freq.iter().zip(&psd.psd_db) {
                t.push(vec![num(*f), num(*v)]);
            }
            let mut out = OutputDir::create(&cli.out_dir, cli.format(), "psd", seed)?;
            let config = json!({ "waveform": spec, "alloc": format!("{alloc:?}"), "symbols": symbols });
            let path = out.write("psd", &t, config)?;
            out.finish()?;
            eprintln!("wrote {}", path.display());
        }
        Command::Envelope { waveform, symbols } => {
            let spec = waveform.spec();
            let mut rng = SeededRng::new(seed, 0);
            let env = time_envelope(&spec.config(), &allocation(AllocArg::Subband), *symbols, &mut rng)?;
            let mut t = Table::new(["sample", "envelope"]);
            for (i, e) in env.iter().enumerate() {
                t.push(vec![i.to_string(), num(*e)]);
            }
            let mut out = OutputDir::create(&cli.out_dir, cli.format(), "envelope", seed)?;
            let config = json!({ "waveform": spec, "symbols": symbols });
            let path = out.write("envelope", &t, config)?;
            out.finish()?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
