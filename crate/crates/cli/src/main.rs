//! `pfchan`: command-line front end for the page-fault covert channel.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use pagefault_channel::harness::{
    calibrate_page_gap, emit_report, parse_duration_ns, parse_size, run_sweep, summary_table, write_csv, write_single,
    Backend, Settings, SweepResult, SweepSpec, SweepVariable,
};
use pagefault_channel::live::{self, open_region, probe_capabilities, spy_receive, trojan_send};
use pagefault_channel::sim::simulate_channel;
use pagefault_channel::{ConfigError, Error, Payload, Result, TransmissionReport};

#[derive(Parser, Debug)]
#[command(name = "pfchan", version, about = "Page-fault ordering covert channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One transmission on the simulator.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        payload: PayloadArgs,
        /// Write the access trace (`tick,thread,page,fault_kind`) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Live trojan: transmit a payload through a shared file.
    Send {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        live: LiveArgs,
        #[command(flatten)]
        payload: PayloadArgs,
    },
    /// Live spy: receive and score against the expected payload.
    Receive {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        live: LiveArgs,
        #[command(flatten)]
        payload: PayloadArgs,
    },
    /// Sweep one variable over a grid of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        variable: Variable,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Sweep the page gap and report the one with the lowest error rate.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Report which live-backend capabilities this host provides.
    Probe {
        #[command(flatten)]
        common: Common,
        /// Directory to probe in; should be on the filesystem holding the region file.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// `key=value` file with channel and simulator parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    payload_bits: Option<String>,
    #[arg(long)]
    page_gap: Option<String>,
    #[arg(long)]
    region_size: Option<String>,
    #[arg(long)]
    sync_period: Option<String>,
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct PayloadArgs {
    /// Payload as hex, most significant bit of each nibble first.
    #[arg(long)]
    payload_hex: Option<String>,
    /// Payload as a string of 0s and 1s.
    #[arg(long)]
    bits: Option<String>,
}

#[derive(Args, Debug)]
struct LiveArgs {
    /// Shared, readable file backing the channel.
    #[arg(long)]
    region_file: PathBuf,
    /// Slot 0 start, in nanoseconds since the Unix epoch.
    #[arg(long)]
    epoch: u64,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Comma-separated values; defaults to the built-in grid.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long, value_enum, default_value_t = BackendKind::Sim)]
    backend: BackendKind,
    /// Required with `--backend live`.
    #[arg(long)]
    region_file: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BackendKind {
    Sim,
    Live,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
#[value(rename_all = "snake_case")]
enum Variable {
    PayloadBits,
    PageGap,
    RegionSize,
    BitRate,
}

impl From<Variable> for SweepVariable {
    fn from(v: Variable) -> Self {
        match v {
            Variable::PayloadBits => SweepVariable::PayloadBits,
            Variable::PageGap => SweepVariable::PageGap,
            Variable::RegionSize => SweepVariable::RegionSize,
            Variable::BitRate => SweepVariable::BitRate,
        }
    }
}

impl Common {
    /// Defaults, then the config file, then flags, then `--set` in order.
    fn settings(&self) -> Result<Settings> {
        let mut pairs = match &self.config {
            Some(path) => Settings::read_file(path)?,
            None => Vec::new(),
        };
        let flags = [
            ("payload_bits", &self.payload_bits),
            ("page_gap", &self.page_gap),
            ("region_size", &self.region_size),
            ("sync_period", &self.sync_period),
        ];
        pairs.extend(
            flags
                .iter()
                .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))),
        );
        if let Some(seed) = self.seed {
            pairs.push(("seed".into(), seed.to_string()));
        }
        for raw in &self.overrides {
            let (k, v) = raw
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got `{raw}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let settings = Settings::resolve(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        settings.validate()?;
        Ok(settings)
    }
}

impl PayloadArgs {
    fn payload(&self, settings: &Settings) -> Result<Payload> {
        let c = &settings.channel;
        Ok(match (&self.payload_hex, &self.bits) {
            (Some(hex), _) => Payload::from_hex(hex)?,
            (_, Some(bits)) => Payload::from_bit_str(bits)?,
            _ => Payload::random(c.seed, c.payload_bits),
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn io_err(path: Option<&Path>) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into()),
        source: e,
    }
}

fn print_report(report: &TransmissionReport) {
    println!("received {}", report.received);
    println!(
        "bits {}  errors {}  indeterminate {}  ber {:.4}  bandwidth {:.3} bit/s",
        report.payload_bits(),
        report.bit_errors(),
        report.indeterminate_slots(),
        report.ber,
        report.bandwidth_bps
    );
}

fn write_single_out(
    common: &Common,
    settings: &Settings,
    bits: usize,
    report: Option<&TransmissionReport>,
) -> Result<()> {
    if let Some(path) = &common.out {
        write_single(&settings.channel, bits, report, create(path)?).map_err(io_err(Some(path)))?;
    }
    Ok(())
}

fn parse_values(variable: SweepVariable, raw: &[String]) -> Result<Vec<u64>, ConfigError> {
    raw.iter()
        .map(|v| match variable {
            SweepVariable::RegionSize => parse_size("values", v),
            SweepVariable::BitRate => parse_duration_ns("values", v),
            _ => v
                .trim()
                .parse()
                .map_err(|e: std::num::ParseIntError| ConfigError::InvalidValue {
                    key: "values".into(),
                    value: v.clone(),
                    reason: e.to_string(),
                }),
        })
        .collect()
}

fn sweep_spec(common: &Common, variable: SweepVariable, grid: &GridArgs) -> Result<SweepSpec> {
    let settings = common.settings()?;
    let mut spec = SweepSpec::new(variable, settings.channel, settings.sim);
    if !grid.values.is_empty() {
        spec.values = parse_values(variable, &grid.values)?;
    }
    if let Some(r) = grid.repetitions {
        spec.repetitions = r;
    }
    if grid.backend == BackendKind::Live {
        let region_file = grid
            .region_file
            .clone()
            .ok_or_else(|| Error::Usage("--backend live needs --region-file".into()))?;
        spec.backend = Backend::Live { region_file };
    }
    Ok(spec)
}

fn emit(common: &Common, result: &SweepResult) -> Result<()> {
    match &common.out {
        Some(path) => print!("{}", emit_report(result, path)?),
        None => {
            write_csv(result, io::stdout().lock()).map_err(io_err(None))?;
            eprint!("{}", summary_table(result));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, payload, trace } => {
            let settings = common.settings()?;
            let payload = payload.payload(&settings)?;
            let run = simulate_channel(&settings.channel, &settings.sim, &payload)?;
            if run.sender_overruns > 0 {
                warn!("sender overran {} slots", run.sender_overruns);
            }
            if let Some(path) = &trace {
                let mut w = create(path)?;
                run.trace
                    .write_to(&mut w)
                    .and_then(|_| w.flush())
                    .map_err(io_err(Some(path)))?;
            }
            print_report(&run.report);
            write_single_out(&common, &settings, payload.len(), Some(&run.report))
        }
        Command::Send {
            common,
            live: args,
            payload,
        } => {
            let settings = common.settings()?;
            let payload = payload.payload(&settings)?;
            let caps = live::require_capabilities(&args.region_file)?;
            info!("capabilities: {caps}");
            let region = open_region(&args.region_file, &settings.channel)?;
            let log = trojan_send(&region, &settings.channel, &payload, args.epoch)?;
            println!(
                "sent {} bits  overruns {}  unconfirmed evictions {}",
                log.slots.len(),
                log.overruns(),
                log.unconfirmed_evictions()
            );
            write_single_out(&common, &settings, payload.len(), None)
        }
        Command::Receive {
            common,
            live: args,
            payload,
        } => {
            let settings = common.settings()?;
            let expected = payload.payload(&settings)?;
            let caps = live::require_capabilities(&args.region_file)?;
            info!("capabilities: {caps}");
            let region = open_region(&args.region_file, &settings.channel)?;
            let report = spy_receive(&region, &settings.channel, &expected, args.epoch)?;
            print_report(&report);
            write_single_out(&common, &settings, expected.len(), Some(&report))
        }
        Command::Sweep { common, variable, grid } => {
            let spec = sweep_spec(&common, variable.into(), &grid)?;
            emit(&common, &run_sweep(&spec)?)
        }
        Command::Calibrate { common, grid } => {
            let spec = sweep_spec(&common, SweepVariable::PageGap, &grid)?;
            let cal = calibrate_page_gap(&spec)?;
            emit(&common, &cal.result)?;
            println!("best page_gap {}", cal.best_gap);
            Ok(())
        }
        Command::Probe { common, dir } => {
            common.settings()?;
            let dir = dir.unwrap_or_else(std::env::temp_dir);
            let caps = probe_capabilities(&dir);
            println!("{caps}");
            if let Some(path) = &common.out {
                let mut w = create(path)?;
                writeln!(w, "{caps}")
                    .and_then(|_| w.flush())
                    .map_err(io_err(Some(path)))?;
            }
            if caps.ready() {
                Ok(())
            } else {
                Err(Error::Capability(caps))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pfchan: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
