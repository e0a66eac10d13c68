use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use privcal::calibration::{self, BinningScheme, Dataset};
use privcal::harness::{self, Factor, GridPreset, SweepConfig, SynthConfig, TrialConfig};
use privcal::{verify, Accounting, Epsilon, InteriorRatio, Method, RecalConfig, SearchConfig};

#[derive(Parser)]
#[command(name = "privcal", version, about = "Differentially private multi-source recalibration")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, env = harness::SEED_ENV, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic miscalibrated logit file.
    Generate {
        #[command(flatten)]
        synth: SynthArgs,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one recalibration and report the model and held-out ECE.
    Calibrate {
        #[arg(long, default_value = "acc-t")]
        method: Method,
        /// Inner method of the one-source baseline.
        #[arg(long, default_value = "ece-t")]
        inner: Method,
        #[arg(long, default_value_t = 100)]
        sources: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[command(flatten)]
        recal: RecalArgs,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Sweep one factor and write per-(method, value) ECE statistics as CSV.
    Sweep {
        #[arg(long, default_value = "epsilon")]
        factor: Factor,
        /// Grid preset supplying the grid, fixed values and trial count.
        #[arg(long, default_value = "desk")]
        preset: GridPreset,
        /// Comma-separated grid values (`inf` allowed for epsilon); overrides the preset.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<String>>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated methods.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "none,one-source,hist-bin,nll-t,ece-t,acc-t"
        )]
        methods: Vec<Method>,
        /// Fixed source count (when not the swept factor).
        #[arg(long)]
        sources: Option<usize>,
        /// Fixed samples per source (when not the swept factor).
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        recal: RecalArgs,
        #[command(flatten)]
        data: DataArgs,
        /// Results CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Laplace and unimodality self-checks; exits nonzero on failure.
    Verify {
        /// Random datasets per unimodality scan.
        #[arg(long, default_value_t = 100)]
        datasets: usize,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Synthetic sample count.
    #[arg(long = "size", default_value_t = 60_000)]
    size: usize,
    /// Standard deviation of the true logits.
    #[arg(long, default_value_t = 3.0)]
    spread: f64,
    /// Logit multiplier; above 1 is overconfident.
    #[arg(long, default_value_t = 2.0)]
    scale: f64,
}

impl SynthArgs {
    fn config(&self, seed: u64) -> SynthConfig {
        SynthConfig {
            classes: self.classes,
            samples: self.size,
            logit_spread: self.spread,
            miscalibration: self.scale,
            seed,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// Logit CSV; a synthetic dataset is generated when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    synth: SynthArgs,
}

impl DataArgs {
    fn load(&self, seed: u64) -> privcal::Result<Dataset> {
        match &self.input {
            Some(path) => harness::load_logits(path),
            None => harness::generate_synthetic(&self.synth.config(seed)),
        }
    }
}

#[derive(Args)]
struct RecalArgs {
    /// Per-source ε (a number or `inf`).
    #[arg(long, default_value = "1.0")]
    epsilon: Epsilon,
    /// Golden-section iterations.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = calibration::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 0.5)]
    tmin: f64,
    #[arg(long, default_value_t = 3.0)]
    tmax: f64,
    /// `worstcase` splits ε over K+2 queries; `paper` uses ε/(K+1) per query.
    #[arg(long, default_value = "worstcase")]
    accounting: Accounting,
    /// Interior-point ratio: `golden` or `truncated` (three-decimal 0.618).
    #[arg(long, default_value = "golden")]
    ratio: InteriorRatio,
}

impl RecalArgs {
    fn config(&self, method: Method) -> privcal::Result<RecalConfig> {
        Ok(RecalConfig {
            method,
            epsilon: self.epsilon,
            search: SearchConfig::minimize(self.tmin, self.tmax, self.k)?.with_ratio(self.ratio),
            scheme: BinningScheme::new(self.bins)?,
            accounting: self.accounting,
            ..RecalConfig::default()
        })
    }
}

fn parse_grid(values: &[String], factor: Factor) -> privcal::Result<Vec<f64>> {
    values
        .iter()
        .map(|v| match factor {
            Factor::Epsilon => v.parse::<Epsilon>().map(Epsilon::value),
            _ => v
                .trim()
                .parse::<f64>()
                .map_err(|_| privcal::Error::Config(format!("invalid grid value {v:?}"))),
        })
        .collect()
}

fn run(cli: Cli) -> privcal::Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Generate { synth, out } => {
            let data = harness::generate_synthetic(&synth.config(seed))?;
            harness::save_logits(&out, &data)?;
            eprintln!("wrote {} samples to {}", data.len(), out.display());
        }
        Command::Calibrate {
            method,
            inner,
            sources,
            samples,
            recal,
            data,
        } => {
            let dataset = data.load(seed)?;
            let mut recal = recal.config(method)?;
            recal.one_source_inner = inner;
            let cfg = TrialConfig {
                recal,
                sources,
                samples,
            };
            let outcome = harness::run_trial(&dataset, &cfg, seed)?;
            let baseline = TrialConfig {
                recal: cfg.recal.clone().with_method(Method::None),
                ..cfg.clone()
            };
            let raw = harness::run_trial(&dataset, &baseline, seed)?;
            let spent = outcome.epsilon_spent.iter().cloned().fold(0.0, f64::max);
            println!("method: {method}");
            println!("model: {}", outcome.model);
            if let Some(t) = outcome.temperature() {
                println!("temperature: {t}");
            }
            println!("test ece: {}", outcome.ece_test);
            println!("uncalibrated test ece: {}", raw.ece_test);
            println!("max epsilon spent per source: {spent}");
            if outcome.overdrawn() {
                println!("warning: paper-literal accounting overdrew source ledgers");
            }
        }
        Command::Sweep {
            factor,
            preset,
            grid,
            trials,
            methods,
            sources,
            samples,
            recal,
            data,
            out,
        } => {
            let dataset = data.load(seed)?;
            let mut cfg = SweepConfig::from_preset(preset, factor, methods, seed);
            if let Some(grid) = grid {
                cfg.grid = parse_grid(&grid, factor)?;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = sources {
                cfg.sources = s;
            }
            if let Some(s) = samples {
                cfg.samples = s;
            }
            if factor != Factor::Epsilon {
                cfg.epsilon = recal.epsilon;
            }
            cfg.base = recal.config(Method::None)?;
            let rows = harness::run_sweep(&cfg, &dataset)?;
            match out {
                Some(path) => harness::write_results(BufWriter::new(File::create(path)?), &rows)?,
                None => harness::write_results(io::stdout().lock(), &rows)?,
            }
        }
        Command::Verify { datasets } => {
            let lines = verify::run_checks(seed, datasets)?;
            let mut stdout = io::stdout().lock();
            for line in &lines {
                let status = if line.passed { "PASS" } else { "FAIL" };
                writeln!(stdout, "{status} {}: {}", line.name, line.detail)?;
            }
            return Ok(lines.iter().all(|l| l.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
