use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use heraldsim::coincidence::select;
use heraldsim::experiment::count_coincidences;
use heraldsim::units::{parse_exact_quantity, parse_quantity, round_fs, travel_fs, Dimension};
use heraldsim::{
    design, fringe_visibility, io, match_streams, ratio, run_experiment_a, run_experiment_b, run_phase, selftest,
    switching_contrast, Channel, DesignInputs, DetectionEvent, Detector, EventModel, Experiment, PhaseSetting,
    PhotonLocalityModel, RunConfig, SourceStrategy, Stage, SweepResult,
};

/// Grating-filtered SPDC pairs and a heralded unequal-path interferometer.
#[derive(Parser)]
#[command(name = "heraldsim", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the grating and interferometer design table.
    Design(DesignArgs),
    /// Run the configured experiment once and write events.csv and summary.txt.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run experiment B over a list of R2 displacements and write a sweep CSV.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma separated displacements, e.g. `0,0.125um,0.25um`.
        #[arg(long)]
        displacements: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute coincidence counts from an event CSV.
    Analyze {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Run the built-in oracle checks.
    Selftest {
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    width: String,
    /// sin θ - sin θ0.
    #[arg(long, default_value = "1")]
    sin_diff: String,
    #[arg(long)]
    pump: Option<String>,
    /// Wavelength for resolving power and passband (default: the pump).
    #[arg(long)]
    wavelength: Option<String>,
    #[arg(long, default_value_t = 0.9)]
    target_visibility: f64,
    /// Coincidence half width.
    #[arg(long)]
    window: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    model: Option<EventModel>,
    #[arg(long)]
    locality: Option<PhotonLocalityModel>,
    #[arg(long)]
    strategy: Option<SourceStrategy>,
}

impl Overrides {
    fn load(&self, path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = text.parse().with_context(|| format!("in {}", path.display()))?;
        if let Some(m) = self.model {
            cfg.model = m;
        }
        if let Some(l) = self.locality {
            cfg.locality = l;
        }
        if let Some(s) = self.strategy {
            cfg.source.strategy = s;
        }
        for w in cfg.validate()? {
            eprintln!("warning: {w}");
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Design(args) => print!("{}", design_table(&args)?),
        Command::Simulate { run, out } => simulate(&run, &out)?,
        Command::Sweep {
            run,
            displacements,
            out,
        } => sweep(&run, displacements.as_deref(), &out)?,
        Command::Analyze {
            overrides,
            config,
            events,
        } => {
            let cfg = overrides.load(&config)?;
            let file = File::open(&events).with_context(|| format!("opening {}", events.display()))?;
            let events = io::read_events(BufReader::new(file)).with_context(|| format!("in {}", events.display()))?;
            print!("{}", coincidence_block(&cfg, &events)?);
        }
        Command::Selftest { seed } => {
            let checks = selftest::run(seed);
            for c in &checks {
                println!("{c}");
            }
            if !selftest::all_passed(&checks) {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn design_table(args: &DesignArgs) -> Result<String> {
    let len = |s: &str| parse_exact_quantity(s, Dimension::Length);
    let inputs = DesignInputs {
        width: len(&args.width)?,
        sin_theta: parse_exact_quantity(&args.sin_diff, Dimension::Dimensionless)?,
        sin_theta0: ratio(0, 1),
        wavelength: args.wavelength.as_deref().map(len).transpose()?,
        pump_wavelength: args.pump.as_deref().map(len).transpose()?,
        target_visibility: args.target_visibility,
        window: args
            .window
            .as_deref()
            .map(|w| parse_exact_quantity(w, Dimension::Time))
            .transpose()?,
    };
    Ok(design(&inputs)?.to_string())
}

fn arm_delay_fs(cfg: &RunConfig, setting: &PhaseSetting<f64>) -> Result<i64> {
    let geom = cfg.interferometer_geometry()?;
    Ok(round_fs(travel_fs(geom.effective_difference(setting))))
}

/// Counts derivable from the event stream alone; `simulate` and `analyze`
/// print the same block.
fn coincidence_block(cfg: &RunConfig, events: &[DetectionEvent]) -> Result<String> {
    let mut s = String::from("[coincidences]\n");
    let n = |d| select(events, d).len();
    writeln!(
        s,
        "d1_events = {}\nd2_events = {}\nd3_events = {}",
        n(Detector::D1),
        n(Detector::D2),
        n(Detector::D3)
    )?;
    writeln!(s, "window_half_width_fs = {}", cfg.window_fs())?;
    match cfg.experiment {
        Experiment::A => {
            let (d3, d1) = (select(events, Detector::D3), select(events, Detector::D1));
            writeln!(s, "d3_d1 = {}", match_streams(&d3, &d1, cfg.window()?)?.count())?;
        }
        Experiment::B => {
            let delay = arm_delay_fs(cfg, &cfg.phase_setting())?;
            let c = count_coincidences(events, cfg.window_fs(), delay)?;
            writeln!(s, "arm_delay_fs = {delay}")?;
            writeln!(s, "heralded_d1 = {}\nheralded_d2 = {}", c.heralded_d1, c.heralded_d2)?;
            writeln!(s, "delayed_d1 = {}\ndelayed_d2 = {}", c.delayed_d1, c.delayed_d2)?;
        }
    }
    Ok(s)
}

fn simulate(args: &RunArgs, out: &Path) -> Result<()> {
    let cfg = args.overrides.load(&args.config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut summary = format!("seed = {}\n\n", args.seed);
    let events = match cfg.experiment {
        Experiment::A => {
            let report = run_experiment_a(&cfg, args.seed)?;
            summary.push_str("[synchronization]\n");
            for st in [&report.before, &report.localized, &report.dispersed] {
                let frac = st.fraction().map_or("n/a".to_string(), |f| format!("{f:.6}"));
                writeln!(
                    summary,
                    "{}: transmitted {} of {}, both detected {}, within window {} ({frac}), peak dt {} fs",
                    match st.stage {
                        Stage::BeforeGrating => "before grating".to_string(),
                        Stage::After(model) => model.to_string(),
                    },
                    st.transmitted,
                    st.pairs_in,
                    st.both_detected,
                    st.synchronized,
                    st.histogram.peak().map_or("n/a".to_string(), |p| p.to_string()),
                )?;
            }
            report.events
        }
        Experiment::B => {
            let run = run_phase(&cfg, &cfg.phase_setting(), args.seed)?;
            writeln!(
                summary,
                "[interferometer]\nphase_rad = {:?}\nvisibility = {:?}\nsignals_in = {}\n",
                run.row.phase, run.visibility, run.row.total_signal
            )?;
            run.events
        }
    };
    summary.push('\n');
    summary.push_str(&coincidence_block(&cfg, &events)?);

    let mut w = BufWriter::new(File::create(out.join("events.csv"))?);
    io::write_events(&mut w, &events)?;
    w.flush()?;
    fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn sweep(args: &RunArgs, displacements: Option<&str>, out: &Path) -> Result<()> {
    let cfg = args.overrides.load(&args.config)?;
    let settings = match displacements {
        Some(list) => list
            .split(',')
            .map(|d| parse_quantity(d, Dimension::Length).map(PhaseSetting::new))
            .collect::<heraldsim::Result<Vec<_>>>()?,
        None => cfg.sweep_settings()?,
    };
    if settings.is_empty() {
        bail!("no displacements given");
    }
    let outcome = run_experiment_b(&cfg, &settings, args.seed)?;
    let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    io::write_sweep(&mut w, &outcome.sweep)?;
    w.flush()?;
    print!("{}", sweep_summary(&outcome.sweep)?);
    Ok(())
}

fn sweep_summary(sweep: &SweepResult) -> Result<String> {
    let mut s = String::new();
    for (name, ch) in [("heralded_d1", Channel::HeraldedD1), ("delayed_d1", Channel::DelayedD1)] {
        match fringe_visibility(sweep, ch)? {
            Some(v) => writeln!(
                s,
                "visibility {name} = {:.4} +- {:.4}",
                v.extremal.value, v.extremal.sigma
            )?,
            None => writeln!(s, "visibility {name} = n/a")?,
        }
    }
    match switching_contrast(sweep)? {
        Some(c) => writeln!(s, "switching_contrast = {:.4} +- {:.4}", c.value, c.sigma)?,
        None => writeln!(s, "switching_contrast = n/a (needs phases near 0 and pi)")?,
    }
    Ok(s)
}
