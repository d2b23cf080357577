use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coarray_lab::analysis::{analytical_mse, crb, efficiency_kappa};
use coarray_lab::estimator::{estimate_from_snapshots, Augmentation, DoaOutcome, EstimatorOptions};
use coarray_lab::geometry::{make_array, ArrayKind, Coarray};
use coarray_lab::harness::{emit_outputs, run_experiment, spread_doas, ExperimentConfig, ExperimentKind, ScenarioFile};
use coarray_lab::model::{simulate_snapshots, write_snapshots_csv, SourceScenario};
use coarray_lab::{Error, Result};

/// Coarray MUSIC toolkit for sparse linear arrays.
#[derive(Parser)]
#[command(name = "coarray-lab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print sensor positions, the coarray weight table and Mv.
    Geom {
        /// Array spec: ula:M, coprime:M,N, nested:N1,N2, mra:M, custom:d1,d2,.. or coprime|nested|mra.
        #[arg(long, default_value = "coprime")]
        array: String,
        /// Also write the selection matrix F as CSV.
        #[arg(long)]
        f_csv: Option<PathBuf>,
    },
    /// Simulate snapshots and run DA- or SS-MUSIC.
    Estimate {
        #[arg(long, default_value = "coprime")]
        array: String,
        /// Scenario JSON: {"doas_deg": [...], "powers": [...], "snr_db": x}.
        #[arg(long, conflicts_with = "doas")]
        scenario: Option<PathBuf>,
        /// Comma-separated DOAs in degrees (equal powers).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        doas: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        snr: f64,
        #[arg(short = 'n', long, default_value_t = 1000)]
        snapshots: usize,
        #[arg(long, default_value = "ss")]
        method: String,
        #[arg(long, default_value_t = 0.1)]
        grid_step: f64,
        /// Also dump the simulated snapshots as CSV.
        #[arg(long)]
        dump_snapshots: Option<PathBuf>,
    },
    /// Analytical per-source MSE, CRB trace and efficiency.
    Analyze {
        /// One or more array specs.
        #[arg(long, value_delimiter = ';', default_values_t = ["coprime".to_string(), "nested".to_string(), "mra".to_string()])]
        array: Vec<String>,
        /// Source counts; sources are spread over -60..60 degrees.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
        /// Explicit DOAs in degrees; overrides --k.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        doas: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        snr: Vec<f64>,
        #[arg(short = 'n', long, value_delimiter = ',', default_value = "1000")]
        snapshots: Vec<usize>,
    },
    /// Run a configured experiment and write CSV, plot scripts and a manifest.
    Run {
        /// Built-in desk-scale setup: verify_mse, resolution, efficiency or scaling.
        #[arg(long)]
        preset: Option<String>,
        /// Override the trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SingularCovariance { .. } | Error::CrbUndefined { .. } => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

fn coarray_of(spec: &str) -> Result<Coarray> {
    let kind: ArrayKind = spec.parse()?;
    Ok(Coarray::new(make_array(&kind, 0.5, 1.0)?))
}

/// Output sink: a file inside `--out` or stdout.
fn sink(out: &Option<PathBuf>, name: &str) -> Result<Box<dyn Write>> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Io {
                context: format!("creating {}", dir.display()),
                source: e,
            })?;
            let path = dir.join(name);
            let f = fs::File::create(&path).map_err(|e| Error::Io {
                context: format!("creating {}", path.display()),
                source: e,
            })?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn io_err(ctx: &str) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        context: ctx.to_owned(),
        source: e,
    }
}

fn cmd_geom(g: &Global, array: &str, f_csv: Option<&Path>) -> Result<()> {
    let co = coarray_of(array)?;
    let mut w = sink(&g.out, "geometry.txt")?;
    let e = io_err("writing geometry");
    writeln!(w, "positions: {:?}", co.geometry.positions()).map_err(&e)?;
    writeln!(w, "sensors: {}", co.num_sensors()).map_err(&e)?;
    writeln!(w, "mv: {}", co.mv()).map_err(&e)?;
    writeln!(w, "lag,weight").map_err(&e)?;
    for (lag, wgt) in &co.structure.weights {
        writeln!(w, "{lag},{wgt}").map_err(&e)?;
    }
    if let Some(path) = f_csv {
        let mut text = String::new();
        for r in 0..co.selection.nrows() {
            let row: Vec<String> = co.selection.row(r).iter().map(|v| v.to_string()).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        fs::write(path, text).map_err(io_err(&format!("writing {}", path.display())))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    g: &Global,
    array: &str,
    scenario: Option<&Path>,
    doas: &[f64],
    snr: f64,
    n: usize,
    method: &str,
    grid_step: f64,
    dump: Option<&Path>,
) -> Result<()> {
    let co = coarray_of(array)?;
    let sc = match scenario {
        Some(p) => ScenarioFile::load(p)?.build()?,
        None if doas.is_empty() => return Err(Error::Config("give --scenario or --doas".into())),
        None => SourceScenario::equal_power(doas.iter().map(|d| d.to_radians()).collect(), snr)?,
    };
    if n == 0 {
        return Err(Error::Config("snapshot count must be positive".into()));
    }
    let kind: Augmentation = method.parse()?;
    let opts = EstimatorOptions {
        grid_step_deg: grid_step,
        ..EstimatorOptions::default()
    };
    let y = simulate_snapshots(&co.geometry, &sc, n, g.seed.unwrap_or(0));
    if let Some(path) = dump {
        let f = fs::File::create(path).map_err(io_err(&format!("creating {}", path.display())))?;
        write_snapshots_csv(&y, std::io::BufWriter::new(f)).map_err(io_err("writing snapshots"))?;
    }
    let out = estimate_from_snapshots(&co, &y, sc.num_sources(), kind, &opts)?;
    let mut w = sink(&g.out, "estimate.csv")?;
    let e = io_err("writing estimates");
    writeln!(w, "source,true_deg,estimate_deg,error_deg").map_err(&e)?;
    let mut truth = sc.doas().to_vec();
    truth.sort_by(f64::total_cmp);
    match out {
        DoaOutcome::Resolved(est) => {
            for (i, (t, h)) in truth.iter().zip(&est.doas).enumerate() {
                writeln!(w, "{},{},{},{}", i + 1, t.to_degrees(), h.to_degrees(), (h - t).to_degrees()).map_err(&e)?;
            }
        }
        DoaOutcome::Unresolved { peaks_found } => {
            for (i, t) in truth.iter().enumerate() {
                writeln!(w, "{},{},nan,nan", i + 1, t.to_degrees()).map_err(&e)?;
            }
            eprintln!("warning: only {peaks_found} peaks for {} sources", truth.len());
        }
    }
    Ok(())
}

fn cmd_analyze(g: &Global, arrays: &[String], ks: &[usize], doas: &[f64], snrs: &[f64], ns: &[usize]) -> Result<()> {
    let mut w = sink(&g.out, "analysis.csv")?;
    let e = io_err("writing analysis");
    writeln!(
        w,
        "array,k,snr_db,n_snapshots,source,doa_deg,mse_rad2,mse_deg2,crb_trace_rad2,crb_trace_deg2,kappa,crb_status"
    )
    .map_err(&e)?;
    let layouts: Vec<Vec<f64>> = if doas.is_empty() {
        ks.iter().map(|&k| spread_doas(k)).collect()
    } else {
        vec![doas.to_vec()]
    };
    let deg2 = (180.0 / std::f64::consts::PI).powi(2);
    let (mut defined, mut undefined) = (0, None);
    for spec in arrays {
        let co = coarray_of(spec)?;
        for layout in &layouts {
            for &snr in snrs {
                let sc = SourceScenario::equal_power(layout.iter().map(|d| d.to_radians()).collect(), snr)?;
                for &n in ns {
                    let mse = analytical_mse(&co, &sc, n)?;
                    let (trace, kappa, status) = match crb(&co.geometry, &sc, n) {
                        Ok(r) => {
                            defined += 1;
                            (r.crb.trace(), efficiency_kappa(&r, &mse), "ok")
                        }
                        Err(err @ (Error::CrbUndefined { .. } | Error::SingularCovariance { .. })) => {
                            undefined = Some(err);
                            (f64::NAN, f64::NAN, "undefined")
                        }
                        Err(err) => return Err(err),
                    };
                    for (i, d) in layout.iter().enumerate() {
                        writeln!(
                            w,
                            "{spec},{},{snr},{n},{},{d},{:e},{:e},{:e},{:e},{},{status}",
                            layout.len(),
                            i + 1,
                            mse[(i, i)],
                            mse[(i, i)] * deg2,
                            trace,
                            trace * deg2,
                            kappa
                        )
                        .map_err(&e)?;
                    }
                }
            }
        }
    }
    w.flush().map_err(&e)?;
    // a numerical failure only when no point had a bound
    match undefined {
        Some(err) if defined == 0 => Err(err),
        _ => Ok(()),
    }
}

fn cmd_run(g: &Global, preset: Option<&str>, trials: Option<usize>) -> Result<()> {
    let mut cfg = match (&g.config, preset) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(ExperimentKind::parse(name)?),
        (Some(_), Some(_)) => return Err(Error::Config("give either --config or --preset, not both".into())),
        (None, None) => return Err(Error::Config("run needs --config FILE or --preset NAME".into())),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(out) = &g.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    let dir = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(cfg.experiment.tag()));
    let output = run_experiment(&cfg)?;
    for path in emit_outputs(&output, &cfg, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let g = &cli.global;
    let result = match &cli.command {
        Command::Geom { array, f_csv } => cmd_geom(g, array, f_csv.as_deref()),
        Command::Estimate {
            array,
            scenario,
            doas,
            snr,
            snapshots,
            method,
            grid_step,
            dump_snapshots,
        } => cmd_estimate(
            g,
            array,
            scenario.as_deref(),
            doas,
            *snr,
            *snapshots,
            method,
            *grid_step,
            dump_snapshots.as_deref(),
        ),
        Command::Analyze {
            array,
            k,
            doas,
            snr,
            snapshots,
        } => cmd_analyze(g, array, k, doas, snr, snapshots),
        Command::Run { preset, trials } => cmd_run(g, preset.as_deref(), *trials),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
