//! Command-line front-end: fringe sweeps, CHSH optimization, visibility and
//! success-probability curves, harmonic content. Every output starts with a
//! header recording the fully resolved configuration so a figure can be
//! regenerated from its data file alone. Angles cross the CLI boundary in
//! degrees and are stored and emitted in radians.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use spdc_fuzzy::{
    analysis, chsh, Error, FringePattern, LossChannel, McConfig, MeasurementScheme, Outcome,
    StateSpec,
};
use std::io::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "spdc-fuzzy",
    version,
    about = "Fuzzy dichotomic measurements on multiphoton singlet states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fringe of a fixed photon-number singlet over the analyzer angle.
    Fringe(FringeArgs),
    /// Fringe of the full down-conversion state at a given gain.
    SpdcFringe(SpdcFringeArgs),
    /// Maximize the CHSH parameter over analyzer settings.
    Chsh(CommonArgs),
    /// Visibility and success probability over a threshold sweep.
    Visibility(VisibilityArgs),
    /// Single-side conclusive (success) probability.
    Success(CommonArgs),
    /// Fourier magnitudes of a fringe per harmonic index.
    Harmonics(HarmonicsArgs),
}

#[derive(Args)]
struct StateArgs {
    /// Photon pair number of a single singlet sector.
    #[arg(long)]
    n: Option<usize>,
    /// Nonlinear gain of the down-conversion source.
    #[arg(long)]
    gain: Option<f64>,
    /// Probability mass allowed in the truncated tail of the gain expansion.
    #[arg(long, default_value_t = 1e-6)]
    truncation: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeKind {
    Dichotomic,
    Of,
    Td,
    Parity,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "dichotomic")]
    scheme: SchemeKind,
    /// Minimum count difference of the orthogonality filter.
    #[arg(long)]
    k: Option<u32>,
    /// Minimum total count of the threshold detector.
    #[arg(long)]
    h: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Transmittivity of the loss channel, identical on all four modes.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Number of uniform grid points over [0, 180) degrees.
    #[arg(long, default_value_t = 181)]
    grid: usize,
    /// Explicit analyzer angles in degrees, comma separated (overrides --grid).
    #[arg(long, value_delimiter = ',')]
    thetas_deg: Option<Vec<f64>>,
    /// Estimate outcome statistics by sampling instead of exact convolution.
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel kernels; 0 keeps the default pool.
    #[arg(long, env = "SPDC_FUZZY_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct FringeArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct SpdcFringeArgs {
    #[arg(long)]
    gain: f64,
    #[arg(long, default_value_t = 1e-6)]
    truncation: f64,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct CommonArgs {
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct VisibilityArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_enum)]
    scheme: SchemeKind,
    /// Threshold values to sweep, comma separated (k for of, h for td).
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<u32>,
    /// Outcome pair tracked across the fringe.
    #[arg(long, default_value = "pm")]
    pair: String,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct HarmonicsArgs {
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Outcome pair whose fringe is analyzed.
    #[arg(long, default_value = "pm")]
    pair: String,
    #[command(flatten)]
    run: RunArgs,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let (code, tag) = match e {
            Error::SizeCap { .. } => (3, "size-cap"),
            Error::UndefinedCorrelation
            | Error::TruncationMass { .. }
            | Error::DegenerateFringe(_) => (4, "numeric"),
            _ => (2, "config"),
        };
        eprintln!("error[{tag}]: {e}");
        std::process::exit(code);
    }
}

fn run(cli: Cli) -> spdc_fuzzy::Result<()> {
    match cli.command {
        Command::Fringe(a) => {
            let state = StateSpec::Singlet(a.n);
            fringe_command("fringe", &state, &a.scheme, &a.run)
        }
        Command::SpdcFringe(a) => {
            let state = StateSpec::Spdc(spdc_fuzzy::spdc_weights(a.gain, a.truncation)?);
            fringe_command("spdc-fringe", &state, &a.scheme, &a.run)
        }
        Command::Chsh(a) => chsh_command(&a),
        Command::Visibility(a) => visibility_command(&a),
        Command::Success(a) => success_command(&a),
        Command::Harmonics(a) => harmonics_command(&a),
    }
}

fn resolve_state(args: &StateArgs) -> spdc_fuzzy::Result<StateSpec> {
    match (args.n, args.gain) {
        (Some(n), None) => Ok(StateSpec::Singlet(n)),
        (None, Some(g)) => Ok(StateSpec::Spdc(spdc_fuzzy::spdc_weights(g, args.truncation)?)),
        _ => Err(Error::InvalidParameter(
            "exactly one of --n and --gain must be given".into(),
        )),
    }
}

fn resolve_scheme(args: &SchemeArgs) -> spdc_fuzzy::Result<MeasurementScheme> {
    let reject = |flag: &str| {
        Err(Error::InvalidParameter(format!(
            "--{flag} only applies to --scheme {}",
            if flag == "k" { "of" } else { "td" }
        )))
    };
    match args.scheme {
        SchemeKind::Dichotomic | SchemeKind::Parity => {
            if args.k.is_some() {
                return reject("k");
            }
            if args.h.is_some() {
                return reject("h");
            }
            Ok(match args.scheme {
                SchemeKind::Dichotomic => MeasurementScheme::PureDichotomic,
                _ => MeasurementScheme::Parity,
            })
        }
        SchemeKind::Of => {
            if args.h.is_some() {
                return reject("h");
            }
            let k = args.k.ok_or_else(|| {
                Error::InvalidParameter("--scheme of requires --k".into())
            })?;
            Ok(MeasurementScheme::OrthogonalityFilter { k })
        }
        SchemeKind::Td => {
            if args.k.is_some() {
                return reject("k");
            }
            let h = args.h.ok_or_else(|| {
                Error::InvalidParameter("--scheme td requires --h".into())
            })?;
            Ok(MeasurementScheme::ThresholdDetector { h })
        }
    }
}

fn resolve_grid(run: &RunArgs) -> spdc_fuzzy::Result<Vec<f64>> {
    match &run.thetas_deg {
        Some(degs) => {
            let grid: Vec<f64> = degs.iter().map(|d| d.to_radians()).collect();
            if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(
                    "--thetas-deg must be a strictly increasing, non-empty list".into(),
                ));
            }
            Ok(grid)
        }
        None => analysis::uniform_grid(run.grid),
    }
}

fn resolve_mc(run: &RunArgs) -> spdc_fuzzy::Result<Option<McConfig>> {
    if !run.mc {
        return Ok(None);
    }
    let mut cfg = McConfig::new(run.shots, run.seed)?;
    cfg.workers = run.workers;
    Ok(Some(cfg))
}

fn resolve_pair(spec: &str) -> spdc_fuzzy::Result<(Outcome, Outcome)> {
    let one = |c: u8| match c {
        b'p' => Ok(Outcome::Plus),
        b'm' => Ok(Outcome::Minus),
        b'z' => Ok(Outcome::Inconclusive),
        _ => Err(Error::InvalidParameter(format!(
            "outcome pair must be two of p/m/z, got {spec}"
        ))),
    };
    let bytes = spec.as_bytes();
    if bytes.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "outcome pair must be two of p/m/z, got {spec}"
        )));
    }
    Ok((one(bytes[0])?, one(bytes[1])?))
}

fn state_json(state: &StateSpec) -> Value {
    match state {
        StateSpec::Singlet(n) => json!({ "n": n }),
        StateSpec::Spdc(w) => json!({
            "gain": w.g(),
            "sectors": w.n_max() + 1,
            "truncation_mass": w.truncation_mass(),
        }),
    }
}

fn config_json(
    command: &str,
    state: &StateSpec,
    scheme: MeasurementScheme,
    run: &RunArgs,
    extra: Value,
) -> Value {
    let mut cfg = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "state": state_json(state),
        "scheme": scheme.to_string(),
        "eta": run.eta,
        "mc": run.mc,
    });
    if run.mc {
        cfg["shots"] = json!(run.shots);
        cfg["seed"] = json!(run.seed);
        cfg["workers"] = json!(run.workers);
    }
    if let Some(obj) = extra.as_object() {
        for (k, v) in obj {
            cfg[k] = v.clone();
        }
    }
    cfg
}

/// One table with a config header, as CSV (comment header lines) or one JSON
/// object.
struct Table {
    config: Value,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn emit(table: &Table, run: &RunArgs) -> spdc_fuzzy::Result<()> {
    let mut text = String::new();
    match run.format {
        Format::Csv => {
            text.push_str(&format!("# config: {}\n", table.config));
            text.push_str(&table.columns.join(","));
            text.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
        }
        Format::Json => {
            let obj = json!({
                "config": table.config,
                "columns": table.columns,
                "rows": table.rows,
            });
            text = serde_json::to_string_pretty(&obj).expect("serializable table");
            text.push('\n');
        }
    }
    match &run.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::File::create(path)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))),
    }
}

fn fringe_columns(mc: bool) -> Vec<String> {
    let mut cols: Vec<String> = vec!["theta_rad".into()];
    let names = ["pp", "pm", "pz", "mp", "mm", "mz", "zp", "zm", "zz"];
    cols.extend(names.iter().map(|s| format!("p_{s}")));
    if mc {
        cols.extend(names.iter().map(|s| format!("se_{s}")));
    }
    cols
}

fn fringe_rows(fringe: &FringePattern, mc: bool) -> Vec<Vec<f64>> {
    fringe
        .theta_grid
        .iter()
        .zip(&fringe.points)
        .map(|(&theta, point)| {
            let mut row = vec![theta];
            for a in 0..3 {
                for b in 0..3 {
                    row.push(point.p[a][b]);
                }
            }
            if mc {
                for a in 0..3 {
                    for b in 0..3 {
                        row.push(point.se[a][b]);
                    }
                }
            }
            row
        })
        .collect()
}

fn fringe_command(
    name: &str,
    state: &StateSpec,
    scheme: &SchemeArgs,
    run: &RunArgs,
) -> spdc_fuzzy::Result<()> {
    let scheme = resolve_scheme(scheme)?;
    let channel = LossChannel::new(run.eta)?;
    let grid = resolve_grid(run)?;
    let mc = resolve_mc(run)?;
    let fringe = analysis::fringe_sweep(state, scheme, scheme, &channel, &grid, mc.as_ref())?;
    let table = Table {
        config: config_json(name, state, scheme, run, json!({ "grid_points": grid.len() })),
        columns: fringe_columns(run.mc),
        rows: fringe_rows(&fringe, run.mc),
    };
    emit(&table, run)
}

fn chsh_command(args: &CommonArgs) -> spdc_fuzzy::Result<()> {
    let state = resolve_state(&args.state)?;
    let scheme = resolve_scheme(&args.scheme)?;
    let channel = LossChannel::new(args.run.eta)?;
    let mc = resolve_mc(&args.run)?;
    let r = chsh::maximize_chsh(&state, scheme, &channel, mc.as_ref())?;
    let table = Table {
        config: config_json("chsh", &state, scheme, &args.run, json!({})),
        columns: vec![
            "s".into(),
            "a_rad".into(),
            "b_rad".into(),
            "a_prime_rad".into(),
            "b_prime_rad".into(),
            "e_ab".into(),
            "e_abp".into(),
            "e_apb".into(),
            "e_apbp".into(),
            "conclusive_ab".into(),
            "conclusive_abp".into(),
            "conclusive_apb".into(),
            "conclusive_apbp".into(),
        ],
        rows: vec![vec![
            r.s_value,
            r.settings.a,
            r.settings.b,
            r.settings.a_prime,
            r.settings.b_prime,
            r.correlations[0],
            r.correlations[1],
            r.correlations[2],
            r.correlations[3],
            r.conclusive_probs[0],
            r.conclusive_probs[1],
            r.conclusive_probs[2],
            r.conclusive_probs[3],
        ]],
    };
    emit(&table, &args.run)
}

fn visibility_command(args: &VisibilityArgs) -> spdc_fuzzy::Result<()> {
    let state = resolve_state(&args.state)?;
    if args.thresholds.is_empty() {
        return Err(Error::InvalidParameter("--thresholds must not be empty".into()));
    }
    let schemes: Vec<MeasurementScheme> = args
        .thresholds
        .iter()
        .map(|&t| match args.scheme {
            SchemeKind::Of => Ok(MeasurementScheme::OrthogonalityFilter { k: t }),
            SchemeKind::Td => Ok(MeasurementScheme::ThresholdDetector { h: t }),
            _ => Err(Error::InvalidParameter(
                "visibility sweeps need --scheme of or --scheme td".into(),
            )),
        })
        .collect::<spdc_fuzzy::Result<_>>()?;
    let channel = LossChannel::new(args.run.eta)?;
    let grid = resolve_grid(&args.run)?;
    let mc = resolve_mc(&args.run)?;
    let pair = resolve_pair(&args.pair)?;
    let curve =
        analysis::visibility_curve(&state, &schemes, &channel, &grid, pair, mc.as_ref())?;
    let scheme_label = schemes[0];
    let table = Table {
        config: config_json(
            "visibility",
            &state,
            scheme_label,
            &args.run,
            json!({ "thresholds": args.thresholds, "pair": args.pair, "grid_points": grid.len() }),
        ),
        columns: vec![
            "threshold".into(),
            "visibility".into(),
            "visibility_se".into(),
            "success_probability".into(),
        ],
        rows: (0..curve.thresholds.len())
            .map(|i| {
                vec![
                    curve.thresholds[i] as f64,
                    curve.visibility[i],
                    curve.visibility_se[i],
                    curve.success_probability[i],
                ]
            })
            .collect(),
    };
    emit(&table, &args.run)
}

fn success_command(args: &CommonArgs) -> spdc_fuzzy::Result<()> {
    let state = resolve_state(&args.state)?;
    let scheme = resolve_scheme(&args.scheme)?;
    let channel = LossChannel::new(args.run.eta)?;
    let p = analysis::success_probability(&state, scheme, &channel)?;
    let table = Table {
        config: config_json("success", &state, scheme, &args.run, json!({})),
        columns: vec!["success_probability".into()],
        rows: vec![vec![p]],
    };
    emit(&table, &args.run)
}

fn harmonics_command(args: &HarmonicsArgs) -> spdc_fuzzy::Result<()> {
    let state = resolve_state(&args.state)?;
    let scheme = resolve_scheme(&args.scheme)?;
    let channel = LossChannel::new(args.run.eta)?;
    let mut grid = resolve_grid(&args.run)?;
    // harmonic analysis needs enough points to avoid aliasing; widen a
    // too-small default grid instead of failing
    let needed = 4 * state.max_sector() + 2;
    if args.run.thetas_deg.is_none() && grid.len() < needed {
        grid = analysis::uniform_grid(needed)?;
    }
    let mc = resolve_mc(&args.run)?;
    let pair = resolve_pair(&args.pair)?;
    let fringe = analysis::fringe_sweep(&state, scheme, scheme, &channel, &grid, mc.as_ref())?;
    let mags = analysis::harmonic_content(&fringe, pair)?;
    let table = Table {
        config: config_json(
            "harmonics",
            &state,
            scheme,
            &args.run,
            json!({ "pair": args.pair, "grid_points": grid.len() }),
        ),
        columns: vec!["harmonic".into(), "magnitude".into()],
        rows: mags
            .iter()
            .enumerate()
            .map(|(q, &m)| vec![q as f64, m])
            .collect(),
    };
    emit(&table, &args.run)
}
