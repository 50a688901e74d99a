//! Command-line front end: build sparse-grid interpolants, synthesize
//! explicit networks, evaluate stored networks, and emit count tables
//! and scaling experiments as CSV or JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use korogrid_core::error::Error;
use korogrid_core::harness::{
    bound_table, find_target, lower_bound_params, rows_to_csv, scaling_experiment,
    sup_error_leveled, ExperimentRow, SynthesizerKind,
};
use korogrid_core::hierarchy::{error_bound, hierarchize_hat};
use korogrid_core::network::{ActivationKind, NetSpec};
use korogrid_core::synthesis::{
    synth_korobov_deep, synth_korobov_shallow, synth_korobov_shallow_general,
    synth_product_shallow, ActivationFamily, SynthesisReport,
};

/// Sparse-grid interpolation and explicit network synthesis toolkit.
#[derive(Parser)]
#[command(name = "korogrid", version, about)]
struct Cli {
    /// Recorded for provenance only; every scan in this tool is
    /// deterministic, so the seed never changes results.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build sparse-grid interpolants and measure their accuracy.
    #[command(subcommand)]
    Grid(GridCmd),
    /// Synthesize explicit networks and evaluate stored ones.
    #[command(subcommand)]
    Net(NetCmd),
    /// Emit count tables and scaling experiments.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum GridCmd {
    /// Interpolate a registry target on the sparse grid and dump its
    /// hierarchical coefficients.
    Build {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        level: u32,
        /// Registry target name (parabola, sine, zero).
        #[arg(long)]
        target: String,
        /// Write the coefficient table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Measure the interpolant's sup-norm error against its target.
    Error {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        level: u32,
        /// Registry target name (parabola, sine, zero).
        #[arg(long)]
        target: String,
        /// Low-discrepancy sample count for the sup-norm scan.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum NetCmd {
    /// Two-layer rectifier network for a registry target.
    SynthShallow {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
        /// Registry target name (parabola, sine, zero).
        #[arg(long)]
        target: String,
        /// Write the materialized network as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Two-layer network for a registry target with a general
    /// activation.
    SynthShallowGeneral {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
        /// Registry target name (parabola, sine, zero).
        #[arg(long)]
        target: String,
        /// Activation: relu, softplus, elu, heaviside, logistic, tanh.
        #[arg(long)]
        activation: String,
        /// Write the materialized network as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Binary-tree network for a registry target with a smooth
    /// activation.
    SynthDeep {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
        /// Registry target name (parabola, sine, zero).
        #[arg(long)]
        target: String,
        /// Activation with curvature at the origin.
        #[arg(long, default_value = "softplus")]
        activation: String,
        /// Write the materialized network as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Two-layer network computing the coordinate product.
    SynthProduct {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
        /// Activation: relu, softplus, or elu.
        #[arg(long, default_value = "relu")]
        activation: String,
        /// Write the materialized network as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate a stored network at a point.
    Eval {
        /// Network JSON file produced by a synth command.
        #[arg(long)]
        net: PathBuf,
        /// Comma-separated input coordinates, e.g. 0.25,0.75.
        #[arg(long)]
        at: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthChoice {
    Shallow,
    ShallowGeneral,
    Deep,
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Tabulate the error-bound factor and both index-count formulas.
    Bounds {
        /// Largest dimension (at most 6).
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Largest level (at most 12).
        #[arg(long, default_value_t = 8)]
        level: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Synthesize a target across a decreasing accuracy series and fit
    /// the parameter-growth exponent.
    Scaling {
        #[arg(long)]
        dim: usize,
        /// Registry target name (parabola, sine, zero).
        #[arg(long)]
        target: String,
        /// Which synthesizer to exercise.
        #[arg(long, value_enum, default_value_t = SynthChoice::Shallow)]
        synth: SynthChoice,
        /// Comma-separated decreasing accuracies, at least 4.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Activation for the general and deep synthesizers.
        #[arg(long)]
        activation: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(seed) = cli.seed {
        eprintln!("seed {seed} recorded; all scans are deterministic");
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Grid(cmd) => run_grid(cmd),
        Command::Net(cmd) => run_net(cmd),
        Command::Report(cmd) => run_report(cmd),
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    text
}

/// Map an activation to the synthesis family that can host it.
fn family_for(kind: ActivationKind) -> Result<ActivationFamily, Error> {
    if matches!(kind, ActivationKind::ReLU) {
        Ok(ActivationFamily::ExactRelu)
    } else if kind.sigmoid_limits().is_some() {
        Ok(ActivationFamily::SigmoidLike(kind))
    } else if kind.relu_like_slope().is_some() {
        Ok(ActivationFamily::ReluLike(kind))
    } else {
        Err(Error::BadActivation {
            name: kind.name().to_string(),
            reason: "no synthesis family accepts this activation",
        })
    }
}

fn check_synthesis_dim(d: usize) -> Result<(), Error> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if d > 4 {
        return Err(Error::BadParameter {
            name: "dim",
            value: d as f64,
            range: "1..=4 for synthesis experiments",
        });
    }
    Ok(())
}

fn run_grid(cmd: GridCmd) -> Result<(), Box<dyn std::error::Error>> {
    match cmd {
        GridCmd::Build {
            dim,
            level,
            target,
            out,
            format,
        } => {
            let t = find_target(&target, dim)?;
            let interp = hierarchize_hat(|x: &[f64]| t.eval(x), dim, level)?;
            let coeffs: Vec<(Vec<u32>, Vec<u64>, f64)> = interp
                .coefficients()
                .map(|(li, v)| (li.level().to_vec(), li.position().to_vec(), v))
                .collect();
            println!("target {}", t.name);
            println!("dimension {dim}");
            println!("level {level}");
            println!("coefficients {}", coeffs.len());
            println!("sum_abs {:.16e}", interp.sum_abs());
            println!("boundary_vanishing {}", interp.boundary_vanishing());
            if let Some(path) = out {
                let text = match format {
                    Format::Csv => {
                        let mut text = String::from("level,position,value\n");
                        for (l, p, v) in &coeffs {
                            let l = l.iter().map(u32::to_string).collect::<Vec<_>>().join(";");
                            let p = p.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
                            writeln!(text, "{l},{p},{v:.16e}").expect("string write");
                        }
                        text
                    }
                    Format::Json => {
                        let rows: Vec<Value> = coeffs
                            .iter()
                            .map(|(l, p, v)| json!({"level": l, "position": p, "value": v}))
                            .collect();
                        json_text(&json!({
                            "target": t.name,
                            "dimension": dim,
                            "grid_level": level,
                            "sum_abs": interp.sum_abs(),
                            "boundary_vanishing": interp.boundary_vanishing(),
                            "coefficients": rows,
                        }))
                    }
                };
                emit(&text, &Some(path))?;
            }
            Ok(())
        }
        GridCmd::Error {
            dim,
            level,
            target,
            samples,
        } => {
            let t = find_target(&target, dim)?;
            let interp = hierarchize_hat(|x: &[f64]| t.eval(x), dim, level)?;
            let report = sup_error_leveled(
                |x: &[f64]| interp.eval(x),
                |x: &[f64]| t.eval(x),
                dim,
                samples,
                level,
            )?;
            let bound = error_bound(dim, level, t.seminorm)?;
            println!("target {}", t.name);
            println!("dimension {dim}");
            println!("level {level}");
            println!("measured_sup_error {:.16e}", report.value);
            println!("error_bound {:.16e}", bound);
            let argmax = report
                .argmax
                .iter()
                .map(|c| format!("{c:.16e}"))
                .collect::<Vec<_>>()
                .join(",");
            println!("argmax {argmax}");
            println!("points_scanned {}", report.points);
            Ok(())
        }
    }
}

/// Measure a synthesis against its reference and assemble a report row.
fn experiment_row(
    report: &SynthesisReport,
    reference: impl Fn(&[f64]) -> f64,
    bound: f64,
    wall_time: f64,
) -> Result<ExperimentRow, Error> {
    let level = report.level.unwrap_or(1);
    let measured = sup_error_leveled(
        |x: &[f64]| report.eval(x),
        &reference,
        report.dimension,
        10_000,
        level,
    )?;
    Ok(ExperimentRow {
        d: report.dimension,
        n: report.level.unwrap_or(0),
        eps_target: report.eps_target,
        synthesizer: report.synthesizer.to_string(),
        activation: report.activation.clone(),
        neurons_by_layer: report.widths.clone(),
        depth: report.depth(),
        trainable: report.trainable,
        sup_error_measured: measured.value,
        bound_theoretical: bound,
        wall_time,
    })
}

fn finish_synth(
    report: &SynthesisReport,
    reference: impl Fn(&[f64]) -> f64,
    bound: f64,
    wall_time: f64,
    out: &Option<PathBuf>,
    format: Format,
) -> Result<(), Box<dyn std::error::Error>> {
    if !report.boundary_vanishing {
        eprintln!(
            "warning: target does not vanish on the sampled boundary; \
             the accuracy guarantee assumes boundary-vanishing targets"
        );
    }
    let row = experiment_row(report, reference, bound, wall_time)?;
    let text = match format {
        Format::Csv => rows_to_csv(std::slice::from_ref(&row)),
        Format::Json => json_text(&row.to_json()),
    };
    print!("{text}");
    if let Some(path) = out {
        match &report.net {
            Some(net) => emit(&json_text(&net.to_json()), &Some(path.clone()))?,
            None => {
                return Err(Box::new(Error::BadNetwork(format!(
                    "network too large to materialize ({} neurons); \
                     rerun with a looser accuracy to write JSON",
                    report.neurons()
                ))));
            }
        }
    }
    Ok(())
}

fn run_net(cmd: NetCmd) -> Result<(), Box<dyn std::error::Error>> {
    match cmd {
        NetCmd::SynthShallow {
            dim,
            eps,
            target,
            out,
            format,
        } => {
            check_synthesis_dim(dim)?;
            let t = find_target(&target, dim)?;
            let start = Instant::now();
            let report = synth_korobov_shallow(|x: &[f64]| t.eval(x), dim, eps, t.seminorm)?;
            let wall = start.elapsed().as_secs_f64();
            let bound = error_bound(dim, report.level.unwrap_or(1), t.seminorm)?;
            finish_synth(&report, |x: &[f64]| t.eval(x), bound, wall, &out, format)
        }
        NetCmd::SynthShallowGeneral {
            dim,
            eps,
            target,
            activation,
            out,
            format,
        } => {
            check_synthesis_dim(dim)?;
            let t = find_target(&target, dim)?;
            let family = family_for(ActivationKind::parse_base(&activation)?)?;
            let start = Instant::now();
            let report = synth_korobov_shallow_general(
                |x: &[f64]| t.eval(x),
                dim,
                eps,
                t.seminorm,
                family,
            )?;
            let wall = start.elapsed().as_secs_f64();
            let bound = error_bound(dim, report.level.unwrap_or(1), t.seminorm)?;
            finish_synth(&report, |x: &[f64]| t.eval(x), bound, wall, &out, format)
        }
        NetCmd::SynthDeep {
            dim,
            eps,
            target,
            activation,
            out,
            format,
        } => {
            check_synthesis_dim(dim)?;
            let t = find_target(&target, dim)?;
            let sigma = ActivationKind::parse_base(&activation)?;
            let start = Instant::now();
            let report =
                synth_korobov_deep(|x: &[f64]| t.eval(x), dim, eps, t.seminorm, sigma)?;
            let wall = start.elapsed().as_secs_f64();
            let bound = error_bound(dim, report.level.unwrap_or(1), t.seminorm)?;
            finish_synth(&report, |x: &[f64]| t.eval(x), bound, wall, &out, format)
        }
        NetCmd::SynthProduct {
            dim,
            eps,
            activation,
            out,
            format,
        } => {
            check_synthesis_dim(dim)?;
            let family = family_for(ActivationKind::parse_base(&activation)?)?;
            let start = Instant::now();
            let report = synth_product_shallow(dim, eps, family)?;
            let wall = start.elapsed().as_secs_f64();
            let product = |x: &[f64]| x.iter().product::<f64>();
            finish_synth(&report, product, eps, wall, &out, format)
        }
        NetCmd::Eval { net, at } => {
            let text = fs::read_to_string(&net)?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Error::BadJson(format!("unreadable network file: {e}")))?;
            let spec = NetSpec::from_json(&value)?;
            let point = at
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| Error::BadParameter {
                        name: "at",
                        value: f64::NAN,
                        range: "comma-separated finite numbers",
                    })
                })
                .collect::<Result<Vec<f64>, Error>>()?;
            let y = spec.eval(&point)?;
            println!("{y:.16e}");
            Ok(())
        }
    }
}

fn run_report(cmd: ReportCmd) -> Result<(), Box<dyn std::error::Error>> {
    match cmd {
        ReportCmd::Bounds {
            dim,
            level,
            out,
            format,
        } => {
            let rows = bound_table(dim, level)?;
            let text = match format {
                Format::Csv => {
                    let mut text = String::from("d,n,profile,count,count_closed_form\n");
                    for r in &rows {
                        writeln!(
                            text,
                            "{},{},{},{},{}",
                            r.d, r.n, r.profile, r.count, r.count_closed_form
                        )
                        .expect("string write");
                    }
                    text
                }
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            json!({
                                "d": r.d,
                                "n": r.n,
                                "profile": r.profile,
                                "count": r.count,
                                "count_closed_form": r.count_closed_form,
                            })
                        })
                        .collect();
                    json_text(&Value::Array(rows))
                }
            };
            emit(&text, &out)?;
            Ok(())
        }
        ReportCmd::Scaling {
            dim,
            target,
            synth,
            eps,
            activation,
            out,
            format,
        } => {
            check_synthesis_dim(dim)?;
            let t = find_target(&target, dim)?;
            let kind = scaling_kind(synth, activation.as_deref())?;
            let experiment = scaling_experiment(&t, dim, &kind, &eps)?;
            let ratios: Vec<(f64, u64, f64)> = experiment
                .rows
                .iter()
                .map(|r| {
                    lower_bound_params(dim, r.eps_target)
                        .map(|lb| (r.eps_target, r.trainable, lb))
                })
                .collect::<Result<_, Error>>()?;
            let text = match format {
                Format::Csv => rows_to_csv(&experiment.rows),
                Format::Json => {
                    let ratio_rows: Vec<Value> = ratios
                        .iter()
                        .map(|(e, tr, lb)| {
                            json!({
                                "eps": e,
                                "trainable": tr,
                                "lower_bound": lb,
                                "ratio": *tr as f64 / lb,
                            })
                        })
                        .collect();
                    json_text(&json!({
                        "rows": experiment.rows.iter().map(ExperimentRow::to_json).collect::<Vec<_>>(),
                        "slope": experiment.slope,
                        "lower_bound_ratios": ratio_rows,
                    }))
                }
            };
            emit(&text, &out)?;
            eprintln!("fitted_exponent {:.4}", experiment.slope);
            eprintln!("eps,trainable,lower_bound,ratio (comparator, never asserted)");
            for (e, tr, lb) in &ratios {
                eprintln!("{e:.3e},{tr},{lb:.4e},{:.4}", *tr as f64 / lb);
            }
            Ok(())
        }
    }
}

fn scaling_kind(choice: SynthChoice, activation: Option<&str>) -> Result<SynthesizerKind, Error> {
    match choice {
        SynthChoice::Shallow => Ok(SynthesizerKind::Shallow),
        SynthChoice::ShallowGeneral => {
            let name = activation.unwrap_or("relu");
            Ok(SynthesizerKind::ShallowGeneral(family_for(
                ActivationKind::parse_base(name)?,
            )?))
        }
        SynthChoice::Deep => {
            let name = activation.unwrap_or("softplus");
            Ok(SynthesizerKind::Deep(ActivationKind::parse_base(name)?))
        }
    }
}
