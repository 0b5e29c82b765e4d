//! Command-line front end: model loading, subcommand dispatch, and
//! deterministic report emission.
//!
//! Exit codes: 0 = certified/verified, 1 = falsified/failed,
//! 2 = inconclusive or precondition failure, 3 = usage or I/O error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::builtins;
use crate::certify::{self, CertificationReport, SamplePlan, Verdict};
use crate::characteristic::{
    bounded_reachability_check, compute_characteristic, limit_sandwich_check, verify_planar_gas,
    Characteristic, GasSpec, GridSpec,
};
use crate::error::{Error, Result};
use crate::integrate::IntegrateOpts;
use crate::interconnect::{
    cascade, cascade_characteristic, closed_loop_verify, small_gain_certify, FeedbackLoop,
    SmallGainReport,
};
use crate::invariance::{invariance_certify, trajectory_containment_check};
use crate::model::SystemModel;
use crate::polytope::Polytope;
use crate::signal::InputSignal;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "monocert",
    version,
    about = "Certify, falsify, and exploit monotonicity of input/output ODE systems over orthant orders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestKind {
    #[value(name = "sign-pattern")]
    SignPattern,
    Kamke,
    Trajectory,
    Competitive,
    #[value(name = "incremental")]
    IncrementalPositivity,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Certify or falsify monotonicity-type conditions of a model
    Certify {
        /// Model file path, or a builtin name (mapk_stage, mapk_figure4,
        /// mapk_cascade3, linear_toy_pos, decr_toy)
        #[arg(long)]
        model: String,
        #[arg(long, value_enum, default_value = "all")]
        test: TestKind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Sample count for the Jacobian and Kamke tests
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Ordered trajectory pairs for the trajectory test
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Trajectories for the incremental positivity test
        #[arg(long, default_value_t = 20)]
        trajectories: usize,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        /// Slack for Jacobian sign and Kamke inequalities
        #[arg(long, default_value_t = certify::TOL_CERT)]
        tol_cert: f64,
        /// Slack for trajectory order comparisons
        #[arg(long, default_value_t = certify::TOL_TRAJ)]
        tol_traj: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a model and write the trajectory CSV
    Simulate {
        #[arg(long)]
        model: String,
        /// Initial state, comma-separated (default: domain Chebyshev center)
        #[arg(long)]
        x0: Option<String>,
        /// Constant input values, comma-separated
        #[arg(long)]
        input: Option<String>,
        /// Sinusoid "offset,amplitude,omega" (single-input models)
        #[arg(long)]
        input_sin: Option<String>,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        /// Output samples on the uniform grid
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the static input/state and input/output characteristics
    Characteristic {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 25)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw a small SVG of k_y over the input grid
        #[arg(long, default_value_t = false)]
        svg: bool,
    },
    /// Compose models in series and compare both characteristic routes
    Cascade {
        /// Stage model files in head-to-tail order (repeatable)
        #[arg(long, required = true)]
        model: Vec<String>,
        #[arg(long, default_value_t = 25)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Small-gain certification of a SISO negative feedback loop
    Smallgain {
        /// Exactly two models: the plant, then the controller
        #[arg(long, required = true)]
        model: Vec<String>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Starts for the discrete gain iteration
        #[arg(long, default_value_t = 64)]
        starts: usize,
        /// Closed-loop simulation horizon
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        /// Closed-loop initial conditions to verify from
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify forward invariance of a polytope under the model dynamics
    Invariance {
        #[arg(long)]
        model: String,
        /// Polytope JSON file {"G": [[...]], "g": [...]}; defaults to the
        /// model's state domain
        #[arg(long)]
        polytope: Option<PathBuf>,
        /// Boundary samples per facet
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Containment starts
        #[arg(long, default_value_t = 50)]
        starts: usize,
        #[arg(long, default_value_t = 50.0)]
        horizon: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in end-to-end demos
    Demo {
        /// Demo name (currently: mapk)
        name: String,
        #[arg(long, default_value = "monocert_demo")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = false)]
        svg: bool,
    },
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<String>,
{
    let argv = std::iter::once("monocert".to_string()).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_)
        | Error::OrderMismatch(_)
        | Error::DomainTooThin { .. }
        | Error::CharacteristicAbsent { .. }
        | Error::NewtonNoConvergence { .. }
        | Error::Unbounded(_)
        | Error::StepSizeUnderflow { .. }
        | Error::NonFiniteState { .. } => 2,
        _ => 3,
    }
}

fn load_model(spec: &str) -> Result<SystemModel> {
    let path = Path::new(spec);
    if path.exists() {
        return SystemModel::parse(&fs::read_to_string(path)?);
    }
    if builtins::BUILTIN_NAMES.contains(&spec) {
        return builtins::builtin(spec, &BTreeMap::new());
    }
    Err(Error::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("model `{spec}` is neither a file nor a builtin name"),
    )))
}

fn parse_csv_floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Precondition(format!("invalid number `{s}` in list")))
        })
        .collect()
}

fn write_out(out: &Option<PathBuf>, name: &str, contents: &str) -> Result<Option<PathBuf>> {
    let Some(dir) = out else {
        return Ok(None);
    };
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(Some(path))
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Certified => 0,
        Verdict::Falsified => 1,
        Verdict::Inconclusive => 2,
    }
}

fn report_json(command: &str, body: serde_json::Value) -> String {
    let mut envelope = serde_json::Map::new();
    envelope.insert("schema_version".into(), json!(SCHEMA_VERSION));
    envelope.insert("command".into(), json!(command));
    envelope.insert("report".into(), body);
    serde_json::to_string_pretty(&serde_json::Value::Object(envelope)).expect("serializable") + "\n"
}

fn characteristic_csv(c: &Characteristic) -> String {
    let m = c.input_grid.first().map_or(0, |u| u.len());
    let n = c.states.first().map_or(0, |x| x.len());
    let p = c.outputs.first().map_or(0, |y| y.len());
    let mut s = String::new();
    if m == 1 {
        s.push('u');
    } else {
        for j in 1..=m {
            if j > 1 {
                s.push(',');
            }
            s.push_str(&format!("u{j}"));
        }
    }
    for i in 1..=n {
        s.push_str(&format!(",kx_{i}"));
    }
    for i in 1..=p {
        s.push_str(&format!(",ky_{i}"));
    }
    s.push_str(",residual,gas_max_dist\n");
    for k in 0..c.input_grid.len() {
        let mut cols: Vec<String> = Vec::new();
        cols.extend(c.input_grid[k].iter().map(|v| format!("{v:.16e}")));
        cols.extend(c.states[k].iter().map(|v| format!("{v:.16e}")));
        cols.extend(c.outputs[k].iter().map(|v| format!("{v:.16e}")));
        cols.push(format!("{:.16e}", c.residuals[k]));
        cols.push(format!("{:.16e}", c.gas[k].max_terminal_dist));
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

fn smallgain_csv(r: &SmallGainReport) -> String {
    let mut s = String::from("u,ky,rho\n");
    for k in 0..r.grid.len() {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            r.grid[k], r.ky_table[k], r.rho_on_grid[k]
        ));
    }
    s
}

/// Minimal polyline plot; decorative only.
fn svg_plot(xs: &[f64], ys: &[f64], title: &str) -> String {
    let (w, h, pad) = (640.0, 400.0, 48.0);
    let (x0, x1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (y0, y1) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <rect x=\"{pad}\" y=\"{pad}\" width=\"{iw}\" height=\"{ih}\" fill=\"none\" stroke=\"#888\"/>\n\
         <text x=\"{tx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n\
         <text x=\"{pad}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"10\">{x0} .. {x1}</text>\n\
         <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{pts}\"/>\n\
         </svg>\n",
        iw = w - 2.0 * pad,
        ih = h - 2.0 * pad,
        tx = w / 2.0,
        ty = h - 16.0,
        pts = points.join(" ")
    )
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Certify {
            model,
            test,
            seed,
            samples,
            pairs,
            trajectories,
            horizon,
            tol_cert,
            tol_traj,
            out,
        } => {
            let sys = load_model(&model)?;
            let point_plan = SamplePlan::new(seed, samples);
            let mut reports: Vec<CertificationReport> = Vec::new();
            let mut run = |kind: TestKind| -> Result<()> {
                let r = match kind {
                    TestKind::SignPattern => {
                        certify::sign_pattern_certify(&sys, &point_plan, tol_cert)?
                    }
                    TestKind::Kamke => certify::kamke_test(&sys, &point_plan, tol_cert)?,
                    TestKind::Trajectory => certify::trajectory_monotonicity_test(
                        &sys,
                        &SamplePlan::new(seed, pairs),
                        horizon,
                        tol_traj,
                    )?,
                    TestKind::Competitive => {
                        certify::competitive_test(&sys, &point_plan, tol_cert)?
                    }
                    TestKind::IncrementalPositivity => certify::incremental_positivity_test(
                        &sys,
                        &SamplePlan::new(seed, trajectories),
                        horizon,
                        tol_cert,
                    )?,
                    TestKind::All => unreachable!(),
                };
                reports.push(r);
                Ok(())
            };
            match test {
                TestKind::All => {
                    // Competitive is excluded here: a monotone system is
                    // typically not competitive, and "all" gates monotonicity.
                    for k in [
                        TestKind::SignPattern,
                        TestKind::Kamke,
                        TestKind::Trajectory,
                        TestKind::IncrementalPositivity,
                    ] {
                        run(k)?;
                    }
                }
                k => run(k)?,
            }
            let worst = reports
                .iter()
                .map(|r| verdict_code(r.verdict))
                .max()
                .unwrap_or(2);
            let text = report_json("certify", serde_json::to_value(&reports)?);
            write_out(&out, "certify.json", &text)?;
            print!("{text}");
            Ok(worst)
        }

        Command::Simulate {
            model,
            x0,
            input,
            input_sin,
            horizon,
            grid,
            out,
        } => {
            let sys = load_model(&model)?;
            let x0 = match x0 {
                Some(s) => parse_csv_floats(&s)?,
                None => sys.state_domain().chebyshev_center().to_vec(),
            };
            let signal = match (input, input_sin) {
                (Some(_), Some(_)) => {
                    return Err(Error::Precondition(
                        "choose either --input or --input-sin".into(),
                    ))
                }
                (Some(s), None) => InputSignal::Constant(parse_csv_floats(&s)?),
                (None, Some(s)) => {
                    let v = parse_csv_floats(&s)?;
                    if v.len() != 3 || sys.m() != 1 {
                        return Err(Error::Precondition(
                            "--input-sin takes offset,amplitude,omega for single-input models"
                                .into(),
                        ));
                    }
                    InputSignal::Sinusoid {
                        offset: vec![v[0]],
                        amplitude: vec![v[1]],
                        omega: vec![v[2]],
                    }
                }
                (None, None) => InputSignal::Constant(sys.center_input()),
            };
            let opts = IntegrateOpts {
                grid_points: grid,
                ..Default::default()
            };
            let traj = sys.integrate(&x0, &signal, horizon, &opts)?;
            let csv = traj.to_csv();
            match write_out(&out, "trajectory.csv", &csv)? {
                Some(path) => println!("wrote {}", path.display()),
                None => print!("{csv}"),
            }
            eprintln!(
                "terminal state {:?}; domain exit: {}",
                traj.terminal_state(),
                traj.domain_exit
            );
            Ok(if traj.domain_exit { 1 } else { 0 })
        }

        Command::Characteristic {
            model,
            grid,
            seed,
            out,
            svg,
        } => {
            let sys = load_model(&model)?;
            let c = compute_characteristic(
                &sys,
                &GridSpec {
                    points_per_dim: grid,
                },
                &GasSpec {
                    seed,
                    ..Default::default()
                },
            )?;
            let csv = characteristic_csv(&c);
            match write_out(&out, "characteristic.csv", &csv)? {
                Some(path) => println!("wrote {}", path.display()),
                None => print!("{csv}"),
            }
            if svg && sys.m() == 1 && sys.p() == 1 {
                let xs = c.scalar_grid()?;
                let ys: Vec<f64> = c.outputs.iter().map(|y| y[0]).collect();
                let plot = svg_plot(&xs, &ys, "static I/O characteristic k_y");
                write_out(&out, "characteristic.svg", &plot)?;
            }
            let all_evidenced = c.gas.iter().all(|g| g.evidenced);
            eprintln!(
                "{} grid points; GAS evidenced at all: {all_evidenced}",
                c.input_grid.len()
            );
            Ok(0)
        }

        Command::Cascade {
            model,
            grid,
            seed,
            out,
        } => {
            let stages = model
                .iter()
                .map(|m| load_model(m))
                .collect::<Result<Vec<_>>>()?;
            let casc = cascade(stages)?;
            let siso = casc.stages.iter().all(|s| s.m() == 1 && s.p() == 1);
            if !siso {
                let text = report_json(
                    "cascade",
                    json!({"n": casc.composite.n(), "stages": casc.stages.len()}),
                );
                write_out(&out, "cascade.json", &text)?;
                print!("{text}");
                return Ok(0);
            }
            let cc = cascade_characteristic(
                &casc,
                &GridSpec {
                    points_per_dim: grid,
                },
                &GasSpec {
                    seed,
                    ..Default::default()
                },
            )?;
            let mut csv = String::from("u,ky_composed,ky_direct\n");
            for k in 0..cc.grid.len() {
                csv.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e}\n",
                    cc.grid[k], cc.composed_outputs[k], cc.direct.outputs[k][0]
                ));
            }
            write_out(&out, "cascade_characteristic.csv", &csv)?;
            let agree = cc.max_discrepancy < 1e-3;
            let text = report_json(
                "cascade",
                json!({
                    "n": casc.composite.n(),
                    "stages": casc.stages.len(),
                    "max_discrepancy": cc.max_discrepancy,
                    "routes_agree": agree,
                }),
            );
            write_out(&out, "cascade.json", &text)?;
            print!("{text}");
            Ok(if agree { 0 } else { 1 })
        }

        Command::Smallgain {
            model,
            grid,
            starts,
            horizon,
            samples,
            seed,
            out,
        } => {
            if model.len() != 2 {
                return Err(Error::Precondition(
                    "smallgain takes exactly two --model arguments: plant, controller".into(),
                ));
            }
            let plant = load_model(&model[0])?;
            let controller = load_model(&model[1])?;
            let loop_ = FeedbackLoop::new(plant, controller)?;
            let gas = GasSpec {
                seed,
                ..Default::default()
            };
            let report = small_gain_certify(
                &loop_,
                &GridSpec {
                    points_per_dim: grid,
                },
                &gas,
                starts,
            )?;
            let report = if report.attractive {
                closed_loop_verify(&loop_, &report, &SamplePlan::new(seed, samples), horizon)?
            } else {
                report
            };
            write_out(&out, "smallgain.csv", &smallgain_csv(&report))?;
            let ok = report.attractive && report.verified;
            let text = report_json("smallgain", serde_json::to_value(&report)?);
            write_out(&out, "smallgain.json", &text)?;
            print!("{text}");
            Ok(if ok { 0 } else { 1 })
        }

        Command::Invariance {
            model,
            polytope,
            samples,
            starts,
            horizon,
            seed,
            out,
        } => {
            let sys = load_model(&model)?;
            let poly = match polytope {
                Some(path) => serde_json::from_str::<Polytope>(&fs::read_to_string(path)?)?,
                None => sys.state_domain().clone(),
            };
            let inv =
                invariance_certify(&sys, &poly, None, &SamplePlan::new(seed, samples), samples)?;
            let cont =
                trajectory_containment_check(&sys, &poly, &SamplePlan::new(seed, starts), horizon)?;
            let code = verdict_code(inv.verdict).max(verdict_code(cont.verdict));
            let text = report_json(
                "invariance",
                json!({"tangent_cone": inv, "containment": cont}),
            );
            write_out(&out, "invariance.json", &text)?;
            print!("{text}");
            Ok(code)
        }

        Command::Demo {
            name,
            out,
            seed,
            svg,
        } => {
            if name != "mapk" {
                return Err(Error::Precondition(format!("unknown demo `{name}`")));
            }
            demo_mapk(&out, seed, svg)
        }
    }
}

/// End-to-end MAPK analysis: certification, planar GAS evidence, the stage
/// characteristic, the three-stage cascade comparison, invariance of the
/// triangle, the asymptotic sandwich, and a direction-field grid for
/// plotting.
fn demo_mapk(out: &Path, seed: u64, svg: bool) -> Result<i32> {
    fs::create_dir_all(out)?;
    let none = BTreeMap::new();
    let stage = builtins::builtin("mapk_stage", &none)?;
    let fig4 = builtins::builtin("mapk_figure4", &none)?;
    let casc = builtins::mapk_cascade3(&none)?;
    let outdir = Some(out.to_path_buf());

    // Monotonicity certification of the stage.
    let sign =
        certify::sign_pattern_certify(&stage, &SamplePlan::new(seed, 2000), certify::TOL_CERT)?;
    write_out(
        &outdir,
        "certify_sign_pattern.json",
        &report_json("demo mapk", serde_json::to_value(&sign)?),
    )?;

    // Planar trace/determinant evidence and the start sweep.
    let gas_report = verify_planar_gas(&fig4, &[1.0], &SamplePlan::new(seed, 1000), 10, 200.0)?;
    write_out(
        &outdir,
        "planar_gas.json",
        &report_json("demo mapk", serde_json::to_value(&gas_report)?),
    )?;

    // Stage characteristic over its input interval.
    let ch = compute_characteristic(
        &stage,
        &GridSpec::default(),
        &GasSpec {
            seed,
            ..Default::default()
        },
    )?;
    write_out(
        &outdir,
        "characteristic_mapk_stage.csv",
        &characteristic_csv(&ch),
    )?;
    if svg {
        let xs = ch.scalar_grid()?;
        let ys: Vec<f64> = ch.outputs.iter().map(|y| y[0]).collect();
        write_out(
            &outdir,
            "characteristic_mapk_stage.svg",
            &svg_plot(&xs, &ys, "MAPK stage k_y"),
        )?;
    }
    let ky: Vec<f64> = ch.outputs.iter().map(|y| y[0]).collect();
    let ky_nondecreasing = ky.windows(2).all(|w| w[1] >= w[0] - 1e-6);

    // Cascade characteristic, composed and direct.
    let cc = cascade_characteristic(
        &casc,
        &GridSpec::default(),
        &GasSpec {
            seed,
            ..Default::default()
        },
    )?;
    let mut csv = String::from("u,ky_composed,ky_direct\n");
    for k in 0..cc.grid.len() {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            cc.grid[k], cc.composed_outputs[k], cc.direct.outputs[k][0]
        ));
    }
    write_out(&outdir, "cascade_characteristic.csv", &csv)?;

    // Invariance of the triangle under the frozen-input dynamics.
    let inv = invariance_certify(
        &fig4,
        fig4.state_domain(),
        None,
        &SamplePlan::new(seed, 500),
        500,
    )?;
    let cont =
        trajectory_containment_check(&fig4, fig4.state_domain(), &SamplePlan::new(seed, 50), 50.0)?;
    write_out(
        &outdir,
        "invariance.json",
        &report_json(
            "demo mapk",
            json!({"tangent_cone": inv, "containment": cont}),
        ),
    )?;

    // Asymptotic sandwich under a sinusoidal input.
    let sine = InputSignal::Sinusoid {
        offset: vec![0.5],
        amplitude: vec![0.3],
        omega: vec![1.0],
    };
    let sandwich = limit_sandwich_check(
        &stage,
        &ch,
        stage.state_domain().chebyshev_center(),
        &sine,
        300.0,
        0.5,
    )?;
    write_out(
        &outdir,
        "sandwich.json",
        &report_json("demo mapk", serde_json::to_value(&sandwich)?),
    )?;

    // Envelope bracketing for the same input.
    let envelope = bounded_reachability_check(
        &stage,
        Some(&ch),
        stage.state_domain().chebyshev_center(),
        &sine,
        300.0,
        certify::TOL_TRAJ,
    )?;

    // Direction field on a 20 x 20 grid over the triangle.
    let mut field_csv = String::from("x,y,fx,fy\n");
    for i in 0..20 {
        for j in 0..20 {
            let x = i as f64 / 19.0;
            let y = j as f64 / 19.0;
            if x + y <= 1.0 {
                let f = fig4.field_at(&[x, y], &[1.0]);
                field_csv.push_str(&format!("{x:.16e},{y:.16e},{:.16e},{:.16e}\n", f[0], f[1]));
            }
        }
    }
    write_out(&outdir, "direction_field.csv", &field_csv)?;

    let all_ok = sign.verdict == Verdict::Certified
        && gas_report.verdict
        && ky_nondecreasing
        && cc.max_discrepancy < 1e-3
        && inv.verdict == Verdict::Certified
        && cont.verdict == Verdict::Certified
        && sandwich.verdict
        && envelope.contained;

    let summary = report_json(
        "demo mapk",
        json!({
            "stage_sign_pattern": sign,
            "planar_gas": gas_report,
            "ky_nondecreasing": ky_nondecreasing,
            "cascade_max_discrepancy": cc.max_discrepancy,
            "invariance": inv,
            "containment": cont,
            "sandwich": sandwich,
            "envelope_contained": envelope.contained,
            "all_verdicts_positive": all_ok,
        }),
    );
    write_out(&outdir, "summary.json", &summary)?;
    print!("{summary}");
    Ok(if all_ok { 0 } else { 1 })
}
