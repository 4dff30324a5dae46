//! `nsbox` command-line interface.
//!
//! Exit codes: 0 success, 1 validation or input failure, 2 a property
//! campaign reported failures, 3 usage error.

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nsbox::decompose::{canonical2, canonical3, membership, vertex_weights, Region};
use nsbox::families::SweepFamily;
use nsbox::measures::measure_report;
use nsbox::quantum::{
    born_box, cq_state, me_mixture, preset_settings, psi_plus, psi_plus_cc_mixture, qc_state,
    schmidt_state, werner_state, TwoQubitState,
};
use nsbox::{NsBox, EPS_VAL};
use nsbox_cli::check::{run_check, Property};
use nsbox_cli::sweep::{csv_string, run_sweep, Quantity, SweepSpec, SweepTable};

#[derive(Parser)]
#[command(
    name = "nsbox",
    version,
    about = "Nonsignaling-box toolkit: measures, decompositions, membership, quantum generation"
)]
struct Cli {
    /// Validation tolerance; overrides the NSBOX_TOL environment variable.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Operations on a single box read from JSON.
    #[command(subcommand)]
    Box(BoxCmd),
    /// The built-in box families.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Born-rule box generation from two-qubit states.
    #[command(subcommand)]
    Quantum(QuantumCmd),
    /// Evaluate quantities over a parameter grid and emit CSV.
    Sweep(SweepArgs),
    /// Run a randomized property campaign.
    Check(CheckArgs),
}

#[derive(Subcommand)]
enum BoxCmd {
    /// Print the full measure report of a box.
    Measure(BoxInput),
    /// Decompose a box over the polytope vertices or canonically.
    Decompose {
        #[command(flatten)]
        input: BoxInput,
        /// vertex, canonical2, or canonical3
        #[arg(long)]
        mode: String,
    },
    /// Test membership of a box in a named region.
    Membership {
        #[command(flatten)]
        input: BoxInput,
        /// NS, BELL, N_mm, N_Tmm, N_Q, L_mm, L_Q, or G0Q0
        #[arg(long)]
        region: String,
    },
}

#[derive(Args)]
struct BoxInput {
    /// Path to a `{"table": ...}` JSON file; stdin when omitted or `-`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Record that the second party measured anticommuting observables.
    #[arg(long, default_value_t = false)]
    anticommuting: bool,
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Print names, indices, and the JSON table of every catalog box.
    List,
}

#[derive(Subcommand)]
enum QuantumCmd {
    /// Generate the Born-rule box of a named state under named settings.
    Gen {
        /// psi-plus, schmidt, werner, psi-plus-cc, me-mixture, cq, or qc
        #[arg(long)]
        state: String,
        /// State parameters as one comma-separated list.
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        params: Vec<f64>,
        /// Settings preset name.
        #[arg(long)]
        settings: String,
        /// Preset parameter, where the preset takes one.
        #[arg(long)]
        settings_param: Option<f64>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// schmidt, werner, psi-plus-cc, psi-plus, isotropic-pr, isotropic-mermin
    #[arg(long)]
    family: String,
    /// Settings preset for the quantum families.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    start: f64,
    #[arg(long)]
    stop: f64,
    #[arg(long)]
    steps: usize,
    /// Comma-separated list from: chsh, mermin, steering, G, Q, mu, nu.
    #[arg(long, value_delimiter = ',')]
    quantities: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv (default) or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct CheckArgs {
    /// bell-monogamy, gq-monogamy, cqqc-null, rbmd, or decomp-roundtrip
    #[arg(long)]
    property: String,
    #[arg(long, default_value_t = 1000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file for the JSON report; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };
    let tol = cli
        .tol
        .or_else(|| std::env::var("NSBOX_TOL").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(EPS_VAL);
    match dispatch(cli.cmd, tol) {
        Ok(code) => code,
        Err(e) => {
            match error_name(&e) {
                Some(name) => eprintln!("error[{name}]: {e}"),
                None => eprintln!("error: {e}"),
            }
            1
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

/// Variant name of domain errors, so scripts can match on it.
fn error_name(e: &AnyError) -> Option<String> {
    let dbg = if let Some(b) = e.downcast_ref::<nsbox::BoxError>() {
        format!("{b:?}")
    } else if let Some(q) = e.downcast_ref::<nsbox::QuantumError>() {
        format!("{q:?}")
    } else {
        return None;
    };
    dbg.split(['{', '(', ' '])
        .next()
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

fn dispatch(cmd: Cmd, tol: f64) -> Result<i32, AnyError> {
    match cmd {
        Cmd::Box(op) => run_box(op, tol),
        Cmd::Catalog(CatalogCmd::List) => {
            println!("{}", catalog_listing()?);
            Ok(0)
        }
        Cmd::Quantum(QuantumCmd::Gen {
            state,
            params,
            settings,
            settings_param,
        }) => {
            let st = build_state(&state, &params)?;
            let s = preset_settings(&settings, settings_param)?;
            let bx = born_box(&st, &s);
            let out = QuantumGenOutput {
                state,
                settings,
                bx: &bx,
                measures: serde_json::to_value(measure_report(&bx, s.bob_anticommuting()))?,
            };
            println!("{}", serde_json::to_string(&out)?);
            Ok(0)
        }
        Cmd::Sweep(args) => run_sweep_cmd(args),
        Cmd::Check(args) => {
            let property: Property = args.property.parse()?;
            let report = run_check(property, args.n, args.seed, 1e-9);
            eprintln!(
                "{}: {} cases in {:.3}s",
                report.property,
                report.run,
                report.wall.as_secs_f64()
            );
            let text = serde_json::to_string(&report)?;
            match args.out {
                Some(path) => fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(if report.failed > 0 { 2 } else { 0 })
        }
    }
}

fn read_box(input: &BoxInput, tol: f64) -> Result<NsBox, AnyError> {
    let text = match &input.input {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)?,
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    Ok(NsBox::from_json(&text, tol)?)
}

#[derive(Serialize)]
struct Canonical2Output<'a> {
    mu: f64,
    pr_index: Option<String>,
    residual: &'a NsBox,
    clamp: f64,
}

#[derive(Serialize)]
struct Canonical3Output<'a> {
    mu: f64,
    pr_index: Option<String>,
    nu: f64,
    q2box: &'a NsBox,
    residual: &'a NsBox,
    clamp: f64,
}

#[derive(Serialize)]
struct QuantumGenOutput<'a> {
    state: String,
    settings: String,
    #[serde(rename = "box")]
    bx: &'a NsBox,
    measures: serde_json::Value,
}

fn run_box(op: BoxCmd, tol: f64) -> Result<i32, AnyError> {
    match op {
        BoxCmd::Measure(input) => {
            let bx = read_box(&input, tol)?;
            let report = measure_report(&bx, input.anticommuting);
            println!("{}", serde_json::to_string(&report)?);
        }
        BoxCmd::Decompose { input, mode } => {
            let bx = read_box(&input, tol)?;
            let text = match mode.as_str() {
                "vertex" => serde_json::to_string(&vertex_weights(&bx)?)?,
                "canonical2" => {
                    let d = canonical2(&bx)?;
                    serde_json::to_string(&Canonical2Output {
                        mu: d.mu,
                        pr_index: d.pr.map(|k| k.to_string()),
                        residual: &d.residual,
                        clamp: d.clamp,
                    })?
                }
                "canonical3" => {
                    let d = canonical3(&bx)?;
                    serde_json::to_string(&Canonical3Output {
                        mu: d.mu,
                        pr_index: d.pr.map(|k| k.to_string()),
                        nu: d.nu,
                        q2box: &d.q2box,
                        residual: &d.residual,
                        clamp: d.clamp,
                    })?
                }
                other => return Err(format!("unknown decompose mode `{other}`").into()),
            };
            println!("{text}");
        }
        BoxCmd::Membership { input, region } => {
            let bx = read_box(&input, tol)?;
            let region: Region = region.parse()?;
            println!("{}", serde_json::to_string(&membership(&bx, region))?);
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CatalogEntry {
    family: &'static str,
    index: String,
    #[serde(rename = "box")]
    bx: NsBox,
}

fn catalog_listing() -> Result<String, AnyError> {
    use nsbox::catalog::*;
    let mut entries = Vec::new();
    for k in PrIndex::all() {
        entries.push(CatalogEntry {
            family: "pr",
            index: k.to_string(),
            bx: pr_box(k),
        });
    }
    for l in DetIndex::all() {
        entries.push(CatalogEntry {
            family: "det",
            index: l.to_string(),
            bx: det_box(l),
        });
    }
    for k in PrIndex::all() {
        entries.push(CatalogEntry {
            family: "mermin-mm",
            index: k.to_string(),
            bx: mermin_box_mm(k),
        });
    }
    for e in nmm_boxes() {
        entries.push(CatalogEntry {
            family: "mermin-nmm",
            index: format!("{}:{}", e.family, e.raw),
            bx: e.table,
        });
    }
    for k in PrIndex::all() {
        entries.push(CatalogEntry {
            family: "cc",
            index: k.to_string(),
            bx: cc_box(k),
        });
    }
    for k in PrIndex::all() {
        entries.push(CatalogEntry {
            family: "tsirelson",
            index: k.to_string(),
            bx: tsirelson_box(k),
        });
    }
    entries.push(CatalogEntry {
        family: "white-noise",
        index: "-".to_string(),
        bx: white_noise(),
    });
    Ok(serde_json::to_string(&entries)?)
}

fn build_state(name: &str, params: &[f64]) -> Result<TwoQubitState, AnyError> {
    let need = |n: usize| -> Result<(), AnyError> {
        if params.len() != n {
            return Err(
                format!("state `{name}` needs {n} parameter(s), got {}", params.len()).into(),
            );
        }
        Ok(())
    };
    Ok(match name {
        "psi-plus" => {
            need(0)?;
            psi_plus()
        }
        "schmidt" => {
            need(1)?;
            schmidt_state(params[0])?
        }
        "werner" => {
            need(1)?;
            werner_state(params[0])?
        }
        "psi-plus-cc" => {
            need(1)?;
            psi_plus_cc_mixture(params[0])?
        }
        "me-mixture" => {
            need(8)?;
            let mut w = [0.0; 8];
            w.copy_from_slice(params);
            me_mixture(&w)?
        }
        "cq" | "qc" => {
            need(10)?;
            let p0 = params[0];
            let r = [params[1], params[2], params[3]];
            let s0 = [params[4], params[5], params[6]];
            let s1 = [params[7], params[8], params[9]];
            if name == "cq" {
                cq_state(p0, r, s0, s1)?
            } else {
                qc_state(p0, r, s0, s1)?
            }
        }
        other => return Err(format!("unknown state `{other}`").into()),
    })
}

fn run_sweep_cmd(args: SweepArgs) -> Result<i32, AnyError> {
    let family: SweepFamily = args.family.parse()?;
    let quantities: Vec<Quantity> = args
        .quantities
        .iter()
        .map(|q| q.parse())
        .collect::<Result<_, _>>()?;
    let spec = SweepSpec {
        family,
        preset: args.preset,
        start: args.start,
        stop: args.stop,
        steps: args.steps,
        quantities,
    };
    let started = std::time::Instant::now();
    let table: SweepTable = run_sweep(&spec)?;
    eprintln!(
        "sweep: {} rows x {} quantities in {:.3}s",
        table.rows.len(),
        table.columns.len() - 1,
        started.elapsed().as_secs_f64()
    );
    let text = match args.format.as_str() {
        "csv" => csv_string(&table),
        "json" => serde_json::to_string(&table)? + "\n",
        other => return Err(format!("unknown format `{other}`").into()),
    };
    match args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}
