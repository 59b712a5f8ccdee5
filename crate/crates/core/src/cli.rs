//! Command-line front end. `main_with_args` returns the process exit code:
//! 0 success, 1 a check failed, 2 a precondition failed, 3 usage or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::decomposition::{sparsity_bound, sparsity_check, stratify};
use crate::descriptor::{FnSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::experiments::{run_experiment, verify_theorem1, MixedExperiment, RatioReport, SweepSpec, Variant};
use crate::luxemburg::{jensen_bound, jensen_check};
use crate::maximal::{maximal_field, Scope};
use crate::mesh::{enumerate_cubes, power_weight, DomainBox, MeshFn};
use crate::weights::classify_weight;
use crate::young::{ratio_lemma_f, YoungFn};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mixmax", version, about = "Mixed weak-type inequalities for Orlicz maximal operators on dyadic meshes")]
pub struct Cli {
    /// Worker threads for the numerical kernels.
    #[arg(long, global = true, env = "MIXMAX_THREADS")]
    pub threads: Option<usize>,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Mesh level J (cells per axis 2^J).
    #[arg(long, global = true)]
    pub mesh_level: Option<u32>,
    /// Box level K (box side 2^K).
    #[arg(long, global = true)]
    pub box_level: Option<i32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every experiment of --config and write CSV/JSON reports.
    Run {
        /// Skip the refinement companions.
        #[arg(long)]
        no_refine: bool,
    },
    /// Print the weight report of a weight descriptor.
    ClassifyWeight {
        /// Weight descriptor, e.g. '{"kind":"power","beta":0.5}'.
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Evaluate M_{γ,Φ} on a binary mesh function.
    Maximal {
        /// Young function descriptor.
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long)]
        input: PathBuf,
        /// `all` or `gridN`.
        #[arg(long, default_value = "all")]
        scope: String,
        /// Output path; `.csv` writes text, anything else the binary format.
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a report into a (t, lhs, rhs, ratio, clamped) table.
    ExportPlot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = PlotFormat::Csv)]
        format: PlotFormat,
    },
    /// Quick internal consistency checks.
    SelfTest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotFormat {
    Csv,
    Tsv,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::WeightClass { .. } | Error::Precondition { .. } | Error::NotInFr(_) | Error::NotEquivalent(_) => {
            EXIT_PRECONDITION
        }
        _ => EXIT_ERROR,
    }
}

fn reason(e: &Error, context: &str) -> serde_json::Value {
    json!({"code": e.code(), "message": e.to_string(), "context": context})
}

fn emit_reason(e: &Error, context: &str) {
    eprintln!("{}", reason(e, context));
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            if code != EXIT_OK {
                eprintln!("{}", json!({"code": "usage", "message": e.kind().to_string(), "context": "arguments"}));
            }
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = match &cli.command {
        Command::Run { no_refine } => cmd_run(&cli, !no_refine),
        Command::ClassifyWeight { weight, n } => cmd_classify(&cli, weight, *n),
        Command::Maximal {
            phi,
            gamma,
            input,
            scope,
            out,
        } => cmd_maximal(phi, *gamma, input, scope, out),
        Command::ExportPlot { report, out, format } => cmd_export(report, out, *format),
        Command::SelfTest => Ok(self_test(&mut std::io::stdout())),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            emit_reason(&e, "command");
            exit_code(&e)
        }
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn resolved_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("run needs --config".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.mesh_level {
        cfg.mesh.mesh_level = j;
    }
    if let Some(k) = cli.box_level {
        cfg.mesh.box_level = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(cli: &Cli, refine: bool) -> Result<i32> {
    let t0 = Instant::now();
    let cfg = resolved_config(cli)?;
    let refine = refine && cfg.refine;
    let load_ms = t0.elapsed().as_secs_f64() * 1e3;
    std::fs::create_dir_all(&cli.out_dir)?;

    let results: Vec<_> = cfg
        .experiments
        .par_iter()
        .map(|spec| {
            let t = Instant::now();
            let r = run_experiment(spec, &cfg.mesh, cfg.seed, refine);
            (r, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let mut timing = BTreeMap::new();
    timing.insert("load".to_string(), load_ms);
    let mut outputs = BTreeMap::new();
    let mut entries = Vec::new();
    let mut exit = EXIT_OK;
    for (spec, (result, ms)) in cfg.experiments.iter().zip(results) {
        timing.insert(format!("experiment:{}", spec.name), ms);
        let json_path = cli.out_dir.join(format!("{}.json", spec.name));
        match result {
            Ok((report, pre)) => {
                let mut csv = Vec::new();
                report.write_csv(&mut csv)?;
                let csv_name = format!("{}.csv", spec.name);
                std::fs::write(cli.out_dir.join(&csv_name), &csv)?;
                outputs.insert(csv_name, sha256_hex(&csv));
                write_json(
                    &json_path,
                    &json!({"name": spec.name, "spec": spec, "preconditions": pre, "report": report}),
                )?;
                if !report.pass {
                    exit = exit.max(EXIT_FAIL);
                }
                entries.push(json!({
                    "name": spec.name, "variant": report.variant,
                    "status": if report.pass { "pass" } else { "fail" },
                    "sup_ratio": report.sup_ratio, "refinement_deltas": report.refinement_deltas,
                }));
            }
            Err(e) => {
                emit_reason(&e, &spec.name);
                let code = exit_code(&e);
                exit = exit.max(code);
                let weight_report = match &e {
                    Error::WeightClass { report, subject, .. } => json!({"subject": subject, "report": report}),
                    _ => serde_json::Value::Null,
                };
                write_json(
                    &json_path,
                    &json!({"name": spec.name, "spec": spec, "error": reason(&e, &spec.name), "weight_report": weight_report}),
                )?;
                entries.push(json!({
                    "name": spec.name, "variant": spec.variant.name(),
                    "status": if code == EXIT_PRECONDITION { "precondition" } else { "error" },
                    "code": e.code(),
                }));
            }
        }
    }
    write_json(
        &cli.out_dir.join("summary.json"),
        &json!({"all_pass": exit == EXIT_OK, "exit_code": exit, "experiments": entries}),
    )?;
    timing.insert("total".to_string(), t0.elapsed().as_secs_f64() * 1e3);
    write_json(
        &cli.out_dir.join("manifest.json"),
        &json!({
            "config_path": cli.config,
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "seed": cfg.seed,
            "refine": refine,
            "resolved": cfg,
            "timing_ms": timing,
            "outputs_sha256": outputs,
        }),
    )?;
    Ok(exit)
}

fn cmd_classify(cli: &Cli, weight: &str, n: usize) -> Result<i32> {
    let spec: WeightSpec = serde_json::from_str(weight).map_err(|e| Error::Config(format!("weight descriptor: {e}")))?;
    let report = classify_weight(
        &spec,
        n,
        cli.box_level.unwrap_or(2),
        cli.mesh_level.unwrap_or(8),
        cli.seed.unwrap_or(0),
    )?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(EXIT_OK)
}

fn cmd_maximal(phi: &str, gamma: f64, input: &Path, scope: &str, out: &Path) -> Result<i32> {
    let phi: YoungFn = serde_json::from_str(phi).map_err(|e| Error::Config(format!("phi descriptor: {e}")))?;
    phi.validate()?;
    let scope: Scope = scope.parse()?;
    let f = MeshFn::read_binary(std::io::BufReader::new(File::open(input)?))?;
    let m = maximal_field(&f, &phi, gamma, scope)?;
    let w = BufWriter::new(File::create(out)?);
    if out.extension().is_some_and(|e| e == "csv") {
        m.write_csv(w)?;
    } else {
        m.write_binary(w)?;
    }
    Ok(EXIT_OK)
}

/// Writes the plot table of a report with the given delimiter.
pub fn write_plot<W: Write>(report: &RatioReport, w: W, format: PlotFormat) -> Result<()> {
    let delimiter = match format {
        PlotFormat::Csv => b',',
        PlotFormat::Tsv => b'\t',
    };
    let mut out = csv::WriterBuilder::new().delimiter(delimiter).from_writer(w);
    out.write_record(["t", "lhs", "rhs", "ratio", "clamped"])?;
    for r in &report.rows {
        out.write_record([
            r.t.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.ratio.map(|x| x.to_string()).unwrap_or_default(),
            u8::from(r.clamped).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_export(report: &Path, out: &Path, format: PlotFormat) -> Result<i32> {
    let text = std::fs::read_to_string(report).map_err(|e| Error::Precondition {
        code: "missing_report".into(),
        detail: format!("{}: {e}", report.display()),
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let body = value.get("report").cloned().unwrap_or(value);
    let rep: RatioReport = serde_json::from_value(body).map_err(|e| Error::Format(format!("not a ratio report: {e}")))?;
    write_plot(&rep, BufWriter::new(File::create(out)?), format)?;
    Ok(EXIT_OK)
}

/// Dyadic averages maximized per cell by direct enumeration.
fn prefix_sum_maximal(f: &[f64]) -> Vec<f64> {
    let mut prefix = vec![0.0];
    for x in f {
        prefix.push(prefix.last().unwrap() + x);
    }
    let n = f.len();
    let mut best = vec![0.0_f64; n];
    let mut size = 1;
    while size <= n {
        for start in (0..n).step_by(size) {
            let avg = (prefix[start + size] - prefix[start]) / size as f64;
            for b in &mut best[start..start + size] {
                *b = b.max(avg);
            }
        }
        size *= 2;
    }
    best
}

fn self_check(name: &str, run: impl FnOnce() -> Result<Option<String>>, out: &mut dyn Write) -> bool {
    let (ok, detail) = match run() {
        Ok(None) => (true, String::new()),
        Ok(Some(d)) => (false, d),
        Err(e) => (false, e.to_string()),
    };
    let _ = if ok {
        writeln!(out, "PASS {name}")
    } else {
        writeln!(out, "FAIL {name}: {detail}")
    };
    ok
}

/// Runs the quick checks and reports one line per check.
pub fn self_test(out: &mut dyn Write) -> i32 {
    let mut ok = true;
    ok &= self_check(
        "dyadic maximal vs prefix sums",
        || {
            let d = DomainBox::new(1, vec![0.0], 0)?;
            let f = FnSpec::Random {
                seed: 11,
                lattice_level: -6,
                support_level: 0,
                max: 1.0,
            }
            .build(&d, 6)?;
            let m = maximal_field(&f, &YoungFn::identity(), 0.0, Scope::Grid(0))?;
            let oracle = prefix_sum_maximal(f.values());
            let worst = m
                .values()
                .iter()
                .zip(&oracle)
                .map(|(a, b)| (a - b).abs() / b.max(1e-300))
                .fold(0.0, f64::max);
            Ok((worst > 1e-12).then(|| format!("relative gap {worst}")))
        },
        out,
    );
    ok &= self_check(
        "ratio lemma bounds",
        || {
            let top = (1.0 / std::f64::consts::E).exp();
            for i in 0..10_000 {
                let x = 10f64.powf(-6.0 + 12.0 * i as f64 / 9999.0);
                let y = ratio_lemma_f(x)?;
                if !(y >= 1.0 - 1e-12 && y <= top + 1e-12) {
                    return Ok(Some(format!("f({x}) = {y}")));
                }
            }
            Ok(None)
        },
        out,
    );
    ok &= self_check(
        "jensen constant",
        || {
            let d = DomainBox::centered(1, 1)?;
            let phi = YoungFn::llogl(1.0, 1.0);
            let f = FnSpec::Random {
                seed: 3,
                lattice_level: -4,
                support_level: 1,
                max: 9.0,
            }
            .build(&d, 6)?;
            let q = enumerate_cubes(&d, 6, 0, 1, 1)?[0];
            let c = jensen_check(&f, &q, &phi, 2.0)?;
            let b = jensen_bound(&phi, 2.0);
            Ok((c > b).then(|| format!("{c} > {b}")))
        },
        out,
    );
    ok &= self_check(
        "decomposition sandwich and sparsity",
        || {
            let d = DomainBox::centered(1, 2)?;
            let f = FnSpec::Random {
                seed: 5,
                lattice_level: -4,
                support_level: 1,
                max: 4.0,
            }
            .build(&d, 6)?;
            let v = power_weight(&d, 6, 0.5)?;
            let s = stratify(&f, &v, 1.0, &YoungFn::llogl(1.0, 1.0), 2.0, None, 0)?;
            let chk = s.verify(&f, &v)?;
            let sp = sparsity_check(&s, f.frame())?;
            Ok((!chk.ok() || sp > sparsity_bound(1, 2.0) + 1e-9).then(|| format!("{chk:?}, sparsity {sp}")))
        },
        out,
    );
    ok &= self_check(
        "unweighted weak (1,1)",
        || {
            let d = DomainBox::centered(1, 2)?;
            let one = MeshFn::constant(d.clone(), 6, 1.0)?;
            let f = FnSpec::IndicatorMix {
                count: 8,
                seed: 2,
                lattice_level: -3,
                support_level: 1,
                height: 3.0,
            }
            .build(&d, 6)?;
            let sweep = SweepSpec::default().resolve(f.max())?;
            let exp = MixedExperiment::new(one.clone(), one, f, 1.0, YoungFn::identity(), sweep, Variant::Theorem1)?
                .with_scope(Scope::Grid(0));
            let rep = verify_theorem1(&exp)?;
            Ok((rep.sup_ratio > 1.0).then(|| format!("sup ratio {}", rep.sup_ratio)))
        },
        out,
    );
    if ok {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}
