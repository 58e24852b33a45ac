//! Run specifications and the batch driver.
//!
//! A run is described by one schema with two frontends: a JSON config file
//! whose keys are the field names of [`SpecFields`], and command-line flags
//! using the kebab-case of the same names. Flags override the file, which
//! overrides the defaults.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::Parser;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::degrees::{DegreeSequence, ModelKind};
use crate::experiments::report::{fmt_sig12, ExperimentReport, Metadata, ReportRow};
use crate::experiments::{self, ExperimentConfig, StartVertices, TimeScale};
use crate::rng::RngStream;
use crate::stationary::{self, DIAGNOSTIC_HEADER};
use crate::{Error, Result};

/// Stream tag for generator shuffles, disjoint from the experiment tags.
const STREAM_GENERATOR: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    StaticCutoff,
    DoubleCutoff,
    Joint,
    Marginal,
    MarginalCrosscheck,
    Annealed,
    WeightLln,
    Diagnostics,
    QEstimate,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::StaticCutoff,
        Experiment::DoubleCutoff,
        Experiment::Joint,
        Experiment::Marginal,
        Experiment::MarginalCrosscheck,
        Experiment::Annealed,
        Experiment::WeightLln,
        Experiment::Diagnostics,
        Experiment::QEstimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::StaticCutoff => "static-cutoff",
            Experiment::DoubleCutoff => "double-cutoff",
            Experiment::Joint => "joint",
            Experiment::Marginal => "marginal",
            Experiment::MarginalCrosscheck => "marginal-crosscheck",
            Experiment::Annealed => "annealed",
            Experiment::WeightLln => "weight-lln",
            Experiment::Diagnostics => "diagnostics",
            Experiment::QEstimate => "q-estimate",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::BadValue(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl Threads {
    /// Worker count; `MIXLAB_THREADS` overrides `Auto`.
    pub fn resolve(self) -> usize {
        match self {
            Threads::Fixed(k) => k,
            Threads::Auto => std::env::var("MIXLAB_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
                .filter(|&k| k > 0)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |k| k.get())),
        }
    }
}

/// Every configurable field, all optional so sources can be layered.
#[derive(Debug, Clone, Default, PartialEq, Parser, Serialize, Deserialize)]
#[command(
    name = "mixlab",
    version,
    about = "Mixing experiments for random walks on random digraphs"
)]
#[serde(default, deny_unknown_fields)]
pub struct SpecFields {
    /// static-cutoff, double-cutoff, joint, marginal, marginal-crosscheck,
    /// annealed, weight-lln, diagnostics, q-estimate
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// dcm or ocm
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Generator: regular:d, mix:d1xk1,d2xk2,..., eulerian:d1xk1,...
    #[arg(long)]
    pub degrees: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub out_degrees: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub in_degrees: Option<Vec<u32>>,
    /// JSON document {model, out_degrees, in_degrees?}
    #[arg(long)]
    pub degrees_file: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, alias = "beta", value_delimiter = ',')]
    #[serde(alias = "beta")]
    pub beta_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub env_samples: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// auto, all, sample:K, or list:x1,x2,...
    #[arg(long)]
    pub start_vertices: Option<String>,
    #[arg(long, alias = "seed")]
    #[serde(alias = "seed")]
    pub root_seed: Option<u64>,
    /// regeneration or entropic
    #[arg(long)]
    pub time_scale: Option<String>,
    #[arg(long)]
    pub q_replicates: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub gamma_low: Option<f64>,
    #[arg(long)]
    pub gamma_high: Option<f64>,
    #[arg(long)]
    pub window_eps: Option<f64>,
    /// Horizon for weight-lln (default floor(T_ent)).
    #[arg(long)]
    pub t: Option<usize>,
    /// Horizons for annealed (default 1 and floor(2 T_ent)).
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<usize>>,
    /// Switch time for weight-lln (default t / 2).
    #[arg(long)]
    pub switch: Option<usize>,
    #[arg(long)]
    pub schedule_samples: Option<usize>,
    #[arg(long)]
    pub traj_samples: Option<usize>,
    /// Window half-width for weight-lln.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// auto or a positive integer
    #[arg(long)]
    pub threads: Option<String>,
    /// JSON config file with the same field names
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),* $(,)?) => {
        SpecFields { $($f: $top.$f.or($base.$f),)* }
    };
}

impl SpecFields {
    /// Fields of `self` where set, else those of `base`.
    pub fn over(self, base: SpecFields) -> SpecFields {
        overlay!(
            self,
            base,
            experiment,
            n,
            model,
            degrees,
            out_degrees,
            in_degrees,
            degrees_file,
            alpha,
            beta_grid,
            s_grid,
            env_samples,
            replicates,
            start_vertices,
            root_seed,
            time_scale,
            q_replicates,
            tol,
            max_iters,
            budget,
            gamma_low,
            gamma_high,
            window_eps,
            t,
            t_grid,
            switch,
            schedule_samples,
            traj_samples,
            eps,
            output_dir,
            threads,
            config,
        )
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub t: Option<usize>,
    pub t_grid: Option<Vec<usize>>,
    pub switch: Option<usize>,
    pub schedule_samples: usize,
    pub traj_samples: usize,
    pub eps: f64,
    pub output_dir: PathBuf,
    pub threads: Threads,
    /// Resolved fields, echoed into the metadata.
    pub echo: SpecFields,
}

/// Parses `argv` (program name first) layered over `config_file`, or over the
/// file named by `--config` when given.
pub fn parse_run_spec(argv: &[String], config_file: Option<&Path>) -> Result<RunSpec> {
    let flags = SpecFields::try_parse_from(argv).map_err(clap_error)?;
    let path = flags.config.clone().or_else(|| config_file.map(Path::to_path_buf));
    let file = match &path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str::<SpecFields>(&text).map_err(|e| {
                let msg = e.to_string();
                match msg.strip_prefix("unknown field `") {
                    Some(rest) => Error::UnknownFlag(rest.split('`').next().unwrap_or(rest).to_string()),
                    None => Error::Json(e),
                }
            })?
        }
        None => SpecFields::default(),
    };
    resolve(flags.over(file))
}

fn clap_error(e: clap::Error) -> Error {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Error::Usage(e.to_string()),
        ErrorKind::UnknownArgument => {
            let arg = e
                .get(clap::error::ContextKind::InvalidArg)
                .map(|v| v.to_string())
                .unwrap_or_else(|| e.to_string());
            Error::UnknownFlag(arg)
        }
        _ => Error::BadValue(e.to_string().trim().to_string()),
    }
}

fn resolve(f: SpecFields) -> Result<RunSpec> {
    let experiment: Experiment = f
        .experiment
        .as_deref()
        .ok_or(Error::MissingRequired("experiment"))?
        .parse()?;
    let root_seed = f.root_seed.unwrap_or(0);
    let seq = Arc::new(build_sequence(&f, root_seed)?);
    let mut cfg = ExperimentConfig::new(seq.clone());
    cfg.root_seed = root_seed;
    if let Some(a) = f.alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::BadValue(format!("alpha = {a} not in (0, 1)")));
        }
        cfg.alpha = a;
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = f.$f.clone() { cfg.$f = v; })* };
    }
    set!(
        beta_grid,
        s_grid,
        env_samples,
        replicates,
        q_replicates,
        tol,
        budget,
        gamma_low,
        gamma_high,
        window_eps
    );
    cfg.max_iters = f.max_iters;
    if let Some(s) = &f.start_vertices {
        cfg.start_vertices = parse_starts(s)?;
    }
    if let Some(s) = &f.time_scale {
        cfg.time_scale = match s.as_str() {
            "regeneration" => TimeScale::Regeneration,
            "entropic" => TimeScale::Entropic,
            other => return Err(Error::BadValue(format!("unknown time scale {other:?}"))),
        };
    }
    cfg.validate()?;
    let threads = match f.threads.as_deref() {
        None | Some("auto") => Threads::Auto,
        Some(s) => match s.parse::<usize>() {
            Ok(k) if k > 0 => Threads::Fixed(k),
            _ => return Err(Error::BadValue(format!("threads must be auto or positive, got {s:?}"))),
        },
    };
    let mut echo = f.clone();
    echo.n = Some(seq.n());
    echo.model = Some(seq.model());
    echo.alpha = Some(cfg.alpha);
    echo.beta_grid = Some(cfg.beta_grid.clone());
    echo.root_seed = Some(root_seed);
    echo.config = None;
    Ok(RunSpec {
        experiment,
        config: cfg,
        t: f.t,
        t_grid: f.t_grid,
        switch: f.switch,
        schedule_samples: f.schedule_samples.unwrap_or(400),
        traj_samples: f.traj_samples.unwrap_or(10_000),
        eps: f.eps.unwrap_or(0.1),
        output_dir: f.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        threads,
        echo,
    })
}

fn parse_starts(s: &str) -> Result<StartVertices> {
    let bad = || Error::BadValue(format!("bad start vertices {s:?}"));
    Ok(match s {
        "auto" => StartVertices::Auto,
        "all" => StartVertices::All,
        _ => match s.split_once(':') {
            Some(("sample", k)) => StartVertices::Sample(k.parse().map_err(|_| bad())?),
            Some(("list", v)) => StartVertices::Explicit(
                v.split(',')
                    .map(|x| x.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?,
            ),
            _ => return Err(bad()),
        },
    })
}

/// Degree data from a file, inline lists, or a generator, in that order.
fn build_sequence(f: &SpecFields, root_seed: u64) -> Result<DegreeSequence> {
    let seq = if let Some(path) = &f.degrees_file {
        DegreeSequence::load(path)?
    } else if let Some(out) = &f.out_degrees {
        let model = f.model.unwrap_or(if f.in_degrees.is_some() {
            ModelKind::Dcm
        } else {
            ModelKind::Ocm
        });
        DegreeSequence::new(model, out.clone(), f.in_degrees.clone())?
    } else if let Some(g) = &f.degrees {
        generate(g, f.n, f.model.unwrap_or(ModelKind::Dcm), root_seed)?
    } else {
        return Err(Error::MissingRequired("degrees"));
    };
    if let Some(n) = f.n {
        if n != seq.n() {
            return Err(Error::LengthMismatch {
                expected: n,
                got: seq.n(),
            });
        }
    }
    Ok(seq)
}

/// Expands a generator string.
///
/// - `regular:d`: every vertex has out- and in-degree `d`; needs `n`
/// - `mix:d1xk1,d2xk2,...`: `k_i` vertices of out-degree `d_i`; DCM in-degrees
///   are an independent seeded shuffle of the out-degree multiset
/// - `eulerian:d1xk1,...`: as `mix` with in-degrees equal to out-degrees
pub fn generate(spec: &str, n: Option<usize>, model: ModelKind, seed: u64) -> Result<DegreeSequence> {
    let bad = || Error::BadGeneratorSyntax(spec.to_string());
    let (kind, body) = spec.split_once(':').ok_or_else(bad)?;
    let out: Vec<u32> = match kind {
        "regular" => {
            let d: u32 = body.trim().parse().map_err(|_| bad())?;
            let n = n.ok_or(Error::MissingRequired("n"))?;
            vec![d; n]
        }
        "mix" | "eulerian" => {
            let mut out = Vec::new();
            for part in body.split(',') {
                let (d, k) = part.trim().split_once('x').ok_or_else(bad)?;
                let d: u32 = d.parse().map_err(|_| bad())?;
                let k: usize = k.parse().map_err(|_| bad())?;
                out.extend(std::iter::repeat_n(d, k));
            }
            if out.is_empty() {
                return Err(bad());
            }
            out
        }
        _ => return Err(bad()),
    };
    match model {
        ModelKind::Ocm => DegreeSequence::new(model, out, None),
        ModelKind::Dcm => {
            let mut inn = out.clone();
            if kind == "mix" {
                inn.shuffle(&mut RngStream::root(seed).derive(&[STREAM_GENERATOR]).rng());
            }
            DegreeSequence::new(model, out, Some(inn))
        }
    }
}

/// What a run produces before anything touches the file system.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stem: String,
    pub csv: String,
    pub meta: Metadata,
    /// Rows scored for the summary; empty for diagnostic runs.
    pub report: Option<ExperimentReport>,
    /// More than half of the replicates failed to converge.
    pub not_converged_dominated: bool,
}

impl RunOutput {
    pub fn summary(&self) -> String {
        let dev = self
            .report
            .as_ref()
            .and_then(|r| r.max_deviation())
            .map_or_else(|| "n/a".to_string(), fmt_sig12);
        let gamma = self.meta.gamma_hat.map_or_else(|| "n/a".to_string(), fmt_sig12);
        format!(
            "{}: n={} gamma_hat={} rows={} max_dev={} not_converged={}",
            self.meta.experiment,
            self.meta.n,
            gamma,
            self.report.as_ref().map_or(0, |r| r.rows.len()),
            dev,
            self.meta.not_converged
        )
    }
}

/// Runs the experiment on the current rayon pool.
pub fn execute(spec: &RunSpec) -> Result<RunOutput> {
    let cfg = &spec.config;
    let seq = &cfg.seq;
    let stem = format!(
        "{}_n{}_a{}_s{}",
        spec.experiment.name(),
        seq.n(),
        fmt_sig12(cfg.alpha),
        cfg.root_seed
    );
    let scale = seq.entropic_scale();
    let report = match spec.experiment {
        Experiment::StaticCutoff => experiments::static_cutoff_profile(cfg)?,
        Experiment::DoubleCutoff => {
            let [beta] = cfg.beta_grid[..] else {
                return Err(Error::BadValue("double-cutoff takes exactly one beta".into()));
            };
            experiments::double_cutoff_sweep(cfg, beta)?
        }
        Experiment::Joint => experiments::joint_trichotomy_curve(cfg)?,
        Experiment::Marginal => experiments::marginal_trichotomy_curve(cfg)?,
        Experiment::MarginalCrosscheck => crosscheck_report(spec)?,
        Experiment::Annealed => {
            let t_grid = spec.t_grid.clone().unwrap_or_else(|| vec![1, scale.steps(2.0).max(1)]);
            let mut rep = experiments::annealed_check(
                seq,
                &t_grid,
                cfg.env_samples,
                &cfg.start_vertices,
                RngStream::root(cfg.root_seed),
            )?;
            rep.meta.alpha = None;
            rep
        }
        Experiment::WeightLln => {
            let t = spec.t.unwrap_or_else(|| scale.steps(1.0).max(1));
            let s = spec.switch.unwrap_or(t / 2);
            let out =
                experiments::path_weight_lln(seq, s, t, spec.traj_samples, spec.eps, RngStream::root(cfg.root_seed))?;
            let f = out.frac_in_window;
            let mut meta = cfg.base_meta("weight-lln");
            meta.extra.insert("mean_rate".into(), serde_json::json!(out.mean_rate));
            meta.extra.insert(
                "rate_deviation".into(),
                serde_json::json!((out.mean_rate - out.entropy).abs()),
            );
            meta.extra.insert("switch".into(), serde_json::json!(s));
            meta.extra.insert("eps".into(), serde_json::json!(spec.eps));
            ExperimentReport {
                rows: vec![ReportRow {
                    abscissa: t as f64,
                    estimate: f,
                    std_err: (f * (1.0 - f) / out.samples as f64).sqrt(),
                    theory: 1.0,
                    n_effective: out.samples,
                    flagged: false,
                }],
                meta,
            }
        }
        Experiment::QEstimate => {
            let q = stationary::estimate_q(
                seq,
                cfg.replicates.max(2),
                RngStream::root(cfg.root_seed),
                cfg.tol,
                cfg.max_iters(),
            )?;
            let mut meta = cfg.base_meta("q-estimate");
            meta.q_hat = Some(q.q_hat);
            meta.q_std_err = Some(q.std_err);
            meta.not_converged = q.failed;
            ExperimentReport {
                rows: vec![ReportRow {
                    abscissa: 0.0,
                    estimate: q.q_hat.clamp(0.0, 1.0),
                    std_err: q.std_err,
                    theory: if seq.is_eulerian() { 0.0 } else { f64::NAN },
                    n_effective: q.used,
                    flagged: false,
                }],
                meta,
            }
        }
        Experiment::Diagnostics => {
            let rows = stationary::diagnostics(
                seq,
                cfg.replicates,
                RngStream::root(cfg.root_seed),
                cfg.tol,
                cfg.max_iters(),
            );
            let mut csv = String::from(DIAGNOSTIC_HEADER);
            csv.push('\n');
            for r in &rows {
                csv.push_str(&r.csv_line());
                csv.push('\n');
            }
            let mut meta = cfg.base_meta("diagnostics");
            meta.not_converged = rows.iter().filter(|r| !r.converged).count();
            let failed: Vec<_> = rows
                .iter()
                .filter(|r| !r.converged)
                .map(|r| (r.replicate, r.scc_count))
                .collect();
            if !failed.is_empty() {
                meta.extra.insert("failed_scc_counts".into(), serde_json::json!(failed));
            }
            attach_echo(&mut meta, spec);
            return Ok(RunOutput {
                stem,
                csv,
                not_converged_dominated: 2 * meta.not_converged > cfg.replicates,
                meta,
                report: None,
            });
        }
    };
    let mut meta = report.meta.clone();
    attach_echo(&mut meta, spec);
    let reps = meta.replicates.max(1);
    Ok(RunOutput {
        stem,
        csv: report.to_csv(),
        not_converged_dominated: 2 * meta.not_converged > reps,
        meta,
        report: Some(report),
    })
}

fn attach_echo(meta: &mut Metadata, spec: &RunSpec) {
    if let Ok(v) = serde_json::to_value(&spec.echo) {
        meta.extra.insert("spec".into(), v);
    }
}

/// One row per beta: the direct Monte-Carlo estimate at `t = floor(beta / alpha)`
/// against the decomposition value for the same configuration and start.
fn crosscheck_report(spec: &RunSpec) -> Result<ExperimentReport> {
    let cfg = &spec.config;
    let mut meta = cfg.base_meta("marginal-crosscheck");
    let mut rows = Vec::new();
    for &beta in &cfg.beta_grid {
        let t = match spec.t {
            Some(t) if cfg.beta_grid.len() == 1 => t,
            _ => cfg.regeneration_steps(beta),
        };
        let cc = experiments::marginal_mc_crosscheck(cfg, t, spec.schedule_samples)?;
        rows.push(ReportRow {
            abscissa: beta,
            estimate: cc.estimate,
            std_err: cc.std_err,
            theory: cc.reference,
            n_effective: spec.schedule_samples,
            flagged: false,
        });
    }
    meta.alpha = Some(cfg.alpha);
    meta.gamma_hat = Some(cfg.gamma_hat());
    meta.start_mode = "single".into();
    meta.start_count = 1;
    meta.env_samples = spec.schedule_samples;
    Ok(ExperimentReport { rows, meta })
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Executes `spec` on a dedicated pool and writes `<stem>.csv` and
/// `<stem>.json` into the output directory. Returns the paths written.
pub fn run_to_files(spec: &RunSpec) -> Result<(RunOutput, PathBuf, PathBuf)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads.resolve())
        .build()
        .map_err(|e| Error::BadValue(format!("thread pool: {e}")))?;
    let out = pool.install(|| execute(spec))?;
    fs::create_dir_all(&spec.output_dir).map_err(|e| Error::io(&spec.output_dir, e))?;
    let csv_path = spec.output_dir.join(format!("{}.csv", out.stem));
    let json_path = spec.output_dir.join(format!("{}.json", out.stem));
    write_atomic(&csv_path, out.csv.as_bytes())?;
    let mut json = serde_json::to_string_pretty(&out.meta)?;
    json.push('\n');
    write_atomic(&json_path, json.as_bytes())?;
    Ok((out, csv_path, json_path))
}

/// Runs a spec and maps the outcome to an exit code: 0 on success, 2 when
/// non-convergence dominates, 1 on any other error.
pub fn run(spec: &RunSpec) -> i32 {
    match run_to_files(spec) {
        Ok((out, csv, _)) => {
            println!("{} -> {}", out.summary(), csv.display());
            if out.not_converged_dominated {
                eprintln!("more than half of the replicates did not converge");
                2
            } else {
                0
            }
        }
        Err(e @ (Error::NotConverged { .. } | Error::AllReplicatesFailed { .. })) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("mixlab")
            .chain(s.split_whitespace())
            .map(String::from)
            .collect()
    }

    #[test]
    fn direct_mapping() {
        let spec = parse_run_spec(
            &argv("--experiment joint --n 10000 --degrees regular:3 --alpha 0.01 --beta 0.5,1,2 --seed 7"),
            None,
        )
        .unwrap();
        assert_eq!(spec.experiment, Experiment::Joint);
        assert_eq!(spec.config.seq.n(), 10_000);
        assert_eq!(spec.config.beta_grid, vec![0.5, 1.0, 2.0]);
        assert_eq!(spec.config.root_seed, 7);
        assert!((spec.config.gamma_hat() - 0.01 * spec.config.seq.entropic_scale().t_ent).abs() < 1e-15);
    }

    #[test]
    fn mix_generator_is_valid_non_eulerian() {
        let spec = parse_run_spec(
            &argv("--experiment marginal --degrees mix:2x5000,3x5000 --model dcm"),
            None,
        )
        .unwrap();
        let seq = &spec.config.seq;
        assert_eq!(seq.n(), 10_000);
        assert!(!seq.is_eulerian());
        let mut a = seq.out_degrees().to_vec();
        let mut b = seq.in_degrees().unwrap().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_run_spec(&argv("--experiment joint --n 10 --degrees regular:3 --alpha 1.5"), None),
            Err(Error::BadValue(_))
        ));
        assert!(matches!(
            parse_run_spec(&argv("--experiment joint --n 10 --degrees regular:3 --bogus 1"), None),
            Err(Error::UnknownFlag(_))
        ));
        assert!(matches!(
            parse_run_spec(&argv("--experiment joint --degrees mix:2y5"), None),
            Err(Error::BadGeneratorSyntax(_))
        ));
        assert!(matches!(
            parse_run_spec(&argv("--n 10 --degrees regular:3"), None),
            Err(Error::MissingRequired("experiment"))
        ));
        assert!(matches!(
            parse_run_spec(&argv("--experiment joint --degrees regular:3"), None),
            Err(Error::MissingRequired("n"))
        ));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(
            &path,
            r#"{"experiment": "static-cutoff", "n": 50, "degrees": "regular:3", "alpha": 0.2, "root_seed": 3}"#,
        )
        .unwrap();
        let spec = parse_run_spec(&argv("--alpha 0.3"), Some(&path)).unwrap();
        assert_eq!(spec.experiment, Experiment::StaticCutoff);
        assert_eq!(spec.config.alpha, 0.3);
        assert_eq!(spec.config.root_seed, 3);

        fs::write(&path, r#"{"experiment": "joint", "colour": 1}"#).unwrap();
        assert!(matches!(parse_run_spec(&argv(""), Some(&path)), Err(Error::UnknownFlag(k)) if k == "colour"));
    }

    #[test]
    fn eulerian_generator() {
        let seq = generate("eulerian:2x3,4x2", None, ModelKind::Dcm, 0).unwrap();
        assert!(seq.is_eulerian());
        assert_eq!(seq.out_degrees(), &[2, 2, 2, 4, 4]);
        assert!(generate("regular:x", Some(3), ModelKind::Dcm, 0).is_err());
    }

    #[test]
    fn files_written_and_reparse() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().display().to_string();
        let spec = parse_run_spec(
            &argv(&format!(
                "--experiment static-cutoff --n 60 --degrees regular:3 --beta 0.5,2 --replicates 2 --threads 1 --output-dir {out}"
            )),
            None,
        )
        .unwrap();
        assert_eq!(run(&spec), 0);
        let csv = fs::read_to_string(dir.path().join("static-cutoff_n60_a0.01_s0.csv")).unwrap();
        assert_eq!(ExperimentReport::parse_csv(&csv).unwrap().len(), 2);
        let meta: Metadata =
            serde_json::from_str(&fs::read_to_string(dir.path().join("static-cutoff_n60_a0.01_s0.json")).unwrap())
                .unwrap();
        assert_eq!(meta.n, 60);
        assert!(meta.extra.contains_key("spec"));
    }
}
