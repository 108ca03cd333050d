//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use seisfrag_core::fragility::{
    aggregate_runs, repeat_fragility_runs, DamageState, FragilityCurve, FragilityRun, LevelDetail,
    MagnitudeGrid,
};
use seisfrag_core::gmpe::{Component, Point, SeismicModel};
use seisfrag_core::limitstate::{LsKind, NetworkLimitState};
use seisfrag_core::reference::{
    crude_mcs, exact_two_component, McsTarget, SystemKind, TwoComponentSystem, DEFAULT_MCS_CAP,
};
use seisfrag_core::sampler::GaussianMap;
use seisfrag_core::subsetsim::{repeat_ss, run_ss, LevelRecord};

use crate::config::{
    build_damage_states, build_grid, build_ss_config, parse_ls_kind, resolve_aggregation,
    NetworkFile, ResolvedStudy, StudyFile,
};
use crate::CliError;

pub fn validate(path: &Path) -> Result<(), CliError> {
    let file = NetworkFile::read(path)?;
    let diagnostics = file.diagnostics();
    if diagnostics.is_empty() {
        let loaded = file.load()?;
        println!(
            "ok: {} nodes ({} random), {} edges",
            loaded.network.node_count(),
            loaded.network.random_dim(),
            loaded.network.edge_count()
        );
        Ok(())
    } else {
        for d in &diagnostics {
            eprintln!("error: {d}");
        }
        Err(CliError::User(format!(
            "{} problem(s) in {}",
            diagnostics.len(),
            path.display()
        )))
    }
}

pub struct ReliabilityArgs {
    pub network: PathBuf,
    pub config: Option<PathBuf>,
    pub mw: f64,
    pub ls: String,
    pub method: String,
    pub od: Option<Vec<String>>,
    pub k: Option<usize>,
    pub reps: Option<usize>,
    pub n: Option<usize>,
    pub p0: Option<f64>,
    pub tf: Option<f64>,
    pub max_levels: Option<usize>,
    pub seed: Option<u64>,
    pub mcs_n: Option<u64>,
    pub target_cov: Option<f64>,
    pub cap: Option<u64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct ReliabilityRecord {
    command: String,
    mw: f64,
    ls: String,
    aggregation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    method: String,
    n: u64,
    reps: usize,
    seed: u64,
    config_hash: String,
    p_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cov: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_err: Option<f64>,
    mean_n_g: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eff: Option<f64>,
    mean_wall_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<LevelRecord>>,
    /// Per-repetition results when the study is repeated.
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<Vec<RunBrief>>,
}

#[derive(Serialize)]
struct RunBrief {
    p_hat: f64,
    n_g: u64,
    levels: usize,
    seed: u64,
}

pub fn reliability(args: ReliabilityArgs) -> Result<(), CliError> {
    let kind = parse_ls_kind(&args.ls)?;
    let study_file = args
        .config
        .as_deref()
        .map(StudyFile::read)
        .transpose()?
        .unwrap_or_default();
    let loaded = NetworkFile::read(&args.network)?.load()?;
    let (spec, aggregation, k, pairs) = resolve_aggregation(kind, &loaded, &args.od, args.k)?;
    let cfg = build_ss_config(
        &study_file,
        args.n,
        args.p0,
        args.tf,
        args.max_levels,
        args.seed,
    )?;
    let reps = args.reps.or(study_file.study.reps).unwrap_or(1);

    let dist = loaded
        .model
        .build_margin_distribution(&loaded.network, args.mw)
        .map_err(|e| CliError::User(e.to_string()))?;
    let map = GaussianMap::from_distribution(&dist)?;

    let resolved = ResolvedStudy {
        ls_kind: args.ls.clone(),
        aggregation: aggregation.clone(),
        k,
        pairs,
        n: cfg.n,
        p0: cfg.p0,
        t_f: cfg.t_f,
        max_levels: cfg.max_levels,
        seed: cfg.seed,
        reps,
        sigma_eta: loaded.model.sigma_eta,
        sigma_eps: loaded.model.sigma_eps,
    };
    let hash = resolved.config_hash();

    let record = match args.method.as_str() {
        "ss" => {
            if kind == LsKind::Binary {
                return Err(CliError::User(
                    "the binary limit state takes only the values 0 and 1, so the p0-quantile \
                     degenerates and subset simulation cannot progress; use --method mcs"
                        .into(),
                ));
            }
            if reps > 1 {
                let summary = repeat_ss(
                    |_rep| {
                        let mut ls =
                            NetworkLimitState::for_distribution(&loaded.network, &spec, &dist)
                                .expect("spec already resolved");
                        move |z: &[f64]| ls.value(z)
                    },
                    &map,
                    &cfg,
                    reps,
                )?;
                let runs = summary
                    .runs
                    .iter()
                    .map(|r| RunBrief {
                        p_hat: r.p_hat,
                        n_g: r.n_g,
                        levels: r.levels.len(),
                        seed: r.seed,
                    })
                    .collect();
                ReliabilityRecord {
                    command: "reliability".into(),
                    mw: args.mw,
                    ls: args.ls.clone(),
                    aggregation,
                    k,
                    method: "ss".into(),
                    n: cfg.n as u64,
                    reps,
                    seed: cfg.seed,
                    config_hash: hash.clone(),
                    p_hat: summary.mean_p_hat,
                    cov: Some(summary.cov),
                    std_err: None,
                    mean_n_g: summary.mean_n_g,
                    eff: Some(summary.eff),
                    mean_wall_s: summary.mean_wall_s,
                    levels: None,
                    runs: Some(runs),
                }
            } else {
                let mut ls = NetworkLimitState::for_distribution(&loaded.network, &spec, &dist)
                    .expect("spec already resolved");
                let res = run_ss(&mut |z| ls.value(z), &map, &cfg)?;
                ReliabilityRecord {
                    command: "reliability".into(),
                    mw: args.mw,
                    ls: args.ls.clone(),
                    aggregation,
                    k,
                    method: "ss".into(),
                    n: cfg.n as u64,
                    reps: 1,
                    seed: cfg.seed,
                    config_hash: hash.clone(),
                    p_hat: res.p_hat,
                    cov: None,
                    std_err: None,
                    mean_n_g: res.n_g as f64,
                    eff: None,
                    mean_wall_s: res.wall_time_s,
                    levels: Some(res.levels),
                    runs: None,
                }
            }
        }
        "mcs" => {
            let target = match args.target_cov {
                Some(cov) => McsTarget::TargetCov {
                    cov,
                    cap: args.cap.unwrap_or(DEFAULT_MCS_CAP),
                },
                None => McsTarget::Samples(args.mcs_n.unwrap_or(1_000_000)),
            };
            let start = std::time::Instant::now();
            let res = run_mcs(&loaded.network, &spec, &dist, &map, target, cfg.seed);
            if res.hit_cap {
                eprintln!("note: sample cap reached before the target c.o.v.; result is partial");
            }
            ReliabilityRecord {
                command: "reliability".into(),
                mw: args.mw,
                ls: args.ls.clone(),
                aggregation,
                k,
                method: "mcs".into(),
                n: res.n_used,
                reps: 1,
                seed: cfg.seed,
                config_hash: hash.clone(),
                p_hat: res.p_hat,
                cov: None,
                std_err: Some(res.std_err),
                mean_n_g: res.n_used as f64,
                eff: None,
                mean_wall_s: start.elapsed().as_secs_f64(),
                levels: None,
                runs: None,
            }
        }
        other => {
            return Err(CliError::User(format!(
                "unknown method `{other}` (expected ss or mcs)"
            )))
        }
    };

    print!("{}", summary_text(&record));
    if let Some(path) = &args.out {
        write_json(path, &record)?;
    }
    if let Some(path) = &args.csv {
        append_reliability_csv(path, &record)?;
    }
    Ok(())
}

fn summary_text(r: &ReliabilityRecord) -> String {
    let mut s = format!(
        "{} at Mw {} ({}, {}): p_hat = {:.6e}\n",
        r.method, r.mw, r.ls, r.aggregation, r.p_hat
    );
    if let Some(cov) = r.cov {
        s.push_str(&format!("  c.o.v. = {cov:.4} over {} reps\n", r.reps));
    }
    if let Some(se) = r.std_err {
        s.push_str(&format!("  s.e. = {se:.3e}\n"));
    }
    if let Some(eff) = r.eff {
        s.push_str(&format!("  eff = {eff:.3}\n"));
    }
    s.push_str(&format!(
        "  N_G = {:.0}, wall = {:.3} s, seed = {}, config = {}\n",
        r.mean_n_g, r.mean_wall_s, r.seed, r.config_hash
    ));
    s
}

fn run_mcs(
    network: &seisfrag_core::netgraph::Network,
    spec: &seisfrag_core::limitstate::LimitStateSpec,
    dist: &seisfrag_core::gmpe::MarginDistribution,
    map: &GaussianMap,
    target: McsTarget,
    seed: u64,
) -> seisfrag_core::reference::McsResult {
    crude_mcs(
        || {
            let mut ls = NetworkLimitState::for_distribution(network, spec, dist)
                .expect("spec already resolved");
            move |z: &[f64]| ls.value(z)
        },
        map,
        target,
        seed,
    )
}

pub struct FragilityArgs {
    pub network: PathBuf,
    pub config: Option<PathBuf>,
    pub grid: Option<String>,
    pub intervals: Option<String>,
    pub damage_states: Option<String>,
    pub ls: String,
    pub od: Option<Vec<String>>,
    pub k: Option<usize>,
    pub reps: Option<usize>,
    pub n: Option<usize>,
    pub p0: Option<f64>,
    pub tf: Option<f64>,
    pub max_levels: Option<usize>,
    pub seed: Option<u64>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
}

#[derive(Serialize)]
struct FragilityDiagnostics {
    config_hash: String,
    seed: u64,
    reps: usize,
    grid: MagnitudeGrid,
    curves: Vec<FragilityCurve>,
    /// Level details of the first repetition per damage state.
    first_run_levels: Vec<NamedLevels>,
}

#[derive(Serialize)]
struct NamedLevels {
    damage_state: String,
    levels: Vec<LevelDetail>,
}

pub fn fragility(args: FragilityArgs) -> Result<(), CliError> {
    let kind = parse_ls_kind(&args.ls)?;
    let study_file = args
        .config
        .as_deref()
        .map(StudyFile::read)
        .transpose()?
        .unwrap_or_default();
    let loaded = NetworkFile::read(&args.network)?.load()?;
    let (spec, aggregation, k, pairs) = resolve_aggregation(kind, &loaded, &args.od, args.k)?;
    if kind == LsKind::Binary {
        return Err(CliError::User(
            "fragility sweeps need an informative limit state; use --ls rp or --ls sp".into(),
        ));
    }
    let cfg = build_ss_config(
        &study_file,
        args.n,
        args.p0,
        args.tf,
        args.max_levels,
        args.seed,
    )?;
    let grid = build_grid(args.grid.as_deref(), args.intervals.as_deref(), &study_file)?;
    let damage = build_damage_states(args.damage_states.as_deref(), &study_file)?;
    let reps = args.reps.or(study_file.study.reps).unwrap_or(250);

    let resolved = ResolvedStudy {
        ls_kind: args.ls.clone(),
        aggregation,
        k,
        pairs,
        n: cfg.n,
        p0: cfg.p0,
        t_f: cfg.t_f,
        max_levels: cfg.max_levels,
        seed: cfg.seed,
        reps,
        sigma_eta: loaded.model.sigma_eta,
        sigma_eps: loaded.model.sigma_eps,
    };
    let hash = resolved.config_hash();

    // one sweep per damage state (or a single sweep with the file's
    // capacities)
    let states: Vec<Option<DamageState>> = match &damage {
        Some(set) => set.states.iter().cloned().map(Some).collect(),
        None => vec![None],
    };
    let mut curves = Vec::new();
    let mut first_levels = Vec::new();
    for state in states {
        let (label, network) = match &state {
            Some(ds) => (
                ds.label.clone(),
                loaded
                    .network
                    .with_capacities(ds.capacity_median, ds.capacity_log_std),
            ),
            None => ("network".to_string(), loaded.network.clone()),
        };
        let dist = loaded
            .model
            .build_margin_distribution(&network, grid.mw_max)
            .map_err(|e| CliError::User(e.to_string()))?;
        let runs: Vec<FragilityRun> =
            repeat_fragility_runs(&network, &dist, &spec, &grid, &cfg, reps)?;
        first_levels.push(NamedLevels {
            damage_state: label.clone(),
            levels: runs[0].levels.clone(),
        });
        curves.push(aggregate_runs(&runs, &label));
    }

    write_fragility_csv(args.out_csv.as_deref(), &curves, cfg.seed, &hash)?;
    if let Some(path) = &args.out_json {
        let diagnostics = FragilityDiagnostics {
            config_hash: hash,
            seed: cfg.seed,
            reps,
            grid,
            curves,
            first_run_levels: first_levels,
        };
        write_json(path, &diagnostics)?;
    }
    Ok(())
}

/// Canonical curve CSV: one row per damage state and grid point, empty cells
/// where a single run carries no spread statistics.
fn write_fragility_csv(
    path: Option<&Path>,
    curves: &[FragilityCurve],
    seed: u64,
    hash: &str,
) -> Result<(), CliError> {
    let mut writer: csv::Writer<Box<dyn Write>> = match path {
        Some(p) => csv::Writer::from_writer(Box::new(std::fs::File::create(p)?)),
        None => csv::Writer::from_writer(Box::new(std::io::stdout().lock())),
    };
    writer.write_record([
        "damage_state",
        "mw",
        "p_hat",
        "cov",
        "p_lo",
        "p_hi",
        "n_g_cum",
        "seed",
        "config_hash",
    ])?;
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for curve in curves {
        for rec in &curve.records {
            writer.write_record([
                curve.damage_state.clone(),
                rec.mw.to_string(),
                format!("{:e}", rec.p_hat),
                fmt_opt(rec.cov),
                fmt_opt(rec.p_lo),
                fmt_opt(rec.p_hi),
                rec.n_g_cum.to_string(),
                seed.to_string(),
                hash.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub struct McsArgs {
    pub network: PathBuf,
    pub config: Option<PathBuf>,
    pub mw: f64,
    pub ls: String,
    pub od: Option<Vec<String>>,
    pub k: Option<usize>,
    pub n: u64,
    pub target_cov: Option<f64>,
    pub cap: Option<u64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct McsRecord {
    command: String,
    mw: f64,
    ls: String,
    aggregation: String,
    p_hat: f64,
    std_err: f64,
    n_used: u64,
    hit_cap: bool,
    seed: u64,
    config_hash: String,
}

pub fn mcs(args: McsArgs) -> Result<(), CliError> {
    let kind = parse_ls_kind(&args.ls)?;
    let study_file = args
        .config
        .as_deref()
        .map(StudyFile::read)
        .transpose()?
        .unwrap_or_default();
    let _ = &study_file;
    let loaded = NetworkFile::read(&args.network)?.load()?;
    let (spec, aggregation, k, pairs) = resolve_aggregation(kind, &loaded, &args.od, args.k)?;
    let dist = loaded
        .model
        .build_margin_distribution(&loaded.network, args.mw)
        .map_err(|e| CliError::User(e.to_string()))?;
    let map = GaussianMap::from_distribution(&dist)?;
    let target = match args.target_cov {
        Some(cov) => McsTarget::TargetCov {
            cov,
            cap: args.cap.unwrap_or(DEFAULT_MCS_CAP),
        },
        None => McsTarget::Samples(args.n),
    };
    let res = run_mcs(&loaded.network, &spec, &dist, &map, target, args.seed);
    let resolved = ResolvedStudy {
        ls_kind: args.ls.clone(),
        aggregation: aggregation.clone(),
        k,
        pairs,
        n: res.n_used as usize,
        p0: 0.0,
        t_f: 0.0,
        max_levels: 0,
        seed: args.seed,
        reps: 1,
        sigma_eta: loaded.model.sigma_eta,
        sigma_eps: loaded.model.sigma_eps,
    };
    let record = McsRecord {
        command: "mcs".into(),
        mw: args.mw,
        ls: args.ls.clone(),
        aggregation,
        p_hat: res.p_hat,
        std_err: res.std_err,
        n_used: res.n_used,
        hit_cap: res.hit_cap,
        seed: args.seed,
        config_hash: resolved.config_hash(),
    };
    println!(
        "mcs at Mw {} ({}): p_hat = {:.6e} (s.e. {:.3e}, n = {}{})",
        record.mw,
        record.ls,
        record.p_hat,
        record.std_err,
        record.n_used,
        if record.hit_cap { ", cap reached" } else { "" }
    );
    if let Some(path) = &args.out {
        write_json(path, &record)?;
    }
    Ok(())
}

pub struct OracleArgs {
    pub system: String,
    pub mw: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub r1: f64,
    pub r2: f64,
    pub delta: f64,
    pub c_median: f64,
    pub zeta: f64,
    pub sigma_eta: f64,
    pub sigma_eps: f64,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleRecord {
    command: String,
    system: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mw: Option<f64>,
    beta1: f64,
    beta2: f64,
    rho: f64,
    p_exact: f64,
}

pub fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let kind = match args.system.as_str() {
        "series" => SystemKind::Series,
        "parallel" => SystemKind::Parallel,
        other => {
            return Err(CliError::User(format!(
                "unknown system `{other}` (expected series or parallel)"
            )))
        }
    };
    let (beta1, beta2, rho) = match (&args.beta, args.rho, args.mw) {
        (Some(betas), Some(rho), _) => (betas[0], betas[1], rho),
        (Some(_), None, _) => {
            return Err(CliError::User("--beta needs --rho".into()));
        }
        (None, Some(_), _) => {
            return Err(CliError::User("--rho needs --beta B1 B2".into()));
        }
        (None, None, Some(mw)) => geometry_betas(&args, mw)?,
        (None, None, None) => {
            return Err(CliError::User(
                "pass either --mw (geometry mode) or --beta B1 B2 --rho R".into(),
            ));
        }
    };
    let p = exact_two_component(&TwoComponentSystem {
        kind,
        beta1,
        beta2,
        rho,
    })
    .map_err(|e| CliError::User(e.to_string()))?;
    let record = OracleRecord {
        command: "oracle".into(),
        system: args.system.clone(),
        mw: args.mw,
        beta1,
        beta2,
        rho,
        p_exact: p,
    };
    println!(
        "{} system: P_f = {:.6e} (beta1 {:.4}, beta2 {:.4}, rho {:.4})",
        record.system, p, beta1, beta2, rho
    );
    if let Some(path) = &args.out {
        write_json(path, &record)?;
    }
    Ok(())
}

/// Reliability indices and margin correlation of the two-component geometry.
fn geometry_betas(args: &OracleArgs, mw: f64) -> Result<(f64, f64, f64), CliError> {
    if args.delta > args.r1 + args.r2 || args.delta < (args.r1 - args.r2).abs() {
        return Err(CliError::User(format!(
            "distances (r1 {}, r2 {}, delta {}) violate the triangle inequality",
            args.r1, args.r2, args.delta
        )));
    }
    let mut model = SeismicModel::new(Point::new(0.0, 0.0));
    model.sigma_eta = args.sigma_eta;
    model.sigma_eps = args.sigma_eps;
    model
        .validate()
        .map_err(|e| CliError::User(e.to_string()))?;
    let x2 = (args.r1 * args.r1 + args.r2 * args.r2 - args.delta * args.delta) / (2.0 * args.r1);
    let y2 = (args.r2 * args.r2 - x2 * x2).max(0.0).sqrt();
    let c1 = Component::new("1", Point::new(args.r1, 0.0), args.c_median, args.zeta);
    let c2 = Component::new("2", Point::new(x2, y2), args.c_median, args.zeta);
    let beta1 = model
        .reliability_index(&c1, model.ln_mean_pga(args.r1, mw))
        .map_err(|e| CliError::User(e.to_string()))?;
    let beta2 = model
        .reliability_index(&c2, model.ln_mean_pga(args.r2, mw))
        .map_err(|e| CliError::User(e.to_string()))?;
    Ok((beta1, beta2, model.margin_correlation(&c1, &c2)))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn append_reliability_csv(path: &Path, r: &ReliabilityRecord) -> Result<(), CliError> {
    let new_file = !path.exists();
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let mut writer = csv::Writer::from_writer(file);
    if new_file {
        writer.write_record([
            "mw",
            "ls",
            "aggregation",
            "k",
            "method",
            "n",
            "reps",
            "p_hat",
            "cov",
            "std_err",
            "n_g",
            "eff",
            "wall_s",
            "seed",
            "config_hash",
        ])?;
    }
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writer.write_record([
        r.mw.to_string(),
        r.ls.clone(),
        r.aggregation.clone(),
        r.k.map(|k| k.to_string()).unwrap_or_default(),
        r.method.clone(),
        r.n.to_string(),
        r.reps.to_string(),
        format!("{:e}", r.p_hat),
        fmt_opt(r.cov),
        fmt_opt(r.std_err),
        r.mean_n_g.to_string(),
        fmt_opt(r.eff),
        r.mean_wall_s.to_string(),
        r.seed.to_string(),
        r.config_hash.clone(),
    ])?;
    writer.flush()?;
    Ok(())
}
