mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qudit_magic::commutant::{distance_matrix, enumerate_sigma};
use qudit_magic::densesim::Region;
use qudit_magic::ensembles::{run_scenario, ExperimentConfig, EXACT_TOL};
use qudit_magic::fqarith::PrimeField;
use qudit_magic::phasespace::{magic_measures, sre_m2, wigner_table, PhasePoint, PhaseSpace};
use qudit_magic::statmech::{predict, Geometry, Prediction, Scenario};
use qudit_magic::ErrorKind;
use serde::{Deserialize, Serialize};
use serde_json::json;

use files::{config_hash, emit, print_json, read_json, write_json, CliError, Manifest, RunSummary, StateFile};

#[derive(Parser)]
#[command(name = "qmagic", version, about = "Magic in random qudit circuits: simulation and min-cut predictions")]
struct Cli {
    /// Worker threads for sampling (all cores when unset).
    #[arg(long, global = true, env = "QMAGIC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full Wigner table of a state file as CSV.
    Wigner {
        #[arg(long)]
        state: PathBuf,
        /// Expected local dimension; must match the file.
        #[arg(long)]
        q: Option<u64>,
        /// Restrict to the reduced state on these sites.
        #[arg(long, value_delimiter = ',')]
        region: Option<Vec<usize>>,
    },
    /// One-norm, sum negativity, mana and M_2 of a state file as JSON.
    Measures {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_delimiter = ',')]
        region: Option<Vec<usize>>,
    },
    /// Runs a Monte Carlo experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = "qmagic-run")]
        out: PathBuf,
    },
    /// Min-cut predictions for a geometry.
    StatmechPredict {
        #[arg(long)]
        config: PathBuf,
    },
    /// Deviations between a run and a prediction file, in log q units.
    Compare {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        predict: PathBuf,
    },
    /// Stochastic Lagrangian subspaces and their distance matrix.
    EnumerateLagrangian {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        q: u64,
        /// Directory for lagrangians.csv and distances.csv; stdout when unset.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Core(c) => match c.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Guard => 3,
            ErrorKind::Numerical => 4,
        },
        CliError::Input(_) => 2,
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Wigner { state, q, region } => wigner(&state, q, region),
        Command::Measures { state, region } => measures(&state, region),
        Command::Run {
            config,
            seed,
            samples,
            out,
        } => run(&config, seed, samples, &out),
        Command::StatmechPredict { config } => statmech_predict(&config),
        Command::Compare { run, predict } => compare(&run, &predict),
        Command::EnumerateLagrangian { t, q, out } => enumerate_lagrangian(t, q, out.as_deref()),
    }
}

fn load_density(
    path: &Path,
    region: Option<Vec<usize>>,
) -> Result<(PhaseSpace, qudit_magic::DenseOperator), CliError> {
    let state = read_json::<StateFile>(path)?.into_state()?;
    let ps = PhaseSpace::new(state.q())?;
    let rho = match region {
        Some(sites) => state.reduced_density(&Region::new(&sites)?)?,
        None => state.density()?,
    };
    Ok((ps, rho))
}

fn wigner(path: &Path, q: Option<u64>, region: Option<Vec<usize>>) -> Result<(), CliError> {
    let (ps, rho) = load_density(path, region)?;
    if let Some(q) = q {
        if q != ps.q() {
            return Err(CliError::Input(format!(
                "--q {q} does not match the state file (q = {})",
                ps.q()
            )));
        }
    }
    let table = wigner_table(&ps, &rho)?;
    let field = *ps.field();
    let n = rho.n_sites();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string()];
    for s in 0..n {
        header.push(format!("m{s}"));
        header.push(format!("n{s}"));
    }
    header.push("value".into());
    w.write_record(&header).map_err(CliError::io)?;
    for (i, v) in table.values().iter().enumerate() {
        let p = PhasePoint::from_index(&field, n, i);
        let mut row = vec![i.to_string()];
        row.extend(p.entries().iter().map(u64::to_string));
        row.push(files::float(*v));
        w.write_record(&row).map_err(CliError::io)?;
    }
    emit(&w.into_inner().map_err(CliError::io)?)
}

fn measures(path: &Path, region: Option<Vec<usize>>) -> Result<(), CliError> {
    let (ps, rho) = load_density(path, region)?;
    let m = magic_measures(&ps, &rho)?;
    let out = json!({
        "one_norm": m.one_norm,
        "sum_negativity": m.sum_negativity,
        "mana": m.mana,
        "m2": sre_m2(&ps, &rho)? + 0.0,
    });
    print_json(&out)?;
    Ok(())
}

fn run(path: &Path, seed: Option<u64>, samples: Option<usize>, out: &Path) -> Result<(), CliError> {
    let mut cfg: ExperimentConfig = read_json(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(k) = samples {
        cfg.samples = k;
    }
    cfg.validate()?;
    let hash = config_hash(&cfg)?;
    let started = files::unix_time();
    let report = run_scenario(&cfg)?;
    std::fs::create_dir_all(out).map_err(CliError::io)?;
    let samples_path = out.join("samples.csv");
    files::write_samples(&samples_path, &report.samples)?;
    let summary = RunSummary {
        config_hash: hash.clone(),
        config: report.config.clone(),
        policy: report.policy.clone(),
        records: report.records.clone(),
    };
    let summary_path = out.join("summary.json");
    write_json(&summary_path, &summary)?;
    let manifest = Manifest {
        config_hash: hash,
        seed: cfg.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        finished_unix: files::unix_time(),
        outputs: vec!["samples.csv".into(), "summary.json".into()],
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    print_json(&summary)?;
    Ok(())
}

/// Geometry file for `statmech-predict`; run configs are accepted as well.
#[derive(Deserialize)]
struct PredictConfig {
    n_sites: usize,
    depth: usize,
    region_a: Vec<usize>,
    #[serde(default)]
    region_m: Vec<usize>,
    #[serde(default)]
    scenario: Option<Scenario>,
    #[serde(default)]
    replicas: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LogMoment {
    n: usize,
    log_q: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionOut {
    scenario: Scenario,
    mana_logq_units: f64,
    entropy_a_logq_units: Option<f64>,
    coherent_info_logq_units: Option<f64>,
    sre_logq_units: Option<f64>,
    log_moments: Vec<LogMoment>,
    detail: Prediction,
}

#[derive(Debug, Serialize, Deserialize)]
struct Skipped {
    scenario: Scenario,
    reason: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictFile {
    geometry: Geometry,
    predictions: Vec<PredictionOut>,
    #[serde(default)]
    skipped: Vec<Skipped>,
}

fn statmech_predict(path: &Path) -> Result<(), CliError> {
    let cfg: PredictConfig = read_json(path)?;
    let g = Geometry::new(cfg.n_sites, cfg.depth, &cfg.region_a, &cfg.region_m)?;
    let replicas = cfg.replicas.unwrap_or_else(|| vec![1, 2, 3]);
    let scenarios = match cfg.scenario {
        Some(s) => vec![s],
        None => Scenario::ALL.to_vec(),
    };
    let mut predictions = Vec::new();
    let mut skipped = Vec::new();
    for sc in scenarios {
        match predict(&g, sc) {
            Ok(p) => predictions.push(PredictionOut {
                scenario: sc,
                mana_logq_units: p.mana,
                entropy_a_logq_units: p.entropy_a,
                coherent_info_logq_units: p.coherent_info,
                sre_logq_units: p.sre,
                log_moments: replicas
                    .iter()
                    .map(|&n| Ok(LogMoment { n, log_q: p.log_moment(n)? }))
                    .collect::<Result<_, qudit_magic::Error>>()?,
                detail: p,
            }),
            // A single requested scenario must succeed; in the sweep,
            // scenarios whose assumptions fail are listed instead.
            Err(e) if cfg.scenario.is_none() && e.kind() == ErrorKind::Config => skipped.push(Skipped {
                scenario: sc,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let out = PredictFile {
        geometry: g,
        predictions,
        skipped,
    };
    print_json(&out)?;
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    measure: String,
    estimate_logq: f64,
    std_error_logq: f64,
    prediction_logq: f64,
    deviation_abs_logq: f64,
    deviation_sigma: Option<f64>,
}

fn compare(run_dir: &Path, predict_path: &Path) -> Result<(), CliError> {
    let summary: RunSummary = read_json(&run_dir.join("summary.json"))?;
    let preds: PredictFile = read_json(predict_path)?;
    let cfg = &summary.config;
    if preds.geometry != cfg.geometry()? {
        return Err(CliError::Input(
            "prediction geometry differs from the run geometry".into(),
        ));
    }
    if !cfg.follows_protocol() {
        return Err(CliError::Input(
            "run overrides the scenario protocol; predictions do not apply".into(),
        ));
    }
    let p = preds
        .predictions
        .iter()
        .find(|p| p.scenario == cfg.scenario)
        .ok_or_else(|| CliError::Input(format!("no prediction for scenario {:?}", cfg.scenario)))?;
    let ln_q = (cfg.q as f64).ln();
    let targets = [
        ("mana", Some(p.mana_logq_units)),
        ("entropy_a", p.entropy_a_logq_units),
        ("coherent_info", p.coherent_info_logq_units),
    ];
    let mut w = csv::Writer::from_writer(Vec::new());
    for (measure, pred) in targets {
        let (Some(pred), Some(rec)) = (pred, summary.records.iter().find(|r| r.measure == measure)) else {
            continue;
        };
        let est = rec.mean / ln_q;
        let se = rec.std_error / ln_q;
        let mut dev = (est - pred).abs();
        let sigma = if dev * ln_q < EXACT_TOL {
            dev = 0.0;
            Some(0.0)
        } else if se > 0.0 {
            Some(dev / se)
        } else {
            None
        };
        w.serialize(CompareRow {
            measure: measure.into(),
            estimate_logq: est,
            std_error_logq: se,
            prediction_logq: pred,
            deviation_abs_logq: dev,
            deviation_sigma: sigma,
        })
        .map_err(CliError::io)?;
    }
    emit(&w.into_inner().map_err(CliError::io)?)
}

fn enumerate_lagrangian(t: usize, q: u64, out: Option<&Path>) -> Result<(), CliError> {
    let field = PrimeField::new(q)?;
    let sigma = enumerate_sigma(&field, t)?;
    let dist = distance_matrix(&field, &sigma)?;
    let mut basis = csv::Writer::from_writer(Vec::new());
    basis
        .write_record(["index", "full_rank", "basis"])
        .map_err(CliError::io)?;
    for (i, s) in sigma.iter().enumerate() {
        let rows: Vec<String> = (0..s.basis().rows())
            .map(|r| {
                s.basis()
                    .row(r)
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        basis
            .write_record([
                i.to_string(),
                s.as_orthogonal(&field).is_some().to_string(),
                rows.join(";"),
            ])
            .map_err(CliError::io)?;
    }
    let mut dm = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string()];
    header.extend((0..sigma.len()).map(|j| j.to_string()));
    dm.write_record(&header).map_err(CliError::io)?;
    for (i, row) in dist.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(usize::to_string));
        dm.write_record(&rec).map_err(CliError::io)?;
    }
    let basis = basis.into_inner().map_err(CliError::io)?;
    let dm = dm.into_inner().map_err(CliError::io)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(CliError::io)?;
            std::fs::write(dir.join("lagrangians.csv"), &basis).map_err(CliError::io)?;
            std::fs::write(dir.join("distances.csv"), &dm).map_err(CliError::io)?;
            let summary = json!({
                "t": t,
                "q": q,
                "count": sigma.len(),
                "outputs": ["lagrangians.csv", "distances.csv"],
            });
            print_json(&summary)?;
        }
        None => {
            emit(&basis)?;
            emit(b"\n")?;
            emit(&dm)?;
        }
    }
    Ok(())
}
