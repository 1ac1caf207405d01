use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use itca::baselines::{hierarchical_combine, kmeans_combine, LinkageKind};
use itca::benchmark::{self, Suite, SweepConfig, Variant};
use itca::classifiers::{ClassifierKind, ForestParams};
use itca::data::{load_csv, simulate, write_sidecar};
use itca::search::{rank, search};
use itca::theory::{region_grid, Domain, EmpiricalPlan, GridAlgorithm};
use itca::{ClassifierSpec, CriterionName, Partition, SearchConfig, SimulationConfig, Strategy};

use crate::args::{AlgorithmArg, Cli, Command, DomainArg, SuiteArg};
use crate::manifest::{now_ms, Job, RunManifest};
use crate::{svg, CliError};

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.jobs {
        if threads == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let started = now_ms();
    let (job, seed) = match &cli.config {
        Some(path) => {
            if cli.command.is_some() {
                return Err(CliError::Usage("--config replays a manifest; drop the subcommand".into()));
            }
            let m = RunManifest::load(path)?;
            (m.job, m.seed)
        }
        None => (build_job(&cli)?, cli.seed.unwrap_or(0)),
    };
    let out_dir = &cli.out_dir;
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Output {
        path: out_dir.clone(),
        source,
    })?;
    let outputs = execute(&job, out_dir)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        job,
        outputs,
    };
    write_file(out_dir, "manifest.json", &pretty(&manifest)?)?;
    Ok(())
}

fn build_job(cli: &Cli) -> Result<Job, CliError> {
    let Some(command) = &cli.command else {
        return Err(CliError::Usage("expected a subcommand or --config; see --help".into()));
    };
    let seed = cli.seed.unwrap_or(0);
    let folds = cli.folds.unwrap_or(5);
    Ok(match command {
        Command::Analyze {
            input,
            label_column,
            forbid,
        } => {
            let mut cfg = SearchConfig::new(
                single(&cli.strategy, Strategy::Exhaustive, "--strategy")?,
                single(&cli.criterion, CriterionName::Itca, "--criterion")?,
                classifier(cli, seed)?,
                cli.ordinal,
            );
            cfg.forbidden = forbid.clone().unwrap_or_default();
            cfg.prune = cli.prune;
            cfg.folds = folds;
            cfg.seed = seed;
            cfg.validate()?;
            Job::Analyze {
                input: input.clone(),
                label_column: label_column.clone(),
                search: cfg,
            }
        }
        Command::Simulate {
            config_file,
            partition,
            step_length,
            sigma,
            n,
            d,
            probs,
        } => {
            let simulation = match config_file {
                Some(path) => read_json::<SimulationConfig>(path)?,
                None => {
                    let mut cfg = SimulationConfig::new(partition.clone(), *step_length, *sigma, *n, *d, seed);
                    if !probs.is_empty() {
                        cfg.class_probabilities = Some(probs.clone());
                    }
                    cfg
                }
            };
            simulation.validate()?;
            Job::Simulate { simulation }
        }
        Command::Benchmark {
            suite,
            partitions,
            instances,
            step_length,
            sigma,
            n,
            d,
        } => {
            if cli.nominal {
                return Err(CliError::Usage("benchmark suites use ordinal labels".into()));
            }
            let mut truths = match (suite, partitions.is_empty()) {
                (SuiteArg::Custom, true) => {
                    return Err(CliError::Usage("the custom suite needs --partitions".into()))
                }
                (SuiteArg::Custom, false) => partitions.clone(),
                (_, false) => return Err(CliError::Usage("--partitions needs --suite custom".into())),
                (SuiteArg::K0_6, true) => Suite::K0_6.true_partitions(seed),
                (SuiteArg::K0_8, true) => Suite::K0_8.true_partitions(seed),
                (SuiteArg::K0_20, true) => Suite::K0_20.true_partitions(seed),
            };
            if let Some(limit) = instances {
                truths.truncate(*limit);
            }
            let mut sweep = SweepConfig::new(truths, classifier(cli, seed)?);
            sweep.step_length = *step_length;
            sweep.sigma = *sigma;
            sweep.n = *n;
            sweep.d = *d;
            sweep.folds = folds;
            sweep.seed = seed;
            if !cli.criterion.is_empty() {
                sweep.criteria = cli.criterion.clone();
            }
            let strategies = if cli.strategy.is_empty() {
                vec![Strategy::Exhaustive]
            } else {
                cli.strategy.clone()
            };
            sweep.variants = strategies.iter().map(|&s| Variant::new(s, false)).collect();
            if cli.prune {
                let pruned: Vec<Variant> = strategies
                    .iter()
                    .filter(|&&s| s != Strategy::Exhaustive)
                    .map(|&s| Variant::new(s, true))
                    .collect();
                if pruned.is_empty() {
                    return Err(CliError::Usage("--prune needs --strategy greedy or bfs".into()));
                }
                sweep.variants.extend(pruned);
            }
            sweep.validate()?;
            Job::Benchmark {
                suite: format!("{suite:?}").to_lowercase(),
                sweep,
            }
        }
        Command::Theory {
            algorithm,
            resolution,
            separation,
            domain,
            n,
            step_length,
            sigma,
            d,
            replicates,
        } => {
            let grid = match algorithm {
                AlgorithmArg::Oracle => GridAlgorithm::Oracle,
                AlgorithmArg::LdaLimit => GridAlgorithm::LdaLimit,
                AlgorithmArg::Lda => GridAlgorithm::Lda {
                    separation: *separation,
                },
                AlgorithmArg::Empirical => {
                    let mut plan = EmpiricalPlan::new(classifier(cli, seed)?);
                    plan.n = *n;
                    plan.step_length = *step_length;
                    plan.sigma = *sigma;
                    plan.d = *d;
                    plan.folds = folds;
                    plan.seed = seed;
                    plan.replicates = *replicates;
                    GridAlgorithm::Empirical(plan)
                }
            };
            let empirical = *algorithm == AlgorithmArg::Empirical;
            let domain = match domain {
                Some(DomainArg::Omega) => Domain::OMEGA,
                Some(DomainArg::Restricted) => Domain::RESTRICTED,
                None if empirical => Domain::RESTRICTED,
                None => Domain::OMEGA,
            };
            Job::Theory {
                grid,
                resolution: resolution.unwrap_or(if empirical { 6 } else { 100 }),
                domain,
            }
        }
        Command::Baselines {
            input,
            label_column,
            k_star,
            method,
        } => Job::Baselines {
            input: input.clone(),
            label_column: label_column.clone(),
            k_star: *k_star,
            method: method.linkage().map_or("kmeans", LinkageKind::as_str).into(),
            seed,
        },
    })
}

/// At most one value of a list flag, or the default.
fn single<T: Copy>(values: &[T], default: T, flag: &str) -> Result<T, CliError> {
    match values {
        [] => Ok(default),
        [v] => Ok(*v),
        _ => Err(CliError::Usage(format!("{flag} takes a single value here"))),
    }
}

fn classifier(cli: &Cli, seed: u64) -> Result<ClassifierSpec, CliError> {
    let kind = cli.classifier.unwrap_or(ClassifierKind::Lda);
    if kind == ClassifierKind::Oracle {
        return Err(CliError::Usage("the oracle is a test instrument, not a selectable classifier".into()));
    }
    let spec = match (kind, cli.trees) {
        (ClassifierKind::RandomForest, Some(trees)) => ClassifierSpec::random_forest(ForestParams::with_trees(trees)),
        (_, Some(_)) => return Err(CliError::Usage("--trees applies to random_forest only".into())),
        (kind, None) => ClassifierSpec::default_for(kind)?,
    };
    let spec = spec.with_seed(seed);
    spec.validate()?;
    Ok(spec)
}

fn execute(job: &Job, out_dir: &Path) -> Result<Vec<String>, CliError> {
    match job {
        Job::Analyze {
            input,
            label_column,
            search: cfg,
        } => analyze(input, label_column, cfg, out_dir),
        Job::Simulate { simulation } => {
            let sim = simulate(simulation)?;
            let mut csv = Vec::new();
            sim.dataset.write_csv(&mut csv)?;
            let mut sidecar = Vec::new();
            write_sidecar(simulation, &sim, &mut sidecar)?;
            sidecar.push(b'\n');
            let outputs = vec![
                write_file(out_dir, "simulated.csv", &csv)?,
                write_file(out_dir, "simulated.json", &sidecar)?,
            ];
            println!(
                "simulated {} points, {} features, true partition {}",
                sim.dataset.n(),
                sim.dataset.d(),
                simulation.true_partition
            );
            Ok(outputs)
        }
        Job::Benchmark { sweep, .. } => {
            let records = benchmark::run_sweep(sweep)?;
            let summary = benchmark::summarize(&records);
            let mut rec_csv = Vec::new();
            benchmark::write_records_csv(&records, &mut rec_csv)?;
            let mut sum_csv = Vec::new();
            benchmark::write_summary_csv(&summary, &mut sum_csv)?;
            for row in &summary {
                println!(
                    "{} {}: {}/{} recovered, mean Hamming {:.3}, mean evaluations {:.2}",
                    row.criterion, row.variant, row.successes, row.total, row.mean_hamming, row.mean_evaluations
                );
            }
            Ok(vec![
                write_file(out_dir, "records.csv", &rec_csv)?,
                write_file(out_dir, "summary.csv", &sum_csv)?,
            ])
        }
        Job::Theory {
            grid,
            resolution,
            domain,
        } => {
            let g = region_grid(grid, *resolution, *domain)?;
            let mut csv = Vec::new();
            g.write_csv(&mut csv)?;
            let title = format!("gain from merging classes 1 and 2 ({})", grid_name(grid));
            println!("{}: merging helps on {:.4} of the cells", grid_name(grid), g.area_fraction);
            Ok(vec![
                write_file(out_dir, "grid.csv", &csv)?,
                write_file(out_dir, "grid.svg", svg::heatmap(&g, &title).as_bytes())?,
            ])
        }
        Job::Baselines {
            input,
            label_column,
            k_star,
            method,
            seed,
        } => {
            let ds = load_csv(input, label_column)?;
            let p = if method == "kmeans" {
                kmeans_combine(&ds, *k_star, *seed)?
            } else {
                hierarchical_combine(&ds, *k_star, method.parse()?)?
            };
            println!("{p}");
            Ok(vec![write_file(out_dir, "partition.txt", format!("{p}\n").as_bytes())?])
        }
    }
}

fn grid_name(grid: &GridAlgorithm) -> String {
    match grid {
        GridAlgorithm::Oracle => "oracle".into(),
        GridAlgorithm::LdaLimit => "lda limit".into(),
        GridAlgorithm::Lda { separation } => format!("lda, separation {separation}"),
        GridAlgorithm::Empirical(plan) => format!("empirical {}", plan.classifier.kind().name()),
    }
}

#[derive(Serialize)]
struct BestSummary<'a> {
    criterion: CriterionName,
    best: &'a Partition,
    /// Original class names per combined class.
    groups: Vec<Vec<&'a str>>,
    mean: f64,
    stderr: f64,
    per_fold: &'a [f64],
    evaluation_count: usize,
    runner_up: Option<RunnerUp<'a>>,
}

#[derive(Serialize)]
struct RunnerUp<'a> {
    partition: &'a Partition,
    mean: f64,
    stderr: f64,
}

fn analyze(input: &Path, label_column: &str, cfg: &SearchConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    let ds = load_csv(input, label_column)?;
    let trace = search(&ds, cfg)?;

    let mut jsonl = Vec::new();
    trace.write_jsonl(&mut jsonl)?;

    let best = trace.best_entry();
    let ranked = trace.ranked();
    let names = ds.class_names();
    let summary = BestSummary {
        criterion: trace.criterion,
        best: &trace.best,
        groups: trace
            .best
            .groups()
            .iter()
            .map(|g| g.iter().map(|&c| names[c].as_str()).collect())
            .collect(),
        mean: best.report.mean,
        stderr: best.report.stderr,
        per_fold: &best.report.per_fold,
        evaluation_count: trace.evaluation_count,
        runner_up: ranked.get(1).map(|e| RunnerUp {
            partition: &e.partition,
            mean: e.report.mean,
            stderr: e.report.stderr,
        }),
    };

    // Best evaluated partition at each number of combined classes.
    let mut by_k: BTreeMap<usize, &itca::search::TraceEntry> = BTreeMap::new();
    for e in &trace.evaluated {
        let slot = by_k.entry(e.k).or_insert(e);
        if rank(&e.partition, e.report.mean, &slot.partition, slot.report.mean).is_gt() {
            *slot = e;
        }
    }
    let mut curve = String::from("k,partition,mean,stderr\n");
    for (k, e) in &by_k {
        curve.push_str(&format!("{k},\"{}\",{},{}\n", e.partition, e.report.mean, e.report.stderr));
    }
    let points: Vec<(f64, f64, f64)> = by_k
        .iter()
        .map(|(&k, e)| (k as f64, e.report.mean, e.report.stderr))
        .collect();
    let chart = svg::line_chart(
        &points,
        &format!("best {} by number of classes", trace.criterion),
        "K",
        trace.criterion.as_str(),
    );

    println!(
        "best {} with {} = {:.4} ± {:.4} ({} partitions evaluated)",
        trace.best, trace.criterion, best.report.mean, best.report.stderr, trace.evaluation_count
    );
    Ok(vec![
        write_file(out_dir, "trace.jsonl", &jsonl)?,
        write_file(out_dir, "best.json", &pretty(&summary)?)?,
        write_file(out_dir, "criterion_vs_k.csv", curve.as_bytes())?,
        write_file(out_dir, "criterion_vs_k.svg", chart.as_bytes())?,
    ])
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    if !path.exists() {
        return Err(itca::Error::FileNotFound(path.to_path_buf()).into());
    }
    let text = std::fs::read_to_string(path).map_err(|source| itca::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn pretty<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(itca::Error::from)?;
    out.push(b'\n');
    Ok(out)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<String, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|source| CliError::Output { path, source })?;
    Ok(name.to_string())
}
