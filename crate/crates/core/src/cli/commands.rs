use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use super::files::{
    append_json_line, append_rows, instance_id, read_instance, read_rows, sidecar, write_instance,
    write_rows, DesignFile, InstanceFile, NmfFile,
};
use super::rows::{
    mean, mean_present, BenchDesignRow, BenchNmfRow, DesignRow, DesignSummaryRow, NmfRow,
    NmfSummaryRow,
};
use crate::engine::{
    bagel_search_traced, JsonLinesTrace, Pruning, SearchConfig, SearchStats, TraceRecord,
};
use crate::error::{Error, Result};
use crate::fixtures::{toy_search_trainer, toy_shrunk_instance};
use crate::numerics::residual_norm;
use crate::par;
use crate::prior_nmf::{
    generate_nmf_instance, solve_prior_nmf_traced, NmfConfig, NmfGeneratorParams, NmfInstance,
};
use crate::smart_design::{
    baseline_l2_br, baseline_l2_or, fold_split, generate_instance, solve_bagel_traced, tightness,
    ComponentScore, DesignSolution, GeneratorParams, SmartDesignInstance, SmartDesignProblem,
    FOLDS,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    SmartDesign(GeneratorParams),
    PriorNmf(NmfGeneratorParams),
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<InstanceFile> {
        Ok(match self {
            GeneratorSpec::SmartDesign(p) => InstanceFile::SmartDesign(DesignFile::from_generated(
                &generate_instance(p)?,
                Some(p.clone()),
            )),
            GeneratorSpec::PriorNmf(p) => InstanceFile::PriorNmf(NmfFile::from_instance(
                &generate_nmf_instance(p)?,
                Some(p.clone()),
            )),
        })
    }

    fn with_seed(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            GeneratorSpec::SmartDesign(p) => p.seed = seed,
            GeneratorSpec::PriorNmf(p) => p.seed = seed,
        }
        spec
    }
}

/// Hand-worked instances with scripted training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// The four-component toy with the scripted losses of its worked search.
    ToySearch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Path(PathBuf),
    Generate(GeneratorSpec),
    Fixture(Fixture),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSettings {
    pub search: SearchConfig,
    /// Falls back to exact for smart design and heuristic for prior NMF.
    pub pruning: Option<Pruning>,
    /// Falls back to the instance seed.
    pub seed: Option<u64>,
    pub scoring: ComponentScore,
    pub iters: usize,
    pub restarts: usize,
    /// Solve the cross-validation folds concurrently.
    pub parallel_folds: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            search: SearchConfig::default(),
            pruning: None,
            seed: None,
            scoring: ComponentScore::default(),
            iters: 1000,
            restarts: 1,
            parallel_folds: true,
        }
    }
}

impl SolveSettings {
    fn search_with(&self, default: Pruning) -> SearchConfig {
        SearchConfig {
            pruning: self.pruning.unwrap_or(default),
            ..self.search
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub source: Source,
    pub settings: SolveSettings,
    /// Result table; traces and metadata go next to it.
    pub out: PathBuf,
    pub trace: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub instance_id: String,
    pub design_rows: Vec<DesignRow>,
    pub nmf_rows: Vec<NmfRow>,
    pub stats: Vec<SearchStats>,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    version: &'static str,
    config: &'a RunConfig,
    digest: &'a str,
    instance_id: &'a str,
    seed: u64,
    stats: &'a [SearchStats],
}

/// Generates an instance file and returns its sha-256 digest.
pub fn cmd_generate(spec: &GeneratorSpec, out: &Path) -> Result<String> {
    write_instance(out, &spec.build()?)
}

pub fn cmd_solve(config: &RunConfig) -> Result<RunReport> {
    let trace_path = |suffix: &str| config.trace.then(|| sidecar(&config.out, suffix));
    let (report, digest, seed) = match &config.source {
        Source::Fixture(Fixture::ToySearch) => {
            let (report, seed) =
                solve_toy_search(&config.settings, trace_path(".trace.jsonl").as_deref())?;
            (report, String::new(), seed)
        }
        source => {
            let (file, digest) = match source {
                Source::Path(p) => read_instance(p)?,
                Source::Generate(spec) => {
                    let file = spec.build()?;
                    let d = file.digest();
                    (file, d)
                }
                Source::Fixture(_) => unreachable!(),
            };
            let id = instance_id(&digest);
            let (report, seed) = match file {
                InstanceFile::SmartDesign(f) => {
                    let inst = f.to_instance()?;
                    let seed = config.settings.seed.unwrap_or(inst.seed);
                    let trace = config.trace.then_some(config.out.as_path());
                    let (rows, stats) = solve_design(&inst, &id, seed, &config.settings, trace)?;
                    (
                        RunReport {
                            instance_id: id,
                            design_rows: rows,
                            stats,
                            ..RunReport::default()
                        },
                        seed,
                    )
                }
                InstanceFile::PriorNmf(f) => {
                    let inst = f.to_instance()?;
                    let seed = config.settings.seed.unwrap_or(inst.seed);
                    let (row, stats) = solve_nmf(
                        &inst,
                        &id,
                        seed,
                        &config.settings,
                        trace_path(".trace.jsonl").as_deref(),
                    )?;
                    (
                        RunReport {
                            instance_id: id,
                            nmf_rows: vec![row],
                            stats: vec![stats],
                            ..RunReport::default()
                        },
                        seed,
                    )
                }
            };
            (report, digest, seed)
        }
    };
    append_rows(&config.out, &report.design_rows)?;
    append_rows(&config.out, &report.nmf_rows)?;
    append_json_line(
        &sidecar(&config.out, ".meta.jsonl"),
        &RunMeta {
            version: env!("CARGO_PKG_VERSION"),
            config,
            digest: &digest,
            instance_id: &report.instance_id,
            seed,
            stats: &report.stats,
        },
    )?;
    Ok(report)
}

fn trace_file(path: &Path) -> Result<JsonLinesTrace<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(JsonLinesTrace::new(BufWriter::new(f)))
}

fn run_traced<T>(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn FnMut(&TraceRecord)) -> Result<T>,
) -> Result<T> {
    match path {
        Some(p) => {
            let mut trace = trace_file(p)?;
            let out = body(&mut |r| trace.record(r))?;
            trace.finish().map_err(|e| Error::io(p, e))?;
            Ok(out)
        }
        None => body(&mut |_| {}),
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn design_row(
    id: &str,
    method: &str,
    fold: usize,
    inst: &SmartDesignInstance,
    sol: Option<&DesignSolution>,
) -> DesignRow {
    DesignRow {
        instance_id: id.to_string(),
        method: method.to_string(),
        fold,
        train_loss: sol.map(|s| s.train_loss),
        test_loss: sol.and_then(|s| s.test_loss),
        tightness: sol.map(|s| tightness(&s.u, &inst.weights(), inst.bound)),
        nodes: 0,
        wall_ms: 0.0,
        completed: true,
    }
}

/// BaGeL and both baselines on every cross-validation fold. Rows come in
/// fold order, and within a fold as bagel, l2_br, l2_or.
pub fn solve_design(
    inst: &SmartDesignInstance,
    id: &str,
    seed: u64,
    settings: &SolveSettings,
    trace_base: Option<&Path>,
) -> Result<(Vec<DesignRow>, Vec<SearchStats>)> {
    if inst.samples() < FOLDS {
        return Err(Error::Validation(format!(
            "{} samples cannot be split into {FOLDS} folds",
            inst.samples()
        )));
    }
    let search = settings.search_with(Pruning::Exact);
    let solve_fold = |&fold: &usize| -> Result<(Vec<DesignRow>, SearchStats)> {
        let (train_rows, test_rows) = fold_split(inst.samples(), FOLDS, fold, seed);
        let train = inst.with_rows(&train_rows);
        let test = inst.with_rows(&test_rows);
        let with_test = |mut s: DesignSolution| -> Result<DesignSolution> {
            s.test_loss = Some(residual_norm(&test.x, &s.theta, &test.y)?);
            Ok(s)
        };

        let trace = trace_base.map(|b| sidecar(b, &format!(".fold{fold}.trace.jsonl")));
        let run = run_traced(trace.as_deref(), |t| solve_bagel_traced(&train, &search, t))?;
        let bagel = run.solution.map(with_test).transpose()?;
        let mut rows = vec![DesignRow {
            nodes: run.stats.nodes_opened,
            wall_ms: ms(run.stats.wall_time),
            completed: run.stats.completed,
            ..design_row(id, "bagel", fold, inst, bagel.as_ref())
        }];
        for (method, baseline) in [
            (
                "l2_br",
                baseline_l2_br
                    as fn(&SmartDesignInstance, ComponentScore) -> Result<DesignSolution>,
            ),
            ("l2_or", baseline_l2_or),
        ] {
            let start = Instant::now();
            let sol = with_test(baseline(&train, settings.scoring)?)?;
            rows.push(DesignRow {
                wall_ms: ms(start.elapsed()),
                ..design_row(id, method, fold, inst, Some(&sol))
            });
        }
        Ok((rows, run.stats))
    };
    let folds: Vec<usize> = (0..FOLDS).collect();
    let results = if settings.parallel_folds {
        par::map(&folds, solve_fold)
    } else {
        par::map_sequential(&folds, solve_fold)
    };
    let mut rows = Vec::new();
    let mut stats = Vec::new();
    for r in results {
        let (r, s) = r?;
        rows.extend(r);
        stats.push(s);
    }
    Ok((rows, stats))
}

pub fn solve_nmf(
    inst: &NmfInstance,
    id: &str,
    seed: u64,
    settings: &SolveSettings,
    trace: Option<&Path>,
) -> Result<(NmfRow, SearchStats)> {
    let config = NmfConfig {
        iters: settings.iters,
        restarts: settings.restarts,
        seed,
    };
    let search = settings.search_with(Pruning::Heuristic);
    let run = run_traced(trace, |t| solve_prior_nmf_traced(inst, config, &search, t))?;
    let topics = run
        .solution
        .as_ref()
        .map(|s| {
            s.topics
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(";")
        })
        .unwrap_or_default();
    let row = NmfRow {
        instance_id: id.to_string(),
        method: "bagel".into(),
        topics,
        best_loss: run.solution.as_ref().map(|s| s.loss),
        planted_loss: inst.planted_loss(),
        recovery: run.recovery,
        nodes: run.stats.nodes_opened,
        wall_ms: ms(run.stats.wall_time),
        completed: run.stats.completed,
    };
    Ok((row, run.stats))
}

fn solve_toy_search(settings: &SolveSettings, trace: Option<&Path>) -> Result<(RunReport, u64)> {
    let inst = toy_shrunk_instance();
    let problem = SmartDesignProblem::with_trainer(&inst, toy_search_trainer());
    let search = settings.search_with(Pruning::Exact);
    let outcome = run_traced(trace, |t| bagel_search_traced(&problem, &search, t))?;
    let sol = outcome.best.map(|b| b.solution);
    let row = DesignRow {
        nodes: outcome.stats.nodes_opened,
        wall_ms: ms(outcome.stats.wall_time),
        completed: outcome.stats.completed,
        ..design_row("toy-search", "bagel", 0, &inst, sol.as_ref())
    };
    Ok((
        RunReport {
            instance_id: "toy-search".into(),
            design_rows: vec![row],
            stats: vec![outcome.stats],
            ..RunReport::default()
        },
        settings.seed.unwrap_or(inst.seed),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchGrid {
    SmartDesign {
        features: Vec<usize>,
        samples: Vec<usize>,
        costs: Vec<f64>,
        noise_ratio: f64,
    },
    PriorNmf {
        words: Vec<usize>,
        true_topics: Vec<usize>,
        false_topics: Vec<usize>,
        docs: Vec<usize>,
        sparsity: f64,
        noise_ratio: f64,
    },
}

impl BenchGrid {
    /// Every cell of the grid with its key.
    pub fn cells(&self) -> Vec<(String, GeneratorSpec)> {
        let mut cells = Vec::new();
        match self {
            BenchGrid::SmartDesign {
                features,
                samples,
                costs,
                noise_ratio,
            } => {
                for &n in features {
                    for &m in samples {
                        for &c in costs {
                            let mut p = GeneratorParams::new(n, m, c, 0);
                            p.noise_ratio = *noise_ratio;
                            cells.push((format!("n{n}-m{m}-c{c}"), GeneratorSpec::SmartDesign(p)));
                        }
                    }
                }
            }
            BenchGrid::PriorNmf {
                words,
                true_topics,
                false_topics,
                docs,
                sparsity,
                noise_ratio,
            } => {
                for &w in words {
                    for &tt in true_topics {
                        for &ft in false_topics {
                            for &d in docs {
                                let mut p = NmfGeneratorParams::new(w, tt, ft, d, 0);
                                p.sparsity = *sparsity;
                                p.noise_ratio = *noise_ratio;
                                cells.push((
                                    format!("w{w}-t{tt}-f{ft}-d{d}"),
                                    GeneratorSpec::PriorNmf(p),
                                ));
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub grid: BenchGrid,
    pub seeds: Vec<u64>,
    pub settings: SolveSettings,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchOutcome {
    pub ran: usize,
    pub skipped: usize,
    pub failed: usize,
    pub rows: PathBuf,
    pub summary: PathBuf,
}

/// Runs every (cell, seed) pair not already present in `rows.csv` under
/// `out_dir`, then rewrites `summary.csv` from all rows.
pub fn cmd_bench(spec: &BenchSpec) -> Result<BenchOutcome> {
    std::fs::create_dir_all(&spec.out_dir).map_err(|e| Error::io(&spec.out_dir, e))?;
    let rows_path = spec.out_dir.join("rows.csv");
    let summary_path = spec.out_dir.join("summary.csv");
    let nmf = matches!(spec.grid, BenchGrid::PriorNmf { .. });

    let done: BTreeSet<(String, u64)> = if rows_path.exists() {
        if nmf {
            read_rows::<BenchNmfRow>(&rows_path)?
                .into_iter()
                .map(|r| (r.cell, r.seed))
                .collect()
        } else {
            read_rows::<BenchDesignRow>(&rows_path)?
                .into_iter()
                .map(|r| (r.cell, r.seed))
                .collect()
        }
    } else {
        BTreeSet::new()
    };

    let mut jobs = Vec::new();
    let mut skipped = 0;
    for (cell, gen) in spec.grid.cells() {
        for &seed in &spec.seeds {
            if done.contains(&(cell.clone(), seed)) {
                skipped += 1;
            } else {
                jobs.push((cell.clone(), gen.with_seed(seed), seed));
            }
        }
    }

    let settings = SolveSettings {
        parallel_folds: false,
        ..spec.settings.clone()
    };
    let writer = Mutex::new(Vec::<Error>::new());
    let failed = Mutex::new(0usize);
    par::for_each(&jobs, |(cell, gen, seed)| {
        let result = gen.build().and_then(|file| {
            let id = instance_id(&file.digest());
            match file {
                InstanceFile::SmartDesign(f) => {
                    let (rows, _) = solve_design(&f.to_instance()?, &id, *seed, &settings, None)?;
                    Ok(Rows::Design(
                        rows.into_iter()
                            .map(|r| BenchDesignRow::from_row(cell, *seed, r))
                            .collect(),
                    ))
                }
                InstanceFile::PriorNmf(f) => {
                    let (row, _) = solve_nmf(&f.to_instance()?, &id, *seed, &settings, None)?;
                    Ok(Rows::Nmf(vec![BenchNmfRow::from_row(cell, *seed, row)]))
                }
            }
        });
        let rows = result.unwrap_or_else(|e| {
            log::warn!("cell {cell} seed {seed}: {e}");
            *failed.lock().expect("counter lock") += 1;
            if nmf {
                Rows::Nmf(vec![BenchNmfRow::failed(cell, *seed, e.to_string())])
            } else {
                Rows::Design(vec![BenchDesignRow::failed(cell, *seed, e.to_string())])
            }
        });
        let mut errors = writer.lock().expect("writer lock");
        let written = match &rows {
            Rows::Design(r) => append_rows(&rows_path, r),
            Rows::Nmf(r) => append_rows(&rows_path, r),
        };
        if let Err(e) = written {
            errors.push(e);
        }
    });
    if let Some(e) = writer.into_inner().expect("writer lock").into_iter().next() {
        return Err(e);
    }

    if rows_path.exists() {
        if nmf {
            write_rows(&summary_path, &summarize_nmf(&read_rows(&rows_path)?))?;
        } else {
            write_rows(&summary_path, &summarize_design(&read_rows(&rows_path)?))?;
        }
    }
    Ok(BenchOutcome {
        ran: jobs.len(),
        skipped,
        failed: failed.into_inner().expect("counter lock"),
        rows: rows_path,
        summary: summary_path,
    })
}

enum Rows {
    Design(Vec<BenchDesignRow>),
    Nmf(Vec<BenchNmfRow>),
}

pub fn summarize_design(rows: &[BenchDesignRow]) -> Vec<DesignSummaryRow> {
    let mut groups: BTreeMap<(&str, &str), Vec<&BenchDesignRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        groups.entry((&r.cell, &r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((cell, method), g)| DesignSummaryRow {
            cell: cell.to_string(),
            method: method.to_string(),
            rows: g.len(),
            mean_train_loss: mean_present(g.iter().map(|r| r.train_loss)),
            mean_test_loss: mean_present(g.iter().map(|r| r.test_loss)),
            mean_tightness: mean_present(g.iter().map(|r| r.tightness)),
            mean_nodes: mean(g.iter().map(|r| r.nodes as f64)),
            mean_wall_ms: mean(g.iter().map(|r| r.wall_ms)),
            completed_share: mean(g.iter().map(|r| if r.completed { 1.0 } else { 0.0 })),
        })
        .collect()
}

pub fn summarize_nmf(rows: &[BenchNmfRow]) -> Vec<NmfSummaryRow> {
    let mut groups: BTreeMap<(&str, &str), Vec<&BenchNmfRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        groups.entry((&r.cell, &r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((cell, method), g)| NmfSummaryRow {
            cell: cell.to_string(),
            method: method.to_string(),
            rows: g.len(),
            mean_best_loss: mean_present(g.iter().map(|r| r.best_loss)),
            mean_planted_loss: mean_present(g.iter().map(|r| r.planted_loss)),
            mean_recovery: mean_present(g.iter().map(|r| r.recovery)),
            mean_nodes: mean(g.iter().map(|r| r.nodes as f64)),
            mean_wall_ms: mean(g.iter().map(|r| r.wall_ms)),
            completed_share: mean(g.iter().map(|r| if r.completed { 1.0 } else { 0.0 })),
        })
        .collect()
}
