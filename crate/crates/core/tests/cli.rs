use std::fs;
use std::path::Path;
use std::process::Command;

use bagel::cli::{
    cmd_bench, cmd_generate, cmd_solve, read_instance, read_rows, sidecar, BenchDesignRow,
    BenchGrid, BenchSpec, DesignRow, Fixture, GeneratorSpec, InstanceFile, NmfRow, RunConfig,
    SolveSettings, Source,
};
use bagel::engine::{NodeStatus, StopCondition, TraceRecord};
use bagel::fixtures::toy_search_expected_order;
use bagel::prior_nmf::NmfGeneratorParams;
use bagel::smart_design::GeneratorParams;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bagel"));
    c.env_remove("BAGEL_SEED");
    c
}

fn design_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec::SmartDesign(GeneratorParams::new(10, 100, 0.6, seed))
}

fn solve(source: Source, out: &Path, settings: SolveSettings) -> bagel::cli::RunReport {
    cmd_solve(&RunConfig {
        source,
        settings,
        out: out.to_path_buf(),
        trace: false,
    })
    .unwrap()
}

fn strip_wall(mut rows: Vec<DesignRow>) -> Vec<DesignRow> {
    for r in &mut rows {
        r.wall_ms = 0.0;
    }
    rows
}

#[test]
fn generated_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let da = cmd_generate(&design_spec(7), &a).unwrap();
    let db = cmd_generate(&design_spec(7), &b).unwrap();
    assert_eq!(da, db);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let dc = cmd_generate(&design_spec(8), &b).unwrap();
    assert_ne!(da, dc);
}

#[test]
fn nmf_instance_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nmf.json");
    cmd_generate(
        &GeneratorSpec::PriorNmf(NmfGeneratorParams::new(20, 4, 2, 50, 3)),
        &path,
    )
    .unwrap();
    let (file, _) = read_instance(&path).unwrap();
    let InstanceFile::PriorNmf(f) = file else {
        panic!("wrong problem")
    };
    assert_eq!(f.a.len(), 20);
    assert!(f.a.iter().all(|r| r.len() == 50));
    let inst = f.to_instance().unwrap();
    assert_eq!((inst.k, inst.db.len()), (4, 6));
}

#[test]
fn file_round_trip_matches_in_memory_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    cmd_generate(&design_spec(11), &path).unwrap();
    let from_file = solve(
        Source::Path(path),
        &dir.path().join("a.csv"),
        SolveSettings::default(),
    );
    let in_memory = solve(
        Source::Generate(design_spec(11)),
        &dir.path().join("b.csv"),
        SolveSettings::default(),
    );
    assert_eq!(from_file.instance_id, in_memory.instance_id);
    assert_eq!(
        strip_wall(from_file.design_rows.clone()),
        strip_wall(in_memory.design_rows)
    );
    // five folds, three methods each
    assert_eq!(from_file.design_rows.len(), 15);
    let back: Vec<DesignRow> = read_rows(&dir.path().join("a.csv")).unwrap();
    assert_eq!(back, from_file.design_rows);
}

#[test]
fn results_append_under_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    solve(
        Source::Generate(design_spec(1)),
        &out,
        SolveSettings::default(),
    );
    solve(
        Source::Generate(design_spec(2)),
        &out,
        SolveSettings::default(),
    );
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches("instance_id").count(), 1);
    let rows: Vec<DesignRow> = read_rows(&out).unwrap();
    assert_eq!(rows.len(), 30);
    let meta = fs::read_to_string(sidecar(&out, ".meta.jsonl")).unwrap();
    assert_eq!(meta.lines().count(), 2);
}

#[test]
fn node_cap_marks_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let mut settings = SolveSettings::default();
    settings.search.stop = StopCondition::nodes(1);
    let report = solve(
        Source::Generate(design_spec(4)),
        &dir.path().join("r.csv"),
        settings,
    );
    let bagel: Vec<&DesignRow> = report
        .design_rows
        .iter()
        .filter(|r| r.method == "bagel")
        .collect();
    assert!(bagel.iter().all(|r| !r.completed && r.nodes == 1));
    assert!(report
        .design_rows
        .iter()
        .filter(|r| r.method != "bagel")
        .all(|r| r.completed));
}

#[test]
fn fixture_trace_replays_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("toy.csv");
    let report = cmd_solve(&RunConfig {
        source: Source::Fixture(Fixture::ToySearch),
        settings: SolveSettings::default(),
        out: out.clone(),
        trace: true,
    })
    .unwrap();
    assert_eq!(report.design_rows[0].train_loss, Some(0.19));
    let trace: Vec<TraceRecord> = fs::read_to_string(sidecar(&out, ".trace.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let expected = toy_search_expected_order();
    assert_eq!(trace.len(), expected.len());
    for (rec, (trail, loss, status)) in trace.iter().zip(expected) {
        assert_eq!(rec.trail, trail);
        assert_eq!(rec.loss, Some(loss));
        assert_eq!(rec.status, status);
    }
    assert_eq!(trace[3].status, NodeStatus::Pruned);
}

#[test]
fn nmf_solve_reports_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nmf.csv");
    let report = solve(
        Source::Generate(GeneratorSpec::PriorNmf(NmfGeneratorParams::new(
            20, 4, 2, 50, 5,
        ))),
        &out,
        SolveSettings {
            iters: 300,
            ..SolveSettings::default()
        },
    );
    let row = &report.nmf_rows[0];
    assert!(row.best_loss.is_some() && row.planted_loss.is_some());
    assert!((0.0..=1.0).contains(&row.recovery.unwrap()));
    assert_eq!(row.topics.split(';').count(), 4);
    let back: Vec<NmfRow> = read_rows(&out).unwrap();
    assert_eq!(&back[0], row);
}

#[test]
fn bench_runs_grid_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = BenchSpec {
        grid: BenchGrid::SmartDesign {
            features: vec![10, 20],
            samples: vec![100],
            costs: vec![0.3, 0.6],
            noise_ratio: 0.1,
        },
        seeds: vec![1],
        settings: SolveSettings::default(),
        out_dir: dir.path().to_path_buf(),
    };
    let first = cmd_bench(&spec).unwrap();
    assert_eq!((first.ran, first.skipped, first.failed), (4, 0, 0));
    let rows: Vec<BenchDesignRow> = read_rows(&first.rows).unwrap();
    let cells: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.cell.as_str()).collect();
    assert_eq!(cells.len(), 4);
    assert_eq!(rows.len(), 4 * 5 * 3);

    let again = cmd_bench(&BenchSpec {
        seeds: vec![1, 2],
        ..spec
    })
    .unwrap();
    assert_eq!((again.ran, again.skipped), (4, 4));
    let rows: Vec<BenchDesignRow> = read_rows(&again.rows).unwrap();
    assert_eq!(rows.len(), 8 * 5 * 3);
    let summary = fs::read_to_string(&again.summary).unwrap();
    // header plus one line per (cell, method)
    assert_eq!(summary.lines().count(), 1 + 4 * 3);
}

#[test]
fn bench_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let spec = BenchSpec {
        grid: BenchGrid::SmartDesign {
            features: vec![10],
            samples: vec![3, 100],
            costs: vec![0.6],
            noise_ratio: 0.1,
        },
        seeds: vec![1],
        settings: SolveSettings::default(),
        out_dir: dir.path().to_path_buf(),
    };
    let outcome = cmd_bench(&spec).unwrap();
    assert_eq!((outcome.ran, outcome.failed), (2, 1));
    let rows: Vec<BenchDesignRow> = read_rows(&outcome.rows).unwrap();
    assert_eq!(rows.iter().filter(|r| r.error.is_some()).count(), 1);
    assert_eq!(rows.iter().filter(|r| r.error.is_none()).count(), 15);
}

#[test]
fn binary_generate_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let out = bin()
        .args([
            "generate",
            "--problem",
            "smart-design",
            "--n",
            "10",
            "--samples",
            "100",
            "--cost",
            "0.6",
        ])
        .args(["--seed", "7", "--out"])
        .arg(&inst)
        .output()
        .unwrap();
    assert!(out.status.success());
    let printed = String::from_utf8(out.stdout).unwrap();
    let (_, digest) = read_instance(&inst).unwrap();
    assert!(printed.starts_with(&digest));

    let results = dir.path().join("r.csv");
    let status = bin()
        .args(["solve", "--instance"])
        .arg(&inst)
        .arg("--out")
        .arg(&results)
        .args(["--timeout-s", "30"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert_eq!(read_rows::<DesignRow>(&results).unwrap().len(), 15);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cost = bin()
        .args([
            "generate",
            "--problem",
            "smart-design",
            "--n",
            "10",
            "--samples",
            "100",
            "--cost",
            "1.5",
        ])
        .arg("--out")
        .arg(dir.path().join("x.json"))
        .output()
        .unwrap()
        .status;
    assert_eq!(bad_cost.code(), Some(1));

    let missing = bin()
        .args(["solve", "--instance"])
        .arg(dir.path().join("nope.json"))
        .output()
        .unwrap()
        .status;
    assert_eq!(missing.code(), Some(2));

    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, "{not json").unwrap();
    let status = bin()
        .args(["solve", "--instance"])
        .arg(&corrupt)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn seed_variable_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |name: &str, env: Option<&str>| {
        let path = dir.path().join(name);
        let mut c = bin();
        if let Some(v) = env {
            c.env("BAGEL_SEED", v);
        }
        let ok = c
            .args([
                "generate",
                "--problem",
                "smart-design",
                "--n",
                "10",
                "--samples",
                "100",
                "--cost",
                "0.6",
            ])
            .args(["--seed", "1", "--out"])
            .arg(&path)
            .output()
            .unwrap()
            .status
            .success();
        assert!(ok);
        fs::read(path).unwrap()
    };
    let plain = gen("a.json", None);
    let overridden = gen("b.json", Some("9"));
    let direct = {
        let p = dir.path().join("c.json");
        cmd_generate(&design_spec(9), &p).unwrap();
        fs::read(p).unwrap()
    };
    assert_ne!(plain, overridden);
    let (a, _) = read_instance(&dir.path().join("b.json")).unwrap();
    let (b, _) = read_instance(&dir.path().join("c.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(overridden, direct);
}
