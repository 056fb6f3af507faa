use std::fs;

use jitai_core::harness::plot::emit_plots;
use jitai_core::harness::stats::nearest_rank;
use jitai_core::harness::{run_sweep, summary_from_trial_logs, AggregateResult, Mode, SweepSpec};
use jitai_core::Error;

fn spec(dir: &std::path::Path) -> SweepSpec {
    SweepSpec {
        output_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

#[test]
fn scenario_one_grid_runs_one_hundred_trials() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&spec(dir.path())).unwrap();
    assert_eq!(result.cells.len(), 5);
    let trials: usize = result.cells.iter().flat_map(|c| &c.modes).map(|m| m.totals.len()).sum();
    assert_eq!(trials, 100);
    let logs = fs::read_dir(dir.path().join("trials"))
        .unwrap()
        .filter(|e| {
            let name = e.as_ref().unwrap().file_name().into_string().unwrap();
            name.ends_with(".jsonl") && !name.ends_with(".audit.jsonl")
        })
        .count();
    assert_eq!(logs, 100);
    for c in &result.cells {
        for m in &c.modes {
            assert_eq!(m.action_counts.iter().sum::<usize>(), m.steps);
            assert_eq!(m.steps, 50 * 10);
            assert_eq!(m.cumulative.len(), 50);
        }
    }
}

#[test]
fn single_cell_single_seed_has_two_summary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let s = SweepSpec {
        p_w00_values: vec![0.1],
        seeds: vec![7],
        ..spec(dir.path())
    };
    run_sweep(&s).unwrap();
    let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "p_w11,p_w00,mode,median,q25,q75");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.7,0.1,hybrid,"));
    assert!(lines[2].starts_with("0.7,0.1,standard,"));
}

#[test]
fn summary_is_recomputable_from_trial_logs() {
    let dir = tempfile::tempdir().unwrap();
    let s = SweepSpec {
        p_w11_values: vec![0.95],
        p_w00_values: vec![0.2, 0.4],
        seeds: (100..106).collect(),
        ..spec(dir.path())
    };
    run_sweep(&s).unwrap();
    let written = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary_from_trial_logs(&s).unwrap(), written);
}

#[test]
fn totals_quartiles_follow_sort_based_percentiles() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&SweepSpec { p_w00_values: vec![0.3], ..spec(dir.path()) }).unwrap();
    for m in &result.cells[0].modes {
        let mut sorted = m.totals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // nearest rank on ten values: ranks 3, 5 and 8
        assert_eq!(m.quartiles.q25, sorted[2]);
        assert_eq!(m.quartiles.median, sorted[4]);
        assert_eq!(m.quartiles.q75, sorted[7]);
        assert_eq!(nearest_rank(&sorted, 50.0), Some(sorted[4]));
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let run_with = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let s = SweepSpec { p_w11_values: vec![0.7, 0.95], write_trials: false, ..spec(dir.path()) };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let result = pool.install(|| run_sweep(&s)).unwrap();
        let files = ["summary.csv", "histogram.csv"].map(|f| fs::read(dir.path().join(f)).unwrap());
        (result, files)
    };
    let (r1, f1) = run_with(1);
    let (r4, f4) = run_with(4);
    assert_eq!(r1, r4);
    assert_eq!(f1, f4);
}

#[test]
fn standard_only_sweep_makes_no_filter_calls() {
    let dir = tempfile::tempdir().unwrap();
    let s = SweepSpec { modes: vec![Mode::Standard], write_trials: false, ..spec(dir.path()) };
    let result = run_sweep(&s).unwrap();
    assert!(result.cells.iter().flat_map(|c| &c.modes).all(|m| m.filter_calls == 0));
}

#[test]
fn unwritable_output_dir_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let s = spec(&blocker.join("out"));
    assert!(matches!(run_sweep(&s), Err(Error::Io { .. })));
}

#[test]
fn invalid_spec_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let s = SweepSpec { seeds: vec![], ..spec(dir.path()) };
    assert!(matches!(run_sweep(&s), Err(Error::Config(_))));
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn custom_preference_file_feeds_trials() {
    let dir = tempfile::tempdir().unwrap();
    let prefs = dir.path().join("prefs.txt");
    fs::write(&prefs, "I broke my toe\n").unwrap();
    let s = SweepSpec {
        p_w00_values: vec![0.5],
        seeds: vec![1],
        modes: vec![Mode::Hybrid],
        preference_file: Some(prefs),
        ..spec(&dir.path().join("out"))
    };
    run_sweep(&s).unwrap();
    let log = fs::read_to_string(dir.path().join("out/trials/hybrid_pw11_0.7_pw00_0.5_seed_1.jsonl")).unwrap();
    assert!(log.contains("I broke my toe"));
    let audit = fs::read_to_string(dir.path().join("out/trials/hybrid_pw11_0.7_pw00_0.5_seed_1.audit.jsonl")).unwrap();
    assert!(audit.lines().count() > 0);
}

fn histogram_counts(svg: &str) -> Vec<(String, usize, usize)> {
    svg.lines()
        .filter(|l| l.contains("data-count="))
        .map(|l| {
            let attr = |name: &str| {
                let start = l.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
                l[start..].split('"').next().unwrap().to_string()
            };
            (attr("data-mode"), attr("data-action").parse().unwrap(), attr("data-count").parse().unwrap())
        })
        .collect()
}

#[test]
fn plots_match_csv_data_and_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let s = SweepSpec { p_w00_values: vec![0.1, 0.2], write_trials: false, ..spec(dir.path()) };
    let result = run_sweep(&s).unwrap();
    let files = emit_plots(&result, dir.path()).unwrap();
    assert_eq!(files.len(), 6);

    let histogram = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    let svg = fs::read_to_string(dir.path().join("plots/pw11_0.7_pw00_0.1_actions.svg")).unwrap();
    let bars = histogram_counts(&svg);
    assert_eq!(bars.len(), 8);
    for (mode, action, count) in bars {
        let row = format!("0.7,0.1,{mode},{action},{count}");
        assert!(histogram.lines().any(|l| l == row), "missing {row}");
    }

    let first: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();
    let again = emit_plots(&result, dir.path()).unwrap();
    let second: Vec<Vec<u8>> = again.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn no_modes_means_no_plots() {
    let dir = tempfile::tempdir().unwrap();
    let s = SweepSpec { modes: vec![], write_trials: false, ..spec(dir.path()) };
    let result = run_sweep(&s).unwrap();
    assert!(emit_plots(&result, dir.path()).unwrap().is_empty());
    assert!(!dir.path().join("plots").exists());
    let empty = AggregateResult { cells: vec![] };
    assert!(emit_plots(&empty, dir.path()).unwrap().is_empty());
}
