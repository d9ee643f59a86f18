use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gcfk_experiments::config::{validate_config, Config, ConfigError, ExperimentId};
use gcfk_experiments::output::RunManifest;
use gcfk_experiments::runner::{compute_tables, run_experiment, RunRequest};

fn gcfk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcfk")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small enough that the Monte Carlo experiments finish quickly.
const LIGHT: &str = "
[mechanism_grid]
reps = 1000
rho = [0.0, 0.2]

[power_contours]
mc_reps = 2000
mc_max_n = 5

[audit_greedy_bench]
instances = 10
";

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_names_every_experiment() {
    let o = gcfk(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ExperimentId::ALL {
        assert!(text.contains(id.as_str()), "missing {id}");
    }
}

#[test]
fn run_then_verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = gcfk(&["run", "dynamics_trajectories", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = out.join("manifest.json");
    let m = RunManifest::read(&manifest).unwrap();
    assert_eq!(m.seed, 5);
    assert_eq!(m.outputs.len(), 3);
    let csv = fs::read_to_string(out.join("fixed_points.csv")).unwrap();
    assert!(csv.starts_with("# dynamics_trajectories: "));

    assert!(gcfk(&["verify", manifest.to_str().unwrap()]).status.success());
    fs::write(out.join("fixed_points.csv"), "p_star\n0.5\n").unwrap();
    let bad = gcfk(&["verify", manifest.to_str().unwrap()]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stdout).contains("MISMATCH  fixed_points.csv"));
}

#[test]
fn missing_seed_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gcfk(&["run", "static_threshold", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no seed given"), "{}", stderr(&o));
}

#[test]
fn seed_from_config_and_mismatched_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "experiment = \"static_threshold\"\nseed = 9\n");
    let out = dir.path().join("o");
    let ok = gcfk(&["run", "static_threshold", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert_eq!(RunManifest::read(&out.join("manifest.json")).unwrap().seed, 9);

    let bad = gcfk(&["run", "alpha_min_contour", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("config is for experiment `static_threshold`"));
}

#[test]
fn unknown_keys_warn_or_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 1\n[static_threshold]\nangle = 3\n");
    let out = dir.path().join("o");
    let lax = gcfk(&["run", "static_threshold", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(lax.status.success());
    assert!(stderr(&lax).contains("warning: ignoring unknown key `static_threshold.angle`"));

    let strict = gcfk(&["run", "static_threshold", "--config", &cfg, "--strict", "--out", out.to_str().unwrap()]);
    assert!(!strict.status.success());
    assert!(stderr(&strict).contains("static_threshold.angle"));
}

#[test]
fn range_error_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 1\n[mechanism_grid]\nrho = [0.1, 0.7]\n");
    let o = gcfk(&["run", "mechanism_grid", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("mechanism_grid.rho[1]"), "{}", stderr(&o));
}

#[test]
fn resolve_prefers_command_line() {
    let mut cfg = Config::default();
    cfg.seed = Some(3);
    cfg.output_dir = Some("from-config".into());
    let r = RunRequest::resolve(ExperimentId::PowerContours, cfg.clone(), Some(4), None, None).unwrap();
    assert_eq!((r.seed, r.out_dir.to_str().unwrap()), (4, "from-config"));
    let r = RunRequest::resolve(ExperimentId::PowerContours, cfg, None, Some("cli".into()), Some(2)).unwrap();
    assert_eq!((r.seed, r.out_dir.to_str().unwrap(), r.workers), (3, "cli", Some(2)));
    assert_eq!(
        RunRequest::resolve(ExperimentId::PowerContours, Config::default(), None, None, None).unwrap_err(),
        ConfigError::MissingSeed
    );
}

#[test]
fn seed_controls_stochastic_outputs() {
    let cfg = validate_config(LIGHT, true).unwrap().config;
    for id in [ExperimentId::MechanismGrid, ExperimentId::PowerContours, ExperimentId::AuditGreedyBench] {
        let a = compute_tables(id, &cfg, 1).unwrap();
        let b = compute_tables(id, &cfg, 1).unwrap();
        let c = compute_tables(id, &cfg, 2).unwrap();
        assert_eq!(a, b, "{id}");
        let body = |t: &[gcfk_experiments::Table]| t.iter().map(|t| t.rows.clone()).collect::<Vec<_>>();
        assert_ne!(body(&a), body(&c), "{id} ignores its seed");
    }
}

#[test]
fn closed_form_outputs_ignore_the_seed() {
    let cfg = Config::default();
    for id in [ExperimentId::StaticThreshold, ExperimentId::ExitFixedpointSweeps, ExperimentId::CoalitionBoundary] {
        let rows = |s| compute_tables(id, &cfg, s).unwrap().into_iter().map(|t| t.rows).collect::<Vec<_>>();
        assert_eq!(rows(1), rows(99), "{id}");
    }
}

#[test]
fn manifest_digests_match_across_worker_counts() {
    let cfg = validate_config(LIGHT, true).unwrap().config;
    let dir = tempfile::tempdir().unwrap();
    for id in ExperimentId::ALL {
        let run = |workers, sub: &str| {
            let req = RunRequest {
                experiment: id,
                config: cfg.clone(),
                seed: 77,
                out_dir: dir.path().join(id.as_str()).join(sub),
                workers: Some(workers),
            };
            run_experiment(&req).unwrap().outputs
        };
        assert_eq!(run(1, "a"), run(3, "b"), "{id}");
    }
}

#[test]
fn audit_bench_reads_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.txt", "3 2 2\n1 1 1\n1 1\n1 0\n0 1\n0.6 0.6\n");
    let cfg = format!("[audit_greedy_bench]\ninstances = 2\ninstance_file = \"{inst}\"\n");
    let cfg = validate_config(&cfg, true).unwrap().config;
    let tables = compute_tables(ExperimentId::AuditGreedyBench, &cfg, 0).unwrap();
    let last = tables[0].rows.last().unwrap();
    let text = tables[0].render();
    assert_eq!(tables[0].rows.len(), 3);
    assert!(text.lines().last().unwrap().starts_with(&format!("{inst},3,2,2.0,")), "{text}");
    // Optimum covers both risks with the first two candidates.
    assert_eq!(last[6], 2.0.into());
}
