use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use robogym::model::CARTPOLE_SDF;
use robogym::SimulatedRuntime;
use robogym_cli::commands::{self, BenchmarkReport};
use robogym_cli::{Cli, CliError};
use clap::Parser;

fn robogym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robogym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn run_dump(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut args = vec!["run", "--env", "cartpole-balance", "--seed", "42", "--steps", "300", "--policy", "random", "--dump"];
    args.push(path.to_str().unwrap());
    args.extend_from_slice(extra);
    let o = robogym(&args);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    path
}

#[test]
fn unknown_env_is_a_usage_error_listing_ids() {
    let o = robogym(&["run", "--env", "cartpole-balnce"]);
    assert_eq!(code(&o), 2);
    let err = text(&o.stderr);
    for id in robogym::tasks::ids() {
        assert!(err.contains(&id), "{err}");
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&robogym(&["run", "--env", "pendulum-swingup", "--engine", "ode"])), 2);
    assert_eq!(code(&robogym(&["run", "--env", "pendulum-swingup", "--rtf", "-1"])), 2);
    assert_eq!(code(&robogym(&["verify-determinism", "--env", "pendulum-swingup", "--repeats", "1"])), 2);
}

#[test]
fn run_dumps_are_reproducible_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_dump(dir.path(), "a.jsonl", &[]);
    let b = run_dump(dir.path(), "b.jsonl", &[]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = run_dump(dir.path(), "c.jsonl", &["--engine", "rk4"]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    for p in [&a, &c] {
        let o = robogym(&["replay", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    }
    let o = robogym(&["replay", a.to_str().unwrap(), "--seed", "42", "--env", "cartpole-balance"]);
    assert_eq!(code(&o), 0);
    let o = robogym(&["replay", a.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn replay_reports_the_first_tampered_step() {
    let dir = tempfile::tempdir().unwrap();
    let path = run_dump(dir.path(), "d.jsonl", &[]);
    let mut lines: Vec<String> = fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
    // Line 0 is the header, so record 17 is line 18.
    lines[18] = lines[18].replace("\"rew\":1.0", "\"rew\":0.5");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = robogym(&["replay", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stdout).contains("mismatch at step 17"), "{}", text(&o.stdout));
}

#[test]
fn replay_names_the_broken_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = run_dump(dir.path(), "e.jsonl", &[]);
    let content = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = content.lines().collect();
    let half = &lines[5][..lines[5].len() / 2];
    lines[5] = half;
    fs::write(&path, lines.join("\n")).unwrap();
    let o = robogym(&["replay", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stderr).contains("line 6"), "{}", text(&o.stderr));
}

#[test]
fn script_policy_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.jsonl");
    let actions: String = (0..50).map(|k| format!("[{}]\n", (k as f64 / 25.0) - 1.0)).collect();
    fs::write(&script, actions).unwrap();
    let spec = format!("script:{}", script.display());
    let o = robogym(&["run", "--env", "pendulum-swingup", "--steps", "50", "--policy", &spec]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let o = robogym(&["run", "--env", "pendulum-swingup", "--steps", "51", "--policy", &spec]);
    assert_eq!(code(&o), 2);
    fs::write(&script, "[0.1, 0.2]\n").unwrap();
    let o = robogym(&["run", "--env", "pendulum-swingup", "--steps", "1", "--policy", &spec]);
    assert_eq!(code(&o), 2);
}

#[test]
fn parse_command() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("cartpole.sdf");
    fs::write(&good, CARTPOLE_SDF).unwrap();
    let o = robogym(&["parse", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let o = robogym(&["parse", good.to_str().unwrap(), "--print"]);
    assert_eq!(code(&o), 0);
    let printed = dir.path().join("printed.sdf");
    fs::write(&printed, &o.stdout).unwrap();
    let again = robogym(&["parse", printed.to_str().unwrap(), "--print"]);
    assert_eq!(code(&again), 0);
    assert_eq!(o.stdout, again.stdout);

    let bad = dir.path().join("bad.sdf");
    fs::write(&bad, CARTPOLE_SDF.replace("<mass>1.0</mass>", "<mass>0</mass>")).unwrap();
    let o = robogym(&["parse", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = text(&o.stderr);
    assert!(err.contains("bad.sdf:") && err.contains("mass > 0"), "{err}");

    assert_eq!(code(&robogym(&["parse", "/nonexistent/model.sdf"])), 1);
}

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("robogym").chain(args.iter().copied())).unwrap()
}

#[test]
fn verify_determinism_catches_injected_noise() {
    let args = match cli(&["verify-determinism", "--env", "cartpole-balance", "--seed", "42", "--steps", "200"]).command {
        robogym_cli::Command::VerifyDeterminism(a) => a,
        _ => unreachable!(),
    };
    let mut out = Vec::new();
    commands::verify_determinism(&args, &mut out, None).unwrap();

    // Run 2 perturbs every observation from step 120 on.
    let hook = |k: usize, env: &mut SimulatedRuntime| {
        if k == 1 {
            let mut n = 0u64;
            env.set_observation_hook(move |obs: &mut Vec<f64>| {
                n += 1;
                if n > 120 {
                    obs[0] += 1e-12;
                }
            });
        }
    };
    let mut out = Vec::new();
    let err = commands::verify_determinism(&args, &mut out, Some(&hook)).unwrap_err();
    assert!(matches!(err, CliError::Failed(_)));
    assert_eq!(err.exit_code(), 1);
    assert!(text(&out).contains("at step"), "{}", text(&out));
}

#[test]
fn benchmark_report_is_consistent() {
    for extra in [&[][..], &["--parallel", "3"][..]] {
        let mut args = vec!["benchmark", "--env", "cartpole-balance", "--steps", "500"];
        args.extend_from_slice(extra);
        let o = robogym(&args);
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
        let r: BenchmarkReport = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(r.steps, 500);
        assert_eq!(r.sim_seconds, 10.0);
        assert!((r.achieved_rtf - r.sim_seconds / r.wall_seconds).abs() <= 1e-9 * r.achieved_rtf);
        let ticks = (r.instances as u64 * 500 * 20) as f64;
        assert!((r.ticks_per_second - ticks / r.wall_seconds).abs() <= 1e-9 * r.ticks_per_second);
        assert_eq!(r.instances, if extra.is_empty() { 1 } else { 3 });
    }
}
