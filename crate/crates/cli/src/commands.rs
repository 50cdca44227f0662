use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use robogym::model::{parse_sdf_bytes, serialize_sdf};
use robogym::record::{first_divergence, read_dump, DumpHeader, DumpWriter, DUMP_FORMAT};
use robogym::runtime::{rollout, Policy, Rollout, VectorEnv};
use robogym::seed::{SeedTree, LABEL_POLICY};
use robogym::{make, EngineId, EnvOptions, Environment, SimulatedRuntime, StepRecord};

use crate::args::{BenchmarkArgs, EnvArgs, ParseArgs, PolicySpec, ReplayArgs, RunArgs, VerifyArgs};
use crate::CliError;

/// Called with the repeat index and the freshly built environment before each
/// verification run. Tests use it to inject faults.
pub type RunHook<'a> = &'a dyn Fn(usize, &mut SimulatedRuntime);

fn env_options(args: &EnvArgs, rtf: f64) -> EnvOptions {
    EnvOptions {
        engine: args.engine,
        seed: args.seed,
        rtf,
        physics_dt: None,
        exact_init: args.exact_init,
    }
}

fn header_for(env: &SimulatedRuntime, args: &EnvArgs) -> DumpHeader {
    DumpHeader {
        format: DUMP_FORMAT.into(),
        version: robogym::VERSION.into(),
        env: args.env.clone(),
        engine: args.engine,
        seed: args.seed,
        physics_dt: env.config().physics_dt().as_secs_f64(),
        agent_period: env.config().agent_period().as_secs_f64(),
        exact_init: args.exact_init,
    }
}

/// Dump bytes exactly as `run --dump` writes them.
pub fn dump_bytes(header: &DumpHeader, records: &[StepRecord]) -> Vec<u8> {
    let mut w = DumpWriter::new(Vec::new(), header).expect("writing to memory");
    for r in records {
        w.write(r).expect("writing to memory");
    }
    w.finish().expect("writing to memory")
}

/// Reads a JSON-Lines action script, one array per line.
pub fn load_script(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    let mut actions = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let action: Vec<f64> = serde_json::from_str(&line).map_err(|e| {
            CliError::Usage(format!("{}:{}: invalid action: {e}", path.display(), i + 1))
        })?;
        if action.len() != dim {
            return Err(CliError::Usage(format!(
                "{}:{}: action has {} values, the action space has {dim}",
                path.display(),
                i + 1,
                action.len()
            )));
        }
        actions.push(action);
    }
    Ok(actions)
}

fn build_policy(spec: &PolicySpec, seed: u64, dim: usize, steps: usize) -> Result<Policy, CliError> {
    Ok(match spec {
        PolicySpec::Zero => Policy::Zero,
        PolicySpec::Random => Policy::random(seed),
        PolicySpec::Script(path) => {
            let actions = load_script(path, dim)?;
            if actions.len() < steps {
                return Err(CliError::Usage(format!(
                    "{} holds {} actions but {steps} steps were requested",
                    path.display(),
                    actions.len()
                )));
            }
            Policy::script(actions)
        }
    })
}

fn write_dump(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

pub fn run(args: &RunArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<(), CliError> {
    let mut env = make(&args.env.env, &env_options(&args.env, args.rtf))?;
    let dim = env.metadata().action_space.dim();
    let mut policy = build_policy(&args.policy, args.env.seed, dim, args.steps)?;
    let result = rollout(&mut env, &mut policy, args.steps)?;
    if let Some(path) = &args.dump {
        write_dump(path, &dump_bytes(&header_for(&env, &args.env), &result.records))?;
    }
    writeln!(
        out,
        "env {} engine {} seed {} policy {}",
        args.env.env, args.env.engine, args.env.seed, args.policy
    )?;
    print_summary(out, &result)?;
    Ok(())
}

fn print_summary(out: &mut dyn Write, result: &Rollout) -> Result<(), CliError> {
    for (i, e) in result.episodes.iter().enumerate() {
        let end = e
            .terminal
            .map_or_else(|| "still running".to_string(), |t| format!("ended by {t}"));
        writeln!(
            out,
            "episode {}: {} steps, reward {}, {end}",
            i + 1,
            e.steps,
            e.total_reward
        )?;
    }
    writeln!(
        out,
        "total reward {} over {} steps ({} episodes)",
        result.total_reward(),
        result.records.len(),
        result.episodes.len()
    )?;
    Ok(())
}

pub fn verify_determinism(
    args: &VerifyArgs,
    out: &mut dyn Write,
    hook: Option<RunHook<'_>>,
) -> Result<(), CliError> {
    if args.repeats < 2 {
        return Err(CliError::Usage(format!(
            "--repeats must be at least 2, got {}",
            args.repeats
        )));
    }
    let options = env_options(&args.env, 0.0);
    let mut reference: Option<(Vec<u8>, Vec<StepRecord>)> = None;
    for k in 0..args.repeats {
        let mut env = make(&args.env.env, &options)?;
        if let Some(hook) = hook {
            hook(k, &mut env);
        }
        let script = Policy::random_script(args.env.seed, &env.metadata().action_space, args.steps);
        let result = rollout(&mut env, &mut Policy::script(script), args.steps)?;
        let bytes = dump_bytes(&header_for(&env, &args.env), &result.records);
        match &reference {
            None => reference = Some((bytes, result.records)),
            Some((ref_bytes, ref_records)) if *ref_bytes != bytes => {
                let step = first_divergence(ref_records, &result.records).unwrap_or(0);
                writeln!(out, "run {} diverges from run 1 at step {step}", k + 1)?;
                return Err(CliError::Failed(format!(
                    "non-deterministic: first divergent step {step}"
                )));
            }
            Some(_) => {}
        }
    }
    let size = reference.map_or(0, |(b, _)| b.len());
    writeln!(
        out,
        "deterministic: {} runs of {} steps on {} produced identical dumps ({size} bytes)",
        args.repeats, args.steps, args.env.env
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub env: String,
    pub engine: EngineId,
    pub instances: usize,
    /// Steps per instance.
    pub steps: u64,
    pub wall_seconds: f64,
    /// Simulated time per instance.
    pub sim_seconds: f64,
    pub achieved_rtf: f64,
    /// Physics ticks per second summed over instances.
    pub ticks_per_second: f64,
}

pub fn benchmark_report(args: &BenchmarkArgs) -> Result<BenchmarkReport, CliError> {
    let options = env_options(&args.env, 0.0);
    let instances = args.parallel.unwrap_or(1);
    if instances == 0 {
        return Err(CliError::Usage("--parallel must be at least 1".into()));
    }
    let probe = make(&args.env.env, &options)?;
    let period = probe.config().agent_period();
    let ticks_per_step = probe.config().ticks_per_step();
    let space = probe.metadata().action_space.clone();
    let mut rng = SeedTree::new(args.env.seed).rng(LABEL_POLICY);

    let wall = if args.parallel.is_none() {
        let mut env = probe;
        let start = Instant::now();
        env.reset()?;
        for _ in 0..args.steps {
            if env.step(&space.sample(&mut rng))?.done {
                env.reset()?;
            }
        }
        start.elapsed()
    } else {
        let mut venv = VectorEnv::make(&args.env.env, &options, instances, instances)?;
        let start = Instant::now();
        for r in venv.reset() {
            r?;
        }
        for _ in 0..args.steps {
            let actions: Vec<Vec<f64>> = (0..instances).map(|_| space.sample(&mut rng)).collect();
            for r in venv.step(&actions)? {
                r?;
            }
        }
        start.elapsed()
    };

    let wall_seconds = wall.as_secs_f64().max(f64::MIN_POSITIVE);
    let steps = args.steps as u64;
    let sim_seconds = period.times(steps).as_secs_f64();
    Ok(BenchmarkReport {
        env: args.env.env.clone(),
        engine: args.env.engine,
        instances,
        steps,
        wall_seconds,
        sim_seconds,
        achieved_rtf: sim_seconds / wall_seconds,
        ticks_per_second: (instances as u64 * steps * ticks_per_step) as f64 / wall_seconds,
    })
}

pub fn benchmark(args: &BenchmarkArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let report = benchmark_report(args)?;
    writeln!(out, "{}", serde_json::to_string(&report).expect("report serializes"))?;
    writeln!(
        err,
        "{}: {} steps x {} instance(s) in {:.3} s wall, {:.3} s simulated, RTF {:.1}, {:.0} ticks/s",
        report.env,
        report.steps,
        report.instances,
        report.wall_seconds,
        report.sim_seconds,
        report.achieved_rtf,
        report.ticks_per_second
    )?;
    Ok(())
}

pub fn replay(args: &ReplayArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let path = &args.dump;
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let dump = read_dump(BufReader::new(file)).map_err(|source| CliError::Dump {
        path: path.clone(),
        source,
    })?;
    let h = &dump.header;
    let conflicts = [
        args.env.as_ref().filter(|e| **e != h.env).map(|e| format!("--env {e} but the dump is for {}", h.env)),
        args.seed.filter(|s| *s != h.seed).map(|s| format!("--seed {s} but the dump used {}", h.seed)),
        args.engine.filter(|e| *e != h.engine).map(|e| format!("--engine {e} but the dump used {}", h.engine)),
    ];
    if let Some(c) = conflicts.into_iter().flatten().next() {
        return Err(CliError::Usage(c));
    }
    if h.version != robogym::VERSION {
        return Err(CliError::Failed(format!(
            "dump written by version {}, this is {}",
            h.version,
            robogym::VERSION
        )));
    }
    let options = EnvOptions {
        engine: h.engine,
        seed: h.seed,
        rtf: 0.0,
        physics_dt: Some(h.physics_dt),
        exact_init: h.exact_init,
    };
    let mut env = make(&h.env, &options)?;
    if env.config().agent_period().as_secs_f64() != h.agent_period {
        return Err(CliError::Failed(format!(
            "dump agent period {} s does not match {} s for {}",
            h.agent_period,
            env.config().agent_period().as_secs_f64(),
            h.env
        )));
    }
    let actions: Vec<Vec<f64>> = dump.records.iter().map(|r| r.action.clone()).collect();
    let n = actions.len();
    let replayed = rollout(&mut env, &mut Policy::script(actions), n)?;
    if let Some(i) = first_divergence(&dump.records, &replayed.records) {
        writeln!(out, "mismatch at step {i}")?;
        if let Some(r) = dump.records.get(i) {
            writeln!(out, "  recorded: {}", r.to_json_line())?;
        }
        if let Some(r) = replayed.records.get(i) {
            writeln!(out, "  replayed: {}", r.to_json_line())?;
        }
        return Err(CliError::Failed(format!("replay diverged at step {i}")));
    }
    writeln!(out, "replay ok: {n} records identical")?;
    Ok(())
}

pub fn parse(args: &ParseArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let path = &args.model;
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let name = path.display().to_string();
    match parse_sdf_bytes(&bytes) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                writeln!(err, "{}", w.render(&name))?;
            }
            if args.print {
                write!(out, "{}", serialize_sdf(&parsed.model))?;
            } else {
                let m = &parsed.model;
                writeln!(
                    out,
                    "{name}: ok, model '{}' with {} links, {} joints, {} dof",
                    m.name,
                    m.links.len(),
                    m.joints.len(),
                    m.dof()
                )?;
            }
            Ok(())
        }
        Err(e) => {
            let diags = e.diagnostics();
            for d in diags {
                writeln!(err, "{}", d.render(&name))?;
            }
            let errors = diags.iter().filter(|d| d.is_error()).count();
            Err(CliError::Failed(format!("{name}: {errors} error(s)")))
        }
    }
}
