//! `mhs`: command-line front end for `mhs-core`.
//!
//! Every command except `delta4` and `export` prints `{"manifest", "result"}`
//! JSON on stdout (or to `--out`) and a short summary on stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use mhs_core::catalog::{self, GenTarget};
use mhs_core::circuit::{rewrite_for_graph, to_qasm, CouplingGraph};
use mhs_core::f2linear::{enumerate_group, BitMatrix4, CosetTable};
use mhs_core::hyperdet::{delta4, MAX_ABS_DELTA4};
use mhs_core::pauli::PUSH_THROUGH_TOL;
use mhs_core::qstate::StateVector;
use mhs_core::search::{
    flag_maximizers, lu_connect, maximize_delta4, maximize_delta4_restarts, polish, screen_cosets, ScreenConfig,
    WalkConfig, EXPECTED_SURVIVORS,
};

#[derive(Parser, Debug)]
#[command(name = "mhs", version, about = "Maximum hyperdeterminant states of four qubits")]
struct Cli {
    /// Write the JSON record (or QASM for `export`) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Enumerate GL(4,2) and its 840 cosets modulo qubit permutations.
    Cosets,
    /// Find the cosets on which |Δ4| does not vanish identically.
    Screen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        threshold: f64,
    },
    /// Maximize |Δ4(X_A|P⟩)| over P for one coset, one (i,j) pair or all survivors.
    Maximize {
        /// Coset index from `mhs cosets`.
        #[arg(long, conflicts_with_all = ["pair", "survivors"])]
        coset: Option<usize>,
        /// Use the matrix of M_k^(i,j), given as `i,j`.
        #[arg(long, conflicts_with = "survivors")]
        pair: Option<String>,
        /// Screen first, then maximize every survivor.
        #[arg(long)]
        survivors: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Check every catalog identity.
    Verify,
    /// Search P, φ with `to = e^{iφ} U(P) from`.
    Connect {
        /// State name or state file.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print `re im |abs|` of Δ4 for a state name or file.
    Delta4 {
        #[arg(long)]
        state: String,
    },
    /// Emit an OpenQASM 2.0 circuit preparing L, Phi5 or M2222.
    Export {
        #[arg(long)]
        target: String,
        /// Coupling graph JSON, `{"edges": [[1,0],...]}`.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Keep rotation gates instead of rewriting them in H, P, T.
        #[arg(long)]
        rotations: bool,
    },
    /// Look for Pauli-word explanations of numerically found maximizers.
    OrbitCheck {
        /// Coset pair `i,j`.
        #[arg(long, default_value = "0,1")]
        pair: String,
        #[arg(long, default_value_t = 4)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Fidelity tolerance for a Pauli relation.
        #[arg(long, default_value_t = PUSH_THROUGH_TOL)]
        tol: f64,
        /// Directory for state files of unexplained maximizers.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Re-run the command recorded in a result file and compare results.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cosets => "cosets",
            Command::Screen { .. } => "screen",
            Command::Maximize { .. } => "maximize",
            Command::Verify => "verify",
            Command::Connect { .. } => "connect",
            Command::Delta4 { .. } => "delta4",
            Command::Export { .. } => "export",
            Command::OrbitCheck { .. } => "orbit-check",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Versions {
    core: String,
    cli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    command: String,
    args: Command,
    config: Value,
    versions: Versions,
    threads: usize,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    outputs: Vec<String>,
}

struct Outcome {
    config: Value,
    result: Value,
    summary: String,
    /// Set when an asserted check failed.
    failure: Option<String>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn parse_pair(s: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("expected `i,j`, got `{s}`"))?;
    let (i, j): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if i >= 4 || j >= 4 || i == j {
        bail!("pair `{s}` needs distinct qubits in 0..3");
    }
    Ok((i, j))
}

fn resolve_state(spec: &str) -> anyhow::Result<StateVector> {
    if let Ok(named) = catalog::named_state(spec) {
        return Ok(named.state);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("`{spec}` is neither a known state ({}) nor a file", catalog::STATE_NAMES.join(", "));
    }
    StateVector::load(path).with_context(|| format!("reading state file {spec}"))
}

fn coset_table() -> CosetTable {
    CosetTable::partition(&enumerate_group())
}

fn pair_matrix(i: usize, j: usize) -> anyhow::Result<BitMatrix4> {
    Ok(catalog::build_m(i, j, catalog::default_k(i, j))?.1)
}

fn walk_config(seed: u64, restarts: usize, max_steps: Option<u64>) -> WalkConfig {
    let mut cfg = WalkConfig {
        seed,
        restarts,
        ..WalkConfig::maximize()
    };
    if let Some(m) = max_steps {
        cfg.max_steps = m;
    }
    cfg
}

fn cmd_cosets() -> anyhow::Result<Outcome> {
    let group = enumerate_group();
    let table = CosetTable::partition(&group);
    let summary = format!("{} group elements, {} cosets", group.len(), table.len());
    Ok(Outcome {
        config: Value::Null,
        result: json!({
            "group_order": group.len(),
            "cosets": table.len(),
            "records": table.to_json_records(),
        }),
        summary,
        failure: None,
    })
}

fn cmd_screen(seed: u64, samples: usize, threshold: f64) -> anyhow::Result<Outcome> {
    let mut table = coset_table();
    let cfg = ScreenConfig { seed, samples, threshold };
    let report = screen_cosets(&table, &cfg);
    report.apply_to(&mut table);
    let failure = report.check_expected(EXPECTED_SURVIVORS).err().map(|e| e.to_string());
    let rows: Vec<Value> = table
        .records()
        .iter()
        .map(|r| json!({"index": r.index, "key": r.key_hex(), "word": r.word.0, "peak": report.peaks[r.index], "survivor": r.survivor}))
        .collect();
    Ok(Outcome {
        config: serde_json::to_value(&cfg)?,
        result: json!({
            "survivor_count": report.survivors.len(),
            "survivors": report.survivors,
            "nearest_to_threshold": report.nearest_to_threshold(10),
            "cosets": rows,
        }),
        summary: format!("{} survivors out of {} cosets", report.survivors.len(), table.len()),
        failure,
    })
}

fn ceiling_failure(objective: f64) -> Option<String> {
    (objective > MAX_ABS_DELTA4 + 1e-9).then(|| format!("|Delta4| = {objective:e} exceeds the theoretical maximum"))
}

fn cmd_maximize(
    coset: Option<usize>,
    pair: Option<&str>,
    survivors: bool,
    cfg: WalkConfig,
) -> anyhow::Result<Outcome> {
    if survivors {
        return maximize_survivors(cfg);
    }
    let table = coset_table();
    let (a, label) = match (coset, pair) {
        (Some(c), None) => {
            let rec = table.record(c).ok_or_else(|| anyhow!("coset index {c} out of range 0..{}", table.len()))?;
            (rec.matrix, json!({"coset": c, "key": rec.key_hex(), "word": rec.word.0}))
        }
        (None, Some(p)) => {
            let (i, j) = parse_pair(p)?;
            let a = pair_matrix(i, j)?;
            let c = table.coset_of(&a).expect("invertible");
            (a, json!({"pair": [i, j], "k": catalog::default_k(i, j), "coset": c, "key": table.records()[c].key_hex()}))
        }
        _ => bail!("give exactly one of --coset, --pair or --survivors"),
    };
    let raw = maximize_delta4(&a, &cfg)?;
    let best = if raw.converged { polish(&a, &raw.params, cfg.seed)? } else { raw.clone() };
    let summary = format!(
        "best |Delta4| = {:.12e} (max {:.12e}, gap {:.2e}), restart {}",
        best.objective,
        MAX_ABS_DELTA4,
        MAX_ABS_DELTA4 - best.objective,
        raw.restart
    );
    Ok(Outcome {
        config: serde_json::to_value(&cfg)?,
        failure: ceiling_failure(raw.peak.unwrap_or(0.0).max(best.objective)),
        result: json!({"target": label, "matrix": a.hex(), "search": raw, "best": best}),
        summary,
    })
}

fn maximize_survivors(cfg: WalkConfig) -> anyhow::Result<Outcome> {
    let mut table = coset_table();
    let screen = screen_cosets(&table, &ScreenConfig::default());
    screen.apply_to(&mut table);
    let mut results = Vec::with_capacity(screen.survivors.len());
    for &c in &screen.survivors {
        let rec = &table.records()[c];
        results.push((c, maximize_delta4(&rec.matrix, &cfg)?));
    }
    flag_maximizers(&mut table, &results, cfg.tolerance);
    let peak = results.iter().filter_map(|(_, r)| r.peak).fold(0.0, f64::max);
    let rows: Vec<Value> = results
        .iter()
        .map(|(c, r)| {
            let rec = &table.records()[*c];
            json!({
                "coset": c,
                "key": rec.key_hex(),
                "word": rec.word.0,
                "pair": catalog::pair_of(&rec.matrix),
                "best": r.objective,
                "gap": MAX_ABS_DELTA4 - r.objective,
                "maximizer": rec.maximizer,
            })
        })
        .collect();
    let maximizers: Vec<usize> = table.records().iter().filter(|r| r.maximizer).map(|r| r.index).collect();
    let runner_up = results
        .iter()
        .filter(|(c, _)| !table.records()[*c].maximizer)
        .map(|(_, r)| r.objective)
        .fold(0.0, f64::max);
    Ok(Outcome {
        config: serde_json::to_value(&cfg)?,
        failure: ceiling_failure(peak),
        summary: format!(
            "{} survivors maximized; {} reach the maximum; best of the rest {:.6e}",
            results.len(),
            maximizers.len(),
            runner_up
        ),
        result: json!({
            "survivor_count": screen.survivors.len(),
            "maximizers": maximizers,
            "best_non_maximizer": runner_up,
            "peak": peak,
            "table": rows,
        }),
    })
}

fn cmd_verify() -> anyhow::Result<Outcome> {
    let report = catalog::verify_all();
    let failed: Vec<String> = report
        .failures()
        .map(|i| format!("{} (deviation {:e}, tolerance {:e})", i.name, i.max_deviation, i.tolerance))
        .collect();
    let mut summary = String::new();
    for item in &report.items {
        summary.push_str(&format!(
            "{} {} [{:.2e}]\n",
            if item.passed { "PASS" } else { "FAIL" },
            item.name,
            item.max_deviation
        ));
        if let Some(n) = &item.note {
            summary.push_str(&format!("     {n}\n"));
        }
    }
    summary.push_str(&format!("{} checks, {} failed", report.items.len(), failed.len()));
    Ok(Outcome {
        config: json!({"seed": catalog::VERIFY_SEED, "samples": catalog::VERIFY_SAMPLES}),
        result: serde_json::to_value(&report)?,
        summary,
        failure: (!failed.is_empty()).then(|| format!("failed: {}", failed.join("; "))),
    })
}

fn cmd_connect(from: &str, to: &str, seed: u64, restarts: usize, tol: Option<f64>) -> anyhow::Result<Outcome> {
    let source = resolve_state(from)?;
    let target = resolve_state(to)?;
    let mut cfg = WalkConfig {
        seed,
        restarts,
        ..WalkConfig::connect()
    };
    if let Some(t) = tol {
        cfg.tolerance = t;
    }
    let r = lu_connect(&source, &target, &cfg)?;
    Ok(Outcome {
        config: serde_json::to_value(&cfg)?,
        summary: format!(
            "residual {:.3e} ({}), phase {:.12}",
            r.objective,
            if r.converged { "converged" } else { "not converged" },
            r.phase.unwrap_or(0.0)
        ),
        result: serde_json::to_value(&r)?,
        failure: None,
    })
}

fn cmd_orbit_check(
    pair: &str,
    runs: u64,
    seed: u64,
    restarts: usize,
    tol: f64,
    dump: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let (i, j) = parse_pair(pair)?;
    let a = pair_matrix(i, j)?;
    let mut instances = Vec::new();
    let (mut explained, mut unexplained) = (0usize, 0usize);
    if let Some(d) = dump {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    for run in 0..runs {
        let cfg = WalkConfig {
            seed: seed.wrapping_add(run),
            restarts,
            ..WalkConfig::maximize()
        };
        for r in maximize_delta4_restarts(&a, &cfg, None)?.into_iter().filter(|r| r.converged) {
            let polished = polish(&a, &r.params, cfg.seed ^ r.restart as u64)?;
            let m = catalog::explain_maximizer(i, j, &polished.params, tol)?;
            let mut dumped = None;
            match m {
                Some(_) => explained += 1,
                None => {
                    unexplained += 1;
                    if let Some(d) = dump {
                        let path = d.join(format!("unexplained_{i}{j}_run{run}_restart{}.state", r.restart));
                        let state = polished.params.state().apply_linear(&a);
                        let comment = format!("params {:?}", polished.params.rows);
                        state.save(&path, Some(&comment))?;
                        dumped = Some(path.display().to_string());
                    }
                }
            }
            instances.push(json!({
                "run": run,
                "restart": r.restart,
                "objective": polished.objective,
                "params": polished.params,
                "explanation": m,
                "dumped": dumped,
            }));
        }
    }
    Ok(Outcome {
        config: json!({"pair": [i, j], "runs": runs, "seed": seed, "restarts": restarts, "tol": tol, "walk": WalkConfig::maximize()}),
        summary: format!(
            "{} maximizers found: {explained} explained by a Pauli word from sigma P_max or sigma P'_max, {unexplained} unexplained",
            instances.len()
        ),
        result: json!({"found": instances.len(), "explained": explained, "unexplained": unexplained, "instances": instances}),
        failure: None,
    })
}

fn cmd_delta4(state: &str) -> anyhow::Result<(String, Outcome)> {
    let s = resolve_state(state)?;
    let d = delta4(&s)?;
    let line = format!("{:e} {:e} {:e}", d.re, d.im, d.norm());
    Ok((
        line.clone(),
        Outcome {
            config: Value::Null,
            result: json!({"re": d.re, "im": d.im, "abs": d.norm()}),
            summary: line,
            failure: None,
        },
    ))
}

fn cmd_export(target: &str, graph: Option<&Path>, rotations: bool) -> anyhow::Result<(String, String)> {
    let t = GenTarget::from_name(target)?;
    let mut c = catalog::generation_circuit(t);
    if !rotations {
        c = catalog::to_universal(&c);
    }
    if let Some(g) = graph {
        let text = fs::read_to_string(g).with_context(|| format!("reading {}", g.display()))?;
        c = rewrite_for_graph(&c, &CouplingGraph::from_json(&text)?)?;
    }
    let summary = format!("{}: {} gates, {} CNOTs", t.name(), c.len(), c.cnot_count());
    Ok((to_qasm(&c), summary))
}

fn run(cmd: &Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Cosets => cmd_cosets(),
        Command::Screen { seed, samples, threshold } => cmd_screen(*seed, *samples, *threshold),
        Command::Maximize {
            coset,
            pair,
            survivors,
            seed,
            restarts,
            max_steps,
        } => cmd_maximize(*coset, pair.as_deref(), *survivors, walk_config(*seed, *restarts, *max_steps)),
        Command::Verify => cmd_verify(),
        Command::Connect {
            from,
            to,
            seed,
            restarts,
            tol,
        } => cmd_connect(from, to, *seed, *restarts, *tol),
        Command::Delta4 { state } => cmd_delta4(state).map(|(_, o)| o),
        Command::OrbitCheck {
            pair,
            runs,
            seed,
            restarts,
            tol,
            dump,
        } => cmd_orbit_check(pair, *runs, *seed, *restarts, *tol, dump.as_deref()),
        Command::Export { .. } => bail!("export writes QASM and has no JSON record"),
        Command::Replay { .. } => bail!("cannot replay a replay"),
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => write_stdout(&format!("{text}\n")),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn write_stdout(text: &str) -> anyhow::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn record(cmd: &Command, outcome: &Outcome, started: u128, out: Option<&Path>) -> anyhow::Result<String> {
    let manifest = Manifest {
        command: cmd.name().to_string(),
        args: cmd.clone(),
        config: outcome.config.clone(),
        versions: Versions {
            core: mhs_core::VERSION.to_string(),
            cli: env!("CARGO_PKG_VERSION").to_string(),
        },
        threads: rayon::current_num_threads(),
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        outputs: out.map(|p| vec![p.display().to_string()]).unwrap_or_default(),
    };
    Ok(serde_json::to_string_pretty(&json!({"manifest": manifest, "result": outcome.result}))?)
}

fn replay(path: &Path, out: Option<&Path>) -> anyhow::Result<bool> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text)?;
    let manifest_value = v.get("manifest").cloned().unwrap_or_else(|| v.clone());
    let manifest: Manifest = serde_json::from_value(manifest_value).context("parsing manifest")?;
    let outcome = run(&manifest.args)?;
    let same = match v.get("result") {
        Some(old) => {
            let same = *old == outcome.result;
            eprintln!("{}: result {}", manifest.command, if same { "reproduced" } else { "DIFFERS" });
            same
        }
        None => {
            eprintln!("{}: no stored result to compare", manifest.command);
            true
        }
    };
    emit(&record(&manifest.args, &outcome, now_ms(), out)?, out)?;
    Ok(same && outcome.failure.is_none())
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HDF_THREADS") {
        let n: usize = v.parse().with_context(|| format!("HDF_THREADS={v} is not a count"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
    }
    Ok(())
}

fn main_inner() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    configure_threads()?;
    let out = cli.out.as_deref();
    let started = now_ms();
    match &cli.command {
        Command::Replay { manifest } => replay(manifest, out),
        Command::Export {
            target,
            graph,
            rotations,
        } => {
            let (qasm, summary) = cmd_export(target, graph.as_deref(), *rotations)?;
            match out {
                Some(p) => fs::write(p, &qasm).with_context(|| format!("writing {}", p.display()))?,
                None => write_stdout(&qasm)?,
            }
            eprintln!("{summary}");
            Ok(true)
        }
        Command::Delta4 { state } => {
            let (line, outcome) = cmd_delta4(state)?;
            write_stdout(&format!("{line}\n"))?;
            if let Some(p) = out {
                fs::write(p, record(&cli.command, &outcome, started, out)?)?;
            }
            Ok(true)
        }
        cmd => {
            let outcome = run(cmd)?;
            emit(&record(cmd, &outcome, started, out)?, out)?;
            eprintln!("{}", outcome.summary);
            if let Some(f) = &outcome.failure {
                eprintln!("error: {f}");
            }
            Ok(outcome.failure.is_none())
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
