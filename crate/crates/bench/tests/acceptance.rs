//! Workspace acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails. Every tolerance and runtime
//! limit is pinned below.

#[path = "../../core/tests/support/compiled.rs"]
mod compiled;
#[path = "../../mcp/tests/support/mod.rs"]
mod mcp_transcripts;
#[path = "../../sim/tests/support/oracle.rs"]
mod sim_oracle;
#[path = "../../sim/tests/support/wire.rs"]
mod wire;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cua_agent::{NullPolicy, Policy, ScriptRow, ScriptedPolicy, TaskGoal, TerminatedBy};
use cua_bench::{aggregate, load_results, load_tasks, render, run_suite, run_task, EpisodeResult, Format, RunReport};
use cua_sim::{SceneCatalog, SimServer};
use cua_vmc::{Sandbox, VmClient};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use serde_json::json;

// ---- pinned limits ----
const LIMIT_METRICS: Duration = Duration::from_secs(1);
const LIMIT_BUDGET: Duration = Duration::from_secs(5);
const LIMIT_SUITE: Duration = Duration::from_secs(30);
const LIMIT_ORACLE: Duration = Duration::from_secs(60);
const LIMIT_DETERMINISM: Duration = Duration::from_secs(60);
const LIMIT_PROTOCOL: Duration = Duration::from_secs(5);
const LIMIT_WELL_FORMED: Duration = Duration::from_secs(30);

const BUDGET: u32 = 50;
const MIN_SUITE_TASKS: usize = 12;
const MIN_SUITE_DOMAINS: usize = 4;
const ORACLE_CASES: u32 = 500;
const REPLAY_CASES: u32 = 1_000;
const WELL_FORMED_CASES: u32 = 10_000;
/// Parallel sandboxes for the end-to-end suite.
const SUITE_WORKERS: usize = 4;

// ---- pinned reference breakdown ----
/// Reference per-domain breakdown rows, as rendered (sorted by domain).
const BREAKDOWN_ROWS: [&str; 10] = [
    "Chrome  7/46  28.4",
    "GIMP  4/26  32.7",
    "Libreoffice Calc  0/47  50.0",
    "Libreoffice Impress  7/47  31.5",
    "Libreoffice Writer  2/23  42.1",
    "Multi-app  11/101  38.4",
    "OS  13/24  18.2",
    "Thunderbird  0/15  50.0",
    "VLC  3.11/17  35.8",
    "VSCode  8/23  25.6",
];
const BREAKDOWN_TOTAL: &str = "Total  54.10/369  35.3";
const BREAKDOWN_SUCCESS_RATE: &str = "14.66";
/// The reference rows add up to 55.11, not the reference 54.10 total; the
/// verbatim fixture therefore totals 55.11/369 = 14.93%.
const VERBATIM_TOTAL: &str = "Total  55.11/369  35.3";
const VERBATIM_SUCCESS_RATE: &str = "14.93";

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn text_lines(run: &RunReport) -> Vec<String> {
    render(run, Format::Text).lines().map(str::to_string).collect()
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Runs `cases` generated inputs through `test`; returns how many ran.
fn fuzz<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<usize, String> {
    let ran = AtomicUsize::new(0);
    runner(cases)
        .run(&strategy, |v| {
            ran.fetch_add(1, Ordering::Relaxed);
            test(v)
        })
        .map_err(|e| e.to_string())?;
    let ran = ran.into_inner();
    ensure(ran >= cases as usize, || format!("only {ran} of {cases} cases ran"))?;
    Ok(ran)
}

// 1. Metrics arithmetic
fn metrics() -> Check {
    let mut os: Vec<EpisodeResult> = (0..24)
        .map(|i| EpisodeResult { task_id: format!("os{i}"), domain: "OS".into(), score: f64::from(u8::from(i < 13)), steps_used: 18 })
        .collect();
    os.reverse();
    let row = &text_lines(&aggregate(&os))[1];
    ensure(row.starts_with("OS  13/24  "), || format!("OS row reads {row:?}"))?;

    let fixtures = manifest().join("fixtures");
    let verbatim = aggregate(&load_results(&fixtures.join("breakdown_verbatim.json")).map_err(|e| e.to_string())?);
    let lines = text_lines(&verbatim);
    for want in BREAKDOWN_ROWS {
        ensure(lines.iter().any(|l| l == want), || format!("missing row {want:?}"))?;
    }
    ensure(lines.iter().any(|l| l == VERBATIM_TOTAL), || format!("verbatim total: {lines:?}"))?;
    ensure(format!("{:.2}", verbatim.success_rate) == VERBATIM_SUCCESS_RATE, || format!("verbatim rate {}", verbatim.success_rate))?;

    let reconciled = aggregate(&load_results(&fixtures.join("breakdown_reconciled.json")).map_err(|e| e.to_string())?);
    let lines = text_lines(&reconciled);
    ensure(lines.iter().any(|l| l == BREAKDOWN_TOTAL), || format!("total line missing: {lines:?}"))?;
    ensure(format!("{:.2}", reconciled.success_rate) == BREAKDOWN_SUCCESS_RATE, || format!("rate {}", reconciled.success_rate))?;
    ensure(reconciled.success_rate == 14.66, || "success_rate is not 14.66 at 2 decimals".into())?;

    let back: RunReport = serde_json::from_str(&render(&reconciled, Format::Json)).map_err(|e| e.to_string())?;
    ensure(back == reconciled, || "json report does not round-trip".into())?;
    Ok(format!("rows {}/{}, {BREAKDOWN_TOTAL:?}, success_rate {BREAKDOWN_SUCCESS_RATE}", BREAKDOWN_ROWS.len(), BREAKDOWN_ROWS.len()))
}

struct Fleet {
    servers: Vec<SimServer>,
    clients: Vec<VmClient>,
}

impl Fleet {
    fn start(n: usize) -> Result<Fleet, String> {
        let servers: Vec<_> = (0..n)
            .map(|_| SimServer::start(SceneCatalog::builtin(), "127.0.0.1:0").map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let clients = servers.iter().map(|s| VmClient::new(s.url())).collect();
        Ok(Fleet { servers, clients })
    }

    fn sandboxes(&self) -> Vec<&dyn Sandbox> {
        self.clients.iter().map(|c| c as &dyn Sandbox).collect()
    }
}

// 2. Budget enforcement
fn budget() -> Check {
    let fleet = Fleet::start(1)?;
    let goal = TaskGoal {
        task_id: "never_ends".into(),
        instruction: "Keep waiting.".into(),
        domain: "os".into(),
        scene_id: "two_buttons".into(),
        budget: BUDGET,
    };
    let rows: Vec<ScriptRow> =
        serde_json::from_value(json!(vec![json!({"action": {"action": "wait", "seconds": 0.5}}); 200])).map_err(|e| e.to_string())?;
    let mut policy = ScriptedPolicy::default();
    policy.insert("never_ends", rows);
    let task = cua_bench::TaskSpec {
        goal,
        seed: 0,
        evaluator: serde_json::from_value(json!({"pressed_at_least": {"name": "OK", "count": 1}})).map_err(|e| e.to_string())?,
    };
    let t = run_task(&task, &fleet.clients[0], &mut policy);
    ensure(t.records.len() == BUDGET as usize, || format!("{} records", t.records.len()))?;
    ensure(t.outcome.terminated_by == TerminatedBy::BudgetExhausted, || format!("terminated_by {:?}", t.outcome.terminated_by))?;
    let report = aggregate(&cua_bench::results_of(&[t]));
    ensure(report.domains[0].average_steps == 50.0, || "average_steps is not 50.0".into())?;
    Ok(format!("{BUDGET} records, budget_exhausted"))
}

fn suite_tasks() -> Result<Vec<cua_bench::TaskSpec>, String> {
    load_tasks(&manifest().join("suite/tasks"), &SceneCatalog::builtin()).map_err(|e| e.to_string())
}

fn scripts() -> Result<ScriptedPolicy, String> {
    ScriptedPolicy::load_dir(&manifest().join("suite/scripts")).map_err(|e| e.to_string())
}

// 3. End-to-end scripted suite over HTTP sandboxes
fn suite() -> Check {
    let tasks = suite_tasks()?;
    let domains: std::collections::BTreeSet<_> = tasks.iter().map(|t| t.goal.domain.clone()).collect();
    ensure(tasks.len() >= MIN_SUITE_TASKS, || format!("only {} tasks", tasks.len()))?;
    ensure(domains.len() >= MIN_SUITE_DOMAINS, || format!("only {} domains", domains.len()))?;
    let fleet = Fleet::start(SUITE_WORKERS)?;
    let scripted = scripts()?;
    let make_scripted = move || -> Box<dyn Policy> { Box::new(scripted.clone()) };
    let solved = run_suite(&tasks, &fleet.sandboxes(), &make_scripted, None).map_err(|e| e.to_string())?;
    ensure(solved.report.success_rate == 100.0, || format!("scripted success_rate {}", solved.report.success_rate))?;
    ensure(solved.episode_errors() == 0, || "scripted episodes errored".into())?;

    let make_null = || -> Box<dyn Policy> { Box::new(NullPolicy) };
    let idle = run_suite(&tasks, &fleet.sandboxes(), &make_null, None).map_err(|e| e.to_string())?;
    ensure(idle.report.success_rate == 0.0, || format!("null success_rate {}", idle.report.success_rate))?;
    ensure(idle.report.domains.iter().all(|d| d.average_steps == 50.0), || "null average_steps below 50.0".into())?;
    drop(fleet.servers);
    Ok(format!(
        "{} tasks / {} domains: scripted {:.2}, null {:.2}",
        tasks.len(),
        domains.len(),
        solved.report.success_rate,
        idle.report.success_rate
    ))
}

// 4. Compiler–simulator oracle equivalence
fn oracle() -> Check {
    let ran = fuzz(ORACLE_CASES, sim_oracle::oracle_case(), |c| sim_oracle::check_postcondition(&c))?;
    Ok(format!("{ran} fuzzed actions over generated scenes"))
}

// 5. Determinism
fn determinism() -> Check {
    let ran = fuzz(REPLAY_CASES, sim_oracle::replay_case(), |c| sim_oracle::check_replay_determinism(&c))?;
    let tasks = suite_tasks()?;
    let logs = |dir: &Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let sandboxes: Vec<_> = (0..SUITE_WORKERS)
            .map(|_| cua_vmc::LocalSandbox::new(Arc::new(cua_sim::Desktop::new(SceneCatalog::builtin()).unwrap())))
            .collect();
        let refs: Vec<&dyn Sandbox> = sandboxes.iter().map(|s| s as &dyn Sandbox).collect();
        let scripted = scripts()?;
        let make = move || -> Box<dyn Policy> { Box::new(scripted.clone()) };
        run_suite(&tasks, &refs, &make, Some(dir)).map_err(|e| e.to_string())?;
        let mut out = Vec::new();
        for t in &tasks {
            let name = format!("{}.jsonl", t.goal.task_id);
            out.push((name.clone(), std::fs::read(dir.join(&name)).map_err(|e| e.to_string())?));
        }
        Ok(out)
    };
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let (first, second) = (logs(a.path())?, logs(b.path())?);
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        ensure(x == y, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{ran} replays; {} trajectory logs byte-identical", first.len()))
}

// 6. Protocol conformance
fn protocol() -> Check {
    let golden = manifest().join("../mcp/tests/golden");
    let mut codes = Vec::new();
    for name in ["handshake.txt", "errors.txt", "tools_list.txt"] {
        let (produced, expected) = mcp_transcripts::replay_transcript(&golden.join(name));
        ensure(produced == expected, || format!("MCP transcript {name} differs"))?;
        codes.extend(expected.iter().filter_map(|l| l.split("\"code\":").nth(1)).map(|c| c[..6].to_string()));
    }
    for code in ["-32700", "-32600", "-32601", "-32002"] {
        ensure(codes.iter().any(|c| c == code), || format!("no {code} error path in the transcripts"))?;
    }
    let (produced, expected) = wire::replay_transcript(&manifest().join("../sim/tests/golden/atomic_reject.txt"));
    ensure(produced == expected, || "wire transcript differs".into())?;
    let trees = wire::prefix_trees(&produced);
    ensure(trees.len() == 2 && trees[0] == trees[1], || "rejected batch does not equal its prefix replay".into())?;
    Ok("3 MCP transcripts + atomic-rejection wire transcript byte-exact".into())
}

// 7. Compiled-sequence well-formedness
fn well_formed() -> Check {
    let ran = fuzz(WELL_FORMED_CASES, compiled::action(), |a| compiled::check_well_formed(&a))?;
    Ok(format!("{ran} fuzzed actions"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check, Duration);
    let criteria: [Criterion; 7] = [
        ("metrics arithmetic", metrics, LIMIT_METRICS),
        ("budget enforcement", budget, LIMIT_BUDGET),
        ("end-to-end scripted suite", suite, LIMIT_SUITE),
        ("compiler-simulator oracle equivalence", oracle, LIMIT_ORACLE),
        ("determinism", determinism, LIMIT_DETERMINISM),
        ("protocol conformance", protocol, LIMIT_PROTOCOL),
        ("compiled-sequence well-formedness", well_formed, LIMIT_WELL_FORMED),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let verdict = match result {
            Ok(detail) if took < limit => format!("PASS  {detail}"),
            Ok(detail) => format!("FAIL  {detail}; took {took:.2?}, limit {limit:?}"),
            Err(why) => format!("FAIL  {why}"),
        };
        if verdict.starts_with("FAIL") {
            failed += 1;
        }
        println!("criterion {}: {name} [{:.2}s < {}s] {verdict}", i + 1, took.as_secs_f64(), limit.as_secs());
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
