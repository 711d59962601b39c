//! The `litecua` command line.
//!
//! Exit codes: 0 success, 1 usage or setup error, 2 the suite finished but
//! some episodes errored (or a replay diverged).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use cua_agent::{LlmPolicy, NullPolicy, Policy, ScriptedPolicy, Trajectory};
use cua_mcp::{serve_stdio, HttpTransport, McpServer};
use cua_sim::{Desktop, SceneCatalog, SimServer};
use cua_vmc::{LocalSandbox, Sandbox, VmClient};

use crate::report::{load_results, render, Format};
use crate::suite::{replay, run_suite};
use crate::task::load_tasks;
use crate::{aggregate, BenchError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_EPISODE_ERRORS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "litecua", version, about = "Contextualized desktop sandbox, MCP server and LiteCUA benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransportArg {
    Stdio,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Scripted,
    Null,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the desktop simulator behind the sandbox controller HTTP API.
    Serve {
        /// Scene directory; the built-in scenes when omitted.
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8400")]
        bind: String,
    },
    /// Run the MCP server against a sandbox.
    Mcp {
        #[arg(long, value_enum, default_value = "stdio")]
        transport: TransportArg,
        #[arg(long, default_value = "127.0.0.1:8401")]
        bind: String,
        /// Sandbox controller URL; an in-process simulator when omitted.
        #[arg(long)]
        vm: Option<String>,
        #[arg(long)]
        scenes: Option<PathBuf>,
    },
    /// Run a task suite and print its report.
    Run {
        #[arg(long)]
        tasks: PathBuf,
        /// Sandbox controller URL, once per parallel worker; in-process
        /// simulators when omitted.
        #[arg(long)]
        vm: Vec<String>,
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "scripted")]
        policy: PolicyArg,
        #[arg(long)]
        scripts: Option<PathBuf>,
        /// Overrides every task's budget.
        #[arg(long)]
        budget: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Re-aggregate stored results: a directory of trajectory logs or a
    /// JSON results file.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Replay a trajectory and check it reaches the logged final state.
    Replay {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        vm: Option<String>,
        #[arg(long)]
        scenes: Option<PathBuf>,
        /// Task directory, to re-score the replayed state.
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(cli.command, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("litecua: {e}");
            EXIT_USAGE
        }
    }
}

fn catalog(scenes: Option<&Path>) -> Result<SceneCatalog, BenchError> {
    match scenes {
        Some(dir) => SceneCatalog::load_dir(dir).map_err(|e| BenchError::Usage(e.to_string())),
        None => Ok(SceneCatalog::builtin()),
    }
}

fn local_sandbox(catalog: SceneCatalog) -> Result<LocalSandbox, BenchError> {
    let desktop = Desktop::new(catalog).map_err(|e| BenchError::Usage(e.to_string()))?;
    Ok(LocalSandbox::new(Arc::new(desktop)))
}

fn sandbox(vm: Option<&str>, scenes: Option<&Path>) -> Result<Box<dyn Sandbox>, BenchError> {
    Ok(match vm {
        Some(url) => Box::new(VmClient::new(url)),
        None => Box::new(local_sandbox(catalog(scenes)?)?),
    })
}

/// Runs one command, writing its report to `out`; returns the exit code.
pub fn execute(command: Command, out: &mut dyn Write) -> Result<i32, BenchError> {
    let io = |e: std::io::Error| BenchError::Io(e.to_string());
    match command {
        Command::Serve { scenes, bind } => {
            let server = SimServer::start(catalog(scenes.as_deref())?, &bind).map_err(|e| BenchError::Usage(e.to_string()))?;
            eprintln!("litecua: sandbox listening on {}", server.url());
            server.join();
            Ok(EXIT_OK)
        }
        Command::Mcp { transport, bind, vm, scenes } => {
            let mut server = McpServer::new(sandbox(vm.as_deref(), scenes.as_deref())?);
            match transport {
                TransportArg::Stdio => {
                    let stdin = std::io::stdin().lock();
                    serve_stdio(&mut server, stdin, std::io::stdout().lock()).map_err(io)?;
                }
                TransportArg::Http => {
                    let http = HttpTransport::start(server, &bind).map_err(io)?;
                    eprintln!("litecua: MCP listening on {}", http.url());
                    http.join();
                }
            }
            Ok(EXIT_OK)
        }
        Command::Run { tasks, vm, scenes, policy, scripts, budget, out: out_dir, parallel, format } => {
            if parallel == 0 {
                return Err(BenchError::Usage("--parallel must be at least 1".into()));
            }
            if !vm.is_empty() && vm.len() < parallel {
                return Err(BenchError::Usage(format!(
                    "--parallel {parallel} needs one --vm per worker, got {}",
                    vm.len()
                )));
            }
            if budget == Some(0) {
                return Err(BenchError::Usage("--budget must be positive".into()));
            }
            let catalog = catalog(scenes.as_deref())?;
            let mut specs = load_tasks(&tasks, &catalog)?;
            if let Some(b) = budget {
                specs.iter_mut().for_each(|t| t.goal.budget = b);
            }

            let owned: Vec<Box<dyn Sandbox>> = if vm.is_empty() {
                (0..parallel)
                    .map(|_| local_sandbox(catalog.clone()).map(|s| Box::new(s) as Box<dyn Sandbox>))
                    .collect::<Result<_, _>>()?
            } else {
                vm.iter().take(parallel).map(|u| Box::new(VmClient::new(u.as_str())) as Box<dyn Sandbox>).collect()
            };
            let sandboxes: Vec<&dyn Sandbox> = owned.iter().map(|b| b.as_ref()).collect();

            let scripted = match (policy, &scripts) {
                (PolicyArg::Scripted, Some(dir)) => {
                    Some(ScriptedPolicy::load_dir(dir).map_err(|e| BenchError::Usage(e.to_string()))?)
                }
                (PolicyArg::Scripted, None) => return Err(BenchError::Usage("--policy scripted needs --scripts".into())),
                _ => None,
            };
            if policy == PolicyArg::Llm {
                LlmPolicy::from_env().map_err(|e| BenchError::Usage(e.to_string()))?;
            }
            let make_policy = move || -> Box<dyn Policy> {
                match policy {
                    PolicyArg::Scripted => Box::new(scripted.clone().expect("scripts loaded")),
                    PolicyArg::Null => Box::new(NullPolicy),
                    PolicyArg::Llm => Box::new(LlmPolicy::from_env().expect("checked above")),
                }
            };
            let run = run_suite(&specs, &sandboxes, &make_policy, out_dir.as_deref())?;
            let text = render(&run.report, format.into());
            if let Some(dir) = &out_dir {
                let name = if format == FormatArg::Json { "report.json" } else { "report.txt" };
                std::fs::write(dir.join(name), &text).map_err(io)?;
            }
            out.write_all(text.as_bytes()).map_err(io)?;
            let errors = run.episode_errors();
            if errors > 0 {
                eprintln!("litecua: {errors} episode(s) ended in error");
                return Ok(EXIT_EPISODE_ERRORS);
            }
            Ok(EXIT_OK)
        }
        Command::Report { input, format } => {
            let results = load_results(&input)?;
            out.write_all(render(&aggregate(&results), format.into()).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Replay { trajectory, vm, scenes, tasks } => {
            let text = std::fs::read_to_string(&trajectory).map_err(|e| BenchError::Usage(format!("{}: {e}", trajectory.display())))?;
            let traj = Trajectory::from_jsonl(&text).map_err(|e| BenchError::Usage(e.to_string()))?;
            let task = match &tasks {
                Some(dir) => {
                    let specs = load_tasks(dir, &catalog(scenes.as_deref())?)?;
                    let found = specs.into_iter().find(|t| t.goal.task_id == traj.task_id);
                    Some(found.ok_or_else(|| BenchError::Usage(format!("no task '{}' in {}", traj.task_id, dir.display())))?)
                }
                None => None,
            };
            let sb = sandbox(vm.as_deref(), scenes.as_deref())?;
            let r = replay(&traj, sb.as_ref(), task.as_ref())?;
            writeln!(out, "final_state_hash {}", r.final_state_hash).map_err(io)?;
            let mut diverged = r.hash_matches == Some(false);
            if let (Some(score), Some(logged)) = (r.score, traj.outcome.score) {
                writeln!(out, "score {score} (logged {logged})").map_err(io)?;
                diverged |= score != logged;
            }
            writeln!(out, "{}", if diverged { "diverged" } else { "reproduced" }).map_err(io)?;
            Ok(if diverged { EXIT_EPISODE_ERRORS } else { EXIT_OK })
        }
    }
}
