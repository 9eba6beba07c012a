mod render;

use std::io::{self, IsTerminal, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use charter_deps_core::delegation::{evaluate_plan, recommend, PlanFile, Policy, RecommendConfig};
use charter_deps_core::export::{export, metrics_csv, to_document, ExportFormat, ExportOptions};
use charter_deps_core::metrics::{metrics_table, Hotspots, Scope};
use charter_deps_core::{dsl, structured, Execution, ParseError, SdModel};
use charter_deps_service::{analysis_document, ServiceConfig, DEFAULT_BODY_LIMIT};

use render::Style;

#[derive(Parser)]
#[command(name = "charter-deps", version, about = "Strategic dependency analysis: vulnerability, criticality and delegation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and report violations.
    Validate { model: PathBuf },
    /// Vulnerability and criticality table.
    Metrics {
        model: PathBuf,
        #[command(flatten)]
        report: Report,
    },
    /// Most vulnerable and most critical actors.
    Rank {
        model: PathBuf,
        #[command(flatten)]
        report: Report,
    },
    /// Replay a plan file against a model.
    Whatif {
        model: PathBuf,
        plan: PathBuf,
        #[command(flatten)]
        report: Report,
        #[command(flatten)]
        policy: PolicyArgs,
        /// Exit with status 1 if any move is infeasible.
        #[arg(long)]
        strict: bool,
    },
    /// Search for rebalancing delegations.
    Recommend {
        model: PathBuf,
        #[command(flatten)]
        report: Report,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value_t = 10)]
        max_moves: usize,
        /// Score candidates on the rayon pool.
        #[arg(long)]
        parallel: bool,
    },
    /// Render a model as DOT, CSV or a structured document.
    Export {
        model: PathBuf,
        #[arg(long, value_enum)]
        format: ExportArg,
        #[arg(long)]
        scope: Option<String>,
        /// One labelled edge per dependency.
        #[arg(long)]
        compact: bool,
        /// Draw SR boundaries.
        #[arg(long)]
        include_sr: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory with the workbench build.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Allowed CORS origin; repeatable, `*` for any.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_BODY_LIMIT)]
        body_limit: usize,
    },
}

#[derive(Args)]
struct Report {
    /// Scope name from the model, or `all`.
    #[arg(long, default_value = "all")]
    scope: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PolicyArgs {
    /// Skip the service-knowledge check.
    #[arg(long)]
    override_knowledge: bool,
    /// Only a unique maximum counts as most vulnerable or critical.
    #[arg(long)]
    strict_argmax: bool,
    /// Apply infeasible moves anyway.
    #[arg(long)]
    keep_infeasible: bool,
}

impl PolicyArgs {
    fn policy(&self) -> Policy {
        Policy {
            override_knowledge: self.override_knowledge,
            strict_argmax: self.strict_argmax,
            skip_infeasible: !self.keep_infeasible,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportArg {
    Dot,
    Csv,
    Structured,
}

/// Failure with its exit status: 1 for domain failures, 2 for usage and
/// parse errors.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, lines: vec![message.into()] }
    }

    fn domain(lines: Vec<String>) -> Self {
        Self { code: 1, lines }
    }
}

fn located(path: &Path, errors: &[ParseError]) -> Vec<String> {
    errors
        .iter()
        .map(|e| match e.span() {
            Some(s) => format!("{}:{}:{}: {}: {}", path.display(), s.line, s.column, e.code, e.message),
            None => format!("{}: {e}", path.display()),
        })
        .collect()
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
        .and_then(|bytes| {
            String::from_utf8(bytes.clone()).map_err(|_| {
                let errors = dsl::parse_bytes(&bytes).err().unwrap_or_default();
                Failure { code: 2, lines: located(path, &errors) }
            })
        })
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// Reads a model. Syntax errors exit 2; a well-formed model that breaks
/// structural rules exits 1.
fn load(path: &Path) -> Result<SdModel, Failure> {
    let text = read(path)?;
    let unvalidated = if is_json(path) { structured::from_json_unvalidated(&text) } else { dsl::parse_unvalidated(&text) };
    let model = unvalidated.map_err(|errors| Failure { code: 2, lines: located(path, &errors) })?;
    let checked = if is_json(path) { structured::check(model) } else { dsl::parse_model(&text) };
    checked.map_err(|errors| Failure::domain(located(path, &errors)))
}

fn scope(model: &SdModel, name: &str) -> Result<Scope, Failure> {
    Scope::named(model, name).map_err(|e| Failure::usage(format!("--scope {name}: {e}")))
}

/// Writes `text` to the file through a temporary sibling, or to stdout.
fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = output else {
        let mut stdout = io::stdout().lock();
        return stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure::usage(e.to_string()));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: io::Error| Failure::usage(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn style() -> Result<Style, Failure> {
    let color = match std::env::var("CHARTER_DEPS_COLOR").as_deref() {
        Err(_) | Ok("auto") => io::stdout().is_terminal(),
        Ok("always") => true,
        Ok("never") => false,
        Ok(other) => return Err(Failure::usage(format!("CHARTER_DEPS_COLOR must be auto, never or always, not `{other}`"))),
    };
    Ok(Style { color })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { model } => {
            let m = load(&model)?;
            println!("OK: {} actors", m.actor_count());
            Ok(())
        }
        Command::Metrics { model, report } => {
            let m = load(&model)?;
            let scope = scope(&m, &report.scope)?;
            let text = match report.format {
                Format::Structured => analysis_document(&m, &scope).map_err(|e| Failure::usage(e.to_string()))?,
                Format::Csv => metrics_csv(&metrics_table(&m, &scope).map_err(|e| Failure::usage(e.to_string()))?),
                Format::Table => {
                    let rows = metrics_table(&m, &scope).map_err(|e| Failure::usage(e.to_string()))?;
                    render::table(&rows, &Hotspots::from_rows(&rows), style()?)
                }
            };
            emit(&text, report.output.as_deref())
        }
        Command::Rank { model, report } => {
            let m = load(&model)?;
            let scope = scope(&m, &report.scope)?;
            let rows = metrics_table(&m, &scope).map_err(|e| Failure::usage(e.to_string()))?;
            let hotspots = Hotspots::from_rows(&rows);
            let text = match report.format {
                Format::Structured => to_document(&hotspots),
                Format::Csv => render::rank_csv(&rows, &hotspots),
                Format::Table => render::rank(&m, &rows, &hotspots, style()?),
            };
            emit(&text, report.output.as_deref())
        }
        Command::Whatif { model, plan, report, policy, strict } => {
            let m = load(&model)?;
            let scope = scope(&m, &report.scope)?;
            let file = PlanFile::from_json(&read(&plan)?).map_err(|e| Failure { code: 2, lines: located(&plan, &[e]) })?;
            let result = evaluate_plan(&m, &scope, &file.moves, &policy.policy())
                .map_err(|e| Failure::domain(vec![format!("{}: {e}", plan.display())]))?;
            let text = match report.format {
                Format::Structured => to_document(&result),
                Format::Csv => metrics_csv(&result.table_after),
                Format::Table => render::plan(&result, style()?),
            };
            emit(&text, report.output.as_deref())?;
            if strict && !result.all_feasible() {
                let lines = result
                    .verdicts
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.feasible)
                    .map(|(i, v)| {
                        let codes: Vec<&str> = v.reasons.iter().map(|r| r.code.as_str()).collect();
                        format!("move {i} ({}) is infeasible: {}", file.moves[i].dependency, codes.join(", "))
                    })
                    .collect();
                return Err(Failure::domain(lines));
            }
            Ok(())
        }
        Command::Recommend { model, report, policy, max_moves, parallel } => {
            let m = load(&model)?;
            let scope = scope(&m, &report.scope)?;
            let execution = if parallel { Execution::Parallel } else { Execution::Sequential };
            let config = RecommendConfig { max_moves, policy: policy.policy(), execution };
            let result = recommend(&m, &scope, &config).map_err(|e| Failure::usage(e.to_string()))?;
            let text = match report.format {
                Format::Structured => to_document(&result),
                Format::Csv => metrics_csv(&result.table_after),
                Format::Table => render::plan(&result, style()?),
            };
            emit(&text, report.output.as_deref())
        }
        Command::Export { model, format, scope: scope_name, compact, include_sr, output } => {
            let m = load(&model)?;
            let format = match format {
                ExportArg::Dot => ExportFormat::Dot,
                ExportArg::Csv => ExportFormat::Csv,
                ExportArg::Structured => ExportFormat::Structured,
            };
            let scope = scope_name.map(|s| scope(&m, &s)).transpose()?;
            let options = ExportOptions { format, include_sr, compact, scope };
            let text = export(&m, &options).map_err(|e| Failure::domain(vec![e.to_string()]))?;
            emit(&text, output.as_deref())
        }
        Command::Serve { port, host, static_dir, cors_origins, body_limit } => {
            let addr = SocketAddr::new(host, port);
            let config = ServiceConfig { body_limit, cors_origins, static_dir };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::usage(e.to_string()))?;
            eprintln!("listening on http://{addr}");
            runtime.block_on(charter_deps_service::serve(addr, config)).map_err(|e| Failure::usage(format!("{addr}: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            for line in failure.lines {
                eprintln!("{line}");
            }
            ExitCode::from(failure.code)
        }
    }
}
