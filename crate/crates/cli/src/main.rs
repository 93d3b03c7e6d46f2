//! `outcomes`: operator command line.
//!
//! Exit codes: 0 success, 2 invalid input or rejected operation, 3 I/O or
//! storage failure. Offline commands act as the operator, who holds
//! department-head authority.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use outcomes_core::demo::{seed_demo, DEMO_SEED};
use outcomes_core::report::{export_report, ReportFormat};
use outcomes_core::{to_canonical_json, Actor, DomainError, ErrorKind, Service, Settings, Store};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "outcomes",
    version,
    about = "Gradebook and outcome-attainment analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataDir {
    /// Store directory.
    #[arg(long, env = "OUTCOMES_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        /// Settings document (JSON).
        #[arg(long)]
        config: PathBuf,
    },
    /// Create a store and a settings document pointing at it.
    Init {
        #[arg(long)]
        data_dir: PathBuf,
        /// Also create a department-head account with this display name.
        #[arg(long, requires = "admin_password")]
        admin_name: Option<String>,
        #[arg(long, env = "OUTCOMES_ADMIN_PASSWORD", hide_env_values = true)]
        admin_password: Option<String>,
    },
    /// Import a CSV file into a class.
    Import {
        #[command(subcommand)]
        what: ImportKind,
    },
    /// Write an analytics report.
    Export {
        #[command(subcommand)]
        what: ExportKind,
    },
    /// Load the deterministic demo cohort into an empty store.
    SeedDemo {
        #[command(flatten)]
        store: DataDir,
        #[arg(long, default_value_t = DEMO_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ImportKind {
    /// `student_id,last_name,first_name,email`
    Roster(ImportArgs),
    /// `student_id,item_id,raw_score`
    Scores(ImportArgs),
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    store: DataDir,
    #[arg(long = "class")]
    class_id: String,
    #[arg(long)]
    file: PathBuf,
}

#[derive(Subcommand)]
enum ExportKind {
    Analytics {
        #[command(flatten)]
        store: DataDir,
        /// `all`, `class:<id>`, `term:<t>` or `terms:<from>..<to>`.
        #[arg(long, default_value = "all")]
        scope: String,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Domain(DomainError),
    Io(String),
}

impl From<DomainError> for Failure {
    fn from(e: DomainError) -> Self {
        Failure::Domain(e)
    }
}

impl From<outcomes_core::StoreError> for Failure {
    fn from(e: outcomes_core::StoreError) -> Self {
        Failure::Domain(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Domain(e) if e.kind() != ErrorKind::Io => 2,
            _ => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Domain(e) => write!(f, "{} ({})", e, e.code()),
            Failure::Io(m) => f.write_str(m),
        }
    }
}

fn print<T: Serialize>(v: &T) -> Result<(), Failure> {
    println!("{}", to_canonical_json(v)?);
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn open(dir: &Path) -> Result<Service, Failure> {
    Ok(Service::new(Store::open(dir)?))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let op = Actor::operator();
    match cli.command {
        Command::Serve { config } => serve(&config),
        Command::Init {
            data_dir,
            admin_name,
            admin_password,
        } => {
            std::fs::create_dir_all(&data_dir)
                .map_err(|e| Failure::Io(format!("{}: {e}", data_dir.display())))?;
            let abs = data_dir
                .canonicalize()
                .map_err(|e| Failure::Io(format!("{}: {e}", data_dir.display())))?;
            let settings = Settings {
                data_dir: abs.display().to_string(),
                ..Settings::default()
            };
            let store = Store::open_with(&abs, settings.clone())?;
            store.checkpoint()?;
            let config = abs.join("settings.json");
            if !config.exists() {
                std::fs::write(&config, settings.to_json_pretty())
                    .map_err(|e| Failure::Io(format!("{}: {e}", config.display())))?;
            }
            let svc = Service::new(store);
            let admin = match (admin_name, admin_password) {
                (Some(name), Some(pw)) => Some(svc.bootstrap_admin(&name, &pw)?),
                _ => None,
            };
            print(&serde_json::json!({
                "data_dir": abs,
                "config": config,
                "admin": admin,
            }))
        }
        Command::Import { what } => {
            let (args, roster) = match what {
                ImportKind::Roster(a) => (a, true),
                ImportKind::Scores(a) => (a, false),
            };
            let bytes = read_file(&args.file)?;
            let svc = open(&args.store.data_dir)?;
            let class = args.class_id.as_str().into();
            if roster {
                print(&svc.import_roster(&op, &class, &bytes)?)
            } else {
                print(&svc.import_scores(&op, &class, &bytes)?)
            }
        }
        Command::Export {
            what:
                ExportKind::Analytics {
                    store,
                    scope,
                    format,
                    out,
                },
        } => {
            let format: ReportFormat = format.parse()?;
            let scope = scope.parse()?;
            let svc = open(&store.data_dir)?;
            let report = svc.analytics_report(&op, &scope, None)?;
            let bytes = export_report(&report, format, &out)?;
            print(&serde_json::json!({
                "out": out,
                "format": format,
                "bytes": bytes,
                "commit_id": report.commit_id,
            }))
        }
        Command::SeedDemo { store, seed } => {
            let svc = open(&store.data_dir)?;
            let summary = seed_demo(
                svc.store(),
                seed,
                outcomes_core::credential::DEFAULT_ITERATIONS,
            )?;
            print(&summary)
        }
    }
}

fn serve(config: &Path) -> Result<(), Failure> {
    let settings = Settings::load(config)?;
    let addr = settings.listen_address.parse().map_err(|_| {
        DomainError::Validation(format!("bad listen_address `{}`", settings.listen_address))
    })?;
    // a relative data_dir is taken relative to the settings document
    let base = config.parent().unwrap_or(Path::new("."));
    let dir = base.join(&settings.data_dir);
    let store = Store::open_with(&dir, settings)?;
    let svc = Arc::new(Service::new(store));
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    rt.block_on(outcomes_api::serve(svc, addr, async {
        let _ = tokio::signal::ctrl_c().await;
    }))
    .map_err(|e| Failure::Io(format!("serve on {addr}: {e}")))
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
