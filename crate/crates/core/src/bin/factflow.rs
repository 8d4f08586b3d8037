use clap::{Parser, Subcommand};
use factflow::agent::transport::{from_mode, TransportMode};
use factflow::anonymize::{anonymize_rows, build_map};
use factflow::ingest::ClassOverrides;
use factflow::represent::{build_representation, csv_line, DEFAULT_BUDGET_TOKENS};
use factflow::sheet::server::{serve, AppState};
use factflow::sheet::{
    add_fact_nl, export, generate_sheet, EditOp, ExportFormat, FactSheet, GenerateOptions, Workspace,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use uuid::Uuid;

#[derive(Parser)]
#[command(name = "factflow", version, about = "Fact sheets from tabular data")]
struct Cli {
    /// Seed for anonymization and example-row sampling; the bundled
    /// replay fixtures were recorded with 7.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Directory holding datasets, sheets, chart blocks and run logs.
    #[arg(long, global = true, default_value = ".factflow")]
    workspace: PathBuf,
    #[arg(long, global = true, default_value = "replay")]
    transport: TransportMode,
    /// Replay fixture directory (read in replay mode, written in record mode).
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    /// Token budget for the dataset representation.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET_TOKENS)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and classify a CSV file and store it in the workspace.
    Ingest {
        csv: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// JSON object mapping column names to nominal|ordinal|discrete|continuous.
        #[arg(long)]
        overrides: Option<PathBuf>,
    },
    /// Print the representation text sent to the workers.
    Represent {
        /// Stored dataset id, or carsales / movies.
        dataset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print anonymized rows as CSV; optionally write the audit map locally.
    Anonymize {
        dataset: String,
        /// Number of leading rows to print (all when omitted).
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Run the worker chain and save a new sheet.
    Generate {
        dataset: String,
        #[arg(long)]
        request: Option<String>,
        /// Print the full sheet JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Apply edit operations or add a fact from a request.
    Edit {
        sheet_id: Uuid,
        /// JSON array of edit operations ("-" reads stdin).
        #[arg(long)]
        ops: Option<PathBuf>,
        /// Revision the operations were written against.
        #[arg(long)]
        revision: Option<u64>,
        #[arg(long)]
        add_fact: Option<String>,
    },
    /// Write a sheet as SVG or PDF.
    Export {
        sheet_id: Uuid,
        #[arg(long, default_value = "svg")]
        format: ExportFormat,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
    },
}

/// `println!` that hands back the write error instead of panicking, so a
/// closed pipe ends the command quietly.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        writeln!(std::io::stdout(), $($arg)*)?
    }};
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn write_out(out: Option<&PathBuf>, bytes: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    match out {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}

fn summary(sheet: &FactSheet) -> std::io::Result<()> {
    out!("sheet {} (revision {})", sheet.id, sheet.revision);
    out!("{}", sheet.structure.title);
    for s in &sheet.structure.sections {
        out!("  [{}] {} ({} fact(s))", s.id, s.topic, s.fact_ids.len());
        for id in &s.fact_ids {
            if let Some(card) = sheet.facts.get(id) {
                out!("    {id} {:?}: {}", card.chart.chart_type, card.statement);
            }
        }
    }
    for f in &sheet.failures {
        out!("  dropped {} at {}: {}", f.fact_id, f.stage, f.error);
    }
    Ok(())
}

fn run(cli: Cli) -> AnyResult<()> {
    let ws = Workspace::open(&cli.workspace)?;
    let fixtures = cli
        .fixtures
        .clone()
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay"));
    let opts = GenerateOptions {
        seed: cli.seed,
        budget: cli.budget,
        ..Default::default()
    };
    match cli.command {
        Command::Ingest { csv, name, overrides } => {
            let bytes = std::fs::read(&csv)?;
            let overrides: Option<ClassOverrides> = match overrides {
                Some(p) => Some(serde_json::from_slice(&std::fs::read(p)?)?),
                None => None,
            };
            let name = name.unwrap_or_else(|| {
                csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
            });
            let stored = ws.ingest_csv(&bytes, &name, overrides.as_ref())?;
            let out = serde_json::json!({"dataset_id": stored.id, "schema": stored.dataset.schema()});
            out!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Represent { dataset, out } => {
            let ds = ws.load_dataset(&dataset)?;
            let map = build_map(&ds, cli.seed)?;
            let rep = build_representation(&ds, &map, cli.budget, cli.seed)?;
            write_out(out.as_ref(), format!("{}\n", rep.text).as_bytes())?;
        }
        Command::Anonymize { dataset, rows, map_out } => {
            let ds = ws.load_dataset(&dataset)?;
            let map = build_map(&ds, cli.seed)?;
            let n = rows.unwrap_or(ds.row_count).min(ds.row_count);
            let indices: Vec<usize> = (0..n).collect();
            let mut text = csv_line(ds.columns.iter().map(|c| Some(c.name.as_str())));
            for row in anonymize_rows(&ds, &map, &indices)? {
                text.push('\n');
                text.push_str(&csv_line(row.iter().map(|c| c.as_deref())));
            }
            out!("{text}");
            if let Some(p) = map_out {
                std::fs::write(p, map.to_json())?;
            }
        }
        Command::Generate { dataset, request, json } => {
            let transport = from_mode(cli.transport, &fixtures)?;
            let progress = |stage| eprintln!("stage: {}", serde_json::to_string(&stage).unwrap_or_default());
            let sheet = generate_sheet(&ws, &dataset, request.as_deref(), &opts, transport.as_ref(), &progress)?;
            if json {
                out!("{}", serde_json::to_string_pretty(&sheet)?);
            } else {
                summary(&sheet)?;
            }
        }
        Command::Edit {
            sheet_id,
            ops,
            revision,
            add_fact,
        } => {
            if ops.is_none() && add_fact.is_none() {
                return Err("edit needs --ops or --add-fact".into());
            }
            let mut sheet = None;
            if let Some(p) = ops {
                let raw = if p.as_os_str() == "-" {
                    std::io::read_to_string(std::io::stdin())?
                } else {
                    std::fs::read_to_string(p)?
                };
                let ops: Vec<EditOp> = serde_json::from_str(&raw)?;
                sheet = Some(ws.apply_edit(sheet_id, revision, &ops)?);
            }
            if let Some(request) = add_fact {
                let transport = from_mode(cli.transport, &fixtures)?;
                sheet = Some(add_fact_nl(&ws, sheet_id, &request, transport.as_ref())?);
            }
            summary(&sheet.expect("one branch ran"))?;
        }
        Command::Export { sheet_id, format, out } => {
            let bytes = export(&ws.load_sheet(sheet_id)?, format)?;
            write_out(out.as_ref(), &bytes)?;
        }
        Command::Serve { addr } => {
            let transport = from_mode(cli.transport, &fixtures)?;
            let state = AppState::new(Arc::new(ws), Arc::from(transport), opts);
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            rt.block_on(serve(addr, state))?;
        }
    }
    Ok(())
}
