//! Serves the HTTP API over a scratch workspace with recorded replies, so
//! the editor can be tried without a model key.
//!
//! cargo run --example serve -- 127.0.0.1:8080
//! curl -X POST localhost:8080/sheets -H 'content-type: application/json' -d '{"dataset_id":"carsales"}'

use factflow::agent::ReplayTransport;
use factflow::sheet::server::{serve, AppState};
use factflow::sheet::{GenerateOptions, Workspace};
use std::path::Path;
use std::sync::Arc;

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let addr = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:8080".into());
    let dir = tempfile::tempdir()?;
    let ws = Arc::new(Workspace::open(dir.path()).map_err(std::io::Error::other)?);
    let transport = Arc::new(ReplayTransport::new(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay")));
    let opts = GenerateOptions { seed: 7, ..Default::default() };
    eprintln!("listening on http://{addr} (workspace {})", dir.path().display());
    serve(addr.parse().expect("host:port"), AppState::new(ws, transport, opts)).await
}
