use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Args;
use engage_service::ServeConfig;
use serde_json::json;

use crate::error::CliError;
use crate::{Ctx, Outcome};

#[derive(Args)]
pub struct ServeArgs {
    /// Address to listen on; port 0 picks a free port.
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory holding the event log and snapshots [default: paths.store_dir].
    #[arg(long)]
    store: Option<PathBuf>,
    /// Shared token expected in the `x-engage-token` header.
    #[arg(long, env = "ENGAGE_TOKEN", hide_env_values = true)]
    token: Option<String>,
    /// Static coder UI bundle, served under /ui.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 15)]
    lease_minutes: u64,
    /// Events between snapshots; 0 disables snapshots.
    #[arg(long, default_value_t = 100)]
    snapshot_every: u64,
}

/// Serves until interrupted. The bound address is printed on stdout as soon
/// as the socket is open.
pub fn serve(ctx: &Ctx, args: ServeArgs) -> Result<Outcome, CliError> {
    if args.lease_minutes == 0 {
        return Err(CliError::Usage("--lease-minutes must be positive".into()));
    }
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .with_max_level(tracing_subscriber::filter::LevelFilter::INFO)
        .try_init();
    let store = ctx.path(args.store.as_deref(), &ctx.config.paths.store_dir);
    let mut config = ServeConfig::new(store, args.addr);
    config.lease_ms = args.lease_minutes * 60_000;
    config.snapshot_every = args.snapshot_every;
    config.token = args.token;
    config.ui_dir = args.ui_dir.map(|p| ctx.path(Some(&p), &p));

    let json_output = ctx.json_output();
    let hash = ctx.hash.clone();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::module("service", e))?;
    let mut bound = None;
    runtime
        .block_on(engage_service::serve(config, |addr| {
            bound = Some(addr);
            let mut out = std::io::stdout().lock();
            let _ = if json_output {
                writeln!(out, "{}", json!({ "listening": format!("http://{addr}"), "config_hash": hash }))
            } else {
                writeln!(out, "listening on http://{addr}")
            };
            let _ = out.flush();
        }))
        .map_err(|e| CliError::module("service", e))?;
    Ok(Outcome {
        text: "stopped\n".into(),
        json: json!({ "command": "serve", "stopped": true, "addr": bound.map(|a| a.to_string()) }),
    })
}
