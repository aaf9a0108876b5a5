use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use advice_loop_core::harness::combos;
use advice_loop_core::harness::metrics::{report, write_combo, write_summary};
use advice_loop_core::harness::{run_experiment, Config, Summary};
use advice_loop_core::service::{replay_file, Server, ServerSettings};

#[derive(Parser)]
#[command(name = "advice-loop", version, about = "Interactive reinforcement learning with retained advice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run batch experiments with simulated trainers.
    Run {
        /// TOML or JSON configuration; defaults apply when left out.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named combinations (`all`, `rules`, `driving`, or e.g. `PI-R,UQL`).
        /// Without it the configuration is run as written.
        #[arg(long)]
        combo: Option<String>,
        #[arg(long, env = "ADVICE_LOOP_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads for independent runs.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Rebuild summary.csv from an output directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Serve live advising sessions.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// TCP address for newline-delimited JSON.
        #[arg(long, env = "ADVICE_LOOP_ADDR", default_value = "127.0.0.1:7878")]
        addr: String,
        /// Optional WebSocket address carrying the same messages.
        #[arg(long)]
        ws_addr: Option<String>,
        /// Directory for per-session event logs.
        #[arg(long, default_value = "sessions")]
        log_dir: PathBuf,
    },
    /// Rebuild a session from its event log and print its Q-table as CSV.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        q_out: Option<PathBuf>,
    },
}

fn print_summary(rows: &[Summary]) {
    let a = rows.iter().map(|r| r.agent.len()).chain([5]).max().unwrap_or(5);
    let u = rows.iter().map(|r| r.user.len()).chain([4]).max().unwrap_or(4);
    println!("{:<a$}  {:<u$}  {:>12}  {:>10}", "agent", "user", "interactions", "pct");
    for r in rows {
        println!("{:<a$}  {:<u$}  {:>12.2}  {:>9.4}%", r.agent, r.user, r.interactions, r.interaction_pct);
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            combo,
            seed,
            runs,
            episodes,
            out,
            parallel,
        } => {
            let mut base = match &config {
                Some(path) => Config::load(path)?,
                None => Config::default(),
            };
            if let Some(seed) = seed {
                base.experiment.seed = seed;
            }
            if let Some(runs) = runs {
                base.experiment.runs = runs;
            }
            if let Some(episodes) = episodes {
                base.experiment.episodes = episodes;
            }
            if parallel == 0 {
                bail!("--parallel must be at least 1");
            }
            let jobs: Vec<(String, Config)> = match combo {
                Some(selection) => combos::expand(&selection)
                    .map_err(anyhow::Error::msg)?
                    .into_iter()
                    .map(|name| {
                        let c = combos::apply(&name, &base).map_err(anyhow::Error::msg)?;
                        Ok((name, c))
                    })
                    .collect::<Result<_>>()?,
                None => {
                    let name = format!("{}-{}", base.agent.kind, base.user.label().replace(':', "-"));
                    vec![(name, base.clone())]
                }
            };
            let mut rows = Vec::new();
            for (name, c) in jobs {
                let started = Instant::now();
                let metrics = run_experiment(&c, parallel).with_context(|| format!("running {name}"))?;
                let row = write_combo(&out, &name, &c, &metrics)?;
                eprintln!(
                    "{name}: {} runs x {} episodes in {:.1}s, {:.4}% interaction",
                    c.experiment.runs,
                    c.experiment.episodes,
                    started.elapsed().as_secs_f64(),
                    row.interaction_pct
                );
                rows.push(row);
            }
            let path = write_summary(&out, &rows)?;
            print_summary(&rows);
            eprintln!("wrote {}", path.display());
        }
        Command::Report { input } => {
            let rows = report(&input)?;
            if rows.is_empty() {
                bail!("no experiment directories under {}", input.display());
            }
            write_summary(&input, &rows)?;
            print_summary(&rows);
        }
        Command::Serve {
            config,
            addr,
            ws_addr,
            log_dir,
        } => {
            let base = match &config {
                Some(path) => Config::load(path)?,
                None => Config::default(),
            };
            let server = Server::new(ServerSettings {
                base,
                log_dir: Some(log_dir),
            });
            let (local, tcp) = server.listen_tcp(&addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {local} (newline-delimited JSON)");
            if let Some(ws_addr) = ws_addr {
                let (local, _) = server.listen_ws(&ws_addr).with_context(|| format!("binding {ws_addr}"))?;
                eprintln!("listening on {local} (WebSocket)");
            }
            let _ = tcp.join();
        }
        Command::Replay { log, q_out } => {
            let session = replay_file(&log)?;
            let q = session.agent().q();
            eprintln!(
                "replayed {} steps over {} episodes, {} interactions",
                session.step_index(),
                session.episode(),
                session.interactions()
            );
            match q_out {
                Some(path) => {
                    let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    q.write_csv(file)?;
                }
                None => q.write_csv(std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}
