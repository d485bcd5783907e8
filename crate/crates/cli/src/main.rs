use std::net::{SocketAddr, SocketAddrV4};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gcs_cli::client::Client;
use gcs_cli::service::{serve, ServiceConfig};
use gcs_core::imaging::{apply_pipeline, EnhancementOp};
use gcs_core::mission::{MissionOptions, MissionStatus};
use gcs_core::sim::{serve_endpoint, NoiseSpec, SceneKind, SimConfig, SimScene};
use gcs_core::store::{load_image, save_image};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "gcs", version, about = "Drone ground control station")]
struct Cli {
    /// Base URL of a running `gcs serve`.
    #[arg(long, global = true, env = "GCS_SERVER", default_value = "http://127.0.0.1:8080")]
    server: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the HTTP/WebSocket service.
    Serve(ServeArgs),
    /// Run a standalone simulated drone.
    Sim(SimArgs),
    /// Open the drone session.
    Connect {
        #[arg(long)]
        retries: Option<u32>,
    },
    /// Send one raw command, e.g. `gcs command "forward 100"`.
    Command { text: String },
    #[command(subcommand)]
    Mission(MissionCmd),
    /// Snapshot the live frame.
    Snap,
    /// List stored snapshots.
    List,
    /// Fetch a snapshot's PPM.
    Fetch {
        #[arg(long)]
        id: String,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Run an enhancement pipeline on a stored snapshot.
    Process {
        #[arg(long)]
        id: String,
        /// JSON file holding the pipeline array.
        #[arg(long)]
        pipeline: PathBuf,
    },
    /// Run a pipeline on a local PPM file, no service needed.
    Enhance {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        pipeline: PathBuf,
    },
    /// Print service state.
    State,
}

#[derive(Subcommand)]
enum MissionCmd {
    /// Fly the square survey.
    Square {
        #[arg(long, default_value_t = 100)]
        side: u32,
    },
    /// Fly a text mission script.
    Script { file: PathBuf },
}

#[derive(Args)]
struct ServeArgs {
    /// Fly an embedded simulator instead of a real drone.
    #[arg(long)]
    sim: bool,
    #[arg(long, default_value = "127.0.0.1:8080")]
    http: SocketAddr,
    #[arg(long, env = "GCS_DATA_DIR", default_value = "./data")]
    data_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    fps: u32,
    #[arg(long, default_value = "192.168.10.1:8889")]
    drone: SocketAddrV4,
    #[arg(long, default_value = "0.0.0.0:9000")]
    local: SocketAddrV4,
    #[arg(long, default_value = "0.0.0.0:11111")]
    frame_bind: SocketAddrV4,
    #[arg(long, default_value_t = 7000)]
    reply_timeout_ms: u64,
    #[arg(long, default_value_t = 3)]
    retries: u32,
    /// Pause after each motion during missions.
    #[arg(long, default_value_t = 500)]
    settle_ms: u64,
    #[command(flatten)]
    world: WorldArgs,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value = "127.0.0.1:8889")]
    bind: SocketAddrV4,
    #[arg(long, default_value_t = 5)]
    fps: u32,
    /// Frame destination; defaults to the `streamon` sender on port 11111.
    #[arg(long)]
    frame_dest: Option<SocketAddr>,
    #[command(flatten)]
    world: WorldArgs,
}

#[derive(Args)]
struct WorldArgs {
    /// Scene JSON, e.g. '{"kind":"step_edge","column":64,"left":0,"right":255}'.
    #[arg(long)]
    scene: Option<String>,
    #[arg(long, default_value_t = 128)]
    frame_width: usize,
    #[arg(long, default_value_t = 128)]
    frame_height: usize,
    /// Noise JSON, e.g. '{"kind":"salt_pepper","p":0.05,"seed":1}'.
    #[arg(long)]
    noise: Option<String>,
}

impl WorldArgs {
    fn apply(&self, cfg: &mut SimConfig) -> anyhow::Result<()> {
        if let Some(s) = &self.scene {
            cfg.scene.kind = serde_json::from_str::<SceneKind>(s).context("parsing --scene")?;
        }
        cfg.scene = SimScene {
            width: self.frame_width,
            height: self.frame_height,
            ..cfg.scene
        };
        if let Some(n) = &self.noise {
            cfg.noise = serde_json::from_str::<NoiseSpec>(n).context("parsing --noise")?;
        }
        Ok(())
    }
}

fn read_pipeline(path: &PathBuf) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).context("pipeline is not JSON")?;
    if !v.is_array() {
        bail!("pipeline must be a JSON array of steps");
    }
    Ok(v)
}

fn print(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run_serve(a: ServeArgs) -> anyhow::Result<()> {
    let mut cfg = ServiceConfig {
        drone_addr: a.drone,
        local_bind: a.local,
        sim_mode: a.sim,
        http_bind: a.http,
        data_dir: a.data_dir,
        fps: a.fps,
        reply_timeout: Duration::from_millis(a.reply_timeout_ms),
        connect_retries: a.retries,
        frame_bind: a.frame_bind,
        mission: MissionOptions {
            settle: Duration::from_millis(a.settle_ms),
            ..MissionOptions::default()
        },
        ..ServiceConfig::default()
    };
    a.world.apply(&mut cfg.sim)?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(serve(cfg, async {
        let _ = tokio::signal::ctrl_c().await;
    }))
}

fn run_sim(a: SimArgs) -> anyhow::Result<()> {
    let mut cfg = SimConfig {
        bind: a.bind,
        fps: a.fps,
        frame_dest: a.frame_dest,
        ..SimConfig::default()
    };
    a.world.apply(&mut cfg)?;
    let sim = serve_endpoint(cfg)?;
    eprintln!("simulated drone on {} (Ctrl-C to stop)", sim.local_addr());
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    rt.block_on(async {
        let _ = tokio::signal::ctrl_c().await;
    });
    print(&sim.stop())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let client = || Client::new(cli.server.clone());
    match cli.cmd {
        Cmd::Serve(a) => run_serve(a),
        Cmd::Sim(a) => run_sim(a),
        Cmd::Connect { retries } => print(&client()?.connect(retries)?),
        Cmd::Command { ref text } => print(&client()?.command(text)?),
        Cmd::Mission(ref m) => {
            let report = match m {
                MissionCmd::Square { side } => client()?.square(*side)?,
                MissionCmd::Script { file } => {
                    let text = std::fs::read_to_string(file)?;
                    let name = file.file_stem().and_then(|s| s.to_str()).unwrap_or("script");
                    client()?.script(name, &text)?
                }
            };
            print(&report)?;
            if let MissionStatus::Aborted(reason) = report.status {
                bail!("mission aborted: {reason}");
            }
            Ok(())
        }
        Cmd::Snap => print(&client()?.snap()?),
        Cmd::List => print(&client()?.snapshots()?),
        Cmd::Fetch { ref id, ref output } => {
            std::fs::write(output, client()?.snapshot_ppm(id)?)?;
            Ok(())
        }
        Cmd::Process { ref id, ref pipeline } => {
            let p = read_pipeline(pipeline)?;
            print(&client()?.process(id, &p)?)
        }
        Cmd::Enhance {
            ref input,
            ref output,
            ref pipeline,
        } => {
            let ops: Vec<EnhancementOp> = serde_json::from_value(read_pipeline(pipeline)?)?;
            let out = apply_pipeline(load_image(input)?, &ops)?;
            save_image(&out.image.to_rgb(), output)?;
            for (step, h) in out.histograms() {
                println!("step {step} histogram: {}", serde_json::to_string(h)?);
            }
            Ok(())
        }
        Cmd::State => print(&client()?.state()?),
    }
}
