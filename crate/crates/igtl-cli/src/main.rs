//! `igtl` — command-line front end for the protocol library.
//!
//! One subcommand per role: `serve` (sink server), `track` (simulated
//! tracker client), `image-send` (synthetic volume source), `bench`
//! (latency trials), and `dump` (offline capture decoder). Data goes to
//! stdout, diagnostics to stderr; exit code 0 on success, 1 on runtime
//! error, 2 on usage error.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use igtl_core::{
    listen, render_table, run_image_source, run_latency_trial, run_sink_on, run_tracker_client,
    BenchConfig, CaptureReader, CrcPolicy, EndpointConfig, EntryStatus, ImageSourceSpec,
    PayloadKind, ScalarType, SinkLog, SinkOptions, TrackerConfig, TrackerMode, DEFAULT_PORT,
};

#[derive(Parser)]
#[command(
    name = "igtl",
    version,
    about = "Image-guided-therapy message streaming: server, simulators, benchmark, capture dump"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Listen for device connections and log whatever arrives.
    Serve(ServeArgs),
    /// Stream simulated tracker poses to a server.
    Track(TrackArgs),
    /// Send one synthetic gradient volume to a server.
    ImageSend(ImageSendArgs),
    /// Time message delivery and print a per-run latency table.
    Bench(BenchArgs),
    /// Decode a capture file, one summary line per message.
    Dump(DumpArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// TCP port to listen on.
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Print one `device θ tx ty tz` line per decoded pose.
    #[arg(long)]
    print_poses: bool,
    /// Append a JSONL record per receive outcome to this file.
    #[arg(long, value_name = "PATH")]
    log: Option<PathBuf>,
    /// Answer the first decoded message with STATUS{code=1, "OK"}.
    #[arg(long)]
    reply_status: bool,
    /// Answer every decoded message with that STATUS, giving remote
    /// `bench` clients a per-packet ack to time against.
    #[arg(long)]
    ack_each: bool,
    /// What a CRC mismatch does: drop the body or decode it anyway.
    #[arg(long, value_enum, default_value_t = CrcPolicyArg::Enforce)]
    crc_policy: CrcPolicyArg,
    /// Keep accepting clients, each served on its own thread, until
    /// killed. Default is one client session, then exit.
    #[arg(long)]
    concurrent: bool,
}

#[derive(Args)]
struct TrackArgs {
    /// Server hostname or address.
    #[arg(long)]
    host: String,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Frames per second pacing target.
    #[arg(long, default_value_t = 40.0)]
    fps: f64,
    /// Total frames to send.
    #[arg(long, default_value_t = 100)]
    frames: u64,
    /// Wire representation for each pose.
    #[arg(long, value_enum, default_value_t = ModeArg::Transform)]
    mode: ModeArg,
    /// Circle radius in millimeters.
    #[arg(long, default_value_t = 50.0)]
    radius: f64,
    /// Degrees advanced per frame.
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    /// Device name stamped on every message.
    #[arg(long, default_value = "Tracker")]
    device: String,
    /// Advertise supported types with a CAPABILITY message on connect.
    #[arg(long)]
    send_capability: bool,
}

#[derive(Args)]
struct ImageSendArgs {
    /// Server hostname or address.
    #[arg(long)]
    host: String,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Volume extent in voxels, written IxJxK (for example 64x64x32).
    #[arg(long, value_parser = parse_size, default_value = "16x16x16")]
    size: [u16; 3],
    /// Pixel sample type.
    #[arg(long, value_enum, default_value_t = ScalarArg::Uint8)]
    scalar: ScalarArg,
}

#[derive(Args)]
struct BenchArgs {
    /// Packets timed per run.
    #[arg(long, default_value_t = 100)]
    packets: usize,
    /// Number of runs.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Message type used as the probe payload.
    #[arg(long, value_enum, default_value_t = PayloadArg::Transform)]
    payload: PayloadArg,
    /// Emit the report as JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Remote server to measure against (reports half the round trip,
    /// acked via `serve --ack-each`). Without it the trial runs over an
    /// in-process loopback.
    #[arg(long)]
    host: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
}

#[derive(Args)]
struct DumpArgs {
    /// Capture file: raw concatenation of framed messages.
    file: PathBuf,
    /// Also hex-dump each body.
    #[arg(long)]
    hex: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CrcPolicyArg {
    Enforce,
    Warn,
}

impl From<CrcPolicyArg> for CrcPolicy {
    fn from(arg: CrcPolicyArg) -> CrcPolicy {
        match arg {
            CrcPolicyArg::Enforce => CrcPolicy::Enforce,
            CrcPolicyArg::Warn => CrcPolicy::Warn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Transform,
    Position,
}

impl From<ModeArg> for TrackerMode {
    fn from(arg: ModeArg) -> TrackerMode {
        match arg {
            ModeArg::Transform => TrackerMode::Transform,
            ModeArg::Position => TrackerMode::Position,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PayloadArg {
    Transform,
    Position,
}

impl From<PayloadArg> for PayloadKind {
    fn from(arg: PayloadArg) -> PayloadKind {
        match arg {
            PayloadArg::Transform => PayloadKind::Transform,
            PayloadArg::Position => PayloadKind::Position,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarArg {
    Int8,
    Uint8,
    Int16,
    Uint16,
    Int32,
    Uint32,
    Float32,
    Float64,
}

impl From<ScalarArg> for ScalarType {
    fn from(arg: ScalarArg) -> ScalarType {
        match arg {
            ScalarArg::Int8 => ScalarType::Int8,
            ScalarArg::Uint8 => ScalarType::Uint8,
            ScalarArg::Int16 => ScalarType::Int16,
            ScalarArg::Uint16 => ScalarType::Uint16,
            ScalarArg::Int32 => ScalarType::Int32,
            ScalarArg::Uint32 => ScalarType::Uint32,
            ScalarArg::Float32 => ScalarType::Float32,
            ScalarArg::Float64 => ScalarType::Float64,
        }
    }
}

/// Parses `IxJxK` (also accepting `×`) into voxel extents.
fn parse_size(text: &str) -> Result<[u16; 3], String> {
    let parts: Vec<&str> = text.split(['x', 'X', '×']).collect();
    if parts.len() != 3 {
        return Err(format!("expected IxJxK, got {text:?}"));
    }
    let mut size = [0u16; 3];
    for (slot, part) in size.iter_mut().zip(&parts) {
        *slot = part
            .parse::<u16>()
            .map_err(|_| format!("{part:?} is not a voxel count in 1..=65535"))?;
        if *slot == 0 {
            return Err("voxel extents must be nonzero".to_string());
        }
    }
    Ok(size)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => serve(args),
        Command::Track(args) => track(args),
        Command::ImageSend(args) => image_send(args),
        Command::Bench(args) => bench(args),
        Command::Dump(args) => dump(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let endpoint = EndpointConfig::server(args.port).with_crc_policy(args.crc_policy.into());
    let options = SinkOptions {
        print_poses: args.print_poses,
        log_path: args.log.clone(),
        reply_status: args.reply_status,
        ack_each: args.ack_each,
    };
    let listener =
        listen(&endpoint).with_context(|| format!("cannot listen on port {}", args.port))?;
    eprintln!("listening on {}", listener.local_addr());

    if !args.concurrent {
        let summary = run_sink_on(&listener, &options)?;
        eprintln!(
            "session complete: {} decoded, {} skipped, {} crc failures",
            summary.decoded, summary.skipped, summary.crc_failures
        );
        return Ok(());
    }

    // One log shared by all sessions so seq stays globally ordered.
    let log = Arc::new(SinkLog::open(args.log.as_deref())?);
    loop {
        let mut conn = listener.accept()?;
        let peer = conn.peer().to_string();
        eprintln!("client connected: {peer}");
        let options = options.clone();
        let log = Arc::clone(&log);
        thread::spawn(
            move || match igtl_core::serve_connection(&mut conn, &options, &log) {
                Ok(summary) => eprintln!(
                    "{peer}: session complete: {} decoded, {} skipped, {} crc failures",
                    summary.decoded, summary.skipped, summary.crc_failures
                ),
                Err(err) => eprintln!("{peer}: session failed: {err}"),
            },
        );
    }
}

fn track(args: TrackArgs) -> anyhow::Result<()> {
    let endpoint = EndpointConfig::client(args.host.as_str(), args.port)
        .with_send_capability(args.send_capability);
    let config = TrackerConfig {
        radius: args.radius,
        angular_step_deg: args.step,
        fps: args.fps,
        frames: args.frames,
        device_name: args.device,
        mode: args.mode.into(),
    };
    let summary = run_tracker_client(&endpoint, &config)
        .with_context(|| format!("tracker stream to {}:{} failed", args.host, args.port))?;
    eprintln!(
        "sent {} frames in {:.3} s",
        summary.frames_sent,
        summary.elapsed.as_secs_f64()
    );
    Ok(())
}

fn image_send(args: ImageSendArgs) -> anyhow::Result<()> {
    let endpoint = EndpointConfig::client(args.host.as_str(), args.port);
    let spec = ImageSourceSpec {
        size: args.size,
        scalar_type: args.scalar.into(),
    };
    let summary = run_image_source(&endpoint, &spec)
        .with_context(|| format!("image send to {}:{} failed", args.host, args.port))?;
    eprintln!(
        "sent {}x{}x{} volume, {} body bytes",
        args.size[0], args.size[1], args.size[2], summary.body_size
    );
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let config = BenchConfig {
        packets_per_run: args.packets,
        runs: args.runs,
        payload: args.payload.into(),
        remote: args
            .host
            .map(|host| EndpointConfig::client(host, args.port)),
    };
    let report = run_latency_trial(&config).context("latency trial failed")?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", render_table(&report));
    }
    Ok(())
}

fn dump(args: DumpArgs) -> anyhow::Result<()> {
    let file =
        File::open(&args.file).with_context(|| format!("cannot open {}", args.file.display()))?;
    let mut reader = CaptureReader::new(BufReader::new(file));
    let mut index = 0usize;
    loop {
        let entry = match reader.next_entry() {
            Ok(Some(entry)) => entry,
            Ok(None) => break,
            Err(err) => return Err(err).context("capture is unreadable past this point"),
        };
        let marker = match &entry.status {
            EntryStatus::Decoded(_) => String::new(),
            EntryStatus::UnknownType => "  [SKIPPED: unknown type]".to_string(),
            EntryStatus::UnsupportedVersion => {
                format!("  [SKIPPED: version {}]", entry.header.version)
            }
            EntryStatus::CrcMismatch { computed_crc } => format!(
                "  [CRC FAIL: stored {:#018x}, computed {:#018x}]",
                entry.header.crc, computed_crc
            ),
            EntryStatus::MalformedBody { error } => format!("  [SKIPPED: {error}]"),
        };
        println!(
            "{:>4}  @{:<8}  {:<12} {:<20} ts={:.6}  body={}B{}",
            index,
            entry.offset,
            entry.header.type_name,
            entry.header.device_name,
            entry.header.timestamp.to_seconds(),
            entry.header.body_size,
            marker
        );
        if args.hex {
            print_hex(&entry.body);
        }
        index += 1;
    }
    eprintln!("{index} messages");
    Ok(())
}

/// Classic 16-bytes-per-row hex dump, offsets relative to the body.
fn print_hex(body: &[u8]) {
    for (row, chunk) in body.chunks(16).enumerate() {
        let hex: Vec<String> = chunk.iter().map(|b| format!("{b:02x}")).collect();
        let ascii: String = chunk
            .iter()
            .map(|&b| {
                if (0x20..=0x7e).contains(&b) {
                    b as char
                } else {
                    '.'
                }
            })
            .collect();
        println!("      {:06x}  {:<47}  |{ascii}|", row * 16, hex.join(" "));
    }
}
