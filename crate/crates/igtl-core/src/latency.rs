//! Timed latency trials: N packets per run, R runs, per-run min/max/mean
//! and an overall mean ± sample standard deviation over the run means.
//!
//! A packet's latency is the monotonic-clock interval from immediately
//! before the send to the moment the receiver has fully decoded the
//! message — not rendered, not displayed. In the default loopback mode,
//! sender and receiver share one process connected over the loopback
//! interface, so no clock synchronisation is involved; the per-packet
//! completion signal is an in-process rendezvous whose cost is part of
//! the measured figure. Remote mode instead halves a send-to-ack round
//! trip and is labelled as such in output.

use std::sync::mpsc;
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{connect, listen, EndpointConfig, ReceiveOutcome, SessionError};
use crate::types::{Body, BodyError, Message, PositionBody, TransformBody};
use crate::wire::Timestamp;

/// Errors from a latency trial.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no samples to summarise")]
    EmptySamples,
    /// The peer went away mid-trial; a partial report would misrepresent
    /// the run structure, so none is produced.
    #[error("connection lost after {runs_completed} completed runs")]
    ConnectionLost { runs_completed: usize },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Body(#[from] BodyError),
}

/// Message type used as the timed payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    #[default]
    Transform,
    Position,
}

impl std::fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PayloadKind::Transform => "TRANSFORM",
            PayloadKind::Position => "POSITION",
        })
    }
}

/// How the trial was wired up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    /// Sender and receiver in one process over loopback; latency is
    /// send to fully-decoded.
    Loopback,
    /// Send to a remote sink that acks each packet; latency is half the
    /// measured round trip.
    RemoteHalfRtt,
}

/// Trial parameters.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub packets_per_run: usize,
    pub runs: usize,
    pub payload: PayloadKind,
    /// Target for remote mode; `None` runs the in-process loopback.
    pub remote: Option<EndpointConfig>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            packets_per_run: 100,
            runs: 10,
            payload: PayloadKind::Transform,
            remote: None,
        }
    }
}

/// Summary of one batch of samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub min_ms: f64,
    pub max_ms: f64,
    pub mean_ms: f64,
    /// Sample standard deviation (divisor n − 1); zero for n = 1.
    pub std_ms: f64,
}

/// One run's row in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// 1-based run number.
    pub run_no: usize,
    pub min_ms: f64,
    pub max_ms: f64,
    pub mean_ms: f64,
    pub samples: usize,
}

/// Complete trial result. The overall figures are computed over the run
/// means (not the pooled samples), mirroring how per-run tables are
/// conventionally summarised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub mode: BenchMode,
    pub packets_per_run: usize,
    pub runs_count: usize,
    pub runs: Vec<RunStats>,
    pub overall_mean_ms: f64,
    pub overall_std_ms: f64,
}

impl TrialReport {
    /// Assembles a report, deriving the overall mean ± std from the run
    /// means.
    pub fn from_runs(
        mode: BenchMode,
        runs: Vec<RunStats>,
        packets_per_run: usize,
    ) -> Result<Self, BenchError> {
        let means: Vec<f64> = runs.iter().map(|r| r.mean_ms).collect();
        let overall = compute_stats(&means)?;
        Ok(TrialReport {
            mode,
            packets_per_run,
            runs_count: runs.len(),
            runs,
            overall_mean_ms: overall.mean_ms,
            overall_std_ms: overall.std_ms,
        })
    }
}

/// Min, max, mean, and sample standard deviation of `samples`.
///
/// The deviation uses divisor n − 1 (and is zero for a single sample);
/// mean and M2 accumulate via Welford's recurrence for numerical
/// stability on long runs.
pub fn compute_stats(samples: &[f64]) -> Result<SampleStats, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::EmptySamples);
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        min = min.min(x);
        max = max.max(x);
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let std_ms = if samples.len() > 1 {
        (m2 / (samples.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SampleStats {
        min_ms: min,
        max_ms: max,
        mean_ms: mean,
        std_ms,
    })
}

fn build_payload(kind: PayloadKind, sequence: usize) -> Result<Message, BenchError> {
    let body = match kind {
        PayloadKind::Transform => Body::Transform(TransformBody {
            translation: [sequence as f32, 0.0, 0.0],
            ..TransformBody::identity()
        }),
        PayloadKind::Position => Body::Position(PositionBody {
            position: [sequence as f32, 0.0, 0.0],
            quaternion: [0.0, 0.0, 0.0, 1.0],
        }),
    };
    Ok(Message::new("Bench", Timestamp::now(), body)?)
}

/// Drives the run/packet loops around a per-packet measurement closure,
/// which gets the message to send plus the number of completed runs (for
/// error context) and returns the packet's latency in milliseconds.
fn measure_runs<F>(
    config: &BenchConfig,
    mode: BenchMode,
    mut measure: F,
) -> Result<TrialReport, BenchError>
where
    F: FnMut(&Message, usize) -> Result<f64, BenchError>,
{
    if config.packets_per_run == 0 || config.runs == 0 {
        return Err(BenchError::EmptySamples);
    }
    let mut runs = Vec::with_capacity(config.runs);
    let mut sequence = 0usize;
    for run_no in 1..=config.runs {
        let mut samples = Vec::with_capacity(config.packets_per_run);
        for _ in 0..config.packets_per_run {
            let message = build_payload(config.payload, sequence)?;
            sequence += 1;
            let ms = measure(&message, runs.len())?;
            // Monotonic clock: a negative interval is impossible, not noise.
            assert!(ms >= 0.0, "monotonic latency sample is negative: {ms}");
            samples.push(ms);
        }
        let stats = compute_stats(&samples)?;
        runs.push(RunStats {
            run_no,
            min_ms: stats.min_ms,
            max_ms: stats.max_ms,
            mean_ms: stats.mean_ms,
            samples: samples.len(),
        });
    }
    TrialReport::from_runs(mode, runs, config.packets_per_run)
}

/// Runs a latency trial per `config`: loopback by default, or against
/// `config.remote` with half-round-trip timing.
pub fn run_latency_trial(config: &BenchConfig) -> Result<TrialReport, BenchError> {
    match &config.remote {
        None => loopback_trial(config),
        Some(endpoint) => remote_trial(config, endpoint),
    }
}

fn loopback_trial(config: &BenchConfig) -> Result<TrialReport, BenchError> {
    let listener = listen(&EndpointConfig::server(0))?;
    let port = listener.local_port();
    let (decoded_tx, decoded_rx) = mpsc::channel::<Instant>();
    let receiver = thread::spawn(move || -> Result<(), SessionError> {
        let mut conn = listener.accept()?;
        loop {
            match conn.receive_message()? {
                ReceiveOutcome::Decoded(_) => {
                    if decoded_tx.send(Instant::now()).is_err() {
                        return Ok(()); // trial side gave up
                    }
                }
                ReceiveOutcome::Closed => return Ok(()),
                // Our own sender produces neither skips nor CRC failures.
                ReceiveOutcome::Skipped { .. } | ReceiveOutcome::IntegrityFailure { .. } => {}
            }
        }
    });

    let mut conn = connect(&EndpointConfig::client("127.0.0.1", port))?;
    let result = measure_runs(config, BenchMode::Loopback, |message, completed_runs| {
        let sent_at = Instant::now();
        conn.send_message(message)?;
        let decoded_at = decoded_rx.recv().map_err(|_| BenchError::ConnectionLost {
            runs_completed: completed_runs,
        })?;
        Ok(decoded_at.duration_since(sent_at).as_secs_f64() * 1e3)
    });
    conn.close();
    let _ = receiver.join();
    result
}

fn remote_trial(
    config: &BenchConfig,
    endpoint: &EndpointConfig,
) -> Result<TrialReport, BenchError> {
    let mut conn = connect(endpoint)?;
    let result = measure_runs(
        config,
        BenchMode::RemoteHalfRtt,
        |message, completed_runs| {
            let sent_at = Instant::now();
            conn.send_message(message)?;
            loop {
                match conn.receive_message()? {
                    ReceiveOutcome::Decoded(_) => break,
                    ReceiveOutcome::Closed => {
                        return Err(BenchError::ConnectionLost {
                            runs_completed: completed_runs,
                        })
                    }
                    // Tolerate unrelated traffic between acks.
                    ReceiveOutcome::Skipped { .. } | ReceiveOutcome::IntegrityFailure { .. } => {}
                }
            }
            let round_trip = Instant::now().duration_since(sent_at).as_secs_f64() * 1e3;
            Ok(round_trip / 2.0)
        },
    );
    conn.close();
    result
}

/// Renders the report as a per-run table — rows `Run No.` / `min` /
/// `max` / `mean`, one column per run, two decimals — with an
/// `overall: M ± S ms (n=R)` footer. Remote reports carry a mode line so
/// half-round-trip figures are never mistaken for one-way ones.
pub fn render_table(report: &TrialReport) -> String {
    let mut out = String::new();
    if report.mode == BenchMode::RemoteHalfRtt {
        out.push_str("mode: remote (half round-trip)\n");
    }
    let label_width = 8;
    let col_width = 9;

    out.push_str(&format!("{:<label_width$}", "Run No."));
    for run in &report.runs {
        out.push_str(&format!("{:>col_width$}", run.run_no));
    }
    out.push('\n');
    type RowValue = fn(&RunStats) -> f64;
    let rows: [(&str, RowValue); 3] = [
        ("min", |r| r.min_ms),
        ("max", |r| r.max_ms),
        ("mean", |r| r.mean_ms),
    ];
    for (label, value) in rows {
        out.push_str(&format!("{label:<label_width$}"));
        for run in &report.runs {
            out.push_str(&format!("{:>col_width$.2}", value(run)));
        }
        out.push('\n');
    }
    out.push_str(&format!(
        "overall: {:.2} ± {:.2} ms (n={})\n",
        report.overall_mean_ms, report.overall_std_ms, report.runs_count
    ));
    out
}
