//! Deterministic device simulators: a tracker client streaming dummy
//! poses, a one-shot image source, and a sink server that logs whatever
//! arrives.
//!
//! The tracker follows a circle of configurable radius in the z = 0
//! plane, rotating about z in step with its angular position — fully
//! parametric, so two runs with the same config produce byte-identical
//! pose content (timestamps aside) and every frame is analytically
//! checkable.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::position_as_transform;
use crate::session::{
    connect, listen, Connection, EndpointConfig, IgtlListener, ReceiveOutcome, SessionError,
};
use crate::types::{
    Body, BodyError, ImageBody, Message, PositionBody, ScalarType, StatusBody, TransformBody,
};
use crate::wire::Timestamp;

/// Errors from simulator runs.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("connection lost after {frames_sent} frames")]
    ConnectionLost { frames_sent: u64 },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error("log file: {0}")]
    Log(#[from] io::Error),
}

/// Which body type the tracker sends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrackerMode {
    #[default]
    Transform,
    Position,
}

/// Tracker trajectory and pacing parameters.
#[derive(Debug, Clone)]
pub struct TrackerConfig {
    /// Circle radius in millimeters.
    pub radius: f64,
    /// Degrees advanced per frame.
    pub angular_step_deg: f64,
    /// Frames per second pacing target.
    pub fps: f64,
    /// Total frames to send.
    pub frames: u64,
    pub device_name: String,
    pub mode: TrackerMode,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            radius: 50.0,
            angular_step_deg: 5.0,
            fps: 40.0,
            frames: 100,
            device_name: "Tracker".to_string(),
            mode: TrackerMode::Transform,
        }
    }
}

impl TrackerConfig {
    fn validate(&self) -> Result<(), SimError> {
        let reason = if !(self.radius > 0.0 && self.radius.is_finite()) {
            format!("radius {} must be positive", self.radius)
        } else if !(self.angular_step_deg > 0.0 && self.angular_step_deg < 360.0) {
            format!("angular step {} must be in (0, 360)", self.angular_step_deg)
        } else if !(self.fps > 0.0 && self.fps.is_finite()) {
            format!("fps {} must be positive", self.fps)
        } else if self.frames == 0 {
            "frame count must be at least 1".to_string()
        } else {
            return Ok(());
        };
        Err(SimError::InvalidConfig { reason })
    }
}

/// The pose at `frame_index`: θ = frame_index × angular_step, translation
/// `(r·cos θ, r·sin θ, 0)`, rotation about z by θ. Pure function of its
/// inputs — identical inputs give bit-identical outputs.
pub fn tracker_pose_at(frame_index: u64, config: &TrackerConfig) -> TransformBody {
    let theta = (frame_index as f64) * config.angular_step_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    TransformBody {
        rotation: [
            [cos as f32, -sin as f32, 0.0],
            [sin as f32, cos as f32, 0.0],
            [0.0, 0.0, 1.0],
        ],
        translation: [
            (config.radius * cos) as f32,
            (config.radius * sin) as f32,
            0.0,
        ],
    }
}

/// Quaternion for the same z-rotation, for position mode: a turn by θ
/// about +z is `(0, 0, sin θ/2, cos θ/2)`.
fn tracker_quaternion_at(frame_index: u64, config: &TrackerConfig) -> [f32; 4] {
    let theta = (frame_index as f64) * config.angular_step_deg.to_radians();
    let (sin, cos) = (theta / 2.0).sin_cos();
    [0.0, 0.0, sin as f32, cos as f32]
}

/// What a tracker run accomplished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackerSummary {
    pub frames_sent: u64,
    pub elapsed: Duration,
}

/// Streams `config.frames` poses to the endpoint at the configured fps
/// (absolute schedule, best effort: frame n goes out no earlier than
/// n/fps seconds after the first).
pub fn run_tracker_client(
    endpoint: &EndpointConfig,
    config: &TrackerConfig,
) -> Result<TrackerSummary, SimError> {
    config.validate()?;
    let mut conn = connect(endpoint)?;
    let interval = Duration::from_secs_f64(1.0 / config.fps);
    let start = Instant::now();
    let mut frames_sent = 0u64;
    for frame in 0..config.frames {
        if frame > 0 {
            let target = start + interval.mul_f64(frame as f64);
            let now = Instant::now();
            if target > now {
                thread::sleep(target - now);
            }
        }
        let body = match config.mode {
            TrackerMode::Transform => Body::Transform(tracker_pose_at(frame, config)),
            TrackerMode::Position => Body::Position(PositionBody {
                position: tracker_pose_at(frame, config).translation,
                quaternion: tracker_quaternion_at(frame, config),
            }),
        };
        let message = Message::new(config.device_name.as_str(), Timestamp::now(), body)?;
        conn.send_message(&message).map_err(|e| match e {
            SessionError::ConnectionLost { .. } => SimError::ConnectionLost { frames_sent },
            other => SimError::Session(other),
        })?;
        frames_sent += 1;
    }
    let elapsed = start.elapsed();
    conn.close();
    Ok(TrackerSummary {
        frames_sent,
        elapsed,
    })
}

/// Sink behaviour switches.
#[derive(Debug, Clone, Default)]
pub struct SinkOptions {
    /// Print one `device θ tx ty tz` line per decoded pose to stdout.
    pub print_poses: bool,
    /// Append a JSONL record per receive outcome to this file.
    pub log_path: Option<PathBuf>,
    /// Answer the first decoded message with `STATUS{code=1, "OK"}`.
    pub reply_status: bool,
    /// Answer *every* decoded message with that STATUS — gives remote
    /// latency clients a per-packet ack to time against.
    pub ack_each: bool,
}

/// Kind tag of a [`SinkRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Decoded,
    Skipped,
    CrcFailure,
}

/// One line of the sink's JSONL log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinkRecord {
    pub seq: u64,
    pub kind: RecordKind,
    #[serde(rename = "type")]
    pub type_name: String,
    /// Sender device name; empty for skipped messages, whose headers are
    /// not retained past the skip decision.
    pub device: String,
    pub body_size: u64,
    pub recv_unix_ns: u64,
}

/// JSONL log sink, shareable across connections. With no path it
/// swallows records.
#[derive(Debug)]
pub struct SinkLog {
    writer: Option<Mutex<File>>,
    seq: AtomicU64,
}

impl SinkLog {
    pub fn open(path: Option<&Path>) -> Result<SinkLog, SimError> {
        let writer = match path {
            Some(p) => Some(Mutex::new(File::create(p)?)),
            None => None,
        };
        Ok(SinkLog {
            writer,
            seq: AtomicU64::new(0),
        })
    }

    fn append(
        &self,
        kind: RecordKind,
        type_name: &str,
        device: &str,
        body_size: u64,
    ) -> Result<(), SimError> {
        let Some(writer) = &self.writer else {
            return Ok(());
        };
        let record = SinkRecord {
            seq: self.seq.fetch_add(1, Ordering::SeqCst),
            kind,
            type_name: type_name.to_string(),
            device: device.to_string(),
            body_size,
            recv_unix_ns: unix_ns(),
        };
        let mut line = serde_json::to_string(&record).expect("record serialization cannot fail");
        line.push('\n');
        let mut file = writer.lock().expect("log writer poisoned");
        file.write_all(line.as_bytes())?;
        file.flush()?;
        Ok(())
    }
}

fn unix_ns() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}

/// Tally of one client session at the sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SinkSummary {
    pub decoded: u64,
    pub skipped: u64,
    pub crc_failures: u64,
}

/// The `device θ tx ty tz` line for a decoded pose message, if it is one.
fn pose_line(message: &Message) -> Option<String> {
    let t = match &message.body {
        Body::Transform(t) => *t,
        Body::Position(p) => position_as_transform(p).ok()?,
        _ => return None,
    };
    let theta = (t.rotation[1][0] as f64)
        .atan2(t.rotation[0][0] as f64)
        .to_degrees();
    Some(format!(
        "{} {:.3} {:.3} {:.3} {:.3}",
        message.header.device_name, theta, t.translation[0], t.translation[1], t.translation[2]
    ))
}

/// Drains one client connection, logging every outcome, until the peer
/// closes. Stream-level failures (desync, reset) abort with an error;
/// content-level problems are tallied and the loop continues.
pub fn serve_connection(
    conn: &mut Connection,
    options: &SinkOptions,
    log: &SinkLog,
) -> Result<SinkSummary, SimError> {
    let mut summary = SinkSummary::default();
    let mut replied = false;
    loop {
        match conn.receive_message()? {
            ReceiveOutcome::Decoded(message) => {
                summary.decoded += 1;
                log.append(
                    RecordKind::Decoded,
                    &message.header.type_name,
                    &message.header.device_name,
                    message.header.body_size,
                )?;
                if options.print_poses {
                    if let Some(line) = pose_line(&message) {
                        println!("{line}");
                    }
                }
                if options.ack_each || (options.reply_status && !replied) {
                    replied = true;
                    let reply =
                        Message::new("Sink", Timestamp::now(), Body::Status(StatusBody::ok("")))?;
                    conn.send_message(&reply)?;
                }
            }
            ReceiveOutcome::Skipped {
                type_name,
                body_size,
                ..
            } => {
                summary.skipped += 1;
                log.append(RecordKind::Skipped, &type_name, "", body_size)?;
            }
            ReceiveOutcome::IntegrityFailure { header, .. } => {
                summary.crc_failures += 1;
                log.append(
                    RecordKind::CrcFailure,
                    &header.type_name,
                    &header.device_name,
                    header.body_size,
                )?;
            }
            ReceiveOutcome::Closed => break,
        }
    }
    Ok(summary)
}

/// Accepts one client on an already-bound listener and serves it to
/// completion.
pub fn run_sink_on(
    listener: &IgtlListener,
    options: &SinkOptions,
) -> Result<SinkSummary, SimError> {
    let log = SinkLog::open(options.log_path.as_deref())?;
    let mut conn = listener.accept()?;
    serve_connection(&mut conn, options, &log)
}

/// Binds the endpoint, serves one client session, and returns its tally.
pub fn run_sink_server(
    endpoint: &EndpointConfig,
    options: &SinkOptions,
) -> Result<SinkSummary, SimError> {
    let listener = listen(endpoint)?;
    run_sink_on(&listener, options)
}

/// Shape and sample type for the synthetic image source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageSourceSpec {
    /// Volume extent in voxels, `(i, j, k)`.
    pub size: [u16; 3],
    pub scalar_type: ScalarType,
}

/// What an image-source run sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageSummary {
    /// Encoded body length: 72-byte sub-header plus pixel bytes.
    pub body_size: u64,
}

/// Builds the axis-gradient test volume: single component, identity
/// orientation, 1 mm voxels, voxel value = `(i + j + k) mod` the scalar
/// type's maximum value (float types carry the raw sum). Index `i`
/// varies fastest, matching the wire layout.
pub fn gradient_image(spec: &ImageSourceSpec) -> Result<ImageBody, SimError> {
    if spec.size.contains(&0) {
        return Err(SimError::InvalidConfig {
            reason: format!(
                "volume {}x{}x{} has a zero extent",
                spec.size[0], spec.size[1], spec.size[2]
            ),
        });
    }
    let [ni, nj, nk] = spec.size.map(u64::from);
    let mut pixels = Vec::with_capacity((ni * nj * nk) as usize * spec.scalar_type.byte_size());
    for k in 0..nk {
        for j in 0..nj {
            for i in 0..ni {
                let sum = i + j + k;
                match spec.scalar_type {
                    ScalarType::Int8 => pixels.push((sum % i8::MAX as u64) as u8),
                    ScalarType::Uint8 => pixels.push((sum % u8::MAX as u64) as u8),
                    ScalarType::Int16 => {
                        pixels.extend(((sum % i16::MAX as u64) as u16).to_be_bytes())
                    }
                    ScalarType::Uint16 => {
                        pixels.extend(((sum % u16::MAX as u64) as u16).to_be_bytes())
                    }
                    ScalarType::Int32 => {
                        pixels.extend(((sum % i32::MAX as u64) as u32).to_be_bytes())
                    }
                    ScalarType::Uint32 => {
                        pixels.extend(((sum % u32::MAX as u64) as u32).to_be_bytes())
                    }
                    ScalarType::Float32 => pixels.extend((sum as f32).to_be_bytes()),
                    ScalarType::Float64 => pixels.extend((sum as f64).to_be_bytes()),
                }
            }
        }
    }
    Ok(ImageBody::full_volume(
        spec.size,
        spec.scalar_type,
        1,
        pixels,
    )?)
}

/// Connects and sends one gradient volume.
pub fn run_image_source(
    endpoint: &EndpointConfig,
    spec: &ImageSourceSpec,
) -> Result<ImageSummary, SimError> {
    let image = gradient_image(spec)?;
    let mut conn = connect(endpoint)?;
    let message = Message::new("Imager", Timestamp::now(), Body::Image(image))?;
    let body_size = message.header.body_size;
    conn.send_message(&message)?;
    conn.close();
    Ok(ImageSummary { body_size })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frame_zero_starts_on_the_x_axis() {
        let config = TrackerConfig::default();
        let pose = tracker_pose_at(0, &config);
        assert_eq!(pose.translation, [50.0, 0.0, 0.0]);
        assert_eq!(pose.rotation, TransformBody::identity().rotation);
    }

    #[test]
    fn quarter_turn_at_frame_eighteen() {
        // 18 frames x 5 degrees = 90 degrees.
        let config = TrackerConfig::default();
        let pose = tracker_pose_at(18, &config);
        let eps = 1e-6f32;
        assert!(pose.translation[0].abs() < eps);
        assert!((pose.translation[1] - 50.0).abs() < eps);
        // Columns land on (0,1,0), (-1,0,0), (0,0,1).
        assert!((pose.rotation[1][0] - 1.0).abs() < eps);
        assert!((pose.rotation[0][1] + 1.0).abs() < eps);
        assert!((pose.rotation[2][2] - 1.0).abs() < eps);
    }

    #[test]
    fn pose_content_is_deterministic() {
        let config = TrackerConfig::default();
        for frame in 0..100 {
            let a = tracker_pose_at(frame, &config).encode();
            let b = tracker_pose_at(frame, &config).encode();
            assert_eq!(a, b, "frame {frame}");
        }
    }

    #[test]
    fn position_mode_quaternion_matches_the_matrix() {
        let config = TrackerConfig::default();
        for frame in [0u64, 1, 18, 36, 71, 100] {
            let expected = tracker_pose_at(frame, &config);
            let p = PositionBody {
                position: expected.translation,
                quaternion: tracker_quaternion_at(frame, &config),
            };
            let via_quaternion = position_as_transform(&p).unwrap();
            for r in 0..3 {
                for c in 0..3 {
                    assert!(
                        (via_quaternion.rotation[r][c] - expected.rotation[r][c]).abs() < 1e-6,
                        "frame {frame} entry ({r},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn config_bounds_are_enforced() {
        let bad_configs = [
            TrackerConfig {
                radius: 0.0,
                ..TrackerConfig::default()
            },
            TrackerConfig {
                angular_step_deg: 360.0,
                ..TrackerConfig::default()
            },
            TrackerConfig {
                fps: 0.0,
                ..TrackerConfig::default()
            },
            TrackerConfig {
                frames: 0,
                ..TrackerConfig::default()
            },
        ];
        for config in bad_configs {
            assert!(matches!(
                config.validate(),
                Err(SimError::InvalidConfig { .. })
            ));
        }
        assert!(TrackerConfig::default().validate().is_ok());
    }

    #[test]
    fn gradient_volume_values_and_order() {
        // 4x4x4 uint8: 64 single-byte voxels, value i+j+k, i fastest.
        let image = gradient_image(&ImageSourceSpec {
            size: [4, 4, 4],
            scalar_type: ScalarType::Uint8,
        })
        .unwrap();
        assert_eq!(image.pixel_data.len(), 64);
        assert_eq!(image.pixel_data[0], 0);
        assert_eq!(image.pixel_data[1], 1); // (1,0,0)
        assert_eq!(image.pixel_data[4], 1); // (0,1,0)
        assert_eq!(image.pixel_data[16], 1); // (0,0,1)
        assert_eq!(image.pixel_data[63], 9); // (3,3,3)
        assert_eq!(image.num_components, 1);
        assert_eq!(image.matrix_size, [4, 4, 4]);

        // Single voxel: gradient at the origin is zero.
        let tiny = gradient_image(&ImageSourceSpec {
            size: [1, 1, 1],
            scalar_type: ScalarType::Uint8,
        })
        .unwrap();
        assert_eq!(tiny.pixel_data, vec![0]);
    }

    #[test]
    fn gradient_respects_scalar_width_and_wraps() {
        let image = gradient_image(&ImageSourceSpec {
            size: [3, 2, 1],
            scalar_type: ScalarType::Int16,
        })
        .unwrap();
        assert_eq!(image.pixel_data.len(), 6 * 2);
        assert_eq!(&image.pixel_data[0..2], &[0, 0]);
        assert_eq!(&image.pixel_data[2..4], &[0, 1]);

        // uint8 wraps at the type's maximum value.
        let wide = gradient_image(&ImageSourceSpec {
            size: [300, 1, 1],
            scalar_type: ScalarType::Uint8,
        })
        .unwrap();
        assert_eq!(wide.pixel_data[254], 254);
        assert_eq!(wide.pixel_data[255], 0);

        assert!(matches!(
            gradient_image(&ImageSourceSpec {
                size: [0, 4, 4],
                scalar_type: ScalarType::Uint8,
            }),
            Err(SimError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn sink_record_json_shape() {
        let record = SinkRecord {
            seq: 3,
            kind: RecordKind::CrcFailure,
            type_name: "TRANSFORM".to_string(),
            device: "Tracker".to_string(),
            body_size: 48,
            recv_unix_ns: 1_700_000_000_000_000_000,
        };
        let json = serde_json::to_string(&record).unwrap();
        assert_eq!(
            json,
            "{\"seq\":3,\"kind\":\"crc_failure\",\"type\":\"TRANSFORM\",\
             \"device\":\"Tracker\",\"body_size\":48,\
             \"recv_unix_ns\":1700000000000000000}"
        );
        assert_eq!(serde_json::from_str::<SinkRecord>(&json).unwrap(), record);
    }

    proptest! {
        #[test]
        fn every_pose_stays_on_the_circle(
            frame in 0u64..10_000,
            radius in 1.0f64..500.0,
            step in 0.1f64..359.9,
        ) {
            let config = TrackerConfig { radius, angular_step_deg: step, ..TrackerConfig::default() };
            let pose = tracker_pose_at(frame, &config);
            prop_assert!(pose.is_rigid(1e-6));
            let r = ((pose.translation[0] as f64).powi(2) + (pose.translation[1] as f64).powi(2)).sqrt();
            prop_assert!((r - radius).abs() < 1e-3 * radius.max(1.0), "|t| = {}, r = {}", r, radius);
            prop_assert_eq!(pose.translation[2], 0.0);
        }
    }
}
