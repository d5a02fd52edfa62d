//! OpenIGTLink v1 protocol support: wire codec, TCP sessions, device
//! simulators, and a latency measurement harness.
//!
//! OpenIGTLink is a lightweight TCP protocol used to move tracking data,
//! images, and device status between systems in an image-guided therapy
//! setup. Every message is a 58-byte big-endian header followed by a typed
//! body, with a CRC-64 over the body carried in the header.
//!
//! The crate is organised in layers, each usable on its own:
//!
//! - [`wire`] — header encode/decode, CRC-64, and message framing.
//! - [`types`] — typed bodies (`TRANSFORM`, `POSITION`, `STATUS`,
//!   `CAPABILITY`, `IMAGE`, `XMARKERLIST`) with exact round-trip codecs.
//! - [`pose`] — quaternion/rotation-matrix conversions linking the pose
//!   representations.
//! - [`session`] — blocking TCP client/server endpoints that frame, verify,
//!   and dispatch messages, skipping unknown types without dropping the
//!   connection.
//! - [`capture`] — reader for files holding concatenated raw messages.
//! - [`sim`] — deterministic tracker, image-source, and sink simulators.
//! - [`latency`] — send-to-decode latency trials with per-run statistics.
//!
//! All spatial quantities are millimeters; rotations are stored as 3x3
//! matrices or unit quaternions in `(x, y, z, w)` order.

pub mod capture;
pub mod latency;
pub mod pose;
pub mod session;
pub mod sim;
pub mod types;
pub mod wire;

pub use capture::{CaptureEntry, CaptureError, CaptureReader, EntryStatus};
pub use latency::{
    compute_stats, render_table, run_latency_trial, BenchConfig, BenchError, BenchMode,
    PayloadKind, RunStats, SampleStats, TrialReport,
};
pub use pose::{position_as_transform, quaternion_to_rotation, rotation_to_quaternion, PoseError};
pub use session::{
    connect, listen, Connection, CrcPolicy, EndpointConfig, IgtlListener, ListenerCloseHandle,
    ReceiveObserver, ReceiveOutcome, Role, SessionError, SessionStats, SkipReason, DEFAULT_PORT,
};
pub use sim::{
    gradient_image, run_image_source, run_sink_on, run_sink_server, run_tracker_client,
    serve_connection, tracker_pose_at, ImageSourceSpec, ImageSummary, RecordKind, SimError,
    SinkLog, SinkOptions, SinkRecord, SinkSummary, TrackerConfig, TrackerMode, TrackerSummary,
};
pub use types::{
    Body, BodyError, CapabilityBody, CoordinateSystem, Endianness, ImageBody, Message,
    PositionBody, ScalarType, StatusBody, TransformBody, XMarker, XMarkerListBody,
    KNOWN_TYPE_NAMES,
};
pub use wire::{
    crc64, decode_header, decode_header_raw, encode_header, frame_message, parse_frame,
    MessageHeader, Timestamp, WireError, DEVICE_NAME_SIZE, HEADER_SIZE, PROTOCOL_VERSION,
    TYPE_NAME_SIZE,
};
