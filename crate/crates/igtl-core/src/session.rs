//! Blocking TCP session layer: listen/accept/connect plus whole-message
//! send and receive with graceful skipping.
//!
//! The receive path never tears a connection down over message *content*:
//! unknown type names, protocol revisions this crate does not speak, and
//! (under [`CrcPolicy::Enforce`]) checksum mismatches all consume the full
//! body and report a non-fatal [`ReceiveOutcome`], so the next message on
//! the stream decodes normally. Only byte-stream problems — the stream
//! ending mid-message, an unparseable header — are errors, because after
//! those the message boundary is unknowable.

use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::types::{is_known_type, Body, BodyError, CapabilityBody, Message};
use crate::wire::{
    crc64, decode_header_raw, frame_message, MessageHeader, Timestamp, WireError, HEADER_SIZE,
    PROTOCOL_VERSION,
};

/// Conventional port for this protocol.
pub const DEFAULT_PORT: u16 = 18944;

/// Upper bound on a plausible body. A header announcing more than this is
/// taken as stream desynchronisation, not a real message.
const MAX_BODY_SIZE: u64 = 1 << 30;

/// Which side of the connection a config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Server,
    Client,
}

/// What to do when a body's CRC does not match its header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrcPolicy {
    /// Report [`ReceiveOutcome::IntegrityFailure`] and drop the body.
    #[default]
    Enforce,
    /// Decode anyway; the mismatch only bumps the warning counter.
    Warn,
}

/// Endpoint description for [`listen`] and [`connect`].
#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub role: Role,
    /// Connect target (client) or bind address (server).
    pub host: String,
    pub port: u16,
    pub crc_policy: CrcPolicy,
    /// `None` blocks indefinitely.
    pub read_timeout: Option<Duration>,
    /// Client only: advertise the supported type names in a `CAPABILITY`
    /// message immediately after connecting.
    pub send_capability: bool,
}

impl EndpointConfig {
    /// A server binding every interface on `port` (0 picks an ephemeral
    /// port, reported back by [`IgtlListener::local_port`]).
    pub fn server(port: u16) -> Self {
        EndpointConfig {
            role: Role::Server,
            host: "0.0.0.0".to_string(),
            port,
            crc_policy: CrcPolicy::Enforce,
            read_timeout: None,
            send_capability: false,
        }
    }

    /// A client targeting `host:port`.
    pub fn client(host: impl Into<String>, port: u16) -> Self {
        EndpointConfig {
            role: Role::Client,
            host: host.into(),
            port,
            crc_policy: CrcPolicy::Enforce,
            read_timeout: None,
            send_capability: false,
        }
    }

    pub fn with_crc_policy(mut self, policy: CrcPolicy) -> Self {
        self.crc_policy = policy;
        self
    }

    pub fn with_read_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.read_timeout = timeout;
        self
    }

    pub fn with_send_capability(mut self, send: bool) -> Self {
        self.send_capability = send;
        self
    }
}

/// Errors from the session layer.
#[derive(Debug, Error)]
pub enum SessionError {
    #[error("address {addr} is already in use")]
    AddressInUse { addr: String },
    #[error("binding {addr} was denied")]
    PermissionDenied { addr: String },
    #[error("connection refused by {addr}")]
    ConnectionRefused { addr: String },
    #[error("cannot resolve or reach {addr}")]
    HostUnreachable { addr: String },
    #[error("connection lost: {context}")]
    ConnectionLost { context: String },
    /// The stream no longer sits on a message boundary; the connection is
    /// unusable because resynchronising a raw byte stream is guesswork.
    #[error("stream desynchronised: {context}")]
    ProtocolDesync { context: String },
    #[error("timed out waiting for a message")]
    Timeout,
    #[error("listener is closed")]
    ListenerClosed,
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Why a message was skipped rather than decoded.
#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    /// The type name has no decoder here.
    UnknownType,
    /// The header carries a protocol revision this crate does not speak.
    UnsupportedVersion { version: u16 },
    /// Known type, but the body violates its layout.
    MalformedBody { error: BodyError },
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::UnknownType => f.write_str("unknown type"),
            SkipReason::UnsupportedVersion { version } => {
                write!(f, "unsupported version {version}")
            }
            SkipReason::MalformedBody { error } => write!(f, "malformed body: {error}"),
        }
    }
}

/// Result of one [`Connection::receive_message`] call.
#[derive(Debug)]
pub enum ReceiveOutcome {
    /// A known-type message that passed every check.
    Decoded(Message),
    /// A message that was consumed from the stream but not decoded. The
    /// connection remains usable.
    Skipped {
        type_name: String,
        body_size: u64,
        reason: SkipReason,
    },
    /// The body's CRC did not match the header under
    /// [`CrcPolicy::Enforce`]. Body consumed, connection usable.
    IntegrityFailure {
        header: MessageHeader,
        computed_crc: u64,
    },
    /// The peer shut down cleanly at a message boundary.
    Closed,
}

/// Snapshot of a connection's monotonic counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SessionStats {
    /// Fully decoded known-type messages.
    pub messages_received: u64,
    /// Messages consumed but skipped (unknown type, version, bad body).
    pub messages_skipped: u64,
    /// Bodies dropped for CRC mismatch under `Enforce`.
    pub crc_failures: u64,
    /// CRC mismatches decoded anyway under `Warn`.
    pub crc_warnings: u64,
    pub messages_sent: u64,
    pub bytes_received: u64,
    pub bytes_sent: u64,
}

#[derive(Debug, Default)]
struct Counters {
    messages_received: AtomicU64,
    messages_skipped: AtomicU64,
    crc_failures: AtomicU64,
    crc_warnings: AtomicU64,
    messages_sent: AtomicU64,
    bytes_received: AtomicU64,
    bytes_sent: AtomicU64,
}

/// Observer invoked once per [`ReceiveOutcome`], in stream order, on the
/// handle that performs the receives.
pub type ReceiveObserver = Box<dyn FnMut(&ReceiveOutcome) + Send>;

/// One established connection.
///
/// At most one concurrent receiver and one concurrent sender are
/// supported; [`try_clone`](Connection::try_clone) yields a second handle
/// (sharing the socket and counters) so send and receive can run on
/// separate threads.
pub struct Connection {
    stream: TcpStream,
    peer: String,
    crc_policy: CrcPolicy,
    counters: Arc<Counters>,
    observer: Option<ReceiveObserver>,
}

impl std::fmt::Debug for Connection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Connection")
            .field("peer", &self.peer)
            .field("crc_policy", &self.crc_policy)
            .finish_non_exhaustive()
    }
}

/// A bound, listening endpoint.
#[derive(Debug)]
pub struct IgtlListener {
    listener: TcpListener,
    local: SocketAddr,
    crc_policy: CrcPolicy,
    read_timeout: Option<Duration>,
    closed: Arc<AtomicBool>,
}

/// Handle for shutting a listener down from another thread.
#[derive(Debug, Clone)]
pub struct ListenerCloseHandle {
    closed: Arc<AtomicBool>,
    local: SocketAddr,
}

impl ListenerCloseHandle {
    /// Makes the listener's current or next [`accept`](IgtlListener::accept)
    /// return [`SessionError::ListenerClosed`].
    pub fn close(&self) {
        self.closed.store(true, Ordering::SeqCst);
        // A blocked accept only notices the flag when a connection lands,
        // so poke it with one.
        let target = if self.local.ip().is_unspecified() {
            SocketAddr::new("127.0.0.1".parse().unwrap(), self.local.port())
        } else {
            self.local
        };
        let _ = TcpStream::connect_timeout(&target, Duration::from_millis(200));
    }
}

/// Opens a listening endpoint described by `config` (role must be
/// `Server`).
pub fn listen(config: &EndpointConfig) -> Result<IgtlListener, SessionError> {
    debug_assert_eq!(config.role, Role::Server);
    let addr = format!("{}:{}", config.host, config.port);
    let listener = TcpListener::bind(&addr).map_err(|e| match e.kind() {
        io::ErrorKind::AddrInUse => SessionError::AddressInUse { addr: addr.clone() },
        io::ErrorKind::PermissionDenied => SessionError::PermissionDenied { addr: addr.clone() },
        _ => SessionError::Io(e),
    })?;
    let local = listener.local_addr()?;
    Ok(IgtlListener {
        listener,
        local,
        crc_policy: config.crc_policy,
        read_timeout: config.read_timeout,
        closed: Arc::new(AtomicBool::new(false)),
    })
}

impl IgtlListener {
    /// The port actually bound — useful after requesting port 0.
    pub fn local_port(&self) -> u16 {
        self.local.port()
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local
    }

    /// A handle that can unblock and close this listener.
    pub fn close_handle(&self) -> ListenerCloseHandle {
        ListenerCloseHandle {
            closed: Arc::clone(&self.closed),
            local: self.local,
        }
    }

    /// Blocks for the next inbound connection. Multiple sequential
    /// accepts hand out independent connections.
    pub fn accept(&self) -> Result<Connection, SessionError> {
        if self.closed.load(Ordering::SeqCst) {
            return Err(SessionError::ListenerClosed);
        }
        let (stream, _) = self.listener.accept()?;
        if self.closed.load(Ordering::SeqCst) {
            // This connection is the close handle's wake-up poke (or
            // arrived while closing); drop it and report closed.
            return Err(SessionError::ListenerClosed);
        }
        Connection::establish(stream, self.crc_policy, self.read_timeout)
    }
}

/// Connects to the endpoint described by `config` (role must be
/// `Client`). With `send_capability` set, a `CAPABILITY` message listing
/// the six supported types is sent before returning.
pub fn connect(config: &EndpointConfig) -> Result<Connection, SessionError> {
    debug_assert_eq!(config.role, Role::Client);
    let addr = format!("{}:{}", config.host, config.port);
    let mut last_err = None;
    let mut stream = None;
    let resolved = addr
        .to_socket_addrs()
        .map_err(|_| SessionError::HostUnreachable { addr: addr.clone() })?;
    for candidate in resolved {
        match TcpStream::connect(candidate) {
            Ok(s) => {
                stream = Some(s);
                break;
            }
            Err(e) => last_err = Some(e),
        }
    }
    let stream = match (stream, last_err) {
        (Some(s), _) => s,
        (None, Some(e)) if e.kind() == io::ErrorKind::ConnectionRefused => {
            return Err(SessionError::ConnectionRefused { addr })
        }
        (None, Some(e)) if e.kind() == io::ErrorKind::TimedOut => {
            return Err(SessionError::Timeout)
        }
        (None, Some(e)) => return Err(SessionError::Io(e)),
        (None, None) => return Err(SessionError::HostUnreachable { addr }),
    };
    let mut conn = Connection::establish(stream, config.crc_policy, config.read_timeout)?;
    if config.send_capability {
        let body = Body::Capability(CapabilityBody::supported());
        let message = Message::new("", Timestamp::now(), body)?;
        conn.send_message(&message)?;
    }
    Ok(conn)
}

/// How far [`read_full`] got before stopping.
enum ReadStop {
    Complete,
    /// EOF before the first byte of the buffer.
    CleanEof,
    /// EOF after `got` of the wanted bytes.
    TruncatedEof {
        got: usize,
    },
    /// The configured read timeout elapsed after `got` bytes.
    TimedOut {
        got: usize,
    },
}

/// Reads exactly `buf.len()` bytes unless the stream ends or times out.
fn read_full(stream: &mut TcpStream, buf: &mut [u8]) -> Result<ReadStop, io::Error> {
    let mut got = 0;
    while got < buf.len() {
        match stream.read(&mut buf[got..]) {
            Ok(0) => {
                return Ok(if got == 0 {
                    ReadStop::CleanEof
                } else {
                    ReadStop::TruncatedEof { got }
                })
            }
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e)
                if e.kind() == io::ErrorKind::WouldBlock || e.kind() == io::ErrorKind::TimedOut =>
            {
                return Ok(ReadStop::TimedOut { got })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ReadStop::Complete)
}

impl Connection {
    fn establish(
        stream: TcpStream,
        crc_policy: CrcPolicy,
        read_timeout: Option<Duration>,
    ) -> Result<Self, SessionError> {
        // Pose streams are many small writes; leaving Nagle on would
        // batch them and wreck latency.
        stream.set_nodelay(true)?;
        stream.set_read_timeout(read_timeout)?;
        let peer = stream
            .peer_addr()
            .map(|a| a.to_string())
            .unwrap_or_else(|_| "unknown".to_string());
        Ok(Connection {
            stream,
            peer,
            crc_policy,
            counters: Arc::new(Counters::default()),
            observer: None,
        })
    }

    /// The peer's address as a display string.
    pub fn peer(&self) -> &str {
        &self.peer
    }

    /// A second handle to the same socket, sharing counters, so one
    /// thread can send while another receives. The observer stays with
    /// the original handle.
    pub fn try_clone(&self) -> Result<Connection, SessionError> {
        Ok(Connection {
            stream: self.stream.try_clone()?,
            peer: self.peer.clone(),
            crc_policy: self.crc_policy,
            counters: Arc::clone(&self.counters),
            observer: None,
        })
    }

    /// Registers the connection's observer, invoked exactly once per
    /// [`ReceiveOutcome`] in stream order (replacing any previous one).
    pub fn set_observer(&mut self, observer: ReceiveObserver) {
        self.observer = Some(observer);
    }

    /// Current counter values.
    pub fn stats(&self) -> SessionStats {
        SessionStats {
            messages_received: self.counters.messages_received.load(Ordering::SeqCst),
            messages_skipped: self.counters.messages_skipped.load(Ordering::SeqCst),
            crc_failures: self.counters.crc_failures.load(Ordering::SeqCst),
            crc_warnings: self.counters.crc_warnings.load(Ordering::SeqCst),
            messages_sent: self.counters.messages_sent.load(Ordering::SeqCst),
            bytes_received: self.counters.bytes_received.load(Ordering::SeqCst),
            bytes_sent: self.counters.bytes_sent.load(Ordering::SeqCst),
        }
    }

    /// Frames and writes `message` in one piece.
    ///
    /// The body is re-encoded and the header's `body_size`/`crc` fields
    /// recomputed from it, so a forwarded message is always
    /// self-consistent on the wire.
    pub fn send_message(&mut self, message: &Message) -> Result<(), SessionError> {
        let body = message.body.encode()?;
        let frame = frame_message(
            message.body.type_name(),
            &message.header.device_name,
            message.header.timestamp,
            &body,
        )?;
        self.send_raw(&frame)
    }

    /// Writes an already-framed message verbatim (capture replay, or
    /// deliberately malformed test traffic).
    pub fn send_frame(&mut self, frame: &[u8]) -> Result<(), SessionError> {
        self.send_raw(frame)
    }

    fn send_raw(&mut self, frame: &[u8]) -> Result<(), SessionError> {
        self.stream.write_all(frame).map_err(|e| match e.kind() {
            io::ErrorKind::BrokenPipe
            | io::ErrorKind::ConnectionReset
            | io::ErrorKind::ConnectionAborted => SessionError::ConnectionLost {
                context: format!("write to {}: {e}", self.peer),
            },
            _ => SessionError::Io(e),
        })?;
        self.counters.messages_sent.fetch_add(1, Ordering::SeqCst);
        self.counters
            .bytes_sent
            .fetch_add(frame.len() as u64, Ordering::SeqCst);
        Ok(())
    }

    /// Reads the next message: exactly 58 header bytes, then `body_size`
    /// body bytes.
    ///
    /// Content problems (unknown type, unsupported version, CRC mismatch,
    /// malformed body) consume the message and return a non-`Decoded`
    /// outcome with the connection still usable. A stream that ends or
    /// times out mid-message is [`SessionError::ProtocolDesync`]; a
    /// timeout on a boundary is [`SessionError::Timeout`].
    pub fn receive_message(&mut self) -> Result<ReceiveOutcome, SessionError> {
        let outcome = self.receive_inner()?;
        if let Some(observer) = self.observer.as_mut() {
            observer(&outcome);
        }
        Ok(outcome)
    }

    fn receive_inner(&mut self) -> Result<ReceiveOutcome, SessionError> {
        let mut header_buf = [0u8; HEADER_SIZE];
        match read_full(&mut self.stream, &mut header_buf).map_err(|e| self.read_error(e))? {
            ReadStop::Complete => {}
            ReadStop::CleanEof => return Ok(ReceiveOutcome::Closed),
            ReadStop::TruncatedEof { got } => {
                return Err(SessionError::ProtocolDesync {
                    context: format!("stream ended {got} bytes into a {HEADER_SIZE}-byte header"),
                })
            }
            ReadStop::TimedOut { got: 0 } => return Err(SessionError::Timeout),
            ReadStop::TimedOut { got } => {
                return Err(SessionError::ProtocolDesync {
                    context: format!("timed out {got} bytes into a {HEADER_SIZE}-byte header"),
                })
            }
        }
        self.counters
            .bytes_received
            .fetch_add(HEADER_SIZE as u64, Ordering::SeqCst);

        let header = decode_header_raw(&header_buf).map_err(|e| SessionError::ProtocolDesync {
            context: format!("unparseable header: {e}"),
        })?;
        if header.body_size > MAX_BODY_SIZE {
            return Err(SessionError::ProtocolDesync {
                context: format!("implausible body size {}", header.body_size),
            });
        }

        let mut body = vec![0u8; header.body_size as usize];
        if !body.is_empty() {
            match read_full(&mut self.stream, &mut body).map_err(|e| self.read_error(e))? {
                ReadStop::Complete => {}
                ReadStop::CleanEof => {
                    return Err(SessionError::ProtocolDesync {
                        context: format!(
                            "stream ended 0 bytes into a {}-byte body",
                            header.body_size
                        ),
                    })
                }
                ReadStop::TruncatedEof { got } => {
                    return Err(SessionError::ProtocolDesync {
                        context: format!(
                            "stream ended {got} bytes into a {}-byte body",
                            header.body_size
                        ),
                    })
                }
                ReadStop::TimedOut { got } => {
                    return Err(SessionError::ProtocolDesync {
                        context: format!(
                            "timed out {got} bytes into a {}-byte body",
                            header.body_size
                        ),
                    })
                }
            }
            self.counters
                .bytes_received
                .fetch_add(header.body_size, Ordering::SeqCst);
        }

        // From here on the full message is consumed, so every outcome
        // leaves the stream on a boundary.
        if header.version != PROTOCOL_VERSION {
            self.counters
                .messages_skipped
                .fetch_add(1, Ordering::SeqCst);
            return Ok(ReceiveOutcome::Skipped {
                type_name: header.type_name,
                body_size: header.body_size,
                reason: SkipReason::UnsupportedVersion {
                    version: header.version,
                },
            });
        }
        if !is_known_type(&header.type_name) {
            self.counters
                .messages_skipped
                .fetch_add(1, Ordering::SeqCst);
            return Ok(ReceiveOutcome::Skipped {
                type_name: header.type_name,
                body_size: header.body_size,
                reason: SkipReason::UnknownType,
            });
        }

        let computed_crc = crc64(&body);
        if computed_crc != header.crc {
            match self.crc_policy {
                CrcPolicy::Enforce => {
                    self.counters.crc_failures.fetch_add(1, Ordering::SeqCst);
                    return Ok(ReceiveOutcome::IntegrityFailure {
                        header,
                        computed_crc,
                    });
                }
                CrcPolicy::Warn => {
                    self.counters.crc_warnings.fetch_add(1, Ordering::SeqCst);
                }
            }
        }

        match Body::decode(&header.type_name, &body) {
            Ok(decoded) => {
                self.counters
                    .messages_received
                    .fetch_add(1, Ordering::SeqCst);
                Ok(ReceiveOutcome::Decoded(Message {
                    header,
                    body: decoded,
                }))
            }
            Err(error) => {
                self.counters
                    .messages_skipped
                    .fetch_add(1, Ordering::SeqCst);
                Ok(ReceiveOutcome::Skipped {
                    type_name: header.type_name,
                    body_size: header.body_size,
                    reason: SkipReason::MalformedBody { error },
                })
            }
        }
    }

    fn read_error(&self, e: io::Error) -> SessionError {
        match e.kind() {
            io::ErrorKind::ConnectionReset | io::ErrorKind::ConnectionAborted => {
                SessionError::ConnectionLost {
                    context: format!("read from {}: {e}", self.peer),
                }
            }
            _ => SessionError::Io(e),
        }
    }

    /// Shuts the socket down in both directions. Idempotent: closing an
    /// already-closed connection is not an error. The peer's next receive
    /// sees [`ReceiveOutcome::Closed`] if the stream sits on a message
    /// boundary, [`SessionError::ProtocolDesync`] otherwise.
    pub fn close(&self) {
        let _ = self.stream.shutdown(Shutdown::Both);
    }
}
