//! Micro-benchmarks for the codec hot paths: CRC, header codec, whole
//! frames, and pose conversions. These are the per-message costs a
//! streaming deployment pays at frame rate, so regressions here translate
//! directly into added latency.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use igtl_core::{
    crc64, decode_header, encode_header, frame_message, parse_frame, quaternion_to_rotation,
    rotation_to_quaternion, Body, Message, Timestamp, TransformBody,
};

/// A representative pose message: what a tracker emits every frame.
fn pose_message() -> Message {
    Message::new(
        "Tracker",
        Timestamp {
            seconds: 1_700_000_000,
            fraction: 0x8000_0000,
        },
        Body::Transform(TransformBody {
            rotation: [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [50.0, 25.0, 10.0],
        }),
    )
    .expect("static pose message is valid")
}

/// CRC-64 throughput at a pose-body size and at image-chunk sizes.
pub fn bench_crc(c: &mut Criterion) {
    let mut group = c.benchmark_group("crc64");
    for size in [48usize, 1 << 10, 64 << 10] {
        let data: Vec<u8> = (0..size).map(|i| i as u8).collect();
        group.throughput(Throughput::Bytes(size as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &data, |b, data| {
            b.iter(|| crc64(black_box(data)))
        });
    }
    group.finish();
}

/// Encode and decode of the fixed 58-byte header.
pub fn bench_header(c: &mut Criterion) {
    let header = pose_message().header;
    let encoded = encode_header(&header).unwrap();
    c.bench_function("header/encode", |b| {
        b.iter(|| encode_header(black_box(&header)).unwrap())
    });
    c.bench_function("header/decode", |b| {
        b.iter(|| decode_header(black_box(&encoded)).unwrap())
    });
}

/// Whole-frame cost: what send and receive each pay per pose message.
pub fn bench_frame(c: &mut Criterion) {
    let message = pose_message();
    let body = message.body.encode().unwrap();
    let frame = frame_message(
        message.body.type_name(),
        &message.header.device_name,
        message.header.timestamp,
        &body,
    )
    .unwrap();
    c.bench_function("frame/build_transform", |b| {
        b.iter(|| {
            frame_message(
                black_box("TRANSFORM"),
                black_box("Tracker"),
                black_box(message.header.timestamp),
                black_box(&body),
            )
            .unwrap()
        })
    });
    c.bench_function("frame/parse_transform", |b| {
        b.iter(|| {
            let (header, body) = parse_frame(black_box(&frame)).unwrap();
            Body::decode(&header.type_name, body).unwrap()
        })
    });
}

/// Quaternion/matrix conversions used when bridging POSITION and
/// TRANSFORM streams.
pub fn bench_pose(c: &mut Criterion) {
    // 120 degrees about a diagonal axis: all matrix entries non-trivial.
    let axis = 3f64.sqrt().recip();
    let half = 60f64.to_radians();
    let q = [
        axis * half.sin(),
        axis * half.sin(),
        axis * half.sin(),
        half.cos(),
    ];
    let rotation = quaternion_to_rotation(q).unwrap();
    c.bench_function("pose/quaternion_to_rotation", |b| {
        b.iter(|| quaternion_to_rotation(black_box(q)).unwrap())
    });
    c.bench_function("pose/rotation_to_quaternion", |b| {
        b.iter(|| rotation_to_quaternion(black_box(rotation)).unwrap())
    });
}

/// Registers every group on one Criterion instance.
pub fn benchmarks(c: &mut Criterion) {
    bench_crc(c);
    bench_header(c);
    bench_frame(c);
    bench_pose(c);
}
