//! Stream-transform throughput, sequential path vs rayon path.
//!
//! Run with `cargo bench -p rbpbo`; build with `--no-default-features`
//! to bench the sequential fallback alone.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use rbpbo::bitcore::IterationParams;
use rbpbo::codec::{decrypt_stream_serial, encrypt_stream_serial};
use rbpbo::keying::derive_key;

const KIB: usize = 1024;
const MIB: usize = 1024 * 1024;

fn deterministic_bytes(len: usize) -> Vec<u8> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    (0..len)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 56) as u8
        })
        .collect()
}

fn stream_benches(c: &mut Criterion) {
    let params = IterationParams::default();
    let mut group = c.benchmark_group("stream");
    for size in [256 * KIB, MIB, 4 * MIB] {
        let data = deterministic_bytes(size);
        let key = derive_key(size as u64 * 8, params).unwrap();
        let cipher = encrypt_stream_serial(&data, &key).unwrap();
        group.throughput(Throughput::Bytes(size as u64));

        group.bench_with_input(BenchmarkId::new("encrypt_serial", size), &size, |b, _| {
            b.iter(|| encrypt_stream_serial(black_box(&data), &key).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decrypt_serial", size), &size, |b, _| {
            b.iter(|| decrypt_stream_serial(black_box(&cipher), &key).unwrap())
        });

        #[cfg(feature = "parallel")]
        {
            use rbpbo::codec::{decrypt_stream, encrypt_stream};
            group.bench_with_input(
                BenchmarkId::new("encrypt_parallel", size),
                &size,
                |b, _| b.iter(|| encrypt_stream(black_box(&data), &key).unwrap()),
            );
            group.bench_with_input(
                BenchmarkId::new("decrypt_parallel", size),
                &size,
                |b, _| b.iter(|| decrypt_stream(black_box(&cipher), &key).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, stream_benches);
criterion_main!(benches);
