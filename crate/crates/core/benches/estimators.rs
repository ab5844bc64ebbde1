//! Single worker against the full rayon pool on the main estimators.
//!
//! Build with `--no-default-features` to bench the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vdlab::lab::{self, VerifyConfig};
use vdlab::sphere::mean_width;
use vdlab::volumetrics::{grinberg_functional, volume_rejection};
use vdlab::{Body, RngStream};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sizes = vec![1];
    if all > 1 {
        sizes.push(all);
    }
    sizes
        .into_iter()
        .map(|w| (format!("{w}w"), rayon::ThreadPoolBuilder::new().num_threads(w).build().unwrap()))
        .collect()
}

fn estimators(c: &mut Criterion) {
    let cube = Body::cube(8).unwrap();
    let lp = Body::lp_ball(5, 3.0, 1.0).unwrap();
    let mut g = c.benchmark_group("estimators");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("mean_width", &name), |b| {
            b.iter(|| pool.install(|| mean_width(&cube, 200_000, RngStream::new(1, 0)).unwrap()))
        });
        g.bench_function(BenchmarkId::new("volume_rejection", &name), |b| {
            b.iter(|| pool.install(|| volume_rejection(&lp, 200_000, RngStream::new(2, 0)).unwrap()))
        });
        g.bench_function(BenchmarkId::new("grinberg", &name), |b| {
            b.iter(|| pool.install(|| grinberg_functional(&lp, 2, 256, 1000, RngStream::new(3, 0)).unwrap()))
        });
    }
    g.finish();
}

fn verify(c: &mut Criterion) {
    let k = Body::cube(4).unwrap();
    let l = Body::ball(4, 0.8).unwrap();
    let cfg = VerifyConfig::default().with_frames(512).with_samples(20_000).with_stream(RngStream::new(4, 0));
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("section_upper", &name), |b| {
            b.iter(|| pool.install(|| lab::verify_section_upper(&k, &l, 1, None, &cfg).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, estimators, verify);
criterion_main!(benches);
