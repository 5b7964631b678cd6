use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use flowkit::curation::{
    sample_diverse, score_pairs, CurationConfig, MagnitudeRange, PairingPolicy,
};
use flowkit::media::decode_gif;
use flowkit::synth::{translating_texture_clip, Texture};
use flowkit::{flow_magnitude, warp_image, FeatureMap, FlowField, FlowParams};
use flowkit_bench::{gray_ramp_gif, spread_pairs};

fn flow(c: &mut Criterion) {
    let tex = Texture::new(1);
    let a = tex.render(128, 128, 0.0, 0.0);
    let b = tex.render(128, 128, 4.5, -2.0);
    let params = FlowParams::default();
    c.bench_function("flow_magnitude 128x128", |bench| {
        bench.iter(|| flow_magnitude(black_box(&a), black_box(&b), &params).unwrap())
    });

    let clip = translating_texture_clip("bench", 2, 16, 96, (1.5, 0.5));
    let cfg = CurationConfig {
        pairing_policy: PairingPolicy::AllPairs,
        ..Default::default()
    };
    c.bench_function("score_pairs 16 frames all pairs", |bench| {
        bench.iter(|| score_pairs(black_box(&clip), &cfg).unwrap())
    });
}

fn warp(c: &mut Criterion) {
    let img = FeatureMap::from_color(&Texture::new(3).render_color(256, 256, 0.0, 0.0));
    let u = (0..256 * 256)
        .map(|i| ((i % 17) as f64 - 8.0) * 0.37)
        .collect();
    let v = (0..256 * 256)
        .map(|i| ((i % 13) as f64 - 6.0) * 0.41)
        .collect();
    let field = FlowField::new(256, 256, u, v).unwrap();
    c.bench_function("warp_image 3x256x256", |bench| {
        bench.iter(|| warp_image(black_box(&img), black_box(&field)).unwrap())
    });
}

fn gif(c: &mut Criterion) {
    let bytes = gray_ramp_gif(128, 16);
    c.bench_function("decode_gif 16x128x128", |bench| {
        bench.iter(|| decode_gif(black_box(&bytes)).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let pairs = spread_pairs(5000, 2.0, 20.0);
    let range = MagnitudeRange::new(2.0, 20.0).unwrap();
    c.bench_function("sample_diverse 5000 -> 10", |bench| {
        bench.iter(|| sample_diverse(black_box(&pairs), 10, range, 42, "clip"))
    });
}

criterion_group!(benches, flow, warp, gif, sampling);
criterion_main!(benches);
