//! Quantize / offload / dequantize pipeline cost at projection dims.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tmm_bench::device_state;
use tmm_core::{calibrate, qkv_project, quantize, F32Matrix, QuantizedLinear};

fn bench_quantize(c: &mut Criterion) {
    let x = F32Matrix::random(64, 768, 3).unwrap();
    let params = calibrate(&x).unwrap();
    c.bench_function("quantize_64x768", |bench| {
        bench.iter(|| quantize(black_box(&x), black_box(&params)))
    });
}

fn bench_qkv(c: &mut Criterion) {
    let mut group = c.benchmark_group("qkv_project");
    group.sample_size(10);
    let x = F32Matrix::random(64, 768, 4).unwrap();
    let layers: Vec<QuantizedLinear> = (0..3)
        .map(|i| {
            let w = F32Matrix::random(768, 768, 5 + i).unwrap();
            QuantizedLinear::from_f32(&w, None).unwrap()
        })
        .collect();
    let mut state = device_state(32);
    group.bench_function("seq64_hidden768", |bench| {
        bench.iter(|| {
            qkv_project(
                black_box(&x),
                &layers[0],
                &layers[1],
                &layers[2],
                &mut state,
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_quantize, bench_qkv);
criterion_main!(benches);
