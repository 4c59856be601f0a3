//! Wall-clock cost of one majorization versus N and M, next to the cost of
//! M^2 plain FFTs of the same length.

use std::f64::consts::PI;
use std::time::Instant;

use jcas::majorizer::Majorizer;
use jcas::spectrum::{LagWeights, SymbolGrid, Transform};
use jcas::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn median_secs(reps: usize, mut f: impl FnMut()) -> f64 {
    let mut t: Vec<f64> = (0..reps)
        .map(|_| {
            let t0 = Instant::now();
            f();
            t0.elapsed().as_secs_f64()
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[reps / 2]
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    println!("N,M,majorize_ms,m2_fft_ms,ratio");
    for m in [2usize, 4, 8] {
        for n in [128usize, 256, 512, 1024] {
            let maj = Majorizer::new(n, LagWeights::cyclic_prefix(n, n / 4).unwrap(), 50).unwrap();
            let x = SymbolGrid::from_stacked(
                n,
                m,
                (0..n * m)
                    .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
                    .collect(),
            )
            .unwrap();
            let reps = (40_000 / (n * m)).max(7);
            let t_maj = median_secs(reps, || {
                std::hint::black_box(maj.majorize(&x).unwrap());
            });
            let tr = Transform::new(n);
            let mut buf = x.column(0).to_vec();
            let t_fft = median_secs(reps, || {
                for _ in 0..m * m {
                    tr.forward(&mut buf);
                }
                std::hint::black_box(&buf);
            });
            println!("{n},{m},{:.4},{:.4},{:.1}", t_maj * 1e3, t_fft * 1e3, t_maj / t_fft);
        }
    }
}
