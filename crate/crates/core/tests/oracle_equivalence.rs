use jcas::oracle::{fast_vs_dense, majorization_chain_check};
use jcas::spectrum::{LagWeights, SymbolGrid};
use jcas::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SymbolGrid {
    let data = (0..n * m)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    SymbolGrid::from_stacked(n, m, data).unwrap()
}

#[test]
fn fast_path_matches_dense_small_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, m) in [(4, 1), (4, 2), (6, 2), (8, 1), (8, 2)] {
        for n_cp in [2, n / 2, n] {
            let w = LagWeights::cyclic_prefix(n, n_cp).unwrap();
            for p in [2, 3, 4, 8] {
                let x = random_grid(&mut rng, n, m);
                let rep = fast_vs_dense(&x, &w, p).unwrap();
                assert!(rep.worst() <= 1e-8, "N={n} M={m} N_CP={n_cp} p={p}: {rep:?}");
            }
        }
    }
}

#[test]
fn chain_holds_for_small_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, m, p) in [(8, 2, 2), (8, 2, 4), (6, 2, 8), (12, 2, 4)] {
        let w = LagWeights::cyclic_prefix(n, n / 2 + 1).unwrap();
        let x = random_grid(&mut rng, n, m);
        let rep = majorization_chain_check(&mut rng, &x, &w, p, 50, 1e-8).unwrap();
        assert_eq!(rep.passed, rep.trials, "N={n} M={m} p={p}: {rep:?}");
        assert!(rep.touch_error < 1e-9, "{rep:?}");
    }
}
