use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use lspine::sample::{random_patch, valley_path};
use lspine::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seed(orders: &[usize], k: usize) -> MarkedGraph {
    MarkedGraph::seed(Context::standard(FactorSignature::cyclic(orders, k).unwrap()).unwrap()).unwrap()
}

fn norms(c: &mut Criterion) {
    let start = seed(&[2, 3], 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let patches: Vec<MarkedGraph> = (0..32).map(|_| random_patch(&start, 6, 80, &mut rng)).collect();
    c.bench_function("norm/32 patches at (2,2)", |b| {
        b.iter(|| patches.iter().map(|m| m.norm().unwrap()).sum::<u64>())
    });
    c.bench_function("star graph/32 patches at (2,2)", |b| {
        b.iter(|| patches.iter().map(|m| m.star_graph().component_count()).sum::<usize>())
    });
}

fn balls(c: &mut Criterion) {
    let mut g = c.benchmark_group("explore_ball");
    g.sample_size(10);
    for (orders, k, slack) in [(vec![2, 2, 2], 0, 16), (vec![2, 2], 1, 6), (vec![2, 2, 2, 2], 0, 10)] {
        let s = seed(&orders, k);
        let r = s.norm().unwrap() + slack;
        g.bench_function(format!("{orders:?};{k} radius {r}"), |b| {
            b.iter(|| explore_ball(black_box(&s), r, &BallConfig::default()).unwrap().patches.len())
        });
    }
    g.finish();
}

fn push(c: &mut Criterion) {
    let s = seed(&[2, 2, 2, 2], 0);
    let k = 24;
    let ball = explore_ball(&s, k, &BallConfig { with_c: true, ..BallConfig::default() }).unwrap();
    let nk = ball.n_r.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let paths: Vec<_> = (0..4).map(|i| valley_path(&ball.patches[i], nk, &mut rng).unwrap()).collect();
    let mut g = c.benchmark_group("push_outside_ball");
    g.sample_size(10);
    g.bench_function("4 valley paths at (4,0), k = 24", |b| {
        b.iter_batched(
            || paths.clone(),
            |ps| ps.iter().map(|p| push_outside_ball(p, k).unwrap().2.eliminations.len()).sum::<usize>(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn presentation(c: &mut Criterion) {
    let (a, b) = (FiniteGroupTable::cyclic(2).unwrap(), FiniteGroupTable::cyclic(3).unwrap());
    let mut g = c.benchmark_group("catalog");
    g.sample_size(10);
    g.bench_function("Z/2 * Z/3 * Z", |bch| bch.iter(|| catalog_report(&a, &b).unwrap().all_pass()));
    g.finish();
}

criterion_group!(benches, norms, balls, push, presentation);
criterion_main!(benches);
