use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use virwhit::exact::Rational;
use virwhit::forms::{WhittakerType, WhittakerType1N};
use virwhit::universal::{lemma_suite, search_whittaker, Ansatz};
use virwhit::verma::{VermaContext, VermaModule};

fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

/// Runs `job` on the global pool and on a single-thread pool.
fn compare<F: Fn() + Sync>(c: &mut Criterion, name: &str, job: F) {
    let single = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("threads", "all"), |b| b.iter(&job));
    group.bench_function(BenchmarkId::new("threads", 1), |b| {
        b.iter(|| single.install(&job))
    });
    group.finish();
}

fn gram(c: &mut Criterion) {
    let ctx = VermaContext::new(rational(11, 3), rational(2, 7));
    compare(c, "gram_level_8", || {
        VermaModule::new(ctx.clone()).gram(8);
    });
}

fn search(c: &mut Criterion) {
    let ty = WhittakerType::Pair(WhittakerType1N::new(4, rational(2, 5), rational(-3, 1)).unwrap());
    let ansatz = Ansatz::nontrivial_level0(&ty, 6);
    compare(c, "search_n4_length_6", || {
        search_whittaker(&ty, &Rational::zero(), &ansatz, &ty).unwrap();
    });
}

fn lemmas(c: &mut Criterion) {
    compare(c, "lemma_suite_20", || {
        assert!(lemma_suite(0, 20).passed);
    });
}

criterion_group!(benches, gram, search, lemmas);
criterion_main!(benches);
