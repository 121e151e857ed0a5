use bbj_core::stdlib::sample;
use bbj_core::{Assembler, BitIo, Machine, RunLimits, WordSpec};
use criterion::{criterion_group, criterion_main, Criterion};

fn run_sample(c: &mut Criterion) {
    let mut g = c.benchmark_group("run");
    g.sample_size(10);
    for name in ["hello", "printnum"] {
        let s = sample(name).unwrap();
        let obj = Assembler::new(WordSpec::new(32).unwrap()).assemble_str(s.source).unwrap().object;
        g.bench_function(name, |b| {
            b.iter(|| {
                let limits = RunLimits::default();
                let mut m = Machine::load(&obj, &limits).unwrap();
                let mut io = BitIo::new(&[][..], Vec::new());
                m.run(&mut io, &limits).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, run_sample);
criterion_main!(benches);
