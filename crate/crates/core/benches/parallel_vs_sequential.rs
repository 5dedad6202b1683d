//! Parallel (rayon) against sequential execution of the data-parallel kernels.
//! Without the `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use horizon_pmp::catalog::{self, Instance, Multipliers, Params};
use horizon_pmp::exec::Exec;
use horizon_pmp::extremal::{self, ControlSampler, MaxConditionTolerances};
use horizon_pmp::horizonlab::{self, SwitchingOptions};
use horizon_pmp::sufficiency::{self, SufficiencyConfig};
use horizon_pmp::verify::{self, VerifyConfig};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn entry(name: &str) -> Instance {
    catalog::get(name, &Params::new()).expect("catalog entry")
}

fn max_condition(c: &mut Criterion) {
    let inst = entry("fishing");
    let cand = inst.reference.as_ref().unwrap();
    let Some(Multipliers::Pontryagin(pd)) = inst.multipliers.as_ref() else { unreachable!() };
    let tol = MaxConditionTolerances::default();
    let mut g = c.benchmark_group("max_condition_check/fishing");
    for (label, exec) in MODES {
        let sampler = ControlSampler::default().with_exec(exec);
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| extremal::max_condition_check(&inst.problem, cand, pd, &sampler, &tol).unwrap())
        });
    }
    g.finish();
}

fn concavity(c: &mut Criterion) {
    let inst = entry("regulator");
    let cand = inst.reference.as_ref().unwrap();
    let p = inst.multipliers.as_ref().unwrap().p();
    let mut g = c.benchmark_group("concavity_check/regulator");
    g.sample_size(10);
    for (label, exec) in MODES {
        let cfg = SufficiencyConfig { exec, sampler: ControlSampler::default().with_exec(exec), ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| sufficiency::concavity_check(&inst.problem, cand, &p, &cfg).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let pb = entry("truncation_pathology").problem;
    let horizons = [2.0, 4.0, 8.0, 16.0, 32.0];
    let opts = SwitchingOptions { switch_count: 3, resolution: 48, refine: true };
    let mut g = c.benchmark_group("truncation_sweep/pathology");
    for (label, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| horizonlab::truncation_sweep(&pb, black_box(&horizons), &opts, exec).unwrap())
        });
    }
    g.finish();
}

fn full_verification(c: &mut Criterion) {
    let inst = entry("nash_player1");
    let mut g = c.benchmark_group("verify/nash_player1");
    g.sample_size(10);
    for (label, exec) in MODES {
        let cfg = VerifyConfig { suites: verify::designated_suites(&inst.meta), exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(|| verify::verify_entry(&inst, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, max_condition, concavity, sweep, full_verification);
criterion_main!(benches);
