//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach stdout.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dmt_cgra::bench::{
    baselines, cdf_at, extras, prepare, suite, sweep, throughput_ratio, verify, verify_mapped, BenchCase, PUBLISHED_FRACTION_AT_16,
};
use dmt_cgra::mapper::{cascade_plan, GridConfig};
use dmt_cgra::sim::SimOptions;
use dmt_cgra::stats::EnergyModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn loads(case: &BenchCase, array: &str) -> Result<u64, String> {
    let v = verify(case, &GridConfig::default(), 1, &SimOptions::default()).map_err(|e| e.to_string())?;
    ensure(v.passed(), format!("{}: {}", v.case, v.failures.join("; ")))?;
    Ok(v.stats.memory.per_array_loads[array])
}

fn oracle_equivalence() -> Outcome {
    let limit = Duration::from_secs(10);
    let mut slowest = Duration::ZERO;
    for case in suite() {
        for seed in [1, 2, 3] {
            let start = Instant::now();
            let v = verify(&case, &GridConfig::default(), seed, &SimOptions { seed: Some(seed), ..Default::default() })
                .map_err(|e| format!("{}: {e}", case.name()))?;
            let took = start.elapsed();
            ensure(v.passed(), format!("{} seed {seed}: {}", v.case, v.failures.join("; ")))?;
            ensure(took < limit, format!("{} seed {seed} took {took:?}", v.case))?;
            slowest = slowest.max(took);
        }
    }
    Ok(format!("{} cases x 3 seeds match their oracles, slowest run {:.2?}", suite().len(), slowest))
}

fn matmul_traffic() -> Outcome {
    let mut notes = Vec::new();
    for (n, k, m) in [(8, 8, 8), (16, 16, 16)] {
        let fwd = BenchCase::Matmul { n, k, m, naive: false };
        let naive = BenchCase::Matmul { n, k, m, naive: true };
        let (a, b) = (loads(&fwd, "A")?, loads(&fwd, "B")?);
        let (na, nb) = (loads(&naive, "A")?, loads(&naive, "B")?);
        ensure(a == (n * k) as u64 && b == (k * m) as u64, format!("{n}x{k}x{m}: forwarded loads A={a} B={b}"))?;
        ensure(na == (n * k * m) as u64 && nb == (n * k * m) as u64, format!("{n}x{k}x{m}: naive loads A={na} B={nb}"))?;
        notes.push(format!("{n}x{k}x{m} A {a} vs {na}, B {b} vs {nb}"));
    }
    Ok(notes.join("; "))
}

fn convolution_traffic() -> Outcome {
    let n = 256;
    let fwd = loads(&BenchCase::Convolution { n, naive: false }, "x")?;
    let naive = loads(&BenchCase::Convolution { n, naive: true }, "x")?;
    ensure(fwd == n as u64, format!("forwarded image loads {fwd}"))?;
    ensure(naive == 3 * n as u64 - 2, format!("naive image loads {naive}"))?;
    Ok(format!("image loads {fwd} vs {naive} (n = {n})"))
}

fn cascade_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let delta: i64 = rng.random_range(1..=5000) * if rng.random_bool(0.5) { 1 } else { -1 };
        let b: usize = rng.random_range(1..=64);
        let p = cascade_plan(delta, b);
        let total = delta.unsigned_abs() as usize;
        ensure(p.len() == total.div_ceil(b), format!("({delta},{b}): {} stages", p.len()))?;
        ensure(p.segment_deltas.iter().sum::<usize>() == total, format!("({delta},{b}): wrong sum"))?;
        ensure(p.segment_deltas.iter().all(|&s| s >= 1 && s <= b), format!("({delta},{b}): segment above B"))?;
    }
    let p = cascade_plan(18, 16);
    ensure(p.segment_deltas == vec![16, 2], format!("(18,16) gave {:?}", p.segment_deltas))?;
    Ok("1000 random pairs hold; (18,16) -> [16, 2]".into())
}

fn determinism() -> Outcome {
    let mut runs = 0;
    for case in suite().into_iter().chain(baselines()) {
        let (mapped, grid) = prepare(&case, &GridConfig::default()).map_err(|e| e.to_string())?;
        let reference = verify_mapped(&case, &mapped, &grid, 7, &SimOptions::default()).map_err(|e| e.to_string())?;
        ensure(reference.passed(), format!("{}: {}", reference.case, reference.failures.join("; ")))?;
        for seed in 0..10 {
            for limit in [Some(1), Some(32), None] {
                let opts = SimOptions { seed: Some(seed), issue_limit: limit, ..Default::default() };
                let v = verify_mapped(&case, &mapped, &grid, 7, &opts).map_err(|e| e.to_string())?;
                let same = v.arrays.iter().all(|(k, a)| {
                    let r = &reference.arrays[k];
                    a.len() == r.len() && a.iter().zip(r).all(|(x, y)| x.bit_eq(*y))
                });
                ensure(same, format!("{} differs at scheduler seed {seed}, issue limit {limit:?}", case.name()))?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs bit-identical across 10 seeds and issue limits 1, 32, unlimited"))
}

fn throughput() -> Outcome {
    let t = throughput_ratio(&GridConfig::default(), [512, 2048], 32).map_err(|e| e.to_string())?;
    let steady = t.steady();
    ensure(steady >= 4.0, format!("steady-state ratio {steady:.3}"))?;
    Ok(format!("steady-state ratio {steady:.3} (ideal 140/32 = 4.375), whole-run ratio {:.3} at {} threads", t.raw(), t.threads[1]))
}

fn window_semantics() -> Outcome {
    let case = BenchCase::WindowScan { n: 12, window: 4 };
    let v = verify(&case, &GridConfig::default(), 1, &SimOptions::default()).map_err(|e| e.to_string())?;
    ensure(v.passed(), v.failures.join("; "))?;
    let s = &v.stats;
    ensure(s.constant_injections == 3, format!("{} constant injections", s.constant_injections))?;
    ensure(s.boundary_drops == 3, format!("{} boundary drops", s.boundary_drops))?;
    ensure(s.audit_balanced(), "token audit does not balance")?;
    Ok("3 constants injected, 3 boundary tokens dropped, audit balanced".into())
}

fn eldst_reuse() -> Outcome {
    let case = BenchCase::Broadcast { n: 12, window: 6, delta: 2 };
    let v = verify(&case, &GridConfig::default(), 1, &SimOptions::default()).map_err(|e| e.to_string())?;
    ensure(v.passed(), v.failures.join("; "))?;
    let h = &v.stats.reuse_histogram;
    ensure(h.len() == 1 && h.get("3") == Some(&4), format!("reuse histogram {h:?}"))?;
    Ok("4 loads, each value consumed by exactly 3 threads".into())
}

fn capacity_safety() -> Outcome {
    let case = extras().into_iter().find(|c| matches!(c, BenchCase::Shift { .. })).expect("bundled");
    let grid = GridConfig::default();
    let mut peak = 0;
    for limit in [None, Some(1)] {
        let opts = SimOptions { issue_limit: limit, ..Default::default() };
        let v = verify(&case, &grid, 1, &opts).map_err(|e| e.to_string())?;
        ensure(v.passed(), v.failures.join("; "))?;
        ensure(v.stats.max_buffer_occupancy <= grid.token_buffer_capacity, format!("occupancy {}", v.stats.max_buffer_occupancy))?;
        peak = peak.max(v.stats.max_buffer_occupancy);
    }
    Ok(format!("{} terminates; peak buffer occupancy {peak} of {}", case.name(), grid.token_buffer_capacity))
}

fn delta_cdf() -> Outcome {
    let r = sweep(&suite(), &[], 1, &EnergyModel::default()).map_err(|e| e.to_string())?;
    ensure(r.cdf.last().map(|l| l.1) == Some(1.0), "CDF does not reach 1")?;
    Ok(format!(
        "CDF at delta 16 = {:.3} over {} distinct deltas; published figure {:.2} (observational)",
        cdf_at(&r.cdf, 16),
        r.cdf.len(),
        PUBLISHED_FRACTION_AT_16
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("functional oracle equivalence", oracle_equivalence),
        ("matmul traffic reduction", matmul_traffic),
        ("convolution traffic reduction", convolution_traffic),
        ("cascade formula", cascade_formula),
        ("determinism and confluence", determinism),
        ("throughput bound", throughput),
        ("window semantics", window_semantics),
        ("eLDST reuse", eldst_reuse),
        ("capacity safety and backpressure", capacity_safety),
        ("delta CDF report", delta_cdf),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
