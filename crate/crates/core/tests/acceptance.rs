//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::f64::consts::SQRT_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bellscope::analytic::{alpha_max_chsh, chsh_form_value, chsh_max_violation_d3, rank_one_measurements, VectorPair4};
use bellscope::catalog::{load_catalog, lookup, verify_appendix, APPENDIX_ENTRIES};
use bellscope::inequality::{includes, relabeling_canonical_form, BellInequality, Party, Transform};
use bellscope::quantum::{
    correlations, isotropic_state, transform_measurements, violation, CorrelationVector, DensityMatrix,
};
use bellscope::seesaw::{multi_restart_max, random_start, restart_rng, seesaw, RankPolicy, SeesawConfig};
use bellscope::threshold::{alpha_max, SearchConfig, SearchStatus};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ineq(name: &str) -> BellInequality {
    lookup(name).unwrap().inequality
}

fn appendix_crossings() -> Check {
    let mut worst: f64 = 0.0;
    for name in APPENDIX_ENTRIES {
        let r = verify_appendix(name).map_err(|e| e.to_string())?;
        let delta = r.delta.ok_or(format!("{name}: no reference value"))?;
        ensure(r.v0 < 0.0 && r.v1 > 0.0, format!("{name}: v0 = {}, v1 = {}", r.v0, r.v1))?;
        ensure(delta < 1e-4, format!("{name}: crossing {} vs {:?}", r.crossing, r.table_value))?;
        worst = worst.max(delta);
    }
    Ok(format!("max |crossing - reference| = {worst:.2e}"))
}

fn analytic_chsh() -> Check {
    let t = alpha_max_chsh(3).map_err(|e| e.to_string())?;
    ensure((t - 0.7629742793).abs() < 1e-9, format!("alpha_max_chsh(3) = {t}"))?;
    let v = VectorPair4::optimal(3).unwrap();
    let f = chsh_form_value(&v).unwrap();
    ensure((f - (SQRT_2 - 1.0) / 3.0).abs() < 1e-9, format!("form value {f}"))?;

    let chsh = ineq("CHSH");
    let (a, b) = rank_one_measurements(&v).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let alpha: f64 = rng.gen();
        let trace = violation(&chsh, &isotropic_state(3, alpha).unwrap(), &a, &b).unwrap().max(0.0);
        let curve = chsh_max_violation_d3(alpha).unwrap();
        worst = worst.max((trace - curve).abs());
    }
    ensure(worst < 1e-9, format!("curve vs trace differ by {worst:e}"))?;
    Ok(format!("alpha_max = {t:.10}, curve/trace gap {worst:.1e}"))
}

fn threshold_reproduction() -> Check {
    let mut cfg = SearchConfig::default();
    cfg.seesaw.base_seed = 2024;
    let mut notes = Vec::new();
    let mut failures = Vec::new();

    let t = Instant::now();
    let q = alpha_max(&ineq("CHSH"), 2, &cfg).map_err(|e| e.to_string())?;
    if (q.alpha_upper - 0.70711).abs() >= 5e-4 {
        failures.push(format!("CHSH d=2: {}", q.alpha_upper));
    }
    notes.push(format!("CHSH/2 {:.6}", q.alpha_upper));

    for name in ["CHSH", "I3322", "A5", "A8", "A27", "A28", "A56"] {
        let e = lookup(name).unwrap();
        let reference = e.table_alpha_max().unwrap();
        let est = alpha_max(&e.inequality, 3, &cfg).map_err(|e| e.to_string())?;
        if est.status != SearchStatus::Bracketed || (est.alpha_upper - reference).abs() >= 1e-3 {
            failures.push(format!("{name} d=3: {} vs {reference}", est.alpha_upper));
        }
        notes.push(format!("{name}/3 {:.6}", est.alpha_upper));
    }

    let mut lowest = (String::new(), f64::INFINITY);
    for e in load_catalog() {
        let est = alpha_max(&e.inequality, 2, &cfg).map_err(|e| e.to_string())?;
        if est.alpha_upper < lowest.1 {
            lowest = (e.name.clone(), est.alpha_upper);
        }
    }
    if lowest.1 < 0.70711 - 1e-3 {
        failures.push(format!("{} has d=2 threshold {}", lowest.0, lowest.1));
    }
    notes.push(format!("lowest d=2 {} {:.6}", lowest.0, lowest.1));
    notes.push(format!("{:.0}s", t.elapsed().as_secs_f64()));
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(notes.join(", "))
}

fn combinatorial_exactness() -> Check {
    ensure(includes(&ineq("I3322"), &ineq("CHSH")).is_some(), "I3322 should include CHSH")?;
    ensure(includes(&ineq("I4422_1"), &ineq("CHSH")).is_none(), "I4422_1 should not include CHSH")?;
    ensure(includes(&ineq("I4422_2"), &ineq("CHSH")).is_none(), "I4422_2 should not include CHSH")?;
    for e in load_catalog() {
        let c = e.inequality.classical_max().map_err(|e| e.to_string())?;
        ensure(c == e.inequality.bound(), format!("{}: classical max {c} vs bound {}", e.name, e.inequality.bound()))?;
    }
    let chsh = ineq("CHSH");
    let mut classes = BTreeSet::new();
    for mask in 0..16u32 {
        let mut x = chsh.clone();
        for (bit, (party, k)) in [(Party::A, 0), (Party::A, 1), (Party::B, 0), (Party::B, 1)].into_iter().enumerate() {
            if mask >> bit & 1 == 1 {
                x = x.flip_outcome(party, k).unwrap();
            }
        }
        classes.insert(relabeling_canonical_form(&x).key());
    }
    ensure(classes.len() == 2, format!("{} relabeling classes among switched CHSH variants", classes.len()))?;
    Ok("inclusions, 10 classical bounds, 16 switchings -> 2 classes".into())
}

fn xor_forms() -> Check {
    let with: BTreeSet<&str> = ["CHSH", "I3322", "A5", "A8", "A27", "A28", "A56"]
        .into_iter()
        .filter(|n| ineq(n).xor_game_form().is_some())
        .collect();
    let want: BTreeSet<&str> = ["CHSH", "A8"].into_iter().collect();
    ensure(with == want, format!("XOR form found for {with:?}"))?;
    Ok(format!("XOR form exactly for {with:?}"))
}

fn frechet_ok(q: &CorrelationVector) -> bool {
    q.satisfies_frechet(1e-10)
}

fn property_suites() -> Check {
    let a5 = ineq("A5");
    let rho = isotropic_state(3, 0.8).unwrap();
    let cfg = SeesawConfig::default();

    // monotone see-saw runs, and Fréchet bounds on everything they produce
    let mut checked = 0;
    for k in 0..100 {
        let mut rng = restart_rng(99, k);
        let (a, b) = random_start(&a5, 3, RankPolicy::Uniform, &mut rng).unwrap();
        ensure(frechet_ok(&correlations(&rho, &a, &b).unwrap()), "Fréchet bound fails at a random start")?;
        let r = seesaw(&a5, &rho, &a, &b, &cfg).unwrap();
        for w in r.history.windows(2) {
            ensure(w[1] >= w[0] - 1e-12, format!("run {k}: objective fell from {} to {}", w[0], w[1]))?;
        }
        ensure(frechet_ok(&correlations(&rho, &r.best_a, &r.best_b).unwrap()), "Fréchet bound fails at an optimum")?;
        checked += 2;
    }

    // affine in α
    let mut rng = restart_rng(100, 0);
    let (a, b) = random_start(&a5, 3, RankPolicy::Uniform, &mut rng).unwrap();
    let at = |alpha: f64| violation(&a5, &isotropic_state(3, alpha).unwrap(), &a, &b).unwrap();
    let gap = (at(0.6) - 0.5 * (at(0.3) + at(0.9))).abs();
    ensure(gap < 1e-10, format!("affine defect {gap:e}"))?;

    // transform covariance
    let t = Transform {
        swap_parties: true,
        perm_a: vec![2, 0, 3, 1],
        perm_b: vec![1, 3, 0, 2],
        flip_a: vec![true, false, false, true],
        flip_b: vec![false, true, true, false],
    };
    let mixed = isotropic_state(3, 0.55).unwrap();
    // a state that is not swap-symmetric, so the swap actually matters
    let asym = {
        let mut r2 = restart_rng(101, 0);
        let (x, y) = random_start(&a5, 3, RankPolicy::Fixed(1), &mut r2).unwrap();
        let op = &mixed.op().scale(0.5) + &x.effects()[0].op().kron(y.effects()[1].op()).scale(0.5);
        DensityMatrix::new(3, op).unwrap()
    };
    let mut worst: f64 = 0.0;
    for state in [&mixed, &asym] {
        let before = violation(&a5, state, &a, &b).unwrap();
        let (ta, tb) = transform_measurements(&t, &a, &b).unwrap();
        let after = violation(&t.apply(&a5).unwrap(), &state.swapped(), &ta, &tb).unwrap();
        worst = worst.max((before - after).abs());
    }
    ensure(worst < 1e-10, format!("covariance defect {worst:e}"))?;

    // determinism across pool sizes
    let search = SeesawConfig {
        restarts: 64,
        base_seed: 5,
        ..SeesawConfig::default()
    };
    let rho8 = isotropic_state(3, 0.77).unwrap();
    let a8 = ineq("A8");
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| multi_restart_max(&a8, &rho8, &search).unwrap())
    };
    let (one, eight) = (run(1), run(8));
    ensure(
        one.best_violation.to_bits() == eight.best_violation.to_bits() && one.restart_index == eight.restart_index,
        format!("1 thread {} vs 8 threads {}", one.best_violation, eight.best_violation),
    )?;
    Ok(format!(
        "100 monotone runs, {checked} Fréchet checks, affine gap {gap:.1e}, covariance gap {worst:.1e}, 1 vs 8 threads identical"
    ))
}

fn boundary_smoke() -> Check {
    let i3322 = ineq("I3322");
    let cfg = SeesawConfig {
        restarts: 1000,
        base_seed: 7,
        ..SeesawConfig::default()
    };
    let above = multi_restart_max(&i3322, &isotropic_state(3, 0.764).unwrap(), &cfg).unwrap();
    let below = multi_restart_max(&i3322, &isotropic_state(3, 0.76).unwrap(), &cfg).unwrap();
    ensure(above.best_violation > 1e-13, format!("no violation at 0.764 ({:e})", above.best_violation))?;
    ensure(below.best_violation <= 1e-13, format!("violation {:e} at 0.76", below.best_violation))?;
    let again = violation(&i3322, &isotropic_state(3, 0.764).unwrap(), &above.best_a, &above.best_b).unwrap();
    ensure((again - above.best_violation).abs() < 1e-10, "witness does not re-evaluate")?;
    Ok(format!(
        "I3322: {:.3e} at 0.764, {:.1e} at 0.76",
        above.best_violation, below.best_violation
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("1 appendix crossings", appendix_crossings),
        ("2 analytic CHSH d=3", analytic_chsh),
        ("3 stochastic thresholds", threshold_reproduction),
        ("4 combinatorial exactness", combinatorial_exactness),
        ("5 XOR-form criterion", xor_forms),
        ("6 property suites", property_suites),
        ("7 boundary smoke test", boundary_smoke),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
