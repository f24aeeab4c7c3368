//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! fails the test binary if any criterion fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use marathon_deficit::de::{
    crossover, differential_donor, mutate, run, CandidateVector, DifferentialEvolution, RunReport,
    SolverConfig, TerminatedBy,
};
use marathon_deficit::duration::{
    format_duration, format_table_duration, parse_duration, Deciseconds,
};
use marathon_deficit::fixture;
use marathon_deficit::problem::{apply_plan, total_time, DeficitProblem, SavingsPlan};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ds(v: &[u64]) -> Vec<Deciseconds> {
    v.iter().copied().map(Deciseconds).collect()
}

/// Predicted paces as printed in the published results table.
const PUBLISHED_PREDICTED: [&str; 43] = [
    "04:03.80", "04:03.60", "04:05.90", "04:08.50", "04:15.00", "04:04.30", "04:09.70", "04:11.20",
    "04:07.80", "04:10.30", "04:10.00", "04:07.00", "04:07.30", "04:09.70", "04:07.90", "04:12.70",
    "04:07.30", "04:13.00", "04:06.40", "04:13.60", "04:03.00", "04:06.40", "04:08.30", "04:08.50",
    "04:21.20", "04:08.40", "04:04.30", "04:03.80", "04:22.80", "04:14.40", "04:09.30", "04:10.30",
    "04:10.80", "04:11.00", "04:18.60", "04:31.90", "04:27.80", "04:33.90", "04:34.60", "04:43.70",
    "04:53.70", "04:52.40", "01:45.30",
];

fn fixture_totals() -> Outcome {
    let start = Instant::now();
    let splits = fixture::splits();
    let problem = fixture::problem();
    let plan = fixture::table_plan().plan();
    let predicted = apply_plan(&splits, &plan).map_err(|e| e.to_string())?;
    let actual_total = total_time(&splits).map_err(|e| e.to_string())?;
    let predicted_total = total_time(&predicted).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    ensure(
        format_table_duration(actual_total) == "03:01:09.40"
            && actual_total == Deciseconds(108_694),
        format!("actual total {}", format_table_duration(actual_total)),
    )?;
    ensure(
        format_table_duration(predicted_total) == "02:59:59.40"
            && predicted_total == Deciseconds(107_994),
        format!("predicted total {}", format_table_duration(predicted_total)),
    )?;
    ensure(
        plan.total() == Deciseconds(700),
        format!("plan sum {}", plan.total().get()),
    )?;
    ensure(
        problem.total_capacity() == Deciseconds(820),
        format!("capacity sum {}", problem.total_capacity().get()),
    )?;
    ensure(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "actual 03:01:09.40, predicted 02:59:59.40, plan 700 ds, capacity 820 ds in {elapsed:?}"
    ))
}

fn case_study_runs() -> Outcome {
    let problem = fixture::problem();
    let mut quota_runs = 0;
    let mut slowest = Duration::ZERO;
    let mut plans = 0;
    for seed in 0..20u64 {
        let start = Instant::now();
        let result =
            run(&SolverConfig::default().with_seed(seed), &problem).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        if result.terminated_by == TerminatedBy::FeasibleQuota {
            quota_runs += 1;
        }
        for plan in result.archive.plans() {
            plans += 1;
            ensure(
                plan.total() == Deciseconds(700),
                format!("seed {seed}: archived plan sums to {}", plan.total().get()),
            )?;
            ensure(
                plan.savings.len() == 43
                    && plan
                        .savings
                        .iter()
                        .zip(problem.capacities())
                        .all(|(s, c)| s <= c),
                format!("seed {seed}: archived plan exceeds a capacity"),
            )?;
        }
    }
    ensure(
        quota_runs >= 18,
        format!("only {quota_runs}/20 seeds reached the quota"),
    )?;
    ensure(
        slowest < Duration::from_secs(5),
        format!("slowest seed took {slowest:?}"),
    )?;
    Ok(format!("{quota_runs}/20 seeds hit the quota, {plans} archived plans all sound, slowest {slowest:?}"))
}

fn oracle_equivalence() -> Outcome {
    // brute force: every integer allocation (a, b, 0) with a ≤ 20, b ≤ 40
    let mut feasible = BTreeSet::new();
    for a in 0..=20u64 {
        for b in 0..=40u64 {
            if a + b == 30 {
                feasible.insert(SavingsPlan::new(ds(&[a, b, 0])));
            }
        }
    }
    ensure(
        feasible.len() == 21,
        format!("oracle found {} plans", feasible.len()),
    )?;

    let problem =
        DeficitProblem::new(Deciseconds(30), ds(&[20, 40, 0])).map_err(|e| e.to_string())?;
    let mut union = BTreeSet::new();
    for seed in 0..50u64 {
        let result =
            run(&SolverConfig::default().with_seed(seed), &problem).map_err(|e| e.to_string())?;
        for plan in result.archive.plans() {
            ensure(
                feasible.contains(plan),
                format!("seed {seed}: plan {:?} not in the oracle set", plan.savings),
            )?;
            union.insert(plan.clone());
        }
    }
    let coverage = union.len() as f64 / feasible.len() as f64;
    ensure(
        coverage >= 0.9,
        format!("coverage {:.1}%", coverage * 100.0),
    )?;
    Ok(format!(
        "all plans in oracle set, coverage {}/{}",
        union.len(),
        feasible.len()
    ))
}

fn row_arithmetic() -> Outcome {
    let splits = fixture::splits();
    let plan = fixture::table_plan().plan();
    let predicted = apply_plan(&splits, &plan).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (j, published) in PUBLISHED_PREDICTED.iter().enumerate() {
        let expected = parse_duration(published).map_err(|e| e.to_string())?;
        ensure(
            predicted[j].pace == expected,
            format!(
                "km {}: got {}, published {published}",
                j + 1,
                format_table_duration(predicted[j].pace)
            ),
        )?;
        if plan.savings[j] > Deciseconds::ZERO {
            checked += 1;
        }
    }
    ensure(
        format_table_duration(predicted[1].pace) == "04:03.60"
            && format_table_duration(predicted[24].pace) == "04:21.20",
        "rows 2 and 25",
    )?;
    Ok(format!(
        "{checked} nonzero rows reproduce the published predicted pace"
    ))
}

fn determinism() -> Outcome {
    let problem = fixture::problem();
    let config = SolverConfig::default().with_seed(2012);
    let report = || -> Result<String, String> {
        let r = run(&config, &problem).map_err(|e| e.to_string())?;
        serde_json::to_string(&RunReport::new(&config, &problem, &r)).map_err(|e| e.to_string())
    };
    let (a, b) = (report()?, report()?);
    ensure(a == b, "run reports differ")?;
    Ok(format!("identical run-report JSON ({} bytes)", a.len()))
}

fn invariant_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);

    // mapping monotonicity and range
    for case in 0..1000 {
        let n = rng.gen_range(1..=43);
        let caps: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=60)).collect();
        let problem = DeficitProblem::new(Deciseconds(0), ds(&caps)).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let j = rng.gen_range(0..n);
        let mut y = x.clone();
        y[j] = rng.gen_range(x[j]..=1.0);
        let px = problem
            .map_decision(&CandidateVector::new(x).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let py = problem
            .map_decision(&CandidateVector::new(y).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ensure(
            px.savings[j] <= py.savings[j],
            format!("mapping not monotone in case {case}"),
        )?;
        ensure(
            px.savings.iter().zip(&caps).all(|(s, c)| s.get() <= *c),
            format!("mapping out of range in case {case}"),
        )?;
    }

    // clamp guarantee after mutation
    for case in 0..1000 {
        let np = rng.gen_range(4..=20);
        let n = rng.gen_range(1..=10);
        let pop: Vec<CandidateVector> = (0..np)
            .map(|_| CandidateVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap())
            .collect();
        let f = rng.gen_range(0.01..=2.0);
        let target = rng.gen_range(0..np);
        let donor = mutate(&pop, target, f, &mut rng).map_err(|e| e.to_string())?;
        ensure(
            donor.coords().iter().all(|c| (0.0..=1.0).contains(c)),
            format!("donor left the unit box in case {case}"),
        )?;
    }
    let clamped = differential_donor(
        &CandidateVector::new(vec![0.9]).unwrap(),
        &CandidateVector::new(vec![0.9]).unwrap(),
        &CandidateVector::new(vec![0.1]).unwrap(),
        0.5,
    )
    .map_err(|e| e.to_string())?;
    ensure(clamped.coords() == [1.0], "raw 1.3 not clamped to 1.0")?;

    // elitism over 200 generations on the case study
    let problem = fixture::problem();
    let config = SolverConfig {
        max_evaluations: 100 + 200 * 100,
        feasible_hits_to_stop: u64::MAX,
        seed: 7,
        ..SolverConfig::default()
    };
    let mut solver = DifferentialEvolution::new(config, &problem).map_err(|e| e.to_string())?;
    let mut best = solver.best_fitness().value;
    for generation in 1..=200 {
        solver.step();
        ensure(solver.population().len() == 100, "population size changed")?;
        let now = solver.best_fitness().value;
        ensure(
            now <= best,
            format!("best fitness rose at generation {generation}"),
        )?;
        best = now;
    }
    ensure(
        solver.generations() == 200,
        format!("{} generations", solver.generations()),
    )?;
    ensure(
        solver.evaluations() == 20_100,
        format!("{} evaluations", solver.evaluations()),
    )?;

    // crossover always keeps a donor coordinate
    for case in 0..1000 {
        let n = rng.gen_range(1..=43);
        let target: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.5)).collect();
        let donor: Vec<f64> = target
            .iter()
            .map(|t| t + rng.gen_range(0.01..0.5))
            .collect();
        let cr = if case % 4 == 0 { 0.0 } else { rng.gen::<f64>() };
        let t = CandidateVector::new(target).unwrap();
        let trial = crossover(&t, &CandidateVector::new(donor).unwrap(), cr, &mut rng)
            .map_err(|e| e.to_string())?;
        ensure(trial != t, format!("trial equals target in case {case}"))?;
    }

    // duration round-trip on a sampled grid
    let mut grid = 0;
    for v in (0..=999_999u64).step_by(3) {
        let d = Deciseconds(v);
        let back = parse_duration(&format_duration(d)).map_err(|e| e.to_string())?;
        ensure(back == d, format!("round-trip failed at {v}"))?;
        grid += 1;
    }
    Ok(format!(
        "mapping 1000, clamp 1000, elitism 200 generations, crossover 1000, duration grid {grid}"
    ))
}

fn solvability_gate() -> Outcome {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let output = Command::new(env!("CARGO_BIN_EXE_deficit"))
        .args([
            "run",
            "--splits",
            &format!("{data}/three_hearts_2012_splits.csv"),
            "--bounds",
            &format!("{data}/three_hearts_2012_bounds.csv"),
            "--deficit-ds",
            "830",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&output.stderr);
    ensure(
        output.status.code() == Some(1),
        format!("exit code {:?}", output.status.code()),
    )?;
    ensure(
        stderr.contains("unsolvable")
            && stderr.contains("820 ds")
            && stderr.contains("830 ds")
            && stderr.contains("capacities must add up to at least the deficit"),
        format!("unexpected message: {stderr}"),
    )?;
    ensure(
        output.stdout.is_empty(),
        "report printed for an unsolvable problem",
    )?;
    Ok(format!("exit 1: {}", stderr.trim()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 fixture totals", fixture_totals),
        ("2 case-study solver runs", case_study_runs),
        ("3 brute-force oracle equivalence", oracle_equivalence),
        ("4 row-level arithmetic", row_arithmetic),
        ("5 determinism", determinism),
        ("6 invariant suites", invariant_suites),
        ("7 solvability gate", solvability_gate),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
