//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! The optional PSPLib check reads `PSP1.SCH`, `PSP4.SCH` and `PSP13.SCH`
//! from `$ROBSCHED_PSPLIB_DIR`, or from `tests/data/psplib` in this crate.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution as _, Normal};

use robsched::generate::{fixture_suite, generate_instance, GeneratorConfig};
use robsched::grid::{run_grid, GridSpec, Variant};
use robsched::io::parse_progen_max;
use robsched::montecarlo::{evaluate_pos, EvaluationConfig};
use robsched::rng::{derive_seed, seeded, stream};
use robsched::rules::{
    chebyshev_factor, gnla_max_multi, gnla_max_pair, gnla_tournament, group_pairs, pos_fitness, robust_fitness,
    segregated_moments, sla_form_moments, sla_max, sla_sum, Distribution, GroupingPlan, MomentPair, Operand, Rule,
    SegregatedLinearForm,
};
use robsched::search::{robust_local_search, validate_trace, Region, SearchConfig};
use robsched::{check_schedule, Activity, Instance, Pos, Problem, Schedule};

const SEED: u64 = 20_240_601;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> std::result::Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

/// Two unit-demand activities of durations 3 and 2 on one resource.
fn two_activity(capacity: u32, sigma: f64) -> Instance {
    let mut inst = Instance {
        activities: vec![
            Activity::dummy(0, 1),
            Activity { id: 1, mean_duration: 3.0, sigma: 0.0, demands: vec![1] },
            Activity { id: 2, mean_duration: 2.0, sigma: 0.0, demands: vec![1] },
            Activity::dummy(3, 1),
        ],
        capacities: vec![capacity],
        constraints: vec![],
    };
    inst.set_uniform_sigma(sigma);
    inst
}

/// Sample mean and variance with their standard errors.
struct Sampled {
    mean: f64,
    var: f64,
    se_mean: f64,
    se_var: f64,
}

fn sample_stats(xs: &[f64]) -> Sampled {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = sq.iter().sum::<f64>() / n;
    let var_of_sq = sq.iter().map(|s| (s - var).powi(2)).sum::<f64>() / n;
    Sampled { mean, var, se_mean: (var / n).sqrt(), se_var: (var_of_sq / n).sqrt() }
}

fn dominates(bound: MomentPair, s: &Sampled) -> bool {
    bound.mean >= s.mean - 3.0 * s.se_mean && bound.var >= s.var - 3.0 * s.se_var
}

fn closed_form_values() -> Check {
    let start = Instant::now();
    let m = segregated_moments(Distribution::Normal, 1.0).map_err(|e| e.to_string())?;
    let mu = 1.0 / (2.0 * PI).sqrt();
    let var = 0.5 - 1.0 / (2.0 * PI);
    ensure((m.mu - 0.398942).abs() < 1e-6 && (m.mu - mu).abs() < 1e-12, || format!("mu {}", m.mu))?;
    ensure((m.var_p - 0.340845).abs() < 1e-6 && (m.var_p - var).abs() < 1e-12, || format!("var {}", m.var_p))?;
    let k = chebyshev_factor(0.1).map_err(|e| e.to_string())?;
    ensure(k == 3.0, || format!("factor {k}"))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!("mu={:.6} var={:.6} factor(0.1)={k}", m.mu, m.var_p))
}

fn pairing_objective(sigmas: &[f64], plan: &GroupingPlan) -> f64 {
    plan.couples
        .iter()
        .filter(|c| c.len() == 2)
        .map(|c| sigmas[c[0]] * sigmas[c[1]])
        .sum()
}

/// Best objective over every way to pair up `rest` (one singleton if odd).
fn best_pairing(sigmas: &[f64], rest: &[usize]) -> f64 {
    match rest {
        [] | [_] => 0.0,
        [first, tail @ ..] => {
            let mut best = f64::NEG_INFINITY;
            for (i, &partner) in tail.iter().enumerate() {
                let mut remaining: Vec<usize> = tail.to_vec();
                remaining.remove(i);
                best = best.max(sigmas[*first] * sigmas[partner] + best_pairing(sigmas, &remaining));
            }
            if rest.len() % 2 == 1 {
                // `first` may be the singleton.
                best = best.max(best_pairing(sigmas, tail));
            }
            best
        }
    }
}

fn grouping_is_optimal() -> Check {
    let start = Instant::now();
    let mut rng = seeded(derive_seed(SEED, 2));
    let mut cases = 0;
    for k in 1..=8 {
        for _ in 0..50 {
            let vars: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..4.0)).collect();
            let sigmas: Vec<f64> = vars.iter().map(|v| v.sqrt()).collect();
            let got = pairing_objective(&sigmas, &group_pairs(&vars));
            let idx: Vec<usize> = (0..k).collect();
            let best = best_pairing(&sigmas, &idx);
            ensure(got >= best - 1e-12, || format!("k={k} vars={vars:?}: {got} < {best}"))?;
            cases += 1;
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("{cases} variance vectors, k=1..8, grouping always optimal"))
}

const MC_SAMPLES: usize = 1_000_000;

fn normals(sigmas: &[f64]) -> Vec<Normal<f64>> {
    sigmas.iter().map(|&s| Normal::new(0.0, s).unwrap()).collect()
}

fn bounds_dominate_sampled_moments() -> Check {
    let start = Instant::now();
    let grid = [0.1, 0.5, 1.0, 2.0];
    let mut checks = 0;

    for (i, &sa) in grid.iter().enumerate() {
        for (j, &sb) in grid.iter().enumerate() {
            let mut rng = stream(derive_seed(SEED, 3), (i * 4 + j) as u64);
            let d = normals(&[sa, sb]);
            let xs: Vec<f64> = (0..MC_SAMPLES).map(|_| d[0].sample(&mut rng).max(d[1].sample(&mut rng))).collect();
            let s = sample_stats(&xs);
            let (a, b) = (MomentPair::new(0.0, sa * sa), MomentPair::new(0.0, sb * sb));
            for leaf in [Some((sa, sb)), None] {
                let bound = gnla_max_pair(a, b, leaf).map_err(|e| e.to_string())?;
                ensure(dominates(bound, &s), || {
                    format!("pair σ=({sa},{sb}) leaf={}: bound {bound:?} vs E={} Var={}", leaf.is_some(), s.mean, s.var)
                })?;
                checks += 1;
            }
        }
    }

    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for k in [2usize, 3, 4, 8] {
        for &s in &grid {
            vectors.push(vec![s; k]);
        }
        vectors.push((0..k).map(|i| grid[i % 4]).collect());
    }
    for (vi, sigmas) in vectors.iter().enumerate() {
        let k = sigmas.len();
        let d = normals(sigmas);
        let mut rng = stream(derive_seed(SEED, 33), vi as u64);
        let mut maxes = Vec::with_capacity(MC_SAMPLES);
        let mut sums = Vec::with_capacity(MC_SAMPLES);
        for _ in 0..MC_SAMPLES {
            let (mut mx, mut sum) = (f64::NEG_INFINITY, 0.0);
            for dist in &d {
                let z = dist.sample(&mut rng);
                mx = mx.max(z);
                sum += z;
            }
            maxes.push(mx);
            sums.push(sum);
        }
        let smax = sample_stats(&maxes);
        let ssum = sample_stats(&sums);

        let leaves: Vec<MomentPair> = sigmas.iter().map(|s| MomentPair::new(0.0, s * s)).collect();
        let gnla = gnla_max_multi(&leaves, Some(sigmas)).map_err(|e| e.to_string())?;
        ensure(dominates(gnla, &smax), || {
            format!("gnla max σ={sigmas:?}: {gnla:?} vs E={} Var={}", smax.mean, smax.var)
        })?;

        let moments: Vec<_> = sigmas.iter().map(|&s| segregated_moments(Distribution::Normal, s).unwrap()).collect();
        let forms: Vec<SegregatedLinearForm> = (0..k).map(|i| SegregatedLinearForm::duration(i, 0.0)).collect();
        let sla_mx = sla_form_moments(&sla_max(&forms).map_err(|e| e.to_string())?, &moments).map_err(|e| e.to_string())?;
        ensure(dominates(sla_mx, &smax), || {
            format!("sla max σ={sigmas:?}: {sla_mx:?} vs E={} Var={}", smax.mean, smax.var)
        })?;
        let sla_total = sla_form_moments(&sla_sum(&forms, 0.0), &moments).map_err(|e| e.to_string())?;
        ensure(dominates(sla_total, &ssum), || {
            format!("sla sum σ={sigmas:?}: {sla_total:?} vs E={} Var={}", ssum.mean, ssum.var)
        })?;
        checks += 3;
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("{checks} bounds checked against {MC_SAMPLES} samples each, no violations"))
}

fn max_of_two_normals() -> Check {
    let mut rng = stream(derive_seed(SEED, 4), 0);
    let d: Normal<f64> = Normal::new(0.0, 1.0).unwrap();
    let mean = (0..MC_SAMPLES).map(|_| d.sample(&mut rng).max(d.sample(&mut rng))).sum::<f64>() / MC_SAMPLES as f64;
    let exact = 1.0 / PI.sqrt();
    ensure(((mean - exact) / exact).abs() < 0.01, || format!("E[max]={mean}, expected {exact}"))?;
    let z = MomentPair::new(0.0, 1.0);
    let bound = gnla_max_pair(z, z, Some((1.0, 1.0))).map_err(|e| e.to_string())?.mean;
    ensure((bound - 0.5f64.sqrt()).abs() < 1e-12 && bound > mean, || format!("bound {bound}"))?;
    Ok(format!("E[max]={mean:.5} (1/sqrt(pi)={exact:.5}), bound {bound:.5}"))
}

fn sorted_grouping_never_loses() -> Check {
    let mut rng = seeded(derive_seed(SEED, 5));
    let epsilons = [0.01, 0.05, 0.1, 0.2];
    // Index pairings other than the variance-sorted one, for σ sorted
    // descending.
    let alternatives = [
        GroupingPlan { couples: vec![vec![0, 3], vec![1, 2]] },
        GroupingPlan { couples: vec![vec![0, 2], vec![1, 3]] },
    ];
    let mut comparisons = 0;
    let mut strict = 0;
    for _ in 0..100 {
        let mut sigmas: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..3.0)).collect();
        sigmas.sort_by(|a, b| b.total_cmp(a));
        let ops: Vec<Operand> = sigmas
            .iter()
            .map(|&s| Operand { moments: MomentPair::new(0.0, s * s), normal_sigma: Some(s) })
            .collect();
        let heu = gnla_tournament(&ops, group_pairs).map_err(|e| e.to_string())?;
        for alt in &alternatives {
            let mut first = true;
            let ran = gnla_tournament(&ops, |vars: &[f64]| {
                if std::mem::take(&mut first) {
                    alt.clone()
                } else {
                    group_pairs(vars)
                }
            })
            .map_err(|e| e.to_string())?;
            for &eps in &epsilons {
                let fh = robust_fitness(heu, eps).map_err(|e| e.to_string())?;
                let fr = robust_fitness(ran, eps).map_err(|e| e.to_string())?;
                ensure(fh <= fr + 1e-12, || format!("σ={sigmas:?} ε={eps}: heuristic {fh} > other {fr}"))?;
                comparisons += 1;
                if fh < fr - 1e-12 {
                    strict += 1;
                }
            }
        }
    }
    Ok(format!("{comparisons} comparisons, heuristic never worse ({strict} strictly better)"))
}

fn rule_crossover() -> Check {
    let problem = Problem::new(two_activity(2, 1.0)).map_err(|e| e.to_string())?;
    let pos = Pos::assemble(&problem, vec![vec![vec![1], vec![2]]]).compile().map_err(|e| e.to_string())?;
    let fit = |rule, eps| pos_fitness(rule, &pos, problem.instance(), eps).map_err(|e: robsched::Error| e.to_string());

    // Independent closed forms for max(3 + Z1, 2 + Z2), Z ~ N(0, 1).
    let gnla = MomentPair::new(3.0 + 0.5f64.sqrt(), 2.0 * (1.0 - 1.0 / PI) - 2.0 / PI);
    let sla = MomentPair::new(3.0 + 2.0 / (2.0 * PI).sqrt(), 1.0 - 1.0 / PI);
    let closed = |m: MomentPair, eps: f64| m.mean + ((1.0 - eps) / eps).sqrt() * m.var.sqrt();

    let mut detail = Vec::new();
    for eps in [0.2, 0.01] {
        let (g, s) = (fit(Rule::Gnla, eps)?, fit(Rule::Sla, eps)?);
        ensure((g - closed(gnla, eps)).abs() < 1e-4, || format!("gnla ε={eps}: {g} vs {}", closed(gnla, eps)))?;
        ensure((s - closed(sla, eps)).abs() < 1e-4, || format!("sla ε={eps}: {s} vs {}", closed(sla, eps)))?;
        detail.push(format!("ε={eps}: gnla {g:.5} sla {s:.5}"));
    }
    let (g2, s2) = (fit(Rule::Gnla, 0.2)?, fit(Rule::Sla, 0.2)?);
    let (g01, s01) = (fit(Rule::Gnla, 0.01)?, fit(Rule::Sla, 0.01)?);
    ensure(g2 < s2, || format!("at ε=0.2 gnla {g2} >= sla {s2}"))?;
    ensure(s01 < g01, || format!("at ε=0.01 sla {s01} >= gnla {g01}"))?;
    Ok(detail.join(", "))
}

/// A solved POS from the coverage runs, kept for the linearization check.
struct Solved {
    instance: Instance,
    pos: Pos,
}

fn robust_makespan_coverage(solved: &mut Vec<Solved>) -> Check {
    let start = Instant::now();
    let n = 10_000;
    let mut worst_margin = f64::INFINITY;
    let mut runs = 0;
    for (i, base) in fixture_suite(20, SEED).into_iter().enumerate() {
        for sigma in [0.5, 1.0] {
            let mut inst = base.clone();
            inst.set_uniform_sigma(sigma);
            let problem = Problem::new(inst.clone()).map_err(|e| e.to_string())?;
            for eps in [0.05, 0.1, 0.2] {
                for rule in [Rule::Sla, Rule::Gnla] {
                    let config = SearchConfig { rule, epsilon: eps, seed: derive_seed(SEED, i as u64), ..SearchConfig::default() };
                    let result = robust_local_search(&problem, &config).map_err(|e| e.to_string())?;
                    let (Some(pos), Some(bound)) = (result.pos, result.robust_makespan) else {
                        return Err(format!("fixture {i}: no feasible list"));
                    };
                    let cfg = EvaluationConfig { samples: n, epsilon: eps, seed: derive_seed(SEED, 7), lower_bound: None };
                    let (report, _) = evaluate_pos(&pos, &inst, bound, &cfg).map_err(|e| e.to_string())?;
                    let limit = eps + 3.0 * (eps * (1.0 - eps) / n as f64).sqrt();
                    ensure(report.violation_rate <= limit, || {
                        format!("fixture {i} σ={sigma} ε={eps} {rule}: rate {} > {limit}", report.violation_rate)
                    })?;
                    worst_margin = worst_margin.min(limit - report.violation_rate);
                    solved.push(Solved { instance: inst.clone(), pos });
                    runs += 1;
                }
            }
        }
    }
    within(start.elapsed(), 300.0)?;
    Ok(format!("{runs} solved POS, smallest margin below the limit {worst_margin:.4}"))
}

fn exhaustive_optimum(inst: &Instance) -> f64 {
    let durations = inst.nominal_durations();
    let horizon: usize = durations.iter().map(|d| d.ceil() as usize).sum();
    let mut best = f64::INFINITY;
    for s1 in 0..=horizon {
        for s2 in 0..=horizon {
            let mut starts = vec![0.0, s1 as f64, s2 as f64, 0.0];
            starts[3] = (s1 as f64 + durations[1]).max(s2 as f64 + durations[2]);
            let report = check_schedule(inst, &Schedule::new(starts), &durations);
            if report.ok() {
                best = best.min(report.makespan);
            }
        }
    }
    best
}

fn deterministic_optima() -> Check {
    let mut detail = Vec::new();
    for (capacity, name) in [(1, "T1"), (2, "T2")] {
        let inst = two_activity(capacity, 0.0);
        let oracle = exhaustive_optimum(&inst);
        let problem = Problem::new(inst).map_err(|e| e.to_string())?;
        for rule in [Rule::Sla, Rule::Gnla] {
            let config = SearchConfig { rule, seed: SEED, ..SearchConfig::default() };
            let got = robust_local_search(&problem, &config).map_err(|e| e.to_string())?.robust_makespan;
            ensure(got == Some(oracle), || format!("{name} {rule}: {got:?} vs optimum {oracle}"))?;
        }
        detail.push(format!("{name}={oracle}"));
    }
    Ok(format!("{} for both rules", detail.join(", ")))
}

fn linearizations_are_feasible(solved: &[Solved]) -> Check {
    ensure(!solved.is_empty(), || "no POS from the coverage runs".into())?;
    let mut checked = 0;
    for (i, s) in solved.iter().enumerate() {
        let compiled = s.pos.compile().map_err(|e| e.to_string())?;
        let nominal = s.instance.nominal_durations();
        let mut rng = stream(derive_seed(SEED, 9), i as u64);
        for _ in 0..1000 {
            let schedule = compiled.sample_consistent_schedule(&nominal, &mut rng, 3);
            let report = check_schedule(&s.instance, &schedule, &nominal);
            ensure(report.ok(), || format!("POS {i}: {report:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} linearizations of {} POS, all feasible", solved.len()))
}

fn bench_trends() -> Check {
    let instances: Vec<(String, Instance)> = fixture_suite(20, SEED)
        .into_iter()
        .enumerate()
        .map(|(i, inst)| (format!("fixture{i:02}"), inst))
        .collect();
    let sigmas = [0.1, 0.5, 1.0, 2.0];
    let epsilons = [0.05, 0.1, 0.15, 0.2];
    let spec = GridSpec {
        variants: vec![Variant::Sla, Variant::Gnla],
        sigmas: sigmas.to_vec(),
        epsilons: epsilons.to_vec(),
        repeats: 2,
        base: SearchConfig { seed: SEED, ..SearchConfig::default() },
        timing: false,
    };
    let (_, aggregates) = run_grid(&instances, &spec).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for variant in [Variant::Sla, Variant::Gnla] {
        let cell = |sigma: f64, eps: f64| -> std::result::Result<f64, String> {
            let values: Vec<f64> = aggregates
                .iter()
                .filter(|a| a.variant == variant && a.sigma == sigma && a.epsilon == eps)
                .map(|a| a.mean_robust_makespan.ok_or_else(|| format!("{} has no feasible run", a.instance)))
                .collect::<std::result::Result<_, _>>()?;
            Ok(values.iter().sum::<f64>() / values.len() as f64)
        };
        for &sigma in &sigmas {
            for w in epsilons.windows(2) {
                let (a, b) = (cell(sigma, w[0])?, cell(sigma, w[1])?);
                ensure(b < a, || format!("{variant} σ={sigma}: F*(ε={})={b} not below F*(ε={})={a}", w[1], w[0]))?;
            }
        }
        for &eps in &epsilons {
            for w in sigmas.windows(2) {
                let (a, b) = (cell(w[0], eps)?, cell(w[1], eps)?);
                ensure(b > a, || format!("{variant} ε={eps}: F*(σ={})={b} not above F*(σ={})={a}", w[1], w[0]))?;
            }
        }
        detail.push(format!(
            "{variant} F* from {:.2} (σ=0.1, ε=0.2) to {:.2} (σ=2, ε=0.05)",
            cell(0.1, 0.2)?,
            cell(2.0, 0.05)?
        ));
    }
    Ok(detail.join("; "))
}

fn trace_replay() -> Check {
    let mut fixtures = fixture_suite(3, derive_seed(SEED, 11));
    for s in 0..2 {
        let config = GeneratorConfig { activities: 8, precedence_density: 0.3, max_lag_probability: 0.5, ..GeneratorConfig::default() };
        fixtures.push(generate_instance(&config, &mut seeded(derive_seed(SEED, 110 + s))));
    }
    let (mut steps, mut infeasible_steps, mut escapes) = (0, 0, 0);
    for (i, mut inst) in fixtures.into_iter().enumerate() {
        inst.set_uniform_sigma(1.0);
        let problem = Problem::new(inst).map_err(|e| e.to_string())?;
        for seed in 0..5 {
            let config = SearchConfig {
                seed,
                max_iterations: 500,
                generation: robsched::GenerationConfig { retries: 5, strict: true },
                record_trace: true,
                ..SearchConfig::default()
            };
            let result = robust_local_search(&problem, &config).map_err(|e| e.to_string())?;
            validate_trace(&result.trace, config.escape_probability).map_err(|e| format!("fixture {i} seed {seed}: {e}"))?;
            ensure(result.trace.len() == result.iterations_used, || "trace length".into())?;
            steps += result.trace.len();
            infeasible_steps += result.trace.iter().filter(|s| s.region == Region::I).count();
            escapes += result.trace.iter().filter(|s| s.escape_draw.is_some() && s.accepted).count();
        }
    }
    Ok(format!("25 traces, {steps} steps ({infeasible_steps} from infeasible lists, {escapes} escapes) replay exactly"))
}

fn runtime_envelope() -> Check {
    let inst = fixture_suite(7, SEED).pop().expect("seven fixtures");
    ensure(inst.real_count() == 10, || format!("fixture has {} activities", inst.real_count()))?;
    let mut inst = inst;
    inst.set_uniform_sigma(1.0);
    let problem = Problem::new(inst).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for rule in [Rule::Sla, Rule::Gnla] {
        let start = Instant::now();
        let config = SearchConfig { rule, max_iterations: 1000, seed: SEED, ..SearchConfig::default() };
        robust_local_search(&problem, &config).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        within(elapsed, 10.0)?;
        detail.push(format!("{rule} {:.3}s", elapsed.as_secs_f64()));
    }
    Ok(format!("1000 iterations on 10 activities: {}", detail.join(", ")))
}

fn psplib_dir() -> PathBuf {
    std::env::var_os("ROBSCHED_PSPLIB_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/psplib"))
}

fn find_file(dir: &std::path::Path, name: &str) -> Option<PathBuf> {
    std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .find(|p| p.file_name().and_then(|f| f.to_str()).is_some_and(|f| f.eq_ignore_ascii_case(name)))
}

/// `Ok(None)` when the files are missing.
fn psplib_infeasibility() -> std::result::Result<Option<String>, String> {
    let dir = psplib_dir();
    let targets = [("PSP1.SCH", 0.18), ("PSP4.SCH", 0.17), ("PSP13.SCH", 0.001)];
    let Some(paths) = targets.iter().map(|(f, _)| find_file(&dir, f)).collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let mut detail = Vec::new();
    for (path, (name, expected)) in paths.iter().zip(targets) {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let mut inst = parse_progen_max(&text).map_err(|e| e.to_string())?;
        inst.set_uniform_sigma(1.0);
        let problem = Problem::new(inst.clone()).map_err(|e| e.to_string())?;
        let config = SearchConfig { rule: Rule::Sla, seed: SEED, ..SearchConfig::default() };
        let result = robust_local_search(&problem, &config).map_err(|e| e.to_string())?;
        let (Some(pos), Some(bound)) = (result.pos, result.robust_makespan) else {
            return Err(format!("{name}: no feasible list"));
        };
        let cfg = EvaluationConfig { samples: 1000, epsilon: 0.1, seed: SEED, lower_bound: None };
        let (report, _) = evaluate_pos(&pos, &inst, bound, &cfg).map_err(|e| e.to_string())?;
        let ipr = report.infeasibility_probability;
        ensure((ipr - expected).abs() <= 0.05, || format!("{name}: IPr {ipr}, expected {expected} ± 0.05"))?;
        detail.push(format!("{name} {ipr:.3}"));
    }
    Ok(Some(detail.join(", ")))
}

fn report(number: u32, name: &str, outcome: Check, elapsed: Duration, failures: &mut u32) {
    let secs = elapsed.as_secs_f64();
    match outcome {
        Ok(detail) => println!("PASS {number:>2} {name}: {detail} [{secs:.2}s]"),
        Err(detail) => {
            *failures += 1;
            println!("FAIL {number:>2} {name}: {detail} [{secs:.2}s]");
        }
    }
}

fn main() {
    let mut failures = 0;
    let mut solved = Vec::new();
    macro_rules! run {
        ($n:expr, $name:expr, $body:expr) => {{
            let start = Instant::now();
            let outcome = $body;
            report($n, $name, outcome, start.elapsed(), &mut failures);
        }};
    }
    run!(1, "closed-form unit values", closed_form_values());
    run!(2, "grouping maximizes the pairing objective", grouping_is_optimal());
    run!(3, "moment bounds dominate Monte Carlo moments", bounds_dominate_sampled_moments());
    run!(4, "mean of the max of two standard normals", max_of_two_normals());
    run!(5, "sorted grouping never loses to other pairings", sorted_grouping_never_loses());
    run!(6, "rule crossover on two parallel activities", rule_crossover());
    run!(7, "robust makespan coverage", robust_makespan_coverage(&mut solved));
    run!(8, "deterministic optima", deterministic_optima());
    run!(9, "every linearization of a POS is feasible", linearizations_are_feasible(&solved));
    run!(10, "bench trends in epsilon and sigma", bench_trends());
    run!(11, "search trace replay", trace_replay());
    run!(12, "runtime envelope", runtime_envelope());
    let start = Instant::now();
    match psplib_infeasibility() {
        Ok(None) => {
            eprintln!(
                "warning: PSPLib files PSP1/PSP4/PSP13 not found in {}; optional check skipped",
                psplib_dir().display()
            );
            println!("PASS 13 PSPLib infeasibility probabilities: skipped, instance files not available");
        }
        Ok(Some(detail)) => report(13, "PSPLib infeasibility probabilities", Ok(detail), start.elapsed(), &mut failures),
        Err(e) => report(13, "PSPLib infeasibility probabilities", Err(e), start.elapsed(), &mut failures),
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
