//! Acceptance gate: one test per shipping criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Tolerances and workloads are pinned here as constants; changing them is a
//! contract change, not a tuning knob.

use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;

use scatterjam_core::channel::LinkGains;
use scatterjam_core::learning::{LearnerConfig, QTable};
use scatterjam_core::rng::make_rng;
use scatterjam_core::sim::{
    hotboot_realization_seeds, make_user_training_env, run_episode, sweep, RunResult, Scenario,
    StrategySpec, SweepSummary, SweepVariable,
};
use scatterjam_core::stackelberg::{
    concavity_scan, jammer_best_response, jammer_utility, stackelberg_equilibrium,
    user_best_response, user_utility, GameParams, Player,
};

// ---------------------------------------------------------------------------
// Pinned tolerances and workloads
// ---------------------------------------------------------------------------

/// Criterion 1: curvature bound and draw count for the concavity audit.
const CONCAVITY_BOUND: f64 = 1e-8;
const CONCAVITY_DRAWS: usize = 100;
const CONCAVITY_BUDGET: Duration = Duration::from_secs(10);

/// Criterion 2: best responses vs a brute-force grid.
const BR_DRAWS: usize = 100;
const BR_GRID_POINTS: usize = 100_000;
const BR_ARG_TOL_FRACTION: f64 = 1e-4; // of the strategy range
const BR_UTILITY_SLACK: f64 = 1e-9;
const BR_BUDGET: Duration = Duration::from_secs(60);

/// Criteria 4-6: episode shape shared by the learning comparisons.
const EPISODE_SLOTS: usize = 2000;
const SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
const LEARNING_BUDGET: Duration = Duration::from_secs(300);

/// Criterion 5: warm start must cut the median convergence slot to at most
/// this fraction of the cold start's.
const HOTBOOT_MEDIAN_FRACTION: f64 = 0.85;
const HOTBOOT_REALIZATIONS: usize = 20;
const HOTBOOT_SLOTS: usize = 500;

/// Criterion 7: linearity tolerance, relative to the utility magnitude.
/// The tail means are O(10^6) doubles, so their representation alone moves
/// differences by ~1e-9 absolute; the analytic check is therefore pinned
/// relative to the measured scale.
const LINEARITY_REL_TOL: f64 = 1e-9;

/// Criterion 8: algebra spot checks.
const IDENTITY_POINTS: usize = 10_000;
const IDENTITY_REL_TOL: f64 = 1e-12;
const GREEDY_DRAWS: usize = 100_000;
const GREEDY_FREQ_TOL: f64 = 0.01;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {:<28} {} ({})",
        criterion,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "{criterion}: {detail}");
}

// ---------------------------------------------------------------------------
// Criterion 1 — both objectives are concave on random scenes
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_objective_concavity() {
    let start = Instant::now();
    let user = concavity_scan(Player::User, CONCAVITY_DRAWS, 7);
    let jammer = concavity_scan(Player::Jammer, CONCAVITY_DRAWS, 11);
    let elapsed = start.elapsed();
    let pass = user.max_second_derivative <= CONCAVITY_BOUND
        && jammer.max_second_derivative <= CONCAVITY_BOUND
        && elapsed <= CONCAVITY_BUDGET;
    report(
        "1 objective concavity",
        pass,
        &format!(
            "user d2<={:.2e}, jammer d2<={:.2e}, {} draws each, {:.2?}",
            user.max_second_derivative, jammer.max_second_derivative, CONCAVITY_DRAWS, elapsed
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 2 — best responses match a brute-force grid
// ---------------------------------------------------------------------------

/// Random desk-scale scene: magnitudes near 1 so absolute slacks are
/// meaningful, spanning interior and boundary responses.
fn draw_scene(rng: &mut impl Rng) -> (LinkGains, GameParams) {
    let gains = LinkGains {
        h_eff: rng.random_range(1e-3..1.0),
        g: rng.random_range(1e-3..1.0),
        refl: rng.random_range(0.5..4.0),
        n0: rng.random_range(1e-4..0.1),
    };
    let params = GameParams {
        kappa: rng.random_range(0.1..1.0),
        w: rng.random_range(1.0..100.0),
        c_phi: rng.random_range(0.01..1.0),
        c_j: rng.random_range(0.01..1.0),
        p_j_max: rng.random_range(0.5..4.0),
        phi_max: 1.0,
    };
    (gains, params)
}

#[test]
fn criterion_2_best_response_matches_brute_force() {
    let start = Instant::now();
    let mut rng = make_rng(20_240_817);
    let mut worst_arg = 0.0f64;
    let mut worst_gap = 0.0f64;
    for _ in 0..BR_DRAWS {
        let (gains, params) = draw_scene(&mut rng);

        // Interferer side: response to a random interior phi.
        let phi = rng.random_range(0.05..0.95);
        let br = jammer_best_response(phi, &gains, &params).unwrap();
        let mut grid_best = (0.0, f64::NEG_INFINITY);
        for i in 0..=BR_GRID_POINTS {
            let p = params.p_j_max * i as f64 / BR_GRID_POINTS as f64;
            let u = jammer_utility(phi, p, &gains, &params).unwrap();
            if u > grid_best.1 {
                grid_best = (p, u);
            }
        }
        worst_arg = worst_arg.max((br - grid_best.0).abs() / params.p_j_max);
        worst_gap = worst_gap.max(grid_best.1 - jammer_utility(phi, br, &gains, &params).unwrap());

        // User side: response to a random feasible power.
        let p_j = rng.random_range(0.0..params.p_j_max);
        let br = user_best_response(p_j, &gains, &params).unwrap();
        let mut grid_best = (0.0, f64::NEG_INFINITY);
        for i in 0..=BR_GRID_POINTS {
            let phi = params.phi_max * i as f64 / BR_GRID_POINTS as f64;
            let u = user_utility(phi, p_j, &gains, &params).unwrap();
            if u > grid_best.1 {
                grid_best = (phi, u);
            }
        }
        worst_arg = worst_arg.max((br - grid_best.0).abs() / params.phi_max);
        worst_gap = worst_gap.max(grid_best.1 - user_utility(br, p_j, &gains, &params).unwrap());
    }
    let elapsed = start.elapsed();
    let pass =
        worst_arg <= BR_ARG_TOL_FRACTION && worst_gap <= BR_UTILITY_SLACK && elapsed <= BR_BUDGET;
    report(
        "2 best-response vs grid",
        pass,
        &format!(
            "{} draws x {} grid points: worst arg gap {:.2e} of range, worst utility gap \
             {:.2e}, {:.2?}",
            BR_DRAWS, BR_GRID_POINTS, worst_arg, worst_gap, elapsed
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3 — the reference deployment certifies
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_reference_deployment_certifies() {
    let scenario = Scenario::default();
    let gains = scenario.gains().unwrap();
    let eq = stackelberg_equilibrium(&gains, &scenario.game).unwrap();
    report(
        "3 certified solution",
        eq.certified,
        &format!(
            "phi*={:.6}, p*={} W, u_user={:.6e}, deviation-checked on the solver's 200x200 \
             grid at 1e-6 relative",
            eq.phi_star, eq.p_j_star, eq.u_user
        ),
    );
}

// ---------------------------------------------------------------------------
// Criteria 4 & 5 — shared learning runs
// ---------------------------------------------------------------------------

struct LearningRuns {
    plain: Vec<RunResult>,
    hotboot: Vec<RunResult>,
    random: Vec<RunResult>,
    fixed: Vec<RunResult>,
    elapsed: Duration,
}

fn learning_runs() -> &'static LearningRuns {
    static RUNS: OnceLock<LearningRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let scenario = Scenario::default();
        let jammer = StrategySpec::BestResponseOracle;
        let learner = LearnerConfig::default();
        let cache = scatterjam_core::learning::hotboot_train(
            |seed| make_user_training_env(&scenario, &jammer, 0.0, seed),
            &hotboot_realization_seeds(learner.seed, HOTBOOT_REALIZATIONS),
            HOTBOOT_SLOTS,
            &learner,
            scenario.fingerprint(),
        )
        .unwrap();
        let run_all = |spec: &StrategySpec| -> Vec<RunResult> {
            SEEDS
                .iter()
                .map(|&seed| run_episode(&scenario, spec, &jammer, EPISODE_SLOTS, seed).unwrap())
                .collect()
        };
        let plain = run_all(&StrategySpec::QLearning(learner.clone()));
        let hotboot = run_all(&StrategySpec::HotbootQ {
            learner: learner.clone(),
            cache,
        });
        let random = run_all(&StrategySpec::Random);
        let fixed = run_all(&StrategySpec::Fixed(0.5));
        LearningRuns {
            plain,
            hotboot,
            random,
            fixed,
            elapsed: start.elapsed(),
        }
    })
}

fn mean_and_se(runs: &[RunResult]) -> (f64, f64) {
    let tails: Vec<f64> = runs.iter().map(|r| r.avg_user_utility_tail).collect();
    let n = tails.len() as f64;
    let mean = tails.iter().sum::<f64>() / n;
    let var = tails.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Lower median of the convergence slots; a run that never converged counts
/// as one past the horizon.
fn median_convergence(runs: &[RunResult]) -> usize {
    let mut slots: Vec<usize> = runs
        .iter()
        .map(|r| r.convergence_slot.unwrap_or(EPISODE_SLOTS + 1))
        .collect();
    slots.sort_unstable();
    slots[(slots.len() - 1) / 2]
}

#[test]
fn criterion_4_learning_beats_baselines() {
    let runs = learning_runs();
    let (q_mean, q_se) = mean_and_se(&runs.plain);
    let (hb_mean, _) = mean_and_se(&runs.hotboot);
    let (rand_mean, rand_se) = mean_and_se(&runs.random);
    let (fix_mean, fix_se) = mean_and_se(&runs.fixed);
    let beats_random = q_mean - rand_mean > (q_se.powi(2) + rand_se.powi(2)).sqrt();
    let beats_fixed = q_mean - fix_mean > (q_se.powi(2) + fix_se.powi(2)).sqrt();
    let pass = hb_mean >= q_mean && beats_random && beats_fixed && runs.elapsed <= LEARNING_BUDGET;
    report(
        "4 learning beats baselines",
        pass,
        &format!(
            "tails over {} seeds: hotboot {:.4e} >= q {:.4e} > random {:.4e}, fixed {:.4e} \
             (1-SE strict), {:.2?}",
            SEEDS.len(),
            hb_mean,
            q_mean,
            rand_mean,
            fix_mean,
            runs.elapsed
        ),
    );
}

#[test]
fn criterion_5_warm_start_converges_earlier() {
    let runs = learning_runs();
    let plain = median_convergence(&runs.plain);
    let warm = median_convergence(&runs.hotboot);
    let ratio = warm as f64 / plain as f64;
    let pass = ratio <= HOTBOOT_MEDIAN_FRACTION;
    report(
        "5 warm-start speedup",
        pass,
        &format!(
            "median convergence slot: warm {warm} vs cold {plain} (ratio {:.3} <= {:.2})",
            ratio, HOTBOOT_MEDIAN_FRACTION
        ),
    );
}

// ---------------------------------------------------------------------------
// Criteria 6 & 7 — sweep trends
// ---------------------------------------------------------------------------

fn sweep_strategies() -> Vec<StrategySpec> {
    vec![
        StrategySpec::QLearning(LearnerConfig::default()),
        StrategySpec::Random,
        StrategySpec::Fixed(0.5),
        StrategySpec::EquilibriumOracle,
    ]
}

/// Per-strategy series of (varied value, mean tail utility, std error).
type StrategySeries = Vec<(String, Vec<(f64, f64, f64)>)>;

fn by_strategy(summary: &[SweepSummary]) -> StrategySeries {
    let mut out: StrategySeries = Vec::new();
    for row in summary {
        match out.iter_mut().find(|(name, _)| *name == row.strategy) {
            Some((_, pts)) => pts.push((row.varied_value, row.mean_tail_utility, row.std_error)),
            None => out.push((
                row.strategy.clone(),
                vec![(row.varied_value, row.mean_tail_utility, row.std_error)],
            )),
        }
    }
    out
}

#[test]
fn criterion_6_utility_falls_with_distance() {
    let scenario = Scenario::default();
    let result = sweep(
        &scenario,
        SweepVariable::DHap,
        &[5.0, 10.0, 15.0, 20.0, 25.0],
        &sweep_strategies(),
        &StrategySpec::BestResponseOracle,
        EPISODE_SLOTS,
        &SEEDS,
    )
    .unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for (name, pts) in by_strategy(&result.summary) {
        let strictly_decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
        pass &= strictly_decreasing;
        if name == "equilibrium-oracle" {
            // The oracle's drop must clear the (near-zero) seed noise.
            let clears_se = pts
                .windows(2)
                .all(|w| w[0].1 - w[1].1 > (w[0].2.powi(2) + w[1].2.powi(2)).sqrt());
            pass &= clears_se;
            detail = format!(
                "oracle utility {:.4e} -> {:.4e} over 5..25 m",
                pts[0].1, pts[4].1
            );
        }
        if !strictly_decreasing {
            detail = format!("{name} is not strictly decreasing: {pts:?}");
        }
    }
    report("6 distance trend", pass, &detail);
}

#[test]
fn criterion_7_utility_falls_with_time_price() {
    let scenario = Scenario::default();
    let values = [0.05, 0.1, 0.2, 0.4, 0.8];
    let result = sweep(
        &scenario,
        SweepVariable::CPhi,
        &values,
        &sweep_strategies(),
        &StrategySpec::BestResponseOracle,
        EPISODE_SLOTS,
        &SEEDS,
    )
    .unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for (name, pts) in by_strategy(&result.summary) {
        let non_increasing = pts.windows(2).all(|w| w[1].1 <= w[0].1);
        if !non_increasing {
            pass = false;
            detail = format!("{name} is not non-increasing: {pts:?}");
        }
        if name == "fixed" {
            // A fixed action phi_bar faces an interferer whose response
            // cannot depend on the time price, so the tail mean is exactly
            // bits - c_phi * phi_bar: linear with slope -phi_bar.
            let phi_bar = 0.5;
            let mut worst = 0.0f64;
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i + 1..] {
                    let predicted = a.1 - phi_bar * (b.0 - a.0);
                    let scale = a.1.abs().max(b.1.abs()).max(1.0);
                    worst = worst.max((b.1 - predicted).abs() / scale);
                }
            }
            pass &= worst <= LINEARITY_REL_TOL;
            detail = format!(
                "fixed-action tail is linear in the price: worst relative deviation {:.2e} \
                 (slope -{phi_bar})",
                worst
            );
        }
    }
    report("7 price trend + linearity", pass, &detail);
}

// ---------------------------------------------------------------------------
// Criterion 8 — algebraic identities
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_algebraic_identities() {
    // Payoff-sum identity on random points, desk scale and deployment scale.
    let mut rng = make_rng(818);
    let scenario = Scenario::default();
    let deploy_gains = scenario.gains().unwrap();
    let mut worst_rel = 0.0f64;
    for i in 0..IDENTITY_POINTS {
        let (gains, params) = if i % 2 == 0 {
            draw_scene(&mut rng)
        } else {
            (deploy_gains, scenario.game.clone())
        };
        let phi = rng.random_range(0.0..=params.phi_max);
        let p_j = rng.random_range(0.0..=params.p_j_max);
        let u_u = user_utility(phi, p_j, &gains, &params).unwrap();
        let u_j = jammer_utility(phi, p_j, &gains, &params).unwrap();
        let want = -params.c_phi * phi - params.c_j * p_j;
        let scale = u_u.abs().max(u_j.abs()).max(1.0);
        worst_rel = worst_rel.max(((u_u + u_j) - want).abs() / scale);
    }
    let identity_ok = worst_rel <= IDENTITY_REL_TOL;

    // Update-rule arithmetic on exactly representable numbers.
    let cfg_half = LearnerConfig {
        beta: 0.5,
        gamma: 0.5,
        epsilon: 0.05,
        seed: 1,
    };
    let mut table = QTable::new(2, 2);
    table.q_update(0, 0, 8.0, 1, &cfg_half); // 0.5*0 + 0.5*(8 + 0.5*0) = 4
    assert_eq!(table.value(0, 0), 4.0);
    table.q_update(1, 1, 2.0, 0, &cfg_half); // 0.5*0 + 0.5*(2 + 0.5*4) = 2
    assert_eq!(table.value(1, 1), 2.0);
    table.q_update(0, 0, 8.0, 1, &cfg_half); // 0.5*4 + 0.5*(8 + 0.5*2) = 6.5
    assert_eq!(table.value(0, 0), 6.5);
    let cfg_full = LearnerConfig {
        beta: 1.0,
        ..cfg_half
    };
    table.q_update(0, 1, 3.0, 1, &cfg_full); // replaced outright: 3 + 0.5*2
    assert_eq!(table.value(0, 1), 4.0);
    let update_ok = true;

    // Greedy frequency of the exploration rule.
    let mut table = QTable::new(1, 4);
    table.q_update(0, 2, 1.0, 0, &cfg_half); // make action 2 greedy
    let cfg = LearnerConfig::default();
    let mut rng = make_rng(2_718);
    let mut greedy_hits = 0usize;
    for _ in 0..GREEDY_DRAWS {
        if table.select_action(0, &cfg, &mut rng) == table.greedy(0) {
            greedy_hits += 1;
        }
    }
    let freq = greedy_hits as f64 / GREEDY_DRAWS as f64;
    let freq_ok = (freq - (1.0 - cfg.epsilon)).abs() <= GREEDY_FREQ_TOL;

    report(
        "8 algebraic identities",
        identity_ok && update_ok && freq_ok,
        &format!(
            "payoff-sum worst rel err {:.2e} over {} points; update arithmetic exact; greedy \
             frequency {:.4} vs {:.2}",
            worst_rel,
            IDENTITY_POINTS,
            freq,
            1.0 - cfg.epsilon
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 9 — byte-identical outputs from every subcommand
// ---------------------------------------------------------------------------

fn run_cli(args: &[&str], env_config: Option<&std::path::Path>) -> (Vec<u8>, i32) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scatterjam"));
    cmd.args(args);
    cmd.env_remove("SCATTERJAM_CONFIG");
    if let Some(path) = env_config {
        cmd.env("SCATTERJAM_CONFIG", path);
    }
    let out = cmd.output().expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

#[test]
fn criterion_9_subcommands_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(&config_path, "[run]\nslots = 300\nseeds = [1, 2]\n").unwrap();
    let cfg = Some(config_path.as_path());

    let mut pass = true;
    let mut notes = Vec::new();

    // equilibrium
    let (a, code_a) = run_cli(&["equilibrium"], cfg);
    let (b, _) = run_cli(&["equilibrium"], cfg);
    pass &= a == b && code_a == 0;
    notes.push(format!("equilibrium exit {code_a}"));

    // hotboot: stdout and cache bytes
    let cache1 = dir.path().join("c1.json");
    let cache2 = dir.path().join("c2.json");
    let (a, code_a) = run_cli(&["hotboot", cache1.to_str().unwrap()], cfg);
    let (b, _) = run_cli(&["hotboot", cache2.to_str().unwrap()], cfg);
    let cache_bytes_equal = std::fs::read(&cache1).unwrap() == std::fs::read(&cache2).unwrap();
    pass &= a == b && cache_bytes_equal && code_a == 0;
    notes.push(format!(
        "hotboot exit {code_a}, cache bytes equal {cache_bytes_equal}"
    ));

    // run (warm-started, with trace CSV)
    let trace1 = dir.path().join("t1.csv");
    let trace2 = dir.path().join("t2.csv");
    let (a, code_a) = run_cli(
        &[
            "run",
            "--hotboot",
            cache1.to_str().unwrap(),
            "--trace",
            trace1.to_str().unwrap(),
        ],
        cfg,
    );
    let (b, _) = run_cli(
        &[
            "run",
            "--hotboot",
            cache1.to_str().unwrap(),
            "--trace",
            trace2.to_str().unwrap(),
        ],
        cfg,
    );
    let trace_equal = std::fs::read(&trace1).unwrap() == std::fs::read(&trace2).unwrap();
    pass &= a == b && trace_equal && code_a == 0;
    notes.push(format!(
        "run exit {code_a}, trace bytes equal {trace_equal}"
    ));

    // sweep
    let out1 = dir.path().join("s1.csv");
    let out2 = dir.path().join("s2.csv");
    let sweep_args = |out: &std::path::Path| {
        vec![
            "sweep".to_string(),
            "--vary".into(),
            "d_hap".into(),
            "--values".into(),
            "5,15".into(),
            "--out".into(),
            out.to_str().unwrap().to_string(),
        ]
    };
    let args1 = sweep_args(&out1);
    let args2 = sweep_args(&out2);
    let (a, code_a) = run_cli(&args1.iter().map(String::as_str).collect::<Vec<_>>(), cfg);
    let (b, _) = run_cli(&args2.iter().map(String::as_str).collect::<Vec<_>>(), cfg);
    let sweep_equal = std::fs::read(&out1).unwrap() == std::fs::read(&out2).unwrap();
    pass &= a == b && sweep_equal && code_a == 0;
    notes.push(format!(
        "sweep exit {code_a}, csv bytes equal {sweep_equal}"
    ));

    report("9 byte determinism", pass, &notes.join("; "));
}
