//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so that every line is printed even when
//! an earlier criterion fails.

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aacsim::harness::{self, simulate, to_csv_string, LearningRate, RunLog};
use aacsim::numerics::{euclid_norm, rk4_step, solve_lyapunov, Mat, OdeState};
use aacsim::plant::robot_arm_spec;
use aacsim::verify::{check_lemma1, compare_learning_rates, LEMMA_MARGIN_TOL};

const P_TOL: f64 = 1e-9;
const LYAPUNOV_TIME: Duration = Duration::from_millis(1);
const LEMMA_SAMPLES: usize = 10_000;
const LEMMA_TIME: Duration = Duration::from_secs(1);
const FIG1A_BOUND: f64 = 0.05;
const FIG1A_TIME: Duration = Duration::from_secs(5);
const BIAS_CENTER: f64 = -1.0;
const BIAS_BAND: f64 = 0.15;
const BIAS_Y_BOUND: f64 = 0.1;
const FADING_BOUND: f64 = 0.05;
const RATE_LEVEL: f64 = 0.1;
const FIG4_BOUND: f64 = 0.2;
const FIG4_READAPT: f64 = 0.01;
const FIG5_BOUND: f64 = 0.2;
const HALVING_TOL: f64 = 1e-6;
const HALVING_DT: f64 = 1e-3;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(scn: &aacsim::Scenario) -> RunLog {
    simulate(scn).unwrap_or_else(|e| panic!("{}: {e}", scn.name))
}

fn sup_x(log: &RunLog, from: f64) -> f64 {
    log.window(from).map(|r| r.x_norm).fold(0.0, f64::max)
}

fn lyapunov_design() -> Outcome {
    let acl = Mat::from_rows(&[vec![0.0, 1.0], vec![-1.0, -2.0]]).unwrap();
    let q = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 3.0]]).unwrap();
    let expected = [1.0, 0.5, 0.5, 1.0];
    let mut best = Duration::MAX;
    let mut p = Mat::zeros(2, 2);
    for _ in 0..20 {
        let t0 = Instant::now();
        p = solve_lyapunov(&acl, &q).unwrap();
        best = best.min(t0.elapsed());
    }
    let err = p.as_slice().iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        err <= P_TOL && best < LYAPUNOV_TIME,
        format!("max |P - P*| = {err:.2e} (tol {P_TOL:.0e}), {best:?} (limit {LYAPUNOV_TIME:?})"),
    )
}

fn lemma() -> Outcome {
    let t0 = Instant::now();
    let r = check_lemma1(LEMMA_SAMPLES, 8, 2024);
    let took = t0.elapsed();
    outcome(
        r.pass && r.worst_margin >= -LEMMA_MARGIN_TOL && took < LEMMA_TIME,
        format!(
            "{} samples, worst margin {:.3e} (>= -{LEMMA_MARGIN_TOL:.0e}), |c - e^-(c+1)| = {:.1e}, {took:?}",
            r.samples, r.worst_margin, r.fixed_point_gap
        ),
    )
}

fn accurate_convergence() -> Outcome {
    let scn = harness::accurate(LearningRate::Low);
    let t0 = Instant::now();
    let log = run(&scn);
    let took = t0.elapsed();
    let s = sup_x(&log, 30.0);
    outcome(
        s <= FIG1A_BOUND && took < FIG1A_TIME,
        format!("sup |x| on [30,40] = {s:.3e} (<= {FIG1A_BOUND}), {took:?} (limit {FIG1A_TIME:?})"),
    )
}

fn bias_window(log: &RunLog) -> (f64, f64, f64) {
    let lo = log.window(35.0).map(|r| r.x[0]).fold(f64::INFINITY, f64::min);
    let hi = log.window(35.0).map(|r| r.x[0]).fold(f64::NEG_INFINITY, f64::max);
    let y = log.window(35.0).map(|r| euclid_norm(&r.y)).fold(0.0, f64::max);
    (lo, hi, y)
}

fn bias_tracking() -> Outcome {
    let log = run(&harness::biased(LearningRate::Low));
    let (lo, hi, y) = bias_window(&log);
    let pass = (lo - BIAS_CENTER).abs() <= BIAS_BAND && (hi - BIAS_CENTER).abs() <= BIAS_BAND && y <= BIAS_Y_BOUND;
    let hi_rate = run(&harness::biased(LearningRate::High));
    let (flo, fhi, fy) = bias_window(&hi_rate);
    outcome(
        pass,
        format!(
            "x1 on [35,40] in [{lo:.4}, {hi:.4}] (want {BIAS_CENTER} +- {BIAS_BAND}), sup |y| = {y:.4} (<= {BIAS_Y_BOUND}); \
             high-rate variant: x1 in [{flo:.4}, {fhi:.4}], sup |y| = {fy:.4}"
        ),
    )
}

fn fading() -> Outcome {
    let log = run(&harness::fading(LearningRate::Low));
    let s = sup_x(&log, 30.0);
    outcome(s <= FADING_BOUND, format!("sup |x| on [30,40] = {s:.3e} (<= {FADING_BOUND})"))
}

fn learning_rate() -> Outcome {
    let low = run(&harness::accurate(LearningRate::Low));
    let high = run(&harness::accurate(LearningRate::High));
    let c = compare_learning_rates(&low, &high, RATE_LEVEL);
    let fmt = |t: Option<f64>| t.map_or("never".to_string(), |t| format!("{t:.3}s"));
    outcome(
        c.pass(),
        format!(
            "time to |x| <= {RATE_LEVEL}: high {} vs low {}; max |u|: high {:.3} vs low {:.3}",
            fmt(c.time_high),
            fmt(c.time_low),
            c.max_u_high,
            c.max_u_low
        ),
    )
}

fn process_change() -> Outcome {
    let log = run(&harness::process_change());
    let finite = log.rows.iter().all(|r| r.x.iter().chain(&r.theta).all(|v| v.is_finite()));
    let s = sup_x(&log, 30.0);
    let th20 = &log.row_at(20.0).expect("row at t = 20").theta;
    let th40 = &log.rows.last().unwrap().theta;
    let d: Vec<f64> = th40.iter().zip(th20).map(|(a, b)| a - b).collect();
    let moved = euclid_norm(&d);
    outcome(
        finite && s <= FIG4_BOUND && moved > FIG4_READAPT,
        format!("finite = {finite}, sup |x| on [30,40] = {s:.3e} (<= {FIG4_BOUND}), |theta(40) - theta(20)| = {moved:.4} (> {FIG4_READAPT})"),
    )
}

fn actuator_faults() -> Outcome {
    let add = sup_x(&run(&harness::actuator_additive()), 30.0);
    let mul = sup_x(&run(&harness::actuator_multiplicative()), 30.0);
    outcome(
        add <= FIG5_BOUND && mul <= FIG5_BOUND,
        format!("sup |x| on [30,40]: additive {add:.3e}, multiplicative {mul:.3e} (<= {FIG5_BOUND})"),
    )
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    let all = harness::builtin_scenarios();
    for scn in &all {
        if to_csv_string(&run(scn)) != to_csv_string(&run(scn)) {
            differing.push(scn.name.clone());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} scenarios run twice, differing CSVs: {differing:?}", all.len()),
    )
}

fn step_halving() -> Outcome {
    let plant = robot_arm_spec(1.0, 2.0, 1.0, 9.8, 1.0).unwrap();
    let integrate = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let mut s = OdeState::new(0.0, vec![FRAC_PI_4, 0.0]);
        for k in 0..steps {
            s.t = k as f64 * dt;
            s = rk4_step(|t, x| plant.derivative(x, 0.0, t), &s, dt).unwrap();
        }
        s.z
    };
    let coarse = integrate(HALVING_DT);
    let fine = integrate(HALVING_DT / 2.0);
    let d: Vec<f64> = coarse.iter().zip(&fine).map(|(a, b)| a - b).collect();
    let err = euclid_norm(&d);
    outcome(err <= HALVING_TOL, format!("|x_dt(1) - x_dt/2(1)| = {err:.3e} (<= {HALVING_TOL:.0e}) at dt = {HALVING_DT}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("lyapunov synthesis", lyapunov_design),
        ("lemma property suite", lemma),
        ("accurate measurement converges", accurate_convergence),
        ("bias tracking", bias_tracking),
        ("fading measurement converges", fading),
        ("learning-rate comparison", learning_rate),
        ("process change", process_change),
        ("actuator faults", actuator_faults),
        ("determinism", determinism),
        ("integrator step halving", step_halving),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
