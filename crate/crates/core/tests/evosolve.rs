use std::f64::consts::PI;
use std::time::Instant;

use stepanov_core::evosolve::{
    green_apply, lotka_volterra_run, solve_semilinear_evolution, DichotomySpec, LotkaVolterraParams,
};
use stepanov_core::fixedpoint::{SolverConfig, TimeGrid};
use stepanov_core::modal::Field;
use stepanov_core::{Error, Forcing, Geometry, NonlinearitySpec, Signal, SpaceNorm, StepanovExponent};

fn config(t0: f64, t1: f64, h: f64) -> SolverConfig {
    SolverConfig::new(TimeGrid::new(t0, t1, h).unwrap())
}

fn lv_a() -> Signal {
    Signal::Constant(2.0).plus(Signal::sine(0.5, 1.0))
}

fn lv_c(scale: f64) -> Vec<Forcing> {
    vec![Forcing::new(
        Signal::Constant(0.05 * scale).plus(Signal::cosine(0.025 * scale, 1.0)),
        vec![1.0],
    )]
}

#[test]
fn green_apply_closed_forms() {
    let spec = DichotomySpec::autonomous(vec![2.0], 1.0, 2.0).unwrap();
    let mut c = config(0.0, 10.0, 0.05);
    c.tolerance = 1e-8;
    let out = green_apply(&Signal::Constant(1.0), &spec, &c).unwrap();
    assert!(out.tail.bound <= 1e-9 * (1.0 + 1e-9));
    for v in out.values.values() {
        assert!((v - 0.5).abs() < 1e-6);
    }
    let spec = DichotomySpec::autonomous(vec![1.0], 1.0, 1.0).unwrap();
    let out = green_apply(&Signal::cosine(1.0, 1.0), &spec, &c).unwrap();
    for i in 0..out.values.len() {
        let t = i as f64 * 0.05;
        // Steady response (cos t + sin t)/2 has amplitude 2^{-1/2}.
        assert!((out.values.sample(i)[0] - 0.5 * (t.cos() + t.sin())).abs() < 1e-6);
    }
    let zero = green_apply(&Signal::Constant(0.0), &spec, &c).unwrap();
    assert!(zero.values.values().iter().all(|v| *v == 0.0));
}

#[test]
fn green_apply_is_linear() {
    let spec = DichotomySpec::scalar_shifted(vec![1.0, 4.0], lv_a(), 1.0, 1.05).unwrap();
    let c = config(0.0, 5.0, 0.05);
    let h1 = Signal::cosine(0.7, 1.3);
    let h2 = Signal::sine(-0.4, 2f64.sqrt()).plus(Signal::Constant(0.1));
    let mut fixed = c;
    fixed.t_trunc = Some(30.0);
    let a = green_apply(&h1, &spec, &fixed).unwrap();
    let b = green_apply(&h2, &spec, &fixed).unwrap();
    let sum = green_apply(&h1.clone().scaled(2.0).plus(h2.clone()), &spec, &fixed).unwrap();
    for ((x, y), z) in a.values.values().iter().zip(b.values.values()).zip(sum.values.values()) {
        assert!((2.0 * x + y - z).abs() < 1e-12);
    }
}

#[test]
fn cocycle_and_green_bound() {
    let spec = DichotomySpec::scalar_shifted(vec![1.0, 4.0, 9.0], lv_a(), 1.0, 1.05).unwrap();
    let fam = spec.family(-5.0, 15.0).unwrap();
    let grid: Vec<f64> = (0..10).map(|i| -4.0 + 1.7 * i as f64).collect();
    assert!(fam.cocycle_defect(&grid).unwrap() <= 1e-10);
    let check = fam.check_green_bound(&grid).unwrap();
    assert!(check.passed, "{check:?}");
    // With δ above a₀ + λ₁ the bound must fail.
    let tight = DichotomySpec::scalar_shifted(vec![1.0], lv_a(), 1.0, 3.0).unwrap();
    assert!(!tight.family(-5.0, 15.0).unwrap().check_green_bound(&grid).unwrap().passed);
}

#[test]
fn contraction_ratio_obeys_the_proof_estimate() {
    let one = StepanovExponent::new(1.0).unwrap();
    let spec = DichotomySpec::scalar_shifted(vec![1.0], lv_a(), 1.0, 1.05).unwrap();
    let f = NonlinearitySpec::Quadratic {
        b: Signal::Constant(0.15),
        forcing: vec![Forcing::scalar(Signal::cosine(0.03, 1.0).plus(Signal::Constant(0.02)))],
    };
    let out = solve_semilinear_evolution(&f, &spec, &Geometry::Scalar, 0.5, one, &config(0.0, 10.0, 0.05)).unwrap();
    assert!(out.report.converged);
    assert!(out.max_iterate_norm <= 0.5);
    let worst = out.report.ratios.iter().skip(1).copied().fold(0.0, f64::max);
    assert!(worst <= out.hypotheses.contraction_bound + 0.05, "{worst} vs {}", out.hypotheses.contraction_bound);
}

#[test]
fn lotka_volterra_trivial_cases() {
    let base = LotkaVolterraParams {
        a: Signal::Constant(1.0),
        b: Signal::Constant(0.0),
        c: vec![],
        modes: 4,
        rho: 0.5,
        delta: None,
        xs: None,
    };
    let zero = lotka_volterra_run(&base, &config(0.0, 5.0, 0.05)).unwrap();
    assert_eq!(zero.field.sup_abs(), 0.0);
    let linear = LotkaVolterraParams {
        c: vec![Forcing::new(Signal::Constant(0.1), vec![1.0])],
        ..base
    };
    let mut c = config(0.0, 5.0, 0.05);
    c.tolerance = 1e-9;
    let run = lotka_volterra_run(&linear, &c).unwrap();
    let mid = run.field.xs.iter().position(|x| (x - PI / 2.0).abs() < 1e-12).unwrap();
    for i in 0..run.field.times.len() {
        assert!((run.field.at(i, mid) - 0.05).abs() < 1e-6);
    }
}

/// Backward Euler in time, second differences in space, implicit in the
/// linear part and explicit in b v² + C.
fn backward_euler(
    a: &Signal,
    b: &Signal,
    c: &Signal,
    start: f64,
    end: f64,
    dt: f64,
    interior: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let dx = PI / (interior + 1) as f64;
    let xs: Vec<f64> = (1..=interior).map(|j| j as f64 * dx).collect();
    let steps = ((end - start) / dt).round() as usize;
    let mut v = vec![0.0; interior];
    let mut times = vec![start];
    let mut out = vec![v.clone()];
    for n in 1..=steps {
        let t = start + n as f64 * dt;
        let (an, bn, cn) = (a.value(t).unwrap(), b.value(t).unwrap(), c.value(t).unwrap());
        let off = -dt / (dx * dx);
        let diag = 1.0 + 2.0 * dt / (dx * dx) + dt * an;
        let mut rhs: Vec<f64> = v
            .iter()
            .zip(&xs)
            .map(|(vj, x)| vj + dt * (bn * vj * vj + cn * x.sin()))
            .collect();
        // Thomas algorithm.
        let mut cp = vec![0.0; interior];
        let mut d = diag;
        cp[0] = off / d;
        rhs[0] /= d;
        for j in 1..interior {
            d = diag - off * cp[j - 1];
            cp[j] = off / d;
            rhs[j] = (rhs[j] - off * rhs[j - 1]) / d;
        }
        for j in (0..interior - 1).rev() {
            rhs[j] -= cp[j] * rhs[j + 1];
        }
        v = rhs;
        times.push(t);
        out.push(v.clone());
    }
    (times, out)
}

#[test]
fn lotka_volterra_matches_time_stepping() {
    let modes = 16;
    let rho = 0.5;
    let probe = LotkaVolterraParams {
        a: lv_a(),
        b: Signal::Constant(0.0),
        c: lv_c(1.0),
        modes,
        rho,
        delta: None,
        xs: None,
    };
    let (t0, t1) = (0.0, 20.0);
    let c = config(t0, t1, 0.05);
    let bound = lotka_volterra_run(&probe, &c).unwrap().bound;
    // inf a is found by sampling, so δ = (ω² − 1)/(2ω) with ω = 2.5 holds to sampling accuracy.
    assert!((bound.delta - 1.05).abs() < 1e-4);
    // b(t) = β(1 + 0.5 sin √2 t) with |b|_BS¹ at 80% of the admissible bound.
    let shape = Signal::Constant(1.0).plus(Signal::sine(0.5, 2f64.sqrt()));
    let shape_norm = stepanov_core::funcspace::bsp_norm(
        &shape,
        StepanovExponent::new(1.0).unwrap(),
        stepanov_core::Window::new(-100.0, 120.0).unwrap(),
        1.0 / 32.0,
    )
    .unwrap()
    .value;
    let b = shape.scaled(0.8 * bound.b_bound / shape_norm);
    let params = LotkaVolterraParams { b: b.clone(), ..probe };
    let clock = Instant::now();
    let run = lotka_volterra_run(&params, &c).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "{elapsed} s");
    assert!(run.solve.report.converged);
    assert!(run.bound.within_ball && run.solve.max_iterate_norm <= rho);
    assert!((run.bound.b_bs1 / run.bound.b_bound - 0.8).abs() < 1e-6);

    let c_time = Signal::Constant(0.05).plus(Signal::cosine(0.025, 1.0));
    let dt = 0.002;
    let (times, states) = backward_euler(&params.a, &b, &c_time, t0 - 20.0, t1, dt, 63);
    let xs: Vec<f64> = (1..=63).map(|j| j as f64 * PI / 64.0).collect();
    let geom = Geometry::modal(modes, SpaceNorm::Sup).unwrap();
    let field = Field::from_grid(&geom, &run.solve.solution, &xs);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, &t) in field.times.iter().enumerate() {
        let n = ((t - times[0]) / dt).round() as usize;
        for (j, v) in states[n].iter().enumerate() {
            worst = worst.max((field.at(i, j) - v).abs());
            scale = scale.max(v.abs());
        }
    }
    assert!(worst <= 0.05 * scale, "deviation {worst} against field size {scale}");
}

#[test]
fn lotka_volterra_refuses_a_large_b() {
    let params = LotkaVolterraParams {
        a: lv_a(),
        b: Signal::Constant(0.3),
        c: lv_c(1.0),
        modes: 4,
        rho: 0.5,
        delta: None,
        xs: None,
    };
    match lotka_volterra_run(&params, &config(0.0, 5.0, 0.05)) {
        Err(Error::Refused { margin, .. }) => assert!(margin < 0.0),
        other => panic!("expected a refusal, got {other:?}"),
    }
}
