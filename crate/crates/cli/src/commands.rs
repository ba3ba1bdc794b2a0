use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use stepanov_core::evosolve::{lotka_volterra_run, solve_semilinear_evolution, DichotomySpec, LotkaVolterraParams};
use stepanov_core::fixedpoint::{contraction_probe, scalar_probe_pairs};
use stepanov_core::fracsolve::{heat_model_run, solve_fractional, HeatParams};
use stepanov_core::funcspace::{
    bsp_norm, composition_ergodic_check, find_translation_numbers, uniform_continuity_modulus, GridSignal, ScanOptions,
    DEFAULT_CELL_STEP,
};
use stepanov_core::kernel::{mittag_leffler, s_gamma_constant};
use stepanov_core::measure::{ergodic_curve, measure_interval, superlevel_ratio, SUPERLEVEL_STEP};
use stepanov_core::modal::Field;
use stepanov_core::{FractionalKernelSpec, Window};

use crate::cli::*;
use crate::config::{self, *};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// What a subcommand produced, plus the output paths its scenario asked for.
pub struct Outcome {
    pub table: Table,
    pub report: Value,
    pub output: OutputDecl,
}

fn window(w: [f64; 2]) -> Result<Window, CliError> {
    Ok(Window::new(w[0], w[1])?)
}

fn pair(v: Option<Vec<f64>>, key: &str) -> Result<Option<[f64; 2]>, CliError> {
    match v {
        None => Ok(None),
        Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
        Some(v) => Err(CliError::Config(format!("`{key}` takes two numbers a,b, got {}", v.len()))),
    }
}

fn flag_signal(s: Option<String>) -> Result<Option<SignalDecl>, CliError> {
    s.map(|s| SignalDecl::parse(&s).map_err(CliError::Config)).transpose()
}

fn field_table(field: &Field) -> Table {
    let mut table = Table::new(["t", "x", "u"]);
    for (i, &t) in field.times.iter().enumerate() {
        for (j, &x) in field.xs.iter().enumerate() {
            table.push(vec![t.into(), x.into(), field.at(i, j).into()]);
        }
    }
    table
}

fn modes_table(g: &GridSignal) -> Table {
    let header = std::iter::once("t".to_string()).chain((1..=g.dim()).map(|k| format!("u{k}")));
    let mut table = Table::new(header);
    for i in 0..g.len() {
        let mut row = vec![Cell::Num(g.start() + i as f64 * g.step())];
        row.extend(g.sample(i).iter().map(|&v| Cell::Num(v)));
        table.push(row);
    }
    table
}

fn output(o: Option<OutputDecl>) -> OutputDecl {
    o.unwrap_or_default()
}

pub fn norm(a: NormArgs, config: Option<&Path>) -> Result<Outcome, CliError> {
    let sc: NormScenario = config::load_or_default(config)?;
    let base = base_dir(config);
    let signal = required(flag_signal(a.signal)?.or(sc.signal), "signal")?.build(&base)?;
    let p = required(a.p.or(sc.p), "p")?;
    let w = pair(a.window, "window")?.or(sc.window).unwrap_or([0.0, 10.0]);
    let step = a.step.or(sc.step).unwrap_or(DEFAULT_CELL_STEP);
    let n = bsp_norm(&signal, exponent(p)?, window(w)?, step)?;
    let mut table = Table::new(["p", "window_start", "window_end", "step", "norm", "argmax"]);
    table.push(vec![p.into(), w[0].into(), w[1].into(), n.step.into(), n.value.into(), n.argmax.into()]);
    let report = json!({"command": "norm", "name": sc.name, "signal": signal.tag(), "p": p, "result": n});
    Ok(Outcome { table, report, output: output(sc.output) })
}

pub fn ergodic(a: ErgodicArgs, config: Option<&Path>) -> Result<Outcome, CliError> {
    let sc: ErgodicScenario = config::load_or_default(config)?;
    let base = base_dir(config);
    let signal = required(flag_signal(a.signal)?.or(sc.signal), "signal")?.build(&base)?;
    let density_decl = match a.density {
        Some(d) => Some(DensityDecl::parse(&d).map_err(CliError::Config)?),
        None => sc.density,
    };
    let density = required(density_decl, "density")?.build(&base)?;
    let p = a.p.or(sc.p).unwrap_or(1.0);
    let ladder = required(a.r.or(sc.r), "r")?;
    let epsilons = a.epsilon.or(sc.epsilon).unwrap_or_default();
    let step = a.step.or(sc.step).unwrap_or(SUPERLEVEL_STEP);

    let curve = ergodic_curve(&signal, &density, exponent(p)?, &ladder)?;
    let header = ["r", "mass", "mean"]
        .into_iter()
        .map(String::from)
        .chain(epsilons.iter().map(|e| format!("superlevel_{}", crate::output::number(*e))));
    let mut table = Table::new(header);
    let mut rows = Vec::new();
    for &(r, mean) in &curve {
        let mass = measure_interval(&density, -r, r)?;
        let mut row = vec![r.into(), mass.into(), mean.into()];
        let mut ratios = Vec::new();
        for &e in &epsilons {
            let s = superlevel_ratio(&signal, &density, e, r, step)?;
            ratios.push(s);
            row.push(s.into());
        }
        table.push(row);
        rows.push(json!({"r": r, "mass": mass, "mean": mean, "superlevel": ratios}));
    }
    let decreasing = curve.windows(2).all(|w| w[1].1 < w[0].1);
    let report = json!({
        "command": "ergodic", "name": sc.name, "signal": signal.tag(), "density": density.tag(),
        "quasi_invariant": density.quasi_invariant(), "p": p, "epsilon": epsilons,
        "curve": rows, "strictly_decreasing": decreasing,
    });
    Ok(Outcome { table, report, output: output(sc.output) })
}

pub fn translations(a: TranslationsArgs, config: Option<&Path>) -> Result<Outcome, CliError> {
    let sc: TranslationsScenario = config::load_or_default(config)?;
    let base = base_dir(config);
    let signal = required(flag_signal(a.signal)?.or(sc.signal), "signal")?.build(&base)?;
    let epsilon = required(a.epsilon.or(sc.epsilon), "epsilon")?;
    let p = a.p.or(sc.p).unwrap_or(1.0);
    let length = a.length.or(sc.length).unwrap_or(20.0);
    let w = pair(a.window, "window")?.or(sc.window).unwrap_or([0.0, 10.0]);
    let defaults = ScanOptions::default();
    let opts = ScanOptions {
        tau_step: a.tau_step.or(sc.tau_step).unwrap_or(defaults.tau_step),
        cell_step: a.cell_step.or(sc.cell_step).unwrap_or(defaults.cell_step),
        max_refined: sc.max_refined.unwrap_or(defaults.max_refined),
    };
    let scan = find_translation_numbers(&signal, epsilon, exponent(p)?, length, window(w)?, opts)?;
    let mut table = Table::new(["first", "last", "best_tau", "scan_defect", "refined_tau", "refined_defect"]);
    for c in &scan.clusters {
        let (rt, rd) = c.refined.map_or((f64::NAN, f64::NAN), |r| (r.tau, r.defect));
        table.push(vec![c.first.into(), c.last.into(), c.best_tau.into(), c.best_scan_defect.into(), rt.into(), rd.into()]);
    }
    let report = json!({"command": "translations", "name": sc.name, "signal": signal.tag(), "scan": scan});
    Ok(Outcome { table, report, output: output(sc.output) })
}

pub fn modulus(a: ModulusArgs, config: Option<&Path>) -> Result<Outcome, CliError> {
    let sc: ModulusScenario = config::load_or_default(config)?;
    let base = base_dir(config);
    let signal = required(flag_signal(a.signal)?.or(sc.signal), "signal")?.build(&base)?;
    let w = pair(a.window, "window")?.or(sc.window).unwrap_or([0.0, 10.0]);
    let deltas = required(a.delta.or(sc.delta), "delta")?;
    let rows = uniform_continuity_modulus(&signal, (w[0], w[1]), &deltas, a.step.or(sc.step))?;
    let mut table = Table::new(["delta", "modulus"]);
    for r in &rows {
        table.push(vec![r.delta.into(), r.modulus.into()]);
    }
    let report = json!({"command": "modulus", "name": sc.name, "signal": signal.tag(), "window": w, "rows": rows});
    Ok(Outcome { table, report, output: output(sc.output) })
}

pub fn ml(a: MlArgs, config: Option<&Path>) -> Result<Outcome, CliError> {
    let sc: MlScenario = config::load_or_default(config)?;
    let alpha = required(a.alpha.or(sc.alpha), "alpha")?;
    let beta = a.beta.or(sc.beta).unwrap_or(1.0);
    let zs = required(a.z.or(sc.z), "z")?;
    let mut table = Table::new(["alpha", "beta", "z", "value"]);
    let mut values = Vec::new();
    for &z in &zs {
        let v = mittag_leffler(alpha, beta, z)?;
        values.push(json!({"z": z, "value": v}));
        table.push(vec![alpha.into(), beta.into(), z.into(), v.into()]);
    }
    let report = json!({"command": "ml", "name": sc.name, "alpha": alpha, "beta": beta, "values": values});
    Ok(Outcome { table, report, output: output(sc.output) })
}

pub fn constants(a: ConstantsArgs, config: Option<&Path>) -> Result<Outcome, CliError> {
    let sc: ConstantsScenario = config::load_or_default(config)?;
    let gammas = required(a.gamma.or(sc.gamma), "gamma")?;
    let ps = required(a.p.or(sc.p), "p")?;
    let mut table = Table::new([
        "gamma",
        "p",
        "series",
        "series_error",
        "integral_direct",
        "integral_printed",
        "total",
        "total_printed",
    ]);
    let mut rows = Vec::new();
    for &g in &gammas {
        for &p in &ps {
            let c = s_gamma_constant(g, exponent(p)?)?;
            table.push(vec![
                g.into(),
                p.into(),
                c.series.into(),
                c.series_error.into(),
                c.integral_direct.into(),
                c.integral_printed.into(),
                c.total.into(),
                c.total_printed.into(),
            ]);
            rows.push(c);
        }
    }
    let report = json!({"command": "constants", "name": sc.name, "rows": rows});
    Ok(Outcome { table, report, output: output(sc.output) })
}

pub fn probe(a: ProbeArgs, config: Option<&Path>) -> Result<Outcome, CliError> {
    let sc: ProbeScenario = config::load_or_default(config)?;
    let map = a.map.or(sc.map).unwrap_or_else(|| "saturating".into());
    let g: Box<dyn Fn(&f64) -> stepanov_core::Result<f64>> = match map.split_once(':') {
        None if map == "saturating" => Box::new(|x: &f64| Ok(x.abs() / (1.0 + x.abs()))),
        Some(("linear", c)) => {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("`linear:` needs a number, got `{c}`")))?;
            Box::new(move |x: &f64| Ok(c * x))
        }
        _ => return Err(CliError::Config(format!("unknown probe map `{map}` (saturating, linear:c)"))),
    };
    let range = pair(a.range, "range")?.or(sc.range).unwrap_or([-2.0, 2.0]);
    let grid = a.grid.or(sc.grid).unwrap_or(41);
    let eps = a.epsilon.or(sc.epsilon).unwrap_or_else(|| vec![1e-3, 1e-2, 1e-1, 1.0]);
    let pairs = scalar_probe_pairs(range[0], range[1], grid, &eps);
    let report = contraction_probe(g, &pairs, |x, y| (x - y).abs(), &eps)?;
    let mut table = Table::new(["epsilon", "delta", "pairs_in_band", "max_image_distance", "passed"]);
    for b in &report.bands {
        table.push(vec![b.epsilon.into(), b.delta.into(), b.pairs_in_band.into(), b.max_image_distance.into(), b.passed.into()]);
    }
    let report = json!({
        "command": "probe", "name": sc.name, "map": map, "range": range,
        "all_bands_pass": report.all_bands_pass(), "probe": report,
    });
    Ok(Outcome { table, report, output: output(sc.output) })
}

fn scenario_path(config: Option<&Path>, command: &str) -> Result<PathBuf, CliError> {
    config
        .map(Path::to_path_buf)
        .ok_or_else(|| CliError::Config(format!("`{command}` needs --config <scenario.toml>")))
}

pub fn solve_frac(config: Option<&Path>) -> Result<Outcome, CliError> {
    let path = scenario_path(config, "solve-frac")?;
    let sc: FracScenario = config::load(&path)?;
    let base = base_dir(Some(&path));
    let kernel = match (&sc.kernel.spectrum, sc.kernel.modes) {
        (Some(s), None) => FractionalKernelSpec::new(sc.kernel.gamma, s.clone())?,
        (None, Some(m)) => FractionalKernelSpec::dirichlet_interval(sc.kernel.gamma, m)?,
        _ => return Err(CliError::Config("[kernel] needs exactly one of `modes` or `spectrum`".into())),
    };
    let default_space = if kernel.modes() == 1 && sc.kernel.spectrum.is_some() { SpaceDecl::Scalar } else { SpaceDecl::L2 };
    let geom = geometry(sc.space.unwrap_or(default_space), kernel.modes())?;
    let f = sc.nonlinearity.build(&base)?;
    let initial = sc.initial.as_ref().map(|s| s.build(&base)).transpose()?;
    let cfg = solver_config(&sc.grid, sc.solver.as_ref())?;
    let sol = solve_fractional(&f, &kernel, &geom, exponent(sc.p)?, &cfg, initial.as_ref())?;
    let report = json!({
        "command": "solve-frac", "name": sc.name, "gamma": sc.kernel.gamma, "spectrum": kernel.spectrum(),
        "constants": sol.constants, "report": sol.report,
    });
    Ok(Outcome { table: modes_table(&sol.solution), report, output: output(sc.output) })
}

pub fn heat(config: Option<&Path>) -> Result<Outcome, CliError> {
    let path = scenario_path(config, "heat")?;
    let sc: HeatScenario = config::load(&path)?;
    let base = base_dir(Some(&path));
    let params = HeatParams {
        gamma: sc.gamma,
        modes: sc.modes,
        k: sc.k.build(&base)?,
        r: sc.r.clone().unwrap_or_else(|| vec![1.0]),
        h: sc.forcing.iter().map(|f| f.build(&base)).collect::<Result<_, _>>()?,
        p: exponent(sc.p)?,
        xs: sc.points.map(Field::default_points),
    };
    let cfg = solver_config(&sc.grid, sc.solver.as_ref())?;
    let run = heat_model_run(&params, &cfg)?;
    let report = json!({
        "command": "heat", "name": sc.name, "gamma": sc.gamma, "modes": sc.modes,
        "normalisation": run.normalisation, "constants": run.solve.constants, "report": run.solve.report,
    });
    Ok(Outcome { table: field_table(&run.field), report, output: output(sc.output) })
}

pub fn solve_evo(config: Option<&Path>) -> Result<Outcome, CliError> {
    let path = scenario_path(config, "solve-evo")?;
    let sc: EvoScenario = config::load(&path)?;
    let base = base_dir(Some(&path));
    let (n, delta) = (sc.dichotomy.n, sc.dichotomy.delta);
    let mut spec = match &sc.family {
        FamilyDecl::Autonomous { rates } => DichotomySpec::autonomous(rates.clone(), n, delta)?,
        FamilyDecl::ScalarShifted { spectrum, modes, a } => {
            let spectrum = match (spectrum, modes) {
                (Some(s), None) => s.clone(),
                (None, Some(m)) => (1..=*m).map(|k| (k * k) as f64).collect(),
                _ => return Err(CliError::Config("[family] needs exactly one of `modes` or `spectrum`".into())),
            };
            DichotomySpec::scalar_shifted(spectrum, a.build(&base)?, n, delta)?
        }
    };
    if let Some(split) = &sc.split {
        spec = spec.with_split(split.clone())?;
    }
    let modes = spec.modes();
    let default_space = if modes == 1 { SpaceDecl::Scalar } else { SpaceDecl::Sup };
    let geom = geometry(sc.space.unwrap_or(default_space), modes)?;
    let f = sc.nonlinearity.build(&base)?;
    let cfg = solver_config(&sc.grid, sc.solver.as_ref())?;
    let out = solve_semilinear_evolution(&f, &spec, &geom, sc.rho, exponent(sc.p)?, &cfg)?;
    let report = json!({
        "command": "solve-evo", "name": sc.name, "hypotheses": out.hypotheses, "tail": out.tail,
        "max_iterate_norm": out.max_iterate_norm, "report": out.report,
    });
    Ok(Outcome { table: modes_table(&out.solution), report, output: output(sc.output) })
}

pub fn lotka(config: Option<&Path>) -> Result<Outcome, CliError> {
    let path = scenario_path(config, "lotka")?;
    let sc: LotkaScenario = config::load(&path)?;
    let base = base_dir(Some(&path));
    let params = LotkaVolterraParams {
        a: sc.a.build(&base)?,
        b: sc.b.build(&base)?,
        c: sc.c.iter().map(|f| f.build(&base)).collect::<Result<_, _>>()?,
        modes: sc.modes,
        rho: sc.rho,
        delta: sc.delta,
        xs: sc.points.map(Field::default_points),
    };
    let cfg = solver_config(&sc.grid, sc.solver.as_ref())?;
    let run = lotka_volterra_run(&params, &cfg)?;
    let report = json!({
        "command": "lotka", "name": sc.name, "bound": run.bound, "hypotheses": run.solve.hypotheses,
        "tail": run.solve.tail, "max_iterate_norm": run.solve.max_iterate_norm, "report": run.solve.report,
    });
    Ok(Outcome { table: field_table(&run.field), report, output: output(sc.output) })
}

/// Relative increase tolerated between consecutive points of a decay curve.
const CURVE_NOISE: f64 = 0.05;

pub fn compose_check(config: Option<&Path>) -> Result<Outcome, CliError> {
    let path = scenario_path(config, "compose-check")?;
    let sc: ComposeScenario = config::load(&path)?;
    let base = base_dir(Some(&path));
    let f = sc.nonlinearity.build(&base)?;
    let x = sc.x.build(&base)?;
    let x1 = sc.x1.build(&base)?;
    let density = sc.density.build(&base)?;
    let curve = composition_ergodic_check(&f, &x, &x1, &density, exponent(sc.p)?, &sc.r)?;
    let mut table = Table::new(["r", "mean"]);
    for &(r, m) in &curve {
        table.push(vec![r.into(), m.into()]);
    }
    let nonincreasing = curve.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + CURVE_NOISE));
    let rows: Vec<Value> = curve.iter().map(|(r, m)| json!({"r": r, "mean": m})).collect();
    let report = json!({
        "command": "compose-check", "name": sc.name, "density": density.tag(), "p": sc.p,
        "curve": rows, "nonincreasing": nonincreasing, "noise_allowance": CURVE_NOISE,
    });
    Ok(Outcome { table, report, output: output(sc.output) })
}
