//! Subcommand bodies. Each returns the full text written to stdout.

use std::fs::File;
use std::sync::Arc;

use bessel_core::domain::{estima_check_analytic, hardy_check, kato_bound_check, rellich_check, InequalityRecord};
use bessel_core::holo::{circle_points, random_family};
use bessel_core::suite::form_grid;
use bessel_core::{
    divergence_profile, domain_decompose, ellr1_residual, factorization_check, family_analyticity, g_tau,
    green_residual, kato_rellich_check, make_log_grid, norm_report, region_classify, report_json, rpow, run_suite,
    Bump, CouplingParameter, CutoffSpec, FactorSign, GridFunction, InequalityKind, KernelKind, KernelSpec,
    NormKind, OutputFormat, RadialGrid, RunConfig,
};
use num_complex::Complex64;
use serde_json::json;

use crate::{Command, Failure, ParamArgs};

type Outcome = Result<String, Failure>;

/// Upper end of the grid used for the critical-line profile.
const PATHOLOGY_T_MAX: f64 = 0.05;

pub fn execute(cmd: &Command, cfg: &RunConfig) -> Outcome {
    match cmd {
        Command::Norm { param, kind } => norm(cfg, param, kind),
        Command::Region { param } => region(cfg, param),
        Command::GreenCheck { param, kind, cutoff, center, sharpness } => {
            green_check(cfg, param, kind, *cutoff, *center, *sharpness)
        }
        Command::Boundary { param, input, sample, plateau, support } => {
            boundary(cfg, param, input.as_deref(), sample, *plateau, *support)
        }
        Command::Check { inequality, m, cutoff } => check(cfg, inequality, *m, *cutoff),
        Command::Pathology { tau, m, depth, a } => pathology(cfg, *tau, *m, *depth, *a),
        Command::Factorize { m, sign } => factorize(cfg, *m, sign),
        Command::Holo { alpha0, radius, size, relative_bound } => holo(cfg, *alpha0, *radius, *size, *relative_bound),
        Command::Report => report(cfg),
    }
}

fn to_json<T: serde::Serialize + ?Sized>(v: &T) -> Outcome {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Outcome {
    let mut wr = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| Failure::Internal(e.to_string());
    wr.write_record(header).map_err(internal)?;
    for row in rows {
        wr.write_record(row).map_err(internal)?;
    }
    let bytes = wr.into_inner().map_err(|e| Failure::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Internal(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn config_grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>, Failure> {
    Ok(make_log_grid(cfg.t_min, cfg.t_max, cfg.n)?)
}

fn coupling(param: &ParamArgs) -> Result<CouplingParameter, Failure> {
    Ok(match param.m {
        Some(m) if param.alpha.is_none() => CouplingParameter::from_m(m)?,
        _ => CouplingParameter::from_alpha(param.alpha())?,
    })
}

fn norm(cfg: &RunConfig, param: &ParamArgs, kind: &str) -> Outcome {
    let kind: NormKind = kind.parse()?;
    let p = coupling(param)?;
    let rep = norm_report(&p, kind, &config_grid(cfg)?)?;
    match cfg.format {
        OutputFormat::Json => to_json(&rep),
        OutputFormat::Csv => {
            let rows = [&rep.distance_closed_form, &rep.multiplier_sup, &rep.discretized_svd]
                .iter()
                .map(|e| vec![format!("{:?}", e.method), num(e.value)])
                .collect::<Vec<_>>();
            csv_table(&["method", "value"], &rows)
        }
    }
}

fn region(cfg: &RunConfig, param: &ParamArgs) -> Outcome {
    let alpha = param.alpha();
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Failure::Validation(format!("alpha = {alpha} is not finite")));
    }
    let r = region_classify(alpha);
    match cfg.format {
        OutputFormat::Json => to_json(&json!({ "alpha": alpha, "region": r.class, "distance": r.distance })),
        OutputFormat::Csv => csv_table(
            &["alpha_re", "alpha_im", "region", "distance"],
            &[vec![num(alpha.re), num(alpha.im), r.class.to_string(), num(r.distance)]],
        ),
    }
}

fn green_check(
    cfg: &RunConfig,
    param: &ParamArgs,
    kind: &str,
    cutoff: Option<f64>,
    center: f64,
    sharpness: f64,
) -> Outcome {
    let kind: KernelKind = kind.parse()?;
    if !kind.is_green() {
        return Err(Failure::Validation(format!("{kind:?} is not a Green kernel")));
    }
    if !(sharpness > 0.0 && sharpness.is_finite() && center.is_finite()) {
        return Err(Failure::Validation("source needs a finite centre and positive sharpness".into()));
    }
    let spec = KernelSpec::new(kind, coupling(param)?, cutoff)?;
    let source = |x: f64| (-sharpness * (x - center) * (x - center)).exp();
    let mut rows = Vec::new();
    for n in [cfg.n, 2 * cfg.n] {
        let grid = make_log_grid(cfg.t_min, cfg.t_max, n)?;
        rows.push((n, green_residual(&spec, &GridFunction::from_real_fn(&grid, source))?));
    }
    let order = (rows[0].1 / rows[1].1).log2();
    let tol = cfg.tol("green_residual");
    match cfg.format {
        OutputFormat::Json => to_json(&json!({
            "kind": kind,
            "m": spec.param().m(),
            "alpha": spec.param().alpha(),
            "cutoff": cutoff,
            "n": [rows[0].0, rows[1].0],
            "residual": [rows[0].1, rows[1].1],
            "order": order,
            "tolerance": tol,
            "passed": rows[1].1 <= tol,
        })),
        OutputFormat::Csv => csv_table(
            &["n", "residual"],
            &rows.iter().map(|(n, r)| vec![n.to_string(), num(*r)]).collect::<Vec<_>>(),
        ),
    }
}

fn boundary(
    cfg: &RunConfig,
    param: &ParamArgs,
    input: Option<&std::path::Path>,
    sample: &str,
    plateau: f64,
    support: f64,
) -> Outcome {
    let p = coupling(param)?;
    let xi = CutoffSpec::new(plateau, support)?;
    let f = match input {
        Some(path) => {
            let file = File::open(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            GridFunction::read_csv(file)?
        }
        None => {
            let grid = config_grid(cfg)?;
            let m = p.m();
            match sample {
                "power-plus" => GridFunction::from_fn(&grid, |x| rpow(x, 0.5 + m) * xi.eval(x)),
                "power-minus" => GridFunction::from_fn(&grid, |x| rpow(x, 0.5 - m) * xi.eval(x)),
                "smooth" => GridFunction::from_real_fn(&grid, |x| x * x * (-x).exp()),
                other => return Err(Failure::Validation(format!("unknown sample '{other}'"))),
            }
        }
    };
    let d = domain_decompose(&p, &f, &xi)?;
    let bc = &d.coefficients;
    match cfg.format {
        OutputFormat::Json => to_json(&json!({
            "m": p.m(),
            "alpha": p.alpha(),
            "coefficients": bc,
            "classification": d.classification,
            "f0_report": d.f0_report,
        })),
        OutputFormat::Csv => {
            let class = serde_json::to_value(d.classification).map_err(|e| Failure::Internal(e.to_string()))?;
            csv_table(
                &["c_plus_re", "c_plus_im", "c_minus_re", "c_minus_im", "residual", "classification"],
                &[vec![
                    num(bc.c_plus.re),
                    num(bc.c_plus.im),
                    num(bc.c_minus.re),
                    num(bc.c_minus.im),
                    num(bc.residual),
                    class.as_str().unwrap_or_default().to_string(),
                ]],
            )
        }
    }
}

fn check(cfg: &RunConfig, inequality: &str, m: Complex64, cutoff: f64) -> Outcome {
    let kind: InequalityKind = inequality.parse()?;
    let c = |v: f64| Complex64::new(v, 0.0);
    let rec: InequalityRecord = match kind {
        InequalityKind::Estima => {
            let ind = |x: f64| if x <= 1.0 { c(1.0) } else { c(0.0) };
            estima_check_analytic(&ind, 1.0, &[])?
        }
        InequalityKind::Rellich => {
            let u = |x: f64| c(x * x * (-x).exp());
            let du = |x: f64| c((2.0 * x - x * x) * (-x).exp());
            let d2u = |x: f64| c((2.0 - 4.0 * x + x * x) * (-x).exp());
            rellich_check(&u, &du, &d2u, 80.0)?
        }
        InequalityKind::Hardy => {
            let u = |x: f64| c(x * (-x).exp());
            let du = |x: f64| c((1.0 - x) * (-x).exp());
            hardy_check(&u, &du, 80.0)?
        }
        InequalityKind::KatoBound => {
            let p = CouplingParameter::from_m(m)?;
            let g = GridFunction::from_real_fn(&config_grid(cfg)?, |x| (-8.0 * (x - 1.0) * (x - 1.0)).exp());
            kato_bound_check(&p, &g, cutoff)?
        }
    };
    match cfg.format {
        OutputFormat::Json => to_json(&json!({ "record": rec, "holds": rec.holds() })),
        OutputFormat::Csv => csv_table(
            &["kind", "lhs", "rhs", "ratio", "holds"],
            &[vec![inequality.to_string(), num(rec.lhs), num(rec.rhs), num(rec.ratio), rec.holds().to_string()]],
        ),
    }
}

fn pathology(cfg: &RunConfig, tau: f64, m: Complex64, depth: f64, a: f64) -> Outcome {
    if !(depth > 5.0 && depth.is_finite()) {
        return Err(Failure::Validation(format!("depth {depth} must exceed 5")));
    }
    let grid = make_log_grid(-depth, PATHOLOGY_T_MAX, 2 * cfg.n)?;
    let t = g_tau(tau, m, &grid)?;
    let xs: Vec<f64> = (0..)
        .map(|k| 4.0 + 3.8 * k as f64)
        .take_while(|s| *s <= depth - 1.0)
        .map(|s| (-s).exp())
        .collect();
    let mut profile = divergence_profile(&t, &xs)?;
    let limit = ellr1_residual(&t, a, &xs)?;
    profile.limit_residual = Some(limit.residual.clone());
    match cfg.format {
        OutputFormat::Json => to_json(&profile),
        OutputFormat::Csv => {
            let rows = (0..xs.len())
                .map(|k| {
                    vec![
                        num(xs[k]),
                        num(profile.integral_values[k].norm()),
                        num(profile.lower_bound_curve[k]),
                        num(limit.residual[k]),
                    ]
                })
                .collect::<Vec<_>>();
            csv_table(&["x", "|I|", "bound", "residual"], &rows)
        }
    }
}

fn factorize(cfg: &RunConfig, m: Complex64, sign: &str) -> Outcome {
    let sign: FactorSign = sign.parse()?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let grid = form_grid(cfg)?;
    let f = Bump::new(1.0, 2.0, vec![c(1.0, 0.0), c(0.0, 2.0)])?.sample(&grid);
    let g = Bump::new(0.8, 2.5, vec![c(0.5, 0.5), c(-1.0, 0.0), c(0.2, 0.0)])?.sample(&grid);
    let r = factorization_check(m, sign, &f, &g)?;
    match cfg.format {
        OutputFormat::Json => to_json(&r),
        OutputFormat::Csv => {
            let mut rows = vec![vec![
                "plus".to_string(),
                num(r.value_plus.re),
                num(r.value_plus.im),
                num(r.reference.re),
                num(r.reference.im),
                num(r.deviation_plus),
            ]];
            if let (Some(v), Some(d)) = (r.value_minus, r.deviation_minus) {
                rows.push(vec![
                    "minus".to_string(),
                    num(v.re),
                    num(v.im),
                    num(r.reference.re),
                    num(r.reference.im),
                    num(d),
                ]);
            }
            csv_table(&["form", "value_re", "value_im", "reference_re", "reference_im", "deviation"], &rows)
        }
    }
}

fn holo(cfg: &RunConfig, alpha0: Complex64, radius: f64, size: usize, relative_bound: f64) -> Outcome {
    let grid = config_grid(cfg)?;
    let g = GridFunction::from_real_fn(&grid, |x| (-20.0 * (x - 0.5) * (x - 0.5)).exp());
    let analyticity = family_analyticity(alpha0, radius, &g, 1.0)?;
    let fam = random_family(size, relative_bound, cfg.seed)?;
    let zs = circle_points(0.9 * fam.radius(), 8, 0.0);
    let kr = kato_rellich_check(&fam, &zs, cfg.seed)?;
    match cfg.format {
        OutputFormat::Json => to_json(&json!({ "analyticity": analyticity, "kato_rellich": kr })),
        OutputFormat::Csv => {
            let rows = kr
                .samples
                .iter()
                .map(|s| {
                    vec![
                        num(s.z.re),
                        num(s.z.im),
                        num(s.polynomial_residual),
                        num(s.cauchy_riemann_residual),
                        num(s.ratio_min),
                        num(s.ratio_max),
                        num(s.lower_bound),
                        num(s.upper_bound),
                    ]
                })
                .collect::<Vec<_>>();
            csv_table(
                &[
                    "z_re",
                    "z_im",
                    "polynomial_residual",
                    "cauchy_riemann_residual",
                    "ratio_min",
                    "ratio_max",
                    "lower_bound",
                    "upper_bound",
                ],
                &rows,
            )
        }
    }
}

fn report(cfg: &RunConfig) -> Outcome {
    let rep = run_suite(cfg);
    match cfg.format {
        OutputFormat::Json => Ok(report_json(&rep) + "\n"),
        OutputFormat::Csv => {
            let rows = rep
                .criteria
                .iter()
                .map(|c| vec![c.id.to_string(), c.title.clone(), c.passed.to_string(), c.failures.join("; ")])
                .collect::<Vec<_>>();
            csv_table(&["id", "title", "passed", "failures"], &rows)
        }
    }
}
