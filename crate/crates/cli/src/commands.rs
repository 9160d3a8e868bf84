use hypermono::circle_solutions::{f_piece, ft_residuals};
use hypermono::gammaprod::{balanced_gamma, paley_wiener_growth, stirling_bound_check};
use hypermono::local_solutions::{build_basis, eval_series, CoverPoint, SeriesSide};
use hypermono::matrices::cyclic_form_check;
use hypermono::monodromy::{
    basis_change_check, default_branch, eigenvalue_check, interval_samples, levelt_check, monodromy_matrices,
    pseudoreflection_check, replication_identity_check, Basis, ReplicationWeights,
};
use hypermono::ode_oracle::{oracle_check, OdeParams};
use hypermono::quadrature::QuadratureParams;
use hypermono::{
    group_exponents, CheckResult, Complex64, ComplexExt, ComplexMatrix, ExponentData, MultiplicityStructure, Real,
    Side, VerificationReport,
};
use num_complex::Complex;
use serde_json::{json, Value};

use crate::parse;
use crate::{emit, Command, Common, ComputeArgs, EvalArgs, Failure, Format, OracleArgs, Precision, VerifyArgs, What};

const ALL_CHECKS: [&str; 7] = ["ft", "cyclic", "identity", "pseudoreflection", "replication", "oracle", "stirling"];

/// Stirling bound constant used by `verify --checks stirling`.
const STIRLING_C: f64 = 2.0;

pub fn run(command: Command) -> Result<(), Failure> {
    let common = match &command {
        Command::Compute(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Eval(a) => &a.common,
        Command::Oracle(a) => &a.common,
    };
    match parse::precision(common)? {
        Precision::Double => dispatch::<f64>(&command),
        Precision::Extended => extended(&command),
    }
}

#[cfg(feature = "extended")]
fn extended(command: &Command) -> Result<(), Failure> {
    dispatch::<hypermono::Real128>(command)
}

#[cfg(not(feature = "extended"))]
fn extended(_: &Command) -> Result<(), Failure> {
    Err(Failure::Input("this build has no extended precision support".into()))
}

fn dispatch<T: Real>(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Compute(a) => compute::<T>(a),
        Command::Verify(a) => verify::<T>(a),
        Command::Eval(a) => eval::<T>(a),
        Command::Oracle(a) => oracle::<T>(a),
    }
}

fn basis(s: &str) -> Result<Basis, Failure> {
    Ok(s.parse::<Basis>()?)
}

fn lift<T: Real>(z: Complex64) -> Complex<T> {
    Complex::from_f64(z.re, z.im)
}

fn pair<T: Real>(z: Complex<T>) -> Value {
    json!(z.to_pair())
}

fn matrix_json<T: Real>(m: &ComplexMatrix<T>) -> Value {
    json!(m.to_f64().to_pairs())
}

fn positive(name: &str, tol: Option<f64>) -> Result<(), Failure> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Failure::Input(format!("{name} must be positive, got {t}"))),
        _ => Ok(()),
    }
}

/// Integrator tolerances a few digits below `tol`, floored near the
/// working precision of `T`.
fn ode_params<T: Real>(tol: f64) -> OdeParams {
    let floor = T::epsilon().to_f64_lossy() * 1e3;
    let rtol = (tol * 1e-4).min(OdeParams::default().rtol).max(floor);
    OdeParams { rtol, atol: rtol * 1e-2, ..OdeParams::default() }
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn compute<T: Real>(args: &ComputeArgs) -> Result<(), Failure> {
    let (alpha, beta) = parse::exponent_strings(&args.common)?;
    let data = ExponentData::parse(&alpha, &beta)?;
    let basis = basis(&args.basis)?;
    let l = args.l.unwrap_or_else(|| default_branch(data.n()));
    let res = monodromy_matrices::<T>(&data, basis, l)?;
    let m = &res.matrices;
    if !(m.m0.is_finite() && m.minf.is_finite() && m.mlambda.is_finite()) {
        return Err(Failure::Numerical("non-finite matrix entries".into()));
    }
    let text = match args.common.format {
        Format::Json => json_text(&json!({
            "n": data.n(),
            "lambda": pair(data.lambda::<T>()),
            "basis": basis.to_string(),
            "l": l,
            "alpha": alpha,
            "beta": beta,
            "M0": matrix_json(&m.m0),
            "Minf": matrix_json(&m.minf),
            "Mlambda": matrix_json(&m.mlambda),
        })),
        Format::Csv => {
            let mut out = String::from("matrix,row,col,re,im\n");
            for (name, mat) in [("M0", &m.m0), ("Minf", &m.minf), ("Mlambda", &m.mlambda)] {
                for (i, row) in mat.to_f64().to_pairs().iter().enumerate() {
                    for (j, [re, im]) in row.iter().enumerate() {
                        out.push_str(&format!("{name},{i},{j},{re:?},{im:?}\n"));
                    }
                }
            }
            out
        }
    };
    emit(&args.common, &text)
}

fn report_text(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => json_text(&serde_json::to_value(report).expect("reports serialize")),
        Format::Csv => {
            let mut out = String::from("check,pass,residual\n");
            for (name, c) in &report.checks {
                out.push_str(&format!("{},{},{:?}\n", csv_field(name), c.pass, c.residual));
            }
            out
        }
    }
}

/// Emits the report; failing checks map to exit code 3.
fn finish(common: &Common, report: &VerificationReport) -> Result<(), Failure> {
    emit(common, &report_text(report, common.format))?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn selected_checks(list: &str) -> Result<Vec<&'static str>, Failure> {
    let mut out: Vec<&'static str> = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "all" {
            for c in ALL_CHECKS {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            continue;
        }
        let c = ALL_CHECKS.iter().find(|&&c| c == item).ok_or_else(|| {
            Failure::Input(format!("unknown check {item:?} (expected one of {}, all)", ALL_CHECKS.join(", ")))
        })?;
        if !out.contains(c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(Failure::Input("no checks selected".into()));
    }
    Ok(out)
}

fn verify<T: Real>(args: &VerifyArgs) -> Result<(), Failure> {
    positive("--tol", args.tol)?;
    let checks = selected_checks(&args.checks)?;
    let explicit_all = args.checks.split(',').any(|c| c.trim() == "all");
    let has_exponents = args.common.alpha.is_some() || args.common.beta.is_some() || args.common.input.is_some();
    let basis = basis(&args.basis)?;
    let mut report = VerificationReport::new();

    // strictly validated data, parsed on first use
    let mut strict: Option<ExponentData> = None;
    let mut data = |common: &Common| -> Result<ExponentData, Failure> {
        if strict.is_none() {
            let (a, b) = parse::exponent_strings(common)?;
            strict = Some(ExponentData::parse(&a, &b)?);
        }
        Ok(strict.clone().expect("just set"))
    };

    for check in checks {
        // with `all` and no exponents only the exponent-free checks apply
        if explicit_all && !has_exponents && !matches!(check, "cyclic" | "stirling") {
            continue;
        }
        match check {
            "ft" => {
                let (a, b) = parse::exponent_strings(&args.common)?;
                let d = ExponentData::parse_unchecked(&a, &b)?;
                if explicit_all && d.n() > hypermono::circle_solutions::MAX_DIRECT_N {
                    continue;
                }
                verify_ft::<T>(&d, &args.s, args.tol.unwrap_or(1e-10), &mut report)?;
            }
            "cyclic" => {
                let tol = args.tol.unwrap_or(1e-9);
                match &args.values {
                    Some(v) => {
                        let (vals, mults) = parse::values(v)?;
                        let ms = MultiplicityStructure::from_values(vals.into_iter().map(lift::<T>).collect(), mults)?;
                        let l = args.l.unwrap_or_else(|| default_branch(ms.n()));
                        report.merge("cyclic", cyclic_form_check(&ms, l, tol)?);
                    }
                    None => {
                        let d = data(&args.common)?;
                        let l = args.l.unwrap_or_else(|| default_branch(d.n()));
                        for (name, side) in [("A", Side::Alpha), ("B", Side::Beta)] {
                            let ms = group_exponents::<T>(&d, side);
                            report.merge(&format!("cyclic.{name}"), cyclic_form_check(&ms, l, tol)?);
                        }
                    }
                }
            }
            "identity" => {
                let d = data(&args.common)?;
                let l = args.l.unwrap_or_else(|| default_branch(d.n()));
                let tol = args.tol.unwrap_or(1e-9);
                let res = monodromy_matrices::<T>(&d, basis, l)?;
                report.insert(
                    "identity.relation",
                    CheckResult::within(
                        res.matrices.relation_residual(),
                        tol,
                        json!({ "basis": basis.to_string(), "order": "M_inf M_0 M_lambda = I" }),
                    ),
                );
                report.merge("identity.eigenvalues", eigenvalue_check(&res, tol));
                report.merge("identity.basis_change", basis_change_check::<T>(&d, l, tol)?);
                report.merge("identity.levelt", levelt_check::<T>(&d, l, tol)?);
            }
            "pseudoreflection" => {
                let d = data(&args.common)?;
                let l = args.l.unwrap_or_else(|| default_branch(d.n()));
                let res = monodromy_matrices::<T>(&d, basis, l)?;
                report.merge("pseudoreflection", pseudoreflection_check(&res));
            }
            "replication" => {
                let d = data(&args.common)?;
                let l = args.l.unwrap_or_else(|| default_branch(d.n()));
                verify_replication::<T>(&d, l, args.tol.unwrap_or(1e-6), &mut report)?;
            }
            "oracle" => {
                let d = data(&args.common)?;
                let l = args.l.unwrap_or_else(|| default_branch(d.n()));
                let tol = args.tol.unwrap_or(1e-6);
                let r = oracle_check::<T>(&d, basis, l, tol, &ode_params::<T>(tol))?;
                report.merge("oracle", r);
            }
            "stirling" => {
                let mut grid = Vec::with_capacity(81 * 81);
                for i in 0..=80 {
                    for j in 0..=80 {
                        grid.push(Complex::from_f64(-20.0 + 0.5 * i as f64, -20.0 + 0.5 * j as f64));
                    }
                }
                report.merge("", stirling_bound_check::<T>(&grid, STIRLING_C));
                if has_exponents {
                    let (a, b) = parse::exponent_strings(&args.common)?;
                    let d = ExponentData::parse_unchecked(&a, &b)?;
                    report.merge("", paley_wiener_growth::<T>(&d, 40.0, args.tol.unwrap_or(0.05)));
                }
            }
            _ => unreachable!("filtered by selected_checks"),
        }
    }
    finish(&args.common, &report)
}

fn verify_ft<T: Real>(
    d: &ExponentData,
    s: &[String],
    tol: f64,
    report: &mut VerificationReport,
) -> Result<(), Failure> {
    let points: Vec<Complex<T>> = if s.is_empty() {
        let mut v: Vec<Complex<T>> = (-2..=2).map(|k| Complex::from_f64(k as f64, 0.0)).collect();
        v.push(Complex::from_f64(0.0, 1.0));
        v.push(Complex::from_f64(0.5, -0.75));
        v
    } else {
        s.iter().map(|x| parse::complex(x).map(lift::<T>)).collect::<Result<_, _>>()?
    };
    let quad = QuadratureParams::with_tol((tol * 1e-2).max(1e-13));
    let res = ft_residuals::<T>(d, &points, &quad)?;
    let worst = res.iter().fold(0f64, |m, r| m.max(r.to_f64_lossy()));
    let samples: Vec<Value> =
        points.iter().zip(&res).map(|(p, r)| json!({ "s": pair(*p), "residual": r.to_f64_lossy() })).collect();
    report.insert("ft", CheckResult::within(worst, tol, json!({ "samples": samples })));
    Ok(())
}

fn verify_replication<T: Real>(
    d: &ExponentData,
    l: i64,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<(), Failure> {
    let quad = QuadratureParams::with_tol(1e-10);
    let ode = ode_params::<T>(tol);
    let phis = interval_samples::<T>(d.n(), l, 5);
    for side in [SeriesSide::Zero, SeriesSide::Infinity] {
        let plain = replication_identity_check::<T>(d, side, l, &phis, ReplicationWeights::Plain, tol, &quad, &ode)?;
        // the alternative (2 pi i (l-k))^r weights, reported for comparison only
        let alt =
            replication_identity_check::<T>(d, side, l, &phis, ReplicationWeights::TwoPiI, f64::INFINITY, &quad, &ode)?;
        let alt_residual = alt.max_residual();
        for (name, mut c) in plain.checks {
            if let Value::Object(map) = &mut c.details {
                map.insert("two_pi_i_residual".into(), json!(alt_residual));
            }
            report.insert(format!("replication.{name}"), c);
        }
    }
    Ok(())
}

fn oracle<T: Real>(args: &OracleArgs) -> Result<(), Failure> {
    positive("--tol", Some(args.tol))?;
    let (a, b) = parse::exponent_strings(&args.common)?;
    let d = ExponentData::parse(&a, &b)?;
    let basis = basis(&args.basis)?;
    let l = args.l.unwrap_or_else(|| default_branch(d.n()));
    let report = oracle_check::<T>(&d, basis, l, args.tol, &ode_params::<T>(args.tol))?;
    finish(&args.common, &report)
}

/// One evaluated row: input columns and a complex value.
struct Row {
    input: Vec<(&'static str, Value)>,
    value: [f64; 2],
}

fn eval<T: Real>(args: &EvalArgs) -> Result<(), Failure> {
    positive("--tol", args.tol)?;
    let (a, b) = parse::exponent_strings(&args.common)?;
    let rows = match args.what {
        What::Gamma => {
            let d = ExponentData::parse_unchecked(&a, &b)?;
            if args.s.is_empty() {
                return Err(Failure::Input("--s is required for gamma".into()));
            }
            args.s
                .iter()
                .map(|s| {
                    let s = lift::<T>(parse::complex(s)?);
                    let v = balanced_gamma(&d, s);
                    Ok(Row { input: vec![("s", pair(s))], value: v.to_pair() })
                })
                .collect::<Result<Vec<_>, Failure>>()?
        }
        What::SA | What::SB => {
            let d = ExponentData::parse(&a, &b)?;
            let side = if args.what == What::SA { SeriesSide::Zero } else { SeriesSide::Infinity };
            if args.z.is_empty() {
                return Err(Failure::Input("--z is required for series evaluation".into()));
            }
            if args.arg.len() != args.z.len() {
                return Err(Failure::Input(format!(
                    "each --z needs a matching --arg selecting the branch (got {} and {})",
                    args.z.len(),
                    args.arg.len()
                )));
            }
            let basis = build_basis::<T>(&d, side, args.truncation);
            let series = basis.iter().find(|s| s.j == args.j && s.r == args.r).ok_or_else(|| {
                let pairs: Vec<String> = basis.iter().map(|s| format!("({}, {})", s.j, s.r)).collect();
                Failure::Input(format!("no series with j = {}, r = {}; available: {}", args.j, args.r, pairs.join(" ")))
            })?;
            args.z
                .iter()
                .zip(&args.arg)
                .map(|(z, &arg)| {
                    let z = lift::<T>(parse::complex(z)?);
                    let point = CoverPoint::new(z, Some(T::lit(arg)))?;
                    let v = eval_series(series, &point)?;
                    Ok(Row { input: vec![("z", pair(z)), ("arg", json!(arg))], value: v.to_pair() })
                })
                .collect::<Result<Vec<_>, Failure>>()?
        }
        What::F => {
            let d = ExponentData::parse_unchecked(&a, &b)?;
            let mut phis = args.phi.clone();
            if let Some(g) = &args.phi_grid {
                phis.extend(parse::grid(g)?);
            }
            if phis.is_empty() {
                return Err(Failure::Input("--phi or --phi-grid is required for f".into()));
            }
            let quad = QuadratureParams::with_tol(args.tol.unwrap_or(1e-10));
            let grid: Vec<T> = phis.iter().map(|&p| T::lit(p)).collect();
            let sample = f_piece(&d, args.k, &grid, &quad)?;
            sample
                .grid
                .iter()
                .zip(&sample.values)
                .map(|(p, v)| Row { input: vec![("phi", json!(p.to_f64_lossy()))], value: v.to_pair() })
                .collect()
        }
    };
    if rows.iter().any(|r| !r.value.iter().all(|x| x.is_finite())) {
        return Err(Failure::Numerical("non-finite value".into()));
    }
    let text = match args.common.format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut m = serde_json::Map::new();
                    for (k, v) in &r.input {
                        m.insert((*k).into(), v.clone());
                    }
                    m.insert("value".into(), json!(r.value));
                    Value::Object(m)
                })
                .collect();
            json_text(&Value::Array(items))
        }
        Format::Csv => {
            let mut out = String::new();
            if let Some(first) = rows.first() {
                let mut header: Vec<String> = Vec::new();
                for (k, v) in &first.input {
                    if v.is_array() {
                        header.push(format!("{k}_re"));
                        header.push(format!("{k}_im"));
                    } else {
                        header.push((*k).to_string());
                    }
                }
                header.push("re".into());
                header.push("im".into());
                out.push_str(&header.join(","));
                out.push('\n');
            }
            for r in &rows {
                let mut cells: Vec<String> = Vec::new();
                for (_, v) in &r.input {
                    match v {
                        Value::Array(xs) => cells.extend(xs.iter().map(|x| x.to_string())),
                        other => cells.push(other.to_string()),
                    }
                }
                cells.push(format!("{:?}", r.value[0]));
                cells.push(format!("{:?}", r.value[1]));
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
    };
    emit(&args.common, &text)
}
