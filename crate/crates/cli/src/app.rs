//! Subcommands, their JSON output and exit codes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mcomp::classifier::{classify_data, BetaConvention, SpectrumKind, Target};
use mcomp::completion::{
    completable, corollary_consistency_check, decision_matches_region, empty_w_check, eta_check,
    filling_holes_check, harte_identity_check, mc_point_data, no_interior_corollary_check, s_class_proposition_check,
    sandwich_check, BlockMatrixExpr, CompletionCertificate, Corner, DeltaForm, HypothesisCheck, McData, SampleConfig,
    Verdict,
};
use mcomp::numeric::GQ;
use mcomp::operator::{index, point_data, OperatorExpr};
use mcomp::oracle::{estimate_point_data, GapEvidence, OracleConfig, Operand};
use mcomp::region::{sample_grid, to_pgm};
use mcomp::spectra::spectrum_region;
use mcomp::Error;

use crate::dsl::{parse_expr, parse_gq, parse_rat};

pub const SCHEMA: &str = "1";

/// Exit codes.
pub const OK: i32 = 0;
pub const FAILS: i32 = 1;
pub const USAGE: i32 = 2;
pub const INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mcomp", version, about = "Spectra and completions of 2x2 upper-triangular operator matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Point data of T - λ and its class memberships.
    Classify {
        /// Operator expression, or @file.
        #[arg(long)]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "spec")]
        kind: String,
    },
    /// Exact spectrum of the given kind as a region.
    Spectrum {
        #[arg(long)]
        op: String,
        #[arg(long)]
        kind: String,
        /// Write the region JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a binary PGM membership grid here.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Plot window x0,y0,x1,y1.
        #[arg(long, default_value = "-2,-2,2,2", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 256)]
        res: usize,
    },
    /// Decide whether some corner C puts M_C - λ in the target class.
    Complete {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "fli")]
        target: String,
        /// Write the certificate JSON here.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Check one of the structural statements on (A, B, C).
    Verify {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// `zero` or a certificate JSON file (optionally prefixed with @).
        #[arg(long, default_value = "zero")]
        c: String,
        #[arg(long, default_value = "fli")]
        target: String,
        /// Point for `completion` and `harte` when no certificate fixes one.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "64,128,256")]
        sizes: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        cap: Option<usize>,
        /// Reading of the FRI statements: `dual` or as `printed`.
        #[arg(long, value_enum, default_value_t = Form::Dual)]
        form: Form,
        /// β convention for the S± classes.
        #[arg(long, value_enum, default_value_t = Conv::Closure)]
        conv: Conv,
    },
    /// Numerical point data from finite sections.
    Oracle {
        #[arg(long)]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "64,128,256")]
        sizes: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        cap: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Check {
    Completion,
    Sandwich,
    Eta,
    Holes,
    Harte,
    Delta,
    #[value(alias = "dong")]
    EmptyW,
    Sclass,
    NoInterior,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    Dual,
    Printed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Conv {
    Algebraic,
    Closure,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

type Outcome = Result<(Value, i32), Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: USAGE, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::TooManyPredicates(_)
            | Error::Degenerate(_)
            | Error::Inexpressible(_)
            | Error::Numeric(_)
            | Error::Unbounded => INCONCLUSIVE,
            _ => USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Text of an argument given inline or as `@file`.
fn text(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn expr(arg: &str) -> Result<OperatorExpr, Failure> {
    parse_expr(&text(arg)?).map_err(|e| usage(e.to_string()))
}

fn point(arg: &str) -> Result<GQ, Failure> {
    parse_gq(arg.trim()).map_err(|e| usage(format!("lambda: {e}")))
}

fn kind(arg: &str) -> Result<SpectrumKind, Failure> {
    arg.parse().map_err(|e: Error| usage(e.to_string()))
}

fn target(arg: &str) -> Result<Target, Failure> {
    arg.parse().map_err(|e: Error| usage(e.to_string()))
}

fn sizes(arg: &str) -> Result<Vec<usize>, Failure> {
    arg.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| usage(format!("bad size `{s}`"))))
        .collect()
}

fn oracle_config(tol: f64, cap: Option<usize>) -> OracleConfig {
    let d = OracleConfig::default();
    OracleConfig { tol, cap_per_atom: cap.unwrap_or(d.cap_per_atom), ..d }
}

fn corner(arg: &str) -> Result<Corner, Failure> {
    if arg == "zero" {
        return Ok(Corner::Zero);
    }
    let path = arg.strip_prefix('@').unwrap_or(arg);
    let src = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
    let cert: CompletionCertificate =
        serde_json::from_str(&src).map_err(|e| usage(format!("{path}: not a certificate: {e}")))?;
    Ok(Corner::Cert(cert))
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Exact | Verdict::SampledPass { .. } => OK,
        Verdict::Fail { .. } => FAILS,
        Verdict::Inconclusive { .. } => INCONCLUSIVE,
    }
}

fn classes(p: &mcomp::operator::PointData) -> Value {
    let mut m = serde_json::Map::new();
    for k in SpectrumKind::ALL {
        m.insert(k.name().to_string(), Value::Bool(classify_data(p, k)));
    }
    Value::Object(m)
}

fn classify(op: &str, lambda: &str, kind_arg: &str) -> Outcome {
    let (e, l, k) = (expr(op)?, point(lambda)?, kind(kind_arg)?);
    let p = point_data(&e, &l);
    let resolvent = classify_data(&p, k);
    Ok((
        json!({
            "schema": SCHEMA,
            "op": e.to_string(),
            "lambda": l.to_string(),
            "point_data": {
                "alpha": to_json(&p.alpha),
                "beta_bar": to_json(&p.beta_bar),
                "beta_alg": to_json(&p.beta_alg()),
                "closed": p.closed,
            },
            "index": to_json(&index(&e, &l)),
            "kind": k.name(),
            "resolvent": resolvent,
            "classes": classes(&p),
        }),
        OK,
    ))
}

fn window(arg: &str) -> Result<(GQ, GQ), Failure> {
    let parts: Vec<_> = arg.split(',').map(|s| parse_rat(s.trim())).collect::<Result<_, _>>().map_err(|e| {
        usage(format!("window: {e}"))
    })?;
    let [x0, y0, x1, y1]: [_; 4] = parts.try_into().map_err(|_| usage("window needs x0,y0,x1,y1"))?;
    if x0 >= x1 || y0 >= y1 {
        return Err(usage("window must have x0 < x1 and y0 < y1"));
    }
    Ok((GQ::new(x0, y0), GQ::new(x1, y1)))
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn spectrum(op: &str, kind_arg: &str, out: Option<PathBuf>, plot: Option<PathBuf>, win: &str, res: usize) -> Outcome {
    let (e, k) = (expr(op)?, kind(kind_arg)?);
    if res == 0 {
        return Err(usage("--res must be positive"));
    }
    let r = spectrum_region(&e, k)?;
    let region = to_json(&r);
    if let Some(p) = &plot {
        let (lo, hi) = window(win)?;
        let grid = sample_grid(&r, (&lo, &hi), res)?;
        write_file(p, &to_pgm(&grid))?;
    }
    let doc = json!({ "schema": SCHEMA, "op": e.to_string(), "kind": k.name(), "region": region });
    match out {
        Some(p) => {
            write_file(&p, serde_json::to_string_pretty(&doc).expect("json").as_bytes())?;
            Ok((json!({ "schema": SCHEMA, "written": p.display().to_string() }), OK))
        }
        None => Ok((doc, OK)),
    }
}

fn complete(a: &str, b: &str, lambda: &str, target_arg: &str, cert: Option<PathBuf>) -> Outcome {
    let (a, b, l, t) = (expr(a)?, expr(b)?, point(lambda)?, target(target_arg)?);
    let rep = completable(&a, &b, &l, t);
    if let (Some(p), Some(c)) = (&cert, &rep.certificate) {
        write_file(p, serde_json::to_string_pretty(c).expect("json").as_bytes())?;
    }
    let mut doc = to_json(&rep);
    doc["schema"] = json!(SCHEMA);
    Ok((doc, if rep.decision { OK } else { FAILS }))
}

fn hypothesis_json(h: &HypothesisCheck) -> (Value, i32) {
    let code = if h.holds() {
        OK
    } else {
        h.conclusion.as_ref().map_or(FAILS, verdict_code)
    };
    (json!({ "hypothesis": h.hypothesis, "conclusion": h.conclusion.as_ref().map(to_json) }), code)
}

/// Exact check that the decision at λ agrees with the completable region
/// and, given a certificate, that `M_C - λ` lands in the target class.
fn completion_check(a: &OperatorExpr, b: &OperatorExpr, c: &Corner, l: &GQ, t: Target) -> Result<Verdict, Failure> {
    if !decision_matches_region(a, b, l, t)? {
        return Ok(Verdict::Fail { reason: "decision disagrees with the completable region".into(), at: Some(l.clone()) });
    }
    let Corner::Cert(cert) = c else { return Ok(Verdict::Exact) };
    let k = match t {
        Target::Fli => SpectrumKind::Fli,
        Target::Fri => SpectrumKind::Fri,
        Target::Invertible => SpectrumKind::Spec,
    };
    let m = BlockMatrixExpr::new(a.clone(), b.clone(), c.clone());
    match mc_point_data(&m, l) {
        McData::Exact(pm) if classify_data(&pm, k) => Ok(Verdict::Exact),
        McData::Exact(_) => Ok(Verdict::Fail { reason: "M_C - λ is not in the target class".into(), at: Some(l.clone()) }),
        McData::Deferred => Err(usage(format!("certificate is for λ = {}", cert.lambda))),
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(
    check: Check,
    a: &str,
    b: &str,
    c: &str,
    target_arg: &str,
    lambda: Option<&str>,
    cfg: SampleConfig,
    form: Form,
    conv: Conv,
) -> Outcome {
    let (a, b, c, t) = (expr(a)?, expr(b)?, corner(c)?, target(target_arg)?);
    let form = match form {
        Form::Dual => DeltaForm::Dual,
        Form::Printed => DeltaForm::Printed,
    };
    let conv = match conv {
        Conv::Algebraic => BetaConvention::Algebraic,
        Conv::Closure => BetaConvention::Closure,
    };
    let at = || -> Result<GQ, Failure> {
        match (&c, lambda) {
            (_, Some(l)) => point(l),
            (Corner::Cert(cert), None) => Ok(cert.lambda.clone()),
            (Corner::Zero, None) => Err(usage("this check needs --lambda or a certificate")),
        }
    };
    let (mut body, code) = match check {
        Check::Completion => {
            let v = completion_check(&a, &b, &c, &at()?, t)?;
            (to_json(&v), verdict_code(&v))
        }
        Check::Delta => {
            let v = corollary_consistency_check(&a, &b, t, form)?;
            (to_json(&v), verdict_code(&v))
        }
        Check::Sandwich => {
            let v = sandwich_check(&a, &b, &c, t, &cfg)?;
            (to_json(&v), verdict_code(&v))
        }
        Check::Eta => {
            let v = eta_check(&a, &b, t)?;
            (to_json(&v), verdict_code(&v))
        }
        Check::Holes => {
            let v = filling_holes_check(&a, &b, &c, t, &cfg)?;
            (to_json(&v), verdict_code(&v))
        }
        Check::Harte => {
            let l = at()?;
            let v = if harte_identity_check(&a, &b, &c, &l)? {
                Verdict::Exact
            } else {
                Verdict::Fail { reason: "α(B) + β(M_C) differs from β(B) + β(A)".into(), at: Some(l) }
            };
            (to_json(&v), verdict_code(&v))
        }
        Check::EmptyW => hypothesis_json(&empty_w_check(&a, &b, &c, t, form, &cfg)?),
        Check::Sclass => hypothesis_json(&s_class_proposition_check(&a, &b, &c, t, conv, &cfg)?),
        Check::NoInterior => hypothesis_json(&no_interior_corollary_check(&a, &b, &c, t, &cfg)?),
    };
    let name = check.to_possible_value().expect("not skipped").get_name().to_string();
    body["schema"] = json!(SCHEMA);
    body["check"] = json!(name);
    body["target"] = json!(t.name());
    Ok((body, code))
}

fn oracle(op: &str, lambda: &str, sizes_arg: &str, tol: f64, cap: Option<usize>) -> Outcome {
    let (e, l, s) = (expr(op)?, point(lambda)?, sizes(sizes_arg)?);
    let np = estimate_point_data(Operand::Expr(&e), &l, &s, &oracle_config(tol, cap))?;
    let code = if np.consistent && np.closed_evidence != GapEvidence::Inconclusive { OK } else { INCONCLUSIVE };
    let mut doc = to_json(&np);
    doc["schema"] = json!(SCHEMA);
    Ok((doc, code))
}

fn dispatch(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Classify { op, lambda, kind } => classify(&op, &lambda, &kind),
        Cmd::Spectrum { op, kind, out, plot, window, res } => spectrum(&op, &kind, out, plot, &window, res),
        Cmd::Complete { a, b, lambda, target, cert } => complete(&a, &b, &lambda, &target, cert),
        Cmd::Verify { check, a, b, c, target, lambda, samples, seed, sizes: sz, tol, cap, form, conv } => {
            let cfg = SampleConfig { samples, seed, sizes: sizes(&sz)?, oracle: oracle_config(tol, cap) };
            verify(check, &a, &b, &c, &target, lambda.as_deref(), cfg, form, conv)
        }
        Cmd::Oracle { op, lambda, sizes, tol, cap } => oracle(&op, &lambda, &sizes, tol, cap),
    }
}

/// Runs one command line, printing JSON to `out` and diagnostics to `err`,
/// and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{shown}");
                    OK
                }
                _ => {
                    let _ = write!(err, "{shown}");
                    USAGE
                }
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok((doc, code)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
