//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 fail, 2 unconfirmed, 3 usage or spec error. Every
//! report goes to standard output as JSON; diagnostics go to standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::characteristics::{integrate, CharState, CharSystem};
use crate::cxjet::{Cx, ZERO};
use crate::expr::{parse_expr, Expr};
use crate::families::{
    construct_lenient, make_phi, solve_null_direction, DirectParams, EnvelopeParams, FamilyKind,
    FamilySpec, LinearNullParams, LinearOpParams, ParaboloidParams, PhiSpec, PowerParams,
    SampledCheck,
};
use crate::poly::{find_roots, Monomial, UniPoly, WaringForm};
use crate::sampling::{Sampler, DEFAULT_SEED};
use crate::special::{verify_left_factor, LeftFactorCase};
use crate::verify::{
    verify_family, VerifyOptions, DEFAULT_SAMPLES, DEFAULT_TOLERANCE, SAMPLE_RADIUS,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNCONFIRMED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectEntry {
    pub u: Expr,
}

/// The `family` object of a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyEntry {
    T3Case1(LinearOpParams),
    T3Case2(LinearOpParams),
    T3Case3(LinearOpParams),
    T3Case4(LinearOpParams),
    T8Case1(LinearNullParams),
    T8Case2(ParaboloidParams),
    T8Case3(PowerParams),
    T8Case4(EnvelopeParams),
    Direct(DirectEntry),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerRhs {
    pub power: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhsEntry {
    Power(PowerRhs),
    Poly(UniPoly),
}

impl RhsEntry {
    pub fn to_poly(&self) -> Result<UniPoly, String> {
        match self {
            RhsEntry::Power(p) => Ok(UniPoly::power(p.power)),
            RhsEntry::Poly(p) => {
                p.validate().map_err(|e| e.to_string())?;
                Ok(p.clone())
            }
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<WaringForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<RhsEntry>,
    pub family: FamilyEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub unconfirmed: bool,
}

fn sorted_terms(form: &WaringForm) -> Vec<Monomial> {
    let mut t = form.to_monomials();
    t.sort_by(|a, b| a.exponents.cmp(&b.exponents));
    t
}

fn same_form(a: &WaringForm, b: &WaringForm) -> bool {
    let (x, y) = (sorted_terms(a), sorted_terms(b));
    x.len() == y.len()
        && x.iter().zip(&y).all(|(p, q)| {
            p.exponents == q.exponents
                && (p.coeff - q.coeff).norm() <= 1e-12 * (1.0 + p.coeff.norm())
        })
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("spec: {e}"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Validates the document and turns it into a family.
    pub fn to_family(&self) -> Result<FamilySpec, String> {
        let mut kind = match &self.family {
            FamilyEntry::T3Case1(p) => FamilyKind::T3Case1(p.clone()),
            FamilyEntry::T3Case2(p) => FamilyKind::T3Case2(p.clone()),
            FamilyEntry::T3Case3(p) => FamilyKind::T3Case3(p.clone()),
            FamilyEntry::T3Case4(p) => FamilyKind::T3Case4(p.clone()),
            FamilyEntry::T8Case1(p) => FamilyKind::T8Case1(p.clone()),
            FamilyEntry::T8Case2(p) => FamilyKind::T8Case2(p.clone()),
            FamilyEntry::T8Case3(p) => FamilyKind::T8Case3(p.clone()),
            FamilyEntry::T8Case4(p) => FamilyKind::T8Case4(p.clone()),
            FamilyEntry::Direct(d) => {
                let form = self
                    .form
                    .clone()
                    .ok_or("direct families need a top-level `form`")?;
                let rhs = self
                    .rhs
                    .as_ref()
                    .ok_or("direct families need a top-level `rhs`")?
                    .to_poly()?;
                FamilyKind::Direct(DirectParams {
                    u: d.u.clone(),
                    form,
                    rhs,
                })
            }
        };
        if let Some(phi) = &self.phi {
            let slot = kind
                .phi_mut()
                .ok_or("this family takes no top-level `phi`")?;
            if slot.is_some() {
                return Err("`phi` given both at top level and inside the family".into());
            }
            *slot = Some(phi.clone());
        }
        if kind.dim() != self.dimension {
            return Err(format!(
                "dimension is {} but the family has {} variables",
                self.dimension,
                kind.dim()
            ));
        }
        let spec = FamilySpec {
            kind,
            unconfirmed: self.unconfirmed,
        };
        let c = construct_lenient(&spec).map_err(|e| e.to_string())?;
        if let Some(form) = &self.form {
            if !same_form(form, &c.form) {
                return Err("top-level `form` does not match the family".into());
            }
        }
        if let Some(rhs) = &self.rhs {
            if rhs.to_poly()? != c.rhs {
                return Err("top-level `rhs` does not match the family".into());
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "waring",
    version,
    about = "Residual verification of entire solution families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify a family described by a spec file.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Print the normalized spec instead of verifying it.
        #[arg(long)]
        dump_spec: bool,
    },
    /// Integrate characteristics from a family's data at z0.
    Trace {
        #[arg(long)]
        spec: PathBuf,
        /// End of the straight τ segment, `RE,IM` or `RE`.
        #[arg(long, allow_hyphen_values = true)]
        tau_end: String,
        #[arg(long)]
        steps: usize,
        /// Start point, comma-separated complex literals; defaults to all ones.
        #[arg(long, allow_hyphen_values = true)]
        z0: Option<String>,
    },
    /// Roots of c0 + c1 w + … (ascending coefficients).
    Roots {
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
    /// Null directions d for weights c and exponents ℓ.
    SolveDirection {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        /// One exponent for every coordinate, or a comma-separated list.
        #[arg(long)]
        ell: String,
        /// `j=value` with j 1-based; repeatable.
        #[arg(long = "fix", allow_hyphen_values = true)]
        fix: Vec<String>,
    },
    /// Measure the defining ODE residual of a left factor.
    VerifyOde {
        #[arg(long = "case")]
        case: PathBuf,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Build a null function and check ρ·∇Φ on sample points.
    Phi {
        #[arg(long)]
        variant: String,
        #[arg(long)]
        core: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        d: Option<String>,
        /// Base index (0-based) for `base_diff`.
        #[arg(long, default_value_t = 0)]
        base: usize,
        /// Dimension, when neither ρ nor d gives it.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
    },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("bad seed `{s}`: {e}"))
}

/// A constant complex literal such as `2`, `-1.5i` or `(0.5-2i)`.
pub fn parse_cx(text: &str) -> Result<Cx, String> {
    let e = parse_expr(text, 0).map_err(|e| format!("`{text}`: {e}"))?;
    e.eval_value(&[]).map_err(|e| format!("`{text}`: {e}"))
}

/// Comma-separated complex literals; commas inside parentheses are kept.
pub fn parse_cx_list(text: &str) -> Result<Vec<Cx>, String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(parse_cx(&text[start..i])?);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(parse_cx(&text[start..])?);
    Ok(out)
}

fn parse_tau(text: &str) -> Result<Cx, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let num = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad τ component `{s}`: {e}"))
    };
    match parts.as_slice() {
        [re] => Ok(Cx::new(num(re)?, 0.0)),
        [re, im] => Ok(Cx::new(num(re)?, num(im)?)),
        _ => Err(format!("τ must be `RE,IM`, got `{text}`")),
    }
}

enum Outcome {
    Report(serde_json::Value, i32),
}

fn read_spec(path: &Path) -> Result<SpecFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    SpecFile::from_json(&text)
}

fn cmd_verify(
    spec: &Path,
    samples: usize,
    seed: u64,
    tol: f64,
    dump: bool,
) -> Result<Outcome, String> {
    let file = read_spec(spec)?;
    let family = file.to_family()?;
    if dump {
        let v = serde_json::to_value(&file).map_err(|e| e.to_string())?;
        return Ok(Outcome::Report(v, EXIT_PASS));
    }
    if samples == 0 {
        return Err("samples must be ≥ 1".into());
    }
    if tol.is_nan() || tol < 0.0 {
        return Err("tolerance must be a non-negative number".into());
    }
    let report = verify_family(
        &family,
        VerifyOptions {
            samples,
            seed,
            tolerance: tol,
        },
    )
    .map_err(|e| e.to_string())?;
    let code = report.verdict.exit_code();
    Ok(Outcome::Report(
        serde_json::to_value(&report).map_err(|e| e.to_string())?,
        code,
    ))
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    tau: Cx,
    z: &'a [Cx],
    #[serde(rename = "Du")]
    du: &'a [Cx],
    u: Cx,
    residual: Cx,
    family_u: Cx,
}

fn cmd_trace(
    spec: &Path,
    tau_end: &str,
    steps: usize,
    z0: Option<&str>,
) -> Result<Outcome, String> {
    let file = read_spec(spec)?;
    let family = file.to_family()?;
    let c = construct_lenient(&family).map_err(|e| e.to_string())?;
    let tau_end = parse_tau(tau_end)?;
    let z0 = match z0 {
        Some(s) => parse_cx_list(s)?,
        None => vec![Cx::new(1.0, 0.0); c.dim],
    };
    if z0.len() != c.dim {
        return Err(format!(
            "z0 has {} entries, dimension is {}",
            z0.len(),
            c.dim
        ));
    }
    if steps == 0 {
        return Err("steps must be ≥ 1".into());
    }
    let sys = CharSystem::new(c.form.clone(), c.rhs.clone()).map_err(|e| e.to_string())?;
    let jet = c.u.eval_jet(&z0).map_err(|e| e.to_string())?;
    let s0 = CharState {
        tau: ZERO,
        z: z0,
        du: jet.gradient().to_vec(),
        u: jet.value(),
    };
    let estimate = sys.blow_up_estimate(s0.u);
    let traj = match integrate(&sys, &s0, tau_end, steps) {
        Ok(t) => t,
        Err(e) => {
            return Ok(Outcome::Report(
                json!({
                    "error": e.to_string(),
                    "blow_up_estimate": estimate,
                    "path": "straight segment from 0 to tau_end",
                    "tau_end": tau_end,
                    "steps": steps,
                }),
                EXIT_FAIL,
            ))
        }
    };
    let mut records = Vec::with_capacity(traj.len());
    let mut max_deviation: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    for s in &traj {
        let residual = sys.residual(s).map_err(|e| e.to_string())?;
        let family_u = c.u.eval_value(&s.z).map_err(|e| e.to_string())?;
        max_deviation = max_deviation.max((family_u - s.u).norm());
        max_drift = max_drift.max(residual.norm());
        records.push(
            serde_json::to_value(TraceRecord {
                tau: s.tau,
                z: &s.z,
                du: &s.du,
                u: s.u,
                residual,
                family_u,
            })
            .map_err(|e| e.to_string())?,
        );
    }
    Ok(Outcome::Report(
        json!({
            "path": "straight segment from 0 to tau_end",
            "method": "classical RK4, fixed step",
            "tau_end": tau_end,
            "steps": steps,
            "blow_up_estimate": estimate,
            "max_deviation_from_family": max_deviation,
            "max_first_integral_drift": max_drift,
            "records": records,
        }),
        EXIT_PASS,
    ))
}

fn cmd_roots(coeffs: &str) -> Result<Outcome, String> {
    let c = parse_cx_list(coeffs)?;
    let roots = find_roots(&c).map_err(|e| e.to_string())?;
    Ok(Outcome::Report(
        serde_json::to_value(roots).map_err(|e| e.to_string())?,
        EXIT_PASS,
    ))
}

fn cmd_solve_direction(c: &str, ell: &str, fix: &[String]) -> Result<Outcome, String> {
    let c = parse_cx_list(c)?;
    let n = c.len();
    let ells: Vec<u32> = ell
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|e| format!("bad ℓ `{s}`: {e}"))
        })
        .collect::<Result<_, _>>()?;
    let exponents = match ells.as_slice() {
        [l] => vec![*l; n],
        _ => ells,
    };
    let mut fixed: Vec<Option<Cx>> = vec![None; n];
    for f in fix {
        let (j, v) = f
            .split_once('=')
            .ok_or_else(|| format!("--fix expects j=value, got `{f}`"))?;
        let j: usize = j
            .trim()
            .parse()
            .map_err(|e| format!("bad index in `{f}`: {e}"))?;
        if j == 0 || j > n {
            return Err(format!("index {j} in `{f}` is outside 1..={n}"));
        }
        if fixed[j - 1].is_some() {
            return Err(format!("component {j} fixed twice"));
        }
        fixed[j - 1] = Some(parse_cx(v)?);
    }
    let cands = solve_null_direction(&c, &exponents, &fixed).map_err(|e| e.to_string())?;
    let cands: Vec<_> = cands
        .iter()
        .map(|k| {
            json!({
                "d": k.d,
                "residuals": k.residuals,
                "max_residual": k.max_residual(),
            })
        })
        .collect();
    Ok(Outcome::Report(
        json!({
            "c": c,
            "exponents": exponents,
            "fixed": fixed,
            "conditions": "sum_j C(l_j, iota) c_j^(l_j - iota) d_j^iota for iota = 1..max l_j",
            "candidates": cands,
        }),
        EXIT_PASS,
    ))
}

fn cmd_verify_ode(case: &Path, samples: usize, seed: u64, tol: f64) -> Result<Outcome, String> {
    let text = std::fs::read_to_string(case).map_err(|e| format!("{}: {e}", case.display()))?;
    let case: LeftFactorCase = serde_json::from_str(&text).map_err(|e| format!("case: {e}"))?;
    let rep = verify_left_factor(&case, samples, seed).map_err(|e| e.to_string())?;
    let pass = rep.max_residual <= tol;
    Ok(Outcome::Report(
        json!({
            "case": case,
            "report": rep,
            "tolerance": tol,
            "verdict": if pass { "pass" } else { "fail" },
        }),
        if pass { EXIT_PASS } else { EXIT_FAIL },
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_phi(
    variant: &str,
    core: Option<&str>,
    rho: Option<&str>,
    d: Option<&str>,
    base: usize,
    dim: Option<usize>,
    samples: usize,
    seed: u64,
) -> Result<Outcome, String> {
    let rho = rho.map(parse_cx_list).transpose()?;
    let d = d.map(parse_cx_list).transpose()?;
    let n = dim
        .or(rho.as_ref().map(Vec::len))
        .or(d.as_ref().map(Vec::len))
        .ok_or("dimension unknown: give --rho, --d or --dim")?;
    let core_arity = match variant {
        "cyclic_diff" | "custom" => n,
        "base_diff" => n.saturating_sub(1),
        "paired_diff" => n / 2,
        _ => 1,
    };
    let core = || -> Result<Expr, String> {
        let text = core.ok_or("--core is required for this variant")?;
        parse_expr(text, core_arity).map_err(|e| format!("core: {e}"))
    };
    let spec = match variant {
        "zero" => PhiSpec::Zero {},
        "cyclic_diff" => PhiSpec::CyclicDiff {
            rho: rho.clone(),
            core: core()?,
        },
        "base_diff" => PhiSpec::BaseDiff {
            rho: rho.clone(),
            base,
            core: core()?,
        },
        "paired_diff" => PhiSpec::PairedDiff {
            rho: rho.clone(),
            core: core()?,
        },
        "weighted_diff" => PhiSpec::WeightedDiff {
            rho: rho.clone(),
            core: core()?,
        },
        "null_direction" => PhiSpec::NullDirection {
            d: d.ok_or("null_direction needs --d")?,
            core: core()?,
        },
        "custom" => PhiSpec::Custom { expr: core()? },
        other => return Err(format!("unknown variant `{other}`")),
    };
    let phi = make_phi(&spec, n).map_err(|e| e.to_string())?;
    let annihilation = match &rho {
        Some(rho) => {
            let check = SampledCheck::Annihilation {
                phi: phi.clone(),
                rho: rho.clone(),
            };
            let mut rng = Sampler::new(seed);
            let mut worst: f64 = 0.0;
            let mut worst_rel: f64 = 0.0;
            for _ in 0..samples {
                let z = rng.polydisc(n, SAMPLE_RADIUS);
                let r = check.residual(&z).map_err(|e| e.to_string())?.norm();
                let g: f64 = phi
                    .eval_jet(&z)
                    .map_err(|e| e.to_string())?
                    .gradient()
                    .iter()
                    .map(|v| v.norm())
                    .sum();
                worst = worst.max(r);
                worst_rel = worst_rel.max(r / (1.0 + g));
            }
            json!({
                "max_abs_residual": worst,
                "max_scaled_residual": worst_rel,
                "samples": samples,
                "seed": seed,
            })
        }
        None => serde_json::Value::Null,
    };
    Ok(Outcome::Report(
        json!({
            "spec": spec,
            "dimension": n,
            "phi": phi.to_string(),
            "annihilation": annihilation,
        }),
        EXIT_PASS,
    ))
}

fn dispatch(cmd: &Command) -> Result<Outcome, String> {
    match cmd {
        Command::Verify {
            spec,
            samples,
            seed,
            tol,
            dump_spec,
        } => cmd_verify(spec, *samples, *seed, *tol, *dump_spec),
        Command::Trace {
            spec,
            tau_end,
            steps,
            z0,
        } => cmd_trace(spec, tau_end, *steps, z0.as_deref()),
        Command::Roots { coeffs } => cmd_roots(coeffs),
        Command::SolveDirection { c, ell, fix } => cmd_solve_direction(c, ell, fix),
        Command::VerifyOde {
            case,
            samples,
            seed,
            tol,
        } => cmd_verify_ode(case, *samples, *seed, *tol),
        Command::Phi {
            variant,
            core,
            rho,
            d,
            base,
            dim,
            samples,
            seed,
        } => cmd_phi(
            variant,
            core.as_deref(),
            rho.as_deref(),
            d.as_deref(),
            *base,
            *dim,
            *samples,
            *seed,
        ),
    }
}

/// Runs the tool with `args` (including the program name) and returns the
/// exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_PASS;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(Outcome::Report(v, code)) => {
            let text = serde_json::to_string_pretty(&v).expect("report serializes");
            let _ = writeln!(out, "{text}");
            code
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
