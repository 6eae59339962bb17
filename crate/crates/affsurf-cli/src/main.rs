use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use affsurf::classify::{classify_with, ClassificationReport};
use affsurf::connection::{fd_ricci_oracle, ricci_closed_form, DEFAULT_FD_STEP};
use affsurf::extension::{geodesic_integrate, geodesic_residual, verify_extension_soliton, ExtensionMetric, EXTENSION_FD_STEP};
use affsurf::format::{fmt12, sig12};
use affsurf::json::{self, SurfaceInput};
use affsurf::killing::{jet_scale, killing_algebra, killing_basis_tol, killing_residual};
use affsurf::sampling::{sample_points, sample_points4, INTERNAL_SEED};
use affsurf::soliton::{residual_scale, solve_soliton, verify_soliton, verify_yamabe, yamabe_kernel};
use affsurf::{AffineSurface, GeometryError, Point2, SurfaceKind};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

/// Default acceptance bound for 4D finite-difference residuals.
const EXTENSION_TOL: f64 = 1e-5;
/// Acceptance bound for the geodesic ODE residual.
const GEODESIC_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "affsurf", version, about = "Curvature, Killing fields and Ricci solitons of homogeneous affine surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Tolerance for rank decisions and relative residual checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Finite-difference step (default 1e-4 in 4D, 1e-5 in 2D).
    #[arg(long, global = true)]
    fd_step: Option<f64>,
    /// Seed for sample points.
    #[arg(long, global = true, default_value_t = INTERNAL_SEED)]
    seed: u64,
    /// Number of sample points.
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Input file (stdin when absent).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Classification report.
    Classify,
    /// Basis of affine Killing vector fields and its Lie algebra.
    Killing,
    /// Affine gradient Ricci soliton family.
    Soliton,
    /// Affine gradient Yamabe kernel.
    Yamabe,
    /// Steady soliton check on the Riemannian extension.
    VerifyExtension,
    /// Geodesic integration.
    Geodesic,
    /// Runs every pipeline.
    Report,
}

struct Config {
    tol: f64,
    fd_step: Option<f64>,
    seed: u64,
    samples: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        let code = match e {
            GeometryError::UnclassifiedTypeB => 2,
            GeometryError::Parse(_) | GeometryError::Param(_) | GeometryError::Domain { .. } => 3,
            GeometryError::Verification { .. } => 4,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// A command result; `verified = false` maps to exit code 4 after printing.
struct Output {
    json: Value,
    text: String,
    verified: bool,
}

fn fmt_num(x: f64) -> String {
    fmt12(x)
}

fn points(cfg: &Config) -> Vec<Point2> {
    sample_points(cfg.seed, cfg.samples)
}

fn cmd_classify(s: &AffineSurface, cfg: &Config) -> Result<Output, Failure> {
    let r = classify_with(s, cfg.tol, true)?;
    Ok(Output {
        json: json::report_to_json(&r),
        text: report_text(&r),
        verified: true,
    })
}

fn report_text(r: &ClassificationReport) -> String {
    let mut t = String::new();
    let yn = |b: bool| if b { "true" } else { "false" };
    let _ = writeln!(t, "kind: {}", r.kind.name());
    let _ = writeln!(t, "flat: {}", yn(r.flat));
    let _ = writeln!(t, "ricci rank: {}", r.rank);
    if let Some(ae) = r.alpha_epsilon.filter(|a| a.defined) {
        let _ = writeln!(t, "alpha: {}", fmt_num(ae.alpha));
        let _ = writeln!(t, "epsilon: {}", ae.epsilon);
    }
    if let Some(row) = r.table_row {
        let _ = writeln!(t, "table row: {}", json::table_row_name(row));
    }
    let _ = writeln!(t, "killing dim: {}", r.killing_dim);
    let _ = writeln!(t, "lie algebra: {}", r.lie_algebra.name());
    let _ = writeln!(t, "typeA: {}  typeB: {}  typeC: {}", yn(r.is_type_a), yn(r.is_type_b), yn(r.is_type_c));
    if let Some(m) = &r.matched_model {
        let _ = writeln!(t, "model: {m}");
    }
    let _ = writeln!(t, "soliton class: {}", r.soliton_class.label());
    for n in &r.notes {
        let _ = writeln!(t, "note: {n}");
    }
    t
}

fn cmd_killing(s: &AffineSurface, cfg: &Config) -> Result<Output, Failure> {
    let basis = killing_basis_tol(s, cfg.tol)?;
    let pts = points(cfg);
    let mut residuals = Vec::new();
    let mut verified = true;
    for x in &basis.fields {
        let r = killing_residual(&basis.surface, x, &pts)?;
        verified &= r <= cfg.tol * jet_scale(&basis.surface, x, &pts)?;
        residuals.push(r);
    }
    let (_, label) = killing_algebra(&basis)?;
    let mut text = format!("killing dim: {}\nlie algebra: {}\n", basis.dim(), label.name());
    if !basis.in_original_chart() {
        let c = basis.chart;
        let _ = writeln!(
            text,
            "chart: x = A u with A = [[{}, {}], [{}, {}]]",
            fmt_num(c[(0, 0)]),
            fmt_num(c[(0, 1)]),
            fmt_num(c[(1, 0)]),
            fmt_num(c[(1, 1)])
        );
    }
    for (x, r) in basis.fields.iter().zip(&residuals) {
        let _ = writeln!(text, "{x}    residual {}", fmt_num(*r));
    }
    Ok(Output {
        json: json::killing_to_json(&basis, label, &residuals),
        text,
        verified,
    })
}

fn relative_soliton_residual(s: &AffineSurface, f: &affsurf::ScalarField, pts: &[Point2], yamabe: bool) -> Result<f64, Failure> {
    let r = if yamabe { verify_yamabe(s, f, pts)? } else { verify_soliton(s, f, pts)? };
    Ok(r / residual_scale(s, f, pts)?)
}

fn cmd_soliton(s: &AffineSurface, cfg: &Config) -> Result<Output, Failure> {
    let fam = solve_soliton(s)?;
    let pts = points(cfg);
    let mut worst: f64 = 0.0;
    if fam.exists {
        worst = relative_soliton_residual(s, &fam.particular, &pts, false)?;
        for k in &fam.kernel_basis {
            worst = worst.max(relative_soliton_residual(s, k, &pts, true)?);
        }
    }
    let mut j = json::family_to_json(&fam);
    j["residual"] = json!(sig12(worst));
    let text = if fam.exists {
        format!("branch: {}\nfamily: {}\nresidual: {}\n", fam.branch, fam, fmt_num(worst))
    } else {
        "no affine gradient Ricci soliton\n".to_string()
    };
    Ok(Output {
        json: j,
        text,
        verified: worst <= cfg.tol,
    })
}

fn cmd_yamabe(s: &AffineSurface, cfg: &Config) -> Result<Output, Failure> {
    let kernel = yamabe_kernel(s)?;
    let pts = points(cfg);
    let mut worst: f64 = 0.0;
    for k in &kernel {
        worst = worst.max(relative_soliton_residual(s, k, &pts, true)?);
    }
    let mut text = format!("yamabe kernel dim: {}\n", kernel.len());
    for k in &kernel {
        let _ = writeln!(text, "{k}");
    }
    let _ = writeln!(text, "residual: {}", fmt_num(worst));
    Ok(Output {
        json: json!({
            "dim": kernel.len(),
            "kernel": kernel.iter().map(json::scalar_to_json).collect::<Vec<_>>(),
            "residual": sig12(worst),
        }),
        text,
        verified: worst <= cfg.tol,
    })
}

fn cmd_verify_extension(s: &AffineSurface, doc: &Value, cfg: &Config) -> Result<Output, Failure> {
    let req = json::parse_extension_request(doc)?;
    let fam = solve_soliton(s)?;
    if !fam.exists {
        return Ok(Output {
            json: json!({ "exists": false }),
            text: "no affine gradient Ricci soliton on the base\n".into(),
            verified: true,
        });
    }
    let h = req.h.or(cfg.fd_step).unwrap_or(EXTENSION_FD_STEP);
    let tol = req.tol.unwrap_or(EXTENSION_TOL);
    let pts = req.points.unwrap_or_else(|| sample_points4(cfg.seed, cfg.samples));
    let metric = ExtensionMetric::with_phi(s.clone(), req.phi)?;
    let r = verify_extension_soliton(&metric, &fam.particular, &pts, h)?;
    let text = format!(
        "base potential: {}\nlifted potential: 2*f\nh: {}\npoints: {}\nresidual: {}\n",
        fam.particular,
        fmt_num(h),
        pts.len(),
        fmt_num(r)
    );
    Ok(Output {
        json: json!({
            "exists": true,
            "base_potential": json::scalar_to_json(&fam.particular),
            "h": sig12(h),
            "tol": sig12(tol),
            "points": pts.len(),
            "residual": sig12(r),
        }),
        text,
        verified: r <= tol,
    })
}

fn cmd_geodesic(s: &AffineSurface, doc: &Value) -> Result<Output, Failure> {
    let req = json::parse_geodesic_request(doc)?;
    let p0 = req.p0.unwrap_or(match s.kind() {
        SurfaceKind::TypeA => Point2::new(0.0, 0.0),
        _ => Point2::new(1.0, 0.0),
    });
    let path = geodesic_integrate(s, p0, req.v0, req.t_max, req.dt)?;
    let residual = if path.blew_up { None } else { Some(geodesic_residual(s, &path)?) };
    let mut j = json::geodesic_to_json(&path);
    j["residual"] = json!(residual.map(sig12));
    let mut text = format!(
        "blew up: {}\nt reached: {}\n",
        path.blew_up,
        fmt_num(path.t_max_reached)
    );
    if let Some(r) = residual {
        let _ = writeln!(text, "residual: {}", fmt_num(r));
    }
    for smp in &path.samples {
        let _ = writeln!(
            text,
            "{} {} {} {} {}",
            fmt_num(smp.t),
            fmt_num(smp.point.x1),
            fmt_num(smp.point.x2),
            fmt_num(smp.velocity[0]),
            fmt_num(smp.velocity[1])
        );
    }
    Ok(Output {
        json: j,
        text,
        verified: residual.is_none_or(|r| r <= GEODESIC_TOL),
    })
}

/// Every pipeline; sub-results that fail with a non-fatal error are reported inline.
fn cmd_report(s: &AffineSurface, doc: &Value, cfg: &Config) -> Result<Output, Failure> {
    let classification = cmd_classify(s, cfg)?;
    let pts = points(cfg);
    let h = cfg.fd_step.unwrap_or(DEFAULT_FD_STEP);
    let rho = ricci_closed_form(s)?;
    let mut oracle: f64 = 0.0;
    for &p in &pts {
        oracle = oracle.max((fd_ricci_oracle(s, p, h)? - rho.eval(p)?).amax());
    }
    let mut j = json!({
        "surface": json::surface_to_json(s),
        "classification": classification.json,
        "ricci_oracle_error": sig12(oracle),
    });
    let mut text = format!("== classification\n{}ricci oracle error: {}\n", classification.text, fmt_num(oracle));
    let mut verified = true;
    let sections: [(&str, Box<dyn Fn() -> Result<Output, Failure>>); 4] = [
        ("killing", Box::new(|| cmd_killing(s, cfg))),
        ("soliton", Box::new(|| cmd_soliton(s, cfg))),
        ("yamabe", Box::new(|| cmd_yamabe(s, cfg))),
        ("extension", Box::new(|| cmd_verify_extension(s, doc, &Config { fd_step: None, ..*cfg }))),
    ];
    for (name, run) in sections {
        match run() {
            Ok(o) => {
                verified &= o.verified;
                j[name] = o.json;
                let _ = write!(text, "== {name}\n{}", o.text);
            }
            Err(f) if f.code == 4 || f.code == 2 => return Err(f),
            Err(f) => {
                j[name] = json!({ "error": f.message });
                let _ = writeln!(text, "== {name}\nerror: {}", f.message);
            }
        }
    }
    Ok(Output { json: j, text, verified })
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    let res = match path {
        Some(p) => std::fs::read_to_string(p),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map(|_| s)
        }
    };
    res.map_err(|e| Failure {
        code: 3,
        message: format!("cannot read input: {e}"),
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    if !(cli.tol > 0.0) || cli.fd_step.is_some_and(|h| !(h > 0.0)) || cli.samples < 4 {
        return Err(Failure {
            code: 3,
            message: "require tol > 0, fd-step > 0 and samples >= 4".into(),
        });
    }
    let cfg = Config {
        tol: cli.tol,
        fd_step: cli.fd_step,
        seed: cli.seed,
        samples: cli.samples,
    };
    let doc = json::parse_document(&read_input(&cli.input)?)?;
    let SurfaceInput { surface, .. } = json::parse_surface(&doc)?;
    match cli.command {
        Command::Classify => cmd_classify(&surface, &cfg),
        Command::Killing => cmd_killing(&surface, &cfg),
        Command::Soliton => cmd_soliton(&surface, &cfg),
        Command::Yamabe => cmd_yamabe(&surface, &cfg),
        Command::VerifyExtension => cmd_verify_extension(&surface, &doc, &cfg),
        Command::Geodesic => cmd_geodesic(&surface, &doc),
        Command::Report => cmd_report(&surface, &doc, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            let body = if cli.json {
                format!("{}\n", serde_json::to_string_pretty(&out.json).expect("serializable"))
            } else {
                out.text
            };
            // A closed pipe downstream is not an error of ours.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if out.verified {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed");
                ExitCode::from(4)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
