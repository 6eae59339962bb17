//! JSON input parsing and report serialization. Every number is written through [`sig12`].

use nalgebra::Matrix2;
use serde_json::{json, Map, Value};

use crate::classify::{ClassificationReport, TableRow};
use crate::connection::{AffineSurface, Coeff6, Cov2Field, Point2};
use crate::error::{GeometryError, Result};
use crate::extension::{GeodesicPath, Point4};
use crate::field::{ScalarField, Term, Trig, VectorField, MAX_LOG_POWER};
use crate::format::sig12;
use crate::killing::{AlgebraLabel, KillingBasis};
use crate::models::{model, ModelFamily, ModelId};
use crate::soliton::{SolitonBranch, SolitonFamily};

const GAMMA_KEYS: [&str; 6] = ["111", "112", "121", "122", "221", "222"];

fn parse_err(msg: impl Into<String>) -> GeometryError {
    GeometryError::Parse(msg.into())
}

fn num(x: f64) -> Value {
    json!(sig12(x))
}

fn get_f64(v: &Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| parse_err(format!("missing or non-numeric \"{key}\"")))
}

fn opt_f64(v: &Value, key: &str, default: f64) -> Result<f64> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(x) => x.as_f64().ok_or_else(|| parse_err(format!("non-numeric \"{key}\""))),
    }
}

/// A parsed surface, with its model id when given in shorthand.
#[derive(Clone, Debug)]
pub struct SurfaceInput {
    pub surface: AffineSurface,
    pub model: Option<ModelId>,
}

pub fn parse_document(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
}

/// Surface schema `{"kind", "gamma"}` or model shorthand `{"model", "params"}`.
pub fn parse_surface(v: &Value) -> Result<SurfaceInput> {
    if v.get("model").is_some() {
        let id = parse_model_id(v)?;
        return Ok(SurfaceInput {
            surface: model(id)?,
            model: Some(id),
        });
    }
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| parse_err("missing \"kind\""))?;
    let gamma = v.get("gamma").ok_or_else(|| parse_err("missing \"gamma\""))?;
    let mut c = [0.0; 6];
    for (slot, key) in c.iter_mut().zip(GAMMA_KEYS) {
        *slot = get_f64(gamma, key)?;
    }
    let c = Coeff6::from_array(c);
    let surface = match kind {
        "typeA" => AffineSurface::type_a(c)?,
        "typeB" => AffineSurface::type_b(c)?,
        other => return Err(parse_err(format!("unknown kind \"{other}\""))),
    };
    Ok(SurfaceInput { surface, model: None })
}

pub fn parse_model_id(v: &Value) -> Result<ModelId> {
    let name = v.get("model").and_then(Value::as_str).ok_or_else(|| parse_err("\"model\" must be a string"))?;
    let empty = Value::Object(Map::new());
    let params = v.get("params").unwrap_or(&empty);
    let c = opt_f64(params, "c", 0.0)?;
    let a = opt_f64(params, "a", 0.0)?;
    let sign = match params.get("sign") {
        None => None,
        Some(s) => Some(match s.as_str() {
            Some("+") => 1,
            Some("-") => -1,
            _ => return Err(parse_err("\"sign\" must be \"+\" or \"-\"")),
        }),
    };
    let family = match name {
        "M1" => ModelFamily::M1,
        "M2" => ModelFamily::M2,
        "M3" => ModelFamily::M3,
        "M4" => ModelFamily::M4,
        "M5" => ModelFamily::M5,
        "N1+" | "N1plus" => ModelFamily::N1plus,
        "N1-" | "N1minus" => ModelFamily::N1minus,
        "N1" => match sign {
            Some(-1) => ModelFamily::N1minus,
            _ => ModelFamily::N1plus,
        },
        "N2" => ModelFamily::N2,
        "N3" => ModelFamily::N3,
        "N4" => ModelFamily::N4,
        "P+" | "Pplus" => ModelFamily::Pplus,
        "P-" | "Pminus" => ModelFamily::Pminus,
        "P" => match sign {
            Some(-1) => ModelFamily::Pminus,
            Some(_) => ModelFamily::Pplus,
            None => return Err(parse_err("model P needs params.sign")),
        },
        "Q" => ModelFamily::Q,
        other => return Err(parse_err(format!("unknown model \"{other}\""))),
    };
    let id = ModelId { family, c, a };
    id.validate()?;
    Ok(id)
}

pub fn surface_to_json(s: &AffineSurface) -> Value {
    let c = s.coeffs().to_array();
    let mut gamma = Map::new();
    for (key, v) in GAMMA_KEYS.iter().zip(c) {
        gamma.insert((*key).into(), num(v));
    }
    json!({ "kind": s.kind().name(), "gamma": gamma })
}

pub fn term_to_json(t: &Term, comp: Option<usize>) -> Value {
    let (kind, omega) = match t.trig {
        Trig::None => ("none", 0.0),
        Trig::Cos(w) => ("cos", w),
        Trig::Sin(w) => ("sin", w),
    };
    let mut m = Map::new();
    if let Some(c) = comp {
        m.insert("comp".into(), json!(c));
    }
    m.insert("coeff".into(), num(t.coeff));
    m.insert("p1".into(), num(t.pow_x1));
    m.insert("p2".into(), json!(t.pow_x2));
    m.insert("ea".into(), num(t.exp_a));
    m.insert("eb".into(), num(t.exp_b));
    m.insert("log".into(), json!(t.log_x1_pow));
    m.insert("trig".into(), json!({ "kind": kind, "omega": num(omega) }));
    Value::Object(m)
}

pub fn term_from_json(v: &Value) -> Result<Term> {
    let p2 = v.get("p2").and_then(Value::as_u64).ok_or_else(|| parse_err("\"p2\" must be a non-negative integer"))?;
    let log = v.get("log").and_then(Value::as_u64).ok_or_else(|| parse_err("\"log\" must be an integer"))?;
    if log > MAX_LOG_POWER as u64 {
        return Err(parse_err(format!("\"log\" exceeds {MAX_LOG_POWER}")));
    }
    let trig = match v.get("trig") {
        None => Trig::None,
        Some(t) => {
            let omega = opt_f64(t, "omega", 0.0)?;
            match t.get("kind").and_then(Value::as_str) {
                Some("none") | None => Trig::None,
                Some("cos") => Trig::Cos(omega),
                Some("sin") => Trig::Sin(omega),
                Some(k) => return Err(parse_err(format!("unknown trig kind \"{k}\""))),
            }
        }
    };
    Ok(Term {
        coeff: get_f64(v, "coeff")?,
        pow_x1: opt_f64(v, "p1", 0.0)?,
        pow_x2: u32::try_from(p2).map_err(|_| parse_err("\"p2\" too large"))?,
        exp_a: opt_f64(v, "ea", 0.0)?,
        exp_b: opt_f64(v, "eb", 0.0)?,
        log_x1_pow: log as u8,
        trig,
    })
}

pub fn scalar_to_json(f: &ScalarField) -> Value {
    Value::Array(f.terms().iter().map(|t| term_to_json(t, None)).collect())
}

pub fn scalar_from_json(v: &Value) -> Result<ScalarField> {
    let arr = v.as_array().ok_or_else(|| parse_err("a scalar field is an array of terms"))?;
    Ok(ScalarField::from_terms(arr.iter().map(term_from_json).collect::<Result<_>>()?))
}

pub fn vector_to_json(x: &VectorField) -> Value {
    let mut out = Vec::new();
    for i in 0..2 {
        out.extend(x.component(i).terms().iter().map(|t| term_to_json(t, Some(i + 1))));
    }
    Value::Array(out)
}

pub fn vector_from_json(v: &Value) -> Result<VectorField> {
    let arr = v.as_array().ok_or_else(|| parse_err("a vector field is an array of terms"))?;
    let mut comps = [Vec::new(), Vec::new()];
    for t in arr {
        let comp = t.get("comp").and_then(Value::as_u64).ok_or_else(|| parse_err("missing \"comp\""))?;
        if !(1..=2).contains(&comp) {
            return Err(parse_err("\"comp\" must be 1 or 2"));
        }
        comps[comp as usize - 1].push(term_from_json(t)?);
    }
    let [c1, c2] = comps;
    Ok(VectorField::new(ScalarField::from_terms(c1), ScalarField::from_terms(c2)))
}

const BRANCHES: [SolitonBranch; 7] = [
    SolitonBranch::TypeARank1,
    SolitonBranch::TypeBAlternating,
    SolitonBranch::TypeBPlog,
    SolitonBranch::TypeBPExtended2b,
    SolitonBranch::TypeBPExtended2c,
    SolitonBranch::TypeBIntersectionA,
    SolitonBranch::None,
];

pub fn family_to_json(f: &SolitonFamily) -> Value {
    json!({
        "exists": f.exists,
        "branch": f.branch.name(),
        "particular": scalar_to_json(&f.particular),
        "kernel": f.kernel_basis.iter().map(scalar_to_json).collect::<Vec<_>>(),
    })
}

pub fn family_from_json(v: &Value) -> Result<SolitonFamily> {
    let name = v.get("branch").and_then(Value::as_str).ok_or_else(|| parse_err("missing \"branch\""))?;
    let branch = BRANCHES
        .into_iter()
        .find(|b| b.name() == name)
        .ok_or_else(|| parse_err(format!("unknown branch \"{name}\"")))?;
    let kernel = v.get("kernel").and_then(Value::as_array).ok_or_else(|| parse_err("missing \"kernel\""))?;
    Ok(SolitonFamily {
        exists: v.get("exists").and_then(Value::as_bool).ok_or_else(|| parse_err("missing \"exists\""))?,
        particular: scalar_from_json(v.get("particular").ok_or_else(|| parse_err("missing \"particular\""))?)?,
        kernel_basis: kernel.iter().map(scalar_from_json).collect::<Result<_>>()?,
        branch,
    })
}

fn matrix_to_json(m: &Matrix2<f64>) -> Value {
    json!([[num(m[(0, 0)]), num(m[(0, 1)])], [num(m[(1, 0)]), num(m[(1, 1)])]])
}

fn cov2_to_json(c: &Cov2Field) -> Value {
    json!({ "x1_power": c.scale_power, "matrix": matrix_to_json(&c.m) })
}

pub fn table_row_name(r: TableRow) -> &'static str {
    match r {
        TableRow::AlphaNegative => "alpha<0",
        TableRow::AlphaZeroMinus => "alpha=0,eps=-1",
        TableRow::AlphaZeroPlus => "alpha=0,eps=+1",
        TableRow::AlphaBetween => "0<alpha<16",
        TableRow::Alpha16 => "alpha=16",
        TableRow::AlphaAbove16 => "alpha>16",
    }
}

fn model_to_json(id: &ModelId) -> Value {
    let mut params = Map::new();
    if id.family.takes_c() {
        params.insert("c".into(), num(id.c));
    }
    if id.family.takes_a() {
        params.insert("a".into(), num(id.a));
    }
    json!({ "model": id.family.name(), "params": params, "label": id.to_string() })
}

pub fn report_to_json(r: &ClassificationReport) -> Value {
    json!({
        "kind": r.kind.name(),
        "flat": r.flat,
        "ricci": cov2_to_json(&r.ricci),
        "rank": r.rank,
        "alpha": r.alpha_epsilon.filter(|a| a.defined).map(|a| num(a.alpha)),
        "epsilon": r.alpha_epsilon.filter(|a| a.defined).map(|a| a.epsilon),
        "table_row": r.table_row.map(table_row_name),
        "killing_dim": r.killing_dim,
        "lie_algebra": r.lie_algebra.name(),
        "typeA": r.is_type_a,
        "typeB": r.is_type_b,
        "typeC": r.is_type_c,
        "soliton_class": r.soliton_class.key(),
        "soliton_class_label": r.soliton_class.label(),
        "matched_model": r.matched_model.as_ref().map(model_to_json),
        "normalizing_transform": matrix_to_json(&r.normalizing_transform),
        "type_b_invariants": r.type_b_invariants.map(|t| json!({
            "rho0": [num(t.rho0[0]), num(t.rho0[1])],
            "rho1": cov2_to_json(&t.rho1),
            "rho2": cov2_to_json(&t.rho2),
            "rho3": cov2_to_json(&t.rho3),
        })),
        "notes": r.notes,
    })
}

pub fn killing_to_json(b: &KillingBasis, algebra: AlgebraLabel, residuals: &[f64]) -> Value {
    json!({
        "dim": b.dim(),
        "chart": matrix_to_json(&b.chart),
        "fields": b.fields.iter().map(vector_to_json).collect::<Vec<_>>(),
        "display": b.fields.iter().map(VectorField::to_string).collect::<Vec<_>>(),
        "residuals": residuals.iter().map(|&r| num(r)).collect::<Vec<_>>(),
        "lie_algebra": algebra.name(),
    })
}

pub fn geodesic_to_json(p: &GeodesicPath) -> Value {
    json!({
        "blew_up": p.blew_up,
        "t_max_reached": num(p.t_max_reached),
        "samples": p.samples.iter().map(|s| json!([num(s.t), num(s.point.x1), num(s.point.x2), num(s.velocity[0]), num(s.velocity[1])])).collect::<Vec<_>>(),
    })
}

/// Optional `{"phi", "points", "h", "tol"}` fields of an extension request.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionRequest {
    pub phi: Matrix2<f64>,
    pub points: Option<Vec<Point4>>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
}

pub fn parse_extension_request(v: &Value) -> Result<ExtensionRequest> {
    let phi = match v.get("phi") {
        None => Matrix2::zeros(),
        Some(p) => {
            let rows = p.as_array().filter(|r| r.len() == 2).ok_or_else(|| parse_err("\"phi\" must be 2x2"))?;
            let mut m = Matrix2::zeros();
            for (i, row) in rows.iter().enumerate() {
                let row = row.as_array().filter(|r| r.len() == 2).ok_or_else(|| parse_err("\"phi\" must be 2x2"))?;
                for (j, x) in row.iter().enumerate() {
                    m[(i, j)] = x.as_f64().ok_or_else(|| parse_err("non-numeric \"phi\" entry"))?;
                }
            }
            m
        }
    };
    let points = match v.get("points") {
        None => None,
        Some(p) => {
            let arr = p.as_array().ok_or_else(|| parse_err("\"points\" must be an array"))?;
            let mut out = Vec::with_capacity(arr.len());
            for q in arr {
                let c: Vec<f64> = q
                    .as_array()
                    .filter(|c| c.len() == 4)
                    .and_then(|c| c.iter().map(Value::as_f64).collect())
                    .ok_or_else(|| parse_err("each point is [x1, x2, y1, y2]"))?;
                out.push(Point4::new(c[0], c[1], c[2], c[3]));
            }
            Some(out)
        }
    };
    let h = v.get("h").map(|x| x.as_f64().ok_or_else(|| parse_err("non-numeric \"h\""))).transpose()?;
    let tol = v.get("tol").map(|x| x.as_f64().ok_or_else(|| parse_err("non-numeric \"tol\""))).transpose()?;
    Ok(ExtensionRequest { phi, points, h, tol })
}

/// Optional `{"p0", "v0", "t_max", "dt"}` fields of a geodesic request.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicRequest {
    pub p0: Option<Point2>,
    pub v0: [f64; 2],
    pub t_max: f64,
    pub dt: f64,
}

pub fn parse_geodesic_request(v: &Value) -> Result<GeodesicRequest> {
    let pair = |key: &str| -> Result<Option<[f64; 2]>> {
        match v.get(key) {
            None => Ok(None),
            Some(p) => p
                .as_array()
                .filter(|c| c.len() == 2)
                .and_then(|c| Some([c[0].as_f64()?, c[1].as_f64()?]))
                .map(Some)
                .ok_or_else(|| parse_err(format!("\"{key}\" must be [r, r]"))),
        }
    };
    Ok(GeodesicRequest {
        p0: pair("p0")?.map(|p| Point2::new(p[0], p[1])),
        v0: pair("v0")?.unwrap_or([1.0, 0.0]),
        t_max: opt_f64(v, "t_max", 1.0)?,
        dt: opt_f64(v, "dt", 0.01)?,
    })
}
