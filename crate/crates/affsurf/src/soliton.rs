//! Affine gradient Ricci solitons `H_f + ρˢ = 0` and Yamabe solitons `H_f = 0`.

use std::fmt;

use nalgebra::{DMatrix, Matrix2};

use crate::connection::{hessian, ricci_closed_form, AffineSurface, Coeff6, Point2, SurfaceKind};
use crate::error::{GeometryError, Result};
use crate::field::{ScalarField, Term};
use crate::invariants::{ricci_rank, ricci_split, DEFAULT_TOL};
use crate::models::{normalize_type_a_rank1_tol, ModelFamily, TypeBMap};
use crate::normal::{type_b_form, TypeBForm};
use crate::sampling::{internal_points, sample_points};

/// Accepted residual for emitted potentials, relative to the size of the terms involved.
pub const SOLITON_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolitonBranch {
    TypeARank1,
    TypeBAlternating,
    TypeBPlog,
    TypeBPExtended2b,
    TypeBPExtended2c,
    TypeBIntersectionA,
    None,
}

impl SolitonBranch {
    pub fn name(self) -> &'static str {
        match self {
            SolitonBranch::TypeARank1 => "TypeA_rank1",
            SolitonBranch::TypeBAlternating => "TypeB_alternating",
            SolitonBranch::TypeBPlog => "TypeB_Plog",
            SolitonBranch::TypeBPExtended2b => "TypeB_P_extended_2b",
            SolitonBranch::TypeBPExtended2c => "TypeB_P_extended_2c",
            SolitonBranch::TypeBIntersectionA => "TypeB_intersectionA",
            SolitonBranch::None => "none",
        }
    }
}

impl fmt::Display for SolitonBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `𝔄 = particular + span(kernel_basis)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolitonFamily {
    pub exists: bool,
    pub particular: ScalarField,
    pub kernel_basis: Vec<ScalarField>,
    pub branch: SolitonBranch,
}

impl SolitonFamily {
    fn none() -> Self {
        SolitonFamily {
            exists: false,
            particular: ScalarField::zero(),
            kernel_basis: Vec::new(),
            branch: SolitonBranch::None,
        }
    }

    /// `particular + Σ cᵢ·kernelᵢ`.
    pub fn member(&self, coeffs: &[f64]) -> ScalarField {
        self.kernel_basis
            .iter()
            .zip(coeffs)
            .fold(self.particular.clone(), |acc, (k, &c)| acc + k.scale(c))
    }
}

impl fmt::Display for SolitonFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.exists {
            return f.write_str("none");
        }
        write!(f, "{}", self.particular)?;
        for (i, k) in self.kernel_basis.iter().enumerate() {
            write!(f, " + c{i}*({k})")?;
        }
        Ok(())
    }
}

/// Max component of `H_f + ρˢ` over the points.
pub fn verify_soliton(s: &AffineSurface, f: &ScalarField, pts: &[Point2]) -> Result<f64> {
    let (sym, _) = ricci_split(&ricci_closed_form(s)?);
    let mut worst: f64 = 0.0;
    for &p in pts {
        let r = hessian(s, f, p)? + sym.eval(p)?;
        worst = worst.max(r.amax());
    }
    Ok(worst)
}

/// Max component of `H_f` over the points.
pub fn verify_yamabe(s: &AffineSurface, f: &ScalarField, pts: &[Point2]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in pts {
        worst = worst.max(hessian(s, f, p)?.amax());
    }
    Ok(worst)
}

/// Size of the quantities entering `H_f + ρˢ`, used to make residuals relative.
pub fn residual_scale(s: &AffineSurface, f: &ScalarField, pts: &[Point2]) -> Result<f64> {
    let (sym, _) = ricci_split(&ricci_closed_form(s)?);
    let mut m: f64 = 1.0;
    for &p in pts {
        let j = f.jet(p)?;
        let g = s.gamma_at(p)?.iter().flatten().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        let size = j.grad.iter().chain(j.hess.iter().flatten()).fold(0.0f64, |a, v| a.max(v.abs()));
        m = m.max(size * g).max(sym.eval(p)?.amax());
    }
    Ok(m)
}

fn check(s: &AffineSurface, f: &ScalarField, yamabe: bool, what: &str) -> Result<()> {
    let pts = internal_points();
    let r = if yamabe { verify_yamabe(s, f, &pts)? } else { verify_soliton(s, f, &pts)? };
    if r > SOLITON_TOL * residual_scale(s, f, &pts)? {
        return Err(GeometryError::Verification {
            what: format!("{what} {f}"),
            residual: r,
        });
    }
    Ok(())
}

fn checked(s: &AffineSurface, fam: SolitonFamily) -> Result<SolitonFamily> {
    if fam.exists {
        check(s, &fam.particular, false, "soliton potential")?;
        for k in &fam.kernel_basis {
            check(s, k, true, "Yamabe kernel element")?;
        }
    }
    Ok(fam)
}

pub fn solve_soliton(s: &AffineSurface) -> Result<SolitonFamily> {
    match s.kind() {
        SurfaceKind::TypeA => solve_soliton_type_a(s),
        SurfaceKind::TypeB => solve_soliton_type_b(s),
        SurfaceKind::Generic => Err(GeometryError::UnsupportedKind("generic")),
    }
}

fn is_flat(s: &AffineSurface, tol: f64) -> Result<bool> {
    Ok(ricci_closed_form(s)?.max_abs() <= tol * s.coeffs().max_abs().max(1.0))
}

pub fn solve_soliton_type_a(s: &AffineSurface) -> Result<SolitonFamily> {
    solve_soliton_type_a_tol(s, DEFAULT_TOL)
}

pub fn solve_soliton_type_a_tol(s: &AffineSurface, tol: f64) -> Result<SolitonFamily> {
    if s.kind() != SurfaceKind::TypeA {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    if is_flat(s, tol)? {
        return Err(GeometryError::FlatSurface);
    }
    if ricci_rank(&ricci_closed_form(s)?, tol) == 2 {
        return Ok(SolitonFamily::none());
    }
    let (a, normalized) = normalize_type_a_rank1_tol(s, tol)?;
    let g = normalized.coeffs().g222;
    let r22 = ricci_closed_form(&normalized)?.m[(1, 1)];
    let u2 = ScalarField::x2();
    let (particular, growth) = if g.abs() > tol * normalized.coeffs().max_abs().max(1.0) {
        (u2.scale(r22 / g), ScalarField::term(Term::constant(1.0).exp(0.0, g)))
    } else {
        (ScalarField::term(Term::constant(-r22 / 2.0).x2_pow(2)), u2)
    };
    let back = a.try_inverse().ok_or_else(|| GeometryError::Param("singular normalization".into()))?;
    let fam = SolitonFamily {
        exists: true,
        particular: particular.substitute(&back)?,
        kernel_basis: vec![ScalarField::constant(1.0), growth.substitute(&back)?],
        branch: SolitonBranch::TypeARank1,
    };
    checked(s, fam)
}

pub fn solve_soliton_type_b(s: &AffineSurface) -> Result<SolitonFamily> {
    solve_soliton_type_b_tol(s, DEFAULT_TOL)
}

pub fn solve_soliton_type_b_tol(s: &AffineSurface, tol: f64) -> Result<SolitonFamily> {
    if s.kind() != SurfaceKind::TypeB {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    let form = type_b_form(s, tol)?;
    if form == TypeBForm::Flat {
        return Err(GeometryError::FlatSurface);
    }
    if form == TypeBForm::Intersection {
        return checked(s, euler_family(s.coeffs(), tol));
    }
    let (sym, _) = ricci_split(&ricci_closed_form(s)?);
    if sym.max_abs() <= tol * s.coeffs().max_abs().max(1.0) {
        let fam = SolitonFamily {
            exists: true,
            particular: ScalarField::zero(),
            kernel_basis: vec![ScalarField::constant(1.0)],
            branch: SolitonBranch::TypeBAlternating,
        };
        return checked(s, fam);
    }
    match form {
        TypeBForm::Model(m) if matches!(m.model.family, ModelFamily::Pplus | ModelFamily::Pminus) => {
            checked(s, p_family(m.model.a, m.model.c, m.model.epsilon(), m.map, tol)?)
        }
        _ => Ok(SolitonFamily::none()),
    }
}

/// `x²ξ″ − C₁₁¹xξ′ + (1+C₁₁¹−C₁₂²)C₁₂² = 0` in `x = x¹`.
fn euler_family(c: &Coeff6, tol: f64) -> SolitonFamily {
    let e = (1.0 + c.g111 - c.g122) * c.g122;
    let m = 1.0 + c.g111;
    let (particular, growth) = if m.abs() > tol * c.max_abs().max(1.0) {
        (
            ScalarField::term(Term::constant(e / m).log(1)),
            ScalarField::term(Term::constant(1.0).x1_pow(m)),
        )
    } else {
        (ScalarField::term(Term::constant(-e / 2.0).log(2)), ScalarField::log_x1())
    };
    SolitonFamily {
        exists: true,
        particular,
        kernel_basis: vec![ScalarField::constant(1.0), growth],
        branch: SolitonBranch::TypeBIntersectionA,
    }
}

/// Families on `P^ε_{a,c}`, expressed in the original coordinates `x = T·u`.
fn p_family(a: f64, c: f64, eps: i8, map: TypeBMap, tol: f64) -> Result<SolitonFamily> {
    let back = map
        .matrix()
        .try_inverse()
        .ok_or_else(|| GeometryError::Param("singular T map".into()))?;
    let near = |x: f64, y: f64| (x - y).abs() <= tol.sqrt() * 1e-2;
    let mut kernel = vec![ScalarField::constant(1.0)];
    let branch = if near(a, -2.0) && c.abs() <= tol {
        kernel.push(ScalarField::x2().substitute(&back)?);
        SolitonBranch::TypeBPExtended2b
    } else if eps < 0 && near(a, -0.5) && near(c * c, 3.0 / 8.0) {
        let u = ScalarField::x2() - ScalarField::x1().scale(2.0 * c);
        kernel.push(u.substitute(&back)?);
        SolitonBranch::TypeBPExtended2c
    } else {
        SolitonBranch::TypeBPlog
    };
    Ok(SolitonFamily {
        exists: true,
        particular: ScalarField::term(Term::constant(a).log(1)),
        kernel_basis: kernel,
        branch,
    })
}

/// Basis of `ker H` found by a dictionary ansatz; the constant comes first.
pub fn yamabe_kernel(s: &AffineSurface) -> Result<Vec<ScalarField>> {
    let candidates = match s.kind() {
        SurfaceKind::TypeA => type_a_candidates(s.coeffs()),
        SurfaceKind::TypeB => type_b_candidates(s.coeffs()),
        SurfaceKind::Generic => return Err(GeometryError::UnsupportedKind("generic")),
    };
    let mut out = vec![ScalarField::constant(1.0)];
    for f in null_combinations(s, &candidates)? {
        if check(s, &f, true, "Yamabe kernel element").is_ok() {
            out.push(f);
        }
    }
    Ok(out)
}

fn push_unique(list: &mut Vec<ScalarField>, f: ScalarField) {
    if !f.is_zero() && !list.contains(&f) {
        list.push(f);
    }
}

/// Exponents `λ` with `λᵢλⱼ = Γᵢⱼᵏλₖ`, i.e. `d e^{λ·x}` parallel.
fn parallel_exponents(g: &Coeff6) -> Vec<[f64; 2]> {
    let t = g.tensor();
    let residual = |l: [f64; 2]| {
        let mut r: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                r = r.max((l[i] * l[j] - t[i][j][0] * l[0] - t[i][j][1] * l[1]).abs());
            }
        }
        r
    };
    let zero = 1e-12 * g.max_abs().max(1.0);
    let mut ts: Vec<f64> = Vec::new();
    // λ = λ₁(1, t): Γ₁₁²t² + (Γ₁₁¹ − Γ₁₂²)t − Γ₁₂¹ = 0.
    let (qa, qb, qc) = (g.g112, g.g111 - g.g122, -g.g121);
    if qa.abs() > zero {
        ts.extend(crate::normal::quadratic_roots(qa, qb, qc));
    } else if qb.abs() > zero {
        ts.push(-qc / qb);
    } else if qc.abs() <= zero && g.g111.abs() > zero {
        ts.extend(crate::normal::quadratic_roots(g.g111, -g.g222, -g.g221));
    }
    let mut out: Vec<[f64; 2]> = ts
        .into_iter()
        .map(|t| {
            let l1 = g.g111 + g.g112 * t;
            [l1, l1 * t]
        })
        .collect();
    out.push([0.0, g.g222]);
    out.retain(|l| (l[0] != 0.0 || l[1] != 0.0) && residual(*l) <= 1e-9 * g.max_abs().max(1.0).powi(2));
    out
}

fn type_a_candidates(g: &Coeff6) -> Vec<ScalarField> {
    let mono = |p: f64, q: u32| ScalarField::term(Term::constant(1.0).x1_pow(p).x2_pow(q));
    let mut out = Vec::new();
    for (p, q) in [(0.0, 2), (1.0, 1), (0.0, 1), (2.0, 0), (1.0, 0)] {
        push_unique(&mut out, mono(p, q));
    }
    for l in parallel_exponents(g) {
        let e = Term::constant(1.0).exp(l[0], l[1]);
        push_unique(&mut out, ScalarField::term(e));
        push_unique(&mut out, ScalarField::term(e.x2_pow(1)));
        push_unique(&mut out, ScalarField::term(e.x1_pow(1.0)));
    }
    out
}

fn type_b_candidates(c: &Coeff6) -> Vec<ScalarField> {
    let base = [0.0, 1.0 + c.g111];
    let mut exps: Vec<f64> = Vec::new();
    for b in base {
        for shift in [0.0, 1.0, 2.0] {
            let m = b + shift;
            if !exps.iter().any(|e| (e - m).abs() < 1e-9) {
                exps.push(m);
            }
        }
    }
    let mut out = Vec::new();
    for k in [2u32, 1, 0] {
        for &m in &exps {
            let p = m - k as f64;
            if k == 0 && p == 0.0 {
                continue;
            }
            push_unique(&mut out, ScalarField::term(Term::constant(1.0).x1_pow(p).x2_pow(k)));
        }
    }
    for &m in &exps {
        push_unique(&mut out, ScalarField::term(Term::constant(1.0).x1_pow(m).log(1)));
        push_unique(&mut out, ScalarField::term(Term::constant(1.0).x1_pow(m - 1.0).x2_pow(1).log(1)));
    }
    push_unique(&mut out, ScalarField::term(Term::constant(1.0).log(2)));
    out
}

/// Linear combinations of candidates annihilated by `H`, in reduced row echelon form.
fn null_combinations(s: &AffineSurface, cands: &[ScalarField]) -> Result<Vec<ScalarField>> {
    let n = cands.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let pts = sample_points(crate::sampling::INTERNAL_SEED ^ 0x9e37, (n + 4).max(12));
    let mut a = DMatrix::zeros(3 * pts.len(), n);
    for (j, f) in cands.iter().enumerate() {
        for (r, &p) in pts.iter().enumerate() {
            let h: Matrix2<f64> = hessian(s, f, p)?;
            a[(3 * r, j)] = h[(0, 0)];
            a[(3 * r + 1, j)] = h[(0, 1)];
            a[(3 * r + 2, j)] = h[(1, 1)];
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, nj) in norms.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / nj);
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= 1e-10 * smax)
        .collect();
    let mut k = DMatrix::from_fn(null.len(), n, |r, j| vt[(null[r], j)] / norms[j]);
    let rows = rref(&mut k);
    let mut out = Vec::new();
    for r in 0..rows {
        let row = k.row(r);
        let big = row.amax();
        let terms: Vec<ScalarField> = (0..n)
            .filter(|&j| row[j].abs() > 1e-9 * big)
            .map(|j| cands[j].scale(round_coeff(row[j])))
            .collect();
        let f = terms.into_iter().fold(ScalarField::zero(), |acc, t| acc + t);
        if !f.is_zero() {
            out.push(f);
        }
    }
    Ok(out)
}

fn round_coeff(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-11 * r.abs().max(1.0) {
        r
    } else {
        v
    }
}

/// In-place reduced row echelon form; returns the rank.
fn rref(m: &mut DMatrix<f64>) -> usize {
    let (rows, cols) = m.shape();
    let tol = 1e-12 * m.amax().max(f64::MIN_POSITIVE);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, val) = (r..rows).map(|i| (i, m[(i, c)].abs())).fold((r, 0.0), |b, x| if x.1 > b.1 { x } else { b });
        if val <= tol {
            continue;
        }
        m.swap_rows(r, piv);
        let p = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        r += 1;
    }
    r
}
