//! Affine Killing vector fields, their Lie algebras and the algebra labels.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::connection::{AffineSurface, Coeff6, Point2, SurfaceKind};
use crate::error::{GeometryError, Result};
use crate::field::{ScalarField, Term, VectorField, VectorJet};
use crate::invariants::{ricci_rank, DEFAULT_TOL};
use crate::models::normalize_type_a_rank1_tol;
use crate::normal::{type_b_form, TypeBForm};
use crate::sampling::internal_points;

/// Accepted Killing residual, relative to the size of the field's 2-jet.
pub const KILLING_TOL: f64 = 1e-9;

/// Accepted least-squares residual when expressing brackets in a basis.
pub const CLOSURE_TOL: f64 = 1e-8;

/// Accepted Jacobi residual.
pub const JACOBI_TOL: f64 = 1e-10;

/// Generic points at which brackets are sampled (inside `x¹ > 0`).
const BRACKET_POINTS: [Point2; 6] = [
    Point2::new(0.61, -0.37),
    Point2::new(1.13, 0.52),
    Point2::new(1.71, -0.83),
    Point2::new(0.87, 0.91),
    Point2::new(1.42, 0.08),
    Point2::new(1.97, -0.21),
];

pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.bracket(y)
}

/// `(ℒ_X∇)ᵢⱼᵏ` at a point from the 2-jet of `X`.
pub fn lie_derivative_of_connection(s: &AffineSurface, jet: &VectorJet, p: Point2) -> Result<[[[f64; 2]; 2]; 2]> {
    let (g, d1, d2) = crate::connection::christoffel_eval(s, p)?;
    let g = g.tensor();
    let dg = [d1.tensor(), d2.tensor()];
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut v = jet.dd[k][i][j];
                for m in 0..2 {
                    v += jet.value[m] * dg[m][i][j][k];
                    v += g[m][j][k] * jet.d[m][i] + g[i][m][k] * jet.d[m][j];
                    v -= g[i][j][m] * jet.d[k][m];
                }
                out[i][j][k] = v;
            }
        }
    }
    Ok(out)
}

/// Max `|(ℒ_X∇)ᵢⱼᵏ|` over the points.
pub fn killing_residual(s: &AffineSurface, x: &VectorField, pts: &[Point2]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in pts {
        s.check_domain(p)?;
        let l = lie_derivative_of_connection(s, &x.jet(p)?, p)?;
        worst = worst.max(l.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(worst)
}

/// Size of the terms entering `ℒ_X∇`, used to make residuals relative.
pub fn jet_scale(s: &AffineSurface, x: &VectorField, pts: &[Point2]) -> Result<f64> {
    let mut m: f64 = 1.0;
    for &p in pts {
        let j = x.jet(p)?;
        let g = s.gamma_at(p)?.iter().flatten().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        let size = j
            .value
            .iter()
            .chain(j.d.iter().flatten())
            .chain(j.dd.iter().flatten().flatten())
            .fold(0.0f64, |a, v| a.max(v.abs()));
        m = m.max(size * g);
    }
    Ok(m)
}

/// Verifies `ℒ_X∇ = 0` at the internal sample points.
pub fn check_killing(s: &AffineSurface, x: &VectorField) -> Result<()> {
    let pts = internal_points();
    let r = killing_residual(s, x, &pts)?;
    let scale = jet_scale(s, x, &pts)?;
    if r > KILLING_TOL * scale {
        return Err(GeometryError::Verification {
            what: format!("Killing equation for {x}"),
            residual: r,
        });
    }
    Ok(())
}

/// A Killing basis, given in coordinates `u` with `x = chart·u`.
///
/// `chart` is the identity unless the fields could not be written in the
/// original coordinates within the function dictionary.
#[derive(Clone, Debug)]
pub struct KillingBasis {
    pub fields: Vec<VectorField>,
    pub chart: Matrix2<f64>,
    pub surface: AffineSurface,
}

impl KillingBasis {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    pub fn in_original_chart(&self) -> bool {
        self.chart == Matrix2::identity()
    }
}

/// Every returned field is checked against the Killing equation.
///
/// Flat surfaces only get a basis when `Γ = 0` (the six affine fields).
pub fn killing_basis(s: &AffineSurface) -> Result<KillingBasis> {
    killing_basis_tol(s, DEFAULT_TOL)
}

pub fn killing_basis_tol(s: &AffineSurface, tol: f64) -> Result<KillingBasis> {
    let basis = match s.kind() {
        SurfaceKind::TypeA => type_a_basis(s, tol)?,
        SurfaceKind::TypeB => type_b_basis(s, tol)?,
        SurfaceKind::Generic => return Err(GeometryError::UnsupportedKind("generic")),
    };
    for x in &basis.fields {
        match check_killing(&basis.surface, x) {
            // A normal-form match inside the search window that fails the Killing check
            // is not a confirmed match.
            Err(GeometryError::Verification { .. }) if s.kind() == SurfaceKind::TypeB && basis.dim() == 3 => {
                return Err(GeometryError::UnclassifiedTypeB)
            }
            r => r?,
        }
    }
    Ok(basis)
}

fn original(s: &AffineSurface, fields: Vec<VectorField>) -> KillingBasis {
    KillingBasis {
        fields,
        chart: Matrix2::identity(),
        surface: s.clone(),
    }
}

fn affine_fields() -> Vec<VectorField> {
    let x1 = ScalarField::x1();
    let x2 = ScalarField::x2();
    vec![
        VectorField::d1(),
        VectorField::d2(),
        VectorField::along1(x1.clone()),
        VectorField::along1(x2.clone()),
        VectorField::along2(x1),
        VectorField::along2(x2),
    ]
}

fn type_a_basis(s: &AffineSurface, tol: f64) -> Result<KillingBasis> {
    let rho = crate::connection::ricci_closed_form(s)?;
    let rank = if rho.max_abs() <= tol * s.coeffs().max_abs().max(1.0) { 0 } else { ricci_rank(&rho, tol) };
    match rank {
        0 if s.coeffs().max_abs() == 0.0 => Ok(original(s, affine_fields())),
        0 => Err(GeometryError::FlatSurface),
        2 => Ok(original(s, vec![VectorField::d1(), VectorField::d2()])),
        _ => {
            let (a, normalized) = normalize_type_a_rank1_tol(s, tol)?;
            let fields = rank1_fields(normalized.coeffs(), tol);
            if a == Matrix2::identity() {
                return Ok(original(s, fields));
            }
            let pushed: Result<Vec<VectorField>> = fields.iter().map(|f| f.pushforward(&a)).collect();
            match pushed {
                Ok(p) => Ok(original(s, p)),
                Err(_) => Ok(KillingBasis {
                    fields,
                    chart: a,
                    surface: normalized,
                }),
            }
        }
    }
}

/// Extra fields for a normalized rank-1 Type A surface (`Γ₁₁² = Γ₁₂² = 0`), then `∂₁, ∂₂`.
fn rank1_fields(g: &Coeff6, tol: f64) -> Vec<VectorField> {
    let p = 2.0 * g.g121 - g.g222;
    let scale = g.max_abs().max(1.0);
    let mut out = Vec::with_capacity(4);
    if g.g111.abs() > tol * scale {
        let q = g.g111 * g.g221;
        let disc = p * p - 4.0 * q;
        let base = Term::constant(1.0);
        let e = -g.g111;
        if disc.abs() <= tol * (p * p).max(q.abs()).max(1.0) {
            let l = -p / 2.0;
            out.push(VectorField::along1(ScalarField::term(base.exp(e, l))));
            out.push(VectorField::along1(ScalarField::term(base.exp(e, l).x2_pow(1))));
        } else if disc > 0.0 {
            for l in crate::normal::quadratic_roots(1.0, p, q) {
                out.push(VectorField::along1(ScalarField::term(base.exp(e, l))));
            }
        } else {
            let mu = -p / 2.0;
            let nu = (-disc).sqrt() / 2.0;
            out.push(VectorField::along1(ScalarField::term(base.exp(e, mu).cos(nu))));
            out.push(VectorField::along1(ScalarField::term(base.exp(e, mu).sin(nu))));
        }
    } else {
        let x1 = ScalarField::x1();
        if p.abs() > tol * scale {
            out.push(VectorField::along1(ScalarField::term(Term::constant(1.0).exp(0.0, -p))));
            out.push(VectorField::along1(x1 + ScalarField::x2().scale(g.g221 / p)));
        } else {
            out.push(VectorField::along1(ScalarField::x2()));
            let xi0 = ScalarField::term(Term::constant(g.g221 / 2.0).x2_pow(2));
            out.push(VectorField::along1(x1 + xi0));
        }
    }
    out.push(VectorField::d1());
    out.push(VectorField::d2());
    out
}

fn k0b() -> [VectorField; 2] {
    [
        VectorField::new(ScalarField::x1(), ScalarField::x2()),
        VectorField::d2(),
    ]
}

/// `X(σ) = 2x¹x²∂₁ + ((x²)² + σ(x¹)²)∂₂`.
pub fn x_sigma(sigma: f64) -> VectorField {
    let c1 = ScalarField::term(Term::constant(2.0).x1_pow(1.0).x2_pow(1));
    let c2 = ScalarField::from_terms(vec![Term::constant(1.0).x2_pow(2), Term::constant(sigma).x1_pow(2.0)]);
    VectorField::new(c1, c2)
}

fn type_b_basis(s: &AffineSurface, tol: f64) -> Result<KillingBasis> {
    let form = type_b_form(s, tol)?;
    let [e, d2] = k0b();
    let fields = match form {
        TypeBForm::Flat => return Err(GeometryError::FlatSurface),
        TypeBForm::Intersection => {
            let mut f = intersection_fields(s.coeffs(), tol);
            f.push(e);
            f.push(d2);
            f
        }
        TypeBForm::Model(m) if form.killing_dim() == 3 => {
            use crate::models::ModelFamily::*;
            let sigma = match m.model.family {
                N3 => 1.0,
                N4 => -1.0,
                _ => 0.0,
            };
            vec![x_sigma(sigma).pushforward(&m.map.matrix())?, e, d2]
        }
        _ => vec![e, d2],
    };
    Ok(original(s, fields))
}

/// The two fields beyond `𝔎₀ᴮ` when `C₁₂¹ = C₂₂¹ = C₂₂² = 0`.
fn intersection_fields(c: &Coeff6, tol: f64) -> Vec<VectorField> {
    let scale = c.max_abs().max(1.0);
    let d = c.g111 - 2.0 * c.g122;
    let x1 = ScalarField::x1();
    let f1 = if d.abs() > tol * scale {
        VectorField::new(x1.clone(), x1.scale(c.g112 / d))
    } else {
        VectorField::new(x1.clone(), ScalarField::term(Term::constant(-c.g112).x1_pow(1.0).log(1)))
    };
    let a = 1.0 + d;
    let f2 = if a.abs() > tol * scale {
        VectorField::along2(ScalarField::term(Term::constant(1.0).x1_pow(a)))
    } else {
        VectorField::along2(ScalarField::log_x1())
    };
    vec![f1, f2]
}

/// Real Lie algebra given by structure constants `[eᵢ,eⱼ] = Σₖ cᵢⱼᵏ eₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<f64>,
}

impl LieAlgebra {
    pub fn zero(dim: usize) -> Self {
        LieAlgebra {
            dim,
            c: vec![0.0; dim * dim * dim],
        }
    }

    /// From brackets `(i, j, k, value)` meaning `[eᵢ,eⱼ] ∋ value·eₖ`; antisymmetry is filled in.
    pub fn from_brackets(dim: usize, table: &[(usize, usize, usize, f64)]) -> Self {
        let mut l = Self::zero(dim);
        for &(i, j, k, v) in table {
            l.set(i, j, k, l.get(i, j, k) + v);
            l.set(j, i, k, -l.get(i, j, k));
        }
        l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.dim;
        self.c[(i * n + j) * n + k] = v;
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |k, _| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += x[i] * y[j] * self.get(i, j, k);
                }
            }
            acc
        })
    }

    /// `ad(eᵢ)` as a matrix acting on coordinate vectors.
    pub fn ad(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, j| self.get(i, j, k))
    }

    pub fn killing_form(&self) -> DMatrix<f64> {
        let ads: Vec<DMatrix<f64>> = (0..self.dim).map(|i| self.ad(i)).collect();
        DMatrix::from_fn(self.dim, self.dim, |i, j| (&ads[i] * &ads[j]).trace())
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |[x,[y,z]] + [y,[z,x]] + [z,[x,y]]|` over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (x, y, z) = (e(a), e(b), e(c));
                    let j = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(j.amax());
                }
            }
        }
        worst
    }

    /// Structure constants in the basis `fᵢ = Σⱼ Pⱼᵢ eⱼ` (columns of `p`).
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<LieAlgebra> {
        let n = self.dim;
        let inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| GeometryError::Param("singular change of basis".into()))?;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let b = self.bracket(&p.column(i).into_owned(), &p.column(j).into_owned());
                let coords = &inv * b;
                for k in 0..n {
                    out.set(i, j, k, coords[k]);
                }
            }
        }
        Ok(out)
    }
}

/// Structure constants of the span of `basis`, by least squares on sampled values.
pub fn structure_constants(basis: &[VectorField]) -> Result<LieAlgebra> {
    let n = basis.len();
    let rows = 2 * BRACKET_POINTS.len();
    let mut m = DMatrix::zeros(rows, n);
    for (j, f) in basis.iter().enumerate() {
        for (r, &p) in BRACKET_POINTS.iter().enumerate() {
            let v = f.eval(p)?;
            m[(2 * r, j)] = v[0];
            m[(2 * r + 1, j)] = v[1];
        }
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax.max(1.0) {
        return Err(GeometryError::Precondition("basis fields are linearly dependent at the sample points".into()));
    }
    let mut out = LieAlgebra::zero(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let br = basis[i].bracket(&basis[j])?;
            let mut rhs = DVector::zeros(rows);
            for (r, &p) in BRACKET_POINTS.iter().enumerate() {
                let v = br.eval(p)?;
                rhs[2 * r] = v[0];
                rhs[2 * r + 1] = v[1];
            }
            let coords = svd.solve(&rhs, 0.0).map_err(|e| GeometryError::Precondition(e.to_string()))?;
            let resid = (&m * &coords - &rhs).amax();
            if resid > CLOSURE_TOL * rhs.amax().max(1.0) {
                return Err(GeometryError::NotClosed(resid));
            }
            for k in 0..n {
                let v = coords[k];
                let v = if v.abs() < 1e-13 * coords.amax().max(1.0) { 0.0 } else { v };
                out.set(i, j, k, v);
                out.set(j, i, k, -v);
            }
        }
    }
    let jac = out.jacobi_residual();
    if jac > JACOBI_TOL * out.max_abs().powi(2).max(1.0) {
        return Err(GeometryError::Jacobi(jac));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgebraLabel {
    Abelian2,
    A2,
    A2xA2,
    A49_0,
    A412,
    Su11,
    Unknown,
}

impl AlgebraLabel {
    pub fn name(self) -> &'static str {
        match self {
            AlgebraLabel::Abelian2 => "Abelian2",
            AlgebraLabel::A2 => "A2",
            AlgebraLabel::A2xA2 => "A2xA2",
            AlgebraLabel::A49_0 => "A49_0",
            AlgebraLabel::A412 => "A412",
            AlgebraLabel::Su11 => "su11",
            AlgebraLabel::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for AlgebraLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inertia `(positive, negative)` of a symmetric matrix, with zero cutoff `tol·max(1, |λ|max)`.
pub fn inertia(b: &DMatrix<f64>, tol: f64) -> (usize, usize) {
    let ev = b.clone().symmetric_eigen().eigenvalues;
    let cut = tol * ev.amax().max(1.0);
    (ev.iter().filter(|&&v| v > cut).count(), ev.iter().filter(|&&v| v < -cut).count())
}

pub fn classify_lie_algebra(l: &LieAlgebra) -> Result<AlgebraLabel> {
    classify_lie_algebra_tol(l, DEFAULT_TOL)
}

pub fn classify_lie_algebra_tol(l: &LieAlgebra, tol: f64) -> Result<AlgebraLabel> {
    let jac = l.jacobi_residual();
    if jac > JACOBI_TOL * l.max_abs().powi(2).max(1.0) {
        return Err(GeometryError::Jacobi(jac));
    }
    let n = l.dim();
    Ok(match n {
        2 => {
            if l.max_abs() <= tol {
                AlgebraLabel::Abelian2
            } else {
                AlgebraLabel::A2
            }
        }
        3 => {
            // The real rank-3 Killing forms are so(3) (definite) and su(1,1) (indefinite).
            match inertia(&l.killing_form(), tol) {
                (2, 1) | (1, 2) => AlgebraLabel::Su11,
                _ => AlgebraLabel::Unknown,
            }
        }
        4 => match inertia(&l.killing_form(), tol) {
            (1, 0) | (0, 1) => AlgebraLabel::A49_0,
            (2, 0) => AlgebraLabel::A2xA2,
            (1, 1) => AlgebraLabel::A412,
            _ => AlgebraLabel::Unknown,
        },
        _ => AlgebraLabel::Unknown,
    })
}

/// Algebra label read off a Killing basis.
pub fn killing_algebra(basis: &KillingBasis) -> Result<(LieAlgebra, AlgebraLabel)> {
    let l = structure_constants(&basis.fields)?;
    let label = classify_lie_algebra(&l)?;
    Ok((l, label))
}
