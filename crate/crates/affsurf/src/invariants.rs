//! Invariants driving the classification: Ricci rank and split, `(α, ε)`,
//! recurrence forms, the Type B tensors `ρ₀ … ρ₃` and Gauss curvature of
//! metrics built from Ricci data.

use nalgebra::Matrix2;

use crate::connection::{nabla_ricci_closed_form, ricci_closed_form, AffineSurface, Cov2Field, Cov3Field, Gamma, Point2, SurfaceKind};
use crate::error::{GeometryError, Result};

/// Shared tolerance for rank and classification decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Step for the nested central differences of [`gauss_curvature_of_metric`].
pub const CURVATURE_STEP: f64 = 1e-4;

const PRECONDITION_TOL: f64 = 1e-12;
const RECURRENCE_TOL: f64 = 1e-10;

/// The three test directions `∂₁`, `∂₂`, `∂₁+∂₂`.
pub const ALPHA_DIRECTIONS: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];

/// Symmetric and alternating parts.
pub fn ricci_split(rho: &Cov2Field) -> (Cov2Field, Cov2Field) {
    let t = rho.m.transpose();
    (
        Cov2Field::new(rho.scale_power, (rho.m + t) * 0.5),
        Cov2Field::new(rho.scale_power, (rho.m - t) * 0.5),
    )
}

/// Rank by singular values; a value counts when it exceeds `tol·max(1, σ_max)`.
pub fn matrix_rank(m: &Matrix2<f64>, tol: f64) -> usize {
    let sv = m.singular_values();
    let cutoff = tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

pub fn ricci_rank(rho: &Cov2Field, tol: f64) -> usize {
    matrix_rank(&rho.m, tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaEpsilon {
    pub alpha: f64,
    pub epsilon: i8,
    pub defined: bool,
}

/// `(α, ε)` from constant parts of `ρ` and `∇ρ`, using the direction with largest `|ρ(X,X)|`.
///
/// The `(x¹)^{-k}` factors cancel in `∇ρ(X,X;X)²/ρ(X,X)³`.
pub fn alpha_from_fields(rho: &Cov2Field, nabla: &Cov3Field) -> AlphaEpsilon {
    let (x, q) = ALPHA_DIRECTIONS
        .iter()
        .map(|x| (*x, rho.pair(*x, *x)))
        .fold(([1.0, 0.0], 0.0f64), |best, cand| if cand.1.abs() > best.1.abs() { cand } else { best });
    if q == 0.0 {
        return AlphaEpsilon {
            alpha: 0.0,
            epsilon: 1,
            defined: false,
        };
    }
    let d = nabla.triple(x, x, x);
    AlphaEpsilon {
        alpha: d * d / (q * q * q),
        epsilon: if q > 0.0 { 1 } else { -1 },
        defined: true,
    }
}

/// `∇ρ(X,X;X)²/ρ(X,X)³` for an explicit direction, or `None` when `ρ(X,X) = 0`.
pub fn alpha_in_direction(s: &AffineSurface, x: [f64; 2]) -> Result<Option<f64>> {
    let rho = ricci_closed_form(s)?;
    let q = rho.pair(x, x);
    if q == 0.0 {
        return Ok(None);
    }
    let d = nabla_ricci_closed_form(s)?.triple(x, x, x);
    Ok(Some(d * d / (q * q * q)))
}

pub fn alpha_epsilon_type_a(s: &AffineSurface) -> Result<AlphaEpsilon> {
    alpha_epsilon_type_a_tol(s, DEFAULT_TOL)
}

pub fn alpha_epsilon_type_a_tol(s: &AffineSurface, tol: f64) -> Result<AlphaEpsilon> {
    if s.kind() != SurfaceKind::TypeA {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    let rho = ricci_closed_form(s)?;
    let rank = ricci_rank(&rho, tol);
    if rank != 1 {
        return Err(GeometryError::Rank { expected: 1, found: rank });
    }
    Ok(alpha_from_fields(&rho, &nabla_ricci_closed_form(s)?))
}

/// `α = 4(1+C₁₁¹)²/{(1+C₁₁¹−C₁₂²)C₁₂²}` for Type B surfaces with `C₁₂¹ = C₂₂¹ = C₂₂² = 0`.
pub fn alpha_type_b(s: &AffineSurface) -> Result<AlphaEpsilon> {
    if s.kind() != SurfaceKind::TypeB {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    let c = s.coeffs();
    if c.g121.abs() > PRECONDITION_TOL || c.g221.abs() > PRECONDITION_TOL || c.g222.abs() > PRECONDITION_TOL {
        return Err(GeometryError::Precondition("C121, C221, C222 must vanish".into()));
    }
    let denom = (1.0 + c.g111 - c.g122) * c.g122;
    if denom == 0.0 {
        return Err(GeometryError::Precondition("Ricci tensor vanishes".into()));
    }
    let num = 1.0 + c.g111;
    Ok(AlphaEpsilon {
        alpha: 4.0 * num * num / denom,
        epsilon: if denom > 0.0 { 1 } else { -1 },
        defined: true,
    })
}

/// A 1-form `ω` with `∇ρ = 2ω⊗ρ`, i.e. `ρᵢⱼ;ₖ = 2ωₖρᵢⱼ`; components carry `(x¹)^{-scale_power}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceForm {
    pub omega: [f64; 2],
    pub scale_power: i32,
    pub residual: f64,
    pub defined: bool,
}

pub fn recurrence_one_form(s: &AffineSurface) -> Result<RecurrenceForm> {
    let rho = ricci_closed_form(s)?;
    let rank = ricci_rank(&rho, DEFAULT_TOL);
    if rank != 1 {
        return Err(GeometryError::Rank { expected: 1, found: rank });
    }
    Ok(fit_recurrence(&rho, &nabla_ricci_closed_form(s)?))
}

/// Least-squares fit of `ω` in `∇ρ = 2ω⊗ρ`.
pub fn fit_recurrence(rho: &Cov2Field, nabla: &Cov3Field) -> RecurrenceForm {
    let m = rho.m;
    let norm2: f64 = m.iter().map(|v| v * v).sum();
    let mut omega = [0.0; 2];
    if norm2 > 0.0 {
        for (k, w) in omega.iter_mut().enumerate() {
            let mut dot = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    dot += nabla.t[i][j][k] * m[(i, j)];
                }
            }
            *w = dot / (2.0 * norm2);
        }
    }
    let mut residual: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                residual = residual.max((nabla.t[i][j][k] - 2.0 * omega[k] * m[(i, j)]).abs());
            }
        }
    }
    RecurrenceForm {
        omega,
        scale_power: nabla.scale_power - rho.scale_power,
        residual,
        defined: residual < RECURRENCE_TOL * nabla.max_abs().max(1.0),
    }
}

/// `ρ₀ = Γᵢⱼʲdxⁱ` (times `(x¹)⁻¹`) and `ρ₁, ρ₂, ρ₃` (times `(x¹)⁻²`), with `ρ = ρ₁ + ρ₂ − ρ₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypeBInvariants {
    pub rho0: [f64; 2],
    pub rho1: Cov2Field,
    pub rho2: Cov2Field,
    pub rho3: Cov2Field,
    /// `max |ρ − (ρ₁ + ρ₂ − ρ₃)|` over the constant parts.
    pub identity_residual: f64,
}

pub fn rho0123_type_b(s: &AffineSurface) -> Result<TypeBInvariants> {
    if s.kind() != SurfaceKind::TypeB {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    let c = s.coeffs();
    let g = c.tensor();
    let rho0 = [g[0][0][0] + g[0][1][1], g[1][0][0] + g[1][1][1]];
    let rho1 = Matrix2::new(c.g122, c.g222, -c.g121, -c.g221);
    let rho2 = Matrix2::from_fn(|i, j| g[i][j][0] * rho0[0] + g[i][j][1] * rho0[1]);
    let rho3 = Matrix2::from_fn(|i, j| {
        let mut acc = 0.0;
        for k in 0..2 {
            for l in 0..2 {
                acc += g[i][k][l] * g[j][l][k];
            }
        }
        acc
    });
    let rho = ricci_closed_form(s)?.m;
    Ok(TypeBInvariants {
        rho0,
        rho1: Cov2Field::new(2, rho1),
        rho2: Cov2Field::new(2, rho2),
        rho3: Cov2Field::new(2, rho3),
        identity_residual: (rho - (rho1 + rho2 - rho3)).amax(),
    })
}

/// Gauss curvature of the symmetric Ricci part, used as a (pseudo-)metric.
pub fn gauss_curvature_of_rho_s(s: &AffineSurface, pts: &[Point2]) -> Result<Vec<f64>> {
    let (sym, _) = ricci_split(&ricci_closed_form(s)?);
    let rank = ricci_rank(&sym, DEFAULT_TOL);
    if rank != 2 {
        return Err(GeometryError::Rank { expected: 2, found: rank });
    }
    pts.iter()
        .map(|&p| gauss_curvature_of_metric(|q| sym.eval(q), p, CURVATURE_STEP))
        .collect()
}

/// Sectional curvature `g(R(∂₁,∂₂)∂₂,∂₁)/det g` of a metric evaluator by nested central differences.
pub fn gauss_curvature_of_metric<F>(metric: F, p: Point2, h: f64) -> Result<f64>
where
    F: Fn(Point2) -> Result<Matrix2<f64>>,
{
    let at = |dx: f64, dy: f64| Point2::new(p.x1 + dx, p.x2 + dy);
    let christoffel = |q: Point2| -> Result<Gamma> { levi_civita(&metric, q, h) };
    let g0 = christoffel(p)?;
    let d1 = diff_gamma(&christoffel(at(h, 0.0))?, &christoffel(at(-h, 0.0))?, h);
    let d2 = diff_gamma(&christoffel(at(0.0, h))?, &christoffel(at(0.0, -h))?, h);
    let dg = [d1, d2];
    let gm = metric(p)?;
    let det = gm.determinant();
    if det.abs() < 1e-14 {
        return Err(GeometryError::Conditioning(det.abs()));
    }
    let mut r = [0.0; 2];
    for (l, rl) in r.iter_mut().enumerate() {
        *rl = dg[0][1][1][l] - dg[1][0][1][l];
        for m in 0..2 {
            *rl += g0[0][m][l] * g0[1][1][m] - g0[1][m][l] * g0[0][1][m];
        }
    }
    Ok((r[0] * gm[(0, 0)] + r[1] * gm[(1, 0)]) / det)
}

fn diff_gamma(fwd: &Gamma, bwd: &Gamma, h: f64) -> Gamma {
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j][k] = (fwd[i][j][k] - bwd[i][j][k]) / (2.0 * h);
            }
        }
    }
    out
}

fn levi_civita<F>(metric: &F, p: Point2, h: f64) -> Result<Gamma>
where
    F: Fn(Point2) -> Result<Matrix2<f64>>,
{
    let g = metric(p)?;
    let inv = g.try_inverse().ok_or(GeometryError::Conditioning(g.determinant().abs()))?;
    let d = [
        (metric(Point2::new(p.x1 + h, p.x2))? - metric(Point2::new(p.x1 - h, p.x2))?) / (2.0 * h),
        (metric(Point2::new(p.x1, p.x2 + h))? - metric(Point2::new(p.x1, p.x2 - h))?) / (2.0 * h),
    ];
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = 0.0;
                for l in 0..2 {
                    acc += inv[(k, l)] * (d[i][(l, j)] + d[j][(l, i)] - d[l][(i, j)]);
                }
                out[i][j][k] = 0.5 * acc;
            }
        }
    }
    Ok(out)
}
