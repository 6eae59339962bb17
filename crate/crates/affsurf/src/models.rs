//! Named model surfaces and the linear coordinate changes acting on them.

use std::fmt;

use nalgebra::{Matrix2, SymmetricEigen};

use crate::connection::{ricci_closed_form, AffineSurface, Coeff6, Gamma, SurfaceKind};
use crate::error::{GeometryError, Result};
use crate::invariants::{ricci_rank, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    M1,
    M2,
    M3,
    M4,
    M5,
    N1plus,
    N1minus,
    N2,
    N3,
    N4,
    Pplus,
    Pminus,
    Q,
}

impl ModelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::M1 => "M1",
            ModelFamily::M2 => "M2",
            ModelFamily::M3 => "M3",
            ModelFamily::M4 => "M4",
            ModelFamily::M5 => "M5",
            ModelFamily::N1plus => "N1plus",
            ModelFamily::N1minus => "N1minus",
            ModelFamily::N2 => "N2",
            ModelFamily::N3 => "N3",
            ModelFamily::N4 => "N4",
            ModelFamily::Pplus => "Pplus",
            ModelFamily::Pminus => "Pminus",
            ModelFamily::Q => "Q",
        }
    }

    pub fn kind(self) -> SurfaceKind {
        match self {
            ModelFamily::M1 | ModelFamily::M2 | ModelFamily::M3 | ModelFamily::M4 | ModelFamily::M5 => SurfaceKind::TypeA,
            _ => SurfaceKind::TypeB,
        }
    }

    pub fn takes_c(self) -> bool {
        !matches!(self, ModelFamily::M1 | ModelFamily::N1plus | ModelFamily::N1minus | ModelFamily::N3 | ModelFamily::N4)
    }

    pub fn takes_a(self) -> bool {
        matches!(self, ModelFamily::Pplus | ModelFamily::Pminus)
    }
}

/// A model surface with its parameters (`c`, and `a` for the `P` families).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelId {
    pub family: ModelFamily,
    pub c: f64,
    pub a: f64,
}

impl ModelId {
    pub fn new(family: ModelFamily) -> Self {
        ModelId { family, c: 0.0, a: 0.0 }
    }

    pub fn with_c(family: ModelFamily, c: f64) -> Self {
        ModelId { family, c, a: 0.0 }
    }

    /// `P^ε_{a,c}` with `ε = +1` or `−1`.
    pub fn p(epsilon: i8, a: f64, c: f64) -> Self {
        let family = if epsilon >= 0 { ModelFamily::Pplus } else { ModelFamily::Pminus };
        ModelId { family, c, a }
    }

    pub fn q(c: f64) -> Self {
        Self::with_c(ModelFamily::Q, c)
    }

    pub fn epsilon(&self) -> i8 {
        match self.family {
            ModelFamily::N1minus | ModelFamily::Pminus => -1,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, c) = (self.a, self.c);
        if !a.is_finite() || !c.is_finite() {
            return Err(GeometryError::Param("non-finite model parameter".into()));
        }
        match self.family {
            ModelFamily::M2 | ModelFamily::M3 if c * c + c == 0.0 => {
                Err(GeometryError::Param(format!("{} requires c^2 + c != 0", self.family.name())))
            }
            ModelFamily::M5 if c < 0.0 => Err(GeometryError::Param("M5 requires c >= 0".into())),
            ModelFamily::Pplus | ModelFamily::Pminus if a == 0.0 && c == 0.0 => {
                Err(GeometryError::Param("P requires (a, c) != (0, 0)".into()))
            }
            ModelFamily::Pplus | ModelFamily::Pminus if c < 0.0 => Err(GeometryError::Param("P requires c >= 0".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::format::fmt12 as sig12;
        let name = self.family.name();
        if self.family.takes_a() {
            write!(f, "{name}(a={}, c={})", sig12(self.a), sig12(self.c))
        } else if self.family.takes_c() {
            write!(f, "{name}(c={})", sig12(self.c))
        } else {
            write!(f, "{name}")
        }
    }
}

/// Coefficient table of a model surface.
pub fn model(id: ModelId) -> Result<AffineSurface> {
    id.validate()?;
    let (a, c) = (id.a, id.c);
    let coeffs = match id.family {
        ModelFamily::M1 => [-1.0, 0.0, 1.0, 0.0, 0.0, 2.0],
        ModelFamily::M2 => [-1.0, 0.0, c, 0.0, 0.0, 1.0 + 2.0 * c],
        ModelFamily::M3 => [0.0, 0.0, c, 0.0, 0.0, 1.0 + 2.0 * c],
        ModelFamily::M4 => [0.0, 0.0, 1.0, 0.0, c, 2.0],
        ModelFamily::M5 => [-1.0, 0.0, c, 0.0, -1.0, 2.0 * c],
        ModelFamily::N1plus => [-1.5, 0.0, 0.0, -0.5, -0.5, 0.0],
        ModelFamily::N1minus => [-1.5, 0.0, 0.0, -0.5, 0.5, 0.0],
        ModelFamily::N2 => [-1.5, 0.0, 1.0, -0.5, c, 2.0],
        ModelFamily::N3 => [-1.0, 0.0, 0.0, -1.0, -1.0, 0.0],
        ModelFamily::N4 => [-1.0, 0.0, 0.0, -1.0, 1.0, 0.0],
        ModelFamily::Pplus | ModelFamily::Pminus => {
            let e = id.epsilon() as f64;
            [
                0.5 * (a * a + 4.0 * a - 2.0 * e * c * c + 2.0),
                c,
                0.0,
                0.5 * (a * a + 2.0 * a - 2.0 * e * c * c),
                e,
                2.0 * e * c,
            ]
        }
        ModelFamily::Q => [0.0, c, 1.0, 0.0, 0.0, 1.0],
    };
    let coeffs = Coeff6::from_array(coeffs);
    match id.family.kind() {
        SurfaceKind::TypeA => AffineSurface::type_a(coeffs),
        _ => AffineSurface::type_b(coeffs),
    }
}

/// Christoffel symbols in coordinates `u` where `x = A·u`; exact for linear maps.
pub fn pullback_linear(c: &Coeff6, a: &Matrix2<f64>) -> Result<Coeff6> {
    let inv = a
        .try_inverse()
        .ok_or_else(|| GeometryError::Param("singular coordinate change".into()))?;
    let g = c.tensor();
    let mut out: Gamma = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = 0.0;
                for p in 0..2 {
                    for q in 0..2 {
                        for r in 0..2 {
                            acc += a[(p, i)] * a[(q, j)] * g[p][q][r] * inv[(k, r)];
                        }
                    }
                }
                out[i][j][k] = acc;
            }
        }
    }
    Ok(Coeff6::from_tensor(&out))
}

/// Applies `x = A·u` to a Type A surface.
pub fn linear_change_type_a(s: &AffineSurface, a: &Matrix2<f64>) -> Result<AffineSurface> {
    if s.kind() != SurfaceKind::TypeA {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    AffineSurface::type_a(pullback_linear(s.coeffs(), a)?)
}

/// Linear coordinates with `ρ = ρ₂₂ dx²⊗dx²`, returned as `(A, surface in u)` with `x = A·u`.
pub fn normalize_type_a_rank1(s: &AffineSurface) -> Result<(Matrix2<f64>, AffineSurface)> {
    normalize_type_a_rank1_tol(s, DEFAULT_TOL)
}

pub fn normalize_type_a_rank1_tol(s: &AffineSurface, tol: f64) -> Result<(Matrix2<f64>, AffineSurface)> {
    if s.kind() != SurfaceKind::TypeA {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    let rho = ricci_closed_form(s)?;
    let rank = ricci_rank(&rho, tol);
    if rank != 1 {
        return Err(GeometryError::Rank { expected: 1, found: rank });
    }
    let m = rho.m;
    let scale = m.amax();
    if m[(0, 0)].abs() <= tol * scale && m[(0, 1)].abs() <= tol * scale {
        return Ok((Matrix2::identity(), s.clone()));
    }
    let eig = SymmetricEigen::new(m);
    let (hi, lo) = if eig.eigenvalues[0].abs() >= eig.eigenvalues[1].abs() { (0, 1) } else { (1, 0) };
    let v = orient(eig.eigenvectors.column(hi).into_owned());
    let w = orient(eig.eigenvectors.column(lo).into_owned());
    let a = Matrix2::from_columns(&[w, v]);
    let surface = linear_change_type_a(s, &a)?;
    Ok((a, surface))
}

fn orient(v: nalgebra::Vector2<f64>) -> nalgebra::Vector2<f64> {
    let lead = if v[0].abs() >= v[1].abs() { v[0] } else { v[1] };
    if lead < 0.0 {
        -v
    } else {
        v
    }
}

/// The linear equivalence `T_{b,c}: x = (u¹, b·u¹ + c·u²)` of Type B surfaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypeBMap {
    pub b: f64,
    pub c: f64,
}

impl TypeBMap {
    pub const IDENTITY: TypeBMap = TypeBMap { b: 0.0, c: 1.0 };

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(1.0, 0.0, self.b, self.c)
    }

    /// `self ∘ other`: first `x = self(v)`, then `v = other(u)`.
    pub fn compose(&self, other: &TypeBMap) -> TypeBMap {
        TypeBMap {
            b: self.b + self.c * other.b,
            c: self.c * other.c,
        }
    }
}

/// Pulls a Type B surface back along `T_{b,c}`.
pub fn linear_equiv_type_b(s: &AffineSurface, b: f64, c: f64) -> Result<AffineSurface> {
    if s.kind() != SurfaceKind::TypeB {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    if c == 0.0 || !c.is_finite() || !b.is_finite() {
        return Err(GeometryError::Param("T_{b,c} requires finite b and c != 0".into()));
    }
    AffineSurface::type_b(pullback_linear(s.coeffs(), &TypeBMap { b, c }.matrix())?)
}

/// New coordinates `(u¹, u²) = (x¹, ε·x¹ + x²)`; afterwards `C₁₂¹ ↦ C₁₂¹ − ε·C₂₂¹`.
pub fn shear_type_b(s: &AffineSurface, eps: f64) -> Result<AffineSurface> {
    linear_equiv_type_b(s, -eps, 1.0)
}

/// The shear parameter that removes `C₁₂¹`.
pub fn shear_eps_for_c121(s: &AffineSurface) -> Result<f64> {
    let c = s.coeffs();
    if c.g221 == 0.0 {
        return Err(GeometryError::Division("C221"));
    }
    Ok(c.g121 / c.g221)
}

/// The shear parameter that removes `C₁₁²` when `C₁₂¹ = C₂₂¹ = C₂₂² = 0`.
pub fn shear_eps_for_c112(s: &AffineSurface) -> Result<f64> {
    let c = s.coeffs();
    let d = c.g111 - 2.0 * c.g122;
    if d == 0.0 {
        return Err(GeometryError::Division("C111 - 2 C122"));
    }
    Ok(-c.g112 / d)
}

/// Type B chart `(u¹, u²) = (e^{x²}, x¹)` of a Type A surface with only `Γ₁₂¹, Γ₂₂²` nonzero.
pub fn type_a_to_type_b_chart(s: &AffineSurface) -> Result<AffineSurface> {
    if s.kind() != SurfaceKind::TypeA {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    let g = s.coeffs();
    let tol = 1e-12 * g.max_abs().max(1.0);
    if [g.g111, g.g112, g.g122, g.g221].iter().any(|v| v.abs() > tol) {
        return Err(GeometryError::Precondition("requires G111 = G112 = G122 = G221 = 0".into()));
    }
    AffineSurface::type_b(Coeff6::new(-1.0 + g.g222, 0.0, 0.0, g.g121, 0.0, 0.0))
}
