//! Torsion-free connections on surfaces: Christoffel symbols, curvature, Ricci
//! tensor, its covariant derivative and Hessians.
//!
//! Conventions: `∇_{∂ᵢ}∂ⱼ = Γᵢⱼᵏ ∂ₖ`,
//! `R(∂ᵢ,∂ⱼ)∂ₖ = Rᵢⱼₖˡ ∂ₗ` with
//! `Rᵢⱼₖˡ = ∂ᵢΓⱼₖˡ − ∂ⱼΓᵢₖˡ + ΓᵢₘˡΓⱼₖᵐ − ΓⱼₘˡΓᵢₖᵐ`, and
//! `ρ(ξ₁,ξ₂) = Tr{ξ₃ ↦ R(ξ₃,ξ₁)ξ₂}`, so `ρⱼₖ = Σᵢ Rᵢⱼₖⁱ`.
//! Covariant derivatives put the differentiation index last: `ρᵢⱼ;ₖ`.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::field::ScalarField;

/// Default step for central differences on the base surface.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `Γ[i][j][k] = Γᵢⱼᵏ` with zero-based indices.
pub type Gamma = [[[f64; 2]; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    fn shifted(self, axis: usize, h: f64) -> Self {
        if axis == 0 {
            Point2::new(self.x1 + h, self.x2)
        } else {
            Point2::new(self.x1, self.x2 + h)
        }
    }
}

/// The six independent Christoffel values of a torsion-free connection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coeff6 {
    pub g111: f64,
    pub g112: f64,
    pub g121: f64,
    pub g122: f64,
    pub g221: f64,
    pub g222: f64,
}

impl Coeff6 {
    pub const ZERO: Coeff6 = Coeff6::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);

    pub const fn new(g111: f64, g112: f64, g121: f64, g122: f64, g221: f64, g222: f64) -> Self {
        Coeff6 {
            g111,
            g112,
            g121,
            g122,
            g221,
            g222,
        }
    }

    /// Order: `111, 112, 121, 122, 221, 222`.
    pub const fn from_array(a: [f64; 6]) -> Self {
        Coeff6::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.g111, self.g112, self.g121, self.g122, self.g221, self.g222]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// `Γᵢⱼᵏ` with zero-based indices.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.tensor()[i][j][k]
    }

    pub fn tensor(&self) -> Gamma {
        [
            [[self.g111, self.g112], [self.g121, self.g122]],
            [[self.g121, self.g122], [self.g221, self.g222]],
        ]
    }

    /// Reads the lower-symmetric part of `t`.
    pub fn from_tensor(t: &Gamma) -> Self {
        let s = |k: usize| 0.5 * (t[0][1][k] + t[1][0][k]);
        Coeff6::new(t[0][0][0], t[0][0][1], s(0), s(1), t[1][1][0], t[1][1][1])
    }

    pub fn scaled(&self, s: f64) -> Self {
        let a = self.to_array();
        Coeff6::from_array(a.map(|v| v * s))
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, o: &Coeff6) -> f64 {
        let (a, b) = (self.to_array(), o.to_array());
        (0..6).fold(0.0, |m, i| m.max((a[i] - b[i]).abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceKind {
    TypeA,
    TypeB,
    Generic,
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::TypeA => "typeA",
            SurfaceKind::TypeB => "typeB",
            SurfaceKind::Generic => "generic",
        }
    }
}

pub type GammaFn = Arc<dyn Fn(Point2) -> Result<Coeff6> + Send + Sync>;
pub type GammaDerivFn = Arc<dyn Fn(Point2) -> Result<(Coeff6, Coeff6)> + Send + Sync>;

#[derive(Clone)]
struct GenericConnection {
    gamma: GammaFn,
    derivatives: Option<GammaDerivFn>,
    step: f64,
}

/// A torsion-free connection on a domain in the plane.
///
/// Type A has constant symbols on all of ℝ²; Type B has `Γ = C/x¹` on `x¹ > 0`;
/// generic connections are given by an evaluator on `x¹ > 0`.
#[derive(Clone)]
pub struct AffineSurface {
    kind: SurfaceKind,
    coeffs: Coeff6,
    generic: Option<GenericConnection>,
}

impl AffineSurface {
    pub fn type_a(c: Coeff6) -> Result<Self> {
        Self::constant_family(SurfaceKind::TypeA, c)
    }

    pub fn type_b(c: Coeff6) -> Result<Self> {
        Self::constant_family(SurfaceKind::TypeB, c)
    }

    fn constant_family(kind: SurfaceKind, coeffs: Coeff6) -> Result<Self> {
        if !coeffs.is_finite() {
            return Err(GeometryError::NonFinite("Christoffel coefficients"));
        }
        Ok(AffineSurface {
            kind,
            coeffs,
            generic: None,
        })
    }

    /// A connection given by an evaluator; derivatives use central differences with `step`.
    pub fn generic<F>(gamma: F, step: f64) -> Self
    where
        F: Fn(Point2) -> Result<Coeff6> + Send + Sync + 'static,
    {
        AffineSurface {
            kind: SurfaceKind::Generic,
            coeffs: Coeff6::ZERO,
            generic: Some(GenericConnection {
                gamma: Arc::new(gamma),
                derivatives: None,
                step,
            }),
        }
    }

    /// Supplies analytic first derivatives `(∂₁Γ, ∂₂Γ)` for a generic connection.
    pub fn with_derivatives<F>(mut self, d: F) -> Self
    where
        F: Fn(Point2) -> Result<(Coeff6, Coeff6)> + Send + Sync + 'static,
    {
        if let Some(g) = self.generic.as_mut() {
            g.derivatives = Some(Arc::new(d));
        }
        self
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    /// Constant coefficients (`Γ` for Type A, `C` for Type B; zero for generic).
    pub fn coeffs(&self) -> &Coeff6 {
        &self.coeffs
    }

    pub fn in_domain(&self, p: Point2) -> bool {
        p.x1.is_finite() && p.x2.is_finite() && (self.kind == SurfaceKind::TypeA || p.x1 > 0.0)
    }

    pub fn check_domain(&self, p: Point2) -> Result<()> {
        if self.in_domain(p) {
            Ok(())
        } else {
            Err(GeometryError::Domain { x1: p.x1, x2: p.x2 })
        }
    }

    /// Christoffel symbols at `p` as a full tensor.
    pub fn gamma_at(&self, p: Point2) -> Result<Gamma> {
        Ok(christoffel_eval(self, p)?.0.tensor())
    }

    fn generic_gamma(&self, p: Point2) -> Result<Coeff6> {
        let g = self.generic.as_ref().expect("generic evaluator");
        let c = (g.gamma)(p)?;
        if !c.is_finite() {
            return Err(GeometryError::NonFinite("generic Christoffel evaluation"));
        }
        Ok(c)
    }
}

impl fmt::Debug for AffineSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SurfaceKind::Generic => write!(f, "AffineSurface::Generic"),
            k => f
                .debug_struct("AffineSurface")
                .field("kind", &k)
                .field("coeffs", &self.coeffs)
                .finish(),
        }
    }
}

/// Christoffel symbols and their first partial derivatives at `p`.
pub fn christoffel_eval(s: &AffineSurface, p: Point2) -> Result<(Coeff6, Coeff6, Coeff6)> {
    s.check_domain(p)?;
    match s.kind {
        SurfaceKind::TypeA => Ok((s.coeffs, Coeff6::ZERO, Coeff6::ZERO)),
        SurfaceKind::TypeB => {
            let inv = 1.0 / p.x1;
            Ok((s.coeffs.scaled(inv), s.coeffs.scaled(-inv * inv), Coeff6::ZERO))
        }
        SurfaceKind::Generic => {
            let g = s.generic.as_ref().expect("generic evaluator");
            let value = s.generic_gamma(p)?;
            if let Some(d) = &g.derivatives {
                let (d1, d2) = d(p)?;
                return Ok((value, d1, d2));
            }
            let h = g.step;
            let diff = |axis: usize| -> Result<Coeff6> {
                let fwd = s.generic_gamma(p.shifted(axis, h))?.to_array();
                let bwd = s.generic_gamma(p.shifted(axis, -h))?.to_array();
                Ok(Coeff6::from_array(std::array::from_fn(|i| (fwd[i] - bwd[i]) / (2.0 * h))))
            };
            Ok((value, diff(0)?, diff(1)?))
        }
    }
}

/// A covariant 2-tensor `(x¹)^{-k}·M` with constant `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cov2Field {
    pub scale_power: i32,
    pub m: Matrix2<f64>,
}

impl Cov2Field {
    pub fn new(scale_power: i32, m: Matrix2<f64>) -> Self {
        Cov2Field { scale_power, m }
    }

    pub fn zero(scale_power: i32) -> Self {
        Cov2Field::new(scale_power, Matrix2::zeros())
    }

    pub fn eval(&self, p: Point2) -> Result<Matrix2<f64>> {
        Ok(self.m * scale_factor(self.scale_power, p)?)
    }

    pub fn transpose(&self) -> Self {
        Cov2Field::new(self.scale_power, self.m.transpose())
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    /// `T(X,Y)` of the constant part.
    pub fn pair(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| self.m[(i, j)] * x[i] * y[j]).sum()
    }
}

/// A covariant 3-tensor `(x¹)^{-k}·T` with constant `T[i][j][k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cov3Field {
    pub scale_power: i32,
    pub t: [[[f64; 2]; 2]; 2],
}

impl Cov3Field {
    pub fn eval(&self, p: Point2) -> Result<[[[f64; 2]; 2]; 2]> {
        let s = scale_factor(self.scale_power, p)?;
        Ok(self.t.map(|a| a.map(|b| b.map(|v| v * s))))
    }

    pub fn max_abs(&self) -> f64 {
        self.t.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `T(X,Y;Z)` of the constant part.
    pub fn triple(&self, x: [f64; 2], y: [f64; 2], z: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    acc += self.t[i][j][k] * x[i] * y[j] * z[k];
                }
            }
        }
        acc
    }
}

fn scale_factor(k: i32, p: Point2) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    if p.x1 <= 0.0 {
        return Err(GeometryError::Domain { x1: p.x1, x2: p.x2 });
    }
    Ok(p.x1.powi(-k))
}

/// Ricci tensor from the closed formulas of the two constant families.
///
/// Type A gives a symmetric constant tensor; Type B gives `(x¹)⁻²·M`, where `M`
/// is symmetric only when `C₂₂² = −C₁₂¹`.
pub fn ricci_closed_form(s: &AffineSurface) -> Result<Cov2Field> {
    let c = s.coeffs;
    match s.kind {
        SurfaceKind::TypeA => {
            let r11 = (c.g111 - c.g122) * c.g122 + c.g112 * (c.g222 - c.g121);
            let r12 = c.g121 * c.g122 - c.g112 * c.g221;
            let r22 = -c.g121 * c.g121 + c.g222 * c.g121 + (c.g111 - c.g122) * c.g221;
            Ok(Cov2Field::new(0, Matrix2::new(r11, r12, r12, r22)))
        }
        SurfaceKind::TypeB => {
            let r11 = c.g122 * (c.g111 - c.g122 + 1.0) + c.g112 * (c.g222 - c.g121);
            let r12 = -c.g112 * c.g221 + c.g121 * c.g122 + c.g222;
            let r21 = -c.g112 * c.g221 + c.g121 * c.g122 - c.g121;
            let r22 = c.g111 * c.g221 - c.g121 * c.g121 + c.g121 * c.g222 - c.g122 * c.g221 - c.g221;
            Ok(Cov2Field::new(2, Matrix2::new(r11, r12, r21, r22)))
        }
        SurfaceKind::Generic => Err(GeometryError::UnsupportedKind("generic")),
    }
}

/// `∇ρ` with components `ρᵢⱼ;ₖ`.
pub fn nabla_ricci_closed_form(s: &AffineSurface) -> Result<Cov3Field> {
    let c = s.coeffs;
    match s.kind {
        SurfaceKind::TypeA => {
            let (g111, g112, g121, g122, g221, g222) = (c.g111, c.g112, c.g121, c.g122, c.g221, c.g222);
            let r111 = 2.0
                * (-g111 * g111 * g122
                    + g111 * (g112 * (g121 - g222) + g122 * g122)
                    + g112 * (g112 * g221 - g121 * g122));
            let r121 = 2.0 * (g112 * (g121 * g121 - g121 * g222 + g122 * g221) - g111 * g121 * g122);
            let r122 = 2.0 * (g122 * (-g111 * g221 - g121 * g222 + g122 * g221) + g112 * g121 * g221);
            let r222 = 2.0
                * (g221 * (g222 * (g122 - g111) + g112 * g221) + g121 * g121 * g222
                    - g121 * (g122 * g221 + g222 * g222));
            let t = [[[r111, r121], [r121, r122]], [[r121, r122], [r122, r222]]];
            Ok(Cov3Field { scale_power: 0, t })
        }
        SurfaceKind::TypeB => {
            let m = ricci_closed_form(s)?.m;
            let g = c.tensor();
            let mut t = [[[0.0; 2]; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let mut v = if k == 0 { -2.0 * m[(i, j)] } else { 0.0 };
                        for l in 0..2 {
                            v -= g[k][i][l] * m[(l, j)] + g[k][j][l] * m[(i, l)];
                        }
                        t[i][j][k] = v;
                    }
                }
            }
            Ok(Cov3Field { scale_power: 3, t })
        }
        SurfaceKind::Generic => Err(GeometryError::UnsupportedKind("generic")),
    }
}

/// `Hᵢⱼ = ∂ᵢ∂ⱼf − Γᵢⱼᵏ∂ₖf`.
pub fn hessian(s: &AffineSurface, f: &ScalarField, p: Point2) -> Result<Matrix2<f64>> {
    let g = s.gamma_at(p)?;
    let jet = f.jet(p)?;
    let h = |i: usize, j: usize| jet.hess[i][j] - g[i][j][0] * jet.grad[0] - g[i][j][1] * jet.grad[1];
    let off = h(0, 1);
    Ok(Matrix2::new(h(0, 0), off, off, h(1, 1)))
}

/// Ricci tensor from the curvature definition, with Γ-derivatives from
/// [`christoffel_eval`] (analytic for the constant families).
///
/// `h` is only used by generic connections without analytic derivatives.
pub fn fd_ricci_oracle(s: &AffineSurface, p: Point2, h: f64) -> Result<Matrix2<f64>> {
    if !(h > 0.0) {
        return Err(GeometryError::Param("step must be positive".into()));
    }
    let (g, d1, d2) = if s.kind == SurfaceKind::Generic && s.generic.as_ref().is_some_and(|g| g.derivatives.is_none()) {
        let stepped = AffineSurface {
            generic: s.generic.as_ref().map(|g| GenericConnection { step: h, ..g.clone() }),
            ..s.clone()
        };
        christoffel_eval(&stepped, p)?
    } else {
        christoffel_eval(s, p)?
    };
    Ok(ricci_from_jet(&g.tensor(), &[d1.tensor(), d2.tensor()]))
}

/// Contracts the curvature built from `Γ` and `dΓ[m] = ∂ₘΓ`.
pub fn ricci_from_jet(g: &Gamma, dg: &[Gamma; 2]) -> Matrix2<f64> {
    let mut rho = Matrix2::zeros();
    for j in 0..2 {
        for k in 0..2 {
            let mut acc = 0.0;
            for i in 0..2 {
                acc += dg[i][j][k][i] - dg[j][i][k][i];
                for m in 0..2 {
                    acc += g[i][m][i] * g[j][k][m] - g[j][m][i] * g[i][k][m];
                }
            }
            rho[(j, k)] = acc;
        }
    }
    rho
}

/// Covariant derivative of a covariant tensor field by central differences.
///
/// `field` returns the `2^rank` components in row-major index order; the result
/// has `2^(rank+1)` components with the differentiation index last.
pub fn fd_covariant_derivative<F>(s: &AffineSurface, field: F, rank: u32, p: Point2, h: f64) -> Result<Vec<f64>>
where
    F: Fn(Point2) -> Result<Vec<f64>>,
{
    let n = 1usize << rank;
    let g = s.gamma_at(p)?;
    let center = field(p)?;
    let mut partials = Vec::with_capacity(2);
    for axis in 0..2 {
        let fwd = field(p.shifted(axis, h))?;
        let bwd = field(p.shifted(axis, -h))?;
        partials.push((0..n).map(|i| (fwd[i] - bwd[i]) / (2.0 * h)).collect::<Vec<_>>());
    }
    let mut out = vec![0.0; 2 * n];
    for idx in 0..n {
        for k in 0..2 {
            let mut v = partials[k][idx];
            for slot in 0..rank {
                let shift = rank - 1 - slot;
                let a = (idx >> shift) & 1;
                for m in 0..2 {
                    let replaced = (idx & !(1 << shift)) | (m << shift);
                    v -= g[k][a][m] * center[replaced];
                }
            }
            out[idx * 2 + k] = v;
        }
    }
    Ok(out)
}
