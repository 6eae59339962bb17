//! Normal forms of Type B surfaces under the linear maps `T_{b,c}`.
//!
//! A match records the map with `linear_equiv_type_b(s, b, c) == model`.

use crate::connection::{nabla_ricci_closed_form, ricci_closed_form, AffineSurface, Coeff6, SurfaceKind};
use crate::error::{GeometryError, Result};
use crate::invariants::{fit_recurrence, ricci_rank};
use crate::models::{linear_equiv_type_b, model, ModelFamily, ModelId, TypeBMap};

/// Coefficient agreement required for a normal-form match, relative to `tol`.
const MATCH_FACTOR: f64 = 100.0;

/// Agreement below which a failed match is treated as a failed search, not as "no match".
const NEAR_MISS: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelMatch {
    pub model: ModelId,
    pub map: TypeBMap,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TypeBForm {
    Flat,
    /// Also of Type A; `C₁₂¹ = C₂₂¹ = C₂₂² = 0`.
    Intersection,
    /// One of `N₁^±, N₂ᶜ, N₃, N₄`, or `P^±_{a,c}`, or `Q_c`.
    Model(ModelMatch),
    Generic,
}

impl TypeBForm {
    pub fn killing_dim(&self) -> usize {
        match self {
            TypeBForm::Flat => 6,
            TypeBForm::Intersection => 4,
            TypeBForm::Model(m) => match m.model.family {
                ModelFamily::N1plus | ModelFamily::N1minus | ModelFamily::N2 | ModelFamily::N3 | ModelFamily::N4 => 3,
                _ => 2,
            },
            TypeBForm::Generic => 2,
        }
    }

    pub fn model_match(&self) -> Option<&ModelMatch> {
        match self {
            TypeBForm::Model(m) => Some(m),
            _ => None,
        }
    }
}

/// Whether `ρ` is symmetric, recurrent and of rank 1 with `∇ρ` symmetric.
pub fn intersection_conditions(s: &AffineSurface, tol: f64) -> Result<bool> {
    let rho = ricci_closed_form(s)?;
    let nabla = nabla_ricci_closed_form(s)?;
    let scale = rho.max_abs().max(1.0);
    if (rho.m[(0, 1)] - rho.m[(1, 0)]).abs() > tol * scale || ricci_rank(&rho, tol) != 1 {
        return Ok(false);
    }
    if !fit_recurrence(&rho, &nabla).defined {
        return Ok(false);
    }
    let t = nabla.t;
    let nscale = nabla.max_abs().max(1.0);
    let sym = (t[0][0][1] - t[0][1][0]).abs().max((t[1][1][0] - t[0][1][1]).abs());
    Ok(sym <= tol * nscale)
}

/// Classifies a Type B surface against the normal forms.
pub fn type_b_form(s: &AffineSurface, tol: f64) -> Result<TypeBForm> {
    if s.kind() != SurfaceKind::TypeB {
        return Err(GeometryError::UnsupportedKind(s.kind().name()));
    }
    let c = *s.coeffs();
    let rho = ricci_closed_form(s)?;
    if rho.max_abs() <= tol * c.max_abs().max(1.0) {
        return Ok(TypeBForm::Flat);
    }
    let by_coeffs = [c.g121, c.g221, c.g222].iter().all(|v| v.abs() <= tol * c.max_abs().max(1.0));
    let by_invariants = intersection_conditions(s, tol)?;
    if by_coeffs != by_invariants {
        return Err(GeometryError::UnclassifiedTypeB);
    }
    if by_coeffs {
        return Ok(TypeBForm::Intersection);
    }
    let mut search = Search::new(s, tol);
    if let Some(m) = search.n_models()? {
        return Ok(TypeBForm::Model(m));
    }
    if let Some(m) = search.p_model()? {
        return Ok(TypeBForm::Model(m));
    }
    if let Some(m) = search.q_model()? {
        return Ok(TypeBForm::Model(m));
    }
    if search.best_miss < NEAR_MISS {
        return Err(GeometryError::UnclassifiedTypeB);
    }
    Ok(TypeBForm::Generic)
}

struct Search<'a> {
    s: &'a AffineSurface,
    c: Coeff6,
    tol: f64,
    best_miss: f64,
}

impl<'a> Search<'a> {
    fn new(s: &'a AffineSurface, tol: f64) -> Self {
        Search {
            s,
            c: *s.coeffs(),
            tol,
            best_miss: f64::INFINITY,
        }
    }

    fn small(&self, v: f64) -> bool {
        v.abs() <= self.tol * self.c.max_abs().max(1.0)
    }

    /// Pulls back along `T_{b,γ}` and compares with the model.
    fn check(&mut self, id: ModelId, b: f64, gamma: f64) -> Result<Option<ModelMatch>> {
        if !b.is_finite() || !gamma.is_finite() || gamma == 0.0 || id.validate().is_err() {
            return Ok(None);
        }
        let pulled = linear_equiv_type_b(self.s, b, gamma)?;
        let target = model(id)?;
        let diff = pulled.coeffs().max_diff(target.coeffs());
        let scale = target.coeffs().max_abs().max(1.0);
        let rel = diff / scale;
        if rel <= MATCH_FACTOR * self.tol {
            return Ok(Some(ModelMatch {
                model: id,
                map: TypeBMap { b, c: gamma },
            }));
        }
        self.best_miss = self.best_miss.min(rel);
        Ok(None)
    }

    /// `N₁^±, N₂ᶜ` (σ = 0) and `N₃, N₄` (σ = ±1).
    fn n_models(&mut self) -> Result<Option<ModelMatch>> {
        let c = self.c;
        // After T_{b,γ}: C̃₁₁¹ = −3/2, C̃₁₂² = −1/2, C̃₁₁² = 0 and C̃₂₂² = 2C̃₁₂¹ (σ = 0).
        let polys: [Vec<f64>; 4] = [
            vec![c.g111 + 1.5, 2.0 * c.g121, c.g221],
            vec![c.g122 + 0.5, c.g222 - c.g121, -c.g221],
            vec![c.g222 - 2.0 * c.g121, -3.0 * c.g221],
            vec![c.g112, 2.0 * c.g122 - c.g111, c.g222 - 2.0 * c.g121, -c.g221],
        ];
        for b in candidate_roots(&polys, self.c.max_abs().max(1.0) * self.tol) {
            let v = c.g121 + b * c.g221;
            let w = c.g221;
            if self.small(v) && !self.small(w) {
                let family = if w < 0.0 { ModelFamily::N1plus } else { ModelFamily::N1minus };
                let gamma = (1.0 / (2.0 * w.abs())).sqrt();
                if let Some(m) = self.check(ModelId::new(family), b, gamma)? {
                    return Ok(Some(m));
                }
            }
            if !self.small(v) {
                let gamma = 1.0 / v;
                let id = ModelId::with_c(ModelFamily::N2, gamma * gamma * w);
                if let Some(m) = self.check(id, b, gamma)? {
                    return Ok(Some(m));
                }
            }
        }
        if !self.small(c.g221) {
            let b = -c.g121 / c.g221;
            let gamma = 1.0 / c.g221.abs().sqrt();
            let family = if c.g221 < 0.0 { ModelFamily::N3 } else { ModelFamily::N4 };
            if let Some(m) = self.check(ModelId::new(family), b, gamma)? {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    fn p_model(&mut self) -> Result<Option<ModelMatch>> {
        let c = self.c;
        if self.small(c.g221) {
            return Ok(None);
        }
        let eps: i8 = if c.g221 > 0.0 { 1 } else { -1 };
        let b = -c.g121 / c.g221;
        let mut gamma = 1.0 / c.g221.abs().sqrt();
        let mut cc = eps as f64 * gamma * (c.g222 + c.g121) / 2.0;
        if cc < 0.0 {
            gamma = -gamma;
            cc = -cc;
        }
        let pulled = linear_equiv_type_b(self.s, b, gamma)?;
        let a = pulled.coeffs().g111 - pulled.coeffs().g122 - 1.0;
        let a = if self.small(a) { 0.0 } else { a };
        let cc = if self.small(cc) { 0.0 } else { cc };
        self.check(ModelId::p(eps, a, cc), b, gamma)
    }

    fn q_model(&mut self) -> Result<Option<ModelMatch>> {
        let c = self.c;
        if !self.small(c.g221) || self.small(c.g121) {
            return Ok(None);
        }
        let gamma = 1.0 / c.g121;
        let b = -c.g111 / (2.0 * c.g121);
        let pulled = linear_equiv_type_b(self.s, b, gamma)?;
        let cc = pulled.coeffs().g112;
        let cc = if self.small(cc) { 0.0 } else { cc };
        self.check(ModelId::q(cc), b, gamma)
    }
}

/// Real roots of the first polynomials (coefficients in ascending order) that are not
/// identically zero; `[0]` when all vanish.
fn candidate_roots(polys: &[Vec<f64>], zero: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for p in polys {
        let deg = match p.iter().rposition(|v| v.abs() > zero) {
            Some(d) => d,
            None => continue,
        };
        match deg {
            0 => {}
            1 => out.push(-p[0] / p[1]),
            2 => out.extend(quadratic_roots(p[2], p[1], p[0])),
            _ => out.extend(cubic_real_roots(p)),
        }
        return out;
    }
    vec![0.0]
}

/// Real roots of `a x² + b x + c`, with a double root reported once.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs()).max(f64::MIN_POSITIVE);
    if disc.abs() <= 1e-12 * scale {
        return vec![-b / (2.0 * a)];
    }
    if disc < 0.0 {
        return Vec::new();
    }
    // Cancellation-free form.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let q = if q == 0.0 { -0.5 * disc.sqrt() } else { q };
    let mut r = vec![q / a, c / q];
    r.sort_by(f64::total_cmp);
    r
}

/// Real roots of a cubic via the companion matrix.
fn cubic_real_roots(p: &[f64]) -> Vec<f64> {
    let a = p[3];
    let m = nalgebra::Matrix3::new(0.0, 0.0, -p[0] / a, 1.0, 0.0, -p[1] / a, 0.0, 1.0, -p[2] / a);
    m.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}
