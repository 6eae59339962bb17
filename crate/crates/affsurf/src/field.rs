//! Scalar and vector fields over a fixed function dictionary.
//!
//! A dictionary term is
//! `coeff · (x¹)^p1 · (x²)^p2 · e^{a·x¹ + b·x²} · (log x¹)^L · trig(ω·x²)`
//! and every operation (derivatives, products, brackets) is exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix2;

use crate::connection::Point2;
use crate::error::{GeometryError, Result};
use crate::format::fmt12;

/// Largest power of `log x¹` a term may carry.
///
/// Resonant Euler equations need `(log x¹)²` particular solutions.
pub const MAX_LOG_POWER: u8 = 2;

/// Highest integer power expanded when a linear substitution mixes coordinates.
const MAX_EXPANDED_POWER: i32 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Trig {
    None,
    Cos(f64),
    Sin(f64),
}

impl Trig {
    fn eval(self, x2: f64) -> f64 {
        match self {
            Trig::None => 1.0,
            Trig::Cos(w) => (w * x2).cos(),
            Trig::Sin(w) => (w * x2).sin(),
        }
    }

    pub fn omega(self) -> f64 {
        match self {
            Trig::None => 0.0,
            Trig::Cos(w) | Trig::Sin(w) => w,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub pow_x1: f64,
    pub pow_x2: u32,
    pub exp_a: f64,
    pub exp_b: f64,
    pub log_x1_pow: u8,
    pub trig: Trig,
}

impl Term {
    pub fn constant(coeff: f64) -> Self {
        Term {
            coeff,
            pow_x1: 0.0,
            pow_x2: 0,
            exp_a: 0.0,
            exp_b: 0.0,
            log_x1_pow: 0,
            trig: Trig::None,
        }
    }

    pub fn x1_pow(mut self, p: f64) -> Self {
        self.pow_x1 = p;
        self
    }

    pub fn x2_pow(mut self, q: u32) -> Self {
        self.pow_x2 = q;
        self
    }

    pub fn exp(mut self, a: f64, b: f64) -> Self {
        self.exp_a = a;
        self.exp_b = b;
        self
    }

    pub fn log(mut self, k: u8) -> Self {
        self.log_x1_pow = k;
        self
    }

    pub fn cos(mut self, w: f64) -> Self {
        self.trig = Trig::Cos(w);
        self
    }

    pub fn sin(mut self, w: f64) -> Self {
        self.trig = Trig::Sin(w);
        self
    }

    pub fn needs_positive_x1(&self) -> bool {
        self.log_x1_pow > 0 || (self.pow_x1 != 0.0 && self.pow_x1.fract() != 0.0)
    }

    pub fn eval(&self, p: Point2) -> Result<f64> {
        if self.coeff == 0.0 {
            return Ok(0.0);
        }
        if self.needs_positive_x1() && p.x1 <= 0.0 {
            return Err(GeometryError::Domain { x1: p.x1, x2: p.x2 });
        }
        let mut v = self.coeff;
        if self.pow_x1 != 0.0 {
            v *= if self.pow_x1.fract() == 0.0 && self.pow_x1.abs() < i32::MAX as f64 {
                p.x1.powi(self.pow_x1 as i32)
            } else {
                p.x1.powf(self.pow_x1)
            };
        }
        if self.pow_x2 > 0 {
            v *= p.x2.powi(self.pow_x2 as i32);
        }
        if self.exp_a != 0.0 || self.exp_b != 0.0 {
            v *= (self.exp_a * p.x1 + self.exp_b * p.x2).exp();
        }
        if self.log_x1_pow > 0 {
            v *= p.x1.ln().powi(self.log_x1_pow as i32);
        }
        v *= self.trig.eval(p.x2);
        if !v.is_finite() {
            return Err(GeometryError::NonFinite("dictionary term evaluation"));
        }
        Ok(v)
    }

    fn d1(&self) -> Vec<Term> {
        let mut out = Vec::with_capacity(3);
        if self.pow_x1 != 0.0 {
            out.push(Term {
                coeff: self.coeff * self.pow_x1,
                pow_x1: self.pow_x1 - 1.0,
                ..*self
            });
        }
        if self.exp_a != 0.0 {
            out.push(Term {
                coeff: self.coeff * self.exp_a,
                ..*self
            });
        }
        if self.log_x1_pow > 0 {
            out.push(Term {
                coeff: self.coeff * self.log_x1_pow as f64,
                pow_x1: self.pow_x1 - 1.0,
                log_x1_pow: self.log_x1_pow - 1,
                ..*self
            });
        }
        out
    }

    fn d2(&self) -> Vec<Term> {
        let mut out = Vec::with_capacity(3);
        if self.pow_x2 > 0 {
            out.push(Term {
                coeff: self.coeff * self.pow_x2 as f64,
                pow_x2: self.pow_x2 - 1,
                ..*self
            });
        }
        if self.exp_b != 0.0 {
            out.push(Term {
                coeff: self.coeff * self.exp_b,
                ..*self
            });
        }
        match self.trig {
            Trig::None => {}
            Trig::Cos(w) => out.push(Term {
                coeff: -self.coeff * w,
                trig: Trig::Sin(w),
                ..*self
            }),
            Trig::Sin(w) => out.push(Term {
                coeff: self.coeff * w,
                trig: Trig::Cos(w),
                ..*self
            }),
        }
        out
    }

    fn mul(&self, o: &Term) -> Result<Vec<Term>> {
        let log = self.log_x1_pow + o.log_x1_pow;
        if log > MAX_LOG_POWER {
            return Err(GeometryError::DictionaryOverflow("log power exceeds dictionary"));
        }
        let base = Term {
            coeff: self.coeff * o.coeff,
            pow_x1: self.pow_x1 + o.pow_x1,
            pow_x2: self.pow_x2 + o.pow_x2,
            exp_a: self.exp_a + o.exp_a,
            exp_b: self.exp_b + o.exp_b,
            log_x1_pow: log,
            trig: Trig::None,
        };
        let half = |c: f64, t: Trig| Term {
            coeff: 0.5 * c * base.coeff,
            trig: t,
            ..base
        };
        Ok(match (self.trig, o.trig) {
            (Trig::None, t) | (t, Trig::None) => vec![Term { trig: t, ..base }],
            (Trig::Cos(a), Trig::Cos(b)) => vec![half(1.0, Trig::Cos(a - b)), half(1.0, Trig::Cos(a + b))],
            (Trig::Sin(a), Trig::Sin(b)) => vec![half(1.0, Trig::Cos(a - b)), half(-1.0, Trig::Cos(a + b))],
            (Trig::Sin(a), Trig::Cos(b)) => vec![half(1.0, Trig::Sin(a + b)), half(1.0, Trig::Sin(a - b))],
            (Trig::Cos(a), Trig::Sin(b)) => vec![half(1.0, Trig::Sin(a + b)), half(-1.0, Trig::Sin(a - b))],
        })
    }

    /// Canonical form: nonnegative frequencies, no zero-frequency trig, no signed zeros.
    fn canonical(mut self) -> Option<Term> {
        let unsign = |x: f64| if x == 0.0 { 0.0 } else { x };
        self.pow_x1 = unsign(self.pow_x1);
        self.exp_a = unsign(self.exp_a);
        self.exp_b = unsign(self.exp_b);
        self.trig = match self.trig {
            Trig::Cos(w) if w == 0.0 => Trig::None,
            Trig::Sin(w) if w == 0.0 => return None,
            Trig::Cos(w) => Trig::Cos(w.abs()),
            Trig::Sin(w) if w < 0.0 => {
                self.coeff = -self.coeff;
                Trig::Sin(-w)
            }
            t => t,
        };
        if self.coeff == 0.0 {
            None
        } else {
            Some(self)
        }
    }

    fn same_monomial(&self, o: &Term) -> bool {
        self.pow_x1 == o.pow_x1
            && self.pow_x2 == o.pow_x2
            && self.exp_a == o.exp_a
            && self.exp_b == o.exp_b
            && self.log_x1_pow == o.log_x1_pow
            && match (self.trig, o.trig) {
                (Trig::None, Trig::None) => true,
                (Trig::Cos(a), Trig::Cos(b)) | (Trig::Sin(a), Trig::Sin(b)) => a == b,
                _ => false,
            }
    }
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalarField {
    terms: Vec<Term>,
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![Term::constant(c)])
    }

    pub fn x1() -> Self {
        Self::from_terms(vec![Term::constant(1.0).x1_pow(1.0)])
    }

    pub fn x2() -> Self {
        Self::from_terms(vec![Term::constant(1.0).x2_pow(1)])
    }

    pub fn log_x1() -> Self {
        Self::from_terms(vec![Term::constant(1.0).log(1)])
    }

    pub fn term(t: Term) -> Self {
        Self::from_terms(vec![t])
    }

    /// Builds a field, collecting like terms and dropping zeros.
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms.into_iter().filter_map(Term::canonical) {
            match out.iter_mut().find(|u| u.same_monomial(&t)) {
                Some(u) => u.coeff += t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0.0);
        ScalarField { terms: out }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| {
            t.coeff.is_finite()
                && t.pow_x1.is_finite()
                && t.exp_a.is_finite()
                && t.exp_b.is_finite()
                && t.trig.omega().is_finite()
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term { coeff: t.coeff * c, ..*t }).collect())
    }

    pub fn mul(&self, o: &ScalarField) -> Result<ScalarField> {
        let mut out = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                out.extend(a.mul(b)?);
            }
        }
        Ok(Self::from_terms(out))
    }

    pub fn pow(&self, n: u32) -> Result<ScalarField> {
        let mut out = ScalarField::constant(1.0);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn d1(&self) -> ScalarField {
        Self::from_terms(self.terms.iter().flat_map(Term::d1).collect())
    }

    pub fn d2(&self) -> ScalarField {
        Self::from_terms(self.terms.iter().flat_map(Term::d2).collect())
    }

    /// Partial derivative along coordinate `i` (0 or 1).
    pub fn partial(&self, i: usize) -> ScalarField {
        if i == 0 {
            self.d1()
        } else {
            self.d2()
        }
    }

    pub fn eval(&self, p: Point2) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, t| Ok(acc + t.eval(p)?))
    }

    pub fn jet(&self, p: Point2) -> Result<ScalarJet> {
        let f1 = self.d1();
        let f2 = self.d2();
        let f12 = f1.d2();
        Ok(ScalarJet {
            value: self.eval(p)?,
            grad: [f1.eval(p)?, f2.eval(p)?],
            hess: [
                [f1.d1().eval(p)?, f12.eval(p)?],
                [f12.eval(p)?, f2.d2().eval(p)?],
            ],
        })
    }

    /// Returns `y ↦ f(M·y)`.
    ///
    /// Fails with `DictionaryOverflow` when the substituted expression has no
    /// dictionary form (trig or log arguments that would mix coordinates).
    pub fn substitute(&self, m: &Matrix2<f64>) -> Result<ScalarField> {
        let lin1 = linear_form(m[(0, 0)], m[(0, 1)]);
        let lin2 = linear_form(m[(1, 0)], m[(1, 1)]);
        let mut out = ScalarField::zero();
        for t in &self.terms {
            let mut f = ScalarField::term(Term {
                coeff: t.coeff,
                exp_a: t.exp_a * m[(0, 0)] + t.exp_b * m[(1, 0)],
                exp_b: t.exp_a * m[(0, 1)] + t.exp_b * m[(1, 1)],
                trig: match t.trig {
                    Trig::None => Trig::None,
                    _ if m[(1, 0)] != 0.0 => {
                        return Err(GeometryError::DictionaryOverflow("trig argument mixes coordinates"))
                    }
                    Trig::Cos(w) => Trig::Cos(w * m[(1, 1)]),
                    Trig::Sin(w) => Trig::Sin(w * m[(1, 1)]),
                },
                ..Term::constant(1.0)
            });
            if t.pow_x1 != 0.0 {
                f = f.mul(&power_of_linear(&lin1, m[(0, 0)], m[(0, 1)], t.pow_x1)?)?;
            }
            if t.pow_x2 > 0 {
                f = f.mul(&lin2.pow(t.pow_x2)?)?;
            }
            if t.log_x1_pow > 0 {
                if m[(0, 1)] != 0.0 || m[(0, 0)] <= 0.0 {
                    return Err(GeometryError::DictionaryOverflow("log argument mixes coordinates"));
                }
                let shifted = ScalarField::log_x1() + ScalarField::constant(m[(0, 0)].ln());
                f = f.mul(&shifted.pow(t.log_x1_pow as u32)?)?;
            }
            out = out + f;
        }
        Ok(out)
    }
}

fn linear_form(a: f64, b: f64) -> ScalarField {
    ScalarField::from_terms(vec![Term::constant(a).x1_pow(1.0), Term::constant(b).x2_pow(1)])
}

fn power_of_linear(lin: &ScalarField, a: f64, b: f64, p: f64) -> Result<ScalarField> {
    if b == 0.0 {
        let factor = if p.fract() == 0.0 {
            a.powi(p as i32)
        } else if a > 0.0 {
            a.powf(p)
        } else {
            return Err(GeometryError::DictionaryOverflow("fractional power of a negative scale"));
        };
        return Ok(ScalarField::term(Term::constant(factor).x1_pow(p)));
    }
    if p < 0.0 || p.fract() != 0.0 || p > MAX_EXPANDED_POWER as f64 {
        return Err(GeometryError::DictionaryOverflow("non-polynomial power of a mixed coordinate"));
    }
    lin.pow(p as u32)
}

impl Add for ScalarField {
    type Output = ScalarField;
    fn add(mut self, o: ScalarField) -> ScalarField {
        self.terms.extend(o.terms);
        ScalarField::from_terms(self.terms)
    }
}

impl Sub for ScalarField {
    type Output = ScalarField;
    fn sub(self, o: ScalarField) -> ScalarField {
        self + (-o)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl Mul<ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, f: ScalarField) -> ScalarField {
        f.scale(self)
    }
}

/// Value and derivatives of a vector field: `d[i][j] = ∂ⱼXⁱ`, `dd[k][i][j] = ∂ᵢ∂ⱼXᵏ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorJet {
    pub value: [f64; 2],
    pub d: [[f64; 2]; 2],
    pub dd: [[[f64; 2]; 2]; 2],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 2],
}

impl VectorField {
    pub fn new(c1: ScalarField, c2: ScalarField) -> Self {
        VectorField { comps: [c1, c2] }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// The coordinate field `∂₁`.
    pub fn d1() -> Self {
        Self::new(ScalarField::constant(1.0), ScalarField::zero())
    }

    /// The coordinate field `∂₂`.
    pub fn d2() -> Self {
        Self::new(ScalarField::zero(), ScalarField::constant(1.0))
    }

    /// `f·∂₁`.
    pub fn along1(f: ScalarField) -> Self {
        Self::new(f, ScalarField::zero())
    }

    /// `f·∂₂`.
    pub fn along2(f: ScalarField) -> Self {
        Self::new(ScalarField::zero(), f)
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(ScalarField::is_zero)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.comps[0].scale(c), self.comps[1].scale(c))
    }

    /// Directional derivative `X(f) = Xʲ∂ⱼf`.
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        Ok(self.comps[0].mul(&f.d1())? + self.comps[1].mul(&f.d2())?)
    }

    /// `[X,Y]ⁱ = Xʲ∂ⱼYⁱ − Yʲ∂ⱼXⁱ`.
    pub fn bracket(&self, o: &VectorField) -> Result<VectorField> {
        let c = |i: usize| -> Result<ScalarField> { Ok(self.apply(&o.comps[i])? - o.apply(&self.comps[i])?) };
        Ok(VectorField::new(c(0)?, c(1)?))
    }

    pub fn eval(&self, p: Point2) -> Result<[f64; 2]> {
        Ok([self.comps[0].eval(p)?, self.comps[1].eval(p)?])
    }

    pub fn jet(&self, p: Point2) -> Result<VectorJet> {
        let a = self.comps[0].jet(p)?;
        let b = self.comps[1].jet(p)?;
        Ok(VectorJet {
            value: [a.value, b.value],
            d: [a.grad, b.grad],
            dd: [a.hess, b.hess],
        })
    }

    /// Expresses a field given in coordinates `u` (with `x = A·u`) in the coordinates `x`.
    pub fn pushforward(&self, a: &Matrix2<f64>) -> Result<VectorField> {
        let inv = a
            .try_inverse()
            .ok_or_else(|| GeometryError::Param("singular coordinate change".into()))?;
        let c0 = self.comps[0].substitute(&inv)?;
        let c1 = self.comps[1].substitute(&inv)?;
        Ok(VectorField::new(
            c0.scale(a[(0, 0)]) + c1.scale(a[(0, 1)]),
            c0.scale(a[(1, 0)]) + c1.scale(a[(1, 1)]),
        ))
    }
}

impl Add for VectorField {
    type Output = VectorField;
    fn add(self, o: VectorField) -> VectorField {
        let [a0, a1] = self.comps;
        let [b0, b1] = o.comps;
        VectorField::new(a0 + b0, a1 + b1)
    }
}

impl Sub for VectorField {
    type Output = VectorField;
    fn sub(self, o: VectorField) -> VectorField {
        self + o.scale(-1.0)
    }
}

impl Mul<VectorField> for f64 {
    type Output = VectorField;
    fn mul(self, v: VectorField) -> VectorField {
        v.scale(self)
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{}", fmt12(x))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors: Vec<String> = Vec::new();
        if self.pow_x1 == 1.0 {
            factors.push("x1".into());
        } else if self.pow_x1 != 0.0 {
            factors.push(format!("x1^{}", fmt12(self.pow_x1)));
        }
        match self.pow_x2 {
            0 => {}
            1 => factors.push("x2".into()),
            q => factors.push(format!("x2^{q}")),
        }
        if self.exp_a != 0.0 || self.exp_b != 0.0 {
            let mut arg = Vec::new();
            if self.exp_a != 0.0 {
                arg.push(format!("{}*x1", fmt12(self.exp_a)));
            }
            if self.exp_b != 0.0 {
                arg.push(format!("{}*x2", fmt12(self.exp_b)));
            }
            factors.push(format!("exp({})", arg.join(" + ")));
        }
        match self.log_x1_pow {
            0 => {}
            1 => factors.push("log(x1)".into()),
            k => factors.push(format!("log(x1)^{k}")),
        }
        match self.trig {
            Trig::None => {}
            Trig::Cos(w) => factors.push(format!("cos({}*x2)", fmt12(w))),
            Trig::Sin(w) => factors.push(format!("sin({}*x2)", fmt12(w))),
        }
        if factors.is_empty() {
            return write_num(f, self.coeff);
        }
        if self.coeff != 1.0 {
            write_num(f, self.coeff)?;
            write!(f, "*")?;
        }
        write!(f, "{}", factors.join("*"))
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(Term::to_string).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!("({c})*d{}", i + 1));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}
