//! The deformed Riemannian extension on `T*M` and geodesics of the base.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::connection::{AffineSurface, Point2};
use crate::error::{GeometryError, Result};
use crate::field::ScalarField;

/// Default step for 4D finite differences.
pub const EXTENSION_FD_STEP: f64 = 1e-4;

/// `F = 2·f∘π`: the steady soliton on `T*M` corresponds to the affine soliton `½F = f`
/// on the base, so the base potential is doubled when lifted.
pub const POTENTIAL_LIFT_FACTOR: f64 = 2.0;

/// Base coordinates `x` and fibre coordinates `y` on `T*M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point4 {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl Point4 {
    pub const fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Point4 { x1, x2, y1, y2 }
    }

    pub fn base(&self) -> Point2 {
        Point2::new(self.x1, self.x2)
    }

    fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Point4::new(a[0], a[1], a[2], a[3])
    }

    fn shifted(self, axis: usize, h: f64) -> Self {
        let mut a = self.to_array();
        a[axis] += h;
        Point4::from_array(a)
    }
}

/// `g = dxⁱ⊗dyᵢ + dyᵢ⊗dxⁱ + (φᵢⱼ − 2yₖΓᵢⱼᵏ)dxⁱ⊗dxʲ` with constant symmetric `φ`.
#[derive(Clone, Debug)]
pub struct ExtensionMetric {
    pub base: AffineSurface,
    pub phi: Matrix2<f64>,
}

impl ExtensionMetric {
    pub fn new(base: AffineSurface) -> Self {
        ExtensionMetric {
            base,
            phi: Matrix2::zeros(),
        }
    }

    pub fn with_phi(base: AffineSurface, phi: Matrix2<f64>) -> Result<Self> {
        if (phi - phi.transpose()).amax() != 0.0 || !phi.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::Param("phi must be finite and symmetric".into()));
        }
        Ok(ExtensionMetric { base, phi })
    }
}

pub fn extension_metric_eval(m: &ExtensionMetric, p: Point4) -> Result<Matrix4<f64>> {
    let g = m.base.gamma_at(p.base())?;
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = m.phi[(i, j)] - 2.0 * (p.y1 * g[i][j][0] + p.y2 * g[i][j][1]);
        }
        out[(i, i + 2)] = 1.0;
        out[(i + 2, i)] = 1.0;
    }
    Ok(out)
}

/// `(positive, negative)` eigenvalue counts of the metric at a point.
pub fn extension_signature(m: &ExtensionMetric, p: Point4) -> Result<(usize, usize)> {
    let ev = SymmetricEigen::new(extension_metric_eval(m, p)?).eigenvalues;
    Ok((ev.iter().filter(|&&v| v > 0.0).count(), ev.iter().filter(|&&v| v < 0.0).count()))
}

type Christoffel4 = [[[f64; 4]; 4]; 4];

/// Levi-Civita symbols `Γᵃ_bc` (stored `[a][b][c]`) by central differences of the metric.
fn levi_civita4<F>(metric: &F, p: Point4, h: f64) -> Result<Christoffel4>
where
    F: Fn(Point4) -> Result<Matrix4<f64>>,
{
    let g = metric(p)?;
    let det = g.determinant();
    if !(det.abs() > 1e-12) {
        return Err(GeometryError::Conditioning(det));
    }
    let inv = g.try_inverse().ok_or(GeometryError::Conditioning(det))?;
    let mut dg = [Matrix4::zeros(); 4];
    for (axis, d) in dg.iter_mut().enumerate() {
        *d = (metric(p.shifted(axis, h))? - metric(p.shifted(axis, -h))?) / (2.0 * h);
    }
    let mut out = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut acc = 0.0;
                for d in 0..4 {
                    acc += inv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                out[a][b][c] = 0.5 * acc;
            }
        }
    }
    Ok(out)
}

fn ricci4<F>(metric: &F, p: Point4, h: f64) -> Result<(Matrix4<f64>, Christoffel4)>
where
    F: Fn(Point4) -> Result<Matrix4<f64>>,
{
    let g0 = levi_civita4(metric, p, h)?;
    let mut dg = [[[[0.0; 4]; 4]; 4]; 4];
    for (axis, slot) in dg.iter_mut().enumerate() {
        let fwd = levi_civita4(metric, p.shifted(axis, h), h)?;
        let bwd = levi_civita4(metric, p.shifted(axis, -h), h)?;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    slot[a][b][c] = (fwd[a][b][c] - bwd[a][b][c]) / (2.0 * h);
                }
            }
        }
    }
    // Ric_bd = ∂ₐΓᵃ_bd − ∂_dΓᵃ_ab + Γᵃ_aeΓᵉ_bd − Γᵃ_deΓᵉ_ab.
    let mut ric = Matrix4::zeros();
    for b in 0..4 {
        for d in 0..4 {
            let mut acc = 0.0;
            for a in 0..4 {
                acc += dg[a][a][b][d] - dg[d][a][a][b];
                for e in 0..4 {
                    acc += g0[a][a][e] * g0[e][b][d] - g0[a][d][e] * g0[e][a][b];
                }
            }
            ric[(b, d)] = acc;
        }
    }
    Ok((ric, g0))
}

/// Ricci tensor of the extension by nested central differences.
pub fn extension_ricci_fd(m: &ExtensionMetric, p: Point4, h: f64) -> Result<Matrix4<f64>> {
    if !(h > 0.0) {
        return Err(GeometryError::Param("step must be positive".into()));
    }
    m.base.check_domain(p.base())?;
    let metric = |q: Point4| extension_metric_eval(m, q);
    Ok(ricci4(&metric, p, h)?.0)
}

/// Ricci tensor of a metric given by an evaluator on ℝ⁴.
pub fn ricci_of_metric4<F>(metric: F, p: Point4, h: f64) -> Result<Matrix4<f64>>
where
    F: Fn(Point4) -> Result<Matrix4<f64>>,
{
    Ok(ricci4(&metric, p, h)?.0)
}

/// Max component of `H_F + Ric` with `F = 2·f∘π` over the points.
pub fn verify_extension_soliton(m: &ExtensionMetric, f_base: &ScalarField, pts: &[Point4], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(GeometryError::Param("step must be positive".into()));
    }
    let metric = |q: Point4| extension_metric_eval(m, q);
    let mut worst: f64 = 0.0;
    for &p in pts {
        m.base.check_domain(p.base())?;
        let (ric, gamma) = ricci4(&metric, p, h)?;
        let jet = f_base.jet(p.base())?;
        let k = POTENTIAL_LIFT_FACTOR;
        let grad = Vector4::new(k * jet.grad[0], k * jet.grad[1], 0.0, 0.0);
        let mut hess = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                hess[(i, j)] = k * jet.hess[i][j];
            }
        }
        for a in 0..4 {
            for b in 0..4 {
                let mut v = hess[(a, b)] + ric[(a, b)];
                for c in 0..4 {
                    v -= gamma[c][a][b] * grad[c];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Accepted local error per RK4 step (step doubling), relative to `max(1, |state|)`.
const GEODESIC_LOCAL_TOL: f64 = 1e-13;

/// State magnitude treated as blow-up.
pub const BLOW_UP_NORM: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub point: Point2,
    pub velocity: [f64; 2],
}

/// Samples on the uniform grid `t = k·dt`, up to blow-up or `t_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    pub blew_up: bool,
    pub t_max_reached: f64,
}

type State = [f64; 4];

fn rhs(s: &AffineSurface, y: &State) -> Result<State> {
    let g = s.gamma_at(Point2::new(y[0], y[1]))?;
    let v = [y[2], y[3]];
    let mut a = [0.0; 2];
    for (k, ak) in a.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                *ak -= g[i][j][k] * v[i] * v[j];
            }
        }
    }
    Ok([v[0], v[1], a[0], a[1]])
}

fn rk4(s: &AffineSurface, y: &State, h: f64) -> Result<State> {
    let add = |a: &State, b: &State, c: f64| -> State { std::array::from_fn(|i| a[i] + c * b[i]) };
    let k1 = rhs(s, y)?;
    let k2 = rhs(s, &add(y, &k1, h / 2.0))?;
    let k3 = rhs(s, &add(y, &k2, h / 2.0))?;
    let k4 = rhs(s, &add(y, &k3, h))?;
    Ok(std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

fn norm(y: &State) -> f64 {
    y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Integrates `ẍᵏ + Γᵢⱼᵏẋⁱẋʲ = 0` from `t = 0` to `t_max` (either sign).
///
/// Each output interval of length `|dt|` is covered by adaptive RK4 substeps with
/// step-doubling error control.
pub fn geodesic_integrate(s: &AffineSurface, p0: Point2, v0: [f64; 2], t_max: f64, dt: f64) -> Result<GeodesicPath> {
    s.check_domain(p0)?;
    if !(dt > 0.0) || !t_max.is_finite() {
        return Err(GeometryError::Param("dt must be positive and t_max finite".into()));
    }
    let dir = if t_max < 0.0 { -1.0 } else { 1.0 };
    let n = (t_max.abs() / dt).round() as usize;
    let mut y: State = [p0.x1, p0.x2, v0[0], v0[1]];
    let mut t = 0.0;
    let mut samples = vec![GeodesicSample {
        t,
        point: p0,
        velocity: v0,
    }];
    let mut h = dt;
    for k in 1..=n {
        let target = dir * k as f64 * dt;
        while (target - t) * dir > 1e-12 * dt {
            let step = h.min((target - t).abs()) * dir;
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                return Ok(finish(samples, true, t));
            }
            let attempt = rk4(s, &y, step).and_then(|full| {
                let half = rk4(s, &y, step / 2.0)?;
                Ok((full, rk4(s, &half, step / 2.0)?))
            });
            let (full, fine) = match attempt {
                Ok(v) => v,
                Err(GeometryError::Domain { .. }) => {
                    h /= 2.0;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let err = full.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if !err.is_finite() || err > GEODESIC_LOCAL_TOL * norm(&fine).max(1.0) {
                h = step.abs() / 2.0;
                continue;
            }
            // Richardson correction of the two half steps.
            y = std::array::from_fn(|i| fine[i] + (fine[i] - full[i]) / 15.0);
            t += step;
            if err < GEODESIC_LOCAL_TOL * norm(&y).max(1.0) / 32.0 {
                h = (step.abs() * 2.0).min(dt);
            }
            if norm(&y) > BLOW_UP_NORM || !s.in_domain(Point2::new(y[0], y[1])) {
                return Ok(finish(samples, true, t));
            }
        }
        t = target;
        samples.push(GeodesicSample {
            t,
            point: Point2::new(y[0], y[1]),
            velocity: [y[2], y[3]],
        });
    }
    Ok(finish(samples, false, t))
}

fn finish(samples: Vec<GeodesicSample>, blew_up: bool, t: f64) -> GeodesicPath {
    GeodesicPath {
        samples,
        blew_up,
        t_max_reached: t,
    }
}

/// Max `|ẍᵏ + Γᵢⱼᵏẋⁱẋʲ|` at interior samples, with `ẍ` from the five-point stencil
/// on the sampled positions and `ẋ` from the stored velocities.
pub fn geodesic_residual(s: &AffineSurface, path: &GeodesicPath) -> Result<f64> {
    let sm = &path.samples;
    if sm.len() < 5 {
        return Ok(0.0);
    }
    let h = sm[1].t - sm[0].t;
    let mut worst: f64 = 0.0;
    for k in 2..sm.len() - 2 {
        let x = |j: usize, c: usize| if c == 0 { sm[j].point.x1 } else { sm[j].point.x2 };
        let g = s.gamma_at(sm[k].point)?;
        let v = sm[k].velocity;
        for c in 0..2 {
            let acc = (-x(k + 2, c) + 16.0 * x(k + 1, c) - 30.0 * x(k, c) + 16.0 * x(k - 1, c) - x(k - 2, c)) / (12.0 * h * h);
            let mut r = acc;
            for i in 0..2 {
                for j in 0..2 {
                    r += g[i][j][c] * v[i] * v[j];
                }
            }
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::Coeff6;

    #[test]
    fn metric_blocks() {
        let m1 = AffineSurface::type_a(Coeff6::new(-1.0, 0.0, 1.0, 0.0, 0.0, 2.0)).unwrap();
        let g = extension_metric_eval(&ExtensionMetric::new(m1), Point4::new(0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(g.fixed_view::<2, 2>(0, 0).into_owned(), Matrix2::new(2.0, -2.0, -2.0, 0.0));
        assert_eq!(g[(0, 2)], 1.0);
        assert_eq!(g[(2, 3)], 0.0);
    }

    #[test]
    fn product_of_spheres_ricci() {
        // S²×S² with round metrics: Ric = g.
        let metric = |q: Point4| -> Result<Matrix4<f64>> {
            Ok(Matrix4::from_diagonal(&Vector4::new(1.0, q.x1.sin().powi(2), 1.0, q.y1.sin().powi(2))))
        };
        let p = Point4::new(1.1, 0.3, 0.7, -0.2);
        let ric = ricci_of_metric4(metric, p, 1e-4).unwrap();
        assert!((ric - metric(p).unwrap()).amax() < 1e-6);
    }

    #[test]
    fn flat_line() {
        let s = AffineSurface::type_a(Coeff6::ZERO).unwrap();
        let path = geodesic_integrate(&s, Point2::new(0.2, -0.1), [1.0, 0.5], 2.0, 0.1).unwrap();
        let last = path.samples.last().unwrap();
        assert!((last.point.x1 - 2.2).abs() < 1e-12 && (last.point.x2 - 0.9).abs() < 1e-12);
        assert!(!path.blew_up);
    }
}
