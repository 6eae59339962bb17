//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;

use affsurf::classify::{classify, classify_with, TableRow};
use affsurf::connection::{fd_covariant_derivative, fd_ricci_oracle, ricci_closed_form, DEFAULT_FD_STEP};
use affsurf::extension::{
    extension_metric_eval, extension_ricci_fd, extension_signature, geodesic_integrate, geodesic_residual,
    verify_extension_soliton, ExtensionMetric,
};
use affsurf::invariants::{alpha_epsilon_type_a, gauss_curvature_of_metric, recurrence_one_form, rho0123_type_b, CURVATURE_STEP};
use affsurf::killing::{classify_lie_algebra, killing_basis, killing_residual, structure_constants, AlgebraLabel};
use affsurf::models::{linear_change_type_a, model, ModelFamily, ModelId};
use affsurf::sampling::{rng, sample_points, sample_points4};
use affsurf::soliton::{solve_soliton, verify_soliton, verify_yamabe, SolitonBranch};
use affsurf::{AffineSurface, Coeff6, Point2, ScalarField, Term, VectorField};
use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;

use common::*;

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
    subs: Vec<(String, bool, String)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            detail: String::new(),
            subs: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.pass &= ok;
        self.subs.push((name.to_string(), ok, detail));
    }
}

fn pts() -> Vec<Point2> {
    sample_points(SEED, 20)
}

fn table_coeffs(id: ModelId) -> [f64; 6] {
    let (a, c) = (id.a, id.c);
    match id.family {
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
            let e = if id.family == ModelFamily::Pplus { 1.0 } else { -1.0 };
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
    }
}

fn m(family: ModelFamily, c: f64) -> ModelId {
    ModelId::with_c(family, c)
}

fn surface(id: ModelId) -> AffineSurface {
    model(id).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn random_type_a<R: Rng>(r: &mut R) -> AffineSurface {
    let c: [f64; 6] = std::array::from_fn(|_| r.gen_range(-2.0..2.0));
    AffineSurface::type_a(Coeff6::from_array(c)).unwrap()
}

fn random_type_b<R: Rng>(r: &mut R) -> AffineSurface {
    let c: [f64; 6] = std::array::from_fn(|_| r.gen_range(-2.0..2.0));
    AffineSurface::type_b(Coeff6::from_array(c)).unwrap()
}

fn random_linear<R: Rng>(r: &mut R) -> Matrix2<f64> {
    loop {
        let a: Matrix2<f64> = Matrix2::from_fn(|_, _| r.gen_range(-1.5..1.5));
        if a.determinant().abs() > 0.5 {
            return a;
        }
    }
}

fn random_rank1_model<R: Rng>(r: &mut R) -> ModelId {
    match r.gen_range(0..5) {
        0 => ModelId::new(ModelFamily::M1),
        1 => m(ModelFamily::M2, r.gen_range(0.2..1.5)),
        2 => m(ModelFamily::M3, r.gen_range(-0.8..-0.2)),
        3 => m(ModelFamily::M4, r.gen_range(-1.0..1.0)),
        _ => m(ModelFamily::M5, r.gen_range(0.0..1.5)),
    }
}

fn rho_at(s: &AffineSurface, p: Point2) -> [[f64; 2]; 2] {
    let r = ricci_closed_form(s).unwrap().eval(p).unwrap();
    [[r[(0, 0)], r[(0, 1)]], [r[(1, 0)], r[(1, 1)]]]
}

fn fmt(x: f64) -> String {
    format!("{x:.3e}")
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let mut r = rng(SEED);
    let (mut worst_fd, mut worst_oracle): (f64, f64) = (0.0, 0.0);
    for kind in 0..2 {
        for _ in 0..200 {
            let s = if kind == 0 { random_type_a(&mut r) } else { random_type_b(&mut r) };
            let c = s.coeffs().to_array();
            let rho = ricci_closed_form(&s).unwrap();
            for p in sample_points(r.gen(), 10) {
                let closed = rho.eval(p).unwrap();
                let fd = fd_ricci_oracle(&s, p, DEFAULT_FD_STEP).unwrap();
                worst_fd = worst_fd.max((closed - fd).amax());
                let indep = if kind == 0 { ricci_type_a(c) } else { ricci_type_b(c, p.x1) };
                worst_oracle = worst_oracle.max(max_diff(&indep, &[[closed[(0, 0)], closed[(0, 1)]], [closed[(1, 0)], closed[(1, 1)]]]));
            }
        }
    }
    o.check("fd oracle", worst_fd < 1e-8, format!("max |closed - fd| = {}", fmt(worst_fd)));
    o.check("test-side curvature", worst_oracle < 1e-8, format!("max |closed - oracle| = {}", fmt(worst_oracle)));
    o.detail = "400 surfaces x 10 points".into();
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let p = Point2::new(1.3, -0.4);
    let mut worst_coeff: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut check = |id: ModelId, expected: [[f64; 2]; 2], x1_power: i32| {
        let s = surface(id);
        worst_coeff = worst_coeff.max(Coeff6::from_array(table_coeffs(id)).max_diff(s.coeffs()));
        let got = rho_at(&s, p);
        let scale = p.x1.powi(-x1_power);
        let exp = [[expected[0][0] * scale, expected[0][1] * scale], [expected[1][0] * scale, expected[1][1] * scale]];
        worst = worst.max(max_diff(&got, &exp));
    };
    let d22 = |v: f64| [[0.0, 0.0], [0.0, v]];
    check(ModelId::new(ModelFamily::M1), d22(1.0), 0);
    for c in [-2.5, -0.5, 0.3, 1.0, 2.0] {
        check(m(ModelFamily::M2, c), d22(c * c + c), 0);
        check(m(ModelFamily::M3, c), d22(c * c + c), 0);
        check(m(ModelFamily::M4, c), d22(1.0), 0);
        check(m(ModelFamily::N2, c), [[0.0, 1.5], [-1.5, 1.0 - 2.0 * c]], 2);
        check(ModelId::q(c), [[0.0, 1.0], [-1.0, 0.0]], 2);
    }
    for c in [0.0, 0.5, 2.0] {
        check(m(ModelFamily::M5, c), d22(1.0 + c * c), 0);
    }
    check(ModelId::new(ModelFamily::N1plus), d22(1.0), 2);
    check(ModelId::new(ModelFamily::N1minus), d22(-1.0), 2);
    check(ModelId::new(ModelFamily::N3), [[-1.0, 0.0], [0.0, 1.0]], 2);
    check(ModelId::new(ModelFamily::N4), [[-1.0, 0.0], [0.0, -1.0]], 2);
    for (a, c) in [(1.0, 1.0), (-2.0, 0.0), (0.0, 0.7), (-0.5, 0.375f64.sqrt()), (2.5, 0.2)] {
        for e in [1.0, -1.0] {
            let id = ModelId::p(e as i8, a, c);
            check(id, [[a * (0.5 * (a + 2.0) * (a + 2.0) - e * c * c), e * c], [-e * c, e * a]], 2);
        }
    }
    o.check("coefficient tables", worst_coeff == 0.0, format!("max diff = {}", fmt(worst_coeff)));
    o.check("ricci values", worst < 1e-12, format!("max error = {}", fmt(worst)));
    o
}

fn expected_row(alpha: f64, eps: i8) -> TableRow {
    if (alpha - 16.0).abs() < 1e-9 {
        TableRow::Alpha16
    } else if alpha.abs() < 1e-12 {
        if eps < 0 {
            TableRow::AlphaZeroMinus
        } else {
            TableRow::AlphaZeroPlus
        }
    } else if alpha < 0.0 {
        TableRow::AlphaNegative
    } else if alpha < 16.0 {
        TableRow::AlphaBetween
    } else {
        TableRow::AlphaAbove16
    }
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    let mut rows_ok = true;
    let mut rows_seen = std::collections::BTreeSet::new();
    let mut bad = Vec::new();
    let mut cases: Vec<(ModelId, f64, i8)> = vec![(ModelId::new(ModelFamily::M1), 16.0, 1)];
    for k in 0..20 {
        let c = -2.95 + 0.3 * k as f64;
        let a23 = 4.0 * (1.0 + 2.0 * c).powi(2) / (c * c + c);
        let e23 = if c * c + c > 0.0 { 1 } else { -1 };
        cases.push((m(ModelFamily::M2, c), a23, e23));
        cases.push((m(ModelFamily::M3, c), a23, e23));
        cases.push((m(ModelFamily::M4, c), 16.0, 1));
        let c5 = 0.15 * k as f64;
        cases.push((m(ModelFamily::M5, c5), 16.0 * c5 * c5 / (1.0 + c5 * c5), 1));
    }
    cases.push((m(ModelFamily::M3, -0.5), 0.0, -1));
    for (id, alpha, eps) in cases {
        let s = surface(id);
        let ae = alpha_epsilon_type_a(&s).unwrap();
        worst = worst.max((ae.alpha - alpha).abs());
        let row = expected_row(alpha, eps);
        rows_seen.insert(format!("{row:?}"));
        let r = classify(&s, 1e-9).unwrap();
        let ok = ae.epsilon == eps
            && r.table_row == Some(row)
            && r.lie_algebra == row.algebra()
            && r.killing_dim == 4
            && r.is_type_b == row.is_type_b()
            && r.is_type_a;
        if !ok {
            bad.push(id.to_string());
        }
        rows_ok &= ok;
    }
    o.check("alpha formulas", worst < 1e-10, format!("max error = {}", fmt(worst)));
    o.check(
        "table rows",
        rows_ok && rows_seen.len() == 6,
        format!("{} rows covered, mismatches: {:?}", rows_seen.len(), bad),
    );
    o
}

fn d1() -> VectorField {
    VectorField::d1()
}

fn d2() -> VectorField {
    VectorField::d2()
}

fn along1(t: Term) -> VectorField {
    VectorField::along1(ScalarField::term(t))
}

fn along2(t: Term) -> VectorField {
    VectorField::along2(ScalarField::term(t))
}

fn one() -> Term {
    Term::constant(1.0)
}

fn euler() -> VectorField {
    VectorField::new(ScalarField::x1(), ScalarField::x2())
}

/// `2x¹x²∂₁ + ((x²)² + σ(x¹)²)∂₂`.
fn x_sigma(sigma: f64) -> VectorField {
    VectorField::new(
        ScalarField::term(Term::constant(2.0).x1_pow(1.0).x2_pow(1)),
        ScalarField::from_terms(vec![one().x2_pow(2), Term::constant(sigma).x1_pow(2.0)]),
    )
}

/// Bases as listed, with the expected algebra where one is stated.
fn listed_bases() -> Vec<(String, AffineSurface, Vec<VectorField>, Option<AlgebraLabel>)> {
    let mut out = Vec::new();
    let k0a = || vec![d1(), d2()];
    let k0b = || vec![euler(), d2()];
    let with = |mut v: Vec<VectorField>, extra: Vec<VectorField>| {
        v.extend(extra);
        v
    };
    out.push(("M1".into(), surface(ModelId::new(ModelFamily::M1)), with(vec![along1(one().exp(1.0, 0.0)), along1(one().exp(1.0, 0.0).x2_pow(1))], k0a()), Some(AlgebraLabel::A49_0)));
    for c in [-2.0, -0.5, 0.5, 2.0] {
        out.push((format!("M2^{c}"), surface(m(ModelFamily::M2, c)), with(vec![along1(one().exp(1.0, 0.0)), along1(one().exp(1.0, 1.0))], k0a()), Some(AlgebraLabel::A2xA2)));
        out.push((format!("M3^{c}"), surface(m(ModelFamily::M3, c)), with(vec![along1(one().exp(0.0, 1.0)), along1(one().x1_pow(1.0))], k0a()), Some(AlgebraLabel::A2xA2)));
        let m4 = VectorField::along1(ScalarField::from_terms(vec![Term::constant(c).x2_pow(2), Term::constant(2.0).x1_pow(1.0)]));
        out.push((format!("M4^{c}"), surface(m(ModelFamily::M4, c)), with(vec![along1(one().x2_pow(1)), m4], k0a()), Some(AlgebraLabel::A49_0)));
    }
    for c in [0.0, 0.5, 2.0] {
        out.push((format!("M5^{c}"), surface(m(ModelFamily::M5, c)), with(vec![along1(one().exp(1.0, 0.0).cos(1.0)), along1(one().exp(1.0, 0.0).sin(1.0))], k0a()), Some(AlgebraLabel::A412)));
    }
    let b = |c: [f64; 6]| AffineSurface::type_b(Coeff6::from_array(c)).unwrap();
    // C₁₁¹ = 2C₁₂², C₁₁² = 1.
    let x1logx1 = Term::constant(-1.0).x1_pow(1.0).log(1);
    out.push(("B4a".into(), b([1.0, 1.0, 0.0, 0.5, 0.0, 0.0]), with(vec![VectorField::new(ScalarField::x1(), ScalarField::term(x1logx1)), along2(one().x1_pow(1.0))], k0b()), None));
    // C₁₁² = 0, a = 1 + C₁₁¹ − 2C₁₂² = 1.5.
    out.push(("B4b".into(), b([1.3, 0.0, 0.0, 0.4, 0.0, 0.0]), with(vec![along1(one().x1_pow(1.0)), along2(one().x1_pow(1.5))], k0b()), None));
    // a = 0.
    out.push(("B4c".into(), b([0.0, 0.0, 0.0, 0.5, 0.0, 0.0]), with(vec![along1(one().x1_pow(1.0)), along2(one().log(1))], k0b()), None));
    for (name, id, sigma) in [
        ("N1+", ModelId::new(ModelFamily::N1plus), 0.0),
        ("N1-", ModelId::new(ModelFamily::N1minus), 0.0),
        ("N2^0.5", m(ModelFamily::N2, 0.5), 0.0),
        ("N2^-1", m(ModelFamily::N2, -1.0), 0.0),
        ("N2^3", m(ModelFamily::N2, 3.0), 0.0),
        ("N3", ModelId::new(ModelFamily::N3), 1.0),
        ("N4", ModelId::new(ModelFamily::N4), -1.0),
    ] {
        out.push((name.into(), surface(id), with(vec![x_sigma(sigma)], k0b()), Some(AlgebraLabel::Su11)));
    }
    out
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let p = pts();
    let mut worst: f64 = 0.0;
    let mut fields = 0;
    for (_, s, basis, _) in listed_bases() {
        for x in &basis {
            worst = worst.max(killing_residual(&s, x, &p).unwrap());
            fields += 1;
        }
    }
    o.check("listed fields", worst < 1e-9, format!("{fields} fields, max residual = {}", fmt(worst)));

    let mut r = rng(SEED + 4);
    let mut dims_ok = true;
    let mut notes = Vec::new();
    let mut expect = |label: String, s: &AffineSurface, dim: usize| {
        let b = killing_basis(s);
        let got = b.as_ref().map(|b| b.dim()).unwrap_or(0);
        let rep = classify_with(s, 1e-9, true).map(|r| r.killing_dim).unwrap_or(0);
        let ok = got == dim && rep == dim;
        if !ok {
            notes.push(format!("{label}: basis {got}, report {rep}, expected {dim}"));
        }
        dims_ok &= ok;
    };
    for _ in 0..50 {
        let s = random_type_a(&mut r);
        expect("random typeA".into(), &s, 2);
        let id = random_rank1_model(&mut r);
        let t = linear_change_type_a(&surface(id), &random_linear(&mut r)).unwrap();
        expect(format!("transformed {id}"), &t, 4);
        let q = random_type_b(&mut r);
        expect("random typeB".into(), &q, 2);
    }
    for (name, s, basis, _) in listed_bases() {
        expect(name, &s, basis.len());
    }
    expect("P+ 1,1".into(), &surface(ModelId::p(1, 1.0, 1.0)), 2);
    expect("Q_2".into(), &surface(ModelId::q(2.0)), 2);
    expect("flat".into(), &AffineSurface::type_a(Coeff6::ZERO).unwrap(), 6);
    o.check("dimensions 2/3/4/6", dims_ok, if notes.is_empty() { "all match".into() } else { notes.join("; ") });
    o
}

fn random_change<R: Rng>(r: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let p: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
        if p.determinant().abs() > 0.1 {
            return p;
        }
    }
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let mut r = rng(SEED + 5);
    let mut bad = Vec::new();
    let mut checked = 0;
    for (name, _, basis, expected) in listed_bases() {
        let Some(expected) = expected else { continue };
        let l = structure_constants(&basis).unwrap();
        let label = classify_lie_algebra(&l).unwrap();
        let mut stable = true;
        for _ in 0..100 {
            let changed = l.change_basis(&random_change(&mut r, l.dim())).unwrap();
            stable &= classify_lie_algebra(&changed).map(|x| x == expected).unwrap_or(false);
        }
        checked += 1;
        if label != expected || !stable {
            bad.push(format!("{name}: {} (stable {stable})", label.name()));
        }
    }
    o.check("labels and stability", bad.is_empty(), format!("{checked} bases, mismatches: {bad:?}"));
    o
}

/// Least-squares distance of `target` from `span(basis)` over sample points.
fn span_residual(target: &ScalarField, basis: &[ScalarField], p: &[Point2]) -> f64 {
    let a = DMatrix::from_fn(p.len(), basis.len(), |i, j| basis[j].eval(p[i]).unwrap());
    let b = DVector::from_fn(p.len(), |i, _| target.eval(p[i]).unwrap());
    if basis.is_empty() {
        return b.amax();
    }
    let x = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
    (a * x - b).amax()
}

struct ExpectedFamily {
    id: ModelId,
    branch: SolitonBranch,
    particular: ScalarField,
    kernel: Vec<ScalarField>,
}

fn expected_families() -> Vec<ExpectedFamily> {
    let mut out = Vec::new();
    // ξ'' − Γ₂₂²ξ' + ρ₂₂ = 0 on normalized rank-1 Type A models.
    let type_a = |id: ModelId, rho22: f64| {
        let g222 = table_coeffs(id)[5];
        let (particular, kernel) = if g222 != 0.0 {
            (
                ScalarField::term(Term::constant(rho22 / g222).x2_pow(1)),
                vec![ScalarField::constant(1.0), ScalarField::term(one().exp(0.0, g222))],
            )
        } else {
            (
                ScalarField::term(Term::constant(-rho22 / 2.0).x2_pow(2)),
                vec![ScalarField::constant(1.0), ScalarField::x2()],
            )
        };
        ExpectedFamily {
            id,
            branch: SolitonBranch::TypeARank1,
            particular,
            kernel,
        }
    };
    out.push(type_a(m(ModelFamily::M4, 0.0), 1.0));
    for c in [-2.0, -0.5, 0.5, 1.5] {
        out.push(type_a(m(ModelFamily::M3, c), c * c + c));
    }
    for c in [0.0, 0.5, 2.0] {
        out.push(type_a(m(ModelFamily::M5, c), 1.0 + c * c));
    }
    let constants = |id: ModelId| ExpectedFamily {
        id,
        branch: SolitonBranch::TypeBAlternating,
        particular: ScalarField::zero(),
        kernel: vec![ScalarField::constant(1.0)],
    };
    out.push(constants(m(ModelFamily::N2, 0.5)));
    for c in [-1.0, 0.0, 0.5, 2.0] {
        out.push(constants(ModelId::q(c)));
    }
    for e in [1, -1] {
        out.push(constants(ModelId::p(e, 0.0, 0.8)));
        for (a, c) in [(1.0, 1.0), (0.7, 0.0), (-1.3, 0.4)] {
            out.push(ExpectedFamily {
                id: ModelId::p(e, a, c),
                branch: SolitonBranch::TypeBPlog,
                particular: ScalarField::term(Term::constant(a).log(1)),
                kernel: vec![ScalarField::constant(1.0)],
            });
        }
        out.push(ExpectedFamily {
            id: ModelId::p(e, -2.0, 0.0),
            branch: SolitonBranch::TypeBPExtended2b,
            particular: ScalarField::term(Term::constant(-2.0).log(1)),
            kernel: vec![ScalarField::constant(1.0), ScalarField::x2()],
        });
    }
    let c = 0.375f64.sqrt();
    out.push(ExpectedFamily {
        id: ModelId::p(-1, -0.5, c),
        branch: SolitonBranch::TypeBPExtended2c,
        particular: ScalarField::term(Term::constant(-0.5).log(1)),
        kernel: vec![ScalarField::constant(1.0), ScalarField::x2() - ScalarField::x1().scale(2.0 * c)],
    });
    out
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let mut r = rng(SEED + 6);
    let p = pts();
    let mut dichotomy = true;
    let mut worst_random: f64 = 0.0;
    let mut rank1 = 0;
    for k in 0..200 {
        let s = if k % 2 == 0 {
            random_type_a(&mut r)
        } else {
            linear_change_type_a(&surface(random_rank1_model(&mut r)), &random_linear(&mut r)).unwrap()
        };
        let rho = ricci_type_a(s.coeffs().to_array());
        let det = rho[0][0] * rho[1][1] - rho[0][1] * rho[1][0];
        let size = rho.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let is_rank1 = size > 1e-9 && det.abs() < 1e-9 * size.max(1.0).powi(2);
        let fam = solve_soliton(&s).unwrap();
        dichotomy &= fam.exists == is_rank1;
        if fam.exists {
            rank1 += 1;
            let scale = size.max(1.0);
            worst_random = worst_random.max(verify_soliton(&s, &fam.particular, &p).unwrap() / scale);
        }
    }
    o.check("existence iff rank 1", dichotomy, format!("200 surfaces, {rank1} of rank 1"));
    o.check("random families verify", worst_random < 1e-9, format!("max relative residual = {}", fmt(worst_random)));

    let mut worst: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    let mut worst_span: f64 = 0.0;
    let mut bad = Vec::new();
    for e in expected_families() {
        let s = surface(e.id);
        let fam = solve_soliton(&s).unwrap();
        let mut res = verify_soliton(&s, &fam.particular, &p).unwrap();
        for k in &fam.kernel_basis {
            res = res.max(verify_yamabe(&s, k, &p).unwrap());
        }
        res = res.max(verify_soliton(&s, &e.particular, &p).unwrap());
        worst = worst.max(res);
        let g = tensor(table_coeffs(e.id));
        let kind_b = e.id.family.kind() == affsurf::SurfaceKind::TypeB;
        for q in &p {
            let (gq, rho) = if kind_b {
                let mut gq = g;
                gq.iter_mut().flatten().flatten().for_each(|v| *v /= q.x1);
                (gq, ricci_type_b(table_coeffs(e.id), q.x1))
            } else {
                (g, ricci_type_a(table_coeffs(e.id)))
            };
            let f = |x: f64, y: f64| e.particular.eval(Point2::new(x, y)).unwrap();
            worst_fd = worst_fd.max(soliton_residual_fd(&gq, &rho, &f, (q.x1, q.x2), true));
        }
        let mut span = span_residual(&(fam.particular.clone() - e.particular.clone()), &fam.kernel_basis, &p);
        for k in &e.kernel {
            span = span.max(span_residual(k, &fam.kernel_basis, &p));
        }
        worst_span = worst_span.max(span);
        if !fam.exists || fam.branch != e.branch || fam.kernel_basis.len() != e.kernel.len() || span > 1e-8 {
            bad.push(format!("{}: {} dim {} span {}", e.id, fam.branch, fam.kernel_basis.len(), fmt(span)));
        }
    }
    o.check("named families verify", worst < 1e-9, format!("max residual = {}", fmt(worst)));
    o.check("expected potentials (fd oracle)", worst_fd < 1e-5, format!("max residual = {}", fmt(worst_fd)));
    o.check("branch structure", bad.is_empty(), format!("max span residual = {}, mismatches: {bad:?}", fmt(worst_span)));
    let m40 = |x2: f64| x2 / 2.0;
    let display_gap = (0.0 - m40(0.3) + 2.0f64).abs();
    o.detail = format!(
        "display ODE f''-f+2=0 is off by {} on the verified M4^0 potential; the rank-1 ODE xi''-G222*xi'+rho22=0 is used",
        fmt(display_gap)
    );
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let p = pts();
    let mut r = rng(SEED + 7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut ids: Vec<ModelId> = vec![ModelId::new(ModelFamily::M1), m(ModelFamily::N2, 0.5)];
    for c in [-2.0, -0.5, 0.5, 2.0] {
        ids.extend([m(ModelFamily::M2, c), m(ModelFamily::M3, c), m(ModelFamily::M4, c), ModelId::q(c)]);
    }
    for c in [0.0, 0.5, 2.0] {
        ids.push(m(ModelFamily::M5, c));
    }
    for e in expected_families() {
        ids.push(e.id);
    }
    let mut skipped = Vec::new();
    for id in ids {
        let s = surface(id);
        let fam = solve_soliton(&s).unwrap();
        if !fam.exists {
            skipped.push(id.to_string());
            continue;
        }
        let basis = killing_basis(&s).unwrap();
        if !basis.in_original_chart() {
            skipped.push(id.to_string());
            continue;
        }
        let coeffs: Vec<f64> = (0..fam.kernel_basis.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let f = fam.member(&coeffs);
        for x in &basis.fields {
            let xf = x.apply(&f).unwrap();
            worst = worst.max(verify_yamabe(&s, &xf, &p).unwrap());
            count += 1;
        }
    }
    o.check("X(f) in the Yamabe kernel", worst < 1e-9 && skipped.is_empty(), format!("{count} pairs, max residual = {}, skipped {skipped:?}", fmt(worst)));
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let pts4 = sample_points4(SEED + 8, 10);
    let bridge = |id: ModelId, f: &ScalarField, h: f64| verify_extension_soliton(&ExtensionMetric::new(surface(id)), f, &pts4, h).unwrap();
    let m50 = m(ModelFamily::M5, 0.0);
    let p11 = ModelId::p(1, 1.0, 1.0);
    let f_m5 = ScalarField::term(Term::constant(-0.5).x2_pow(2));
    let f_p = ScalarField::log_x1();
    let r = [bridge(m50, &f_m5, 1e-4), bridge(p11, &f_p, 1e-4), bridge(ModelId::q(0.0), &ScalarField::zero(), 1e-4)];
    o.check(
        "bridge M5^0, P+_{1,1}, Q_0",
        r.iter().all(|&v| v < 1e-5),
        format!("residuals {} {} {}", fmt(r[0]), fmt(r[1]), fmt(r[2])),
    );
    let mut ricci: f64 = 0.0;
    for c in [-1.0, 0.0, 0.5, 2.0] {
        let mq = ExtensionMetric::new(surface(ModelId::q(c)));
        for &q in &pts4 {
            ricci = ricci.max(extension_ricci_fd(&mq, q, 1e-4).unwrap().amax());
        }
    }
    o.check("Q_c extensions Ricci-flat", ricci < 1e-5, format!("max |Ric| = {}", fmt(ricci)));
    let (coarse, fine) = (bridge(p11, &f_p, 1e-2), bridge(p11, &f_p, 5e-3));
    let ratio = coarse / fine;
    o.check(
        "halving h",
        (3.5..=4.5).contains(&ratio),
        format!("h=1e-2: {}, h=5e-3: {}, ratio {ratio:.3}", fmt(coarse), fmt(fine)),
    );
    let mut sig_ok = true;
    for id in [m50, p11, ModelId::q(0.0), ModelId::new(ModelFamily::M1), ModelId::new(ModelFamily::N3)] {
        let mm = ExtensionMetric::new(surface(id));
        for &q in &pts4 {
            let g = extension_metric_eval(&mm, q).unwrap();
            sig_ok &= g == g.transpose() && extension_signature(&mm, q).unwrap() == (2, 2);
        }
    }
    o.check("symmetric, signature (2,2)", sig_ok, String::new());
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let mut r = rng(SEED + 9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = random_type_b(&mut r);
        let inv = rho0123_type_b(&s).unwrap();
        for q in sample_points(r.gen(), 5) {
            let sum = inv.rho1.eval(q).unwrap() + inv.rho2.eval(q).unwrap() - inv.rho3.eval(q).unwrap();
            let oracle = ricci_type_b(s.coeffs().to_array(), q.x1);
            worst = worst.max(max_diff(&oracle, &[[sum[(0, 0)], sum[(0, 1)]], [sum[(1, 0)], sum[(1, 1)]]]));
        }
    }
    o.check("rho = rho1 + rho2 - rho3", worst < 1e-10, format!("max error = {}", fmt(worst)));

    let (mut w1, mut w2): (f64, f64) = (0.0, 0.0);
    let h = 1e-4;
    for _ in 0..20 {
        let s = linear_change_type_a(&surface(random_rank1_model(&mut r)), &random_linear(&mut r)).unwrap();
        let omega = recurrence_one_form(&s).unwrap().omega;
        let rho = ricci_closed_form(&s).unwrap();
        let rho_fn = |q: Point2| -> affsurf::Result<Vec<f64>> {
            let m = rho.eval(q)?;
            Ok(vec![m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
        };
        for q in sample_points(r.gen(), 5) {
            let rq = rho_fn(q).unwrap();
            let n1 = fd_covariant_derivative(&s, rho_fn, 2, q, h).unwrap();
            let n2 = fd_covariant_derivative(&s, |z| fd_covariant_derivative(&s, rho_fn, 2, z, h), 3, q, h).unwrap();
            for ij in 0..4 {
                for k in 0..2 {
                    w1 = w1.max((n1[ij * 2 + k] - 2.0 * omega[k] * rq[ij]).abs());
                    for l in 0..2 {
                        w2 = w2.max((n2[(ij * 2 + k) * 2 + l] - 6.0 * omega[k] * omega[l] * rq[ij]).abs());
                    }
                }
            }
        }
    }
    o.check("recurrence identities", w1 < 1e-6 && w2 < 1e-6, format!("first {} second {}", fmt(w1), fmt(w2)));

    let mut gauss = Vec::new();
    let mut ok = true;
    for c in [0.5, 1.0, 2.0] {
        let inv = rho0123_type_b(&surface(ModelId::q(c))).unwrap();
        let mut k_max: f64 = 0.0;
        let mut err: f64 = 0.0;
        for q in [Point2::new(0.8, 0.1), Point2::new(1.5, -0.6)] {
            let k = gauss_curvature_of_metric(|z| inv.rho2.eval(z), q, CURVATURE_STEP).unwrap();
            err = err.max((k + 1.0 / c).abs());
            k_max = k;
        }
        ok &= err < 1e-4;
        gauss.push(format!("c={c}: K={:.6} (target {:.6})", k_max, -1.0 / c));
    }
    o.check("Gauss curvature of Q_c rho2-metric = -1/c", ok, gauss.join(", "));
    if !ok {
        o.detail = "measured K = -1/(2c): the metric 2(x1)^-2(c dx1^2 + dx2^2) is hyperbolic scaled by 2c; -1/c is its scalar curvature".into();
    }
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    let s = AffineSurface::type_a(Coeff6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0)).unwrap();
    let fwd = geodesic_integrate(&s, Point2::new(0.0, 0.0), [0.0, 1.0], 3.0, 0.01).unwrap();
    let err = fwd
        .samples
        .iter()
        .fold(0.0f64, |a, q| a.max((q.point.x2 - (1.0 + q.t).ln()).abs()).max(q.point.x1.abs()));
    let reached = (fwd.t_max_reached - 3.0).abs() < 1e-12 && !fwd.blew_up;
    let res = geodesic_residual(&s, &fwd).unwrap();
    o.check("x2(t) = log(1+t) on [0,3]", err < 1e-6 && reached, format!("max error = {}", fmt(err)));
    o.check("ODE residual of samples", res < 1e-6, format!("residual = {}", fmt(res)));
    let back = geodesic_integrate(&s, Point2::new(0.0, 0.0), [0.0, 1.0], -2.0, 0.01).unwrap();
    o.check(
        "backward blow-up near t = -1",
        back.blew_up && back.t_max_reached > -1.0 && back.t_max_reached < -0.99,
        format!("blew_up {} at t = {:.9}", back.blew_up, back.t_max_reached),
    );
    o
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("ricci oracle equivalence", criterion_1),
        ("catalog ricci values", criterion_2),
        ("alpha table", criterion_3),
        ("killing bases", criterion_4),
        ("lie algebra labels", criterion_5),
        ("soliton dichotomy and families", criterion_6),
        ("killing fields preserve potentials", criterion_7),
        ("extension bridge", criterion_8),
        ("invariant identities", criterion_9),
        ("geodesic witness", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {verdict}  {name} ({:.1}s)", i + 1, start.elapsed().as_secs_f64());
        for (sub, ok, detail) in &out.subs {
            println!("    [{}] {sub}: {detail}", if *ok { "ok" } else { "FAIL" });
        }
        if !out.detail.is_empty() {
            println!("    note: {}", out.detail);
        }
        if !out.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
