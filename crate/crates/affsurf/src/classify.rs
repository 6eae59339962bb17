//! Places a Type A or Type B surface in the moduli tables.

use std::fmt;

use nalgebra::Matrix2;

use crate::connection::{ricci_closed_form, AffineSurface, Cov2Field, SurfaceKind};
use crate::error::{GeometryError, Result};
use crate::invariants::{alpha_epsilon_type_a_tol, alpha_from_fields, ricci_rank, rho0123_type_b, AlphaEpsilon, TypeBInvariants};
use crate::killing::{killing_algebra, killing_basis_tol, AlgebraLabel};
use crate::models::{normalize_type_a_rank1_tol, ModelFamily, ModelId, TypeBMap};
use crate::normal::{type_b_form, TypeBForm};

/// Rows of the rank-1 Type A table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableRow {
    AlphaNegative,
    AlphaZeroMinus,
    AlphaZeroPlus,
    AlphaBetween,
    Alpha16,
    AlphaAbove16,
}

impl TableRow {
    pub fn of(ae: &AlphaEpsilon, tol: f64) -> TableRow {
        let a = ae.alpha;
        if (a - 16.0).abs() <= tol * 16.0 {
            TableRow::Alpha16
        } else if a.abs() <= tol {
            if ae.epsilon < 0 {
                TableRow::AlphaZeroMinus
            } else {
                TableRow::AlphaZeroPlus
            }
        } else if a < 0.0 {
            TableRow::AlphaNegative
        } else if a < 16.0 {
            TableRow::AlphaBetween
        } else {
            TableRow::AlphaAbove16
        }
    }

    pub fn algebra(self) -> AlgebraLabel {
        match self {
            TableRow::AlphaZeroPlus | TableRow::AlphaBetween => AlgebraLabel::A412,
            TableRow::Alpha16 => AlgebraLabel::A49_0,
            _ => AlgebraLabel::A2xA2,
        }
    }

    pub fn is_type_b(self) -> bool {
        !matches!(self, TableRow::AlphaZeroPlus | TableRow::AlphaBetween)
    }
}

/// The branches of the affine gradient Ricci soliton classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolitonClass {
    TypeAAlpha16,
    TypeAA2xA2,
    TypeAA412,
    N2Half,
    Q,
    P0c,
    PMinus2Zero,
    PMinusHalf,
    PLog,
    None,
}

impl SolitonClass {
    pub fn key(self) -> &'static str {
        match self {
            SolitonClass::TypeAAlpha16 => "typeA_alpha16",
            SolitonClass::TypeAA2xA2 => "typeA_A2xA2",
            SolitonClass::TypeAA412 => "typeA_A412",
            SolitonClass::N2Half => "N2_half",
            SolitonClass::Q => "Q",
            SolitonClass::P0c => "P_0_c",
            SolitonClass::PMinus2Zero => "P_-2_0",
            SolitonClass::PMinusHalf => "P_-1/2_c",
            SolitonClass::PLog => "P_log",
            SolitonClass::None => "none",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SolitonClass::TypeAAlpha16 => "alpha = 16 (M4^0 class) / f(x2) from the rank-1 ODE",
            SolitonClass::TypeAA2xA2 => "A2+A2 (M3^c class) / f(x2) from the rank-1 ODE",
            SolitonClass::TypeAA412 => "A4,12 (M5^c class) / f(x2) from the rank-1 ODE",
            SolitonClass::N2Half => "N2^(1/2): alternating Ricci / constants only",
            SolitonClass::Q => "Q_c: alternating Ricci / constants only",
            SolitonClass::P0c => "alternating Ricci / constants only",
            SolitonClass::PMinus2Zero => "P_{-2,0}: -2 log(x1) + c1 x2 + c0",
            SolitonClass::PMinusHalf => "P^-_{-1/2,c}, c^2 = 3/8: -1/2 log(x1) + c1 (x2 - 2c x1) + c0",
            SolitonClass::PLog => "P_{a,c}: a log(x1) + c0",
            SolitonClass::None => "none",
        }
    }
}

impl fmt::Display for SolitonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub kind: SurfaceKind,
    pub flat: bool,
    pub ricci: Cov2Field,
    pub rank: usize,
    pub alpha_epsilon: Option<AlphaEpsilon>,
    pub table_row: Option<TableRow>,
    pub killing_dim: usize,
    pub lie_algebra: AlgebraLabel,
    pub is_type_a: bool,
    pub is_type_b: bool,
    pub is_type_c: bool,
    pub soliton_class: SolitonClass,
    pub matched_model: Option<ModelId>,
    /// `x = A·u` taking the surface to its normal form.
    pub normalizing_transform: Matrix2<f64>,
    pub type_b_invariants: Option<TypeBInvariants>,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    fn base(s: &AffineSurface, ricci: Cov2Field, rank: usize) -> Self {
        ClassificationReport {
            kind: s.kind(),
            flat: false,
            ricci,
            rank,
            alpha_epsilon: None,
            table_row: None,
            killing_dim: 2,
            lie_algebra: AlgebraLabel::Unknown,
            is_type_a: s.kind() == SurfaceKind::TypeA,
            is_type_b: s.kind() == SurfaceKind::TypeB,
            is_type_c: false,
            soliton_class: SolitonClass::None,
            matched_model: None,
            normalizing_transform: Matrix2::identity(),
            type_b_invariants: None,
            notes: Vec::new(),
        }
    }
}

/// Classification of a non-flat surface.
pub fn classify(s: &AffineSurface, tol: f64) -> Result<ClassificationReport> {
    classify_with(s, tol, false)
}

/// As [`classify`]; with `allow_flat` a flat surface yields a report with `killing_dim = 6`.
pub fn classify_with(s: &AffineSurface, tol: f64, allow_flat: bool) -> Result<ClassificationReport> {
    if s.kind() == SurfaceKind::Generic {
        return Err(GeometryError::UnsupportedKind("generic"));
    }
    let ricci = ricci_closed_form(s)?;
    let flat = ricci.max_abs() <= tol * s.coeffs().max_abs().max(1.0);
    let rank = if flat { 0 } else { ricci_rank(&ricci, tol) };
    let mut r = ClassificationReport::base(s, ricci, rank);
    if s.kind() == SurfaceKind::TypeB {
        r.type_b_invariants = Some(rho0123_type_b(s)?);
    }
    if flat {
        if !allow_flat {
            return Err(GeometryError::FlatSurface);
        }
        r.flat = true;
        r.killing_dim = 6;
        r.notes.push("flat: no further classification".into());
        return Ok(r);
    }
    match s.kind() {
        SurfaceKind::TypeA => classify_type_a(s, tol, &mut r)?,
        _ => classify_type_b(s, tol, &mut r)?,
    }
    let basis = killing_basis_tol(s, tol)?;
    let (_, label) = killing_algebra(&basis)?;
    if basis.dim() != r.killing_dim {
        return Err(GeometryError::Verification {
            what: format!("Killing basis of dimension {} for expected dimension {}", basis.dim(), r.killing_dim),
            residual: f64::NAN,
        });
    }
    r.lie_algebra = label;
    if let Some(row) = r.table_row {
        if row.algebra() != label {
            r.notes.push(format!("algebra {label} differs from the table entry {}", row.algebra()));
        }
    }
    Ok(r)
}

fn classify_type_a(s: &AffineSurface, tol: f64, r: &mut ClassificationReport) -> Result<()> {
    if r.rank == 2 {
        r.killing_dim = 2;
        r.is_type_b = false;
        r.notes.push("rank-2: moduli out of scope".into());
        return Ok(());
    }
    let ae = alpha_epsilon_type_a_tol(s, tol)?;
    let row = TableRow::of(&ae, tol);
    let (a, _) = normalize_type_a_rank1_tol(s, tol)?;
    r.alpha_epsilon = Some(ae);
    r.table_row = Some(row);
    r.killing_dim = 4;
    r.is_type_b = row.is_type_b();
    r.normalizing_transform = a;
    r.soliton_class = type_a_soliton_class(row);
    Ok(())
}

fn type_a_soliton_class(row: TableRow) -> SolitonClass {
    match row.algebra() {
        AlgebraLabel::A49_0 => SolitonClass::TypeAAlpha16,
        AlgebraLabel::A412 => SolitonClass::TypeAA412,
        _ => SolitonClass::TypeAA2xA2,
    }
}

fn classify_type_b(s: &AffineSurface, tol: f64, r: &mut ClassificationReport) -> Result<()> {
    let form = type_b_form(s, tol)?;
    r.killing_dim = form.killing_dim();
    match form {
        TypeBForm::Flat => unreachable!("flat surfaces are handled by the caller"),
        TypeBForm::Intersection => {
            let ae = alpha_from_fields(&r.ricci, &crate::connection::nabla_ricci_closed_form(s)?);
            let row = TableRow::of(&ae, tol);
            r.alpha_epsilon = Some(ae);
            r.table_row = Some(row);
            r.is_type_a = true;
            r.soliton_class = type_a_soliton_class(row);
        }
        TypeBForm::Model(m) => {
            r.matched_model = Some(m.model);
            r.normalizing_transform = m.map.matrix();
            r.is_type_c = matches!(m.model.family, ModelFamily::N3 | ModelFamily::N4);
            r.soliton_class = type_b_soliton_class(&m.model, tol);
            if r.killing_dim == 2 {
                r.notes.push("killing dim 2: affine equivalence not decided beyond rho0..rho3".into());
            }
        }
        TypeBForm::Generic => {
            r.notes.push("killing dim 2: affine equivalence not decided beyond rho0..rho3".into());
        }
    }
    Ok(())
}

fn type_b_soliton_class(m: &ModelId, tol: f64) -> SolitonClass {
    let near = |x: f64, y: f64| (x - y).abs() <= tol.sqrt() * 1e-2;
    match m.family {
        ModelFamily::N2 if near(m.c, 0.5) => SolitonClass::N2Half,
        ModelFamily::Q => SolitonClass::Q,
        ModelFamily::Pplus | ModelFamily::Pminus => {
            if m.a.abs() <= tol {
                SolitonClass::P0c
            } else if near(m.a, -2.0) && m.c.abs() <= tol {
                SolitonClass::PMinus2Zero
            } else if m.family == ModelFamily::Pminus && near(m.a, -0.5) && near(m.c * m.c, 3.0 / 8.0) {
                SolitonClass::PMinusHalf
            } else {
                SolitonClass::PLog
            }
        }
        _ => SolitonClass::None,
    }
}

/// The `T_{b,c}` recorded in a Type B report, if any.
pub fn type_b_map(r: &ClassificationReport) -> Option<TypeBMap> {
    r.matched_model.map(|_| {
        let a = r.normalizing_transform;
        TypeBMap { b: a[(1, 0)], c: a[(1, 1)] }
    })
}
