//! Pointwise invertibility classes and the S± classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ExtNat;
use crate::operator::{boundary_predicates, point_data, OperatorExpr, PointData};
use crate::region::{CellDecomp, Locator};

/// The spectra that can be asked about. `classify` answers for the
/// complementary resolvent set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Spec,
    Left,
    Right,
    Usf,
    Lsf,
    Essential,
    Point,
    Defect,
    Fli,
    Fri,
}

impl SpectrumKind {
    pub const ALL: [SpectrumKind; 10] = [
        SpectrumKind::Spec,
        SpectrumKind::Left,
        SpectrumKind::Right,
        SpectrumKind::Usf,
        SpectrumKind::Lsf,
        SpectrumKind::Essential,
        SpectrumKind::Point,
        SpectrumKind::Defect,
        SpectrumKind::Fli,
        SpectrumKind::Fri,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Spec => "spec",
            SpectrumKind::Left => "left",
            SpectrumKind::Right => "right",
            SpectrumKind::Usf => "usf",
            SpectrumKind::Lsf => "lsf",
            SpectrumKind::Essential => "essential",
            SpectrumKind::Point => "point",
            SpectrumKind::Defect => "defect",
            SpectrumKind::Fli => "fli",
            SpectrumKind::Fri => "fri",
        }
    }

    /// The class of the adjoint corresponding to this one.
    pub fn dual(self) -> SpectrumKind {
        match self {
            SpectrumKind::Left => SpectrumKind::Right,
            SpectrumKind::Right => SpectrumKind::Left,
            SpectrumKind::Usf => SpectrumKind::Lsf,
            SpectrumKind::Lsf => SpectrumKind::Usf,
            SpectrumKind::Point => SpectrumKind::Defect,
            SpectrumKind::Defect => SpectrumKind::Point,
            SpectrumKind::Fli => SpectrumKind::Fri,
            SpectrumKind::Fri => SpectrumKind::Fli,
            k => k,
        }
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpectrumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<SpectrumKind> {
        SpectrumKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown spectrum kind `{s}`")))
    }
}

/// Which codimension counts as β where ranges are not closed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaConvention {
    /// Algebraic codimension: infinite whenever the range is not closed.
    #[default]
    Algebraic,
    /// Dimension of the orthogonal complement of the range.
    Closure,
}

impl BetaConvention {
    pub fn beta(self, p: &PointData) -> ExtNat {
        match self {
            BetaConvention::Algebraic => p.beta_alg(),
            BetaConvention::Closure => p.beta_bar,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SClass {
    /// `α ≥ β` wherever one side is finite.
    Plus,
    /// `α ≤ β` wherever one side is finite.
    Minus,
}

/// Class a completion `M_C` is asked to land in.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Fli,
    Fri,
    Invertible,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Fli => "fli",
            Target::Fri => "fri",
            Target::Invertible => "inv",
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Target> {
        match s.to_ascii_lowercase().as_str() {
            "fli" => Ok(Target::Fli),
            "fri" => Ok(Target::Fri),
            "inv" | "invertible" => Ok(Target::Invertible),
            _ => Err(Error::Parse(format!("unknown target `{s}`"))),
        }
    }
}

/// Resolvent membership from exact point data (`true` = the good class).
pub fn classify_data(p: &PointData, kind: SpectrumKind) -> bool {
    let usf = p.alpha.is_finite() && p.closed;
    let lsf = p.beta_alg().is_finite();
    match kind {
        SpectrumKind::Spec => p.alpha.is_zero() && p.beta_alg().is_zero() && p.closed,
        SpectrumKind::Left => p.alpha.is_zero() && p.closed,
        SpectrumKind::Right => p.beta_alg().is_zero(),
        SpectrumKind::Usf => usf,
        SpectrumKind::Lsf => lsf,
        SpectrumKind::Essential => usf && lsf,
        SpectrumKind::Point => p.alpha.is_zero(),
        SpectrumKind::Defect => p.beta_alg().is_zero(),
        SpectrumKind::Fli => p.alpha.is_zero() && lsf,
        SpectrumKind::Fri => p.beta_alg().is_zero() && p.alpha.is_finite(),
    }
}

pub fn classify<L: Locator + ?Sized>(expr: &OperatorExpr, at: &L, kind: SpectrumKind) -> bool {
    classify_data(&point_data(expr, at), kind)
}

/// Whether `α(T-λ)` and `β(T-λ)` compare the right way at every λ where one
/// of them is finite. Point data is constant on arrangement cells, so
/// checking one cell at a time decides the statement.
pub fn s_class_membership(expr: &OperatorExpr, class: SClass, conv: BetaConvention) -> Result<bool> {
    let decomp = CellDecomp::new(&boundary_predicates(expr))?;
    Ok((0..decomp.cells().len()).all(|i| {
        let p = point_data(expr, &decomp.locator(i));
        s_class_holds(&p, class, conv)
    }))
}

pub fn s_class_holds(p: &PointData, class: SClass, conv: BetaConvention) -> bool {
    let alpha = p.alpha;
    let beta = conv.beta(p);
    if !alpha.is_finite() && !beta.is_finite() {
        return true;
    }
    match class {
        SClass::Plus => alpha >= beta,
        SClass::Minus => alpha <= beta,
    }
}

/// Completability conditions for `M_C` at one point, from the data of
/// `A - λ` and `B - λ` (algebraic β throughout).
pub fn completion_condition(a: &PointData, b: &PointData, target: Target) -> [bool; 3] {
    let (alpha_b, beta_a) = (b.alpha, a.beta_alg());
    match target {
        Target::Fli => [
            classify_data(a, SpectrumKind::Left),
            classify_data(b, SpectrumKind::Lsf),
            (alpha_b <= beta_a && beta_a.is_finite()) || (alpha_b == ExtNat::Inf && beta_a == ExtNat::Inf),
        ],
        Target::Fri => [
            classify_data(b, SpectrumKind::Right),
            classify_data(a, SpectrumKind::Usf),
            (beta_a <= alpha_b && alpha_b.is_finite()) || (alpha_b == ExtNat::Inf && beta_a == ExtNat::Inf),
        ],
        Target::Invertible => [
            classify_data(a, SpectrumKind::Left),
            classify_data(b, SpectrumKind::Right),
            alpha_b == beta_a,
        ],
    }
}

pub fn resolvent_condition<L: Locator + ?Sized>(
    a: &OperatorExpr,
    b: &OperatorExpr,
    at: &L,
    target: Target,
) -> bool {
    completion_condition(&point_data(a, at), &point_data(b, at), target)
        .iter()
        .all(|&x| x)
}
