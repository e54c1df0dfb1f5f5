//! Structured operators on separable Hilbert space with exactly computable
//! pointwise nullity, deficiency and range closedness.
//!
//! An [`OperatorExpr`] is a finite orthogonal direct sum of atoms. Each atom is
//! an affine function `a + b·K` of the unilateral shift `S`, its adjoint `S*`,
//! or the bilateral shift `U`, or a diagonal operator with finitely many
//! distinct eigenvalues, repeated `mult` times.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{abs2, extnat_add, extnat_scale, ExtInt, ExtNat, GQ};
use crate::region::{Locator, Predicate};

/// `a·I + b·K` for a shift kind `K`; `b` is never zero.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Affine {
    pub a: GQ,
    pub b: GQ,
}

impl Affine {
    pub fn new(a: GQ, b: GQ) -> Result<Affine> {
        if b.is_zero() {
            return Err(Error::InvalidOperator("shift coefficient b must be nonzero".into()));
        }
        Ok(Affine { a, b })
    }

    pub fn unit() -> Affine {
        Affine { a: GQ::zero(), b: GQ::one() }
    }

    fn conj(&self) -> Affine {
        Affine { a: self.a.conj(), b: self.b.conj() }
    }

    pub fn is_unit(&self) -> bool {
        self.a.is_zero() && self.b == GQ::one()
    }

    /// `μ = (λ - a) / b`, the point where the unit model is evaluated.
    pub fn reduce(&self, lambda: &GQ) -> GQ {
        let inv = self.b.inv().expect("b != 0");
        &(lambda - &self.a) * &inv
    }

    pub fn circle(&self) -> Predicate {
        Predicate::circle(self.a.clone(), abs2(&self.b))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Eigen {
    pub value: GQ,
    pub mult: ExtNat,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum AtomKind {
    UShift(Affine),
    UShiftAdj(Affine),
    BShift(Affine),
    Diag(Vec<Eigen>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Atom {
    pub kind: AtomKind,
    pub mult: ExtNat,
}

impl Atom {
    pub fn new(kind: AtomKind, mult: ExtNat) -> Result<Atom> {
        if mult.is_zero() {
            return Err(Error::InvalidOperator("atom multiplicity must be at least 1".into()));
        }
        match &kind {
            AtomKind::UShift(af) | AtomKind::UShiftAdj(af) | AtomKind::BShift(af) => {
                if af.b.is_zero() {
                    return Err(Error::InvalidOperator("shift coefficient b must be nonzero".into()));
                }
            }
            AtomKind::Diag(values) => {
                if values.is_empty() {
                    return Err(Error::InvalidOperator("diag needs at least one eigenvalue".into()));
                }
                for (i, e) in values.iter().enumerate() {
                    if e.mult.is_zero() {
                        return Err(Error::InvalidOperator(format!(
                            "eigenvalue {} has zero multiplicity",
                            e.value
                        )));
                    }
                    if values[..i].iter().any(|f| f.value == e.value) {
                        return Err(Error::InvalidOperator(format!(
                            "duplicate diag value {}",
                            e.value
                        )));
                    }
                }
            }
        }
        Ok(Atom { kind, mult })
    }

    pub fn ushift() -> Atom {
        Atom { kind: AtomKind::UShift(Affine::unit()), mult: ExtNat::Fin(1) }
    }

    pub fn ushift_adj() -> Atom {
        Atom { kind: AtomKind::UShiftAdj(Affine::unit()), mult: ExtNat::Fin(1) }
    }

    pub fn bshift() -> Atom {
        Atom { kind: AtomKind::BShift(Affine::unit()), mult: ExtNat::Fin(1) }
    }

    pub fn diag(values: &[(GQ, ExtNat)]) -> Result<Atom> {
        let values = values
            .iter()
            .map(|(v, m)| Eigen { value: v.clone(), mult: *m })
            .collect();
        Atom::new(AtomKind::Diag(values), ExtNat::Fin(1))
    }

    pub fn with_mult(mut self, mult: ExtNat) -> Atom {
        assert!(!mult.is_zero(), "atom multiplicity must be at least 1");
        self.mult = mult;
        self
    }

    pub fn adjoint(&self) -> Atom {
        let kind = match &self.kind {
            AtomKind::UShift(af) => AtomKind::UShiftAdj(af.conj()),
            AtomKind::UShiftAdj(af) => AtomKind::UShift(af.conj()),
            // (a + bU)* = ā + b̄U⁻¹, unitarily equivalent to ā + b̄U via e_k ↦ e_{-k}
            AtomKind::BShift(af) => AtomKind::BShift(af.conj()),
            AtomKind::Diag(values) => AtomKind::Diag(
                values
                    .iter()
                    .map(|e| Eigen { value: e.value.conj(), mult: e.mult })
                    .collect(),
            ),
        };
        Atom { kind, mult: self.mult }
    }

    pub fn affine(&self) -> Option<&Affine> {
        match &self.kind {
            AtomKind::UShift(af) | AtomKind::UShiftAdj(af) | AtomKind::BShift(af) => Some(af),
            AtomKind::Diag(_) => None,
        }
    }

    /// Dimension of a single copy.
    pub fn copy_dim(&self) -> ExtNat {
        match &self.kind {
            AtomKind::Diag(values) => values.iter().fold(ExtNat::ZERO, |acc, e| acc + e.mult),
            _ => ExtNat::Inf,
        }
    }

    pub fn is_infinite_dimensional(&self) -> bool {
        extnat_scale(self.mult, self.copy_dim()) == ExtNat::Inf
    }
}

/// Orthogonal direct sum of atoms, optionally under a pending adjoint.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OperatorExpr {
    atoms: Vec<Atom>,
    adjoint_pending: bool,
}

impl OperatorExpr {
    pub fn new(atoms: Vec<Atom>) -> Result<OperatorExpr> {
        if atoms.is_empty() {
            return Err(Error::InvalidOperator("empty direct sum".into()));
        }
        if !atoms.iter().any(Atom::is_infinite_dimensional) {
            return Err(Error::InvalidOperator(
                "expression acts on a finite-dimensional space".into(),
            ));
        }
        Ok(OperatorExpr { atoms, adjoint_pending: false })
    }

    pub fn atom(atom: Atom) -> Result<OperatorExpr> {
        OperatorExpr::new(vec![atom])
    }

    /// Raw atoms; only meaningful after [`normalize`].
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_normalized(&self) -> bool {
        !self.adjoint_pending
    }

    pub fn direct_sum(&self, other: &OperatorExpr) -> OperatorExpr {
        let mut atoms = normalize(self).atoms;
        atoms.extend(normalize(other).atoms);
        OperatorExpr { atoms, adjoint_pending: false }
    }

    /// Marks the expression as adjointed without touching the atoms.
    pub fn lazy_adjoint(mut self) -> OperatorExpr {
        self.adjoint_pending = !self.adjoint_pending;
        self
    }
}

pub fn normalize(expr: &OperatorExpr) -> OperatorExpr {
    if !expr.adjoint_pending {
        return expr.clone();
    }
    OperatorExpr {
        atoms: expr.atoms.iter().map(Atom::adjoint).collect(),
        adjoint_pending: false,
    }
}

pub fn adjoint(expr: &OperatorExpr) -> OperatorExpr {
    normalize(&expr.clone().lazy_adjoint())
}

/// Exact data of `T - λ`: nullity, `dim R(T-λ)^⊥`, and closedness of the range.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct PointData {
    pub alpha: ExtNat,
    pub beta_bar: ExtNat,
    pub closed: bool,
}

impl PointData {
    pub const INVERTIBLE: PointData =
        PointData { alpha: ExtNat::ZERO, beta_bar: ExtNat::ZERO, closed: true };

    pub fn new(alpha: ExtNat, beta_bar: ExtNat, closed: bool) -> PointData {
        PointData { alpha, beta_bar, closed }
    }

    /// Algebraic codimension of the range: infinite whenever the range is not closed.
    pub fn beta_alg(&self) -> ExtNat {
        if self.closed {
            self.beta_bar
        } else {
            ExtNat::Inf
        }
    }

    pub fn direct_sum(&self, other: &PointData) -> PointData {
        PointData {
            alpha: extnat_add(self.alpha, other.alpha),
            beta_bar: extnat_add(self.beta_bar, other.beta_bar),
            closed: self.closed && other.closed,
        }
    }

    pub fn scale(&self, mult: ExtNat) -> PointData {
        PointData {
            alpha: extnat_scale(mult, self.alpha),
            beta_bar: extnat_scale(mult, self.beta_bar),
            closed: self.closed,
        }
    }

    /// Data of the adjoint at the conjugate point.
    pub fn dual(&self) -> PointData {
        PointData { alpha: self.beta_bar, beta_bar: self.alpha, closed: self.closed }
    }

    pub fn index(&self) -> ExtInt {
        self.alpha.index_sub(self.beta_alg())
    }
}

const ONE: ExtNat = ExtNat::Fin(1);

/// Point data of `atom - λ` for one copy of the atom.
pub fn atom_point_data<L: Locator + ?Sized>(atom: &Atom, at: &L) -> PointData {
    match &atom.kind {
        AtomKind::Diag(values) => values
            .iter()
            .find(|e| at.at_point(&e.value))
            .map(|e| PointData::new(e.mult, e.mult, true))
            .unwrap_or(PointData::INVERTIBLE),
        AtomKind::UShift(af) | AtomKind::UShiftAdj(af) | AtomKind::BShift(af) => {
            let side = at.circle_sign(&af.a, &abs2(&af.b));
            let unit = match side {
                Ordering::Equal => PointData::new(ExtNat::ZERO, ExtNat::ZERO, false),
                Ordering::Greater => PointData::INVERTIBLE,
                Ordering::Less => PointData::new(ExtNat::ZERO, ONE, true),
            };
            match (&atom.kind, side) {
                (AtomKind::BShift(_), Ordering::Less) => PointData::INVERTIBLE,
                (AtomKind::UShiftAdj(_), _) => unit.dual(),
                _ => unit,
            }
        }
    }
}

pub fn point_data<L: Locator + ?Sized>(expr: &OperatorExpr, at: &L) -> PointData {
    let expr = normalize(expr);
    expr.atoms
        .iter()
        .map(|atom| atom_point_data(atom, at).scale(atom.mult))
        .fold(PointData::new(ExtNat::ZERO, ExtNat::ZERO, true), |acc, p| acc.direct_sum(&p))
}

pub fn index<L: Locator + ?Sized>(expr: &OperatorExpr, at: &L) -> ExtInt {
    point_data(expr, at).index()
}

/// Circles and points off which the point data is locally constant.
pub fn boundary_predicates(expr: &OperatorExpr) -> Vec<Predicate> {
    let expr = normalize(expr);
    let mut out: Vec<Predicate> = Vec::new();
    for atom in &expr.atoms {
        let preds: Vec<Predicate> = match &atom.kind {
            AtomKind::Diag(values) => {
                values.iter().map(|e| Predicate::Point(e.value.clone())).collect()
            }
            _ => vec![atom.affine().expect("shift").circle()],
        };
        for p in preds {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Coordinate of a basis vector inside one copy of an atom.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisVector {
    /// Standard basis vector `e_n`.
    Basis(u64),
    /// Normalized `(1, μ, μ², …)` with `|μ| < 1`.
    Geometric(GQ),
    /// `k`-th basis vector of the eigenspace of the `value`-th diagonal entry.
    Eigen { value: usize, k: u64 },
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BasisAddress {
    pub atom: usize,
    pub copy: u64,
    pub vector: BasisVector,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Side {
    Kernel,
    Cokernel,
}

/// Enumerates `(copy, k)` pairs of one atom along anti-diagonals.
#[derive(Clone, Debug)]
struct AtomStream {
    atom: usize,
    mult: ExtNat,
    // per-copy dimension and the vector at position k of a copy
    vectors: Vec<BasisVector>,
    tail: Option<(usize, u64)>, // eigenspace with infinite multiplicity: (value index, offset)
    diag: u64,
    copy: u64,
    exhausted: bool,
}

impl AtomStream {
    fn copy_dim(&self) -> ExtNat {
        if self.tail.is_some() {
            ExtNat::Inf
        } else {
            ExtNat::Fin(self.vectors.len() as u64)
        }
    }

    fn vector(&self, k: u64) -> BasisVector {
        match (k as usize).cmp(&self.vectors.len()) {
            Ordering::Less => self.vectors[k as usize].clone(),
            _ => {
                let (value, offset) = self.tail.expect("infinite eigenspace");
                BasisVector::Eigen { value, k: offset + k - self.vectors.len() as u64 }
            }
        }
    }

    fn next(&mut self) -> Option<BasisAddress> {
        let dim = self.copy_dim();
        if self.exhausted || dim.is_zero() {
            self.exhausted = true;
            return None;
        }
        let within = |n: u64, bound: ExtNat| match bound {
            ExtNat::Fin(b) => n < b,
            ExtNat::Inf => true,
        };
        loop {
            if let (ExtNat::Fin(m), ExtNat::Fin(d)) = (self.mult, dim) {
                if self.diag > (m - 1) + (d - 1) {
                    self.exhausted = true;
                    return None;
                }
            }
            let copy = self.copy;
            let k = self.diag - copy;
            if self.copy == self.diag {
                self.diag += 1;
                self.copy = 0;
            } else {
                self.copy += 1;
            }
            if within(copy, self.mult) && within(k, dim) {
                return Some(BasisAddress { atom: self.atom, copy, vector: self.vector(k) });
            }
        }
    }
}

/// Orthonormal basis addresses of a kernel or cokernel; round-robin over atoms,
/// anti-diagonal over `(copy, coordinate)` inside an atom.
#[derive(Clone, Debug)]
pub struct AddressStream {
    atoms: Vec<AtomStream>,
    cursor: usize,
    dim: ExtNat,
}

impl AddressStream {
    /// Number of addresses the stream yields (`Inf` = unbounded).
    pub fn dim(&self) -> ExtNat {
        self.dim
    }
}

impl Iterator for AddressStream {
    type Item = BasisAddress;

    fn next(&mut self) -> Option<BasisAddress> {
        let n = self.atoms.len();
        for step in 0..n {
            let i = (self.cursor + step) % n;
            if let Some(addr) = self.atoms[i].next() {
                self.cursor = (i + 1) % n;
                return Some(addr);
            }
        }
        None
    }
}

fn basis_stream(expr: &OperatorExpr, lambda: &GQ, side: Side) -> Result<AddressStream> {
    let expr = normalize(expr);
    let mut atoms = Vec::new();
    let mut dim = ExtNat::ZERO;
    for (idx, atom) in expr.atoms.iter().enumerate() {
        let pd = atom_point_data(atom, lambda);
        if !pd.closed {
            return Err(Error::NonClosedRange);
        }
        let mut vectors = Vec::new();
        let mut tail = None;
        match &atom.kind {
            AtomKind::UShift(af) | AtomKind::UShiftAdj(af) => {
                let inside = lambda.circle_sign(&af.a, &abs2(&af.b)) == Ordering::Less;
                let is_adj = matches!(atom.kind, AtomKind::UShiftAdj(_));
                // N(S* - μ) is spanned by (1, μ, μ², …); R(S - μ)^⊥ = N(S* - μ̄)
                let wanted = match side {
                    Side::Kernel => is_adj,
                    Side::Cokernel => !is_adj,
                };
                if inside && wanted {
                    let mu = af.reduce(lambda);
                    let mu = if is_adj { mu } else { mu.conj() };
                    vectors.push(if mu.is_zero() {
                        BasisVector::Basis(0)
                    } else {
                        BasisVector::Geometric(mu)
                    });
                }
            }
            AtomKind::BShift(_) => {}
            AtomKind::Diag(values) => {
                // normal operator: kernel and cokernel coincide with the eigenspace
                if let Some((j, e)) = values.iter().enumerate().find(|(_, e)| lambda.at_point(&e.value)) {
                    match e.mult {
                        ExtNat::Fin(m) => {
                            vectors.extend((0..m).map(|k| BasisVector::Eigen { value: j, k }))
                        }
                        ExtNat::Inf => tail = Some((j, 0)),
                    }
                }
            }
        }
        let stream = AtomStream {
            atom: idx,
            mult: atom.mult,
            vectors,
            tail,
            diag: 0,
            copy: 0,
            exhausted: false,
        };
        dim = dim + extnat_scale(atom.mult, stream.copy_dim());
        atoms.push(stream);
    }
    Ok(AddressStream { atoms, cursor: 0, dim })
}

/// Basis of `N(expr - λ)`.
pub fn kernel_basis(expr: &OperatorExpr, lambda: &GQ) -> Result<AddressStream> {
    basis_stream(expr, lambda, Side::Kernel)
}

/// Basis of `R(expr - λ)^⊥`.
pub fn cokernel_basis(expr: &OperatorExpr, lambda: &GQ) -> Result<AddressStream> {
    basis_stream(expr, lambda, Side::Cokernel)
}

// ---------------------------------------------------------------------------
// text and JSON forms

fn fmt_mult(f: &mut fmt::Formatter<'_>, mult: ExtNat) -> fmt::Result {
    if mult != ONE {
        write!(f, "^{mult}")?;
    }
    Ok(())
}

fn fmt_affine(f: &mut fmt::Formatter<'_>, name: &str, af: &Affine) -> fmt::Result {
    if af.is_unit() {
        f.write_str(name)
    } else {
        write!(f, "{name}({}, {})", af.a, af.b)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AtomKind::UShift(af) => {
                fmt_affine(f, "ushift", af)?;
                fmt_mult(f, self.mult)
            }
            AtomKind::UShiftAdj(af) => {
                f.write_str("adj(")?;
                fmt_affine(f, "ushift", &af.conj())?;
                fmt_mult(f, self.mult)?;
                f.write_str(")")
            }
            AtomKind::BShift(af) => {
                fmt_affine(f, "bshift", af)?;
                fmt_mult(f, self.mult)
            }
            AtomKind::Diag(values) => {
                f.write_str("diag{")?;
                for (i, e) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}:{}", e.value, e.mult)?;
                }
                f.write_str("}")?;
                fmt_mult(f, self.mult)
            }
        }
    }
}

/// Prints in the expression language; the output parses back to `normalize(self)`.
impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let expr = normalize(self);
        for (i, atom) in expr.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" (+) ")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    a: Option<GQ>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b: Option<GQ>,
    mult: ExtNat,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    values: Option<Vec<(GQ, ExtNat)>>,
}

#[derive(Serialize, Deserialize)]
struct ExprJson {
    atoms: Vec<AtomJson>,
}

impl Serialize for OperatorExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let expr = normalize(self);
        let atoms = expr
            .atoms
            .iter()
            .map(|atom| {
                let (kind, af) = match &atom.kind {
                    AtomKind::UShift(af) => ("ushift", Some(af)),
                    AtomKind::UShiftAdj(af) => ("ushift_adj", Some(af)),
                    AtomKind::BShift(af) => ("bshift", Some(af)),
                    AtomKind::Diag(_) => ("diag", None),
                };
                let values = match &atom.kind {
                    AtomKind::Diag(vs) => Some(vs.iter().map(|e| (e.value.clone(), e.mult)).collect()),
                    _ => None,
                };
                AtomJson {
                    kind: kind.to_string(),
                    a: af.map(|af| af.a.clone()),
                    b: af.map(|af| af.b.clone()),
                    mult: atom.mult,
                    values,
                }
            })
            .collect();
        ExprJson { atoms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<OperatorExpr, D::Error> {
        use serde::de::Error as _;
        let raw = ExprJson::deserialize(d)?;
        let mut atoms = Vec::new();
        for aj in raw.atoms {
            let affine = || -> std::result::Result<Affine, D::Error> {
                let a = aj.a.clone().unwrap_or_default();
                let b = aj.b.clone().unwrap_or_else(GQ::one);
                Affine::new(a, b).map_err(D::Error::custom)
            };
            let kind = match aj.kind.as_str() {
                "ushift" => AtomKind::UShift(affine()?),
                "ushift_adj" => AtomKind::UShiftAdj(affine()?),
                "bshift" => AtomKind::BShift(affine()?),
                "diag" => AtomKind::Diag(
                    aj.values
                        .clone()
                        .ok_or_else(|| D::Error::custom("diag atom needs values"))?
                        .into_iter()
                        .map(|(value, mult)| Eigen { value, mult })
                        .collect(),
                ),
                other => return Err(D::Error::custom(format!("unknown atom kind `{other}`"))),
            };
            atoms.push(Atom::new(kind, aj.mult).map_err(D::Error::custom)?);
        }
        OperatorExpr::new(atoms).map_err(D::Error::custom)
    }
}
