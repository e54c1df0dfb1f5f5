//! Exact plane regions built from open disks, circles and points.
//!
//! A [`RegionExpr`] is a boolean formula over the tests `|λ-c|² < r²`,
//! `|λ-c|² = r²` and `λ = p`, with rational data. Membership at Gaussian
//! rational points is decided by rational comparisons. Topological questions
//! (connected components, holes, polynomially convex hull) go through the
//! exact circle arrangement in [`arrangement`].

pub mod arrangement;
pub mod surd;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{abs2, Rat, GQ};

pub use arrangement::{Cell, CellDecomp, CellKind};
use surd::SPoint;

/// Largest number of distinct predicates an arrangement accepts.
pub const MAX_PREDICATES: usize = 32;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Circle {
    pub center: GQ,
    pub r2: Rat,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Circle(Circle),
    Point(GQ),
}

impl Predicate {
    /// Panics unless `r2 > 0`.
    pub fn circle(center: GQ, r2: Rat) -> Predicate {
        assert!(r2.signum() == Ordering::Greater, "circle needs r² > 0");
        Predicate::Circle(Circle { center, r2 })
    }
}

/// Anything that can report on which side of a circle, and whether at a
/// given point, it lies. Implemented by points and by arrangement cells, so
/// pointwise data can be evaluated on cells without rational sample points.
pub trait Locator {
    /// Sign of `|λ - center|² - r2`.
    fn circle_sign(&self, center: &GQ, r2: &Rat) -> Ordering;
    fn at_point(&self, p: &GQ) -> bool;
}

impl Locator for GQ {
    fn circle_sign(&self, center: &GQ, r2: &Rat) -> Ordering {
        abs2(&(self - center)).cmp(r2)
    }

    fn at_point(&self, p: &GQ) -> bool {
        self == p
    }
}

/// Exact point identifying a cell of any arrangement that contains the
/// predicates of the enclosing formula.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Point(GQ),
    /// `center + √r2 · dir` for a rational unit vector `dir`.
    Arc { center: GQ, r2: Rat, dir: (Rat, Rat) },
    Vertex(SPoint),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Const(bool),
    /// `|λ - c|² < r²`
    Inside(Circle),
    /// `|λ - c|² = r²`
    On(Circle),
    At(GQ),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// The connected component of `of` containing `anchor`.
    Component { of: Box<Formula>, anchor: Anchor },
}

impl Formula {
    fn collect(&self, out: &mut Vec<Predicate>) {
        let mut push = |p: Predicate| {
            if !out.contains(&p) {
                out.push(p);
            }
        };
        match self {
            Formula::Const(_) => {}
            Formula::Inside(c) | Formula::On(c) => push(Predicate::Circle(c.clone())),
            Formula::At(p) => push(Predicate::Point(p.clone())),
            Formula::Not(f) => f.collect(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect(out)),
            Formula::Component { of, .. } => of.collect(out),
        }
    }

    /// True when the formula is a pure boolean combination of tests.
    pub fn is_plain(&self) -> bool {
        match self {
            Formula::Component { .. } => false,
            Formula::Not(f) => f.is_plain(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_plain),
            _ => true,
        }
    }

    /// Evaluates a plain formula; panics on component nodes.
    pub fn eval<L: Locator + ?Sized>(&self, at: &L) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Inside(c) => at.circle_sign(&c.center, &c.r2) == Ordering::Less,
            Formula::On(c) => at.circle_sign(&c.center, &c.r2) == Ordering::Equal,
            Formula::At(p) => at.at_point(p),
            Formula::Not(f) => !f.eval(at),
            Formula::And(fs) => fs.iter().all(|f| f.eval(at)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(at)),
            Formula::Component { .. } => panic!("component nodes need an arrangement"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RegionExpr {
    formula: Formula,
}

impl RegionExpr {
    pub fn new(formula: Formula) -> RegionExpr {
        RegionExpr { formula }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn empty() -> RegionExpr {
        RegionExpr::new(Formula::Const(false))
    }

    pub fn plane() -> RegionExpr {
        RegionExpr::new(Formula::Const(true))
    }

    pub fn open_disk(center: GQ, r2: Rat) -> RegionExpr {
        RegionExpr::new(Formula::Inside(circle(center, r2)))
    }

    pub fn circle(center: GQ, r2: Rat) -> RegionExpr {
        RegionExpr::new(Formula::On(circle(center, r2)))
    }

    pub fn closed_disk(center: GQ, r2: Rat) -> RegionExpr {
        let c = circle(center, r2);
        RegionExpr::new(Formula::Or(vec![Formula::Inside(c.clone()), Formula::On(c)]))
    }

    pub fn point(p: GQ) -> RegionExpr {
        RegionExpr::new(Formula::At(p))
    }

    pub fn unit_circle() -> RegionExpr {
        RegionExpr::circle(GQ::zero(), Rat::one())
    }

    pub fn open_unit_disk() -> RegionExpr {
        RegionExpr::open_disk(GQ::zero(), Rat::one())
    }

    pub fn closed_unit_disk() -> RegionExpr {
        RegionExpr::closed_disk(GQ::zero(), Rat::one())
    }

    /// Distinct predicates in order of first appearance.
    pub fn predicates(&self) -> Vec<Predicate> {
        let mut out = Vec::new();
        self.formula.collect(&mut out);
        out
    }
}

fn circle(center: GQ, r2: Rat) -> Circle {
    match Predicate::circle(center, r2) {
        Predicate::Circle(c) => c,
        Predicate::Point(_) => unreachable!(),
    }
}

pub fn try_member(r: &RegionExpr, lambda: &GQ) -> Result<bool> {
    if r.formula.is_plain() {
        return Ok(r.formula.eval(lambda));
    }
    let decomp = CellDecomp::new(&r.predicates())?;
    let labels = decomp.labels(r)?;
    Ok(labels[decomp.locate_rational(lambda)?])
}

/// Exact membership. Panics only if a component node's arrangement is
/// degenerate; see [`try_member`].
pub fn member(r: &RegionExpr, lambda: &GQ) -> bool {
    try_member(r, lambda).expect("degenerate arrangement while deciding membership")
}

fn join(r1: &RegionExpr, r2: &RegionExpr, and: bool) -> RegionExpr {
    let mut parts = Vec::new();
    for f in [&r1.formula, &r2.formula] {
        match (f, and) {
            (Formula::Const(b), _) if *b == and => {}
            (Formula::Const(_), _) => return RegionExpr::new(Formula::Const(!and)),
            (Formula::And(fs), true) | (Formula::Or(fs), false) => parts.extend(fs.iter().cloned()),
            _ => parts.push(f.clone()),
        }
    }
    let formula = match parts.len() {
        0 => Formula::Const(and),
        1 => parts.pop().unwrap(),
        _ if and => Formula::And(parts),
        _ => Formula::Or(parts),
    };
    RegionExpr::new(formula)
}

pub fn union(r1: &RegionExpr, r2: &RegionExpr) -> RegionExpr {
    join(r1, r2, false)
}

pub fn intersect(r1: &RegionExpr, r2: &RegionExpr) -> RegionExpr {
    join(r1, r2, true)
}

pub fn complement(r: &RegionExpr) -> RegionExpr {
    let formula = match &r.formula {
        Formula::Const(b) => Formula::Const(!b),
        Formula::Not(f) => (**f).clone(),
        f => Formula::Not(Box::new(f.clone())),
    };
    RegionExpr::new(formula)
}

pub fn difference(r1: &RegionExpr, r2: &RegionExpr) -> RegionExpr {
    intersect(r1, &complement(r2))
}

pub fn union_all<'a>(rs: impl IntoIterator<Item = &'a RegionExpr>) -> RegionExpr {
    rs.into_iter().fold(RegionExpr::empty(), |acc, r| union(&acc, r))
}

/// Arrangement of all predicates of all inputs.
pub fn cells(regions: &[RegionExpr]) -> Result<CellDecomp> {
    let mut preds = Vec::new();
    for r in regions {
        r.formula.collect(&mut preds);
    }
    CellDecomp::new(&preds)
}

pub fn equals(r1: &RegionExpr, r2: &RegionExpr) -> Result<bool> {
    let d = cells(&[r1.clone(), r2.clone()])?;
    Ok(d.labels(r1)? == d.labels(r2)?)
}

pub fn is_empty(r: &RegionExpr) -> Result<bool> {
    let d = cells(std::slice::from_ref(r))?;
    Ok(d.labels(r)?.iter().all(|l| !l))
}

/// `r1 ⊆ r2`.
pub fn is_subset(r1: &RegionExpr, r2: &RegionExpr) -> Result<bool> {
    is_empty(&difference(r1, r2))
}

pub fn interior_is_empty(r: &RegionExpr) -> Result<bool> {
    let d = cells(std::slice::from_ref(r))?;
    let labels = d.labels(r)?;
    Ok(!d
        .cells()
        .iter()
        .zip(&labels)
        .any(|(c, &l)| l && matches!(c.kind, CellKind::Face { .. })))
}

/// Sign-vector formula for a set of cells, if no cell outside the set
/// shares a sign vector with one inside.
fn sign_region(d: &CellDecomp, group: &[usize]) -> Option<RegionExpr> {
    let mut in_group = vec![false; d.cells().len()];
    group.iter().for_each(|&i| in_group[i] = true);
    if group.is_empty() {
        return Some(RegionExpr::empty());
    }
    if group.len() == d.cells().len() {
        return Some(RegionExpr::plane());
    }
    let mut by_signs: HashMap<&arrangement::SignVector, (bool, bool)> = HashMap::new();
    for (i, cell) in d.cells().iter().enumerate() {
        let e = by_signs.entry(&cell.signs).or_insert((false, false));
        if in_group[i] {
            e.0 = true;
        } else {
            e.1 = true;
        }
    }
    if by_signs.values().any(|&(inside, outside)| inside && outside) {
        return None;
    }
    let mut seen = Vec::new();
    let mut terms = Vec::new();
    for &i in group {
        let signs = &d.cells()[i].signs;
        if seen.contains(&signs) {
            continue;
        }
        seen.push(signs);
        terms.push(d.sign_formula(signs));
    }
    let formula = if terms.len() == 1 { terms.pop().unwrap() } else { Formula::Or(terms) };
    Some(RegionExpr::new(formula))
}

/// Region of the labeled cells of `d`; the labels must be a function of the
/// cells' sign vectors.
pub fn region_from_labels(d: &CellDecomp, labels: &[bool]) -> Result<RegionExpr> {
    sign_region(d, &d.labeled(labels))
        .ok_or_else(|| Error::Inexpressible("labels separate cells with equal sign vectors".into()))
}

/// A union of cells of `d` lying in one component of `whole`; pinned by a
/// component node when sign vectors cannot single it out.
fn region_from_cells(d: &CellDecomp, group: &[usize], whole: &RegionExpr) -> RegionExpr {
    sign_region(d, group).unwrap_or_else(|| {
        RegionExpr::new(Formula::Component {
            of: Box::new(whole.formula.clone()),
            anchor: d.anchor(group),
        })
    })
}

/// Connected components of `r`.
pub fn components(r: &RegionExpr) -> Result<Vec<RegionExpr>> {
    let d = cells(std::slice::from_ref(r))?;
    let labels = d.labels(r)?;
    Ok(d.components(&labels)
        .iter()
        .map(|group| region_from_cells(&d, group, r))
        .collect())
}

/// Union of the bounded components of the complement of `r`.
pub fn holes(r: &RegionExpr) -> Result<RegionExpr> {
    let d = cells(std::slice::from_ref(r))?;
    let labels = d.labels(r)?;
    let comp = complement(r);
    let outside: Vec<bool> = labels.iter().map(|l| !l).collect();
    let mut parts = Vec::new();
    for group in d.components(&outside) {
        if !d.touches_infinity(&group) {
            parts.push(region_from_cells(&d, &group, &comp));
        }
    }
    Ok(union_all(&parts))
}

/// Polynomially convex hull: `r` with its holes filled. `r` must be bounded.
pub fn eta(r: &RegionExpr) -> Result<RegionExpr> {
    let d = cells(std::slice::from_ref(r))?;
    let labels = d.labels(r)?;
    if d.touches_infinity(&d.labeled(&labels)) {
        return Err(Error::Unbounded);
    }
    Ok(union(r, &holes(r)?))
}

/// Membership at an `n × n` grid over the window `(x0, y0)–(x1, y1)`; row 0
/// is the top row (`y = y1`). With `n = 1` the window center is sampled.
pub fn sample_grid(r: &RegionExpr, window: (&GQ, &GQ), n: usize) -> Result<Vec<Vec<bool>>> {
    assert!(n >= 1, "grid needs at least one sample per side");
    let (lo, hi) = window;
    let coord = |a: &Rat, b: &Rat, i: usize| -> Rat {
        if n == 1 {
            &(a + b) * &Rat::new(1, 2)
        } else {
            a + &(&(b - a) * &Rat::new(i as i64, (n - 1) as i64))
        }
    };
    let decomp = if r.formula.is_plain() { None } else { Some(cells(std::slice::from_ref(r))?) };
    let labels = match &decomp {
        Some(d) => Some(d.labels(r)?),
        None => None,
    };
    let mut grid = Vec::with_capacity(n);
    for j in 0..n {
        let y = coord(&hi.im, &lo.im, j);
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let p = GQ::new(coord(&lo.re, &hi.re, i), y.clone());
            let v = match (&decomp, &labels) {
                (Some(d), Some(l)) => l[d.locate_rational(&p)?],
                _ => r.formula.eval(&p),
            };
            row.push(v);
        }
        grid.push(row);
    }
    Ok(grid)
}

/// Binary PGM (P5): 0 outside, 255 inside.
pub fn to_pgm(grid: &[Vec<bool>]) -> Vec<u8> {
    let h = grid.len();
    let w = grid.first().map_or(0, Vec::len);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for row in grid {
        out.extend(row.iter().map(|&b| if b { 255u8 } else { 0 }));
    }
    out
}

// ---------------------------------------------------------------------------
// JSON: {"predicates": [...], "formula": ...} with predicates referenced by index

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FormulaJson {
    Const(bool),
    Inside(usize),
    On(usize),
    At(usize),
    Not(Box<FormulaJson>),
    And(Vec<FormulaJson>),
    Or(Vec<FormulaJson>),
    Component { of: Box<FormulaJson>, anchor: Anchor },
}

#[derive(Serialize, Deserialize)]
struct RegionJson {
    predicates: Vec<Predicate>,
    formula: FormulaJson,
}

fn to_json(f: &Formula, preds: &[Predicate]) -> FormulaJson {
    let idx = |p: Predicate| preds.iter().position(|q| *q == p).expect("collected predicate");
    match f {
        Formula::Const(b) => FormulaJson::Const(*b),
        Formula::Inside(c) => FormulaJson::Inside(idx(Predicate::Circle(c.clone()))),
        Formula::On(c) => FormulaJson::On(idx(Predicate::Circle(c.clone()))),
        Formula::At(p) => FormulaJson::At(idx(Predicate::Point(p.clone()))),
        Formula::Not(g) => FormulaJson::Not(Box::new(to_json(g, preds))),
        Formula::And(gs) => FormulaJson::And(gs.iter().map(|g| to_json(g, preds)).collect()),
        Formula::Or(gs) => FormulaJson::Or(gs.iter().map(|g| to_json(g, preds)).collect()),
        Formula::Component { of, anchor } => FormulaJson::Component {
            of: Box::new(to_json(of, preds)),
            anchor: anchor.clone(),
        },
    }
}

fn from_json(f: FormulaJson, preds: &[Predicate]) -> std::result::Result<Formula, String> {
    let get = |i: usize| preds.get(i).cloned().ok_or(format!("predicate index {i} out of range"));
    let circ = |i: usize| match get(i)? {
        Predicate::Circle(c) if c.r2.signum() == Ordering::Greater => Ok(c),
        Predicate::Circle(_) => Err("circle needs r2 > 0".to_string()),
        Predicate::Point(_) => Err(format!("predicate {i} is not a circle")),
    };
    Ok(match f {
        FormulaJson::Const(b) => Formula::Const(b),
        FormulaJson::Inside(i) => Formula::Inside(circ(i)?),
        FormulaJson::On(i) => Formula::On(circ(i)?),
        FormulaJson::At(i) => match get(i)? {
            Predicate::Point(p) => Formula::At(p),
            Predicate::Circle(_) => return Err(format!("predicate {i} is not a point")),
        },
        FormulaJson::Not(g) => Formula::Not(Box::new(from_json(*g, preds)?)),
        FormulaJson::And(gs) => {
            Formula::And(gs.into_iter().map(|g| from_json(g, preds)).collect::<std::result::Result<_, _>>()?)
        }
        FormulaJson::Or(gs) => {
            Formula::Or(gs.into_iter().map(|g| from_json(g, preds)).collect::<std::result::Result<_, _>>()?)
        }
        FormulaJson::Component { of, anchor } => Formula::Component {
            of: Box::new(from_json(*of, preds)?),
            anchor,
        },
    })
}

impl Serialize for RegionExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let predicates = self.predicates();
        let formula = to_json(&self.formula, &predicates);
        RegionJson { predicates, formula }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RegionExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<RegionExpr, D::Error> {
        let raw = RegionJson::deserialize(d)?;
        let formula = from_json(raw.formula, &raw.predicates).map_err(serde::de::Error::custom)?;
        Ok(RegionExpr::new(formula))
    }
}
