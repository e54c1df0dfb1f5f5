//! Seeded random instances for property tests and sampled verdicts.

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numeric::{abs2, ExtNat, Rat, GQ};
use crate::operator::{normalize, Affine, Atom, AtomKind, Eigen, OperatorExpr};
use crate::oracle::Coord;
use crate::region::{Formula, Predicate, RegionExpr};

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Knobs for [`random_expr`].
#[derive(Clone, Debug)]
pub struct ExprParams {
    pub max_atoms: usize,
    pub max_mult: u64,
    /// Probability that a multiplicity is infinite.
    pub p_inf: f64,
    /// Include bilateral shifts.
    pub bilateral: bool,
}

impl Default for ExprParams {
    fn default() -> ExprParams {
        ExprParams { max_atoms: 2, max_mult: 2, p_inf: 0.2, bilateral: true }
    }
}

fn small_rat<R: Rng>(r: &mut R) -> Rat {
    let num = r.gen_range(-2..=2);
    let den = *[1, 2].choose(r).unwrap();
    Rat::new(num, den)
}

pub fn random_gq<R: Rng>(r: &mut R) -> GQ {
    if r.gen_bool(0.5) {
        GQ::real(small_rat(r))
    } else {
        GQ::new(small_rat(r), small_rat(r))
    }
}

fn random_affine<R: Rng>(r: &mut R) -> Affine {
    let a = if r.gen_bool(0.4) { GQ::zero() } else { random_gq(r) };
    let b = [GQ::one(), GQ::int(2, 0), GQ::real(Rat::new(1, 2)), GQ::int(0, 1), GQ::int(1, 1), GQ::int(-1, 0)]
        .choose(r)
        .unwrap()
        .clone();
    Affine::new(a, b).expect("b is nonzero")
}

fn random_mult<R: Rng>(r: &mut R, p: &ExprParams) -> ExtNat {
    if r.gen_bool(p.p_inf) {
        ExtNat::Inf
    } else {
        ExtNat::Fin(r.gen_range(1..=p.max_mult))
    }
}

pub fn random_atom<R: Rng>(r: &mut R, p: &ExprParams) -> Atom {
    let kinds = if p.bilateral { 4 } else { 3 };
    let kind = match r.gen_range(0..kinds) {
        0 => AtomKind::UShift(random_affine(r)),
        1 => AtomKind::UShiftAdj(random_affine(r)),
        2 => {
            let n = r.gen_range(1..=2);
            let mut values: Vec<Eigen> = Vec::new();
            while values.len() < n {
                let value = random_gq(r);
                if values.iter().all(|e| e.value != value) {
                    values.push(Eigen { value, mult: random_mult(r, p) });
                }
            }
            AtomKind::Diag(values)
        }
        _ => AtomKind::BShift(random_affine(r)),
    };
    Atom::new(kind, random_mult(r, p)).expect("generated atoms are valid")
}

/// A direct sum of a few random atoms acting on an infinite-dimensional space.
pub fn random_expr<R: Rng>(r: &mut R, p: &ExprParams) -> OperatorExpr {
    loop {
        let n = r.gen_range(1..=p.max_atoms);
        let atoms: Vec<Atom> = (0..n).map(|_| random_atom(r, p)).collect();
        if let Ok(e) = OperatorExpr::new(atoms) {
            return if r.gen_bool(0.2) { normalize(&e.lazy_adjoint()) } else { e };
        }
    }
}

/// A point that lands on the boundary of `expr`'s data about half of the
/// time: on one of its circles (at a rational point) or at a diagonal value.
pub fn random_lambda<R: Rng>(r: &mut R, expr: &OperatorExpr) -> GQ {
    if r.gen_bool(0.5) {
        return random_gq(r);
    }
    let atom = normalize(expr).atoms().choose(r).unwrap().clone();
    match &atom.kind {
        AtomKind::Diag(values) => values.choose(r).unwrap().value.clone(),
        AtomKind::UShift(af) | AtomKind::UShiftAdj(af) | AtomKind::BShift(af) => {
            // rational points on the unit circle, moved onto |λ - a| = |b|
            let units = [GQ::one(), GQ::int(0, 1), GQ::int(-1, 0), GQ::new(Rat::new(3, 5), Rat::new(4, 5))];
            let u = units.choose(r).unwrap();
            &af.a + &(&af.b * u)
        }
    }
}

/// `|λ - c| ≥ ρ + d` for `ρ = √r2`, decided exactly.
fn outside_by(l: &GQ, c: &GQ, r2: &Rat, d: &Rat) -> bool {
    // |λ-c|² - r2 - d² ≥ 2dρ
    let lhs = &(&abs2(&(l - c)) - r2) - &d.square();
    lhs.signum() != Ordering::Less && lhs.square() >= &(&d.square() * r2) * &Rat::int(4)
}

/// `|λ - c| ≤ ρ - d`.
fn inside_by(l: &GQ, c: &GQ, r2: &Rat, d: &Rat) -> bool {
    // r2 + d² - |λ-c|² ≥ 2dρ
    let lhs = &(r2 + &d.square()) - &abs2(&(l - c));
    lhs.signum() != Ordering::Less && r2 >= &d.square() && lhs.square() >= &(&d.square() * r2) * &Rat::int(4)
}

/// At distance at least `d` from every predicate.
pub fn is_clear_of(l: &GQ, preds: &[Predicate], d: &Rat) -> bool {
    preds.iter().all(|p| match p {
        Predicate::Point(q) => abs2(&(l - q)) >= d.square(),
        Predicate::Circle(c) => outside_by(l, &c.center, &c.r2, d) || inside_by(l, &c.center, &c.r2, d),
    })
}

/// A rational point at distance at least `d` from all of `preds`.
pub fn random_lambda_clear<R: Rng>(r: &mut R, preds: &[Predicate], d: &Rat) -> GQ {
    loop {
        let den = 8;
        let l = GQ::new(
            Rat::new(r.gen_range(-24..=24), den),
            Rat::new(r.gen_range(-24..=24), den),
        );
        if is_clear_of(&l, preds, d) {
            return l;
        }
    }
}

/// Random finite-rank corner with entries on low coordinates of the first
/// copies of each atom, as `(row in H, column in K, value)`.
pub fn random_trial_corner<R: Rng>(r: &mut R, a: &OperatorExpr, b: &OperatorExpr) -> Vec<(Coord, Coord, Complex64)> {
    let pick = |r: &mut R, e: &OperatorExpr| {
        let atoms = normalize(e).atoms().to_vec();
        let atom = r.gen_range(0..atoms.len());
        let copies = atoms[atom].mult.finite().unwrap_or(2).min(2);
        Coord { atom, copy: r.gen_range(0..copies), index: r.gen_range(0..3) }
    };
    let rank = r.gen_range(1..=3);
    (0..rank)
        .map(|_| {
            let v = Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
            (pick(r, a), pick(r, b), v)
        })
        .collect()
}

/// Up to `max` predicates on a coarse grid, circles of radius² in {1, 2, 4}.
pub fn random_predicates<R: Rng>(r: &mut R, max: usize) -> Vec<Predicate> {
    let n = r.gen_range(1..=max);
    let mut out: Vec<Predicate> = Vec::new();
    while out.len() < n {
        let c = GQ::int(r.gen_range(-2..=2), r.gen_range(-2..=2));
        let p = if r.gen_bool(0.75) {
            Predicate::circle(c, Rat::int(*[1, 2, 4].choose(r).unwrap()))
        } else {
            Predicate::Point(c)
        };
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// A random formula of depth at most `depth` over the given predicates.
pub fn random_formula<R: Rng>(r: &mut R, preds: &[Predicate], depth: usize) -> Formula {
    let leaf = |r: &mut R| {
        let i = r.gen_range(0..preds.len());
        match &preds[i] {
            Predicate::Point(q) => Formula::At(q.clone()),
            Predicate::Circle(c) => {
                if r.gen_bool(0.7) {
                    Formula::Inside(c.clone())
                } else {
                    Formula::On(c.clone())
                }
            }
        }
    };
    if depth == 0 || r.gen_bool(0.25) {
        return leaf(r);
    }
    match r.gen_range(0..3) {
        0 => Formula::Not(Box::new(random_formula(r, preds, depth - 1))),
        1 => Formula::And(vec![random_formula(r, preds, depth - 1), random_formula(r, preds, depth - 1)]),
        _ => Formula::Or(vec![random_formula(r, preds, depth - 1), random_formula(r, preds, depth - 1)]),
    }
}

pub fn random_region<R: Rng>(r: &mut R, max_preds: usize) -> RegionExpr {
    let preds = random_predicates(r, max_preds);
    RegionExpr::new(random_formula(r, &preds, 3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::boundary_predicates;

    #[test]
    fn deterministic_given_seed() {
        let p = ExprParams::default();
        let a: Vec<String> = (0..5).map(|_| ()).scan(rng(7), |r, _| Some(random_expr(r, &p).to_string())).collect();
        let b: Vec<String> = (0..5).map(|_| ()).scan(rng(7), |r, _| Some(random_expr(r, &p).to_string())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn clear_points_are_clear() {
        let mut r = rng(3);
        let d = Rat::new(1, 8);
        for _ in 0..50 {
            let e = random_expr(&mut r, &ExprParams::default());
            let preds = boundary_predicates(&e);
            let l = random_lambda_clear(&mut r, &preds, &d);
            let (x, y) = l.to_f64();
            for p in &preds {
                match p {
                    Predicate::Point(q) => {
                        let (qx, qy) = q.to_f64();
                        assert!(((x - qx).powi(2) + (y - qy).powi(2)).sqrt() >= 0.125 - 1e-12);
                    }
                    Predicate::Circle(c) => {
                        let (cx, cy) = c.center.to_f64();
                        let dist = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                        assert!((dist - c.r2.to_f64().sqrt()).abs() >= 0.125 - 1e-12);
                    }
                }
            }
        }
    }
}
