//! Exact signs of expressions in `Q(√d1)(√d2)`.
//!
//! Circle intersection points have coordinates `a + b√d` with rational
//! `a, b, d`. Comparing two such points, or a point with a circle, needs at
//! most one extra square root, so every sign below is decided by squaring
//! twice.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::{Rat, GQ};

/// `a + b√d` with `d ≥ 0`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Surd {
    pub a: Rat,
    pub b: Rat,
    pub d: Rat,
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}√{}", self.a, self.b, self.d)
        }
    }
}

/// Sign of `p + q` given `sign(p)`, `sign(q)` and `sign(p² - q²)`.
fn combine(sp: Ordering, sq: Ordering, diff: impl FnOnce() -> Ordering) -> Ordering {
    match (sp, sq) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (x, y) if x == y => x,
        _ => match diff() {
            Ordering::Greater => sp,
            Ordering::Less => sq,
            Ordering::Equal => Ordering::Equal,
        },
    }
}

impl Surd {
    pub fn new(a: Rat, b: Rat, d: Rat) -> Surd {
        debug_assert!(d.signum() != Ordering::Less);
        Surd { a, b, d }
    }

    pub fn rat(a: Rat) -> Surd {
        Surd { a, b: Rat::zero(), d: Rat::zero() }
    }

    /// `√d`.
    pub fn sqrt(d: Rat) -> Surd {
        Surd::new(Rat::zero(), Rat::one(), d)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero() || self.d.is_zero()
    }

    pub fn rational_value(&self) -> Option<Rat> {
        if self.is_rational() {
            Some(self.a.clone())
        } else { self.d.sqrt_exact().map(|s| &self.a + &(&self.b * &s)) }
    }

    pub fn sign(&self) -> Ordering {
        let sb = if self.d.is_zero() { Ordering::Equal } else { self.b.signum() };
        combine(self.a.signum(), sb, || {
            (&self.a.square() - &(&self.b.square() * &self.d)).signum()
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * self.d.to_f64().sqrt()
    }

    fn field(&self, other: &Surd) -> Rat {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => other.d.clone(),
            (_, true) => self.d.clone(),
            _ => {
                assert!(self.d == other.d, "surds from different fields");
                self.d.clone()
            }
        }
    }

    pub fn add(&self, other: &Surd) -> Surd {
        let d = self.field(other);
        Surd::new(&self.a + &other.a, &self.b + &other.b, d)
    }

    pub fn sub(&self, other: &Surd) -> Surd {
        let d = self.field(other);
        Surd::new(&self.a - &other.a, &self.b - &other.b, d)
    }

    pub fn mul(&self, other: &Surd) -> Surd {
        let d = self.field(other);
        let a = &(&self.a * &other.a) + &(&(&self.b * &other.b) * &d);
        let b = &(&self.a * &other.b) + &(&self.b * &other.a);
        Surd::new(a, b, d)
    }

    pub fn scale(&self, k: &Rat) -> Surd {
        Surd::new(&self.a * k, &self.b * k, self.d.clone())
    }

    pub fn add_rat(&self, k: &Rat) -> Surd {
        Surd::new(&self.a + k, self.b.clone(), self.d.clone())
    }

    pub fn neg(&self) -> Surd {
        Surd::new(-&self.a, -&self.b, self.d.clone())
    }

    pub fn square(&self) -> Surd {
        self.mul(self)
    }
}

/// `p + q√e` with `p, q` in a common field `Q(√d)`.
#[derive(Clone, Debug)]
pub struct Bi {
    p: Surd,
    q: Surd,
    e: Rat,
}

impl Bi {
    /// Product `x·y` of elements of two possibly different fields.
    pub fn product(x: &Surd, y: &Surd) -> Bi {
        Bi { p: x.scale(&y.a), q: x.scale(&y.b), e: y.d.clone() }
    }

    /// `x - y` for elements of two possibly different fields.
    pub fn diff(x: &Surd, y: &Surd) -> Bi {
        Bi {
            p: x.add_rat(&-&y.a),
            q: Surd::rat(-&y.b),
            e: y.d.clone(),
        }
    }

    pub fn sub(&self, other: &Bi) -> Bi {
        let e = self.outer(other);
        Bi { p: self.p.sub(&other.p), q: self.q.sub(&other.q), e }
    }

    fn outer(&self, other: &Bi) -> Rat {
        let self_trivial = self.q.sign() == Ordering::Equal || self.e.is_zero();
        let other_trivial = other.q.sign() == Ordering::Equal || other.e.is_zero();
        match (self_trivial, other_trivial) {
            (true, _) => other.e.clone(),
            (_, true) => self.e.clone(),
            _ => {
                assert!(self.e == other.e, "mixed values from different fields");
                self.e.clone()
            }
        }
    }

    pub fn sign(&self) -> Ordering {
        let sq = if self.e.is_zero() { Ordering::Equal } else { self.q.sign() };
        combine(self.p.sign(), sq, || {
            self.p.square().sub(&self.q.square().scale(&self.e)).sign()
        })
    }
}

/// Exact sign of `x - y`.
pub fn cmp(x: &Surd, y: &Surd) -> Ordering {
    Bi::diff(x, y).sign()
}

/// Point whose coordinates lie in a common field `Q(√d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SPoint {
    pub x: Surd,
    pub y: Surd,
}

impl SPoint {
    pub fn rational(p: &GQ) -> SPoint {
        SPoint { x: Surd::rat(p.re.clone()), y: Surd::rat(p.im.clone()) }
    }

    pub fn as_rational(&self) -> Option<GQ> {
        Some(GQ::new(self.x.rational_value()?, self.y.rational_value()?))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    pub fn minus(&self, c: &GQ) -> SPoint {
        SPoint { x: self.x.add_rat(&-&c.re), y: self.y.add_rat(&-&c.im) }
    }

    pub fn same(&self, other: &SPoint) -> bool {
        cmp(&self.x, &other.x) == Ordering::Equal && cmp(&self.y, &other.y) == Ordering::Equal
    }

    /// Sign of `|self - c|² - r2`.
    pub fn circle_sign(&self, c: &GQ, r2: &Rat) -> Ordering {
        let v = self.minus(c);
        v.x.square().add(&v.y.square()).add_rat(&-r2).sign()
    }
}

/// Cross product `u × v` of vectors from two possibly different fields.
pub fn cross(u: &SPoint, v: &SPoint) -> Ordering {
    Bi::product(&u.x, &v.y).sub(&Bi::product(&u.y, &v.x)).sign()
}

fn half(v: &SPoint) -> u8 {
    match v.y.sign() {
        Ordering::Greater => 0,
        Ordering::Equal if v.x.sign() == Ordering::Greater => 0,
        _ => 1,
    }
}

/// Orders nonzero vectors by polar angle in `[0, 2π)`.
pub fn angle_cmp(u: &SPoint, v: &SPoint) -> Ordering {
    half(u).cmp(&half(v)).then_with(|| cross(u, v).reverse())
}
