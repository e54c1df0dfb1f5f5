//! Exact arrangement of circles and points.
//!
//! Circle intersections are quadratic surds (see [`super::surd`]), so every
//! incidence and ordering below is decided exactly. Faces are found as
//! boundary cycles of the planar graph; the cycle bounding a connected group
//! of circles from outside is attached to its enclosing face by casting a
//! ray with rational direction from a rational point just right of the group.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::surd::{angle_cmp, cmp, SPoint, Surd};
use super::{Anchor, Circle, Formula, Locator, Predicate, RegionExpr, MAX_PREDICATES};
use crate::error::{Error, Result};
use crate::numeric::{Rat, GQ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Face { bounded: bool },
    Arc { circle: usize },
    Vertex,
    Point,
}

/// Position of a cell relative to every predicate: `-1` inside, `0` on,
/// `1` outside each circle; incidence with each point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SignVector {
    pub circles: Vec<i8>,
    pub points: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub kind: CellKind,
    /// Rational point of the cell, when one is known.
    pub sample: Option<GQ>,
    pub approx: (f64, f64),
    pub signs: SignVector,
    /// Cells in the closure of this one, or having this one in their closure.
    pub adjacent: Vec<usize>,
}

fn sign_code(o: Ordering) -> i8 {
    match o {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

fn code_sign(c: i8) -> Ordering {
    c.cmp(&0)
}

#[derive(Clone, Debug)]
struct ArcRec {
    circle: usize,
    start: Option<usize>,
    end: Option<usize>,
    /// Rational unit vector pointing from the center into the open arc.
    dir: (Rat, Rat),
}

enum OnCircle {
    Vertex(usize),
    Arc(usize),
}

/// Half-edges: `2a` runs along arc `a` counterclockwise (disk on the left),
/// `2a + 1` clockwise (exterior on the left).
struct Geometry {
    circles: Vec<Circle>,
    points: Vec<GQ>,
    vertices: Vec<SPoint>,
    vertex_circles: Vec<Vec<usize>>,
    circle_vertices: Vec<Vec<usize>>,
    circle_arcs: Vec<Vec<usize>>,
    arcs: Vec<ArcRec>,
    outgoing: Vec<Vec<usize>>,
    next: Vec<usize>,
    cycle_of: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

fn circle_intersections(c1: &Circle, c2: &Circle) -> Vec<SPoint> {
    let dx = &c2.center.re - &c1.center.re;
    let dy = &c2.center.im - &c1.center.im;
    let l2 = &dx.square() + &dy.square();
    if l2.is_zero() {
        return Vec::new();
    }
    let t = &(&(&c1.r2 - &c2.r2) + &l2) / &(&Rat::int(2) * &l2);
    let d = &(&c1.r2 / &l2) - &t.square();
    let px = &c1.center.re + &(&t * &dx);
    let py = &c1.center.im + &(&t * &dy);
    match d.signum() {
        Ordering::Less => Vec::new(),
        Ordering::Equal => vec![SPoint::rational(&GQ::new(px, py))],
        Ordering::Greater => [Rat::one(), Rat::int(-1)]
            .iter()
            .map(|s| SPoint {
                x: Surd::new(px.clone(), &(-&dy) * s, d.clone()),
                y: Surd::new(py.clone(), &dx * s, d.clone()),
            })
            .collect(),
    }
}

fn rational_unit(theta: f64) -> (Rat, Rat) {
    let mut th = theta.rem_euclid(2.0 * PI);
    if th > PI {
        th -= 2.0 * PI;
    }
    let flip = th.abs() > PI / 2.0;
    if flip {
        th = if th > 0.0 { th - PI } else { th + PI };
    }
    let s = Rat::from_f64_dyadic((th / 2.0).tan(), 40);
    let s2 = s.square();
    let den = &Rat::one() + &s2;
    let x = &(&Rat::one() - &s2) / &den;
    let y = &(&Rat::int(2) * &s) / &den;
    if flip {
        (-x, -y)
    } else {
        (x, y)
    }
}

fn rational_dir(u: &(Rat, Rat)) -> SPoint {
    SPoint::rational(&GQ::new(u.0.clone(), u.1.clone()))
}

/// Strictly inside the counterclockwise sweep from `a` to `b`; a full turn
/// when `a` and `b` point the same way.
fn ccw_between(a: &SPoint, x: &SPoint, b: &SPoint) -> bool {
    let ax = angle_cmp(a, x) == Ordering::Less;
    let xb = angle_cmp(x, b) == Ordering::Less;
    match angle_cmp(a, b) {
        Ordering::Less => ax && xb,
        _ => ax || xb,
    }
}

fn ray_slopes() -> impl Iterator<Item = Rat> {
    (0..64i64).map(|k| if k % 2 == 0 { Rat::new(k / 2, 37) } else { Rat::new(-(k / 2) - 1, 41) })
}

impl Geometry {
    fn build(circles: Vec<Circle>, points: Vec<GQ>) -> Result<Geometry> {
        let mut vertices: Vec<SPoint> = Vec::new();
        let add = |p: SPoint, vs: &mut Vec<SPoint>| {
            if !vs.iter().any(|q| q.same(&p)) {
                vs.push(p);
            }
        };
        for i in 0..circles.len() {
            for j in i + 1..circles.len() {
                for p in circle_intersections(&circles[i], &circles[j]) {
                    add(p, &mut vertices);
                }
            }
        }
        for q in &points {
            if circles.iter().any(|c| q.circle_sign(&c.center, &c.r2) == Ordering::Equal) {
                add(SPoint::rational(q), &mut vertices);
            }
        }
        let vertex_circles: Vec<Vec<usize>> = vertices
            .iter()
            .map(|v| {
                (0..circles.len())
                    .filter(|&i| v.circle_sign(&circles[i].center, &circles[i].r2) == Ordering::Equal)
                    .collect()
            })
            .collect();
        let mut circle_vertices: Vec<Vec<usize>> = vec![Vec::new(); circles.len()];
        for (v, cs) in vertex_circles.iter().enumerate() {
            for &c in cs {
                circle_vertices[c].push(v);
            }
        }
        for (ci, vs) in circle_vertices.iter_mut().enumerate() {
            let c = &circles[ci].center;
            vs.sort_by(|&a, &b| angle_cmp(&vertices[a].minus(c), &vertices[b].minus(c)));
        }
        let mut arcs = Vec::new();
        let mut circle_arcs = vec![Vec::new(); circles.len()];
        for (ci, vs) in circle_vertices.iter().enumerate() {
            let k = vs.len();
            if k == 0 {
                circle_arcs[ci].push(arcs.len());
                arcs.push(ArcRec { circle: ci, start: None, end: None, dir: (Rat::one(), Rat::zero()) });
            }
            for j in 0..k {
                circle_arcs[ci].push(arcs.len());
                arcs.push(ArcRec {
                    circle: ci,
                    start: Some(vs[j]),
                    end: Some(vs[(j + 1) % k]),
                    dir: (Rat::one(), Rat::zero()),
                });
            }
        }
        let mut g = Geometry {
            circles,
            points,
            vertices,
            vertex_circles,
            circle_vertices,
            circle_arcs,
            arcs,
            outgoing: Vec::new(),
            next: Vec::new(),
            cycle_of: Vec::new(),
            cycles: Vec::new(),
        };
        for a in 0..g.arcs.len() {
            g.arcs[a].dir = g.arc_dir(a)?;
        }
        g.link();
        Ok(g)
    }

    fn origin(&self, h: usize) -> Option<usize> {
        let a = &self.arcs[h / 2];
        if h.is_multiple_of(2) {
            a.start
        } else {
            a.end
        }
    }

    fn target(&self, h: usize) -> Option<usize> {
        self.origin(h ^ 1)
    }

    fn vertex_dir(&self, v: usize, circle: usize) -> SPoint {
        self.vertices[v].minus(&self.circles[circle].center)
    }

    fn arc_dir(&self, a: usize) -> Result<(Rat, Rat)> {
        let arc = &self.arcs[a];
        let (Some(s), Some(e)) = (arc.start, arc.end) else {
            return Ok((Rat::one(), Rat::zero()));
        };
        let ds = self.vertex_dir(s, arc.circle);
        let de = self.vertex_dir(e, arc.circle);
        let angle = |p: &SPoint| {
            let (x, y) = p.to_f64();
            y.atan2(x)
        };
        let ts = angle(&ds);
        let mut te = angle(&de);
        while te <= ts {
            te += 2.0 * PI;
        }
        for f in [0.5, 0.25, 0.75, 0.375, 0.625, 0.125, 0.875, 0.0625, 0.9375] {
            let u = rational_unit(ts + f * (te - ts));
            if ccw_between(&ds, &rational_dir(&u), &de) {
                return Ok(u);
            }
        }
        Err(Error::Degenerate(format!("arc {a} is too short to sample")))
    }

    fn tangent(&self, h: usize) -> SPoint {
        let arc = &self.arcs[h / 2];
        let r = self.vertex_dir(self.origin(h).expect("edge with endpoints"), arc.circle);
        if h.is_multiple_of(2) {
            SPoint { x: r.y.neg(), y: r.x }
        } else {
            SPoint { x: r.y, y: r.x.neg() }
        }
    }

    /// Outgoing order around a vertex: by tangent angle, then by signed
    /// curvature (tighter right turns first).
    fn edge_cmp(&self, h1: usize, h2: usize) -> Ordering {
        angle_cmp(&self.tangent(h1), &self.tangent(h2)).then_with(|| {
            let ccw1 = h1.is_multiple_of(2);
            let ccw2 = h2.is_multiple_of(2);
            let r1 = &self.circles[self.arcs[h1 / 2].circle].r2;
            let r2 = &self.circles[self.arcs[h2 / 2].circle].r2;
            ccw1.cmp(&ccw2).then_with(|| if ccw1 { r2.cmp(r1) } else { r1.cmp(r2) })
        })
    }

    fn link(&mut self) {
        let nh = 2 * self.arcs.len();
        let mut outgoing = vec![Vec::new(); self.vertices.len()];
        for h in 0..nh {
            if let Some(v) = self.origin(h) {
                outgoing[v].push(h);
            }
        }
        for list in outgoing.iter_mut() {
            list.sort_by(|&a, &b| self.edge_cmp(a, b));
        }
        let mut next = vec![0; nh];
        for h in 0..nh {
            next[h] = match self.target(h) {
                None => h,
                Some(t) => {
                    let list = &outgoing[t];
                    let pos = list.iter().position(|&x| x == h ^ 1).expect("twin is outgoing");
                    list[(pos + list.len() - 1) % list.len()]
                }
            };
        }
        let mut cycle_of = vec![usize::MAX; nh];
        let mut cycles = Vec::new();
        for h in 0..nh {
            if cycle_of[h] != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cyc = Vec::new();
            let mut x = h;
            while cycle_of[x] == usize::MAX {
                cycle_of[x] = id;
                cyc.push(x);
                x = next[x];
            }
            cycles.push(cyc);
        }
        self.outgoing = outgoing;
        self.next = next;
        self.cycle_of = cycle_of;
        self.cycles = cycles;
    }

    fn locate_on_circle(&self, ci: usize, dir: &SPoint) -> OnCircle {
        let vs = &self.circle_vertices[ci];
        let arcs = &self.circle_arcs[ci];
        if vs.is_empty() {
            return OnCircle::Arc(arcs[0]);
        }
        let found = vs
            .iter()
            .position(|&v| angle_cmp(&self.vertex_dir(v, ci), dir) != Ordering::Less);
        match found {
            Some(j) if angle_cmp(&self.vertex_dir(vs[j], ci), dir) == Ordering::Equal => {
                OnCircle::Vertex(vs[j])
            }
            Some(j) if j > 0 => OnCircle::Arc(arcs[j - 1]),
            _ => OnCircle::Arc(arcs[vs.len() - 1]),
        }
    }

    /// First half-edge hit by a ray from `p` (not on any circle), facing `p`;
    /// `None` when the ray escapes to infinity.
    fn ray_cast(&self, p: &GQ) -> Result<Option<usize>> {
        'dirs: for s in ray_slopes() {
            let a = &Rat::one() + &s.square();
            let mut best: Option<(Surd, usize, bool)> = None;
            for (ci, c) in self.circles.iter().enumerate() {
                let ex = &p.re - &c.center.re;
                let ey = &p.im - &c.center.im;
                let b = &ex + &(&s * &ey);
                let c0 = &(&ex.square() + &ey.square()) - &c.r2;
                let disc = &b.square() - &(&a * &c0);
                if disc.signum() == Ordering::Less {
                    continue;
                }
                let tangent = disc.is_zero();
                let base = &(-&b) / &a;
                let coef = a.recip();
                let roots = if tangent {
                    vec![Surd::rat(base)]
                } else {
                    vec![
                        Surd::new(base.clone(), coef.clone(), disc.clone()),
                        Surd::new(base, -&coef, disc),
                    ]
                };
                for t in roots {
                    if t.sign() != Ordering::Greater {
                        continue;
                    }
                    match &best {
                        Some((bt, _, _)) => match cmp(&t, bt) {
                            Ordering::Less => best = Some((t, ci, tangent)),
                            Ordering::Equal => best = Some((t, ci, true)),
                            Ordering::Greater => {}
                        },
                        None => best = Some((t, ci, tangent)),
                    }
                }
            }
            let Some((t, ci, degenerate)) = best else {
                return Ok(None);
            };
            if degenerate {
                continue 'dirs;
            }
            let c = &self.circles[ci];
            let hit = SPoint { x: t.add_rat(&p.re), y: t.scale(&s).add_rat(&p.im) };
            match self.locate_on_circle(ci, &hit.minus(&c.center)) {
                OnCircle::Vertex(_) => continue 'dirs,
                OnCircle::Arc(arc) => {
                    let inside = p.circle_sign(&c.center, &c.r2) == Ordering::Less;
                    return Ok(Some(2 * arc + usize::from(!inside)));
                }
            }
        }
        Err(Error::Degenerate(format!("no clean ray from {p}")))
    }

    /// Rational point in the face left of half-edge `h`, reached from the
    /// middle of its arc along a radius that crosses no other circle.
    fn face_sample(&self, h: usize) -> Result<GQ> {
        let arc = &self.arcs[h / 2];
        let circ = &self.circles[arc.circle];
        let (ux, uy) = &arc.dir;
        let inward = h.is_multiple_of(2);
        let root_r = Surd::sqrt(circ.r2.clone());
        let sqrt_f = circ.r2.to_f64().sqrt();
        for k in 1..=50 {
            let step = 2f64.powi(-k);
            let factor = if inward { 1.0 - step } else { 1.0 + step };
            let rho = Rat::from_f64_dyadic(sqrt_f * factor, 56);
            let side = rho.square().cmp(&circ.r2);
            if rho.signum() != Ordering::Greater
                || side != if inward { Ordering::Less } else { Ordering::Greater }
            {
                continue;
            }
            let q = GQ::new(&circ.center.re + &(&rho * ux), &circ.center.im + &(&rho * uy));
            if self.points.contains(&q) {
                continue;
            }
            let rho_s = Surd::rat(rho.clone());
            let (lo, hi) = if inward { (&rho_s, &root_r) } else { (&root_r, &rho_s) };
            let clear = self.circles.iter().enumerate().all(|(ci, other)| {
                if ci == arc.circle {
                    return true;
                }
                let ex = &circ.center.re - &other.center.re;
                let ey = &circ.center.im - &other.center.im;
                let b = &(ux * &ex) + &(uy * &ey);
                let c0 = &(&ex.square() + &ey.square()) - &other.r2;
                let disc = &b.square() - &c0;
                if disc.signum() == Ordering::Less {
                    return true;
                }
                [Rat::one(), Rat::int(-1)].iter().all(|sg| {
                    let t = Surd::new(-&b, sg.clone(), disc.clone());
                    cmp(&t, lo) == Ordering::Less || cmp(&t, hi) == Ordering::Greater
                })
            });
            if clear {
                return Ok(q);
            }
        }
        Err(Error::Degenerate(format!("cannot sample next to arc {}", h / 2)))
    }

    /// Rational point right of the circle group `group`, connected to its
    /// rightmost point without crossing any circle, and the clockwise
    /// half-edge bounding the group from outside there.
    fn outer_probe(&self, group: &[usize]) -> Result<(GQ, usize)> {
        let right = |ci: usize| {
            let c = &self.circles[ci];
            Surd::new(c.center.re.clone(), Rat::one(), c.r2.clone())
        };
        let top = *group
            .iter()
            .max_by(|&&a, &&b| {
                cmp(&right(a), &right(b)).then_with(|| self.circles[a].r2.cmp(&self.circles[b].r2))
            })
            .expect("nonempty group");
        let arc = match self.locate_on_circle(top, &SPoint::rational(&GQ::one())) {
            OnCircle::Arc(a) => a,
            OnCircle::Vertex(v) => {
                let j = self.circle_vertices[top].iter().position(|&x| x == v).expect("vertex on circle");
                self.circle_arcs[top][j]
            }
        };
        let c = &self.circles[top];
        let lo = right(top);
        let sqrt_f = c.r2.to_f64().sqrt();
        for k in 1..=50 {
            let rho = Rat::from_f64_dyadic(sqrt_f * (1.0 + 2f64.powi(-k)), 56);
            if rho.square() <= c.r2 {
                continue;
            }
            let x = &c.center.re + &rho;
            let hi = Surd::rat(x.clone());
            let clear = self.circles.iter().enumerate().all(|(ci, other)| {
                if group.contains(&ci) {
                    return true;
                }
                let d = &other.r2 - &(&c.center.im - &other.center.im).square();
                if d.signum() == Ordering::Less {
                    return true;
                }
                [Rat::one(), Rat::int(-1)].iter().all(|sg| {
                    let root = Surd::new(other.center.re.clone(), sg.clone(), d.clone());
                    cmp(&root, &lo) == Ordering::Less || cmp(&root, &hi) == Ordering::Greater
                })
            });
            if clear {
                return Ok((GQ::new(x, c.center.im.clone()), 2 * arc + 1));
            }
        }
        Err(Error::Degenerate("circle groups too close to separate".into()))
    }
}

/// Cell decomposition of the plane induced by a set of predicates.
#[derive(Serialize)]
pub struct CellDecomp {
    circles: Vec<Circle>,
    points: Vec<GQ>,
    cells: Vec<Cell>,
    #[serde(skip)]
    geom: Geometry,
    #[serde(skip)]
    arc_faces: Vec<[usize; 2]>,
    #[serde(skip)]
    isolated: HashMap<GQ, usize>,
    #[serde(skip)]
    circle_index: HashMap<Circle, usize>,
    #[serde(skip)]
    point_index: HashMap<GQ, usize>,
}

impl CellDecomp {
    pub fn new(preds: &[Predicate]) -> Result<CellDecomp> {
        let mut circles: Vec<Circle> = Vec::new();
        let mut points: Vec<GQ> = Vec::new();
        for p in preds {
            match p {
                Predicate::Circle(c) if !circles.contains(c) => circles.push(c.clone()),
                Predicate::Point(q) if !points.contains(q) => points.push(q.clone()),
                _ => {}
            }
        }
        let n = circles.len() + points.len();
        if n > MAX_PREDICATES {
            return Err(Error::TooManyPredicates(n));
        }
        let geom = Geometry::build(circles.clone(), points.clone())?;
        let ncycles = geom.cycles.len();

        // attach the outer cycle of every circle group to its enclosing face
        let mut groups_uf = UnionFind::<usize>::new(circles.len());
        for vc in &geom.vertex_circles {
            for w in vc.windows(2) {
                groups_uf.union(w[0], w[1]);
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for ci in 0..circles.len() {
            groups.entry(groups_uf.find(ci)).or_default().push(ci);
        }
        let unbounded = ncycles;
        let mut faces_uf = UnionFind::<usize>::new(ncycles + 1);
        let mut outer = vec![false; ncycles];
        let mut group_list: Vec<Vec<usize>> = groups.into_values().collect();
        group_list.sort();
        for group in &group_list {
            let (q, h) = geom.outer_probe(group)?;
            let cyc = geom.cycle_of[h];
            outer[cyc] = true;
            let enclosing = match geom.ray_cast(&q)? {
                Some(hit) => geom.cycle_of[hit],
                None => unbounded,
            };
            faces_uf.union(cyc, enclosing);
        }

        // one face per inner cycle, plus the unbounded face (index 0)
        let mut face_of_root: HashMap<usize, usize> = HashMap::new();
        face_of_root.insert(faces_uf.find(unbounded), 0);
        let mut face_cycle = vec![None];
        for (cyc, &is_outer) in outer.iter().enumerate() {
            if is_outer {
                continue;
            }
            let root = faces_uf.find(cyc);
            if face_of_root.contains_key(&root) {
                return Err(Error::Degenerate("face with two outer boundaries".into()));
            }
            face_of_root.insert(root, face_cycle.len());
            face_cycle.push(Some(cyc));
        }
        let mut face_of_cycle = Vec::with_capacity(ncycles);
        for cyc in 0..ncycles {
            match face_of_root.get(&faces_uf.find(cyc)) {
                Some(&f) => face_of_cycle.push(f),
                None => return Err(Error::Degenerate("boundary cycle without a face".into())),
            }
        }
        let face_of_half = |h: usize| face_of_cycle[geom.cycle_of[h]];

        let circle_index: HashMap<Circle, usize> =
            circles.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let point_index: HashMap<GQ, usize> =
            points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let rational_signs = |p: &GQ| SignVector {
            circles: circles.iter().map(|c| sign_code(p.circle_sign(&c.center, &c.r2))).collect(),
            points: points.iter().map(|q| q == p).collect(),
        };

        let nfaces = face_cycle.len();
        let narcs = geom.arcs.len();
        let nverts = geom.vertices.len();
        let mut cells = Vec::new();

        // faces
        let far = {
            let mut x = Rat::one();
            for c in &circles {
                let b = &(&c.center.re.abs() + &c.r2) + &Rat::int(2);
                x = x.max(b);
            }
            for p in &points {
                x = x.max(&p.re.abs() + &Rat::one());
            }
            GQ::new(x, Rat::zero())
        };
        for (f, cyc) in face_cycle.iter().enumerate() {
            let sample = match cyc {
                None => far.clone(),
                Some(z) => geom.face_sample(geom.cycles[*z][0])?,
            };
            cells.push(Cell {
                kind: CellKind::Face { bounded: f != 0 },
                approx: sample.to_f64(),
                signs: rational_signs(&sample),
                sample: Some(sample),
                adjacent: Vec::new(),
            });
        }

        // arcs
        let mut arc_faces = Vec::with_capacity(narcs);
        for (a, arc) in geom.arcs.iter().enumerate() {
            let c = &circles[arc.circle];
            let (ux, uy) = &arc.dir;
            let signs = circles
                .iter()
                .enumerate()
                .map(|(ci, o)| {
                    if ci == arc.circle {
                        return 0;
                    }
                    let ex = &c.center.re - &o.center.re;
                    let ey = &c.center.im - &o.center.im;
                    let a0 = &(&(&ex.square() + &ey.square()) + &c.r2) - &o.r2;
                    let b0 = &Rat::int(2) * &(&(ux * &ex) + &(uy * &ey));
                    sign_code(Surd::new(a0, b0, c.r2.clone()).sign())
                })
                .collect();
            let point = SPoint {
                x: Surd::new(c.center.re.clone(), ux.clone(), c.r2.clone()),
                y: Surd::new(c.center.im.clone(), uy.clone(), c.r2.clone()),
            };
            let faces = [face_of_half(2 * a), face_of_half(2 * a + 1)];
            arc_faces.push(faces);
            let mut adjacent = faces.to_vec();
            adjacent.extend(arc.start.iter().chain(arc.end.iter()).map(|v| nfaces + narcs + v));
            cells.push(Cell {
                kind: CellKind::Arc { circle: arc.circle },
                sample: point.as_rational(),
                approx: point.to_f64(),
                signs: SignVector { circles: signs, points: vec![false; points.len()] },
                adjacent,
            });
        }

        // vertices
        for (v, p) in geom.vertices.iter().enumerate() {
            let signs = SignVector {
                circles: circles.iter().map(|c| sign_code(p.circle_sign(&c.center, &c.r2))).collect(),
                points: points.iter().map(|q| p.same(&SPoint::rational(q))).collect(),
            };
            let mut adjacent: Vec<usize> = geom.outgoing[v].iter().map(|&h| face_of_half(h)).collect();
            adjacent.extend(geom.outgoing[v].iter().map(|&h| nfaces + h / 2));
            cells.push(Cell {
                kind: CellKind::Vertex,
                sample: p.as_rational(),
                approx: p.to_f64(),
                signs,
                adjacent,
            });
        }

        // points off every circle
        let mut isolated = HashMap::new();
        for p in &points {
            if geom.vertices.iter().any(|v| v.same(&SPoint::rational(p))) {
                continue;
            }
            let face = match geom.ray_cast(p)? {
                Some(h) => face_of_half(h),
                None => 0,
            };
            isolated.insert(p.clone(), cells.len());
            cells.push(Cell {
                kind: CellKind::Point,
                sample: Some(p.clone()),
                approx: p.to_f64(),
                signs: rational_signs(p),
                adjacent: vec![face],
            });
        }

        // symmetric closure of adjacency
        let n = cells.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, cell) in cells.iter().enumerate() {
            for &j in &cell.adjacent {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for (cell, mut list) in cells.iter_mut().zip(adj) {
            list.sort_unstable();
            list.dedup();
            cell.adjacent = list;
        }
        debug_assert_eq!(cells.len(), nfaces + narcs + nverts + isolated.len());

        Ok(CellDecomp {
            circles,
            points,
            cells,
            geom,
            arc_faces,
            isolated,
            circle_index,
            point_index,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    pub fn points(&self) -> &[GQ] {
        &self.points
    }

    pub fn locator(&self, cell: usize) -> CellLocator<'_> {
        CellLocator { decomp: self, cell }
    }

    fn nfaces(&self) -> usize {
        self.cells.iter().take_while(|c| matches!(c.kind, CellKind::Face { .. })).count()
    }

    fn arc_cell(&self, arc: usize) -> usize {
        self.nfaces() + arc
    }

    fn vertex_cell(&self, v: usize) -> usize {
        self.nfaces() + self.geom.arcs.len() + v
    }

    fn on_circle_cell(&self, ci: usize, dir: &SPoint) -> usize {
        match self.geom.locate_on_circle(ci, dir) {
            OnCircle::Vertex(v) => self.vertex_cell(v),
            OnCircle::Arc(a) => self.arc_cell(a),
        }
    }

    /// Cell containing a rational point.
    pub fn locate_rational(&self, p: &GQ) -> Result<usize> {
        if let Some(&c) = self.isolated.get(p) {
            return Ok(c);
        }
        let on = self
            .circles
            .iter()
            .position(|c| p.circle_sign(&c.center, &c.r2) == Ordering::Equal);
        if let Some(ci) = on {
            let dir = SPoint::rational(&(p - &self.circles[ci].center));
            return Ok(self.on_circle_cell(ci, &dir));
        }
        Ok(match self.geom.ray_cast(p)? {
            Some(h) => self.arc_faces[h / 2][h % 2],
            None => 0,
        })
    }

    fn locate_anchor(&self, anchor: &Anchor) -> Result<usize> {
        match anchor {
            Anchor::Point(p) => self.locate_rational(p),
            Anchor::Arc { center, r2, dir } => {
                let key = Circle { center: center.clone(), r2: r2.clone() };
                let ci = *self
                    .circle_index
                    .get(&key)
                    .ok_or_else(|| Error::Degenerate("anchor circle missing from arrangement".into()))?;
                Ok(self.on_circle_cell(ci, &rational_dir(dir)))
            }
            Anchor::Vertex(p) => self
                .geom
                .vertices
                .iter()
                .position(|v| v.same(p))
                .map(|v| self.vertex_cell(v))
                .ok_or_else(|| Error::Degenerate("anchor vertex missing from arrangement".into())),
        }
    }

    /// Exact point identifying the component containing `group[0]`.
    pub fn anchor(&self, group: &[usize]) -> Anchor {
        let cell = group
            .iter()
            .copied()
            .find(|&i| self.cells[i].sample.is_some())
            .unwrap_or(group[0]);
        if let Some(p) = &self.cells[cell].sample {
            return Anchor::Point(p.clone());
        }
        match self.cells[cell].kind {
            CellKind::Arc { circle } => {
                let c = &self.circles[circle];
                let arc = cell - self.nfaces();
                Anchor::Arc { center: c.center.clone(), r2: c.r2.clone(), dir: self.geom.arcs[arc].dir.clone() }
            }
            _ => {
                let v = cell - self.nfaces() - self.geom.arcs.len();
                Anchor::Vertex(self.geom.vertices[v].clone())
            }
        }
    }

    fn label_formula(&self, f: &Formula) -> Result<Vec<bool>> {
        if f.is_plain() {
            return Ok((0..self.cells.len()).map(|i| f.eval(&self.locator(i))).collect());
        }
        Ok(match f {
            Formula::Not(g) => self.label_formula(g)?.into_iter().map(|b| !b).collect(),
            Formula::And(gs) | Formula::Or(gs) => {
                let and = matches!(f, Formula::And(_));
                let mut acc = vec![and; self.cells.len()];
                for g in gs {
                    for (a, b) in acc.iter_mut().zip(self.label_formula(g)?) {
                        *a = if and { *a && b } else { *a || b };
                    }
                }
                acc
            }
            Formula::Component { of, anchor } => {
                let base = self.label_formula(of)?;
                let at = self.locate_anchor(anchor)?;
                let mut out = vec![false; self.cells.len()];
                if base[at] {
                    for group in self.components(&base) {
                        if group.contains(&at) {
                            group.iter().for_each(|&i| out[i] = true);
                        }
                    }
                }
                out
            }
            _ => unreachable!("plain formulas handled above"),
        })
    }

    /// Membership of every cell in `r`. All predicates of `r` must belong to
    /// the arrangement.
    pub fn labels(&self, r: &RegionExpr) -> Result<Vec<bool>> {
        self.label_formula(r.formula())
    }

    /// Connected components of the union of labeled cells, each listed in
    /// increasing cell order.
    pub fn components(&self, labels: &[bool]) -> Vec<Vec<usize>> {
        let n = self.cells.len();
        let mut uf = UnionFind::<usize>::new(n);
        for i in 0..n {
            if !labels[i] {
                continue;
            }
            for &j in &self.cells[i].adjacent {
                if labels[j] {
                    uf.union(i, j);
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        for i in (0..n).filter(|&i| labels[i]) {
            let root = uf.find(i);
            let g = *index.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        groups
    }

    pub fn labeled(&self, labels: &[bool]) -> Vec<usize> {
        (0..labels.len()).filter(|&i| labels[i]).collect()
    }

    /// Whether the cells include the unbounded face.
    pub fn touches_infinity(&self, group: &[usize]) -> bool {
        group.contains(&0)
    }

    /// Conjunction pinning down exactly the cells with sign vector `signs`.
    pub fn sign_formula(&self, signs: &SignVector) -> Formula {
        let mut lits = Vec::new();
        for (c, &s) in self.circles.iter().zip(&signs.circles) {
            lits.push(match code_sign(s) {
                Ordering::Less => Formula::Inside(c.clone()),
                Ordering::Equal => Formula::On(c.clone()),
                Ordering::Greater => Formula::Not(Box::new(Formula::Or(vec![
                    Formula::Inside(c.clone()),
                    Formula::On(c.clone()),
                ]))),
            });
        }
        for (p, &hit) in self.points.iter().zip(&signs.points) {
            let at = Formula::At(p.clone());
            lits.push(if hit { at } else { Formula::Not(Box::new(at)) });
        }
        match lits.len() {
            0 => Formula::Const(true),
            1 => lits.pop().unwrap(),
            _ => Formula::And(lits),
        }
    }
}

/// A cell seen as a location: answers predicate queries from its sign vector.
pub struct CellLocator<'a> {
    decomp: &'a CellDecomp,
    cell: usize,
}

impl Locator for CellLocator<'_> {
    fn circle_sign(&self, center: &GQ, r2: &Rat) -> Ordering {
        let key = Circle { center: center.clone(), r2: r2.clone() };
        match self.decomp.circle_index.get(&key) {
            Some(&i) => code_sign(self.decomp.cells[self.cell].signs.circles[i]),
            None => panic!("circle |λ-{center}|² = {r2} is not part of the arrangement"),
        }
    }

    fn at_point(&self, p: &GQ) -> bool {
        match self.decomp.point_index.get(p) {
            Some(&i) => self.decomp.cells[self.cell].signs.points[i],
            None => panic!("point {p} is not part of the arrangement"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circ(x: i64, y: i64, r2: i64) -> Predicate {
        Predicate::circle(GQ::int(x, y), Rat::int(r2))
    }

    fn counts(d: &CellDecomp) -> (usize, usize, usize, usize, usize) {
        let mut out = (0, 0, 0, 0, 0);
        for c in d.cells() {
            match c.kind {
                CellKind::Face { bounded: true } => out.0 += 1,
                CellKind::Face { bounded: false } => out.1 += 1,
                CellKind::Arc { .. } => out.2 += 1,
                CellKind::Vertex => out.3 += 1,
                CellKind::Point => out.4 += 1,
            }
        }
        out
    }

    #[test]
    fn single_circle_has_three_cells() {
        let d = CellDecomp::new(&[circ(0, 0, 1)]).unwrap();
        assert_eq!(counts(&d), (1, 1, 1, 0, 0));
    }

    #[test]
    fn disjoint_circles_have_five_cells() {
        let d = CellDecomp::new(&[circ(0, 0, 1), circ(5, 0, 1)]).unwrap();
        assert_eq!(counts(&d), (2, 1, 2, 0, 0));
    }

    #[test]
    fn crossing_circles() {
        let d = CellDecomp::new(&[circ(0, 0, 1), circ(1, 0, 1)]).unwrap();
        assert_eq!(counts(&d), (3, 1, 4, 2, 0));
    }

    #[test]
    fn nested_and_tangent_circles() {
        // concentric: disk, annulus, exterior
        let d = CellDecomp::new(&[circ(0, 0, 1), circ(0, 0, 4)]).unwrap();
        assert_eq!(counts(&d), (2, 1, 2, 0, 0));
        // internally tangent at (1, 0)
        let d = CellDecomp::new(&[circ(0, 0, 1), Predicate::circle(GQ::real(Rat::new(1, 2)), Rat::new(1, 4))]).unwrap();
        assert_eq!(counts(&d), (2, 1, 2, 1, 0));
        // externally tangent at (1, 0)
        let d = CellDecomp::new(&[circ(0, 0, 1), circ(2, 0, 1)]).unwrap();
        assert_eq!(counts(&d), (2, 1, 2, 1, 0));
    }

    #[test]
    fn ring_of_disks_leaves_a_bounded_gap() {
        // four unit-ish disks around the origin, neighbours overlapping
        let preds = [circ(2, 0, 3), circ(0, 2, 3), circ(-2, 0, 3), circ(0, -2, 3)];
        let d = CellDecomp::new(&preds).unwrap();
        let (bounded, unbounded, arcs, verts, _) = counts(&d);
        assert_eq!(unbounded, 1);
        assert_eq!(verts, 8);
        assert_eq!(arcs, 16);
        // 4 disk interiors minus lenses, 4 lenses, and the central gap
        assert_eq!(bounded, 9);
        let gap = d.locate_rational(&GQ::zero()).unwrap();
        assert!(matches!(d.cells()[gap].kind, CellKind::Face { bounded: true }));
        assert_eq!(d.cells()[gap].signs, d.cells()[0].signs);
    }

    #[test]
    fn points_on_and_off_circles() {
        let preds = [circ(0, 0, 1), Predicate::Point(GQ::one()), Predicate::Point(GQ::int(3, 0))];
        let d = CellDecomp::new(&preds).unwrap();
        assert_eq!(counts(&d), (1, 1, 1, 1, 1));
        let c = d.locate_rational(&GQ::int(3, 0)).unwrap();
        assert_eq!(d.cells()[c].kind, CellKind::Point);
        assert_eq!(d.cells()[c].adjacent, vec![0]);
    }

    #[test]
    fn nested_groups_find_their_faces() {
        // small circle inside the lens of two crossing ones
        let preds = [circ(0, 0, 4), circ(2, 0, 4), Predicate::circle(GQ::int(1, 0), Rat::new(1, 16))];
        let d = CellDecomp::new(&preds).unwrap();
        let lens = d.locate_rational(&GQ::new(Rat::new(1, 1), Rat::new(1, 1))).unwrap();
        let ring_adj = d.locate_rational(&GQ::new(Rat::new(3, 2), Rat::zero())).unwrap();
        assert_eq!(lens, ring_adj);
        let inner = d.locate_rational(&GQ::int(1, 0)).unwrap();
        assert_ne!(inner, lens);
    }

    #[test]
    fn samples_carry_their_labels() {
        let preds = [circ(0, 0, 2), circ(1, 1, 3), circ(-1, 0, 1), Predicate::Point(GQ::int(0, 1))];
        let d = CellDecomp::new(&preds).unwrap();
        for (i, cell) in d.cells().iter().enumerate() {
            if let Some(p) = &cell.sample {
                assert_eq!(d.locate_rational(p).unwrap(), i, "cell {i} {:?}", cell.kind);
            }
        }
    }

    #[test]
    fn too_many_predicates() {
        let preds: Vec<Predicate> = (0..33).map(|k| Predicate::Point(GQ::int(k, 0))).collect();
        assert!(matches!(CellDecomp::new(&preds), Err(Error::TooManyPredicates(33))));
    }
}
