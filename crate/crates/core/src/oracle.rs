//! Brute-force cross-check through finite sections.
//!
//! Every operator is compressed to the first `n` coordinates of each copy
//! (a centered window for bilateral shifts). Singular values of the section
//! of `T - λ` then hint at `α`, `β` and closedness of the range. Truncation
//! creates spurious near-null vectors supported near the cut, so candidate
//! null vectors with most of their mass in the last `⌈n/8⌉` coordinates of a
//! copy are discarded. Infinite multiplicities are cut at a fixed number of
//! copies and any estimate that reaches into such copies is flagged.

use nalgebra::DMatrix;
use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::classifier::Target;
use crate::completion::{BlockMatrixExpr, CompletionCertificate, Corner};
use crate::error::{Error, Result};
use crate::numeric::{ExtNat, GQ};
use crate::operator::{normalize, AtomKind, BasisAddress, BasisVector, OperatorExpr};

pub type DenseMatrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Copies kept of an infinite multiplicity, and coordinates kept of an
    /// infinite-dimensional eigenspace.
    pub cap_per_atom: usize,
    /// Largest total dimension of a section.
    pub max_dim: usize,
    /// The edge window is the last `⌈n / edge_denominator⌉` coordinates.
    pub edge_denominator: usize,
    /// Candidate null vectors with at least this edge mass are artifacts.
    pub edge_threshold: f64,
    /// Singular values below this are null outright.
    pub tol: f64,
    /// Ratio per size step above which the gap counts as shrinking.
    pub gap_ratio: f64,
}

impl Default for OracleConfig {
    fn default() -> OracleConfig {
        OracleConfig {
            cap_per_atom: 8,
            max_dim: 4096,
            edge_denominator: 8,
            edge_threshold: 0.5,
            tol: 1e-8,
            gap_ratio: 1.5,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::OracleConfig(m.into()));
        if self.cap_per_atom == 0 {
            return bad("cap_per_atom must be positive");
        }
        if self.edge_denominator < 2 {
            return bad("edge_denominator must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.edge_threshold) {
            return bad("edge_threshold must lie in [0, 1]");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.gap_ratio > 1.0) {
            return bad("gap_ratio must exceed 1");
        }
        Ok(())
    }
}

/// Which side of `H ⊕ K` a coordinate block lives on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    H,
    K,
}

#[derive(Clone, Debug)]
struct Block {
    side: Side,
    atom: usize,
    copy: u64,
    offset: usize,
    len: usize,
    /// For diagonal copies: start and length of each eigenvalue segment.
    segments: Vec<(usize, usize)>,
    /// Position of index 0; bilateral copies are cut symmetrically.
    origin: usize,
}

impl Block {
    fn position(&self, index: usize) -> Option<usize> {
        let k = self.origin + index;
        (k < self.len).then_some(self.offset + k)
    }
}

/// A section together with the bookkeeping needed to read it.
#[derive(Clone, Debug)]
pub struct Truncation {
    /// Summed `(row, col, value)` entries; everything else is zero.
    entries: Vec<(usize, usize, Complex64)>,
    blocks: Vec<Block>,
    edge: Vec<bool>,
    capped: Vec<bool>,
}

/// Explicit coordinate of a section: `index` within copy `copy` of atom `atom`.
/// For a bilateral shift, index 0 is the middle of the section.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Coord {
    pub atom: usize,
    pub copy: u64,
    pub index: usize,
}

/// Corner of a block section.
#[derive(Clone, Copy, Debug)]
pub enum DenseCorner<'a> {
    Zero,
    Cert(&'a CompletionCertificate),
    /// `(row in H, column in K, value)` triples; coordinates outside the
    /// section are dropped.
    Sparse(&'a [(Coord, Coord, Complex64)]),
}

impl<'a> From<&'a Corner> for DenseCorner<'a> {
    fn from(c: &'a Corner) -> DenseCorner<'a> {
        match c {
            Corner::Zero => DenseCorner::Zero,
            Corner::Cert(cert) => DenseCorner::Cert(cert),
        }
    }
}

/// What the oracle is asked about.
#[derive(Clone, Copy, Debug)]
pub enum Operand<'a> {
    Expr(&'a OperatorExpr),
    Block { a: &'a OperatorExpr, b: &'a OperatorExpr, c: DenseCorner<'a> },
}

impl<'a> From<&'a OperatorExpr> for Operand<'a> {
    fn from(e: &'a OperatorExpr) -> Operand<'a> {
        Operand::Expr(e)
    }
}

impl<'a> From<&'a BlockMatrixExpr> for Operand<'a> {
    fn from(m: &'a BlockMatrixExpr) -> Operand<'a> {
        Operand::Block { a: &m.a, b: &m.b, c: (&m.c).into() }
    }
}

fn c64(z: &GQ) -> Complex64 {
    z.to_complex()
}

struct Builder<'c> {
    cfg: &'c OracleConfig,
    n: usize,
    blocks: Vec<Block>,
    edge: Vec<bool>,
    capped: Vec<bool>,
    // (row, col, value) in global coordinates
    entries: Vec<(usize, usize, Complex64)>,
}

impl Builder<'_> {
    fn dim(&self) -> usize {
        self.edge.len()
    }

    fn add_expr(&mut self, expr: &OperatorExpr, side: Side) -> Result<()> {
        let expr = normalize(expr);
        let n = self.n;
        let cap = self.cfg.cap_per_atom;
        let w = n.div_ceil(self.cfg.edge_denominator);
        for (idx, atom) in expr.atoms().iter().enumerate() {
            let (copies, atom_capped) = match atom.mult {
                ExtNat::Fin(m) => (m as usize, false),
                ExtNat::Inf => (cap.min(n), true),
            };
            for copy in 0..copies {
                let offset = self.dim();
                let (len, segments) = match &atom.kind {
                    AtomKind::Diag(values) => {
                        let mut segs = Vec::new();
                        let mut len = 0;
                        for e in values {
                            let (m, seg_capped) = match e.mult {
                                ExtNat::Fin(m) => (m as usize, false),
                                ExtNat::Inf => (cap, true),
                            };
                            segs.push((len, m));
                            len += m;
                            self.capped.extend(std::iter::repeat_n(atom_capped || seg_capped, m));
                        }
                        (len, segs)
                    }
                    _ => {
                        self.capped.extend(std::iter::repeat_n(atom_capped, n));
                        (n, Vec::new())
                    }
                };
                let bilateral = matches!(atom.kind, AtomKind::BShift(_));
                self.edge.extend((0..len).map(|k| match atom.kind {
                    AtomKind::Diag(_) => false,
                    _ => k + w >= len || (bilateral && k < w),
                }));
                if self.dim() > self.cfg.max_dim {
                    return Err(Error::SizeOverflow { dim: self.dim(), max: self.cfg.max_dim });
                }
                match &atom.kind {
                    AtomKind::Diag(values) => {
                        for (e, &(start, m)) in values.iter().zip(&segments) {
                            let v = c64(&e.value);
                            for k in 0..m {
                                self.entries.push((offset + start + k, offset + start + k, v));
                            }
                        }
                    }
                    AtomKind::UShift(af) | AtomKind::UShiftAdj(af) | AtomKind::BShift(af) => {
                        let (a, b) = (c64(&af.a), c64(&af.b));
                        let adj = matches!(atom.kind, AtomKind::UShiftAdj(_));
                        for k in 0..n {
                            self.entries.push((offset + k, offset + k, a));
                            if k + 1 < n {
                                // S e_k = e_{k+1}; S* moves the other way
                                let (r, c) = if adj { (k, k + 1) } else { (k + 1, k) };
                                self.entries.push((offset + r, offset + c, b));
                            }
                        }
                    }
                }
                let origin = if bilateral { len / 2 } else { 0 };
                self.blocks.push(Block { side, atom: idx, copy: copy as u64, offset, len, segments, origin });
            }
        }
        Ok(())
    }

    fn find(&self, side: Side, atom: usize, copy: u64) -> Option<&Block> {
        self.blocks.iter().find(|b| b.side == side && b.atom == atom && b.copy == copy)
    }

    /// Coordinates of a basis vector inside the section, or `None` when the
    /// vector lies outside it.
    fn vector(&self, side: Side, addr: &BasisAddress) -> Option<Vec<(usize, Complex64)>> {
        let b = self.find(side, addr.atom, addr.copy)?;
        match &addr.vector {
            BasisVector::Basis(j) => b.position(*j as usize).map(|k| vec![(k, Complex64::new(1.0, 0.0))]),
            BasisVector::Geometric(mu) => {
                let mu = c64(mu);
                let scale = (1.0 - mu.norm_sqr()).sqrt();
                let mut p = Complex64::new(scale, 0.0);
                let mut out = Vec::with_capacity(b.len);
                for k in 0..b.len {
                    out.push((b.offset + k, p));
                    p *= mu;
                }
                Some(out)
            }
            BasisVector::Eigen { value, k } => {
                let &(start, m) = b.segments.get(*value)?;
                let k = *k as usize;
                (k < m).then(|| vec![(b.offset + start + k, Complex64::new(1.0, 0.0))])
            }
        }
    }

    fn add_corner(&mut self, a: &OperatorExpr, b: &OperatorExpr, c: DenseCorner<'_>) -> Result<()> {
        match c {
            DenseCorner::Zero => {}
            DenseCorner::Sparse(entries) => {
                for (row, col, v) in entries {
                    let r = self.find(Side::H, row.atom, row.copy).and_then(|blk| blk.position(row.index));
                    let c = self.find(Side::K, col.atom, col.copy).and_then(|blk| blk.position(col.index));
                    if let (Some(r), Some(c)) = (r, c) {
                        self.entries.push((r, c, *v));
                    }
                }
            }
            DenseCorner::Cert(cert) => {
                // enough pairs to cover every address that fits; the streams
                // walk anti-diagonals, so this bound is generous
                let budget = 4 * (self.dim() + 1) * (self.cfg.cap_per_atom + 1);
                let mut rank_one = Vec::new();
                for (ker, coker) in cert.pairing(a, b)?.take(budget) {
                    if let (Some(g), Some(f)) = (self.vector(Side::K, &ker), self.vector(Side::H, &coker)) {
                        rank_one.push((f, g));
                    }
                }
                // C = Σ f ⊗ ḡ
                for (f, g) in rank_one {
                    for &(i, fi) in &f {
                        for &(j, gj) in &g {
                            self.entries.push((i, j, fi * gj.conj()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Truncation {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Truncation { entries: merged, blocks: self.blocks, edge: self.edge, capped: self.capped }
    }
}

fn builder(cfg: &OracleConfig, n: usize) -> Result<Builder<'_>> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::OracleConfig("section size must be at least 2".into()));
    }
    Ok(Builder { cfg, n, blocks: Vec::new(), edge: Vec::new(), capped: Vec::new(), entries: Vec::new() })
}

/// Section of an operator or block matrix at size `n`.
pub fn truncate(op: Operand<'_>, n: usize, cfg: &OracleConfig) -> Result<Truncation> {
    let mut bld = builder(cfg, n)?;
    match op {
        Operand::Expr(e) => bld.add_expr(e, Side::H)?,
        Operand::Block { a, b, c } => {
            bld.add_expr(a, Side::H)?;
            bld.add_expr(b, Side::K)?;
            bld.add_corner(a, b, c)?;
        }
    }
    Ok(bld.finish())
}

impl Truncation {
    pub fn dim(&self) -> usize {
        self.edge.len()
    }

    /// Section of `T - λ`.
    /// The section as a dense matrix.
    pub fn matrix(&self) -> DenseMatrix {
        let d = self.dim();
        let mut m = DenseMatrix::zeros(d, d);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    /// The section of `op - λ` as a dense matrix.
    pub fn shifted(&self, lambda: &GQ) -> DenseMatrix {
        let mut m = self.matrix();
        let l = c64(lambda);
        for i in 0..m.nrows() {
            m[(i, i)] -= l;
        }
        m
    }

    /// Whether coordinate `i` lies in an edge window.
    pub fn is_edge(&self, i: usize) -> bool {
        self.edge[i]
    }

    /// Coordinates on side `side` (rows for `H`, columns for `K`).
    pub fn side_range(&self, side: Side) -> std::ops::Range<usize> {
        let mut it = self.blocks.iter().filter(|b| b.side == side);
        match it.next() {
            None => 0..0,
            Some(first) => {
                let end = self.blocks.iter().filter(|b| b.side == side).map(|b| b.offset + b.len).max().unwrap();
                first.offset..end
            }
        }
    }
}

/// All singular values, descending.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let f = faer::Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)]);
    let mut s: Vec<f64> = match f.singular_values() {
        Ok(v) => v,
        Err(_) => m.clone().svd(false, false).singular_values.iter().copied().collect(),
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum GapEvidence {
    ShrinkingGap,
    StableGap,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeDiagnostics {
    pub n: usize,
    pub dim: usize,
    /// Singular values classified as null, ascending.
    pub small_singular_values: Vec<f64>,
    /// Edge mass of each candidate null direction of `T - λ`.
    pub kernel_edge_mass: Vec<f64>,
    /// Same for `(T - λ)*`.
    pub cokernel_edge_mass: Vec<f64>,
    pub alpha_count: u64,
    pub beta_count: u64,
    /// Smallest singular value that is not null.
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericPointData {
    pub alpha_est: u64,
    pub beta_est: u64,
    /// The estimate reaches into copies cut off at the cap, so the true
    /// value may be larger (typically infinite).
    pub alpha_capped: bool,
    pub beta_capped: bool,
    /// Counts agree across the two largest sizes.
    pub consistent: bool,
    pub closed_evidence: GapEvidence,
    pub per_size: Vec<SizeDiagnostics>,
}

impl NumericPointData {
    /// Evidence that `T - λ` is Fredholm left invertible: no kernel, a gap
    /// that does not shrink, and a cokernel count that is not cut off.
    pub fn looks_fli(&self) -> bool {
        self.alpha_est == 0
            && !self.alpha_capped
            && self.closed_evidence == GapEvidence::StableGap
            && !self.beta_capped
            && self.consistent
    }

    /// Whether `T - λ` falls outside the target class, or `None` when the
    /// sections disagree with each other.
    pub fn outside(&self, target: Target) -> Option<bool> {
        if !self.consistent || self.closed_evidence == GapEvidence::Inconclusive {
            return None;
        }
        Some(match target {
            Target::Fli => !self.looks_fli(),
            Target::Fri => !self.looks_fri(),
            Target::Invertible => !(self.looks_fli() && self.beta_est == 0 && !self.beta_capped),
        })
    }

    pub fn looks_fri(&self) -> bool {
        self.beta_est == 0
            && !self.beta_capped
            && self.closed_evidence == GapEvidence::StableGap
            && !self.alpha_capped
            && self.consistent
    }
}

struct SizeSvd {
    n: usize,
    // ascending singular values with matching left/right vectors, kept
    // sparse since sections split into many small blocks
    sigma: Vec<f64>,
    u: Vec<Vec<(usize, Complex64)>>,
    v: Vec<Vec<(usize, Complex64)>>,
    edge: Vec<bool>,
    capped: Vec<bool>,
}

/// The first `m` of `cols` as a dense `dim × m` matrix.
fn leading(cols: &[Vec<(usize, Complex64)>], m: usize, dim: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(dim, m);
    for (c, col) in cols.iter().take(m).enumerate() {
        for &(i, z) in col {
            out[(i, c)] = z;
        }
    }
    out
}

fn size_svd(op: Operand<'_>, lambda: &GQ, n: usize, cfg: &OracleConfig) -> Result<SizeSvd> {
    let t = truncate(op, n, cfg)?;
    let d = t.dim();
    let l = c64(lambda);
    // a section without a corner is block diagonal, one block per copy, so
    // decompose each coupled group of coordinates on its own
    let mut uf = UnionFind::<usize>::new(d);
    for &(i, j, _) in &t.entries {
        uf.union(i, j);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d];
    let mut place = vec![0; d];
    for i in 0..d {
        let root = uf.find(i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        place[i] = groups[slot[root]].len();
        groups[slot[root]].push(i);
    }
    let mut subs: Vec<faer::Mat<Complex64>> = groups
        .iter()
        .map(|g| faer::Mat::from_fn(g.len(), g.len(), |r, c| if r == c { -l } else { Complex64::new(0.0, 0.0) }))
        .collect();
    for &(i, j, v) in &t.entries {
        let g = slot[uf.find(i)];
        subs[g][(place[i], place[j])] += v;
    }
    let mut parts: Vec<(f64, Vec<(usize, Complex64)>, Vec<(usize, Complex64)>)> = Vec::with_capacity(d);
    for (g, sub) in groups.iter().zip(&subs) {
        let svd = sub.svd().map_err(|e| Error::Numeric(format!("SVD failed: {e:?}")))?;
        let (u, v, sv) = (svd.U(), svd.V(), svd.S().column_vector());
        for k in 0..g.len() {
            let uc = g.iter().enumerate().map(|(r, &i)| (i, u[(r, k)])).collect();
            let vc = g.iter().enumerate().map(|(r, &i)| (i, v[(r, k)])).collect();
            parts.push((sv[k].re, uc, vc));
        }
    }
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut sigma = Vec::with_capacity(d);
    let mut u = Vec::with_capacity(d);
    let mut v = Vec::with_capacity(d);
    for (x, uc, vc) in parts {
        sigma.push(x);
        u.push(uc);
        v.push(vc);
    }
    Ok(SizeSvd { n, sigma, u, v, edge: t.edge, capped: t.capped })
}

/// Leading singular values that count as null at size index `j`: below
/// `tol`, or small and down more than eightfold from the previous size.
/// Where the range is not closed the decay is polynomial (about halving per
/// doubling); a genuine null vector decays geometrically.
fn small_count(svds: &[SizeSvd], j: usize, tol: f64) -> usize {
    let cur = &svds[j].sigma;
    let prev = j.checked_sub(1).map(|p| &svds[p].sigma);
    cur.iter()
        .enumerate()
        .take_while(|&(i, &s)| {
            if s < tol {
                return true;
            }
            match prev.and_then(|p| p.get(i)) {
                Some(&sp) if sp < 0.5 && s < 1e-2 => s <= sp / 8.0,
                _ => false,
            }
        })
        .count()
}

/// Number of directions in the span of the first `m` columns of `vecs` whose
/// edge mass is below `threshold`, the edge masses of those columns' span
/// (one per principal direction), and whether the counted directions sit
/// in capped coordinates.
fn count_interior(vecs: &DenseMatrix, m: usize, edge: &[bool], capped: &[bool], threshold: f64) -> (u64, Vec<f64>, bool) {
    if m == 0 {
        return (0, Vec::new(), false);
    }
    let v = vecs.columns(0, m).into_owned();
    // principal directions of the interior part of the null space
    let mut interior = v.clone();
    for (i, &on) in edge.iter().enumerate() {
        if on {
            interior.row_mut(i).fill(Complex64::new(0.0, 0.0));
        }
    }
    let gram = v.adjoint() * &interior;
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = gram.symmetric_eigen();
    let mut masses = Vec::new();
    let mut kept = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let edge_mass = (1.0 - lam).clamp(0.0, 1.0);
        masses.push(edge_mass);
        if edge_mass < threshold {
            kept.push(i);
        }
    }
    masses.sort_by(f64::total_cmp);
    let capped_hit = if kept.is_empty() {
        false
    } else {
        let basis = DenseMatrix::from_fn(m, kept.len(), |r, c| eig.eigenvectors[(r, kept[c])]);
        let dirs = &v * basis;
        (0..dirs.ncols()).any(|c| {
            let col = dirs.column(c);
            let mass: f64 = col.iter().zip(capped).filter(|(_, &on)| on).map(|(z, _)| z.norm_sqr()).sum();
            mass >= 0.5
        })
    };
    (kept.len() as u64, masses, capped_hit)
}

/// Estimates `α`, `β` and closedness of `op - λ` from sections of the given
/// sizes (strictly increasing, at least two).
pub fn estimate_point_data(
    op: Operand<'_>,
    lambda: &GQ,
    sizes: &[usize],
    cfg: &OracleConfig,
) -> Result<NumericPointData> {
    cfg.validate()?;
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OracleConfig("sizes must be strictly increasing with at least two entries".into()));
    }
    let svds: Vec<SizeSvd> = sizes.iter().map(|&n| size_svd(op, lambda, n, cfg)).collect::<Result<_>>()?;
    let last = svds.len() - 1;
    let mut per_size = Vec::new();
    let mut caps = Vec::new();
    for (j, s) in svds.iter().enumerate() {
        let m = small_count(&svds, j, cfg.tol);
        // right singular vectors span the near-kernel of T - λ, left ones
        // that of its adjoint
        let d = s.sigma.len();
        let (alpha, kmass, kcap) = count_interior(&leading(&s.v, m, d), m, &s.edge, &s.capped, cfg.edge_threshold);
        let (beta, cmass, ccap) = count_interior(&leading(&s.u, m, d), m, &s.edge, &s.capped, cfg.edge_threshold);
        caps.push((kcap, ccap));
        per_size.push(SizeDiagnostics {
            n: s.n,
            dim: s.sigma.len(),
            small_singular_values: s.sigma[..m].to_vec(),
            kernel_edge_mass: kmass,
            cokernel_edge_mass: cmass,
            alpha_count: alpha,
            beta_count: beta,
            gap: s.sigma.get(m).copied(),
        });
    }
    let (a1, a2) = (per_size[last - 1].alpha_count, per_size[last].alpha_count);
    let (b1, b2) = (per_size[last - 1].beta_count, per_size[last].beta_count);
    let m = per_size[last].small_singular_values.len();
    let gaps: Vec<Option<f64>> = svds.iter().map(|s| s.sigma.get(m).copied()).collect();
    let closed_evidence = gap_evidence(&gaps, cfg.gap_ratio);
    Ok(NumericPointData {
        alpha_est: a1.min(a2),
        beta_est: b1.min(b2),
        alpha_capped: caps[last].0,
        beta_capped: caps[last].1,
        consistent: a1 == a2 && b1 == b2,
        closed_evidence,
        per_size,
    })
}

fn gap_evidence(gaps: &[Option<f64>], ratio: f64) -> GapEvidence {
    let Some(gaps) = gaps.iter().copied().collect::<Option<Vec<f64>>>() else {
        return GapEvidence::Inconclusive;
    };
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    if ratios.last().is_some_and(|&r| r >= ratio) {
        GapEvidence::ShrinkingGap
    } else if ratios.iter().all(|&r| r < ratio) {
        GapEvidence::StableGap
    } else {
        GapEvidence::Inconclusive
    }
}

/// Builds `(I 0; 0 B)(I C; 0 I)(A 0; 0 I)` and `M_C` at size `n` and returns
/// the spectral norm of their difference on coordinates away from the cut.
pub fn factorization_identity_check(
    a: &OperatorExpr,
    b: &OperatorExpr,
    c: DenseCorner<'_>,
    n: usize,
    lambda: &GQ,
    cfg: &OracleConfig,
) -> Result<f64> {
    let whole = truncate(Operand::Block { a, b, c }, n, cfg)?;
    let m = whole.shifted(lambda);
    let h = whole.side_range(Side::H);
    let k = whole.side_range(Side::K);
    let d = whole.dim();
    let mut left = DenseMatrix::identity(d, d);
    let mut mid = DenseMatrix::identity(d, d);
    let mut right = DenseMatrix::identity(d, d);
    for i in k.clone() {
        for j in k.clone() {
            left[(i, j)] = m[(i, j)];
        }
    }
    for i in h.clone() {
        for j in k.clone() {
            mid[(i, j)] = m[(i, j)];
        }
        for j in h.clone() {
            right[(i, j)] = m[(i, j)];
        }
    }
    let diff = left * mid * right - &m;
    let keep: Vec<usize> = (0..d).filter(|&i| !whole.is_edge(i)).collect();
    let inner = DenseMatrix::from_fn(keep.len(), keep.len(), |r, c| diff[(keep[r], keep[c])]);
    Ok(singular_values(&inner).first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rat;
    use crate::operator::Atom;

    fn e(atoms: Vec<Atom>) -> OperatorExpr {
        OperatorExpr::new(atoms).unwrap()
    }

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    #[test]
    fn shift_section() {
        let s = e(vec![Atom::ushift()]);
        let t = truncate((&s).into(), 3, &cfg()).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(t.matrix()[(1, 0)], one);
        assert_eq!(t.matrix()[(2, 1)], one);
        assert_eq!(t.matrix()[(0, 1)], Complex64::new(0.0, 0.0));
        let sv = singular_values(&truncate((&s).into(), 4, &cfg()).unwrap().matrix());
        let expected = [1.0, 1.0, 1.0, 0.0];
        assert!(sv.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn singular_values_trivia() {
        let id = DenseMatrix::identity(3, 3);
        assert!(singular_values(&id).iter().all(|s| (s - 1.0).abs() < 1e-12));
        let z = DenseMatrix::zeros(2, 3);
        assert_eq!(singular_values(&z), vec![0.0, 0.0]);
    }

    #[test]
    fn diag_layout() {
        let d = e(vec![
            Atom::diag(&[(GQ::int(2, 0), ExtNat::Fin(2))]).unwrap(),
            Atom::diag(&[(GQ::int(5, 0), ExtNat::Inf)]).unwrap(),
        ]);
        let c = OracleConfig { cap_per_atom: 1, ..cfg() };
        let t = truncate((&d).into(), 3, &c).unwrap();
        assert_eq!(t.dim(), 3);
        let diag: Vec<f64> = (0..3).map(|i| t.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![2.0, 2.0, 5.0]);
    }

    #[test]
    fn shift_estimates() {
        let s = e(vec![Atom::ushift()]);
        let np = estimate_point_data((&s).into(), &GQ::zero(), &[64, 128, 256], &cfg()).unwrap();
        assert_eq!((np.alpha_est, np.beta_est), (0, 1));
        assert_eq!(np.closed_evidence, GapEvidence::StableGap);
        let np = estimate_point_data((&s).into(), &GQ::one(), &[64, 128, 256], &cfg()).unwrap();
        assert_eq!(np.closed_evidence, GapEvidence::ShrinkingGap);
    }

    #[test]
    fn geometric_kernel_detected() {
        let sa = e(vec![Atom::ushift_adj()]);
        let l = GQ::new(Rat::new(3, 4), Rat::new(1, 8));
        let np = estimate_point_data((&sa).into(), &l, &[64, 128, 256], &cfg()).unwrap();
        assert_eq!((np.alpha_est, np.beta_est), (1, 0));
        assert_eq!(np.closed_evidence, GapEvidence::StableGap);
    }

    #[test]
    fn capped_marker() {
        let d = e(vec![Atom::diag(&[(GQ::zero(), ExtNat::Inf)]).unwrap()]);
        let np = estimate_point_data((&d).into(), &GQ::zero(), &[64, 128], &cfg()).unwrap();
        assert_eq!(np.alpha_est, 8);
        assert!(np.alpha_capped && np.beta_capped);
    }

    #[test]
    fn config_errors() {
        let s = e(vec![Atom::ushift()]);
        assert!(estimate_point_data((&s).into(), &GQ::zero(), &[64], &cfg()).is_err());
        let big = OracleConfig { max_dim: 10, ..cfg() };
        assert!(matches!(truncate((&s).into(), 64, &big), Err(Error::SizeOverflow { .. })));
    }

    #[test]
    fn completed_block() {
        use crate::completion::fli_completable;
        let s = e(vec![Atom::ushift()]);
        let sa = e(vec![Atom::ushift_adj()]);
        let cert = fli_completable(&s, &sa, &GQ::zero()).certificate.unwrap();
        let op = Operand::Block { a: &s, b: &sa, c: DenseCorner::Cert(&cert) };
        let t = truncate(op, 2, &cfg()).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let expected = [[0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 0.0]];
        for (r, row) in expected.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                assert_eq!(t.matrix()[(r, c)], one * x, "({r}, {c})");
            }
        }
        let np = estimate_point_data(op, &GQ::zero(), &[64, 128, 256], &cfg()).unwrap();
        assert_eq!((np.alpha_est, np.beta_est), (0, 0));
        assert_eq!(np.closed_evidence, GapEvidence::StableGap);
        assert!(np.looks_fli() && np.looks_fri());

        let z = GQ::zero();
        for c in [DenseCorner::Zero, DenseCorner::Cert(&cert)] {
            assert!(factorization_identity_check(&s, &sa, c, 64, &z, &cfg()).unwrap() <= 1e-10);
        }
        let d = e(vec![Atom::diag(&[(GQ::one(), ExtNat::Inf)]).unwrap()]);
        assert_eq!(factorization_identity_check(&d, &d, DenseCorner::Zero, 16, &z, &cfg()).unwrap(), 0.0);
    }
}
