//! Verification of the spectral identities for concrete pairs.
//!
//! With the zero corner every set involved is an exact region and the
//! identities are decided by region equality. With a constructed corner the
//! completed matrix is only known exactly at the certificate's point; other
//! points are sampled away from all boundaries and answered by the oracle.

use rayon::prelude::*;
use serde::Serialize;

use super::regions::{target_kind, w_parts, zero_corner_spectrum};
use super::{
    completable_region, completable, intersection_spectrum_region, mc_point_data, union_spectrum_region,
    w_constituents, w_region, BlockMatrixExpr, Corner, DeltaForm, McData, WForm,
};
use crate::classifier::{classify_data, s_class_membership, BetaConvention, SClass, SpectrumKind, Target};
use crate::error::Result;
use crate::gen::{random_lambda_clear, rng};
use crate::numeric::{Rat, GQ};
use crate::operator::{boundary_predicates, point_data, OperatorExpr, PointData};
use crate::oracle::{estimate_point_data, OracleConfig};
use crate::region::{
    complement, difference, equals, eta, holes, interior_is_empty, intersect, is_empty, is_subset, member,
    union, RegionExpr,
};
use crate::spectra::spectrum_region;

/// How sampled checks pick and evaluate their points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleConfig {
    pub samples: usize,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub oracle: OracleConfig,
}

impl Default for SampleConfig {
    fn default() -> SampleConfig {
        SampleConfig { samples: 25, seed: 0, sizes: vec![64, 128, 256], oracle: OracleConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Decided by exact computation alone.
    Exact,
    /// Exact where possible, plus this many oracle samples that agreed.
    SampledPass { samples: usize },
    Fail { reason: String, at: Option<GQ> },
    /// The oracle could not decide a sample.
    Inconclusive { reason: String, at: Option<GQ> },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Exact | Verdict::SampledPass { .. })
    }

    fn fail(reason: impl Into<String>, at: Option<&GQ>) -> Verdict {
        Verdict::Fail { reason: reason.into(), at: at.cloned() }
    }
}

/// A hypothesis and, when it holds, whether the conclusion was confirmed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: bool,
    pub conclusion: Option<Verdict>,
}

impl HypothesisCheck {
    /// The implication holds: either the hypothesis fails or the conclusion passed.
    pub fn holds(&self) -> bool {
        !self.hypothesis || self.conclusion.as_ref().is_some_and(Verdict::passed)
    }
}

fn all_pass(checks: &[(bool, &str)]) -> Verdict {
    match checks.iter().find(|(ok, _)| !ok) {
        Some((_, why)) => Verdict::fail(*why, None),
        None => Verdict::Exact,
    }
}

/// Point data of `A - λ`, `B - λ`, and whether `M_C - λ` lies in
/// `σ_target(M_C)`; `None` for the last when the oracle is undecided.
struct PointView {
    pa: PointData,
    pb: PointData,
    in_mc: Option<bool>,
    exact: bool,
}

fn view(a: &OperatorExpr, b: &OperatorExpr, c: &Corner, lambda: &GQ, target: Target, cfg: &SampleConfig) -> Result<PointView> {
    let kind = target_kind(target)?;
    let pa = point_data(a, lambda);
    let pb = point_data(b, lambda);
    let m = BlockMatrixExpr::new(a.clone(), b.clone(), c.clone());
    Ok(match mc_point_data(&m, lambda) {
        McData::Exact(pm) => PointView { pa, pb, in_mc: Some(!classify_data(&pm, kind)), exact: true },
        McData::Deferred => {
            let np = estimate_point_data((&m).into(), lambda, &cfg.sizes, &cfg.oracle)?;
            PointView { pa, pb, in_mc: np.outside(target), exact: false }
        }
    })
}

/// The certificate's point followed by `cfg.samples` points at distance at
/// least 1/8 from every boundary of `A` and `B`.
fn sample_points(a: &OperatorExpr, b: &OperatorExpr, c: &Corner, cfg: &SampleConfig) -> Vec<GQ> {
    let mut preds = boundary_predicates(a);
    preds.extend(boundary_predicates(b));
    let mut r = rng(cfg.seed);
    let d = Rat::new(1, 8);
    let mut out = Vec::new();
    if let Corner::Cert(cert) = c {
        out.push(cert.lambda.clone());
    }
    out.extend((0..cfg.samples).map(|_| random_lambda_clear(&mut r, &preds, &d)));
    out
}

/// Runs `claim` at every sample point. `claim` sees the point data and
/// membership in `σ_target(M_C)` and returns a failure reason.
fn pointwise<F>(a: &OperatorExpr, b: &OperatorExpr, c: &Corner, target: Target, cfg: &SampleConfig, claim: F) -> Result<Verdict>
where
    F: Fn(&GQ, &PointData, &PointData, bool) -> Result<Option<String>>,
{
    let points = sample_points(a, b, c, cfg);
    // oracle work fans out; the scan below keeps the reported point deterministic
    let views: Vec<_> = points.par_iter().map(|l| view(a, b, c, l, target, cfg)).collect();
    let mut sampled = 0;
    for (lambda, v) in points.into_iter().zip(views) {
        let v = v?;
        let Some(in_mc) = v.in_mc else {
            return Ok(Verdict::Inconclusive { reason: "oracle sections disagree".into(), at: Some(lambda) });
        };
        if let Some(why) = claim(&lambda, &v.pa, &v.pb, in_mc)? {
            return Ok(Verdict::fail(why, Some(&lambda)));
        }
        if !v.exact {
            sampled += 1;
        }
    }
    Ok(if sampled == 0 { Verdict::Exact } else { Verdict::SampledPass { samples: sampled } })
}

/// `σ_d(A) ∩ σ_l(B)` for FLI, `σ_p(B) ∩ σ_r(A)` for FRI: where holes may be filled.
pub fn fill_zone(a: &OperatorExpr, b: &OperatorExpr, target: Target) -> Result<RegionExpr> {
    let (x, kx, y, ky) = match target {
        Target::Fli => (a, SpectrumKind::Defect, b, SpectrumKind::Left),
        _ => (b, SpectrumKind::Point, a, SpectrumKind::Right),
    };
    target_kind(target)?;
    Ok(intersect(&spectrum_region(x, kx)?, &spectrum_region(y, ky)?))
}

/// The operator whose holes get filled: `A` for FLI, `B` for FRI.
fn hole_owner<'a>(a: &'a OperatorExpr, b: &'a OperatorExpr, target: Target) -> &'a OperatorExpr {
    if target == Target::Fli {
        a
    } else {
        b
    }
}

/// `σ(A) ∪ σ(B) = σ(M_C) ∪ W` and `η(σ(A) ∪ σ(B)) = η(σ(M_C))` for the
/// target class, plus the claim that what `W` adds lies in holes of the
/// hole owner's spectrum inside the fill zone.
pub fn filling_holes_check(
    a: &OperatorExpr,
    b: &OperatorExpr,
    c: &Corner,
    target: Target,
    cfg: &SampleConfig,
) -> Result<Verdict> {
    let kind = target_kind(target)?;
    let owner_holes = holes(&spectrum_region(hole_owner(a, b, target), kind)?)?;
    let zone = fill_zone(a, b, target)?;
    let allowed = intersect(&owner_holes, &zone);
    let w = w_region(a, b, target, WForm::Main)?;
    let u = union_spectrum_region(a, b, target)?;
    match c {
        Corner::Zero => {
            let m = zero_corner_spectrum(a, b, target)?;
            let added = difference(&w, &m);
            Ok(all_pass(&[
                (equals(&u, &union(&m, &w))?, "union of spectra differs from σ(M_C) ∪ W"),
                (equals(&eta(&u)?, &eta(&m)?)?, "hulls differ"),
                (is_subset(&added, &allowed)?, "W adds points outside the holes of the fill zone"),
            ]))
        }
        Corner::Cert(_) => pointwise(a, b, c, target, cfg, |l, pa, pb, in_mc| {
            let in_u = !classify_data(pa, kind) || !classify_data(pb, kind);
            let (w1, w2) = w_parts(pa, pb, target, WForm::Main, false);
            if in_u != (in_mc || w1 || w2) {
                return Ok(Some("union of spectra differs from σ(M_C) ∪ W".into()));
            }
            if in_u && !in_mc && !member(&allowed, l) {
                return Ok(Some("filled point outside the holes of the fill zone".into()));
            }
            Ok(None)
        }),
    }
}

/// `lower ⊆ σ(M_C) ⊆ σ(A) ∪ σ(B)`, with lower bound
/// `σ_FLI(A) ∖ (σ_d(A) ∩ σ_l(B))` or `σ_FRI(B) ∖ (σ_p(B) ∩ σ_r(A))`.
pub fn sandwich_check(a: &OperatorExpr, b: &OperatorExpr, c: &Corner, target: Target, cfg: &SampleConfig) -> Result<Verdict> {
    let kind = target_kind(target)?;
    let zone = fill_zone(a, b, target)?;
    let lower = difference(&spectrum_region(hole_owner(a, b, target), kind)?, &zone);
    let upper = union_spectrum_region(a, b, target)?;
    match c {
        Corner::Zero => {
            let m = zero_corner_spectrum(a, b, target)?;
            Ok(all_pass(&[
                (is_subset(&lower, &m)?, "lower bound not contained in σ(M_C)"),
                (is_subset(&m, &upper)?, "σ(M_C) exceeds the union of spectra"),
            ]))
        }
        Corner::Cert(_) => pointwise(a, b, c, target, cfg, |l, _, _, in_mc| {
            if member(&lower, l) && !in_mc {
                return Ok(Some("lower bound not contained in σ(M_C)".into()));
            }
            if in_mc && !member(&upper, l) {
                return Ok(Some("σ(M_C) exceeds the union of spectra".into()));
            }
            Ok(None)
        }),
    }
}

/// `η(σ(A) ∪ σ(B)) = η(σ(M_0))`.
pub fn eta_check(a: &OperatorExpr, b: &OperatorExpr, target: Target) -> Result<Verdict> {
    let u = union_spectrum_region(a, b, target)?;
    let m = zero_corner_spectrum(a, b, target)?;
    Ok(all_pass(&[(equals(&eta(&u)?, &eta(&m)?)?, "hulls differ")]))
}

/// The completion theorem quantified over λ against the closed form of
/// `⋂_C σ(M_C)`: their complements must agree as regions.
pub fn corollary_consistency_check(a: &OperatorExpr, b: &OperatorExpr, target: Target, form: DeltaForm) -> Result<Verdict> {
    let yes = completable_region(a, b, target)?;
    let inter = intersection_spectrum_region(a, b, target, form)?;
    Ok(all_pass(&[(equals(&complement(&inter), &yes)?, "completable set differs from the complement of ⋂ σ(M_C)")]))
}

/// At `λ`, the decision agrees with membership in `⋂_C σ(M_C)`.
pub fn decision_matches_region(a: &OperatorExpr, b: &OperatorExpr, lambda: &GQ, target: Target) -> Result<bool> {
    let inter = intersection_spectrum_region(a, b, target, DeltaForm::Dual)?;
    Ok(completable(a, b, lambda, target).decision != member(&inter, lambda))
}

/// `W` is empty, and for the given corner `σ(A) ∪ σ(B) = σ(M_C)`.
fn equality_conclusion(a: &OperatorExpr, b: &OperatorExpr, c: &Corner, target: Target, cfg: &SampleConfig) -> Result<Verdict> {
    if !is_empty(&w_region(a, b, target, WForm::Main)?)? {
        return Ok(Verdict::fail("W is not empty", None));
    }
    let kind = target_kind(target)?;
    match c {
        Corner::Zero => {
            let ok = equals(&union_spectrum_region(a, b, target)?, &zero_corner_spectrum(a, b, target)?)?;
            Ok(all_pass(&[(ok, "union of spectra differs from σ(M_0)")]))
        }
        Corner::Cert(_) => pointwise(a, b, c, target, cfg, |_, pa, pb, in_mc| {
            let in_u = !classify_data(pa, kind) || !classify_data(pb, kind);
            Ok((in_u != in_mc).then(|| "union of spectra differs from σ(M_C)".to_string()))
        }),
    }
}

fn hypothesis_check(
    hypothesis: bool,
    a: &OperatorExpr,
    b: &OperatorExpr,
    c: &Corner,
    target: Target,
    cfg: &SampleConfig,
) -> Result<HypothesisCheck> {
    let conclusion = if hypothesis { Some(equality_conclusion(a, b, c, target, cfg)?) } else { None };
    Ok(HypothesisCheck { hypothesis, conclusion })
}

/// If the fill zone has no interior, no corner changes the union of spectra.
pub fn no_interior_corollary_check(
    a: &OperatorExpr,
    b: &OperatorExpr,
    c: &Corner,
    target: Target,
    cfg: &SampleConfig,
) -> Result<HypothesisCheck> {
    let hyp = interior_is_empty(&fill_zone(a, b, target)?)?;
    hypothesis_check(hyp, a, b, c, target, cfg)
}

/// If both constituents of `W` are empty, no corner changes the union of
/// spectra. `form` selects the printed or the dual reading of the FRI
/// statement.
pub fn empty_w_check(
    a: &OperatorExpr,
    b: &OperatorExpr,
    c: &Corner,
    target: Target,
    form: DeltaForm,
    cfg: &SampleConfig,
) -> Result<HypothesisCheck> {
    let (w1, w2) = w_constituents(a, b, target, form == DeltaForm::Printed)?;
    let hyp = is_empty(&w1)? && is_empty(&w2)?;
    hypothesis_check(hyp, a, b, c, target, cfg)
}

/// `A ∈ S_+` (FLI) or `B ∈ S_-` (FRI) forces equality for every corner.
pub fn s_class_proposition_check(
    a: &OperatorExpr,
    b: &OperatorExpr,
    c: &Corner,
    target: Target,
    conv: BetaConvention,
    cfg: &SampleConfig,
) -> Result<HypothesisCheck> {
    let hyp = match target_kind(target)? {
        SpectrumKind::Fli => s_class_membership(a, SClass::Plus, conv)?,
        _ => s_class_membership(b, SClass::Minus, conv)?,
    };
    hypothesis_check(hyp, a, b, c, target, cfg)
}

/// Main and alternative descriptions of `W` agree.
pub fn w_forms_check(a: &OperatorExpr, b: &OperatorExpr, target: Target) -> Result<Verdict> {
    let main = w_region(a, b, target, WForm::Main)?;
    let alt = w_region(a, b, target, WForm::Alt)?;
    Ok(all_pass(&[(equals(&main, &alt)?, "the two forms of W differ")]))
}

/// Labels of the implications of the block lemma that fail for data of
/// `M_C - λ`, `A - λ` and `B - λ`:
/// (a) `M_C` left invertible ⇒ `A` left invertible;
/// (b) `M_C` right invertible ⇒ `B` right invertible;
/// (c) `M_C` upper semi-Fredholm ⇒ `A` upper semi-Fredholm;
/// (d) `M_C` lower semi-Fredholm ⇒ `B` lower semi-Fredholm;
/// (e) `M_C` Fredholm ⇒ (`A` Fredholm ⇔ `B` Fredholm).
pub fn block_lemma_violations(pm: &PointData, pa: &PointData, pb: &PointData) -> Vec<char> {
    use SpectrumKind::*;
    let imp = |p: bool, q: bool| !p || q;
    let checks = [
        ('a', imp(classify_data(pm, Left), classify_data(pa, Left))),
        ('b', imp(classify_data(pm, Right), classify_data(pb, Right))),
        ('c', imp(classify_data(pm, Usf), classify_data(pa, Usf))),
        ('d', imp(classify_data(pm, Lsf), classify_data(pb, Lsf))),
        ('e', imp(classify_data(pm, Essential), classify_data(pa, Essential) == classify_data(pb, Essential))),
    ];
    checks.into_iter().filter(|(_, ok)| !ok).map(|(c, _)| c).collect()
}
