//! Regions built from the joint data of `A - λ` and `B - λ`.

use serde::{Deserialize, Serialize};

use crate::classifier::{classify_data, SpectrumKind, Target};
use crate::error::{Error, Result};
use crate::numeric::ExtNat;
use crate::operator::{boundary_predicates, point_data, OperatorExpr, PointData};
use crate::region::{region_from_labels, CellDecomp, RegionExpr};

/// How to read the FRI formulas whose printed form breaks the duality with
/// the FLI ones. `Dual` is the mirror image of the FLI formula; `Printed`
/// evaluates the text literally.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaForm {
    #[default]
    Dual,
    Printed,
}

/// The two equivalent descriptions of the removable set `W`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WForm {
    Main,
    Alt,
}

/// `{λ : f(data(A-λ), data(B-λ))}` labeled on the joint arrangement.
pub fn pair_region<F>(a: &OperatorExpr, b: &OperatorExpr, f: F) -> Result<RegionExpr>
where
    F: Fn(&PointData, &PointData) -> bool,
{
    let mut preds = boundary_predicates(a);
    preds.extend(boundary_predicates(b));
    let d = CellDecomp::new(&preds)?;
    let labels: Vec<bool> = (0..d.cells().len())
        .map(|i| {
            let at = d.locator(i);
            f(&point_data(a, &at), &point_data(b, &at))
        })
        .collect();
    region_from_labels(&d, &labels)
}

fn fli_only(target: Target) -> Result<()> {
    match target {
        Target::Invertible => Err(Error::Precondition("defined for the fli and fri targets only".into())),
        _ => Ok(()),
    }
}

fn delta_holds(pa: &PointData, pb: &PointData, target: Target, form: DeltaForm) -> bool {
    let (alpha_b, beta_a) = (pb.alpha, pa.beta_alg());
    let inf = ExtNat::Inf;
    match target {
        Target::Fli => {
            (alpha_b > beta_a || beta_a == inf) && (alpha_b != beta_a || beta_a.is_finite())
        }
        Target::Fri => {
            let first = beta_a > alpha_b || alpha_b == inf;
            let second = match form {
                DeltaForm::Dual => beta_a != alpha_b || alpha_b.is_finite(),
                DeltaForm::Printed => beta_a != alpha_b || (beta_a == pa.alpha && beta_a.is_finite()),
            };
            first && second
        }
        Target::Invertible => alpha_b != beta_a,
    }
}

/// The set `Δ` of points where condition (c) of the completion theorem fails.
pub fn delta_region(a: &OperatorExpr, b: &OperatorExpr, target: Target, form: DeltaForm) -> Result<RegionExpr> {
    pair_region(a, b, |pa, pb| delta_holds(pa, pb, target, form))
}

/// `⋂_C σ_target(M_C)` written as a union of spectra of `A`, `B` and `Δ`.
/// For the invertible target this is `σ_l(A) ∪ σ_r(B) ∪ {α(B-λ) ≠ β(A-λ)}`.
pub fn intersection_spectrum_region(
    a: &OperatorExpr,
    b: &OperatorExpr,
    target: Target,
    form: DeltaForm,
) -> Result<RegionExpr> {
    pair_region(a, b, |pa, pb| {
        let outside = match target {
            Target::Fli => !classify_data(pa, SpectrumKind::Left) || !classify_data(pb, SpectrumKind::Lsf),
            Target::Fri => !classify_data(pb, SpectrumKind::Right) || !classify_data(pa, SpectrumKind::Usf),
            Target::Invertible => {
                !classify_data(pa, SpectrumKind::Left) || !classify_data(pb, SpectrumKind::Right)
            }
        };
        outside || delta_holds(pa, pb, target, form)
    })
}

/// Membership in the two constituents of `W`: both dimensions infinite, and
/// the finite range. `literal` swaps `ρ_SF+(A)` for the printed `ρ_SF-(A)`
/// in the finite FRI constituent.
pub(crate) fn w_parts(pa: &PointData, pb: &PointData, target: Target, form: WForm, literal: bool) -> (bool, bool) {
    use SpectrumKind::*;
    let (alpha_b, beta_a) = (pb.alpha, pa.beta_alg());
    let both_inf = alpha_b == ExtNat::Inf && beta_a == ExtNat::Inf;
    let pos = |x: ExtNat| !x.is_zero();
    match target {
        Target::Fli => {
            let base = classify_data(pa, Left) && classify_data(pb, Lsf);
            let finite = match form {
                WForm::Main => base && pos(alpha_b) && alpha_b <= beta_a && beta_a.is_finite(),
                WForm::Alt => {
                    classify_data(pa, Fli) && classify_data(pb, Essential) && pos(alpha_b) && alpha_b <= beta_a
                }
            };
            (base && both_inf, finite)
        }
        _ => {
            let base = classify_data(pb, Right) && classify_data(pa, Usf);
            let finite = match form {
                WForm::Main => {
                    let base2 = if literal {
                        classify_data(pb, Right) && classify_data(pa, Lsf)
                    } else {
                        base
                    };
                    base2 && pos(beta_a) && beta_a <= alpha_b && alpha_b.is_finite()
                }
                WForm::Alt => {
                    classify_data(pb, Fri) && classify_data(pa, Essential) && pos(beta_a) && beta_a <= alpha_b
                }
            };
            (base && both_inf, finite)
        }
    }
}

/// The set `W` with `σ(A) ∪ σ(B) = σ(M_C) ∪ W` for the target class.
pub fn w_region(a: &OperatorExpr, b: &OperatorExpr, target: Target, form: WForm) -> Result<RegionExpr> {
    fli_only(target)?;
    pair_region(a, b, |pa, pb| {
        let (x, y) = w_parts(pa, pb, target, form, false);
        x || y
    })
}

/// The two constituents of `W` in the main form, as separate regions.
pub fn w_constituents(
    a: &OperatorExpr,
    b: &OperatorExpr,
    target: Target,
    literal: bool,
) -> Result<(RegionExpr, RegionExpr)> {
    fli_only(target)?;
    let first = pair_region(a, b, |pa, pb| w_parts(pa, pb, target, WForm::Main, literal).0)?;
    let second = pair_region(a, b, |pa, pb| w_parts(pa, pb, target, WForm::Main, literal).1)?;
    Ok((first, second))
}

/// `σ_target(A) ∪ σ_target(B)` for the FLI or FRI class.
pub fn union_spectrum_region(a: &OperatorExpr, b: &OperatorExpr, target: Target) -> Result<RegionExpr> {
    let kind = target_kind(target)?;
    pair_region(a, b, |pa, pb| !classify_data(pa, kind) || !classify_data(pb, kind))
}

pub(crate) fn target_kind(target: Target) -> Result<SpectrumKind> {
    fli_only(target)?;
    Ok(if target == Target::Fli { SpectrumKind::Fli } else { SpectrumKind::Fri })
}

/// `σ_target(M_0)` from the direct-sum data.
pub fn zero_corner_spectrum(a: &OperatorExpr, b: &OperatorExpr, target: Target) -> Result<RegionExpr> {
    let kind = target_kind(target)?;
    pair_region(a, b, |pa, pb| !classify_data(&pa.direct_sum(pb), kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::GQ;
    use crate::operator::Atom;
    use crate::region::{equals, is_empty, RegionExpr};

    fn e(atoms: Vec<Atom>) -> OperatorExpr {
        OperatorExpr::new(atoms).unwrap()
    }

    fn s() -> OperatorExpr {
        e(vec![Atom::ushift()])
    }

    fn sa() -> OperatorExpr {
        e(vec![Atom::ushift_adj()])
    }

    fn d1() -> OperatorExpr {
        e(vec![Atom::diag(&[(GQ::one(), ExtNat::Inf)]).unwrap()])
    }

    #[test]
    fn delta_examples() {
        let circle = RegionExpr::unit_circle();
        for t in [Target::Fli, Target::Fri] {
            let delta = delta_region(&s(), &sa(), t, DeltaForm::Dual).unwrap();
            assert!(equals(&delta, &circle).unwrap(), "{t:?}");
            let inter = intersection_spectrum_region(&s(), &sa(), t, DeltaForm::Dual).unwrap();
            assert!(equals(&inter, &circle).unwrap(), "{t:?}");
        }
        assert!(is_empty(&delta_region(&d1(), &d1(), Target::Fli, DeltaForm::Dual).unwrap()).unwrap());
        let inter = intersection_spectrum_region(&d1(), &d1(), Target::Fli, DeltaForm::Dual).unwrap();
        assert!(equals(&inter, &RegionExpr::point(GQ::one())).unwrap());
    }

    #[test]
    fn w_examples() {
        let disk = RegionExpr::open_unit_disk();
        for form in [WForm::Main, WForm::Alt] {
            let w = w_region(&s(), &sa(), Target::Fli, form).unwrap();
            assert!(equals(&w, &disk).unwrap(), "{form:?}");
            let w = w_region(&s(), &sa(), Target::Fri, form).unwrap();
            assert!(equals(&w, &disk).unwrap(), "{form:?}");
        }
        assert!(is_empty(&w_region(&d1(), &d1(), Target::Fli, WForm::Main).unwrap()).unwrap());
        assert!(w_region(&s(), &sa(), Target::Invertible, WForm::Main).is_err());
    }
}
