use rand::Rng;

use mcomp::classifier::{completion_condition, SpectrumKind, Target};
use mcomp::completion::{
    block_lemma_violations, completable, corollary_consistency_check, decision_matches_region, delta_region,
    eta_check, fill_zone, fli_completable, fri_completable, mc_point_data, union_spectrum_region, w_forms_check,
    w_constituents, w_region, BlockMatrixExpr, CertCase, Corner, DeltaForm, McData, Verdict, WForm,
};
use mcomp::gen::{random_expr, random_lambda, rng, ExprParams};
use mcomp::numeric::ExtNat;
use mcomp::operator::{point_data, Atom, OperatorExpr};
use mcomp::region::{equals, intersect, is_empty, is_subset, member};
use mcomp::spectra::spectrum_region;

fn pairs(seed: u64, n: usize) -> Vec<(OperatorExpr, OperatorExpr)> {
    let mut r = rng(seed);
    let p = ExprParams::default();
    (0..n).map(|_| (random_expr(&mut r, &p), random_expr(&mut r, &p))).collect()
}

#[test]
fn completable_set_is_complement_of_intersection_spectrum() {
    for (a, b) in pairs(11, 30) {
        for t in [Target::Fli, Target::Fri] {
            let v = corollary_consistency_check(&a, &b, t, DeltaForm::Dual).unwrap();
            assert_eq!(v, Verdict::Exact, "{a} / {b} / {t:?}");
        }
    }
}

#[test]
fn pointwise_decisions_match_regions() {
    let mut r = rng(12);
    for (a, b) in pairs(12, 20) {
        for _ in 0..6 {
            let pick_a = r.gen_bool(0.5);
            let l = random_lambda(&mut r, if pick_a { &a } else { &b });
            for t in [Target::Fli, Target::Fri] {
                assert!(decision_matches_region(&a, &b, &l, t).unwrap(), "{a} / {b} at {l}");
            }
        }
    }
}

#[test]
fn fri_by_duality_matches_direct_conditions() {
    let mut r = rng(13);
    for (a, b) in pairs(13, 60) {
        for _ in 0..5 {
            let l = random_lambda(&mut r, &a);
            let direct = completion_condition(&point_data(&a, &l), &point_data(&b, &l), Target::Fri);
            let via_dual = fri_completable(&a, &b, &l);
            assert_eq!(direct.iter().all(|&x| x), via_dual.decision, "{a} / {b} at {l}");
        }
    }
}

#[test]
fn w_forms_agree_and_sit_in_the_fill_zone() {
    for (a, b) in pairs(14, 30) {
        for t in [Target::Fli, Target::Fri] {
            assert_eq!(w_forms_check(&a, &b, t).unwrap(), Verdict::Exact, "{a} / {b} / {t:?}");
            let w = w_region(&a, &b, t, WForm::Main).unwrap();
            assert!(is_subset(&w, &fill_zone(&a, &b, t).unwrap()).unwrap(), "{a} / {b}");
            let kind = if t == Target::Fli { SpectrumKind::Fli } else { SpectrumKind::Fri };
            let owner = if t == Target::Fli { &a } else { &b };
            let overlap = intersect(&w, &spectrum_region(owner, kind).unwrap());
            assert!(is_empty(&overlap).unwrap(), "{a} / {b}");
        }
    }
}

#[test]
fn hulls_of_zero_corner_agree() {
    for (a, b) in pairs(15, 30) {
        for t in [Target::Fli, Target::Fri] {
            assert_eq!(eta_check(&a, &b, t).unwrap(), Verdict::Exact, "{a} / {b}");
        }
    }
}

#[test]
fn constructed_corners_give_fli_data() {
    let mut r = rng(16);
    let mut seen = 0;
    for (a, b) in pairs(16, 80) {
        let l = random_lambda(&mut r, &b);
        let rep = fli_completable(&a, &b, &l);
        let Some(cert) = rep.certificate else { continue };
        seen += 1;
        let m = BlockMatrixExpr::new(a.clone(), b.clone(), Corner::Cert(cert.clone()));
        let McData::Exact(pm) = mc_point_data(&m, &l) else { panic!("deferred at its own point") };
        assert!(pm.alpha.is_zero() && pm.beta_alg().is_finite(), "{a} / {b} at {l}");
        if let CertCase::Finite { k } = cert.case {
            assert_eq!(ExtNat::Fin(k), point_data(&b, &l).alpha);
            assert_eq!(cert.pairs.len() as u64, k);
        }
        let pa = point_data(&a, &l);
        let pb = point_data(&b, &l);
        assert!(block_lemma_violations(&pm, &pa, &pb).is_empty(), "{a} / {b} at {l}");
    }
    assert!(seen >= 5, "too few completable instances ({seen})");
}

#[test]
fn zero_corner_satisfies_block_lemma() {
    let mut r = rng(17);
    for (a, b) in pairs(17, 60) {
        let l = random_lambda(&mut r, &a);
        let m = BlockMatrixExpr::zero(a.clone(), b.clone());
        let McData::Exact(pm) = mc_point_data(&m, &l) else { unreachable!() };
        let v = block_lemma_violations(&pm, &point_data(&a, &l), &point_data(&b, &l));
        assert!(v.is_empty(), "{a} / {b} at {l}: {v:?}");
    }
}

#[test]
fn invertible_target_needs_matching_dimensions() {
    let mut r = rng(18);
    for (a, b) in pairs(18, 60) {
        let l = random_lambda(&mut r, &a);
        let inv = completable(&a, &b, &l, Target::Invertible);
        // an invertible completion is both FLI and FRI
        if inv.decision {
            assert!(fli_completable(&a, &b, &l).decision && fri_completable(&a, &b, &l).decision);
        }
    }
}

// The FRI counterpart of Δ as printed compares β(A-λ) with α(A-λ) where the
// mirror of the FLI formula has α(B-λ). The second clause only matters where
// the first holds, and there β(A-λ) = α(B-λ) forces both to be infinite, so
// the two readings give the same set.
#[test]
fn printed_and_dual_fri_delta_agree() {
    for (a, b) in pairs(19, 40) {
        let dual = delta_region(&a, &b, Target::Fri, DeltaForm::Dual).unwrap();
        let printed = delta_region(&a, &b, Target::Fri, DeltaForm::Printed).unwrap();
        assert!(equals(&dual, &printed).unwrap(), "{a} / {b}");
        assert_eq!(corollary_consistency_check(&a, &b, Target::Fri, DeltaForm::Printed).unwrap(), Verdict::Exact);
    }
}

// The finite constituent of W for FRI as printed asks for ρ_SF-(A) where the
// theorem has ρ_SF+(A). Here A - 0 = S ⊕ (S*)^∞ has infinite nullity and
// deficiency 1, so only the printed reading puts 0 in that constituent.
#[test]
fn printed_fri_w_constituent_is_larger() {
    let a = OperatorExpr::new(vec![Atom::ushift(), Atom::ushift_adj().with_mult(ExtNat::Inf)]).unwrap();
    let b = OperatorExpr::new(vec![Atom::ushift_adj()]).unwrap();
    let (_, dual) = w_constituents(&a, &b, Target::Fri, false).unwrap();
    let (_, printed) = w_constituents(&a, &b, Target::Fri, true).unwrap();
    assert!(is_subset(&dual, &printed).unwrap());
    assert!(member(&printed, &mcomp::numeric::GQ::zero()));
    assert!(!member(&dual, &mcomp::numeric::GQ::zero()));
}

#[test]
fn zero_corner_spectrum_is_the_union() {
    for (a, b) in pairs(20, 20) {
        for t in [Target::Fli, Target::Fri] {
            let u = union_spectrum_region(&a, &b, t).unwrap();
            let m = mcomp::completion::zero_corner_spectrum(&a, &b, t).unwrap();
            assert!(equals(&u, &m).unwrap());
        }
    }
}
