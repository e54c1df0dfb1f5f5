//! Completions of `M_C = (A C; 0 B)`: decisions, witness corners, and the
//! point data of the completed matrix.

mod checks;
mod regions;

pub use checks::{
    block_lemma_violations, corollary_consistency_check, decision_matches_region, empty_w_check, eta_check,
    fill_zone, filling_holes_check, no_interior_corollary_check, s_class_proposition_check, sandwich_check,
    w_forms_check, HypothesisCheck, SampleConfig, Verdict,
};

pub use regions::{
    delta_region, intersection_spectrum_region, pair_region, union_spectrum_region, w_constituents, w_region,
    zero_corner_spectrum, DeltaForm, WForm,
};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::classifier::{completion_condition, Target};
use crate::error::{Error, Result};
use crate::numeric::{extnat_add, ExtNat, Rat, GQ};
use crate::operator::{
    adjoint, boundary_predicates, cokernel_basis, kernel_basis, point_data, BasisAddress, OperatorExpr, PointData,
};
use crate::region::{region_from_labels, CellDecomp, Locator, RegionExpr};

/// Whether the certificate pairs finitely many vectors or two infinite streams.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CertCase {
    Finite { k: u64 },
    Infinite,
}

/// Rule used for the infinite case: the `i`-th kernel address of `B - λ`
/// goes to the `i`-th cokernel address of `A - λ`.
pub const ROUND_ROBIN_RULE: &str = "round_robin_diagonal";

/// The corner `C` as a partial isometry `N(B-λ) → R(A-λ)^⊥` with weight 1 on
/// each pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompletionCertificate {
    pub target: Target,
    pub lambda: GQ,
    pub case: CertCase,
    /// `(kernel address of B - λ, cokernel address of A - λ)`. Empty in the
    /// infinite case, where [`CompletionCertificate::pairing`] generates them.
    pub pairs: Vec<(BasisAddress, BasisAddress)>,
}

impl CompletionCertificate {
    /// Pairs of the partial isometry; unbounded in the infinite case.
    pub fn pairing(
        &self,
        a: &OperatorExpr,
        b: &OperatorExpr,
    ) -> Result<Box<dyn Iterator<Item = (BasisAddress, BasisAddress)>>> {
        match self.case {
            CertCase::Finite { .. } => Ok(Box::new(self.pairs.clone().into_iter())),
            CertCase::Infinite => {
                let ker = kernel_basis(b, &self.lambda)?;
                let coker = cokernel_basis(a, &self.lambda)?;
                Ok(Box::new(ker.zip(coker)))
            }
        }
    }

    pub fn rank(&self) -> ExtNat {
        match self.case {
            CertCase::Finite { k } => ExtNat::Fin(k),
            CertCase::Infinite => ExtNat::Inf,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    target: Target,
    lambda: GQ,
    case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<Vec<(BasisAddress, BasisAddress)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<String>,
}

impl Serialize for CompletionCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let infinite = self.case == CertCase::Infinite;
        CertificateJson {
            target: self.target,
            lambda: self.lambda.clone(),
            case: if infinite { "infinite" } else { "finite" }.into(),
            pairs: (!infinite).then(|| self.pairs.clone()),
            rule: infinite.then(|| ROUND_ROBIN_RULE.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CompletionCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = CertificateJson::deserialize(d)?;
        let (case, pairs) = match j.case.as_str() {
            "finite" => {
                let pairs = j.pairs.ok_or_else(|| D::Error::custom("finite certificate without pairs"))?;
                (CertCase::Finite { k: pairs.len() as u64 }, pairs)
            }
            "infinite" => {
                if j.rule.as_deref() != Some(ROUND_ROBIN_RULE) {
                    return Err(D::Error::custom("unknown pairing rule"));
                }
                (CertCase::Infinite, Vec::new())
            }
            other => return Err(D::Error::custom(format!("unknown case `{other}`"))),
        };
        Ok(CompletionCertificate { target: j.target, lambda: j.lambda, case, pairs })
    }
}

/// The corner of a block matrix.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    Zero,
    Cert(CompletionCertificate),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockMatrixExpr {
    pub a: OperatorExpr,
    pub b: OperatorExpr,
    pub c: Corner,
}

impl BlockMatrixExpr {
    pub fn new(a: OperatorExpr, b: OperatorExpr, c: Corner) -> BlockMatrixExpr {
        BlockMatrixExpr { a, b, c }
    }

    pub fn zero(a: OperatorExpr, b: OperatorExpr) -> BlockMatrixExpr {
        BlockMatrixExpr::new(a, b, Corner::Zero)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CompletionReport {
    pub target: Target,
    #[serde(serialize_with = "ser_decision")]
    pub decision: bool,
    /// Labels among `a`, `b`, `c` of the conditions that fail.
    pub failed_conditions: Vec<char>,
    #[serde(serialize_with = "ser_case")]
    pub case: Option<CertCase>,
    pub certificate: Option<CompletionCertificate>,
}

fn ser_decision<S: serde::Serializer>(d: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(if *d { "yes" } else { "no" })
}

fn ser_case<S: serde::Serializer>(c: &Option<CertCase>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match c {
        None => s.serialize_none(),
        Some(CertCase::Infinite) => s.serialize_str("infinite"),
        Some(CertCase::Finite { .. }) => s.serialize_str("finite"),
    }
}

fn failed(conds: [bool; 3]) -> Vec<char> {
    ['a', 'b', 'c'].into_iter().zip(conds).filter(|(_, ok)| !ok).map(|(c, _)| c).collect()
}

fn no(target: Target, conds: [bool; 3]) -> CompletionReport {
    CompletionReport { target, decision: false, failed_conditions: failed(conds), case: None, certificate: None }
}

/// Builds `J : N(B-λ) → R(A-λ)^⊥` once the conditions hold. `A - λ` is left
/// invertible and `B - λ` has closed range here, so both streams exist.
fn construct(a: &OperatorExpr, b: &OperatorExpr, lambda: &GQ, target: Target) -> Result<CompletionReport> {
    let ker = kernel_basis(b, lambda)?;
    let coker = cokernel_basis(a, lambda)?;
    let (case, pairs) = match ker.dim() {
        ExtNat::Fin(k) => (CertCase::Finite { k }, ker.zip(coker).collect()),
        ExtNat::Inf => (CertCase::Infinite, Vec::new()),
    };
    let cert = CompletionCertificate { target, lambda: lambda.clone(), case, pairs };
    Ok(CompletionReport {
        target,
        decision: true,
        failed_conditions: Vec::new(),
        case: Some(case),
        certificate: Some(cert),
    })
}

/// `at` seen through complex conjugation.
struct Conj<'a, L: ?Sized>(&'a L);

impl<L: Locator + ?Sized> Locator for Conj<'_, L> {
    fn circle_sign(&self, center: &GQ, r2: &Rat) -> Ordering {
        self.0.circle_sign(&center.conj(), r2)
    }

    fn at_point(&self, p: &GQ) -> bool {
        self.0.at_point(&p.conj())
    }
}

/// Conditions (a), (b), (c) of the completion theorem for `target` at a
/// point or cell. The FRI conditions are those of the FLI problem for
/// `(B*, A*)` at the conjugate point.
pub fn conditions<L: Locator + ?Sized>(a: &OperatorExpr, b: &OperatorExpr, at: &L, target: Target) -> [bool; 3] {
    match target {
        Target::Fri => {
            let at = Conj(at);
            completion_condition(&point_data(&adjoint(b), &at), &point_data(&adjoint(a), &at), Target::Fli)
        }
        _ => completion_condition(&point_data(a, at), &point_data(b, at), target),
    }
}

/// The set of λ at which a completion into the target class exists,
/// labeled cell by cell with [`conditions`].
pub fn completable_region(a: &OperatorExpr, b: &OperatorExpr, target: Target) -> Result<RegionExpr> {
    let mut preds = boundary_predicates(a);
    preds.extend(boundary_predicates(b));
    let d = CellDecomp::new(&preds)?;
    let labels: Vec<bool> = (0..d.cells().len())
        .map(|i| conditions(a, b, &d.locator(i), target).iter().all(|&ok| ok))
        .collect();
    region_from_labels(&d, &labels)
}

fn decide(a: &OperatorExpr, b: &OperatorExpr, lambda: &GQ, target: Target) -> CompletionReport {
    let conds = conditions(a, b, lambda, target);
    if conds.iter().any(|ok| !ok) {
        return no(target, conds);
    }
    construct(a, b, lambda, target).expect("conditions guarantee closed ranges")
}

/// Is there a `C` with `M_C - λ` Fredholm left invertible?
pub fn fli_completable(a: &OperatorExpr, b: &OperatorExpr, lambda: &GQ) -> CompletionReport {
    decide(a, b, lambda, Target::Fli)
}

/// Is there a `C` with `M_C - λ` Fredholm right invertible? Answered through
/// the adjoint problem `(B*, A*)` at `λ̄`, whose certificate pairs kernel
/// vectors of `A*` with cokernel vectors of `B*`; swapped, those are the
/// cokernel vectors of `A` and kernel vectors of `B`.
pub fn fri_completable(a: &OperatorExpr, b: &OperatorExpr, lambda: &GQ) -> CompletionReport {
    let dual = fli_completable(&adjoint(b), &adjoint(a), &lambda.conj());
    let certificate = dual.certificate.map(|c| CompletionCertificate {
        target: Target::Fri,
        lambda: lambda.clone(),
        case: c.case,
        pairs: c.pairs.into_iter().map(|(x, y)| (y, x)).collect(),
    });
    CompletionReport { target: Target::Fri, certificate, ..dual }
}

pub fn invertible_completable(a: &OperatorExpr, b: &OperatorExpr, lambda: &GQ) -> CompletionReport {
    decide(a, b, lambda, Target::Invertible)
}

pub fn completable(a: &OperatorExpr, b: &OperatorExpr, lambda: &GQ, target: Target) -> CompletionReport {
    match target {
        Target::Fli => fli_completable(a, b, lambda),
        Target::Fri => fri_completable(a, b, lambda),
        Target::Invertible => invertible_completable(a, b, lambda),
    }
}

/// Point data of `M_C - λ`, or `Deferred` where it is not known exactly.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum McData {
    Exact(PointData),
    Deferred,
}

pub fn mc_point_data(m: &BlockMatrixExpr, lambda: &GQ) -> McData {
    let pa = point_data(&m.a, lambda);
    let pb = point_data(&m.b, lambda);
    let cert = match &m.c {
        Corner::Zero => return McData::Exact(pa.direct_sum(&pb)),
        Corner::Cert(c) if &c.lambda == lambda => c,
        Corner::Cert(_) => return McData::Deferred,
    };
    let zero = ExtNat::ZERO;
    let pd = match (cert.target, cert.case) {
        (Target::Fli, CertCase::Finite { k }) => {
            PointData::new(zero, extnat_add(pa.beta_alg().saturating_sub(k), pb.beta_alg()), true)
        }
        (Target::Fli, CertCase::Infinite) => PointData::new(zero, pb.beta_alg(), true),
        (Target::Fri, CertCase::Finite { k }) => {
            PointData::new(extnat_add(pa.alpha, pb.alpha.saturating_sub(k)), zero, true)
        }
        (Target::Fri, CertCase::Infinite) => PointData::new(pa.alpha, zero, true),
        (Target::Invertible, _) => PointData::INVERTIBLE,
    };
    McData::Exact(pd)
}

/// Checks `α(B-λ) + β(M_C-λ) = β(B-λ) + β(A-λ)`. The identity is only claimed
/// when `M_C - λ` and `A - λ` are left invertible, so anything else is a
/// precondition error rather than `false`.
pub fn harte_identity_check(a: &OperatorExpr, b: &OperatorExpr, c: &Corner, lambda: &GQ) -> Result<bool> {
    let m = BlockMatrixExpr::new(a.clone(), b.clone(), c.clone());
    let pm = match mc_point_data(&m, lambda) {
        McData::Exact(p) => p,
        McData::Deferred => {
            return Err(Error::Precondition("corner certified at a different point".into()))
        }
    };
    let pa = point_data(a, lambda);
    let pb = point_data(b, lambda);
    if !(pm.alpha.is_zero() && pm.closed) {
        return Err(Error::Precondition("M_C - λ is not left invertible".into()));
    }
    if !(pa.alpha.is_zero() && pa.closed) {
        return Err(Error::Precondition("A - λ is not left invertible".into()));
    }
    if !pb.closed {
        return Err(Error::Precondition("B - λ does not have closed range".into()));
    }
    Ok(extnat_add(pb.alpha, pm.beta_alg()) == extnat_add(pb.beta_alg(), pa.beta_alg()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Atom, BasisVector};
    use ExtNat::{Fin, Inf};

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
        e(vec![Atom::diag(&[(GQ::one(), Inf)]).unwrap()])
    }

    fn cert_corner(r: &CompletionReport) -> Corner {
        Corner::Cert(r.certificate.clone().unwrap())
    }

    #[test]
    fn fli_examples() {
        let z = GQ::zero();
        let r = fli_completable(&s(), &sa(), &z);
        assert!(r.decision);
        assert_eq!(r.case, Some(CertCase::Finite { k: 1 }));
        let basis0 = |atom| BasisAddress { atom, copy: 0, vector: BasisVector::Basis(0) };
        assert_eq!(r.certificate.unwrap().pairs, vec![(basis0(0), basis0(0))]);

        let r = fli_completable(&sa(), &s(), &z);
        assert!(!r.decision);
        assert_eq!(r.failed_conditions, vec!['a']);

        let s_inf = e(vec![Atom::ushift().with_mult(Inf)]);
        let sa_inf = e(vec![Atom::ushift_adj().with_mult(Inf)]);
        let r = fli_completable(&s_inf, &sa_inf, &z);
        assert!(r.decision);
        assert_eq!(r.case, Some(CertCase::Infinite));

        let r = fli_completable(&d1(), &d1(), &z);
        assert!(r.decision);
        assert_eq!(r.case, Some(CertCase::Finite { k: 0 }));
    }

    #[test]
    fn fri_examples() {
        let z = GQ::zero();
        let r = fri_completable(&s(), &sa(), &z);
        assert!(r.decision);
        assert_eq!(r.certificate.as_ref().unwrap().target, Target::Fri);
        assert_eq!(r.certificate.unwrap().pairs.len(), 1);
        // S is not right invertible, and β(S) = 1 > α(S) = 0
        let r = fri_completable(&s(), &s(), &z);
        assert!(!r.decision);
        assert_eq!(r.failed_conditions, vec!['a', 'c']);
        let s_inf = e(vec![Atom::ushift().with_mult(Inf)]);
        let sa_inf = e(vec![Atom::ushift_adj().with_mult(Inf)]);
        assert_eq!(fri_completable(&s_inf, &sa_inf, &z).case, Some(CertCase::Infinite));
    }

    #[test]
    fn invertible_examples() {
        let z = GQ::zero();
        assert!(invertible_completable(&s(), &sa(), &z).decision);
        let ss = e(vec![Atom::ushift().with_mult(Fin(2))]);
        let r = invertible_completable(&ss, &sa(), &z);
        assert!(!r.decision);
        assert_eq!(r.failed_conditions, vec!['c']);
        assert!(fli_completable(&ss, &sa(), &z).decision);
        assert!(invertible_completable(&d1(), &d1(), &z).decision);
    }

    #[test]
    fn block_point_data() {
        let z = GQ::zero();
        let r = fli_completable(&s(), &sa(), &z);
        let m = BlockMatrixExpr::new(s(), sa(), cert_corner(&r));
        assert_eq!(mc_point_data(&m, &z), McData::Exact(PointData::INVERTIBLE));
        assert_eq!(mc_point_data(&m, &GQ::real(crate::numeric::Rat::new(1, 2))), McData::Deferred);
        let m0 = BlockMatrixExpr::zero(s(), sa());
        assert_eq!(mc_point_data(&m0, &z), McData::Exact(PointData::new(Fin(1), Fin(1), true)));

        let s_inf = e(vec![Atom::ushift().with_mult(Inf)]);
        let sa_inf = e(vec![Atom::ushift_adj().with_mult(Inf)]);
        let r = fli_completable(&s_inf, &sa_inf, &z);
        let m = BlockMatrixExpr::new(s_inf, sa_inf, cert_corner(&r));
        assert_eq!(mc_point_data(&m, &z), McData::Exact(PointData::INVERTIBLE));
    }

    #[test]
    fn harte_examples() {
        let z = GQ::zero();
        let c = cert_corner(&fli_completable(&s(), &sa(), &z));
        assert!(harte_identity_check(&s(), &sa(), &c, &z).unwrap());
        let ss = e(vec![Atom::ushift().with_mult(Fin(2))]);
        let c = cert_corner(&fli_completable(&ss, &sa(), &z));
        assert!(harte_identity_check(&ss, &sa(), &c, &z).unwrap());
        assert!(harte_identity_check(&d1(), &d1(), &Corner::Zero, &z).unwrap());
        // M_0 = S ⊕ S* has a kernel at 0
        assert!(matches!(
            harte_identity_check(&s(), &sa(), &Corner::Zero, &z),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn certificate_json_round_trip() {
        let z = GQ::zero();
        for r in [
            fli_completable(&s(), &sa(), &z),
            fli_completable(&e(vec![Atom::ushift().with_mult(Inf)]), &e(vec![Atom::ushift_adj().with_mult(Inf)]), &z),
        ] {
            let cert = r.certificate.unwrap();
            let json = serde_json::to_string(&cert).unwrap();
            let back: CompletionCertificate = serde_json::from_str(&json).unwrap();
            assert_eq!(back, cert);
        }
        let json = serde_json::to_value(fli_completable(&sa(), &s(), &z)).unwrap();
        assert_eq!(json["decision"], "no");
        assert_eq!(json["failed_conditions"][0], "a");
    }
}
