//! Spectra of operator expressions as exact regions.

use crate::classifier::{classify, SpectrumKind};
use crate::error::Result;
use crate::operator::{boundary_predicates, OperatorExpr};
use crate::region::{equals, eta, region_from_labels, CellDecomp, RegionExpr};

/// The set of λ where `expr - λ` is not in the class `kind`, built by
/// labeling the cells of the operator's own arrangement.
pub fn spectrum_region(expr: &OperatorExpr, kind: SpectrumKind) -> Result<RegionExpr> {
    let decomp = CellDecomp::new(&boundary_predicates(expr))?;
    let labels: Vec<bool> = (0..decomp.cells().len())
        .map(|i| !classify(expr, &decomp.locator(i), kind))
        .collect();
    region_from_labels(&decomp, &labels)
}

/// `η(σ(T)) = η(σ_FLI(T)) = η(σ_FRI(T))`.
pub fn eta_spectrum_equality(expr: &OperatorExpr) -> Result<bool> {
    let full = eta(&spectrum_region(expr, SpectrumKind::Spec)?)?;
    for kind in [SpectrumKind::Fli, SpectrumKind::Fri] {
        if !equals(&full, &eta(&spectrum_region(expr, kind)?)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}
