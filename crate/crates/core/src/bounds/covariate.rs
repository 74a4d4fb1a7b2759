use super::{BoundStatus, BoundsResult};
use crate::error::{Error, Result};

/// Intersection of per-stratum bounds under the exclusion restriction that
/// the target does not vary across strata.
pub fn covariate_bounds(per_stratum: &[(String, BoundsResult)]) -> Result<BoundsResult> {
    let (_, first) = per_stratum.first().ok_or(Error::EmptyInput)?;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut clamped = false;
    for (label, b) in per_stratum {
        if b.status != BoundStatus::Informative {
            return Err(Error::NotInformative(label.clone()));
        }
        if b.target != first.target || b.outcome_range != first.outcome_range {
            return Err(Error::MixedTargets);
        }
        lower = lower.max(b.lower);
        upper = upper.min(b.upper);
        clamped |= b.clamped;
    }
    let mut out = first.clone();
    out.lower = lower;
    out.upper = upper;
    out.clamped = clamped;
    if lower > upper {
        out.status = BoundStatus::Refuted;
        out.note = Some("strata bounds do not intersect: exclusion restriction rejected".into());
    } else {
        out.note = Some(format!("intersection over {} strata", per_stratum.len()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundaryEstimates, OutcomeRange};
    use crate::bounds::{type2_bounds, TypeAssumption};

    fn interval(lower: f64, upper: f64) -> BoundsResult {
        BoundsResult {
            lower,
            upper,
            target: TypeAssumption::Type2.target().into(),
            assumption: TypeAssumption::Type2,
            status: BoundStatus::Informative,
            clamped: false,
            outcome_range: OutcomeRange::unit(),
            note: None,
        }
    }

    fn strata(v: &[(f64, f64)]) -> Vec<(String, BoundsResult)> {
        v.iter()
            .enumerate()
            .map(|(i, &(l, u))| (format!("w{i}"), interval(l, u)))
            .collect()
    }

    #[test]
    fn intersection() {
        let b = covariate_bounds(&strata(&[(0.0, 0.5), (0.2, 0.8)])).unwrap();
        assert_eq!((b.lower, b.upper), (0.2, 0.5));
        assert_eq!(b.status, BoundStatus::Informative);
    }

    #[test]
    fn single_stratum_unchanged() {
        let b = covariate_bounds(&strata(&[(0.1, 0.3)])).unwrap();
        assert_eq!((b.lower, b.upper), (0.1, 0.3));
    }

    #[test]
    fn disjoint_strata_refute() {
        let b = covariate_bounds(&strata(&[(0.0, 0.1), (0.3, 0.5)])).unwrap();
        assert_eq!(b.status, BoundStatus::Refuted);
    }

    #[test]
    fn errors() {
        assert_eq!(covariate_bounds(&[]).unwrap_err(), Error::EmptyInput);
        let mut s = strata(&[(0.0, 0.5), (0.2, 0.8)]);
        s[1].1.target = TypeAssumption::Type4.target().into();
        assert_eq!(covariate_bounds(&s).unwrap_err(), Error::MixedTargets);
        let refuted = type2_bounds(
            &BoundaryEstimates::from_ratio(0.5, 0.5, 1.5).unwrap(),
            0.0,
            1.0,
        )
        .unwrap();
        let s = vec![
            ("a".to_string(), interval(0.0, 1.0)),
            ("b".to_string(), refuted),
        ];
        assert_eq!(
            covariate_bounds(&s).unwrap_err(),
            Error::NotInformative("b".into())
        );
    }
}
