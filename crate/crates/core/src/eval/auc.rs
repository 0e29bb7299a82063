use crate::error::{Error, Result};

/// AUC as an exact fraction `numerator / denominator` with the denominator
/// `2 * P * N`, so ties contribute one half without rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AucFraction {
    pub numerator: u128,
    pub denominator: u128,
}

impl AucFraction {
    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Mann-Whitney AUC with average ranks on ties. Ranks are doubled so all
/// arithmetic stays integral.
pub fn auc_fraction(scores: &[f64], labels: &[bool]) -> Result<AucFraction> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore(i));
    }
    let p = labels.iter().filter(|&&l| l).count() as u128;
    let n = labels.len() as u128 - p;
    if p == 0 || n == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Finite values only, so partial_cmp is total here and -0.0 ties with 0.0.
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    let mut doubled_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Positions start..end hold 1-based ranks start+1..=end; twice their mean:
        let doubled = (start + 1 + end) as u128;
        let positives = order[start..end].iter().filter(|&&i| labels[i]).count() as u128;
        doubled_rank_sum += doubled * positives;
        start = end;
    }
    Ok(AucFraction { numerator: doubled_rank_sum - p * (p + 1), denominator: 2 * p * n })
}

pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    auc_fraction(scores, labels).map(AucFraction::value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        assert_eq!(auc(&[0.9, 0.8, 0.3, 0.1], &[true, false, true, false]).unwrap(), 0.75);
    }

    #[test]
    fn ties_and_extremes() {
        assert_eq!(auc(&[1.0; 6], &[true, false, true, false, false, false]).unwrap(), 0.5);
        assert_eq!(auc(&[5.0, 4.0, 1.0, 0.0], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.0, 1.0], &[true, false]).unwrap(), 0.0);
        assert_eq!(auc(&[-0.0, 0.0], &[true, false]).unwrap(), 0.5);
    }

    #[test]
    fn errors() {
        assert!(matches!(auc(&[1.0, 2.0], &[true, true]), Err(Error::SingleClass)));
        assert!(matches!(auc(&[1.0], &[true, false]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(auc(&[f64::NAN, 1.0], &[true, false]), Err(Error::NonFiniteScore(0))));
    }
}
