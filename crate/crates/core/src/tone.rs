//! Market-wide tone factor: the capitalization-weighted average of the tones
//! of the firms that have tone on a given day. Firms without articles that
//! day simply do not participate; the weights renormalize over those present.

use alloc::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorError {
    /// No firm has tone on this day.
    NoFirms,
    /// A firm with tone lacks a positive market capitalization.
    BadWeight { firm: u32 },
}

impl core::fmt::Display for FactorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FactorError::NoFirms => write!(f, "no firm tones for this day"),
            FactorError::BadWeight { firm } => {
                write!(f, "firm {firm} has tone but no positive market cap")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    MarketCap,
    Equal,
}

/// One day's factor value and the weights that produced it.
#[derive(Clone, Debug)]
pub struct DayFactor {
    pub value: f64,
    /// Normalized weight per participating firm; sums to 1.
    pub weights: BTreeMap<u32, f64>,
}

/// Weighted average tone over the firms with tone today.
///
/// `caps` must provide a positive capitalization for every firm in
/// `day_tones` when weighting by market cap; extra firms in `caps` are
/// ignored.
pub fn compute_factor(
    day_tones: &BTreeMap<u32, f64>,
    caps: &BTreeMap<u32, f64>,
    weighting: Weighting,
) -> Result<DayFactor, FactorError> {
    if day_tones.is_empty() {
        return Err(FactorError::NoFirms);
    }
    let mut weights = BTreeMap::new();
    let mut total = 0.0;
    for &firm in day_tones.keys() {
        let w = match weighting {
            Weighting::Equal => 1.0,
            Weighting::MarketCap => match caps.get(&firm) {
                Some(&c) if c > 0.0 => c,
                _ => return Err(FactorError::BadWeight { firm }),
            },
        };
        weights.insert(firm, w);
        total += w;
    }
    let mut value = 0.0;
    for (firm, w) in weights.iter_mut() {
        *w /= total;
        value += *w * day_tones[firm];
    }
    Ok(DayFactor { value, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(pairs: &[(u32, f64)]) -> BTreeMap<u32, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn single_firm_weight_one() {
        let f = compute_factor(&m(&[(1, 0.3)]), &m(&[(1, 5.0)]), Weighting::MarketCap).unwrap();
        assert!((f.value - 0.3).abs() < 1e-15);
        assert_eq!(f.weights.len(), 1);
        assert!((f.weights[&1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cap_weighted_hand_example() {
        let f = compute_factor(
            &m(&[(1, 0.2), (2, -0.2)]),
            &m(&[(1, 3.0), (2, 1.0), (9, 100.0)]),
            Weighting::MarketCap,
        )
        .unwrap();
        assert!((f.value - 0.1).abs() < 1e-15);
        let wsum: f64 = f.weights.values().sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_caps_average() {
        let f = compute_factor(
            &m(&[(1, 0.5), (2, 0.1)]),
            &m(&[(1, 7.0), (2, 7.0)]),
            Weighting::MarketCap,
        )
        .unwrap();
        assert!((f.value - 0.3).abs() < 1e-15);
    }

    #[test]
    fn equal_weighting_ignores_caps() {
        let f = compute_factor(
            &m(&[(1, 0.4), (2, 0.0)]),
            &m(&[(1, 1000.0), (2, 1.0)]),
            Weighting::Equal,
        )
        .unwrap();
        assert!((f.value - 0.2).abs() < 1e-15);
    }

    #[test]
    fn cap_rescale_invariance() {
        let tones = m(&[(1, 0.12), (2, -0.4), (3, 0.05)]);
        let caps = m(&[(1, 2.0), (2, 5.0), (3, 1.5)]);
        let scaled: BTreeMap<u32, f64> = caps.iter().map(|(&k, &v)| (k, v * 137.0)).collect();
        let a = compute_factor(&tones, &caps, Weighting::MarketCap).unwrap();
        let b = compute_factor(&tones, &scaled, Weighting::MarketCap).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn convex_combination_bounds() {
        let tones = m(&[(1, -0.3), (2, 0.1), (3, 0.25)]);
        let caps = m(&[(1, 1.0), (2, 9.0), (3, 2.5)]);
        let f = compute_factor(&tones, &caps, Weighting::MarketCap).unwrap();
        assert!(f.value >= -0.3 && f.value <= 0.25);
    }

    #[test]
    fn errors() {
        assert_eq!(
            compute_factor(&BTreeMap::new(), &BTreeMap::new(), Weighting::MarketCap).unwrap_err(),
            FactorError::NoFirms
        );
        assert_eq!(
            compute_factor(&m(&[(4, 0.1)]), &m(&[(4, 0.0)]), Weighting::MarketCap).unwrap_err(),
            FactorError::BadWeight { firm: 4 }
        );
        assert_eq!(
            compute_factor(&m(&[(4, 0.1)]), &BTreeMap::new(), Weighting::MarketCap).unwrap_err(),
            FactorError::BadWeight { firm: 4 }
        );
    }
}
