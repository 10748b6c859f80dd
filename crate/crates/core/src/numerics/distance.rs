use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Euclidean,
    L1,
}

/// Per-component weighted metric on summary vectors.
///
/// Euclidean weights multiply squared differences; L1 weights multiply
/// absolute differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedDistanceSpec {
    pub kind: DistanceKind,
    pub weights: Vec<f64>,
}

impl WeightedDistanceSpec {
    pub fn new(kind: DistanceKind, weights: Vec<f64>) -> Result<Self> {
        let spec = Self { kind, weights };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit weights on `dim` components.
    pub fn unweighted(kind: DistanceKind, dim: usize) -> Self {
        Self {
            kind,
            weights: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::domain("distance weights must be finite and non-negative"));
        }
        if !self.weights.iter().any(|&w| w > 0.0) {
            return Err(Error::domain("at least one distance weight must be positive"));
        }
        Ok(())
    }
}

pub fn weighted_distance(a: &[f64], b: &[f64], spec: &WeightedDistanceSpec) -> Result<f64> {
    if a.len() != b.len() || a.len() != spec.weights.len() {
        return Err(Error::shape(format!(
            "distance between vectors of length {} and {} with {} weights",
            a.len(),
            b.len(),
            spec.weights.len()
        )));
    }
    let terms = a.iter().zip(b).zip(&spec.weights);
    Ok(match spec.kind {
        DistanceKind::Euclidean => terms.map(|((x, y), w)| w * (x - y) * (x - y)).sum::<f64>().sqrt(),
        DistanceKind::L1 => terms.map(|((x, y), w)| w * (x - y).abs()).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn euclid(w: &[f64]) -> WeightedDistanceSpec {
        WeightedDistanceSpec::new(DistanceKind::Euclidean, w.to_vec()).unwrap()
    }

    #[test]
    fn examples() {
        for kind in [DistanceKind::Euclidean, DistanceKind::L1] {
            let s = WeightedDistanceSpec::new(kind, vec![0.3, 2.0]).unwrap();
            assert_eq!(weighted_distance(&[1.0, 2.0], &[1.0, 2.0], &s).unwrap(), 0.0);
        }
        assert_eq!(weighted_distance(&[0.0, 0.0], &[3.0, 4.0], &euclid(&[1.0, 1.0])).unwrap(), 5.0);
        let d = weighted_distance(&[0.0, 0.0], &[1.0, 10.0], &euclid(&[1.0, 0.01])).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let l1 = WeightedDistanceSpec::new(DistanceKind::L1, vec![1.0, 0.5]).unwrap();
        assert_eq!(weighted_distance(&[0.0, 0.0], &[-1.0, 4.0], &l1).unwrap(), 3.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            weighted_distance(&[0.0], &[0.0, 1.0], &euclid(&[1.0, 1.0])),
            Err(Error::Shape(_))
        ));
        assert!(WeightedDistanceSpec::new(DistanceKind::L1, vec![0.0, 0.0]).is_err());
        assert!(WeightedDistanceSpec::new(DistanceKind::L1, vec![-1.0, 1.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn euclidean_triangle_inequality(
            (a, b, c, w) in (1usize..6).prop_flat_map(|d| (
                prop::collection::vec(-100.0..100.0f64, d),
                prop::collection::vec(-100.0..100.0f64, d),
                prop::collection::vec(-100.0..100.0f64, d),
                prop::collection::vec(0.01..10.0f64, d),
            ))
        ) {
            let s = euclid(&w);
            let ab = weighted_distance(&a, &b, &s).unwrap();
            let bc = weighted_distance(&b, &c, &s).unwrap();
            let ac = weighted_distance(&a, &c, &s).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12 * (1.0 + ab + bc));
            prop_assert_eq!(ab, weighted_distance(&b, &a, &s).unwrap());
        }
    }
}
