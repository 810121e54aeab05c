use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-width of the `identity_band` tent around the diagonal.
pub const IDENTITY_BAND_WIDTH: f64 = 0.1;

/// Continuous score `f` on the unit square, the sufficient-statistic kernel
/// of the exponential family `exp(θ Σ_i f(i/n, π(i)/n))`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScoreFunction {
    /// `|x − y|`
    Footrule,
    /// `(x − y)²`
    SpearmanRank,
    /// `max(0, 1 − |x − y| / w)`, `w = IDENTITY_BAND_WIDTH`
    IdentityBand,
    /// User-supplied `k × k` cell values (row index along `x`), piecewise constant.
    Grid { k: usize, values: Vec<f64> },
}

impl ScoreFunction {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "footrule" => Ok(Self::Footrule),
            "spearman_rank" => Ok(Self::SpearmanRank),
            "identity_band" => Ok(Self::IdentityBand),
            other => Err(Error::Spec(format!(
                "unknown score function {other:?} (expected footrule, spearman_rank, identity_band or a grid)"
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Footrule => "footrule",
            Self::SpearmanRank => "spearman_rank",
            Self::IdentityBand => "identity_band",
            Self::Grid { .. } => "grid",
        }
    }

    pub fn grid(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Spec("score grid must be a non-empty square matrix".into()));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Spec("score grid must be finite".into()));
        }
        Ok(Self::Grid { k, values })
    }

    pub fn eval<T: Real>(&self, x: T, y: T) -> T {
        match self {
            Self::Footrule => (x - y).abs(),
            Self::SpearmanRank => (x - y) * (x - y),
            Self::IdentityBand => (T::one() - (x - y).abs() / T::lit(IDENTITY_BAND_WIDTH)).max(T::zero()),
            Self::Grid { k, values } => {
                let cell = |t: T| {
                    let idx = (t * T::from_count(*k)).ceil().to_usize().unwrap_or(0);
                    idx.clamp(1, *k) - 1
                };
                T::lit(values[cell(x) * k + cell(y)])
            }
        }
    }

    /// `sup |f|` over a `(res+1)²` lattice; finite for every valid score.
    pub fn sup_abs(&self, res: usize) -> f64 {
        let r = res as f64;
        let mut sup = 0.0f64;
        for i in 0..=res {
            for j in 0..=res {
                sup = sup.max(self.eval(i as f64 / r, j as f64 / r).abs());
            }
        }
        sup
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScoreRepr {
    Named(String),
    Grid { grid: Vec<Vec<f64>> },
}

impl Serialize for ScoreFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Grid { k, values } => ScoreRepr::Grid {
                grid: values.chunks(*k).map(|r| r.to_vec()).collect(),
            }
            .serialize(s),
            named => ScoreRepr::Named(named.id().to_string()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ScoreFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ScoreRepr::deserialize(d)? {
            ScoreRepr::Named(id) => Self::from_id(&id),
            ScoreRepr::Grid { grid } => Self::grid(grid),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        assert!((ScoreFunction::Footrule.eval(0.2f64, 0.7) - 0.5).abs() < 1e-15);
        assert!((ScoreFunction::SpearmanRank.eval(0.2f64, 0.7) - 0.25).abs() < 1e-15);
        assert_eq!(ScoreFunction::IdentityBand.eval(0.5, 0.5), 1.0);
        assert_eq!(ScoreFunction::IdentityBand.eval(0.5, 0.7), 0.0);
        assert!(ScoreFunction::from_id("nope").is_err());
    }

    #[test]
    fn bounded_on_square() {
        assert!((ScoreFunction::Footrule.sup_abs(64) - 1.0).abs() < 1e-15);
        assert!((ScoreFunction::SpearmanRank.sup_abs(64) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_forms() {
        let f: ScoreFunction = serde_json::from_str(r#""spearman_rank""#).unwrap();
        assert_eq!(f, ScoreFunction::SpearmanRank);
        let g: ScoreFunction = serde_json::from_str(r#"{"grid":[[1,2],[3,4]]}"#).unwrap();
        assert_eq!(g.eval(0.9, 0.1), 3.0);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"grid":[[1.0,2.0],[3.0,4.0]]}"#);
        assert!(serde_json::from_str::<ScoreFunction>(r#"{"grid":[[1,2]]}"#).is_err());
    }
}
