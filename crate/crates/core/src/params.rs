use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};

/// Model parameters: `q` colors, edge weight `w`, branching bound `d`
/// (maximum degree `d + 1`, root degree at most `d`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PottsParams {
    q: usize,
    w: f64,
    d: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    q: usize,
    w: f64,
    d: usize,
}

impl TryFrom<RawParams> for PottsParams {
    type Error = PottsError;

    fn try_from(raw: RawParams) -> Result<Self> {
        Self::new(raw.q, raw.w, raw.d)
    }
}

impl PottsParams {
    pub fn new(q: usize, w: f64, d: usize) -> Result<Self> {
        if q < 2 {
            return Err(PottsError::InvalidParams(format!("q = {q} must be at least 2")));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(PottsError::InvalidParams(format!("w = {w} must lie in [0, 1]")));
        }
        if d < 2 {
            return Err(PottsError::InvalidParams(format!("d = {d} must be at least 2")));
        }
        Ok(Self { q, w, d })
    }

    /// Parameters on the threshold family `w = 1 - alpha * q / (d + 1)`.
    pub fn from_alpha(q: usize, d: usize, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(PottsError::InvalidParams(format!("alpha = {alpha} must be non-negative")));
        }
        Self::new(q, 1.0 - alpha * q as f64 / (d as f64 + 1.0), d)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `a = (d + 1) / q`.
    pub fn a(&self) -> f64 {
        (self.d as f64 + 1.0) / self.q as f64
    }

    /// Inverse of the threshold parametrisation: `alpha = (1 - w)(d + 1) / q`.
    pub fn alpha(&self) -> f64 {
        (1.0 - self.w) * (self.d as f64 + 1.0) / self.q as f64
    }

    pub fn with_w(&self, w: f64) -> Result<Self> {
        Self::new(self.q, w, self.d)
    }

    pub fn with_d(&self, d: usize) -> Result<Self> {
        Self::new(self.q, self.w, d)
    }

    pub fn require_positive_w(&self) -> Result<()> {
        if self.w <= 0.0 {
            return Err(PottsError::Precondition("w must be strictly positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(PottsParams::new(1, 0.5, 3).is_err());
        assert!(PottsParams::new(3, 1.5, 3).is_err());
        assert!(PottsParams::new(3, -0.1, 3).is_err());
        assert!(PottsParams::new(3, 0.5, 1).is_err());
        assert!(PottsParams::new(3, f64::NAN, 3).is_err());
    }

    #[test]
    fn alpha_round_trip() {
        let p = PottsParams::from_alpha(3, 5, 1.0).unwrap();
        assert_eq!(p.w(), 0.5);
        assert_eq!(p.a(), 2.0);
        assert!((p.alpha() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deserialization_validates() {
        let p: PottsParams = serde_json::from_str(r#"{"q": 3, "w": 0.5, "d": 4}"#).unwrap();
        assert_eq!(p, PottsParams::new(3, 0.5, 4).unwrap());
        assert!(serde_json::from_str::<PottsParams>(r#"{"q": 1, "w": 0.5, "d": 4}"#).is_err());
        assert!(serde_json::from_str::<PottsParams>(r#"{"q": 3, "w": 0.5, "d": 4, "x": 1}"#).is_err());
    }
}
