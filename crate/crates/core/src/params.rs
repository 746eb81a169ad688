//! Scalar parameters shared by every stage of the construction.

use serde::{Deserialize, Serialize};

/// All pipeline scalars. Shell fields (`p`, `d`, `q`, `r_star`) are absent
/// for handcrafted fixture sets; stage fields are filled in as stages run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub d: Option<u32>,
    pub p: Option<u64>,
    pub k: u32,
    pub q: Option<u64>,
    #[serde(rename = "N")]
    pub universe: u64,
    pub r_star: Option<u64>,
    /// Distance of every designated pair in the current host (Δ).
    #[serde(rename = "Delta")]
    pub pair_distance: Option<u32>,
    pub ell: Option<u32>,
    /// Distance of every obstacle-product pair (D).
    #[serde(rename = "D")]
    pub op_distance: Option<u32>,
    pub fixture: bool,
}

impl ConstructionParams {
    /// Parameters for a Behrend-shell set over `[q^d]` with `q = (k+1)p`.
    pub fn shell(p: u64, d: u32, k: u32) -> Self {
        let q = (k as u64 + 1) * p;
        ConstructionParams {
            epsilon: None,
            delta: None,
            d: Some(d),
            p: Some(p),
            k,
            q: Some(q),
            universe: q.pow(d),
            r_star: None,
            pair_distance: None,
            ell: None,
            op_distance: None,
            fixture: false,
        }
    }

    /// Parameters for a handcrafted set inside `[universe]`.
    pub fn handcrafted(universe: u64, k: u32) -> Self {
        ConstructionParams {
            epsilon: None,
            delta: None,
            d: None,
            p: None,
            k,
            q: None,
            universe,
            r_star: None,
            pair_distance: None,
            ell: None,
            op_distance: None,
            fixture: true,
        }
    }

    /// Fills `ell = 3Δ` and `D = Δ·ell + (Δ − 1)` from the host distance.
    pub fn with_obstacle(mut self, delta: u32) -> Self {
        let ell = 3 * delta;
        self.pair_distance = Some(delta);
        self.ell = Some(ell);
        self.op_distance = Some(delta * ell + (delta - 1));
        self
    }

    /// Checks the consistency invariants; returns a description of the first
    /// broken one.
    pub fn check(&self) -> Result<(), String> {
        if self.k < 1 {
            return Err("k must be at least 1".into());
        }
        match (self.p, self.d, self.q) {
            (Some(p), Some(d), Some(q)) => {
                if p < 2 || d < 1 {
                    return Err(format!("need p >= 2 and d >= 1, got p={p}, d={d}"));
                }
                if q != (self.k as u64 + 1) * p {
                    return Err(format!("q={q} differs from (k+1)p"));
                }
                if Some(self.universe) != q.checked_pow(d) {
                    return Err(format!("N={} differs from q^d", self.universe));
                }
            }
            (None, None, None) => {}
            _ => return Err("p, d and q must be given together".into()),
        }
        if let (Some(eps), Some(d)) = (self.epsilon, self.d) {
            if d != dimension_for(eps) {
                return Err(format!("d={d} differs from ceil(3/epsilon)"));
            }
            if let Some(delta) = self.delta {
                if (delta - shell_delta(d)).abs() > 1e-15 {
                    return Err(format!("delta={delta} differs from 1/(2d^2)"));
                }
            }
        }
        if let Some(delta) = self.pair_distance {
            if let Some(ell) = self.ell {
                if ell != 3 * delta {
                    return Err(format!("ell={ell} differs from 3*Delta"));
                }
                if self.op_distance != Some(delta * ell + delta.saturating_sub(1)) {
                    return Err("D differs from Delta*ell + (Delta-1)".into());
                }
            }
        }
        Ok(())
    }
}

/// `d = ⌈3/ε⌉`.
pub fn dimension_for(epsilon: f64) -> u32 {
    // Guard against 3/ε landing a hair above an integer.
    let x = 3.0 / epsilon;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as u32
    } else {
        x.ceil() as u32
    }
}

/// `δ = 1/(2d²)`.
pub fn shell_delta(d: u32) -> f64 {
    1.0 / (2.0 * (d as f64) * (d as f64))
}

/// The asymptotic choice `k = ⌊p^{δd/(1−δd)}⌋ − 1`. At desk scale this is
/// almost always zero, so it is advisory only.
pub fn advisory_k(p: u64, d: u32) -> i64 {
    let dd = shell_delta(d) * d as f64;
    let exponent = dd / (1.0 - dd);
    let value = (p as f64).powf(exponent);
    // floor with a small tolerance so exact integer powers are not lost
    (value + 1e-9).floor() as i64 - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_delta() {
        assert_eq!(dimension_for(1.0), 3);
        assert_eq!(shell_delta(3), 1.0 / 18.0);
        assert_eq!(dimension_for(0.5), 6);
        assert_eq!(shell_delta(6), 1.0 / 72.0);
        assert_eq!(dimension_for(0.7), 5);
    }

    #[test]
    fn advisory_k_vanishes_at_desk_scale() {
        // exponent 1/(2d-1) = 1/5, 2^(1/5) ≈ 1.149
        assert_eq!(advisory_k(2, 3), 0);
        // 1024^(1/5) = 4 exactly
        assert_eq!(advisory_k(1024, 3), 3);
    }

    #[test]
    fn shell_params_are_consistent() {
        let p = ConstructionParams::shell(2, 3, 2);
        assert_eq!(p.q, Some(6));
        assert_eq!(p.universe, 216);
        assert!(p.check().is_ok());
        let op = p.with_obstacle(4);
        assert_eq!((op.ell, op.op_distance), (Some(12), Some(51)));
        assert!(op.check().is_ok());
        let mut bad = ConstructionParams::shell(2, 3, 2);
        bad.universe = 215;
        assert!(bad.check().is_err());
    }
}
