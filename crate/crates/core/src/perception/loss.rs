use serde::{Deserialize, Serialize};

use super::Prediction;
use crate::se2::Waypoint;

/// Probabilities are clamped to `[ε, 1 − ε]` before taking logs.
pub const PROBABILITY_EPS: f64 = 1e-7;

/// Weights of the position and rotation terms in the total loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

/// Binary cross-entropy `−(r ln r̂ + (1 − r) ln(1 − r̂))`.
pub fn loss_reachability(r: bool, r_hat: f64) -> f64 {
    let p = r_hat.clamp(PROBABILITY_EPS, 1.0 - PROBABILITY_EPS);
    if r {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Euclidean error of the translation.
pub fn loss_position(dx: f64, dy: f64, dx_hat: f64, dy_hat: f64) -> f64 {
    (dx - dx_hat).hypot(dy - dy_hat)
}

/// `|sin θ − sin θ̂| + |cos θ − cos θ̂|`.
pub fn loss_rotation(dtheta: f64, dtheta_hat: f64) -> f64 {
    (dtheta.sin() - dtheta_hat.sin()).abs() + (dtheta.cos() - dtheta_hat.cos()).abs()
}

/// Reachability loss plus, for reachable labels only, the weighted waypoint terms.
pub fn loss_total(r: bool, w: &Waypoint, pred: &Prediction, weights: &LossWeights) -> f64 {
    let lr = loss_reachability(r, pred.r_hat);
    if !r {
        return lr;
    }
    let lp = loss_position(w.dx, w.dy, pred.w_hat.dx, pred.w_hat.dy);
    let lt = loss_rotation(w.dtheta, pred.w_hat.dtheta);
    lr + weights.alpha * lp + weights.beta * lt
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn cross_entropy_at_half() {
        assert!((loss_reachability(true, 0.5) - LN_2).abs() < 1e-12);
        assert!((loss_reachability(false, 0.5) - LN_2).abs() < 1e-12);
    }

    #[test]
    fn saturated_probabilities_are_clamped() {
        let worst = -(PROBABILITY_EPS.ln());
        assert!((loss_reachability(true, 0.0) - worst).abs() < 1e-9);
        assert!((loss_reachability(false, 1.0) - worst).abs() < 1e-6);
        assert!(loss_reachability(true, 1.0) < 1e-6);
    }

    #[test]
    fn rotation_quarter_turn() {
        assert!((loss_rotation(PI / 2.0, 0.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unreachable_pairs_ignore_waypoint() {
        let w = Waypoint::new(1.0, 0.0, 0.0);
        let a = Prediction {
            r_hat: 0.3,
            w_hat: Waypoint::new(1.0, 0.0, 0.0),
        };
        let b = Prediction {
            r_hat: 0.3,
            w_hat: Waypoint::new(-4.0, 2.0, 3.0),
        };
        let weights = LossWeights::default();
        assert_eq!(loss_total(false, &w, &a, &weights), loss_total(false, &w, &b, &weights));
        assert!(loss_total(true, &w, &a, &weights) < loss_total(true, &w, &b, &weights));
    }
}
