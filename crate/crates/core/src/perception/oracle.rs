use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{label_observations, Estimator, LabeledPair, Observation, Prediction, ReachabilityCriteria};
use crate::gridworld::FreeSpace;
use crate::se2::{relative, Waypoint};

/// Corruption applied by the oracle on top of the ground-truth label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub pos_sigma: f64,
    pub theta_sigma: f64,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> crate::Result<()> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.false_positive_rate)
            || !rate_ok(self.false_negative_rate)
            || !(self.pos_sigma >= 0.0)
            || !(self.theta_sigma >= 0.0)
        {
            return Err(crate::Error::Config(format!("invalid noise config {self:?}")));
        }
        Ok(())
    }
}

const R_HAT_POSITIVE: f64 = 0.95;
const R_HAT_NEGATIVE: f64 = 0.05;
const R_HAT_JITTER: f64 = 0.04;

/// Simulated pairwise model backed by ground truth.
///
/// The random stream for a pair is seeded from `(seed, src.id, dst.id)`, so
/// the same pair always gets the same answer: a wrong edge stays wrong until
/// maintenance removes it.
#[derive(Clone, Debug)]
pub struct OracleEstimator {
    space: Arc<FreeSpace>,
    criteria: ReachabilityCriteria,
    noise: NoiseConfig,
}

impl OracleEstimator {
    pub fn new(space: Arc<FreeSpace>, criteria: ReachabilityCriteria, noise: NoiseConfig) -> Self {
        Self {
            space,
            criteria,
            noise,
        }
    }

    pub fn space(&self) -> &FreeSpace {
        &self.space
    }

    pub fn criteria(&self) -> &ReachabilityCriteria {
        &self.criteria
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    fn pair_rng(&self, src: u64, dst: u64) -> ChaCha8Rng {
        let mut h = splitmix(self.noise.seed ^ 0x6a09_e667_f3bc_c908);
        h = splitmix(h ^ src);
        h = splitmix(h ^ dst.rotate_left(32));
        ChaCha8Rng::seed_from_u64(h)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Estimator for OracleEstimator {
    fn predict(&self, src: &Observation, dst: &Observation) -> Prediction {
        let truth = label_observations(&self.space, src, dst, &self.criteria);
        let mut rng = self.pair_rng(src.id, dst.id);
        let u: f64 = rng.gen();
        let reachable = if truth {
            u >= self.noise.false_negative_rate
        } else {
            u < self.noise.false_positive_rate
        };
        let base = if reachable { R_HAT_POSITIVE } else { R_HAT_NEGATIVE };
        let r_hat = base + rng.gen_range(-R_HAT_JITTER..=R_HAT_JITTER);

        let w = relative(&src.true_pose, &dst.true_pose);
        let mut gauss = |sigma: f64| {
            if sigma > 0.0 {
                Normal::new(0.0, sigma).expect("finite sigma").sample(&mut rng)
            } else {
                0.0
            }
        };
        let (ex, ey, et) = (
            gauss(self.noise.pos_sigma),
            gauss(self.noise.pos_sigma),
            gauss(self.noise.theta_sigma),
        );
        let w_hat = if ex == 0.0 && ey == 0.0 && et == 0.0 {
            w
        } else {
            Waypoint::new(w.dx + ex, w.dy + ey, w.dtheta + et)
        };
        Prediction { r_hat, w_hat }
    }
}

/// Variance of `d(ŵ) − d(w)` over the reachable pairs, or `None` when there
/// are fewer than two such pairs.
pub fn distance_error_variance<E: Estimator>(estimator: &E, pairs: &[LabeledPair]) -> Option<f64> {
    let errs: Vec<f64> = pairs
        .iter()
        .filter(|p| p.r)
        .map(|p| estimator.predict(&p.src, &p.dst).distance() - p.w.distance())
        .collect();
    if errs.len() < 2 {
        return None;
    }
    let n = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / n;
    Some(errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::GridMap;
    use crate::se2::Pose2D;

    fn setup() -> (Arc<FreeSpace>, Observation, Observation, Observation) {
        let mut m = GridMap::new_room(120, 60, 0.05).unwrap();
        m.fill_rect(2.9, 0.0, 3.1, 3.0, true);
        let space = Arc::new(FreeSpace::new(m, 0.18));
        let c = ReachabilityCriteria::default();
        let obs = |id, x, y, th| {
            let p = Pose2D::new(x, y, th);
            Observation::capture(space.map(), id, p, p, &c.sensor()).unwrap()
        };
        let a = obs(0, 1.2, 1.5, 0.0);
        let near = obs(1, 2.2, 1.5, 0.0);
        let across = obs(2, 3.8, 1.5, 0.0);
        (space, a, near, across)
    }

    #[test]
    fn noiseless_reachable_pair() {
        let (space, a, near, _) = setup();
        let o = OracleEstimator::new(space, ReachabilityCriteria::default(), NoiseConfig::noiseless());
        let p = o.predict(&a, &near);
        assert!((p.r_hat - 0.95).abs() <= 0.04 + 1e-12);
        assert_eq!(p.w_hat, relative(&a.true_pose, &near.true_pose));
    }

    #[test]
    fn noiseless_wall_pair() {
        let (space, _, near, across) = setup();
        let o = OracleEstimator::new(space, ReachabilityCriteria::default(), NoiseConfig::noiseless());
        assert!((o.predict(&near, &across).r_hat - 0.05).abs() <= 0.04 + 1e-12);
    }

    #[test]
    fn forced_false_positive() {
        let (space, _, near, across) = setup();
        let noise = NoiseConfig {
            false_positive_rate: 1.0,
            ..Default::default()
        };
        let o = OracleEstimator::new(space, ReachabilityCriteria::default(), noise);
        assert!(o.predict(&near, &across).r_hat >= 0.91);
    }

    #[test]
    fn flips_persist_per_pair() {
        let (space, a, near, across) = setup();
        let noise = NoiseConfig {
            false_positive_rate: 0.5,
            false_negative_rate: 0.5,
            pos_sigma: 0.1,
            theta_sigma: 0.05,
            seed: 9,
        };
        let o = OracleEstimator::new(space, ReachabilityCriteria::default(), noise);
        for (s, d) in [(&a, &near), (&near, &across), (&across, &a)] {
            assert_eq!(o.predict(s, d), o.predict(s, d));
        }
    }
}
