//! Pairwise reachability and waypoint estimation.
//!
//! [`Estimator`] is the interface the rest of the system consumes. The
//! bundled implementation, [`OracleEstimator`], labels pairs from ground
//! truth and then corrupts the answer with seeded, per-pair-persistent noise.

mod dataset;
mod labeler;
mod loss;
mod observation;
mod oracle;

pub use dataset::{
    generate_sim_dataset, label_finetune_pairs, read_dataset, write_dataset, DatasetRecord,
    DatasetSummary, LabeledPair, SimDatasetOptions,
};
pub(crate) use dataset::{clear_cells, sample_free_pose};
pub use labeler::{label_observations, label_reachability, ReachabilityCriteria};
pub use loss::{
    loss_position, loss_reachability, loss_rotation, loss_total, LossWeights, PROBABILITY_EPS,
};
pub use observation::{parse_observation, read_trajectory, write_observation, write_trajectory, Observation};
pub use oracle::{distance_error_variance, NoiseConfig, OracleEstimator};

use crate::se2::Waypoint;

/// Output of the pairwise model: reachability probability and relative pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub r_hat: f64,
    pub w_hat: Waypoint,
}

impl Prediction {
    pub fn distance(&self) -> f64 {
        self.w_hat.distance()
    }
}

pub trait Estimator {
    /// Predicts whether `dst` is reachable from `src`, and the waypoint
    /// from `src` to `dst`.
    fn predict(&self, src: &Observation, dst: &Observation) -> Prediction;
}

impl<E: Estimator + ?Sized> Estimator for &E {
    fn predict(&self, src: &Observation, dst: &Observation) -> Prediction {
        (**self).predict(src, dst)
    }
}

impl<E: Estimator + ?Sized> Estimator for Box<E> {
    fn predict(&self, src: &Observation, dst: &Observation) -> Prediction {
        (**self).predict(src, dst)
    }
}
