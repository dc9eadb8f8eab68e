//! TOML experiment configuration.
//!
//! Every section and key is optional; unknown keys are rejected.
//!
//! ```toml
//! [world]        # fixture = "apartment" | "two-room" | "corridor", map = "<file>", robot_radius
//! [trajectory]   # route = [[x, y, theta], ...], loops, spacing, [trajectory.odom_noise]
//! [criteria]     # labeler thresholds and sensor model
//! [noise]        # oracle corruption
//! [build]        # graph building
//! [maintenance]  # edge belief updates and expansion
//! [limits]       # episode limits
//! [controller]   # go-to-pose gains
//! [layout]       # procedural map generation
//! [loss]         # loss weights
//! [experiment]   # seed, test set size, lifelong schedule
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fixtures, EpisodeLimits, OdomNoise};
use crate::error::{Error, Result};
use crate::gridworld::{ControllerGains, GridMap, RoomLayout, DEFAULT_ROBOT_RADIUS};
use crate::maintenance::MaintenanceParams;
use crate::perception::{LossWeights, NoiseConfig, ReachabilityCriteria};
use crate::se2::Pose2D;
use crate::topograph::BuildParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldSection {
    pub fixture: String,
    /// Map file; takes precedence over the fixture's map.
    pub map: Option<PathBuf>,
    pub robot_radius: f64,
}

impl Default for WorldSection {
    fn default() -> Self {
        Self {
            fixture: "apartment".into(),
            map: None,
            robot_radius: DEFAULT_ROBOT_RADIUS,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    /// Route poses `[x, y, theta]`; the fixture route when empty.
    pub route: Vec<[f64; 3]>,
    /// Loop count; the fixture default when unset.
    pub loops: Option<usize>,
    /// Recording spacing in meters; the fixture default when unset.
    pub spacing: Option<f64>,
    pub odom_noise: OdomNoise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Master seed. Graph building, oracle noise, odometry, test-set and
    /// query sampling seeds are all derived from it; the per-section seed
    /// fields are overwritten.
    pub seed: u64,
    pub n_goals: usize,
    pub n_test_episodes: usize,
    pub n_queries: usize,
    pub eval_every: usize,
    /// Replace the initial edge variance with the variance of the oracle's
    /// distance errors on a validation split.
    pub sigma2_from_validation: bool,
    pub validation_pairs: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seed: 0,
            n_goals: 10,
            n_test_episodes: 40,
            n_queries: 100,
            eval_every: 25,
            sigma2_from_validation: true,
            validation_pairs: 400,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub world: WorldSection,
    pub trajectory: TrajectorySection,
    pub criteria: ReachabilityCriteria,
    pub noise: NoiseConfig,
    pub build: BuildParams,
    pub maintenance: MaintenanceParams,
    pub limits: EpisodeLimits,
    pub controller: ControllerGains,
    pub layout: RoomLayout,
    pub loss: LossWeights,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.criteria.validate()?;
        self.noise.validate()?;
        self.build.validate()?;
        self.maintenance.validate()?;
        self.limits.validate()?;
        if !matches!(self.world.fixture.as_str(), "apartment" | "two-room" | "corridor") {
            return Err(Error::Config(format!("unknown fixture {:?}", self.world.fixture)));
        }
        if !(self.world.robot_radius > 0.0) {
            return Err(Error::Config("robot_radius must be positive".into()));
        }
        let e = &self.experiment;
        if e.n_queries > 0 && (e.eval_every == 0 || !e.n_queries.is_multiple_of(e.eval_every)) {
            return Err(Error::Config(format!(
                "experiment.eval_every ({}) must divide experiment.n_queries ({})",
                e.eval_every, e.n_queries
            )));
        }
        if e.n_goals == 0 || e.n_test_episodes == 0 {
            return Err(Error::Config("n_goals and n_test_episodes must be positive".into()));
        }
        Ok(())
    }

    /// Default configuration for one of the bundled fixtures.
    pub fn for_fixture(name: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.world.fixture = name.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn map(&self) -> Result<GridMap> {
        if let Some(p) = &self.world.map {
            return GridMap::load(p);
        }
        Ok(match self.world.fixture.as_str() {
            "two-room" => fixtures::two_room_map(),
            "corridor" => fixtures::corridor_map(),
            _ => fixtures::apartment_map(),
        })
    }

    pub fn route(&self) -> Vec<Pose2D> {
        if !self.trajectory.route.is_empty() {
            return self
                .trajectory
                .route
                .iter()
                .map(|&[x, y, t]| Pose2D::new(x, y, t))
                .collect();
        }
        match self.world.fixture.as_str() {
            "two-room" => fixtures::two_room_route(),
            "corridor" => fixtures::corridor_route(),
            _ => fixtures::apartment_route(),
        }
    }

    pub fn loops(&self) -> usize {
        self.trajectory.loops.unwrap_or(match self.world.fixture.as_str() {
            "two-room" => fixtures::TWO_ROOM_LOOPS,
            "corridor" => 1,
            _ => fixtures::APARTMENT_LOOPS,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.trajectory.spacing.unwrap_or(match self.world.fixture.as_str() {
            "two-room" => fixtures::TWO_ROOM_SPACING,
            "corridor" => 0.2,
            _ => fixtures::APARTMENT_SPACING,
        })
    }
}
