//! Early-stopped smoothing paths.
//!
//! The iteration is run from the blank image and the fraction of supported
//! edges is watched after every step. The first time it reaches a requested
//! level, the current iterate is projected onto its support and recorded.
//! The run ends once the stop level is reached or the iteration budget runs
//! out.
//!
//! Sparsity is not monotone in general: an edge can leave the support again
//! when its `z` re-enters the unit ball. Snapshots use first-crossing
//! semantics, so a level is recorded at most once.

use crate::dynamics::{HyperParams, Smoother, StepParams};
use crate::error::{Error, Result};
use crate::lattice::Image;
use crate::projection::{find_components, project, sparsity_level, SupportSet};

/// Sparsity above which smoothed images start to carry noise and texture.
pub const HIGH_SPARSITY_WARNING: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct PathConfig {
    /// Strictly ascending levels in `(0, 1]`.
    pub snapshot_levels: Vec<f64>,
    pub stop_level: f64,
    pub max_iters: usize,
    pub hp: HyperParams,
}

impl PathConfig {
    /// Stops at the highest requested level; budget taken from `hp`.
    pub fn new(snapshot_levels: Vec<f64>, hp: HyperParams) -> Self {
        let stop_level = snapshot_levels.iter().copied().fold(0.0, f64::max);
        PathConfig {
            snapshot_levels,
            stop_level,
            max_iters: hp.max_iters,
            hp,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    /// Checks the level list. Levels above `stop_level` can never be reached
    /// and are dropped from the returned list.
    pub fn validated_levels(&self) -> Result<Vec<f64>> {
        let in_range = |l: f64| l > 0.0 && l <= 1.0;
        if !in_range(self.stop_level) {
            return Err(Error::Parameter(format!(
                "stop level must lie in (0, 1], got {}",
                self.stop_level
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be positive".into()));
        }
        if self.snapshot_levels.is_empty() {
            return Err(Error::Parameter(
                "at least one snapshot level is required".into(),
            ));
        }
        for w in self.snapshot_levels.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Parameter(format!(
                    "snapshot levels must be strictly ascending, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&bad) = self.snapshot_levels.iter().find(|&&l| !in_range(l)) {
            return Err(Error::Parameter(format!(
                "snapshot level {bad} outside (0, 1]"
            )));
        }
        let kept: Vec<f64> = self
            .snapshot_levels
            .iter()
            .copied()
            .filter(|&l| l <= self.stop_level)
            .collect();
        if kept.len() < self.snapshot_levels.len() {
            log::warn!(
                "dropping {} snapshot level(s) above stop level {}",
                self.snapshot_levels.len() - kept.len(),
                self.stop_level
            );
        }
        Ok(kept)
    }

    /// Human-readable warnings for valid but questionable settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.stop_level > HIGH_SPARSITY_WARNING {
            out.push(format!(
                "stop level {} exceeds {HIGH_SPARSITY_WARNING}; fine-scale noise will be retained",
                self.stop_level
            ));
        }
        out
    }
}

/// A projected iterate recorded along the path.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub image: Image,
    pub achieved_sparsity: f64,
    pub iteration: usize,
    /// The level that triggered this snapshot; `None` for the final iterate
    /// of a run that exhausted its budget.
    pub requested_level: Option<f64>,
    /// Another requested level was crossed by the same iterate.
    pub coincident: bool,
    /// Edges whose differences the projection kept.
    pub support: SupportSet,
}

impl Snapshot {
    pub fn is_terminal(&self) -> bool {
        self.requested_level.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    /// Ascending in level. A truncated run ends with a terminal snapshot.
    pub snapshots: Vec<Snapshot>,
    /// The budget ran out before the stop level was reached.
    pub truncated: bool,
    pub iterations: usize,
    pub params: StepParams,
}

/// Runs the iteration on `x` and records projected snapshots.
pub fn run_path(x: &Image, cfg: &PathConfig) -> Result<PathResult> {
    let levels = cfg.validated_levels()?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    let mut smoother = Smoother::new(x, &cfg.hp)?;
    let mut state = smoother.initial_state();
    let m = smoother.lattice().edge_count();
    let mut pending = levels.into_iter().peekable();
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut truncated = true;

    let snapshot_of =
        |smoother: &Smoother, state: &crate::dynamics::IterState| -> Result<(Image, SupportSet)> {
            let support = SupportSet::from_gamma(state.gamma());
            let partition = find_components(smoother.lattice(), &support)?;
            Ok((x.with_planar(project(state.u(), &partition)?)?, support))
        };

    while state.iteration() < cfg.max_iters {
        smoother.advance(&mut state)?;
        let level = sparsity_level(state.support_count(), m);
        if pending.peek().is_some_and(|&l| level >= l) {
            let mut crossed = Vec::new();
            while let Some(l) = pending.next_if(|&l| level >= l) {
                crossed.push(l);
            }
            let (image, support) = snapshot_of(&smoother, &state)?;
            let coincident = crossed.len() > 1;
            for l in crossed {
                snapshots.push(Snapshot {
                    image: image.clone(),
                    achieved_sparsity: level,
                    iteration: state.iteration(),
                    requested_level: Some(l),
                    coincident,
                    support: support.clone(),
                });
            }
        }
        if level >= cfg.stop_level {
            truncated = false;
            break;
        }
    }

    if truncated {
        let level = sparsity_level(state.support_count(), m);
        let last = snapshots.last().map_or(0.0, |s| s.achieved_sparsity);
        log::info!(
            "iteration budget {} exhausted at sparsity {level:.4}",
            cfg.max_iters
        );
        if level >= last {
            let (image, support) = snapshot_of(&smoother, &state)?;
            snapshots.push(Snapshot {
                image,
                achieved_sparsity: level,
                iteration: state.iteration(),
                requested_level: None,
                coincident: false,
                support,
            });
        }
    }

    Ok(PathResult {
        snapshots,
        truncated,
        iterations: state.iteration(),
        params: smoother.params().clone(),
    })
}

/// Smooths `x` until the fraction of supported edges first reaches `level`.
///
/// If the budget runs out first, the terminal snapshot is returned instead;
/// check [`Snapshot::is_terminal`].
pub fn smooth_to_level(
    x: &Image,
    level: f64,
    hp: &HyperParams,
    max_iters: usize,
) -> Result<Snapshot> {
    let cfg = PathConfig::new(vec![level], hp.clone()).with_max_iters(max_iters);
    let result = run_path(x, &cfg)?;
    result
        .snapshots
        .into_iter()
        .next()
        .ok_or_else(|| Error::Parameter("path produced no snapshot".into()))
}

/// Level used when none is given: 0.6 for small inputs (up to 64x64), 0.3
/// for larger ones.
pub fn default_level(height: usize, width: usize) -> f64 {
    if height <= 64 && width <= 64 {
        0.6
    } else {
        0.3
    }
}
