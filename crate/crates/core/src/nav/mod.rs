//! Navigation state machine: yaw search, lateral alignment on the relative
//! yaw, height hold on the window centroid, approach and recovery.
//!
//! Sign conventions follow the simulator: a positive relative yaw means the
//! camera is turned right of the wall's inward normal. While the window is
//! kept centred by yawing, that happens when the vehicle sits left of the
//! window axis, so the lateral step that reduces the angle is to the right.

mod mission;

pub use mission::{
    read_csv, run_mission, valid_angle_violations, LogError, MissionConfig, MissionLog, MissionOutcome, MissionRecord,
    CSV_COLUMNS,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::detect::WindowCandidate;
use crate::pose::EulerAngles;
use crate::simworld::NavCommand;

#[derive(Debug, Error, PartialEq)]
pub enum NavError {
    #[error("invalid navigation parameter: {0}")]
    Param(&'static str),
    #[error("relative angles given without a detection")]
    AnglesWithoutDetection,
    #[error("unknown phase name {0:?}")]
    PhaseName(String),
    #[error(transparent)]
    Detect(#[from] crate::detect::DetectError),
    #[error(transparent)]
    Sim(#[from] crate::simworld::SimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NavPhase {
    Search,
    Align,
    Approach,
    Recover,
    Ingressed,
}

impl NavPhase {
    pub const ALL: [NavPhase; 5] = [
        NavPhase::Search,
        NavPhase::Align,
        NavPhase::Approach,
        NavPhase::Recover,
        NavPhase::Ingressed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NavPhase::Search => "Search",
            NavPhase::Align => "Align",
            NavPhase::Approach => "Approach",
            NavPhase::Recover => "Recover",
            NavPhase::Ingressed => "Ingressed",
        }
    }

    /// Whether `self -> to` is one of the transitions taken by [`nav_step`]
    /// (staying in a phase is always allowed). `Ingressed` is only entered
    /// from outside the state machine.
    pub fn can_transition(&self, to: NavPhase) -> bool {
        use NavPhase::*;
        *self == to
            || matches!(
                (self, to),
                (Search, Align)
                    | (Align, Approach)
                    | (Align, Recover)
                    | (Approach, Align)
                    | (Approach, Recover)
                    | (Recover, Align)
                    | (Recover, Search)
            )
    }
}

impl fmt::Display for NavPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NavPhase {
    type Err = NavError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NavPhase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| NavError::PhaseName(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavParams {
    /// Yaw increment while searching, radians.
    pub yaw_step: f64,
    pub lateral_step: f64,
    pub forward_step: f64,
    /// World units per pixel of centroid row offset.
    pub vertical_gain: f64,
    /// Radians per pixel of centroid column offset, capped at `yaw_step`.
    pub yaw_gain: f64,
    /// `|psi|` at or below which the vehicle counts as aligned, radians.
    pub align_tolerance: f64,
    /// `|psi|` above which no translation is commanded, radians.
    pub validity_bound: f64,
    pub max_recover_steps: usize,
    /// Centroid distance from the frame centre, per axis, that counts as
    /// centred.
    pub centering_tolerance_px: f64,
    /// Once the detected window covers this fraction of the frame during
    /// the approach, a lost detection means the opening has outgrown the
    /// frame and the approach continues straight ahead.
    pub commit_area_fraction: f64,
}

impl Default for NavParams {
    fn default() -> Self {
        Self {
            yaw_step: 2f64.to_radians(),
            lateral_step: 0.05,
            forward_step: 0.1,
            vertical_gain: 0.002,
            yaw_gain: 0.001,
            align_tolerance: 2f64.to_radians(),
            validity_bound: 40f64.to_radians(),
            max_recover_steps: 50,
            centering_tolerance_px: 10.0,
            commit_area_fraction: 0.25,
        }
    }
}

impl NavParams {
    pub fn validate(&self) -> Result<(), NavError> {
        let checks = [
            (self.yaw_step > 0.0, "yaw step"),
            (self.lateral_step > 0.0, "lateral step"),
            (self.forward_step > 0.0, "forward step"),
            (self.vertical_gain > 0.0, "vertical gain"),
            (self.yaw_gain > 0.0, "yaw gain"),
            (self.align_tolerance > 0.0, "alignment tolerance"),
            (self.validity_bound > 0.0, "validity bound"),
            (self.align_tolerance < self.validity_bound, "alignment tolerance below validity bound"),
            (self.max_recover_steps > 0, "max recover steps"),
            (self.centering_tolerance_px > 0.0, "centering tolerance"),
            (
                self.commit_area_fraction > 0.0 && self.commit_area_fraction <= 1.0,
                "commit area fraction",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, name)) => Err(NavError::Param(name)),
            None => Ok(()),
        }
    }
}

/// What the vehicle saw in one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct NavObservation {
    detection: Option<WindowCandidate>,
    angles: Option<EulerAngles<f64>>,
    width: usize,
    height: usize,
}

impl NavObservation {
    pub fn new(
        detection: Option<WindowCandidate>,
        angles: Option<EulerAngles<f64>>,
        width: usize,
        height: usize,
    ) -> Result<Self, NavError> {
        if angles.is_some() && detection.is_none() {
            return Err(NavError::AnglesWithoutDetection);
        }
        Ok(Self {
            detection,
            angles,
            width,
            height,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            detection: None,
            angles: None,
            width,
            height,
        }
    }

    pub fn detection(&self) -> Option<&WindowCandidate> {
        self.detection.as_ref()
    }

    pub fn angles(&self) -> Option<&EulerAngles<f64>> {
        self.angles.as_ref()
    }

    /// Relative yaw, when a pose was recovered.
    pub fn psi(&self) -> Option<f64> {
        self.angles.map(|a| a.yaw)
    }

    /// Centroid offset from the frame centre in pixels (right, down).
    fn centroid_offset(&self) -> Option<(f64, f64)> {
        self.detection.as_ref().map(|d| {
            (
                d.centroid.x - (self.width as f64 - 1.0) / 2.0,
                d.centroid.y - (self.height as f64 - 1.0) / 2.0,
            )
        })
    }

    fn area_fraction(&self) -> Option<f64> {
        self.detection
            .as_ref()
            .map(|d| d.area / (self.width * self.height) as f64)
    }
}

/// Phase plus the counters the phases need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavState {
    pub phase: NavPhase,
    /// Backward steps taken in the current recovery.
    pub recover_steps: usize,
    /// Set during the approach once the window is close enough that losing
    /// it no longer triggers recovery.
    pub committed: bool,
}

impl NavState {
    pub fn new(phase: NavPhase) -> Self {
        Self {
            phase,
            recover_steps: 0,
            committed: false,
        }
    }
}

impl Default for NavState {
    fn default() -> Self {
        Self::new(NavPhase::Search)
    }
}

/// Pixel measurements of a detected opening.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpeningWidth {
    /// Horizontal distance between the midpoints of the left and right edges.
    pub total: f64,
    /// Length of the left edge.
    pub left: f64,
    /// Length of the right edge.
    pub right: f64,
}

/// Opening width and edge lengths of a candidate whose corners are ordered
/// top-left, top-right, bottom-right, bottom-left.
pub fn opening_width(candidate: &WindowCandidate) -> OpeningWidth {
    let [tl, tr, br, bl] = candidate.corners;
    let left_mid = nalgebra::center(&tl, &bl);
    let right_mid = nalgebra::center(&tr, &br);
    OpeningWidth {
        total: (right_mid.x - left_mid.x).abs(),
        left: (bl - tl).norm(),
        right: (br - tr).norm(),
    }
}

fn clamp_abs(v: f64, limit: f64) -> f64 {
    v.clamp(-limit, limit)
}

/// Yaw and vertical commands that move the centroid towards the frame
/// centre.
fn centering(obs: &NavObservation, params: &NavParams) -> (f64, f64) {
    match obs.centroid_offset() {
        Some((du, dv)) => (
            clamp_abs(params.yaw_gain * du, params.yaw_step),
            clamp_abs(params.vertical_gain * dv, params.lateral_step.max(params.forward_step)),
        ),
        None => (0.0, 0.0),
    }
}

/// One decision of the state machine. Returns the command to execute and
/// the next state.
///
/// No translation is ever commanded on a frame whose relative yaw exceeds
/// the validity bound, or on a detection without a recovered pose. The one
/// translation without a detection is the straight approach after the
/// window has filled the frame, and the backward step of recovery.
pub fn nav_step(state: &NavState, obs: &NavObservation, params: &NavParams) -> (NavCommand, NavState) {
    use NavPhase::*;
    let mut next = *state;
    let hold = NavCommand::default();
    match state.phase {
        Ingressed => (hold, next),
        Search => {
            if obs.detection.is_some() {
                next = NavState::new(Align);
                (hold, next)
            } else {
                (
                    NavCommand {
                        yaw: params.yaw_step,
                        ..hold
                    },
                    next,
                )
            }
        }
        Align => {
            if obs.detection.is_none() {
                next = NavState::new(Recover);
                return (hold, next);
            }
            let (yaw, vertical) = centering(obs, params);
            let Some(psi) = obs.psi() else {
                return (NavCommand { yaw, ..hold }, next);
            };
            if psi.abs() > params.validity_bound {
                return (NavCommand { yaw, ..hold }, next);
            }
            if psi.abs() > params.align_tolerance {
                return (
                    NavCommand {
                        lateral: params.lateral_step * psi.signum(),
                        vertical,
                        yaw,
                        ..hold
                    },
                    next,
                );
            }
            let (du, dv) = obs.centroid_offset().unwrap_or_default();
            let tol = params.centering_tolerance_px;
            if du.abs() <= tol && dv.abs() <= tol {
                next = NavState::new(Approach);
                (hold, next)
            } else {
                (NavCommand { vertical, yaw, ..hold }, next)
            }
        }
        Approach => {
            if obs.detection.is_none() {
                if state.committed {
                    return (
                        NavCommand {
                            forward: params.forward_step,
                            ..hold
                        },
                        next,
                    );
                }
                next = NavState::new(Recover);
                return (hold, next);
            }
            let (yaw, vertical) = centering(obs, params);
            let Some(psi) = obs.psi() else {
                return (NavCommand { yaw, ..hold }, next);
            };
            if psi.abs() > params.align_tolerance {
                next = NavState::new(Align);
                return (NavCommand { yaw, ..hold }, next);
            }
            if obs.area_fraction().is_some_and(|f| f >= params.commit_area_fraction) {
                next.committed = true;
            }
            (
                NavCommand {
                    forward: params.forward_step,
                    vertical,
                    yaw,
                    ..hold
                },
                next,
            )
        }
        Recover => {
            if obs.detection.is_some() {
                next = NavState::new(Align);
                return (hold, next);
            }
            if state.recover_steps >= params.max_recover_steps {
                next = NavState::new(Search);
                return (hold, next);
            }
            next.recover_steps += 1;
            (
                NavCommand {
                    forward: -params.forward_step,
                    ..hold
                },
                next,
            )
        }
    }
}
