use std::io;

use nalgebra::Point3;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{nav_step, opening_width, NavError, NavObservation, NavParams, NavPhase, NavState, OpeningWidth};
use crate::detect::{detect_window, DetectParams};
use crate::pose::{window_pose, CameraIntrinsics};
use crate::simworld::{
    crossing, ground_truth, reference_histogram, render, step, Crossing, NavCommand, StepLimits, UavState, WorldModel,
};

/// Everything the closed loop needs besides the world and start state.
#[derive(Clone, Debug, PartialEq)]
pub struct MissionConfig {
    pub intrinsics: CameraIntrinsics<f64>,
    pub width: usize,
    pub height: usize,
    pub detect: DetectParams,
    pub nav: NavParams,
    pub limits: StepLimits,
    pub max_steps: usize,
    /// Distance of the head-on view used for the reference histogram.
    pub reference_distance: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            intrinsics: CameraIntrinsics::new(500.0, 500.0, 319.5, 239.5).expect("valid intrinsics"),
            width: 640,
            height: 480,
            detect: DetectParams::for_frame(640, 480),
            nav: NavParams::default(),
            limits: StepLimits::default(),
            max_steps: 500,
            reference_distance: 4.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MissionOutcome {
    Ingressed,
    /// The vehicle crossed the wall plane outside the opening.
    Collided,
    MaxSteps,
}

/// One row of the mission trace: the state in which a frame was taken and
/// what was measured on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MissionRecord {
    pub step: usize,
    pub phase: NavPhase,
    pub position: Point3<f64>,
    /// Vehicle heading, radians.
    pub yaw: f64,
    /// Relative yaw recovered from the image, radians.
    pub est_psi: Option<f64>,
    pub true_psi: f64,
    pub opening: Option<OpeningWidth>,
    pub detected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissionLog {
    pub records: Vec<MissionRecord>,
    /// Command issued after each non-terminal record.
    pub commands: Vec<NavCommand>,
    pub outcome: MissionOutcome,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "step",
    "phase",
    "x",
    "y",
    "z",
    "yaw",
    "est_psi_deg",
    "true_psi_deg",
    "opening_total_px",
    "opening_left_px",
    "opening_right_px",
    "detected",
];

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("row {row}: bad value {value:?} in column {column:?}")]
    Field {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl MissionLog {
    /// Writes the trace as CSV. Yaw and angles are in degrees; absent
    /// measurements are written as `NaN`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        let nan = f64::NAN;
        for r in &self.records {
            let o = r.opening;
            let fields = [
                r.step.to_string(),
                r.phase.to_string(),
                r.position.x.to_string(),
                r.position.y.to_string(),
                r.position.z.to_string(),
                r.yaw.to_degrees().to_string(),
                r.est_psi.map_or(nan, f64::to_degrees).to_string(),
                r.true_psi.to_degrees().to_string(),
                o.map_or(nan, |o| o.total).to_string(),
                o.map_or(nan, |o| o.left).to_string(),
                o.map_or(nan, |o| o.right).to_string(),
                u8::from(r.detected).to_string(),
            ];
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads records written by [`MissionLog::write_csv`]. Columns are found by
/// name; a missing one is reported by name.
pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<MissionRecord>, LogError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut index = [0usize; CSV_COLUMNS.len()];
    for (slot, name) in index.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or(LogError::MissingColumn(name))?;
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let text = |i: usize| rec.get(index[i]).unwrap_or("");
        let bad = |i: usize| LogError::Field {
            row: row + 1,
            column: CSV_COLUMNS[i],
            value: text(i).to_string(),
        };
        let num = |i: usize| text(i).parse::<f64>().map_err(|_| bad(i));
        let opt = |v: f64| (!v.is_nan()).then_some(v);
        let opening = match (num(8)?, num(9)?, num(10)?) {
            (t, l, r) if !(t.is_nan() || l.is_nan() || r.is_nan()) => Some(OpeningWidth {
                total: t,
                left: l,
                right: r,
            }),
            _ => None,
        };
        out.push(MissionRecord {
            step: text(0).parse().map_err(|_| bad(0))?,
            phase: text(1).parse().map_err(|_| bad(1))?,
            position: Point3::new(num(2)?, num(3)?, num(4)?),
            yaw: num(5)?.to_radians(),
            est_psi: opt(num(6)?).map(f64::to_radians),
            true_psi: num(7)?.to_radians(),
            opening,
            detected: match text(11) {
                "0" => false,
                "1" => true,
                _ => return Err(bad(11)),
            },
        });
    }
    Ok(out)
}

/// Rows on which the vehicle translated although the estimated relative
/// yaw was beyond `validity_bound`. A translation is read off the trace as
/// a change of position between consecutive rows.
pub fn valid_angle_violations(records: &[MissionRecord], validity_bound: f64) -> Vec<usize> {
    records
        .windows(2)
        .filter(|w| w[0].position != w[1].position)
        .filter(|w| w[0].est_psi.is_some_and(|psi| psi.abs() > validity_bound))
        .map(|w| w[0].step)
        .collect()
}

/// Closed loop: render, detect, estimate the pose, decide, move. Stops when
/// the vehicle passes the wall plane or after `max_steps` frames. Passing
/// through the opening appends a final `Ingressed` row at the new position.
///
/// Frame noise is drawn from a generator seeded with `seed`, so a given
/// configuration and seed always produce the same trace.
pub fn run_mission(
    world: &WorldModel,
    start: &UavState,
    cfg: &MissionConfig,
    seed: u64,
) -> Result<MissionLog, NavError> {
    cfg.nav.validate()?;
    cfg.detect.validate()?;
    let k = &cfg.intrinsics;
    let reference = reference_histogram(world, k, cfg.width, cfg.height, cfg.reference_distance)?;
    let geometry = world.window();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uav = *start;
    let mut state = NavState::default();
    let mut records = Vec::new();
    let mut commands = Vec::new();
    let mut outcome = MissionOutcome::MaxSteps;

    for i in 0..cfg.max_steps {
        let frame = render(world, &uav, k, cfg.width, cfg.height, rng.next_u64())?;
        let detection = detect_window(&frame, &reference, &cfg.detect)?;
        let angles = detection
            .as_ref()
            .and_then(|d| window_pose(d, &geometry, k).ok())
            .map(|p| p.angles);
        let truth = ground_truth(world, &uav, k);
        records.push(MissionRecord {
            step: i,
            phase: state.phase,
            position: uav.position,
            yaw: uav.yaw,
            est_psi: angles.map(|a| a.yaw),
            true_psi: truth.relative_yaw,
            opening: detection.as_ref().map(opening_width),
            detected: detection.is_some(),
        });
        let obs = NavObservation::new(detection, angles, cfg.width, cfg.height)?;
        let (cmd, next) = nav_step(&state, &obs, &cfg.nav);
        commands.push(cmd);
        let moved = step(&uav, &cmd, &cfg.limits)?;
        let crossed = crossing(world, &uav.position, &moved.position);
        uav = moved;
        state = next;
        match crossed {
            Crossing::None => {}
            Crossing::Window => {
                records.push(MissionRecord {
                    step: i + 1,
                    phase: NavPhase::Ingressed,
                    position: uav.position,
                    yaw: uav.yaw,
                    est_psi: None,
                    true_psi: ground_truth(world, &uav, k).relative_yaw,
                    opening: None,
                    detected: false,
                });
                outcome = MissionOutcome::Ingressed;
                break;
            }
            Crossing::Wall => {
                outcome = MissionOutcome::Collided;
                break;
            }
        }
    }
    Ok(MissionLog {
        records,
        commands,
        outcome,
    })
}
