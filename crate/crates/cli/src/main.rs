//! `ingress`: window detection, pose estimation and closed-loop ingress
//! simulation from the command line.
//!
//! Exit status:
//! - 0: success (window found, mission ingressed, file written)
//! - 1: no window in the frame, or the mission ended without ingress
//! - 2: bad command line or configuration
//! - 3: unreadable or malformed input file
//! - 4: output could not be written, or an internal step failed

mod config;
mod plot;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ingress_core::detect::{detect_window, draw_detection, DetectParams, WindowCandidate};
use ingress_core::imaging::{pnm, RgbImage};
use ingress_core::nav::{self, run_mission, MissionOutcome};
use ingress_core::pose::window_pose;
use ingress_core::simworld::{reference_histogram, render};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "ingress", version, about = "Window detection and ingress simulation")]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the window in a PPM frame.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Annotated copy of the frame (PPM).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Detection record; printed to stdout when omitted.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Detect the window and estimate the camera pose relative to it.
    Pose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Run the closed-loop mission and write its trace as CSV.
    Simulate {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Draw a mission CSV as SVG charts.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Render the configured start view as PPM.
    Render {
        #[arg(long)]
        output: PathBuf,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn input(path: &Path, message: impl ToString) -> Self {
        Self {
            code: 3,
            message: format!("{}: {}", path.display(), message.to_string()),
        }
    }

    fn output(path: &Path, message: impl ToString) -> Self {
        Self {
            code: 4,
            message: format!("{}: {}", path.display(), message.to_string()),
        }
    }

    fn internal(message: impl ToString) -> Self {
        Self {
            code: 4,
            message: message.to_string(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| Failure::config(format!("invalid configuration\n{e}")))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::output(path, e))
}

fn read_frame(path: &Path) -> Result<RgbImage, Failure> {
    pnm::read_rgb(path).map_err(|e| Failure::input(path, e))
}

/// Detection parameters for a frame whose size may differ from the
/// configured camera: the area bounds scale with the pixel count.
fn params_for(cfg: &RunConfig, frame: &RgbImage) -> DetectParams {
    let mut p = cfg.mission.detect.clone();
    let scale = (frame.width() * frame.height()) as f64 / (cfg.mission.width * cfg.mission.height) as f64;
    p.area_min *= scale;
    p.area_max *= scale;
    p
}

fn detect_in(cfg: &RunConfig, frame: &RgbImage) -> Result<Option<WindowCandidate>, Failure> {
    let m = &cfg.mission;
    let reference = reference_histogram(&cfg.world, &m.intrinsics, m.width, m.height, m.reference_distance)
        .map_err(Failure::config)?;
    detect_window(frame, &reference, &params_for(cfg, frame)).map_err(Failure::config)
}

fn candidate_record(c: &WindowCandidate) -> String {
    let mut s = String::new();
    let corners: Vec<String> = c.corners.iter().map(|p| format!("{} {}", p.x, p.y)).collect();
    let _ = writeln!(s, "detected = 1");
    let _ = writeln!(s, "centroid = {} {}", c.centroid.x, c.centroid.y);
    let _ = writeln!(s, "corners = {}", corners.join(" "));
    let _ = writeln!(s, "area = {}", c.area);
    let _ = writeln!(s, "aspect_ratio = {}", c.aspect_ratio);
    if let Some(d) = c.hist_distance {
        let _ = writeln!(s, "hist_distance = {d}");
    }
    s
}

fn emit(record: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, record.as_bytes()),
        None => {
            print!("{record}");
            Ok(())
        }
    }
}

fn cmd_detect(cfg: &RunConfig, input: &Path, output: Option<&Path>, record: Option<&Path>) -> Result<u8, Failure> {
    let frame = read_frame(input)?;
    let found = detect_in(cfg, &frame)?;
    let record_path = record.map(Path::to_path_buf).or(cfg.output_record.as_ref().map(PathBuf::from));
    let image_path = output.map(Path::to_path_buf).or(cfg.output_image.as_ref().map(PathBuf::from));
    match found {
        Some(c) => {
            if let Some(p) = image_path {
                write_file(&p, &pnm::encode_rgb(&draw_detection(&frame, &c)))?;
            }
            emit(&candidate_record(&c), record_path.as_deref())?;
            Ok(0)
        }
        None => {
            if let Some(p) = image_path {
                write_file(&p, &pnm::encode_rgb(&frame))?;
            }
            emit("detected = 0\n", record_path.as_deref())?;
            eprintln!("no window found in {}", input.display());
            Ok(1)
        }
    }
}

fn cmd_pose(cfg: &RunConfig, input: &Path, record: Option<&Path>) -> Result<u8, Failure> {
    let frame = read_frame(input)?;
    let Some(c) = detect_in(cfg, &frame)? else {
        emit("detected = 0\n", record)?;
        eprintln!("no window found in {}", input.display());
        return Ok(1);
    };
    let mut out = candidate_record(&c);
    match window_pose(&c, &cfg.world.window(), &cfg.mission.intrinsics) {
        Ok(p) => {
            let [roll, pitch, yaw] = p.angles.to_degrees();
            let t = p.pose.translation;
            let _ = writeln!(out, "roll_deg = {roll}\npitch_deg = {pitch}\nyaw_deg = {yaw}");
            let _ = writeln!(out, "translation = {} {} {}", t.x, t.y, t.z);
            let _ = writeln!(out, "reprojection_rms_px = {}", p.reprojection_rms);
            emit(&out, record)?;
            Ok(0)
        }
        Err(e) => {
            emit(&out, record)?;
            eprintln!("pose estimation failed: {e}");
            Ok(1)
        }
    }
}

fn cmd_simulate(cfg: &RunConfig, output: Option<&Path>) -> Result<u8, Failure> {
    let log = run_mission(&cfg.world, &cfg.start, &cfg.mission, cfg.seed).map_err(Failure::internal)?;
    let mut buf = Vec::new();
    log.write_csv(&mut buf).map_err(Failure::internal)?;
    match output.map(Path::to_path_buf).or(cfg.output_csv.as_ref().map(PathBuf::from)) {
        Some(p) => write_file(&p, &buf)?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    let steps = log.records.len();
    match log.outcome {
        MissionOutcome::Ingressed => {
            eprintln!("ingressed after {} frames", steps - 1);
            Ok(0)
        }
        MissionOutcome::Collided => {
            eprintln!("hit the wall after {steps} frames");
            Ok(1)
        }
        MissionOutcome::MaxSteps => {
            eprintln!("no ingress within {steps} frames");
            Ok(1)
        }
    }
}

fn cmd_plot(input: &Path, output: &Path) -> Result<u8, Failure> {
    let file = fs::File::open(input).map_err(|e| Failure::input(input, e))?;
    let records = nav::read_csv(file).map_err(|e| Failure::input(input, e))?;
    write_file(output, plot::mission_svg(&records).as_bytes())?;
    Ok(0)
}

fn cmd_render(cfg: &RunConfig, output: &Path) -> Result<u8, Failure> {
    let m = &cfg.mission;
    let frame = render(&cfg.world, &cfg.start, &m.intrinsics, m.width, m.height, cfg.seed).map_err(Failure::internal)?;
    write_file(output, &pnm::encode_rgb(&frame))?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Command::Plot { input, output } = &cli.command {
        return cmd_plot(input, output);
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Detect { input, output, record } => cmd_detect(&cfg, input, output.as_deref(), record.as_deref()),
        Command::Pose { input, record } => cmd_pose(&cfg, input, record.as_deref()),
        Command::Simulate { output } => cmd_simulate(&cfg, output.as_deref()),
        Command::Render { output } => cmd_render(&cfg, output),
        Command::Plot { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
