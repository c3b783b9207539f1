//! Run configuration: flat `key = value` text with dotted section prefixes.
//!
//! ```text
//! # comment
//! seed = 7
//! detect.canny_low = 40
//! world.window_center = 10 0 -1.5
//! world.decoy.0.color = 110 110 110
//! ```
//!
//! Every key is optional; missing keys keep their defaults. Unknown keys and
//! invalid values are all reported, one message per field.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ingress_core::detect::DetectParams;
use ingress_core::nav::{MissionConfig, NavParams};
use ingress_core::pose::{CameraIntrinsics, WindowGeometry};
use ingress_core::simworld::{Decoy, StepLimits, UavState, WorldModel};
use nalgebra::{Point3, Vector3};

/// One problem with one field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ConfigError(pub Vec<FieldError>);

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mission: MissionConfig,
    pub world: WorldModel,
    pub start: UavState,
    pub seed: u64,
    /// Output paths given in the file; command-line flags take precedence.
    pub output_csv: Option<String>,
    pub output_image: Option<String>,
    pub output_record: Option<String>,
    pub output_plot: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mission: MissionConfig::default(),
            world: WorldModel::default(),
            start: default_start(),
            seed: 0,
            output_csv: None,
            output_image: None,
            output_record: None,
            output_plot: None,
        }
    }
}

/// Eight units in front of the default window, one unit to its left,
/// heading 15 degrees right of the wall normal.
fn default_start() -> UavState {
    UavState::new(Point3::new(2.0, -1.0, -1.5), 15f64.to_radians())
}

/// Parsed value list of one key.
struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
    errors: Vec<FieldError>,
}

trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
}

macro_rules! from_str_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                <$t>::from_str(s).map_err(|e| format!("cannot parse {s:?}: {e}"))
            }
        }
    )*};
}
from_str_value!(f64, usize, u64, bool);

impl ConfigValue for String {
    fn parse_value(s: &str) -> Result<Self, String> {
        Ok(s.to_string())
    }
}

fn numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.len() != N {
        return Err(format!("expected {N} numbers, got {:?}", s));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("cannot parse {p:?} as a number"))?;
    }
    Ok(out)
}

impl ConfigValue for [f64; 3] {
    fn parse_value(s: &str) -> Result<Self, String> {
        numbers::<3>(s)
    }
}

struct Rgb([u8; 3]);

impl ConfigValue for Rgb {
    fn parse_value(s: &str) -> Result<Self, String> {
        let v = numbers::<3>(s)?;
        if v.iter().any(|c| !(0.0..=255.0).contains(c) || c.fract() != 0.0) {
            return Err(format!("colour components must be integers in 0..=255, got {s:?}"));
        }
        Ok(Rgb(v.map(|c| c as u8)))
    }
}

impl Reader {
    fn parse(text: &str) -> Self {
        let mut r = Reader {
            entries: BTreeMap::new(),
            errors: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                r.error(format!("line {}", i + 1), format!("expected `key = value`, got {line:?}"));
                continue;
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                r.error(format!("line {}", i + 1), "empty key".into());
                continue;
            }
            let entry = Entry {
                line: i + 1,
                value: value.trim().to_string(),
                used: false,
            };
            if let Some(prev) = r.entries.insert(key.clone(), entry) {
                r.error(key, format!("given twice (lines {} and {})", prev.line, i + 1));
            }
        }
        r
    }

    fn error(&mut self, field: String, message: String) {
        self.errors.push(FieldError { field, message });
    }

    fn get<T: ConfigValue>(&mut self, key: &str) -> Option<T> {
        let entry = self.entries.get_mut(key)?;
        entry.used = true;
        match T::parse_value(&entry.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                let line = entry.line;
                self.error(key.to_string(), format!("line {line}: {msg}"));
                None
            }
        }
    }

    fn set<T: ConfigValue>(&mut self, key: &str, slot: &mut T) {
        if let Some(v) = self.get(key) {
            *slot = v;
        }
    }

    fn set_deg(&mut self, key: &str, slot: &mut f64) {
        if let Some(v) = self.get::<f64>(key) {
            *slot = v.to_radians();
        }
    }

    fn check(&mut self, ok: bool, field: &str, message: &str) {
        if !ok {
            self.error(field.to_string(), message.to_string());
        }
    }
}

fn read_detect(r: &mut Reader, d: &mut DetectParams) {
    r.set("detect.canny_low", &mut d.canny_low);
    r.set("detect.canny_high", &mut d.canny_high);
    r.set("detect.blur_kernel", &mut d.blur_kernel);
    r.set("detect.blur_sigma", &mut d.blur_sigma);
    r.set("detect.pyramid_depth", &mut d.pyramid_depth);
    r.set("detect.equalize_clip", &mut d.equalize_clip);
    r.set("detect.hough.rho_res", &mut d.hough.rho_res);
    r.set_deg("detect.hough.theta_res_deg", &mut d.hough.theta_res);
    r.set("detect.hough.votes", &mut d.hough.votes);
    r.set("detect.hough.min_line_length", &mut d.hough.min_line_length);
    r.set("detect.hough.max_line_gap", &mut d.hough.max_line_gap);
    r.set("detect.hough.seed", &mut d.hough.seed);
    r.set("detect.line_thickness", &mut d.line_thickness);
    r.set("detect.line_extension", &mut d.line_extension);
    r.set("detect.overlay_edges", &mut d.overlay_edges);
    r.set("detect.dilation_radius", &mut d.dilation_radius);
    r.set("detect.approx_epsilon_frac", &mut d.approx_epsilon_frac);
    r.set("detect.area_min", &mut d.area_min);
    r.set("detect.area_max", &mut d.area_max);
    r.set("detect.aspect_min", &mut d.aspect_min);
    r.set("detect.aspect_max", &mut d.aspect_max);
    r.set("detect.hull_ratio_min", &mut d.hull_ratio_min);
    r.set("detect.angle_tolerance_deg", &mut d.angle_tolerance_deg);
    r.set("detect.bhattacharyya_threshold", &mut d.bhattacharyya_threshold);
    r.set("detect.hist_filter", &mut d.hist_filter);
    r.set("detect.refine_corners", &mut d.refine_corners);
}

fn read_nav(r: &mut Reader, n: &mut NavParams) {
    r.set_deg("nav.yaw_step_deg", &mut n.yaw_step);
    r.set("nav.lateral_step", &mut n.lateral_step);
    r.set("nav.forward_step", &mut n.forward_step);
    r.set("nav.vertical_gain", &mut n.vertical_gain);
    r.set("nav.yaw_gain", &mut n.yaw_gain);
    r.set_deg("nav.align_tolerance_deg", &mut n.align_tolerance);
    r.set_deg("nav.validity_bound_deg", &mut n.validity_bound);
    r.set("nav.max_recover_steps", &mut n.max_recover_steps);
    r.set("nav.centering_tolerance_px", &mut n.centering_tolerance_px);
    r.set("nav.commit_area_fraction", &mut n.commit_area_fraction);
}

fn read_limits(r: &mut Reader, l: &mut StepLimits) {
    r.set("limits.forward", &mut l.forward);
    r.set("limits.lateral", &mut l.lateral);
    r.set("limits.vertical", &mut l.vertical);
    r.set_deg("limits.yaw_deg", &mut l.yaw);
}

fn read_world(r: &mut Reader) -> Option<WorldModel> {
    let base = WorldModel::default();
    let mut normal: [f64; 3] = base.normal().into();
    let mut center: [f64; 3] = base.window_center().coords.into();
    let mut width = base.window().width;
    let mut height = base.window().height;
    r.set("world.normal", &mut normal);
    r.set("world.window_center", &mut center);
    r.set("world.window_width", &mut width);
    r.set("world.window_height", &mut height);

    let mut decoys = base.decoys().to_vec();
    if let Some(count) = r.get::<usize>("world.decoy_count") {
        decoys.resize(
            count,
            Decoy {
                center: Point3::origin(),
                width: 0.0,
                height: 0.0,
                color: [0, 0, 0],
            },
        );
    }
    for (i, d) in decoys.iter_mut().enumerate() {
        let mut c: [f64; 3] = d.center.coords.into();
        r.set(&format!("world.decoy.{i}.center"), &mut c);
        d.center = Point3::from(c);
        r.set(&format!("world.decoy.{i}.width"), &mut d.width);
        r.set(&format!("world.decoy.{i}.height"), &mut d.height);
        if let Some(Rgb(rgb)) = r.get(&format!("world.decoy.{i}.color")) {
            d.color = rgb;
        }
        r.check(d.width > 0.0, &format!("world.decoy.{i}.width"), "must be positive");
        r.check(d.height > 0.0, &format!("world.decoy.{i}.height"), "must be positive");
    }

    r.check(width > 0.0 && width.is_finite(), "world.window_width", "must be positive");
    r.check(height > 0.0 && height.is_finite(), "world.window_height", "must be positive");
    let geometry = WindowGeometry::new(width, height).ok();
    let mut world = match geometry.map(|g| WorldModel::new(Vector3::from(normal), Point3::from(center), g, decoys)) {
        Some(Ok(w)) => w,
        Some(Err(e)) => {
            r.error("world".into(), e.to_string());
            return None;
        }
        None => return None,
    };
    if let Some(Rgb(c)) = r.get("world.wall_color") {
        world.wall_color = c;
    }
    if let Some(Rgb(c)) = r.get("world.interior_color") {
        world.interior_color = c;
    }
    if let Some(Rgb(c)) = r.get("world.background_color") {
        world.background_color = c;
    }
    r.set("world.noise_sigma", &mut world.noise_sigma);
    r.check(
        world.noise_sigma >= 0.0 && world.noise_sigma.is_finite(),
        "world.noise_sigma",
        "must be non-negative",
    );
    Some(world)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut r = Reader::parse(text);
        let mut cfg = RunConfig::default();

        r.set("seed", &mut cfg.seed);
        r.set("max_steps", &mut cfg.mission.max_steps);
        r.check(cfg.mission.max_steps > 0, "max_steps", "must be at least 1");

        let m = &mut cfg.mission;
        let mut k = [m.intrinsics.fx, m.intrinsics.fy, m.intrinsics.cx, m.intrinsics.cy];
        for (slot, key) in k.iter_mut().zip(["camera.fx", "camera.fy", "camera.cx", "camera.cy"]) {
            r.set(key, slot);
        }
        r.set("camera.width", &mut m.width);
        r.set("camera.height", &mut m.height);
        r.check(m.width >= 16 && m.height >= 16, "camera.width", "frame must be at least 16x16");
        match CameraIntrinsics::new(k[0], k[1], k[2], k[3]) {
            Ok(ki) => m.intrinsics = ki,
            Err(e) => r.error("camera".into(), e.to_string()),
        }
        // area bounds follow the frame size unless given explicitly
        m.detect = DetectParams::for_frame(m.width.max(1), m.height.max(1));
        read_detect(&mut r, &mut m.detect);
        if let Err(e) = m.detect.validate() {
            r.error("detect".into(), e.to_string());
        }
        read_nav(&mut r, &mut m.nav);
        if let Err(e) = m.nav.validate() {
            r.error("nav".into(), e.to_string());
        }
        read_limits(&mut r, &mut m.limits);
        let l = m.limits;
        for (ok, key) in [
            (l.forward > 0.0, "limits.forward"),
            (l.lateral > 0.0, "limits.lateral"),
            (l.vertical > 0.0, "limits.vertical"),
            (l.yaw > 0.0, "limits.yaw_deg"),
        ] {
            r.check(ok, key, "must be positive");
        }
        r.set("reference_distance", &mut m.reference_distance);
        r.check(m.reference_distance > 0.0, "reference_distance", "must be positive");

        if let Some(w) = read_world(&mut r) {
            cfg.world = w;
        }

        let mut pos: [f64; 3] = cfg.start.position.coords.into();
        let mut yaw = cfg.start.yaw;
        r.set("start.position", &mut pos);
        r.set_deg("start.yaw_deg", &mut yaw);
        cfg.start = UavState::new(Point3::from(pos), yaw);

        for (key, slot) in [
            ("output.csv", &mut cfg.output_csv),
            ("output.image", &mut cfg.output_image),
            ("output.record", &mut cfg.output_record),
            ("output.plot", &mut cfg.output_plot),
        ] {
            if let Some(v) = r.get::<String>(key) {
                *slot = Some(v);
            }
        }

        let unknown: Vec<(String, usize)> = r
            .entries
            .iter()
            .filter(|(_, e)| !e.used)
            .map(|(k, e)| (k.clone(), e.line))
            .collect();
        for (key, line) in unknown {
            r.error(key, format!("line {line}: unknown key"));
        }
        if r.errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError(r.errors))
        }
    }
}
