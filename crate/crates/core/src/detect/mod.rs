//! Window detection: edge extraction, probabilistic Hough lines, contour
//! tracing, polygon approximation, geometric filtering and colour
//! histogram scoring against a reference.

mod contour;
mod histogram;
mod hough;
mod polygon;
mod raster;
mod refine;

pub use contour::{find_contours, Contour};
pub use histogram::{
    bhattacharyya_distance, region_histogram, strictly_inside, Histogram, BINS_PER_CHANNEL, HISTOGRAM_BINS,
};
pub use hough::{hough_lines_p, HoughParams};
pub use polygon::{
    approx_polygon, collapse_short_edges, convex_hull, filter_candidates, interior_angles, order_corners, point_segment_distance,
    polygon_area, satisfies_constraints, Polygon,
};
pub use raster::{bresenham, rasterize_segments};
pub use refine::refine_corners;

use nalgebra::Point2;
use thiserror::Error;

use crate::imaging::{self, GrayImage, ImagingError, RgbImage};

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("line segment endpoints coincide")]
    ZeroLengthSegment,
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    DegeneratePolygon(usize),
    #[error("contour needs at least 3 points, got {0}")]
    ContourTooShort(usize),
    #[error("approximation epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error("histogram must have {HISTOGRAM_BINS} bins, got {0}")]
    HistogramShape(usize),
    #[error("region contains no pixels")]
    EmptyRegion,
    #[error("histogram is not L1-normalized")]
    NotNormalized,
    #[error("invalid detection parameter: {0}")]
    Param(&'static str),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

/// Straight segment between two distinct pixel positions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSegment {
    pub p0: Point2<f64>,
    pub p1: Point2<f64>,
}

impl LineSegment {
    pub fn new(p0: Point2<f64>, p1: Point2<f64>) -> Result<Self, DetectError> {
        if p0 == p1 {
            return Err(DetectError::ZeroLengthSegment);
        }
        Ok(Self { p0, p1 })
    }

    pub fn length(&self) -> f64 {
        (self.p1 - self.p0).norm()
    }

    /// The same line lengthened by `by` pixels at both ends.
    pub fn extended(&self, by: f64) -> Self {
        let dir = (self.p1 - self.p0) / self.length();
        Self {
            p0: self.p0 - dir * by,
            p1: self.p1 + dir * by,
        }
    }
}

/// A quadrilateral that passed the geometric constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowCandidate {
    /// Clockwise on screen starting from the corner with the smallest `x + y`.
    pub corners: [Point2<f64>; 4],
    pub centroid: Point2<f64>,
    pub area: f64,
    /// Bounding-box width over height.
    pub aspect_ratio: f64,
    /// Polygon area over convex hull area.
    pub hull_ratio: f64,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    /// Bhattacharyya distance to the reference, once scored.
    pub hist_distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectParams {
    pub canny_low: f64,
    pub canny_high: f64,
    pub blur_kernel: usize,
    pub blur_sigma: f64,
    /// Number of pyr_down/pyr_up rounds.
    pub pyramid_depth: usize,
    /// Contrast limit of the histogram equalization, in multiples of the
    /// mean bin count. Infinity gives plain equalization.
    pub equalize_clip: f64,
    pub hough: HoughParams,
    /// Brush width used when drawing Hough segments back into a map.
    pub line_thickness: usize,
    /// Pixels added to both ends of every segment before drawing, so that
    /// edges rounded off at the corners still meet.
    pub line_extension: f64,
    /// Draw the segments over the edge map rather than on an empty map,
    /// so outlines whose corners were rounded off by smoothing stay closed.
    pub overlay_edges: bool,
    pub dilation_radius: usize,
    /// Polygon approximation tolerance as a fraction of contour perimeter.
    pub approx_epsilon_frac: f64,
    pub area_min: f64,
    pub area_max: f64,
    pub aspect_min: f64,
    pub aspect_max: f64,
    pub hull_ratio_min: f64,
    pub angle_tolerance_deg: f64,
    pub bhattacharyya_threshold: f64,
    /// Score candidates against the reference histogram. When off, the
    /// largest candidate is returned.
    pub hist_filter: bool,
    /// Re-fit the corners to the image edges with sub-pixel precision.
    pub refine_corners: bool,
}

impl DetectParams {
    /// Defaults with the area range set to 0.5%..60% of the frame.
    pub fn for_frame(width: usize, height: usize) -> Self {
        let frame = (width * height) as f64;
        Self {
            canny_low: 50.0,
            canny_high: 150.0,
            blur_kernel: 5,
            blur_sigma: 1.4,
            pyramid_depth: 1,
            equalize_clip: 4.0,
            hough: HoughParams::default(),
            line_thickness: 1,
            line_extension: 0.0,
            overlay_edges: true,
            dilation_radius: 1,
            approx_epsilon_frac: 0.02,
            area_min: 0.005 * frame,
            area_max: 0.6 * frame,
            aspect_min: 0.33,
            aspect_max: 3.0,
            hull_ratio_min: 0.9,
            angle_tolerance_deg: 25.0,
            bhattacharyya_threshold: 0.3,
            hist_filter: true,
            refine_corners: true,
        }
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        let checks = [
            (self.canny_low > 0.0 && self.canny_low < self.canny_high, "canny thresholds"),
            (self.blur_kernel >= 3 && self.blur_kernel % 2 == 1, "blur kernel"),
            (self.blur_sigma > 0.0, "blur sigma"),
            (self.equalize_clip >= 1.0, "equalization clip limit"),
            (self.hough.rho_res > 0.0, "hough rho resolution"),
            (
                self.hough.theta_res > 0.0 && self.hough.theta_res < std::f64::consts::PI,
                "hough theta resolution",
            ),
            (self.hough.votes > 0, "hough votes"),
            (self.hough.min_line_length > 0.0, "hough min line length"),
            (self.line_thickness > 0, "line thickness"),
            (self.line_extension >= 0.0, "line extension"),
            (self.dilation_radius > 0, "dilation radius"),
            (
                self.approx_epsilon_frac > 0.0 && self.approx_epsilon_frac < 1.0,
                "approximation epsilon",
            ),
            (self.area_min > 0.0 && self.area_min < self.area_max, "area range"),
            (self.aspect_min > 0.0 && self.aspect_min < self.aspect_max, "aspect range"),
            (
                self.hull_ratio_min > 0.0 && self.hull_ratio_min <= 1.0,
                "hull ratio",
            ),
            (
                self.angle_tolerance_deg > 0.0 && self.angle_tolerance_deg < 90.0,
                "angle tolerance",
            ),
            (
                self.bhattacharyya_threshold > 0.0 && self.bhattacharyya_threshold <= 1.0,
                "bhattacharyya threshold",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, name)) => Err(DetectError::Param(name)),
            None => Ok(()),
        }
    }
}

impl Default for DetectParams {
    fn default() -> Self {
        Self::for_frame(640, 480)
    }
}

/// Polygon edges shorter than this many approximation tolerances are
/// treated as cut-off corners.
const CORNER_CUT_EPSILONS: f64 = 3.0;

/// Smoothed, equalized grayscale frame as fed to the edge detector.
pub fn preprocess(frame: &RgbImage, params: &DetectParams) -> Result<GrayImage, DetectError> {
    let gray = imaging::rgb_to_gray(frame);
    let mut img = imaging::gaussian_blur(&gray, params.blur_kernel, params.blur_sigma)?;
    for _ in 0..params.pyramid_depth {
        if img.width() < 2 || img.height() < 2 {
            break;
        }
        let (w, h) = (img.width(), img.height());
        let up = imaging::pyr_up(&imaging::pyr_down(&img)?)?;
        img = GrayImage::from_fn(w, h, |x, y| up.get(x, y))?;
    }
    Ok(imaging::equalize_histogram_clipped(&img, params.equalize_clip)?)
}

/// Geometric candidates in the frame, before histogram scoring.
pub fn find_candidates(frame: &RgbImage, params: &DetectParams) -> Result<Vec<WindowCandidate>, DetectError> {
    params.validate()?;
    let pre = preprocess(frame, params)?;
    let edges = imaging::canny(&pre, params.canny_low, params.canny_high)?;
    let lines: Vec<LineSegment> = hough_lines_p(&edges, &params.hough)
        .iter()
        .map(|l| l.extended(params.line_extension))
        .collect();
    let mut drawn = rasterize_segments(&lines, frame.width(), frame.height(), params.line_thickness);
    if params.overlay_edges {
        for (x, y) in edges.iter_set() {
            drawn.set(x, y, true);
        }
    }
    let closed = imaging::dilate(&drawn, params.dilation_radius)?;
    let polys: Vec<Polygon> = find_contours(&closed)
        .iter()
        .filter_map(|c| {
            let eps = params.approx_epsilon_frac * c.perimeter();
            approx_polygon(c, eps)
                .ok()
                .map(|p| collapse_short_edges(&p, CORNER_CUT_EPSILONS * eps))
        })
        .collect();
    let mut candidates = filter_candidates(&polys, params);
    if params.refine_corners {
        let gray = imaging::rgb_to_gray(frame);
        for c in candidates.iter_mut() {
            let refined = refine_corners(&gray, &c.corners)
                .and_then(|r| polygon::candidate_from_corners(&r))
                .filter(|r| satisfies_constraints(r, params));
            if let Some(r) = refined {
                *c = r;
            }
        }
    }
    Ok(candidates)
}

/// Scores every geometric candidate against `reference`. Candidates whose
/// interior holds no pixel centre are dropped.
pub fn score_candidates(
    frame: &RgbImage,
    reference: &Histogram,
    candidates: Vec<WindowCandidate>,
) -> Result<Vec<WindowCandidate>, DetectError> {
    let mut out = Vec::with_capacity(candidates.len());
    for mut c in candidates {
        let hist = match region_histogram(frame, &c.corners) {
            Ok(h) => h,
            Err(DetectError::EmptyRegion) => continue,
            Err(e) => return Err(e),
        };
        c.hist_distance = Some(bhattacharyya_distance(&hist, reference)?);
        out.push(c);
    }
    Ok(out)
}

/// Picks the detection among scored candidates: lowest distance within
/// the threshold, larger area on ties. With the histogram filter off, the
/// largest candidate wins.
pub fn select_candidate(candidates: &[WindowCandidate], params: &DetectParams) -> Option<WindowCandidate> {
    if !params.hist_filter {
        return candidates
            .iter()
            .max_by(|a, b| a.area.total_cmp(&b.area))
            .cloned();
    }
    candidates
        .iter()
        .filter(|c| c.hist_distance.is_some_and(|d| d <= params.bhattacharyya_threshold))
        .min_by(|a, b| {
            let (da, db) = (a.hist_distance.unwrap_or(1.0), b.hist_distance.unwrap_or(1.0));
            da.total_cmp(&db).then(b.area.total_cmp(&a.area))
        })
        .cloned()
}

/// Full pipeline on one frame. `Ok(None)` means no window was found; errors
/// only report invalid parameters or reference histograms.
pub fn detect_window(
    frame: &RgbImage,
    reference: &Histogram,
    params: &DetectParams,
) -> Result<Option<WindowCandidate>, DetectError> {
    let candidates = find_candidates(frame, params)?;
    let scored = if params.hist_filter {
        score_candidates(frame, reference, candidates)?
    } else {
        candidates
    };
    Ok(select_candidate(&scored, params))
}

/// Copy of `frame` with the candidate outlined in green and its centroid
/// marked in yellow.
pub fn draw_detection(frame: &RgbImage, candidate: &WindowCandidate) -> RgbImage {
    const GREEN: [u8; 3] = [0, 255, 0];
    const YELLOW: [u8; 3] = [255, 255, 0];
    let mut out = frame.clone();
    for i in 0..4 {
        let (a, b) = (candidate.corners[i], candidate.corners[(i + 1) % 4]);
        let trace = bresenham(
            a.x.round() as i64,
            a.y.round() as i64,
            b.x.round() as i64,
            b.y.round() as i64,
        );
        for (x, y) in trace {
            for (ox, oy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                out.put((x + ox) as isize, (y + oy) as isize, GREEN);
            }
        }
    }
    let (cx, cy) = (candidate.centroid.x.round() as isize, candidate.centroid.y.round() as isize);
    for dy in -3..=3isize {
        for dx in -3..=3isize {
            if dx * dx + dy * dy <= 9 {
                out.put(cx + dx, cy + dy, YELLOW);
            }
        }
    }
    out
}
