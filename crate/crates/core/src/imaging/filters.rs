use super::{quantize, GrayImage, ImagingError};

/// L1-normalized 1-D Gaussian taps of odd length `size`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>, ImagingError> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(ImagingError::KernelSize(size));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(ImagingError::Sigma(sigma));
    }
    let half = (size / 2) as isize;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Row-major float plane used for intermediate results.
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.data().iter().map(|&v| v as f64).collect(),
        }
    }

    #[inline]
    fn at(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    fn to_gray(&self) -> GrayImage {
        GrayImage::new(
            self.width,
            self.height,
            self.data.iter().map(|&v| quantize(v)).collect(),
        )
        .expect("plane dimensions are valid")
    }

    fn convolve_rows(&self, taps: &[f64]) -> Self {
        let half = (taps.len() / 2) as isize;
        let mut out = Vec::with_capacity(self.data.len());
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    acc += t * self.at(x + k as isize - half, y);
                }
                out.push(acc);
            }
        }
        Self {
            width: self.width,
            height: self.height,
            data: out,
        }
    }

    fn convolve_cols(&self, taps: &[f64]) -> Self {
        let half = (taps.len() / 2) as isize;
        let mut out = Vec::with_capacity(self.data.len());
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    acc += t * self.at(x, y + k as isize - half);
                }
                out.push(acc);
            }
        }
        Self {
            width: self.width,
            height: self.height,
            data: out,
        }
    }
}

/// Separable Gaussian smoothing with edge replication.
pub fn gaussian_blur(
    img: &GrayImage,
    kernel_size: usize,
    sigma: f64,
) -> Result<GrayImage, ImagingError> {
    let taps = gaussian_kernel(kernel_size, sigma)?;
    let plane = Plane::from_gray(img);
    Ok(plane.convolve_rows(&taps).convolve_cols(&taps).to_gray())
}

const BINOMIAL5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Binomial 5x5 smoothing followed by dropping odd rows and columns.
/// Output is `ceil(w/2) x ceil(h/2)`.
pub fn pyr_down(img: &GrayImage) -> Result<GrayImage, ImagingError> {
    let (w, h) = (img.width(), img.height());
    if w < 2 || h < 2 {
        return Err(ImagingError::TooSmall {
            width: w,
            height: h,
        });
    }
    let smooth = Plane::from_gray(img)
        .convolve_rows(&BINOMIAL5)
        .convolve_cols(&BINOMIAL5);
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            out.push(quantize(smooth.data[2 * y * w + 2 * x]));
        }
    }
    GrayImage::new(ow, oh, out)
}

/// Doubles both dimensions: zero insertion followed by the binomial kernel
/// with gain 4, evaluated in polyphase form on the edge-replicated source.
pub fn pyr_up(img: &GrayImage) -> Result<GrayImage, ImagingError> {
    let src = Plane::from_gray(img);
    let (w, h) = (src.width, src.height);
    // Even output samples see taps (1, 6, 1)/8, odd samples (4, 4)/8.
    let upsample_rows = |p: &Plane| -> Plane {
        let mut data = Vec::with_capacity(2 * p.width * p.height);
        for y in 0..p.height as isize {
            for x in 0..p.width as isize {
                let even = (p.at(x - 1, y) + 6.0 * p.at(x, y) + p.at(x + 1, y)) / 8.0;
                let odd = (p.at(x, y) + p.at(x + 1, y)) / 2.0;
                data.push(even);
                data.push(odd);
            }
        }
        Plane {
            width: 2 * p.width,
            height: p.height,
            data,
        }
    };
    let wide = upsample_rows(&src);
    let mut data = vec![0.0; 4 * w * h];
    let ow = 2 * w;
    for y in 0..h as isize {
        for x in 0..ow as isize {
            let even = (wide.at(x, y - 1) + 6.0 * wide.at(x, y) + wide.at(x, y + 1)) / 8.0;
            let odd = (wide.at(x, y) + wide.at(x, y + 1)) / 2.0;
            data[(2 * y as usize) * ow + x as usize] = even;
            data[(2 * y as usize + 1) * ow + x as usize] = odd;
        }
    }
    Ok(Plane {
        width: ow,
        height: 2 * h,
        data,
    }
    .to_gray())
}

/// Classic CDF remapping. Constant images are returned unchanged.
pub fn equalize_histogram(img: &GrayImage) -> GrayImage {
    equalize_with_clip(img, f64::INFINITY)
}

/// Contrast-limited variant: histogram bins are clipped at `clip_limit`
/// times the mean bin count and the excess is spread evenly over all
/// levels before the CDF is taken. This bounds the slope of the mapping,
/// so a near-uniform region with a little noise is not stretched into
/// full-range texture. Constant images are returned unchanged.
pub fn equalize_histogram_clipped(img: &GrayImage, clip_limit: f64) -> Result<GrayImage, ImagingError> {
    if !(clip_limit >= 1.0) {
        return Err(ImagingError::ClipLimit(clip_limit));
    }
    Ok(equalize_with_clip(img, clip_limit))
}

fn equalize_with_clip(img: &GrayImage, clip_limit: f64) -> GrayImage {
    let mut hist = [0usize; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let lo = hist.iter().position(|&c| c > 0).unwrap_or(0);
    let hi = hist.iter().rposition(|&c| c > 0).unwrap_or(0);
    if lo == hi {
        return img.clone();
    }
    let n = img.data().len() as f64;
    let clip = clip_limit * n / 256.0;
    let excess: f64 = hist.iter().map(|&c| (c as f64 - clip).max(0.0)).sum();
    let spread = excess / 256.0;
    let mut cdf = [0.0f64; 256];
    let mut acc = 0.0;
    for (i, &c) in hist.iter().enumerate() {
        acc += (c as f64).min(clip) + spread;
        cdf[i] = acc;
    }
    let (base, top) = (cdf[lo], cdf[hi]);
    let mut lut = [0u8; 256];
    for (i, slot) in lut.iter_mut().enumerate() {
        *slot = quantize(255.0 * ((cdf[i] - base) / (top - base)).clamp(0.0, 1.0));
    }
    let data = img.data().iter().map(|&v| lut[v as usize]).collect();
    GrayImage::new(img.width(), img.height(), data).expect("same dimensions")
}
