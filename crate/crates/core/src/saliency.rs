//! Spectral-residual saliency.
//!
//! The log-amplitude spectrum of a frame is compared against its local
//! average; what is left over (the residual) is transformed back to the
//! spatial domain with the original phase. Energy of that reconstruction,
//! blurred and normalized, marks the regions that stand out.

use std::cell::RefCell;

pub use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::imaging::FloatPlane;

/// Row-major grid of complex frequency (or spatial) samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }

    pub fn real_plane(&self) -> Result<FloatPlane> {
        FloatPlane::new(self.width, self.height, self.data.iter().map(|c| c.re).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Side of the square working raster; one of 32, 64, 128.
    pub working_size: usize,
    /// Guard added to amplitudes before taking the log.
    pub epsilon: f64,
    /// Width of the box filter that averages the log spectrum. Odd, at least 3.
    pub box_kernel: usize,
    /// Gaussian smoothing of the reconstructed map, in working-scale pixels.
    pub blur_sigma: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            working_size: 64,
            epsilon: 1e-8,
            box_kernel: 3,
            blur_sigma: 2.5,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if ![32, 64, 128].contains(&self.working_size) {
            return Err(Error::InvalidArgument(format!(
                "working_size must be 32, 64 or 128, got {}",
                self.working_size
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.box_kernel < 3 || self.box_kernel % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "box_kernel must be odd and >= 3, got {}",
                self.box_kernel
            )));
        }
        if !(self.blur_sigma > 0.0) || !self.blur_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "blur_sigma must be > 0, got {}",
                self.blur_sigma
            )));
        }
        Ok(())
    }
}

/// Saliency values in `[0, 1]`. A degenerate map is all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    plane: FloatPlane,
    degenerate: bool,
}

impl SaliencyMap {
    /// Wraps a plane whose samples are already in `[0, 1]`.
    pub fn from_normalized(plane: FloatPlane) -> Result<Self> {
        if plane.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("saliency samples must lie in [0, 1]".into()));
        }
        let degenerate = plane.data().iter().all(|&v| v == 0.0);
        Ok(Self { plane, degenerate })
    }

    pub fn uniform(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::from_normalized(FloatPlane::filled(width, height, value)?)
    }

    pub fn width(&self) -> usize {
        self.plane.width()
    }

    pub fn height(&self) -> usize {
        self.plane.height()
    }

    pub fn data(&self) -> &[f64] {
        self.plane.data()
    }

    pub fn plane(&self) -> &FloatPlane {
        &self.plane
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_pow2_square(width: usize, height: usize) -> Result<()> {
    if width != height || !width.is_power_of_two() {
        return Err(Error::Dimensions(format!(
            "FFT needs a square power-of-two grid, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Separable in-place transform: rows, then columns. Unnormalized.
fn transform(width: usize, height: usize, data: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let (row_fft, col_fft) = if inverse {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        } else {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        };
        row_fft.process(data);
        let mut column = vec![Complex64::default(); height];
        for x in 0..width {
            for (y, c) in column.iter_mut().enumerate() {
                *c = data[y * width + x];
            }
            col_fft.process(&mut column);
            for (y, c) in column.iter().enumerate() {
                data[y * width + x] = *c;
            }
        }
    });
}

/// Forward 2-D DFT, unnormalized.
pub fn fft2d(plane: &FloatPlane) -> Result<ComplexMatrix> {
    let (w, h) = (plane.width(), plane.height());
    check_pow2_square(w, h)?;
    let mut data: Vec<Complex64> = plane.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(w, h, &mut data, false);
    Ok(ComplexMatrix {
        width: w,
        height: h,
        data,
    })
}

/// Forward 2-D DFT of complex input, unnormalized.
pub fn fft2d_complex(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_pow2_square(m.width, m.height)?;
    let mut out = m.clone();
    transform(m.width, m.height, &mut out.data, false);
    Ok(out)
}

/// Inverse 2-D DFT, scaled by `1 / (width * height)`.
pub fn ifft2d(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_pow2_square(m.width, m.height)?;
    if m.data.len() != m.width * m.height {
        return Err(Error::Dimensions("complex matrix length mismatch".into()));
    }
    let mut out = m.clone();
    transform(m.width, m.height, &mut out.data, true);
    let scale = 1.0 / (m.width * m.height) as f64;
    for c in &mut out.data {
        *c *= scale;
    }
    Ok(out)
}

/// Min-max normalization to `[0, 1]`; a flat plane becomes all zeros and is flagged degenerate.
pub fn normalize_map(plane: &FloatPlane) -> Result<SaliencyMap> {
    // FloatPlane construction already rejects NaN; planes built internally are re-checked here.
    if plane.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("saliency normalization input".into()));
    }
    let (lo, hi) = plane.min_max();
    let (w, h) = (plane.width(), plane.height());
    if hi <= lo {
        return Ok(SaliencyMap {
            plane: FloatPlane::from_parts_unchecked(w, h, vec![0.0; w * h]),
            degenerate: true,
        });
    }
    let span = hi - lo;
    let data = plane
        .data()
        .iter()
        .map(|&v| if v == hi { 1.0 } else { ((v - lo) / span).clamp(0.0, 1.0) })
        .collect();
    Ok(SaliencyMap {
        plane: FloatPlane::from_parts_unchecked(w, h, data),
        degenerate: false,
    })
}

/// Convolves rows then columns with a normalized 1-D kernel, clamping at the edges.
fn separable(plane: &FloatPlane, kernel: &[f64]) -> FloatPlane {
    let (w, h) = (plane.width(), plane.height());
    let r = kernel.len() / 2;
    let src = plane.data();
    let clampi = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; w * h];
    let mut padded = vec![0.0; w + 2 * r];
    for (row, out) in src.chunks_exact(w).zip(tmp.chunks_exact_mut(w)) {
        for (i, p) in padded.iter_mut().enumerate() {
            *p = row[clampi(i as isize - r as isize, w)];
        }
        for (x, o) in out.iter_mut().enumerate() {
            *o = padded[x..x + kernel.len()].iter().zip(kernel).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for (y, dst) in out.chunks_exact_mut(w).enumerate() {
        for (k, &wk) in kernel.iter().enumerate() {
            let sy = clampi(y as isize + k as isize - r as isize, h);
            for (d, &t) in dst.iter_mut().zip(&tmp[sy * w..(sy + 1) * w]) {
                *d += wk * t;
            }
        }
    }
    FloatPlane::from_parts_unchecked(w, h, out)
}

/// Mean over a `k x k` window with clamp-to-edge borders.
pub fn box_filter(plane: &FloatPlane, k: usize) -> Result<FloatPlane> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidArgument(format!("box kernel must be odd, got {k}")));
    }
    Ok(separable(plane, &vec![1.0 / k as f64; k]))
}

/// Sampled Gaussian truncated at `ceil(3 sigma)`, normalized to unit sum.
pub fn gaussian_blur(plane: &FloatPlane, sigma: f64) -> Result<FloatPlane> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("blur sigma must be > 0, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|v| *v /= total);
    Ok(separable(plane, &kernel))
}

/// Saliency map of a luminance plane, returned at the plane's own resolution.
pub fn spectral_residual(gray: &FloatPlane, cfg: &SpectralConfig) -> Result<SaliencyMap> {
    cfg.validate()?;
    let (w, h) = (gray.width(), gray.height());
    let min_side = cfg.working_size / 8;
    if w < min_side || h < min_side {
        return Err(Error::Dimensions(format!(
            "{w}x{h} input is below the {min_side}px minimum for working size {}",
            cfg.working_size
        )));
    }
    let (lo, hi) = gray.min_max();
    if hi <= lo {
        return normalize_map(&FloatPlane::filled(w, h, 0.0)?);
    }

    let n = cfg.working_size;
    let work = gray.resize_bilinear(n, n)?;
    let spectrum = fft2d(&work)?;

    let log_amp: Vec<f64> = spectrum.data.iter().map(|c| (c.norm_sqr().sqrt() + cfg.epsilon).ln()).collect();
    let log_amp = FloatPlane::from_parts_unchecked(n, n, log_amp);
    let averaged = box_filter(&log_amp, cfg.box_kernel)?;

    let residual: Vec<Complex64> = spectrum
        .data
        .iter()
        .zip(log_amp.data().iter().zip(averaged.data()))
        .map(|(&c, (&l, &avg))| {
            let amp = c.norm_sqr().sqrt();
            let scale = (l - avg).exp();
            if amp > 0.0 {
                c * (scale / amp)
            } else {
                Complex64::new(scale, 0.0)
            }
        })
        .collect();
    let back = ifft2d(&ComplexMatrix {
        width: n,
        height: n,
        data: residual,
    })?;
    let energy = FloatPlane::new(n, n, back.data.iter().map(|c| c.norm_sqr()).collect())?;

    let smooth = gaussian_blur(&energy, cfg.blur_sigma)?;
    let at_working = normalize_map(&smooth)?;
    if at_working.is_degenerate() {
        return normalize_map(&FloatPlane::filled(w, h, 0.0)?);
    }
    let resized = at_working.plane.resize_bilinear(w, h)?;
    normalize_map(&resized)
}
