//! Pixel rasters, color conversions, bilinear resizing and the jet colormap.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit RGB triple.
pub type Rgb = [u8; 3];

/// Row-major 8-bit raster with one (gray) or three (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions(format!("{width}x{height} image")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "images carry 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Dimensions(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        let data = color.repeat(width * height);
        Self::new(width, height, 3, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// RGB value at `(x, y)`. Panics on single-channel images or out-of-range coordinates.
    pub fn rgb(&self, x: usize, y: usize) -> Rgb {
        assert_eq!(self.channels, 3);
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_rgb(&mut self, x: usize, y: usize, c: Rgb) {
        assert_eq!(self.channels, 3);
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&c);
    }

    pub fn require_rgb(&self) -> Result<()> {
        if self.channels != 3 {
            return Err(Error::Channels {
                expected: 3,
                actual: self.channels,
            });
        }
        Ok(())
    }

    /// Bilinear resize with corner-aligned sampling; samples are rounded back to 8 bits.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<Image> {
        check_target(width, height)?;
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let xs = sample_grid(self.width, width);
        let ys = sample_grid(self.height, height);
        let c = self.channels;
        let mut out = Vec::with_capacity(width * height * c);
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                for ch in 0..c {
                    let at = |x: usize, y: usize| f64::from(self.data[(y * self.width + x) * c + ch]);
                    let v = lerp2(at(x0, y0), at(x1, y0), at(x0, y1), at(x1, y1), fx, fy);
                    out.push(v.round().clamp(0.0, 255.0) as u8);
                }
            }
        }
        Image::new(width, height, c, out)
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
        let path = path.as_ref();
        let img = image::open(path)?;
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Image::new(w as usize, h as usize, 3, rgb.into_raw())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let color = if self.channels == 3 {
            image::ExtendedColorType::Rgb8
        } else {
            image::ExtendedColorType::L8
        };
        image::save_buffer_with_format(
            path.as_ref(),
            &self.data,
            self.width as u32,
            self.height as u32,
            color,
            image::ImageFormat::Png,
        )?;
        Ok(())
    }
}

/// Row-major plane of finite real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatPlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions(format!("{width}x{height} plane")));
        }
        if data.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} plane needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("plane sample {i} = {}", data[i])));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn scaled(&self, factor: f64) -> FloatPlane {
        let data = self.data.iter().map(|v| v * factor).collect();
        Self::from_parts_unchecked(self.width, self.height, data)
    }

    /// Index of the largest sample; the first one wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        best
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Bilinear resize with corner-aligned sampling.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<FloatPlane> {
        check_target(width, height)?;
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let xs = sample_grid(self.width, width);
        let ys = sample_grid(self.height, height);
        let mut out = Vec::with_capacity(width * height);
        for &(y0, y1, fy) in &ys {
            let r0 = &self.data[y0 * self.width..(y0 + 1) * self.width];
            let r1 = &self.data[y1 * self.width..(y1 + 1) * self.width];
            for &(x0, x1, fx) in &xs {
                out.push(lerp2(r0[x0], r0[x1], r1[x0], r1[x1], fx, fy));
            }
        }
        Ok(Self::from_parts_unchecked(width, height, out))
    }

    /// Writes the `.fpl` format: u32 width, u32 height, then f32 samples, all little-endian.
    pub fn write_fpl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        for &v in &self.data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_fpl<R: Read>(mut r: R) -> Result<FloatPlane> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::io("<fpl stream>", e))?;
        if bytes.len() < 8 {
            return Err(Error::Dimensions("truncated .fpl header".into()));
        }
        let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let body = &bytes[8..];
        if body.len() != width * height * 4 {
            return Err(Error::Dimensions(format!(
                ".fpl body holds {} bytes, {width}x{height} needs {}",
                body.len(),
                width * height * 4
            )));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        FloatPlane::new(width, height, data)
    }

    pub fn save_fpl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_fpl(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load_fpl(path: impl AsRef<Path>) -> Result<FloatPlane> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_fpl(std::io::BufReader::new(file))
    }

    /// Maps samples in `[0, 1]` to an 8-bit grayscale image.
    pub fn to_gray_image(&self) -> Image {
        let data = self
            .data
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

fn check_target(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimensions(format!("resize target {width}x{height}")));
    }
    Ok(())
}

/// For each output coordinate: the two source taps and the fractional weight of the second.
fn sample_grid(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = if dst > 1 {
        (src - 1) as f64 / (dst - 1) as f64
    } else {
        0.0
    };
    (0..dst)
        .map(|i| {
            let pos = i as f64 * scale;
            let i0 = (pos.floor() as usize).min(src - 1);
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

fn lerp2(p00: f64, p10: f64, p01: f64, p11: f64, fx: f64, fy: f64) -> f64 {
    let top = p00 + (p10 - p00) * fx;
    let bottom = p01 + (p11 - p01) * fx;
    top + (bottom - top) * fy
}

/// BT.601 luminance in `[0, 255]`.
pub fn rgb_to_gray(img: &Image) -> Result<FloatPlane> {
    img.require_rgb()?;
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| luma(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])))
        .collect();
    Ok(FloatPlane::from_parts_unchecked(img.width, img.height, data))
}

#[inline]
pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Hexcone HSV; hue is a fraction of the full circle in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub hue: f64,
    pub saturation: f64,
    pub value: f64,
}

pub fn rgb_to_hsv(p: Rgb) -> HsvPixel {
    let [r, g, b] = p.map(|c| f64::from(c) / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let saturation = if max > 0.0 { delta / max } else { 0.0 };
    let hue = if delta == 0.0 {
        0.0
    } else {
        let sector = if max == r {
            ((g - b) / delta).rem_euclid(6.0)
        } else if max == g {
            (b - r) / delta + 2.0
        } else {
            (r - g) / delta + 4.0
        };
        (sector / 6.0).rem_euclid(1.0)
    };
    HsvPixel {
        hue,
        saturation,
        value: max,
    }
}

pub fn hsv_to_rgb(p: HsvPixel) -> Rgb {
    let h = p.hue.rem_euclid(1.0) * 6.0;
    let s = p.saturation.clamp(0.0, 1.0);
    let v = p.value.clamp(0.0, 1.0);
    let sector = (h.floor() as usize).min(5);
    let f = h - sector as f64;
    let lo = v * (1.0 - s);
    let falling = v * (1.0 - s * f);
    let rising = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (v, rising, lo),
        1 => (falling, v, lo),
        2 => (lo, v, rising),
        3 => (lo, falling, v),
        4 => (rising, lo, v),
        _ => (v, lo, falling),
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

/// Piecewise-linear jet: each channel is a trapezoid (blue centred on 0.25,
/// green on 0.5, red on 0.75) so the ends sit at half intensity.
pub fn jet_colormap(v: f64) -> Rgb {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let ramp = |centre: f64| (1.5 - (4.0 * v - centre).abs()).clamp(0.0, 1.0);
    [ramp(3.0), ramp(2.0), ramp(1.0)].map(|c| (c * 255.0).round() as u8)
}
