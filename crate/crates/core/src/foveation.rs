//! Saliency-weighted foveation and the observation preprocessing path.
//!
//! A frame `I` with saliency `S` is foveated by the per-pixel mask
//! `m = S + alpha * (1 - S)`, giving `I * m`. At `alpha = 0` only salient
//! pixels survive; at `alpha = 1` the frame passes through untouched.

use crate::error::{Error, Result};
use crate::imaging::{jet_colormap, rgb_to_gray, FloatPlane, Image};
use crate::saliency::{spectral_residual, SaliencyMap, SpectralConfig};

/// Side of the square frame the agent pipeline resizes to before grayscale conversion.
pub const VIEW_SIDE: usize = 84;
/// Side of the agent's input plane.
pub const INPUT_SIDE: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoveationConfig {
    pub alpha: f64,
    /// Heatmap weight, used by visualization only.
    pub overlay_weight: f64,
    pub enabled: bool,
    /// Use the additive `I + m` blend (intensities on a unit scale, clamped) instead of `I * m`.
    pub literal_additive: bool,
}

impl Default for FoveationConfig {
    fn default() -> Self {
        Self {
            alpha: 0.69,
            overlay_weight: 0.5,
            enabled: false,
            literal_additive: false,
        }
    }
}

impl FoveationConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit("alpha", self.alpha)?;
        check_unit("overlay_weight", self.overlay_weight)
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

fn check_dims(img: &Image, smap: &SaliencyMap) -> Result<()> {
    if img.width() != smap.width() || img.height() != smap.height() {
        return Err(Error::Dimensions(format!(
            "image is {}x{}, saliency map is {}x{}",
            img.width(),
            img.height(),
            smap.width(),
            smap.height()
        )));
    }
    Ok(())
}

/// The foveation mask `S + alpha (1 - S)`, written so that `alpha = 1` or `S = 1` give exactly 1.
#[inline]
pub fn foveation_mask(s: f64, alpha: f64) -> f64 {
    1.0 - (1.0 - alpha) * (1.0 - s)
}

/// Multiplies every channel by the foveation mask and rounds back to 8 bits.
pub fn blend_foveate(img: &Image, smap: &SaliencyMap, alpha: f64) -> Result<Image> {
    check_unit("alpha", alpha)?;
    check_dims(img, smap)?;
    let c = img.channels();
    let mut out = img.clone();
    for (px, &s) in out.data_mut().chunks_exact_mut(c).zip(smap.data()) {
        let m = foveation_mask(s, alpha);
        for v in px {
            *v = (f64::from(*v) * m).round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

/// Additive variant `I + m` on unit-scaled intensities, clamped to the 8-bit range.
pub fn blend_additive(img: &Image, smap: &SaliencyMap, alpha: f64) -> Result<Image> {
    check_unit("alpha", alpha)?;
    check_dims(img, smap)?;
    let c = img.channels();
    let mut out = img.clone();
    for (px, &s) in out.data_mut().chunks_exact_mut(c).zip(smap.data()) {
        let m = foveation_mask(s, alpha);
        for v in px {
            let unit = (f64::from(*v) / 255.0 + m).clamp(0.0, 1.0);
            *v = (unit * 255.0).round() as u8;
        }
    }
    Ok(out)
}

/// Jet heatmap of the saliency map laid over the image with weight `w`.
pub fn heatmap_overlay(img: &Image, smap: &SaliencyMap, w: f64) -> Result<Image> {
    check_unit("overlay weight", w)?;
    img.require_rgb()?;
    check_dims(img, smap)?;
    let mut out = img.clone();
    for (px, &s) in out.data_mut().chunks_exact_mut(3).zip(smap.data()) {
        let heat = jet_colormap(s);
        for (v, h) in px.iter_mut().zip(heat) {
            *v = ((1.0 - w) * f64::from(*v) + w * f64::from(h)).round() as u8;
        }
    }
    Ok(out)
}

/// Foveated (or passthrough) frame at its native resolution.
pub fn foveate_frame(raw: &Image, cfg: &FoveationConfig, scfg: &SpectralConfig) -> Result<Image> {
    if !cfg.enabled {
        return Ok(raw.clone());
    }
    let smap = spectral_residual(&rgb_to_gray(raw)?, scfg)?;
    if cfg.literal_additive {
        blend_additive(raw, &smap, cfg.alpha)
    } else {
        blend_foveate(raw, &smap, cfg.alpha)
    }
}

/// Saliency, foveation, 84x84 resize, grayscale in `[0, 1]`, then 21x21 downsample.
pub fn preprocess_observation(
    raw: &Image,
    cfg: &FoveationConfig,
    scfg: &SpectralConfig,
) -> Result<FloatPlane> {
    raw.require_rgb()?;
    cfg.validate()?;
    let foveated = foveate_frame(raw, cfg, scfg)?;
    let view = foveated.resize_bilinear(VIEW_SIDE, VIEW_SIDE)?;
    let gray = rgb_to_gray(&view)?.scaled(1.0 / 255.0);
    gray.resize_bilinear(INPUT_SIDE, INPUT_SIDE)
}
