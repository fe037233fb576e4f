//! Frame corruptions for transfer evaluation: additive Gaussian noise,
//! a fixed-hue tint applied on a coin flip, and a random-hue tint.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{hsv_to_rgb, rgb_to_hsv, HsvPixel, Image};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbCategory {
    None,
    Easy,
    Moderate,
    Difficult,
}

impl PerturbCategory {
    pub const ALL: [PerturbCategory; 4] = [
        PerturbCategory::None,
        PerturbCategory::Easy,
        PerturbCategory::Moderate,
        PerturbCategory::Difficult,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PerturbCategory::None => "none",
            PerturbCategory::Easy => "easy",
            PerturbCategory::Moderate => "moderate",
            PerturbCategory::Difficult => "difficult",
        }
    }
}

impl fmt::Display for PerturbCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerturbCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PerturbCategory::None),
            "easy" => Ok(PerturbCategory::Easy),
            "moderate" => Ok(PerturbCategory::Moderate),
            "difficult" => Ok(PerturbCategory::Difficult),
            other => Err(Error::InvalidArgument(format!(
                "unknown perturbation category {other:?} (expected none|easy|moderate|difficult)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbConfig {
    /// Noise standard deviation in 8-bit intensity units.
    pub noise_sigma: f64,
    /// Hue used by the moderate category.
    pub tint_hue: f64,
    /// Saturation floor imposed by a tint.
    pub tint_strength: f64,
    /// Probability that a moderate or difficult frame is tinted.
    pub coin_p: f64,
    pub seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 10.0,
            tint_hue: 0.25,
            tint_strength: 0.6,
            coin_p: 0.5,
            seed: 0,
        }
    }
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise_sigma {}", self.noise_sigma)));
        }
        if !(0.0..1.0).contains(&self.tint_hue) {
            return Err(Error::InvalidArgument(format!("tint_hue {} not in [0, 1)", self.tint_hue)));
        }
        if !(0.0..=1.0).contains(&self.tint_strength) {
            return Err(Error::InvalidArgument(format!("tint_strength {}", self.tint_strength)));
        }
        if !(0.0..=1.0).contains(&self.coin_p) {
            return Err(Error::InvalidArgument(format!("coin_p {} not in [0, 1]", self.coin_p)));
        }
        Ok(())
    }
}

pub fn gaussian_noise<R: Rng + ?Sized>(img: &Image, sigma: f64, rng: &mut R) -> Image {
    if sigma <= 0.0 {
        return img.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    let mut out = img.clone();
    for v in out.data_mut() {
        let noisy = f64::from(*v) + normal.sample(rng);
        *v = noisy.round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Replaces every pixel's hue and raises its saturation to at least `strength`.
pub fn tint(img: &Image, hue: f64, strength: f64) -> Result<Image> {
    img.require_rgb()?;
    let mut out = img.clone();
    for px in out.data_mut().chunks_exact_mut(3) {
        let hsv = rgb_to_hsv([px[0], px[1], px[2]]);
        if hsv.saturation == 0.0 && strength == 0.0 {
            continue;
        }
        let tinted = hsv_to_rgb(HsvPixel {
            hue,
            saturation: hsv.saturation.max(strength),
            value: hsv.value,
        });
        px.copy_from_slice(&tinted);
    }
    Ok(out)
}

/// What a perturbation did to a frame; useful for statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Applied {
    Untouched,
    Noise,
    Tint { hue: f64 },
}

pub fn perturb_frame_traced<R: Rng + ?Sized>(
    img: &Image,
    cat: PerturbCategory,
    cfg: &PerturbConfig,
    rng: &mut R,
) -> Result<(Image, Applied)> {
    match cat {
        PerturbCategory::None => Ok((img.clone(), Applied::Untouched)),
        PerturbCategory::Easy => Ok((gaussian_noise(img, cfg.noise_sigma, rng), Applied::Noise)),
        PerturbCategory::Moderate | PerturbCategory::Difficult => {
            // Draw the hue unconditionally so the stream advances the same way either branch.
            let fire = rng.random::<f64>() < cfg.coin_p;
            let random_hue: f64 = rng.random();
            if !fire {
                return Ok((img.clone(), Applied::Untouched));
            }
            let hue = if cat == PerturbCategory::Moderate {
                cfg.tint_hue
            } else {
                random_hue
            };
            Ok((tint(img, hue, cfg.tint_strength)?, Applied::Tint { hue }))
        }
    }
}

pub fn perturb_frame<R: Rng + ?Sized>(
    img: &Image,
    cat: PerturbCategory,
    cfg: &PerturbConfig,
    rng: &mut R,
) -> Result<Image> {
    perturb_frame_traced(img, cat, cfg, rng).map(|(img, _)| img)
}

/// Perturbs frame `index` using the stream derived from `(cfg.seed, index)`.
pub fn perturb_indexed(
    img: &Image,
    cat: PerturbCategory,
    cfg: &PerturbConfig,
    index: u64,
) -> Result<(Image, Applied)> {
    let mut rng = crate::rng::stream(cfg.seed, index);
    perturb_frame_traced(img, cat, cfg, &mut rng)
}
