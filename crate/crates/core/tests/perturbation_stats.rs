//! Distributional checks on the frame perturbations.

mod common;

use attend_core::imaging::{rgb_to_hsv, Image};
use attend_core::perturbation::{gaussian_noise, perturb_indexed, Applied, PerturbCategory, PerturbConfig};
use common::rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn mid_gray() -> Image {
    Image::filled(84, 84, [128, 128, 128]).unwrap()
}

#[test]
fn noise_standard_deviation() {
    let img = mid_gray();
    let mut r = rng(41);
    let mut deltas = Vec::new();
    for _ in 0..20 {
        let noisy = gaussian_noise(&img, 10.0, &mut r);
        deltas.extend(noisy.data().iter().map(|&v| f64::from(v) - 128.0));
    }
    let n = deltas.len() as f64;
    let mean = deltas.iter().sum::<f64>() / n;
    let std = (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((9.7..=10.3).contains(&std), "std {std}");
    assert!(mean.abs() < 0.1, "mean {mean}");
}

#[test]
fn moderate_coin_rate_within_three_sigma() {
    let img = Image::filled(4, 4, [128, 128, 128]).unwrap();
    let cfg = PerturbConfig::default();
    let n = 10_000;
    let fired = (0..n)
        .filter(|&i| {
            let (_, applied) = perturb_indexed(&img, PerturbCategory::Moderate, &cfg, i).unwrap();
            matches!(applied, Applied::Tint { .. })
        })
        .count();
    let rate = fired as f64 / n as f64;
    let sigma = (0.25 / n as f64).sqrt();
    assert!((rate - 0.5).abs() <= 3.0 * sigma, "rate {rate}");
}

#[test]
fn moderate_tint_uses_the_fixed_hue() {
    let img = mid_gray();
    let cfg = PerturbConfig::default();
    for i in 0..200 {
        let (out, applied) = perturb_indexed(&img, PerturbCategory::Moderate, &cfg, i).unwrap();
        match applied {
            Applied::Tint { hue } => {
                assert_eq!(hue, cfg.tint_hue);
                let seen = rgb_to_hsv(out.rgb(0, 0)).hue;
                assert!((seen - cfg.tint_hue).abs() < 0.01);
            }
            _ => assert_eq!(out, img),
        }
    }
}

#[test]
fn difficult_hues_are_uniform() {
    let img = Image::filled(4, 4, [128, 128, 128]).unwrap();
    let cfg = PerturbConfig::default();
    let mut bins = [0usize; 10];
    for i in 0..10_000 {
        let (out, applied) = perturb_indexed(&img, PerturbCategory::Difficult, &cfg, i).unwrap();
        if let Applied::Tint { hue } = applied {
            let seen = rgb_to_hsv(out.rgb(1, 1)).hue;
            let circular = (seen - hue).abs().min(1.0 - (seen - hue).abs());
            assert!(circular < 0.01, "hue {hue} rendered as {seen}");
            bins[((hue * 10.0) as usize).min(9)] += 1;
        }
    }
    let total: usize = bins.iter().sum();
    let expected = total as f64 / 10.0;
    let chi2: f64 = bins.iter().map(|&b| (b as f64 - expected).powi(2) / expected).sum();
    let p = ChiSquared::new(9.0).unwrap().sf(chi2);
    assert!(p > 0.001, "chi2 {chi2}, p {p}, bins {bins:?}");
}

#[test]
fn indexed_perturbation_is_reproducible() {
    let mut r = rng(42);
    let img = common::random_rgb(&mut r, 84, 84);
    let cfg = PerturbConfig::default();
    for cat in PerturbCategory::ALL {
        for i in [0, 7, 1_000_003] {
            assert_eq!(
                perturb_indexed(&img, cat, &cfg, i).unwrap(),
                perturb_indexed(&img, cat, &cfg, i).unwrap()
            );
        }
    }
}

#[test]
fn none_and_zero_sigma_easy_leave_frames_alone() {
    let mut r = rng(43);
    let img = common::random_rgb(&mut r, 84, 84);
    let cfg = PerturbConfig { noise_sigma: 0.0, ..PerturbConfig::default() };
    assert_eq!(perturb_indexed(&img, PerturbCategory::None, &cfg, 5).unwrap().0, img);
    assert_eq!(perturb_indexed(&img, PerturbCategory::Easy, &cfg, 5).unwrap().0, img);
}
