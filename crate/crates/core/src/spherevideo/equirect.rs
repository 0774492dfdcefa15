use image::RgbImage;

use super::{CubeMapFrame, SourceError};
use crate::geometry::{Direction, SphericalPoint};

/// Bilinear lookup in an equirectangular image, 0..=255 range.
///
/// Column 0 starts at `theta = -pi` and columns wrap; row 0 starts at the
/// north pole (`rho = 0`) and rows clamp.
pub fn sample_equirect(img: &RgbImage, p: &SphericalPoint<f64>) -> [f64; 3] {
    use std::f64::consts::PI;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let x = (p.theta() + PI) / (2.0 * PI) * w as f64 - 0.5;
    let y = (p.rho() / PI * h as f64 - 0.5).clamp(0.0, (h - 1) as f64);
    let x0f = x.floor();
    let fx = x - x0f;
    let x0 = (x0f as i64).rem_euclid(w as i64) as usize;
    let x1 = (x0 + 1) % w;
    let y0 = y.floor() as usize;
    let y1 = (y0 + 1).min(h - 1);
    let fy = y - y0 as f64;
    let px = |i: usize, j: usize| img.get_pixel(i as u32, j as u32).0;
    let (c00, c10, c01, c11) = (px(x0, y0), px(x1, y0), px(x0, y1), px(x1, y1));
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let top = c00[k] as f64 + (c10[k] as f64 - c00[k] as f64) * fx;
        let bottom = c01[k] as f64 + (c11[k] as f64 - c01[k] as f64) * fx;
        *o = top + (bottom - top) * fy;
    }
    out
}

/// Resamples an equirectangular (`W = 2H`) panorama into a cube-map.
pub fn convert_equirect_to_cubemap(
    img: &RgbImage,
    face_size: usize,
) -> Result<CubeMapFrame, SourceError> {
    if img.width() != 2 * img.height() || img.height() == 0 {
        return Err(SourceError::Format(format!(
            "equirectangular image must be 2:1, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    CubeMapFrame::from_fn(face_size, |d: Direction<f64>| {
        sample_equirect(img, &d.to_spherical()).map(|c| (c + 0.5).floor().clamp(0.0, 255.0) as u8)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn constant_panorama() {
        let img = RgbImage::from_pixel(64, 32, image::Rgb([10, 200, 30]));
        let cube = convert_equirect_to_cubemap(&img, 8).unwrap();
        assert_eq!(cube, CubeMapFrame::uniform(8, [10, 200, 30]).unwrap());
    }

    #[test]
    fn wrong_aspect() {
        let img = RgbImage::new(100, 60);
        assert!(matches!(
            convert_equirect_to_cubemap(&img, 8),
            Err(SourceError::Format(_))
        ));
    }

    #[test]
    fn azimuth_bands_survive_conversion() {
        // smooth periodic colour in theta
        let (w, h) = (1024u32, 512u32);
        let band = |theta: f64| {
            [
                127.5 + 100.0 * theta.cos(),
                127.5 + 100.0 * theta.sin(),
                127.5 + 60.0 * (2.0 * theta).cos(),
            ]
        };
        let img = RgbImage::from_fn(w, h, |x, _| {
            let theta = (x as f64 + 0.5) / w as f64 * 2.0 * PI - PI;
            image::Rgb(band(theta).map(|c| c.round() as u8))
        });
        let cube = convert_equirect_to_cubemap(&img, 256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let p = SphericalPoint::new(u * 2.0 * PI - PI, FRAC_PI_2).unwrap();
            let direct = sample_equirect(&img, &p);
            let got = cube.sample(&p.to_direction());
            for k in 0..3 {
                assert!(
                    (direct[k] - got[k] * 255.0).abs() < 2.0,
                    "{direct:?} vs {got:?}"
                );
            }
        }
    }
}
