use std::f64::consts::PI;

use image::{Rgb, RgbImage};
use omnitrack::geometry::{Direction, SphericalPoint};
use omnitrack::spherevideo::{
    convert_equirect_to_cubemap, sample_direction, sample_equirect, CubeMapFrame, Face,
};
use omnitrack::synthetic::SyntheticSpec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth_sphere(n: usize) -> CubeMapFrame {
    SyntheticSpec {
        face_size: n,
        ..Default::default()
    }
    .scene()
    .unwrap()
}

fn max_channel_diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn perturb(d: &Direction<f64>, rng: &mut ChaCha8Rng, max_angle: f64) -> Direction<f64> {
    // random tangent offset, then renormalize
    let a = d.to_array();
    let helper = if a[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = Direction::new(
        a[1] * helper[2] - a[2] * helper[1],
        a[2] * helper[0] - a[0] * helper[2],
        a[0] * helper[1] - a[1] * helper[0],
    )
    .unwrap()
    .to_array();
    let e2 = [
        a[1] * e1[2] - a[2] * e1[1],
        a[2] * e1[0] - a[0] * e1[2],
        a[0] * e1[1] - a[1] * e1[0],
    ];
    let (r, phi) = (max_angle * unit(rng), 2.0 * PI * unit(rng));
    let (s, c) = phi.sin_cos();
    Direction::new(
        a[0] + r * (c * e1[0] + s * e2[0]),
        a[1] + r * (c * e1[1] + s * e2[1]),
        a[2] + r * (c * e1[2] + s * e2[2]),
    )
    .unwrap()
}

#[test]
fn distinct_face_colours_and_grey() {
    let colors: [[u8; 3]; 6] = [
        [255, 0, 0],
        [0, 255, 0],
        [0, 0, 255],
        [255, 255, 0],
        [0, 255, 255],
        [255, 0, 255],
    ];
    let frame = CubeMapFrame::from_fn(8, |d| colors[Face::locate(d.to_array()).0.index()]).unwrap();
    assert_eq!(
        sample_direction(&frame, &Direction::new(1.0, 0.0, 0.0).unwrap()),
        [1.0, 0.0, 0.0]
    );
    assert_eq!(
        sample_direction(&frame, &Direction::new(0.0, 0.0, -1.0).unwrap()),
        [1.0, 0.0, 1.0]
    );
    let grey = CubeMapFrame::uniform(8, [128, 128, 128]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let d = perturb(
            &Direction::new(
                unit(&mut rng) - 0.5,
                unit(&mut rng) - 0.5,
                unit(&mut rng) - 0.5,
            )
            .unwrap(),
            &mut rng,
            0.0,
        );
        let c = sample_direction(&grey, &d);
        assert!(c.iter().all(|v| (v - 128.0 / 255.0).abs() < 1e-9));
    }
}

#[test]
fn seam_continuity_across_x_y_edge() {
    let frame = smooth_sphere(512);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        // a point on the +X/+Y edge, and two neighbours on either side
        let z = unit(&mut rng) * 1.8 - 0.9;
        let edge = Direction::new(1.0, 1.0, z).unwrap();
        let a = perturb(&edge, &mut rng, 4e-4);
        let b = perturb(&edge, &mut rng, 4e-4);
        assert!(a.angle_to(&b) < 1e-3);
        let d = max_channel_diff(sample_direction(&frame, &a), sample_direction(&frame, &b));
        assert!(d < 2.0 / 255.0, "diff {d}");
    }
}

#[test]
fn continuity_random_pairs() {
    let frame = smooth_sphere(512);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let a = Direction::new(
            unit(&mut rng) - 0.5,
            unit(&mut rng) - 0.5,
            unit(&mut rng) - 0.5,
        )
        .unwrap();
        let b = perturb(&a, &mut rng, 9.9e-4);
        let d = max_channel_diff(sample_direction(&frame, &a), sample_direction(&frame, &b));
        assert!(d < 2.0 / 255.0);
    }
}

fn band_image(w: u32, h: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, _| {
        let theta = (x as f64 + 0.5) / w as f64 * 2.0 * PI - PI;
        let v = (127.5 + 100.0 * theta.sin()).round() as u8;
        Rgb([v, 255 - v, 40])
    })
}

#[test]
fn equirect_conversion_matches_direct_lookup() {
    let img = band_image(1024, 512);
    let cube = convert_equirect_to_cubemap(&img, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..400 {
        let theta = (unit(&mut rng) * 2.0 - 1.0) * PI;
        let rho = if i < 100 {
            PI / 2.0
        } else {
            0.1 + unit(&mut rng) * (PI - 0.2)
        };
        let p = SphericalPoint::new(theta, rho).unwrap();
        let want = sample_equirect(&img, &p).map(|c| c / 255.0);
        let got = sample_direction(&cube, &p.to_direction());
        assert!(
            max_channel_diff(want, got) < 2.0 / 255.0,
            "theta {theta} rho {rho} {want:?} {got:?}"
        );
    }
}

#[test]
fn equirect_constant_and_bad_shape() {
    let img = RgbImage::from_pixel(64, 32, Rgb([9, 99, 199]));
    let cube = convert_equirect_to_cubemap(&img, 16).unwrap();
    for face in Face::ALL {
        assert!(cube.face_image(face).pixels().all(|p| p.0 == [9, 99, 199]));
    }
    assert!(convert_equirect_to_cubemap(&RgbImage::new(100, 60), 16).is_err());
}
