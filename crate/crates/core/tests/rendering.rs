use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use omnitrack::controllers::{MotionPattern, Variant};
use omnitrack::geometry::CameraState;
use omnitrack::renderer::{render_viewpoint, SequenceGenerator};
use omnitrack::spherevideo::CubeMapFrame;
use omnitrack::synthetic::SyntheticSpec;

fn rmse(a: &image::RgbImage, b: &image::RgbImage) -> f64 {
    let n = a.as_raw().len() as f64;
    let s: f64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| ((x as f64 - y as f64) / 255.0).powi(2))
        .sum();
    (s / n).sqrt()
}

#[test]
fn roll_by_quarter_turn_matches_rotated_render() {
    let frame = SyntheticSpec {
        face_size: 512,
        ..Default::default()
    }
    .scene()
    .unwrap();
    let cam = CameraState::new(0.4, 0.2, 0.0, 350.0, 480, 480).unwrap();
    let flat = render_viewpoint(&frame, &cam);
    let rolled = render_viewpoint(&frame, &cam.with_roll(FRAC_PI_2));
    // pixel (i, j) of the unrolled view lands on (j, W-1-i) after the roll
    let w = 480;
    let rotated = image::RgbImage::from_fn(w, w, |x, y| *flat.get_pixel(w - 1 - y, x));
    let e = rmse(&rotated, &rolled);
    assert!(e < 4.0 / 255.0, "rmse {e}");
}

#[test]
fn constant_cubemap_is_exact() {
    let frame = CubeMapFrame::uniform(512, [10, 200, 77]).unwrap();
    let cam = CameraState::new(2.0, -0.7, 0.3, 250.0, 640, 480).unwrap();
    assert!(render_viewpoint(&frame, &cam)
        .pixels()
        .all(|p| p.0 == [10, 200, 77]));
}

fn generator(variant: Variant) -> SequenceGenerator {
    let src = SyntheticSpec {
        frames: 30,
        face_size: 64,
        ..Default::default()
    }
    .build()
    .unwrap();
    SequenceGenerator::new(src, MotionPattern::with_defaults(variant), 320, 240).unwrap()
}

#[test]
fn random_access_is_bit_identical_to_streaming() {
    let g = generator(Variant::EnLarge);
    let streamed: Vec<_> = g.iter(true).collect::<Result<_, _>>().unwrap();
    assert_eq!(streamed.len(), 30);
    for t in [29, 0, 13, 7] {
        assert_eq!(g.frame(t, true).unwrap(), streamed[t]);
    }
    let again: Vec<_> = generator(Variant::EnLarge)
        .iter(true)
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(streamed, again);
}

#[test]
fn parallel_workers_render_disjoint_frames() {
    let g = Arc::new(generator(Variant::ErFast));
    let handles: Vec<_> = (0..3)
        .map(|k| {
            let g = Arc::clone(&g);
            std::thread::spawn(move || {
                (k..30)
                    .step_by(3)
                    .map(|t| g.frame(t, true).unwrap())
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    let mut frames: Vec<_> = handles
        .into_iter()
        .flat_map(|h| h.join().unwrap())
        .collect();
    frames.sort_by_key(|f| f.index);
    for (t, f) in frames.iter().enumerate() {
        assert_eq!(*f, g.frame(t, true).unwrap());
    }
}

#[test]
fn stabilized_stream_diagonals() {
    let g = generator(Variant::Eb);
    for f in g.iter(false) {
        let f = f.unwrap();
        assert!((f.gt.diagonal() - 70.0).abs() < 0.5);
        assert!(f.image.is_none());
    }
}
