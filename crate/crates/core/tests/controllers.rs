use std::f64::consts::TAU;

use omnitrack::controllers::{Controller, ControllerState, MotionPattern, PatternParams, Variant};
use omnitrack::geometry::{project_direction, project_region, CameraState, ImagePolygon};
use omnitrack::synthetic::SyntheticSpec;
use omnitrack::SphericalRegion64;

fn source(frames: usize) -> Vec<SphericalRegion64> {
    SyntheticSpec {
        frames,
        ..Default::default()
    }
    .track()
    .unwrap()
    .regions()
    .to_vec()
}

fn run(
    variant: Variant,
    params: Option<PatternParams>,
    regions: &[SphericalRegion64],
) -> Vec<(CameraState<f64>, ImagePolygon<f64>)> {
    let pattern = match params {
        Some(p) => MotionPattern::new(variant, p).unwrap(),
        None => MotionPattern::with_defaults(variant),
    };
    let c = Controller::new(pattern, 640, 480).unwrap();
    let mut st = ControllerState::new(pattern.params.seed);
    regions
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let cam = c.step(r, t, &mut st).unwrap();
            (cam, project_region(r, &cam).unwrap())
        })
        .collect()
}

fn center_offset(r: &SphericalRegion64, cam: &CameraState<f64>) -> (f64, f64) {
    let p = project_direction(&r.center_direction().unwrap(), cam).unwrap();
    let c = cam.principal_point();
    (p.u - c.u, p.v - c.v)
}

#[test]
fn stabilized_holds_center_and_diagonal() {
    let regions = source(200);
    let sizes: Vec<f64> = regions.iter().map(|r| r.angular_diagonal()).collect();
    let (lo, hi) = sizes
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo >= 2.9, "source should vary +-50% in angular size");
    for (variant, diag) in [(Variant::Eb, 70.0), (Variant::EbSmall, 35.0)] {
        for (r, (cam, poly)) in regions.iter().zip(run(variant, None, &regions)) {
            let (du, dv) = center_offset(r, &cam);
            assert!(du.hypot(dv) < 0.5);
            assert!((poly.diagonal() - diag).abs() < 0.5, "{}", poly.diagonal());
            assert_eq!(cam.gamma, 0.0);
        }
    }
}

#[test]
fn centered_rotation_roll_law_and_equivariance() {
    let regions = source(40);
    let eb = run(Variant::Eb, None, &regions);
    for v in [Variant::ErSlow, Variant::ErFast] {
        let omega = v.default_params().roll_rate;
        let er = run(v, None, &regions);
        for (t, ((cam, poly), (cam0, poly0))) in er.iter().zip(&eb).enumerate() {
            assert_eq!(cam.gamma, t as f64 * omega);
            assert!((cam.f - cam0.f).abs() < 1e-6 * cam0.f);
            let pp = cam.principal_point();
            for (a, b) in poly.vertices().iter().zip(poly0.vertices()) {
                let want = b.rotated_about(&pp, -cam.gamma);
                assert!(a.distance(&want) < 1e-6, "t={t}: {a:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn displaced_rotation_offset_turns_with_roll() {
    let regions = source(60);
    let p = Variant::Ed.default_params();
    for (t, (r, (cam, _))) in regions
        .iter()
        .zip(run(Variant::Ed, None, &regions))
        .enumerate()
    {
        let g = t as f64 * p.roll_rate;
        assert_eq!(cam.gamma, g);
        let (du, dv) = center_offset(r, &cam);
        let d = p.displacement * 480.0;
        assert!((du - d * g.cos()).abs() < 0.5 && (dv + d * g.sin()).abs() < 0.5);
    }
}

#[test]
fn scale_change_follows_cosine() {
    for v in [Variant::EsSlow, Variant::EsFast, Variant::EsWide] {
        let p = v.default_params();
        let period = p.scale_period as usize;
        let regions = source(period + 1);
        let out = run(v, None, &regions);
        for t in [0, period / 4, period / 2] {
            let want = 70.0 * (1.0 + p.scale_amplitude * (TAU * t as f64 / p.scale_period).cos());
            let got = out[t].1.diagonal();
            assert!((got - want).abs() < 0.5, "{v} t={t}: {got} vs {want}");
            let (du, dv) = center_offset(&regions[t], &out[t].0);
            assert!(du.hypot(dv) < 0.5);
        }
    }
}

#[test]
fn planar_motion_traces_circle() {
    for v in [Variant::EmSlow, Variant::EmFast] {
        let p = v.default_params();
        let r = p.orbit_radius * 480.0;
        let regions = source(100);
        let out = run(v, None, &regions);
        let mut prev: Option<f64> = None;
        for (t, (reg, (cam, poly))) in regions.iter().zip(&out).enumerate() {
            let (du, dv) = center_offset(reg, cam);
            assert!((du.hypot(dv) - r).abs() < 0.5);
            assert!((poly.diagonal() - 70.0).abs() < 0.5);
            let a = dv.atan2(du);
            if let Some(b) = prev {
                let step = (a - b).rem_euclid(TAU);
                assert!(
                    (step - TAU / p.orbit_period).abs() < 1e-6,
                    "{v} t={t}: step {step}"
                );
            }
            prev = Some(a);
        }
    }
}

#[test]
fn translation_noise_is_replayable() {
    let regions = source(80);
    for v in [Variant::EnSmall, Variant::EnLarge] {
        let mut params = v.default_params();
        params.seed = 42;
        let a = run(v, Some(params), &regions);
        let b = run(v, Some(params), &regions);
        for ((ca, _), (cb, _)) in a.iter().zip(&b) {
            assert_eq!(ca.alpha.to_bits(), cb.alpha.to_bits());
            assert_eq!(ca.beta.to_bits(), cb.beta.to_bits());
            assert_eq!(ca.gamma.to_bits(), cb.gamma.to_bits());
            assert_eq!(ca.f.to_bits(), cb.f.to_bits());
        }
        params.seed = 43;
        let c = run(v, Some(params), &regions);
        assert_ne!(a[5].0, c[5].0);
    }
}

#[test]
fn short_term_constraint_all_patterns() {
    for spec in SyntheticSpec::stock(150, 16) {
        let regions = spec.track().unwrap().regions().to_vec();
        for v in Variant::ALL {
            let margin = v.default_params().margin;
            for (t, (cam, poly)) in run(v, None, &regions).into_iter().enumerate() {
                assert!(poly.is_inside(&cam, margin), "{} {v} frame {t}", spec.id);
            }
        }
    }
}

#[test]
fn infeasible_displacement_rejected_at_construction() {
    let mut p = Variant::Ed.default_params();
    p.displacement = 0.9;
    let pattern = MotionPattern::new(Variant::Ed, p).unwrap();
    assert!(Controller::new(pattern, 640, 480).is_err());
}
