use super::ControllerError;
use crate::annotations::SphericalRegion;
use crate::geometry::{project_direction, project_region, CameraState, Mat3, SphericalPoint};
use crate::scalar::wrap_angle;

const FOCAL_ITERATIONS: usize = 10;
const FOCAL_TOLERANCE_PX: f64 = 1e-6;

/// Orients the camera so that `center` projects at principal point +
/// `offset`, with roll `roll` and the focal length of `c0`.
pub fn solve_orientation(
    center: &SphericalPoint<f64>,
    offset: (f64, f64),
    roll: f64,
    c0: &CameraState<f64>,
) -> Result<CameraState<f64>, ControllerError> {
    let (du, dv) = offset;
    let pp = c0.principal_point();
    let target = crate::geometry::ImagePoint::new(pp.u + du, pp.v + dv);
    if !du.is_finite() || !dv.is_finite() || !c0.contains(&target, 0.0) {
        return Err(ControllerError::Infeasible(format!(
            "offset ({du:.2}, {dv:.2}) lies outside the {}x{} frame",
            c0.width, c0.height
        )));
    }
    let f = c0.f;
    // desired (forward, right, up) direction before roll
    let n = (1.0 + (du / f).powi(2) + (dv / f).powi(2)).sqrt();
    let rolled = [1.0 / n, du / f / n, -dv / f / n];
    let q = Mat3::rot_x(-roll).apply(rolled);

    let sin_rho = center.rho().sin();
    let cos_rho = center.rho().cos();
    if q[1].abs() > sin_rho {
        return Err(ControllerError::Infeasible(format!(
            "target at colatitude {:.4} cannot reach offset ({du:.2}, {dv:.2})",
            center.rho()
        )));
    }
    let phi = (q[1] / sin_rho).clamp(-1.0, 1.0).asin();
    let x0 = sin_rho * phi.cos();
    let beta = wrap_angle(cos_rho.atan2(x0) - q[2].atan2(q[0]));
    let alpha = wrap_angle(center.theta() - phi);
    let cam = CameraState {
        alpha,
        beta,
        gamma: roll,
        ..*c0
    };

    let got = project_direction(&center.to_direction(), &cam)
        .ok_or_else(|| ControllerError::Infeasible("target behind solved camera".into()))?;
    if got.distance(&target) > 0.5 {
        return Err(ControllerError::Solver {
            what: "orientation",
            residual: got.distance(&target),
        });
    }
    Ok(cam)
}

/// Focal length at which the projected diagonal of `region` equals
/// `target_px`, keeping the orientation of `c`.
pub fn solve_focal_for_diagonal(
    region: &SphericalRegion<f64>,
    c: &CameraState<f64>,
    target_px: f64,
) -> Result<f64, ControllerError> {
    if !(target_px > 0.0) || !target_px.is_finite() {
        return Err(ControllerError::Precondition(format!(
            "target diagonal must be positive, got {target_px}"
        )));
    }
    let delta = region.angular_diagonal();
    if !(delta > 0.0) {
        return Err(ControllerError::Precondition(
            "region has zero angular size".into(),
        ));
    }
    let mut f = target_px / (2.0 * (delta / 2.0).tan());
    let mut residual = f64::INFINITY;
    for _ in 0..=FOCAL_ITERATIONS {
        let poly = project_region(region, &c.with_focal(f))
            .map_err(|e| ControllerError::Precondition(format!("region not projectable: {e:?}")))?;
        let measured = poly.diagonal();
        residual = measured - target_px;
        if residual.abs() < FOCAL_TOLERANCE_PX {
            return Ok(f);
        }
        f *= target_px / measured;
    }
    Err(ControllerError::Solver {
        what: "focal length",
        residual,
    })
}

/// Returns `c` if the projected region sits inside the frame inset by
/// `margin`; otherwise turns the camera the least amount (moving the target
/// toward the principal point) that makes it fit.
pub fn enforce_visibility(
    c: &CameraState<f64>,
    region: &SphericalRegion<f64>,
    margin: f64,
) -> Result<CameraState<f64>, ControllerError> {
    let fits = |cam: &CameraState<f64>| {
        project_region(region, cam)
            .map(|p| p.is_inside(cam, margin))
            .unwrap_or(false)
    };
    if fits(c) {
        return Ok(*c);
    }
    let center = region.center()?;
    let pp = c.principal_point();
    let offset = project_direction(&center.to_direction(), c)
        .map(|p| (p.u - pp.u, p.v - pp.v))
        .unwrap_or((0.0, 0.0));
    let reach = offset.0.hypot(offset.1);
    let at = |s: f64| -> Result<CameraState<f64>, ControllerError> {
        let k = if reach > 0.0 { 1.0 - s / reach } else { 0.0 };
        solve_orientation(&center, (offset.0 * k, offset.1 * k), c.gamma, c)
    };
    let centered = at(reach)?;
    let min_side = c.width.min(c.height) as f64;
    let diag = project_region(region, &centered)
        .map(|p| p.diagonal())
        .unwrap_or(f64::INFINITY);
    if diag + 2.0 * margin > min_side || !fits(&centered) {
        return Err(ControllerError::Infeasible(format!(
            "target diagonal {diag:.1} px plus margin {margin} does not fit a {}x{} frame",
            c.width, c.height
        )));
    }
    // offsets that are out of frame count as not fitting
    let (mut lo, mut hi) = (0.0, reach);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match at(mid) {
            Ok(cam) if fits(&cam) => hi = mid,
            _ => lo = mid,
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    at(hi)
}
