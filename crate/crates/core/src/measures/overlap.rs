use crate::geometry::{ImagePoint, ImagePolygon};
use crate::scalar::Scalar;

/// Overlap with a flag for degenerate inputs (zero area or invalid shape).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap<T> {
    pub value: T,
    pub degenerate: bool,
}

/// Intersection over union of two quadrilaterals.
///
/// At least one polygon should be convex; it is used as the clip window.
/// Valid `ImagePolygon`s always have positive area.
pub fn polygon_iou<T: Scalar>(p: &ImagePolygon<T>, q: &ImagePolygon<T>) -> T {
    quad_overlap(p.vertices(), q.vertices()).value
}

/// Like [`polygon_iou`] over raw vertex lists. Zero-area, non-finite or
/// self-intersecting input yields 0 with `degenerate` set.
pub fn quad_overlap<T: Scalar>(p: &[ImagePoint<T>], q: &[ImagePoint<T>]) -> Overlap<T> {
    let degenerate = Overlap {
        value: T::zero(),
        degenerate: true,
    };
    let (Some(p), Some(q)) = (ccw(p), ccw(q)) else {
        return degenerate;
    };
    if p == q {
        return Overlap {
            value: T::one(),
            degenerate: false,
        };
    }
    let (ap, aq) = (area(&p), area(&q));
    // clip the other polygon against a convex one
    let inter = if is_convex(&q) {
        area(&clip(&p, &q))
    } else if is_convex(&p) {
        area(&clip(&q, &p))
    } else {
        return degenerate;
    };
    let inter = inter.max(T::zero()).min(ap.min(aq));
    let union = ap + aq - inter;
    Overlap {
        value: (inter / union).max(T::zero()).min(T::one()),
        degenerate: false,
    }
}

fn area<T: Scalar>(pts: &[ImagePoint<T>]) -> T {
    crate::geometry::shoelace(pts)
}

fn cross<T: Scalar>(a: &ImagePoint<T>, b: &ImagePoint<T>, c: &ImagePoint<T>) -> T {
    (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u)
}

// Positive-area copy, or None for degenerate and self-intersecting input.
fn ccw<T: Scalar>(pts: &[ImagePoint<T>]) -> Option<Vec<ImagePoint<T>>> {
    if pts.len() < 3 || pts.iter().any(|p| !p.u.is_finite() || !p.v.is_finite()) {
        return None;
    }
    if pts.len() == 4 && ImagePolygon::new([pts[0], pts[1], pts[2], pts[3]]).is_err() {
        return None;
    }
    let a = area(pts);
    if !(a.abs() > T::epsilon()) {
        return None;
    }
    let mut v = pts.to_vec();
    if a < T::zero() {
        v.reverse();
    }
    Some(v)
}

fn is_convex<T: Scalar>(pts: &[ImagePoint<T>]) -> bool {
    let n = pts.len();
    (0..n).all(|i| cross(&pts[i], &pts[(i + 1) % n], &pts[(i + 2) % n]) >= T::zero())
}

// Sutherland-Hodgman; `window` must be convex with positive orientation.
fn clip<T: Scalar>(subject: &[ImagePoint<T>], window: &[ImagePoint<T>]) -> Vec<ImagePoint<T>> {
    let mut out = subject.to_vec();
    let n = window.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (&window[i], &window[(i + 1) % n]);
        let input = std::mem::take(&mut out);
        let m = input.len();
        for k in 0..m {
            let cur = &input[k];
            let prev = &input[(k + m - 1) % m];
            let (dc, dp) = (cross(a, b, cur), cross(a, b, prev));
            let z = T::zero();
            if dc >= z {
                if dp < z {
                    out.push(intersect(prev, cur, dp, dc));
                }
                out.push(*cur);
            } else if dp >= z {
                out.push(intersect(prev, cur, dp, dc));
            }
        }
    }
    out
}

fn intersect<T: Scalar>(p: &ImagePoint<T>, c: &ImagePoint<T>, dp: T, dc: T) -> ImagePoint<T> {
    let t = dp / (dp - dc);
    ImagePoint::new(p.u + t * (c.u - p.u), p.v + t * (c.v - p.v))
}
