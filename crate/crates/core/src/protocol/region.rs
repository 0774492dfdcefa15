use std::fmt;
use std::str::FromStr;

use crate::geometry::{ImagePoint, ImagePolygon};

/// Largest coordinate magnitude accepted on the wire.
const MAX_COORD: f64 = 1e9;

/// Region as carried on the wire: `R x,y,w,h` or `P x1,y1,...,x4,y4`.
///
/// Coordinates are kept on a 1e-4 pixel grid, the precision of the wire
/// format, so formatting and parsing round-trip exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Rect { x: f64, y: f64, w: f64, h: f64 },
    Poly([f64; 8]),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid region: {0}")]
pub struct RegionError(pub String);

fn grid(v: f64) -> Result<f64, RegionError> {
    if !v.is_finite() || v.abs() > MAX_COORD {
        return Err(RegionError(format!("coordinate {v} out of range")));
    }
    let q = (v * 1e4).round() / 1e4;
    Ok(if q == 0.0 { 0.0 } else { q })
}

impl Region {
    pub fn rect(x: f64, y: f64, w: f64, h: f64) -> Result<Self, RegionError> {
        let (x, y, w, h) = (grid(x)?, grid(y)?, grid(w)?, grid(h)?);
        if !(w > 0.0 && h > 0.0) {
            return Err(RegionError(format!("rect size {w}x{h} is not positive")));
        }
        Ok(Region::Rect { x, y, w, h })
    }

    pub fn poly(coords: [f64; 8]) -> Result<Self, RegionError> {
        let mut c = [0.0; 8];
        for (o, v) in c.iter_mut().zip(coords) {
            *o = grid(v)?;
        }
        Ok(Region::Poly(c))
    }

    pub fn from_points(points: &[ImagePoint<f64>; 4]) -> Result<Self, RegionError> {
        let mut c = [0.0; 8];
        for (i, p) in points.iter().enumerate() {
            c[2 * i] = p.u;
            c[2 * i + 1] = p.v;
        }
        Self::poly(c)
    }

    pub fn from_polygon(p: &ImagePolygon<f64>) -> Result<Self, RegionError> {
        Self::from_points(p.vertices())
    }

    /// Corners in order; rectangles start top-left and go clockwise on
    /// screen.
    pub fn points(&self) -> [ImagePoint<f64>; 4] {
        match *self {
            Region::Rect { x, y, w, h } => [
                ImagePoint::new(x, y),
                ImagePoint::new(x + w, y),
                ImagePoint::new(x + w, y + h),
                ImagePoint::new(x, y + h),
            ],
            Region::Poly(c) => [
                ImagePoint::new(c[0], c[1]),
                ImagePoint::new(c[2], c[3]),
                ImagePoint::new(c[4], c[5]),
                ImagePoint::new(c[6], c[7]),
            ],
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, vals): (char, &[f64]) = match self {
            Region::Rect { x, y, w, h } => ('R', &[*x, *y, *w, *h]),
            Region::Poly(c) => ('P', c),
        };
        write!(f, "{tag} ")?;
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v:.4}")?;
        }
        Ok(())
    }
}

impl FromStr for Region {
    type Err = RegionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tag, rest) = s
            .split_once(' ')
            .ok_or_else(|| RegionError(format!("expected 'R ...' or 'P ...', got {s:?}")))?;
        let nums = rest
            .split(',')
            .map(|t| {
                let t = t.trim();
                // reject forms like "inf" and "nan" that f64 parsing accepts
                if t.is_empty()
                    || !t
                        .bytes()
                        .all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b))
                {
                    return Err(RegionError(format!("bad number {t:?}")));
                }
                t.parse::<f64>()
                    .map_err(|_| RegionError(format!("bad number {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match (tag, nums.len()) {
            ("R", 4) => Region::rect(nums[0], nums[1], nums[2], nums[3]),
            ("P", 8) => Region::poly(nums.try_into().expect("length checked")),
            ("R", n) => Err(RegionError(format!("rect needs 4 numbers, got {n}"))),
            ("P", n) => Err(RegionError(format!("polygon needs 8 numbers, got {n}"))),
            (t, _) => Err(RegionError(format!("unknown region kind {t:?}"))),
        }
    }
}
