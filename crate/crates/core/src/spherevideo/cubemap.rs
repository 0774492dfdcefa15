use std::path::Path;

use image::RgbImage;

use super::SourceError;
use crate::geometry::Direction;

/// Cube-map face, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::PosX,
        Face::NegX,
        Face::PosY,
        Face::NegY,
        Face::PosZ,
        Face::NegZ,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// File-name suffix used by the six-file layout.
    pub fn suffix(self) -> &'static str {
        match self {
            Face::PosX => "px",
            Face::NegX => "nx",
            Face::PosY => "py",
            Face::NegY => "ny",
            Face::PosZ => "pz",
            Face::NegZ => "nz",
        }
    }

    /// Unnormalized direction of in-face coordinates `(s, t)` in `[-1, 1]`.
    pub fn direction(self, s: f64, t: f64) -> [f64; 3] {
        match self {
            Face::PosX => [1.0, s, t],
            Face::NegX => [-1.0, -s, t],
            Face::PosY => [-s, 1.0, t],
            Face::NegY => [s, -1.0, t],
            Face::PosZ => [-t, s, 1.0],
            Face::NegZ => [t, s, -1.0],
        }
    }

    /// Face hit by `d` and the in-face coordinates. Ties go to the earlier
    /// axis (X before Y before Z).
    pub fn locate(d: [f64; 3]) -> (Face, f64, f64) {
        let [x, y, z] = d;
        let (ax, ay, az) = (x.abs(), y.abs(), z.abs());
        if ax >= ay && ax >= az {
            if x >= 0.0 {
                (Face::PosX, y / ax, z / ax)
            } else {
                (Face::NegX, -y / ax, z / ax)
            }
        } else if ay >= az {
            if y >= 0.0 {
                (Face::PosY, -x / ay, z / ay)
            } else {
                (Face::NegY, x / ay, z / ay)
            }
        } else if z >= 0.0 {
            (Face::PosZ, y / az, -x / az)
        } else {
            (Face::NegZ, y / az, x / az)
        }
    }
}

/// Pixel column/row of the texel center for in-face coordinate `s`.
#[inline]
pub fn face_coord_to_texel(s: f64, n: usize) -> f64 {
    (s + 1.0) * n as f64 / 2.0 - 0.5
}

#[inline]
pub fn texel_to_face_coord(i: usize, n: usize) -> f64 {
    2.0 * (i as f64 + 0.5) / n as f64 - 1.0
}

/// Six square RGB faces ordered `[+X, -X, +Y, -Y, +Z, -Z]`.
///
/// Texel `(i, j)` of a face is column `i`, row `j`, with in-face coordinates
/// `s = 2 (i + 0.5) / N - 1` and `t = 2 (j + 0.5) / N - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeMapFrame {
    face_size: usize,
    data: Vec<u8>,
}

impl CubeMapFrame {
    pub fn from_raw(face_size: usize, data: Vec<u8>) -> Result<Self, SourceError> {
        if face_size < 2 {
            return Err(SourceError::Format(format!(
                "face size {face_size} below 2"
            )));
        }
        if data.len() != 6 * face_size * face_size * 3 {
            return Err(SourceError::Format(format!(
                "expected {} bytes for face size {face_size}, got {}",
                6 * face_size * face_size * 3,
                data.len()
            )));
        }
        Ok(Self { face_size, data })
    }

    /// Builds a frame by evaluating `color` at every texel direction.
    pub fn from_fn(
        face_size: usize,
        mut color: impl FnMut(Direction<f64>) -> [u8; 3],
    ) -> Result<Self, SourceError> {
        let n = face_size;
        let mut data = Vec::with_capacity(6 * n * n * 3);
        for face in Face::ALL {
            for j in 0..n {
                let t = texel_to_face_coord(j, n);
                for i in 0..n {
                    let s = texel_to_face_coord(i, n);
                    let d = Direction::from_array(face.direction(s, t))
                        .expect("face direction is nonzero");
                    data.extend_from_slice(&color(d));
                }
            }
        }
        Self::from_raw(face_size, data)
    }

    pub fn uniform(face_size: usize, rgb: [u8; 3]) -> Result<Self, SourceError> {
        Self::from_raw(face_size, rgb.repeat(6 * face_size * face_size))
    }

    pub fn from_faces(faces: &[RgbImage; 6]) -> Result<Self, SourceError> {
        let n = faces[0].width() as usize;
        let mut data = Vec::with_capacity(6 * n * n * 3);
        for (k, f) in faces.iter().enumerate() {
            if f.width() as usize != n || f.height() as usize != n {
                return Err(SourceError::Format(format!(
                    "face {} is {}x{}, expected {n}x{n}",
                    Face::ALL[k].suffix(),
                    f.width(),
                    f.height()
                )));
            }
            data.extend_from_slice(f.as_raw());
        }
        Self::from_raw(n, data)
    }

    /// Parses a `6N x N` horizontal strip.
    pub fn from_strip(img: &RgbImage) -> Result<Self, SourceError> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        if w != 6 * h {
            return Err(SourceError::Format(format!(
                "strip is {w}x{h}, expected width 6 x height"
            )));
        }
        let n = h;
        let raw = img.as_raw();
        let mut data = Vec::with_capacity(raw.len());
        for f in 0..6 {
            for j in 0..n {
                let start = (j * w + f * n) * 3;
                data.extend_from_slice(&raw[start..start + n * 3]);
            }
        }
        Self::from_raw(n, data)
    }

    pub fn to_strip(&self) -> RgbImage {
        let n = self.face_size;
        let mut img = RgbImage::new((6 * n) as u32, n as u32);
        for f in Face::ALL {
            for j in 0..n {
                for i in 0..n {
                    img.put_pixel(
                        (f.index() * n + i) as u32,
                        j as u32,
                        image::Rgb(self.texel(f, i, j)),
                    );
                }
            }
        }
        img
    }

    pub fn face_image(&self, face: Face) -> RgbImage {
        let n = self.face_size;
        let len = n * n * 3;
        let start = face.index() * len;
        RgbImage::from_raw(n as u32, n as u32, self.data[start..start + len].to_vec())
            .expect("face buffer size")
    }

    /// Writes the frame as a single strip image; format follows the extension.
    pub fn save_strip(&self, path: &Path) -> Result<(), SourceError> {
        self.to_strip()
            .save(path)
            .map_err(|e| SourceError::image(path, e))
    }

    pub fn face_size(&self) -> usize {
        self.face_size
    }

    #[inline]
    pub fn texel(&self, face: Face, i: usize, j: usize) -> [u8; 3] {
        let n = self.face_size;
        let k = ((face.index() * n + j) * n + i) * 3;
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    /// Bilinear color along `d`, channels in `[0, 1]`.
    pub fn sample(&self, d: &Direction<f64>) -> [f64; 3] {
        self.sample_raw(d.to_array())
    }

    /// Same as [`Self::sample`] for any nonzero vector.
    pub fn sample_raw(&self, d: [f64; 3]) -> [f64; 3] {
        let c = self.sample_255(d);
        c.map(|v| v / 255.0)
    }

    /// Bilinear color along `d` in the 0..=255 range. Samples outside the
    /// texel-center grid clamp to the face border.
    #[inline]
    pub fn sample_255(&self, d: [f64; 3]) -> [f64; 3] {
        let (face, s, t) = Face::locate(d);
        let n = self.face_size;
        let max = (n - 1) as f64;
        let x = face_coord_to_texel(s, n).clamp(0.0, max);
        let y = face_coord_to_texel(t, n).clamp(0.0, max);
        let (i0, j0) = (x.floor() as usize, y.floor() as usize);
        let (i1, j1) = ((i0 + 1).min(n - 1), (j0 + 1).min(n - 1));
        let (fx, fy) = (x - i0 as f64, y - j0 as f64);
        let c00 = self.texel(face, i0, j0);
        let c10 = self.texel(face, i1, j0);
        let c01 = self.texel(face, i0, j1);
        let c11 = self.texel(face, i1, j1);
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let top = c00[k] as f64 + (c10[k] as f64 - c00[k] as f64) * fx;
            let bottom = c01[k] as f64 + (c11[k] as f64 - c01[k] as f64) * fx;
            *o = top + (bottom - top) * fy;
        }
        out
    }
}

pub fn sample_direction(frame: &CubeMapFrame, d: &Direction<f64>) -> [f64; 3] {
    frame.sample(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FACE_COLORS: [[u8; 3]; 6] = [
        [255, 0, 0],
        [0, 255, 0],
        [0, 0, 255],
        [255, 255, 0],
        [0, 255, 255],
        [255, 0, 255],
    ];

    fn face_colored(n: usize) -> CubeMapFrame {
        let data = FACE_COLORS.iter().flat_map(|c| c.repeat(n * n)).collect();
        CubeMapFrame::from_raw(n, data).unwrap()
    }

    #[test]
    fn face_table_round_trip() {
        for face in Face::ALL {
            for (s, t) in [(0.3, -0.7), (-0.99, 0.5), (0.0, 0.0)] {
                let (f, s2, t2) = Face::locate(face.direction(s, t));
                assert_eq!(f, face);
                assert!((s - s2).abs() < 1e-15 && (t - t2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn axis_directions_pick_their_face() {
        let f = face_colored(8);
        let axes = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        for (axis, color) in axes.iter().zip(FACE_COLORS) {
            let got = f.sample_raw(*axis);
            assert_eq!(got, color.map(|c| c as f64 / 255.0));
        }
    }

    #[test]
    fn ties_break_by_axis_order() {
        assert_eq!(Face::locate([1.0, 1.0, 1.0]).0, Face::PosX);
        assert_eq!(Face::locate([0.0, -1.0, 1.0]).0, Face::NegY);
        assert_eq!(Face::locate([-1.0, 1.0, 0.0]).0, Face::NegX);
    }

    #[test]
    fn gray_everywhere() {
        let f = CubeMapFrame::uniform(4, [128, 128, 128]).unwrap();
        for d in [[0.3, -0.2, 0.9], [-1.0, 0.01, 0.0], [0.5, 0.5, -0.5]] {
            for c in f.sample_raw(d) {
                assert!((c - 128.0 / 255.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn strip_round_trip() {
        let f = CubeMapFrame::from_fn(5, |d| {
            let a = d.to_array();
            [
                (a[0] * 100.0 + 120.0) as u8,
                (a[1] * 100.0 + 120.0) as u8,
                (a[2] * 100.0 + 120.0) as u8,
            ]
        })
        .unwrap();
        assert_eq!(CubeMapFrame::from_strip(&f.to_strip()).unwrap(), f);
        let faces = Face::ALL.map(|face| f.face_image(face));
        assert_eq!(CubeMapFrame::from_faces(&faces).unwrap(), f);
    }

    #[test]
    fn bad_sizes() {
        assert!(CubeMapFrame::from_raw(1, vec![0; 18]).is_err());
        assert!(CubeMapFrame::from_raw(4, vec![0; 10]).is_err());
        assert!(CubeMapFrame::from_strip(&RgbImage::new(10, 2)).is_err());
    }
}
