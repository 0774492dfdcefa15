//! Equirectangular frames to cube-map strips.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use omnitrack::spherevideo::convert_equirect_to_cubemap;

/// Converts every `*.png` in `input` (sorted by name) into a 6N x N strip
/// `<output>/%05d.png`, numbered from `first_index`. Returns the frame count.
pub fn cmd_cubemap(
    input: &Path,
    output: &Path,
    face_size: usize,
    first_index: usize,
) -> Result<usize> {
    let mut frames: Vec<PathBuf> = std::fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    frames.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")));
    frames.sort();
    if frames.is_empty() {
        bail!("no PNG frames in {}", input.display());
    }
    std::fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(k, src)| -> Result<()> {
            let img = image::open(src)
                .with_context(|| format!("reading {}", src.display()))?
                .into_rgb8();
            let cube = convert_equirect_to_cubemap(&img, face_size)
                .with_context(|| src.display().to_string())?;
            let dst = output.join(format!("{:05}.png", first_index + k));
            cube.save_strip(&dst)
                .with_context(|| format!("writing {}", dst.display()))
        })?;
    Ok(frames.len())
}
