//! Offline materialization of viewpoint sequences.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use omnitrack::controllers::MotionPattern;
use omnitrack::renderer::SequenceGenerator;

use crate::config::{Resolved, Source};
use crate::{hex, ARTIFACT_VERSION};

pub const GT_FILE: &str = "groundtruth.txt";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FRAME_PATTERN: &str = "frames/%05d.png";

#[derive(Debug, Serialize)]
pub struct GeneratedManifest {
    pub artifact_version: String,
    pub sequence: String,
    pub source: serde_json::Value,
    pub pattern: MotionPattern,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    pub controller_seed: u64,
    pub frame_pattern: String,
    pub frame_count: usize,
    pub groundtruth: String,
    /// SHA-256 of each frame file, in order.
    pub frame_sha256: Vec<String>,
}

/// Directory a (pattern, sequence) pair is generated into.
pub fn generated_dir(output: &Path, pattern: &str, sequence: &str) -> PathBuf {
    output.join(pattern).join(sequence)
}

/// One line of the ground-truth file: the four corners as
/// `u1,v1,u2,v2,u3,v3,u4,v4`.
pub fn gt_line(p: &omnitrack::geometry::ImagePolygon<f64>) -> String {
    let mut s = String::new();
    for (i, v) in p.vertices().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{},{}", v.u, v.v);
    }
    s
}

/// Renders every (pattern, sequence) pair of `r` to disk. Returns the
/// directories written.
pub fn cmd_generate(r: &Resolved) -> Result<Vec<PathBuf>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(r.config.workers)
        .build()?;
    let mut dirs = Vec::new();
    crate::config::write_effective(
        &r.config,
        &r.config.output.join(crate::config::EFFECTIVE_CONFIG),
    )?;
    for pattern in &r.patterns {
        for src in &r.sources {
            let dir = generated_dir(&r.config.output, pattern.name(), src.sequence.id());
            pool.install(|| generate_one(r, *pattern, src, &dir))
                .with_context(|| {
                    format!("sequence {} pattern {}", src.sequence.id(), pattern.name())
                })?;
            dirs.push(dir);
        }
    }
    Ok(dirs)
}

fn generate_one(r: &Resolved, pattern: MotionPattern, src: &Source, dir: &Path) -> Result<()> {
    let c = &r.config;
    let seq = SequenceGenerator::new(src.sequence.clone(), pattern, c.width, c.height)?;
    // all cameras first, so an infeasible frame fails before any file is written
    seq.check_feasible()?;
    let frames_dir = dir.join("frames");
    std::fs::create_dir_all(&frames_dir)
        .with_context(|| format!("creating {}", frames_dir.display()))?;
    let results: Vec<(String, String)> = (0..seq.len())
        .into_par_iter()
        .map(|t| -> Result<(String, String)> {
            let f = seq.frame(t, true)?;
            let path = frames_dir.join(format!("{t:05}.png"));
            let img = f.image.expect("rendered");
            img.save(&path)
                .with_context(|| format!("writing {}", path.display()))?;
            let bytes = std::fs::read(&path)?;
            Ok((gt_line(&f.gt), hex(&Sha256::digest(&bytes))))
        })
        .collect::<Result<_>>()?;
    let mut gt = String::new();
    for (line, _) in &results {
        gt.push_str(line);
        gt.push('\n');
    }
    std::fs::write(dir.join(GT_FILE), gt)?;
    let manifest = GeneratedManifest {
        artifact_version: ARTIFACT_VERSION.to_string(),
        sequence: src.sequence.id().to_string(),
        source: src.origin.clone(),
        pattern,
        width: c.width,
        height: c.height,
        seed: c.seed,
        controller_seed: seq.controller_seed(),
        frame_pattern: FRAME_PATTERN.to_string(),
        frame_count: seq.len(),
        groundtruth: GT_FILE.to_string(),
        frame_sha256: results.into_iter().map(|(_, h)| h).collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    std::fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(())
}
