//! Image files and a synthetic corpus of noisy shapes with boundary targets.
//!
//! A corpus directory holds `input_NNN.pbm` / `target_NNN.pbm` pairs and a
//! `manifest.json` recording the generating spec and the per-pair seeds, so
//! every corpus can be regenerated exactly.

mod pbm;

pub use pbm::{decode_pbm, encode_pbm, read_pbm, write_pbm};

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::PixelSet;
use crate::morphology::{erode, BinaryImage};
use crate::training::SamplePair;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}malformed PBM at byte {offset}: {message}", path_prefix(.path))]
    Pbm {
        offset: usize,
        message: String,
        path: Option<PathBuf>,
    },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Corpus { path: PathBuf, message: String },
    #[error("invalid corpus spec: {0}")]
    Spec(String),
}

fn path_prefix(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default()
}

impl DatasetError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn at(self, p: &Path) -> Self {
        match self {
            DatasetError::Pbm { offset, message, .. } => DatasetError::Pbm {
                offset,
                message,
                path: Some(p.to_path_buf()),
            },
            other => other,
        }
    }

    fn corpus(path: &Path, message: impl Into<String>) -> Self {
        DatasetError::Corpus {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// `x ∖ ε_cross(x)`: pixels of `x` with a 4-neighbor outside `x`.
pub fn boundary_target(x: &BinaryImage) -> BinaryImage {
    x.difference(&erode(x, &PixelSet::cross()))
}

/// Flip every pixel independently with probability `rate`.
///
/// # Panics
///
/// If `rate` is not in `[0, 0.5)`.
pub fn add_noise<R: Rng + ?Sized>(x: &BinaryImage, rate: f64, rng: &mut R) -> BinaryImage {
    assert!((0.0..0.5).contains(&rate), "noise rate {rate} outside [0, 0.5)");
    BinaryImage::from_fn(x.width(), x.height(), |px, py| {
        x.get(px as i64, py as i64) ^ rng.random_bool(rate)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    /// Unions of random rectangles and discs.
    Blobs,
    /// Scaled 5×7 digit glyphs.
    DigitsFont,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub count: usize,
    #[serde(default = "default_side")]
    pub width: usize,
    #[serde(default = "default_side")]
    pub height: usize,
    #[serde(default = "default_noise")]
    pub noise_rate: f64,
    #[serde(default = "default_kind")]
    pub shape_kind: ShapeKind,
    #[serde(default)]
    pub seed: u64,
}

fn default_side() -> usize {
    56
}

fn default_noise() -> f64 {
    0.05
}

fn default_kind() -> ShapeKind {
    ShapeKind::DigitsFont
}

impl CorpusSpec {
    pub fn new(count: usize, shape_kind: ShapeKind, seed: u64) -> Self {
        CorpusSpec {
            count,
            width: default_side(),
            height: default_side(),
            noise_rate: default_noise(),
            shape_kind,
            seed,
        }
    }

    pub fn check(&self) -> Result<(), DatasetError> {
        if self.count == 0 {
            return Err(DatasetError::Spec("count must be at least 1".into()));
        }
        if self.width < 8 || self.height < 8 {
            return Err(DatasetError::Spec(format!(
                "frame {}×{} is smaller than 8×8",
                self.width, self.height
            )));
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return Err(DatasetError::Spec(format!(
                "noise_rate must be in [0, 0.5), got {}",
                self.noise_rate
            )));
        }
        Ok(())
    }

    /// Seed of each pair, drawn from the corpus seed.
    pub fn pair_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count).map(|_| rng.random()).collect()
    }
}

/// A generated pair with its clean shape.
#[derive(Clone, Debug)]
pub struct GeneratedPair {
    pub clean: BinaryImage,
    pub pair: SamplePair,
    pub seed: u64,
}

/// Generate one pair from its own seed.
pub fn gen_pair(spec: &CorpusSpec, seed: u64) -> GeneratedPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clean = match spec.shape_kind {
        ShapeKind::Blobs => blob(spec.width, spec.height, &mut rng),
        ShapeKind::DigitsFont => digit(spec.width, spec.height, &mut rng),
    };
    let target = boundary_target(&clean);
    let input = add_noise(&clean, spec.noise_rate, &mut rng);
    GeneratedPair {
        pair: SamplePair::new(input, target).expect("same frame"),
        clean,
        seed,
    }
}

pub fn gen_corpus(spec: &CorpusSpec) -> Result<Vec<GeneratedPair>, DatasetError> {
    spec.check()?;
    Ok(spec.pair_seeds().into_iter().map(|s| gen_pair(spec, s)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: CorpusSpec,
    pub files: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub input: String,
    pub target: String,
    pub seed: u64,
}

pub const MANIFEST: &str = "manifest.json";

/// Generate a corpus into `dir` (created if missing).
pub fn write_corpus(spec: &CorpusSpec, dir: &Path) -> Result<Manifest, DatasetError> {
    let pairs = gen_corpus(spec)?;
    fs::create_dir_all(dir).map_err(|e| DatasetError::io(dir, e))?;
    let mut files = Vec::with_capacity(pairs.len());
    for (i, g) in pairs.iter().enumerate() {
        let input = format!("input_{i:03}.pbm");
        let target = format!("target_{i:03}.pbm");
        write_pbm(&g.pair.input, dir.join(&input))?;
        write_pbm(&g.pair.target, dir.join(&target))?;
        files.push(ManifestEntry {
            input,
            target,
            seed: g.seed,
        });
    }
    let manifest = Manifest {
        spec: spec.clone(),
        files,
    };
    let path = dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest).expect("plain data");
    text.push('\n');
    fs::write(&path, text).map_err(|e| DatasetError::io(&path, e))?;
    Ok(manifest)
}

/// Load the pairs of a corpus directory.
///
/// With a manifest, its file list is used in order. Otherwise every
/// `input_*.pbm` is paired with the `target_*.pbm` of the same suffix, in
/// name order.
pub fn load_pairs(dir: &Path) -> Result<Vec<SamplePair>, DatasetError> {
    let manifest = dir.join(MANIFEST);
    let names: Vec<(String, String)> = if manifest.exists() {
        let text = fs::read_to_string(&manifest).map_err(|e| DatasetError::io(&manifest, e))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| DatasetError::corpus(&manifest, e.to_string()))?;
        m.files.into_iter().map(|f| (f.input, f.target)).collect()
    } else {
        let mut inputs: Vec<String> = fs::read_dir(dir)
            .map_err(|e| DatasetError::io(dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| n.starts_with("input_") && n.ends_with(".pbm"))
            .collect();
        inputs.sort();
        inputs
            .into_iter()
            .map(|n| {
                let t = format!("target_{}", &n["input_".len()..]);
                (n, t)
            })
            .collect()
    };
    if names.is_empty() {
        return Err(DatasetError::corpus(dir, "no image pairs found"));
    }
    names
        .into_iter()
        .map(|(i, t)| {
            let x = read_pbm(dir.join(&i))?;
            let y = read_pbm(dir.join(&t))?;
            SamplePair::new(x, y).map_err(|e| DatasetError::corpus(&dir.join(&t), e.to_string()))
        })
        .collect()
}

fn blob<R: Rng + ?Sized>(w: usize, h: usize, rng: &mut R) -> BinaryImage {
    let (wf, hf) = (w as f64, h as f64);
    let mut img = BinaryImage::new(w, h);
    for _ in 0..rng.random_range(2..=4) {
        let cx = rng.random_range(0.25..0.75) * wf;
        let cy = rng.random_range(0.25..0.75) * hf;
        if rng.random_bool(0.5) {
            let r = rng.random_range(0.08..0.2) * wf.min(hf);
            let disc = BinaryImage::from_fn(w, h, |x, y| {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                dx * dx + dy * dy <= r * r
            });
            img = img.union(&disc);
        } else {
            let hw = rng.random_range(0.06..0.2) * wf;
            let hh = rng.random_range(0.06..0.2) * hf;
            let rect = BinaryImage::from_fn(w, h, |x, y| {
                (x as f64 - cx).abs() <= hw && (y as f64 - cy).abs() <= hh
            });
            img = img.union(&rect);
        }
    }
    img
}

const GLYPHS: [[&str; 7]; 10] = [
    [".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."],
    ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."],
    [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"],
    ["#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."],
    ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."],
    ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."],
    ["..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."],
    ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."],
    [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."],
    [".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."],
];

/// A random digit glyph, scaled to fill about two thirds of the frame
/// height, at a random position.
fn digit<R: Rng + ?Sized>(w: usize, h: usize, rng: &mut R) -> BinaryImage {
    let glyph = &GLYPHS[rng.random_range(0..10)];
    let max_scale = (h / 7).min(w / 5).max(1);
    let scale = rng.random_range((max_scale * 2 / 3).max(1)..=max_scale);
    let (gw, gh) = (5 * scale, 7 * scale);
    let ox = rng.random_range(0..=w - gw);
    let oy = rng.random_range(0..=h - gh);
    BinaryImage::from_fn(w, h, |x, y| {
        x >= ox
            && y >= oy
            && x < ox + gw
            && y < oy + gh
            && glyph[(y - oy) / scale].as_bytes()[(x - ox) / scale] == b'#'
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glyphs_are_five_by_seven() {
        for g in &GLYPHS {
            assert!(g.iter().all(|r| r.len() == 5));
        }
    }
}
