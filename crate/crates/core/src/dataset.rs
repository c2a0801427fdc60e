//! Batch generation of groomed samples.
//!
//! Each seed produces `sample_<seed>.params`, `sample_<seed>.hair`,
//! `sample_<seed>.dens.dlck` and, when a codec is supplied, an interpolated
//! `sample_<seed>.tex.dlck`. Samples depend only on their seed, so output is
//! identical for any worker count. The manifest is written once at the end.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codec::CodecModel;
use crate::groom::{generate_sample_on, GroomSample, GuideSet, RandomSpec};
use crate::io::{Container, HairFile};
use crate::scalp::{ScalpMask, ScalpSurface};
use crate::texture::{bake, push_pull, BakeOptions};
use crate::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub seed: u64,
    pub params: String,
    pub hair: String,
    pub texture: Option<String>,
    pub density: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let records = r
            .deserialize()
            .collect::<std::result::Result<Vec<ManifestRecord>, _>>()?;
        Ok(Self { records })
    }

    /// Checks that seeds are unique and every referenced file exists under `dir`.
    pub fn validate(&self, dir: &Path) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.seed) {
                return Err(Error::InvalidInput(format!("duplicate seed {}", r.seed)));
            }
            let files = [Some(&r.params), Some(&r.hair), r.texture.as_ref(), Some(&r.density)];
            for f in files.into_iter().flatten() {
                if !dir.join(f).is_file() {
                    return Err(Error::InvalidInput(format!("missing file {f}")));
                }
            }
        }
        Ok(())
    }
}

pub struct DatasetConfig<'a> {
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub spec: &'a RandomSpec,
    pub base: &'a GuideSet,
    pub surface: ScalpSurface,
    pub codec: Option<&'a CodecModel>,
    pub bake: BakeOptions,
    pub jobs: usize,
}

/// Writes the per-sample files for `sample` into `dir`.
pub fn write_sample(
    dir: &Path,
    seed: u64,
    sample: &GroomSample,
    codec: Option<&CodecModel>,
    surface: &ScalpSurface,
    bake_opts: &BakeOptions,
) -> Result<ManifestRecord> {
    let stem = format!("sample_{seed}");
    let record = ManifestRecord {
        seed,
        params: format!("{stem}.params"),
        hair: format!("{stem}.hair"),
        texture: codec.map(|_| format!("{stem}.tex.dlck")),
        density: format!("{stem}.dens.dlck"),
    };
    std::fs::write(dir.join(&record.params), sample.params.to_text())?;
    HairFile::from_hairstyle(&sample.hair).write(&dir.join(&record.hair))?;
    let mut dens = Container::new();
    dens.put_density(&sample.density)?;
    dens.write(&dir.join(&record.density))?;
    if let (Some(codec), Some(name)) = (codec, &record.texture) {
        let opts = BakeOptions { seed, ..*bake_opts };
        let (raw, _) = bake(&sample.hair, codec, surface, &opts)?;
        let filled = push_pull(&raw, &ScalpMask::new(opts.resolution))?;
        let mut tex = Container::new();
        tex.put_texture(&filled)?;
        tex.write(&dir.join(name))?;
    }
    Ok(record)
}

pub fn run_dataset(cfg: &DatasetConfig) -> Result<Manifest> {
    if cfg.seeds.is_empty() {
        return Err(Error::Empty("dataset seeds"));
    }
    let mut unique = HashSet::new();
    if let Some(dup) = cfg.seeds.iter().find(|s| !unique.insert(**s)) {
        return Err(Error::InvalidInput(format!("duplicate seed {dup}")));
    }
    if cfg.jobs == 0 {
        return Err(Error::InvalidInput("jobs must be at least 1".into()));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let records = pool.install(|| {
        use rayon::prelude::*;
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let sample = generate_sample_on(cfg.base, &cfg.surface, cfg.spec, seed)?;
                write_sample(&cfg.out_dir, seed, &sample, cfg.codec, &cfg.surface, &cfg.bake)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let manifest = Manifest { records };
    manifest.write(&cfg.out_dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}
