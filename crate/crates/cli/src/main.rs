use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use ndarray::{Axis, Ix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use hairkit_core::codec::{channel_weights, fit_codec, raw_channel_weights, CodecModel, DEFAULT_EPSILON};
use hairkit_core::dataset::{run_dataset, write_sample, DatasetConfig};
use hairkit_core::diffusion::{
    heun_sample, random_covariance, sigma_schedule, GaussianDenoiser, DEFAULT_RHO, DEFAULT_SIGMA_DATA,
    DEFAULT_SIGMA_MAX, DEFAULT_SIGMA_MIN,
};
use hairkit_core::groom::{generate_sample_on, GuideSet, RandomSpec};
use hairkit_core::io::{read_cyhair, write_ply, Container, HairFile};
use hairkit_core::metrics::{evaluate_hair, MatchOptions, ThresholdPair};
use hairkit_core::scalp::{ScalpMask, ScalpSurface};
use hairkit_core::strand::LossConfig;
use hairkit_core::texture::{bake, decode_hairstyle, push_pull, BakeOptions};
use hairkit_core::TEXTURE_RESOLUTION;

#[derive(Parser)]
#[command(
    name = "hairkit",
    version,
    about = "Procedural hair datasets, scalp textures and strand metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GroomArgs {
    /// Parameter randomization spec (defaults to the built-in ranges).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override the number of strands.
    #[arg(long)]
    strands: Option<usize>,
    /// Built-in base style: short, medium or long.
    #[arg(long, default_value = "medium")]
    style: String,
    /// Guide strands to use instead of a built-in style.
    #[arg(long, conflicts_with = "style")]
    guides: Option<PathBuf>,
    /// Codec container; when given, an interpolated texture is written too.
    #[arg(long)]
    codec: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Groom one sample from a seed.
    Groom {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        groom: GroomArgs,
    },
    /// Groom many seeds in parallel and write a manifest.
    Dataset {
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        start: u64,
        #[arg(long, env = "HAIRKIT_JOBS")]
        jobs: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        groom: GroomArgs,
    },
    /// Fit the strand codec on the strands of one or more hair files.
    FitCodec {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        hair: Vec<PathBuf>,
    },
    /// Bake a hairstyle into a sparse scalp texture and density map.
    Encode {
        #[arg(long)]
        codec: PathBuf,
        #[arg(long)]
        hair: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = TEXTURE_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        blur: bool,
    },
    /// Fill the invalid texels of a texture with push-pull.
    Interp {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample roots from the density map and decode a hairstyle.
    Decode {
        #[arg(long)]
        codec: PathBuf,
        #[arg(long)]
        texture: PathBuf,
        /// Density container; defaults to the density chunk of the texture file.
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-channel loss weights of a codec as CSV.
    Weights {
        #[arg(long)]
        codec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision, recall and F-score of a predicted hair file against ground truth.
    Eval {
        pred: PathBuf,
        gt: PathBuf,
        /// Sample spacing along strands in millimeters.
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long)]
        unsigned: bool,
        #[arg(long)]
        one_to_one: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample a random Gaussian with the Heun sampler and check its moments.
    DiffuseSelftest {
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert a hair file (or a cyHair file) to an ASCII PLY polyline set.
    ExportPly {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Coordinate scale applied when importing cyHair files.
        #[arg(long, default_value_t = 1.0)]
        scale: f32,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim() }));
            return ExitCode::FAILURE;
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e
                .downcast_ref::<hairkit_core::Error>()
                .map(|c| c.code())
                .or_else(|| e.downcast_ref::<std::io::Error>().map(|_| "io"))
                .unwrap_or("cli");
            eprintln!("{}", json!({ "error": code, "message": format!("{e:#}") }));
            ExitCode::FAILURE
        }
    }
}

fn read_hair_any(path: &Path, scale: f32) -> anyhow::Result<HairFile> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"HAIR") {
        Ok(read_cyhair(&bytes, scale)?)
    } else {
        Ok(HairFile::from_bytes(&bytes).map_err(hairkit_core::Error::from)?)
    }
}

fn load_spec(args: &GroomArgs) -> anyhow::Result<RandomSpec> {
    let mut spec = match &args.spec {
        Some(p) => RandomSpec::from_text(&std::fs::read_to_string(p)?)?,
        None => RandomSpec::default(),
    };
    if let Some(n) = args.strands {
        spec.set_fixed("strand_count", n as f64)?;
    }
    Ok(spec)
}

fn load_base(args: &GroomArgs, surface: &ScalpSurface) -> anyhow::Result<GuideSet> {
    match &args.guides {
        Some(p) => Ok(GuideSet::new(HairFile::read(p)?.strands()?, surface)?),
        None => Ok(GuideSet::preset(&args.style, surface)?),
    }
}

fn load_codec(path: &Path) -> anyhow::Result<CodecModel> {
    Ok(Container::read(path)?.codec()?)
}

fn run(command: Command) -> anyhow::Result<()> {
    let surface = ScalpSurface::default();
    match command {
        Command::Groom { seed, out_dir, groom } => {
            let spec = load_spec(&groom)?;
            let base = load_base(&groom, &surface)?;
            let codec = groom.codec.as_deref().map(load_codec).transpose()?;
            std::fs::create_dir_all(&out_dir)?;
            let sample = generate_sample_on(&base, &surface, &spec, seed)?;
            let rec = write_sample(
                &out_dir,
                seed,
                &sample,
                codec.as_ref(),
                &surface,
                &BakeOptions::default(),
            )?;
            println!(
                "{}",
                json!({ "seed": seed, "strands": sample.hair.len(), "params": rec.params, "hair": rec.hair,
                        "density": rec.density, "texture": rec.texture })
            );
        }
        Command::Dataset {
            count,
            start,
            jobs,
            out_dir,
            groom,
        } => {
            let spec = load_spec(&groom)?;
            let base = load_base(&groom, &surface)?;
            let codec = groom.codec.as_deref().map(load_codec).transpose()?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let cfg = DatasetConfig {
                out_dir: out_dir.clone(),
                seeds: (start..start + count).collect(),
                spec: &spec,
                base: &base,
                surface,
                codec: codec.as_ref(),
                bake: BakeOptions::default(),
                jobs,
            };
            let manifest = run_dataset(&cfg)?;
            println!(
                "{}",
                json!({ "samples": manifest.records.len(), "jobs": jobs, "out_dir": out_dir })
            );
        }
        Command::FitCodec { out, hair } => {
            let mut corpus = Vec::new();
            for p in &hair {
                corpus.extend(read_hair_any(p, 1.0)?.to_hairstyle()?.into_strands());
            }
            let codec = fit_codec(&corpus, &surface)?;
            let mut c = Container::new();
            c.put_codec(&codec)?;
            c.write(&out)?;
            let explained: f64 = codec.variances().iter().sum::<f64>() / codec.total_variance();
            println!(
                "{}",
                json!({ "strands": corpus.len(), "explained_variance": explained })
            );
        }
        Command::Encode {
            codec,
            hair,
            out,
            resolution,
            seed,
            blur,
        } => {
            let codec = load_codec(&codec)?;
            let hair = read_hair_any(&hair, 1.0)?.to_hairstyle()?;
            let (tex, density) = bake(&hair, &codec, &surface, &BakeOptions { resolution, seed, blur })?;
            let mut c = Container::new();
            c.put_texture(&tex)?;
            c.put_density(&density)?;
            c.write(&out)?;
            println!(
                "{}",
                json!({ "valid_texels": tex.valid_count(), "resolution": resolution })
            );
        }
        Command::Interp { input, out } => {
            let mut c = Container::read(&input)?;
            let tex = c.texture()?;
            let filled = push_pull(&tex, &ScalpMask::new(tex.resolution()))?;
            c.put_texture(&filled)?;
            c.write(&out)?;
            println!(
                "{}",
                json!({ "valid_before": tex.valid_count(), "valid_after": filled.valid_count() })
            );
        }
        Command::Decode {
            codec,
            texture,
            density,
            count,
            seed,
            out,
        } => {
            let codec = load_codec(&codec)?;
            let tc = Container::read(&texture)?;
            let tex = tc.texture()?;
            let dens = match density {
                Some(p) => Container::read(&p)?.density()?,
                None => tc.density()?,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hair = decode_hairstyle(&tex, &dens, count, &codec, &surface, &mut rng)?;
            HairFile::from_hairstyle(&hair).write(&out)?;
            println!("{}", json!({ "strands": hair.len() }));
        }
        Command::Weights { codec, epsilon, out } => {
            let codec = load_codec(&codec)?;
            let cfg = LossConfig::default();
            let raw = raw_channel_weights(&codec, &cfg, epsilon)?;
            let w = channel_weights(&codec, &cfg, epsilon)?;
            let sink: Box<dyn std::io::Write> = match &out {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(std::io::stdout().lock()),
            };
            let mut csv_out = csv::Writer::from_writer(sink);
            csv_out.write_record(["channel", "raw", "weight"])?;
            for (i, (r, v)) in raw.iter().zip(w.as_slice()).enumerate() {
                csv_out.write_record([i.to_string(), r.to_string(), v.to_string()])?;
            }
            csv_out.flush()?;
        }
        Command::Eval {
            pred,
            gt,
            spacing,
            unsigned,
            one_to_one,
            csv,
        } => {
            let p = read_hair_any(&pred, 1.0)?.to_hairstyle()?;
            let g = read_hair_any(&gt, 1.0)?.to_hairstyle()?;
            let report = evaluate_hair(
                &p,
                &g,
                spacing,
                &ThresholdPair::defaults(),
                MatchOptions { unsigned, one_to_one },
            )?;
            print!("{}", report.to_table());
            if let Some(path) = csv {
                report.write_csv(BufWriter::new(File::create(path)?))?;
            }
        }
        Command::DiffuseSelftest {
            dim,
            steps,
            samples,
            seed,
        } => selftest(dim, steps, samples, seed)?,
        Command::ExportPly { input, out, scale } => {
            let h = read_hair_any(&input, scale)?;
            write_ply(&h, BufWriter::new(File::create(&out)?))?;
            println!(
                "{}",
                json!({ "vertices": h.total_points(), "strands": h.strand_count() })
            );
        }
    }
    Ok(())
}

fn selftest(dim: usize, steps: usize, samples: usize, seed: u64) -> anyhow::Result<()> {
    if dim == 0 || samples < 2 {
        bail!("dim must be >= 1 and samples >= 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let cov = random_covariance(dim, 0.1, 1.0, &mut rng)?;
    let d = GaussianDenoiser::new(mean.clone(), &cov, DEFAULT_SIGMA_DATA)?;
    let schedule = sigma_schedule(steps, DEFAULT_SIGMA_MIN, DEFAULT_SIGMA_MAX, DEFAULT_RHO)?;
    let x = heun_sample(&d, &schedule, &[samples, dim], &mut rng, DEFAULT_SIGMA_DATA, None, None)?
        .into_dimensionality::<Ix2>()?;
    let m = x.mean_axis(Axis(0)).expect("non-empty");
    let centered = &x - &m;
    let emp = centered.t().dot(&centered) / (samples as f64 - 1.0);
    let mean_err = m.iter().zip(&mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut diff = 0.0;
    let mut norm = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            diff += (emp[[i, j]] - cov[i * dim + j]).powi(2);
            norm += cov[i * dim + j].powi(2);
        }
    }
    let cov_err = (diff / norm).sqrt();
    let pass = mean_err <= 0.05 && cov_err <= 0.05;
    println!(
        "{}",
        json!({ "dim": dim, "steps": steps, "samples": samples, "mean_max_abs_error": mean_err,
                "cov_rel_frobenius_error": cov_err, "pass": pass })
    );
    if !pass {
        bail!("moment check failed");
    }
    Ok(())
}
