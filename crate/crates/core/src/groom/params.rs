//! Groom parameters and their randomization ranges.
//!
//! Both serialize to the same line-oriented text format:
//!
//! ```text
//! # name            distribution  min      max
//! clump.strength    uniform       0.2      0.8
//! curl.radius       log-uniform   0.001    0.008
//! strand_count      fixed         100000   100000
//! ```
//!
//! Blank lines and `#` comments are ignored. Distributions are `fixed`,
//! `uniform` and `log-uniform`; integer parameters are rounded after drawing.
//! A [`GroomParams`] file is a spec in which every entry is `fixed`.

use std::fmt::Write as _;

use rand::Rng;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClumpParams {
    pub count: usize,
    /// Pull fraction at the tip, in [0, 1].
    pub strength: f64,
    /// Exponent of the root-to-tip pull profile.
    pub profile: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurlParams {
    /// Helix radius (m).
    pub radius: f64,
    /// Turns per meter of arc length.
    pub frequency: f64,
    /// Phase added to every strand's random phase (rad).
    pub phase: f64,
    /// Arc length over which the radius ramps up from zero (m); 0 means a
    /// constant radius from the root on.
    pub taper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    /// Displacement scale (m).
    pub amplitude: f64,
    /// Lattice frequency of the first octave (cycles per meter).
    pub frequency: f64,
    pub octaves: u32,
    /// Amplitude ratio between successive octaves.
    pub gain: f64,
}

impl NoiseParams {
    /// Sum of octave gains; `amplitude * gain_sum()` bounds the displacement.
    pub fn gain_sum(&self) -> f64 {
        (0..self.octaves).map(|o| self.gain.powi(o as i32)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityParams {
    pub baseline: f64,
    /// Relative amplitude of smooth density variation across the scalp.
    pub variation: f64,
    /// Center and radius of a bald disk in UV space; radius 0 disables it.
    pub bald_u: f64,
    pub bald_v: f64,
    pub bald_radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroomParams {
    pub strand_count: usize,
    /// Guides blended per interpolated strand.
    pub neighbors: usize,
    pub length_scale: f64,
    pub clump: ClumpParams,
    pub curl: CurlParams,
    pub noise: NoiseParams,
    /// Bend toward -z (rad per meter of arc length).
    pub droop: f64,
    pub density: DensityParams,
    /// Number of clump/curl/noise rounds.
    pub rounds: usize,
    /// Intensity multiplier applied per successive round.
    pub round_decay: f64,
    /// Minimum clearance above the scalp after shrinkwrap (m).
    pub margin: f64,
    pub seed: u64,
}

impl Default for GroomParams {
    fn default() -> Self {
        Self {
            strand_count: 100_000,
            neighbors: 3,
            length_scale: 1.0,
            clump: ClumpParams {
                count: 150,
                strength: 0.5,
                profile: 1.0,
            },
            curl: CurlParams {
                radius: 0.0,
                frequency: 20.0,
                phase: 0.0,
                taper: 0.02,
            },
            noise: NoiseParams {
                amplitude: 0.002,
                frequency: 30.0,
                octaves: 3,
                gain: 0.5,
            },
            droop: 0.0,
            density: DensityParams {
                baseline: 1.0,
                variation: 0.0,
                bald_u: 0.5,
                bald_v: 0.5,
                bald_radius: 0.0,
            },
            rounds: 2,
            round_decay: 0.5,
            margin: 0.002,
            seed: 0,
        }
    }
}

/// Names of every randomizable parameter, in the order they are drawn.
pub const PARAM_NAMES: [&str; 23] = [
    "strand_count",
    "neighbors",
    "length_scale",
    "clump.count",
    "clump.strength",
    "clump.profile",
    "curl.radius",
    "curl.frequency",
    "curl.phase",
    "curl.taper",
    "noise.amplitude",
    "noise.frequency",
    "noise.octaves",
    "noise.gain",
    "droop",
    "density.baseline",
    "density.variation",
    "bald.u",
    "bald.v",
    "bald.radius",
    "rounds",
    "round_decay",
    "margin",
];

fn is_integer(name: &str) -> bool {
    matches!(
        name,
        "strand_count" | "neighbors" | "clump.count" | "noise.octaves" | "rounds"
    )
}

impl GroomParams {
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "strand_count" => self.strand_count as f64,
            "neighbors" => self.neighbors as f64,
            "length_scale" => self.length_scale,
            "clump.count" => self.clump.count as f64,
            "clump.strength" => self.clump.strength,
            "clump.profile" => self.clump.profile,
            "curl.radius" => self.curl.radius,
            "curl.frequency" => self.curl.frequency,
            "curl.phase" => self.curl.phase,
            "curl.taper" => self.curl.taper,
            "noise.amplitude" => self.noise.amplitude,
            "noise.frequency" => self.noise.frequency,
            "noise.octaves" => self.noise.octaves as f64,
            "noise.gain" => self.noise.gain,
            "droop" => self.droop,
            "density.baseline" => self.density.baseline,
            "density.variation" => self.density.variation,
            "bald.u" => self.density.bald_u,
            "bald.v" => self.density.bald_v,
            "bald.radius" => self.density.bald_radius,
            "rounds" => self.rounds as f64,
            "round_decay" => self.round_decay,
            "margin" => self.margin,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!("{name} must be finite")));
        }
        let count = |v: f64| -> Result<usize> {
            if v < 0.0 {
                Err(Error::InvalidInput(format!("{name} must be >= 0")))
            } else {
                Ok(v.round() as usize)
            }
        };
        match name {
            "strand_count" => self.strand_count = count(value)?,
            "neighbors" => self.neighbors = count(value)?,
            "length_scale" => self.length_scale = value,
            "clump.count" => self.clump.count = count(value)?,
            "clump.strength" => self.clump.strength = value,
            "clump.profile" => self.clump.profile = value,
            "curl.radius" => self.curl.radius = value,
            "curl.frequency" => self.curl.frequency = value,
            "curl.phase" => self.curl.phase = value,
            "curl.taper" => self.curl.taper = value,
            "noise.amplitude" => self.noise.amplitude = value,
            "noise.frequency" => self.noise.frequency = value,
            "noise.octaves" => self.noise.octaves = count(value)? as u32,
            "noise.gain" => self.noise.gain = value,
            "droop" => self.droop = value,
            "density.baseline" => self.density.baseline = value,
            "density.variation" => self.density.variation = value,
            "bald.u" => self.density.bald_u = value,
            "bald.v" => self.density.bald_v = value,
            "bald.radius" => self.density.bald_radius = value,
            "rounds" => self.rounds = count(value)?,
            "round_decay" => self.round_decay = value,
            "margin" => self.margin = value,
            _ => return Err(Error::InvalidInput(format!("unknown parameter '{name}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.strand_count == 0 {
            return fail("strand_count must be >= 1");
        }
        if self.neighbors == 0 {
            return fail("neighbors must be >= 1");
        }
        if !(self.length_scale > 0.0 && self.length_scale <= 2.0) {
            return fail("length_scale must lie in (0, 2]");
        }
        if self.clump.count == 0 {
            return fail("clump.count must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.clump.strength) {
            return fail("clump.strength must lie in [0, 1]");
        }
        if self.clump.profile < 0.0 {
            return fail("clump.profile must be >= 0");
        }
        if self.curl.radius < 0.0 || self.curl.frequency < 0.0 || self.curl.taper < 0.0 {
            return fail("curl radius, frequency and taper must be >= 0");
        }
        if self.noise.amplitude < 0.0 || self.noise.frequency < 0.0 || self.noise.gain < 0.0 {
            return fail("noise amplitude, frequency and gain must be >= 0");
        }
        if self.droop < 0.0 {
            return fail("droop must be >= 0");
        }
        if !(self.density.baseline > 0.0 && self.density.baseline <= 1.0) {
            return fail("density.baseline must lie in (0, 1]");
        }
        if self.density.variation < 0.0 || self.density.bald_radius < 0.0 {
            return fail("density variation and bald radius must be >= 0");
        }
        if self.round_decay < 0.0 || self.margin < 0.0 {
            return fail("round_decay and margin must be >= 0");
        }
        Ok(())
    }

    /// Low-dimensional conditioning summary: length, curl and clump scalars.
    pub fn condition_vector(&self) -> Vec<f64> {
        vec![
            self.length_scale,
            self.curl.radius,
            self.curl.frequency,
            self.clump.strength,
            self.noise.amplitude,
            self.density.baseline,
        ]
    }

    /// Serializes as a spec whose entries are all fixed.
    pub fn to_text(&self) -> String {
        RandomSpec::fixed(self).to_text()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let spec = RandomSpec::from_text(text)?;
        let mut params = GroomParams::default();
        for entry in &spec.entries {
            if entry.distribution != Distribution::Fixed {
                return Err(Error::InvalidInput(format!("parameter '{}' is not fixed", entry.name)));
            }
            params.set(&entry.name, entry.min)?;
        }
        if let Some(seed) = spec.seed {
            params.seed = seed;
        }
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    Fixed,
    Uniform,
    LogUniform,
}

impl Distribution {
    fn tag(self) -> &'static str {
        match self {
            Distribution::Fixed => "fixed",
            Distribution::Uniform => "uniform",
            Distribution::LogUniform => "log-uniform",
        }
    }

    fn parse(tag: &str) -> Option<Self> {
        match tag {
            "fixed" => Some(Distribution::Fixed),
            "uniform" => Some(Distribution::Uniform),
            "log-uniform" | "loguniform" => Some(Distribution::LogUniform),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamRange {
    pub name: String,
    pub distribution: Distribution,
    pub min: f64,
    pub max: f64,
}

impl ParamRange {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            return self.min;
        }
        match self.distribution {
            Distribution::Fixed => self.min,
            Distribution::Uniform => rng.random_range(self.min..=self.max),
            Distribution::LogUniform => rng.random_range(self.min.ln()..=self.max.ln()).exp(),
        }
    }
}

/// Per-parameter randomization ranges. Parameters without an entry keep their
/// defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    entries: Vec<ParamRange>,
    /// Only present in serialized [`GroomParams`].
    seed: Option<u64>,
}

impl Default for RandomSpec {
    /// Ranges for desk-scale dataset generation.
    fn default() -> Self {
        use Distribution::*;
        let e = |name: &str, distribution, min, max| ParamRange {
            name: name.to_string(),
            distribution,
            min,
            max,
        };
        Self {
            entries: vec![
                e("strand_count", Fixed, 100_000.0, 100_000.0),
                e("length_scale", Uniform, 0.6, 1.4),
                e("clump.count", Uniform, 40.0, 300.0),
                e("clump.strength", Uniform, 0.0, 0.8),
                e("clump.profile", Uniform, 0.5, 2.0),
                e("curl.radius", LogUniform, 0.0005, 0.01),
                e("curl.frequency", LogUniform, 5.0, 60.0),
                e("curl.taper", Uniform, 0.005, 0.04),
                e("noise.amplitude", LogUniform, 0.0002, 0.004),
                e("noise.frequency", Uniform, 10.0, 60.0),
                e("noise.octaves", Uniform, 1.0, 4.0),
                e("droop", Uniform, 0.0, 2.0),
                e("density.baseline", Uniform, 0.5, 1.0),
                e("density.variation", Uniform, 0.0, 0.5),
                e("bald.u", Uniform, 0.35, 0.65),
                e("bald.v", Uniform, 0.35, 0.65),
                e("bald.radius", Uniform, 0.0, 0.15),
            ],
            seed: None,
        }
    }
}

impl RandomSpec {
    pub fn new(entries: Vec<ParamRange>) -> Result<Self> {
        let spec = Self { entries, seed: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fixed(params: &GroomParams) -> Self {
        Self {
            entries: PARAM_NAMES
                .iter()
                .map(|name| {
                    let v = params.get(name).expect("known parameter");
                    ParamRange {
                        name: name.to_string(),
                        distribution: Distribution::Fixed,
                        min: v,
                        max: v,
                    }
                })
                .collect(),
            seed: Some(params.seed),
        }
    }

    pub fn entries(&self) -> &[ParamRange] {
        &self.entries
    }

    /// Replaces (or adds) the range of one parameter.
    pub fn set(&mut self, range: ParamRange) -> Result<()> {
        validate_range(&range)?;
        match self.entries.iter_mut().find(|e| e.name == range.name) {
            Some(e) => *e = range,
            None => self.entries.push(range),
        }
        Ok(())
    }

    pub fn set_fixed(&mut self, name: &str, value: f64) -> Result<()> {
        self.set(ParamRange {
            name: name.to_string(),
            distribution: Distribution::Fixed,
            min: value,
            max: value,
        })
    }

    fn validate(&self) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            validate_range(e)?;
            if self.entries[..i].iter().any(|p| p.name == e.name) {
                return Err(Error::InvalidInput(format!("duplicate parameter '{}'", e.name)));
            }
        }
        Ok(())
    }

    /// Draws a parameter set. Entries are visited in [`PARAM_NAMES`] order, so
    /// the result does not depend on the order of lines in a spec file.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroomParams> {
        let mut params = GroomParams::default();
        for name in PARAM_NAMES {
            if let Some(range) = self.entries.iter().find(|e| e.name == name) {
                let mut v = range.draw(rng);
                if is_integer(name) {
                    v = v.round();
                }
                params.set(name, v)?;
            }
        }
        if let Some(seed) = self.seed {
            params.seed = seed;
        }
        params.validate()?;
        Ok(params)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# name distribution min max\n");
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed fixed {seed} {seed}");
        }
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                e.name,
                e.distribution.tag(),
                fmt_f64(e.min),
                fmt_f64(e.max)
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seed = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let fields: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|f| !f.is_empty())
                .collect();
            let [name, dist, min, max] = fields.as_slice() else {
                return Err(err(format!("expected 4 fields, got {}", fields.len())));
            };
            let distribution =
                Distribution::parse(dist).ok_or_else(|| err(format!("unknown distribution '{dist}'")))?;
            if *name == "seed" {
                let v: u64 = min.parse().map_err(|_| err(format!("bad seed '{min}'")))?;
                seed = Some(v);
                continue;
            }
            if !PARAM_NAMES.contains(name) {
                return Err(err(format!("unknown parameter '{name}'")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number '{s}'")));
            let range = ParamRange {
                name: name.to_string(),
                distribution,
                min: parse(min)?,
                max: parse(max)?,
            };
            validate_range(&range).map_err(|e| err(e.to_string()))?;
            entries.push(range);
        }
        let spec = Self { entries, seed };
        spec.validate()?;
        Ok(spec)
    }
}

fn validate_range(r: &ParamRange) -> Result<()> {
    if !PARAM_NAMES.contains(&r.name.as_str()) {
        return Err(Error::InvalidInput(format!("unknown parameter '{}'", r.name)));
    }
    if !(r.min.is_finite() && r.max.is_finite()) || r.min > r.max {
        return Err(Error::InvalidInput(format!(
            "range of '{}' must satisfy min <= max",
            r.name
        )));
    }
    if r.distribution == Distribution::LogUniform && r.min <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "log-uniform range of '{}' must be positive",
            r.name
        )));
    }
    if r.distribution == Distribution::Fixed && r.min != r.max {
        return Err(Error::InvalidInput(format!(
            "fixed parameter '{}' needs min == max",
            r.name
        )));
    }
    Ok(())
}

/// Shortest representation that parses back to the same value.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
