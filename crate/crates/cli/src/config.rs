//! Run configuration: defaults, optional TOML file, command-line overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use longrange::quadrature::DEFAULT_NODES;
use longrange::{Parity, Symmetry};
use serde::Deserialize;

use crate::CliError;

pub const MAX_NMAX: u32 = 40;
/// Below this distance the electron clouds overlap (bohr).
pub const OVERLAP_RADIUS: f64 = 40.0;

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML file with any of the settings below; flags win over file values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Species file (JSON); the bundled toy dataset when omitted
    #[arg(long, global = true, value_name = "PATH")]
    pub species: Option<PathBuf>,
    /// Comma-separated symmetry labels (sigma+, sigma-, pi, delta, phi, gamma, h) or "all"
    #[arg(long, global = true, value_name = "LIST")]
    pub blocks: Option<String>,
    #[arg(long, global = true, value_name = "INT")]
    pub nmax: Option<u32>,
    /// Smallest distance (bohr)
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub rmin: Option<f64>,
    /// Largest distance (bohr)
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub rmax: Option<f64>,
    /// Number of logarithmic grid points
    #[arg(long, global = true, value_name = "INT")]
    pub points: Option<usize>,
    /// Collision temperature (K)
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub temperature: Option<f64>,
    /// Threshold on the normalized coupling
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Gauss-Legendre nodes for the frequency integrals
    #[arg(long = "quad-nodes", global = true, value_name = "INT")]
    pub quad_nodes: Option<usize>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Accept R_min below 40 bohr
    #[arg(long = "allow-overlap-region", global = true)]
    pub allow_overlap_region: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    species: Option<PathBuf>,
    blocks: Option<BlockList>,
    nmax: Option<u32>,
    rmin: Option<f64>,
    rmax: Option<f64>,
    points: Option<usize>,
    temperature: Option<f64>,
    epsilon: Option<f64>,
    quad_nodes: Option<usize>,
    out: Option<PathBuf>,
    allow_overlap_region: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BlockList {
    One(String),
    Many(Vec<String>),
}

impl BlockList {
    fn joined(self) -> String {
        match self {
            BlockList::One(s) => s,
            BlockList::Many(v) => v.join(","),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub species: Option<PathBuf>,
    pub symmetries: Vec<Symmetry>,
    pub n_max: u32,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub temperature: f64,
    pub epsilon: f64,
    pub quad_nodes: usize,
    pub out: PathBuf,
    pub allow_overlap_region: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            species: None,
            symmetries: Symmetry::standard(),
            n_max: 17,
            r_min: 40.0,
            r_max: 500.0,
            points: 400,
            temperature: 1e-3,
            epsilon: 0.1,
            quad_nodes: DEFAULT_NODES,
            out: PathBuf::from("longrange-out"),
            allow_overlap_region: false,
        }
    }
}

fn parse_blocks(list: &str) -> Result<Vec<Symmetry>, CliError> {
    let trimmed = list.trim();
    if trimmed.eq_ignore_ascii_case("all") {
        return Ok(Symmetry::standard());
    }
    let mut out: Vec<Symmetry> = Vec::new();
    for item in trimmed.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let sym: Symmetry = item.parse().map_err(|e: longrange::Error| CliError::Usage(e.to_string()))?;
        if !out.contains(&sym) {
            out.push(sym);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("--blocks needs at least one symmetry label".into()));
    }
    out.sort();
    Ok(out)
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(flags: &Overrides) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let mut c = RunConfig::default();
        let blocks = flags.blocks.clone().or(file.blocks.map(BlockList::joined));
        if let Some(b) = blocks {
            c.symmetries = parse_blocks(&b)?;
        }
        c.species = flags.species.clone().or(file.species);
        c.n_max = flags.nmax.or(file.nmax).unwrap_or(c.n_max);
        c.r_min = flags.rmin.or(file.rmin).unwrap_or(c.r_min);
        c.r_max = flags.rmax.or(file.rmax).unwrap_or(c.r_max);
        c.points = flags.points.or(file.points).unwrap_or(c.points);
        c.temperature = flags.temperature.or(file.temperature).unwrap_or(c.temperature);
        c.epsilon = flags.epsilon.or(file.epsilon).unwrap_or(c.epsilon);
        c.quad_nodes = flags.quad_nodes.or(file.quad_nodes).unwrap_or(c.quad_nodes);
        c.out = flags.out.clone().or(file.out).unwrap_or(c.out);
        c.allow_overlap_region = flags.allow_overlap_region || file.allow_overlap_region.unwrap_or(false);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Usage(m));
        if self.n_max > MAX_NMAX {
            return fail(format!("nmax = {} exceeds the limit of {MAX_NMAX}", self.n_max));
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return fail(format!("rmin must be positive, got {}", self.r_min));
        }
        if self.r_min < OVERLAP_RADIUS && !self.allow_overlap_region {
            return fail(format!(
                "rmin = {} lies inside the charge-overlap region (< {OVERLAP_RADIUS} bohr); pass --allow-overlap-region to proceed",
                self.r_min
            ));
        }
        if !(self.r_max > self.r_min && self.r_max.is_finite()) {
            return fail(format!("rmax must exceed rmin (got {} <= {})", self.r_max, self.r_min));
        }
        if self.points < 2 {
            return fail(format!("points must be at least 2, got {}", self.points));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return fail(format!("temperature must be >= 0 K, got {}", self.temperature));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.quad_nodes == 0 {
            return fail("quad-nodes must be positive".into());
        }
        Ok(())
    }

    /// Every selected `(symmetry, parity)` pair, in output order.
    pub fn block_keys(&self) -> Vec<(Symmetry, Parity)> {
        self.symmetries.iter().flat_map(|&s| [(s, Parity::Even), (s, Parity::Odd)]).collect()
    }
}
