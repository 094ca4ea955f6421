//! Physical inputs: dimer and atom parameters, transition channels and the
//! dynamic polarizabilities built from them.
//!
//! Polarizabilities are discrete pole sums
//! `α(z) = Σ_k 2 ΔE_k μ_k² / (ΔE_k² − z²)`, evaluated either on the imaginary
//! axis (`z = iω`) or at a real frequency. Species files carry energies in
//! cm⁻¹ and masses in unified atomic mass units; the converted values live in
//! [`DimerSpecies`] and [`AtomSpecies`] in atomic units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angular::clebsch_gordan;
use crate::error::{Error, Result};
use crate::units::{amu_to_me, cm1_to_hartree};

const BUNDLED_MINIMAL: &str = include_str!("../data/cs2_cs_minimal.json");

/// Minimum distance (hartree) between a real evaluation frequency and a pole.
pub const POLE_GUARD: f64 = 1e-6;

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimer: DimerFile,
    pub atom: AtomFile,
    pub masses: MassesFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimerFile {
    pub b_rot_cm1: f64,
    pub q20_au: f64,
    pub parallel_channels: Vec<ChannelFile>,
    pub perpendicular_channels: Vec<ChannelFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub l: u32,
    pub r2_au: f64,
    pub channels: Vec<ChannelFile>,
    #[serde(default)]
    pub core_channels: Vec<ChannelFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassesFile {
    pub dimer_amu: f64,
    pub atom_amu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub delta_e_cm1: f64,
    pub dipole_au: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_l: Option<u32>,
    pub label: String,
}

// ---------------------------------------------------------------------------
// Validated species
// ---------------------------------------------------------------------------

/// One pole of a polarizability. For dimer and core channels `dipole` is the
/// transition dipole itself; for valence atomic channels it is the radial
/// matrix element `r_{n'ℓ',nℓ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionChannel {
    pub delta_e: f64,
    pub dipole: f64,
    pub target_l: Option<u32>,
    pub label: String,
}

impl TransitionChannel {
    pub fn is_downward(&self) -> bool {
        self.delta_e < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizabilityKind {
    Parallel,
    Perpendicular,
}

/// Where a polarizability is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    /// `z = iω` with `ω >= 0`.
    Imaginary(f64),
    /// Real `z`, away from every pole.
    Real(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimerSpecies {
    pub b_rot: f64,
    pub q20: f64,
    pub parallel_channels: Vec<TransitionChannel>,
    pub perpendicular_channels: Vec<TransitionChannel>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpecies {
    pub l: u32,
    pub r2_expect: f64,
    pub channels: Vec<TransitionChannel>,
    pub core_channels: Vec<TransitionChannel>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesData {
    pub dimer: DimerSpecies,
    pub atom: AtomSpecies,
    pub reduced_mass: f64,
    source: SpeciesFile,
}

fn pole_sum_imaginary(channels: impl IntoIterator<Item = (f64, f64)>, omega: f64) -> f64 {
    channels
        .into_iter()
        .map(|(de, mu)| 2.0 * de * mu * mu / (de * de + omega * omega))
        .sum()
}

fn pole_sum_real(channels: impl IntoIterator<Item = (f64, f64)>, z: f64) -> Result<f64> {
    let mut sum = 0.0;
    for (de, mu) in channels {
        if (z.abs() - de.abs()).abs() < POLE_GUARD {
            return Err(Error::ResonantEvaluation { z, pole: de });
        }
        sum += 2.0 * de * mu * mu / (de * de - z * z);
    }
    Ok(sum)
}

impl DimerSpecies {
    pub fn channels(&self, kind: PolarizabilityKind) -> &[TransitionChannel] {
        match kind {
            PolarizabilityKind::Parallel => &self.parallel_channels,
            PolarizabilityKind::Perpendicular => &self.perpendicular_channels,
        }
    }

    /// Parallel or perpendicular dynamic polarizability of the dimer.
    pub fn polarizability(&self, kind: PolarizabilityKind, z: Frequency) -> Result<f64> {
        let poles = self.channels(kind).iter().map(|c| (c.delta_e, c.dipole));
        match z {
            Frequency::Imaginary(omega) => Ok(pole_sum_imaginary(poles, omega)),
            Frequency::Real(z) => pole_sum_real(poles, z),
        }
    }
}

/// Free-function form of [`DimerSpecies::polarizability`].
pub fn dimer_polarizability(s: &DimerSpecies, kind: PolarizabilityKind, z: Frequency) -> Result<f64> {
    s.polarizability(kind, z)
}

impl AtomSpecies {
    /// Transition dipole `μ = r C^{ℓ'0}_{ℓ0 10} / √3` of a valence channel.
    pub fn transition_dipole(&self, channel: &TransitionChannel) -> Result<f64> {
        let target = channel.target_l.ok_or_else(|| Error::InvalidSpecies {
            field: format!("atom.channels[{}].target_l", channel.label),
            line: None,
            reason: "valence channels need a target orbital momentum".into(),
        })?;
        let c = clebsch_gordan(self.l as i32, 0, 1, 0, target as i32, 0)?;
        Ok(channel.dipole * c / 3f64.sqrt())
    }

    /// State-to-state polarizability `2ΔE μ² / (ΔE² + ω²)` on the imaginary axis.
    pub fn channel_polarizability(&self, channel: &TransitionChannel, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::InvalidArgument(format!("imaginary frequency must be >= 0, got {omega}")));
        }
        let mu = self.transition_dipole(channel)?;
        Ok(pole_sum_imaginary([(channel.delta_e, mu)], omega))
    }

    /// Core contribution `α_c(iω)`; zero without core channels.
    pub fn core_polarizability(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::InvalidArgument(format!("imaginary frequency must be >= 0, got {omega}")));
        }
        Ok(pole_sum_imaginary(self.core_channels.iter().map(|c| (c.delta_e, c.dipole)), omega))
    }

    pub fn downward_channels(&self) -> impl Iterator<Item = &TransitionChannel> {
        self.channels.iter().filter(|c| c.is_downward())
    }

    /// Smallest `|ΔE|` among the valence channels.
    pub fn smallest_excitation(&self) -> f64 {
        self.channels.iter().map(|c| c.delta_e.abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn atomic_channel_polarizability(a: &AtomSpecies, channel: &TransitionChannel, omega: f64) -> Result<f64> {
    a.channel_polarizability(channel, omega)
}

pub fn core_polarizability(a: &AtomSpecies, omega: f64) -> Result<f64> {
    a.core_polarizability(omega)
}

// ---------------------------------------------------------------------------
// Loading and validation
// ---------------------------------------------------------------------------

/// Finds the 1-based line of `key`, optionally inside the `index`-th element
/// of the array named `array`.
fn locate(text: Option<&str>, array: Option<&str>, index: Option<usize>, key: &str) -> Option<usize> {
    let text = text?;
    let mut pos = 0;
    if let Some(array) = array {
        pos = text.find(&format!("\"{array}\""))?;
    }
    let needle = format!("\"{key}\"");
    let skip = index.unwrap_or(0);
    for _ in 0..skip {
        pos += text[pos..].find(&needle)? + needle.len();
    }
    let at = pos + text[pos..].find(&needle)?;
    Some(text[..at].matches('\n').count() + 1)
}

struct Validator<'a> {
    text: Option<&'a str>,
}

impl Validator<'_> {
    fn fail(&self, section: &str, array: Option<&str>, index: Option<usize>, key: &str, reason: impl Into<String>) -> Error {
        let field = match (array, index) {
            (Some(a), Some(i)) => format!("{section}.{a}[{i}].{key}"),
            _ => format!("{section}.{key}"),
        };
        Error::InvalidSpecies {
            field,
            line: locate(self.text, array.or(Some(section)), index, key),
            reason: reason.into(),
        }
    }

    fn channels(
        &self,
        section: &str,
        array: &str,
        raw: &[ChannelFile],
        require_positive: bool,
        parent_l: Option<u32>,
        allow_empty: bool,
    ) -> Result<Vec<TransitionChannel>> {
        if raw.is_empty() && !allow_empty {
            return Err(self.fail(section, None, None, array, "channel list must not be empty"));
        }
        raw.iter()
            .enumerate()
            .map(|(i, c)| {
                if !c.delta_e_cm1.is_finite() || c.delta_e_cm1 == 0.0 {
                    return Err(self.fail(section, Some(array), Some(i), "delta_e_cm1", "excitation energy must be finite and non-zero"));
                }
                if require_positive && c.delta_e_cm1 < 0.0 {
                    return Err(self.fail(section, Some(array), Some(i), "delta_e_cm1", "excitation energy must be positive"));
                }
                if !c.dipole_au.is_finite() || c.dipole_au < 0.0 {
                    return Err(self.fail(section, Some(array), Some(i), "dipole_au", "dipole must be finite and >= 0"));
                }
                match (parent_l, c.target_l) {
                    (Some(l), Some(t)) => {
                        if t + 1 != l && t != l + 1 {
                            return Err(self.fail(section, Some(array), Some(i), "target_l", format!("ℓ = {l} → ℓ' = {t} is not a dipole transition")));
                        }
                    }
                    (Some(_), None) => {
                        return Err(self.fail(section, Some(array), Some(i), "target_l", "valence channels need target_l"));
                    }
                    (None, _) => {}
                }
                Ok(TransitionChannel {
                    delta_e: cm1_to_hartree(c.delta_e_cm1),
                    dipole: c.dipole_au,
                    target_l: c.target_l,
                    label: c.label.clone(),
                })
            })
            .collect()
    }
}

impl SpeciesData {
    /// Validates a parsed species file. `text` is the original source, used
    /// only to report line numbers.
    pub fn from_file_repr(source: SpeciesFile, text: Option<&str>) -> Result<Self> {
        let v = Validator { text };
        let d = &source.dimer;
        if !(d.b_rot_cm1.is_finite() && d.b_rot_cm1 > 0.0) {
            return Err(v.fail("dimer", None, None, "b_rot_cm1", "rotational constant must be positive"));
        }
        if !d.q20_au.is_finite() {
            return Err(v.fail("dimer", None, None, "q20_au", "must be finite"));
        }
        let parallel = v.channels("dimer", "parallel_channels", &d.parallel_channels, true, None, false)?;
        let perpendicular = v.channels("dimer", "perpendicular_channels", &d.perpendicular_channels, true, None, false)?;

        let a = &source.atom;
        if a.l == 0 {
            return Err(v.fail("atom", None, None, "l", "the excited atom must have ℓ >= 1"));
        }
        if !(a.r2_au.is_finite() && a.r2_au >= 0.0) {
            return Err(v.fail("atom", None, None, "r2_au", "must be finite and >= 0"));
        }
        let channels = v.channels("atom", "channels", &a.channels, false, Some(a.l), false)?;
        let core = v.channels("atom", "core_channels", &a.core_channels, true, None, true)?;

        let m = &source.masses;
        for (key, val) in [("dimer_amu", m.dimer_amu), ("atom_amu", m.atom_amu)] {
            if !(val.is_finite() && val > 0.0) {
                return Err(v.fail("masses", None, None, key, "mass must be positive"));
            }
        }
        let dimer_mass = amu_to_me(m.dimer_amu);
        let atom_mass = amu_to_me(m.atom_amu);

        Ok(Self {
            dimer: DimerSpecies {
                b_rot: cm1_to_hartree(d.b_rot_cm1),
                q20: d.q20_au,
                parallel_channels: parallel,
                perpendicular_channels: perpendicular,
                mass: dimer_mass,
            },
            atom: AtomSpecies {
                l: a.l,
                r2_expect: a.r2_au,
                channels,
                core_channels: core,
                mass: atom_mass,
            },
            reduced_mass: dimer_mass * atom_mass / (dimer_mass + atom_mass),
            source,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SpeciesFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_file_repr(file, Some(text))
    }

    /// Reads and validates a species file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The bundled minimal Cs₂ + Cs(6P) dataset.
    pub fn bundled_minimal() -> Self {
        Self::from_json_str(BUNDLED_MINIMAL).expect("bundled dataset is valid")
    }

    pub fn bundled_minimal_json() -> &'static str {
        BUNDLED_MINIMAL
    }

    /// The file representation this data was built from.
    pub fn source(&self) -> &SpeciesFile {
        &self.source
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.source).expect("species file serializes")
    }

    /// A modified copy, revalidated. Useful for parameter studies.
    pub fn with_source(&self, edit: impl FnOnce(&mut SpeciesFile)) -> Result<Self> {
        let mut file = self.source.clone();
        edit(&mut file);
        Self::from_file_repr(file, None)
    }
}

pub fn load_species(path: impl AsRef<Path>) -> Result<SpeciesData> {
    SpeciesData::load(path)
}
