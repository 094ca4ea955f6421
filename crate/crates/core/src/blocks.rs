//! Symmetry blocks of the perturbation operator.
//!
//! Both interaction kernels conserve `m_J = m + λ` and the parity of `N`, so
//! the quasi-degenerate space splits into blocks labelled by `|m_J|` and the
//! parity of `N`. For `m_J = 0` the reflection through a plane containing the
//! intermolecular axis, `|N m λ⟩ → (−1)^{m+λ} |N −m −λ⟩`, splits each block
//! further into `Σ⁺` and `Σ⁻`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::BasisState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Self {
        if n.is_multiple_of(2) { Parity::Even } else { Parity::Odd }
    }

    pub fn lowest_n(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reflection {
    Plus,
    Minus,
}

impl Reflection {
    fn sign(self) -> f64 {
        match self {
            Reflection::Plus => 1.0,
            Reflection::Minus => -1.0,
        }
    }
}

/// Diatomic-like symmetry label: `|m_J|` plus, for `m_J = 0`, the reflection
/// character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symmetry {
    pub abs_mj: u32,
    pub reflection: Option<Reflection>,
}

const GREEK: [&str; 6] = ["Sigma", "Pi", "Delta", "Phi", "Gamma", "H"];

impl Symmetry {
    pub fn new(abs_mj: u32, reflection: Option<Reflection>) -> Result<Self> {
        match (abs_mj, reflection) {
            (0, None) => Err(Error::InvalidArgument("Σ blocks need a reflection character".into())),
            (1.., Some(_)) => Err(Error::InvalidArgument("reflection character is defined for m_J = 0 only".into())),
            _ => Ok(Self { abs_mj, reflection }),
        }
    }

    pub const SIGMA_PLUS: Symmetry = Symmetry { abs_mj: 0, reflection: Some(Reflection::Plus) };
    pub const SIGMA_MINUS: Symmetry = Symmetry { abs_mj: 0, reflection: Some(Reflection::Minus) };
    pub const PI: Symmetry = Symmetry { abs_mj: 1, reflection: None };

    /// `Σ⁺, Σ⁻, Π, Δ, Φ, Γ, H`.
    pub fn standard() -> Vec<Symmetry> {
        let mut v = vec![Self::SIGMA_PLUS, Self::SIGMA_MINUS];
        v.extend((1..=5).map(|k| Symmetry { abs_mj: k, reflection: None }));
        v
    }

    /// Identifier safe for file names, e.g. `sigma_plus`, `pi`.
    pub fn slug(&self) -> String {
        match (self.abs_mj, self.reflection) {
            (0, Some(Reflection::Plus)) => "sigma_plus".into(),
            (0, Some(Reflection::Minus)) => "sigma_minus".into(),
            (k, _) if (k as usize) < GREEK.len() => GREEK[k as usize].to_lowercase(),
            (k, _) => format!("mj{k}"),
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.abs_mj, self.reflection) {
            (0, Some(Reflection::Plus)) => write!(f, "Sigma+"),
            (0, Some(Reflection::Minus)) => write!(f, "Sigma-"),
            (k, _) if (k as usize) < GREEK.len() => write!(f, "{}", GREEK[k as usize]),
            (k, _) => write!(f, "|mJ|={k}"),
        }
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_lowercase();
        let sym = match key.as_str() {
            "sigma+" | "sigma_plus" | "σ+" | "σ⁺" => Self::SIGMA_PLUS,
            "sigma-" | "sigma_minus" | "σ-" | "σ⁻" => Self::SIGMA_MINUS,
            "pi" | "π" => Self::PI,
            "delta" | "δ" => Symmetry { abs_mj: 2, reflection: None },
            "phi" | "φ" => Symmetry { abs_mj: 3, reflection: None },
            "gamma" | "γ" => Symmetry { abs_mj: 4, reflection: None },
            "h" => Symmetry { abs_mj: 5, reflection: None },
            _ => return Err(Error::InvalidArgument(format!("unknown symmetry `{s}`"))),
        };
        Ok(sym)
    }
}

/// One basis vector of a block: a normalized combination of product states
/// sharing `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub n: u32,
    pub components: Vec<(f64, BasisState)>,
}

impl BlockState {
    /// The representative `(m, λ)` used for labelling.
    pub fn representative(&self) -> BasisState {
        self.components[0].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryBlock {
    pub symmetry: Symmetry,
    pub parity: Parity,
    pub n_max: u32,
    pub l: u32,
    pub states: Vec<BlockState>,
}

impl SymmetryBlock {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn label(&self) -> String {
        format!("{} {}", self.symmetry, self.parity.name())
    }

    pub fn slug(&self) -> String {
        format!("{}_{}", self.symmetry.slug(), self.parity.name())
    }

    /// Rotational quantum numbers present, ascending.
    pub fn manifolds(&self) -> Vec<u32> {
        let mut ns: Vec<u32> = self.states.iter().map(|s| s.n).collect();
        ns.dedup();
        ns
    }

    /// Indices of the block states with rotational quantum number `n`.
    pub fn manifold_indices(&self, n: u32) -> Vec<usize> {
        self.states.iter().enumerate().filter(|(_, s)| s.n == n).map(|(i, _)| i).collect()
    }
}

/// Builds the block with the given symmetry and `N` parity, with
/// `N <= n_max`, for an atom of orbital momentum `l`.
pub fn build_block(symmetry: Symmetry, parity: Parity, n_max: u32, l: u32) -> SymmetryBlock {
    build_block_with_phase(symmetry, parity, n_max, l, |s| if (s.m + s.lambda) % 2 == 0 { 1.0 } else { -1.0 })
}

pub(crate) fn build_block_with_phase(
    symmetry: Symmetry,
    parity: Parity,
    n_max: u32,
    l: u32,
    phase: impl Fn(&BasisState) -> f64,
) -> SymmetryBlock {
    let li = l as i32;
    let mj = symmetry.abs_mj as i32;
    let mut states = Vec::new();
    let mut n = parity.lowest_n();
    while n <= n_max {
        let ni = n as i32;
        match symmetry.reflection {
            Some(reflection) => {
                if reflection == Reflection::Plus {
                    states.push(BlockState { n, components: vec![(1.0, BasisState { n, m: 0, lambda: 0 })] });
                }
                for lambda in 1..=li {
                    if lambda > ni {
                        break;
                    }
                    let a = BasisState { n, m: -lambda, lambda };
                    let b = a.reflected();
                    let c = std::f64::consts::FRAC_1_SQRT_2;
                    states.push(BlockState { n, components: vec![(c, a), (c * reflection.sign() * phase(&a), b)] });
                }
            }
            None => {
                for lambda in -li..=li {
                    let m = mj - lambda;
                    if m.abs() <= ni {
                        states.push(BlockState { n, components: vec![(1.0, BasisState { n, m, lambda })] });
                    }
                }
            }
        }
        n += 2;
    }
    SymmetryBlock { symmetry, parity, n_max, l, states }
}
