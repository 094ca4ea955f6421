//! Angular-momentum algebra for integer momenta.
//!
//! Clebsch-Gordan coefficients follow the Condon-Shortley phase convention and
//! are evaluated with the Racah single-sum formula over a factorial table.
//! Every coupling in this crate has one small rank (1 or 2), so the Racah sum
//! never has more than a handful of terms and cancellation stays at the level
//! of a few ulps.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// An integer angular momentum `j` with projection `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AngularQuantum {
    pub j: u32,
    pub m: i32,
}

impl AngularQuantum {
    pub fn new(j: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > j {
            return Err(Error::InvalidAngularMomentum(format!("|m| = {} exceeds j = {j}", m.abs())));
        }
        Ok(Self { j, m })
    }
}

const FACTORIAL_TABLE_LEN: usize = 171;

fn factorials() -> &'static [f64; FACTORIAL_TABLE_LEN] {
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; FACTORIAL_TABLE_LEN];
        for n in 1..FACTORIAL_TABLE_LEN {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

#[inline]
pub(crate) fn factorial(n: i64) -> f64 {
    factorials()[n as usize]
}

#[inline]
fn triangle(j1: i64, j2: i64, j: i64) -> bool {
    j >= (j1 - j2).abs() && j <= j1 + j2
}

fn check_projection(j: i64, m: i64) -> Result<()> {
    if j < 0 {
        return Err(Error::InvalidAngularMomentum(format!("negative j = {j}")));
    }
    if m.abs() > j {
        return Err(Error::InvalidAngularMomentum(format!("|m| = {} exceeds j = {j}", m.abs())));
    }
    Ok(())
}

/// Clebsch-Gordan coefficient `C^{j m}_{j1 m1 j2 m2}`.
///
/// Returns exactly `0.0` when `m != m1 + m2` or the triangle rule fails.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> Result<f64> {
    let (j1, m1, j2, m2, j, m) = (j1 as i64, m1 as i64, j2 as i64, m2 as i64, j as i64, m as i64);
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j, m)?;
    if j1 + j2 + j + 1 >= FACTORIAL_TABLE_LEN as i64 {
        return Err(Error::InvalidAngularMomentum(format!(
            "momenta too large for the factorial table: j1 + j2 + j = {}",
            j1 + j2 + j
        )));
    }
    Ok(cg_unchecked(j1, m1, j2, m2, j, m))
}

pub(crate) fn cg_unchecked(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    if m != m1 + m2 || !triangle(j1, j2, j) {
        return 0.0;
    }
    let norm = ((2 * j + 1) as f64 * factorial(j1 + j2 - j) * factorial(j1 - j2 + j) * factorial(j2 - j1 + j)
        / factorial(j1 + j2 + j + 1))
        .sqrt();
    let proj = (factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j + m)
        * factorial(j - m))
        .sqrt();

    let k_min = 0.max(j2 - j - m1).max(j1 + m2 - j);
    let k_max = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(j1 + j2 - j - k)
            * factorial(j1 - m1 - k)
            * factorial(j2 + m2 - k)
            * factorial(j - j2 + m1 + k)
            * factorial(j - j1 - m2 + k);
        let term = 1.0 / denom;
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    norm * proj * sum
}

/// Right-hand side of the exchange identity
/// `C^{cγ}_{aα bβ} = (-1)^{a-α} sqrt((2c+1)/(2b+1)) C^{bβ}_{cγ a -α}`,
/// evaluated for the left-hand-side arguments `(a, α, b, β, c, γ)`.
pub fn cg_symmetry_flip(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> Result<f64> {
    check_projection(j1 as i64, m1 as i64)?;
    check_projection(j2 as i64, m2 as i64)?;
    check_projection(j as i64, m as i64)?;
    let phase = if (j1 - m1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let ratio = ((2 * j + 1) as f64 / (2 * j2 + 1) as f64).sqrt();
    Ok(phase * ratio * clebsch_gordan(j, m, j1, -m1, j2, m2)?)
}

/// Reduced Wigner rotation matrix element `d^j_{m1 m2}(β)`.
pub fn wigner_d_reduced(j: i32, m1: i32, m2: i32, beta: f64) -> Result<f64> {
    let (j, m1, m2) = (j as i64, m1 as i64, m2 as i64);
    check_projection(j, m1)?;
    check_projection(j, m2)?;
    if 2 * j >= FACTORIAL_TABLE_LEN as i64 {
        return Err(Error::InvalidAngularMomentum(format!("j = {j} too large")));
    }
    let (s, c) = (beta / 2.0).sin_cos();
    let pre = (factorial(j + m1) * factorial(j - m1) * factorial(j + m2) * factorial(j - m2)).sqrt();
    let k_min = 0.max(m2 - m1);
    let k_max = (j + m2).min(j - m1);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let sign = if (m1 - m2 + k) % 2 == 0 { 1.0 } else { -1.0 };
        let denom = factorial(j + m2 - k) * factorial(k) * factorial(m1 - m2 + k) * factorial(j - m1 - k);
        sum += sign * c.powi((2 * j + m2 - m1 - 2 * k) as i32) * s.powi((m1 - m2 + 2 * k) as i32) / denom;
    }
    Ok(pre * sum)
}

/// Read-only table of Clebsch-Gordan coefficients `C^{j m}_{j1 m1 k q}` for
/// small operator ranks `k`, warmed up once for `j1, j <= j_max`.
///
/// Lookups outside the warmed range fall back to direct evaluation.
#[derive(Debug, Clone)]
pub struct CgTable {
    j_max: i32,
    values: HashMap<(i32, i32, i32, i32, i32, i32), f64>,
}

impl CgTable {
    /// Precomputes every coefficient with operator rank in `ranks` and
    /// `j1, j <= j_max`.
    pub fn new(j_max: u32, ranks: &[u32]) -> Self {
        let j_max = j_max as i32;
        let mut values = HashMap::new();
        for &k in ranks {
            let k = k as i32;
            for j1 in 0..=j_max {
                for j in (j1 - k).abs()..=(j1 + k).min(j_max) {
                    for m1 in -j1..=j1 {
                        for q in -k..=k {
                            let m = m1 + q;
                            if m.abs() > j {
                                continue;
                            }
                            let v = cg_unchecked(j1 as i64, m1 as i64, k as i64, q as i64, j as i64, m as i64);
                            values.insert((j1, m1, k, q, j, m), v);
                        }
                    }
                }
            }
        }
        Self { j_max, values }
    }

    pub fn j_max(&self) -> u32 {
        self.j_max as u32
    }

    /// `C^{j m}_{j1 m1 j2 m2}`; zero for any out-of-range projection.
    pub fn get(&self, j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
        if j1 < 0 || j2 < 0 || j < 0 || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
            return 0.0;
        }
        match self.values.get(&(j1, m1, j2, m2, j, m)) {
            Some(&v) => v,
            None => cg_unchecked(j1 as i64, m1 as i64, j2 as i64, m2 as i64, j as i64, m as i64),
        }
    }
}
