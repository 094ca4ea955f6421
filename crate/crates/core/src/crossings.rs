//! Diabatic crossings, Landau-Zener probabilities and the validity radius of
//! the `1/Rⁿ` expansion.

use std::f64::consts::PI;

use serde::Serialize;

use crate::diabatic::DiabaticBasis;
use crate::error::{Error, Result};
use crate::species::SpeciesData;
use crate::units::BOLTZMANN_HARTREE_PER_K;

/// `|W̄|` reported at a diagonal crossing.
pub const RESONANCE_CLAMP: f64 = 1e6;

/// Relative size below which numerator and denominator of `W̄` are both
/// considered zero.
pub const INDETERMINATE_TOLERANCE: f64 = 1e-12;

const SCAN_POINTS: usize = 4000;

/// Where two diabatic diagonals cross, with the coupling and slopes there.
#[derive(Debug, Clone, Serialize)]
pub struct CrossingGeometry {
    /// Indices into the basis (`p - 1`).
    pub i: usize,
    pub j: usize,
    pub r0: f64,
    /// `W^d_ij(R0)` (hartree).
    pub w_pr: f64,
    /// `|∂W_ii/∂R − ∂W_jj/∂R|` at `R0` (hartree/bohr).
    pub slope_diff: f64,
    /// Common diagonal energy at `R0` (hartree).
    pub energy: f64,
}

/// Landau-Zener passage for one entrance channel.
#[derive(Debug, Clone, Serialize)]
pub struct Passage {
    /// Label `p` of the entrance channel.
    pub entrance: usize,
    /// Velocity at the crossing (a.u.).
    pub velocity: f64,
    pub gamma: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingEvent {
    pub p: usize,
    pub r: usize,
    pub label_p: String,
    pub label_r: String,
    pub r0: f64,
    pub w_pr: f64,
    pub slope_diff: f64,
    pub energy: f64,
    pub temperature: f64,
    /// Entrance on the channel with the higher rotational asymptote.
    pub upper: Option<Passage>,
    /// Entrance on the channel with the lower asymptote; `None` when the
    /// crossing is classically forbidden from it.
    pub lower: Option<Passage>,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scan_grid(r_min: f64, r_max: f64) -> Vec<f64> {
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..SCAN_POINTS).map(|k| (a + (b - a) * k as f64 / (SCAN_POINTS - 1) as f64).exp()).collect()
}

/// All sign changes of `W_ii − W_jj` in `[r_min, r_max]`, located by a
/// logarithmic scan and bisection to machine precision.
pub fn find_crossings(basis: &DiabaticBasis, r_min: f64, r_max: f64) -> Result<Vec<CrossingGeometry>> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Error::InvalidGrid(format!("crossing range [{r_min}, {r_max}]")));
    }
    let grid = scan_grid(r_min, r_max);
    let n = basis.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = |r: f64| basis.diagonal(i, r) - basis.diagonal(j, r);
            let vals: Vec<f64> = grid.iter().map(|&r| d(r)).collect();
            let mut roots = Vec::new();
            for k in 0..grid.len() - 1 {
                let (a, b) = (vals[k], vals[k + 1]);
                if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
                    roots.push(bisect(d, grid[k], grid[k + 1]));
                } else if b == 0.0 && k + 2 < grid.len() && a * vals[k + 2] < 0.0 {
                    roots.push(grid[k + 1]);
                }
            }
            for r0 in roots {
                out.push(CrossingGeometry {
                    i,
                    j,
                    r0,
                    w_pr: basis.coupling(i, j, r0),
                    slope_diff: (basis.slope(i, r0) - basis.slope(j, r0)).abs(),
                    energy: 0.5 * (basis.diagonal(i, r0) + basis.diagonal(j, r0)),
                });
            }
        }
    }
    out.sort_by(|a, b| b.r0.total_cmp(&a.r0).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    Ok(out)
}

/// Velocity of a particle entering on channel `i`:
/// `v = √((2(B N(N+1) − W_ii(R)) + 3 k_B T)/μ)`.
pub fn channel_velocity(basis: &DiabaticBasis, i: usize, r: f64, temperature: f64, species: &SpeciesData) -> Result<f64> {
    if temperature.is_nan() || temperature < 0.0 {
        return Err(Error::InvalidArgument(format!("temperature must be non-negative, got {temperature}")));
    }
    let drop = basis.states[i].asymptote(basis.b_rot) - basis.diagonal(i, r);
    velocity_from_drop(drop, r, temperature, species.reduced_mass)
}

/// `√((2·drop + 3 k_B T)/μ)` with `drop` in hartree and `μ` in electron masses.
pub fn velocity_from_drop(drop: f64, r: f64, temperature: f64, reduced_mass: f64) -> Result<f64> {
    let radicand = (2.0 * drop + 3.0 * BOLTZMANN_HARTREE_PER_K * temperature) / reduced_mass;
    if radicand < 0.0 {
        return Err(Error::ClassicallyForbidden { r, radicand });
    }
    Ok(radicand.sqrt())
}

/// `Γ = |W_pr|² / (v |ΔF|)`.
pub fn lz_gamma(w_pr: f64, slope_diff: f64, velocity: f64) -> Result<f64> {
    if slope_diff == 0.0 {
        return Err(Error::ParallelCurves);
    }
    if velocity.is_nan() || velocity <= 0.0 {
        return Err(Error::InvalidArgument(format!("velocity must be positive, got {velocity}")));
    }
    Ok(w_pr * w_pr / (velocity * slope_diff.abs()))
}

/// `P = exp(−2πΓ)`.
pub fn lz_probability(w_pr: f64, slope_diff: f64, velocity: f64) -> Result<f64> {
    Ok(probability_from_gamma(lz_gamma(w_pr, slope_diff, velocity)?))
}

pub fn probability_from_gamma(gamma: f64) -> f64 {
    (-2.0 * PI * gamma).exp()
}

fn passage(basis: &DiabaticBasis, g: &CrossingGeometry, entrance: usize, temperature: f64, species: &SpeciesData) -> Option<Passage> {
    let velocity = channel_velocity(basis, entrance, g.r0, temperature, species).ok()?;
    let gamma = lz_gamma(g.w_pr, g.slope_diff, velocity).ok()?;
    Some(Passage { entrance: entrance + 1, velocity, gamma, probability: probability_from_gamma(gamma) })
}

/// Attaches velocities and Landau-Zener probabilities for both entrance
/// channels at temperature `T` (kelvin).
pub fn analyze_crossing(
    basis: &DiabaticBasis,
    g: &CrossingGeometry,
    temperature: f64,
    species: &SpeciesData,
) -> CrossingEvent {
    let (si, sj) = (&basis.states[g.i], &basis.states[g.j]);
    let (upper, lower) = if sj.n > si.n || (sj.n == si.n && g.j > g.i) { (g.j, g.i) } else { (g.i, g.j) };
    CrossingEvent {
        p: si.p,
        r: sj.p,
        label_p: si.label(),
        label_r: sj.label(),
        r0: g.r0,
        w_pr: g.w_pr,
        slope_diff: g.slope_diff,
        energy: g.energy,
        temperature,
        upper: passage(basis, g, upper, temperature, species),
        lower: passage(basis, g, lower, temperature, species),
    }
}

/// `find_crossings` followed by `analyze_crossing` on every hit.
pub fn crossing_events(
    basis: &DiabaticBasis,
    r_min: f64,
    r_max: f64,
    temperature: f64,
    species: &SpeciesData,
) -> Result<Vec<CrossingEvent>> {
    Ok(find_crossings(basis, r_min, r_max)?.iter().map(|g| analyze_crossing(basis, g, temperature, species)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingValue {
    /// `W̄_ij`, clamped to `±RESONANCE_CLAMP`.
    pub value: f64,
    pub resonance: bool,
    /// Numerator and denominator both vanish; excluded from validity scans.
    pub indeterminate: bool,
}

/// `W̄_ij(R) = W_ij / (W_ii − W_jj)`.
pub fn normalized_coupling(basis: &DiabaticBasis, i: usize, j: usize, r: f64) -> CouplingValue {
    let (wii, wjj) = (basis.diagonal(i, r), basis.diagonal(j, r));
    let num = basis.coupling(i, j, r);
    let den = wii - wjj;
    let scale = INDETERMINATE_TOLERANCE * (wii.abs() + wjj.abs() + num.abs());
    if num.abs() <= scale && den.abs() <= scale {
        return CouplingValue { value: 0.0, resonance: false, indeterminate: true };
    }
    let q = num / den;
    if q.is_finite() && q.abs() <= RESONANCE_CLAMP {
        CouplingValue { value: q, resonance: false, indeterminate: false }
    } else {
        let sign = if (num < 0.0) != (den < 0.0) && den != 0.0 { -1.0 } else { 1.0 };
        CouplingValue { value: sign * RESONANCE_CLAMP, resonance: true, indeterminate: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub p: usize,
    pub label: String,
    pub epsilon: f64,
    /// Largest `R` at which the representation fails (bohr).
    pub r_star: f64,
    /// The criterion was never met; `r_star` is the lower bound of the grid.
    pub never_met: bool,
    /// Diagonal crossings of this state above `r_star` (bohr), descending.
    pub resonances: Vec<f64>,
}

fn magnitude(c: CouplingValue) -> f64 {
    if c.indeterminate { 0.0 } else { c.value.abs() }
}

/// Validity radius `R_p*` of diabatic state `i`.
///
/// For every partner `j`, the maximal runs of grid points with
/// `|W̄_ij| ≥ ε` are collected. A run is a resonant spike when it contains a
/// sign change of `W_ii − W_jj`, does not reach the lower end of the grid,
/// and lies strictly inside the monotone lobe around that sign change (the
/// stretch over which `|W̄_ij|` falls steadily on both sides). `R_p*` is the
/// upper edge of the highest run that is not a spike, maximized over `j` and
/// refined by bisection between grid points.
pub fn validity_radius(basis: &DiabaticBasis, i: usize, epsilon: f64, r_grid: &[f64]) -> Result<ValidityReport> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if r_grid.len() < 2 || r_grid.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidGrid("validity scan needs at least two positive radii".into()));
    }
    let mut grid = r_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let n = grid.len();

    let mut best: Option<f64> = None;
    let mut resonances = Vec::new();
    for j in (0..basis.len()).filter(|&j| j != i) {
        let den = |r: f64| basis.diagonal(i, r) - basis.diagonal(j, r);
        let vals: Vec<f64> = grid.iter().map(|&r| magnitude(normalized_coupling(basis, i, j, r))).collect();
        let dens: Vec<f64> = grid.iter().map(|&r| den(r)).collect();
        // sign change between k and k+1
        let flips: Vec<usize> = (0..n - 1).filter(|&k| (dens[k] < 0.0) != (dens[k + 1] < 0.0) && dens[k] != 0.0).collect();
        for &k in &flips {
            resonances.push(bisect(den, grid[k], grid[k + 1]));
        }
        let lobes: Vec<(usize, usize, usize)> = flips
            .iter()
            .map(|&k| {
                let mut lo = k;
                while lo > 0 && vals[lo - 1] < vals[lo] {
                    lo -= 1;
                }
                let mut hi = k + 1;
                while hi + 1 < n && vals[hi + 1] < vals[hi] {
                    hi += 1;
                }
                (k, lo, hi)
            })
            .collect();

        let mut k = n;
        while k > 0 {
            k -= 1;
            if vals[k] < epsilon {
                continue;
            }
            let top = k;
            while k > 0 && vals[k - 1] >= epsilon {
                k -= 1;
            }
            let bottom = k;
            let spike = bottom > 0
                && lobes.iter().any(|&(f, lo, hi)| f + 1 >= bottom && f <= top && lo < bottom && top < hi);
            if spike {
                continue;
            }
            let edge = if top + 1 < n && !flips.contains(&top) {
                bisect(
                    |r| magnitude(normalized_coupling(basis, i, j, r)) - epsilon,
                    grid[top],
                    grid[top + 1],
                )
            } else {
                grid[top]
            };
            best = Some(best.map_or(edge, |b: f64| b.max(edge)));
            break;
        }
    }

    let (r_star, never_met) = match best {
        Some(r) => (r, false),
        None => (grid[0], true),
    };
    resonances.retain(|&r| r > r_star);
    resonances.sort_by(|a, b| b.total_cmp(a));
    let s = &basis.states[i];
    Ok(ValidityReport { p: s.p, label: s.label(), epsilon, r_star, never_met, resonances })
}

/// `W̄_ij` for every partner `j` along the grid.
pub fn coupling_trace(basis: &DiabaticBasis, i: usize, r_grid: &[f64]) -> Vec<Vec<CouplingValue>> {
    r_grid
        .iter()
        .map(|&r| (0..basis.len()).map(|j| if j == i { CouplingValue { value: 0.0, resonance: false, indeterminate: false } } else { normalized_coupling(basis, i, j, r) }).collect())
        .collect()
}
