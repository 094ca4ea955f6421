//! Assembly of `W(R)` on a symmetry block and adiabatic curve sweeps.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{build_block, BlockState, Parity, Symmetry, SymmetryBlock};
use crate::error::{Error, Result};
use crate::operators::{vqq_kernel_with, BasisState, DispersionIntegrals, KernelContext};
use crate::species::SpeciesData;

/// Eigenvalues closer than this (hartree) are treated as degenerate when
/// deciding whether two curves swapped order.
pub const DEGENERACY_GAP: f64 = 1e-12;

/// Smallest distance included in convergence reports (bohr).
pub const CONVERGENCE_MIN_R: f64 = 45.0;

/// R-independent pieces of `W` restricted to one block.
#[derive(Debug, Clone)]
pub struct BlockKernels {
    pub block: SymmetryBlock,
    pub b_rot: f64,
    /// `B N(N+1)` for every block state (hartree).
    pub rotor: DVector<f64>,
    pub k5: DMatrix<f64>,
    pub k6: DMatrix<f64>,
    asymmetry: f64,
}

fn project(a: &BlockState, b: &BlockState, f: &impl Fn(&BasisState, &BasisState) -> f64) -> f64 {
    let mut acc = 0.0;
    for (ca, sa) in &a.components {
        for (cb, sb) in &b.components {
            acc += ca * cb * f(sa, sb);
        }
    }
    acc
}

impl BlockKernels {
    pub fn new(block: SymmetryBlock, species: &SpeciesData, integrals: &DispersionIntegrals) -> Self {
        let ctx = KernelContext::new(block.n_max + 1, species.atom.l);
        let n = block.len();
        let q = |a: &BasisState, b: &BasisState| vqq_kernel_with(&ctx, a, b, species);
        let d = |a: &BasisState, b: &BasisState| integrals.kernel(&ctx, a, b);
        let mut k5 = DMatrix::zeros(n, n);
        let mut k6 = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                k5[(i, j)] = project(&block.states[i], &block.states[j], &q);
                k6[(i, j)] = project(&block.states[i], &block.states[j], &d);
            }
        }
        let mut asymmetry: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                asymmetry = asymmetry.max((k5[(i, j)] - k5[(j, i)]).abs()).max((k6[(i, j)] - k6[(j, i)]).abs());
                let a5 = 0.5 * (k5[(i, j)] + k5[(j, i)]);
                let a6 = 0.5 * (k6[(i, j)] + k6[(j, i)]);
                k5[(i, j)] = a5;
                k5[(j, i)] = a5;
                k6[(i, j)] = a6;
                k6[(j, i)] = a6;
            }
        }
        let b_rot = species.dimer.b_rot;
        let rotor = DVector::from_iterator(n, block.states.iter().map(|s| b_rot * (s.n * (s.n + 1)) as f64));
        Self { block, b_rot, rotor, k5, k6, asymmetry }
    }

    /// Builds the block and its kernels in one go.
    pub fn for_block(
        symmetry: Symmetry,
        parity: Parity,
        n_max: u32,
        species: &SpeciesData,
        integrals: &DispersionIntegrals,
    ) -> Self {
        Self::new(build_block(symmetry, parity, n_max, species.atom.l), species, integrals)
    }

    pub fn len(&self) -> usize {
        self.rotor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotor.is_empty()
    }

    /// Largest `|K(i,j) − K(j,i)|` seen before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Copy with the dispersion kernel switched off.
    pub fn quadrupole_only(&self) -> Self {
        let mut k = self.clone();
        k.k6.fill(0.0);
        k
    }

    /// Copy with the quadrupole kernel switched off.
    pub fn dispersion_only(&self) -> Self {
        let mut k = self.clone();
        k.k5.fill(0.0);
        k
    }
}

pub(crate) fn check_distance(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDistance(r))
    }
}

/// `W(R) = diag(B N(N+1)) + K5/R⁵ + K6/R⁶` on the block (hartree).
pub fn assemble_w(kernels: &BlockKernels, r: f64) -> Result<DMatrix<f64>> {
    check_distance(r)?;
    let r5 = r.powi(5);
    let r6 = r5 * r;
    let mut w = &kernels.k5 / r5 + &kernels.k6 / r6;
    for i in 0..kernels.len() {
        w[(i, i)] += kernels.rotor[i];
    }
    Ok(w)
}

/// Label of an adiabatic curve: rank `p` (from 1) at the largest `R`, the
/// block symmetry, and the dominant rotational character there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurveLabel {
    pub p: usize,
    pub symmetry: Symmetry,
    pub parity: Parity,
    pub n_asymptotic: u32,
}

impl CurveLabel {
    pub fn name(&self) -> String {
        format!("({}){} N={}", self.p, self.symmetry, self.n_asymptotic)
    }
}

/// Adiabatic curves of one block on a descending `R` grid.
#[derive(Debug, Clone)]
pub struct CurveSweep {
    /// Descending; includes any points inserted during refinement.
    pub r_grid: Vec<f64>,
    /// `energies[k][c]`: energy of curve `c` at `r_grid[k]` (hartree).
    pub energies: Vec<Vec<f64>>,
    /// `vectors[k]`: column `c` is the eigenvector of curve `c`.
    pub vectors: Vec<DMatrix<f64>>,
    pub labels: Vec<CurveLabel>,
    /// Smallest overlap accepted between adjacent points.
    pub min_overlap: f64,
}

impl CurveSweep {
    pub fn curve(&self, c: usize) -> Vec<f64> {
        self.energies.iter().map(|row| row[c]).collect()
    }

    pub fn index_of(&self, r: f64) -> Option<usize> {
        self.r_grid.iter().position(|&x| x == r)
    }

    /// Largest deviation, in units of `B`, of a curve from its rotor
    /// asymptote at the first (largest) `R`.
    pub fn asymptotic_deviation(&self, b_rot: f64) -> f64 {
        self.labels
            .iter()
            .zip(&self.energies[0])
            .map(|(l, e)| (e - b_rot * (l.n_asymptotic * (l.n_asymptotic + 1)) as f64).abs() / b_rot)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Overlap below which adjacent points are considered unmatched.
    pub overlap_threshold: f64,
    /// Number of midpoint bisections allowed per grid interval.
    pub max_depth: u32,
    /// Insert extra points around local minima of the level gaps.
    pub densify: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { overlap_threshold: 0.5, max_depth: 14, densify: true }
    }
}

struct Frame {
    r: f64,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

fn diagonalize(kernels: &BlockKernels, r: f64) -> Result<Frame> {
    let w = assemble_w(kernels, r)?;
    let eig = SymmetricEigen::new(w);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
    }
    Ok(Frame { r, values, vectors })
}

/// State of the tracking at one accepted point.
struct Tracked {
    r: f64,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

struct Matching {
    /// `assign[c]`: eigen index at the new point for curve `c`.
    assign: Vec<usize>,
    worst: f64,
    swapped: bool,
}

fn match_frames(cur: &Tracked, next: &Frame) -> Matching {
    let n = cur.energies.len();
    let overlaps = cur.vectors.transpose() * &next.vectors;
    let mut pairs: Vec<(f64, usize, usize)> =
        (0..n).flat_map(|c| (0..n).map(move |j| (c, j))).map(|(c, j)| (overlaps[(c, j)].abs(), c, j)).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assign = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut left = n;
    let mut worst: f64 = 1.0;
    for (ov, c, j) in pairs {
        if left == 0 {
            break;
        }
        if assign[c] != usize::MAX || taken[j] {
            continue;
        }
        assign[c] = j;
        taken[j] = true;
        worst = worst.min(ov);
        left -= 1;
    }
    let mut swapped = false;
    'outer: for a in 0..n {
        for b in 0..n {
            let before = cur.energies[a] < cur.energies[b];
            if before && assign[a] > assign[b] && cur.energies[b] - cur.energies[a] > DEGENERACY_GAP {
                swapped = true;
                break 'outer;
            }
        }
    }
    Matching { assign, worst, swapped }
}

fn accept(cur: &Tracked, next: &Frame, assign: &[usize]) -> Tracked {
    let n = assign.len();
    let mut vectors = DMatrix::zeros(n, n);
    let mut energies = vec![0.0; n];
    for (c, &j) in assign.iter().enumerate() {
        let mut col = next.vectors.column(j).into_owned();
        if col.dot(&cur.vectors.column(c)) < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
        energies[c] = next.values[j];
    }
    Tracked { r: next.r, energies, vectors }
}

struct Tracker<'a> {
    kernels: &'a BlockKernels,
    opts: SweepOptions,
    out: Vec<Tracked>,
    min_overlap: f64,
}

impl Tracker<'_> {
    fn advance(&mut self, next: Frame, depth: u32) -> Result<()> {
        let cur = self.out.last().expect("seeded");
        let m = match_frames(cur, &next);
        let unmatched = m.worst < self.opts.overlap_threshold;
        if (unmatched || m.swapped) && depth < self.opts.max_depth {
            let mid = diagonalize(self.kernels, 0.5 * (cur.r + next.r))?;
            self.advance(mid, depth + 1)?;
            return self.advance(next, depth + 1);
        }
        if unmatched {
            return Err(Error::TrackingAmbiguous { r_from: cur.r, r_to: next.r, overlap: m.worst });
        }
        self.min_overlap = self.min_overlap.min(m.worst);
        let t = accept(cur, &next, &m.assign);
        self.out.push(t);
        Ok(())
    }
}

fn validate_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::InvalidGrid("empty R grid".into()));
    }
    for &r in r_grid {
        check_distance(r)?;
    }
    if r_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidGrid("R grid must be strictly descending".into()));
    }
    Ok(())
}

fn track(kernels: &BlockKernels, r_grid: &[f64], opts: SweepOptions) -> Result<CurveSweep> {
    let block = &kernels.block;
    let frames: Vec<Frame> = r_grid.par_iter().map(|&r| diagonalize(kernels, r)).collect::<Result<_>>()?;
    let mut frames = frames.into_iter();
    let first = frames.next().expect("non-empty grid");

    let n = kernels.len();
    let labels = (0..n)
        .map(|c| {
            let col = first.vectors.column(c);
            let mut best = (0u32, -1.0);
            for nn in block.manifolds() {
                let w: f64 = block.manifold_indices(nn).iter().map(|&i| col[i] * col[i]).sum();
                if w > best.1 {
                    best = (nn, w);
                }
            }
            CurveLabel { p: c + 1, symmetry: block.symmetry, parity: block.parity, n_asymptotic: best.0 }
        })
        .collect();

    let mut tracker = Tracker {
        kernels,
        opts,
        out: vec![Tracked { r: first.r, energies: first.values, vectors: first.vectors }],
        min_overlap: 1.0,
    };
    for frame in frames {
        tracker.advance(frame, 0)?;
    }
    let min_overlap = tracker.min_overlap;
    let mut sweep = CurveSweep { r_grid: vec![], energies: vec![], vectors: vec![], labels, min_overlap };
    for t in tracker.out {
        sweep.r_grid.push(t.r);
        sweep.energies.push(t.energies);
        sweep.vectors.push(t.vectors);
    }
    Ok(sweep)
}

/// Extra `R` values bracketing strict local minima of the sorted level gaps.
fn gap_minima_points(sweep: &CurveSweep) -> Vec<f64> {
    let sorted: Vec<Vec<f64>> = sweep
        .energies
        .iter()
        .map(|row| {
            let mut v = row.clone();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let n = sorted.first().map_or(0, Vec::len);
    let mut extra = Vec::new();
    for k in 1..sweep.r_grid.len().saturating_sub(1) {
        let hit = (0..n.saturating_sub(1)).any(|i| {
            let g = |kk: usize| sorted[kk][i + 1] - sorted[kk][i];
            g(k) < g(k - 1) && g(k) < g(k + 1)
        });
        if hit {
            let (up, r, down) = (sweep.r_grid[k - 1], sweep.r_grid[k], sweep.r_grid[k + 1]);
            for f in [1.0 / 3.0, 2.0 / 3.0] {
                extra.push(r + f * (up - r));
                extra.push(r - f * (r - down));
            }
        }
    }
    extra
}

pub fn eigensweep(kernels: &BlockKernels, r_grid: &[f64]) -> Result<CurveSweep> {
    eigensweep_with(kernels, r_grid, SweepOptions::default())
}

/// Diagonalizes `W` at every grid point (in parallel) and follows the
/// eigenvectors from the largest `R` downward by maximum overlap. Intervals
/// with an overlap below the threshold, or where two non-degenerate curves
/// exchange order, are bisected up to `max_depth` times.
pub fn eigensweep_with(kernels: &BlockKernels, r_grid: &[f64], opts: SweepOptions) -> Result<CurveSweep> {
    validate_grid(r_grid)?;
    if kernels.is_empty() {
        return Ok(CurveSweep {
            r_grid: r_grid.to_vec(),
            energies: vec![vec![]; r_grid.len()],
            vectors: vec![DMatrix::zeros(0, 0); r_grid.len()],
            labels: vec![],
            min_overlap: 1.0,
        });
    }
    let sweep = track(kernels, r_grid, opts)?;
    if !opts.densify {
        return Ok(sweep);
    }
    let mut extra = gap_minima_points(&sweep);
    if extra.is_empty() {
        return Ok(sweep);
    }
    extra.extend_from_slice(r_grid);
    extra.sort_by(|a, b| b.total_cmp(a));
    extra.dedup();
    track(kernels, &extra, opts)
}

/// Logarithmically spaced descending grid from `r_max` down to `r_min`.
pub fn log_grid(r_min: f64, r_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) || points < 2 {
        return Err(Error::InvalidGrid(format!("need 0 < r_min < r_max and at least 2 points (got {r_min}, {r_max}, {points})")));
    }
    let (a, b) = (r_max.ln(), r_min.ln());
    let mut g: Vec<f64> = (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect();
    g[0] = r_max;
    g[points - 1] = r_min;
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveShift {
    pub p: usize,
    pub n_asymptotic: u32,
    /// Largest `|ΔE|` over the reported points (hartree).
    pub max_shift: f64,
    /// Largest `|ΔE|` divided by the nearest-neighbour gap of the larger basis.
    pub max_relative_shift: f64,
    pub r_at_max_relative: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStep {
    pub n_max_from: u32,
    pub n_max_to: u32,
    pub curves: Vec<CurveShift>,
}

impl ConvergenceStep {
    pub fn max_shift(&self) -> f64 {
        self.curves.iter().map(|c| c.max_shift).fold(0.0, f64::max)
    }

    pub fn max_relative_shift(&self) -> f64 {
        self.curves.iter().map(|c| c.max_relative_shift).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub symmetry: Symmetry,
    pub parity: Parity,
    pub n_star: u32,
    /// `B N*(N*+1)` (hartree).
    pub ceiling: f64,
    pub r_min_reported: f64,
    pub steps: Vec<ConvergenceStep>,
}

/// Eigenpairs of the smaller basis at one `R`, matched to the larger basis
/// by maximum eigenvector overlap. The smaller block is a prefix of the
/// larger one, so its vectors embed by zero padding.
fn compare_at(small: &BlockKernels, large: &BlockKernels, r: f64, ceiling: f64) -> Result<Vec<(usize, f64, f64)>> {
    let fs = diagonalize(small, r)?;
    let fl = diagonalize(large, r)?;
    let ns = small.len();
    let overlaps = fl.vectors.rows(0, ns).transpose() * &fs.vectors;
    let mut out = Vec::new();
    for (c, &e_small) in fs.values.iter().enumerate() {
        if e_small >= ceiling {
            continue;
        }
        let col = overlaps.column(c);
        let j = col.iamax();
        let e_large = fl.values[j];
        let spacing = fl
            .values
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, e)| (e - e_large).abs())
            .fold(f64::INFINITY, f64::min);
        let d = (e_small - e_large).abs();
        out.push((c, d, if spacing > 0.0 { d / spacing } else { f64::INFINITY }));
    }
    Ok(out)
}

fn compare(small: &BlockKernels, large: &BlockKernels, r_grid: &[f64], ceiling: f64) -> Result<Vec<CurveShift>> {
    let mut rotor: Vec<(f64, u32)> = small.rotor.iter().zip(&small.block.states).map(|(e, s)| (*e, s.n)).collect();
    rotor.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<CurveShift> = rotor
        .iter()
        .enumerate()
        .map(|(c, &(_, n))| CurveShift {
            p: c + 1,
            n_asymptotic: n,
            max_shift: 0.0,
            max_relative_shift: 0.0,
            r_at_max_relative: f64::NAN,
            points: 0,
        })
        .collect();
    let radii: Vec<f64> = r_grid.iter().copied().filter(|&r| r >= CONVERGENCE_MIN_R).collect();
    let rows: Vec<Vec<(usize, f64, f64)>> =
        radii.par_iter().map(|&r| compare_at(small, large, r, ceiling)).collect::<Result<_>>()?;
    for (&r, row) in radii.iter().zip(&rows) {
        for &(c, d, rel) in row {
            let shift = &mut out[c];
            shift.points += 1;
            shift.max_shift = shift.max_shift.max(d);
            if rel > shift.max_relative_shift || shift.r_at_max_relative.is_nan() {
                shift.max_relative_shift = shift.max_relative_shift.max(rel);
                shift.r_at_max_relative = r;
            }
        }
    }
    out.retain(|s| s.points > 0);
    Ok(out)
}

/// Diagonalizes the block at `N_max = N*+2, N*+4, N*+6` and reports, per
/// curve and per step, the largest energy change below `B N*(N*+1)` for
/// `R ≥ 45` bohr, relative to the nearest level of the larger basis.
/// Curves are numbered by energy rank in the smaller basis; at each `R` the
/// partner in the larger basis is the eigenvector of maximum overlap.
pub fn convergence_study(
    symmetry: Symmetry,
    parity: Parity,
    r_grid: &[f64],
    n_star: u32,
    species: &SpeciesData,
    integrals: &DispersionIntegrals,
) -> Result<ConvergenceReport> {
    for &r in r_grid {
        check_distance(r)?;
    }
    let n_maxes = [n_star + 2, n_star + 4, n_star + 6];
    let kernels: Vec<BlockKernels> =
        n_maxes.iter().map(|&nm| BlockKernels::for_block(symmetry, parity, nm, species, integrals)).collect();
    let ceiling = species.dimer.b_rot * (n_star * (n_star + 1)) as f64;
    let steps = (0..2)
        .map(|i| {
            Ok(ConvergenceStep {
                n_max_from: n_maxes[i],
                n_max_to: n_maxes[i + 1],
                curves: compare(&kernels[i], &kernels[i + 1], r_grid, ceiling)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceReport { symmetry, parity, n_star, ceiling, r_min_reported: CONVERGENCE_MIN_R, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{build_block_with_phase, Reflection};
    use crate::quadrature::default_quadrature;

    fn setup() -> (SpeciesData, DispersionIntegrals) {
        let s = SpeciesData::bundled_minimal();
        let rule = default_quadrature(s.atom.smallest_excitation()).unwrap();
        let ints = DispersionIntegrals::new(&s, &rule).unwrap();
        (s, ints)
    }

    fn union(a: &SymmetryBlock, b: &SymmetryBlock) -> SymmetryBlock {
        let mut u = a.clone();
        u.states.extend(b.states.iter().cloned());
        u
    }

    fn max_cross(k: &BlockKernels, split: usize) -> f64 {
        let w = assemble_w(k, 60.0).unwrap() - DMatrix::from_diagonal(&k.rotor);
        let mut m: f64 = 0.0;
        for i in 0..split {
            for j in split..k.len() {
                m = m.max(w[(i, j)].abs());
            }
        }
        m
    }

    #[test]
    fn blocks_do_not_couple() {
        let (s, ints) = setup();
        let syms = Symmetry::standard();
        for (ia, a) in syms.iter().enumerate() {
            for b in &syms[ia..] {
                for (pa, pb) in [(Parity::Even, Parity::Odd), (Parity::Even, Parity::Even), (Parity::Odd, Parity::Odd)] {
                    if a == b && pa == pb {
                        continue;
                    }
                    let ba = build_block(*a, pa, 7, 1);
                    let bb = build_block(*b, pb, 7, 1);
                    let k = BlockKernels::new(union(&ba, &bb), &s, &ints);
                    assert!(max_cross(&k, ba.len()) <= 1e-13, "{a} {pa:?} / {b} {pb:?}");
                }
            }
        }
    }

    #[test]
    fn alternative_reflection_phase_mixes_sigma_blocks() {
        let (s, ints) = setup();
        let alt = |st: &BasisState| if st.m % 2 == 0 { 1.0 } else { -1.0 };
        let plus = build_block_with_phase(Symmetry::SIGMA_PLUS, Parity::Even, 6, 1, alt);
        let minus = build_block_with_phase(Symmetry::SIGMA_MINUS, Parity::Even, 6, 1, alt);
        let k = BlockKernels::new(union(&plus, &minus), &s, &ints);
        assert!(max_cross(&k, plus.len()) > 1e-10);
        assert_eq!(Symmetry::SIGMA_PLUS.reflection, Some(Reflection::Plus));
    }

    #[test]
    fn assembled_matrix_is_symmetric() {
        let (s, ints) = setup();
        let k = BlockKernels::for_block(Symmetry::PI, Parity::Even, 10, &s, &ints);
        assert!(k.asymmetry() < 1e-12 * k.k6.amax().max(k.k5.amax()));
        let w = assemble_w(&k, 55.0).unwrap();
        assert_eq!(w, w.transpose());
        assert!(matches!(assemble_w(&k, 0.0), Err(Error::NonPositiveDistance(_))));
        assert!(assemble_w(&k, -3.0).is_err());
    }

    #[test]
    fn far_away_levels_are_rotor_levels() {
        let (s, ints) = setup();
        let k = BlockKernels::for_block(Symmetry::SIGMA_PLUS, Parity::Even, 8, &s, &ints);
        let w = assemble_w(&k, 1e6).unwrap();
        let mut e: Vec<f64> = SymmetricEigen::new(w).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let mut rotor: Vec<f64> = k.rotor.iter().copied().collect();
        rotor.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&rotor) {
            assert!((a - b).abs() <= 1e-10 * k.b_rot);
        }
    }

    #[test]
    fn two_radii_separate_the_power_laws() {
        let (s, ints) = setup();
        let k = BlockKernels::for_block(Symmetry::PI, Parity::Odd, 7, &s, &ints);
        let rot = DMatrix::from_diagonal(&k.rotor);
        let (r1, r2) = (50.0_f64, 100.0_f64);
        let a = (assemble_w(&k, r1).unwrap() - &rot) * r1.powi(5);
        let b = (assemble_w(&k, r2).unwrap() - &rot) * r2.powi(5);
        // a = K5 + K6/r1, b = K5 + K6/r2
        let k6 = (&a - &b) / (1.0 / r1 - 1.0 / r2);
        let k5 = &a - &k6 / r1;
        assert!((k5 - &k.k5).amax() <= 1e-8 * k.k5.amax());
        assert!((k6 - &k.k6).amax() <= 1e-8 * k.k6.amax());
    }

    #[test]
    fn single_state_curve_is_the_diagonal() {
        let (s, ints) = setup();
        let k = BlockKernels::for_block("h".parse().unwrap(), Parity::Even, 5, &s, &ints);
        assert_eq!(k.len(), 1);
        let grid = log_grid(40.0, 500.0, 50).unwrap();
        let sweep = eigensweep(&k, &grid).unwrap();
        for (r, row) in sweep.r_grid.iter().zip(&sweep.energies) {
            assert_eq!(row[0], assemble_w(&k, *r).unwrap()[(0, 0)]);
        }
    }

    #[test]
    fn sweep_labels_and_tracking() {
        let (s, ints) = setup();
        let k = BlockKernels::for_block(Symmetry::SIGMA_PLUS, Parity::Even, 12, &s, &ints);
        let grid = log_grid(40.0, 2500.0, 200).unwrap();
        let sweep = eigensweep(&k, &grid).unwrap();
        assert!(sweep.min_overlap >= 0.5);
        assert!(sweep.asymptotic_deviation(k.b_rot) < 1e-4);
        assert!(sweep.r_grid.windows(2).all(|w| w[0] > w[1]));
        let ns: Vec<u32> = sweep.labels.iter().map(|l| l.n_asymptotic).collect();
        assert_eq!(ns, vec![0, 2, 2, 4, 4, 6, 6, 8, 8, 10, 10, 12, 12]);
        for (k5, e) in sweep.energies.iter().zip(&sweep.vectors) {
            assert_eq!(k5.len(), e.ncols());
        }
    }

    #[test]
    fn bad_grids_are_rejected() {
        let (s, ints) = setup();
        let k = BlockKernels::for_block(Symmetry::PI, Parity::Even, 4, &s, &ints);
        assert!(eigensweep(&k, &[]).is_err());
        assert!(eigensweep(&k, &[50.0, 60.0]).is_err());
        assert!(eigensweep(&k, &[50.0, -1.0]).is_err());
        assert!(log_grid(50.0, 40.0, 10).is_err());
    }

    #[test]
    fn convergence_report_skips_the_overlap_region() {
        let (s, ints) = setup();
        let grid = log_grid(30.0, 400.0, 60).unwrap();
        let rep = convergence_study(Symmetry::SIGMA_PLUS, Parity::Even, &grid, 2, &s, &ints).unwrap();
        assert_eq!(rep.steps.iter().map(|st| (st.n_max_from, st.n_max_to)).collect::<Vec<_>>(), vec![(4, 6), (6, 8)]);
        assert_eq!(rep.ceiling, s.dimer.b_rot * 6.0);
        let reported = grid.iter().filter(|&&r| r >= CONVERGENCE_MIN_R).count();
        for step in &rep.steps {
            assert!(!step.curves.is_empty());
            for c in &step.curves {
                assert!(c.r_at_max_relative >= CONVERGENCE_MIN_R);
                assert!(c.points <= reported);
                assert!(c.max_relative_shift.is_finite());
            }
        }
        // the N = 0 curve exists at every radius and stays below B·2·3
        assert_eq!(rep.steps[0].curves[0].points, reported);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(40.0, 500.0, 400).unwrap();
        assert_eq!((g[0], g[399], g.len()), (500.0, 40.0, 400));
    }
}
