//! R-independent interaction kernels in the product basis `|N m λ⟩`.
//!
//! `⟨1|V_qq|2⟩ = K5(1,2) / R⁵` is the first-order quadrupole-quadrupole
//! coupling between the dimer's permanent quadrupole and the excited atom's
//! quadrupole. `⟨1|V_dd⁽²⁾|2⟩ = K6(1,2) / R⁶` is the second-order
//! dipole-dipole (induced-dipole) operator. Both kernels conserve
//! `m_J = m + λ` and the parity of `N`.
//!
//! In the K6 kernel the frequency integrals depend only on the dimer
//! polarizability kind and the atomic channel, so they are evaluated once in
//! [`DispersionIntegrals`] and combined with purely angular factors.

use std::f64::consts::PI;

use crate::angular::{factorial, CgTable};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::species::{Frequency, PolarizabilityKind, SpeciesData};

/// Relative change allowed when the quadrature node count is doubled.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

/// Product state of the dimer rotation `|N m⟩` and the atomic orbital
/// projection `λ` (for the fixed `ℓ` of the excited atom).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub n: u32,
    pub m: i32,
    pub lambda: i32,
}

impl BasisState {
    pub fn new(n: u32, m: i32, lambda: i32, l: u32) -> Result<Self> {
        if m.unsigned_abs() > n {
            return Err(Error::InvalidAngularMomentum(format!("|m| = {} exceeds N = {n}", m.abs())));
        }
        if lambda.unsigned_abs() > l {
            return Err(Error::InvalidAngularMomentum(format!("|λ| = {} exceeds ℓ = {l}", lambda.abs())));
        }
        Ok(Self { n, m, lambda })
    }

    pub fn m_j(&self) -> i32 {
        self.m + self.lambda
    }

    /// The reflected state `|N −m −λ⟩`.
    pub fn reflected(&self) -> Self {
        Self { n: self.n, m: -self.m, lambda: -self.lambda }
    }
}

/// Multipole prefactor `f_{L_A L_B M}`.
pub fn f_prefactor(la: u32, lb: u32, m: i32) -> f64 {
    let (la, lb, m) = (la as i64, lb as i64, m as i64);
    assert!(m.abs() <= la.min(lb), "|M| must not exceed min(L_A, L_B)");
    let sign = if lb % 2 == 0 { 1.0 } else { -1.0 };
    sign * factorial(la + lb) / (factorial(la + m) * factorial(la - m) * factorial(lb + m) * factorial(lb - m)).sqrt()
}

#[inline]
fn dipole_weight(m: i32) -> f64 {
    // 1 / ((1+M)! (1-M)!)
    if m == 0 { 1.0 } else { 0.5 }
}

#[inline]
fn quadrupole_weight(m: i32) -> f64 {
    // 1 / ((2+M)! (2-M)!)
    match m.abs() {
        0 => 0.25,
        1 => 1.0 / 6.0,
        _ => 1.0 / 24.0,
    }
}

/// Shared angular data for kernel evaluation: the CG table and `ℓ`.
#[derive(Debug, Clone)]
pub struct KernelContext {
    cg: CgTable,
    l: i32,
}

impl KernelContext {
    /// Warms up coefficients for rotational levels up to `n_max`.
    pub fn new(n_max: u32, l: u32) -> Self {
        Self { cg: CgTable::new(n_max.max(l + 1) + 2, &[1, 2]), l: l as i32 }
    }

    pub fn cg(&self) -> &CgTable {
        &self.cg
    }
}

/// Quadrupole-quadrupole kernel `K5(s1, s2)` (hartree·bohr⁵).
pub fn vqq_kernel(s1: &BasisState, s2: &BasisState, species: &SpeciesData) -> f64 {
    let ctx = KernelContext::new(s1.n.max(s2.n), species.atom.l);
    vqq_kernel_with(&ctx, s1, s2, species)
}

pub fn vqq_kernel_with(ctx: &KernelContext, s1: &BasisState, s2: &BasisState, species: &SpeciesData) -> f64 {
    if s1.m_j() != s2.m_j() || s1.n.abs_diff(s2.n) > 2 || (s1.n + s2.n) % 2 == 1 {
        return 0.0;
    }
    let cg = &ctx.cg;
    let l = ctx.l;
    let (n1, n2) = (s1.n as i32, s2.n as i32);
    // only M = m1 - m2 = λ2 - λ1 survives both projections
    let m = s1.m - s2.m;
    if m.abs() > 2 {
        return 0.0;
    }
    let reduced = cg.get(n2, 0, 2, 0, n1, 0) * cg.get(l, 0, 2, 0, l, 0);
    if reduced == 0.0 {
        return 0.0;
    }
    let norm = ((2 * n2 + 1) as f64 / (2 * n1 + 1) as f64).sqrt();
    let angular = cg.get(n2, s2.m, 2, m, n1, s1.m) * cg.get(l, s2.lambda, 2, -m, l, s1.lambda) * quadrupole_weight(m);
    -24.0 * species.dimer.q20 * species.atom.r2_expect * norm * reduced * angular
}

/// Frequency integrals entering the K6 kernel, one pair per atomic target
/// momentum `ℓ'` plus the core pair.
///
/// For each valence channel `k` with target `ℓ'`:
/// `I_∥ = (2/π) ∫ α_∥(iω) α_k(iω) dω + 4 Θ(−ΔE_k) α_∥(ΔE_k) μ_k²`
/// and likewise for `⊥`; channels sharing `ℓ'` are summed. The core pair is
/// `∫ α_∥,⊥(iω) α_c(iω) dω` without the `2/π`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionIntegrals {
    pub valence: Vec<TargetIntegrals>,
    pub core_parallel: f64,
    pub core_perpendicular: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetIntegrals {
    pub target_l: u32,
    pub parallel: f64,
    pub perpendicular: f64,
}

impl DispersionIntegrals {
    /// Evaluates the integrals with `rule` and checks them against the rule
    /// with doubled node count.
    pub fn new(species: &SpeciesData, rule: &QuadratureRule) -> Result<Self> {
        let coarse = Self::evaluate(species, rule)?;
        let fine = Self::evaluate(species, &rule.doubled())?;
        coarse.check_converged(&fine)?;
        Ok(coarse)
    }

    /// Evaluates the integrals without the convergence gate.
    pub fn evaluate(species: &SpeciesData, rule: &QuadratureRule) -> Result<Self> {
        let dimer = &species.dimer;
        let atom = &species.atom;
        let par: Vec<f64> = rule
            .nodes()
            .iter()
            .map(|&w| dimer.polarizability(PolarizabilityKind::Parallel, Frequency::Imaginary(w)))
            .collect::<Result<_>>()?;
        let perp: Vec<f64> = rule
            .nodes()
            .iter()
            .map(|&w| dimer.polarizability(PolarizabilityKind::Perpendicular, Frequency::Imaginary(w)))
            .collect::<Result<_>>()?;

        let mut valence: Vec<TargetIntegrals> = Vec::new();
        for channel in &atom.channels {
            let target_l = channel.target_l.expect("validated valence channel");
            let mu = atom.transition_dipole(channel)?;
            let mut ip = 0.0;
            let mut it = 0.0;
            for (i, (&w, &wt)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                let a = atom.channel_polarizability(channel, w)?;
                ip += wt * par[i] * a;
                it += wt * perp[i] * a;
            }
            ip *= 2.0 / PI;
            it *= 2.0 / PI;
            if channel.is_downward() {
                let z = Frequency::Real(channel.delta_e);
                ip += 4.0 * dimer.polarizability(PolarizabilityKind::Parallel, z)? * mu * mu;
                it += 4.0 * dimer.polarizability(PolarizabilityKind::Perpendicular, z)? * mu * mu;
            }
            match valence.iter_mut().find(|t| t.target_l == target_l) {
                Some(t) => {
                    t.parallel += ip;
                    t.perpendicular += it;
                }
                None => valence.push(TargetIntegrals { target_l, parallel: ip, perpendicular: it }),
            }
        }
        valence.sort_by_key(|t| t.target_l);

        let mut core_parallel = 0.0;
        let mut core_perpendicular = 0.0;
        for (i, (&w, &wt)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let ac = atom.core_polarizability(w)?;
            core_parallel += wt * par[i] * ac;
            core_perpendicular += wt * perp[i] * ac;
        }
        Ok(Self { valence, core_parallel, core_perpendicular })
    }

    fn scalars(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for t in &self.valence {
            out.push((format!("valence ℓ'={} parallel", t.target_l), t.parallel));
            out.push((format!("valence ℓ'={} perpendicular", t.target_l), t.perpendicular));
        }
        out.push(("core parallel".into(), self.core_parallel));
        out.push(("core perpendicular".into(), self.core_perpendicular));
        out
    }

    fn check_converged(&self, fine: &Self) -> Result<()> {
        for ((name, a), (_, b)) in self.scalars().into_iter().zip(fine.scalars()) {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                continue;
            }
            let rel = (a - b).abs() / scale;
            if rel >= QUADRATURE_TOLERANCE {
                return Err(Error::QuadratureNotConverged { quantity: name, relative_change: rel });
            }
        }
        Ok(())
    }

    /// Second-order dipole-dipole kernel `K6(s1, s2)` (hartree·bohr⁶).
    pub fn kernel(&self, ctx: &KernelContext, s1: &BasisState, s2: &BasisState) -> f64 {
        if s1.m_j() != s2.m_j() || s1.n.abs_diff(s2.n) > 2 || (s1.n + s2.n) % 2 == 1 {
            return 0.0;
        }
        let cg = &ctx.cg;
        let l = ctx.l;
        let (n1, n2) = (s1.n as i32, s2.n as i32);
        let (m1, m2) = (s1.m, s2.m);
        let norm12 = (((2 * n1 + 1) * (2 * n2 + 1)) as f64).sqrt();
        let np_lo = (n1 - 1).abs().max((n2 - 1).abs());
        let np_hi = (n1 + 1).min(n2 + 1);

        let mut valence = 0.0;
        let mut core = 0.0;
        for np in np_lo..=np_hi {
            let rot = norm12 / (2 * np + 1) as f64;
            let p_par = cg.get(n1, 0, 1, 0, np, 0) * cg.get(n2, 0, 1, 0, np, 0);
            let p_perp = cg.get(n1, 0, 1, 1, np, 1) * cg.get(n2, 0, 1, 1, np, 1);
            if p_par == 0.0 && p_perp == 0.0 {
                continue;
            }

            for t in &self.valence {
                let lp = t.target_l as i32;
                let radial = p_par * t.parallel + 2.0 * p_perp * t.perpendicular;
                let mut angular = 0.0;
                for big_m in -1..=1 {
                    // m' = m1 − M = m2 − M', λ' = λ1 + M = λ2 + M'
                    let big_mp = big_m + m2 - m1;
                    if big_mp.abs() > 1 {
                        continue;
                    }
                    let mp = m1 - big_m;
                    let lamp = s1.lambda + big_m;
                    if mp.abs() > np || lamp.abs() > lp {
                        continue;
                    }
                    angular += dipole_weight(big_m)
                        * dipole_weight(big_mp)
                        * cg.get(n1, m1, 1, -big_m, np, mp)
                        * cg.get(n2, m2, 1, -big_mp, np, mp)
                        * cg.get(l, s1.lambda, 1, big_m, lp, lamp)
                        * cg.get(l, s2.lambda, 1, big_mp, lp, lamp);
                }
                let atomic = (2 * l + 1) as f64 / (2 * lp + 1) as f64;
                valence += 3.0 * atomic * rot * angular * radial;
            }

            if m1 == m2 && s1.lambda == s2.lambda {
                let radial = p_par * self.core_parallel + 2.0 * p_perp * self.core_perpendicular;
                let mut angular = 0.0;
                for big_m in -1..=1 {
                    let mp = m1 + big_m;
                    if mp.abs() > np {
                        continue;
                    }
                    let w = dipole_weight(big_m);
                    angular += w * w * cg.get(n1, m1, 1, big_m, np, mp) * cg.get(n2, m2, 1, big_m, np, mp);
                }
                core += rot * angular * radial;
            }
        }
        -valence - 2.0 / PI * core
    }
}

/// Second-order dipole-dipole kernel `K6(s1, s2)` with the convergence gate
/// applied to `rule`. The intermediate rotational sum is exact (`N' = N ± 1`),
/// so no basis truncation enters.
pub fn vdd2_kernel(s1: &BasisState, s2: &BasisState, species: &SpeciesData, rule: &QuadratureRule) -> Result<f64> {
    let integrals = DispersionIntegrals::new(species, rule)?;
    let ctx = KernelContext::new(s1.n.max(s2.n) + 1, species.atom.l);
    Ok(integrals.kernel(&ctx, s1, s2))
}
