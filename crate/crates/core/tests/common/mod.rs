//! Test-only oracles: exact Clebsch-Gordan coefficients and a brute-force
//! trapezoidal evaluation of the dispersion integrals.
#![allow(dead_code)]

use std::f64::consts::PI;

use longrange::operators::{DispersionIntegrals, TargetIntegrals};
use longrange::quadrature::default_quadrature;
use longrange::species::{PolarizabilityKind, SpeciesData};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn species() -> SpeciesData {
    SpeciesData::bundled_minimal()
}

pub fn integrals(s: &SpeciesData) -> DispersionIntegrals {
    DispersionIntegrals::new(s, &default_quadrature(s.atom.smallest_excitation()).unwrap()).unwrap()
}

fn fact(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Racah's closed form in exact rational arithmetic. Returns
/// `(sign · sum, radicand)` with `C = sum · sqrt(radicand)`.
pub fn cg_exact(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> (BigRational, BigRational) {
    let zero = (BigRational::zero(), BigRational::one());
    if m != m1 + m2 || j < (j1 - j2).abs() || j > j1 + j2 || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return zero;
    }
    let radicand = ratio(
        BigInt::from(2 * j + 1) * fact(j1 + j2 - j) * fact(j1 - j2 + j) * fact(j2 - j1 + j),
        fact(j1 + j2 + j + 1),
    ) * ratio(
        fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2) * fact(j + m) * fact(j - m),
        BigInt::one(),
    );
    let mut sum = BigRational::zero();
    for k in 0..=(j1 + j2 + j) {
        let args = [k, j1 + j2 - j - k, j1 - m1 - k, j2 + m2 - k, j - j2 + m1 + k, j - j1 - m2 + k];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let den = args.iter().fold(BigInt::one(), |a, &x| a * fact(x));
        let term = ratio(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    (sum, radicand)
}

pub fn cg_exact_f64(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    let (sum, radicand) = cg_exact(j1, m1, j2, m2, j, m);
    if sum.is_zero() {
        return 0.0;
    }
    // square, reduce exactly, then take one rounded square root
    let sq = &sum * &sum * &radicand;
    let v = sq.to_f64().unwrap().sqrt();
    if sum.is_negative() { -v } else { v }
}

/// `∫₀^∞ f(ω) dω` by the trapezoid rule on `t ∈ [0, 1)`,
/// `ω = s t / (1 − t)`, with `points` nodes. The integrand must decay at
/// least like `ω⁻²`.
pub fn trapezoid_half_line(points: usize, s: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / (points - 1) as f64;
    let mut acc = 0.0;
    for k in 0..points - 1 {
        let t = k as f64 * h;
        let omega = s * t / (1.0 - t);
        let jac = s / ((1.0 - t) * (1.0 - t));
        let w = if k == 0 { 0.5 } else { 1.0 };
        acc += w * f(omega) * jac;
    }
    // the t = 1 end contributes zero for integrands decaying like ω⁻²
    acc * h
}

fn pole_imag(poles: &[(f64, f64)], omega: f64) -> f64 {
    poles.iter().map(|&(de, mu)| 2.0 * de * mu * mu / (de * de + omega * omega)).sum()
}

fn pole_real(poles: &[(f64, f64)], z: f64) -> f64 {
    poles.iter().map(|&(de, mu)| 2.0 * de * mu * mu / (de * de - z * z)).sum()
}

/// Dispersion integrals recomputed from the raw channel list with a
/// `points`-node trapezoid rule.
pub fn trapezoid_integrals(s: &SpeciesData, points: usize) -> DispersionIntegrals {
    let dimer = |kind| -> Vec<(f64, f64)> { s.dimer.channels(kind).iter().map(|c| (c.delta_e, c.dipole)).collect() };
    let par = dimer(PolarizabilityKind::Parallel);
    let perp = dimer(PolarizabilityKind::Perpendicular);
    let l = s.atom.l as i64;
    let scale = s.atom.smallest_excitation();

    let mut valence: Vec<TargetIntegrals> = Vec::new();
    for c in &s.atom.channels {
        let lp = c.target_l.unwrap();
        let mu = c.dipole * cg_exact_f64(l, 0, 1, 0, lp as i64, 0) / 3f64.sqrt();
        let atom = [(c.delta_e, mu)];
        let mut ip = 2.0 / PI * trapezoid_half_line(points, scale, |w| pole_imag(&par, w) * pole_imag(&atom, w));
        let mut it = 2.0 / PI * trapezoid_half_line(points, scale, |w| pole_imag(&perp, w) * pole_imag(&atom, w));
        if c.delta_e < 0.0 {
            ip += 4.0 * pole_real(&par, c.delta_e) * mu * mu;
            it += 4.0 * pole_real(&perp, c.delta_e) * mu * mu;
        }
        match valence.iter_mut().find(|t| t.target_l == lp) {
            Some(t) => {
                t.parallel += ip;
                t.perpendicular += it;
            }
            None => valence.push(TargetIntegrals { target_l: lp, parallel: ip, perpendicular: it }),
        }
    }
    valence.sort_by_key(|t| t.target_l);
    let core: Vec<(f64, f64)> = s.atom.core_channels.iter().map(|c| (c.delta_e, c.dipole)).collect();
    let core_scale = core.iter().map(|c| c.0).fold(scale, f64::max);
    let core_parallel = trapezoid_half_line(points, core_scale, |w| pole_imag(&par, w) * pole_imag(&core, w));
    let core_perpendicular = trapezoid_half_line(points, core_scale, |w| pole_imag(&perp, w) * pole_imag(&core, w));
    DispersionIntegrals { valence, core_parallel, core_perpendicular }
}

/// Normalized associated Legendre function `Θ_lm(x)` (Condon-Shortley
/// phase), with `∫ Θ_lm² dx = 1` on `[-1, 1]`.
pub fn theta_lm(l: i32, m: i32, x: f64) -> f64 {
    let am = m.abs();
    if am > l {
        return 0.0;
    }
    // P_m^m, then upward in l
    let s = (1.0 - x * x).sqrt();
    let mut pmm = 1.0;
    for k in 1..=am {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    let mut p = pmm;
    if l > am {
        let mut prev = pmm;
        p = x * (2 * am + 1) as f64 * pmm;
        for ll in am + 2..=l {
            let next = (x * (2 * ll - 1) as f64 * p - (ll + am - 1) as f64 * prev) / (ll - am) as f64;
            prev = p;
            p = next;
        }
    }
    let ratio: f64 = ((l - am + 1)..=(l + am)).map(|k| k as f64).product();
    let v = ((2 * l + 1) as f64 / 2.0 / ratio).sqrt() * p;
    if m < 0 && am % 2 == 1 { -v } else { v }
}

/// `⟨l1 m1| C^k_q |l2 m2⟩` by direct integration over the sphere.
pub fn gaunt_numeric(l1: i32, m1: i32, k: i32, q: i32, l2: i32, m2: i32) -> f64 {
    if m1 != m2 + q {
        return 0.0;
    }
    let rule = gauss_quad::legendre::GaussLegendre::new(std::num::NonZeroUsize::new(64).unwrap());
    let integral: f64 = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| w * theta_lm(l1, m1, x) * theta_lm(k, q, x) * theta_lm(l2, m2, x))
        .sum();
    (4.0 * PI / (2 * k + 1) as f64).sqrt() * integral / (2.0 * PI).sqrt()
}

/// `K5(s1, s2)` assembled from sphere integrals:
/// `−24 q ⟨r²⟩ Σ_M ⟨N1m1|C_2M|N2m2⟩ ⟨ℓλ1|C_2,−M|ℓλ2⟩ / ((2+M)!(2−M)!)`.
pub fn k5_oracle(s1: &longrange::BasisState, s2: &longrange::BasisState, q20: f64, r2: f64, l: i32) -> f64 {
    let mut acc = 0.0;
    for big_m in -2i32..=2 {
        let w = 1.0 / ((1..=2 + big_m).product::<i32>() * (1..=2 - big_m).product::<i32>()) as f64;
        acc += w
            * gaunt_numeric(s1.n as i32, s1.m, 2, big_m, s2.n as i32, s2.m)
            * gaunt_numeric(l, s1.lambda, 2, -big_m, l, s2.lambda);
    }
    -24.0 * q20 * r2 * acc
}
