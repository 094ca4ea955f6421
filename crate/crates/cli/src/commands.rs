//! The four subcommands. Blocks are computed in parallel; files are written
//! afterwards in a fixed order so the output does not depend on scheduling.

use std::fmt::Write as _;

use longrange::crossings::{coupling_trace, crossing_events, validity_radius, CrossingEvent, Passage};
use longrange::curves::{convergence_study, eigensweep, log_grid, ConvergenceReport, CurveSweep};
use longrange::diabatic::DiabaticBasis;
use longrange::quadrature::QuadratureRule;
use longrange::units::hartree_to_cm1;
use longrange::{build_diabatic, BlockKernels, DispersionIntegrals, Parity, SpeciesData, Symmetry};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, MAX_NMAX};
use crate::output::{energy_csv, num, OutDir};
use crate::CliError;

pub struct Context {
    pub config: RunConfig,
    pub species: SpeciesData,
    pub integrals: DispersionIntegrals,
}

impl Context {
    pub fn load(config: RunConfig) -> Result<Self, CliError> {
        let species = match &config.species {
            Some(path) => SpeciesData::load(path).map_err(|e| CliError::Usage(format!("species file: {e}")))?,
            None => SpeciesData::bundled_minimal(),
        };
        let rule = QuadratureRule::new(config.quad_nodes, species.atom.smallest_excitation())?;
        let integrals = DispersionIntegrals::new(&species, &rule)?;
        Ok(Self { config, species, integrals })
    }

    fn kernels(&self, n_max: u32) -> Vec<BlockKernels> {
        self.config
            .block_keys()
            .par_iter()
            .map(|&(sym, parity)| BlockKernels::for_block(sym, parity, n_max, &self.species, &self.integrals))
            .collect::<Vec<_>>()
            .into_iter()
            .filter(|k| !k.is_empty())
            .collect()
    }

    fn grid(&self) -> Result<Vec<f64>, CliError> {
        Ok(log_grid(self.config.r_min, self.config.r_max, self.config.points)?)
    }
}

#[derive(Serialize)]
struct CurveLabelOut {
    p: usize,
    name: String,
    symmetry: String,
    parity: &'static str,
    n_asymptotic: u32,
}

#[derive(Serialize)]
struct DiabaticOut {
    p: usize,
    label: String,
    n: u32,
    c5_hartree_bohr5: f64,
    c6_hartree_bohr6: f64,
    c5_cm1_bohr5: f64,
    c6_cm1_bohr6: f64,
}

#[derive(Serialize)]
struct CurveSidecar {
    block: String,
    symmetry: String,
    parity: &'static str,
    n_max: u32,
    b_rot_hartree: f64,
    b_rot_cm1: f64,
    grid_points: usize,
    min_tracking_overlap: f64,
    curves: Vec<CurveLabelOut>,
    diabatic: Vec<DiabaticOut>,
}

fn diabatic_table(d: &DiabaticBasis) -> Vec<DiabaticOut> {
    d.states
        .iter()
        .map(|s| DiabaticOut {
            p: s.p,
            label: s.label(),
            n: s.n,
            c5_hartree_bohr5: s.c5,
            c6_hartree_bohr6: s.c6,
            c5_cm1_bohr5: hartree_to_cm1(s.c5),
            c6_cm1_bohr6: hartree_to_cm1(s.c6),
        })
        .collect()
}

pub fn cmd_curves(ctx: &Context) -> Result<OutDir, CliError> {
    let grid = ctx.grid()?;
    let results: Vec<(BlockKernels, CurveSweep, DiabaticBasis)> = ctx
        .kernels(ctx.config.n_max)
        .into_par_iter()
        .map(|k| {
            let sweep = eigensweep(&k, &grid)?;
            let d = build_diabatic(&k);
            Ok((k, sweep, d))
        })
        .collect::<Result<_, longrange::Error>>()?;

    let mut out = OutDir::create(&ctx.config.out)?;
    for (k, sweep, d) in &results {
        let slug = k.block.slug();
        out.write(&format!("curves_{slug}.csv"), &energy_csv("E", &sweep.r_grid, &sweep.energies))?;
        let diag: Vec<Vec<f64>> =
            sweep.r_grid.iter().map(|&r| (0..d.len()).map(|i| d.diagonal(i, r)).collect()).collect();
        out.write(&format!("diabatic_{slug}.csv"), &energy_csv("D", &sweep.r_grid, &diag))?;
        let sidecar = CurveSidecar {
            block: k.block.label(),
            symmetry: k.block.symmetry.to_string(),
            parity: k.block.parity.name(),
            n_max: k.block.n_max,
            b_rot_hartree: k.b_rot,
            b_rot_cm1: hartree_to_cm1(k.b_rot),
            grid_points: sweep.r_grid.len(),
            min_tracking_overlap: sweep.min_overlap,
            curves: sweep
                .labels
                .iter()
                .map(|l| CurveLabelOut {
                    p: l.p,
                    name: l.name(),
                    symmetry: l.symmetry.to_string(),
                    parity: l.parity.name(),
                    n_asymptotic: l.n_asymptotic,
                })
                .collect(),
            diabatic: diabatic_table(d),
        };
        out.write_json(&format!("curves_{slug}.json"), &sidecar)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct PassageOut {
    entrance: usize,
    velocity_au: f64,
    gamma: f64,
    probability: f64,
}

#[derive(Serialize)]
struct CrossingOut {
    block: String,
    p: usize,
    r: usize,
    label_p: String,
    label_r: String,
    r0_au: f64,
    w_pr_hartree: f64,
    w_pr_cm1: f64,
    slope_diff_hartree_per_bohr: f64,
    energy_hartree: f64,
    energy_cm1: f64,
    temperature_k: f64,
    upper: Option<PassageOut>,
    lower: Option<PassageOut>,
}

fn passage_out(p: &Option<Passage>) -> Option<PassageOut> {
    p.as_ref().map(|p| PassageOut { entrance: p.entrance, velocity_au: p.velocity, gamma: p.gamma, probability: p.probability })
}

fn passage_row(s: &mut String, p: &Option<Passage>, fallback_entrance: usize) {
    match p {
        Some(p) => {
            let _ = writeln!(s, "{:>12}{:>14.3e}{:>12.2}", p.entrance, p.velocity, 100.0 * p.probability);
        }
        None => {
            let _ = writeln!(s, "{fallback_entrance:>12}{:>14}{:>12}", "forbidden", "-");
        }
    }
}

fn crossing_table(blocks: &[(String, &DiabaticBasis, Vec<CrossingEvent>)], temperature: f64) -> String {
    let mut s = format!("# Landau-Zener crossings, T = {temperature} K\n");
    for (label, d, events) in blocks {
        let _ = writeln!(s, "\n## {label}");
        if events.is_empty() {
            s.push_str("(no crossings)\n");
            continue;
        }
        let _ = writeln!(
            s,
            "{:<40}{:>10}{:>14}{:>12}{:>14}{:>12}",
            "crossing", "R0 (a.u.)", "W_pr (cm-1)", "entrance p", "v_p (a.u.)", "P_pr (%)"
        );
        for e in events {
            let (upper_p, lower_p) = upper_lower(d, e);
            let _ = write!(
                s,
                "{:<40}{:>10.2}{:>14.3e}",
                format!("{} / {}", e.label_p, e.label_r),
                e.r0,
                hartree_to_cm1(e.w_pr)
            );
            passage_row(&mut s, &e.lower, lower_p);
            s.push_str(&" ".repeat(64));
            passage_row(&mut s, &e.upper, upper_p);
        }
    }
    s
}

/// Labels of the (upper, lower) entrance channels of a crossing.
fn upper_lower(d: &DiabaticBasis, e: &CrossingEvent) -> (usize, usize) {
    let (a, b) = (&d.states[e.p - 1], &d.states[e.r - 1]);
    if b.n > a.n || (b.n == a.n && e.r > e.p) { (e.r, e.p) } else { (e.p, e.r) }
}

pub fn cmd_crossings(ctx: &Context) -> Result<OutDir, CliError> {
    let c = &ctx.config;
    let results: Vec<(BlockKernels, DiabaticBasis, Vec<CrossingEvent>)> = ctx
        .kernels(c.n_max)
        .into_par_iter()
        .map(|k| {
            let d = build_diabatic(&k);
            let events = crossing_events(&d, c.r_min, c.r_max, c.temperature, &ctx.species)?;
            Ok((k, d, events))
        })
        .collect::<Result<_, longrange::Error>>()?;

    let mut json = Vec::new();
    for (k, _, events) in &results {
        for e in events {
            json.push(CrossingOut {
                block: k.block.slug(),
                p: e.p,
                r: e.r,
                label_p: e.label_p.clone(),
                label_r: e.label_r.clone(),
                r0_au: e.r0,
                w_pr_hartree: e.w_pr,
                w_pr_cm1: hartree_to_cm1(e.w_pr),
                slope_diff_hartree_per_bohr: e.slope_diff,
                energy_hartree: e.energy,
                energy_cm1: hartree_to_cm1(e.energy),
                temperature_k: e.temperature,
                upper: passage_out(&e.upper),
                lower: passage_out(&e.lower),
            });
        }
    }
    let table_input: Vec<(String, &DiabaticBasis, Vec<CrossingEvent>)> =
        results.iter().map(|(k, d, e)| (k.block.label(), d, e.clone())).collect();
    let mut out = OutDir::create(&c.out)?;
    out.write_json("crossings.json", &json)?;
    out.write("crossings.txt", &crossing_table(&table_input, c.temperature))?;
    Ok(out)
}

fn wbar_csv(d: &DiabaticBasis, i: usize, grid: &[f64]) -> String {
    let mut s = String::from("R_au");
    for j in (0..d.len()).filter(|&j| j != i) {
        let _ = write!(s, ",wbar_{}_{}", i + 1, j + 1);
    }
    s.push('\n');
    for (r, row) in grid.iter().zip(coupling_trace(d, i, grid)) {
        s.push_str(&num(*r));
        for (j, v) in row.iter().enumerate() {
            if j == i {
                continue;
            }
            s.push(',');
            s.push_str(&if v.indeterminate { num(f64::NAN) } else { num(v.value) });
        }
        s.push('\n');
    }
    s
}

pub fn cmd_validity(ctx: &Context) -> Result<OutDir, CliError> {
    let c = &ctx.config;
    let grid = log_grid(c.r_min, c.r_max.max(500.0), c.points)?;
    type Row = (String, String, Vec<longrange::crossings::ValidityReport>, DiabaticBasis);
    let results: Vec<Row> = ctx
        .kernels(c.n_max)
        .into_par_iter()
        .map(|k| {
            let d = build_diabatic(&k);
            let reports = (0..d.len()).map(|i| validity_radius(&d, i, c.epsilon, &grid)).collect::<Result<_, _>>()?;
            Ok((k.block.slug(), k.block.label(), reports, d))
        })
        .collect::<Result<_, longrange::Error>>()?;

    let mut out = OutDir::create(&c.out)?;
    let mut table = String::from("state,label,epsilon,R_star_au,resonances,never_met\n");
    for (slug, _, reports, d) in &results {
        for (i, rep) in reports.iter().enumerate() {
            out.write(&format!("wbar_{slug}_p{}.csv", rep.p), &wbar_csv(d, i, &grid))?;
            let res: Vec<String> = rep.resonances.iter().map(|r| format!("{r:.3}")).collect();
            let _ = writeln!(
                table,
                "{slug}:{},{} {},{},{},{},{}",
                rep.p,
                rep.label,
                d.parity.name(),
                num(rep.epsilon),
                num(rep.r_star),
                res.join(";"),
                rep.never_met
            );
        }
    }
    out.write("validity.csv", &table)?;
    Ok(out)
}

pub fn cmd_converge(ctx: &Context, n_star: u32) -> Result<OutDir, CliError> {
    let c = &ctx.config;
    if n_star + 6 > MAX_NMAX {
        return Err(CliError::Usage(format!("N* + 6 = {} exceeds the basis limit of {MAX_NMAX}", n_star + 6)));
    }
    let grid = ctx.grid()?;
    let keys: Vec<(Symmetry, Parity)> = c
        .block_keys()
        .into_iter()
        .filter(|&(s, p)| !longrange::build_block(s, p, n_star + 6, ctx.species.atom.l).is_empty())
        .collect();
    let reports: Vec<ConvergenceReport> = keys
        .par_iter()
        .map(|&(s, p)| convergence_study(s, p, &grid, n_star, &ctx.species, &ctx.integrals))
        .collect::<Result<_, _>>()?;

    let mut text = format!(
        "# N_max convergence, N* = {n_star}, ceiling B N*(N*+1) = {} cm-1, R >= {} a.u.\n",
        num(hartree_to_cm1(ctx.species.dimer.b_rot * (n_star * (n_star + 1)) as f64)),
        longrange::curves::CONVERGENCE_MIN_R
    );
    let _ = writeln!(text, "{:<16}{:>10}{:>18}{:>22}", "block", "N_max", "max shift (cm-1)", "max shift / spacing");
    for r in &reports {
        for st in &r.steps {
            let _ = writeln!(
                text,
                "{:<16}{:>10}{:>18.3e}{:>22.3e}",
                format!("{} {}", r.symmetry, r.parity.name()),
                format!("{}->{}", st.n_max_from, st.n_max_to),
                hartree_to_cm1(st.max_shift()),
                st.max_relative_shift()
            );
        }
    }
    let mut out = OutDir::create(&c.out)?;
    out.write_json(&format!("convergence_nstar{n_star}.json"), &reports)?;
    out.write(&format!("convergence_nstar{n_star}.txt"), &text)?;
    Ok(out)
}
