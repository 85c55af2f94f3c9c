//! Scenario runners behind the command-line tool: single solves, form
//! finding, refinement studies and pressure sweeps.
//!
//! Runners take an optional output directory. Without one nothing is
//! written and the results are only returned.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::assembly::{
    clamp_boundary, displacement_norms, load_conservative, symmetry_constraints, Discretization, Loads,
};
use crate::config::{read_nodal_forces, Constraint, MeshSource, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::form_finding::{discrete_area, form_find_with, FormFindOptions, FormFindState, StopCriterion};
use crate::material::{build_material, Material};
use crate::mesh::io::{write_off, write_vtk, NodalField};
use crate::mesh::SurfaceMesh;
use crate::oracles::{catenoid_reference, fit_order, ConvergenceFit};
use crate::solver::{max_displacement, SolveReport, Solver, SolverConfig};

/// Normal surface load of the cylinder scenario, in Pa at axial position `z`.
pub fn cylinder_load(z: f64) -> f64 {
    4000.0 * z * (4.0 - z)
}

pub fn discretize(config: &ScenarioConfig) -> Result<Discretization> {
    Discretization::new(config.mesh.build()?, config.displacement_degree)
}

pub fn build_loads(config: &ScenarioConfig, disc: &Discretization) -> Result<Loads> {
    let mut dead = None;
    if config.load.axial_parabola {
        dead = Some(load_conservative(disc, |x| cylinder_load(x.z)));
    }
    if let Some(path) = &config.load.nodal_forces {
        let forces = read_nodal_forces(path, disc.mesh().num_nodes())?;
        let lumped = disc.dofs().gather(disc.mesh(), &forces);
        let flat = dead.get_or_insert_with(|| vec![0.0; disc.num_dofs()]);
        for (s, f) in lumped.iter().enumerate() {
            for a in 0..3 {
                flat[3 * s + a] += f[a];
            }
        }
    }
    Ok(Loads {
        dead,
        pressure: config.load.pressure,
    })
}

pub fn constraint_mask(config: &ScenarioConfig, disc: &Discretization) -> Result<Vec<bool>> {
    match config.constraint {
        Constraint::Clamp => {
            if !disc.mesh().has_boundary() {
                return Err(Error::Config(
                    "boundary.constraint = clamp needs a mesh with a boundary; use symmetry for closed surfaces".into(),
                ));
            }
            Ok(clamp_boundary(disc))
        }
        Constraint::Symmetry => symmetry_constraints(disc),
        Constraint::None => Ok(vec![false; disc.num_dofs()]),
    }
}

/// Result of one static solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub disc: Discretization,
    pub u: Vec<f64>,
    pub report: SolveReport,
    /// `L2` norms of the normal and tangential displacement (m^2).
    pub normal_norm: f64,
    pub tangential_norm: f64,
}

impl SolveOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dofs: {}", self.disc.num_dofs());
        let _ = writeln!(s, "newton iterations: {}", self.report.steps.iter().map(|st| st.iterations()).sum::<usize>());
        let _ = writeln!(s, "max displacement [m]: {:.10e}", max_displacement(&self.u));
        let _ = writeln!(s, "normal displacement L2 norm [m^2]: {:.10e}", self.normal_norm);
        let _ = writeln!(s, "tangential displacement L2 norm [m^2]: {:.10e}", self.tangential_norm);
        s
    }
}

fn material_of(config: &ScenarioConfig) -> Result<Box<dyn Material>> {
    let (kind, params) = config.material;
    build_material(kind, params).map_err(|e| match e {
        Error::SingularLame => Error::Config(e.to_string()),
        other => other,
    })
}

/// Solves on an already discretized mesh.
pub fn solve_on(config: &ScenarioConfig, disc: Discretization) -> Result<SolveOutcome> {
    let material = material_of(config)?;
    let loads = build_loads(config, &disc)?;
    let mask = constraint_mask(config, &disc)?;
    let zero = vec![0.0; disc.num_dofs()];
    let (u, report) = Solver::new(&disc, material.as_ref(), config.solver)?.solve(&loads, &mask, &zero)?;
    let (normal_norm, tangential_norm) = displacement_norms(&disc, &u);
    Ok(SolveOutcome {
        disc,
        u,
        report,
        normal_norm,
        tangential_norm,
    })
}

/// One full solve. Writes `displacement.vtk`, `report.csv`, `report.txt`
/// and `summary.txt` into `out`. A failed Newton run still leaves its
/// residual history in `report.csv`.
pub fn run_solve(config: &ScenarioConfig, out: Option<&Path>) -> Result<SolveOutcome> {
    if config.scenario.is_form_finding() {
        return Err(Error::Config(format!("scenario {} is not a solve scenario", config.scenario.name())));
    }
    let disc = discretize(config)?;
    let result = solve_on(config, disc);
    let Some(dir) = out else { return result };
    fs::create_dir_all(dir)?;
    match result {
        Ok(outcome) => {
            let field = outcome.disc.nodal_field(&outcome.u);
            write_vtk(outcome.disc.mesh(), &[NodalField::Vector("displacement", &field)], dir.join("displacement.vtk"))?;
            fs::write(dir.join("report.csv"), outcome.report.to_csv())?;
            fs::write(dir.join("report.txt"), outcome.report.to_text())?;
            fs::write(dir.join("summary.txt"), outcome.summary())?;
            Ok(outcome)
        }
        Err(e) => {
            if let Error::NonConvergence { report, .. } = &e {
                fs::write(dir.join("report.csv"), report.to_csv())?;
                fs::write(dir.join("report.txt"), report.to_text())?;
            }
            Err(e)
        }
    }
}

fn formfind_options(
    config: &ScenarioConfig,
    mesh: &SurfaceMesh,
    relative_tol: f64,
    criterion: StopCriterion,
) -> FormFindOptions {
    FormFindOptions {
        movement_tol: Some(relative_tol * mesh.bounding_diagonal()),
        criterion,
        max_outer: config.form_finding.max_outer,
        displacement_degree: config.displacement_degree,
    }
}

/// Form finding from the configured mesh. Writes `formfind.csv`,
/// `final.vtk`, `final.off` and optional `iter_NNNN.vtk` snapshots.
pub fn run_formfind(config: &ScenarioConfig, out: Option<&Path>) -> Result<FormFindState> {
    if !config.scenario.is_form_finding() {
        return Err(Error::Config(format!("scenario {} is not a form-finding scenario", config.scenario.name())));
    }
    let mesh = config.mesh.build()?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let opts = formfind_options(config, &mesh, config.form_finding.movement_tol, config.form_finding.criterion);
    let every = config.form_finding.snapshot_every;
    let result = form_find_with(&mesh, &opts, |k, m| match out {
        Some(dir) if every > 0 && k % every == 0 => write_vtk(m, &[], dir.join(format!("iter_{k:04}.vtk"))),
        _ => Ok(()),
    });
    let Some(dir) = out else { return result.map(|(_, s)| s) };
    let state = match &result {
        Ok((_, s)) => s,
        Err(Error::FormFinding { state, .. }) => state.as_ref(),
        Err(_) => return result.map(|(_, s)| s),
    };
    fs::write(dir.join("formfind.csv"), state.to_csv())?;
    write_vtk(&state.mesh, &[], dir.join("final.vtk"))?;
    write_off(&state.mesh, dir.join("final.off"))?;
    if config.scenario == Scenario::FormfindCatenoid {
        if let MeshSource::Cylinder { radius, height, .. } = config.mesh {
            let exact = catenoid_reference(radius, 0.5 * height)?;
            let area = state.areas.last().copied().unwrap_or(f64::NAN);
            let text = format!(
                "catenoid parameter a [m]: {:.15e}\nexact area [m^2]: {:.15e}\ndiscrete area [m^2]: {:.15e}\narea error [m^2]: {:.6e}\n",
                exact.a,
                exact.area,
                area,
                (area - exact.area).abs()
            );
            fs::write(dir.join("summary.txt"), text)?;
        }
    }
    result.map(|(_, s)| s)
}

/// One refinement level of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub level: usize,
    /// Mesh size (m).
    pub h: f64,
    pub dofs: usize,
    /// Raw quantities of interest, one per value column.
    pub values: Vec<f64>,
    /// Errors against the reference, one per error column.
    pub errors: Vec<f64>,
    /// Newton or fixed-point iterations.
    pub iterations: usize,
    pub stop: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub scenario: Scenario,
    /// Value column headers with units.
    pub value_columns: Vec<String>,
    /// Error column headers with units.
    pub error_columns: Vec<String>,
    pub reference: Vec<f64>,
    pub reference_source: String,
    pub rows: Vec<LevelRow>,
    /// One fit per error column, once three or more levels exist.
    pub fits: Vec<ConvergenceFit>,
    /// Mesh sequence and settings, one line each.
    pub metadata: Vec<String>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h_m,dof");
        for c in self.value_columns.iter().chain(&self.error_columns) {
            s.push(',');
            s.push_str(c);
        }
        s.push_str(",iterations,stop\n");
        for r in &self.rows {
            let _ = write!(s, "{},{:.10e},{}", r.level, r.h, r.dofs);
            for v in r.values.iter().chain(&r.errors) {
                let _ = write!(s, ",{v:.10e}");
            }
            let _ = writeln!(s, ",{},{}", r.iterations, r.stop);
        }
        s
    }

    pub fn metadata_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario.name());
        for line in &self.metadata {
            let _ = writeln!(s, "{line}");
        }
        let _ = writeln!(s, "reference: {}", self.reference_source);
        for (c, v) in self.value_columns.iter().zip(&self.reference) {
            let _ = writeln!(s, "reference {c}: {v:.15e}");
        }
        for (c, f) in self.error_columns.iter().zip(&self.fits) {
            let _ = writeln!(
                s,
                "fitted order {c}: {:.4} (finest {} levels, r^2 {:.6}{})",
                f.order,
                f.fitted_levels,
                f.r_squared,
                if f.non_monotone { ", errors not monotone" } else { "" }
            );
        }
        s
    }

    fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join("convergence.csv"), self.to_csv())?;
        fs::write(dir.join("convergence_meta.txt"), self.metadata_text())?;
        Ok(())
    }

    fn fit(&mut self) -> Result<()> {
        if self.rows.len() < 3 {
            return Ok(());
        }
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        self.fits = (0..self.error_columns.len())
            .map(|c| fit_order(&h, &self.rows.iter().map(|r| r.errors[c]).collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        Ok(())
    }
}

/// Runs the scenario on `levels` uniform refinements of its generated mesh
/// and fits the convergence order of each error column.
///
/// Form finding measures `|A_h - A_ref|`, with the exact catenoid area for
/// the catenoid scenario and an overkill run otherwise. Solves measure
/// `| |u|_L2 - |u_h|_L2 |` separately for the normal and tangential
/// displacement, against the finest level refined
/// `study.overkill_refinements` more times.
///
/// After each level the table so far is written to `out`. A failing level
/// aborts with [`Error::Study`] carrying the completed rows.
pub fn run_convergence_study(config: &ScenarioConfig, levels: usize, out: Option<&Path>) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::Config("a convergence study needs at least 3 levels".into()));
    }
    if config.mesh.mesh_size().is_none() {
        return Err(Error::Config("convergence studies need a generated mesh".into()));
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let finest = config.mesh.refined(levels - 1)?;
    let overkill_source = finest.refined(config.study.overkill_refinements)?;
    let form = config.scenario.is_form_finding();
    let mut table = ConvergenceTable {
        scenario: config.scenario,
        value_columns: if form {
            vec!["area_m2".into()]
        } else {
            vec!["normal_norm_m2".into(), "tangential_norm_m2".into()]
        },
        error_columns: if form {
            vec!["area_error_m2".into()]
        } else {
            vec!["normal_error_m2".into(), "tangential_error_m2".into()]
        },
        reference: Vec::new(),
        reference_source: String::new(),
        rows: Vec::new(),
        fits: Vec::new(),
        metadata: vec![
            format!("displacement degree: {}", config.displacement_degree),
            format!("refinement: uniform, mesh size halved per level, {levels} levels"),
        ],
    };
    for l in 0..levels {
        table.metadata.push(format!("level {l}: {:?}", config.mesh.refined(l)?));
    }
    if form {
        table.metadata.push(format!(
            "movement tolerance: {:e} x bounding-box diagonal on the {} movement, at most {} iterations",
            config.study.movement_tol,
            match config.study.criterion {
                StopCriterion::Total => "total",
                StopCriterion::Normal => "normal",
            },
            config.form_finding.max_outer
        ));
    }

    let catenoid = match (config.scenario, &config.mesh) {
        (Scenario::FormfindCatenoid, MeshSource::Cylinder { radius, height, .. }) => {
            Some(catenoid_reference(*radius, 0.5 * height)?)
        }
        _ => None,
    };
    let run_level = |source: &MeshSource| -> Result<(usize, Vec<f64>, usize, String)> {
        if form {
            let mesh = source.build()?;
            let dofs = crate::assembly::DofMap::new(&mesh, 3 * config.displacement_degree).num_slots();
            let opts = formfind_options(config, &mesh, config.study.movement_tol, config.study.criterion);
            let (_, state) = form_find_with(&mesh, &opts, |_, _| Ok(()))?;
            let area = discrete_area(&state.mesh)?;
            Ok((3 * dofs, vec![area], state.iterations, "converged".into()))
        } else {
            let mut cfg = config.clone();
            cfg.mesh = source.clone();
            let o = solve_on(&cfg, Discretization::new(source.build()?, cfg.displacement_degree)?)?;
            let its = o.report.steps.iter().map(|s| s.iterations()).sum();
            Ok((o.disc.num_dofs(), vec![o.normal_norm, o.tangential_norm], its, o.report.rate.name().into()))
        }
    };

    if let Some(c) = &catenoid {
        table.reference = vec![c.area];
        table.reference_source = format!("exact catenoid, a = {:.15e} m", c.a);
    } else {
        let (dofs, values, _, _) = run_level(&overkill_source).map_err(|e| Error::Study {
            level: levels + config.study.overkill_refinements - 1,
            source: Box::new(e),
            partial: Box::new(table.clone()),
        })?;
        table.reference = values;
        table.reference_source = format!("overkill run with {dofs} dofs on {overkill_source:?}");
    }

    for l in 0..levels {
        let source = config.mesh.refined(l)?;
        let (dofs, values, iterations, stop) = match run_level(&source) {
            Ok(v) => v,
            Err(e) => {
                if let Some(dir) = out {
                    table.write(dir)?;
                }
                return Err(Error::Study {
                    level: l,
                    source: Box::new(e),
                    partial: Box::new(table),
                });
            }
        };
        let errors = values.iter().zip(&table.reference).map(|(v, r)| (v - r).abs()).collect();
        table.rows.push(LevelRow {
            level: l,
            h: source.mesh_size().expect("generated mesh"),
            dofs,
            values,
            errors,
            iterations,
            stop,
        });
        if let Some(dir) = out {
            table.write(dir)?;
        }
    }
    table.fit()?;
    if let Some(dir) = out {
        table.write(dir)?;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Pa.
    pub pressure: f64,
    /// Largest distance from the z-axis (m).
    pub max_radius: f64,
    /// Largest `|z|` (m).
    pub min_radius: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Set when Newton failed; the rows stop at the last converged pressure.
    pub failure: Option<String>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,pressure_Pa,max_radius_m,min_radius_m,newton_iterations\n");
        for (k, r) in self.rows.iter().enumerate() {
            let _ = writeln!(s, "{k},{},{:.15e},{:.15e},{}", r.pressure, r.max_radius, r.min_radius, r.iterations);
        }
        s
    }
}

fn radii(points: &[Vector3<f64>]) -> (f64, f64) {
    points.iter().fold((0.0_f64, 0.0_f64), |(r, z), p| {
        (r.max((p.x * p.x + p.y * p.y).sqrt()), z.max(p.z.abs()))
    })
}

/// Pressures visited by a sweep: the uniform grid plus the snapshot
/// pressures, ascending, starting at zero.
pub fn sweep_pressures(config: &ScenarioConfig) -> Vec<f64> {
    let l = &config.load;
    let mut p: Vec<f64> = (0..=l.sweep_steps).map(|k| l.p_max * k as f64 / l.sweep_steps as f64).collect();
    p.extend(l.snapshot_pressures.iter().copied().filter(|&s| s > 0.0 && s <= l.p_max));
    p.sort_by(f64::total_cmp);
    p.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * l.p_max.abs().max(1.0));
    p
}

/// Inflates a closed surface from zero to `load.p_max`, recording the
/// extreme radii at every pressure. Each pressure starts Newton from the
/// previous solution. Writes `radii.csv` and `sweep_<p>Pa.vtk` at the
/// snapshot pressures.
pub fn run_pressure_sweep(config: &ScenarioConfig, out: Option<&Path>) -> Result<SweepTable> {
    if config.scenario.is_form_finding() {
        return Err(Error::Config("pressure sweeps need a solve scenario".into()));
    }
    let disc = discretize(config)?;
    let material = material_of(config)?;
    let mask = constraint_mask(config, &disc)?;
    let solver_config = SolverConfig {
        load_steps: 1,
        ..config.solver
    };
    let mut solver = Solver::new(&disc, material.as_ref(), solver_config)?;
    let mut loads = build_loads(config, &disc)?;
    let dead = loads.dead.clone();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let reference: Vec<Vector3<f64>> = disc.mesh().nodes().to_vec();
    let mut u = vec![0.0; disc.num_dofs()];
    let mut table = SweepTable {
        rows: Vec::new(),
        failure: None,
    };
    for p in sweep_pressures(config) {
        let iterations = if p == 0.0 && dead.is_none() {
            0
        } else {
            loads.pressure = p;
            match solver.solve(&loads, &mask, &u) {
                Ok((next, report)) => {
                    u = next;
                    report.steps.iter().map(|s| s.iterations()).sum()
                }
                Err(e) => {
                    table.failure = Some(format!("at {p} Pa: {e}"));
                    break;
                }
            }
        };
        let field = disc.nodal_field(&u);
        let deformed: Vec<Vector3<f64>> = reference.iter().zip(&field).map(|(x, d)| x + d).collect();
        let (max_radius, min_radius) = radii(&deformed);
        table.rows.push(SweepRow {
            pressure: p,
            max_radius,
            min_radius,
            iterations,
        });
        if let Some(dir) = out {
            if config.load.snapshot_pressures.iter().any(|&s| (s - p).abs() <= 1e-9 * p.abs().max(1.0)) {
                write_vtk(
                    disc.mesh(),
                    &[NodalField::Vector("displacement", &field)],
                    dir.join(format!("sweep_{p}Pa.vtk")),
                )?;
            }
        }
    }
    if let Some(dir) = out {
        let mut csv = table.to_csv();
        if let Some(f) = &table.failure {
            let _ = writeln!(csv, "# stopped: {f}");
        }
        fs::write(dir.join("radii.csv"), csv)?;
    }
    Ok(table)
}
