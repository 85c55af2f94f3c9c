//! Scenario configuration files.
//!
//! The format is TOML: `key = value` lines grouped under `[section]`
//! headers. Unknown keys are rejected. Everything a named scenario needs has
//! a default, so `scenario = "solve-cylinder-load"` alone is a valid file.
//!
//! ```toml
//! scenario = "solve-spheroid-pressure"
//!
//! [material]
//! model = "mooney-rivlin"
//! E = 100e6
//! nu = 0.5
//! thickness = 0.001
//!
//! [load]
//! pressure = 1000.0
//! steps = 10
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::form_finding::StopCriterion;
use crate::material::{MaterialParams, ModelKind};
use crate::mesh::io::read_off;
use crate::mesh::{generate_cylinder, generate_disk, generate_spheroid, SurfaceMesh};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    FormfindCatenoid,
    SolveCylinderLoad,
    SolveSpheroidPressure,
    SolveCustom,
    FormfindCustom,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::FormfindCatenoid,
        Scenario::SolveCylinderLoad,
        Scenario::SolveSpheroidPressure,
        Scenario::SolveCustom,
        Scenario::FormfindCustom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::FormfindCatenoid => "formfind-catenoid",
            Scenario::SolveCylinderLoad => "solve-cylinder-load",
            Scenario::SolveSpheroidPressure => "solve-spheroid-pressure",
            Scenario::SolveCustom => "solve-custom",
            Scenario::FormfindCustom => "formfind-custom",
        }
    }

    pub fn is_form_finding(&self) -> bool {
        matches!(self, Scenario::FormfindCatenoid | Scenario::FormfindCustom)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: String,
    #[serde(default)]
    mesh: RawMesh,
    #[serde(default)]
    material: RawMaterial,
    #[serde(default)]
    load: RawLoad,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    form_finding: RawFormFinding,
    #[serde(default)]
    study: RawStudy,
    #[serde(default)]
    boundary: RawBoundary,
    #[serde(default)]
    discretization: RawDiscretization,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    kind: Option<String>,
    path: Option<PathBuf>,
    radius: Option<f64>,
    height: Option<f64>,
    axial: Option<usize>,
    circumferential: Option<usize>,
    r_max: Option<f64>,
    r_min: Option<f64>,
    refinement: Option<usize>,
    order: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    model: Option<String>,
    #[serde(rename = "E")]
    youngs_modulus: Option<f64>,
    nu: Option<f64>,
    thickness: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoad {
    pressure: Option<f64>,
    steps: Option<usize>,
    p_max: Option<f64>,
    sweep_steps: Option<usize>,
    snapshot_pressures: Option<Vec<f64>>,
    nodal_forces: Option<PathBuf>,
    load_stiffness: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    rel_tol: Option<f64>,
    abs_tol_factor: Option<f64>,
    max_newton: Option<usize>,
    line_search: Option<bool>,
    ps_tol: Option<f64>,
    ps_max_iters: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormFinding {
    movement_tol: Option<f64>,
    criterion: Option<String>,
    max_outer: Option<usize>,
    snapshot_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    levels: Option<usize>,
    overkill_refinements: Option<usize>,
    movement_tol: Option<f64>,
    criterion: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    constraint: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    displacement_degree: Option<usize>,
}

/// Where the mesh comes from. Generated meshes are refinable.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Cylinder {
        radius: f64,
        height: f64,
        axial: usize,
        circumferential: usize,
        order: usize,
    },
    Spheroid {
        r_max: f64,
        r_min: f64,
        refinement: usize,
        order: usize,
    },
    Disk {
        radius: f64,
        refinement: usize,
        order: usize,
    },
    File(PathBuf),
}

impl MeshSource {
    pub fn build(&self) -> Result<SurfaceMesh> {
        match self {
            MeshSource::Cylinder {
                radius,
                height,
                axial,
                circumferential,
                order,
            } => generate_cylinder(*radius, *height, *axial, *circumferential, *order),
            MeshSource::Spheroid {
                r_max,
                r_min,
                refinement,
                order,
            } => generate_spheroid(*r_max, *r_min, *refinement, *order),
            MeshSource::Disk {
                radius,
                refinement,
                order,
            } => generate_disk(*radius, *refinement, *order),
            MeshSource::File(path) => read_off(path),
        }
    }

    /// The same source with mesh size divided by `2^times`.
    pub fn refined(&self, times: usize) -> Result<MeshSource> {
        let f = 1usize << times;
        Ok(match self {
            MeshSource::Cylinder {
                radius,
                height,
                axial,
                circumferential,
                order,
            } => MeshSource::Cylinder {
                radius: *radius,
                height: *height,
                axial: axial * f,
                circumferential: circumferential * f,
                order: *order,
            },
            MeshSource::Spheroid {
                r_max,
                r_min,
                refinement,
                order,
            } => MeshSource::Spheroid {
                r_max: *r_max,
                r_min: *r_min,
                refinement: refinement + times,
                order: *order,
            },
            MeshSource::Disk {
                radius,
                refinement,
                order,
            } => MeshSource::Disk {
                radius: *radius,
                refinement: refinement + times,
                order: *order,
            },
            MeshSource::File(_) => {
                return Err(Error::Config("mesh files cannot be refined; use a generated mesh".into()))
            }
        })
    }

    /// Characteristic element size in meters.
    pub fn mesh_size(&self) -> Option<f64> {
        match self {
            MeshSource::Cylinder { height, axial, .. } => Some(height / *axial as f64),
            MeshSource::Spheroid { r_max, refinement, .. } => {
                Some(std::f64::consts::FRAC_PI_2 * r_max / (1usize << refinement) as f64)
            }
            MeshSource::Disk { radius, refinement, .. } => Some(radius / (1usize << refinement) as f64),
            MeshSource::File(_) => None,
        }
    }
}

/// How rigid-body modes are removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// All boundary nodes fixed.
    Clamp,
    /// Pole and equator conditions for closed surfaces symmetric about the
    /// coordinate planes.
    Symmetry,
    None,
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(Constraint::Clamp),
            "symmetry" => Ok(Constraint::Symmetry),
            "none" => Ok(Constraint::None),
            other => Err(Error::Config(format!(
                "unknown boundary constraint '{other}' (expected clamp, symmetry or none)"
            ))),
        }
    }
}

/// Load specification.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadConfig {
    /// Follower pressure in Pa.
    pub pressure: f64,
    /// Pressure load steps.
    pub steps: usize,
    /// Final pressure of a sweep in Pa.
    pub p_max: f64,
    pub sweep_steps: usize,
    /// Pressures at which sweep snapshots are written.
    pub snapshot_pressures: Vec<f64>,
    /// Apply the 4000 z (4 - z) normal load of the cylinder scenario.
    pub axial_parabola: bool,
    /// One force vector per mesh node.
    pub nodal_forces: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormFindConfig {
    /// Movement tolerance relative to the bounding-box diagonal.
    pub movement_tol: f64,
    pub criterion: StopCriterion,
    pub max_outer: usize,
    /// Write a VTK snapshot every this many iterations (0 = never).
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub levels: usize,
    /// Extra uniform refinements of the finest level for the reference run.
    pub overkill_refinements: usize,
    /// Form-finding movement tolerance used inside studies, relative to the
    /// bounding-box diagonal.
    pub movement_tol: f64,
    pub criterion: StopCriterion,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub mesh: MeshSource,
    pub material: (ModelKind, MaterialParams),
    pub load: LoadConfig,
    pub solver: SolverConfig,
    pub form_finding: FormFindConfig,
    pub study: StudyConfig,
    pub constraint: Constraint,
    pub displacement_degree: usize,
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Defaults of a named scenario.
    pub fn named(scenario: Scenario) -> Result<Self> {
        Self::from_raw(RawFile {
            scenario: scenario.name().to_string(),
            ..Default::default()
        })
    }

    fn from_raw(raw: RawFile) -> Result<Self> {
        let scenario: Scenario = raw.scenario.parse()?;
        let m = &raw.mesh;
        let custom = matches!(scenario, Scenario::SolveCustom | Scenario::FormfindCustom);

        let (def_model, def_e, def_nu, def_t) = match scenario {
            Scenario::SolveSpheroidPressure => ("mooney-rivlin", Some(100e6), Some(0.5), Some(0.001)),
            Scenario::SolveCylinderLoad | Scenario::FormfindCatenoid => {
                ("mooney-rivlin", Some(10e6), Some(0.5), Some(0.01))
            }
            _ => ("mooney-rivlin", None, None, None),
        };
        let model: ModelKind = raw.material.model.as_deref().unwrap_or(def_model).parse()?;
        let require = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Config(format!("scenario {} requires material.{key}", scenario.name())))
        };
        let (e, nu, t) = if scenario.is_form_finding() {
            (
                raw.material.youngs_modulus.or(def_e).unwrap_or(1.0),
                raw.material.nu.or(def_nu).unwrap_or(0.0),
                raw.material.thickness.or(def_t).unwrap_or(1.0),
            )
        } else {
            (
                require(raw.material.youngs_modulus.or(def_e), "E")?,
                require(raw.material.nu.or(def_nu), "nu")?,
                require(raw.material.thickness.or(def_t), "thickness")?,
            )
        };
        let params = MaterialParams::new(e, nu, t).map_err(|e| Error::Config(e.to_string()))?;
        if model == ModelKind::Hooke && nu >= 0.5 {
            return Err(Error::Config(
                "model = hooke requires nu < 0.5: the Hooke tensor has no finite Lame parameter at nu = 0.5".into(),
            ));
        }

        let default_kind = match scenario {
            Scenario::FormfindCatenoid | Scenario::SolveCylinderLoad => "cylinder",
            Scenario::SolveSpheroidPressure => "spheroid",
            _ => "off",
        };
        let kind = m.kind.as_deref().unwrap_or(default_kind);
        let order = m.order.unwrap_or(2);
        let mesh = match kind {
            "cylinder" => {
                let (r, h, ax, circ) = match scenario {
                    Scenario::FormfindCatenoid => (0.5, 0.6, 4, 16),
                    _ => (0.5, 4.0, 8, 8),
                };
                MeshSource::Cylinder {
                    radius: m.radius.unwrap_or(r),
                    height: m.height.unwrap_or(h),
                    axial: m.axial.unwrap_or(ax),
                    circumferential: m.circumferential.unwrap_or(circ),
                    order,
                }
            }
            "spheroid" => MeshSource::Spheroid {
                r_max: m.r_max.unwrap_or(1.0),
                r_min: m.r_min.unwrap_or(0.5),
                refinement: m.refinement.unwrap_or(3),
                order,
            },
            "disk" => MeshSource::Disk {
                radius: m.radius.unwrap_or(1.0),
                refinement: m.refinement.unwrap_or(2),
                order,
            },
            "off" => MeshSource::File(m.path.clone().ok_or_else(|| {
                Error::Config(format!("scenario {} requires mesh.path", scenario.name()))
            })?),
            other => return Err(Error::Config(format!("unknown mesh kind '{other}'"))),
        };
        if custom && m.path.is_none() && m.kind.is_none() {
            return Err(Error::Config(format!("scenario {} requires mesh.path or mesh.kind", scenario.name())));
        }

        let l = &raw.load;
        if l.load_stiffness == Some(true) {
            return Err(Error::Config(
                "load.load_stiffness = true is reserved; the pressure load tangent is not implemented".into(),
            ));
        }
        let pressure_default = if scenario == Scenario::SolveSpheroidPressure { 1000.0 } else { 0.0 };
        let load = LoadConfig {
            pressure: l.pressure.unwrap_or(pressure_default),
            steps: l.steps.unwrap_or(if scenario == Scenario::SolveSpheroidPressure { 10 } else { 1 }),
            p_max: l.p_max.unwrap_or(4800.0),
            sweep_steps: l.sweep_steps.unwrap_or(24),
            snapshot_pressures: l.snapshot_pressures.clone().unwrap_or_else(|| vec![1000.0, 3000.0, 4800.0]),
            axial_parabola: scenario == Scenario::SolveCylinderLoad,
            nodal_forces: l.nodal_forces.clone(),
        };
        if load.steps == 0 || load.sweep_steps == 0 {
            return Err(Error::Config("load.steps and load.sweep_steps must be at least 1".into()));
        }
        if !load.pressure.is_finite() || !load.p_max.is_finite() {
            return Err(Error::Config("pressures must be finite".into()));
        }

        let s = &raw.solver;
        let mut solver = SolverConfig {
            load_steps: load.steps,
            ..Default::default()
        };
        if let Some(v) = s.rel_tol {
            solver.rel_tol = v;
        }
        if let Some(v) = s.abs_tol_factor {
            solver.abs_tol_factor = v;
        }
        if let Some(v) = s.max_newton {
            solver.max_newton = v;
        }
        if let Some(v) = s.line_search {
            solver.line_search = v;
        }
        if let Some(v) = s.ps_tol {
            solver.plane_stress.rel_tol = v;
        }
        if let Some(v) = s.ps_max_iters {
            solver.plane_stress.max_iters = v;
        }
        solver.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(solver.plane_stress.rel_tol > 0.0) {
            return Err(Error::Config("solver.ps_tol must be positive".into()));
        }

        let f = &raw.form_finding;
        let catenoid = scenario == Scenario::FormfindCatenoid;
        let form_finding = FormFindConfig {
            // the catenoid's tangential drift decays too slowly for 1e-10
            // the catenoid's tangential node drift decays too slowly for the
            // 1e-10 total-movement default, so it stops on the settled shape
            movement_tol: f.movement_tol.unwrap_or(if catenoid { 1e-6 } else { 1e-10 }),
            criterion: criterion(
                f.criterion.as_deref(),
                if catenoid { StopCriterion::Normal } else { StopCriterion::Total },
            )?,
            max_outer: f.max_outer.unwrap_or(500),
            snapshot_every: f.snapshot_every.unwrap_or(0),
        };
        if !(form_finding.movement_tol > 0.0) || form_finding.max_outer == 0 {
            return Err(Error::Config("form_finding.movement_tol and max_outer must be positive".into()));
        }

        let st = &raw.study;
        let study = StudyConfig {
            levels: st.levels.unwrap_or(4),
            overkill_refinements: st.overkill_refinements.unwrap_or(2),
            movement_tol: st.movement_tol.unwrap_or(1e-6),
            criterion: criterion(st.criterion.as_deref(), StopCriterion::Normal)?,
        };
        if study.levels < 3 {
            return Err(Error::Config("study.levels must be at least 3".into()));
        }

        let constraint = match &raw.boundary.constraint {
            Some(c) => c.parse()?,
            None if scenario == Scenario::SolveSpheroidPressure => Constraint::Symmetry,
            None => Constraint::Clamp,
        };
        let displacement_degree = raw.discretization.displacement_degree.unwrap_or(1);
        if !(1..=2).contains(&displacement_degree) {
            return Err(Error::Config("discretization.displacement_degree must be 1 or 2".into()));
        }
        if displacement_degree == 2 && order == 1 && kind != "off" {
            return Err(Error::Config("quadratic displacements need mesh.order = 2".into()));
        }

        Ok(Self {
            scenario,
            mesh,
            material: (model, params),
            load,
            solver,
            form_finding,
            study,
            constraint,
            displacement_degree,
        })
    }
}

fn criterion(s: Option<&str>, default: StopCriterion) -> Result<StopCriterion> {
    match s {
        None => Ok(default),
        Some("total") => Ok(StopCriterion::Total),
        Some("normal") => Ok(StopCriterion::Normal),
        Some(other) => Err(Error::Config(format!("unknown criterion '{other}' (expected total or normal)"))),
    }
}

/// Reads one force vector per line (`fx fy fz`), `#` comments allowed.
pub fn read_nodal_forces(path: &Path, nodes: usize) -> Result<Vec<nalgebra::Vector3<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::with_capacity(nodes);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("bad force vector '{line}'"),
            })?;
        if v.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected three force components".into(),
            });
        }
        out.push(nalgebra::Vector3::new(v[0], v[1], v[2]));
    }
    if out.len() != nodes {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("expected {nodes} force vectors, found {}", out.len()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_named_scenario() {
        let c = ScenarioConfig::parse("scenario = \"solve-cylinder-load\"").unwrap();
        assert_eq!(c.scenario, Scenario::SolveCylinderLoad);
        assert_eq!(c.material.1.youngs_modulus, 10e6);
        assert!(c.load.axial_parabola);
        assert_eq!(c.constraint, Constraint::Clamp);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = ScenarioConfig::parse("scenario = \"solve-cylinder-load\"\n[material]\nyoung = 3.0\n").unwrap_err();
        assert!(matches!(e, Error::Config(m) if m.contains("young")));
        assert!(ScenarioConfig::parse("scenario = \"nope\"").is_err());
    }

    #[test]
    fn hooke_incompressible_rejected() {
        let text = "scenario = \"solve-cylinder-load\"\n[material]\nmodel = \"hooke\"\nnu = 0.5\n";
        match ScenarioConfig::parse(text) {
            Err(Error::Config(m)) => assert!(m.contains("nu < 0.5")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_requires_mesh_and_material() {
        let e = ScenarioConfig::parse("scenario = \"solve-custom\"\n[mesh]\npath = \"a.off\"\n").unwrap_err();
        assert!(matches!(e, Error::Config(m) if m.contains("material.E")));
        assert!(ScenarioConfig::parse("scenario = \"solve-custom\"\n[material]\nE = 1.0\nnu = 0.3\nthickness = 1.0\n").is_err());
    }

    #[test]
    fn spheroid_defaults() {
        let c = ScenarioConfig::named(Scenario::SolveSpheroidPressure).unwrap();
        assert_eq!(c.load.pressure, 1000.0);
        assert_eq!(c.solver.load_steps, 10);
        assert_eq!(c.constraint, Constraint::Symmetry);
        assert_eq!(c.material.1.thickness, 0.001);
    }

    #[test]
    fn refinement_doubles_divisions() {
        let c = ScenarioConfig::named(Scenario::FormfindCatenoid).unwrap();
        match c.mesh.refined(2).unwrap() {
            MeshSource::Cylinder { axial, circumferential, .. } => assert_eq!((axial, circumferential), (16, 64)),
            other => panic!("{other:?}"),
        }
    }
}
