//! Global Newton iteration with load stepping.

use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::assembly::{assemble, Discretization, ElementContext, GlobalSystem, Loads};
use crate::error::{Error, Result};
use crate::linear::{norm, SymmetricSolver};
use crate::plane_stress::PlaneStressOptions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Tolerance on `|r| / |f_ext|` over the free DOFs.
    pub rel_tol: f64,
    /// Absolute tolerance as a multiple of `E t`, used when `f_ext = 0`.
    pub abs_tol_factor: f64,
    pub max_newton: usize,
    pub load_steps: usize,
    pub plane_stress: PlaneStressOptions,
    /// Backtracking on the residual norm (halving, at most 8 times).
    pub line_search: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol_factor: 1e-10,
            max_newton: 50,
            load_steps: 1,
            plane_stress: PlaneStressOptions::default(),
            line_search: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol_factor > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        if self.load_steps == 0 || self.max_newton == 0 {
            return Err(Error::Parameter("load_steps and max_newton must be at least 1".into()));
        }
        Ok(())
    }
}

/// Observed asymptotic contraction of the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceRate {
    Quadratic,
    Superlinear,
    Linear,
    /// Too few iterations to tell.
    Undetermined,
}

impl ConvergenceRate {
    /// Classifies from the estimated order `log(r_k / r_k-1) / log(r_k-1 / r_k-2)`
    /// over the last three residuals.
    pub fn classify(residuals: &[f64]) -> Self {
        let n = residuals.len();
        if n < 3 || residuals[n - 3..].iter().any(|&r| !(r > 0.0)) {
            return Self::Undetermined;
        }
        let (a, b, c) = (residuals[n - 3], residuals[n - 2], residuals[n - 1]);
        if b >= a {
            return Self::Undetermined;
        }
        let order = (c / b).ln() / (b / a).ln();
        if order > 1.6 {
            Self::Quadratic
        } else if order > 1.2 {
            Self::Superlinear
        } else {
            Self::Linear
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::Superlinear => "superlinear",
            Self::Linear => "linear",
            Self::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub load_factor: f64,
    /// Free-DOF residual norm at each iterate, starting with the initial one.
    pub residuals: Vec<f64>,
    /// Residual relative to the external load.
    pub relative: Vec<f64>,
    /// Stored strain energy at each iterate.
    pub energies: Vec<f64>,
    pub converged: bool,
}

impl StepReport {
    /// Newton updates performed.
    pub fn iterations(&self) -> usize {
        self.residuals.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub steps: Vec<StepReport>,
    pub final_energy: f64,
    pub converged: bool,
    pub rate: ConvergenceRate,
}

impl SolveReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,load_factor,iteration,residual_N,relative_residual,energy_J\n");
        for (k, st) in self.steps.iter().enumerate() {
            for (i, (r, rel)) in st.residuals.iter().zip(&st.relative).enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{:.6e},{:.6e},{:.10e}",
                    k + 1,
                    st.load_factor,
                    i,
                    r,
                    rel,
                    st.energies[i]
                );
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>5} {:>8} {:>5} {:>14} {:>14}", "step", "load", "iter", "residual [N]", "relative");
        for (k, st) in self.steps.iter().enumerate() {
            for (i, (r, rel)) in st.residuals.iter().zip(&st.relative).enumerate() {
                let _ = writeln!(s, "{:>5} {:>8.4} {:>5} {:>14.6e} {:>14.6e}", k + 1, st.load_factor, i, r, rel);
            }
        }
        let _ = writeln!(s, "converged: {}", self.converged);
        let _ = writeln!(s, "final strain energy [J]: {:.10e}", self.final_energy);
        let _ = writeln!(s, "asymptotic rate: {}", self.rate.name());
        s
    }

    /// Residual history of the last load step.
    pub fn last_residuals(&self) -> &[f64] {
        self.steps.last().map_or(&[], |s| s.residuals.as_slice())
    }
}

fn free_norm(r: &[f64], mask: &[bool]) -> f64 {
    r.iter()
        .zip(mask)
        .filter(|(_, &m)| !m)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Newton driver holding the warm-start directors and the cached symbolic
/// factorization between solves.
#[derive(Debug)]
pub struct Solver<'a> {
    disc: &'a Discretization,
    ctx: ElementContext<'a>,
    config: SolverConfig,
    directors: Vec<Vector3<f64>>,
    linear: SymmetricSolver,
}

impl<'a> Solver<'a> {
    pub fn new(disc: &'a Discretization, material: &'a dyn crate::material::Material, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let mut ctx = ElementContext::new(material);
        ctx.plane_stress = config.plane_stress;
        Ok(Self {
            disc,
            ctx,
            config,
            directors: vec![Vector3::zeros(); disc.mesh().num_elements() * disc.quadrature_points()],
            linear: SymmetricSolver::new(),
        })
    }

    pub fn context(&self) -> &ElementContext<'a> {
        &self.ctx
    }

    pub fn directors(&self) -> &[Vector3<f64>] {
        &self.directors
    }

    pub fn directors_mut(&mut self) -> &mut [Vector3<f64>] {
        &mut self.directors
    }

    pub fn assemble(&mut self, u: &[f64], loads: &Loads, dirichlet: &[bool]) -> Result<GlobalSystem> {
        assemble(self.disc, &self.ctx, u, loads, dirichlet, &mut self.directors)
    }

    /// Ramps `loads` linearly over `load_steps` starting from `initial_u`,
    /// whose constrained entries hold the prescribed displacements.
    pub fn solve(&mut self, loads: &Loads, dirichlet: &[bool], initial_u: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let ndof = self.disc.num_dofs();
        if initial_u.len() != ndof || dirichlet.len() != ndof {
            return Err(Error::Parameter("solve input length mismatch".into()));
        }
        let params = *self.ctx.material.params();
        let abs_tol = self.config.abs_tol_factor * params.youngs_modulus * params.thickness;
        let mut u = initial_u.to_vec();
        let mut report = SolveReport {
            steps: Vec::new(),
            final_energy: 0.0,
            converged: false,
            rate: ConvergenceRate::Undetermined,
        };
        let steps = self.config.load_steps;
        for step in 1..=steps {
            let factor = step as f64 / steps as f64;
            let scaled = Loads {
                dead: loads.dead.as_ref().map(|f| f.iter().map(|v| v * factor).collect()),
                pressure: loads.pressure * factor,
            };
            let mut st = StepReport {
                load_factor: factor,
                residuals: Vec::new(),
                relative: Vec::new(),
                energies: Vec::new(),
                converged: false,
            };
            let mut sys = self.assemble(&u, &scaled, dirichlet)?;
            loop {
                let r = free_norm(&sys.residual, dirichlet);
                let ext = free_norm(&sys.external, dirichlet);
                st.residuals.push(r);
                st.relative.push(if ext > 0.0 { r / ext } else { r / (params.youngs_modulus * params.thickness) });
                st.energies.push(sys.energy);
                report.final_energy = sys.energy;
                let done = if ext > 0.0 { r <= self.config.rel_tol * ext } else { r <= abs_tol };
                if done {
                    st.converged = true;
                    break;
                }
                if st.iterations() >= self.config.max_newton {
                    let last = st.residuals.last().copied().unwrap_or(f64::NAN);
                    let iterations = st.iterations();
                    report.steps.push(st);
                    return Err(Error::NonConvergence {
                        step,
                        iterations,
                        residual: last,
                        report: Box::new(report),
                    });
                }
                let rhs: Vec<f64> = sys.residual.iter().map(|v| -v).collect();
                let du = self.linear.solve(&sys.tangent, &rhs)?;
                if self.config.line_search {
                    let (nu, nsys) = self.backtrack(&u, &du, r, &scaled, dirichlet)?;
                    u = nu;
                    sys = nsys;
                } else {
                    u.iter_mut().zip(&du).for_each(|(a, b)| *a += b);
                    sys = self.assemble(&u, &scaled, dirichlet)?;
                }
            }
            report.steps.push(st);
        }
        report.converged = true;
        report.rate = ConvergenceRate::classify(report.last_residuals());
        Ok((u, report))
    }

    fn backtrack(
        &mut self,
        u: &[f64],
        du: &[f64],
        r0: f64,
        loads: &Loads,
        dirichlet: &[bool],
    ) -> Result<(Vec<f64>, GlobalSystem)> {
        let saved = self.directors.clone();
        let mut scale = 1.0;
        let mut last_err = None;
        for _ in 0..=8 {
            let trial: Vec<f64> = u.iter().zip(du).map(|(a, b)| a + scale * b).collect();
            match self.assemble(&trial, loads, dirichlet) {
                Ok(sys) if free_norm(&sys.residual, dirichlet) < r0 => return Ok((trial, sys)),
                Ok(sys) => last_err = Some(Ok((trial, sys))),
                Err(e) => last_err = Some(Err(e)),
            }
            self.directors.copy_from_slice(&saved);
            scale *= 0.5;
        }
        // no decrease found: take the shortest trial
        match last_err.expect("at least one trial") {
            Ok((trial, _)) => {
                let sys = self.assemble(&trial, loads, dirichlet)?;
                Ok((trial, sys))
            }
            Err(e) => Err(e),
        }
    }
}

/// One-shot solve from `initial_u`.
pub fn solve(
    disc: &Discretization,
    material: &dyn crate::material::Material,
    loads: &Loads,
    dirichlet: &[bool],
    config: &SolverConfig,
    initial_u: &[f64],
) -> Result<(Vec<f64>, SolveReport)> {
    Solver::new(disc, material, *config)?.solve(loads, dirichlet, initial_u)
}

/// Largest displacement magnitude in a flat vector.
pub fn max_displacement(u: &[f64]) -> f64 {
    u.chunks_exact(3).map(norm).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_classification() {
        assert_eq!(ConvergenceRate::classify(&[1e-1, 1e-2, 1e-4]), ConvergenceRate::Quadratic);
        assert_eq!(ConvergenceRate::classify(&[1e-1, 1e-2, 1e-3]), ConvergenceRate::Linear);
        assert_eq!(ConvergenceRate::classify(&[1e-1, 1e-2]), ConvergenceRate::Undetermined);
        assert_eq!(ConvergenceRate::classify(&[1.0, 0.0, 0.0]), ConvergenceRate::Undetermined);
    }

    #[test]
    fn invalid_config() {
        let c = SolverConfig {
            load_steps: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
