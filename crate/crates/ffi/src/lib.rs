//! C interface to `membrane-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_read`
//! style constructors and released with the matching `*_free`. Every
//! fallible call returns a [`MembraneStatus`]; on failure the message is
//! available from [`membrane_last_error`] on the same thread. Panics are
//! caught and reported as `MEMBRANE_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use membrane_core::config::{Scenario, ScenarioConfig};
use membrane_core::form_finding::discrete_area;
use membrane_core::mesh::io::{read_off, write_off};
use membrane_core::mesh::{generate_cylinder, SurfaceMesh};
use membrane_core::oracles::catenoid_reference;
use membrane_core::scenarios::{run_formfind, run_solve};
use membrane_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembraneStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad argument value, including non-UTF-8 strings and short buffers.
    InvalidArgument = 2,
    /// Configuration or material parameter error.
    Config = 3,
    /// File I/O or parse error.
    Io = 4,
    /// Failure while computing (non-convergence, singular system, ...).
    Solver = 5,
    Panic = 6,
}

/// Surface mesh.
pub struct MembraneMesh(SurfaceMesh);

/// Scenario configuration.
pub struct MembraneConfig(ScenarioConfig);

/// Outcome of a solve or form-finding run.
pub struct MembraneResult {
    mesh: SurfaceMesh,
    displacements: Vec<[f64; 3]>,
    converged: bool,
    iterations: usize,
    area: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MembraneStatus {
    match e.exit_code() {
        1 => MembraneStatus::Config,
        2 => MembraneStatus::Io,
        _ => MembraneStatus::Solver,
    }
}

struct Fail(MembraneStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MembraneStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MembraneStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            MembraneStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(MembraneStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(MembraneStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out(values: impl ExactSizeIterator<Item = f64>, buf: *mut f64, len: usize) -> Result<(), Fail> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < values.len() {
        return Err(Fail(
            MembraneStatus::InvalidArgument,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    for (k, v) in values.enumerate() {
        *buf.add(k) = v;
    }
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn membrane_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn membrane_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_read_off(path: *const c_char, out: *mut *mut MembraneMesh) -> MembraneStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        put(out, MembraneMesh(read_off(path)?))
    })
}

/// Open cylinder about the z-axis, `0 <= z <= height`, with geometry order 1
/// or 2.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_cylinder(
    radius: f64,
    height: f64,
    axial: usize,
    circumferential: usize,
    order: usize,
    out: *mut *mut MembraneMesh,
) -> MembraneStatus {
    guard(|| put(out, MembraneMesh(generate_cylinder(radius, height, axial, circumferential, order)?)))
}

/// # Safety
/// `mesh` and `path` must be valid.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_write_off(mesh: *const MembraneMesh, path: *const c_char) -> MembraneStatus {
    guard(|| {
        let mesh = deref(mesh, "mesh")?;
        write_off(&mesh.0, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Node count, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_num_nodes(mesh: *const MembraneMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.num_nodes())
}

/// Element count, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_num_elements(mesh: *const MembraneMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.num_elements())
}

/// Copies node coordinates as `x0 y0 z0 x1 ...` into `buf` (`3 * nodes`
/// values).
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_nodes(mesh: *const MembraneMesh, buf: *mut f64, len: usize) -> MembraneStatus {
    guard(|| {
        let mesh = deref(mesh, "mesh")?;
        copy_out(mesh.0.nodes().iter().flat_map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>().into_iter(), buf, len)
    })
}

/// Sum of the quadrature weights: the area of the interpolated surface.
///
/// # Safety
/// `mesh` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_area(mesh: *const MembraneMesh, out: *mut f64) -> MembraneStatus {
    guard(|| {
        let a = discrete_area(&deref(mesh, "mesh")?.0)?;
        *out.as_mut().ok_or_else(|| null("out"))? = a;
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn membrane_mesh_free(mesh: *mut MembraneMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Parses a TOML scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn membrane_config_read(path: *const c_char, out: *mut *mut MembraneConfig) -> MembraneStatus {
    guard(|| put(out, MembraneConfig(ScenarioConfig::from_file(Path::new(str_arg(path, "path")?))?)))
}

/// Parses TOML scenario text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn membrane_config_parse(text: *const c_char, out: *mut *mut MembraneConfig) -> MembraneStatus {
    guard(|| put(out, MembraneConfig(ScenarioConfig::parse(str_arg(text, "text")?)?)))
}

/// Defaults of a named scenario such as `"formfind-catenoid"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn membrane_config_named(name: *const c_char, out: *mut *mut MembraneConfig) -> MembraneStatus {
    guard(|| {
        let scenario: Scenario = str_arg(name, "name")?.parse()?;
        put(out, MembraneConfig(ScenarioConfig::named(scenario)?))
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn membrane_config_free(config: *mut MembraneConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a solve scenario. A run that stops without converging still yields
/// a result (with `converged` false) and returns `MEMBRANE_STATUS_OK`.
///
/// # Safety
/// `config` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn membrane_solve(config: *const MembraneConfig, out: *mut *mut MembraneResult) -> MembraneStatus {
    guard(|| {
        let config = &deref(config, "config")?.0;
        let o = run_solve(config, None)?;
        let disp = o.disc.nodal_field(&o.u);
        let nodes = o.disc.mesh().nodes().iter().zip(&disp).map(|(x, u)| x + u).collect();
        let mesh = o.disc.mesh().with_nodes(nodes)?;
        put(
            out,
            MembraneResult {
                area: discrete_area(&mesh)?,
                mesh,
                displacements: disp.iter().map(|u| [u.x, u.y, u.z]).collect(),
                converged: o.report.converged,
                iterations: o.report.steps.iter().map(|s| s.residuals.len().saturating_sub(1)).sum(),
            },
        )
    })
}

/// Runs a form-finding scenario. Exhausting the iteration budget yields a
/// result with `converged` false.
///
/// # Safety
/// `config` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn membrane_formfind(config: *const MembraneConfig, out: *mut *mut MembraneResult) -> MembraneStatus {
    guard(|| {
        let config = &deref(config, "config")?.0;
        let initial = config.mesh.build()?;
        let state = match run_formfind(config, None) {
            Ok(s) => s,
            Err(Error::FormFinding { state, .. }) => *state,
            Err(e) => return Err(e.into()),
        };
        let displacements = state
            .mesh
            .nodes()
            .iter()
            .zip(initial.nodes())
            .map(|(x, x0)| [x.x - x0.x, x.y - x0.y, x.z - x0.z])
            .collect();
        put(
            out,
            MembraneResult {
                area: state.areas.last().copied().unwrap_or(f64::NAN),
                displacements,
                converged: state.converged,
                iterations: state.iterations,
                mesh: state.mesh,
            },
        )
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn membrane_result_converged(result: *const MembraneResult) -> bool {
    result.as_ref().is_some_and(|r| r.converged)
}

/// Newton iterations over all load steps, or fixed-point iterations.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn membrane_result_iterations(result: *const MembraneResult) -> usize {
    result.as_ref().map_or(0, |r| r.iterations)
}

/// Area of the deformed surface, NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn membrane_result_area(result: *const MembraneResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.area)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn membrane_result_num_nodes(result: *const MembraneResult) -> usize {
    result.as_ref().map_or(0, |r| r.displacements.len())
}

/// Copies nodal displacements as `ux0 uy0 uz0 ux1 ...` into `buf`.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn membrane_result_displacements(
    result: *const MembraneResult,
    buf: *mut f64,
    len: usize,
) -> MembraneStatus {
    guard(|| {
        let r = deref(result, "result")?;
        copy_out(r.displacements.iter().flatten().copied().collect::<Vec<_>>().into_iter(), buf, len)
    })
}

/// Deformed surface as a new mesh handle owned by the caller.
///
/// # Safety
/// `result` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn membrane_result_mesh(result: *const MembraneResult, out: *mut *mut MembraneMesh) -> MembraneStatus {
    guard(|| put(out, MembraneMesh(deref(result, "result")?.mesh.clone())))
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn membrane_result_free(result: *mut MembraneResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Area of the catenoid spanning rings of `radius` at `+-half_height`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn membrane_catenoid_area(radius: f64, half_height: f64, out: *mut f64) -> MembraneStatus {
    guard(|| {
        let c = catenoid_reference(radius, half_height)?;
        *out.as_mut().ok_or_else(|| null("out"))? = c.area;
        Ok(())
    })
}
