//! C interface to the aero-orch simulator.
//!
//! Every object crosses the boundary as an opaque pointer created by an
//! `aero_*_new`/`load`/`generate` call and released with the matching
//! `aero_*_free`. Fallible calls return an [`AeroStatus`]; on failure
//! [`aero_last_error`] describes the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aero_orch::allocate::{check_constraints, oracle_solve, OracleLimits, OracleSolution};
use aero_orch::environment::World;
use aero_orch::harness::{run_scenario, RunConfig, ScenarioReport};
use aero_orch::model::{GeneratorConfig, Instance};
use aero_orch::orchestrator::PolicyKind;
use aero_orch::Error;

/// A scenario instance.
pub struct AeroInstance(Instance);

/// A run configuration.
pub struct AeroRunConfig(RunConfig);

/// The aggregated result of a run.
pub struct AeroReport(ScenarioReport);

/// An exact solution of a micro instance.
pub struct AeroSolution(OracleSolution);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AeroStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    Dimension = 3,
    Argument = 4,
    Structural = 5,
    Size = 6,
    NoValidAction = 7,
    Config = 8,
    Io = 9,
    Parse = 10,
    Serialize = 11,
    OutOfRange = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AeroPolicy {
    Perfect = 0,
    Random = 1,
    OracleReplay = 2,
}

impl From<PolicyKind> for AeroPolicy {
    fn from(p: PolicyKind) -> Self {
        match p {
            PolicyKind::Perfect => AeroPolicy::Perfect,
            PolicyKind::Random => AeroPolicy::Random,
            PolicyKind::OracleReplay => AeroPolicy::OracleReplay,
        }
    }
}

/// One line of the metrics table. `oracle_ratio` is NaN when absent.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AeroMetricsRow {
    pub scenario_point: f64,
    pub policy: AeroPolicy,
    pub acceptance_mean: f64,
    pub acceptance_std: f64,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub latency_mean: f64,
    pub latency_std: f64,
    pub oracle_ratio: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AeroObjective {
    pub accepted_count: usize,
    pub total_energy: f64,
    pub objective_value: f64,
    pub alpha: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AeroStatus {
    match e {
        Error::Dimension(_) => AeroStatus::Dimension,
        Error::Argument(_) => AeroStatus::Argument,
        Error::Structural(_) => AeroStatus::Structural,
        Error::Size(_) => AeroStatus::Size,
        Error::NoValidAction => AeroStatus::NoValidAction,
        Error::Config(_) => AeroStatus::Config,
        Error::Io { .. } => AeroStatus::Io,
        Error::Parse { .. } => AeroStatus::Parse,
        Error::Serialize(_) => AeroStatus::Serialize,
    }
}

enum Fail {
    Core(Error),
    Status(AeroStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> AeroStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AeroStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, message))) => {
            set_error(message);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            AeroStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail::Status(AeroStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail::Status(AeroStatus::NullPointer, format!("{what} is null")))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(AeroStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(AeroStatus::InvalidString, format!("{what} is not UTF-8")))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn aero_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn aero_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generates a micro instance, small enough for the exact solver.
///
/// # Safety
/// `out_instance` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aero_instance_generate_micro(seed: u64, out_instance: *mut *mut AeroInstance) -> AeroStatus {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        *slot = boxed(AeroInstance(GeneratorConfig::micro().generate(seed)?));
        Ok(())
    })
}

/// Generates a toy instance (one row of five areas, two UAVs).
///
/// # Safety
/// `out_instance` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aero_instance_generate_toy(seed: u64, out_instance: *mut *mut AeroInstance) -> AeroStatus {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        *slot = boxed(AeroInstance(GeneratorConfig::toy().generate(seed)?));
        Ok(())
    })
}

/// Loads an instance from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aero_instance_load(path: *const c_char, out_instance: *mut *mut AeroInstance) -> AeroStatus {
    guard(|| {
        let path = string(path, "path")?;
        let slot = out(out_instance, "out_instance")?;
        *slot = boxed(AeroInstance(Instance::load(path)?));
        Ok(())
    })
}

/// # Safety
/// `instance` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn aero_instance_save(instance: *const AeroInstance, path: *const c_char) -> AeroStatus {
    guard(|| {
        let instance = get(instance, "instance")?;
        instance.0.save(string(path, "path")?)?;
        Ok(())
    })
}

/// Node, request and frame counts of an instance. Any output may be null.
///
/// # Safety
/// `instance` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn aero_instance_shape(
    instance: *const AeroInstance,
    nodes: *mut usize,
    requests: *mut usize,
    frames: *mut usize,
) -> AeroStatus {
    guard(|| {
        let inst = &get(instance, "instance")?.0;
        for (p, v) in [(nodes, inst.nodes.len()), (requests, inst.requests.len()), (frames, inst.time.total_frames)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `instance` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn aero_instance_free(instance: *mut AeroInstance) {
    free(instance)
}

/// Solves an instance exactly. Only micro-sized instances are admitted;
/// larger ones fail with `Size`.
///
/// # Safety
/// `instance` must come from this library and `out_solution` be valid.
#[no_mangle]
pub unsafe extern "C" fn aero_oracle_solve(
    instance: *const AeroInstance,
    alpha: f64,
    out_solution: *mut *mut AeroSolution,
) -> AeroStatus {
    guard(|| {
        let inst = &get(instance, "instance")?.0;
        let slot = out(out_solution, "out_solution")?;
        let world = World::realize(inst, None)?;
        *slot = boxed(AeroSolution(oracle_solve(&world, alpha, &OracleLimits::default())?));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from this library and `objective` be valid.
#[no_mangle]
pub unsafe extern "C" fn aero_solution_objective(
    solution: *const AeroSolution,
    objective: *mut AeroObjective,
) -> AeroStatus {
    guard(|| {
        let r = &get(solution, "solution")?.0.report;
        *out(objective, "objective")? = AeroObjective {
            accepted_count: r.accepted_count,
            total_energy: r.total_energy,
            objective_value: r.objective_value,
            alpha: r.alpha,
        };
        Ok(())
    })
}

/// Counts the constraint violations of a solution's allocation on an
/// instance.
///
/// # Safety
/// Both handles must come from this library and `violations` be valid.
#[no_mangle]
pub unsafe extern "C" fn aero_solution_check(
    solution: *const AeroSolution,
    instance: *const AeroInstance,
    violations: *mut usize,
) -> AeroStatus {
    guard(|| {
        let allocation = &get(solution, "solution")?.0.allocation;
        let inst = &get(instance, "instance")?.0;
        let slot = out(violations, "violations")?;
        let world = World::realize(inst, None)?;
        *slot = check_constraints(allocation, &world)?.len();
        Ok(())
    })
}

/// Allocation of a solution as a TOML string; release with
/// [`aero_string_free`].
///
/// # Safety
/// `solution` must come from this library and `out_toml` be valid.
#[no_mangle]
pub unsafe extern "C" fn aero_solution_allocation_toml(
    solution: *const AeroSolution,
    out_toml: *mut *mut c_char,
) -> AeroStatus {
    guard(|| {
        let allocation = &get(solution, "solution")?.0.allocation;
        let slot = out(out_toml, "out_toml")?;
        let text = toml_string(allocation)?;
        *slot = CString::new(text).map_err(|e| Error::Serialize(e.to_string()))?.into_raw();
        Ok(())
    })
}

fn toml_string<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    toml::to_string(value).map_err(|e| Error::Serialize(e.to_string()))
}

/// # Safety
/// `solution` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn aero_solution_free(solution: *mut AeroSolution) {
    free(solution)
}

/// Loads a run configuration from a TOML file.
///
/// # Safety
/// `path` must be NUL-terminated and `out_config` valid.
#[no_mangle]
pub unsafe extern "C" fn aero_run_config_load(path: *const c_char, out_config: *mut *mut AeroRunConfig) -> AeroStatus {
    guard(|| {
        let path = string(path, "path")?;
        let slot = out(out_config, "out_config")?;
        let config = RunConfig::load(path)?;
        config.validate()?;
        *slot = boxed(AeroRunConfig(config));
        Ok(())
    })
}

/// Built-in configuration: `toy`, `requests-sweep`, `network-sweep` or
/// `channels-sweep`.
///
/// # Safety
/// `name` must be NUL-terminated and `out_config` valid.
#[no_mangle]
pub unsafe extern "C" fn aero_run_config_preset(name: *const c_char, out_config: *mut *mut AeroRunConfig) -> AeroStatus {
    guard(|| {
        let name = string(name, "name")?;
        let slot = out(out_config, "out_config")?;
        *slot = boxed(AeroRunConfig(RunConfig::preset(name)?));
        Ok(())
    })
}

/// Restricts a configuration to the seeds `first .. first + count` and,
/// when `frames` is nonzero, shortens the horizon.
///
/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn aero_run_config_limit(
    config: *mut AeroRunConfig,
    first: u64,
    count: u64,
    frames: usize,
) -> AeroStatus {
    guard(|| {
        let c = &mut out(config, "config")?.0;
        let mut next = c.clone();
        next.seeds = (first..first.saturating_add(count)).collect();
        if frames > 0 {
            next.frames = Some(frames);
        }
        next.validate()?;
        *c = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn aero_run_config_free(config: *mut AeroRunConfig) {
    free(config)
}

/// Runs every policy over every sweep point and seed of a configuration.
///
/// # Safety
/// `config` must come from this library and `out_report` be valid.
#[no_mangle]
pub unsafe extern "C" fn aero_run(config: *const AeroRunConfig, out_report: *mut *mut AeroReport) -> AeroStatus {
    guard(|| {
        let config = &get(config, "config")?.0;
        let slot = out(out_report, "out_report")?;
        *slot = boxed(AeroReport(run_scenario(config)?));
        Ok(())
    })
}

/// Number of metrics rows, or 0 for a null report.
///
/// # Safety
/// `report` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn aero_report_row_count(report: *const AeroReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `report` must come from this library and `row` be valid.
#[no_mangle]
pub unsafe extern "C" fn aero_report_row(report: *const AeroReport, index: usize, row: *mut AeroMetricsRow) -> AeroStatus {
    guard(|| {
        let rows = &get(report, "report")?.0.rows;
        let slot = out(row, "row")?;
        let r = rows.get(index).ok_or_else(|| {
            Fail::Status(AeroStatus::OutOfRange, format!("row {index} of {}", rows.len()))
        })?;
        *slot = AeroMetricsRow {
            scenario_point: r.scenario_point,
            policy: r.policy.into(),
            acceptance_mean: r.acceptance_mean,
            acceptance_std: r.acceptance_std,
            energy_mean: r.energy_mean,
            energy_std: r.energy_std,
            latency_mean: r.latency_mean,
            latency_std: r.latency_std,
            oracle_ratio: r.oracle_ratio.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// The full report, including per-episode measurements, as JSON; release
/// with [`aero_string_free`].
///
/// # Safety
/// `report` must come from this library and `out_json` be valid.
#[no_mangle]
pub unsafe extern "C" fn aero_report_json(report: *const AeroReport, out_json: *mut *mut c_char) -> AeroStatus {
    guard(|| {
        let report = &get(report, "report")?.0;
        let slot = out(out_json, "out_json")?;
        let text = serde_json::to_string(report).map_err(|e| Error::Serialize(e.to_string()))?;
        *slot = CString::new(text).map_err(|e| Error::Serialize(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn aero_report_free(report: *mut AeroReport) {
    free(report)
}
