//! C ABI over `emr-dlt`.
//!
//! Objects are opaque handles created by `*_new`/`*_run` functions and
//! released with the matching `*_free`. Fallible calls return an
//! [`EmrStatus`]; on failure a message is available from
//! [`emr_last_error_message`] on the same thread until the next failing call.
//! No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use emr_dlt::degree_dist::{raptor_user_dist, reference_relay_dist, robust_soliton};
use emr_dlt::density_evolution::DecoderModel;
use emr_dlt::emr_sim::{default_max_phases, run_campaign, CampaignResult, NetworkConfig, RelayMode};
use emr_dlt::lp_design::{sweep_design, DesignParams, DesignResult};
use emr_dlt::{DegreeDistribution, Error, Perspective};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDistribution = 3,
    NoDesign = 4,
    Numerical = 5,
    Io = 6,
    Protocol = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmrPerspective {
    Node = 0,
    Edge = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmrRelayMode {
    Buffered = 0,
    Unbuffered = 1,
    Uncoded = 2,
}

/// Symmetric network settings for [`emr_campaign_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EmrNetworkParams {
    pub users: usize,
    pub k: usize,
    pub eps_up: f64,
    pub eps_down: f64,
    pub mode: EmrRelayMode,
    /// 0 selects the default budget `5 (users - 1) k`.
    pub max_broadcast_phases: u64,
    pub seed: u64,
}

/// Degree distribution handle.
pub struct EmrDistribution(DegreeDistribution);

/// Result of a relay design sweep.
pub struct EmrDesign(DesignResult);

/// Aggregated Monte Carlo campaign.
pub struct EmrCampaign(CampaignResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EmrStatus {
    match e {
        Error::InvalidDistribution(_) | Error::Parse { .. } => EmrStatus::InvalidDistribution,
        Error::Domain(_) | Error::Constraint(_) | Error::Config(_) => EmrStatus::InvalidArgument,
        Error::NoDesign(_) => EmrStatus::NoDesign,
        Error::Numerical(_) => EmrStatus::Numerical,
        Error::Io(_) => EmrStatus::Io,
        Error::Protocol(_) | Error::InconsistentDecode { .. } => EmrStatus::Protocol,
    }
}

struct Fail(EmrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EmrStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EmrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            EmrStatus::Panic
        }
    }
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn emr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a distribution from `len` probabilities indexed by degree
/// (`probs[0]` is degree 0).
///
/// # Safety
/// `probs` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_new(
    perspective: EmrPerspective,
    probs: *const f64,
    len: usize,
    out: *mut *mut EmrDistribution,
) -> EmrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if probs.is_null() {
            return Err(null("probs"));
        }
        let p = std::slice::from_raw_parts(probs, len).to_vec();
        let perspective = match perspective {
            EmrPerspective::Node => Perspective::Node,
            EmrPerspective::Edge => Perspective::Edge,
        };
        *out = boxed(EmrDistribution(DegreeDistribution::new(perspective, p)?));
        Ok(())
    })
}

/// The ten-user reference relay distribution.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_reference(out: *mut *mut EmrDistribution) -> EmrStatus {
    guard(|| {
        *out_ptr(out, "out")? = boxed(EmrDistribution(reference_relay_dist()));
        Ok(())
    })
}

/// The degree-66 raptor output distribution.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_raptor(out: *mut *mut EmrDistribution) -> EmrStatus {
    guard(|| {
        *out_ptr(out, "out")? = boxed(EmrDistribution(raptor_user_dist()));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_robust_soliton(
    k: usize,
    c: f64,
    sigma: f64,
    out: *mut *mut EmrDistribution,
) -> EmrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(EmrDistribution(robust_soliton(k, c, sigma)?));
        Ok(())
    })
}

/// Reads the plain-text distribution format.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_read_file(
    path: *const c_char,
    out: *mut *mut EmrDistribution,
) -> EmrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(EmrStatus::InvalidArgument, "path is not UTF-8".into()))?;
        *out = boxed(EmrDistribution(DegreeDistribution::read_file(path.as_ref())?));
        Ok(())
    })
}

/// Largest supported degree; 0 for a null handle.
///
/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_max_degree(dist: *const EmrDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.0.max_degree())
}

/// Probability of `degree`; 0 for a null handle or unsupported degree.
///
/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_prob(dist: *const EmrDistribution, degree: usize) -> f64 {
    dist.as_ref().map_or(0.0, |d| d.0.prob(degree))
}

/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_mean(dist: *const EmrDistribution) -> f64 {
    dist.as_ref().map_or(0.0, |d| d.0.mean())
}

/// # Safety
/// `dist` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn emr_distribution_free(dist: *mut EmrDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Asymptotic erasure rate of one user at reception overhead `overhead`.
///
/// # Safety
/// `gamma` must be a live node-perspective handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_de_erasure(
    gamma: *const EmrDistribution,
    users: usize,
    overhead: f64,
    out: *mut f64,
) -> EmrStatus {
    guard(|| {
        let g = handle(gamma, "gamma")?;
        let out = out_ptr(out, "out")?;
        *out = DecoderModel::new(&g.0, users)?.erasure_at(overhead)?;
        Ok(())
    })
}

/// Overhead at which the asymptotic erasure rate reaches `delta`.
///
/// # Safety
/// `gamma` must be a live node-perspective handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_de_threshold(
    gamma: *const EmrDistribution,
    users: usize,
    delta: f64,
    out: *mut f64,
) -> EmrStatus {
    guard(|| {
        let g = handle(gamma, "gamma")?;
        let out = out_ptr(out, "out")?;
        *out = DecoderModel::new(&g.0, users)?.threshold_overhead(delta)?;
        Ok(())
    })
}

/// LP sweep design with default sweep grid; `max_degree = 0` means `users`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_design_run(
    users: usize,
    max_degree: usize,
    delta: f64,
    grid_points: usize,
    out: *mut *mut EmrDesign,
) -> EmrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mut params = DesignParams::new(users);
        if max_degree > 0 {
            params.max_degree = max_degree;
        }
        params.delta = delta;
        params.m = grid_points;
        *out = boxed(EmrDesign(sweep_design(&params)?));
        Ok(())
    })
}

/// Asymptotic overhead of the design at its target erasure rate.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_design_overhead(design: *const EmrDesign) -> f64 {
    design.as_ref().map_or(f64::NAN, |d| d.0.design_overhead)
}

/// Sweep value of the selected design.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_design_sweep_parameter(design: *const EmrDesign) -> f64 {
    design.as_ref().map_or(f64::NAN, |d| d.0.sweep_parameter)
}

/// Copies the designed relay distribution (node perspective) into a new handle.
///
/// # Safety
/// `design` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_design_distribution(
    design: *const EmrDesign,
    out: *mut *mut EmrDistribution,
) -> EmrStatus {
    guard(|| {
        let d = handle(design, "design")?;
        *out_ptr(out, "out")? = boxed(EmrDistribution(d.0.gamma_node.clone()));
        Ok(())
    })
}

/// # Safety
/// `design` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn emr_design_free(design: *mut EmrDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Runs `trials` trials and aggregates the erasure rate on `grid`. User
/// encoders send single bits, except in uncoded mode where they use
/// `user_dist` (required there, ignored otherwise).
///
/// # Safety
/// `params`, `gamma` must be live; `user_dist` null or live; `grid` must
/// point to `grid_len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_campaign_run(
    params: *const EmrNetworkParams,
    gamma: *const EmrDistribution,
    user_dist: *const EmrDistribution,
    trials: usize,
    grid: *const f64,
    grid_len: usize,
    out: *mut *mut EmrCampaign,
) -> EmrStatus {
    guard(|| {
        let p = *handle(params, "params")?;
        let g = handle(gamma, "gamma")?;
        let out = out_ptr(out, "out")?;
        if grid.is_null() {
            return Err(null("grid"));
        }
        let grid = std::slice::from_raw_parts(grid, grid_len);
        if p.users < 2 {
            return Err(Fail(EmrStatus::InvalidArgument, "users must be at least 2".into()));
        }
        let mode = match p.mode {
            EmrRelayMode::Buffered => RelayMode::Buffered,
            EmrRelayMode::Unbuffered => RelayMode::Unbuffered,
            EmrRelayMode::Uncoded => RelayMode::UncodedBroadcast,
        };
        let mut cfg = NetworkConfig::symmetric(p.users, p.k, p.eps_up, p.eps_down, g.0.clone())
            .with_mode(mode)
            .with_seed(p.seed);
        cfg.max_broadcast_phases = if p.max_broadcast_phases == 0 {
            default_max_phases(p.users, p.k)
        } else {
            p.max_broadcast_phases
        };
        if mode == RelayMode::UncodedBroadcast {
            cfg.omega = handle(user_dist, "user_dist")?.0.clone();
        }
        *out = boxed(EmrCampaign(run_campaign(&cfg, trials, grid)?));
        Ok(())
    })
}

/// Number of grid points; 0 for a null handle.
///
/// # Safety
/// `campaign` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_campaign_len(campaign: *const EmrCampaign) -> usize {
    campaign.as_ref().map_or(0, |c| c.0.grid.len())
}

/// Mean erasure rate and its standard error at grid point `index`.
///
/// # Safety
/// `campaign` must be live; `mean` and `stderr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn emr_campaign_point(
    campaign: *const EmrCampaign,
    index: usize,
    mean: *mut f64,
    stderr: *mut f64,
) -> EmrStatus {
    guard(|| {
        let c = &handle(campaign, "campaign")?.0;
        let mean = out_ptr(mean, "mean")?;
        let stderr = out_ptr(stderr, "stderr")?;
        if index >= c.grid.len() {
            return Err(Fail(
                EmrStatus::InvalidArgument,
                format!("index {index} out of range for {} points", c.grid.len()),
            ));
        }
        *mean = c.mean_erasure[index];
        *stderr = c.stderr[index];
        Ok(())
    })
}

/// Share of trials where every user decoded.
///
/// # Safety
/// `campaign` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_campaign_success_fraction(campaign: *const EmrCampaign) -> f64 {
    campaign.as_ref().map_or(f64::NAN, |c| c.0.success_fraction)
}

/// Mean reception overhead over decoded users; NaN if none decoded.
///
/// # Safety
/// `campaign` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emr_campaign_mean_overhead(campaign: *const EmrCampaign) -> f64 {
    campaign
        .as_ref()
        .and_then(|c| c.0.mean_overhead)
        .unwrap_or(f64::NAN)
}

/// # Safety
/// `campaign` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn emr_campaign_free(campaign: *mut EmrCampaign) {
    if !campaign.is_null() {
        drop(Box::from_raw(campaign));
    }
}
