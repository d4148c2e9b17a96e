//! C ABI over the `multiprice` library.
//!
//! Conventions: every fallible function returns an [`MpStatus`]; results go through out
//! pointers. On failure a message is available from [`mp_last_error`] on the same thread.
//! Handles ([`MpModel`], [`MpDataset`]) are opaque and must be released with their `_free`
//! function. Panics never cross the boundary; they surface as `MP_STATUS_INTERNAL`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use multiprice::audit::{audit, AuditGrid, Verdict};
use multiprice::cohort::{build_profiles, default_catalog, simulate_cohort, CohortConfig, Dataset, QualityDraw};
use multiprice::elicit::{elicit_bisect, elicit_rowscan, implied_quality, Clamp, MplSpec, Scenario};
use multiprice::error::{ElicitError, IoError};
use multiprice::io::{parse_config, read_dataset, write_dataset};
use multiprice::model::{evaluate_member, Alternative, Menu};
use multiprice::regions::{predict_choice, Choice, RegionSpec};
use multiprice::stats::{binom_tail, fe_ols, sign_test_counts, threshold_score, FixedEffects};
use multiprice::ModelSpec;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoCrossing = 3,
    Io = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpScenario {
    M = 0,
    PIgnore = 1,
    PSeparate = 2,
    PCombine = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpMethod {
    RowScan = 0,
    Bisection = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpVerdict {
    Holds = 0,
    Violated = 1,
    Indeterminate = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpChoice {
    High = 0,
    Low = 1,
    Outside = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpFixedEffects {
    None = 0,
    Subject = 1,
    SubjectProduct = 2,
}

/// Price list rows `min, min + step, ..., max`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpElicitation {
    /// Valid only when `has_switch` is nonzero.
    pub switch_point: f64,
    pub has_switch: i32,
    pub crossing_count: u64,
    /// 0 none, 1 at the list minimum, 2 never switched.
    pub clamped: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpAudit {
    pub injective: MpVerdict,
    pub symmetry: MpVerdict,
    pub linearity: MpVerdict,
    pub m_mpl: i32,
    pub p_ignore_or_separate: i32,
    pub p_combine: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpPrediction {
    pub choice: MpChoice,
    pub tie: i32,
    pub v_h: f64,
    pub v_l: f64,
    pub v_o: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpRegression {
    pub block: f64,
    pub block_se: f64,
    /// NaN when absorbed by product effects.
    pub price: f64,
    pub price_se: f64,
    pub block_price: f64,
    pub block_price_se: f64,
    pub constant: f64,
    pub constant_se: f64,
    pub n_observations: u64,
    pub n_clusters: u64,
}

/// Opaque model handle.
pub struct MpModel(ModelSpec);

/// Opaque dataset handle.
pub struct MpDataset(Dataset);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

struct Fail(MpStatus, String);

impl Fail {
    fn invalid(e: impl ToString) -> Self {
        Fail(MpStatus::InvalidArgument, e.to_string())
    }
}

impl From<ElicitError> for Fail {
    fn from(e: ElicitError) -> Self {
        let status = match e {
            ElicitError::NoCrossing => MpStatus::NoCrossing,
            _ => MpStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

impl From<IoError> for Fail {
    fn from(e: IoError) -> Self {
        let status = match e {
            IoError::File { .. } => MpStatus::Io,
            _ => MpStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MpStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MpStatus::Internal
        }
    }
}

unsafe fn out<'a, T>(ptr: *mut T) -> Result<&'a mut T, Fail> {
    ptr.as_mut()
        .ok_or_else(|| Fail(MpStatus::NullPointer, "null output pointer".into()))
}

unsafe fn model<'a>(ptr: *const MpModel) -> Result<&'a ModelSpec, Fail> {
    ptr.as_ref()
        .map(|m| &m.0)
        .ok_or_else(|| Fail(MpStatus::NullPointer, "null model handle".into()))
}

unsafe fn dataset<'a>(ptr: *const MpDataset) -> Result<&'a Dataset, Fail> {
    ptr.as_ref()
        .map(|d| &d.0)
        .ok_or_else(|| Fail(MpStatus::NullPointer, "null dataset handle".into()))
}

unsafe fn text<'a>(ptr: *const c_char) -> Result<&'a str, Fail> {
    if ptr.is_null() {
        return Err(Fail(MpStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(ptr).to_str().map_err(Fail::invalid)
}

fn scenario(kind: MpScenario, endowment: f64) -> Scenario {
    match kind {
        MpScenario::M => Scenario::m_money(),
        MpScenario::PIgnore => Scenario::p_ignore(),
        MpScenario::PSeparate => Scenario::p_separate(endowment),
        MpScenario::PCombine => Scenario::p_combine(endowment),
    }
}

fn mpl(grid: MpGrid) -> Result<MplSpec, Fail> {
    MplSpec::new(grid.min, grid.max, grid.step).map_err(Fail::invalid)
}

fn verdict(v: Verdict) -> MpVerdict {
    match v {
        Verdict::Holds => MpVerdict::Holds,
        Verdict::Violated { .. } => MpVerdict::Violated,
        Verdict::Indeterminate => MpVerdict::Indeterminate,
    }
}

/// Message of the last failed call on this thread; empty after a success. Owned by the library.
#[no_mangle]
pub extern "C" fn mp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn mp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn store_model(result: Result<ModelSpec, impl ToString>, out_model: *mut *mut MpModel) -> MpStatus {
    guard(|| {
        let slot = unsafe { out(out_model)? };
        let spec = result.map_err(Fail::invalid)?;
        *slot = Box::into_raw(Box::new(MpModel(spec)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_rn_linear(gamma: f64, out_model: *mut *mut MpModel) -> MpStatus {
    store_model(ModelSpec::rn_linear(gamma), out_model)
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_rn_kinked(gamma: f64, lambda: f64, out_model: *mut *mut MpModel) -> MpStatus {
    store_model(ModelSpec::rn_kinked(gamma, lambda), out_model)
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_rn_power(gamma: f64, alpha: f64, out_model: *mut *mut MpModel) -> MpStatus {
    store_model(ModelSpec::rn_power(gamma, alpha), out_model)
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_pn(out_model: *mut *mut MpModel) -> MpStatus {
    store_model(Ok::<_, String>(ModelSpec::pn()), out_model)
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_gpn(sigma: f64, out_model: *mut *mut MpModel) -> MpStatus {
    store_model(ModelSpec::gpn(sigma), out_model)
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_gpn_power(sigma: f64, alpha: f64, out_model: *mut *mut MpModel) -> MpStatus {
    store_model(ModelSpec::gpn_power(sigma, alpha), out_model)
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_cc(theta: f64, out_model: *mut *mut MpModel) -> MpStatus {
    store_model(ModelSpec::cc(theta), out_model)
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_ncc(theta: f64, out_model: *mut *mut MpModel) -> MpStatus {
    store_model(ModelSpec::ncc(theta), out_model)
}

/// Model from TOML config keys (`model`, `utility`, `lambda`, `alpha`, `gamma`, `sigma`, `theta`).
#[no_mangle]
pub unsafe extern "C" fn mp_model_from_config(config: *const c_char, out_model: *mut *mut MpModel) -> MpStatus {
    guard(|| {
        let slot = out(out_model)?;
        let cfg = parse_config(text(config)?)?;
        let spec = cfg.model.ok_or_else(|| Fail::invalid("config has no `model` key"))?;
        *slot = Box::into_raw(Box::new(MpModel(spec)));
        Ok(())
    })
}

/// Writes the model's display name, NUL terminated, truncated to `capacity`. Returns the full
/// length excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn mp_model_name(m: *const MpModel, buffer: *mut c_char, capacity: usize) -> usize {
    let Some(m) = m.as_ref() else { return 0 };
    let name = m.0.to_string();
    if !buffer.is_null() && capacity > 0 {
        let n = name.len().min(capacity - 1);
        std::ptr::copy_nonoverlapping(name.as_ptr().cast::<c_char>(), buffer, n);
        *buffer.add(n) = 0;
    }
    name.len()
}

#[no_mangle]
pub unsafe extern "C" fn mp_model_free(m: *mut MpModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `V` of alternative `target` in a 2- or 3-alternative menu stored row-major
/// (`n_alternatives * n_attributes` values).
#[no_mangle]
pub unsafe extern "C" fn mp_evaluate(
    m: *const MpModel,
    values: *const f64,
    n_alternatives: usize,
    n_attributes: usize,
    target: usize,
    out_value: *mut f64,
) -> MpStatus {
    guard(|| {
        let m = model(m)?;
        let slot = out(out_value)?;
        if values.is_null() {
            return Err(Fail(MpStatus::NullPointer, "null values".into()));
        }
        let flat = std::slice::from_raw_parts(values, n_alternatives * n_attributes);
        let alts = flat
            .chunks(n_attributes.max(1))
            .map(|c| Alternative::new(c.to_vec()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Fail::invalid)?;
        let menu = Menu::from_alternatives(alts).map_err(Fail::invalid)?;
        *slot = evaluate_member(m, &menu, target).map_err(Fail::invalid)?;
        Ok(())
    })
}

/// Switch point for quality `q`. `endowment` is ignored for the m and p-ignore scenarios.
#[no_mangle]
pub unsafe extern "C" fn mp_elicit(
    m: *const MpModel,
    kind: MpScenario,
    endowment: f64,
    q: f64,
    grid: MpGrid,
    method: MpMethod,
    tolerance: f64,
    out_result: *mut MpElicitation,
) -> MpStatus {
    guard(|| {
        let m = model(m)?;
        let slot = out(out_result)?;
        let s = scenario(kind, endowment);
        let list = mpl(grid)?;
        let r = match method {
            MpMethod::RowScan => elicit_rowscan(m, &s, q, &list)?,
            MpMethod::Bisection => elicit_bisect(m, &s, q, &list, tolerance)?,
        };
        *slot = MpElicitation {
            switch_point: r.switch_point.unwrap_or(f64::NAN),
            has_switch: r.switch_point.is_some() as i32,
            crossing_count: r.crossing_count as u64,
            clamped: match r.clamped {
                Clamp::No => 0,
                Clamp::AtMin => 1,
                Clamp::AtMax => 2,
            },
        };
        Ok(())
    })
}

/// Model-implied quality of a switch point; `*has_value` is 0 when no closed form is known.
#[no_mangle]
pub unsafe extern "C" fn mp_implied_quality(
    m: *const MpModel,
    kind: MpScenario,
    endowment: f64,
    switch_point: f64,
    out_quality: *mut f64,
    has_value: *mut i32,
) -> MpStatus {
    guard(|| {
        let m = model(m)?;
        let slot = out(out_quality)?;
        let flag = out(has_value)?;
        let q = implied_quality(m, &scenario(kind, endowment), switch_point)?;
        *slot = q.unwrap_or(f64::NAN);
        *flag = q.is_some() as i32;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mp_audit(
    m: *const MpModel,
    lo: f64,
    hi: f64,
    count: usize,
    tolerance: f64,
    out_audit: *mut MpAudit,
) -> MpStatus {
    guard(|| {
        let m = model(m)?;
        let slot = out(out_audit)?;
        let grid = AuditGrid::new(lo, hi, count, tolerance).map_err(Fail::invalid)?;
        let r = audit(m, &grid).map_err(Fail::invalid)?;
        let acc = r.accuracy();
        *slot = MpAudit {
            injective: verdict(r.injective),
            symmetry: verdict(r.symmetry),
            linearity: verdict(r.linearity),
            m_mpl: acc.m_mpl as i32,
            p_ignore_or_separate: acc.p_ignore_or_separate as i32,
            p_combine: acc.p_combine as i32,
        };
        Ok(())
    })
}

/// `P(X >= k)` for `X ~ Binomial(trials, 1/2)`.
#[no_mangle]
pub unsafe extern "C" fn mp_binom_tail(trials: u64, k: u64, out_value: *mut f64) -> MpStatus {
    guard(|| {
        let slot = out(out_value)?;
        *slot = binom_tail(trials, k).map_err(Fail::invalid)?;
        Ok(())
    })
}

/// Two-sided sign test p-value from directional counts.
#[no_mangle]
pub unsafe extern "C" fn mp_sign_test(n_m: u64, n_p: u64, out_p: *mut f64) -> MpStatus {
    guard(|| {
        let slot = out(out_p)?;
        *slot = sign_test_counts(n_m, n_p).map_err(Fail::invalid)?.p_value;
        Ok(())
    })
}

/// Minimal significant score for `k` products; `*has_value` is 0 when none exists.
#[no_mangle]
pub unsafe extern "C" fn mp_threshold_score(
    k: u64,
    significance: f64,
    out_threshold: *mut u64,
    has_value: *mut i32,
) -> MpStatus {
    guard(|| {
        let slot = out(out_threshold)?;
        let flag = out(has_value)?;
        let t = threshold_score(k, significance).map_err(Fail::invalid)?;
        *slot = t.unwrap_or(0);
        *flag = t.is_some() as i32;
        Ok(())
    })
}

/// Choice among `{h=(hq,-hp), l=(lq,-lp), o=(0,0)}`.
#[no_mangle]
pub unsafe extern "C" fn mp_predict_choice(
    m: *const MpModel,
    lq: f64,
    hq: f64,
    lp: f64,
    hp: f64,
    out_prediction: *mut MpPrediction,
) -> MpStatus {
    guard(|| {
        let m = model(m)?;
        let slot = out(out_prediction)?;
        let spec = RegionSpec::new(lq, hq, *m).map_err(Fail::invalid)?;
        let c = predict_choice(&spec, lp, hp).map_err(Fail::invalid)?;
        *slot = MpPrediction {
            choice: match c.choice {
                Choice::High => MpChoice::High,
                Choice::Low => MpChoice::Low,
                Choice::Outside => MpChoice::Outside,
            },
            tie: c.tie as i32,
            v_h: c.v_h,
            v_l: c.v_l,
            v_o: c.v_o,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mp_dataset_read(path: *const c_char, out_dataset: *mut *mut MpDataset) -> MpStatus {
    guard(|| {
        let slot = out(out_dataset)?;
        let d = read_dataset(Path::new(text(path)?))?;
        *slot = Box::into_raw(Box::new(MpDataset(d)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mp_dataset_write(d: *const MpDataset, path: *const c_char) -> MpStatus {
    guard(|| {
        let d = dataset(d)?;
        write_dataset(d, Path::new(text(path)?))?;
        Ok(())
    })
}

/// Noise-free or noisy cohort on the default 30-product catalog and the default price list.
/// Qualities are uniform on `[quality_min, quality_max]`; the first half (rounded up) of the
/// subjects get the mp treatment.
#[no_mangle]
pub unsafe extern "C" fn mp_dataset_simulate(
    m: *const MpModel,
    p_scenario: MpScenario,
    endowment: f64,
    subjects: usize,
    quality_min: f64,
    quality_max: f64,
    noise_sd: f64,
    seed: u64,
    out_dataset: *mut *mut MpDataset,
) -> MpStatus {
    guard(|| {
        let m = model(m)?;
        let slot = out(out_dataset)?;
        if p_scenario == MpScenario::M {
            return Err(Fail::invalid("the p-block scenario cannot be the m scenario"));
        }
        if !(quality_min.is_finite() && quality_min >= 0.0 && quality_max >= quality_min) {
            return Err(Fail::invalid("invalid quality range"));
        }
        let catalog = default_catalog();
        let config = CohortConfig {
            subjects,
            model: *m,
            p_scenario: scenario(p_scenario, endowment),
            qualities: QualityDraw::Uniform {
                lo: quality_min,
                hi: quality_max,
            },
            noise_sd,
            mp_subjects: subjects.div_ceil(2),
        };
        let profiles = build_profiles(&config, &catalog, seed).map_err(Fail::invalid)?;
        let d = simulate_cohort(&profiles, &catalog, &MplSpec::default(), seed).map_err(Fail::invalid)?;
        *slot = Box::into_raw(Box::new(MpDataset(d)));
        Ok(())
    })
}

/// Number of records, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mp_dataset_len(d: *const MpDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.records.len())
}

#[no_mangle]
pub unsafe extern "C" fn mp_dataset_fe_ols(
    d: *const MpDataset,
    fixed_effects: MpFixedEffects,
    out_regression: *mut MpRegression,
) -> MpStatus {
    guard(|| {
        let d = dataset(d)?;
        let slot = out(out_regression)?;
        let fe = match fixed_effects {
            MpFixedEffects::None => FixedEffects::None,
            MpFixedEffects::Subject => FixedEffects::Subject,
            MpFixedEffects::SubjectProduct => FixedEffects::SubjectProduct,
        };
        let r = fe_ols(d, fe).map_err(Fail::invalid)?;
        *slot = MpRegression {
            block: r.block.coef,
            block_se: r.block.std_error,
            price: r.price.map_or(f64::NAN, |e| e.coef),
            price_se: r.price.map_or(f64::NAN, |e| e.std_error),
            block_price: r.block_price.coef,
            block_price_se: r.block_price.std_error,
            constant: r.constant.coef,
            constant_se: r.constant.std_error,
            n_observations: r.n_observations as u64,
            n_clusters: r.n_clusters as u64,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mp_dataset_free(d: *mut MpDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}
