//! C ABI for the pcgbc pipeline.
//!
//! Every object crosses the boundary as an opaque handle owned by the caller
//! and released with its `*_free` function. Functions return a [`PcgStatus`];
//! on failure `pcgbc_last_error_message` describes the most recent error on
//! the calling thread. Strings returned to the caller are freed with
//! `pcgbc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pcgbc::domain::{parse_level, AnyDomain, DomainKind};
use pcgbc::level::hamming_distance;
use pcgbc::policy::PolicyArtifact;
use pcgbc::rng::derive_rng;
use pcgbc::{build_dataset, generate_level, run_ga, with_domain, Error, GaRunResult, Level, NeighbourIndex};
use pcgbc::{PolicyConfig, PolicyDataset};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    IoError = 4,
    /// The GA or the policy could not produce an acceptable level.
    MethodFailed = 5,
    CorruptData = 6,
    Panic = 7,
}

/// A tile level.
pub struct PcgLevel(Level);

/// The result of one GA run.
pub struct PcgRun(GaRunResult);

/// A distilled (state, action) dataset.
pub struct PcgDataset(PolicyDataset);

/// A nearest-neighbour policy ready to generate levels.
pub struct PcgPolicy {
    domain: AnyDomain,
    index: NeighbourIndex,
    config: PolicyConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> PcgStatus {
    match e {
        Error::Parse { .. } => PcgStatus::ParseError,
        Error::Io { .. } => PcgStatus::IoError,
        Error::CorruptDataset(_) | Error::Json(_) | Error::Csv(_) => PcgStatus::CorruptData,
        e if e.is_method_failure() => PcgStatus::MethodFailed,
        _ => PcgStatus::InvalidArgument,
    }
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (PcgStatus, String)>) -> PcgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PcgStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (PcgStatus, String)>;
}

impl<T> IntoFfi<T> for pcgbc::Result<T> {
    fn ffi(self) -> Result<T, (PcgStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (PcgStatus, String) {
    (PcgStatus::NullArgument, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PcgStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PcgStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PcgStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (PcgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or NULL. Free the result
/// with `pcgbc_string_free`.
#[no_mangle]
pub extern "C" fn pcgbc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a level in text form (`"<w> <h>\n"` then one row per line). The
/// domain is inferred from the glyphs.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_level_parse(text: *const c_char, out: *mut *mut PcgLevel) -> PcgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let level = parse_level(string(text, "text")?).ffi()?;
        *out = boxed(PcgLevel(level));
        Ok(())
    })
}

/// # Safety
/// `level` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_level_free(level: *mut PcgLevel) {
    free(level)
}

/// # Safety
/// `level`, `width` and `height` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_level_size(level: *const PcgLevel, width: *mut usize, height: *mut usize) -> PcgStatus {
    guard(|| {
        let l = &deref(level, "level")?.0;
        *out_ptr(width, "width")? = l.width();
        *out_ptr(height, "height")? = l.height();
        Ok(())
    })
}

/// Text form of a level. Free with `pcgbc_string_free`.
///
/// # Safety
/// `level` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_level_to_text(level: *const PcgLevel, out: *mut *mut c_char) -> PcgStatus {
    guard(|| {
        let l = &deref(level, "level")?.0;
        let out = out_ptr(out, "out")?;
        *out = CString::new(l.to_text()).expect("level text is ASCII").into_raw();
        Ok(())
    })
}

/// Domain fitness of a level.
///
/// # Safety
/// `level` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_level_fitness(level: *const PcgLevel, out: *mut f64) -> PcgStatus {
    guard(|| {
        let l = &deref(level, "level")?.0;
        let out = out_ptr(out, "out")?;
        *out = AnyDomain::for_level(l).ffi()?.fitness(l);
        Ok(())
    })
}

/// Number of cells that differ between two same-shape levels.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_level_hamming(a: *const PcgLevel, b: *const PcgLevel, out: *mut usize) -> PcgStatus {
    guard(|| {
        let d = hamming_distance(&deref(a, "a")?.0, &deref(b, "b")?.0).ffi()?;
        *out_ptr(out, "out")? = d;
        Ok(())
    })
}

/// Run the GA with the domain's default settings. `domain` is `"maze"` or
/// `"platformer"`; `size` is the maze side and is ignored for the platformer.
///
/// # Safety
/// `domain` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_run_ga(
    domain: *const c_char,
    size: usize,
    acceptable_fraction: f64,
    seed: u64,
    out: *mut *mut PcgRun,
) -> PcgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let kind: DomainKind = string(domain, "domain")?.parse().ffi()?;
        let d = AnyDomain::new(kind, size).ffi()?;
        let mut cfg = kind.ga_defaults();
        cfg.acceptable_fraction = acceptable_fraction;
        cfg.seed = seed;
        let run = with_domain!(&d, p => run_ga(&cfg, p)).ffi()?;
        *out = boxed(PcgRun(run));
        Ok(())
    })
}

/// # Safety
/// `run` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_run_free(run: *mut PcgRun) {
    free(run)
}

/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_run_info(
    run: *const PcgRun,
    generations: *mut usize,
    final_count: *mut usize,
) -> PcgStatus {
    guard(|| {
        let r = &deref(run, "run")?.0;
        *out_ptr(generations, "generations")? = r.generations_used;
        *out_ptr(final_count, "final_count")? = r.final_levels.len();
        Ok(())
    })
}

/// Copy of final level `i`.
///
/// # Safety
/// `run` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_run_final_level(run: *const PcgRun, i: usize, out: *mut *mut PcgLevel) -> PcgStatus {
    guard(|| {
        let r = &deref(run, "run")?.0;
        let out = out_ptr(out, "out")?;
        let level = r.final_levels.get(i).ok_or_else(|| {
            (
                PcgStatus::InvalidArgument,
                format!("final level {i} of {}", r.final_levels.len()),
            )
        })?;
        *out = boxed(PcgLevel(level.clone()));
        Ok(())
    })
}

/// Save a run directory (`initial/`, `final/`, `run.json`).
///
/// # Safety
/// `run` must be valid and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_run_save(run: *const PcgRun, dir: *const c_char) -> PcgStatus {
    guard(|| {
        let r = &deref(run, "run")?.0;
        r.save(&PathBuf::from(string(dir, "dir")?)).ffi()
    })
}

/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_run_load(dir: *const c_char, out: *mut *mut PcgRun) -> PcgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let run = GaRunResult::load(&PathBuf::from(string(dir, "dir")?)).ffi()?;
        *out = boxed(PcgRun(run));
        Ok(())
    })
}

/// Distil a run into a dataset.
///
/// # Safety
/// `run` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_dataset_build(run: *const PcgRun, out: *mut *mut PcgDataset) -> PcgStatus {
    guard(|| {
        let r = &deref(run, "run")?.0;
        let out = out_ptr(out, "out")?;
        *out = boxed(PcgDataset(build_dataset(r).ffi()?));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_dataset_free(dataset: *mut PcgDataset) {
    free(dataset)
}

/// Number of (state, action) pairs.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_dataset_len(dataset: *const PcgDataset, out: *mut usize) -> PcgStatus {
    guard(|| {
        let d = &deref(dataset, "dataset")?.0;
        *out_ptr(out, "out")? = d.len();
        Ok(())
    })
}

/// # Safety
/// `dataset` must be valid and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_dataset_save(dataset: *const PcgDataset, path: *const c_char) -> PcgStatus {
    guard(|| {
        let d = &deref(dataset, "dataset")?.0;
        d.save(&PathBuf::from(string(path, "path")?)).ffi()
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_dataset_load(path: *const c_char, out: *mut *mut PcgDataset) -> PcgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = PolicyDataset::load(&PathBuf::from(string(path, "path")?)).ffi()?;
        *out = boxed(PcgDataset(d));
        Ok(())
    })
}

fn policy_from(kind: DomainKind, dataset: &PolicyDataset, config: PolicyConfig) -> pcgbc::Result<PcgPolicy> {
    config.validate()?;
    let domain = AnyDomain::new(kind, dataset.width())?;
    let index = NeighbourIndex::build(dataset, config.metric, config.backend)?;
    Ok(PcgPolicy { domain, index, config })
}

/// Policy over `dataset` with its domain's default settings. The dataset
/// handle stays owned by the caller.
///
/// # Safety
/// `dataset` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_policy_new(dataset: *const PcgDataset, out: *mut *mut PcgPolicy) -> PcgStatus {
    guard(|| {
        let d = &deref(dataset, "dataset")?.0;
        let out = out_ptr(out, "out")?;
        let kind = DomainKind::from_glyphs(&d.alphabet().glyphs())
            .ok_or_else(|| (PcgStatus::InvalidArgument, "dataset alphabet matches no domain".to_string()))?;
        *out = boxed(policy_from(kind, d, kind.policy_defaults()).ffi()?);
        Ok(())
    })
}

/// Open a `policy.json` or a bare dataset file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_policy_open(path: *const c_char, out: *mut *mut PcgPolicy) -> PcgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (kind, d, cfg) = PolicyArtifact::open(&PathBuf::from(string(path, "path")?)).ffi()?;
        *out = boxed(policy_from(kind, &d, cfg).ffi()?);
        Ok(())
    })
}

/// Override the step and restart limits.
///
/// # Safety
/// `policy` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_policy_set_limits(policy: *mut PcgPolicy, max_steps: usize, max_restarts: usize) -> PcgStatus {
    guard(|| {
        let p = out_ptr(policy, "policy")?;
        let cfg = PolicyConfig {
            max_steps,
            max_restarts,
            ..p.config.clone()
        };
        cfg.validate().ffi()?;
        p.config = cfg;
        Ok(())
    })
}

/// Generate one acceptable level. Returns `MethodFailed` when every restart
/// is exhausted.
///
/// # Safety
/// `policy` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_policy_generate(
    policy: *const PcgPolicy,
    seed: u64,
    index: u64,
    out: *mut *mut PcgLevel,
) -> PcgStatus {
    guard(|| {
        let p = deref(policy, "policy")?;
        let out = out_ptr(out, "out")?;
        let mut rng = derive_rng(seed, "generate", &[index]);
        let g = with_domain!(&p.domain, d => generate_level(&p.index, d, &p.config, &mut rng)).ffi()?;
        *out = boxed(PcgLevel(g.level));
        Ok(())
    })
}

/// # Safety
/// `policy` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pcgbc_policy_free(policy: *mut PcgPolicy) {
    free(policy)
}
