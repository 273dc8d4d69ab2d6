//! C ABI over `pottslab`.
//!
//! Every fallible function returns a [`PottsStatus`]; on failure a message is
//! available from [`potts_last_error`] on the same thread. Trees are opaque
//! handles created from JSON documents and released with [`potts_tree_free`].
//! Output buffers are caller-allocated; a buffer shorter than required yields
//! `POTTS_STATUS_BUFFER_TOO_SMALL` and leaves it untouched.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pottslab::bounds::{
    alpha_ssm, alpha_ssm_extrapolated, alpha_wsm, bound_b, bound_k, bound_m, local_weight, SearchConfig,
};
use pottslab::tree::io::{parse_tree_document, TreeInstance};
use pottslab::tree::{brute_force_marginals, marginals_dp};
use pottslab::{apply_f, jacobian_f, PottsError, PottsParams, Segment, SqrtRatioVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PottsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    InvalidTree = 3,
    OutOfRange = 4,
    InvalidVector = 5,
    Precondition = 6,
    Parse = 7,
    TooLarge = 8,
    BufferTooSmall = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

impl From<&PottsError> for PottsStatus {
    fn from(e: &PottsError) -> Self {
        match e {
            PottsError::InvalidParams(_) => PottsStatus::InvalidParams,
            PottsError::InvalidTree(_) | PottsError::DegreeBound { .. } => PottsStatus::InvalidTree,
            PottsError::VertexOutOfRange { .. } | PottsError::ColorOutOfRange { .. } | PottsError::FixedVertex(_) => {
                PottsStatus::OutOfRange
            }
            PottsError::InvalidVector(_) => PottsStatus::InvalidVector,
            PottsError::Precondition(_) => PottsStatus::Precondition,
            PottsError::Parse(_) => PottsStatus::Parse,
            PottsError::TooManyFreeVertices { .. } | PottsError::TreeTooLarge { .. } => PottsStatus::TooLarge,
        }
    }
}

/// Model parameters: `q` colors, edge weight `w`, branching bound `d`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PottsParameters {
    pub q: usize,
    pub w: f64,
    pub d: usize,
}

/// A tree with its boundary condition and parameters.
pub struct PottsTree {
    inner: TreeInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PottsStatus, String);

impl From<PottsError> for Failure {
    fn from(e: PottsError) -> Self {
        Failure(PottsStatus::from(&e), e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> PottsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PottsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PottsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PottsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out(out: *mut f64, len: usize, values: &[f64]) -> Outcome {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < values.len() {
        return Err(Failure(
            PottsStatus::BufferTooSmall,
            format!("output buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn write_scalar(out: *mut f64, value: f64) -> Outcome {
    write_out(out, 1, &[value])
}

unsafe fn params_of(p: *const PottsParameters) -> Result<PottsParams, Failure> {
    let p = deref(p, "params")?;
    Ok(PottsParams::new(p.q, p.w, p.d)?)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn potts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn potts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a tree document:
/// `{"q": 3, "w": 0.5, "root": 0, "edges": [[0, 1]], "boundary": {"1": 2}}`
/// with 1-based boundary colors. On success `*out` owns a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn potts_tree_from_json(json: *const c_char, out: *mut *mut PottsTree) -> PottsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Failure(PottsStatus::InvalidUtf8, e.to_string()))?;
        let inner = parse_tree_document(text)?;
        *out = Box::into_raw(Box::new(PottsTree { inner }));
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `tree` must come from [`potts_tree_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn potts_tree_free(tree: *mut PottsTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn potts_tree_vertex_count(tree: *const PottsTree, out: *mut usize) -> PottsStatus {
    guard(|| {
        let t = deref(tree, "tree")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = t.inner.tree.vertex_count();
        Ok(())
    })
}

/// Parameters the tree document was loaded with.
///
/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn potts_tree_params(tree: *const PottsTree, out: *mut PottsParameters) -> PottsStatus {
    guard(|| {
        let t = deref(tree, "tree")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &t.inner.params;
        *out = PottsParameters { q: p.q(), w: p.w(), d: p.d() };
        Ok(())
    })
}

/// Marginals of free vertex `vertex` by the tree recursion; `out` gets `q`
/// values.
///
/// # Safety
/// `tree` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn potts_tree_marginals(
    tree: *const PottsTree,
    vertex: usize,
    out: *mut f64,
    out_len: usize,
) -> PottsStatus {
    guard(|| {
        let t = &deref(tree, "tree")?.inner;
        let m = marginals_dp(&t.tree, &t.boundary, &t.params, vertex)?;
        write_out(out, out_len, &m)
    })
}

/// Same as [`potts_tree_marginals`] by exhaustive enumeration; at most 16
/// free vertices.
///
/// # Safety
/// `tree` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn potts_tree_marginals_exact(
    tree: *const PottsTree,
    vertex: usize,
    out: *mut f64,
    out_len: usize,
) -> PottsStatus {
    guard(|| {
        let t = &deref(tree, "tree")?.inner;
        let m = brute_force_marginals(&t.tree, &t.boundary, &t.params, vertex)?;
        write_out(out, out_len, &m)
    })
}

/// `F(x)_i = sqrt(S_i(x) / S(x))` for a positive vector of length `q`.
///
/// # Safety
/// `x` must hold `q` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn potts_apply_f(
    params: *const PottsParameters,
    x: *const f64,
    q: usize,
    out: *mut f64,
    out_len: usize,
) -> PottsStatus {
    guard(|| {
        let p = params_of(params)?;
        let y = apply_f(slice(x, q, "x")?, &p)?;
        write_out(out, out_len, y.as_slice())
    })
}

/// Dense Jacobian of `F` at `x`, row-major, `q * q` values.
///
/// # Safety
/// `x` must hold `q` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn potts_jacobian(
    params: *const PottsParameters,
    x: *const f64,
    q: usize,
    out: *mut f64,
    out_len: usize,
) -> PottsStatus {
    guard(|| {
        let p = params_of(params)?;
        let dense: Vec<f64> = jacobian_f(slice(x, q, "x")?, &p)?.to_dense().concat();
        write_out(out, out_len, &dense)
    })
}

/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn potts_bound_m(params: *const PottsParameters, out: *mut f64) -> PottsStatus {
    guard(|| write_scalar(out, bound_m(&params_of(params)?)?))
}

/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn potts_bound_b(params: *const PottsParameters, ell: usize, out: *mut f64) -> PottsStatus {
    guard(|| write_scalar(out, bound_b(ell, &params_of(params)?)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn potts_bound_k(a: f64, out: *mut f64) -> PottsStatus {
    guard(|| write_scalar(out, bound_k(a)?))
}

/// Reads only `q` and `d`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn potts_alpha_wsm(params: *const PottsParameters, out: *mut f64) -> PottsStatus {
    guard(|| write_scalar(out, alpha_wsm(&params_of(params)?)?.alpha))
}

/// Closed form; reads only `q` and `d`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn potts_alpha_ssm(params: *const PottsParameters, out: *mut f64) -> PottsStatus {
    guard(|| write_scalar(out, alpha_ssm(&params_of(params)?)?))
}

/// Numeric solve, also where the closed form does not apply.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn potts_alpha_ssm_extrapolated(params: *const PottsParameters, out: *mut f64) -> PottsStatus {
    guard(|| write_scalar(out, alpha_ssm_extrapolated(&params_of(params)?)?))
}

/// Local weight `λ` on the segment between positive vectors `x` and `y`.
///
/// # Safety
/// `x` and `y` must hold `q` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn potts_local_weight(
    params: *const PottsParameters,
    x: *const f64,
    y: *const f64,
    q: usize,
    out: *mut f64,
) -> PottsStatus {
    guard(|| {
        let p = params_of(params)?;
        let x = SqrtRatioVector::new(slice(x, q, "x")?.to_vec())?;
        let y = SqrtRatioVector::new(slice(y, q, "y")?.to_vec())?;
        let lw = local_weight(&Segment::new(x, y)?, &p, SearchConfig::default())?;
        write_scalar(out, lw.value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(PottsStatus::from(&PottsError::Parse("x".into())), PottsStatus::Parse);
        assert_eq!(PottsStatus::from(&PottsError::FixedVertex(1)), PottsStatus::OutOfRange);
        assert_eq!(PottsStatus::from(&PottsError::TreeTooLarge { needed: 9, cap: 1 }), PottsStatus::TooLarge);
    }

    #[test]
    fn panics_are_caught() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, PottsStatus::Panic);
        let msg = unsafe { CStr::from_ptr(potts_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
        assert_eq!(guard(|| Ok(())), PottsStatus::Ok);
        assert!(potts_last_error().is_null());
    }
}
