//! C ABI over the mixmax core.
//!
//! Every function returns an [`MxStatus`]; results go through out-pointers.
//! Handles are opaque and must be released with the matching `*_free`.
//! The message of the most recent failure on the calling thread is
//! available from [`mx_last_error_message`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mixmax::maximal::{maximal_field, Scope};
use mixmax::mesh::{DomainBox, DyadicCube, MeshFn};
use mixmax::young::{ratio_lemma_f, YoungFn};
use mixmax::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Parse = 4,
    Panic = 5,
}

/// A Young function.
pub struct MxYoung(YoungFn);

/// A piecewise-constant function on a dyadic mesh.
pub struct MxMesh(MeshFn);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> MxStatus {
    match e {
        Error::Domain(_) | Error::EmptyIntersection | Error::NotInFr(_) | Error::NotEquivalent(_) => MxStatus::Domain,
        Error::Config(_) | Error::Format(_) | Error::Json(_) | Error::Csv(_) => MxStatus::Parse,
        _ => MxStatus::InvalidArgument,
    }
}

struct Fail(MxStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MxStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            MxStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            MxStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Parses a JSON descriptor such as `{"kind":"llogl","r":1,"delta":1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_young_from_json(json: *const c_char, out: *mut *mut MxYoung) -> MxStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(MxStatus::Parse, format!("descriptor is not UTF-8: {e}")))?;
        let phi: YoungFn =
            serde_json::from_str(text).map_err(|e| Fail(MxStatus::Parse, format!("descriptor: {e}")))?;
        phi.validate()?;
        store(out, Box::into_raw(Box::new(MxYoung(phi))))
    })
}

/// # Safety
/// `phi` must come from [`mx_young_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mx_young_free(phi: *mut MxYoung) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// # Safety
/// `phi` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_young_eval(phi: *const MxYoung, t: f64, out: *mut f64) -> MxStatus {
    guard(|| {
        let phi = deref(phi, "phi")?;
        if !(t >= 0.0) {
            return Err(Fail(MxStatus::Domain, format!("argument {t} must be nonnegative")));
        }
        store(out, phi.0.value(t))
    })
}

/// # Safety
/// `phi` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_young_gen_inverse(phi: *const MxYoung, t: f64, out: *mut f64) -> MxStatus {
    guard(|| {
        let phi = deref(phi, "phi")?;
        store(out, phi.0.gen_inverse(t)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mx_ratio_lemma_f(x: f64, out: *mut f64) -> MxStatus {
    guard(|| store(out, ratio_lemma_f(x)?))
}

/// Builds a mesh function on the box `origin + [0, 2^k)^n` with `2^mesh_level`
/// cells per side. `values` holds one value per cell in row-major order.
///
/// # Safety
/// `origin` must point to `n` doubles, `values` to `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_mesh_new(
    n: usize,
    origin: *const f64,
    k: i32,
    mesh_level: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut MxMesh,
) -> MxStatus {
    guard(|| {
        if origin.is_null() {
            return Err(null("origin"));
        }
        if values.is_null() && len > 0 {
            return Err(null("values"));
        }
        if n != 1 && n != 2 {
            return Err(Fail(MxStatus::InvalidArgument, format!("dimension {n} not supported")));
        }
        let origin = std::slice::from_raw_parts(origin, n).to_vec();
        let vals = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        let f = MeshFn::new(DomainBox::new(n, origin, k)?, mesh_level, vals)?;
        store(out, Box::into_raw(Box::new(MxMesh(f))))
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mx_mesh_free(f: *mut MxMesh) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_mesh_len(f: *const MxMesh, out: *mut usize) -> MxStatus {
    guard(|| store(out, deref(f, "mesh")?.0.values().len()))
}

/// Copies the cell values into `buf`, which must hold exactly `mx_mesh_len` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mx_mesh_values(f: *const MxMesh, buf: *mut f64, len: usize) -> MxStatus {
    guard(|| {
        let vals = deref(f, "mesh")?.0.values();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != vals.len() {
            return Err(Fail(
                MxStatus::InvalidArgument,
                format!("buffer holds {len} values, mesh has {}", vals.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(vals);
        Ok(())
    })
}

/// Luxemburg norm of `f` over the dyadic cube `(grid_id, level, coords)`.
///
/// # Safety
/// Handles must be live, `coords` must point to two integers, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_lux_norm(
    f: *const MxMesh,
    phi: *const MxYoung,
    grid_id: u32,
    level: i32,
    coords: *const i64,
    out: *mut f64,
) -> MxStatus {
    guard(|| {
        let f = deref(f, "mesh")?;
        let phi = deref(phi, "phi")?;
        if coords.is_null() {
            return Err(null("coords"));
        }
        let c = std::slice::from_raw_parts(coords, 2);
        let q = DyadicCube::new(grid_id, level, [c[0], c[1]]);
        store(out, mixmax::luxemburg::lux_norm(&f.0, &q, &phi.0)?.norm)
    })
}

/// Fractional Orlicz maximal function. A negative `grid` means all shifted grids.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_maximal_field(
    f: *const MxMesh,
    phi: *const MxYoung,
    gamma: f64,
    grid: i32,
    out: *mut *mut MxMesh,
) -> MxStatus {
    guard(|| {
        let f = deref(f, "mesh")?;
        let phi = deref(phi, "phi")?;
        let scope = if grid < 0 { Scope::All } else { Scope::Grid(grid as u32) };
        let m = maximal_field(&f.0, &phi.0, gamma, scope)?;
        store(out, Box::into_raw(Box::new(MxMesh(m))))
    })
}

/// Copies the last error message of this thread, NUL-terminated and truncated
/// to `len` bytes. Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mx_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}
