//! C interface to `rilab`.
//!
//! Every function returns a [`RilabStatus`]. On failure the message is kept
//! per thread and read with [`rilab_last_error`]. Kernels and samples are
//! opaque handles owned by the caller and released with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rilab::interlace::container::{dump_json, read_container, write_container, StoredSample};
use rilab::interlace::{sample_interlacement, ForwardPolicy, InterlacementSample, SampleOptions, WindowKernel};
use rilab::lattice::Point;
use rilab::potential::{capacity_auto, escape_probability_hypercube, green, GreenTable};
use rilab::renorm::{epsilon_error, trigger_certificate, Verdict};
use rilab::rng::stream_rng;
use rilab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RilabStatus {
    Ok = 0,
    InvalidArgument = 1,
    Numerical = 2,
    Guard = 3,
    NullPointer = 4,
    Panic = 5,
    Io = 6,
}

impl From<&Error> for RilabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io(_) => RilabStatus::Io,
            _ => match e.exit_code() {
                2 => RilabStatus::Numerical,
                3 => RilabStatus::Guard,
                _ => RilabStatus::InvalidArgument,
            },
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<(), (RilabStatus, String)>) -> RilabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RilabStatus::Ok,
        Ok(Err((status, msg))) => {
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
            RilabStatus::Panic
        }
    }
}

type FfiResult<T> = Result<T, (RilabStatus, String)>;

fn lib<T>(r: rilab::Result<T>) -> FfiResult<T> {
    r.map_err(|e| (RilabStatus::from(&e), e.to_string()))
}

fn null(name: &str) -> (RilabStatus, String) {
    (RilabStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl Into<String>) -> (RilabStatus, String) {
    (RilabStatus::InvalidArgument, msg.into())
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn coords<'a>(p: *const i32, len: usize, name: &str) -> FfiResult<&'a [i32]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path_arg(p: *const c_char) -> FfiResult<String> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p).to_str().map(str::to_owned).map_err(|_| invalid("path is not UTF-8"))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn rilab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rilab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rilab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Green function `G(0, x)` of simple random walk on `Z^d`.
///
/// # Safety
/// `x` points to `d` integers; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_green(d: usize, x: *const i32, tol: f64, out: *mut f64) -> RilabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let x = coords(x, d, "x")?;
        *out = lib(green(&Point::new(x.to_vec()), d, tol))?;
        Ok(())
    })
}

/// Capacity of the set of `n` points given row-major in `points`.
///
/// # Safety
/// `points` holds `n * d` integers; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_capacity(
    d: usize,
    points: *const i32,
    n: usize,
    tol: f64,
    out: *mut f64,
) -> RilabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let flat = coords(points, n * d, "points")?;
        let set: Vec<Point> = flat.chunks(d).map(|c| Point::new(c.to_vec())).collect();
        let mut table = lib(GreenTable::new(d, tol))?;
        *out = lib(capacity_auto(&set, &mut table))?.capacity;
        Ok(())
    })
}

/// Probability that walk from a corner of `{0,1}^d` never returns to the cube.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_escape_probability(d: usize, tol: f64, out: *mut f64) -> RilabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lib(escape_probability_hypercube(d, tol))?.p_esc;
        Ok(())
    })
}

/// Decoupling error `ε(u, L0, l0)` in dimension `d`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_epsilon_error(u: f64, base: u32, l0: u32, d: usize, out: *mut f64) -> RilabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lib(epsilon_error(u, base, l0, d))?;
        Ok(())
    })
}

/// Trigger certificate: `*pass` is 1 when `(2l0+1)^{2d}(p+ε1+ε2) < 1/2`,
/// `*lhs` receives the left-hand side.
///
/// # Safety
/// `pass` and `lhs` are writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_trigger(
    p_upper: f64,
    l0: u32,
    eps1: f64,
    eps2: f64,
    d: usize,
    pass: *mut i32,
    lhs: *mut f64,
) -> RilabStatus {
    guard(|| {
        let pass = out_ref(pass, "pass")?;
        let lhs = out_ref(lhs, "lhs")?;
        let r = lib(trigger_certificate(p_upper, l0, eps1, eps2, d, 0))?;
        *pass = (r.verdict == Verdict::Pass) as i32;
        *lhs = r.lhs;
        Ok(())
    })
}

/// Sampling kernel for the window `B(0, radius)` in `Z^d`.
pub struct RilabKernel {
    inner: WindowKernel,
}

/// One interlacement sample restricted to a window.
pub struct RilabSample {
    inner: InterlacementSample,
    seed: u64,
    stream: u64,
}

/// Builds a kernel with exact re-entry. Release with [`rilab_kernel_free`].
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_kernel_new(d: usize, radius: u32, tol: f64, out: *mut *mut RilabKernel) -> RilabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let inner = lib(WindowKernel::new(d, radius, ForwardPolicy::Exact, tol))?;
        *out = Box::into_raw(Box::new(RilabKernel { inner }));
        Ok(())
    })
}

/// # Safety
/// `k` comes from [`rilab_kernel_new`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rilab_kernel_free(k: *mut RilabKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Capacity of the window box.
///
/// # Safety
/// `k` is a live kernel; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_kernel_capacity(k: *const RilabKernel, out: *mut f64) -> RilabStatus {
    guard(|| {
        let k = k.as_ref().ok_or_else(|| null("kernel"))?;
        *out_ref(out, "out")? = k.inner.capacity().capacity;
        Ok(())
    })
}

/// Number of sites in the window, `(2 radius + 1)^d`.
///
/// # Safety
/// `k` is a live kernel; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_kernel_sites(k: *const RilabKernel, out: *mut usize) -> RilabStatus {
    guard(|| {
        let k = k.as_ref().ok_or_else(|| null("kernel"))?;
        *out_ref(out, "out")? = k.inner.spec().len();
        Ok(())
    })
}

/// Samples at level `u` on stream `stream` of `seed`. Equal arguments give
/// equal samples. Release with [`rilab_sample_free`].
///
/// # Safety
/// `k` is a live kernel; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_sample_new(
    k: *const RilabKernel,
    u: f64,
    seed: u64,
    stream: u64,
    out: *mut *mut RilabSample,
) -> RilabStatus {
    guard(|| {
        let k = k.as_ref().ok_or_else(|| null("kernel"))?;
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let mut rng = stream_rng(seed, stream);
        let inner = lib(sample_interlacement(&k.inner, u, &mut rng, SampleOptions::default()))?;
        *out = Box::into_raw(Box::new(RilabSample { inner, seed, stream }));
        Ok(())
    })
}

/// # Safety
/// `s` comes from [`rilab_sample_new`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rilab_sample_free(s: *mut RilabSample) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of trajectories that hit the window.
///
/// # Safety
/// `s` is a live sample; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_sample_trajectories(s: *const RilabSample, out: *mut u64) -> RilabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sample"))?;
        *out_ref(out, "out")? = s.inner.n_k;
        Ok(())
    })
}

/// Writes one byte per site (1 occupied, 0 vacant), sites in row-major
/// order with the last coordinate fastest. `len` must equal the window's
/// site count.
///
/// # Safety
/// `s` is a live sample; `buf` holds `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rilab_sample_occupancy(s: *const RilabSample, buf: *mut u8, len: usize) -> RilabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sample"))?;
        let occ = &s.inner.occupancy;
        if len != occ.len() {
            return Err(invalid(format!("buffer of {len} bytes, window of {} sites", occ.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let buf = std::slice::from_raw_parts_mut(buf, len);
        for (i, b) in buf.iter_mut().enumerate() {
            *b = occ.get(i) as u8;
        }
        Ok(())
    })
}

/// Whether the site `x` (d integers) is occupied.
///
/// # Safety
/// `s` is a live sample; `x` points to `d` integers; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_sample_is_occupied(s: *const RilabSample, x: *const i32, out: *mut i32) -> RilabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sample"))?;
        let out = out_ref(out, "out")?;
        let w = &s.inner.window;
        let x = coords(x, w.dim, "x")?;
        let ix = rilab::lattice::BoxIndexer::new(w.dim, w.radius);
        let i = ix.index_of(x).ok_or_else(|| (RilabStatus::Guard, format!("{x:?} outside the window")))?;
        *out = s.inner.occupancy.get(i) as i32;
        Ok(())
    })
}

/// Writes the sample in the binary container format.
///
/// # Safety
/// `s` is a live sample; `path` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rilab_sample_write(s: *const RilabSample, path: *const c_char) -> RilabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sample"))?;
        let path = path_arg(path)?;
        let stored = StoredSample::from_sample(&s.inner, s.seed, s.stream);
        let mut f = lib(std::fs::File::create(&path).map_err(Error::from))?;
        lib(write_container(&mut f, &stored))
    })
}

/// Reads a container file and returns it as JSON in `*out`; free with
/// [`rilab_string_free`].
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_container_to_json(path: *const c_char, out: *mut *mut c_char) -> RilabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        let mut f = lib(std::fs::File::open(&path).map_err(Error::from))?;
        let stored = lib(read_container(&mut f))?;
        let json = lib(dump_json(&stored))?;
        *out = CString::new(json).map_err(|_| invalid("JSON contains NUL"))?.into_raw();
        Ok(())
    })
}
