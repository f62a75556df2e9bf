//! C ABI for `dmmcodes`.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_from_*` function and released by the matching `*_free`.
//! Functions return a [`DmmStatus`]; on failure a message for the calling
//! thread is available through [`dmm_last_error_message`]. Strings go out
//! through caller-provided buffers: the required size (including the
//! terminating NUL) is always written to `needed`, and
//! [`DmmStatus::BufferTooSmall`] is returned if `len` is not enough.
//!
//! Field elements are their dense indices (`uint32_t`); matrices are
//! row-major.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dmmcodes::codec::{build_system, matmul, CodecError, CodedProduct, InterpolationSystem, Matrix, WorkerResponse};
use dmmcodes::constructions::{ConstructionError, Solution};
use dmmcodes::exponents::{total, ExponentError, DEFAULT_LIMIT};
use dmmcodes::field::{Field, FieldError};
use dmmcodes::simulator::{run, ConstructionSpec, SimConfig, SimError, SimReport};
use dmmcodes::tables::{check, TableId};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    Infeasible = 4,
    InsufficientResponses = 5,
    RankDeficient = 6,
    Parse = 7,
    BufferTooSmall = 8,
    Mismatch = 9,
    Internal = 10,
}

/// A finite field.
pub struct DmmField(Field);

/// A pair of degree sets with their parameters.
pub struct DmmSolution(Solution);

/// A matrix over a finite field.
pub struct DmmMatrix(Matrix);

/// An encoded product `A·B` with its evaluation points and interpolation
/// system.
pub struct DmmCoder {
    coded: CodedProduct,
    system: InterpolationSystem,
}

/// The outcome of a simulation.
pub struct DmmReport(SimReport);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Fail(DmmStatus, String);

impl From<FieldError> for Fail {
    fn from(e: FieldError) -> Self {
        let s = match e {
            FieldError::Capacity { .. } => DmmStatus::Capacity,
            FieldError::Parse(_) => DmmStatus::Parse,
            _ => DmmStatus::InvalidArgument,
        };
        Fail(s, e.to_string())
    }
}

impl From<ExponentError> for Fail {
    fn from(e: ExponentError) -> Self {
        let s = match e {
            ExponentError::Capacity { .. } => DmmStatus::Capacity,
            ExponentError::Infeasible { .. } => DmmStatus::Infeasible,
            ExponentError::Parse(_) => DmmStatus::Parse,
            _ => DmmStatus::InvalidArgument,
        };
        Fail(s, e.to_string())
    }
}

impl From<ConstructionError> for Fail {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Exponent(inner) => inner.into(),
            ConstructionError::Capacity { .. } => Fail(DmmStatus::Capacity, e.to_string()),
            ConstructionError::Infeasible(_) => Fail(DmmStatus::Infeasible, e.to_string()),
            ConstructionError::Parse(_) => Fail(DmmStatus::Parse, e.to_string()),
            _ => Fail(DmmStatus::InvalidArgument, e.to_string()),
        }
    }
}

impl From<CodecError> for Fail {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Field(inner) => inner.into(),
            CodecError::Exponent(inner) => inner.into(),
            CodecError::InsufficientResponses { .. } => Fail(DmmStatus::InsufficientResponses, e.to_string()),
            CodecError::RankDeficient { .. } => Fail(DmmStatus::RankDeficient, e.to_string()),
            CodecError::Capacity { .. } => Fail(DmmStatus::Capacity, e.to_string()),
            CodecError::Parse(_) => Fail(DmmStatus::Parse, e.to_string()),
            _ => Fail(DmmStatus::InvalidArgument, e.to_string()),
        }
    }
}

impl From<SimError> for Fail {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Construction(inner) => inner.into(),
            SimError::Codec(inner) => inner.into(),
            SimError::Field(inner) => inner.into(),
            SimError::Infeasible { .. } => Fail(DmmStatus::Infeasible, e.to_string()),
            SimError::Config(_) => Fail(DmmStatus::Parse, e.to_string()),
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DmmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DmmStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(DmmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(DmmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn string_arg(p: *const c_char, what: &str) -> Result<String, Fail> {
    if p.is_null() {
        return Err(Fail(DmmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Fail(DmmStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn write_string(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || len < n {
        return Err(Fail(
            DmmStatus::BufferTooSmall,
            format!("buffer of {len} bytes, {n} needed"),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the calling thread's last error message into `buf`.
#[no_mangle]
pub unsafe extern "C" fn dmm_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> DmmStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match write_string(&msg, buf, len, needed) {
        Ok(()) => DmmStatus::Ok,
        Err(Fail(s, _)) => s,
    }
}

/// GF(p^e) with the default modulus.
#[no_mangle]
pub unsafe extern "C" fn dmm_field_new(p: u32, e: u32, out: *mut *mut DmmField) -> DmmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(DmmField(Field::new(p, e)?));
        Ok(())
    })
}

/// Parses `q`, `p^e` or `p^e/modulus`.
#[no_mangle]
pub unsafe extern "C" fn dmm_field_parse(spec: *const c_char, out: *mut *mut DmmField) -> DmmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec = string_arg(spec, "spec")?;
        *out = boxed(DmmField(spec.parse()?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_field_free(field: *mut DmmField) {
    free(field)
}

/// Field order `q`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dmm_field_order(field: *const DmmField) -> u64 {
    field.as_ref().map_or(0, |f| f.0.order())
}

fn check_elem(f: &Field, a: u32) -> Result<(), Fail> {
    if a as u64 >= f.order() {
        return Err(FieldError::OutOfRange {
            index: a as u64,
            q: f.order(),
        }
        .into());
    }
    Ok(())
}

#[no_mangle]
pub unsafe extern "C" fn dmm_field_add(field: *const DmmField, a: u32, b: u32, out: *mut u32) -> DmmStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        check_elem(f, a)?;
        check_elem(f, b)?;
        *out_ptr(out, "out")? = f.add(a, b);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_field_mul(field: *const DmmField, a: u32, b: u32, out: *mut u32) -> DmmStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        check_elem(f, a)?;
        check_elem(f, b)?;
        *out_ptr(out, "out")? = f.mul(a, b);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_field_inv(field: *const DmmField, a: u32, out: *mut u32) -> DmmStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        check_elem(f, a)?;
        *out_ptr(out, "out")? = f.inv(a)?;
        Ok(())
    })
}

/// Builds a construction from its descriptor, e.g.
/// `"sep-vars mprime=5 nprime=5 F=8"`, over the field of order `q`.
#[no_mangle]
pub unsafe extern "C" fn dmm_solution_new(q: u64, spec: *const c_char, out: *mut *mut DmmSolution) -> DmmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec: ConstructionSpec = string_arg(spec, "spec")?.parse()?;
        Field::of_order(q)?;
        *out = boxed(DmmSolution(spec.resolve(q)?));
        Ok(())
    })
}

/// Parses the solution text form.
#[no_mangle]
pub unsafe extern "C" fn dmm_solution_parse(text: *const c_char, out: *mut *mut DmmSolution) -> DmmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = string_arg(text, "text")?;
        *out = boxed(DmmSolution(Solution::from_text(&text)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_solution_free(sol: *mut DmmSolution) {
    free(sol)
}

/// Scalar parameters of a solution.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DmmSolutionInfo {
    pub q: u64,
    pub l: u64,
    /// 1 for matdot, 0 for polynomial splitting.
    pub is_matdot: u32,
    pub m: u64,
    /// Equal to `m` for matdot.
    pub n: u64,
    /// Measured footprint value of the sum set.
    pub fb: u64,
    /// `k + 1`.
    pub recovery_threshold: u64,
    /// `q^l`.
    pub workers: u64,
}

#[no_mangle]
pub unsafe extern "C" fn dmm_solution_info(sol: *const DmmSolution, out: *mut DmmSolutionInfo) -> DmmStatus {
    guard(|| {
        let s = &deref(sol, "solution")?.0;
        *out_ptr(out, "out")? = DmmSolutionInfo {
            q: s.q(),
            l: s.l() as u64,
            is_matdot: matches!(s, Solution::Matdot(_)) as u32,
            m: s.da().len() as u64,
            n: s.db().len() as u64,
            fb: s.fb().value,
            recovery_threshold: s.recovery_threshold(),
            workers: total(s.q(), s.l()),
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_solution_to_text(
    sol: *const DmmSolution,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> DmmStatus {
    guard(|| write_string(&deref(sol, "solution")?.0.to_text(), buf, len, needed))
}

/// Copies `rows * cols` entries from `data` (row-major).
#[no_mangle]
pub unsafe extern "C" fn dmm_matrix_new(
    field: *const DmmField,
    rows: usize,
    cols: usize,
    data: *const u32,
    out: *mut *mut DmmMatrix,
) -> DmmStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let out = out_ptr(out, "out")?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(DmmStatus::InvalidArgument, "dimensions overflow".into()))?;
        let entries = if n == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(deref(data, "data")?, n).to_vec()
        };
        *out = boxed(DmmMatrix(Matrix::from_vec(f, rows, cols, entries)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_matrix_free(m: *mut DmmMatrix) {
    free(m)
}

#[no_mangle]
pub unsafe extern "C" fn dmm_matrix_rows(m: *const DmmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

#[no_mangle]
pub unsafe extern "C" fn dmm_matrix_cols(m: *const DmmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies the entries into `data`, which must hold `rows * cols` values.
#[no_mangle]
pub unsafe extern "C" fn dmm_matrix_entries(m: *const DmmMatrix, data: *mut u32, len: usize) -> DmmStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        let src = m.entries();
        if len < src.len() {
            return Err(Fail(
                DmmStatus::BufferTooSmall,
                format!("buffer of {len} entries, {} needed", src.len()),
            ));
        }
        if !src.is_empty() {
            ptr::copy_nonoverlapping(src.as_ptr(), out_ptr(data, "data")?, src.len());
        }
        Ok(())
    })
}

/// Schoolbook product.
#[no_mangle]
pub unsafe extern "C" fn dmm_matrix_mul(a: *const DmmMatrix, b: *const DmmMatrix, out: *mut *mut DmmMatrix) -> DmmStatus {
    guard(|| {
        let (a, b) = (&deref(a, "a")?.0, &deref(b, "b")?.0);
        let out = out_ptr(out, "out")?;
        *out = boxed(DmmMatrix(matmul(a, b)?));
        Ok(())
    })
}

/// `1` if the matrices are equal (same field, shape and entries).
#[no_mangle]
pub unsafe extern "C" fn dmm_matrix_equal(a: *const DmmMatrix, b: *const DmmMatrix) -> u32 {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => (a.0 == b.0) as u32,
        _ => 0,
    }
}

/// Encodes `A·B` under `sol`, with one worker per point of `F_q^l`.
#[no_mangle]
pub unsafe extern "C" fn dmm_coder_new(
    sol: *const DmmSolution,
    a: *const DmmMatrix,
    b: *const DmmMatrix,
    out: *mut *mut DmmCoder,
) -> DmmStatus {
    guard(|| {
        let sol = &deref(sol, "solution")?.0;
        let (a, b) = (&deref(a, "a")?.0, &deref(b, "b")?.0);
        let out = out_ptr(out, "out")?;
        let coded = CodedProduct::new(sol, a, b)?;
        let field = a.field().clone();
        let points = field.enumerate_points(sol.l(), DEFAULT_LIMIT)?;
        let sum = sol.da().minkowski_sum_q(sol.db())?;
        let system = build_system(&field, &sum, points)?;
        *out = boxed(DmmCoder { coded, system });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_coder_free(c: *mut DmmCoder) {
    free(c)
}

/// Number of workers, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dmm_coder_workers(c: *const DmmCoder) -> usize {
    c.as_ref().map_or(0, |c| c.system.points().len())
}

/// `k + 1`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dmm_coder_threshold(c: *const DmmCoder) -> usize {
    c.as_ref().map_or(0, |c| c.coded.solution.recovery_threshold() as usize)
}

/// What worker `index` returns: `p_A(P_i) · p_B(P_i)`.
#[no_mangle]
pub unsafe extern "C" fn dmm_coder_work(c: *const DmmCoder, index: usize, out: *mut *mut DmmMatrix) -> DmmStatus {
    guard(|| {
        let c = deref(c, "coder")?;
        let out = out_ptr(out, "out")?;
        let point = c.system.points().get(index).ok_or_else(|| {
            Fail(
                DmmStatus::InvalidArgument,
                format!("worker {index} out of range"),
            )
        })?;
        *out = boxed(DmmMatrix(c.coded.payload(index, point)?.compute().product));
        Ok(())
    })
}

/// Recovers `A·B` from `count` responses: `indices[i]` is the worker that
/// produced `products[i]`.
#[no_mangle]
pub unsafe extern "C" fn dmm_coder_decode(
    c: *const DmmCoder,
    indices: *const usize,
    products: *const *const DmmMatrix,
    count: usize,
    out: *mut *mut DmmMatrix,
) -> DmmStatus {
    guard(|| {
        let c = deref(c, "coder")?;
        let out = out_ptr(out, "out")?;
        let mut responses = Vec::with_capacity(count);
        if count > 0 {
            let idx = std::slice::from_raw_parts(deref(indices, "indices")?, count);
            let prods = std::slice::from_raw_parts(deref(products, "products")?, count);
            for (&index, &p) in idx.iter().zip(prods) {
                responses.push(WorkerResponse {
                    index,
                    product: deref(p, "product")?.0.clone(),
                });
            }
        }
        let (m, _) = c.coded.decode(&c.system, &responses)?;
        *out = boxed(DmmMatrix(m));
        Ok(())
    })
}

/// Runs a simulation from the flat `key = value` config text.
#[no_mangle]
pub unsafe extern "C" fn dmm_simulate(config: *const c_char, out: *mut *mut DmmReport) -> DmmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = SimConfig::parse(&string_arg(config, "config")?)?;
        *out = boxed(DmmReport(run(&cfg)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmm_report_free(r: *mut DmmReport) {
    free(r)
}

/// `1` if the product was recovered and matched the oracle.
#[no_mangle]
pub unsafe extern "C" fn dmm_report_success(r: *const DmmReport) -> u32 {
    r.as_ref().map_or(0, |r| r.0.success as u32)
}

#[no_mangle]
pub unsafe extern "C" fn dmm_report_responses_used(r: *const DmmReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.responses_used)
}

#[no_mangle]
pub unsafe extern "C" fn dmm_report_summary(r: *const DmmReport, buf: *mut c_char, len: usize, needed: *mut usize) -> DmmStatus {
    guard(|| write_string(&deref(r, "report")?.0.summary(), buf, len, needed))
}

#[no_mangle]
pub unsafe extern "C" fn dmm_report_transcript(r: *const DmmReport, buf: *mut c_char, len: usize, needed: *mut usize) -> DmmStatus {
    guard(|| write_string(&deref(r, "report")?.0.transcript_text(), buf, len, needed))
}

/// Writes table `id` (`"T1"`..`"T8"`) as TSV. Returns `Mismatch` (after
/// writing) if it differs from the bundled copy.
#[no_mangle]
pub unsafe extern "C" fn dmm_table_tsv(id: *const c_char, buf: *mut c_char, len: usize, needed: *mut usize) -> DmmStatus {
    guard(|| {
        let id: TableId = string_arg(id, "id")?
            .parse()
            .map_err(|e| Fail(DmmStatus::InvalidArgument, e))?;
        let (table, diffs) = check(id)?;
        write_string(&table.to_tsv(), buf, len, needed)?;
        if !diffs.is_empty() {
            return Err(Fail(
                DmmStatus::Mismatch,
                format!("{} cell(s) differ from the bundled copy", diffs.len()),
            ));
        }
        Ok(())
    })
}
