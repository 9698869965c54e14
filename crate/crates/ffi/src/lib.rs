//! C ABI for the `wasm-taint` interpreter.
//!
//! Modules and instances are opaque handles. Every fallible call returns a
//! [`WtStatus`]; on anything other than `WT_OK` a message is available from
//! [`wt_last_error`] on the same thread until the next failing call.
//!
//! ```c
//! WtModule *m; WtInstance *inst;
//! wt_module_decode(bytes, len, &m);
//! wt_instance_new(m, 0, &inst);
//! uint8_t types[] = {WT_I32}; int64_t vals[] = {5};
//! wt_invoke(inst, "fact", types, vals, 1, 1u);   /* argument 0 tainted */
//! wt_result(inst, 0, &ty, &value, &direct, &indirect);
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use wasm_taint::runtime::Config;
use wasm_taint::{decode_module, DecodeError, Instance, Invocation, InvokeError, ModuleDef, SourceId, ValType, Value};

/// Result code of every fallible call.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WtStatus {
    WT_OK = 0,
    WT_NULL_ARGUMENT = 1,
    WT_INVALID_UTF8 = 2,
    /// Bad magic, unsupported version, malformed section or unknown opcode.
    WT_MALFORMED = 3,
    /// Well-formed but uses an unsupported feature such as imports.
    WT_UNSUPPORTED = 4,
    WT_EXPORT_NOT_FOUND = 5,
    WT_ARITY_MISMATCH = 6,
    WT_TYPE_MISMATCH = 7,
    /// Execution or instantiation trapped; the message starts with the trap's short name.
    WT_TRAP = 8,
    /// Unknown type tag or a taint mask bit beyond the argument count.
    WT_BAD_ARGUMENT = 9,
    /// No completed invocation, or result index out of range.
    WT_NO_RESULT = 10,
    WT_PANIC = 11,
}

pub const WT_I32: u8 = 0;
pub const WT_I64: u8 = 1;

/// Decoded module.
pub struct WtModule(Arc<ModuleDef>);

/// Instance plus the outcome of its most recent successful invocation.
pub struct WtInstance {
    inner: Instance,
    last: Option<Invocation>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: WtStatus, msg: impl Into<String>) -> WtStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> WtStatus) -> WtStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(WtStatus::WT_PANIC, "internal panic"))
}

fn decode_status(e: &DecodeError) -> WtStatus {
    match e {
        DecodeError::Unsupported(_) => WtStatus::WT_UNSUPPORTED,
        _ => WtStatus::WT_MALFORMED,
    }
}

fn invoke_status(e: &InvokeError) -> (WtStatus, String) {
    match e {
        InvokeError::ExportNotFound(_) => (WtStatus::WT_EXPORT_NOT_FOUND, e.to_string()),
        InvokeError::ArityMismatch { .. } => (WtStatus::WT_ARITY_MISMATCH, e.to_string()),
        InvokeError::TypeMismatch { .. } => (WtStatus::WT_TYPE_MISMATCH, e.to_string()),
        InvokeError::Trap(t) => (WtStatus::WT_TRAP, format!("{}: {t}", t.reason())),
    }
}

/// Message for the last failing call on this thread. Valid until the next
/// failing call; never null.
#[no_mangle]
pub extern "C" fn wt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Decodes `len` bytes into a new module stored in `*out`.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_module_decode(bytes: *const u8, len: usize, out: *mut *mut WtModule) -> WtStatus {
    guard(|| {
        if bytes.is_null() || out.is_null() {
            return fail(WtStatus::WT_NULL_ARGUMENT, "null argument");
        }
        let input = std::slice::from_raw_parts(bytes, len);
        match decode_module(input) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(WtModule(Arc::new(m))));
                WtStatus::WT_OK
            }
            Err(e) => fail(decode_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `module` must be null or a handle from [`wt_module_decode`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wt_module_free(module: *mut WtModule) {
    if !module.is_null() {
        drop(Box::from_raw(module));
    }
}

/// Instantiates `module`, running its start function. A `max_call_depth` of
/// 0 selects the default. The module handle stays owned by the caller and
/// may be freed independently of the instance.
///
/// # Safety
/// `module` must be a live module handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_instance_new(
    module: *const WtModule,
    max_call_depth: usize,
    out: *mut *mut WtInstance,
) -> WtStatus {
    guard(|| {
        if module.is_null() || out.is_null() {
            return fail(WtStatus::WT_NULL_ARGUMENT, "null argument");
        }
        let mut config = Config::default();
        if max_call_depth > 0 {
            config.max_call_depth = max_call_depth;
        }
        match Instance::with_config((*module).0.clone(), config) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(WtInstance { inner, last: None }));
                WtStatus::WT_OK
            }
            Err(t) => fail(WtStatus::WT_TRAP, format!("{}: {t}", t.reason())),
        }
    })
}

/// # Safety
/// `instance` must be null or a handle from [`wt_instance_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wt_instance_free(instance: *mut WtInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Invokes the export `name` with `nargs` arguments. `types[i]` is
/// [`WT_I32`] or [`WT_I64`]; i32 arguments take the low 32 bits of
/// `values[i]`. Bit `i` of `taint_mask` marks argument `i` as a taint source.
/// On success the results replace those of any earlier invocation.
///
/// # Safety
/// `instance` must be a live handle, `name` a NUL-terminated string, and
/// `types`/`values` must each point to `nargs` elements (may be null when
/// `nargs` is 0).
#[no_mangle]
pub unsafe extern "C" fn wt_invoke(
    instance: *mut WtInstance,
    name: *const c_char,
    types: *const u8,
    values: *const i64,
    nargs: usize,
    taint_mask: u64,
) -> WtStatus {
    guard(|| {
        if instance.is_null() || name.is_null() || (nargs > 0 && (types.is_null() || values.is_null())) {
            return fail(WtStatus::WT_NULL_ARGUMENT, "null argument");
        }
        let inst = &mut *instance;
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            return fail(WtStatus::WT_INVALID_UTF8, "export name is not UTF-8");
        };
        if nargs < 64 && taint_mask >> nargs != 0 {
            return fail(WtStatus::WT_BAD_ARGUMENT, format!("taint mask {taint_mask:#x} names a missing argument"));
        }
        let (types, values) = if nargs == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(types, nargs), std::slice::from_raw_parts(values, nargs))
        };
        let mut args = Vec::with_capacity(nargs);
        for (i, (&ty, &v)) in types.iter().zip(values).enumerate() {
            let value = match ty {
                WT_I32 => Value::i32(v as i32),
                WT_I64 => Value::i64(v),
                _ => return fail(WtStatus::WT_BAD_ARGUMENT, format!("argument {i}: unknown type tag {ty}")),
            };
            let tainted = taint_mask & (1u64 << i) != 0;
            args.push(match SourceId::new(i) {
                Some(id) if tainted => value.tainted_by(id),
                _ => value,
            });
        }
        match inst.inner.invoke(name, &args) {
            Ok(out) => {
                inst.last = Some(out);
                WtStatus::WT_OK
            }
            Err(e) => {
                let (status, msg) = invoke_status(&e);
                fail(status, msg)
            }
        }
    })
}

/// Number of results of the last successful invocation, or 0 if none.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wt_result_count(instance: *const WtInstance) -> usize {
    instance
        .as_ref()
        .and_then(|i| i.last.as_ref())
        .map_or(0, |l| l.results.len())
}

/// Reads result `index` of the last successful invocation. The value is
/// sign-extended to 64 bits. `direct`/`indirect` receive the source bit
/// masks of the result's taint label. Any out pointer may be null.
///
/// # Safety
/// `instance` must be a live handle; non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_result(
    instance: *const WtInstance,
    index: usize,
    ty: *mut u8,
    value: *mut i64,
    direct: *mut u64,
    indirect: *mut u64,
) -> WtStatus {
    guard(|| {
        let Some(inst) = instance.as_ref() else {
            return fail(WtStatus::WT_NULL_ARGUMENT, "null argument");
        };
        let Some(v) = inst.last.as_ref().and_then(|l| l.results.get(index)) else {
            return fail(WtStatus::WT_NO_RESULT, format!("no result {index}"));
        };
        let (tag, bits) = match v.ty() {
            ValType::I32 => (WT_I32, i64::from(v.as_i32())),
            ValType::I64 => (WT_I64, v.as_i64()),
            other => return fail(WtStatus::WT_TYPE_MISMATCH, format!("result {index} has type {other}")),
        };
        let label = v.taint();
        if let Some(p) = ty.as_mut() {
            *p = tag;
        }
        if let Some(p) = value.as_mut() {
            *p = bits;
        }
        if let Some(p) = direct.as_mut() {
            *p = label.direct_mask();
        }
        if let Some(p) = indirect.as_mut() {
            *p = label.indirect_mask();
        }
        WtStatus::WT_OK
    })
}

/// JSON taint report of the last successful invocation, or null if there is
/// none. Release with [`wt_string_free`].
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wt_report_json(instance: *const WtInstance) -> *mut c_char {
    let Some(last) = instance.as_ref().and_then(|i| i.last.as_ref()) else {
        set_error("no completed invocation");
        return std::ptr::null_mut();
    };
    match CString::new(last.report.to_json()) {
        Ok(s) => s.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Number of linear-memory bytes whose shadow label is non-empty.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wt_tainted_bytes(instance: *const WtInstance) -> u64 {
    instance
        .as_ref()
        .map_or(0, |i| i.inner.memory().shadow().tainted_bytes() as u64)
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
