//! C ABI for tilediff.
//!
//! Objects are opaque handles created by `td_*_new`/`td_*_read` functions and
//! released with the matching `td_*_free`. Every fallible call returns a
//! [`TdStatus`]; on failure, [`td_last_error`] describes what went wrong on
//! the calling thread. Row and column ids are 1-based, as in the file formats.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::str::FromStr;

use tilediff::convert::Background;
use tilediff::divergence::distance;
use tilediff::io::{read_dataset, read_tiles};
use tilediff::maxent::{fit, EntryModel, FitOptions};
use tilediff::{BinaryDataset, Error, FreqTile, Tile, TileSet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// Fit settings; see [`td_fit_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TdFitOptions {
    pub tolerance: f64,
    pub max_sweeps: usize,
}

pub struct TdDataset(BinaryDataset);

pub struct TdTileSet(TileSet);

pub struct TdModel(EntryModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return TdStatus::Ok,
        Ok(Err(Failure::Null(what))) => (TdStatus::NullPointer, format!("{what} is null")),
        Ok(Err(Failure::Input(msg))) => (TdStatus::InvalidInput, msg),
        Ok(Err(Failure::Core(e))) => {
            let status = match &e {
                Error::Io { .. } => TdStatus::Io,
                e if e.is_numerical() => TdStatus::Numerical,
                _ => TdStatus::InvalidInput,
            };
            (status, e.to_string())
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (TdStatus::Panic, format!("internal panic: {msg}"))
        }
    };
    set_error(msg);
    status
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Input(format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    let out = deref_mut(out, "output pointer")?;
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn options(p: *const TdFitOptions) -> Result<FitOptions, Failure> {
    let opts = match p.as_ref() {
        None => FitOptions::default(),
        Some(o) => FitOptions {
            tolerance: o.tolerance,
            max_sweeps: o.max_sweeps,
            ..FitOptions::default()
        },
    };
    opts.validate()?;
    Ok(opts)
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next `td_*` call on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn td_fit_options_default() -> TdFitOptions {
    let d = FitOptions::default();
    TdFitOptions {
        tolerance: d.tolerance,
        max_sweeps: d.max_sweeps,
    }
}

/// Reads a dataset file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_dataset_read(
    path: *const c_char,
    out: *mut *mut TdDataset,
) -> TdStatus {
    guard(|| {
        let path = string(path, "path")?;
        put(out, TdDataset(read_dataset(Path::new(path))?))
    })
}

/// Builds a dataset from `rows * cols` row-major bytes (nonzero means one).
///
/// # Safety
/// `cells` must point to `rows * cols` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn td_dataset_from_dense(
    rows: usize,
    cols: usize,
    cells: *const u8,
    out: *mut *mut TdDataset,
) -> TdStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure::Input("dataset size overflows".into()))?;
        let cells = slice(cells, len, "cells")?;
        let mut d = BinaryDataset::zeros(rows, cols)?;
        for (c, &v) in cells.iter().enumerate() {
            if v != 0 {
                d.set(c / cols + 1, c % cols + 1, true)?;
            }
        }
        put(out, TdDataset(d))
    })
}

/// # Safety
/// `data` must be a live dataset handle; `rows` and `cols` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn td_dataset_dims(
    data: *const TdDataset,
    rows: *mut usize,
    cols: *mut usize,
) -> TdStatus {
    guard(|| {
        let (n, m) = deref(data, "dataset")?.0.dims();
        *deref_mut(rows, "rows")? = n;
        *deref_mut(cols, "cols")? = m;
        Ok(())
    })
}

/// # Safety
/// `data` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn td_dataset_free(data: *mut TdDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Empty tile set over a `rows x cols` dataset.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_tileset_new(
    rows: usize,
    cols: usize,
    out: *mut *mut TdTileSet,
) -> TdStatus {
    guard(|| {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDataset { rows, cols }.into());
        }
        put(out, TdTileSet(TileSet::empty((rows, cols))))
    })
}

/// Reads a tile-set file; tiles without a frequency are annotated from `data`.
///
/// # Safety
/// `path` must be a NUL-terminated string, `data` a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_tileset_read(
    path: *const c_char,
    data: *const TdDataset,
    out: *mut *mut TdTileSet,
) -> TdStatus {
    guard(|| {
        let path = string(path, "path")?;
        let data = &deref(data, "dataset")?.0;
        put(
            out,
            TdTileSet(read_tiles(Path::new(path), data.dims(), Some(data))?),
        )
    })
}

/// Background preset (`none`, `density`, `columns`, `rows`, `columns+rows`)
/// computed from `data`.
///
/// # Safety
/// `preset` must be a NUL-terminated string, `data` a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_tileset_background(
    data: *const TdDataset,
    preset: *const c_char,
    out: *mut *mut TdTileSet,
) -> TdStatus {
    guard(|| {
        let data = &deref(data, "dataset")?.0;
        let preset = Background::from_str(string(preset, "preset")?).map_err(Failure::Input)?;
        put(out, TdTileSet(preset.tiles(data)))
    })
}

/// Appends the tile `row_ids x col_ids` with frequency `freq`.
///
/// # Safety
/// The id arrays must hold `n_rows` and `n_cols` readable elements.
#[no_mangle]
pub unsafe extern "C" fn td_tileset_push(
    set: *mut TdTileSet,
    row_ids: *const usize,
    n_rows: usize,
    col_ids: *const usize,
    n_cols: usize,
    freq: f64,
) -> TdStatus {
    guard(|| {
        let set = &mut deref_mut(set, "tile set")?.0;
        let tile = Tile::new(
            slice(row_ids, n_rows, "row_ids")?.iter().copied(),
            slice(col_ids, n_cols, "col_ids")?.iter().copied(),
        )?;
        set.push(FreqTile::new(tile, freq)?)?;
        Ok(())
    })
}

/// Number of tiles, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_tileset_len(set: *const TdTileSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn td_tileset_free(set: *mut TdTileSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Maximum-entropy model of `set`. `opts` may be NULL for defaults.
///
/// # Safety
/// `set` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_fit(
    set: *const TdTileSet,
    opts: *const TdFitOptions,
    out: *mut *mut TdModel,
) -> TdStatus {
    guard(|| {
        let set = &deref(set, "tile set")?.0;
        let opts = options(opts)?;
        put(out, TdModel(fit(set, &opts)?))
    })
}

/// `P[(row, col) = 1]` under the model, 1-based.
///
/// # Safety
/// `model` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_model_probability(
    model: *const TdModel,
    row: usize,
    col: usize,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let p = deref(model, "model")?.0.probability(row, col)?;
        *deref_mut(out, "output pointer")? = p;
        Ok(())
    })
}

/// Entropy in nats.
///
/// # Safety
/// `model` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_model_entropy(model: *const TdModel, out: *mut f64) -> TdStatus {
    guard(|| {
        let h = deref(model, "model")?.0.entropy();
        *deref_mut(out, "output pointer")? = h;
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn td_model_free(model: *mut TdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Normalized distance between `left` and `right` given `background`: at most
/// 1 when every tile is exact, at most 2 otherwise.
///
/// # Safety
/// All handles must be live; `opts` may be NULL; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_distance(
    left: *const TdTileSet,
    right: *const TdTileSet,
    background: *const TdTileSet,
    opts: *const TdFitOptions,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let report = distance(
            &deref(left, "left")?.0,
            &deref(right, "right")?.0,
            &deref(background, "background")?.0,
            &options(opts)?,
        )?;
        *deref_mut(out, "output pointer")? = report.value;
        Ok(())
    })
}
