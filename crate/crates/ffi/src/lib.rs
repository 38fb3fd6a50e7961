//! C interface to the redlens redundancy analysis.
//!
//! Matrices are passed as row-major `double` buffers of `rows * cols`
//! values; each column is one feature. Every fallible function returns an
//! `RlStatus`; on failure `rl_last_error_message` describes the problem.
//! Handles (`RlPartition`, `RlArchive`) are opaque and must be released with
//! their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use redlens::data::{read_weight_archive, NamedTensor};
use redlens::{
    agglomerate, layer_redundancy, similarity::similarity_of, Error, FeatureMatrix, Linkage,
    Matrix, Partition, RedundancyReport, ZeroPolicy,
};

/// Group-average linkage.
pub const RL_LINKAGE_AVERAGE: u32 = 0;
/// Single linkage (maximum pairwise similarity).
pub const RL_LINKAGE_SINGLE: u32 = 1;
/// Complete linkage (minimum pairwise similarity).
pub const RL_LINKAGE_COMPLETE: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    NonFinite = 4,
    ZeroColumns = 5,
    Io = 6,
    Archive = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Redundancy of one layer at one threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RlReport {
    /// Number of features.
    pub n_prime: usize,
    /// Number of clusters.
    pub n_f: usize,
    /// `n_prime - n_f`.
    pub n_r: usize,
    pub percent_redundant: f64,
}

/// A clustering of feature columns.
pub struct RlPartition {
    labels: Vec<usize>,
    n_clusters: usize,
}

/// A weight archive loaded from disk.
pub struct RlArchive {
    layers: Vec<NamedTensor>,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::Shape(_) | Error::Empty(_) => RlStatus::Shape,
        Error::NonFinite(_) => RlStatus::NonFinite,
        Error::ZeroColumns(_) => RlStatus::ZeroColumns,
        Error::Io { .. } => RlStatus::Io,
        Error::Archive(_) => RlStatus::Archive,
        _ => RlStatus::InvalidArgument,
    }
}

type FfiResult = Result<(), (RlStatus, String)>;

fn fail(status: RlStatus, msg: impl Into<String>) -> FfiResult {
    Err((status, msg.into()))
}

fn lift(e: Error) -> (RlStatus, String) {
    (status_of(&e), e.to_string())
}

/// Runs `f`, records any error or panic, and converts to a status.
fn guard(f: impl FnOnce() -> FfiResult) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RlStatus::Panic
        }
    }
}

fn linkage_of(code: u32) -> Result<Linkage, (RlStatus, String)> {
    match code {
        RL_LINKAGE_AVERAGE => Ok(Linkage::GroupAverage),
        RL_LINKAGE_SINGLE => Ok(Linkage::SingleLink),
        RL_LINKAGE_COMPLETE => Ok(Linkage::CompleteLink),
        other => Err((
            RlStatus::InvalidArgument,
            format!("unknown linkage code {other}"),
        )),
    }
}

unsafe fn feature_matrix(
    data: *const f64,
    rows: usize,
    cols: usize,
) -> Result<FeatureMatrix, (RlStatus, String)> {
    if data.is_null() {
        return Err((RlStatus::NullPointer, "data is null".into()));
    }
    let len = rows.checked_mul(cols).filter(|&n| n > 0).ok_or((
        RlStatus::Shape,
        format!("invalid matrix shape {rows}x{cols}"),
    ))?;
    let values = std::slice::from_raw_parts(data, len).to_vec();
    let m = Matrix::from_vec(rows, cols, values).map_err(lift)?;
    FeatureMatrix::new("layer", m).map_err(lift)
}

fn write_report(out: *mut RlReport, r: &RedundancyReport) {
    let report = RlReport {
        n_prime: r.n_prime,
        n_f: r.n_f,
        n_r: r.n_r,
        percent_redundant: r.percent_redundant,
    };
    unsafe { out.write(report) };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Redundancy of the feature columns of a `rows x cols` matrix at
/// threshold `tau`.
#[no_mangle]
pub unsafe extern "C" fn rl_layer_redundancy(
    data: *const f64,
    rows: usize,
    cols: usize,
    tau: f64,
    linkage: u32,
    out: *mut RlReport,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return fail(RlStatus::NullPointer, "out is null");
        }
        let linkage = linkage_of(linkage)?;
        let w = feature_matrix(data, rows, cols)?;
        let r = layer_redundancy(&w, tau, linkage, ZeroPolicy::Reject).map_err(lift)?;
        write_report(out, &r);
        Ok(())
    })
}

/// Clusters the feature columns. On success `*out` owns a new partition.
#[no_mangle]
pub unsafe extern "C" fn rl_cluster(
    data: *const f64,
    rows: usize,
    cols: usize,
    tau: f64,
    linkage: u32,
    out: *mut *mut RlPartition,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return fail(RlStatus::NullPointer, "out is null");
        }
        out.write(ptr::null_mut());
        let linkage = linkage_of(linkage)?;
        let w = feature_matrix(data, rows, cols)?;
        let omega = similarity_of(&w, ZeroPolicy::Reject).map_err(lift)?;
        let p: Partition = agglomerate(&omega, tau, linkage).map_err(lift)?;
        let handle = Box::new(RlPartition {
            labels: p.labels(),
            n_clusters: p.n_clusters(),
        });
        out.write(Box::into_raw(handle));
        Ok(())
    })
}

/// Number of clustered features, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rl_partition_n_items(p: *const RlPartition) -> usize {
    p.as_ref().map_or(0, |p| p.labels.len())
}

/// Number of clusters, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rl_partition_n_clusters(p: *const RlPartition) -> usize {
    p.as_ref().map_or(0, |p| p.n_clusters)
}

/// Copies the cluster index of every feature into `labels`, which must hold
/// `len >= rl_partition_n_items(p)` entries. Clusters are numbered by their
/// smallest member.
#[no_mangle]
pub unsafe extern "C" fn rl_partition_labels(
    p: *const RlPartition,
    labels: *mut usize,
    len: usize,
) -> RlStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), labels.is_null()) else {
            return fail(RlStatus::NullPointer, "partition or labels is null");
        };
        if len < p.labels.len() {
            return fail(
                RlStatus::OutOfRange,
                format!("labels buffer holds {len}, need {}", p.labels.len()),
            );
        }
        ptr::copy_nonoverlapping(p.labels.as_ptr(), labels, p.labels.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rl_partition_free(p: *mut RlPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Loads a weight archive directory. On success `*out` owns the archive.
#[no_mangle]
pub unsafe extern "C" fn rl_archive_open(
    path: *const c_char,
    out: *mut *mut RlArchive,
) -> RlStatus {
    guard(|| {
        if out.is_null() || path.is_null() {
            return fail(RlStatus::NullPointer, "path or out is null");
        }
        out.write(ptr::null_mut());
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (RlStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let layers = read_weight_archive(path).map_err(lift)?;
        let names = layers
            .iter()
            .map(|l| CString::new(l.name.replace('\0', " ")).expect("NUL bytes replaced"))
            .collect();
        out.write(Box::into_raw(Box::new(RlArchive { layers, names })));
        Ok(())
    })
}

/// Number of layers, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rl_archive_layer_count(a: *const RlArchive) -> usize {
    a.as_ref().map_or(0, |a| a.layers.len())
}

/// Name of layer `index`, owned by the archive; NULL if out of range.
#[no_mangle]
pub unsafe extern "C" fn rl_archive_layer_name(a: *const RlArchive, index: usize) -> *const c_char {
    a.as_ref()
        .and_then(|a| a.names.get(index))
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// Redundancy of layer `index` at threshold `tau`. Convolution layers are
/// unrolled to one column per filter.
#[no_mangle]
pub unsafe extern "C" fn rl_archive_analyze(
    a: *const RlArchive,
    index: usize,
    tau: f64,
    linkage: u32,
    out: *mut RlReport,
) -> RlStatus {
    guard(|| {
        let (Some(a), false) = (a.as_ref(), out.is_null()) else {
            return fail(RlStatus::NullPointer, "archive or out is null");
        };
        let Some(layer) = a.layers.get(index) else {
            return fail(
                RlStatus::OutOfRange,
                format!("layer {index} of {}", a.layers.len()),
            );
        };
        let linkage = linkage_of(linkage)?;
        let w = layer.tensor.to_feature_matrix(&layer.name).map_err(lift)?;
        let r = layer_redundancy(&w, tau, linkage, ZeroPolicy::Reject).map_err(lift)?;
        write_report(out, &r);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rl_archive_free(a: *mut RlArchive) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}
