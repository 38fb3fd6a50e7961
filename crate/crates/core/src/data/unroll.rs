use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::similarity::FeatureMatrix;

/// Turns a `[out, in, k, k]` row-major convolution kernel into a
/// `(k*k*in) x out` feature matrix. Column `j` is filter `j` flattened in
/// (input channel, kernel row, kernel column) order.
pub fn unroll_conv(name: &str, shape: &[usize], data: &[f64]) -> Result<FeatureMatrix> {
    let &[out_ch, in_ch, kh, kw] = shape else {
        return Err(Error::Shape(format!(
            "convolution kernel must be 4-D, got shape {shape:?}"
        )));
    };
    if kh != kw {
        return Err(Error::Shape(format!(
            "kernel must be square, got {kh}x{kw}"
        )));
    }
    if data.len() != shape.iter().product::<usize>() {
        return Err(Error::Shape(format!(
            "{} values for kernel shape {shape:?}",
            data.len()
        )));
    }
    let z = in_ch * kh * kw;
    let mut w = Matrix::zeros(z, out_ch);
    // Filter j is the contiguous block data[j*z .. (j+1)*z].
    for (j, filter) in data.chunks_exact(z.max(1)).enumerate().take(out_ch) {
        for (row, &v) in filter.iter().enumerate() {
            w.set(row, j, v);
        }
    }
    FeatureMatrix::new(name, w)
}
