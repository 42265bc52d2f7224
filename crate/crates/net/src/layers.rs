//! Convolution plumbing. Trunk activations live in a flat `(channels,
//! batch * size * size)` matrix so every convolution is one matrix product
//! against im2col patches.

use ndarray::Array2;

use crate::elem::Elem;

/// 3x3 same-padding im2col: input `(c, b*s*s)` to patches `(c*9, b*s*s)`.
/// Column `b*s*s + y*s + x` holds the 3x3 neighborhood of (y, x) in sample
/// b, zero-padded at the edges.
pub(crate) fn im2col3<T: Elem>(input: &Array2<T>, batch: usize, size: usize) -> Array2<T> {
    let channels = input.nrows();
    let cells = size * size;
    let n = batch * cells;
    debug_assert_eq!(input.ncols(), n);
    let mut cols = Array2::<T>::zeros((channels * 9, n));
    let inp = input.as_slice().expect("contiguous input");
    let out = cols.as_slice_mut().expect("contiguous cols");
    for c in 0..channels {
        for (tap, (dy, dx)) in TAPS.iter().enumerate() {
            let row = (c * 9 + tap) * n;
            let src_c = c * n;
            for b in 0..batch {
                for y in 0..size {
                    let sy = y as isize + dy;
                    if sy < 0 || sy >= size as isize {
                        continue;
                    }
                    let (x0, x1) = x_range(size, *dx);
                    let dst = row + b * cells + y * size;
                    let src = src_c + b * cells + sy as usize * size;
                    for x in x0..x1 {
                        out[dst + x] = inp[src + (x as isize + dx) as usize];
                    }
                }
            }
        }
    }
    cols
}

/// Transpose of `im2col3`: accumulates patch gradients `(c*9, b*s*s)` back
/// into an input gradient `(c, b*s*s)`.
pub(crate) fn col2im3<T: Elem>(dcols: &Array2<T>, batch: usize, size: usize) -> Array2<T> {
    let n = batch * size * size;
    let channels = dcols.nrows() / 9;
    let cells = size * size;
    let mut dinput = Array2::<T>::zeros((channels, n));
    let src_all = dcols.as_slice().expect("contiguous dcols");
    let dst_all = dinput.as_slice_mut().expect("contiguous dinput");
    for c in 0..channels {
        for (tap, (dy, dx)) in TAPS.iter().enumerate() {
            let row = (c * 9 + tap) * n;
            let dst_c = c * n;
            for b in 0..batch {
                for y in 0..size {
                    let sy = y as isize + dy;
                    if sy < 0 || sy >= size as isize {
                        continue;
                    }
                    let (x0, x1) = x_range(size, *dx);
                    let src = row + b * cells + y * size;
                    let dst = dst_c + b * cells + sy as usize * size;
                    for x in x0..x1 {
                        let j = dst + (x as isize + dx) as usize;
                        dst_all[j] = dst_all[j] + src_all[src + x];
                    }
                }
            }
        }
    }
    dinput
}

const TAPS: [(isize, isize); 9] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 0),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

fn x_range(size: usize, dx: isize) -> (usize, usize) {
    match dx {
        -1 => (1, size),
        0 => (0, size),
        _ => (0, size - 1),
    }
}

/// Regroup flat trunk activations `(c, b*cells)` into per-sample feature
/// rows `(b, c*cells)` for the dense heads.
pub(crate) fn flatten_per_sample<T: Elem>(acts: &Array2<T>, batch: usize) -> Array2<T> {
    let channels = acts.nrows();
    let cells = acts.ncols() / batch;
    let mut out = Array2::<T>::zeros((batch, channels * cells));
    for b in 0..batch {
        for c in 0..channels {
            for i in 0..cells {
                out[[b, c * cells + i]] = acts[[c, b * cells + i]];
            }
        }
    }
    out
}

/// Transpose of `flatten_per_sample`, accumulating into `(c, b*cells)`.
pub(crate) fn unflatten_per_sample<T: Elem>(
    grad: &Array2<T>,
    channels: usize,
    batch: usize,
) -> Array2<T> {
    let cells = grad.ncols() / channels;
    let mut out = Array2::<T>::zeros((channels, batch * cells));
    for b in 0..batch {
        for c in 0..channels {
            for i in 0..cells {
                out[[c, b * cells + i]] = grad[[b, c * cells + i]];
            }
        }
    }
    out
}
