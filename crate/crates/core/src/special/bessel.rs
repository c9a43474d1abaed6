use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Bessel functions of the first kind `J_0(x) ..= J_nmax(x)`.
///
/// Miller's backward recurrence started well above both `nmax` and `|x|`,
/// normalized with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_table(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax.ceil() as usize);
    let mut start = top + 20 + (160.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let two_over_x = 2.0 / ax;
    let mut above = 0.0;
    let mut current = 1.0;
    let mut even_sum = 1.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            for v in out.iter_mut() {
                *v *= RESCALE_BY;
            }
        }
        let order = k - 1;
        if order > 0 && order % 2 == 0 {
            even_sum += current;
        }
        if order <= nmax {
            out[order] = current;
        }
    }
    let norm = current + 2.0 * even_sum;
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_table(x, m)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}
