//! Exponentially scaled modified Bessel functions of integer order.

/// Fills `out[k] = e^{-x} I_k(x)` for `k = 0..out.len()`, `x >= 0`.
pub fn scaled_bessel_i_seq(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let nmax = out.len() - 1;
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    let n2 = (nmax * nmax) as f64;
    if x >= 30.0_f64.max(n2) {
        upward(x, out);
    } else {
        miller(x, out);
    }
}

/// `e^{-x} I_0(x)` and `e^{-x} I_1(x)`.
pub fn scaled_i0_i1(x: f64) -> (f64, f64) {
    let mut buf = [0.0; 2];
    scaled_bessel_i_seq(x, &mut buf);
    (buf[0], buf[1])
}

/// Large-argument asymptotic expansion of `e^{-x} I_nu(x)`.
fn asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (8.0 * k * x);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

fn upward(x: f64, out: &mut [f64]) {
    out[0] = asymptotic(0.0, x);
    if out.len() > 1 {
        out[1] = asymptotic(1.0, x);
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = out[k - 1] - (2.0 * k as f64 / x) * out[k];
    }
}

/// Miller backward recurrence normalized by `e^{-x}(I_0 + 2 sum_k I_k) = 1`.
fn miller(x: f64, out: &mut [f64]) {
    let nmax = out.len() - 1;
    let start = ((nmax * nmax) as f64 + 80.0 * x).sqrt().ceil() as usize + 10;
    let start = start.max(nmax + 10);
    out.fill(0.0);
    let mut next = 0.0; // f_{k+1}
    let mut cur = 1e-280; // f_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // f_{k-1} = f_{k+1} + (2k/x) f_k
        let prev = next + (2.0 * k as f64 / x) * cur;
        if k <= nmax {
            out[k] = cur;
        }
        norm += 2.0 * cur;
        next = cur;
        cur = prev;
        if cur > 1e250 {
            let s = 1.0 / cur;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    let s = 1.0 / norm;
    for v in out.iter_mut() {
        *v *= s;
    }
}
