//! Legendre-family special functions via three-term recurrences.

use std::f64::consts::PI;

/// `P_l(x)` by the Bonnet recurrence.
pub fn legendre(l: usize, x: f64) -> f64 {
    legendre_with_derivative(l, x).0
}

/// `(P_l(x), P_l'(x))`. The derivative formula is singular at `x = ±1`,
/// where the closed form `P_l'(±1) = (±1)^{l+1} l(l+1)/2` is used instead.
pub fn legendre_with_derivative(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=l {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let lf = l as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let sign = if x > 0.0 || l % 2 == 1 { 1.0 } else { -1.0 };
        sign * lf * (lf + 1.0) / 2.0
    } else {
        lf * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, dp)
}

/// Fully normalized associated Legendre functions `P̄_l^m(cos θ)` for
/// `0 ≤ m ≤ l ≤ l_max`, without the Condon–Shortley phase, such that
/// `P̄_l^m(cos θ) cos(mφ)` has unit `L²` norm on the unit sphere for `m = 0`
/// and norm `1/√2` for `m > 0`.
///
/// Entry `(l, m)` lives at index `l (l + 1) / 2 + m`.
pub fn normalized_associated_legendre(l_max: usize, cos_theta: f64, sin_theta: f64) -> Vec<f64> {
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut out = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    out[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        out[idx(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta * out[idx(m - 1, m - 1)];
    }
    for m in 0..l_max {
        out[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * cos_theta * out[idx(m, m)];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[idx(l, m)] = a * (cos_theta * out[idx(l - 1, m)] - b * out[idx(l - 2, m)]);
        }
    }
    out
}
