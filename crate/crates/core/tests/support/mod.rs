//! Reference values computed independently of the library.
#![allow(dead_code)]

use rr_adam_lab::landscapes::LowerBoundParams;

/// Inputs to the closed-form constants.
#[derive(Debug, Clone, Copy)]
pub struct Inputs {
    pub beta1: f64,
    pub beta2: f64,
    pub n: usize,
    pub d: usize,
    pub eta1: f64,
    pub l0: f64,
    pub l1: f64,
    pub d0: f64,
    pub d1: f64,
}

/// Four-way maximum read straight off its definition.
pub fn g_ref(b2: f64, n: usize) -> f64 {
    let n = n as f64;
    let p = b2.powf(n - 1.0);
    let a = 1.0 / p.sqrt() - 1.0;
    let b = 1.0 - 1.0 / (p + 8.0 * n * (1.0 - p) / b2.powf(n)).sqrt();
    let c = 1.0 - b2.sqrt();
    let denom = 1.0 - (1.0 - b2) * 2.0 * n / b2.powf(n);
    // undefined past the pole; treated as unbounded
    let e = if denom > 0.0 { (b2 / denom).sqrt() - 1.0 } else { f64::INFINITY };
    a.max(b).max(c).max(e)
}

/// `C₁ … C₁₃`, one line per definition, in the order they are printed.
pub fn constants_ref(x: Inputs) -> [f64; 13] {
    let Inputs { beta1: b1, beta2: b2, eta1: e, l0, l1, d0, d1, .. } = x;
    let n = x.n as f64;
    let d = x.d as f64;
    let g = g_ref(b2, x.n);
    let r = f64::sqrt;
    let q = r(1.0 - b2) / (1.0 - r(b2));
    let geom = 1.0 - r(b2.powf(n));
    let lsm = n * l0 + l1 * r(n) * r(d0);
    let shared = (n - 1.0 + (1.0 + b1) / (1.0 - b1)) * (r(2.0) * n / b2.powf(n / 2.0));

    let c1 = (1.0 - b1).powi(2) / (1.0 - b2) / (1.0 - b1 * b1 / b2) + 1.0;
    let c2 = n * c1 + b1 / (1.0 - b1) * c1 * (1.0 + r(2.0));
    let c3 = c1
        * (n * (l0 + l1 * r(d0))
            + 2.0 * r(2.0) * (l0 + l1 * r(d0)) * q * (r(b2) / (1.0 - r(b2)))
            + 8.0 * r(2.0 * n) * l0 / (1.0 - b2.powf(n)));
    let c4 = 4.0 * l1 * c1 * r(d1) * q;
    let c5 = n * n * (1.0 + n * r(d) * c1 * e * l1 * r(n) * r(d1)) * (c4 + d * c4 * r(d1) / geom);
    let c6 = (d * c3 + c4 * n * r(d1) / geom) * e * e;
    let c7 = 3.0 * n * (c4 + d * c4 / geom) * lsm * n * n * r(d) * c1 * e.powi(3)
        + (d * c3 + c2 * c4 * n * r(d1) / geom) * e * e;
    let c8 = r(2.0 * n * n / b2.powf(n)) * l1 * r(d1) * n * r(n)
        + d * g * shared * l1 * c1 * r(d1) * (1.0 + 1.0 / (1.0 - b2.powf(n)))
            * (n + n.powf(2.5) * r(d) * c1 * e * l1 * r(d1))
        + 2.0 * b1 / ((1.0 - b1) * e) * r(d) * c1;
    let c9 = r(2.0 * n * n / b2.powf(n)) * d * (n * n * l0 + n * r(n) * l1 * r(d0)) * c1 * e * e
        + g * shared * (n + 2.0 * r(2.0) * b1 / (1.0 - b1)) * c1 * (l0 + l1 * r(d0)) * d * r(d) * e * e;
    let c10 = 3.0 * d * g * shared * l1 * c1 * r(d1) * (1.0 + 1.0 / (1.0 - b2.powf(n))) * n * lsm * n * r(d) * c1
        * e.powi(3)
        + c9;
    let c11 = (0.5 + c2) * c5 + c8 + 3.0 * l1 * r(n) * r(d1) * c2 * c2 * d / 2.0;
    let c12 = (0.5 + c2) * c6 + c9 + lsm / 2.0 * 3.0 * c2 * c2 * d * e * e;
    let c13 = (0.5 + c2) * c7 + c10 + lsm / 2.0 * 3.0 * c2 * c2 * d * e * e;
    [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13]
}

/// `√d g(x) n / x^{n/2}` and its target value.
pub fn gamma_sides(x: f64, d1: f64, n: usize, d: usize, beta1: f64) -> (f64, f64) {
    let nf = n as f64;
    let lhs = (d as f64).sqrt() * g_ref(x, n) * nf / x.powf(nf / 2.0);
    let rhs = 1.0
        / (2.0 * (4.0 + 2f64.sqrt()) * d1.sqrt() * (nf - 1.0 + (1.0 + beta1) / (1.0 - beta1)));
    (lhs, rhs)
}

/// `g` at `β₂ = 1 - δ`, in rationalized forms free of cancellation.
pub fn g_ref_gap(delta: f64, n: usize) -> f64 {
    let n = n as f64;
    let ln_b = (-delta).ln_1p();
    let p = ((n - 1.0) * ln_b).exp();
    let one_minus_p = -((n - 1.0) * ln_b).exp_m1();
    let b_n = (n * ln_b).exp();
    let a = one_minus_p / (p.sqrt() * (1.0 + p.sqrt()));
    let u = one_minus_p * (8.0 * n / b_n - 1.0);
    let b = u / ((1.0 + u).sqrt() * (1.0 + (1.0 + u).sqrt()));
    let c = delta / (1.0 + (1.0 - delta).sqrt());
    let s = 2.0 * n * delta / b_n;
    let ratio_minus_one = (s - delta) / (1.0 - s);
    let e = if s < 1.0 {
        ratio_minus_one / ((1.0 + ratio_minus_one).sqrt() + 1.0)
    } else {
        f64::INFINITY
    };
    a.max(b).max(c).max(e)
}

/// [`gamma_sides`] evaluated at `x = 1 - δ`.
pub fn gamma_sides_gap(delta: f64, d1: f64, n: usize, d: usize, beta1: f64) -> (f64, f64) {
    let nf = n as f64;
    let half_power = (nf / 2.0 * (-delta).ln_1p()).exp();
    let lhs = (d as f64).sqrt() * g_ref_gap(delta, n) * nf / half_power;
    let (_, rhs) = gamma_sides(0.5, d1, n, d, beta1);
    (lhs, rhs)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Central difference of `f` at `x` with step `h`.
pub fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Hand-written lower-bound pieces for cross-checking.
pub fn f1_ref(p: &LowerBoundParams, x: f64) -> f64 {
    let (l0, l1) = (p.l0, p.l1);
    let a = x.abs();
    if a >= 1.0 / l1 {
        l0 * (l1 * a - 1.0).exp() / (l1 * l1)
    } else {
        l0 * a * a / 2.0 + l0 / (2.0 * l1 * l1)
    }
}

pub fn f2_ref(p: &LowerBoundParams, y: f64) -> f64 {
    let a = y.abs();
    if a >= 1.0 {
        p.epsilon * (a - 1.0) + p.epsilon / 2.0
    } else {
        p.epsilon * a * a / 2.0
    }
}
