//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use twrc::NetFn;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `eps`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    // Split first so the recursion never starts from a coarse lucky estimate.
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(lo, hi, fa, fm, fb);
            adapt(f, lo, hi, fa, fm, fb, whole, eps / pieces as f64, 50)
        })
        .sum()
}

/// `Pr(|n| >= a)` by quadrature. The factor `exp(-a^2/2)` is pulled out so
/// the integrand peaks at one and the tolerance is relative.
pub fn two_sided_tail_quadrature(a: f64) -> f64 {
    let g = |t: f64| (-a * t - 0.5 * t * t).exp();
    2.0 * INV_SQRT_2PI * (-0.5 * a * a).exp() * integrate(&g, 0.0, 40.0, 1e-16)
}

/// `Pr(lo < n <= hi)` for unit Gaussian `n` by direct quadrature of the pdf.
pub fn gaussian_interval(lo: f64, hi: f64) -> f64 {
    let lo = lo.max(-40.0);
    let hi = hi.min(40.0);
    if hi <= lo {
        return 0.0;
    }
    let pdf = |x: f64| INV_SQRT_2PI * (-0.5 * x * x).exp();
    integrate(&pdf, lo, hi, 1e-15)
}

/// Detection-error probabilities on the superimposed constellation by
/// integrating the noise density over every decision region.
///
/// Returns `(sum_detection_ser, pnc_ser)`.
pub fn superimposed_ser_quadrature(q: u32, alpha: f64) -> (f64, f64) {
    let n = 2 * q as usize - 1;
    let point = |m: usize| alpha * (2.0 * m as f64 - 2.0 * (q as f64 - 1.0));
    let prob = |m: usize| {
        let d = (m as i64 - (q as i64 - 1)).unsigned_abs() as f64;
        (q as f64 - d) / (q as f64 * q as f64)
    };
    let region = |j: usize| {
        let lo = if j == 0 { f64::NEG_INFINITY } else { 0.5 * (point(j - 1) + point(j)) };
        let hi = if j == n - 1 { f64::INFINITY } else { 0.5 * (point(j) + point(j + 1)) };
        (lo, hi)
    };
    let (mut sum_err, mut pnc_err) = (0.0, 0.0);
    for m in 0..n {
        for j in 0..n {
            if j == m {
                continue;
            }
            let (lo, hi) = region(j);
            let p = prob(m) * gaussian_interval(lo - point(m), hi - point(m));
            sum_err += p;
            if j % q as usize != m % q as usize {
                pnc_err += p;
            }
        }
    }
    (sum_err, pnc_err)
}

fn entropy_of_counts<K: std::hash::Hash + Eq>(counts: &HashMap<K, u64>, total: u64) -> f64 {
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Brute-force `(H(W2|W1,W3), H(W1|W2,W3), I(W3;W1), I(W3;W2))` from joint
/// entropies, `H(X|Y) = H(X,Y) - H(Y)` and `I = H(X) + H(Y) - H(X,Y)`.
pub fn netfn_quantities(f: &NetFn) -> [f64; 4] {
    let q = f.q();
    let total = (q * q) as u64;
    let mut c_w1w3 = HashMap::new();
    let mut c_w2w3 = HashMap::new();
    let mut c_w3 = HashMap::new();
    let mut c_all = HashMap::new();
    for a in 0..q {
        for b in 0..q {
            let c = f.get(a, b);
            *c_w1w3.entry((a, c)).or_insert(0) += 1;
            *c_w2w3.entry((b, c)).or_insert(0) += 1;
            *c_w3.entry(c).or_insert(0) += 1;
            *c_all.entry((a, b, c)).or_insert(0) += 1;
        }
    }
    let h_all = entropy_of_counts(&c_all, total);
    let h_w1w3 = entropy_of_counts(&c_w1w3, total);
    let h_w2w3 = entropy_of_counts(&c_w2w3, total);
    let h_w3 = entropy_of_counts(&c_w3, total);
    let h_w = (q as f64).log2();
    [h_all - h_w1w3, h_all - h_w2w3, h_w3 + h_w - h_w1w3, h_w3 + h_w - h_w2w3]
}
