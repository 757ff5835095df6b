use std::f64::consts::PI;

/// Orthonormal Hermite values (h_n(x), h_{n-1}(x)) for weight exp(-x^2).
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Gauss-Hermite nodes and weights for the weight function exp(-x^2),
/// ascending in x. Roots are bracketed by sign changes on a grid finer than
/// the smallest root spacing, then polished by safeguarded Newton steps.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let nf = n as f64;
    let top = (2.0 * nf + 1.0).sqrt() + 1.0;
    let cells = ((top / (0.05 / nf.sqrt())).ceil() as usize).max(64);
    let h = top / cells as f64;
    let mut pos = Vec::with_capacity(n / 2);
    let mut a = if n % 2 == 1 { 0.5 * h } else { 0.0 };
    let mut fa = hermite_pair(n, a).0;
    while pos.len() < n / 2 && a < top {
        let b = a + h;
        let fb = hermite_pair(n, b).0;
        if fa == 0.0 || fa.signum() != fb.signum() {
            pos.push(polish(n, a, b));
        }
        a = b;
        fa = fb;
    }
    assert_eq!(pos.len(), n / 2, "Hermite root bracketing failed for n = {n}");
    let mut x: Vec<f64> = pos.iter().rev().map(|r| -r).collect();
    if n % 2 == 1 {
        x.push(0.0);
    }
    x.extend(pos.iter().copied());
    let w = x
        .iter()
        .map(|&r| {
            let d = (2.0 * nf).sqrt() * hermite_pair(n, r).1;
            2.0 / (d * d)
        })
        .collect();
    (x, w)
}

fn polish(n: usize, mut lo: f64, mut hi: f64) -> f64 {
    let flo = hermite_pair(n, lo).0;
    let mut z = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (p, q) = hermite_pair(n, z);
        if p == 0.0 {
            return z;
        }
        if p.signum() == flo.signum() {
            lo = z;
        } else {
            hi = z;
        }
        let dp = (2.0 * n as f64).sqrt() * q;
        let mut next = z - p / dp;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 4.0 * f64::EPSILON * z.abs().max(1.0) {
            return next;
        }
        z = next;
    }
    z
}
