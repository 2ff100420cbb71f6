//! Reference computations written independently of the library: closed-form
//! displacement with adaptive Simpson quadrature for the phase, and a brute
//! force linear program for the commensurate-grid synthesis.

#![allow(dead_code, clippy::too_many_arguments, clippy::needless_range_loop)]

use num_complex::Complex64;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// A tone as (gate detuning δ = ν − μ, signed amplitude Ω).
pub type OracleTone = (f64, f64);

/// α(t) = (η/2) Σ Ω (e^{iδt} − 1)/(iδ), with the δ → 0 limit Ω·t.
pub fn alpha(tones: &[OracleTone], eta: f64, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(d, w) in tones {
        acc += if d.abs() * t < 1e-8 {
            Complex64::new(w * t, 0.0)
        } else {
            w * (Complex64::new(0.0, d * t).exp() - 1.0) / Complex64::new(0.0, d)
        };
    }
    acc * (0.5 * eta)
}

pub fn alpha_dot(tones: &[OracleTone], eta: f64, t: f64) -> Complex64 {
    tones.iter().map(|&(d, w)| w * Complex64::new(0.0, d * t).exp()).sum::<Complex64>() * (0.5 * eta)
}

fn simpson_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on [a, b], split into `pieces` to resolve oscillations.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_rec(&f, x0, x1, f0, fm, f1, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// Φ(T) = 4 Im ∫₀ᵀ α̇ α* dt by adaptive quadrature.
pub fn phase(tones: &[OracleTone], eta: f64, t_end: f64) -> f64 {
    let fastest = tones.iter().fold(1.0_f64, |m, &(d, _)| m.max(d.abs()));
    let pieces = ((fastest * t_end / 2.0).ceil() as usize).clamp(16, 20_000);
    let scale = tones.iter().map(|&(_, w)| w * w).sum::<f64>() * eta * eta * t_end / fastest.max(1.0 / t_end);
    let tol = 1e-13 * scale.max(1e-300);
    4.0 * adaptive_simpson(|t| (alpha_dot(tones, eta, t) * alpha(tones, eta, t).conj()).im, 0.0, t_end, tol, pieces)
}

/// Per-tone phase coefficients c_{k,i} = η_k² T / δ_{k,i}, valid when every
/// tone closes its own loop and cross terms cancel over T.
pub fn lp_coefficients(modes: &[f64], etas: &[f64], tones: &[f64], t_end: f64) -> Vec<Vec<f64>> {
    modes
        .iter()
        .zip(etas)
        .map(|(&nu, &eta)| tones.iter().map(|&mu| eta * eta * t_end / (nu - mu)).collect())
        .collect()
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 * a.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs())) {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// min Σ x subject to C x = target, x ≥ 0, by enumerating basic feasible
/// solutions. Returns the optimal x (Ω²) or `None` when infeasible.
pub fn lp_min_power(coef: &[Vec<f64>], target: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = (coef.len(), coef[0].len());
    let mut best: Option<(f64, Vec<f64>)> = None;
    for basis in combinations(n, m) {
        let a: Vec<Vec<f64>> = (0..m).map(|r| basis.iter().map(|&c| coef[r][c]).collect()).collect();
        let Some(xb) = solve_square(a, target.to_vec()) else { continue };
        if xb.iter().any(|&x| x < -1e-12 * xb.iter().fold(1e-300_f64, |s, v| s.max(v.abs()))) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (&c, &v) in basis.iter().zip(&xb) {
            x[c] = v.max(0.0);
        }
        let cost: f64 = x.iter().sum();
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, x));
        }
    }
    best.map(|(_, x)| x)
}
