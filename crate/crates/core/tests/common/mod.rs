//! Test-only oracles, kept independent of the library's optimization path.
#![allow(dead_code)]

use recurmix::Subject;

/// Single-class MLE by Levenberg-Marquardt damped Newton in the natural
/// parameters `(γ1, γ2, β)`, with its own derivatives and a plain
/// Gaussian-elimination solve.
pub fn newton_mle(data: &[Subject]) -> Vec<f64> {
    let d = data[0].dim();
    let p = 2 + d;
    let events: f64 = data.iter().map(|s| s.n_events() as f64).sum();
    let exposure: f64 = data.iter().map(|s| s.tau()).sum();
    let mut theta = vec![0.0; p];
    theta[0] = events / exposure;
    theta[1] = 1.0;

    let mut f = loglik(data, &theta);
    let mut mu = 0.0;
    for _ in 0..500 {
        let (g, h) = derivatives(data, &theta);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-10 {
            break;
        }
        let scale = (0..p).map(|i| h[i][i].abs()).fold(1.0, f64::max);
        let mut accepted = false;
        for _ in 0..80 {
            // The natural-parameter log-likelihood is not concave, so −H may be
            // indefinite; damping restores an ascent direction.
            let damped: Vec<Vec<f64>> = (0..p)
                .map(|i| (0..p).map(|j| -h[i][j] + if i == j { mu } else { 0.0 }).collect())
                .collect();
            if let Some(step) = solve(damped, g.clone()) {
                let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
                let ascent = step.iter().zip(&g).map(|(s, v)| s * v).sum::<f64>() > 0.0;
                if ascent && trial[0] > 0.0 && trial[1] > 0.0 {
                    let ft = loglik(data, &trial);
                    if ft.is_finite() && ft >= f {
                        theta = trial;
                        f = ft;
                        accepted = true;
                        mu *= 0.1;
                        if mu < 1e-12 * scale {
                            mu = 0.0;
                        }
                        break;
                    }
                }
            }
            mu = if mu == 0.0 { 1e-6 * scale } else { mu * 10.0 };
        }
        if !accepted {
            break;
        }
    }
    theta
}

pub fn loglik(data: &[Subject], theta: &[f64]) -> f64 {
    let (g1, g2) = (theta[0], theta[1]);
    data.iter()
        .map(|s| {
            let eta: f64 = s.covariates().iter().zip(&theta[2..]).map(|(x, b)| x * b).sum();
            let logs: f64 = s
                .event_times()
                .iter()
                .map(|t| (g1 * g2 * t.powf(g2 - 1.0)).ln() + eta)
                .sum();
            logs - g1 * s.tau().powf(g2) * eta.exp()
        })
        .sum()
}

fn derivatives(data: &[Subject], theta: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = theta.len();
    let (g1, g2) = (theta[0], theta[1]);
    let mut g = vec![0.0; p];
    let mut h = vec![vec![0.0; p]; p];
    for s in data {
        let x = s.covariates();
        let n = s.n_events() as f64;
        let sum_log: f64 = s.event_times().iter().map(|t| t.ln()).sum();
        let eta: f64 = x.iter().zip(&theta[2..]).map(|(a, b)| a * b).sum();
        let lt = s.tau().ln();
        let base = s.tau().powf(g2) * eta.exp(); // τ^γ2 e^η
        g[0] += n / g1 - base;
        g[1] += n / g2 + sum_log - g1 * base * lt;
        h[0][0] -= n / (g1 * g1);
        h[0][1] -= base * lt;
        h[1][1] -= n / (g2 * g2) + g1 * base * lt * lt;
        for j in 0..x.len() {
            g[2 + j] += (n - g1 * base) * x[j];
            h[0][2 + j] -= base * x[j];
            h[1][2 + j] -= g1 * base * lt * x[j];
            for l in 0..x.len() {
                h[2 + j][2 + l] -= g1 * base * x[j] * x[l];
            }
        }
    }
    for r in 0..p {
        for c in 0..r {
            h[r][c] = h[c][r];
        }
    }
    (g, h)
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Kolmogorov-Smirnov statistic of `sample` against a continuous CDF.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Central differences of `f` at `x` with step `h·max(1, |x_j|)`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let step = h * x[j].abs().max(1.0);
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[j] += step;
            lo[j] -= step;
            (f(&hi) - f(&lo)) / (2.0 * step)
        })
        .collect()
}

/// `|a − b|_∞ ≤ tol · max(|a|_∞, 1)`.
pub fn close_normwise(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}
