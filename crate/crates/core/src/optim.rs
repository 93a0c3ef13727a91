//! Unconstrained minimizers used by the likelihood fits.
//!
//! The objective may return `+∞` for infeasible points; line searches and
//! simplex moves treat those as rejected proposals.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub max_iter: usize,
    pub tol_f: f64,
    pub tol_x: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted iteration, starting with f(x0).
    pub trace: Vec<f64>,
}

/// Central-difference gradient. Falls back to a one-sided difference when one
/// neighbour is infeasible.
pub(crate) fn numerical_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = 6e-6 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        g[i] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => 0.0,
        };
    }
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn small_change(df: f64, f: f64, step: &[f64], x: &[f64], tol: &Tolerances) -> bool {
    df.abs() < tol.tol_f * (1.0 + f.abs()) && max_abs(step) < tol.tol_x * (1.0 + max_abs(x))
}

/// BFGS with backtracking Armijo line search and finite-difference gradients.
/// When no descent step can be found, a Nelder-Mead search is run from the
/// current point and BFGS resumes from wherever it ends.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], tol: Tolerances) -> Outcome {
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut trace = vec![fx];
    if !fx.is_finite() {
        return Outcome {
            x,
            f: fx,
            iterations: 0,
            converged: false,
            trace,
        };
    }
    let mut g = numerical_gradient(f, &x, fx);
    let mut h = identity(d);
    let mut fresh = true;
    let mut iterations = 0;

    while iterations < tol.max_iter {
        iterations += 1;
        let mut p: Vec<f64> = (0..d).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            h = identity(d);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if slope == 0.0 {
            return Outcome {
                x,
                f: fx,
                iterations,
                converged: true,
                trace,
            };
        }

        let accepted = line_search(f, &x, fx, &p, slope);
        let (x_new, f_new) = match accepted {
            Some(v) => v,
            None if !fresh => {
                h = identity(d);
                fresh = true;
                continue;
            }
            None => {
                // Steepest descent failed as well: hand over to the simplex.
                let nm = nelder_mead(f, &x, tol);
                let improved = nm.f < fx - tol.tol_f * (1.0 + fx.abs());
                let step: Vec<f64> = nm.x.iter().zip(&x).map(|(a, b)| a - b).collect();
                let done = !improved || small_change(fx - nm.f, nm.f, &step, &nm.x, &tol);
                if nm.f < fx {
                    x = nm.x;
                    fx = nm.f;
                    trace.push(fx);
                }
                if done {
                    return Outcome {
                        x,
                        f: fx,
                        iterations,
                        converged: nm.converged || !improved,
                        trace,
                    };
                }
                g = numerical_gradient(f, &x, fx);
                h = identity(d);
                fresh = true;
                continue;
            }
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let g_new = numerical_gradient(f, &x_new, f_new);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let df = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);

        if small_change(df, fx, &s, &x, &tol) {
            return Outcome {
                x,
                f: fx,
                iterations,
                converged: true,
                trace,
            };
        }

        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                h = identity(d)
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v * scale).collect())
                    .collect();
                fresh = false;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
    }
    Outcome {
        x,
        f: fx,
        iterations,
        converged: false,
        trace,
    }
}

fn line_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    fx: f64,
    p: &[f64],
    slope: f64,
) -> Option<(Vec<f64>, f64)> {
    let mut alpha = 1.0;
    for _ in 0..60 {
        let cand: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + alpha * pi).collect();
        let fc = f(&cand);
        if fc.is_finite() && fc <= fx + 1e-4 * alpha * slope {
            return if fc < fx || cand != x {
                Some((cand, fc))
            } else {
                None
            };
        }
        alpha *= 0.5;
    }
    None
}

// H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let d = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..d).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..d {
        for j in 0..d {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Nelder-Mead simplex search.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], tol: Tolerances) -> Outcome {
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..d {
        let mut v = x0.to_vec();
        let mut step = 0.05 * x0[i].abs().max(1.0);
        v[i] = x0[i] + step;
        let mut fv = f(&v);
        // Shrink (and flip) the initial step until the vertex is feasible.
        let mut tries = 0;
        while !fv.is_finite() && tries < 30 {
            step *= -0.5;
            v[i] = x0[i] + step;
            fv = f(&v);
            tries += 1;
        }
        simplex.push((v, fv));
    }
    let mut trace = vec![simplex[0].1];
    let max_evals = tol.max_iter.max(1) * 20 * (d + 1);
    let mut evals = d + 1;
    let mut iterations = 0;
    let mut converged = false;

    while evals < max_evals {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0f64, f64::max);
        if best.is_finite()
            && (worst - best).abs() <= tol.tol_f * (1.0 + best.abs())
            && diameter <= tol.tol_x * (1.0 + max_abs(&simplex[0].0))
        {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|(v, _)| v[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let best_v = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = vertex
                        .0
                        .iter()
                        .zip(&best_v)
                        .map(|(a, b)| b + 0.5 * (a - b))
                        .collect();
                    let fv = f(&v);
                    *vertex = (v, fv);
                }
                evals += d;
            }
        }
        let current = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        if current < *trace.last().unwrap() {
            trace.push(current);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    Outcome {
        x,
        f: fx,
        iterations,
        converged,
        trace,
    }
}

/// Inverse of a symmetric matrix via Cholesky; `None` unless positive definite.
pub(crate) fn spd_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Solve L Lᵀ X = I column by column.
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut sum = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l[i][k] * z[k];
            }
            z[i] = sum / l[i][i];
        }
        for i in (0..n).rev() {
            let mut sum = z[i];
            for k in i + 1..n {
                sum -= l[k][i] * inv[k][c];
            }
            inv[i][c] = sum / l[i][i];
        }
    }
    Some(inv)
}
