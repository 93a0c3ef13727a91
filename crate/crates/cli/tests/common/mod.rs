#![allow(dead_code)]

/// Adaptive Simpson quadrature, independent of anything in the crate.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Integrate over a list of breakpoints, piece by piece.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> f64 {
    points
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], tol / points.len() as f64))
        .sum()
}

/// Closed-form chi-square survival for 6 degrees of freedom.
pub fn chi2_sf_df6(x: f64) -> f64 {
    (-x / 2.0).exp() * (1.0 + x / 2.0 + x * x / 8.0)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Invoke the built binary.
pub fn evmix(args: &[&str]) -> Run {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_evmix"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// `year,value` file holding `values` from 1948 on.
pub fn write_series(dir: &std::path::Path, name: &str, values: &[f64]) -> std::path::PathBuf {
    let mut s = String::from("year,value\n");
    for (i, v) in values.iter().enumerate() {
        s.push_str(&format!("{},{}\n", 1948 + i, v));
    }
    let path = dir.join(name);
    std::fs::write(&path, s).unwrap();
    path
}

/// 0.9·GEV(0, 1, -0.2) + 0.1·GEV(5, 0.5, -0.2), n draws.
pub fn bimodal(n: usize, seed: u64) -> Vec<f64> {
    use evmix::{GevParams, MixtureModel, SeededRng};
    let m = MixtureModel::new(
        0.1,
        GevParams::gev(0.0, 1.0, -0.2).unwrap(),
        GevParams::gev(5.0, 0.5, -0.2).unwrap(),
    )
    .unwrap();
    m.sample(n, &mut SeededRng::new(seed)).unwrap()
}
