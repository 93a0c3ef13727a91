//! Plot coordinates as CSV, with a minimal SVG rendering.

use std::fmt::Write as _;

use evmix::stats::{equal_width_edges, pp_positions, sturges};
use evmix::{GevParams, MixtureModel};

use crate::error::{CliError, CliResult};
use crate::series::AnnualSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Qq,
    Pp,
    Density,
    Timeseries,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::Qq,
        PlotKind::Pp,
        PlotKind::Density,
        PlotKind::Timeseries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Qq => "qq",
            PlotKind::Pp => "pp",
            PlotKind::Density => "density",
            PlotKind::Timeseries => "timeseries",
        }
    }

    pub fn parse(s: &str) -> Option<PlotKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// A fitted distribution that can be plotted.
pub trait Fitted {
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;
    fn quantile(&self, u: f64) -> CliResult<f64>;
}

impl Fitted for GevParams {
    fn cdf(&self, x: f64) -> f64 {
        GevParams::cdf(self, x)
    }
    fn pdf(&self, x: f64) -> f64 {
        GevParams::pdf(self, x)
    }
    fn quantile(&self, u: f64) -> CliResult<f64> {
        Ok(GevParams::quantile(self, u)?)
    }
}

impl Fitted for MixtureModel {
    fn cdf(&self, x: f64) -> f64 {
        MixtureModel::cdf(self, x)
    }
    fn pdf(&self, x: f64) -> f64 {
        MixtureModel::pdf(self, x)
    }
    /// Bisection between the component quantiles, which bracket the mixture's.
    fn quantile(&self, u: f64) -> CliResult<f64> {
        let a = self.component_base.quantile(u)?;
        let b = self.component_alt.quantile(u)?;
        let (mut lo, mut hi) = (a.min(b), a.max(b));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if MixtureModel::cdf(self, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub kind: PlotKind,
    pub csv: String,
    pub svg: String,
}

/// Q-Q positions `(i - a) / (n + 1 - 2a)`; `a = 0.5` gives `(i - 0.5) / n`.
pub fn qq_positions(n: usize, a: f64) -> Vec<f64> {
    (1..=n)
        .map(|i| (i as f64 - a) / (n as f64 + 1.0 - 2.0 * a))
        .collect()
}

fn sorted(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn qq(data: &[f64], model: &dyn Fitted, offset: f64) -> CliResult<Plot> {
    let xs = sorted(data);
    let mut csv = String::from("i,position,theoretical,observed,reference\n");
    let mut pts = Vec::with_capacity(xs.len());
    for (i, (u, x)) in qq_positions(xs.len(), offset)
        .into_iter()
        .zip(&xs)
        .enumerate()
    {
        let q = model.quantile(u)?;
        let _ = writeln!(csv, "{},{},{},{},{}", i + 1, u, q, x, q);
        pts.push((q, *x));
    }
    let span = bounds(pts.iter().flat_map(|&(a, b)| [a, b]));
    let svg = Svg::new("Q-Q plot", "theoretical quantile", "observed")
        .line(vec![(span.0, span.0), (span.1, span.1)])
        .points(pts)
        .render();
    Ok(Plot {
        kind: PlotKind::Qq,
        csv,
        svg,
    })
}

pub fn pp(data: &[f64], model: &dyn Fitted) -> Plot {
    let xs = sorted(data);
    let mut csv = String::from("i,position,fitted,reference\n");
    let mut pts = Vec::with_capacity(xs.len());
    for (i, (y, x)) in pp_positions(xs.len()).into_iter().zip(&xs).enumerate() {
        let f = model.cdf(*x);
        let _ = writeln!(csv, "{},{},{},{}", i + 1, y, f, y);
        pts.push((y, f));
    }
    let svg = Svg::new("P-P plot", "plotting position", "fitted probability")
        .line(vec![(0.0, 0.0), (1.0, 1.0)])
        .points(pts)
        .render();
    Plot {
        kind: PlotKind::Pp,
        csv,
        svg,
    }
}

/// Histogram density over Sturges classes on [min, max], then the fitted
/// pdf on `points` evenly spaced abscissae covering the data with a 10%
/// margin each side.
pub fn density(data: &[f64], model: &dyn Fitted, points: usize) -> CliResult<Plot> {
    let n = data.len();
    let edges = equal_width_edges(data, sturges(n))?;
    let mut counts = vec![0usize; edges.len() - 1];
    for &x in data {
        let j = edges[1..edges.len() - 1].partition_point(|&e| e <= x);
        counts[j] += 1;
    }
    let mut csv = String::from("kind,x_lo,x_hi,x,density\n");
    let mut bars = Vec::new();
    for (j, &c) in counts.iter().enumerate() {
        let (lo, hi) = (edges[j], edges[j + 1]);
        let d = c as f64 / (n as f64 * (hi - lo));
        let _ = writeln!(csv, "bar,{},{},{},{}", lo, hi, 0.5 * (lo + hi), d);
        bars.push((lo, hi, d));
    }
    let (min, max) = (edges[0], edges[edges.len() - 1]);
    let pad = 0.1 * (max - min);
    let (a, b) = (min - pad, max + pad);
    let mut curve = Vec::with_capacity(points);
    for i in 0..points {
        let x = a + (b - a) * i as f64 / (points - 1) as f64;
        let d = model.pdf(x);
        let _ = writeln!(csv, "curve,,,{},{}", x, d);
        curve.push((x, d));
    }
    let svg = Svg::new("Density", "value", "density")
        .bars(bars)
        .line(curve)
        .render();
    Ok(Plot {
        kind: PlotKind::Density,
        csv,
        svg,
    })
}

pub fn timeseries(series: &AnnualSeries) -> Plot {
    let mut csv = String::from("year,value,imputed\n");
    let mut pts = Vec::new();
    for r in &series.records {
        let v = r.value.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{}", r.year, v, r.imputed);
        if let Some(v) = r.value {
            pts.push((r.year as f64, v));
        }
    }
    let svg = Svg::new("Annual maxima", "year", "value")
        .line(pts.clone())
        .points(pts)
        .render();
    Plot {
        kind: PlotKind::Timeseries,
        csv,
        svg,
    }
}

pub fn make(
    kind: PlotKind,
    series: &AnnualSeries,
    model: &dyn Fitted,
    qq_offset: f64,
    curve_points: usize,
) -> CliResult<Plot> {
    let data = series.values();
    if data.is_empty() {
        return Err(CliError::validation("nothing to plot"));
    }
    match kind {
        PlotKind::Qq => qq(&data, model, qq_offset),
        PlotKind::Pp => Ok(pp(&data, model)),
        PlotKind::Density => density(&data, model, curve_points),
        PlotKind::Timeseries => Ok(timeseries(series)),
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

const W: f64 = 480.0;
const H: f64 = 360.0;
const M: f64 = 48.0;

struct Svg {
    title: &'static str,
    xlabel: &'static str,
    ylabel: &'static str,
    points: Vec<(f64, f64)>,
    lines: Vec<Vec<(f64, f64)>>,
    bars: Vec<(f64, f64, f64)>,
}

impl Svg {
    fn new(title: &'static str, xlabel: &'static str, ylabel: &'static str) -> Self {
        Self {
            title,
            xlabel,
            ylabel,
            points: Vec::new(),
            lines: Vec::new(),
            bars: Vec::new(),
        }
    }

    fn points(mut self, p: Vec<(f64, f64)>) -> Self {
        self.points = p;
        self
    }

    fn line(mut self, l: Vec<(f64, f64)>) -> Self {
        self.lines.push(l);
        self
    }

    fn bars(mut self, b: Vec<(f64, f64, f64)>) -> Self {
        self.bars = b;
        self
    }

    fn render(&self) -> String {
        let xs = self
            .points
            .iter()
            .map(|p| p.0)
            .chain(self.lines.iter().flatten().map(|p| p.0))
            .chain(self.bars.iter().flat_map(|b| [b.0, b.1]));
        let ys = self
            .points
            .iter()
            .map(|p| p.1)
            .chain(self.lines.iter().flatten().map(|p| p.1))
            .chain(self.bars.iter().flat_map(|b| [0.0, b.2]));
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#,
            W / 2.0,
            self.title
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{} [{}, {}]</text>"#,
            W / 2.0,
            H - 14.0,
            self.xlabel,
            crate::report::g(x0),
            crate::report::g(x1)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{} [{}, {}]</text>"#,
            H / 2.0,
            H / 2.0,
            self.ylabel,
            crate::report::g(y0),
            crate::report::g(y1)
        );
        for &(lo, hi, h) in &self.bars {
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#c8d8e8" stroke="#607890"/>"##,
                sx(lo),
                sy(h),
                sx(hi) - sx(lo),
                sy(y0.max(0.0)) - sy(h)
            );
        }
        for l in &self.lines {
            let path: Vec<String> = l
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#b03030"/>"##,
                path.join(" ")
            );
        }
        for &(x, y) in &self.points {
            if x.is_finite() && y.is_finite() {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
                    sx(x),
                    sy(y)
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pp_abscissae_for_three() {
        let p = pp(&[3.0, 1.0, 2.0], &GevParams::gumbel(0.0, 1.0).unwrap());
        let xs: Vec<&str> = p
            .csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(xs, vec!["0.125", "0.375", "0.625"]);
    }

    #[test]
    fn qq_at_exact_quantiles_is_diagonal() {
        let m = GevParams::gev(39.22, 2.182, -0.237).unwrap();
        let n = 51;
        let data: Vec<f64> = qq_positions(n, 0.5)
            .into_iter()
            .map(|u| m.quantile(u).unwrap())
            .collect();
        let p = qq(&data, &m, 0.5).unwrap();
        for line in p.csv.lines().skip(1) {
            let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert!((f[2] - f[3]).abs() < 1e-9);
        }
    }

    #[test]
    fn density_rows() {
        let m = GevParams::gev(0.0, 1.0, -0.2).unwrap();
        let data: Vec<f64> = (0..51).map(|i| -2.0 + i as f64 * 0.08).collect();
        let p = density(&data, &m, 200).unwrap();
        let rows = p.csv.lines().count() - 1;
        assert_eq!(rows, 7 + 200);
        assert!(p.svg.starts_with("<svg"));
    }

    #[test]
    fn mixture_quantile_inverts_cdf() {
        let b = GevParams::gev(0.0, 1.0, -0.2).unwrap();
        let a = GevParams::gev(4.0, 0.5, -0.2).unwrap();
        let m = MixtureModel::new(0.3, b, a).unwrap();
        for u in [0.01, 0.3, 0.5, 0.9, 0.999] {
            let x = Fitted::quantile(&m, u).unwrap();
            assert!((m.cdf(x) - u).abs() < 1e-10);
        }
    }
}
