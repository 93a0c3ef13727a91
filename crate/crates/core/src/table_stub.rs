//! Recorded p-value tables of an earlier search, usable as an [`Objective`].
//!
//! Each table is a one-dimensional curve: one of (alternative location, base
//! scale, alternative scale) varies while the other two are fixed. A model is
//! looked up in the first table whose fixed coordinates match and whose range
//! covers the varying coordinate; between recorded rows the p-value is
//! linearly interpolated, knots return the recorded value exactly, and models
//! no table covers score 0.

use crate::distributions::GevParams;
use crate::mixture::MixtureModel;
use crate::search::{Evaluation, Objective, ParamRange, SearchParam, SearchSpec};

const MATCH_TOL: f64 = 1e-9;

pub const BASE_LOCATION: f64 = 39.22;
pub const BASE_SCALE: f64 = 2.182;
pub const SHAPE: f64 = -0.237;
/// Chi-square p-value of the single GEV fit; also the mixture weight.
pub const BASE_P: f64 = 0.05416;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    AltLocation,
    BaseScale,
    AltScale,
}

#[derive(Debug, Clone)]
struct Curve {
    axis: Axis,
    /// (alt_location, base_scale, alt_scale) with the varying slot ignored.
    fixed: [f64; 3],
    /// (value, p-value, statistic) sorted by value.
    rows: Vec<(f64, f64, Option<f64>)>,
}

impl Curve {
    fn slot(axis: Axis) -> usize {
        match axis {
            Axis::AltLocation => 0,
            Axis::BaseScale => 1,
            Axis::AltScale => 2,
        }
    }

    fn lookup(&self, coords: [f64; 3]) -> Option<Evaluation> {
        let vary = Self::slot(self.axis);
        for i in 0..3 {
            if i != vary && (coords[i] - self.fixed[i]).abs() > MATCH_TOL {
                return None;
            }
        }
        let v = coords[vary];
        let first = self.rows.first()?;
        let last = self.rows.last()?;
        if v < first.0 - MATCH_TOL || v > last.0 + MATCH_TOL {
            return None;
        }
        if let Some(r) = self.rows.iter().find(|r| (r.0 - v).abs() <= MATCH_TOL) {
            return Some(Evaluation {
                p_value: r.1,
                statistic: r.2,
            });
        }
        let hi = self.rows.partition_point(|r| r.0 < v);
        let (a, b) = (self.rows[hi - 1], self.rows[hi]);
        let t = (v - a.0) / (b.0 - a.0);
        let statistic = match (a.2, b.2) {
            (Some(sa), Some(sb)) => Some(sa + t * (sb - sa)),
            _ => None,
        };
        Some(Evaluation {
            p_value: a.1 + t * (b.1 - a.1),
            statistic,
        })
    }
}

/// Objective replaying the recorded search tables.
#[derive(Debug, Clone)]
pub struct TableStub {
    curves: Vec<Curve>,
}

impl Default for TableStub {
    fn default() -> Self {
        Self::new()
    }
}

fn rows(r: &[(f64, f64)]) -> Vec<(f64, f64, Option<f64>)> {
    let mut v: Vec<_> = r.iter().map(|&(x, p)| (x, p, None)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

impl TableStub {
    pub fn new() -> Self {
        const MU2: f64 = 43.78;
        // Location scan at σ1 = σ2 = 2.182. The first row is the single GEV
        // (alternative equal to the base), whose p-value is BASE_P.
        let location = Curve {
            axis: Axis::AltLocation,
            fixed: [f64::NAN, BASE_SCALE, BASE_SCALE],
            rows: vec![
                (BASE_LOCATION, BASE_P, None),
                (39.50, 0.0549001, Some(12.3349601)),
                (40.00, 0.0569662, Some(12.2330958)),
                (43.75, 0.0830076, Some(11.1787136)),
                (43.76, 0.0830096, Some(11.1786461)),
                (43.77, 0.0830108, Some(11.1786062)),
                (43.78, 0.0830111, Some(11.1785939)),
                (43.79, 0.0830107, Some(11.1786093)),
                (43.80, 0.0830094, Some(11.1786524)),
                (43.81, 0.0830073, Some(11.1787231)),
            ],
        };
        // σ2 varied at σ1 = 2.182 (two tables, increasing and decreasing σ2).
        let alt_scale_at_base = Curve {
            axis: Axis::AltScale,
            fixed: [MU2, BASE_SCALE, f64::NAN],
            rows: rows(&[
                (2.182, 0.08301),
                (2.2, 0.08269),
                (2.3, 0.08105),
                (2.6, 0.07699),
                (2.9, 0.07396),
                (3.0, 0.07312),
                (3.5, 0.06988),
                (2.1, 0.08450),
                (2.0, 0.08650),
                (1.9, 0.08872),
                (1.5, 0.10045),
                (1.0, 0.12809),
                (0.5, 0.18463),
                (0.1, 0.2514),
                (0.05, 0.25267),
            ]),
        };
        // σ1 varied at σ2 = 2.182. Two rows (σ1 = 2.6, 2.8) were never recorded
        // and are interpolated.
        let base_scale = Curve {
            axis: Axis::BaseScale,
            fixed: [MU2, f64::NAN, BASE_SCALE],
            rows: rows(&[
                (2.182, 0.08301),
                (2.1, 0.06272),
                (2.0, 0.03899),
                (1.9, 0.01955),
                (1.7, 0.00153),
                (1.5, 0.000003),
                (2.2, 0.08738),
                (2.3, 0.11035),
                (2.5, 0.14622),
                (2.7, 0.16783),
                (2.9, 0.17837),
                (3.00, 0.18071),
                (3.05, 0.18133),
                (3.10, 0.18164),
                (3.15, 0.18169),
                (3.2, 0.18150),
                (3.3, 0.18055),
                (3.4, 0.17900),
            ]),
        };
        // σ2 varied at σ1 = 3.15.
        let alt_scale_at_best = Curve {
            axis: Axis::AltScale,
            fixed: [MU2, 3.15, f64::NAN],
            rows: rows(&[
                (2.182, 0.18169),
                (2.2, 0.1816),
                (2.3, 0.1812),
                (2.5, 0.1807),
                (2.8, 0.1804),
                (3.0, 0.1805),
                (3.2, 0.1806),
                (2.0, 0.1825),
                (1.8, 0.1838),
                (1.5, 0.1868),
                (1.0, 0.1998),
                (0.8, 0.2100),
                (0.7, 0.2159),
                (0.6, 0.2215),
                (0.5, 0.2258),
                (0.4, 0.2278),
                (0.3, 0.2266),
                (0.2, 0.2212),
                (0.1, 0.2104),
            ]),
        };
        Self {
            curves: vec![location, alt_scale_at_base, base_scale, alt_scale_at_best],
        }
    }

    /// Base GEV (39.22, 2.182, -0.237), alternative equal to the base, weight 0.05416.
    pub fn recorded_initial() -> MixtureModel {
        let base = GevParams::gev(BASE_LOCATION, BASE_SCALE, SHAPE).expect("valid constants");
        MixtureModel::new(BASE_P, base, base).expect("valid constants")
    }

    /// Stage order and grids that replay the recorded trajectory.
    pub fn recorded_spec() -> SearchSpec {
        SearchSpec {
            stages: vec![
                (
                    SearchParam::AltLocation,
                    ParamRange::new(39.50, 43.81, 0.01),
                ),
                (SearchParam::BaseScale, ParamRange::new(1.5, 3.4, 0.05)),
                (SearchParam::AltScale, ParamRange::new(0.1, 3.2, 0.1)),
            ],
            ..SearchSpec::default()
        }
    }
}

impl Objective for TableStub {
    fn evaluate(&self, model: &MixtureModel) -> Evaluation {
        let coords = [
            model.component_alt.location,
            model.component_base.scale,
            model.component_alt.scale,
        ];
        self.curves
            .iter()
            .find_map(|c| c.lookup(coords))
            .unwrap_or(Evaluation {
                p_value: 0.0,
                statistic: None,
            })
    }
}
