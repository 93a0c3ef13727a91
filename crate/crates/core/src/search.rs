//! Coordinate-wise grid search over the mixture's free parameters, maximizing
//! the chi-square goodness-of-fit p-value.
//!
//! Each stage scans one parameter over a grid while everything else is held
//! fixed, and commits the argmax only when it beats the incumbent p-value by
//! more than `stop_tol`. After a full cycle the grids are re-centred on the
//! incumbent with half the step and half the width, for up to
//! `refine_rounds` further cycles or until a cycle commits nothing.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::GevParams;
use crate::error::{domain, Error, Result};
use crate::fitting::FitResult;
use crate::fmt::sig;
use crate::mixture::{make_mixture, MixtureModel};
use crate::stats::{
    amalgamate, build_bins, chi_square_from_table, chi_square_gof, tabulate, BinCount,
};

pub const DEFAULT_SCALE_FLOOR: f64 = 0.01;
const GRID_SNAP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchParam {
    AltLocation,
    BaseScale,
    AltScale,
    BaseLocation,
    BaseShape,
    AltShape,
}

impl SearchParam {
    pub const ALL: [SearchParam; 6] = [
        SearchParam::AltLocation,
        SearchParam::BaseScale,
        SearchParam::AltScale,
        SearchParam::BaseLocation,
        SearchParam::BaseShape,
        SearchParam::AltShape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SearchParam::AltLocation => "alt_location",
            SearchParam::BaseScale => "base_scale",
            SearchParam::AltScale => "alt_scale",
            SearchParam::BaseLocation => "base_location",
            SearchParam::BaseShape => "base_shape",
            SearchParam::AltShape => "alt_shape",
        }
    }

    pub fn parse(s: &str) -> Result<SearchParam> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| domain(format!("unknown search parameter '{}'", s.trim())))
    }

    pub fn is_scale(self) -> bool {
        matches!(self, SearchParam::BaseScale | SearchParam::AltScale)
    }

    pub fn get(self, m: &MixtureModel) -> f64 {
        match self {
            SearchParam::AltLocation => m.component_alt.location,
            SearchParam::BaseScale => m.component_base.scale,
            SearchParam::AltScale => m.component_alt.scale,
            SearchParam::BaseLocation => m.component_base.location,
            SearchParam::BaseShape => m.component_base.shape,
            SearchParam::AltShape => m.component_alt.shape,
        }
    }

    /// Copy of `m` with this parameter replaced; the weight is never touched.
    pub fn with(self, m: &MixtureModel, value: f64) -> Result<MixtureModel> {
        let mut out = *m;
        let slot = match self {
            SearchParam::AltLocation => &mut out.component_alt.location,
            SearchParam::BaseScale => &mut out.component_base.scale,
            SearchParam::AltScale => &mut out.component_alt.scale,
            SearchParam::BaseLocation => &mut out.component_base.location,
            SearchParam::BaseShape => &mut out.component_base.shape,
            SearchParam::AltShape => &mut out.component_alt.shape,
        };
        *slot = value;
        out.validate()?;
        Ok(out)
    }
}

impl std::fmt::Display for SearchParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl ParamRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    /// `lo, lo + step, ...` up to `hi`, snapped to a 1e-9 lattice.
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| snap(self.lo + i as f64 * self.step))
            .collect()
    }
}

fn snap(v: f64) -> f64 {
    (v * GRID_SNAP).round() / GRID_SNAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub stages: Vec<(SearchParam, ParamRange)>,
    pub refine_rounds: usize,
    pub stop_tol: f64,
    pub scale_floor: f64,
}

impl SearchSpec {
    /// Stage order location → base scale → alternative scale with steps
    /// 0.01 / 0.05 / 0.1, ranges derived from the data and the base fit.
    pub fn for_data(base: &GevParams, data: &[f64]) -> Result<SearchSpec> {
        if data.is_empty() {
            return Err(domain("search needs data"));
        }
        let (min, max) = data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        let on_lattice = |v: f64, step: f64, up: bool| {
            let k = v / step;
            snap(if up { k.ceil() } else { k.floor() } * step)
        };
        let s = base.scale;
        let loc = ParamRange::new(
            on_lattice(min, 0.01, true),
            on_lattice(max, 0.01, false),
            0.01,
        );
        let base_scale = ParamRange::new(
            on_lattice((0.5 * s).max(DEFAULT_SCALE_FLOOR), 0.05, true),
            on_lattice(2.0 * s, 0.05, false),
            0.05,
        );
        let alt_scale = ParamRange::new(0.1, on_lattice(1.6 * s, 0.1, false).max(0.2), 0.1);
        let spec = SearchSpec {
            stages: vec![
                (SearchParam::AltLocation, loc),
                (SearchParam::BaseScale, base_scale),
                (SearchParam::AltScale, alt_scale),
            ],
            ..SearchSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stop_tol > 0.0) {
            return Err(domain("stop_tol must be positive"));
        }
        if !(self.scale_floor > 0.0) {
            return Err(domain("scale floor must be positive"));
        }
        for (param, r) in &self.stages {
            if !(r.lo < r.hi) {
                return Err(domain(format!("{param}: lo must be below hi")));
            }
            if !(r.step > 0.0) || r.step > r.hi - r.lo {
                return Err(domain(format!("{param}: step must lie in (0, hi - lo]")));
            }
            if param.is_scale() && r.lo < self.scale_floor {
                return Err(domain(format!(
                    "{param}: lo {} is below the scale floor {}",
                    r.lo, self.scale_floor
                )));
            }
        }
        Ok(())
    }
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            stages: Vec::new(),
            refine_rounds: 3,
            stop_tol: 1e-6,
            scale_floor: DEFAULT_SCALE_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub p_value: f64,
    /// Chi-square statistic behind the p-value, when known.
    pub statistic: Option<f64>,
}

/// Quantity maximized by the search.
pub trait Objective: Sync {
    fn evaluate(&self, model: &MixtureModel) -> Evaluation;
}

/// Live objective: chi-square p-value with `df_penalty = 0`, on classes formed
/// once from the data and the base model and then held fixed.
#[derive(Debug, Clone)]
pub struct ChiSquareObjective {
    data: Vec<f64>,
    edges: Vec<f64>,
}

impl ChiSquareObjective {
    pub fn new(data: &[f64], base: &GevParams, bins: BinCount) -> Result<Self> {
        let table = amalgamate(&build_bins(data, |x| base.cdf(x), bins)?);
        if table.len() < 2 {
            return Err(Error::DegenerateBinning(
                "fewer than 2 classes under the base model".to_string(),
            ));
        }
        Ok(Self {
            data: data.to_vec(),
            edges: table.edges,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
}

impl Objective for ChiSquareObjective {
    fn evaluate(&self, model: &MixtureModel) -> Evaluation {
        let result = tabulate(&self.data, |x| model.cdf(x), &self.edges)
            .and_then(|t| chi_square_from_table(&t, 0));
        match result {
            Ok(r) => Evaluation {
                p_value: r.p_value,
                statistic: Some(r.statistic),
            },
            Err(_) => Evaluation {
                p_value: 0.0,
                statistic: None,
            },
        }
    }
}

/// P-value of the mixture under freshly formed classes; 0 when the binning
/// degenerates.
pub fn objective(data: &[f64], model: &MixtureModel) -> f64 {
    chi_square_gof(data, |x| model.cdf(x), BinCount::Auto, 0)
        .map(|r| r.p_value)
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub param: SearchParam,
    /// 0 for the initial cycle, then 1, 2, ... for refinements.
    pub round: usize,
    /// Incumbent when the stage started.
    pub start: MixtureModel,
    pub incoming_p: f64,
    pub grid: Vec<f64>,
    pub p_values: Vec<f64>,
    pub statistics: Vec<Option<f64>>,
    pub best_value: f64,
    pub best_p: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub initial_p: f64,
    pub stages: Vec<StageRecord>,
}

impl SearchTrace {
    /// Incumbent p-value after each stage.
    pub fn incumbent_path(&self) -> Vec<f64> {
        let mut p = self.initial_p;
        self.stages
            .iter()
            .map(|s| {
                if s.accepted {
                    p = s.best_p;
                }
                p
            })
            .collect()
    }

    pub fn final_p(&self) -> f64 {
        self.incumbent_path()
            .last()
            .copied()
            .unwrap_or(self.initial_p)
    }

    /// Sectioned CSV, one block per stage. Location and shape stages list
    /// `value, statistic, p-value`; scale stages list `σ1, σ2, P-value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.stages.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(
                out,
                "# stage {} {} round {}: best {} p={} {}",
                i + 1,
                s.param,
                s.round,
                s.best_value,
                sig(s.best_p, 10),
                if s.accepted { "accepted" } else { "kept" }
            );
            if s.param.is_scale() {
                out.push_str("σ1,σ2,P-value\n");
                for (v, p) in s.grid.iter().zip(&s.p_values) {
                    let (s1, s2) = match s.param {
                        SearchParam::BaseScale => (*v, s.start.component_alt.scale),
                        _ => (s.start.component_base.scale, *v),
                    };
                    let _ = writeln!(out, "{},{},{}", s1, s2, sig(*p, 10));
                }
            } else {
                let label = match s.param {
                    SearchParam::BaseShape | SearchParam::AltShape => "Shape (ξ)",
                    _ => "Location (μ)",
                };
                let _ = writeln!(out, "{label},Chi-square Statistic,p-value");
                for ((v, p), stat) in s.grid.iter().zip(&s.p_values).zip(&s.statistics) {
                    let stat = stat.map(|x| sig(x, 10)).unwrap_or_default();
                    let _ = writeln!(out, "{},{},{}", v, stat, sig(*p, 10));
                }
            }
        }
        out
    }
}

/// Evaluate `objective` over `grid` for one parameter. Returns the stage
/// record and the incumbent after the stage. The incumbent's own value is
/// always evaluated, so `best_p >= incoming_p`.
pub fn scan_parameter<O: Objective + ?Sized>(
    objective: &O,
    model: &MixtureModel,
    incoming_p: f64,
    param: SearchParam,
    grid: &[f64],
    spec: &SearchSpec,
) -> Result<(StageRecord, MixtureModel)> {
    if grid.is_empty() {
        return Err(domain(format!("{param}: empty grid")));
    }
    let mut values: Vec<f64> = grid.to_vec();
    let current = param.get(model);
    if !values.iter().any(|v| (v - current).abs() < 1e-12) {
        values.push(current);
    }
    values.sort_by(f64::total_cmp);
    // admissibility first, before evaluating anything
    let candidates: Vec<MixtureModel> = values
        .iter()
        .map(|&v| {
            if param.is_scale() && v < spec.scale_floor && (v - current).abs() >= 1e-12 {
                return Err(domain(format!(
                    "{param}: grid value {v} is below the scale floor {}",
                    spec.scale_floor
                )));
            }
            param.with(model, v)
        })
        .collect::<Result<_>>()?;

    let evals: Vec<Evaluation> = candidates
        .par_iter()
        .map(|m| objective.evaluate(m))
        .collect();
    let p_values: Vec<f64> = evals.iter().map(|e| sanitize(e.p_value)).collect();
    let statistics = evals.iter().map(|e| e.statistic).collect();

    // first maximum on an ascending grid = smallest value among ties
    let mut best = 0;
    for (i, &p) in p_values.iter().enumerate() {
        if p > p_values[best] {
            best = i;
        }
    }
    let best_p = p_values[best];
    let accepted = best_p > incoming_p + spec.stop_tol;
    let next = if accepted { candidates[best] } else { *model };
    Ok((
        StageRecord {
            param,
            round: 0,
            start: *model,
            incoming_p,
            grid: values,
            p_values,
            statistics,
            best_value: param.get(&candidates[best]),
            best_p,
            accepted,
        },
        next,
    ))
}

fn sanitize(p: f64) -> f64 {
    if p.is_nan() {
        0.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

fn refined_grid(
    param: SearchParam,
    range: &ParamRange,
    center: f64,
    round: usize,
    floor: f64,
) -> Vec<f64> {
    let div = (1u64 << round.min(52)) as f64;
    let step = range.step / div;
    let half_width = (range.hi - range.lo) / (2.0 * div);
    let m = (half_width / step + 1e-9).floor() as i64;
    (-m..=m)
        .map(|j| snap(center + j as f64 * step))
        .filter(|&v| !param.is_scale() || v >= floor)
        .collect()
}

/// Full search from an explicit initial mixture.
pub fn optimize_with<O: Objective + ?Sized>(
    objective: &O,
    initial: MixtureModel,
    spec: &SearchSpec,
) -> Result<(MixtureModel, SearchTrace)> {
    spec.validate()?;
    initial.validate()?;
    let initial_p = sanitize(objective.evaluate(&initial).p_value);
    let mut trace = SearchTrace {
        initial_p,
        stages: Vec::new(),
    };
    let mut model = initial;
    let mut p = initial_p;
    if spec.stages.is_empty() {
        return Ok((model, trace));
    }
    for round in 0..=spec.refine_rounds {
        let mut improved = false;
        for (param, range) in &spec.stages {
            let grid = if round == 0 {
                range.grid()
            } else {
                refined_grid(*param, range, param.get(&model), round, spec.scale_floor)
            };
            // values the family constraints rule out are skipped, not errors
            let grid: Vec<f64> = grid
                .into_iter()
                .filter(|&v| param.with(&model, v).is_ok())
                .collect();
            let grid = if grid.is_empty() {
                vec![param.get(&model)]
            } else {
                grid
            };
            let (mut record, next) = scan_parameter(objective, &model, p, *param, &grid, spec)?;
            record.round = round;
            if record.accepted {
                improved = true;
                p = record.best_p;
                model = next;
            }
            trace.stages.push(record);
        }
        if !improved {
            break;
        }
    }
    Ok((model, trace))
}

/// Base fit → mixture with weight `base_p` and alternative equal to the base
/// → coordinate search under the fixed-class chi-square objective.
pub fn optimize(
    data: &[f64],
    base_fit: &FitResult,
    base_p: f64,
    spec: &SearchSpec,
    bins: BinCount,
) -> Result<(MixtureModel, SearchTrace)> {
    if !base_fit.converged {
        return Err(Error::Numerical(
            "base fit did not converge; refusing to search".to_string(),
        ));
    }
    let initial = make_mixture(base_fit, base_p, base_fit.params)?;
    let objective = ChiSquareObjective::new(data, &base_fit.params, bins)?;
    optimize_with(&objective, initial, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table_stub::TableStub;
    use std::sync::Mutex;

    struct Peak {
        at: f64,
    }

    impl Objective for Peak {
        fn evaluate(&self, m: &MixtureModel) -> Evaluation {
            let d = m.component_alt.location - self.at;
            Evaluation {
                p_value: (-d * d).exp() * 0.5,
                statistic: None,
            }
        }
    }

    fn base_model() -> MixtureModel {
        let b = GevParams::gev(0.0, 1.0, -0.2).unwrap();
        MixtureModel::new(0.1, b, b).unwrap()
    }

    #[test]
    fn grid_is_snapped() {
        let g = ParamRange::new(1.5, 3.4, 0.05).grid();
        assert_eq!(g.len(), 39);
        assert!(g.contains(&3.15));
        assert_eq!(*g.last().unwrap(), 3.4);
    }

    #[test]
    fn single_point_grid_keeps_current() {
        let m = base_model();
        let stub = Peak { at: 2.0 };
        let p0 = stub.evaluate(&m).p_value;
        let (rec, next) = scan_parameter(
            &stub,
            &m,
            p0,
            SearchParam::AltLocation,
            &[0.0],
            &SearchSpec::default(),
        )
        .unwrap();
        assert_eq!(rec.best_p, p0);
        assert!(!rec.accepted);
        assert_eq!(next, m);
    }

    #[test]
    fn inadmissible_grid_rejected_before_evaluation() {
        struct Counting(Mutex<usize>);
        impl Objective for Counting {
            fn evaluate(&self, _: &MixtureModel) -> Evaluation {
                *self.0.lock().unwrap() += 1;
                Evaluation {
                    p_value: 0.5,
                    statistic: None,
                }
            }
        }
        let c = Counting(Mutex::new(0));
        let r = scan_parameter(
            &c,
            &base_model(),
            0.0,
            SearchParam::AltScale,
            &[0.5, 0.001],
            &SearchSpec::default(),
        );
        assert!(r.is_err());
        assert_eq!(*c.0.lock().unwrap(), 0);
    }

    #[test]
    fn ties_break_to_smallest_value() {
        struct Flat;
        impl Objective for Flat {
            fn evaluate(&self, _: &MixtureModel) -> Evaluation {
                Evaluation {
                    p_value: 0.3,
                    statistic: None,
                }
            }
        }
        let (rec, _) = scan_parameter(
            &Flat,
            &base_model(),
            0.0,
            SearchParam::AltLocation,
            &[3.0, 1.0, 2.0],
            &SearchSpec::default(),
        )
        .unwrap();
        assert_eq!(rec.best_value, 0.0);
        assert_eq!(rec.grid, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn empty_spec_returns_initial() {
        let m = base_model();
        let spec = SearchSpec::default();
        let (out, trace) = optimize_with(&Peak { at: 1.0 }, m, &spec).unwrap();
        assert_eq!(out, m);
        assert!(trace.stages.is_empty());
    }

    #[test]
    fn refinement_converges_on_peak() {
        let spec = SearchSpec {
            stages: vec![(SearchParam::AltLocation, ParamRange::new(-2.0, 4.0, 0.1))],
            refine_rounds: 4,
            ..SearchSpec::default()
        };
        let (m, trace) = optimize_with(&Peak { at: 1.234 }, base_model(), &spec).unwrap();
        assert!((m.component_alt.location - 1.234).abs() <= 0.1 / 16.0);
        let path = trace.incumbent_path();
        assert!(path.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn weight_is_frozen() {
        struct Recorder(Mutex<Vec<f64>>);
        impl Objective for Recorder {
            fn evaluate(&self, m: &MixtureModel) -> Evaluation {
                self.0.lock().unwrap().push(m.weight);
                Evaluation {
                    p_value: m.component_base.scale / 10.0,
                    statistic: None,
                }
            }
        }
        let r = Recorder(Mutex::new(Vec::new()));
        let spec = SearchSpec {
            stages: vec![
                (SearchParam::AltLocation, ParamRange::new(-1.0, 1.0, 0.5)),
                (SearchParam::BaseScale, ParamRange::new(0.5, 3.0, 0.5)),
            ],
            ..SearchSpec::default()
        };
        optimize_with(&r, base_model(), &spec).unwrap();
        let w = r.0.lock().unwrap();
        assert!(!w.is_empty());
        assert!(w.iter().all(|&x| x == 0.1));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SearchSpec {
            stages: vec![(SearchParam::AltScale, ParamRange::new(0.001, 1.0, 0.1))],
            ..SearchSpec::default()
        };
        assert!(spec.validate().is_err());
        spec.stages[0].1 = ParamRange::new(1.0, 0.5, 0.1);
        assert!(spec.validate().is_err());
        spec.stages[0].1 = ParamRange::new(0.1, 0.5, 1.0);
        assert!(spec.validate().is_err());
        assert!(SearchParam::parse("alt_width").is_err());
        assert_eq!(
            SearchParam::parse("base_scale").unwrap(),
            SearchParam::BaseScale
        );
    }

    #[test]
    fn stub_directional_tables() {
        let stub = TableStub::new();
        let m = SearchParam::AltLocation
            .with(&TableStub::recorded_initial(), 43.78)
            .unwrap();
        let spec = SearchSpec::default();
        let up = [2.182, 2.2, 2.3, 2.6, 2.9, 3.0, 3.5];
        let (rec, _) = scan_parameter(&stub, &m, 0.0, SearchParam::AltScale, &up, &spec).unwrap();
        assert_eq!(rec.best_value, 2.182);
        let down = [0.05, 0.1, 0.5, 1.0, 1.5, 1.9, 2.0, 2.1];
        let (rec, _) = scan_parameter(&stub, &m, 0.0, SearchParam::AltScale, &down, &spec).unwrap();
        assert_eq!(rec.best_value, 0.05);
        assert_eq!(rec.best_p, 0.25267);
    }

    #[test]
    fn stub_location_scan() {
        let stub = TableStub::new();
        let grid = ParamRange::new(43.75, 43.81, 0.01).grid();
        let m = TableStub::recorded_initial();
        let (rec, next) = scan_parameter(
            &stub,
            &m,
            0.05416,
            SearchParam::AltLocation,
            &grid,
            &SearchSpec::default(),
        )
        .unwrap();
        assert_eq!(rec.best_value, 43.78);
        assert_eq!(rec.best_p, 0.0830111);
        assert_eq!(next.component_alt.location, 43.78);
    }
}
