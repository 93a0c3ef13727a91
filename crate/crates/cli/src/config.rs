//! Flat `key = value` run configuration.
//!
//! `[section]` headers prefix the keys that follow (`[fit]` + `max_iter` is
//! `fit.max_iter`). `#` and `;` start comments. Unknown keys are rejected.

use evmix::stats::{BinCount, KsCoefficients};
use evmix::{Family, FitConfig, ParamRange, SearchParam, SearchSpec};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// (key, default, description); the source of `--help` and of the
/// canonical rendering that is hashed into the provenance block.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "fit.families",
        "gev, gumbel, weibull, frechet",
        "families fitted by `fit`, `gof` and `report`",
    ),
    ("fit.max_iter", "500", "optimizer iteration limit"),
    (
        "fit.tol_f",
        "1e-10",
        "relative log-likelihood change for convergence",
    ),
    (
        "fit.tol_x",
        "1e-8",
        "relative parameter step for convergence",
    ),
    ("fit.shape_lo", "-0.99", "lower shape bound"),
    ("fit.shape_hi", "0.99", "upper shape bound"),
    (
        "gof.bins",
        "auto",
        "chi-square class count before merging (auto = Sturges)",
    ),
    (
        "gof.alpha",
        "0.05",
        "KS significance level (--alpha overrides)",
    ),
    (
        "gof.ks_table",
        "0.05:0.89",
        "KS coefficients c(alpha), critical value c/sqrt(n)",
    ),
    (
        "search.stages",
        "alt_location, base_scale, alt_scale",
        "scan order",
    ),
    (
        "search.range.<param>",
        "from data",
        "grid for one stage as `lo, hi, step`",
    ),
    (
        "search.refine_rounds",
        "3",
        "extra cycles with halved grids",
    ),
    (
        "search.stop_tol",
        "1e-6",
        "minimum p-value gain to accept a stage",
    ),
    (
        "search.scale_floor",
        "0.01",
        "smallest admissible scale on refined grids",
    ),
    (
        "plot.qq_offset",
        "0.5",
        "a in the Q-Q position (i - a) / (n + 1 - 2a)",
    ),
    (
        "plot.curve_points",
        "200",
        "points on fitted density curves",
    ),
    ("plot.svg", "false", "also write SVG renderings"),
    (
        "data.impute",
        "true",
        "fill isolated missing years from their neighbours",
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub families: Vec<Family>,
    pub fit: FitConfig,
    pub bins: BinCount,
    pub alpha: f64,
    pub ks_table: Vec<(f64, f64)>,
    pub stages: Vec<SearchParam>,
    pub ranges: Vec<(SearchParam, ParamRange)>,
    pub refine_rounds: usize,
    pub stop_tol: f64,
    pub scale_floor: f64,
    pub qq_offset: f64,
    pub curve_points: usize,
    pub svg: bool,
    pub impute: bool,
}

impl Default for Config {
    fn default() -> Self {
        let spec = SearchSpec::default();
        Self {
            families: Family::ALL.to_vec(),
            fit: FitConfig::default(),
            bins: BinCount::Auto,
            alpha: 0.05,
            ks_table: vec![(0.05, 0.89)],
            stages: vec![
                SearchParam::AltLocation,
                SearchParam::BaseScale,
                SearchParam::AltScale,
            ],
            ranges: Vec::new(),
            refine_rounds: spec.refine_rounds,
            stop_tol: spec.stop_tol,
            scale_floor: spec.scale_floor,
            qq_offset: 0.5,
            curve_points: 200,
            svg: false,
            impute: true,
        }
    }
}

fn bad(line: usize, key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("config line {line}: {key}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| bad(line, key, format!("cannot parse '{v}'")))
}

fn list(v: &str) -> Vec<&str> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn parse_families(v: &str) -> CliResult<Vec<Family>> {
    let fams = list(v)
        .into_iter()
        .map(|s| Family::parse(s).ok_or_else(|| CliError::usage(format!("unknown family '{s}'"))))
        .collect::<CliResult<Vec<_>>>()?;
    if fams.is_empty() {
        return Err(CliError::usage("family list is empty"));
    }
    Ok(fams)
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Config> {
        let mut c = Config::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::validation(format!("config line {n}: expected key = value"))
            })?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            c.set(n, &key, v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, n: usize, key: &str, v: &str) -> CliResult<()> {
        match key {
            "fit.families" => {
                self.families = parse_families(v)?;
            }
            "fit.max_iter" => self.fit.max_iter = num(n, key, v)?,
            "fit.tol_f" => self.fit.tol_f = num(n, key, v)?,
            "fit.tol_x" => self.fit.tol_x = num(n, key, v)?,
            "fit.shape_lo" => self.fit.shape_lo = num(n, key, v)?,
            "fit.shape_hi" => self.fit.shape_hi = num(n, key, v)?,
            "gof.bins" => {
                self.bins = if v == "auto" {
                    BinCount::Auto
                } else {
                    BinCount::Fixed(num(n, key, v)?)
                }
            }
            "gof.alpha" => self.alpha = num(n, key, v)?,
            "gof.ks_table" => {
                self.ks_table = list(v)
                    .into_iter()
                    .map(|pair| {
                        let (a, c) = pair.split_once(':').ok_or_else(|| {
                            bad(n, key, format!("expected alpha:coefficient, got '{pair}'"))
                        })?;
                        Ok((num(n, key, a.trim())?, num(n, key, c.trim())?))
                    })
                    .collect::<CliResult<_>>()?;
            }
            "search.stages" => {
                self.stages = list(v)
                    .into_iter()
                    .map(|s| SearchParam::parse(s).map_err(|e| bad(n, key, e)))
                    .collect::<CliResult<_>>()?;
            }
            "search.refine_rounds" => self.refine_rounds = num(n, key, v)?,
            "search.stop_tol" => self.stop_tol = num(n, key, v)?,
            "search.scale_floor" => self.scale_floor = num(n, key, v)?,
            "plot.qq_offset" => self.qq_offset = num(n, key, v)?,
            "plot.curve_points" => self.curve_points = num(n, key, v)?,
            "plot.svg" => self.svg = num(n, key, v)?,
            "data.impute" => self.impute = num(n, key, v)?,
            _ => {
                if let Some(p) = key.strip_prefix("search.range.") {
                    let param = SearchParam::parse(p).map_err(|e| bad(n, key, e))?;
                    let parts = list(v);
                    if parts.len() != 3 {
                        return Err(bad(n, key, "expected lo, hi, step"));
                    }
                    let r = ParamRange::new(
                        num(n, key, parts[0])?,
                        num(n, key, parts[1])?,
                        num(n, key, parts[2])?,
                    );
                    self.ranges.retain(|(q, _)| *q != param);
                    self.ranges.push((param, r));
                } else {
                    return Err(CliError::validation(format!(
                        "config line {n}: unknown parameter '{key}'"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let f = &self.fit;
        if f.max_iter == 0 || !(f.tol_f > 0.0) || !(f.tol_x > 0.0) {
            return Err(CliError::validation(
                "fit: max_iter, tol_f and tol_x must be positive",
            ));
        }
        if !(-1.0 < f.shape_lo && f.shape_lo < 0.0 && 0.0 < f.shape_hi && f.shape_hi < 1.0) {
            return Err(CliError::validation(
                "fit: need -1 < shape_lo < 0 < shape_hi < 1",
            ));
        }
        if matches!(self.bins, BinCount::Fixed(k) if k < 2) {
            return Err(CliError::validation("gof.bins: need at least 2 classes"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::validation("gof.alpha must lie in (0, 1)"));
        }
        if self
            .ks_table
            .iter()
            .any(|&(a, c)| !(a > 0.0 && a < 1.0 && c > 0.0))
        {
            return Err(CliError::validation(
                "gof.ks_table: entries need 0 < alpha < 1, c > 0",
            ));
        }
        if self.stages.is_empty() {
            return Err(CliError::validation("search.stages is empty"));
        }
        if !(0.0..1.0).contains(&self.qq_offset) {
            return Err(CliError::validation("plot.qq_offset must lie in [0, 1)"));
        }
        if self.curve_points < 2 {
            return Err(CliError::validation("plot.curve_points must be at least 2"));
        }
        Ok(())
    }

    pub fn ks_coefficients(&self) -> KsCoefficients {
        self.ks_table
            .iter()
            .fold(KsCoefficients::empty(), |t, &(a, c)| t.with(a, c))
    }

    /// Search spec for a base fit on `data`: configured ranges where given,
    /// data-derived ones otherwise.
    pub fn search_spec(&self, base: &evmix::GevParams, data: &[f64]) -> CliResult<SearchSpec> {
        let derived = SearchSpec::for_data(base, data)?;
        let stages = self
            .stages
            .iter()
            .map(|&p| {
                let configured = self.ranges.iter().find(|(q, _)| *q == p).map(|(_, r)| *r);
                let fallback = derived
                    .stages
                    .iter()
                    .find(|(q, _)| *q == p)
                    .map(|(_, r)| *r);
                configured.or(fallback).map(|r| (p, r)).ok_or_else(|| {
                    CliError::validation(format!("search.range.{p} must be set for this stage"))
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let spec = SearchSpec {
            stages,
            refine_rounds: self.refine_rounds,
            stop_tol: self.stop_tol,
            scale_floor: self.scale_floor,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Every effective setting, one `key = value` per line in a fixed order.
    pub fn canonical(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut lines = vec![
            format!(
                "fit.families = {}",
                join(self.families.iter().map(|f| f.name().to_string()).collect())
            ),
            format!("fit.max_iter = {}", self.fit.max_iter),
            format!("fit.tol_f = {:e}", self.fit.tol_f),
            format!("fit.tol_x = {:e}", self.fit.tol_x),
            format!("fit.shape_lo = {}", self.fit.shape_lo),
            format!("fit.shape_hi = {}", self.fit.shape_hi),
            format!(
                "gof.bins = {}",
                match self.bins {
                    BinCount::Auto => "auto".to_string(),
                    BinCount::Fixed(k) => k.to_string(),
                }
            ),
            format!("gof.alpha = {}", self.alpha),
            format!(
                "gof.ks_table = {}",
                join(
                    self.ks_table
                        .iter()
                        .map(|(a, c)| format!("{a}:{c}"))
                        .collect()
                )
            ),
            format!(
                "search.stages = {}",
                join(self.stages.iter().map(|p| p.name().to_string()).collect())
            ),
        ];
        let mut ranges = self.ranges.clone();
        ranges.sort_by_key(|(p, _)| p.name());
        for (p, r) in ranges {
            lines.push(format!("search.range.{p} = {}, {}, {}", r.lo, r.hi, r.step));
        }
        lines.extend([
            format!("search.refine_rounds = {}", self.refine_rounds),
            format!("search.stop_tol = {:e}", self.stop_tol),
            format!("search.scale_floor = {}", self.scale_floor),
            format!("plot.qq_offset = {}", self.qq_offset),
            format!("plot.curve_points = {}", self.curve_points),
            format!("plot.svg = {}", self.svg),
            format!("data.impute = {}", self.impute),
        ]);
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Key/default table for `--help`.
pub fn help_text() -> String {
    let width = KEYS.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys (flat `key = value`, `[section]` prefixes keys):\n");
    for (k, d, doc) in KEYS {
        s.push_str(&format!("  {k:width$}  {doc} [default: {d}]\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Kind;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.canonical()).unwrap(), c);
    }

    #[test]
    fn sections_prefix_keys() {
        let c = Config::parse("[fit]\nmax_iter = 50 # short\n[gof]\nbins = 9\n").unwrap();
        assert_eq!(c.fit.max_iter, 50);
        assert_eq!(c.bins, BinCount::Fixed(9));
    }

    #[test]
    fn unknown_key_is_validation_error() {
        let e = Config::parse("search.speed = 3\n").unwrap_err();
        assert_eq!(e.kind, Kind::Validation);
        assert!(e.message.contains("search.speed"));
    }

    #[test]
    fn ranges_and_hash() {
        let text = "search.range.alt_location = 39.5, 43.81, 0.01\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.ranges[0].1, ParamRange::new(39.5, 43.81, 0.01));
        assert_ne!(c.sha256(), Config::default().sha256());
        assert_eq!(c.sha256().len(), 64);
    }

    #[test]
    fn empty_families_is_usage() {
        let e = Config::parse("fit.families =\n").unwrap_err();
        assert_eq!(e.kind, Kind::Usage);
    }

    #[test]
    fn help_lists_every_key() {
        let h = help_text();
        for (k, _, _) in KEYS {
            assert!(h.contains(k));
        }
    }
}
