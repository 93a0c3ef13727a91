//! Run reports: the JSON structure and its plain-text rendering.

use std::fmt::Write as _;

use evmix::fmt::sig;
use evmix::stats::{ChiSquareResult, KsResult, Summary};
use evmix::{Family, FitResult, GevParams, MixtureModel, SearchSpec, SearchTrace};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub input: Option<String>,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryBlock {
    #[serde(flatten)]
    pub stats: Summary,
    pub first_year: i32,
    pub last_year: i32,
    pub imputed_years: Vec<i32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyFit {
    pub family: Family,
    #[serde(flatten)]
    pub result: FitResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    pub family: Family,
    pub chi_square: ChiSquareResult,
    pub ks: KsResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixtureBlock {
    /// `chi_square` for the live objective, `table_stub` for recorded tables.
    pub objective: String,
    pub base_p: f64,
    pub initial_p: f64,
    pub final_p: f64,
    pub model: MixtureModel,
    pub equation: String,
    pub spec: SearchSpec,
    pub trace: SearchTrace,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<SummaryBlock>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<FamilyFit>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub gof: Vec<GofReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureBlock>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn new(command: &str, provenance: Provenance) -> Self {
        Self {
            command: command.to_string(),
            summary: None,
            fits: Vec::new(),
            gof: Vec::new(),
            mixture: None,
            files: Vec::new(),
            warnings: Vec::new(),
            provenance,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        if let Some(s) = &self.summary {
            let _ = writeln!(
                w,
                "Series {}-{} (n = {})",
                s.first_year, s.last_year, s.stats.n
            );
            let _ = writeln!(
                w,
                "  min {}  max {}  mean {}  sd {}",
                g(s.stats.min),
                g(s.stats.max),
                g(s.stats.mean),
                g(s.stats.sd)
            );
            if !s.imputed_years.is_empty() {
                let years: Vec<String> = s.imputed_years.iter().map(|y| y.to_string()).collect();
                let _ = writeln!(w, "  imputed: {}", years.join(", "));
            }
            w.push('\n');
        }
        if !self.fits.is_empty() {
            let _ = writeln!(
                w,
                "{:<9} {:>11} {:>11} {:>11} {:>13}  se(μ, σ, ξ)",
                "family", "μ", "σ", "ξ", "log-lik"
            );
            for f in &self.fits {
                let p = &f.result.params;
                let se = match f.result.std_errors {
                    Some(e) => format!("{}, {}, {}", g(e[0]), g(e[1]), g(e[2])),
                    None => "unavailable".to_string(),
                };
                let _ = writeln!(
                    w,
                    "{:<9} {:>11} {:>11} {:>11} {:>13}  {}{}",
                    f.family.name(),
                    g(p.location),
                    g(p.scale),
                    g(p.shape),
                    g(f.result.log_lik),
                    se,
                    if f.result.converged {
                        ""
                    } else {
                        "  (not converged)"
                    }
                );
            }
            w.push('\n');
        }
        if !self.gof.is_empty() {
            let _ = writeln!(
                w,
                "{:<9} {:>11} {:>3} {:>11} {:>9} {:>9}  KS decision",
                "family", "chi-square", "df", "p-value", "D", "D_crit"
            );
            for r in &self.gof {
                let _ = writeln!(
                    w,
                    "{:<9} {:>11} {:>3} {:>11} {:>9} {:>9}  {} at alpha = {}",
                    r.family.name(),
                    g(r.chi_square.statistic),
                    r.chi_square.df,
                    g(r.chi_square.p_value),
                    sig(r.ks.statistic, 4),
                    sig(r.ks.critical_value, 4),
                    if r.ks.reject {
                        "reject"
                    } else {
                        "do not reject"
                    },
                    r.ks.alpha
                );
            }
            w.push('\n');
        }
        if let Some(m) = &self.mixture {
            let _ = writeln!(w, "Mixture search ({} objective)", m.objective);
            let _ = writeln!(w, "  weight p = {}", g(m.model.weight));
            let path: Vec<String> = std::iter::once(m.initial_p)
                .chain(
                    m.trace
                        .stages
                        .iter()
                        .filter(|s| s.accepted)
                        .map(|s| s.best_p),
                )
                .map(g)
                .collect();
            let _ = writeln!(w, "  p-value path: {}", path.join(" -> "));
            let _ = writeln!(
                w,
                "  base ({}), alternative ({})",
                triple(&m.model.component_base),
                triple(&m.model.component_alt)
            );
            let _ = writeln!(w, "  {}", m.equation);
            w.push('\n');
        }
        for f in &self.files {
            let _ = writeln!(w, "wrote {f}");
        }
        for warning in &self.warnings {
            let _ = writeln!(w, "warning: {warning}");
        }
        out
    }
}

/// Up to 7 significant digits with trailing zeros removed.
pub fn g(x: f64) -> String {
    let s = sig(x, 7);
    if s.contains('.') && x.is_finite() {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn triple(p: &GevParams) -> String {
    format!("μ {}, σ {}, ξ {}", g(p.location), g(p.scale), g(p.shape))
}

fn gev_term(p: &GevParams) -> String {
    let centred = if p.location < 0.0 {
        format!("x + {}", g(-p.location))
    } else {
        format!("x - {}", g(p.location))
    };
    if p.shape.abs() < 1e-7 {
        return format!("exp{{-exp[-({centred})/{}]}}", g(p.scale));
    }
    let k = p.shape;
    let (op, exp) = if k < 0.0 {
        ("-", format!("1/{}", g(-k)))
    } else {
        ("+", format!("-1/{}", g(k)))
    };
    format!(
        "exp{{-[1 {op} {}({centred})/{}]^({exp})}}",
        g(k.abs()),
        g(p.scale)
    )
}

/// `F(x) = (1 - p)·F₁(x) + p·F₁'(x)` with both GEV terms written out.
pub fn equation(m: &MixtureModel) -> String {
    format!(
        "F(x) = {}·{} + {}·{}",
        g(1.0 - m.weight),
        gev_term(&m.component_base),
        g(m.weight),
        gev_term(&m.component_alt)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equation_closed_form() {
        let b = GevParams::gev(39.22, 3.15, -0.237).unwrap();
        let a = GevParams::gev(43.78, 0.4, -0.237).unwrap();
        let m = MixtureModel::new(0.05416, b, a).unwrap();
        assert_eq!(
            equation(&m),
            "F(x) = 0.94584·exp{-[1 - 0.237(x - 39.22)/3.15]^(1/0.237)} \
             + 0.05416·exp{-[1 - 0.237(x - 43.78)/0.4]^(1/0.237)}"
        );
    }

    #[test]
    fn gumbel_and_positive_shape_terms() {
        let t = gev_term(&GevParams::gumbel(-2.0, 1.5).unwrap());
        assert_eq!(t, "exp{-exp[-(x + 2)/1.5]}");
        let t = gev_term(&GevParams::gev(1.0, 2.0, 0.25).unwrap());
        assert_eq!(t, "exp{-[1 + 0.25(x - 1)/2]^(-1/0.25)}");
    }

    #[test]
    fn trims_zeros() {
        assert_eq!(g(0.0830111), "0.0830111");
        assert_eq!(g(2.0), "2");
        assert_eq!(g(0.0), "0");
    }
}
