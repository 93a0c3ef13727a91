//! Command implementations. Each returns a [`RunReport`] and writes its files
//! under the output directory.

use std::path::{Path, PathBuf};

use evmix::fitting::FitWarning;
use evmix::stats::{chi_square_gof, ks_test, summary_stats};
use evmix::table_stub::{self, TableStub};
use evmix::{fit_mle, optimize, optimize_with, Family, MixtureModel, SearchTrace};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::plot::{self, PlotKind};
use crate::report::{
    equation, FamilyFit, GofReport, MixtureBlock, Provenance, RunReport, SummaryBlock,
};
use crate::series::{impute_adjacent, load_csv, AnnualSeries};
use crate::synth::{self, SynthTarget};

/// Below this the alternative component is close to a point mass.
pub const NARROW_SCALE: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Context {
    pub config: Config,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Context {
    fn provenance(&self, input: Option<&Path>) -> Provenance {
        Provenance {
            input: input.map(|p| p.display().to_string()),
            config_sha256: self.config.sha256(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn write(&self, name: &str, contents: &str, report: &mut RunReport) -> CliResult<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        report.files.push(name.to_string());
        Ok(())
    }

    /// Write `report.json` and `report.txt` and return the text.
    pub fn finish(&self, mut report: RunReport) -> CliResult<(RunReport, String)> {
        report.files.push("report.json".into());
        report.files.push("report.txt".into());
        let text = report.to_text();
        let json = report.to_json();
        for (name, body) in [("report.json", &json), ("report.txt", &text)] {
            std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
            let path = self.out_dir.join(name);
            std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        }
        Ok((report, text))
    }
}

/// Loaded series after imputation (or with missing years dropped when
/// imputation is disabled).
pub fn load_series(ctx: &Context, input: &Path) -> CliResult<AnnualSeries> {
    let raw = load_csv(input)?;
    let series = if ctx.config.impute {
        impute_adjacent(&raw)?
    } else {
        raw
    };
    series.require_observed()?;
    Ok(series)
}

fn summary_block(series: &AnnualSeries) -> CliResult<SummaryBlock> {
    Ok(SummaryBlock {
        stats: summary_stats(&series.values())?,
        first_year: series.records.first().map(|r| r.year).unwrap_or_default(),
        last_year: series.records.last().map(|r| r.year).unwrap_or_default(),
        imputed_years: series
            .records
            .iter()
            .filter(|r| r.imputed)
            .map(|r| r.year)
            .collect(),
    })
}

fn fit_family(ctx: &Context, data: &[f64], family: Family) -> CliResult<FamilyFit> {
    let result = fit_mle(data, family, &ctx.config.fit)?;
    Ok(FamilyFit { family, result })
}

fn gof_family(ctx: &Context, data: &[f64], fit: &FamilyFit) -> CliResult<GofReport> {
    let p = fit.result.params;
    let chi = chi_square_gof(
        data,
        |x| p.cdf(x),
        ctx.config.bins,
        fit.family.free_parameters(),
    )?;
    let ks = ks_test(
        data,
        |x| p.cdf(x),
        ctx.config.alpha,
        &ctx.config.ks_coefficients(),
    )?;
    Ok(GofReport {
        family: fit.family,
        chi_square: chi,
        ks,
    })
}

fn fit_warnings(fits: &[FamilyFit]) -> Vec<String> {
    let mut out = Vec::new();
    for f in fits {
        if !f.result.converged {
            out.push(format!("{} fit did not converge", f.family.name()));
        }
        for w in &f.result.warnings {
            let what = match w {
                FitWarning::IrregularShape => "shape below -0.5, standard errors are unreliable",
                FitWarning::ShapeAtBound => {
                    "shape estimate sits on an end of its admissible interval"
                }
                FitWarning::StdErrorsUnavailable => "standard errors unavailable",
            };
            out.push(format!("{} fit: {what}", f.family.name()));
        }
    }
    out
}

pub fn cmd_summary(ctx: &Context, input: &Path) -> CliResult<(RunReport, String)> {
    let series = load_series(ctx, input)?;
    let mut report = RunReport::new("summary", ctx.provenance(Some(input)));
    report.summary = Some(summary_block(&series)?);
    ctx.finish(report)
}

fn fits_and_gof(
    ctx: &Context,
    command: &str,
    input: &Path,
    families: &[Family],
) -> CliResult<RunReport> {
    if families.is_empty() {
        return Err(CliError::usage("family list is empty"));
    }
    let series = load_series(ctx, input)?;
    let data = series.values();
    let mut report = RunReport::new(command, ctx.provenance(Some(input)));
    report.summary = Some(summary_block(&series)?);
    for &f in families {
        let fit = fit_family(ctx, &data, f)?;
        report.gof.push(gof_family(ctx, &data, &fit)?);
        report.fits.push(fit);
    }
    let w = fit_warnings(&report.fits);
    report.warnings.extend(w);
    Ok(report)
}

pub fn cmd_fit(ctx: &Context, input: &Path, families: &[Family]) -> CliResult<(RunReport, String)> {
    let report = fits_and_gof(ctx, "fit", input, families)?;
    ctx.finish(report)
}

pub fn cmd_gof(ctx: &Context, input: &Path, families: &[Family]) -> CliResult<(RunReport, String)> {
    let report = fits_and_gof(ctx, "gof", input, families)?;
    let (report, mut text) = ctx.finish(report)?;
    text.push_str(&bin_tables(&report));
    Ok((report, text))
}

fn bin_tables(report: &RunReport) -> String {
    let mut s = String::new();
    for r in &report.gof {
        let t = &r.chi_square.bins_after_merge;
        s.push_str(&format!("\n{} classes after merging:\n", r.family.name()));
        s.push_str("       lower        upper  observed   expected\n");
        for i in 0..t.len() {
            let lo = if i == 0 {
                "-inf".to_string()
            } else {
                crate::report::g(t.edges[i])
            };
            let hi = if i + 1 == t.len() {
                "+inf".to_string()
            } else {
                crate::report::g(t.edges[i + 1])
            };
            s.push_str(&format!(
                "{lo:>12} {hi:>12} {:>9} {:>10}\n",
                t.observed[i],
                evmix::fmt::sig(t.expected[i], 5)
            ));
        }
    }
    s
}

fn mixture_block(
    objective: &str,
    base_p: f64,
    model: MixtureModel,
    spec: evmix::SearchSpec,
    trace: SearchTrace,
) -> MixtureBlock {
    MixtureBlock {
        objective: objective.to_string(),
        base_p,
        initial_p: trace.initial_p,
        final_p: trace.final_p(),
        model,
        equation: equation(&model),
        spec,
        trace,
    }
}

fn narrow_scale_warning(m: &MixtureModel, report: &mut RunReport) {
    for (name, c) in [
        ("base", &m.component_base),
        ("alternative", &m.component_alt),
    ] {
        if c.scale < NARROW_SCALE {
            report.warnings.push(format!(
                "{name} component scale {} is below {NARROW_SCALE}; the mixture is close to a point mass there",
                crate::report::g(c.scale)
            ));
        }
    }
}

/// Live search on the data, or the recorded tables with `table_stub`.
fn run_search(
    ctx: &Context,
    input: Option<&Path>,
    table_stub: bool,
    report: &mut RunReport,
) -> CliResult<()> {
    let block = if table_stub {
        let spec = TableStub::recorded_spec();
        let (model, trace) =
            optimize_with(&TableStub::new(), TableStub::recorded_initial(), &spec)?;
        mixture_block("table_stub", table_stub::BASE_P, model, spec, trace)
    } else {
        let input = input.ok_or_else(|| CliError::usage("an input file is required"))?;
        let series = load_series(ctx, input)?;
        let data = series.values();
        if report.summary.is_none() {
            report.summary = Some(summary_block(&series)?);
        }
        let existing = report
            .fits
            .iter()
            .position(|f| f.family == Family::Generalized);
        let fit = match existing {
            Some(i) => report.fits[i].clone(),
            None => {
                let f = fit_family(ctx, &data, Family::Generalized)?;
                report.gof.push(gof_family(ctx, &data, &f)?);
                report.fits.push(f.clone());
                report
                    .warnings
                    .extend(fit_warnings(std::slice::from_ref(&f)));
                f
            }
        };
        let base_p = report
            .gof
            .iter()
            .find(|g| g.family == Family::Generalized)
            .map(|g| g.chi_square.p_value)
            .ok_or_else(|| {
                CliError::new(crate::error::Kind::Numerical, "no base goodness of fit")
            })?;
        let spec = ctx.config.search_spec(&fit.result.params, &data)?;
        let (model, trace) = optimize(&data, &fit.result, base_p, &spec, ctx.config.bins)?;
        mixture_block("chi_square", base_p, model, spec, trace)
    };
    narrow_scale_warning(&block.model, report);
    let csv = block.trace.to_csv();
    report.mixture = Some(block);
    ctx.write("trace.csv", &csv, report)?;
    Ok(())
}

pub fn cmd_optimize(
    ctx: &Context,
    input: Option<&Path>,
    table_stub: bool,
) -> CliResult<(RunReport, String)> {
    let mut report = RunReport::new(
        "optimize",
        ctx.provenance(if table_stub { None } else { input }),
    );
    run_search(ctx, input, table_stub, &mut report)?;
    ctx.finish(report)
}

fn write_plots(
    ctx: &Context,
    series: &AnnualSeries,
    model: &dyn plot::Fitted,
    kinds: &[PlotKind],
    suffix: &str,
    svg: bool,
    report: &mut RunReport,
) -> CliResult<()> {
    for &kind in kinds {
        let p = plot::make(
            kind,
            series,
            model,
            ctx.config.qq_offset,
            ctx.config.curve_points,
        )?;
        let stem = format!("{}{suffix}", kind.name());
        ctx.write(&format!("{stem}.csv"), &p.csv, report)?;
        if svg {
            ctx.write(&format!("{stem}.svg"), &p.svg, report)?;
        }
    }
    Ok(())
}

pub fn cmd_plot(
    ctx: &Context,
    input: &Path,
    kinds: &[PlotKind],
    family: Family,
    svg: bool,
) -> CliResult<(RunReport, String)> {
    let series = load_series(ctx, input)?;
    let mut report = RunReport::new("plot", ctx.provenance(Some(input)));
    let fit = fit_family(ctx, &series.values(), family)?;
    let params = fit.result.params;
    report.fits.push(fit);
    let w = fit_warnings(&report.fits);
    report.warnings.extend(w);
    write_plots(
        ctx,
        &series,
        &params,
        kinds,
        "",
        svg || ctx.config.svg,
        &mut report,
    )?;
    ctx.finish(report)
}

/// Everything: summary, all configured fits and tests, the mixture search,
/// and plots for the GEV fit and the mixture.
pub fn cmd_report(ctx: &Context, input: &Path, table_stub: bool) -> CliResult<(RunReport, String)> {
    let mut report = fits_and_gof(ctx, "report", input, &ctx.config.families)?;
    run_search(ctx, Some(input), table_stub, &mut report)?;
    let series = load_series(ctx, input)?;
    let gev = match report.fits.iter().find(|f| f.family == Family::Generalized) {
        Some(f) => f.result.params,
        None => {
            fit_family(ctx, &series.values(), Family::Generalized)?
                .result
                .params
        }
    };
    let svg = ctx.config.svg;
    write_plots(ctx, &series, &gev, &PlotKind::ALL, "", svg, &mut report)?;
    if let Some(m) = report.mixture.as_ref().map(|m| m.model) {
        if !table_stub {
            write_plots(
                ctx,
                &series,
                &m,
                &[PlotKind::Qq, PlotKind::Pp, PlotKind::Density],
                "_mixture",
                svg,
                &mut report,
            )?;
        }
    }
    ctx.finish(report)
}

pub fn cmd_synth(ctx: &Context, output: &Path, target: &SynthTarget) -> CliResult<String> {
    let values = synth::generate(target, ctx.seed)?;
    let csv = synth::to_csv(target, &values, ctx.seed);
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(output, &csv).map_err(|e| CliError::io(output, e))?;
    let s = summary_stats(&values)?;
    Ok(format!(
        "wrote synthetic series ({} values, min {}, max {}, mean {}, sd {}) to {}\n",
        s.n,
        crate::report::g(s.min),
        crate::report::g(s.max),
        crate::report::g(s.mean),
        crate::report::g(s.sd),
        output.display()
    ))
}
