//! Goodness-of-fit statistics and small descriptive helpers.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::gamma_q;

/// Classes whose expected frequency falls below this are amalgamated.
pub const MIN_EXPECTED: f64 = 5.0;

/// `P(X > x)` for `X ~ χ²(df)`, i.e. `Q(df/2, x/2)`.
pub fn chi_square_survival(x: f64, df: u32) -> Result<f64> {
    if df < 1 {
        return Err(domain("chi-square degrees of freedom must be >= 1"));
    }
    if !(x >= 0.0) {
        return Err(domain(format!(
            "chi-square statistic must be >= 0, got {x}"
        )));
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

/// `D = sup_x |F_n(x) - F(x)|`, evaluated exactly at the order statistics.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> Result<f64> {
    if data.is_empty() {
        return Err(domain("KS statistic of empty data"));
    }
    let sorted = sorted_copy(data);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Critical-value coefficients `c(alpha)` with `D_crit = c(alpha) / sqrt(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsCoefficients {
    entries: Vec<(f64, f64)>,
}

impl Default for KsCoefficients {
    fn default() -> Self {
        Self {
            entries: vec![(0.05, 0.89)],
        }
    }
}

impl KsCoefficients {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Insert or replace the coefficient for `alpha`.
    pub fn set(&mut self, alpha: f64, coefficient: f64) {
        match self.position(alpha) {
            Some(i) => self.entries[i].1 = coefficient,
            None => self.entries.push((alpha, coefficient)),
        }
    }

    pub fn with(mut self, alpha: f64, coefficient: f64) -> Self {
        self.set(alpha, coefficient);
        self
    }

    pub fn get(&self, alpha: f64) -> Option<f64> {
        self.position(alpha).map(|i| self.entries[i].1)
    }

    fn position(&self, alpha: f64) -> Option<usize> {
        self.entries
            .iter()
            .position(|&(a, _)| (a - alpha).abs() < 1e-12)
    }
}

pub fn ks_critical(n: usize, alpha: f64, table: &KsCoefficients) -> Result<f64> {
    if n == 0 {
        return Err(domain("KS critical value needs n >= 1"));
    }
    let c = table.get(alpha).ok_or(Error::UnsupportedLevel(alpha))?;
    Ok(c / (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

pub fn ks_test<F: Fn(f64) -> f64>(
    data: &[f64],
    cdf: F,
    alpha: f64,
    table: &KsCoefficients,
) -> Result<KsResult> {
    let statistic = ks_statistic(data, cdf)?;
    let critical_value = ks_critical(data.len(), alpha, table)?;
    Ok(KsResult {
        statistic,
        critical_value,
        alpha,
        reject: statistic > critical_value,
    })
}

// ---------------------------------------------------------------------------
// Chi-square goodness of fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinCount {
    /// Sturges' rule, `ceil(1 + log2 n)`.
    Auto,
    Fixed(usize),
}

impl BinCount {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            BinCount::Auto => sturges(n),
            BinCount::Fixed(k) => k,
        }
    }
}

pub fn sturges(n: usize) -> usize {
    (1.0 + (n.max(1) as f64).log2()).ceil() as usize
}

/// Frequency classes. Edges are finite; for expected counts the outermost
/// edges are treated as -∞ and +∞, and observations beyond them fall into the
/// outermost classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinTable {
    pub edges: Vec<f64>,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
}

impl BinTable {
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn total_observed(&self) -> u64 {
        self.observed.iter().sum()
    }

    pub fn total_expected(&self) -> f64 {
        self.expected.iter().sum()
    }
}

/// Equal-width edges over `[min, max]` of the data.
pub fn equal_width_edges(data: &[f64], k: usize) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(domain("cannot bin empty data"));
    }
    if k < 2 {
        return Err(domain(format!("need at least 2 bins, got {k}")));
    }
    let (lo, hi) = min_max(data);
    if !(hi > lo) {
        return Err(Error::DegenerateBinning(
            "all observations are equal".to_string(),
        ));
    }
    let width = (hi - lo) / k as f64;
    let mut edges: Vec<f64> = (0..k).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    Ok(edges)
}

/// Count observations and compute expected frequencies over fixed edges.
pub fn tabulate<F: Fn(f64) -> f64>(data: &[f64], cdf: F, edges: &[f64]) -> Result<BinTable> {
    if data.is_empty() {
        return Err(domain("cannot bin empty data"));
    }
    if edges.len() < 2 {
        return Err(domain("a bin table needs at least two edges"));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("bin edges must be strictly increasing"));
    }
    let k = edges.len() - 1;
    let mut observed = vec![0u64; k];
    for &x in data {
        // Number of interior edges <= x gives the class index.
        let idx = edges[1..k].partition_point(|&e| e <= x);
        observed[idx] += 1;
    }
    let n = data.len() as f64;
    let mut cum = Vec::with_capacity(k + 1);
    cum.push(0.0);
    for &e in &edges[1..k] {
        cum.push(cdf(e).clamp(0.0, 1.0));
    }
    cum.push(1.0);
    let expected = cum.windows(2).map(|w| n * (w[1] - w[0]).max(0.0)).collect();
    Ok(BinTable {
        edges: edges.to_vec(),
        observed,
        expected,
    })
}

pub fn build_bins<F: Fn(f64) -> f64>(data: &[f64], cdf: F, bins: BinCount) -> Result<BinTable> {
    let edges = equal_width_edges(data, bins.resolve(data.len()))?;
    tabulate(data, cdf, &edges)
}

/// Merge every class with expected frequency below five into the class
/// immediately above it, scanning upward. A deficient top class merges down.
pub fn amalgamate(bins: &BinTable) -> BinTable {
    let mut edges = vec![bins.edges[0]];
    let mut observed = Vec::with_capacity(bins.len());
    let mut expected = Vec::with_capacity(bins.len());
    let mut carry_o = 0u64;
    let mut carry_e = 0.0;
    for i in 0..bins.len() {
        carry_o += bins.observed[i];
        carry_e += bins.expected[i];
        if carry_e >= MIN_EXPECTED {
            observed.push(carry_o);
            expected.push(carry_e);
            edges.push(bins.edges[i + 1]);
            carry_o = 0;
            carry_e = 0.0;
        }
    }
    if carry_o > 0 || carry_e > 0.0 || observed.is_empty() {
        if let (Some(o), Some(e)) = (observed.last_mut(), expected.last_mut()) {
            *o += carry_o;
            *e += carry_e;
            *edges.last_mut().unwrap() = *bins.edges.last().unwrap();
        } else {
            observed.push(carry_o);
            expected.push(carry_e);
            edges.push(*bins.edges.last().unwrap());
        }
    }
    BinTable {
        edges,
        observed,
        expected,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub bins_after_merge: BinTable,
}

/// Pearson statistic on an already-formed table, without merging.
pub fn pearson_statistic(table: &BinTable) -> f64 {
    table
        .observed
        .iter()
        .zip(&table.expected)
        .map(|(&o, &e)| {
            let o = o as f64;
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

/// Chi-square test on a table as given. `df = k - 1 - df_penalty`, at least 1.
pub fn chi_square_from_table(table: &BinTable, df_penalty: usize) -> Result<ChiSquareResult> {
    if table.len() < 2 {
        return Err(Error::DegenerateBinning(format!(
            "{} class(es) remain after amalgamation",
            table.len()
        )));
    }
    let statistic = pearson_statistic(table);
    let df = (table.len() as i64 - 1 - df_penalty as i64).max(1) as u32;
    let p_value = if statistic.is_finite() {
        chi_square_survival(statistic, df)?
    } else {
        0.0
    };
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value,
        bins_after_merge: table.clone(),
    })
}

pub fn chi_square_gof<F: Fn(f64) -> f64>(
    data: &[f64],
    cdf: F,
    bins: BinCount,
    df_penalty: usize,
) -> Result<ChiSquareResult> {
    let table = amalgamate(&build_bins(data, cdf, bins)?);
    chi_square_from_table(&table, df_penalty)
}

/// As [`chi_square_gof`] over caller-supplied edges.
pub fn chi_square_gof_with_edges<F: Fn(f64) -> f64>(
    data: &[f64],
    cdf: F,
    edges: &[f64],
    df_penalty: usize,
) -> Result<ChiSquareResult> {
    let table = amalgamate(&tabulate(data, cdf, edges)?);
    chi_square_from_table(&table, df_penalty)
}

// ---------------------------------------------------------------------------
// Descriptive statistics and plotting positions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
}

pub fn summary_stats(data: &[f64]) -> Result<Summary> {
    if data.len() < 2 {
        return Err(domain(format!(
            "summary statistics need at least 2 observations, got {}",
            data.len()
        )));
    }
    let n = data.len();
    let (min, max) = min_max(data);
    let mean = data.iter().sum::<f64>() / n as f64;
    let ss: f64 = data.iter().map(|x| (x - mean).powi(2)).sum();
    Ok(Summary {
        n,
        min,
        max,
        mean,
        sd: (ss / (n - 1) as f64).sqrt(),
    })
}

/// P-P plotting positions `(i - 0.5) / (n + 1)`.
pub fn pp_positions(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| (i as f64 - 0.5) / (n as f64 + 1.0))
        .collect()
}

/// Q-Q plotting positions `(i - 0.5) / n`.
pub fn qq_positions(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect()
}

pub(crate) fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn min_max(data: &[f64]) -> (f64, f64) {
    data.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}
