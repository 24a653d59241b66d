//! Kinetic wealth exchange between agents with saving propensities.
//!
//! Two agents `i ≠ j` meet, each keeps the fraction λ of its wealth, and the
//! pooled remainder is split at a uniform random fraction ε:
//!
//! ```text
//! x_i' = λ_i x_i + ε [(1 − λ_i) x_i + (1 − λ_j) x_j]
//! x_j' = (x_i + x_j) − x_i'
//! ```
//!
//! Wealth is stored as integer multiples of a power-of-two quantum
//! `q ≥ M · 2⁻⁵²`. Every pair sum and every partial sum of the population is
//! then exactly representable, so the total money is conserved to the last
//! bit regardless of summation order. Rounding `x_i'` to the grid moves at
//! most `q/2` per exchange.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::empirical_gini;

/// Wealth and saving propensity of every agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub wealth: Vec<f64>,
    pub lambda: Vec<f64>,
    quantum: f64,
}

fn quantum_for(total: f64) -> f64 {
    // one spare bit so that rounding the initial split cannot overflow 2^53 q
    2f64.powi(total.log2().ceil() as i32 - 52)
}

impl AgentState {
    /// Every agent starts with `mean_money`, snapped to the wealth grid.
    pub fn equal(lambda: Vec<f64>, mean_money: f64) -> Result<Self> {
        let n = lambda.len();
        if n < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 agents, got {n}")));
        }
        if !(mean_money > 0.0 && mean_money.is_finite()) {
            return Err(Error::InvalidParams(format!("mean money must be positive, got {mean_money}")));
        }
        if let Some(l) = lambda.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(Error::InvalidParams(format!("saving propensity {l} not in [0, 1)")));
        }
        let quantum = quantum_for(n as f64 * mean_money);
        let x0 = (mean_money / quantum).round() * quantum;
        Ok(AgentState {
            wealth: vec![x0; n],
            lambda,
            quantum,
        })
    }

    /// Arbitrary starting wealth, snapped to the grid of its total.
    pub fn from_wealth(wealth: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if wealth.len() != lambda.len() || wealth.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "need matching wealth and λ vectors of length ≥ 2, got {} and {}",
                wealth.len(),
                lambda.len()
            )));
        }
        if let Some(x) = wealth.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidParams(format!("wealth {x} is not a finite nonnegative number")));
        }
        if let Some(l) = lambda.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(Error::InvalidParams(format!("saving propensity {l} not in [0, 1)")));
        }
        let total: f64 = wealth.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParams("total wealth must be positive".into()));
        }
        let quantum = quantum_for(total);
        let wealth = wealth.iter().map(|x| (x / quantum).round() * quantum).collect();
        Ok(AgentState { wealth, lambda, quantum })
    }

    pub fn len(&self) -> usize {
        self.wealth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wealth.is_empty()
    }

    /// Spacing of the wealth grid.
    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    /// One trade between `i` and `j` with split fraction `eps`.
    pub fn exchange_pair(&mut self, i: usize, j: usize, eps: f64) {
        let (xi, xj) = (self.wealth[i], self.wealth[j]);
        let (li, lj) = (self.lambda[i], self.lambda[j]);
        let pair = xi + xj;
        let q = self.quantum;
        let raw = li * xi + eps * ((1.0 - li) * xi + (1.0 - lj) * xj);
        let new_i = ((raw / q).round() * q).clamp(0.0, pair);
        self.wealth[i] = new_i;
        self.wealth[j] = pair - new_i;
    }

    /// Picks an unordered pair uniformly and trades once.
    pub fn exchange_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.wealth.len();
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let eps: f64 = rng.gen();
        self.exchange_pair(i, j, eps);
    }
}

/// Total money. Exact: all partial sums lie on the wealth grid.
pub fn total_money(state: &AgentState) -> f64 {
    state.wealth.iter().sum()
}

/// Sample Gini of the current wealth vector.
pub fn gini_now(state: &AgentState) -> Result<f64> {
    empirical_gini(&state.wealth, false)
}

/// How saving propensities are assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaMode {
    Homogeneous { lambda: f64 },
    /// λ_i ~ U[0, 1), capped at `lambda_max`.
    Uniform,
    Custom { values: Vec<f64> },
}

/// Log-spaced binning relative to the mean money.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSpec {
    pub n_bins: usize,
    /// Lower edge as a multiple of the mean money.
    pub x_min_rel: f64,
    /// Upper edge as a multiple of the mean money; `None` uses the total money.
    #[serde(default)]
    pub x_max_rel: Option<f64>,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            n_bins: 80,
            x_min_rel: 1e-3,
            x_max_rel: None,
        }
    }
}

fn default_thermalization() -> f64 {
    0.5
}

fn default_lambda_max() -> f64 {
    1.0 - 1e-6
}

/// Parameters of an ensemble of exchange simulations.
///
/// `n_exchanges` counts single pairwise trades per realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_agents: usize,
    pub mean_money: f64,
    pub n_exchanges: u64,
    pub n_realizations: usize,
    pub lambda_mode: LambdaMode,
    pub seed: u64,
    #[serde(default = "default_thermalization")]
    pub thermalization_fraction: f64,
    /// Exchanges between histogram snapshots; `None` means one sweep of `n_agents`.
    #[serde(default)]
    pub sample_every: Option<u64>,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    /// Reuse one λ draw for every realization.
    #[serde(default)]
    pub fix_lambda: bool,
    #[serde(default)]
    pub histogram: HistogramSpec,
}

impl SimConfig {
    /// N = 10³ agents, 10⁷ exchanges, 10² realizations, unit mean money.
    pub fn desk(lambda_mode: LambdaMode) -> Self {
        SimConfig {
            n_agents: 1000,
            mean_money: 1.0,
            n_exchanges: 10_000_000,
            n_realizations: 100,
            lambda_mode,
            seed: 1,
            thermalization_fraction: default_thermalization(),
            sample_every: None,
            lambda_max: default_lambda_max(),
            fix_lambda: false,
            histogram: HistogramSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_agents < 2 {
            return bad(format!("n_agents must be ≥ 2, got {}", self.n_agents));
        }
        if !(self.mean_money > 0.0 && self.mean_money.is_finite()) {
            return bad(format!("mean_money must be positive, got {}", self.mean_money));
        }
        if self.n_realizations == 0 {
            return bad("n_realizations must be ≥ 1".into());
        }
        if !(0.0..1.0).contains(&self.thermalization_fraction) {
            return bad(format!("thermalization_fraction {} not in [0, 1)", self.thermalization_fraction));
        }
        if self.sample_every == Some(0) {
            return bad("sample_every must be ≥ 1".into());
        }
        if !(self.lambda_max > 0.0 && self.lambda_max < 1.0) {
            return bad(format!("lambda_max {} not in (0, 1)", self.lambda_max));
        }
        match &self.lambda_mode {
            LambdaMode::Homogeneous { lambda } if !(0.0..1.0).contains(lambda) => {
                return bad(format!("λ = {lambda} not in [0, 1)"));
            }
            LambdaMode::Custom { values } => {
                if values.len() != self.n_agents {
                    return bad(format!("custom λ has {} values for {} agents", values.len(), self.n_agents));
                }
                if let Some(l) = values.iter().find(|l| !(0.0..1.0).contains(*l)) {
                    return bad(format!("custom λ value {l} not in [0, 1)"));
                }
            }
            _ => {}
        }
        let h = &self.histogram;
        if h.n_bins == 0 || !(h.x_min_rel > 0.0) || h.x_max_rel.is_some_and(|x| !(x > h.x_min_rel)) {
            return bad(format!("invalid histogram spec {h:?}"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: SimConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    fn bin_range(&self) -> (f64, f64) {
        let m = self.mean_money;
        let hi = self.histogram.x_max_rel.unwrap_or(self.n_agents as f64);
        (self.histogram.x_min_rel * m, hi * m)
    }

    fn draw_lambda(&self, realization: usize) -> Vec<f64> {
        match &self.lambda_mode {
            LambdaMode::Homogeneous { lambda } => vec![*lambda; self.n_agents],
            LambdaMode::Custom { values } => values.clone(),
            LambdaMode::Uniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ LAMBDA_SALT);
                rng.set_stream(if self.fix_lambda { 0 } else { realization as u64 });
                (0..self.n_agents).map(|_| rng.gen::<f64>().min(self.lambda_max)).collect()
            }
        }
    }
}

const LAMBDA_SALT: u64 = 0x5eed_1a3b_da00_0001;

/// Log-binned wealth counts. `density` is normalized over the binned range;
/// samples outside it are tallied in `underflow` and `overflow`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl WealthHistogram {
    /// Empty histogram with `n_bins` log-spaced bins on `[x_min, x_max]`.
    pub fn new(n_bins: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_bins == 0 || !(x_min > 0.0) || !(x_max > x_min) || !x_max.is_finite() {
            return Err(Error::domain(
                "log_binned_histogram",
                format!("need n_bins ≥ 1 and 0 < x_min < x_max, got {n_bins}, {x_min}, {x_max}"),
            ));
        }
        let step = (x_max / x_min).ln() / n_bins as f64;
        let mut edges: Vec<f64> = (0..=n_bins).map(|k| x_min * (step * k as f64).exp()).collect();
        edges[0] = x_min;
        edges[n_bins] = x_max;
        Ok(WealthHistogram {
            edges,
            counts: vec![0; n_bins],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// All tallied samples, including those outside the binned range.
    pub fn n_total(&self) -> u64 {
        self.n_binned() + self.underflow + self.overflow
    }

    pub fn n_binned(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Geometric bin centers.
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect()
    }

    /// `count / (n_binned · width)`; integrates to one over the binned range.
    pub fn density(&self) -> Vec<f64> {
        self.scaled_density(self.n_binned())
    }

    /// `count / (n_total · width)`: an estimate of the underlying pdf.
    pub fn pdf_estimate(&self) -> Vec<f64> {
        self.scaled_density(self.n_total())
    }

    fn scaled_density(&self, n: u64) -> Vec<f64> {
        let n = n.max(1) as f64;
        self.counts
            .iter()
            .zip(self.widths())
            .map(|(&c, w)| c as f64 / (n * w))
            .collect()
    }

    fn bin_of(&self, x: f64, ln_min: f64, inv_step: f64) -> usize {
        let last = self.counts.len() - 1;
        let mut k = (((x.ln() - ln_min) * inv_step) as usize).min(last);
        if x < self.edges[k] && k > 0 {
            k -= 1;
        } else if k < last && x >= self.edges[k + 1] {
            k += 1;
        }
        k
    }

    /// Adds samples. `x == x_max` goes into the last bin.
    pub fn extend(&mut self, samples: &[f64]) {
        let n = self.counts.len();
        let (lo, hi) = (self.edges[0], self.edges[n]);
        let ln_min = lo.ln();
        let inv_step = n as f64 / (hi / lo).ln();
        for &x in samples {
            if x < lo {
                self.underflow += 1;
            } else if x > hi {
                self.overflow += 1;
            } else {
                let k = self.bin_of(x, ln_min, inv_step);
                self.counts[k] += 1;
            }
        }
    }

    /// Adds the counts of a histogram with identical edges.
    pub fn merge(&mut self, other: &WealthHistogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::domain("merge", "histograms have different bin edges"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    /// Empirical cdf at each edge, counting underflow below the first edge.
    pub fn edge_cdf(&self) -> Vec<f64> {
        let n = self.n_total().max(1) as f64;
        let mut acc = self.underflow;
        let mut out = Vec::with_capacity(self.edges.len());
        out.push(acc as f64 / n);
        for &c in &self.counts {
            acc += c;
            out.push(acc as f64 / n);
        }
        out
    }

    /// Kolmogorov–Smirnov distance to `cdf` evaluated at the bin edges.
    pub fn ks_statistic(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        self.edges
            .iter()
            .zip(self.edge_cdf())
            .map(|(&x, e)| (e - cdf(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `bin_center,density,count` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_center,density,count")?;
        for ((c, d), n) in self.centers().iter().zip(self.density()).zip(&self.counts) {
            writeln!(w, "{c:.14e},{d:.14e},{n}")?;
        }
        Ok(())
    }

    /// Reads the output of [`write_csv`](Self::write_csv). Edges are rebuilt
    /// from the log-spaced centers; out-of-range tallies are not stored in
    /// the file and come back as zero.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut centers = Vec::new();
        let mut counts = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if i == 0 || line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 columns", i + 1)));
            }
            let c: f64 = cols[0].parse().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            let n: u64 = cols[2].parse().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            centers.push(c);
            counts.push(n);
        }
        if centers.len() < 2 {
            return Err(Error::InsufficientData("histogram needs at least 2 bins".into()));
        }
        let half = ((centers[centers.len() - 1] / centers[0]).ln() / (centers.len() - 1) as f64 / 2.0).exp();
        let mut edges: Vec<f64> = centers.iter().map(|c| c / half).collect();
        edges.push(centers[centers.len() - 1] * half);
        Ok(WealthHistogram {
            edges,
            counts,
            underflow: 0,
            overflow: 0,
        })
    }
}

/// Histogram of `samples` on `n_bins` log-spaced bins between `x_min` and `x_max`.
pub fn log_binned_histogram(samples: &[f64], n_bins: usize, x_min: f64, x_max: f64) -> Result<WealthHistogram> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if let Some(x) = samples.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::domain("log_binned_histogram", format!("sample {x} is negative or NaN")));
    }
    let mut h = WealthHistogram::new(n_bins, x_min, x_max)?;
    h.extend(samples);
    Ok(h)
}

/// Histogram spanning the smallest positive to the largest sample.
pub fn spanning_histogram(samples: &[f64], n_bins: usize) -> Result<WealthHistogram> {
    let lo = samples.iter().copied().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(0.0, f64::max);
    if !(lo < hi) {
        return Err(Error::InsufficientData("need at least two distinct positive samples".into()));
    }
    log_binned_histogram(samples, n_bins, lo, hi)
}

/// One realization of an ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub final_state: AgentState,
    pub histogram: WealthHistogram,
    pub initial_total: f64,
    pub final_total: f64,
}

impl Realization {
    pub fn conserved(&self) -> bool {
        self.initial_total.to_bits() == self.final_total.to_bits()
    }
}

/// Merged histogram and the per-realization final states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub histogram: WealthHistogram,
    pub realizations: Vec<Realization>,
}

impl RunOutput {
    /// Every realization kept its total money bit-identical.
    pub fn conserved(&self) -> bool {
        self.realizations.iter().all(Realization::conserved)
    }
}

/// Runs realization `index` of `config` sequentially.
pub fn run_realization(config: &SimConfig, index: usize) -> Result<Realization> {
    config.validate()?;
    let mut state = AgentState::equal(config.draw_lambda(index), config.mean_money)?;
    let (lo, hi) = config.bin_range();
    let mut histogram = WealthHistogram::new(config.histogram.n_bins, lo, hi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);

    let initial_total = total_money(&state);
    let burn = (config.thermalization_fraction * config.n_exchanges as f64).floor() as u64;
    let every = config.sample_every.unwrap_or(config.n_agents as u64);
    for _ in 0..burn {
        state.exchange_step(&mut rng);
    }
    let mut done = burn;
    while done < config.n_exchanges {
        let block = every.min(config.n_exchanges - done);
        for _ in 0..block {
            state.exchange_step(&mut rng);
        }
        done += block;
        if block == every {
            histogram.extend(&state.wealth);
        }
    }
    debug_assert!(state.wealth.iter().all(|x| *x >= 0.0));
    let final_total = total_money(&state);
    Ok(Realization {
        final_state: state,
        histogram,
        initial_total,
        final_total,
    })
}

/// Runs all realizations in parallel; each has its own random stream derived
/// from `(seed, index)`, so the result does not depend on the thread count.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    config.validate()?;
    let realizations = (0..config.n_realizations)
        .into_par_iter()
        .map(|r| run_realization(config, r))
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = realizations[0].histogram.clone();
    for r in &realizations[1..] {
        histogram.merge(&r.histogram)?;
    }
    Ok(RunOutput { histogram, realizations })
}
