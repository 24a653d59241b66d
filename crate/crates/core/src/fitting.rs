//! Fitting κGG parameters to wealth histograms or raw samples.
//!
//! Both fits minimize over the unconstrained coordinates
//! `(ln α, ln ν, ln β, logit κ)` with a Nelder–Mead simplex restarted from
//! several seeded starting points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{KappaGG, KggParams, TailParams};
use crate::error::{Error, Result};
use crate::simulator::WealthHistogram;
use crate::special::igamma_pair;

/// Derivative-free simplex minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Stop when the simplex values agree to this relative spread...
    pub f_tol: f64,
    /// ...and its vertices to this distance.
    pub x_tol: f64,
    /// Edge length of the initial simplex.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 4000,
            f_tol: 1e-12,
            x_tol: 1e-8,
            step: 0.2,
        }
    }
}

/// Result of one simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best vertex value after each iteration.
    pub history: Vec<f64>,
}

impl NelderMead {
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let d = x0.len();
        let mut evals = 0;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
        simplex.push((x0.to_vec(), eval(x0, &mut evals)));
        for k in 0..d {
            let mut x = x0.to_vec();
            x[k] += self.step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        let mut history = Vec::new();
        let mut converged = false;
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            history.push(simplex[0].1);
            let (best, worst) = (simplex[0].1, simplex[d].1);
            let spread = (worst - best).abs();
            let size = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if best.is_finite() && spread <= self.f_tol * (best.abs() + self.f_tol) && size <= self.x_tol {
                converged = true;
                break;
            }
            let centroid: Vec<f64> = (0..d)
                .map(|k| simplex[..d].iter().map(|(x, _)| x[k]).sum::<f64>() / d as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[d].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = eval(&xe, &mut evals);
                simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[d - 1].1 {
                simplex[d] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst {
                    let xc = along(-0.5);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = along(0.5);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc < fr.min(worst) {
                    simplex[d] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for (x, v) in simplex[1..].iter_mut() {
                        for (xi, bi) in x.iter_mut().zip(&x_best) {
                            *xi = bi + 0.5 * (*xi - bi);
                        }
                        *v = eval(x, &mut evals);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            evals,
            converged,
            history,
        }
    }
}

/// Which objective produced a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    HistogramLeastSquares,
    Mle,
}

/// Fitted parameters with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: KggParams,
    /// Final loss: mean squared log-density residual, or mean negative log-likelihood.
    pub objective: f64,
    /// Pareto tail of the fitted density; absent when κ is numerically zero.
    pub tail: Option<TailParams>,
    pub ks_stat: f64,
    /// Bins or samples entering the objective.
    pub n_points_used: usize,
    pub converged: bool,
    pub method: FitMethod,
    pub evaluations: usize,
}

/// Optimizer settings shared by both fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    pub simplex: NelderMead,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 5,
            seed: 0,
            simplex: NelderMead::default(),
        }
    }
}

/// Starting point of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Auto,
    Params(KggParams),
}

/// Bins whose geometric center lies in `[x_min, x_max]` and which hold at
/// least `min_count` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinMask {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub min_count: u64,
}

impl Default for BinMask {
    fn default() -> Self {
        BinMask {
            x_min: None,
            x_max: None,
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

/// Sparse bins carry large, one-sided log-density noise: empty bins cannot
/// enter the loss at all.
pub const DEFAULT_MIN_COUNT: u64 = 100;

impl BinMask {
    pub fn all() -> Self {
        BinMask::default()
    }

    pub fn below(x_max: f64) -> Self {
        BinMask {
            x_max: Some(x_max),
            ..BinMask::default()
        }
    }

    pub fn contains(&self, x: f64, count: u64) -> bool {
        count >= self.min_count.max(1)
            && self.x_min.is_none_or(|lo| x >= lo)
            && self.x_max.is_none_or(|hi| x <= hi)
    }
}

const KAPPA_FLOOR: f64 = 1e-9;

fn to_internal(p: &KggParams) -> [f64; 4] {
    let k = p.kappa().clamp(KAPPA_FLOOR, 1.0 - KAPPA_FLOOR);
    [p.alpha().ln(), p.nu().ln(), p.beta().ln(), (k / (1.0 - k)).ln()]
}

fn from_internal(z: &[f64]) -> Result<KggParams> {
    let k = 1.0 / (1.0 + (-z[3]).exp());
    KggParams::new(z[0].exp(), z[1].exp(), z[2].exp(), k)
}

/// Minimizes `objective` from the initial point and `restarts − 1` perturbed
/// copies; each start is polished by a second simplex from its best vertex.
/// Ties are broken on the lexicographic order of the internal coordinates.
fn multistart(
    objective: &(dyn Fn(&KggParams) -> f64 + Sync),
    init: &KggParams,
    opts: &FitOptions,
) -> (KggParams, Minimum) {
    let z0 = to_internal(init);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.restarts.max(1))
        .map(|r| {
            if r == 0 {
                z0.to_vec()
            } else {
                z0.iter().map(|z| z + rng.gen_range(-1.0..1.0)).collect()
            }
        })
        .collect();
    let f = |z: &[f64]| match from_internal(z) {
        Ok(p) => objective(&p),
        Err(_) => f64::INFINITY,
    };
    let mut runs: Vec<Minimum> = starts
        .par_iter()
        .map(|z| {
            let first = opts.simplex.minimize(f, z);
            let second = opts.simplex.minimize(f, &first.x);
            let settled = (first.value - second.value).abs() <= 1e-9 * first.value.abs().max(1e-12);
            let mut history = first.history;
            history.extend(second.history.iter().map(|v| v.min(first.value)));
            let (x, value) = if second.value <= first.value {
                (second.x, second.value)
            } else {
                (first.x, first.value)
            };
            Minimum {
                x,
                value,
                evals: first.evals + second.evals,
                converged: second.converged && settled,
                history,
            }
        })
        .collect();
    runs.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then_with(|| {
            a.x.iter()
                .zip(&b.x)
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let evals = runs.iter().map(|m| m.evals).sum();
    let mut best = runs.swap_remove(0);
    best.evals = evals;
    let params = from_internal(&best.x).unwrap_or(*init);
    (params, best)
}

fn finish(params: KggParams, best: Minimum, ks_stat: f64, n_points_used: usize, method: FitMethod) -> FitResult {
    FitResult {
        params,
        objective: best.value,
        tail: KappaGG::new(params).tail_params().ok(),
        ks_stat,
        n_points_used,
        converged: best.converged,
        method,
        evaluations: best.evals,
    }
}

/// κ from a Pareto exponent estimate with α = ν, by inverting `a = ν/κ − (α − ν)`.
fn init_from(median: f64, a_tail: Option<f64>) -> KggParams {
    let (alpha, nu) = (1.2, 1.2);
    let kappa = a_tail.map_or(0.5, |a| (nu / (a + alpha - nu)).clamp(0.05, 0.95));
    KggParams::new(alpha, nu, median, kappa).expect("α = ν satisfies every constraint")
}

/// Probability mass of each bin under `d`, taken from whichever of the cdf
/// and the survival function is smaller at the bin.
fn bin_masses(d: &KappaGG, edges: &[f64]) -> Vec<f64> {
    let at: Vec<(f64, f64)> = edges.iter().map(|&x| d.cdf_pair(x)).collect();
    at.windows(2)
        .map(|w| if w[1].0 < 0.5 { w[1].0 - w[0].0 } else { w[0].1 - w[1].1 })
        .collect()
}

fn histogram_median(h: &WealthHistogram) -> f64 {
    let cdf = h.edge_cdf();
    let k = cdf.iter().position(|&c| c >= 0.5).unwrap_or(cdf.len() - 1).max(1);
    let (c0, c1) = (cdf[k - 1], cdf[k]);
    let t = if c1 > c0 { (0.5 - c0) / (c1 - c0) } else { 0.5 };
    h.edges[k - 1] * (h.edges[k] / h.edges[k - 1]).powf(t.clamp(0.0, 1.0))
}

/// Least-squares fit of `ln density` against the log of the model's mean
/// density over each bin, equally weighted over the masked bins with
/// positive counts.
pub fn fit_histogram(h: &WealthHistogram, mask: BinMask, init: Init, opts: &FitOptions) -> Result<FitResult> {
    let centers = h.centers();
    let dens = h.pdf_estimate();
    let widths = h.widths();
    let used: Vec<usize> = (0..h.n_bins())
        .filter(|&k| mask.contains(centers[k], h.counts[k]))
        .collect();
    if used.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "histogram fit needs at least 8 usable bins in the mask, got {}",
            used.len()
        )));
    }
    let init = match init {
        Init::Params(p) => p,
        Init::Auto => {
            let x90 = quantile_of_histogram(h, 0.9);
            init_from(histogram_median(h), tail_slope(h, x90).ok().map(|t| t.a).filter(|a| *a > 0.0))
        }
    };
    let ln_dens: Vec<f64> = used.iter().map(|&k| dens[k].ln()).collect();
    let objective = |p: &KggParams| {
        let d = KappaGG::new(*p);
        let mass = bin_masses(&d, &h.edges);
        let sse: f64 = used
            .iter()
            .zip(&ln_dens)
            .map(|(&k, ld)| {
                let model = (mass[k].max(1e-300) / widths[k]).ln();
                (ld - model).powi(2)
            })
            .sum();
        sse / used.len() as f64
    };
    let (params, best) = multistart(&objective, &init, opts);
    let d = KappaGG::new(params);
    let ks = h.ks_statistic(|x| d.cdf(x));
    Ok(finish(params, best, ks, used.len(), FitMethod::HistogramLeastSquares))
}

fn quantile_of_histogram(h: &WealthHistogram, u: f64) -> f64 {
    let cdf = h.edge_cdf();
    let k = cdf.iter().position(|&c| c >= u).unwrap_or(cdf.len() - 1);
    h.edges[k]
}

const NLL_CHUNK: usize = 8192;

fn ks_sorted(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Hill estimate of the Pareto exponent from the top `k` order statistics.
fn hill(sorted: &[f64], k: usize) -> Option<f64> {
    let n = sorted.len();
    if k < 2 || k >= n {
        return None;
    }
    let base = sorted[n - k - 1].ln();
    let s: f64 = sorted[n - k..].iter().map(|x| x.ln() - base).sum();
    (s > 0.0).then(|| k as f64 / s)
}

/// Maximum-likelihood fit: minimizes the mean of `−ln f(x_i)`.
pub fn fit_mle(samples: &[f64], init: Init, opts: &FitOptions) -> Result<FitResult> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "maximum-likelihood fit needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    if let Some(x) = samples.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::domain("fit_mle", format!("sample {x} is not a finite positive number")));
    }
    // sorting makes the chunked sums independent of the input order
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if xs[0] == xs[n - 1] {
        return Err(Error::NonConvergence {
            what: "maximum-likelihood fit of a zero-variance sample",
            iterations: 0,
            residual: 0.0,
        });
    }
    let init = match init {
        Init::Params(p) => p,
        Init::Auto => init_from(xs[n / 2], hill(&xs, (n / 100).max(10))),
    };
    let objective = |p: &KggParams| {
        let d = KappaGG::new(*p);
        let partial: Vec<f64> = xs
            .par_chunks(NLL_CHUNK)
            .map(|c| c.iter().map(|&x| d.ln_pdf(x)).sum::<f64>())
            .collect();
        -partial.iter().sum::<f64>() / n as f64
    };
    let (params, best) = multistart(&objective, &init, opts);
    let d = KappaGG::new(params);
    let ks = ks_sorted(&xs, |x| d.cdf(x));
    Ok(finish(params, best, ks, n, FitMethod::Mle))
}

/// Least-squares line through the log-log tail of a histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSlope {
    /// d ln(density) / d ln(x).
    pub slope: f64,
    /// Pareto exponent `−slope − 1`.
    pub a: f64,
    pub n_bins: usize,
}

/// Slope of `ln density` against `ln x` over nonempty bins with center ≥ `x_lo`.
pub fn tail_slope(h: &WealthHistogram, x_lo: f64) -> Result<TailSlope> {
    let dens = h.density();
    let pts: Vec<(f64, f64)> = h
        .centers()
        .into_iter()
        .zip(dens)
        .zip(&h.counts)
        .filter(|((c, _), n)| *c >= x_lo && **n > 0)
        .map(|((c, d), _)| (c.ln(), d.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "tail slope needs at least 5 nonempty bins above {x_lo}, got {}",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    let slope = sxy / sxx;
    Ok(TailSlope {
        slope,
        a: -slope - 1.0,
        n_bins: pts.len(),
    })
}

/// Shape `n` of a Gamma law with fixed mean `mean`, by maximizing the binned
/// likelihood of the histogram (out-of-range tallies included).
pub fn fit_gamma_shape(h: &WealthHistogram, mean: f64) -> Result<f64> {
    if !(mean > 0.0) {
        return Err(Error::domain("fit_gamma_shape", format!("mean {mean} must be positive")));
    }
    if h.n_total() == 0 {
        return Err(Error::InsufficientData("empty histogram".into()));
    }
    let nll = |ln_n: f64| -> f64 {
        let n = ln_n.exp();
        let at: Vec<(f64, f64)> = h
            .edges
            .iter()
            .map(|&x| igamma_pair(n, n * x / mean).unwrap_or((f64::NAN, f64::NAN)))
            .collect();
        let ln_mass = |m: f64| m.max(1e-300).ln();
        let mut total = h.underflow as f64 * ln_mass(at[0].0) + h.overflow as f64 * ln_mass(at[at.len() - 1].1);
        for (k, w) in at.windows(2).enumerate() {
            if h.counts[k] > 0 {
                let m = if w[1].0 < 0.5 { w[1].0 - w[0].0 } else { w[0].1 - w[1].1 };
                total += h.counts[k] as f64 * ln_mass(m);
            }
        }
        -total
    };
    let (mut a, mut b) = (0.01f64.ln(), 1e4f64.ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (nll(c), nll(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = nll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = nll(d);
        }
    }
    Ok((0.5 * (a + b)).exp())
}
