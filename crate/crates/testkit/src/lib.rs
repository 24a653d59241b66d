//! Numerical oracles for the kgg test suites.
//!
//! Nothing here calls into `kgg`: integrals are computed by adaptive
//! Gauss–Kronrod quadrature of whatever closure the test hands in, and the
//! reference densities are coded directly from their textbook formulas on
//! top of `statrs`' special functions.

use statrs::function::gamma::{gamma, ln_gamma};

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let n0 = 16;
    let w = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + w * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + w };
        let (v, e) = gk15(&mut f, lo, hi);
        intervals.push((lo, hi, v, e));
    }
    for _ in 0..20_000 {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    intervals.iter().map(|iv| iv.2).sum()
}

/// ∫₀^∞ g(x) dx for integrands that behave like powers of x (possibly
/// times logarithms) at both ends: x^p near 0 with p > -1, x^{-q} at
/// infinity with q > 1.
///
/// Works in `u = ln x`. The integration window is widened until the
/// log-integrand's slope stabilises at each end; the remaining tails are
/// added analytically from that slope, which makes heavy power-law tails
/// tractable without knowing their exponent in advance. `scale` is a rough
/// location of the bulk.
pub fn integrate_half_line(g: impl Fn(f64) -> f64, scale: f64) -> f64 {
    integrate_log_domain(|u| u.exp() * g(u.exp()), None, scale)
}

/// [`integrate_half_line`] for a positive integrand supplied as `ln g(x)`.
/// Use this for heavy tails whose values underflow long before the
/// integral has converged.
pub fn integrate_half_line_ln(ln_g: impl Fn(f64) -> f64, scale: f64) -> f64 {
    integrate_log_domain(|u| (ln_g(u.exp()) + u).exp(), None, scale)
}

/// ∫₀^upper g(x) dx with the same treatment of the lower end as
/// [`integrate_half_line`].
pub fn integrate_from_zero(g: impl Fn(f64) -> f64, upper: f64) -> f64 {
    integrate_log_domain(|u| u.exp() * g(u.exp()), Some(upper), upper)
}

// ∫ h(u) du over u = ln x.
fn integrate_log_domain(h_raw: impl Fn(f64) -> f64, upper: Option<f64>, scale: f64) -> f64 {
    let h = |u: f64| {
        let v = h_raw(u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let ln_abs = |u: f64| h(u).abs().ln();
    let slope = |u: f64| ln_abs(u + 0.5) - ln_abs(u - 0.5);
    let centre = scale.ln();
    let peak = (-60..=60)
        .map(|i| centre + 0.5 * i as f64)
        .filter(|&u| upper.is_none_or(|b| u <= b.ln()))
        .map(|u| h(u).abs())
        .fold(0.0, f64::max);

    let settled = |u: f64, step: f64| {
        let v = h(u).abs();
        if v < 1e-18 * peak {
            return true;
        }
        let s1 = slope(u);
        let s2 = slope(u + step);
        s1 * step < 0.0 && ((s1 - s2) / s1).abs() < 1e-9 && v < 1e-6 * peak
    };
    let tail = |u: f64, outward: f64| {
        let v = h(u);
        let s = slope(u) * outward;
        if v != 0.0 && s < 0.0 {
            v / -s
        } else {
            0.0
        }
    };

    let (hi, tail_hi) = match upper {
        Some(b) => (b.ln(), 0.0),
        None => {
            let mut hi = centre + 5.0;
            while !settled(hi, 4.0) && hi < 690.0 {
                hi += 4.0;
            }
            (hi, tail(hi, 1.0))
        }
    };
    let mut lo = hi.min(centre) - 5.0;
    while !settled(lo, -4.0) && lo > -690.0 {
        lo -= 4.0;
    }
    let body = integrate(h, lo, hi, 1e-16 * peak, 1e-13);
    body + tail_hi + tail(lo, -1.0)
}

/// Kolmogorov–Smirnov statistic of a sample against a continuous cdf.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (f - lo).abs().max((hi - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Golden-section search for the maximum of a unimodal function on [a, b].
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Seeded random `(α, ν, β, κ)` tuples that satisfy the normalizability
/// guard and have Pareto exponent `ν/κ − (α − ν)` above `min_tail`.
pub fn random_param_tuples(n: usize, seed: u64, min_tail: f64) -> Vec<[f64; 4]> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let alpha = rng.gen_range(0.6..4.0);
        let nu = rng.gen_range(0.5..3.0);
        let beta: f64 = 10f64.powf(rng.gen_range(-1.0..2.0));
        let kappa = rng.gen_range(0.05..1.0);
        let skew: f64 = kappa * (alpha / nu - 1.0);
        if 1.0 - skew * skew > 0.05 && nu / kappa - (alpha - nu) > min_tail {
            out.push([alpha, nu, beta, kappa]);
        }
    }
    out
}

/// Seeded fit targets with separated shapes and a tail visible in 10⁶
/// samples: α ∈ [1.2, 3], ν ∈ [0.8, 2.5], β ∈ [1, 10³], κ ∈ [0.3, 0.95],
/// Pareto exponent in (1, 4).
pub fn fit_targets(n: usize, seed: u64) -> Vec<[f64; 4]> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let alpha = rng.gen_range(1.2..3.0);
        let nu = rng.gen_range(0.8..2.5);
        let beta: f64 = 10f64.powf(rng.gen_range(0.0..3.0));
        let kappa = rng.gen_range(0.3..0.95);
        let skew: f64 = kappa * (alpha / nu - 1.0);
        let a = nu / kappa - (alpha - nu);
        if 1.0 - skew * skew > 0.05 && a > 1.0 && a < 4.0 {
            out.push([alpha, nu, beta, kappa]);
        }
    }
    out
}

/// Reference densities coded directly from their closed forms.
pub mod reference {
    use super::*;

    /// Kaniadakis κ-exponential `(√(1+κ²x²) + κx)^{1/κ}`. For negative
    /// arguments the reciprocal `1/(√(1+κ²x²) + κ|x|)^{1/κ}` is used, which is
    /// the same number without the cancellation.
    pub fn kaniadakis_exp(x: f64, k: f64) -> f64 {
        let r = (1.0 + k * k * x * x).sqrt() + k * x.abs();
        if x >= 0.0 {
            r.powf(1.0 / k)
        } else {
            r.powf(-1.0 / k)
        }
    }

    /// κ-Generalized (deformed Weibull) density.
    pub fn kappa_generalized_pdf(x: f64, alpha: f64, beta: f64, k: f64) -> f64 {
        let y = (x / beta).powf(alpha);
        alpha / beta * (x / beta).powf(alpha - 1.0) * kaniadakis_exp(-y, k) / (1.0 + k * k * y * y).sqrt()
    }

    /// Three-parameter Generalized Gamma density ν/(βΓ(α/ν)) (x/β)^{α−1} e^{−(x/β)^ν}.
    pub fn generalized_gamma_pdf(x: f64, alpha: f64, nu: f64, beta: f64) -> f64 {
        nu / (beta * gamma(alpha / nu)) * (x / beta).powf(alpha - 1.0) * (-(x / beta).powf(nu)).exp()
    }

    /// Exponential (Boltzmann–Gibbs) density with mean `m`.
    pub fn exponential_pdf(x: f64, m: f64) -> f64 {
        (-x / m).exp() / m
    }

    /// Gamma density with shape `n` and mean `m`.
    pub fn gamma_pdf_mean(x: f64, n: f64, m: f64) -> f64 {
        let r = n / m;
        (n * (r * x).ln() - r * x - ln_gamma(n)).exp() / x
    }

    /// Gamma cdf with shape `n` and mean `m`.
    pub fn gamma_cdf_mean(x: f64, n: f64, m: f64) -> f64 {
        statrs::function::gamma::gamma_lr(n, n * x / m)
    }

    /// Kaniadakis κ-Gamma via its integral representation
    /// `[1−κ²(x−1)²](x−1)∫₀^∞ t^{x−2} exp_κ(−t) dt`, valid for 1 < x < 1 + 1/κ.
    pub fn kappa_gamma_integral(x: f64, k: f64) -> f64 {
        let integral = integrate_half_line(|t| t.powf(x - 2.0) * kaniadakis_exp(-t, k), 1.0);
        (1.0 - k * k * (x - 1.0) * (x - 1.0)) * (x - 1.0) * integral
    }
}
