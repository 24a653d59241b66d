//! The κ-Generalized-Gamma distribution.
//!
//! Density
//!
//! ```text
//! f(x) = [1 − κ²(α/ν − 1)²] · (ν/β) / Γ_κ(α/ν) · (x/β)^{α−1}
//!        · exp_κ(−(x/β)^ν) / √(1 + κ²(x/β)^{2ν})
//! ```
//!
//! on `x ≥ 0`. With `y = (x/β)^ν` the transformed variable
//! `X = exp_κ(−y)^{2κ}` is Beta(1/(2κ) − (α−ν)/(2ν), α/ν) distributed, which
//! gives the cdf, quantile and sampler. Below [`KAPPA_SWITCH`] every method
//! delegates to the Generalized Gamma limit.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{
    ibeta_pair, igamma_pair, inv_ibeta_pair, inv_igamma, lgamma, ln_gamma_ratio, ln_kappa_exp,
    ln_kappa_gamma_pos, psi, KAPPA_SWITCH,
};

/// Shape/scale/deformation parameters `(α, ν, β, κ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct KggParams {
    alpha: f64,
    nu: f64,
    beta: f64,
    kappa: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    nu: f64,
    beta: f64,
    kappa: f64,
}

impl TryFrom<RawParams> for KggParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        KggParams::new(r.alpha, r.nu, r.beta, r.kappa)
    }
}

impl From<KggParams> for RawParams {
    fn from(p: KggParams) -> Self {
        RawParams {
            alpha: p.alpha,
            nu: p.nu,
            beta: p.beta,
            kappa: p.kappa,
        }
    }
}

impl KggParams {
    pub fn new(alpha: f64, nu: f64, beta: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("nu", nu), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} = {v} must be finite and > 0")));
            }
        }
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidParams(format!("kappa = {kappa} not in [0, 1]")));
        }
        let skew = kappa * (alpha / nu - 1.0);
        if !(1.0 - skew * skew > 0.0) {
            return Err(Error::InvalidParams(format!(
                "1 − κ²(α/ν − 1)² = {} must be > 0 for a normalizable density",
                1.0 - skew * skew
            )));
        }
        Ok(KggParams {
            alpha,
            nu,
            beta,
            kappa,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Same shape, different scale.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        KggParams::new(self.alpha, self.nu, beta, self.kappa)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.nu, self.beta, self.kappa]
    }

    /// `ν/κ − (α − ν)`, which is also the Pareto exponent. Moments exist
    /// below it and the Lorenz curve needs it above 1. Infinite when κ = 0.
    pub fn tail_index(&self) -> f64 {
        if self.kappa == 0.0 {
            f64::INFINITY
        } else {
            self.nu / self.kappa - (self.alpha - self.nu)
        }
    }
}

/// Pareto tail `f(x) ≈ a·x₀^a / x^{a+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub x0: f64,
    pub a: f64,
}

/// Named special cases of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// κ ≈ 0.
    GeneralizedGamma,
    /// ν = α = 1.
    KappaExponential,
    /// ν = α: the κ-deformed Weibull.
    KappaGeneralized,
    /// ν = 1.
    KappaGamma,
    General,
}

const REDUCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct KappaGG {
    p: KggParams,
    /// α/ν
    shape: f64,
    /// (α−ν)/(2ν)
    half_skew: f64,
    /// first Beta shape 1/(2κ) − (α−ν)/(2ν); unused in the κ → 0 limit
    beta_a: f64,
    ln_norm: f64,
    deformed: bool,
}

impl KappaGG {
    pub fn new(p: KggParams) -> Self {
        let shape = p.alpha / p.nu;
        let half_skew = (p.alpha - p.nu) / (2.0 * p.nu);
        let deformed = p.kappa >= KAPPA_SWITCH;
        let (beta_a, ln_norm) = if deformed {
            let k = p.kappa;
            // 1 − κ²(s−1)² = (1 − κ(s−1))(1 + κ(s−1)); the first factor
            // cancels against the prefactor inside Γ_κ.
            let ln_gk = ln_kappa_gamma_pos(shape, k);
            let ln_guard = (-k * (shape - 1.0)).ln_1p() + (k * (shape - 1.0)).ln_1p();
            (0.5 / k - half_skew, ln_guard + p.nu.ln() - p.beta.ln() - ln_gk)
        } else {
            (f64::INFINITY, p.nu.ln() - p.beta.ln() - lgamma(shape))
        };
        KappaGG {
            p,
            shape,
            half_skew,
            beta_a,
            ln_norm,
            deformed,
        }
    }

    pub fn params(&self) -> &KggParams {
        &self.p
    }

    /// ln f(x); `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= 0.0 {
            return if x < 0.0 { f64::NEG_INFINITY } else { self.ln_pdf_at_zero() };
        }
        let KggParams {
            alpha, nu, beta, kappa, ..
        } = self.p;
        let lr = (x / beta).ln();
        let ly = nu * lr;
        let body = self.ln_norm + (alpha - 1.0) * lr;
        if !self.deformed {
            return body - ly.exp();
        }
        let w = kappa.ln() + ly; // ln(κy)
        if w > 20.0 {
            // asinh(κy) = ln(2κy) + O((κy)^{-2}), √(1+κ²y²) = κy (1 + O((κy)^{-2}))
            body - (std::f64::consts::LN_2 + w) / kappa - w
        } else {
            let y = ly.exp();
            body + ln_kappa_exp(-y, kappa) - 1.0f64.hypot(kappa * y).ln()
        }
    }

    fn ln_pdf_at_zero(&self) -> f64 {
        let alpha = self.p.alpha;
        if alpha > 1.0 {
            f64::NEG_INFINITY
        } else if alpha == 1.0 {
            self.ln_norm
        } else {
            f64::INFINITY
        }
    }

    /// Density. At `x = 0` returns the limit: 0 for α > 1, the normalizing
    /// constant for α = 1 and `+inf` for α < 1.
    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `(F(x), 1 − F(x))`, each to full relative precision.
    pub fn cdf_pair(&self, x: f64) -> (f64, f64) {
        if !(x > 0.0) {
            return (0.0, 1.0);
        }
        if x == f64::INFINITY {
            return (1.0, 0.0);
        }
        let KggParams { nu, beta, kappa, .. } = self.p;
        let ly = nu * (x / beta).ln();
        if !self.deformed {
            return igamma_pair(self.shape, ly.exp()).expect("shape and argument are in domain");
        }
        let w = kappa.ln() + ly;
        let asinh_ky = if w > 20.0 { std::f64::consts::LN_2 + w } else { w.exp().asinh() };
        let t = (-2.0 * asinh_ky).exp();
        let t_comp = -(-2.0 * asinh_ky).exp_m1();
        let (sf, cdf) = ibeta_pair(t, t_comp, self.beta_a, self.shape).expect("shapes are positive");
        (cdf, sf)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_pair(x).0
    }

    /// Survival function `1 − F(x)`.
    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_pair(x).1
    }

    /// Quantile for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain("quantile", format!("u = {u} not in (0, 1)")));
        }
        self.quantile_pair(u, 1.0 - u)
    }

    /// Quantile with the upper-tail probability `q = 1 − u` given separately,
    /// so far-tail quantiles keep their precision.
    pub fn quantile_pair(&self, u: f64, q: f64) -> Result<f64> {
        let KggParams { nu, beta, kappa, .. } = self.p;
        if u <= 0.0 {
            return Ok(0.0);
        }
        if q <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let ln_y = if self.deformed {
            let (t, t_comp) = inv_ibeta_pair(q, u, self.beta_a, self.shape)?;
            // asinh(κy) = −½ ln t
            let h = -0.5 * if t > 0.5 { (-t_comp).ln_1p() } else { t.ln() };
            if h > 20.0 {
                h - std::f64::consts::LN_2 - kappa.ln()
            } else {
                (h.sinh() / kappa).ln()
            }
        } else {
            inv_igamma(u, q, self.shape)?.ln()
        };
        Ok(beta * (ln_y / nu).exp())
    }

    /// Draws one variate from `rng` by inverse transform.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile_pair(u, 1.0 - u)
            .expect("inverse incomplete beta converges on (0, 1)")
    }

    /// `n` variates drawn sequentially from `rng`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// `n` i.i.d. variates, reproducible for a given seed independently of
    /// the number of worker threads.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut out = vec![0.0; n];
        out.par_chunks_mut(SAMPLE_CHUNK)
            .enumerate()
            .for_each(|(chunk, slot)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(chunk as u64);
                for v in slot.iter_mut() {
                    *v = self.sample_one(&mut rng);
                }
            });
        out
    }

    /// Location of the density maximum (0 when α ≤ 1).
    pub fn mode(&self) -> f64 {
        let KggParams {
            alpha, nu, beta, kappa,
        } = self.p;
        if alpha <= 1.0 {
            return 0.0;
        }
        let am1 = alpha - 1.0;
        if !self.deformed {
            return beta * (am1 / nu).powf(1.0 / nu);
        }
        // Closed form for (x/β)^{2ν}, rationalized to avoid cancellation in
        // √(1+t) − 1 when κ is small.
        let k2 = kappa * kappa;
        let c = 1.0 + nu - alpha;
        let lead = nu * nu + 2.0 * k2 * am1 * c;
        let disc = nu * nu - k2 * c * c;
        let root = (lead * lead + 4.0 * k2 * disc * am1 * am1).sqrt();
        let y2 = 2.0 * am1 * am1 / (lead + root);
        if y2.is_finite() && y2 > 0.0 && lead > 0.0 {
            let y = y2.sqrt();
            if mode_residual(y, am1, nu, kappa).abs() <= 1e-10 * am1 {
                return beta * y.powf(1.0 / nu);
            }
        }
        beta * mode_root(am1, nu, kappa).powf(1.0 / nu)
    }

    /// Existence window `(lo, hi)` for the moment order.
    pub fn moment_window(&self) -> (f64, f64) {
        let alpha = self.p.alpha;
        let hi = if self.deformed {
            self.p.tail_index()
        } else {
            f64::INFINITY
        };
        (-alpha, hi)
    }

    fn check_order(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.moment_window();
        if !(r > lo) {
            return Err(Error::existence(format!("moment order r = {r} must satisfy r > −α = {lo}")));
        }
        if !(r < hi) {
            return Err(Error::existence(format!(
                "moment order r = {r} must satisfy r < ν/κ + ν − α = {hi}"
            )));
        }
        Ok(())
    }

    /// ln E[x^r].
    pub fn ln_moment(&self, r: f64) -> Result<f64> {
        self.check_order(r)?;
        let KggParams {
            alpha, nu, beta, kappa,
        } = self.p;
        let s = self.shape;
        let sr = (alpha + r) / nu;
        let mut v = r * beta.ln() + lgamma(sr) - lgamma(s);
        if self.deformed {
            let z = 0.5 / kappa;
            let d = self.half_skew;
            let dr = (alpha - nu + r) / (2.0 * nu);
            v += -(r / nu) * (2.0 * kappa).ln() + (kappa * (s - 1.0)).ln_1p()
                - (kappa * (sr - 1.0)).ln_1p()
                + ln_gamma_ratio(z - dr, z + dr)
                - ln_gamma_ratio(z - d, z + d);
        }
        Ok(v)
    }

    /// Raw moment E[x^r] inside the existence window.
    pub fn moment(&self, r: f64) -> Result<f64> {
        Ok(self.ln_moment(r)?.exp())
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1.0)
    }

    pub fn variance(&self) -> Result<f64> {
        let m = self.mean()?;
        Ok(m * m * self.relative_second_moment_m1()?)
    }

    fn relative_second_moment_m1(&self) -> Result<f64> {
        Ok((self.ln_moment(2.0)? - 2.0 * self.ln_moment(1.0)?).exp_m1())
    }

    /// Coefficient of variation σ/m.
    pub fn cv(&self) -> Result<f64> {
        Ok(self.relative_second_moment_m1()?.max(0.0).sqrt())
    }

    /// The coefficient of variation exactly as it is usually printed in
    /// closed form, without the factor Γ(1/(2κ) + (α−ν)/(2ν)) / Γ(1/(2κ) −
    /// (α−ν)/(2ν)) in the denominator. Differs from [`cv`](Self::cv) unless
    /// α = ν. Kept for comparison only.
    pub fn cv_printed(&self) -> Result<f64> {
        self.check_order(2.0)?;
        if !self.deformed {
            return self.cv();
        }
        let KggParams { alpha, nu, kappa, .. } = self.p;
        let s = self.shape;
        let z = 0.5 / kappa;
        let part = |r: f64| {
            let sr = (alpha + r) / nu;
            let dr = (alpha - nu + r) / (2.0 * nu);
            lgamma(sr) - (kappa * (sr - 1.0)).ln_1p() + ln_gamma_ratio(z - dr, z + dr)
        };
        let ln_den = (kappa * (s - 1.0)).ln_1p() - lgamma(s) + 2.0 * part(1.0);
        Ok((part(2.0) - ln_den).exp_m1().sqrt())
    }

    /// E[ln x].
    pub fn expected_log(&self) -> f64 {
        let KggParams {
            alpha, nu, beta, kappa,
        } = self.p;
        let s = self.shape;
        if !self.deformed {
            return beta.ln() + psi(s) / nu;
        }
        let z = 0.5 / kappa;
        let d = self.half_skew;
        beta.ln()
            - (-psi(s) + 0.5 * psi(z - d) + 0.5 * psi(z + d) + (2.0 * kappa).ln()
                + kappa * nu / (nu + kappa * (alpha - nu)))
                / nu
    }

    /// Pareto scale and exponent of the power-law tail.
    pub fn tail_params(&self) -> Result<TailParams> {
        if !self.deformed {
            return Err(Error::NoPowerLawTail(format!(
                "κ = {} is below {KAPPA_SWITCH:e}; the density decays faster than any power",
                self.p.kappa
            )));
        }
        let KggParams { nu, beta, kappa, .. } = self.p;
        let s = self.shape;
        let a = nu / kappa * (1.0 - kappa * (s - 1.0));
        let ln_inner = (kappa * (s - 1.0)).ln_1p() - ln_kappa_gamma_pos(s, kappa) - (2.0 * kappa).ln() / kappa;
        Ok(TailParams {
            x0: beta * (ln_inner / a).exp(),
            a,
        })
    }

    /// Classifies the parameters into the named special cases.
    pub fn reduce(&self) -> Reduction {
        reduce(&self.p)
    }
}

const SAMPLE_CHUNK: usize = 1 << 16;

// (α−1) = νy [1/√(1+κ²y²) + κ²y/(1+κ²y²)] at the mode, y = (x/β)^ν.
fn mode_residual(y: f64, am1: f64, nu: f64, kappa: f64) -> f64 {
    let ky = kappa * y;
    let q = 1.0 + ky * ky;
    nu * y * (1.0 / q.sqrt() + kappa * ky / q) - am1
}

// The right-hand side is increasing in y from 0 to ν(1 + 1/κ) > α − 1, so
// bisection in ln y always brackets the root.
fn mode_root(am1: f64, nu: f64, kappa: f64) -> f64 {
    let (mut lo, mut hi) = (-50.0f64, 0.0f64);
    while mode_residual(hi.exp(), am1, nu, kappa) < 0.0 {
        hi += 5.0;
    }
    while mode_residual(lo.exp(), am1, nu, kappa) > 0.0 {
        lo -= 50.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mode_residual(mid.exp(), am1, nu, kappa) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REDUCE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Classifies parameters into the named special cases. Advisory only.
pub fn reduce(p: &KggParams) -> Reduction {
    if p.kappa < KAPPA_SWITCH {
        Reduction::GeneralizedGamma
    } else if close(p.alpha, 1.0) && close(p.nu, 1.0) {
        Reduction::KappaExponential
    } else if close(p.alpha, p.nu) {
        Reduction::KappaGeneralized
    } else if close(p.nu, 1.0) {
        Reduction::KappaGamma
    } else {
        Reduction::General
    }
}

/// Parameter sets of the four standard one-parameter sweeps: a base set and
/// the values taken by the swept parameter.
pub mod sweeps {
    use super::KggParams;

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Swept {
        Alpha,
        Nu,
        Beta,
        Kappa,
    }

    #[derive(Debug, Clone, Copy)]
    pub struct Sweep {
        pub name: &'static str,
        pub base: [f64; 4],
        pub swept: Swept,
        pub values: &'static [f64],
    }

    pub const SWEEPS: [Sweep; 4] = [
        Sweep {
            name: "alpha",
            base: [2.0, 1.3, 1.2, 0.75],
            swept: Swept::Alpha,
            values: &[1.5, 2.0, 3.0],
        },
        Sweep {
            name: "nu",
            base: [2.0, 1.8, 1.2, 0.75],
            swept: Swept::Nu,
            values: &[1.0, 1.3, 1.8],
        },
        Sweep {
            name: "beta",
            base: [2.0, 1.3, 2.4, 0.75],
            swept: Swept::Beta,
            values: &[0.6, 1.2, 2.4],
        },
        Sweep {
            name: "kappa",
            base: [2.0, 1.8, 1.2, 0.5],
            swept: Swept::Kappa,
            values: &[0.25, 0.5, 0.75, 1.0],
        },
    ];

    impl Sweep {
        pub fn base_params(&self) -> KggParams {
            let [a, n, b, k] = self.base;
            KggParams::new(a, n, b, k).expect("sweep base sets are valid")
        }

        pub fn members(&self) -> Vec<KggParams> {
            self.values
                .iter()
                .map(|&v| {
                    let [mut a, mut n, mut b, mut k] = self.base;
                    match self.swept {
                        Swept::Alpha => a = v,
                        Swept::Nu => n = v,
                        Swept::Beta => b = v,
                        Swept::Kappa => k = v,
                    }
                    KggParams::new(a, n, b, k).expect("sweep members are valid")
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: f64, n: f64, b: f64, k: f64) -> KappaGG {
        KappaGG::new(KggParams::new(a, n, b, k).unwrap())
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(KggParams::new(0.0, 1.0, 1.0, 0.5).is_err());
        assert!(KggParams::new(1.0, -1.0, 1.0, 0.5).is_err());
        assert!(KggParams::new(1.0, 1.0, f64::NAN, 0.5).is_err());
        assert!(KggParams::new(1.0, 1.0, 1.0, 1.5).is_err());
        // κ|α/ν − 1| = 1
        assert!(KggParams::new(4.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn serde_round_trip_validates() {
        let p = KggParams::new(2.0, 1.3, 1.2, 0.75).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<KggParams>(&s).unwrap(), p);
        assert!(serde_json::from_str::<KggParams>(r#"{"alpha":1,"nu":1,"beta":1,"kappa":2}"#).is_err());
    }

    #[test]
    fn unit_exponential_limit() {
        let d = dist(1.0, 1.0, 1.0, 1e-12);
        assert!((d.pdf(0.0) - 1.0).abs() < 1e-14);
        assert!((d.pdf(2.0) - (-2.0f64).exp()).abs() < 1e-14);
        assert!((dist(1.0, 1.0, 2.0, 1e-12).mean().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn density_at_origin() {
        assert_eq!(dist(2.0, 1.3, 1.2, 0.75).pdf(0.0), 0.0);
        assert_eq!(dist(0.7, 1.3, 1.2, 0.75).pdf(0.0), f64::INFINITY);
        let d = dist(1.0, 1.3, 1.2, 0.75);
        assert!((d.pdf(0.0) - d.pdf(1e-12)).abs() < 1e-9);
    }

    #[test]
    fn cdf_endpoints() {
        let d = dist(2.0, 1.3, 1.2, 0.75);
        assert_eq!(d.cdf(0.0), 0.0);
        assert!((d.cdf(1.2e9) - 1.0).abs() < 1e-9);
        assert_eq!(d.cdf_pair(f64::INFINITY), (1.0, 0.0));
    }

    #[test]
    fn quantile_round_trip_and_order() {
        let d = dist(2.0, 1.3, 1.2, 0.75);
        for &u in &[1e-12, 0.01, 0.5, 0.9, 0.999_999] {
            let x = d.quantile(u).unwrap();
            assert!((d.cdf(x) - u).abs() < 1e-10 * u.max(1e-2), "u={u}");
        }
        assert!(d.quantile(0.99).unwrap() > d.quantile(0.9).unwrap());
        assert!(d.quantile(1e-300).unwrap() < 1e-100);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
    }

    #[test]
    fn far_tail_quantile_uses_complement() {
        let d = dist(2.0, 1.3, 1.2, 0.75);
        let x = d.quantile_pair(1.0, 1e-30).unwrap();
        assert!((d.sf(x) / 1e-30 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = dist(2.0, 1.3, 1.2, 0.75);
        assert_eq!(d.sample(1000, 7), d.sample(1000, 7));
        assert_ne!(d.sample(1000, 7), d.sample(1000, 8));
    }

    #[test]
    fn moment_zero_is_one() {
        for d in [dist(2.0, 1.3, 1.2, 0.75), dist(0.5, 2.0, 3.0, 0.2), dist(1.0, 1.0, 1.0, 0.0)] {
            assert!((d.moment(0.0).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn moment_existence_errors_name_the_bound() {
        let d = dist(2.0, 1.3, 1.2, 0.75);
        let e = d.moment(1.5).unwrap_err();
        assert!(e.to_string().contains("ν/κ + ν − α"), "{e}");
        assert!(d.moment(-2.0).unwrap_err().to_string().contains("−α"));
        assert!(d.variance().is_err());
    }

    #[test]
    fn cv_identity() {
        let d = dist(1.5, 2.2, 3.0, 0.4);
        let cv = d.cv().unwrap();
        let m = d.mean().unwrap();
        let m2 = d.moment(2.0).unwrap();
        assert!((cv * cv + 1.0 - m2 / (m * m)).abs() < 1e-10);
        // the printed form only coincides when α = ν
        assert!((d.cv_printed().unwrap() - cv).abs() > 1e-2);
        let g = dist(1.7, 1.7, 2.0, 0.3);
        assert!((g.cv_printed().unwrap() - g.cv().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mode_reduces_to_generalized_gamma() {
        let (a, n, b) = (2.0f64, 1.3, 1.2);
        let want = b * ((a - 1.0) / n).powf(1.0 / n);
        assert!((dist(a, n, b, 1e-10).mode() / want - 1.0).abs() < 1e-6);
        assert!((dist(a, n, b, 1e-6).mode() / want - 1.0).abs() < 1e-6);
        assert_eq!(dist(1.0, 1.3, 1.2, 0.75).mode(), 0.0);
        assert_eq!(dist(0.4, 1.3, 1.2, 0.75).mode(), 0.0);
    }

    #[test]
    fn mode_satisfies_stationarity() {
        let d = dist(2.0, 1.3, 1.2, 0.75);
        let m = d.mode();
        let h = 1e-4 * 1.2;
        assert!(d.pdf(m - h) < d.pdf(m) && d.pdf(m + h) < d.pdf(m));
    }

    #[test]
    fn expected_log_scales() {
        let a = dist(2.0, 1.3, 1.0, 0.75).expected_log();
        let b = dist(2.0, 1.3, 5.0, 0.75).expected_log();
        assert!((b - a - 5.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tail_requires_deformation() {
        assert!(matches!(dist(2.0, 1.3, 1.2, 0.0).tail_params(), Err(Error::NoPowerLawTail(_))));
        let t = dist(1.332, 1.124, 221.315, 0.7868).tail_params().unwrap();
        assert!((t.a - 1.2206).abs() < 1e-3, "{}", t.a);
    }

    #[test]
    fn reductions() {
        assert_eq!(dist(1.0, 1.0, 3.0, 0.4).reduce(), Reduction::KappaExponential);
        assert_eq!(dist(1.7, 1.7, 3.0, 0.4).reduce(), Reduction::KappaGeneralized);
        assert_eq!(dist(1.7, 1.0, 3.0, 0.4).reduce(), Reduction::KappaGamma);
        assert_eq!(dist(1.7, 1.3, 3.0, 0.0).reduce(), Reduction::GeneralizedGamma);
        assert_eq!(dist(1.7, 1.3, 3.0, 0.4).reduce(), Reduction::General);
    }

    #[test]
    fn sweep_members_are_valid() {
        for s in sweeps::SWEEPS {
            assert!(s.members().iter().any(|p| *p == s.base_params()));
        }
    }
}
