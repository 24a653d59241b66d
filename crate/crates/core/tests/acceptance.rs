//! Acceptance run: one PASS/FAIL line per criterion, followed by the
//! measurements behind it.
//!
//! Exits 0 after reporting so that the workspace test run completes; set
//! `KGG_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::time::{Duration, Instant};

use kgg::distribution::sweeps::SWEEPS;
use kgg::fitting::{fit_gamma_shape, fit_histogram, tail_slope, BinMask, FitOptions, Init};
use kgg::inequality::{
    empirical_gini, gen_entropy, gini, lorenz_dominates, lorenz_grid_compare, mld, stated_criterion, theil,
    LorenzCurve, LorenzOrder,
};
use kgg::simulator::{run, spanning_histogram, LambdaMode, SimConfig};
use kgg::special::{kappa_exp, kappa_gamma, kappa_log};
use kgg::{KappaGG, KggParams};
use kgg_testkit::reference::{exponential_pdf, generalized_gamma_pdf, kappa_generalized_pdf};
use kgg_testkit::{
    fit_targets, golden_max, integrate, integrate_from_zero, integrate_half_line, integrate_half_line_ln,
    random_param_tuples,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn params(t: [f64; 4]) -> KggParams {
    KggParams::new(t[0], t[1], t[2], t[3]).unwrap()
}

fn figure_sets() -> Vec<KggParams> {
    SWEEPS.iter().map(|s| s.base_params()).collect()
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

fn criterion_1(c: &mut Check) {
    let mut worst = 0.0f64;
    for &k in &[0.1, 0.4, 0.75, 0.99] {
        for (x, want) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0)] {
            match kappa_gamma(x, k) {
                Ok(g) => worst = worst.max((g - want).abs()),
                Err(e) => c.expect(false, format!("Γ_κ({x}) at κ={k}: {e}")),
            }
        }
    }
    c.expect(worst < 1e-10, format!("Γ_κ anchors max error {worst:.2e}"));
    c.note(format!("Γ_κ(1), Γ_κ(2), Γ_κ(3) at κ ∈ {{0.1, 0.4, 0.75, 0.99}}: max abs error {worst:.2e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_pair = 0.0f64;
    for _ in 0..10_000 {
        let x = rng.gen_range(-50.0..50.0);
        let k = rng.gen_range(1e-6..1.0);
        let back = kappa_log(kappa_exp(x, k), k).unwrap();
        worst_pair = worst_pair.max((back - x).abs() / f64::max(1.0, x.abs()));
    }
    c.expect(worst_pair < 1e-10, format!("κ-log(κ-exp(x)) max error {worst_pair:.2e}"));
    c.note(format!("κ-exp/κ-log inverse pair over 10⁴ random (x, κ): max error {worst_pair:.2e}"));
}

fn criterion_2(c: &mut Check) {
    let mut sets = figure_sets();
    sets.extend(random_param_tuples(50, 2024, 0.1).into_iter().map(params));
    let (mut e_norm, mut e_cdf, mut e_q, mut e_mom, mut e_mode, mut e_log) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in &sets {
        let d = KappaGG::new(*p);
        let b = p.beta();
        let norm = integrate_half_line_ln(|x| d.ln_pdf(x), b);
        e_norm = e_norm.max((norm - 1.0).abs());

        for i in 0..20 {
            let x = b * 10f64.powf(-2.0 + 4.0 * i as f64 / 19.0);
            let want = integrate_from_zero(|t| d.pdf(t), x);
            e_cdf = e_cdf.max((d.cdf(x) - want).abs());
        }

        for i in 1..100 {
            let u = i as f64 / 100.0;
            let x = d.quantile(u).unwrap();
            e_q = e_q.max((d.cdf(x) - u).abs());
        }

        let (_, hi) = d.moment_window();
        for r in [f64::min(1.0, 0.5 * hi), -0.5 * p.alpha()] {
            let want = integrate_half_line_ln(|x| r * x.ln() + d.ln_pdf(x), b);
            e_mom = e_mom.max((d.moment(r).unwrap() / want - 1.0).abs());
        }

        if p.alpha() > 1.0 {
            let m = d.mode();
            let numeric = golden_max(|x| d.ln_pdf(x), 1e-9 * b, 1e3 * b, 1e-13);
            e_mode = e_mode.max((m - numeric).abs() / numeric);
        } else {
            let ok = d.pdf(1e-6 * b) > d.pdf(1e-3 * b) && d.mode() == 0.0;
            c.expect(ok, format!("{p:?}: density not maximal at the origin for α ≤ 1"));
        }

        let want = integrate_half_line(|x| x.ln() * d.pdf(x), b);
        e_log = e_log.max((d.expected_log() - want).abs());
    }
    c.expect(e_norm < 1e-7, format!("normalization {e_norm:.2e}"));
    c.expect(e_cdf < 1e-7, format!("cdf vs running integral {e_cdf:.2e}"));
    c.expect(e_q < 1e-8, format!("quantile round trip {e_q:.2e}"));
    c.expect(e_mom < 1e-7, format!("moments vs quadrature {e_mom:.2e}"));
    c.expect(e_mode < 1e-6, format!("mode vs maximizer {e_mode:.2e}"));
    c.expect(e_log < 1e-7, format!("expected_log vs quadrature {e_log:.2e}"));
    c.note(format!("{} parameter sets (4 figure sets + 50 randomized)", sets.len()));
    c.note(format!("normalization {e_norm:.2e} (tol 1e-7); cdf vs ∫pdf at 20 points {e_cdf:.2e} (tol 1e-7)"));
    c.note(format!("cdf(quantile(u)) − u on (0.01, 0.99) {e_q:.2e} (tol 1e-8)"));
    c.note(format!("moments r ∈ {{min(1, a/2), −α/2}} vs quadrature, relative {e_mom:.2e} (tol 1e-7)"));
    c.note(format!("mode vs golden-section maximizer, relative {e_mode:.2e} (tol 1e-6)"));
    c.note(format!("expected_log vs quadrature {e_log:.2e} (tol 1e-7)"));
}

fn criterion_3(c: &mut Check) {
    let mut e_kg = 0.0f64;
    for t in random_param_tuples(20, 7, 0.1) {
        let p = KggParams::new(t[0], t[0], t[2], t[3]).unwrap();
        let d = KappaGG::new(p);
        for m in [0.01, 0.3, 1.0, 3.0, 30.0] {
            let x = m * t[2];
            e_kg = e_kg.max((d.pdf(x) / kappa_generalized_pdf(x, t[0], t[2], t[3]) - 1.0).abs());
        }
    }
    c.expect(e_kg < 1e-12, format!("ν = α vs κ-generalized {e_kg:.2e}"));

    let mut e_gg = 0.0f64;
    for t in random_param_tuples(20, 8, 0.1) {
        let d = KappaGG::new(KggParams::new(t[0], t[1], t[2], 1e-10).unwrap());
        for m in [0.05, 0.5, 1.0, 2.0, 4.0] {
            let x = m * t[2];
            e_gg = e_gg.max((d.pdf(x) / generalized_gamma_pdf(x, t[0], t[1], t[2]) - 1.0).abs());
        }
    }
    c.expect(e_gg < 1e-6, format!("κ = 1e-10 vs generalized gamma {e_gg:.2e}"));

    let mut e_exp = 0.0f64;
    for &k in &[1e-10, 1e-12, 0.0] {
        let d = KappaGG::new(KggParams::new(1.0, 1.0, 3.0, k).unwrap());
        for x in [0.0, 0.5, 3.0, 20.0] {
            e_exp = e_exp.max((d.pdf(x) / exponential_pdf(x, 3.0) - 1.0).abs());
        }
    }
    c.expect(e_exp < 1e-9, format!("α = ν = 1, κ → 0 vs exponential {e_exp:.2e}"));
    c.note(format!("ν = α vs κ-generalized density, 20 sets × 5 points: relative {e_kg:.2e} (tol 1e-12)"));
    c.note(format!("κ = 1e-10 vs generalized gamma, 20 sets × 5 points: relative {e_gg:.2e} (tol 1e-6)"));
    c.note(format!("α = ν = 1, κ ∈ {{1e-10, 1e-12, 0}} vs exponential: relative {e_exp:.2e}"));
}

fn criterion_4(c: &mut Check) {
    for (p, reported) in [
        ([1.3320, 1.1240, 221.3150, 0.7868], 1.2193),
        ([1.7127, 1.3710, 342.7610, 0.9088], 1.1670),
    ] {
        let d = KappaGG::new(params(p));
        let t = d.tail_params().unwrap();
        let rel = (t.a / reported - 1.0).abs();
        c.expect(rel < 0.01, format!("{p:?}: a = {} vs reported {reported}", t.a));
        let x = 1e3 * t.x0;
        let ratio = d.pdf(x) * x.powf(t.a + 1.0) / (t.a * t.x0.powf(t.a));
        c.expect((ratio - 1.0).abs() < 0.02, format!("{p:?}: pdf·x^(a+1)/(a·x0^a) = {ratio}"));
        c.note(format!(
            "{p:?}: a = {:.5} (reported {reported}, off by {:.3}%), x0 = {:.4}, pdf·x^(a+1)/(a·x0^a) at 10³x0 = {ratio:.5}",
            t.a,
            100.0 * rel,
            t.x0
        ));
    }
}

fn criterion_5(c: &mut Check) {
    let mut panel = figure_sets();
    panel.extend(random_param_tuples(10, 55, 1.05).into_iter().map(params));

    let mut e_gini = 0.0f64;
    for p in &panel {
        let curve = LorenzCurve::new(p).unwrap();
        let oracle = 1.0 - 2.0 * integrate(|u| curve.at(u).unwrap(), 0.0, 1.0, 1e-11, 1e-11);
        e_gini = e_gini.max((gini(p).unwrap() - oracle).abs());
    }
    c.expect(e_gini < 1e-6, format!("gini vs Lorenz integral {e_gini:.2e}"));
    c.note(format!("gini vs 1 − 2∫L du on {} sets: {e_gini:.2e} (tol 1e-6)", panel.len()));

    let (mut e_mld, mut e_theil) = (0.0f64, 0.0f64);
    let mut theil_misses = Vec::new();
    for p in &panel {
        e_mld = e_mld.max((gen_entropy(1e-6, p).unwrap() - mld(p).unwrap()).abs());
        let gap = (gen_entropy(1.0 + 1e-6, p).unwrap() - theil(p).unwrap()).abs();
        e_theil = e_theil.max(gap);
        if gap >= 1e-4 {
            let sym = 0.5 * (gen_entropy(1.0 + 1e-6, p).unwrap() + gen_entropy(1.0 - 1e-6, p).unwrap());
            theil_misses.push(format!(
                "{:?} (a = {:.3}): |GE(1+1e-6) − T| = {gap:.2e}, |mean of GE(1±1e-6) − T| = {:.2e}",
                p.as_array(),
                p.tail_index(),
                (sym - theil(p).unwrap()).abs()
            ));
        }
    }
    c.expect(e_mld < 1e-4, format!("GE(1e-6) vs MLD {e_mld:.2e}"));
    c.expect(e_theil < 1e-4, format!("GE(1+1e-6) vs Theil {e_theil:.2e}"));
    c.note(format!("|GE(1e-6) − MLD| max {e_mld:.2e}; |GE(1+1e-6) − Theil| max {e_theil:.2e} (tol 1e-4)"));
    for m in theil_misses {
        c.note(format!("  one-sided θ → 1 probe misses: {m}"));
    }

    // finite variance keeps the sample Gini within reach of 10⁶ draws
    let finite_var: Vec<KggParams> = panel.iter().copied().filter(|p| p.tail_index() > 2.0).collect();
    let mut e_emp = 0.0f64;
    for (i, p) in finite_var.iter().enumerate() {
        let xs = KappaGG::new(*p).sample(1_000_000, 100 + i as u64);
        e_emp = e_emp.max((empirical_gini(&xs, false).unwrap() - gini(p).unwrap()).abs());
    }
    c.expect(e_emp < 0.005, format!("empirical Gini {e_emp:.4}"));
    c.note(format!(
        "empirical Gini of 10⁶ draws vs analytic on the {} panel sets with a > 2: max {e_emp:.4} (tol 0.005)",
        finite_var.len()
    ));
    let heavy = figure_sets()[0];
    let xs = KappaGG::new(heavy).sample(1_000_000, 99);
    c.note(format!(
        "  for reference, figure-1 set (a = {:.3}): empirical {:.4} vs analytic {:.4}",
        heavy.tail_index(),
        empirical_gini(&xs, false).unwrap(),
        gini(&heavy).unwrap()
    ));

    // pairs ordered by the criterion exactly as stated
    let pool: Vec<KggParams> = random_param_tuples(60, 77, 1.05).into_iter().map(params).collect();
    let (mut ordered, mut as_claimed, mut reversed, mut crossing) = (0, 0, 0, 0);
    for px in &pool {
        for py in &pool {
            if px == py || !stated_criterion(px, py) {
                continue;
            }
            ordered += 1;
            let g = lorenz_grid_compare(px, py, 1000).unwrap();
            if g.min_diff >= -1e-12 {
                as_claimed += 1;
            } else if g.max_diff <= 1e-12 {
                reversed += 1;
            } else {
                crossing += 1;
            }
        }
    }
    c.expect(
        as_claimed == ordered,
        format!("stated ordering gives L_X ≥ L_Y in only {as_claimed} of {ordered} pairs"),
    );
    c.note(format!(
        "criterion as stated (α_x ≤ α_y, a_x ≤ a_y ⇒ L_X ≥ L_Y) on {ordered} random pairs: {as_claimed} hold, {reversed} reversed (L_X ≤ L_Y), {crossing} cross"
    ));

    let (mut fixed_pairs, mut fixed_ok) = (0, 0);
    for px in &pool {
        for py in &pool {
            if px != py && px.alpha() >= py.alpha() && px.tail_index() >= py.tail_index() {
                fixed_pairs += 1;
                if lorenz_grid_compare(px, py, 1000).unwrap().min_diff >= -1e-12 {
                    fixed_ok += 1;
                }
            }
        }
    }
    c.note(format!(
        "  with the direction reversed (α_x ≥ α_y, a_x ≥ a_y ⇒ L_X ≥ L_Y): {fixed_ok} of {fixed_pairs} pairs ordered; lorenz_dominates confirms on the grid"
    ));

    let (px, py) = (params([3.0, 2.0, 1.0, 0.5]), params([1.5, 2.0, 1.0, 0.3]));
    let g = lorenz_grid_compare(&px, &py, 1000).unwrap();
    let verdict = lorenz_dominates(&px, &py).unwrap();
    c.expect(g.crosses(1e-9) && verdict == LorenzOrder::Incomparable, "incomparable pair does not cross");
    c.note(format!(
        "incomparable pair {:?} vs {:?}: L_X − L_Y ranges over [{:.4}, {:.4}], verdict {verdict:?}",
        px.as_array(),
        py.as_array(),
        g.min_diff,
        g.max_diff
    ));
}

fn homogeneous(lambda: f64) -> SimConfig {
    SimConfig {
        n_realizations: 10,
        seed: 6,
        ..SimConfig::desk(LambdaMode::Homogeneous { lambda })
    }
}

fn criterion_6(c: &mut Check) {
    let mut conserved = true;
    for lambda in [0.0, 0.25, 0.5, 0.75] {
        let out = run(&homogeneous(lambda)).unwrap();
        conserved &= out.conserved();
        let n_theory = 3.0 * lambda / (1.0 - lambda) + 1.0;
        let n_hat = fit_gamma_shape(&out.histogram, 1.0).unwrap();
        let rel = (n_hat / n_theory - 1.0).abs();
        c.expect(rel < 0.10, format!("λ = {lambda}: n̂ = {n_hat:.3} vs {n_theory:.3}"));
        let mut line = format!("λ = {lambda}: fitted Gamma shape {n_hat:.3} vs n(λ) = {n_theory:.3} ({:.1}%)", 100.0 * rel);
        if lambda == 0.0 {
            let ks = out.histogram.ks_statistic(|x| 1.0 - (-x).exp());
            c.expect(ks < 0.02, format!("λ = 0 exponential KS {ks:.4}"));
            line += &format!("; KS vs exponential {ks:.4} (tol 0.02)");
        }
        c.note(line);
    }
    c.expect(conserved, "total money changed in some realization");
    c.note(format!(
        "N = 10³, 10⁷ exchanges, 10 realizations per λ; total money bit-identical in every realization: {conserved}"
    ));
}

fn criterion_7(c: &mut Check) {
    let config = SimConfig {
        mean_money: 1e3,
        seed: 7,
        ..SimConfig::desk(LambdaMode::Uniform)
    };
    let t = Instant::now();
    let out = run(&config).unwrap();
    let sim_time = t.elapsed();
    c.expect(out.conserved(), "money not conserved");
    let h = &out.histogram;
    let fit = fit_histogram(h, BinMask::all(), Init::Auto, &FitOptions::default()).unwrap();
    let a = fit.tail.map(|t| t.a).unwrap_or(f64::NAN);
    let ks_exp = h.ks_statistic(|x| 1.0 - (-x / config.mean_money).exp());
    c.expect(fit.converged, "κGG fit did not converge");
    c.expect((1.0..=2.0).contains(&a), format!("fitted Pareto exponent {a:.3}"));
    c.expect(fit.ks_stat < 0.05, format!("κGG KS {:.4}", fit.ks_stat));
    c.expect(ks_exp > 0.1, format!("exponential KS {ks_exp:.4}"));
    c.note(format!(
        "N = 10³, M/N = 10³, 10⁷ exchanges × 10² realizations, uniform λ: simulated in {:.1} s, {} samples",
        sim_time.as_secs_f64(),
        h.n_total()
    ));
    c.note(format!(
        "κGG fit (α, ν, β, κ) = ({:.4}, {:.4}, {:.2}, {:.4}), converged {}, {} bins, a = {a:.4}",
        fit.params.alpha(),
        fit.params.nu(),
        fit.params.beta(),
        fit.params.kappa(),
        fit.converged,
        fit.n_points_used
    ));
    c.note(format!("KS: κGG {:.4} (tol < 0.05), exponential {ks_exp:.4} (tol > 0.1)", fit.ks_stat));
    if let Ok(s) = tail_slope(h, 10.0 * config.mean_money) {
        c.note(format!("  log-log slope above 10·M/N: {:.3} ({} bins)", s.slope, s.n_bins));
    }
}

fn criterion_8(c: &mut Check) {
    let targets = fit_targets(20, 2025);
    let (mut worst_p, mut worst_a) = (0.0f64, 0.0f64);
    for (i, t) in targets.iter().enumerate() {
        let p = params(*t);
        let xs = KappaGG::new(p).sample(1_000_000, 500 + i as u64);
        let h = spanning_histogram(&xs, 60).unwrap();
        let f = fit_histogram(&h, BinMask::all(), Init::Auto, &FitOptions::default()).unwrap();
        let e = max_abs(p.as_array().iter().zip(f.params.as_array()).map(|(t, g)| (g / t - 1.0).abs()));
        let ea = f.tail.map_or(f64::INFINITY, |tl| (tl.a / p.tail_index() - 1.0).abs());
        worst_p = worst_p.max(e);
        worst_a = worst_a.max(ea);
        c.expect(e < 0.15 && ea < 0.05, format!("target {t:?}: parameter error {e:.3}, tail error {ea:.3}"));
    }
    c.note(format!(
        "20 targets, 10⁶ samples each, 60 log bins: worst parameter error {:.1}% (tol 15%), worst tail error {:.2}% (tol 5%)",
        100.0 * worst_p,
        100.0 * worst_a
    ));
}

type Criterion = (&'static str, Duration, fn(&mut Check));

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 special-function anchors", Duration::from_secs(1), criterion_1),
        ("2 distribution correctness", Duration::from_secs(120), criterion_2),
        ("3 special-case reductions", Duration::MAX, criterion_3),
        ("4 tail reproduction", Duration::MAX, criterion_4),
        ("5 inequality suite", Duration::MAX, criterion_5),
        ("6 simulator physics", Duration::from_secs(300), criterion_6),
        ("7 end-to-end desk-scale fit", Duration::from_secs(900), criterion_7),
        ("8 fit round trip", Duration::MAX, criterion_8),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let mut c = Check::default();
        let t = Instant::now();
        f(&mut c);
        let elapsed = t.elapsed();
        if elapsed > budget {
            c.failures.push(format!("runtime {:.1} s over budget {:.0} s", elapsed.as_secs_f64(), budget.as_secs_f64()));
        }
        let ok = c.failures.is_empty();
        failed += usize::from(!ok);
        println!("{} criterion {name} ({:.2} s)", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        for n in &c.notes {
            println!("    {n}");
        }
        for f in &c.failures {
            println!("    failed: {f}");
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 && std::env::var("KGG_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
