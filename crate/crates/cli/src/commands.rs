use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use kgg::distribution::sweeps::SWEEPS;
use kgg::fitting::{fit_histogram, fit_mle, BinMask, FitOptions, FitResult, Init};
use kgg::inequality::{gen_entropy, gini, mld, theil, write_lorenz_csv, LorenzCurve};
use kgg::simulator::{run, spanning_histogram, LambdaMode, SimConfig, WealthHistogram};
use kgg::{KappaGG, KggParams};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::ManifestBuilder;
use crate::{DistArgs, DistKind, FitArgs, InequalityArgs, LogGrid, MethodArg, ReproduceArgs, SimulateArgs};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn sink(output: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::io(path.unwrap_or(Path::new("<stdout>")), e)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_table(w: &mut dyn Write, d: &KappaGG, grid: &LogGrid, ccdf: bool) -> io::Result<()> {
    writeln!(w, "x,{}", if ccdf { "ccdf" } else { "pdf" })?;
    for x in grid.points() {
        let y = if ccdf { d.sf(x) } else { d.pdf(x) };
        writeln!(w, "{x:.14e},{y:.14e}")?;
    }
    Ok(())
}

pub fn dist(a: DistArgs) -> CliResult<()> {
    let p = a.params.params()?;
    let out = a.output.as_deref();
    let mut w = sink(out)?;
    match a.kind {
        DistKind::Eval | DistKind::Ccdf => {
            write_table(&mut w, &KappaGG::new(p), &a.log_grid, matches!(a.kind, DistKind::Ccdf)).map_err(io_err(out))?
        }
        DistKind::Lorenz => {
            if a.points == 0 {
                return Err(CliError::Usage("--points must be positive".into()));
            }
            let pts = LorenzCurve::new(&p)?.grid(a.points)?;
            write_lorenz_csv(&pts, &mut w)?;
        }
    }
    w.flush().map_err(io_err(out))
}

fn simulate_config(a: &SimulateArgs) -> CliResult<SimConfig> {
    let mut c = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            SimConfig::from_json(&text)?
        }
        None => SimConfig::desk(LambdaMode::Uniform),
    };
    if let Some(lambda) = a.lambda {
        c.lambda_mode = LambdaMode::Homogeneous { lambda };
    }
    if let Some(n) = a.agents {
        c.n_agents = n;
    }
    if let Some(m) = a.mean_money {
        c.mean_money = m;
    }
    if let Some(n) = a.exchanges {
        c.n_exchanges = n;
    }
    if let Some(n) = a.realizations {
        c.n_realizations = n;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(b) = a.bins {
        c.histogram.n_bins = b;
    }
    c.validate()?;
    Ok(c)
}

fn write_histogram(h: &WealthHistogram, path: &Path) -> CliResult<()> {
    let mut w = create(path)?;
    h.write_csv(&mut w)?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let config = simulate_config(&a)?;
    let mut manifest = ManifestBuilder::start();
    manifest.config(&config);
    ensure_dir(&a.out_dir)?;

    let t = Instant::now();
    let out = run(&config)?;
    let elapsed = t.elapsed().as_secs_f64();

    let path = a.out_dir.join("histogram.csv");
    write_histogram(&out.histogram, &path)?;
    manifest.output(&path);
    let m = manifest.finish(&a.out_dir)?;

    let conserved = out.conserved();
    println!(
        "conservation: {} ({} realizations, total money {})",
        if conserved { "ok, bit-identical" } else { "VIOLATED" },
        out.realizations.len(),
        out.realizations.first().map_or(0.0, |r| r.initial_total)
    );
    println!("runtime: {elapsed:.2} s");
    println!("wrote {} and {}", path.display(), m.display());
    if conserved {
        Ok(())
    } else {
        Err(kgg::Error::InvalidParams("total money changed during the run".into()).into())
    }
}

enum FitData {
    Histogram(WealthHistogram),
    Samples(Vec<f64>),
}

fn load_fit_data(path: &Path) -> CliResult<FitData> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = BufReader::new(file).lines().peekable();
    let first = match lines.peek() {
        Some(Ok(l)) => l.trim().to_string(),
        Some(Err(_)) => return Err(CliError::io(path, lines.next().unwrap().unwrap_err())),
        None => return Err(kgg::Error::InsufficientData(format!("{} is empty", path.display())).into()),
    };
    if first.starts_with("bin_center") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok(FitData::Histogram(WealthHistogram::read_csv(text.as_bytes())?));
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        match s.parse::<f64>() {
            Ok(x) => samples.push(x),
            // a single header line is tolerated
            Err(_) if i == 0 => continue,
            Err(e) => return Err(kgg::Error::Parse(format!("{} line {}: `{s}`: {e}", path.display(), i + 1)).into()),
        }
    }
    Ok(FitData::Samples(samples))
}

#[derive(Serialize)]
struct FitReport {
    data: String,
    mask: Option<BinMask>,
    fit: FitResult,
    gini: Option<f64>,
    theil: Option<f64>,
    mld: Option<f64>,
}

fn print_report(r: &FitReport) {
    let f = &r.fit;
    let [al, nu, be, ka] = f.params.as_array();
    println!("data: {}", r.data);
    println!(
        "method: {} ({} points, {} evaluations, {})",
        serde_json::to_value(f.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        f.n_points_used,
        f.evaluations,
        if f.converged { "converged" } else { "NOT converged" }
    );
    println!("alpha = {al:.6}  nu = {nu:.6}  beta = {be:.6}  kappa = {ka:.6}");
    match f.tail {
        Some(t) => println!("pareto tail: x0 = {:.6}, a = {:.6}", t.x0, t.a),
        None => println!("pareto tail: none"),
    }
    println!("objective = {:.6e}  ks = {:.6}", f.objective, f.ks_stat);
    let show = |name: &str, v: Option<f64>| match v {
        Some(v) => println!("{name} = {v:.6}"),
        None => println!("{name} = n/a (needs ν/κ − (α − ν) > 1)"),
    };
    show("gini", r.gini);
    show("theil", r.theil);
    show("mld", r.mld);
}

fn report_for(data: String, mask: Option<BinMask>, fit: FitResult) -> FitReport {
    let p = fit.params;
    FitReport {
        data,
        mask,
        gini: gini(&p).ok(),
        theil: theil(&p).ok(),
        mld: mld(&p).ok(),
        fit,
    }
}

pub fn fit(a: FitArgs) -> CliResult<()> {
    let opts = FitOptions {
        restarts: a.restarts.max(1),
        seed: a.seed,
        ..FitOptions::default()
    };
    let mask = BinMask {
        x_min: a.mask_xmin,
        x_max: a.mask_xmax,
        min_count: a.min_count,
    };
    let data = load_fit_data(&a.data)?;
    let (fit, mask) = match (a.method, data) {
        (MethodArg::Hist, FitData::Histogram(h)) => (fit_histogram(&h, mask, Init::Auto, &opts)?, Some(mask)),
        (MethodArg::Hist, FitData::Samples(xs)) => {
            let h = spanning_histogram(&xs, a.bins)?;
            (fit_histogram(&h, mask, Init::Auto, &opts)?, Some(mask))
        }
        (MethodArg::Mle, FitData::Samples(xs)) => {
            if a.mask_xmin.is_some() || a.mask_xmax.is_some() {
                return Err(CliError::Usage("--mask-xmin/--mask-xmax apply to histogram fits only".into()));
            }
            (fit_mle(&xs, Init::Auto, &opts)?, None)
        }
        (MethodArg::Mle, FitData::Histogram(_)) => {
            return Err(CliError::Usage("--method mle needs raw samples, not a histogram".into()))
        }
    };
    let report = report_for(a.data.display().to_string(), mask, fit);
    let json = serde_json::to_string_pretty(&report).map_err(kgg::Error::from)? + "\n";
    if let Some(path) = &a.output {
        let mut w = create(path)?;
        w.write_all(json.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))?;
    }
    if a.json {
        print!("{json}");
    } else {
        print_report(&report);
    }
    if report.fit.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged)
    }
}

pub fn inequality(a: InequalityArgs) -> CliResult<()> {
    let p = a.params.params()?;
    let mut rows = vec![
        ("gini".to_string(), gini(&p)?),
        ("theil".to_string(), theil(&p)?),
        ("mld".to_string(), mld(&p)?),
    ];
    for &t in &a.theta {
        let v = if t == 0.0 {
            mld(&p)?
        } else if t == 1.0 {
            theil(&p)?
        } else {
            gen_entropy(t, &p)?
        };
        rows.push((format!("ge({t})"), v));
    }
    // shortest round-trip formatting: values parse back to the same bits
    println!("measure,value");
    for (name, v) in rows {
        println!("{name},{v}");
    }
    Ok(())
}

fn sweep_csv(dir: &Path, figure: u8, grid: &LogGrid) -> CliResult<PathBuf> {
    let sweep = &SWEEPS[usize::from(figure - 1)];
    let path = dir.join(format!("fig{figure}_{}.csv", sweep.name));
    let mut w = create(&path)?;
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        writeln!(w, "{},x,pdf,ccdf", sweep.name)?;
        for (v, p) in sweep.values.iter().zip(sweep.members()) {
            let d = KappaGG::new(p);
            for x in grid.points() {
                writeln!(w, "{v},{x:.14e},{:.14e},{:.14e}", d.pdf(x), d.sf(x))?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// X and Z both lie above Y in the Lorenz order; X and Z cross.
const LORENZ_TRIPLE: [(&str, [f64; 4]); 3] = [
    ("X", [3.0, 2.0, 1.0, 0.5]),
    ("Y", [1.2, 1.5, 1.0, 0.8]),
    ("Z", [1.5, 2.0, 1.0, 0.3]),
];

fn lorenz_csv(dir: &Path, grid: &LogGrid, points: usize) -> CliResult<Vec<PathBuf>> {
    let triple: Vec<(&str, KggParams)> = LORENZ_TRIPLE
        .iter()
        .map(|(n, [a, v, b, k])| Ok((*n, KggParams::new(*a, *v, *b, *k)?)))
        .collect::<kgg::Result<_>>()?;

    let pdf_path = dir.join("fig5_pdf.csv");
    let mut w = create(&pdf_path)?;
    writeln!(w, "curve,x,pdf").map_err(io_err(Some(&pdf_path)))?;
    for (name, p) in &triple {
        let d = KappaGG::new(*p);
        for x in grid.points() {
            writeln!(w, "{name},{x:.14e},{:.14e}", d.pdf(x)).map_err(io_err(Some(&pdf_path)))?;
        }
    }
    w.flush().map_err(io_err(Some(&pdf_path)))?;

    let lz_path = dir.join("fig5_lorenz.csv");
    let mut w = create(&lz_path)?;
    writeln!(w, "curve,u,L").map_err(io_err(Some(&lz_path)))?;
    for (name, p) in &triple {
        for pt in LorenzCurve::new(p)?.grid(points)? {
            writeln!(w, "{name},{:.14e},{:.14e}", pt.u, pt.l).map_err(io_err(Some(&lz_path)))?;
        }
    }
    w.flush().map_err(io_err(Some(&lz_path)))?;
    Ok(vec![pdf_path, lz_path])
}

#[derive(Serialize)]
struct Figure6Fits {
    full: FitReport,
    masked: Option<FitReport>,
}

fn figure6(dir: &Path, a: &ReproduceArgs, manifest: &mut ManifestBuilder) -> CliResult<Vec<PathBuf>> {
    let config = SimConfig {
        mean_money: 1e3,
        n_realizations: a.realizations,
        seed: a.seed,
        ..SimConfig::desk(LambdaMode::Uniform)
    };
    config.validate()?;
    manifest.config(&config);
    let out = run(&config)?;
    if !out.conserved() {
        return Err(kgg::Error::InvalidParams("total money changed during the run".into()).into());
    }
    let h = &out.histogram;
    let hist_path = dir.join("fig6_histogram.csv");
    write_histogram(h, &hist_path)?;

    let opts = FitOptions::default();
    let full = fit_histogram(h, BinMask::all(), Init::Auto, &opts)?;
    // the last decade carries the finite-size cutoff
    let cut = BinMask::below(h.edges[h.n_bins()] / 10.0);
    let masked = fit_histogram(h, cut, Init::Params(full.params), &opts).ok();

    let curve_path = dir.join("fig6_fit.csv");
    let mut w = create(&curve_path)?;
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        writeln!(w, "x,pdf_estimate,kgg_pdf,exp_pdf")?;
        let d = KappaGG::new(full.params);
        for (x, f) in h.centers().iter().zip(h.pdf_estimate()) {
            let e = (-x / config.mean_money).exp() / config.mean_money;
            writeln!(w, "{x:.14e},{f:.14e},{:.14e},{e:.14e}", d.pdf(*x))?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| CliError::io(&curve_path, e))?;

    let fits = Figure6Fits {
        full: report_for(hist_path.display().to_string(), Some(BinMask::all()), full),
        masked: masked.map(|m| report_for(hist_path.display().to_string(), Some(cut), m)),
    };
    let fit_path = dir.join("fig6_fit.json");
    let json = serde_json::to_string_pretty(&fits).map_err(kgg::Error::from)? + "\n";
    std::fs::write(&fit_path, json).map_err(|e| CliError::io(&fit_path, e))?;
    print_report(&fits.full);
    if let Some(m) = &fits.masked {
        println!("-- with the last decade masked --");
        print_report(m);
    }
    Ok(vec![hist_path, curve_path, fit_path])
}

pub fn reproduce_fig(a: ReproduceArgs) -> CliResult<()> {
    let dir = &a.out_dir;
    ensure_dir(dir)?;
    let mut manifest = ManifestBuilder::start();
    let outputs = match a.figure {
        1..=4 => vec![sweep_csv(dir, a.figure, &a.log_grid)?],
        5 => {
            if a.points == 0 {
                return Err(CliError::Usage("--points must be positive".into()));
            }
            lorenz_csv(dir, &a.log_grid, a.points)?
        }
        _ => {
            manifest.seed(a.seed);
            figure6(dir, &a, &mut manifest)?
        }
    };
    for p in &outputs {
        manifest.output(p);
        println!("wrote {}", p.display());
    }
    manifest.finish(dir)?;
    Ok(())
}
