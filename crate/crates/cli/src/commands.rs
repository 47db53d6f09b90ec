use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use l2dens::estimator::{default_grid, fhat_curve, EstimatorConfig};
use l2dens::io::{
    curve_csv, ingest, parse_estimator_list, preamble, AlphaSpec, BandwidthSpec, Command as Cmd, GridSpec,
    RunConfig,
};
use l2dens::selection::{h_final, h_final_from, select_alpha_or_fallback, Selection, Selector};
use l2dens::sim::{default_h_range, grid_search, results_csv, mise_summary};
use l2dens::start::GaussianStart;
use l2dens::theory::{ratio_table, RatioRow};
use l2dens::zoo::{catalogue, lookup, mw_density, TrueDensity};
use l2dens::{Error, Result};

use crate::{Cli, Command};

type Meta = Vec<(String, String)>;

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let cfg = file.overlay(flags(&cli));
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        // The pool can only be configured once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Estimate(_) => estimate(&cfg),
        Command::Select(_) => select(&cfg),
        Command::RatioTable(_) => ratio(&cfg),
        Command::Simulate(ref a) => simulate(&cfg, a.h_range.as_deref()),
        Command::Zoo(ref a) => zoo(a.dump),
    }
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.to_string_lossy().into_owned())
}

fn flags(cli: &Cli) -> RunConfig {
    let mut c = RunConfig {
        threads: cli.threads,
        ..Default::default()
    };
    match &cli.command {
        Command::Estimate(a) => {
            c.command = Some(Cmd::Estimate);
            c.input = path_string(&a.input);
            c.output = path_string(&a.output);
            c.alpha = a.alpha.clone();
            c.bandwidth = a.bandwidth.clone();
            c.grid = a.grid.clone();
        }
        Command::Select(a) => {
            c.command = Some(Cmd::Select);
            c.input = path_string(&a.input);
            c.output = path_string(&a.output);
            c.method = a.method;
        }
        Command::RatioTable(a) => {
            c.command = Some(Cmd::RatioTable);
            c.output = path_string(&a.output);
        }
        Command::Simulate(a) => {
            c.command = Some(Cmd::Simulate);
            c.density = a.density.clone();
            c.n = a.n;
            c.reps = a.reps;
            c.seed = a.seed;
            c.estimators = a.estimators.clone();
            c.output = path_string(&a.output);
            c.long = a.long.then_some(true);
        }
        Command::Zoo(_) => c.command = Some(Cmd::Zoo),
    }
    c
}

fn emit(output: &Option<String>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(Path::new(p), text).map_err(|e| Error::Io(format!("cannot write {p}: {e}"))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(Error::from)
        }
    }
}

fn sample(cfg: &RunConfig) -> Result<(Vec<f64>, GaussianStart)> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--input is required".into()))?;
    let data = ingest(Path::new(input))?;
    let start = GaussianStart::fit_mle(&data)?;
    Ok((data, start))
}

fn kv(meta: &mut Meta, k: &str, v: impl ToString) {
    meta.push((k.to_string(), v.to_string()));
}

fn trace_meta(meta: &mut Meta, sel: &Selection) {
    match sel {
        Selection::Direct(d) => {
            kv(meta, "trace.h_bar", d.h_bar);
            kv(meta, "trace.c_hat", format!("{} {} {}", d.c_hat.c1, d.c_hat.c2, d.c_hat.c3));
            kv(meta, "trace.c_bar", format!("{} {} {}", d.c_bar.c1, d.c_bar.c2, d.c_bar.c3));
        }
        Selection::Pipeline(t) => {
            let join = |v: [f64; 3]| v.map(|g| g.to_string()).join(" ");
            kv(meta, "trace.g_n", join(t.g_n()));
            kv(meta, "trace.g_d", join(t.g_d()));
            kv(meta, "trace.g_star", t.g_amsre_star);
            kv(meta, "trace.n_hat", t.n_hat);
            kv(meta, "trace.d_hat", t.d_hat);
            kv(meta, "trace.n_star", t.n_star);
            kv(meta, "trace.d_star", t.d_star);
            kv(meta, "trace.alpha_hat_2", t.alpha_hat_2);
            kv(meta, "trace.alpha_hat_3", t.alpha_hat_3);
        }
    }
}

fn resolve_alpha(data: &[f64], start: &GaussianStart, spec: AlphaSpec, meta: &mut Meta) -> Result<(f64, Option<Selection>)> {
    match spec {
        AlphaSpec::Value(a) => Ok((a, None)),
        AlphaSpec::Auto(sel) => {
            let (a, selection, err) = select_alpha_or_fallback(data, start, sel)?;
            if let Some(e) = err {
                eprintln!("warning: {e}; using alpha = {a}");
                kv(meta, "warning", format!("{e}; using alpha = {a}"));
            }
            if let Some(s) = &selection {
                trace_meta(meta, s);
            }
            Ok((a, selection))
        }
    }
}

fn estimate(cfg: &RunConfig) -> Result<()> {
    let (data, start) = sample(cfg)?;
    let alpha_spec: AlphaSpec = cfg.alpha.as_deref().unwrap_or("hg").parse()?;
    let h_spec: BandwidthSpec = cfg.bandwidth.as_deref().unwrap_or("auto").parse()?;
    let mut meta = Meta::new();
    kv(&mut meta, "n", data.len());
    kv(&mut meta, "mu_hat", start.mu_hat);
    kv(&mut meta, "sigma_hat", start.sigma_hat);
    let (alpha, selection) = resolve_alpha(&data, &start, alpha_spec, &mut meta)?;
    let h = match h_spec {
        BandwidthSpec::Value(h) => h,
        BandwidthSpec::Auto => {
            let fb = match &selection {
                Some(Selection::Direct(d)) => h_final_from(d, data.len())?,
                _ => h_final(&data, &start)?,
            };
            if fb.floored {
                kv(&mut meta, "h_floored", true);
            }
            fb.h
        }
    };
    kv(&mut meta, "alpha", alpha);
    kv(&mut meta, "h", h);
    let grid = match &cfg.grid {
        Some(g) => g.parse::<GridSpec>()?.points(),
        None => default_grid(&data, h, start.sigma_hat),
    };
    let ec = EstimatorConfig::new(alpha, h, start)?;
    let est = fhat_curve(&data, &ec, &grid)?;
    emit(&cfg.output, &curve_csv(&meta, &est.grid, &est.values))
}

fn select(cfg: &RunConfig) -> Result<()> {
    let (data, start) = sample(cfg)?;
    let m = cfg.method.unwrap_or(1);
    let sel = Selector::from_index(m).ok_or_else(|| Error::InvalidParameter(format!("unknown method {m}")))?;
    let mut meta = Meta::new();
    kv(&mut meta, "method", m);
    kv(&mut meta, "n", data.len());
    kv(&mut meta, "mu_hat", start.mu_hat);
    kv(&mut meta, "sigma_hat", start.sigma_hat);
    let (alpha, _) = resolve_alpha(&data, &start, AlphaSpec::Auto(sel), &mut meta)?;
    kv(&mut meta, "alpha", alpha);
    let text: String = meta.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    emit(&cfg.output, &text)
}

fn ratio_csv(rows: &[RatioRow]) -> String {
    let mut s = String::from("density,alpha0,alpha1,alpha2,alpha_o_ratio,alpha_o\n");
    for r in rows {
        let _ = write!(s, "{}", r.density_id);
        for (_, v) in &r.ratios {
            let _ = write!(s, ",{v:.4}");
        }
        match r.optimum {
            Some((a, v)) => {
                let _ = writeln!(s, ",{v:.4},{a:.4}");
            }
            // In-model density: zero bias at every index, optimum undefined.
            None => {
                let _ = writeln!(s, ",{:.4},", 0.0);
            }
        }
    }
    s
}

fn ratio(cfg: &RunConfig) -> Result<()> {
    let alphas = [0.0, 1.0, 2.0];
    let mixtures: Vec<TrueDensity> = (1..=15).map(mw_density).collect::<Result<_>>()?;
    let skews: Vec<TrueDensity> = (0..=5).map(|l| lookup(&format!("sn{l}"))).collect::<Result<_>>()?;
    let mut rows = ratio_table(&mixtures, &alphas)?;
    rows.extend(ratio_table(&skews, &alphas)?);
    let text = preamble(&[("ratios".into(), "R(f_alpha)/R(kde) at the least false Gaussian start".into())]) + &ratio_csv(&rows);
    emit(&cfg.output, &text)
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParameter(format!("bandwidth interval `{s}` is not of the form lo:hi"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn simulate(cfg: &RunConfig, h_range: Option<&str>) -> Result<()> {
    let id = cfg
        .density
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--density is required".into()))?;
    let truth = lookup(id)?;
    let long = cfg.long.unwrap_or(false);
    let n = cfg.n.unwrap_or(if long { 500 } else { 200 });
    let reps = cfg.reps.unwrap_or(if long { 1000 } else { 300 });
    let seed = cfg.seed.unwrap_or(1);
    let recipes = parse_estimator_list(cfg.estimators.as_deref().unwrap_or("kde,hj,ll,hg"))?;
    let range = match h_range {
        Some(s) => parse_range(s)?,
        None => default_h_range(&truth, n),
    };
    let mut results = Vec::with_capacity(recipes.len());
    for r in &recipes {
        let res = grid_search(&truth, *r, n, reps, seed, range)
            .map_err(|e| Error::InvalidParameter(format!("estimator {}: {e}", r.label())))?;
        results.push(res);
    }
    let mut meta = Meta::new();
    kv(&mut meta, "density", truth.id());
    kv(&mut meta, "n", n);
    kv(&mut meta, "reps", reps);
    kv(&mut meta, "seed", seed);
    kv(&mut meta, "h_range", format!("{}:{}", range.0, range.1));
    for r in &results {
        let failed: usize = r.failures.iter().sum();
        kv(&mut meta, &format!("failures.{}", r.estimator_label), failed);
        kv(&mut meta, &format!("fallbacks.{}", r.estimator_label), r.fallbacks);
        if r.boundary {
            kv(&mut meta, &format!("boundary.{}", r.estimator_label), true);
        }
    }
    eprint!("{}", mise_summary(&results));
    emit(&cfg.output, &(preamble(&meta) + &results_csv(&results)))
}

fn zoo(dump: bool) -> Result<()> {
    let mut s = String::new();
    if dump {
        s.push_str("id,component,weight,mean,sd\n");
        for (id, c, w, m, sd) in catalogue() {
            let _ = writeln!(s, "mw{id},{c},{w},{m},{sd}");
        }
    } else {
        for k in 1..=15 {
            let d = mw_density(k)?;
            let (mu, var) = d.kl_gaussian();
            let _ = writeln!(s, "mw{k}\tmean {mu:.4}\tsd {:.4}", var.sqrt());
        }
        s.push_str("sn<lambda>\tskew-normal 2 phi(x) Phi(lambda x)\n");
    }
    emit(&None, &s)
}
