use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hazbands::bands::{
    credible_band, evaluation_grid, evaluation_grid_with, median_draws, radius_from_distances, Band, Target,
};
use hazbands::data::{augment, load_dataset, select_interval_count, IntervalGrid, LoadOptions, SurvivalDataset};
use hazbands::frequentist::{
    estimate_band, hall_wellner_band, kaplan_meier, log_ep_band, nelson_aalen, pointwise_intervals,
};
use hazbands::haar::{ell_infty_distance, level_of, to_wavelet};
use hazbands::io::{write_band_csv, write_coverage_table, write_draws_csv, write_json, BandEnvelope};
use hazbands::priors::PriorSpec;
use hazbands::sampler::{run_chain, ChainConfig, PosteriorChain};
use hazbands::sim::{full_scenarios, run_replication_study, CoverageReport, Scenario};
use serde::Serialize;

use crate::args::{DataArgs, FitArgs, FreqMethod, FrequentistArgs, HaarArgs, SamplerArgs, SimulateArgs};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn load(args: &DataArgs) -> Result<SurvivalDataset> {
    let file = File::open(&args.input).map_err(CliError::io(&args.input))?;
    let opts =
        LoadOptions { time_col: args.time_col.clone(), status_col: args.status_col.clone(), horizon: args.horizon };
    load_dataset(file, &opts).map_err(|source| CliError::File { path: args.input.clone(), source })
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> hazbands::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(CliError::io(&path))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|()| w.flush().map_err(hazbands::Error::from))
        .map_err(|source| CliError::File { path: path.clone(), source })?;
    Ok(path)
}

fn interval_count(n: usize, gamma: f64, k: Option<usize>) -> Result<usize> {
    match k {
        Some(0) => Err(CliError::Config("--k must be at least 1".into())),
        Some(k) => Ok(k),
        None => Ok(select_interval_count(n, gamma)?),
    }
}

fn chain_config(draws: usize, burnin: usize, seed: u64, sampler: &SamplerArgs) -> ChainConfig {
    ChainConfig {
        n_draws: draws,
        burn_in: burnin,
        seed,
        rw_step: sampler.rw_step,
        proposal_epsilon: sampler.proposal_epsilon,
        ..ChainConfig::default()
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("--level must lie in (0, 1), got {level}")))
    }
}

fn fit_chain(data: &SurvivalDataset, prior: &PriorSpec, k: usize, cfg: &ChainConfig) -> Result<PosteriorChain> {
    let grid = IntervalGrid::new(k)?;
    Ok(run_chain(prior, &augment(data, &grid), cfg)?)
}

#[derive(Debug, Serialize)]
struct MedianReport {
    draws: usize,
    beyond_horizon: usize,
    mean: Option<f64>,
    q025: Option<f64>,
    q500: Option<f64>,
    q975: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FitSummary {
    n: usize,
    events: usize,
    horizon: f64,
    k: usize,
    prior: PriorSpec,
    chain: ChainConfig,
    level: f64,
    acceptance_rates: Vec<f64>,
    posterior_mean_hazard: Vec<f64>,
    median_survival: MedianReport,
    bands: Vec<BandEnvelope>,
}

pub fn fit(args: &FitArgs) -> Result<()> {
    check_level(args.level)?;
    let prior = args.prior.spec();
    let data = load(&args.data)?;
    let horizon = data.horizon();
    let k = interval_count(data.len(), args.gamma, args.k)?;
    let cfg = chain_config(args.draws, args.burnin, args.seed, &args.sampler);
    let chain = fit_chain(&data, &prior, k, &cfg)?;

    let grid = evaluation_grid(&IntervalGrid::new(k)?);
    prepare_out(&args.out)?;
    let mut envelopes = Vec::new();
    for (target, name) in [
        (Target::Survival, "survival_band.csv"),
        (Target::CumHaz, "cumhaz_band.csv"),
        (Target::Hazard, "hazard_band.csv"),
    ] {
        let band = credible_band(&chain, target, &grid, args.level)?;
        write_file(&args.out, name, |w| write_band_csv(w, &band, horizon))?;
        envelopes.push(BandEnvelope::of(&band, horizon));
    }
    if args.save_draws {
        write_file(&args.out, "draws.csv", |w| write_draws_csv(w, &chain, horizon))?;
    }

    let medians = median_draws(&chain);
    let scaled = |v: Option<f64>| v.map(|t| t * horizon);
    let summary = FitSummary {
        n: data.len(),
        events: data.n_events(),
        horizon,
        k,
        prior,
        chain: cfg,
        level: args.level,
        acceptance_rates: chain.acceptance_rates.clone(),
        posterior_mean_hazard: chain.mean_heights().iter().map(|h| h / horizon).collect(),
        median_survival: MedianReport {
            draws: medians.times.len(),
            beyond_horizon: medians.beyond_horizon,
            mean: scaled(medians.mean()),
            q025: scaled(medians.quantile(0.025)),
            q500: scaled(medians.quantile(0.5)),
            q975: scaled(medians.quantile(0.975)),
        },
        bands: envelopes,
    };
    write_file(&args.out, "summary.json", |w| write_json(w, &summary))?;
    println!(
        "n = {}, events = {}, K = {k}, prior = {}; wrote results to {}",
        summary.n,
        summary.events,
        prior.name(),
        args.out.display()
    );
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let chain = chain_config(args.draws, args.burnin, args.seed, &args.sampler);
    let scenarios: Vec<Scenario> = if args.paper_scale {
        full_scenarios(1000, args.seed).into_iter().map(|s| Scenario { level: args.level, chain, ..s }).collect()
    } else {
        vec![Scenario {
            truth: args.truth.hazard(),
            censoring: args.cens.model(),
            n: args.n,
            gamma: args.gamma,
            prior: args.prior.spec(),
            level: args.level,
            replicates: args.replicates,
            chain,
            seed: args.seed,
        }]
    };
    for s in &scenarios {
        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
    }
    prepare_out(&args.out)?;

    let mut reports: Vec<CoverageReport> = Vec::with_capacity(scenarios.len());
    for (i, s) in scenarios.iter().enumerate() {
        eprintln!("[{}/{}] {} ({} replicates)", i + 1, scenarios.len(), s.label(), s.replicates);
        reports.push(run_replication_study(s)?);
    }
    write_file(&args.out, "coverage.csv", |w| write_coverage_table(w, &reports))?;
    write_file(&args.out, "coverage.json", |w| write_json(w, &reports))?;
    let mut stdout = std::io::stdout().lock();
    write_coverage_table(&mut stdout, &reports)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FrequentistSummary {
    n: usize,
    events: usize,
    horizon: f64,
    level: f64,
    files: Vec<String>,
    bands: Vec<BandEnvelope>,
}

pub fn frequentist(args: &FrequentistArgs) -> Result<()> {
    check_level(args.level)?;
    let data = load(&args.data)?;
    let horizon = data.horizon();
    let km = kaplan_meier(&data);
    let na = nelson_aalen(&data);
    let grid = evaluation_grid_with(401, &km.jump_times);
    let all = args.method == FreqMethod::All;
    let wants = |m: FreqMethod| all || args.method == m;

    let mut bands: Vec<(&str, hazbands::Result<Band>)> = Vec::new();
    if wants(FreqMethod::NelsonAalen) {
        bands.push(("nelson_aalen.csv", Ok(estimate_band(&na, &grid))));
    }
    if wants(FreqMethod::KaplanMeier) {
        bands.push(("kaplan_meier.csv", Ok(estimate_band(&km, &grid))));
    }
    if wants(FreqMethod::HallWellner) {
        bands.push(("hall_wellner.csv", hall_wellner_band(&data, args.level, &grid)));
    }
    if wants(FreqMethod::LogEp) {
        bands.push(("log_ep.csv", log_ep_band(&data, args.level, &grid)));
    }
    if wants(FreqMethod::Pointwise) {
        bands.push(("pointwise_km.csv", pointwise_intervals(&km, args.level, &grid)));
        bands.push(("pointwise_na.csv", pointwise_intervals(&na, args.level, &grid)));
    }

    prepare_out(&args.out)?;
    let mut summary = FrequentistSummary {
        n: data.len(),
        events: data.n_events(),
        horizon,
        level: args.level,
        files: Vec::new(),
        bands: Vec::new(),
    };
    for (name, band) in bands {
        let band = match band {
            Ok(b) => b,
            Err(hazbands::Error::NoEvents) if all => {
                eprintln!("skipping {name}: the data contain no events");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        write_file(&args.out, name, |w| write_band_csv(w, &band, horizon))?;
        summary.files.push(name.to_string());
        summary.bands.push(BandEnvelope::of(&band, horizon));
    }
    write_file(&args.out, "summary.json", |w| write_json(w, &summary))?;
    println!(
        "n = {}, events = {}; wrote {} band files to {}",
        summary.n,
        summary.events,
        summary.files.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct HaarSummary {
    n: usize,
    horizon: f64,
    requested_k: usize,
    k: usize,
    prior: PriorSpec,
    level: f64,
    /// Multiscale distance within which `level` of the draws lie from the posterior mean.
    ell_infty_radius: f64,
    acceptance_rates: Vec<f64>,
}

pub fn haar(args: &HaarArgs) -> Result<()> {
    check_level(args.level)?;
    let prior = args.prior.spec();
    let data = load(&args.data)?;
    let horizon = data.horizon();
    let requested_k = interval_count(data.len(), args.gamma, args.k)?;
    let k = requested_k.next_power_of_two().max(2);
    let cfg = chain_config(args.draws, args.burnin, args.seed, &args.sampler);
    let chain = fit_chain(&data, &prior, k, &cfg)?;

    let mean = to_wavelet(&chain.mean_heights())?;
    let distances = chain
        .draws
        .iter()
        .map(|d| ell_infty_distance(&to_wavelet(d.heights())?, &mean))
        .collect::<hazbands::Result<Vec<f64>>>()?;
    let radius = radius_from_distances(&distances, args.level);

    prepare_out(&args.out)?;
    write_file(&args.out, "haar_coefficients.csv", |w| {
        writeln!(w, "index,level,position,coefficient")?;
        for (i, c) in mean.iter().enumerate() {
            let (level, position) = match level_of(i) {
                None => (-1, 0),
                Some(l) => (l as i64, i - (1usize << l)),
            };
            writeln!(w, "{i},{level},{position},{}", c / horizon)?;
        }
        Ok(())
    })?;
    let summary = HaarSummary {
        n: data.len(),
        horizon,
        requested_k,
        k,
        prior,
        level: args.level,
        ell_infty_radius: radius / horizon,
        acceptance_rates: chain.acceptance_rates.clone(),
    };
    write_file(&args.out, "summary.json", |w| write_json(w, &summary))?;
    println!("K = {k} (rule gave {requested_k}); wrote results to {}", args.out.display());
    Ok(())
}
