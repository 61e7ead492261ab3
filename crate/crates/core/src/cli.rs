//! Command implementations behind the `slicegam` binary.

use std::path::{Path, PathBuf};

use crate::artifacts::{
    render_band_table, render_diagnostics, render_summary, write_all_atomic, write_atomic, DrawsFile, Provenance,
};
use crate::config::RunConfig;
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::gibbs::run_parallel_chains;
use crate::inference::{default_grid, function_draws, joint_band, summarize, BandResult, FunctionDraws};
use crate::model::build_design;
use crate::simulate::{simulate, Scenario};

/// Paths written by a successful `fit`.
#[derive(Debug, Clone)]
pub struct FitOutputs {
    pub draws: PathBuf,
    pub summary: PathBuf,
    pub bands: Vec<PathBuf>,
    pub diagnostics: PathBuf,
    pub warnings: Vec<String>,
}

pub fn bands_file_name(term: &str) -> String {
    format!("bands_{term}.csv")
}

fn term_bands(file: &DrawsFile, u: f64, points: usize) -> Result<Vec<(FunctionDraws, BandResult)>> {
    let pooled = file.pooled()?;
    pooled
        .terms
        .iter()
        .map(|t| {
            let grid = default_grid(&pooled, t.name(), points)?;
            let fd = function_draws(&pooled, t.name(), &grid)?;
            let band = joint_band(&fd, u)?;
            Ok((fd, band))
        })
        .collect()
}

/// Fit the model in `config`, then write draws, summary, one band table per
/// term and a diagnostics report into the configured output directory.
/// Nothing is written unless every artifact could be produced.
pub fn cmd_fit(config: impl AsRef<Path>) -> Result<FitOutputs> {
    let cfg = RunConfig::load(config)?;
    let warnings = cfg.spec.validate()?;
    let data = DataTable::read_csv(&cfg.data)?;
    let bundle = build_design(&cfg.spec, &data)?;
    let seed = cfg.spec.sampler.seed;
    let chains = run_parallel_chains(&cfg.spec, &bundle, cfg.chains, seed)?;
    let file = DrawsFile { provenance: Provenance::new(seed, cfg.hash.clone()), chains };

    let pooled = file.pooled()?;
    let summary = summarize(&pooled, cfg.credible)?;
    let bands = term_bands(&file, cfg.band_level, cfg.grid_points)?;
    let named: Vec<(String, BandResult)> = bands.iter().map(|(fd, b)| (fd.term.clone(), b.clone())).collect();

    let out = &cfg.out;
    let mut files = vec![
        (out.join("draws.csv"), file.render()?),
        (out.join("summary.csv"), render_summary(&file.provenance, cfg.credible, &summary)),
    ];
    let mut band_paths = Vec::new();
    for (fd, band) in &bands {
        let p = out.join(bands_file_name(&fd.term));
        band_paths.push(p.clone());
        files.push((p, render_band_table(&file.provenance, fd, band)));
    }
    files.push((out.join("diagnostics.txt"), render_diagnostics(&file, cfg.band_level, &named)?));
    std::fs::create_dir_all(out)?;
    write_all_atomic(&files)?;
    Ok(FitOutputs {
        draws: out.join("draws.csv"),
        summary: out.join("summary.csv"),
        bands: band_paths,
        diagnostics: out.join("diagnostics.txt"),
        warnings,
    })
}

/// Band table for `term` recomputed from a draws file.
pub fn cmd_bands(draws: impl AsRef<Path>, term: &str, u: f64, grid_points: usize) -> Result<String> {
    let file = DrawsFile::read(draws)?;
    let pooled = file.pooled()?;
    if pooled.term(term).is_none() {
        let known: Vec<&str> = pooled.terms.iter().map(|t| t.name()).collect();
        return Err(Error::Usage(format!("term '{term}' not in draws file (terms: {})", known.join(", "))));
    }
    let grid = default_grid(&pooled, term, grid_points)?;
    let fd = function_draws(&pooled, term, &grid)?;
    let band = joint_band(&fd, u)?;
    Ok(render_band_table(&file.provenance, &fd, &band))
}

/// Diagnostics report recomputed from a draws file.
pub fn cmd_diagnostics(draws: impl AsRef<Path>, u: f64, grid_points: usize) -> Result<String> {
    let file = DrawsFile::read(draws)?;
    let named = term_bands(&file, u, grid_points)?.into_iter().map(|(fd, b)| (fd.term, b)).collect::<Vec<_>>();
    render_diagnostics(&file, u, &named)
}

/// Simulate `scenario` and write it as CSV.
pub fn cmd_simulate(scenario: &str, n: usize, seed: u64, periods: u32, out: impl AsRef<Path>) -> Result<DataTable> {
    let table = simulate(Scenario::parse(scenario, periods)?, n, seed)?;
    write_atomic(out.as_ref(), &table.to_csv_string())?;
    Ok(table)
}

/// One-line machine-readable error report.
pub fn error_report(e: &Error) -> String {
    let message = e.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
    format!("error kind={} exit={} message=\"{}\"", e.kind(), e.exit_code(), message)
}
