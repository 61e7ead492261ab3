//! On-disk artifacts: the draws file, summary and band tables, and the
//! diagnostics report.
//!
//! Each artifact starts with a block of `# key = value` lines carrying the
//! package version, the seed and the SHA-256 of the run config. Numbers are
//! written in shortest round-trip form, so identical runs give identical
//! bytes. Files are written to a temporary sibling and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use nalgebra::DMatrix;

use crate::data::format_number;
use crate::error::{Error, Result};
use crate::gibbs::{DrawMeta, PosteriorDraws};
use crate::inference::{batch_means_mcse, BandResult, FunctionDraws, ParamSummary};
use crate::model::{IndexMap, LinkFamily, PenalizedBlock, TermLayout};
use crate::splinebasis::KnotGrid;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const DRAWS_MAGIC: &str = "# slicegam draws";

/// Provenance shared by every artifact of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        Self { version: VERSION.to_string(), seed, config_hash: config_hash.into() }
    }

    fn write_header(&self, out: &mut String, kind: &str) {
        let _ = writeln!(out, "# slicegam {kind}");
        let _ = writeln!(out, "# version = {}", self.version);
        let _ = writeln!(out, "# seed = {}", self.seed);
        let _ = writeln!(out, "# config_sha256 = {}", self.config_hash);
    }
}

fn join_numbers(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(format_number).collect::<Vec<_>>().join(" ")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write `contents` to `path` via a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// Write every `(path, contents)` pair or none of them: on failure, files
/// written so far are removed.
pub fn write_all_atomic(files: &[(PathBuf, String)]) -> Result<()> {
    for (k, (path, contents)) in files.iter().enumerate() {
        if let Err(e) = write_atomic(path, contents) {
            for (done, _) in &files[..k] {
                let _ = std::fs::remove_file(done);
            }
            return Err(e);
        }
    }
    Ok(())
}

/// Chains read back from (or about to be written to) a draws file.
#[derive(Debug, Clone)]
pub struct DrawsFile {
    pub provenance: Provenance,
    pub chains: Vec<PosteriorDraws>,
}

impl DrawsFile {
    pub fn pooled(&self) -> Result<PosteriorDraws> {
        PosteriorDraws::pooled(&self.chains)
    }

    pub fn render(&self) -> Result<String> {
        let first = self.chains.first().ok_or(Error::InsufficientDraws { needed: 1, got: 0 })?;
        let meta = &first.meta;
        let mut out = String::new();
        self.provenance.write_header(&mut out, "draws");
        let _ = writeln!(out, "# family = {}", meta.family.name());
        let _ = writeln!(out, "# iterations = {}", meta.iterations);
        let _ = writeln!(out, "# burn_in = {}", meta.burn_in);
        let _ = writeln!(out, "# thin = {}", meta.thin);
        let _ = writeln!(out, "# chains = {}", self.chains.len());
        let _ = writeln!(out, "# tau0 = {}", format_number(first.tau0));
        let _ = writeln!(out, "# n_beta = {}", first.index.beta.len());
        for b in &first.index.blocks {
            let _ = writeln!(out, "# block.{} = {} {}", b.name, b.range.start, b.range.end);
        }
        for t in &first.terms {
            render_term(&mut out, t);
        }
        let mut header = vec!["chain".to_string()];
        header.extend(first.index.names.iter().map(|n| csv_field(n)));
        header.extend(first.index.blocks.iter().map(|b| csv_field(&format!("tau.{}", b.name))));
        let _ = writeln!(out, "{}", header.join(","));
        for c in &self.chains {
            for r in 0..c.n_draws() {
                let mut row = vec![c.meta.chain.to_string()];
                row.extend(c.eta.row(r).iter().map(|v| format_number(*v)));
                row.extend(c.tau.row(r).iter().map(|v| format_number(*v)));
                let _ = writeln!(out, "{}", row.join(","));
            }
        }
        Ok(out)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        if !text.starts_with(DRAWS_MAGIC) {
            return Err(Error::Csv { line: 1, message: "not a draws file".into() });
        }
        let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        let mut body_start = 0;
        let mut body_line = 1;
        for (n, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    let k = k.trim().to_string();
                    order.push(k.clone());
                    header.insert(k, (n + 1, v.trim().to_string()));
                }
                body_start += line.len() + 1;
                body_line = n + 2;
            } else {
                break;
            }
        }
        let h = Header { map: header };
        let provenance =
            Provenance { version: h.get("version")?.1, seed: h.parse("seed")?, config_hash: h.get("config_sha256")?.1 };
        let family = LinkFamily::parse(&h.get("family")?.1)?;
        let iterations: usize = h.parse("iterations")?;
        let burn_in: usize = h.parse("burn_in")?;
        let thin: usize = h.parse("thin")?;
        let n_chains: usize = h.parse("chains")?;
        let tau0: f64 = h.parse("tau0")?;
        let n_beta: usize = h.parse("n_beta")?;

        let mut blocks = Vec::new();
        for key in order.iter().filter(|k| k.starts_with("block.")) {
            let (line, v) = h.get(key)?;
            let r = usize_list(&v).filter(|r| r.len() == 2).ok_or_else(|| bad(line, key))?;
            blocks.push(PenalizedBlock { name: key["block.".len()..].to_string(), range: r[0]..r[1] });
        }
        let mut terms = Vec::new();
        for key in order.iter().filter(|k| k.starts_with("term.") && k.ends_with(".kind")) {
            let name = key.trim_start_matches("term.").trim_end_matches(".kind");
            terms.push(parse_term(&h, name)?);
        }

        let body = &text[body_start.min(text.len())..];
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let csv_err = |e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line() as usize + body_line - 1);
            Error::Csv { line, message: e.to_string() }
        };
        let cols: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let n_tau = blocks.len();
        if cols.len() < 1 + n_tau || cols[0] != "chain" {
            return Err(Error::Csv { line: body_line, message: "unexpected draws header".into() });
        }
        let names: Vec<String> = cols[1..cols.len() - n_tau].to_vec();
        let dim = names.len();
        let mut per_chain: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); n_chains];
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line() as usize + body_line - 1);
            if rec.len() != cols.len() {
                return Err(Error::Csv { line, message: format!("expected {} fields, found {}", cols.len(), rec.len()) });
            }
            let chain: usize = rec[0].parse().map_err(|_| Error::Csv { line, message: "bad chain id".into() })?;
            let slot = per_chain.get_mut(chain).ok_or_else(|| Error::Csv { line, message: "chain id out of range".into() })?;
            for (j, field) in rec.iter().enumerate().skip(1) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Csv { line, message: format!("'{field}' is not a number") })?;
                if j <= dim {
                    slot.0.push(v);
                } else {
                    slot.1.push(v);
                }
            }
        }
        let index = IndexMap { beta: 0..n_beta, blocks, names };
        let chains = per_chain
            .into_iter()
            .enumerate()
            .map(|(c, (eta, tau))| {
                let r = eta.len() / dim.max(1);
                PosteriorDraws {
                    eta: DMatrix::from_row_slice(r, dim, &eta),
                    tau: DMatrix::from_row_slice(r, n_tau, &tau),
                    index: index.clone(),
                    terms: terms.clone(),
                    tau0,
                    meta: DrawMeta {
                        family,
                        iterations,
                        burn_in,
                        thin,
                        seed: provenance.seed,
                        chain: c as u64,
                        wall_time: Duration::ZERO,
                    },
                }
            })
            .collect();
        Ok(Self { provenance, chains })
    }
}

fn bad(line: usize, key: &str) -> Error {
    Error::Csv { line, message: format!("malformed header entry '{key}'") }
}

struct Header {
    map: BTreeMap<String, (usize, String)>,
}

impl Header {
    fn get(&self, key: &str) -> Result<(usize, String)> {
        self.map.get(key).cloned().ok_or_else(|| Error::Csv { line: 1, message: format!("missing header entry '{key}'") })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.get(key)?;
        v.parse().map_err(|_| bad(line, key))
    }

    fn numbers(&self, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self.get(key)?;
        v.split_whitespace().map(|s| s.parse::<f64>().map_err(|_| bad(line, key))).collect()
    }
}

fn usize_list(v: &str) -> Option<Vec<usize>> {
    v.split_whitespace().map(|s| s.parse().ok()).collect()
}

fn render_term(out: &mut String, t: &TermLayout) {
    match t {
        TermLayout::Monotone { name, variable, grid, column_means, sign, coefs, intercept } => {
            let _ = writeln!(out, "# term.{name}.kind = monotone");
            let _ = writeln!(out, "# term.{name}.variable = {variable}");
            let _ = writeln!(out, "# term.{name}.knots = {}", render_grid(grid));
            let _ = writeln!(out, "# term.{name}.column_means = {}", join_numbers(column_means.iter().copied()));
            let _ = writeln!(out, "# term.{name}.sign = {}", format_number(*sign));
            let _ = writeln!(out, "# term.{name}.coefs = {} {}", coefs.start, coefs.end);
            let _ = writeln!(out, "# term.{name}.intercept = {intercept}");
        }
        TermLayout::Smooth { name, variable, grid, transform, center, linear, coefs, intercept } => {
            let _ = writeln!(out, "# term.{name}.kind = smooth");
            let _ = writeln!(out, "# term.{name}.variable = {variable}");
            let _ = writeln!(out, "# term.{name}.knots = {}", render_grid(grid));
            let _ = writeln!(out, "# term.{name}.center = {}", format_number(*center));
            let _ = writeln!(out, "# term.{name}.linear = {linear}");
            let _ = writeln!(out, "# term.{name}.coefs = {} {}", coefs.start, coefs.end);
            let icpt = intercept.map_or_else(|| "none".to_string(), |i| i.to_string());
            let _ = writeln!(out, "# term.{name}.intercept = {icpt}");
            let rows: Vec<f64> = (0..transform.nrows()).flat_map(|r| transform.row(r).iter().copied().collect::<Vec<_>>()).collect();
            let _ = writeln!(
                out,
                "# term.{name}.transform = {} {} {}",
                transform.nrows(),
                transform.ncols(),
                join_numbers(rows)
            );
        }
    }
}

fn render_grid(g: &KnotGrid) -> String {
    join_numbers([g.lower(), g.upper()].into_iter().chain(g.interior().iter().copied()))
}

fn parse_term(h: &Header, name: &str) -> Result<TermLayout> {
    let key = |f: &str| format!("term.{name}.{f}");
    let (kline, kind) = h.get(&key("kind"))?;
    let variable = h.get(&key("variable"))?.1;
    let knots = h.numbers(&key("knots"))?;
    if knots.len() < 3 {
        return Err(bad(kline, &key("knots")));
    }
    let grid = KnotGrid::new(knots[0], knots[1], knots[2..].to_vec())?;
    let (cline, coefs) = h.get(&key("coefs"))?;
    let coefs = usize_list(&coefs).filter(|c| c.len() == 2).ok_or_else(|| bad(cline, &key("coefs")))?;
    let coefs = coefs[0]..coefs[1];
    match kind.as_str() {
        "monotone" => Ok(TermLayout::Monotone {
            name: name.to_string(),
            variable,
            grid,
            column_means: h.numbers(&key("column_means"))?,
            sign: h.parse(&key("sign"))?,
            coefs,
            intercept: h.parse(&key("intercept"))?,
        }),
        "smooth" => {
            let (iline, icpt) = h.get(&key("intercept"))?;
            let intercept =
                if icpt == "none" { None } else { Some(icpt.parse().map_err(|_| bad(iline, &key("intercept")))?) };
            let (tline, _) = h.get(&key("transform"))?;
            let t = h.numbers(&key("transform"))?;
            if t.len() < 2 {
                return Err(bad(tline, &key("transform")));
            }
            let (r, c) = (t[0] as usize, t[1] as usize);
            if t.len() != 2 + r * c {
                return Err(bad(tline, &key("transform")));
            }
            Ok(TermLayout::Smooth {
                name: name.to_string(),
                variable,
                grid,
                transform: DMatrix::from_row_slice(r, c, &t[2..]),
                center: h.parse(&key("center"))?,
                linear: h.parse(&key("linear"))?,
                coefs,
                intercept,
            })
        }
        _ => Err(bad(kline, &key("kind"))),
    }
}

/// Long-format band table: `term,t,mean,lo,hi,simbas`.
pub fn render_band_table(prov: &Provenance, fd: &FunctionDraws, band: &BandResult) -> String {
    let mut out = String::new();
    prov.write_header(&mut out, "bands");
    let _ = writeln!(out, "# term = {}", fd.term);
    let _ = writeln!(out, "# level = {}", format_number(band.level));
    let _ = writeln!(out, "# grid = {}", fd.grid.len());
    let _ = writeln!(out, "# draws = {}", fd.n_draws());
    let _ = writeln!(out, "# critical = {}", format_number(band.critical));
    let _ = writeln!(out, "# gbpv = {}", format_number(band.gbpv));
    let _ = writeln!(out, "term,t,mean,lo,hi,simbas");
    for g in 0..fd.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&fd.term),
            format_number(fd.grid[g]),
            format_number(fd.mean[g]),
            format_number(band.lower[g]),
            format_number(band.upper[g]),
            format_number(band.simbas[g])
        );
    }
    out
}

pub fn render_summary(prov: &Provenance, level: f64, rows: &[ParamSummary]) -> String {
    let mut out = String::new();
    prov.write_header(&mut out, "summary");
    let _ = writeln!(out, "# credible = {}", format_number(level));
    let _ = writeln!(out, "name,mean,sd,median,lower,upper,mcse,ess");
    for s in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&s.name),
            format_number(s.mean),
            format_number(s.sd),
            format_number(s.median),
            format_number(s.lower),
            format_number(s.upper),
            format_number(s.mcse),
            format_number(s.ess)
        );
    }
    out
}

/// Plain-text report: settings, GBPV per term, and MCSE/ESS per parameter.
pub fn render_diagnostics(file: &DrawsFile, level: f64, bands: &[(String, BandResult)]) -> Result<String> {
    let pooled = file.pooled()?;
    let meta = &pooled.meta;
    let mut out = String::new();
    file.provenance.write_header(&mut out, "diagnostics");
    let _ = writeln!(out, "family = {}", meta.family.name());
    let _ = writeln!(out, "iterations = {}", meta.iterations);
    let _ = writeln!(out, "burn_in = {}", meta.burn_in);
    let _ = writeln!(out, "thin = {}", meta.thin);
    let _ = writeln!(out, "chains = {}", file.chains.len());
    let _ = writeln!(out, "kept_draws = {}", pooled.n_draws());
    let _ = writeln!(out, "band_level = {}", format_number(level));
    for (term, b) in bands {
        let flagged = b.simbas.iter().filter(|p| **p < level).count();
        let _ = writeln!(out, "gbpv.{term} = {}", format_number(b.gbpv));
        let _ = writeln!(out, "flagged.{term} = {flagged} of {}", b.simbas.len());
    }
    let _ = writeln!(out, "parameter,mcse,ess");
    let columns = pooled
        .index
        .names
        .iter()
        .enumerate()
        .map(|(j, n)| (n.clone(), pooled.eta.column(j).iter().copied().collect::<Vec<_>>()))
        .chain(
            pooled
                .index
                .blocks
                .iter()
                .enumerate()
                .map(|(j, b)| (format!("tau.{}", b.name), pooled.tau.column(j).iter().copied().collect())),
        );
    for (name, x) in columns {
        match batch_means_mcse(&x) {
            Ok(m) => {
                let _ = writeln!(out, "{},{},{}", csv_field(&name), format_number(m.mcse), format_number(m.ess));
            }
            Err(_) => {
                let _ = writeln!(out, "{},NaN,NaN", csv_field(&name));
            }
        }
    }
    Ok(out)
}
