//! Flat `key = value` run configuration with dotted section keys.
//!
//! ```text
//! # comments start with '#'
//! data = sim_a.csv
//! out = fit_a
//! family = poisson
//! response = y
//! term.alpha.type = monotone
//! term.alpha.variable = t
//! term.alpha.knots = 5
//! sampler.iterations = 20000
//! sampler.seed = 42
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inference::DEFAULT_GRID_POINTS;
use crate::model::{
    BetaConstraint, Direction, DirectionMetric, LinkFamily, ModelSpec, MonotoneTerm, SamplerSettings, SmoothTerm,
};
use crate::splinebasis::KnotPlacement;

/// Everything a `fit` run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: PathBuf,
    pub out: PathBuf,
    pub spec: ModelSpec,
    pub chains: usize,
    /// Joint band level `u`.
    pub band_level: f64,
    pub grid_points: usize,
    /// Coverage of the equal-tailed intervals in the summary table.
    pub credible: f64,
    /// Hex SHA-256 of the config text.
    pub hash: String,
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Entries {
    map: BTreeMap<String, Entry>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| err(line, "expected 'key = value'"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(err(line, "empty key"));
            }
            let entry = Entry { line, value: value.trim().to_string(), used: false };
            if map.insert(key.to_string(), entry).is_some() {
                return Err(err(line, format!("duplicate key '{key}'")));
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn required(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| err(0, format!("missing required key '{key}'")))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| err(line, format!("invalid value for '{key}': '{v}'"))),
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => parse_number(&v).map(Some).ok_or_else(|| err(line, format!("'{key}' is not a number"))),
        }
    }

    fn numbers(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| parse_number(s.trim()))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| err(line, format!("'{key}' must be a comma-separated list of numbers"))),
        }
    }

    /// Distinct `<name>` values among keys `prefix.<name>.*`, in order of
    /// first appearance.
    fn sections(&self, prefix: &str) -> Vec<String> {
        let mut found: Vec<(usize, String)> = self
            .map
            .iter()
            .filter_map(|(k, e)| {
                let name = k.strip_prefix(prefix)?.strip_prefix('.')?.split_once('.')?.0;
                Some((e.line, name.to_string()))
            })
            .collect();
        found.sort();
        let mut names: Vec<String> = Vec::new();
        for (_, n) in found {
            if !names.contains(&n) {
                names.push(n);
            }
        }
        names
    }

    fn unused(&self) -> Option<(&String, usize)> {
        self.map.iter().find(|(_, e)| !e.used).map(|(k, e)| (k, e.line))
    }
}

fn parse_number(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        other => other.parse().ok().filter(|v: &f64| !v.is_nan()),
    }
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(err(line, format!("'{key}' must be true or false"))),
    }
}

fn parse_placement(line: usize, v: &str) -> Result<KnotPlacement> {
    match v.to_ascii_lowercase().as_str() {
        "quantile" => Ok(KnotPlacement::Quantile),
        "equispaced" => Ok(KnotPlacement::Equispaced),
        _ => Err(err(line, format!("unknown knot placement '{v}'"))),
    }
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut e = Entries::parse(text)?;
        let resolve = |p: String| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let data = resolve(e.required("data")?.1);
        let out = resolve(e.take("out").map_or_else(|| "fit_output".to_string(), |(_, v)| v));
        let (fline, family) = e.required("family")?;
        let family = LinkFamily::parse(&family).map_err(|x| err(fline, x.to_string()))?;
        let response = e.required("response")?.1;
        let mut spec = ModelSpec::new(family, response);
        spec.time = e.take("time").map(|(_, v)| v);
        if let Some((_, v)) = e.take("fixed") {
            spec.fixed = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }

        for name in e.sections("term") {
            let key = |f: &str| format!("term.{name}.{f}");
            let (tline, kind) = e.required(&key("type"))?;
            let variable = e.required(&key("variable"))?.1;
            let knots: usize = e.parsed(&key("knots"))?.ok_or_else(|| err(tline, format!("missing '{}'", key("knots"))))?;
            let placement = match e.take(&key("placement")) {
                Some((l, v)) => parse_placement(l, &v)?,
                None => KnotPlacement::Quantile,
            };
            match kind.as_str() {
                "monotone" => {
                    if spec.monotone.is_some() {
                        return Err(err(tline, "at most one monotone term is supported"));
                    }
                    let mut term = MonotoneTerm::new(name.clone(), variable, knots);
                    term.placement = placement;
                    if let Some((l, v)) = e.take(&key("direction")) {
                        term.direction = match v.as_str() {
                            "increasing" => Direction::Increasing,
                            "decreasing" => Direction::Decreasing,
                            _ => return Err(err(l, format!("unknown direction '{v}'"))),
                        };
                    }
                    spec.monotone = Some(term);
                }
                "smooth" => {
                    let mut term = SmoothTerm::new(name.clone(), variable, knots);
                    term.placement = placement;
                    spec.smooths.push(term);
                }
                other => return Err(err(tline, format!("unknown term type '{other}'"))),
            }
        }

        let p = spec.n_beta();
        spec.priors.beta_mean = e.numbers("prior.mean")?;
        if let Some(diag) = e.numbers("prior.cov_diag")? {
            if diag.len() != p {
                return Err(err(0, format!("prior.cov_diag needs {p} entries")));
            }
            spec.priors.beta_cov = Some(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)));
        }
        if let Some(full) = e.numbers("prior.cov")? {
            if full.len() != p * p {
                return Err(err(0, format!("prior.cov needs {} entries", p * p)));
            }
            spec.priors.beta_cov = Some(DMatrix::from_row_slice(p, p, &full));
        }
        if let Some(v) = e.number("prior.a0")? {
            spec.priors.a0 = v;
        }
        if let Some(v) = e.number("prior.b0")? {
            spec.priors.b0 = v;
        }
        if let Some(v) = e.number("prior.tau0")? {
            spec.priors.tau0 = v;
        }

        for name in e.sections("constraint") {
            let key = |f: &str| format!("constraint.{name}.{f}");
            let (cline, coefs) = e.required(&key("coefs"))?;
            let coefficients = coefs
                .split(',')
                .map(|pair| {
                    let (n, c) = pair.split_once(':')?;
                    Some((n.trim().to_string(), parse_number(c.trim())?))
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err(cline, "constraint coefficients must look like 'name:value, ...'"))?;
            let lower = e.number(&key("lower"))?.unwrap_or(f64::NEG_INFINITY);
            let upper = e.number(&key("upper"))?.unwrap_or(f64::INFINITY);
            spec.constraints.push(BetaConstraint { coefficients, lower, upper });
        }

        let iterations: usize = e.parsed("sampler.iterations")?.unwrap_or(SamplerSettings::default().iterations);
        let mut s = SamplerSettings::with_iterations(iterations);
        if let Some(v) = e.parsed("sampler.burn_in")? {
            s.burn_in = v;
        }
        if let Some(v) = e.parsed("sampler.thin")? {
            s.thin = v;
        }
        if let Some(v) = e.parsed("sampler.seed")? {
            s.seed = v;
        }
        if let Some(v) = e.parsed("sampler.tn_sweeps")? {
            s.tn_sweeps = v;
        }
        if let Some((l, v)) = e.take("sampler.update_tau") {
            s.update_tau = parse_bool(l, "sampler.update_tau", &v)?;
        }
        if let Some((l, v)) = e.take("sampler.repair_init") {
            s.repair_init = parse_bool(l, "sampler.repair_init", &v)?;
        }
        s.init_tau = e.number("sampler.init_tau")?;
        s.init_beta = e.numbers("sampler.init_beta")?;
        if let Some((l, v)) = e.take("sampler.metric") {
            s.metric = match v.as_str() {
                "prior" => DirectionMetric::Prior,
                "data" => DirectionMetric::DataInformed,
                _ => return Err(err(l, format!("unknown metric '{v}'"))),
            };
        }
        spec.sampler = s;
        let chains: usize = e.parsed("sampler.chains")?.unwrap_or(1);

        let band_level = e.number("output.level")?.unwrap_or(0.05);
        let grid_points: usize = e.parsed("output.grid")?.unwrap_or(DEFAULT_GRID_POINTS);
        let credible = e.number("output.credible")?.unwrap_or(0.95);

        if let Some((key, line)) = e.unused() {
            return Err(err(line, format!("unknown key '{key}'")));
        }
        if chains == 0 {
            return Err(err(0, "sampler.chains must be positive"));
        }
        if !(band_level > 0.0 && band_level < 1.0) || !(credible > 0.0 && credible < 1.0) {
            return Err(err(0, "output.level and output.credible must lie in (0, 1)"));
        }
        if grid_points < 2 {
            return Err(err(0, "output.grid must be at least 2"));
        }
        spec.validate()?;
        Ok(Self { data, out, spec, chains, band_level, grid_points, credible, hash: config_hash(text) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "data = d.csv\nfamily = poisson\nresponse = y\n\
        term.alpha.type = monotone\nterm.alpha.variable = t\nterm.alpha.knots = 5\n\
        sampler.iterations = 200 # short\nsampler.seed = 9\n";

    #[test]
    fn parses_a_monotone_fit() {
        let c = RunConfig::parse(BASIC, Path::new("/tmp")).unwrap();
        assert_eq!(c.data, PathBuf::from("/tmp/d.csv"));
        assert_eq!(c.spec.monotone.as_ref().unwrap().knots, 5);
        assert_eq!(c.spec.sampler.burn_in, 100);
        assert_eq!(c.spec.sampler.seed, 9);
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn unknown_key_names_its_line() {
        let text = format!("{BASIC}sampler.itertions = 5\n");
        match RunConfig::parse(&text, Path::new(".")) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constraint_rows() {
        let text = "data = d.csv\nfamily = gaussian\nresponse = y\nfixed = a, b\n\
            constraint.simplex.coefs = intercept:1, a:1, b:1\nconstraint.simplex.lower = 1\nconstraint.simplex.upper = 1\n";
        let c = RunConfig::parse(text, Path::new(".")).unwrap();
        assert_eq!(c.spec.constraints[0].coefficients.len(), 3);
        assert_eq!((c.spec.constraints[0].lower, c.spec.constraints[0].upper), (1.0, 1.0));
    }

    #[test]
    fn invalid_prior_is_rejected() {
        let text = format!("{BASIC}prior.tau0 = 0\n");
        assert!(matches!(RunConfig::parse(&text, Path::new(".")), Err(Error::ContractViolation(_))));
    }
}
