//! TOML run configuration.
//!
//! One file may carry every section; each subcommand reads the sections it
//! needs and rejects unknown sections and keys.

use std::path::{Path, PathBuf};

use roelab::dirac::{ExperimentOptions, PairingOptions};
use roelab::models::{check_keys, DisorderSpec, ModelSpec};
use roelab::roe_ops::DecayOptions;
use roelab::spectral::{BulkGapOptions, EdgeOptions};
use roelab::{Error, Result};
use serde::Serialize;

const SECTIONS: [&str; 8] = ["model", "disorder", "pairing", "decay", "edge", "sweep", "untwist", "output"];

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Typed accessors over one `[section]`.
struct Section<'a> {
    name: &'a str,
    table: &'a toml::Table,
}

impl<'a> Section<'a> {
    fn new(name: &'a str, table: &'a toml::Table, allowed: &[&str]) -> Result<Self> {
        check_keys(table, name, allowed)?;
        Ok(Section { name, table })
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(cfg(format!("[{}] `{key}` must be a number, got {v}", self.name))),
        }
    }

    fn i64(&self, key: &str) -> Result<Option<i64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(v) => Err(cfg(format!("[{}] `{key}` must be an integer, got {v}", self.name))),
        }
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.i64(key)?
            .map(|i| u64::try_from(i).map_err(|_| cfg(format!("[{}] `{key}` must be nonnegative", self.name))))
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|u| u as usize))
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(cfg(format!("[{}] `{key}` must be a boolean, got {v}", self.name))),
        }
    }

    fn str(&self, key: &str) -> Result<Option<&'a str>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(cfg(format!("[{}] `{key}` must be a string, got {v}", self.name))),
        }
    }

    fn list<T>(&self, key: &str, item: impl Fn(&toml::Value) -> Option<T>) -> Result<Option<Vec<T>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| item(v).ok_or_else(|| cfg(format!("[{}] `{key}` has a bad entry {v}", self.name))))
                .collect::<Result<Vec<T>>>()
                .map(Some),
            Some(v) => Err(cfg(format!("[{}] `{key}` must be an array, got {v}", self.name))),
        }
    }

    fn required<T>(&self, v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| cfg(format!("[{}] is missing `{key}`", self.name)))
    }
}

fn as_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_i64(v: &toml::Value) -> Option<i64> {
    v.as_integer()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingConfig {
    pub fermi_energy: f64,
    pub ladder: Vec<i64>,
    pub options: PairingOptions,
    pub gap: BulkGapOptions,
    pub oracle: bool,
}

impl PairingConfig {
    fn parse(t: &toml::Table) -> Result<Self> {
        let s = Section::new(
            "pairing",
            t,
            &[
                "fermi_energy",
                "ladder",
                "tau",
                "auto_threshold",
                "center_offset",
                "bulk_fraction",
                "min_gap",
                "bulk_ratio",
                "oracle",
            ],
        )?;
        let d = PairingOptions::default();
        let g = BulkGapOptions::default();
        let ladder = s.required(s.list("ladder", as_i64)?, "ladder")?;
        if ladder.is_empty() || ladder.iter().any(|&l| l < 1) || ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg("[pairing] `ladder` must be a nonempty, strictly increasing list of positive half-widths"));
        }
        let options = PairingOptions {
            tau: s.f64("tau")?.unwrap_or(d.tau),
            auto_threshold: s.bool("auto_threshold")?.unwrap_or(d.auto_threshold),
            center_offset: s.f64("center_offset")?.unwrap_or(d.center_offset),
            bulk_fraction: s.f64("bulk_fraction")?.unwrap_or(d.bulk_fraction),
        };
        if !(options.tau > 0.0) {
            return Err(cfg("[pairing] `tau` must be positive"));
        }
        let gap = BulkGapOptions {
            min_gap: s.f64("min_gap")?.unwrap_or(g.min_gap),
            bulk_ratio: s.f64("bulk_ratio")?.unwrap_or(g.bulk_ratio),
        };
        Ok(PairingConfig {
            fermi_energy: s.required(s.f64("fermi_energy")?, "fermi_energy")?,
            ladder,
            options,
            gap,
            oracle: s.bool("oracle")?.unwrap_or(true),
        })
    }

    pub fn experiment(&self) -> ExperimentOptions {
        let mut o = ExperimentOptions::new(self.fermi_energy, self.ladder.clone());
        o.pairing = self.options.clone();
        o.gap = self.gap;
        o.oracle = self.oracle;
        o
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayConfig {
    pub fermi_energy: f64,
    pub options: DecayOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Sorted, deduplicated potential strengths.
    pub strengths: Vec<f64>,
    /// Sorted, deduplicated seeds.
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "cocycle")]
pub enum CocycleConfig {
    Magnetic { flux: f64 },
    Coboundary { gauge_seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UntwistConfig {
    pub cocycle: CocycleConfig,
    pub half_width: i64,
    pub base: Vec<i64>,
    pub samples: usize,
    pub seed: u64,
}

/// A parsed configuration file.
#[derive(Clone, Debug)]
pub struct Config {
    pub path: PathBuf,
    table: toml::Table,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        for (k, v) in &table {
            if !SECTIONS.contains(&k.as_str()) {
                return Err(cfg(format!("unknown section [{k}]")));
            }
            if !v.is_table() {
                return Err(cfg(format!("`{k}` must be a [section]")));
            }
        }
        Ok(Config { path: path.to_path_buf(), table })
    }

    fn section(&self, name: &str) -> Option<&toml::Table> {
        self.table.get(name).and_then(|v| v.as_table())
    }

    fn require(&self, name: &str) -> Result<&toml::Table> {
        self.section(name).ok_or_else(|| cfg(format!("missing [{name}] section")))
    }

    pub fn model(&self) -> Result<ModelSpec> {
        ModelSpec::from_toml(self.require("model")?)
    }

    pub fn disorder(&self) -> Result<DisorderSpec> {
        DisorderSpec::from_toml(self.section("disorder"))
    }

    pub fn pairing(&self) -> Result<PairingConfig> {
        PairingConfig::parse(self.require("pairing")?)
    }

    /// `fermi_energy` from `section`, falling back to `[pairing]`.
    fn fermi_energy(&self, s: &Section) -> Result<f64> {
        if let Some(e) = s.f64("fermi_energy")? {
            return Ok(e);
        }
        let from_pairing = self.section("pairing").and_then(|p| p.get("fermi_energy")).and_then(as_f64);
        from_pairing.ok_or_else(|| cfg(format!("[{}] needs `fermi_energy` (or set it in [pairing])", s.name)))
    }

    pub fn decay(&self) -> Result<DecayConfig> {
        let empty = toml::Table::new();
        let t = self.section("decay").unwrap_or(&empty);
        let s = Section::new("decay", t, &["fermi_energy", "window_margin", "rapid_order", "noise_floor"])?;
        let d = DecayOptions::default();
        Ok(DecayConfig {
            fermi_energy: self.fermi_energy(&s)?,
            options: DecayOptions {
                window_margin: s.f64("window_margin")?.unwrap_or(2.0),
                rapid_order: s.f64("rapid_order")?.unwrap_or(d.rapid_order),
                noise_floor: s.f64("noise_floor")?.unwrap_or(d.noise_floor),
            },
        })
    }

    pub fn edge(&self) -> Result<EdgeOptions> {
        let s = Section::new(
            "edge",
            self.require("edge")?,
            &["fermi_energy", "perp_half_width", "momenta", "parallel_axis", "edge_threshold"],
        )?;
        let mut o = EdgeOptions::new(s.required(s.i64("perp_half_width")?, "perp_half_width")?, self.fermi_energy(&s)?);
        o.momenta = s.usize("momenta")?.unwrap_or(o.momenta);
        o.parallel_axis = s.usize("parallel_axis")?.unwrap_or(o.parallel_axis);
        o.edge_threshold = s.f64("edge_threshold")?.unwrap_or(o.edge_threshold);
        Ok(o)
    }

    pub fn sweep(&self) -> Result<SweepConfig> {
        let s = Section::new("sweep", self.require("sweep")?, &["strengths", "seeds"])?;
        let mut strengths = s.required(s.list("strengths", as_f64)?, "strengths")?;
        if strengths.is_empty() || strengths.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(cfg("[sweep] `strengths` must be a nonempty list of finite nonnegative numbers"));
        }
        strengths.sort_by(f64::total_cmp);
        strengths.dedup();
        let mut seeds = s.required(s.list("seeds", |v| v.as_integer().and_then(|i| u64::try_from(i).ok()))?, "seeds")?;
        if seeds.is_empty() {
            return Err(cfg("[sweep] `seeds` must be nonempty"));
        }
        seeds.sort_unstable();
        seeds.dedup();
        Ok(SweepConfig { strengths, seeds })
    }

    pub fn untwist(&self) -> Result<UntwistConfig> {
        let s = Section::new(
            "untwist",
            self.require("untwist")?,
            &["cocycle", "flux", "gauge_seed", "half_width", "base", "samples", "seed"],
        )?;
        let cocycle = match s.str("cocycle")?.unwrap_or("magnetic") {
            "magnetic" => {
                if s.table.contains_key("gauge_seed") {
                    return Err(cfg("[untwist] `gauge_seed` applies to cocycle = \"coboundary\""));
                }
                CocycleConfig::Magnetic { flux: s.required(s.f64("flux")?, "flux")? }
            }
            "coboundary" => {
                if s.table.contains_key("flux") {
                    return Err(cfg("[untwist] `flux` applies to cocycle = \"magnetic\""));
                }
                CocycleConfig::Coboundary { gauge_seed: s.u64("gauge_seed")?.unwrap_or(0) }
            }
            other => return Err(cfg(format!("[untwist] unknown cocycle `{other}`"))),
        };
        let base = s.list("base", as_i64)?.unwrap_or_else(|| vec![0, 0]);
        if base.len() != 2 {
            return Err(cfg("[untwist] `base` must have two coordinates"));
        }
        let half_width = s.i64("half_width")?.unwrap_or(3);
        if half_width < 0 {
            return Err(cfg("[untwist] `half_width` must be nonnegative"));
        }
        Ok(UntwistConfig {
            cocycle,
            half_width,
            base,
            samples: s.usize("samples")?.unwrap_or(1000),
            seed: s.u64("seed")?.unwrap_or(0),
        })
    }

    /// Output directory; relative paths are taken from the config's folder.
    pub fn output_dir(&self) -> Result<PathBuf> {
        let empty = toml::Table::new();
        let s = Section::new("output", self.section("output").unwrap_or(&empty), &["dir"])?;
        let dir = PathBuf::from(s.str("dir")?.unwrap_or("roelab-out"));
        if dir.is_absolute() {
            return Ok(dir);
        }
        Ok(self.path.parent().unwrap_or(Path::new(".")).join(dir))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config> {
        Config::parse(Path::new("/tmp/run.toml"), text)
    }

    const BASE: &str = r#"
[model]
kind = "hofstadter"
half_width = 8
flux_p = 1
flux_q = 3

[pairing]
fermi_energy = 2.634
ladder = [8, 12]
"#;

    #[test]
    fn full_config_resolves() {
        let c = parse(BASE).unwrap();
        let p = c.pairing().unwrap();
        assert_eq!(p.ladder, vec![8, 12]);
        assert_eq!(p.options, PairingOptions::default());
        assert!(p.oracle);
        assert_eq!(c.disorder().unwrap(), DisorderSpec::clean());
        assert_eq!(c.decay().unwrap().fermi_energy, 2.634);
        assert_eq!(c.output_dir().unwrap(), PathBuf::from("/tmp/roelab-out"));
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(parse("[modle]\nkind = \"x\""), Err(Error::Config(_))));
        let c = parse(&format!("{BASE}tua = 0.1\n")).unwrap();
        assert!(matches!(c.pairing(), Err(Error::Config(m)) if m.contains("tua")));
        let c = parse(&format!("{BASE}[output]\ndirectory = \"x\"\n")).unwrap();
        assert!(c.output_dir().is_err());
    }

    #[test]
    fn ladder_must_increase() {
        let c = parse(&BASE.replace("[8, 12]", "[12, 8]")).unwrap();
        assert!(c.pairing().is_err());
    }

    #[test]
    fn sweep_lists_are_canonical() {
        let c = parse(&format!("{BASE}[sweep]\nstrengths = [0.4, 0, 0.4]\nseeds = [5, 1, 3, 1]\n")).unwrap();
        let s = c.sweep().unwrap();
        assert_eq!(s.strengths, vec![0.0, 0.4]);
        assert_eq!(s.seeds, vec![1, 3, 5]);
    }

    #[test]
    fn untwist_variants() {
        let c = parse("[untwist]\nflux = 2.0\n").unwrap();
        assert_eq!(c.untwist().unwrap().cocycle, CocycleConfig::Magnetic { flux: 2.0 });
        let c = parse("[untwist]\ncocycle = \"coboundary\"\nflux = 2.0\n").unwrap();
        assert!(c.untwist().is_err());
        let c = parse("[untwist]\ncocycle = \"coboundary\"\ngauge_seed = 4\n").unwrap();
        assert_eq!(c.untwist().unwrap().cocycle, CocycleConfig::Coboundary { gauge_seed: 4 });
    }
}
