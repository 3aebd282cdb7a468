//! On-disk formats: scenario configs, channel dumps, and result tables.
//!
//! Scenario configs are strict JSON — every field required, unknown fields
//! rejected.  Channel dumps carry one group's four channel vectors with
//! complex entries as `[re, im]` pairs plus everything needed to solve the
//! instance, and are the interchange format between `solve` and `oracle`.

use anyhow::{Context, Result};
use comp_noma::cvec::Cx;
use comp_noma::channel::ScenarioConfig;
use comp_noma::rate::SinrTargets;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// JSON mirror of [`ScenarioConfig`]; field names are the wire contract.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfigFile {
    pub bs_separation_half: f64,
    pub coverage_radius: f64,
    pub noma_radius_1: f64,
    pub noma_radius_2: f64,
    pub path_loss_exp: f64,
    pub antennas: usize,
    pub noise_power: f64,
    pub p_max: f64,
    pub target_rates: [f64; 3],
    pub group_count: usize,
    pub seed: u64,
}

impl From<ScenarioConfigFile> for ScenarioConfig {
    fn from(f: ScenarioConfigFile) -> Self {
        ScenarioConfig {
            bs_separation_half: f.bs_separation_half,
            coverage_radius: f.coverage_radius,
            noma_radius_1: f.noma_radius_1,
            noma_radius_2: f.noma_radius_2,
            path_loss_exp: f.path_loss_exp,
            antennas: f.antennas,
            noise_power: f.noise_power,
            p_max: f.p_max,
            target_rates: f.target_rates,
            group_count: f.group_count,
            seed: f.seed,
        }
    }
}

impl From<&ScenarioConfig> for ScenarioConfigFile {
    fn from(c: &ScenarioConfig) -> Self {
        ScenarioConfigFile {
            bs_separation_half: c.bs_separation_half,
            coverage_radius: c.coverage_radius,
            noma_radius_1: c.noma_radius_1,
            noma_radius_2: c.noma_radius_2,
            path_loss_exp: c.path_loss_exp,
            antennas: c.antennas,
            noise_power: c.noise_power,
            p_max: c.p_max,
            target_rates: c.target_rates,
            group_count: c.group_count,
            seed: c.seed,
        }
    }
}

/// Load and validate a scenario config.
pub fn read_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading scenario config {}", path.display()))?;
    let file: ScenarioConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing scenario config {}", path.display()))?;
    let cfg: ScenarioConfig = file.into();
    cfg.validate()
        .map_err(|e| anyhow::anyhow!("{e} in {}", path.display()))?;
    Ok(cfg)
}

pub fn write_scenario(path: &Path, cfg: &ScenarioConfig) -> Result<()> {
    let file = ScenarioConfigFile::from(cfg);
    let text = serde_json::to_string_pretty(&file)?;
    fs::write(path, text + "\n")
        .with_context(|| format!("writing scenario config {}", path.display()))?;
    Ok(())
}

/// One solvable instance: four channel vectors plus radio parameters.
/// Complex entries are `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelDump {
    pub antennas: usize,
    pub sigma2: f64,
    pub target_rates: [f64; 3],
    pub p_max: f64,
    pub h10: Vec<[f64; 2]>,
    pub h20: Vec<[f64; 2]>,
    pub h11: Vec<[f64; 2]>,
    pub h22: Vec<[f64; 2]>,
}

fn to_pairs(v: &[Cx]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> Vec<Cx> {
    v.iter().map(|p| Cx::new(p[0], p[1])).collect()
}

impl ChannelDump {
    pub fn new(
        h10: &[Cx],
        h20: &[Cx],
        h11: &[Cx],
        h22: &[Cx],
        sigma2: f64,
        target_rates: [f64; 3],
        p_max: f64,
    ) -> Self {
        ChannelDump {
            antennas: h10.len(),
            sigma2,
            target_rates,
            p_max,
            h10: to_pairs(h10),
            h20: to_pairs(h20),
            h11: to_pairs(h11),
            h22: to_pairs(h22),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("h10", &self.h10),
            ("h20", &self.h20),
            ("h11", &self.h11),
            ("h22", &self.h22),
        ] {
            anyhow::ensure!(
                v.len() == self.antennas,
                "{name} has {} entries, expected {}",
                v.len(),
                self.antennas
            );
            anyhow::ensure!(
                v.iter().all(|p| p[0].is_finite() && p[1].is_finite()),
                "{name} contains non-finite entries"
            );
        }
        anyhow::ensure!(self.sigma2 > 0.0, "sigma2 must be positive");
        anyhow::ensure!(self.p_max >= 0.0, "p_max must be nonnegative");
        anyhow::ensure!(
            self.target_rates.iter().all(|r| *r >= 0.0),
            "target rates must be nonnegative"
        );
        Ok(())
    }

    pub fn channels(&self) -> (Vec<Cx>, Vec<Cx>, Vec<Cx>, Vec<Cx>) {
        (
            from_pairs(&self.h10),
            from_pairs(&self.h20),
            from_pairs(&self.h11),
            from_pairs(&self.h22),
        )
    }

    pub fn targets(&self) -> SinrTargets {
        SinrTargets::from_rates(
            self.target_rates[0],
            self.target_rates[1],
            self.target_rates[2],
        )
    }
}

pub fn read_dump(path: &Path) -> Result<ChannelDump> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading channel dump {}", path.display()))?;
    let dump: ChannelDump = serde_json::from_str(&text)
        .with_context(|| format!("parsing channel dump {}", path.display()))?;
    dump.validate()?;
    Ok(dump)
}

pub fn write_dump(path: &Path, dump: &ChannelDump) -> Result<()> {
    let text = serde_json::to_string_pretty(dump)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// One row of the Monte Carlo results table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OutageRecord {
    pub scheme: String,
    pub k: usize,
    pub p_max: f64,
    pub trials: u64,
    pub outage_prob: f64,
    pub ci95: f64,
    pub mean_power_w: f64,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 8] = [
    "scheme",
    "K",
    "p_max",
    "trials",
    "outage_prob",
    "ci95",
    "mean_power_w",
    "seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => anyhow::bail!("unknown output format {other:?} (expected csv or json)"),
        }
    }
}

/// Serialize result rows; CSV columns are fixed by [`CSV_HEADER`].
pub fn render_records(records: &[OutageRecord], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(records)? + "\n"),
        OutputFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(CSV_HEADER)?;
            for r in records {
                wtr.write_record(&[
                    r.scheme.clone(),
                    r.k.to_string(),
                    r.p_max.to_string(),
                    r.trials.to_string(),
                    r.outage_prob.to_string(),
                    r.ci95.to_string(),
                    r.mean_power_w.to_string(),
                    r.seed.to_string(),
                ])?;
            }
            Ok(String::from_utf8(wtr.into_inner()?)?)
        }
    }
}

pub fn write_records(path: &Path, records: &[OutageRecord], format: OutputFormat) -> Result<()> {
    let text = render_records(records, format)?;
    fs::write(path, text).with_context(|| format!("writing results to {}", path.display()))?;
    Ok(())
}

/// Parse a CSV results table back into records.
pub fn read_records_csv(path: &Path) -> Result<Vec<OutageRecord>> {
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("reading results from {}", path.display()))?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        anyhow::ensure!(row.len() == CSV_HEADER.len(), "malformed results row");
        out.push(OutageRecord {
            scheme: row[0].to_string(),
            k: row[1].parse()?,
            p_max: row[2].parse()?,
            trials: row[3].parse()?,
            outage_prob: row[4].parse()?,
            ci95: row[5].parse()?,
            mean_power_w: row[6].parse()?,
            seed: row[7].parse()?,
        });
    }
    Ok(out)
}
