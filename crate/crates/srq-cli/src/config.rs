//! Sweep configuration: defaults, the flat `key = value` config file, and
//! command-line overrides, merged in that order.

use std::path::{Path, PathBuf};

use srq_core::error::{Result, SrqError};
use srq_core::sweep::{PartitionChoice, SweepConfig, DEFAULT_PARTITION_CAP, DEFAULT_SAMPLES};

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub n_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub partitions: PartitionChoice,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub dim_cap: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            n_values: vec![3, 4, 5],
            d_values: vec![2, 3, 4, 5, 6],
            partitions: PartitionChoice::default(),
            samples: DEFAULT_SAMPLES,
            seed: 0,
            out: PathBuf::from("sweep.csv"),
            dim_cap: srq_core::states::DEFAULT_DIM_CAP,
        }
    }
}

impl SweepSettings {
    /// Applies a config file. Recognized keys mirror the sweep fields:
    /// `n`, `d`, `partitions`, `samples`, `seed`, `out`, `dim_cap`.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (idx, raw) in text.lines().enumerate() {
            let line_number = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SrqError::Parse {
                line: line_number,
                message: format!("expected `key = value`, got '{raw}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let reparse = |what: &str| SrqError::Parse {
                line: line_number,
                message: format!("cannot parse {what} from '{value}'"),
            };
            match key {
                "n" => self.n_values = parse_usize_list(value).map_err(|_| reparse("n list"))?,
                "d" => self.d_values = parse_usize_list(value).map_err(|_| reparse("d list"))?,
                "partitions" => {
                    self.partitions = parse_partitions(value).map_err(|_| reparse("partitions"))?
                }
                "samples" => self.samples = value.parse().map_err(|_| reparse("samples"))?,
                "seed" => self.seed = value.parse().map_err(|_| reparse("seed"))?,
                "out" => self.out = PathBuf::from(value),
                "dim_cap" => self.dim_cap = value.parse().map_err(|_| reparse("dim_cap"))?,
                other => {
                    return Err(SrqError::Parse {
                        line: line_number,
                        message: format!("unknown config key '{other}'"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn merge_flags(&mut self, args: &crate::SweepArgs) -> Result<()> {
        if let Some(v) = &args.n_values {
            self.n_values = parse_usize_list(v)?;
        }
        if let Some(v) = &args.d_values {
            self.d_values = parse_usize_list(v)?;
        }
        if let Some(v) = &args.partitions {
            self.partitions = parse_partitions(v)?;
        }
        if let Some(v) = args.samples {
            self.samples = v;
        }
        if let Some(v) = args.seed {
            self.seed = v;
        }
        if let Some(v) = &args.out {
            self.out = v.clone();
        }
        if let Some(v) = args.dim_cap {
            self.dim_cap = v;
        }
        Ok(())
    }

    pub fn into_config(self) -> Result<SweepConfig> {
        Ok(SweepConfig {
            n_values: self.n_values,
            d_values: self.d_values,
            partitions: self.partitions,
            samples: self.samples,
            master_seed: self.seed,
            dim_cap: self.dim_cap,
        })
    }
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let parsed: std::result::Result<Vec<usize>, _> =
        text.split(',').map(|v| v.trim().parse()).collect();
    let list = parsed.map_err(|_| SrqError::Domain(format!("cannot parse list '{text}'")))?;
    if list.is_empty() {
        return Err(SrqError::Domain("empty value list".into()));
    }
    Ok(list)
}

/// `all`, `all:<cap>`, or comma-separated compact partitions (`1+1,2+1`).
fn parse_partitions(text: &str) -> Result<PartitionChoice> {
    let trimmed = text.trim();
    if trimmed == "all" {
        return Ok(PartitionChoice::AllOrdered {
            cap: DEFAULT_PARTITION_CAP,
        });
    }
    if let Some(cap) = trimmed.strip_prefix("all:") {
        let cap = cap
            .parse()
            .map_err(|_| SrqError::Domain(format!("cannot parse partition cap from '{text}'")))?;
        return Ok(PartitionChoice::AllOrdered { cap });
    }
    let mut out = Vec::new();
    for spec in trimmed.split(',') {
        let part = srq_core::symmetry::ChargePartition::parse_dims(spec.trim())?;
        out.push(part.dims());
    }
    Ok(PartitionChoice::Explicit(out))
}
