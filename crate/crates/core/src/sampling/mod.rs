//! Training-set balancing: no sampling, random down-sampling of NoRel, or
//! up-sampling of each positive class with augmented copies.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64(seed)`. Down-sampling uses stream 0. The augmented copy
//! written at output position `i` uses stream `i`, so copies are
//! independent of scheduling.

pub mod augment;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidatePair;
use crate::corpus::{LabelCounts, RelationType};
use crate::emitter::Instance;
use crate::parallel::{self, Exec};

pub use augment::{augment_text, augment_with, Augmented, Augmenter, Lexicon, TokenSeq};

#[derive(Debug, thiserror::Error)]
pub enum SamplingError {
    #[error("cannot up-sample: there are no positive instances to augment")]
    EmptyPositiveClass,
    #[error("up-sampling needs a non-empty augmenter chain")]
    MissingChain,
    #[error("augmenter rate {0} is outside [0, 1]")]
    InvalidRate(f64),
    #[error("{0:?} needs a lexicon_path")]
    MissingLexicon(AugmenterKind),
    #[error("lexicon {path}: {message}")]
    Lexicon { path: String, message: String },
    #[error("chain file {path}: {message}")]
    ChainFile { path: String, message: String },
    #[error("instance {index} has malformed tags: {message}")]
    MalformedInstance { index: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    None,
    #[serde(rename = "down")]
    DownSampleNoRel,
    #[serde(rename = "up")]
    UpSamplePositives,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Strategy::None),
            "down" => Ok(Strategy::DownSampleNoRel),
            "up" => Ok(Strategy::UpSamplePositives),
            other => Err(format!("unknown strategy {other:?} (expected none, down or up)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmenterKind {
    RandomSwap,
    RandomDelete,
    RandomInsert,
    SynonymReplace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmenterSpec {
    pub kind: AugmenterKind,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_path: Option<PathBuf>,
}

impl AugmenterSpec {
    pub fn new(kind: AugmenterKind, rate: f64) -> Self {
        AugmenterSpec { kind, rate, lexicon_path: None }
    }

    /// Builds the augmenter, loading its lexicon relative to `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Box<dyn Augmenter>, SamplingError> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(SamplingError::InvalidRate(self.rate));
        }
        let lexicon = || -> Result<Lexicon, SamplingError> {
            let path = self.lexicon_path.as_ref().ok_or(SamplingError::MissingLexicon(self.kind))?;
            Lexicon::load(&base_dir.join(path))
        };
        let rate = self.rate;
        Ok(match self.kind {
            AugmenterKind::RandomSwap => Box::new(augment::RandomSwap { rate }),
            AugmenterKind::RandomDelete => Box::new(augment::RandomDelete { rate }),
            AugmenterKind::RandomInsert => Box::new(augment::RandomInsert { rate, lexicon: lexicon()? }),
            AugmenterKind::SynonymReplace => Box::new(augment::SynonymReplace { rate, lexicon: lexicon()? }),
        })
    }
}

/// Reads a JSON array of [`AugmenterSpec`]s. Lexicon paths resolve relative
/// to the chain file's directory.
pub fn load_chain(path: &Path) -> Result<Vec<Box<dyn Augmenter>>, SamplingError> {
    let specs = read_chain_specs(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    build_chain(&specs, base)
}

pub fn read_chain_specs(path: &Path) -> Result<Vec<AugmenterSpec>, SamplingError> {
    let err = |message: String| SamplingError::ChainFile { path: path.display().to_string(), message };
    let content = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&content).map_err(|e| err(e.to_string()))
}

pub fn build_chain(specs: &[AugmenterSpec], base_dir: &Path) -> Result<Vec<Box<dyn Augmenter>>, SamplingError> {
    specs.iter().map(|s| s.build(base_dir)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    pub seed: u64,
    #[serde(default)]
    pub augmenter_chain: Vec<AugmenterSpec>,
}

/// Anything carrying a relation label.
pub trait Labeled {
    fn label(&self) -> RelationType;
}

impl Labeled for Instance {
    fn label(&self) -> RelationType {
        self.label
    }
}

impl Labeled for CandidatePair {
    fn label(&self) -> RelationType {
        self.label
    }
}

pub fn label_counts<T: Labeled>(items: &[T]) -> LabelCounts {
    LabelCounts::from_labels(items.iter().map(Labeled::label))
}

/// Drops NoRel items uniformly at random, without replacement, until their
/// count equals the largest positive class. Survivors keep their order.
pub fn down_sample<T: Labeled + Clone>(items: &[T], seed: u64) -> Vec<T> {
    let counts = label_counts(items);
    let target = RelationType::POSITIVE.iter().map(|r| counts.get(*r)).max().unwrap_or(0);
    if counts.norel <= target {
        return items.to_vec();
    }
    let norel: Vec<usize> = (0..items.len()).filter(|&i| items[i].label() == RelationType::NoRel).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![true; items.len()];
    for &i in &norel {
        keep[i] = false;
    }
    for k in index::sample(&mut rng, norel.len(), target) {
        keep[norel[k]] = true;
    }
    items.iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t.clone()).collect()
}

/// Grows each positive class below the NoRel count up to it. Originals are
/// kept verbatim; copies cycle through the class members in order, are
/// augmented by `chain`, and are appended class by class (Before, After,
/// Overlap). A class with no members at all is left empty with a warning.
pub fn up_sample(
    instances: &[Instance],
    chain: &[Box<dyn Augmenter>],
    seed: u64,
    exec: Exec,
) -> Result<Vec<Instance>, SamplingError> {
    let counts = label_counts(instances);
    let target = counts.norel;
    if target > 0 && counts.positive_total() == 0 {
        return Err(SamplingError::EmptyPositiveClass);
    }
    let mut jobs: Vec<usize> = Vec::new();
    for rel in RelationType::POSITIVE {
        let members: Vec<usize> = (0..instances.len()).filter(|&i| instances[i].label == rel).collect();
        if members.len() >= target {
            continue;
        }
        if members.is_empty() {
            log::warn!("no {rel} instances to up-sample from");
            continue;
        }
        jobs.extend((0..target - members.len()).map(|j| members[j % members.len()]));
    }
    if jobs.is_empty() {
        return Ok(instances.to_vec());
    }
    if chain.is_empty() {
        return Err(SamplingError::MissingChain);
    }
    let base = instances.len();
    let copies = parallel::map(exec, &jobs, |j, &src| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((base + j) as u64);
        let original = &instances[src];
        augment_with(&original.text, chain, &mut rng)
            .map(|a| Instance { text: a.text, ..original.clone() })
            .map_err(|e| SamplingError::MalformedInstance { index: src, message: e.to_string() })
    });
    let mut out = instances.to_vec();
    for c in copies {
        out.push(c?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SamplingReport {
    pub strategy: Strategy,
    pub before: LabelCounts,
    pub after: LabelCounts,
}

/// Applies `config.strategy`. Lexicon paths in the chain resolve against
/// `base_dir`.
pub fn apply(
    instances: &[Instance],
    config: &SamplingConfig,
    base_dir: &Path,
    exec: Exec,
) -> Result<(Vec<Instance>, SamplingReport), SamplingError> {
    let out = match config.strategy {
        Strategy::None => instances.to_vec(),
        Strategy::DownSampleNoRel => down_sample(instances, config.seed),
        Strategy::UpSamplePositives => {
            if config.augmenter_chain.is_empty() {
                return Err(SamplingError::MissingChain);
            }
            let chain = build_chain(&config.augmenter_chain, base_dir)?;
            up_sample(instances, &chain, config.seed, exec)?
        }
    };
    let report =
        SamplingReport { strategy: config.strategy, before: label_counts(instances), after: label_counts(&out) };
    Ok((out, report))
}
