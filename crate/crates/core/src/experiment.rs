//! Experiment configs and the trial runner behind the `run` subcommand.
//!
//! A config names an interval, a layer `p` and a method. Every trial derives
//! its randomness from `(seed, trial)` only, so any report line can be
//! replayed on its own.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bruhat::BruhatInterval;
use crate::codes::{css_from_triple, logical_count, CssCode, SideConvention, WeightStats};
use crate::coxeter::parse_group_spec;
use crate::distance::{analyze, worker_pool, DistanceReport, DistanceSettings};
use crate::error::{Error, Result};
use crate::spheres::{enumerate_crowns, enumerate_diamonds, enumerate_s2, CrownSide, SphereRecord};
use crate::transform::{
    crown_splice, diamond_removal, extract_metacheck_code, fold_subposet, random_splice, s2_splice, FoldVariant, SpliceConfig,
    SpliceSides,
};
use crate::weightred::reduce_to_threshold;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Triple,
    Crown,
    S2,
    Random,
    Diamond,
    FoldM5,
    FoldM7,
    Weightred,
}

impl Method {
    /// Methods whose output does not depend on the trial index.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Method::Triple | Method::FoldM5 | Method::FoldM7 | Method::Weightred)
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_value(Value::String(s.to_ascii_lowercase())).map_err(|_| {
            format!("unknown method `{s}` (triple, crown, s2, random, diamond, fold-m5, fold-m7, weightred)")
        })
    }
}

fn default_wb() -> String {
    "id".into()
}

fn default_wt() -> String {
    "w0".into()
}

fn default_variant() -> FoldVariant {
    FoldVariant::Fused
}

fn default_trials() -> u64 {
    1
}

fn default_max_iters() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: String,
    #[serde(default = "default_wb")]
    pub wb: String,
    #[serde(default = "default_wt")]
    pub wt: String,
    pub p: usize,
    pub method: Method,
    #[serde(default)]
    pub convention: SideConvention,
    /// Crown and S² splicing; its `seed` field is replaced by the master seed.
    #[serde(default)]
    pub splice: Option<SpliceConfig>,
    #[serde(default)]
    pub sides: SpliceSides,
    /// Number of diamonds removed.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default = "default_variant")]
    pub variant: FoldVariant,
    /// fold-m7 only: report the metacheck code instead of the main code.
    #[serde(default)]
    pub metacheck: bool,
    /// Bundle read by `weightred`.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Weight threshold; also applied after any other method when set.
    #[serde(default)]
    pub w_max: Option<usize>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub distance: DistanceSettings,
    #[serde(default)]
    pub skip_distance: bool,
    /// JSON-lines report path.
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// Directory receiving one bundle per trial.
    #[serde(default)]
    pub bundles: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(group: &str, p: usize, method: Method) -> Self {
        ExperimentConfig {
            group: group.into(),
            wb: default_wb(),
            wt: default_wt(),
            p,
            method,
            convention: SideConvention::LowerX,
            splice: None,
            sides: SpliceSides::Both,
            count: None,
            variant: FoldVariant::Fused,
            metacheck: false,
            input: None,
            w_max: None,
            max_iters: default_max_iters(),
            trials: 1,
            seed: None,
            distance: DistanceSettings::default(),
            skip_distance: false,
            report: None,
            bundles: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let missing = |what: &str| Err(Error::InvalidArgument(format!("method {:?} needs `{what}`", self.method)));
        match self.method {
            Method::Crown | Method::S2 => match &self.splice {
                None => return missing("splice"),
                Some(s) => s.validate()?,
            },
            Method::Diamond if self.count.is_none() => return missing("count"),
            Method::Weightred if self.input.is_none() => return missing("input"),
            Method::Weightred if self.w_max.is_none() => return missing("w_max"),
            _ => {}
        }
        if self.metacheck && self.method != Method::FoldM7 {
            return Err(Error::InvalidArgument("`metacheck` only applies to fold-m7".into()));
        }
        if let Some(w) = self.w_max {
            if w < 4 {
                return Err(Error::InvalidArgument(format!("w_max must be at least 4, got {w}")));
            }
        }
        Ok(())
    }

    /// The configured seed, or a fresh random one.
    pub fn resolve_seed(&self) -> u64 {
        self.seed.unwrap_or_else(rand::random)
    }
}

enum Source {
    Fixed(CssCode),
    Spheres(CssCode, Vec<SphereRecord>),
    Base(CssCode),
}

/// Everything a trial needs, computed once per run.
pub struct Prepared {
    config: ExperimentConfig,
    seed: u64,
    source: Source,
}

impl Prepared {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let source = if config.method == Method::Weightred {
            let path = config.input.as_ref().expect("validated");
            Source::Fixed(CssCode::from_bundle(&fs::read_to_string(path)?)?)
        } else {
            let sys = parse_group_spec(&config.group)?;
            let iv = BruhatInterval::from_word_text(&sys, &config.wb, &config.wt)?;
            info!("interval {} .. {}: layers {:?}", iv.bottom(), iv.top(), iv.layer_sizes());
            let triple = || css_from_triple(&iv.layered_subposet(config.p, 1)?, config.convention);
            match config.method {
                Method::Triple => Source::Fixed(triple()?),
                Method::FoldM5 => Source::Fixed(fold_subposet(&iv.layered_subposet(config.p, 2)?, config.variant)?.code),
                Method::FoldM7 => {
                    let fr = fold_subposet(&iv.layered_subposet(config.p, 3)?, config.variant)?;
                    Source::Fixed(if config.metacheck { extract_metacheck_code(&fr)? } else { fr.code })
                }
                Method::Crown => {
                    let sub = iv.layered_subposet(config.p, 2)?;
                    let mut crowns = enumerate_crowns(&sub, CrownSide::Left)?;
                    crowns.extend(enumerate_crowns(&sub, CrownSide::Right)?);
                    Source::Spheres(triple()?, crowns)
                }
                Method::S2 => Source::Spheres(triple()?, enumerate_s2(&iv.layered_subposet(config.p, 2)?)?),
                Method::Diamond => Source::Spheres(triple()?, enumerate_diamonds(&iv.layered_subposet(config.p, 1)?, config.p)?),
                Method::Random => Source::Base(triple()?),
                Method::Weightred => unreachable!(),
            }
        };
        Ok(Prepared { config: config.clone(), seed, source })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The code of one trial.
    pub fn build(&self, trial: u64) -> Result<CssCode> {
        let c = &self.config;
        let splice = || SpliceConfig { seed: self.seed, ..c.splice.clone().expect("validated") };
        let code = match (&self.source, c.method) {
            (Source::Fixed(code), _) => code.clone(),
            (Source::Spheres(base, recs), Method::Crown) => crown_splice(base, recs, c.convention, &splice(), trial)?,
            (Source::Spheres(base, recs), Method::S2) => s2_splice(base, recs, c.convention, &splice(), trial)?,
            (Source::Spheres(base, recs), _) => {
                diamond_removal(base, recs, c.convention, c.count.expect("validated"), self.seed, trial)?
            }
            (Source::Base(base), _) => random_splice(base, c.sides, self.seed, trial)?,
        };
        match c.w_max {
            Some(w) => Ok(reduce_to_threshold(&code, w, c.max_iters)?.code),
            None => Ok(code),
        }
    }

    fn params(&self) -> Value {
        let c = &self.config;
        match c.method {
            Method::Crown | Method::S2 => json!({"splice": splice_json(c, self.seed), "convention": c.convention}),
            Method::Random => json!({"sides": c.sides}),
            Method::Diamond => json!({"count": c.count, "convention": c.convention}),
            Method::FoldM5 | Method::FoldM7 => json!({"variant": c.variant, "metacheck": c.metacheck}),
            Method::Weightred => json!({"input": c.input}),
            Method::Triple => json!({"convention": c.convention}),
        }
    }
}

fn splice_json(c: &ExperimentConfig, seed: u64) -> Value {
    let s = SpliceConfig { seed, ..c.splice.clone().unwrap_or_default() };
    serde_json::to_value(s).expect("plain struct")
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub group: String,
    pub wb: String,
    pub wt: String,
    pub p: usize,
    pub method: Method,
    pub params: Value,
    pub w_max: Option<usize>,
    pub n: usize,
    pub k: usize,
    pub weights: WeightStats,
    pub distance: Option<DistanceReport>,
    /// SHA-256 of the code bundle.
    pub hash: String,
    pub bundle: Option<PathBuf>,
}

pub fn bundle_hash(code: &CssCode) -> String {
    hex::encode(Sha256::digest(code.to_bundle().as_bytes()))
}

/// Seed handed to the distance estimator of a trial.
pub fn distance_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn run_trial(prep: &Prepared, trial: u64) -> Result<(TrialRecord, CssCode)> {
    let c = &prep.config;
    let code = prep.build(trial)?;
    let k = logical_count(&code);
    let distance = if c.skip_distance || k == 0 { None } else { Some(analyze(&code, &c.distance, distance_seed(prep.seed, trial))?) };
    let bundle = c.bundles.as_ref().map(|d| d.join(format!("trial-{trial:05}.bundle")));
    let rec = TrialRecord {
        trial,
        seed: prep.seed,
        group: c.group.clone(),
        wb: c.wb.clone(),
        wt: c.wt.clone(),
        p: c.p,
        method: c.method,
        params: prep.params(),
        w_max: c.w_max,
        n: code.n(),
        k,
        weights: code.weight_stats(),
        distance,
        hash: bundle_hash(&code),
        bundle,
    };
    Ok((rec, code))
}

/// Runs every trial, writes the report and bundles if configured and returns
/// the records ordered by trial.
pub fn run(config: &ExperimentConfig, seed: u64) -> Result<Vec<TrialRecord>> {
    let prep = Prepared::new(config, seed)?;
    let trials = if config.method.is_deterministic() { 1 } else { config.trials };
    if let Some(d) = &config.bundles {
        fs::create_dir_all(d)?;
    }
    let work = || -> Result<Vec<TrialRecord>> {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let (rec, code) = run_trial(&prep, t)?;
                if let Some(path) = &rec.bundle {
                    fs::write(path, code.to_bundle())?;
                }
                Ok(rec)
            })
            .collect()
    };
    let records = match worker_pool() {
        Some(pool) => pool.install(work)?,
        None => work()?,
    };
    if let Some(path) = &config.report {
        write_report(path, &records)?;
    }
    Ok(records)
}

pub fn write_report(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for r in records {
        let mut line = serde_json::to_string(r)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_report(text: &str) -> Result<Vec<TrialRecord>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

/// Rebuilds the code of a report line and checks it against the recorded hash.
pub fn replay(config: &ExperimentConfig, record: &TrialRecord) -> Result<CssCode> {
    let code = Prepared::new(config, record.seed)?.build(record.trial)?;
    let h = bundle_hash(&code);
    if h != record.hash {
        return Err(Error::Format(format!("replay of trial {} gave hash {h}, report has {}", record.trial, record.hash)));
    }
    Ok(code)
}
