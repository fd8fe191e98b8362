//! Run configuration: command-line flags layered over an optional
//! `key = value` file, layered over built-in defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use bechdel_core::ingest::PairRule;
use bechdel_core::metrics::Denominator;
use bechdel_core::screenplay::CharacterScope;

use crate::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Message stream, one JSON object per line.
    #[arg(long)]
    pub messages: Option<PathBuf>,
    /// Dialogue files (JSONL) from an earlier `segment` run; repeatable.
    #[arg(long)]
    pub dialogues: Vec<PathBuf>,
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Name counts (`name,gender,count`), a file or a directory of yearly files.
    #[arg(long)]
    pub names: Option<PathBuf>,
    /// Token lists removed from the name lexicon; repeatable.
    #[arg(long)]
    pub stoplist: Vec<PathBuf>,
    #[arg(long)]
    pub male_words: Option<PathBuf>,
    #[arg(long)]
    pub female_words: Option<PathBuf>,
    #[arg(long)]
    pub mother_words: Option<PathBuf>,
    #[arg(long)]
    pub father_words: Option<PathBuf>,
    #[arg(long)]
    pub student_words: Option<PathBuf>,
    #[arg(long)]
    pub movies: Option<PathBuf>,
    #[arg(long)]
    pub shares: Option<PathBuf>,
    /// State covariates (`state,avg_income,gini,largest_city_latitude,largest_city_longitude`).
    #[arg(long)]
    pub states: Option<PathBuf>,
    /// Top-city list replacing the bundled one.
    #[arg(long)]
    pub cities: Option<PathBuf>,
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Screenplay file or directory of `.txt` screenplays.
    #[arg(long)]
    pub scripts: Option<PathBuf>,
    /// Character genders (`movie_id,character_cue,gender`).
    #[arg(long)]
    pub cast: Option<PathBuf>,

    #[arg(long)]
    pub min_mentions: Option<u64>,
    /// Require mentions in both directions.
    #[arg(long)]
    pub reciprocal_mentions: bool,
    #[arg(long)]
    pub min_aligned: Option<u64>,
    #[arg(long)]
    pub min_ego_dialogues: Option<usize>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Name frequency ratio required to assign a gender.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Skip fitting and split streams at this cutoff.
    #[arg(long)]
    pub tau_seconds: Option<f64>,
    #[arg(long)]
    pub min_gaps: Option<usize>,
    /// Fit a cutoff per pair where the pair has enough gaps.
    #[arg(long)]
    pub per_pair_tau: bool,
    /// Count only speaking characters for the first rule of the classic test.
    #[arg(long)]
    pub speaking_only: bool,
    /// Leave unknown–unknown dialogues out of the Bechdel score denominator.
    #[arg(long)]
    pub exclude_unknown: bool,
    #[arg(long)]
    pub level: Option<f64>,
    /// Significance level below which a shift counts in the Euclidean distance.
    #[arg(long)]
    pub significance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out: PathBuf,
    pub messages: Option<PathBuf>,
    pub dialogues: Vec<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub names: Option<PathBuf>,
    pub stoplists: Vec<PathBuf>,
    pub male_words: Option<PathBuf>,
    pub female_words: Option<PathBuf>,
    pub mother_words: Option<PathBuf>,
    pub father_words: Option<PathBuf>,
    pub student_words: Option<PathBuf>,
    pub movies: Option<PathBuf>,
    pub shares: Option<PathBuf>,
    pub states: Option<PathBuf>,
    pub cities: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub scripts: Option<PathBuf>,
    pub cast: Option<PathBuf>,

    pub min_mentions: u64,
    pub pair_rule: PairRule,
    pub min_aligned: u64,
    pub min_ego_dialogues: usize,
    pub sample_size: usize,
    pub n_samples: usize,
    pub ratio: f64,
    pub t_min: f64,
    pub tau_seconds: Option<f64>,
    pub min_gaps: usize,
    pub per_pair_tau: bool,
    pub character_scope: CharacterScope,
    pub denominator: Denominator,
    pub level: f64,
    pub significance: f64,
    pub seed: u64,
    pub threads: usize,
}

const KEYS: &[&str] = &[
    "out", "messages", "dialogues", "profiles", "names", "stoplist", "male_words", "female_words",
    "mother_words", "father_words", "student_words", "movies", "shares", "states", "cities", "aliases",
    "scripts", "cast", "min_mentions", "reciprocal_mentions", "min_aligned", "min_ego_dialogues",
    "sample_size", "n_samples", "ratio", "t_min", "tau_seconds", "min_gaps", "per_pair_tau",
    "speaking_only", "exclude_unknown", "level", "significance", "seed", "threads",
];

/// Parses `key = value` lines. `#` starts a comment; keys may use `-` or `_`.
/// Relative paths in values are resolved against the file's directory.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Validation(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

struct Layer {
    file: BTreeMap<String, String>,
    base: PathBuf,
}

impl Layer {
    fn value<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|e| CliError::Validation(format!("config {key} = {s:?}: {e}"))),
            None => Ok(default),
        }
    }

    fn optional<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|s| s.parse().map_err(|e| CliError::Validation(format!("config {key} = {s:?}: {e}"))))
            .transpose()
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.value(None, key, false)?)
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.file.get(key).map(|s| self.base.join(s)))
    }

    fn paths(&self, flag: Vec<PathBuf>, key: &str) -> Vec<PathBuf> {
        if !flag.is_empty() {
            return flag;
        }
        self.file
            .get(key)
            .map(|s| s.split(',').map(|p| self.base.join(p.trim())).collect())
            .unwrap_or_default()
    }
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<T, CliError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn resolve(args: RunArgs) -> Result<RunConfig, CliError> {
        let layer = match &args.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::MissingInput(format!("{}: {e}", p.display())))?;
                Layer {
                    file: parse_config_file(&text)?,
                    base: p.parent().map(Path::to_path_buf).unwrap_or_default(),
                }
            }
            None => Layer {
                file: BTreeMap::new(),
                base: PathBuf::new(),
            },
        };
        let reciprocal = layer.flag(args.reciprocal_mentions, "reciprocal_mentions")?;
        let cfg = RunConfig {
            out: layer.path(args.out, "out").unwrap_or_else(|| PathBuf::from("out")),
            messages: layer.path(args.messages, "messages"),
            dialogues: layer.paths(args.dialogues, "dialogues"),
            profiles: layer.path(args.profiles, "profiles"),
            names: layer.path(args.names, "names"),
            stoplists: layer.paths(args.stoplist, "stoplist"),
            male_words: layer.path(args.male_words, "male_words"),
            female_words: layer.path(args.female_words, "female_words"),
            mother_words: layer.path(args.mother_words, "mother_words"),
            father_words: layer.path(args.father_words, "father_words"),
            student_words: layer.path(args.student_words, "student_words"),
            movies: layer.path(args.movies, "movies"),
            shares: layer.path(args.shares, "shares"),
            states: layer.path(args.states, "states"),
            cities: layer.path(args.cities, "cities"),
            aliases: layer.path(args.aliases, "aliases"),
            scripts: layer.path(args.scripts, "scripts"),
            cast: layer.path(args.cast, "cast"),
            min_mentions: positive("min_mentions", layer.value(args.min_mentions, "min_mentions", 10)?)?,
            pair_rule: if reciprocal { PairRule::Reciprocal } else { PairRule::Sum },
            min_aligned: positive("min_aligned", layer.value(args.min_aligned, "min_aligned", 50)?)?,
            min_ego_dialogues: positive(
                "min_ego_dialogues",
                layer.value(args.min_ego_dialogues, "min_ego_dialogues", 25)?,
            )?,
            sample_size: positive("sample_size", layer.value(args.sample_size, "sample_size", 225)?)?,
            n_samples: layer.value(args.n_samples, "n_samples", 200)?,
            ratio: layer.value(args.ratio, "ratio", 5.0)?,
            t_min: positive("t_min", layer.value(args.t_min, "t_min", 1.0)?)?,
            tau_seconds: layer.optional(args.tau_seconds, "tau_seconds")?,
            min_gaps: positive("min_gaps", layer.value(args.min_gaps, "min_gaps", 50)?)?,
            per_pair_tau: layer.flag(args.per_pair_tau, "per_pair_tau")?,
            character_scope: if layer.flag(args.speaking_only, "speaking_only")? {
                CharacterScope::Speaking
            } else {
                CharacterScope::Cast
            },
            denominator: if layer.flag(args.exclude_unknown, "exclude_unknown")? {
                Denominator::ExcludeBothUnknown
            } else {
                Denominator::All
            },
            level: layer.value(args.level, "level", 0.95)?,
            significance: layer.value(args.significance, "significance", 0.05)?,
            seed: layer.value(args.seed, "seed", 0)?,
            threads: layer.value(args.threads, "threads", 0)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.ratio > 1.0) {
            return Err(CliError::Validation(format!("ratio must exceed 1, got {}", self.ratio)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Validation(format!("level must be in (0, 1), got {}", self.level)));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(CliError::Validation(format!("significance must be in (0, 1), got {}", self.significance)));
        }
        if let Some(t) = self.tau_seconds {
            positive("tau_seconds", t)?;
        }
        if self.n_samples < bechdel_core::stats::bootstrap::MIN_SAMPLES {
            return Err(CliError::Validation(format!(
                "n_samples must be at least {}, got {}",
                bechdel_core::stats::bootstrap::MIN_SAMPLES,
                self.n_samples
            )));
        }
        let single = [
            &self.messages,
            &self.profiles,
            &self.names,
            &self.male_words,
            &self.female_words,
            &self.mother_words,
            &self.father_words,
            &self.student_words,
            &self.movies,
            &self.shares,
            &self.states,
            &self.cities,
            &self.aliases,
            &self.scripts,
            &self.cast,
        ];
        for p in single.into_iter().flatten().chain(&self.dialogues).chain(&self.stoplists) {
            if !p.exists() {
                return Err(CliError::MissingInput(format!("{}: no such file or directory", p.display())));
            }
        }
        Ok(())
    }

    /// The path of a required input, or a missing-input error naming its flag.
    pub fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        path.as_deref()
            .ok_or_else(|| CliError::MissingInput(format!("--{flag} is required for this command")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_syntax() {
        let m = parse_config_file("# run\nmin-aligned = 20\nseed=7 # fixed\n\n").unwrap();
        assert_eq!(m["min_aligned"], "20");
        assert_eq!(m["seed"], "7");
        assert!(matches!(parse_config_file("bogus = 1"), Err(CliError::Validation(_))));
        assert!(matches!(parse_config_file("seed 7"), Err(CliError::Validation(_))));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "min_aligned = 20\nseed = 3\nper_pair_tau = true\n").unwrap();
        let args = RunArgs {
            config: Some(path),
            seed: Some(9),
            ..RunArgs::default()
        };
        let cfg = RunConfig::resolve(args).unwrap();
        assert_eq!(cfg.min_aligned, 20);
        assert_eq!(cfg.seed, 9);
        assert!(cfg.per_pair_tau);
        assert_eq!(cfg.min_mentions, 10);
        assert_eq!(cfg.sample_size, 225);
    }

    #[test]
    fn non_positive_threshold_rejected() {
        let args = RunArgs {
            min_aligned: Some(0),
            ..RunArgs::default()
        };
        assert!(matches!(RunConfig::resolve(args), Err(CliError::Validation(_))));
    }
}
