//! Dialogue tuples and the Bechdel score, dialogue imbalance and gender
//! independence metrics computed over sets of them.
//!
//! All metrics are ratios of dialogue counts. They are returned as
//! [`Proportion`]s so callers can materialise them exactly (as rationals) or
//! as floats, and so that an empty denominator is reported as undefined
//! rather than as zero.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gender::{detect_references, Gender, ReferenceLexicon, References};
use crate::num::{Real, Scalar};
use crate::stats::wilson_ci;

/// Gender-aligned dialogues required before independence is reported.
pub const DEFAULT_MIN_ALIGNED: u64 = 50;

/// Where a dialogue was extracted from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Origin {
    Movie(String),
    Stream,
}

fn ser_bit<S: Serializer>(b: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*b))
}

fn de_bit<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Bit {
        Int(u8),
        Bool(bool),
    }
    match Bit::deserialize(d)? {
        Bit::Int(0) | Bit::Bool(false) => Ok(false),
        Bit::Int(1) | Bit::Bool(true) => Ok(true),
        Bit::Int(n) => Err(serde::de::Error::custom(format!("reference flag must be 0 or 1, got {n}"))),
    }
}

/// One dialogue: the genders of its two participants and whether it
/// references males (`m`) and females (`f`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub g1: Gender,
    pub g2: Gender,
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub m: bool,
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub f: bool,
    #[serde(default)]
    pub participants: (String, String),
    #[serde(default)]
    pub source_ids: Vec<String>,
    #[serde(default = "default_origin")]
    pub origin: Origin,
}

fn default_origin() -> Origin {
    Origin::Stream
}

impl Dialogue {
    /// A dialogue with the given tuple and no provenance.
    pub fn new(g1: Gender, g2: Gender, refs: References) -> Self {
        Dialogue {
            g1,
            g2,
            m: refs.m,
            f: refs.f,
            participants: (String::new(), String::new()),
            source_ids: Vec::new(),
            origin: Origin::Stream,
        }
    }

    /// Builds a dialogue whose reference flags come from `text`.
    pub fn from_text(g1: Gender, g2: Gender, text: &str, lex: &ReferenceLexicon) -> Self {
        Self::new(g1, g2, detect_references(text, lex))
    }

    pub fn with_participants(mut self, a: impl Into<String>, b: impl Into<String>) -> Self {
        self.participants = (a.into(), b.into());
        self
    }

    pub fn with_sources(mut self, ids: Vec<String>) -> Self {
        self.source_ids = ids;
        self
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn references(&self) -> References {
        References { m: self.m, f: self.f }
    }

    /// M↔F on both genders and on the reference flags.
    pub fn gender_swapped(&self) -> Dialogue {
        Dialogue {
            g1: self.g1.swapped(),
            g2: self.g2.swapped(),
            m: self.f,
            f: self.m,
            ..self.clone()
        }
    }

    pub fn involves(&self, g: Gender) -> bool {
        self.g1 == g || self.g2 == g
    }

    fn cell(&self) -> usize {
        cell_index(self.g1, self.g2, self.m, self.f)
    }
}

const CELLS: usize = 36;

fn cell_index(g1: Gender, g2: Gender, m: bool, f: bool) -> usize {
    g1.index() * 12 + g2.index() * 4 + usize::from(m) * 2 + usize::from(f)
}

fn cell_tuple(i: usize) -> (Gender, Gender, bool, bool) {
    (
        Gender::ALL[i / 12],
        Gender::ALL[(i / 4) % 3],
        (i / 2) % 2 == 1,
        i % 2 == 1,
    )
}

/// A `(g1, g2, m, f)` query where `None` is the `*` wildcard.
///
/// With `unordered` set, the gender pair matches in either order, so
/// `(F, M)` selects `D(F,M,·,·) ∪ D(M,F,·,·)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pattern {
    pub g1: Option<Gender>,
    pub g2: Option<Gender>,
    pub m: Option<bool>,
    pub f: Option<bool>,
    pub unordered: bool,
}

impl Pattern {
    pub const ANY: Pattern = Pattern {
        g1: None,
        g2: None,
        m: None,
        f: None,
        unordered: false,
    };

    pub fn new(g1: Option<Gender>, g2: Option<Gender>, m: Option<bool>, f: Option<bool>) -> Self {
        Pattern {
            g1,
            g2,
            m,
            f,
            unordered: false,
        }
    }

    pub fn unordered(mut self) -> Self {
        self.unordered = true;
        self
    }

    fn ordered_match(g1: Option<Gender>, g2: Option<Gender>, a: Gender, b: Gender) -> bool {
        g1.is_none_or(|g| g == a) && g2.is_none_or(|g| g == b)
    }

    pub fn matches(&self, g1: Gender, g2: Gender, m: bool, f: bool) -> bool {
        let genders = Self::ordered_match(self.g1, self.g2, g1, g2)
            || (self.unordered && Self::ordered_match(self.g1, self.g2, g2, g1));
        genders && self.m.is_none_or(|x| x == m) && self.f.is_none_or(|x| x == f)
    }

    pub fn matches_dialogue(&self, d: &Dialogue) -> bool {
        self.matches(d.g1, d.g2, d.m, d.f)
    }
}

/// Parses `g1,g2,m,f` with `*` wildcards, e.g. `F,F,0,*`. A leading `~`
/// makes the gender pair unordered.
impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (unordered, body) = match s.trim().strip_prefix('~') {
            Some(rest) => (true, rest),
            None => (false, s.trim()),
        };
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!("pattern needs 4 fields: {s:?}")));
        }
        let gender = |p: &str| -> Result<Option<Gender>> {
            match p {
                "*" => Ok(None),
                "M" => Ok(Some(Gender::M)),
                "F" => Ok(Some(Gender::F)),
                "U" => Ok(Some(Gender::U)),
                _ => Err(Error::InvalidArgument(format!("bad gender symbol {p:?}"))),
            }
        };
        let bit = |p: &str| -> Result<Option<bool>> {
            match p {
                "*" => Ok(None),
                "0" => Ok(Some(false)),
                "1" => Ok(Some(true)),
                _ => Err(Error::InvalidArgument(format!("bad reference symbol {p:?}"))),
            }
        };
        Ok(Pattern {
            g1: gender(parts[0])?,
            g2: gender(parts[1])?,
            m: bit(parts[2])?,
            f: bit(parts[3])?,
            unordered,
        })
    }
}

/// Dialogue counts per `(g1, g2, m, f)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternCounts([u64; CELLS]);

impl Default for PatternCounts {
    fn default() -> Self {
        PatternCounts([0; CELLS])
    }
}

impl PatternCounts {
    pub fn add(&mut self, d: &Dialogue) {
        self.0[d.cell()] += 1;
    }

    pub fn select(&self, p: &Pattern) -> u64 {
        (0..CELLS)
            .filter(|&i| {
                let (g1, g2, m, f) = cell_tuple(i);
                p.matches(g1, g2, m, f)
            })
            .map(|i| self.0[i])
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Non-empty cells keyed `g1,g2,m,f`.
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        (0..CELLS)
            .filter(|&i| self.0[i] > 0)
            .map(|i| {
                let (g1, g2, m, f) = cell_tuple(i);
                (format!("{g1},{g2},{},{}", u8::from(m), u8::from(f)), self.0[i])
            })
            .collect()
    }
}

impl std::ops::AddAssign for PatternCounts {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

/// An immutable collection of dialogues with a per-cell count cache.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogueSet {
    label: String,
    dialogues: Vec<Dialogue>,
    counts: PatternCounts,
}

impl DialogueSet {
    pub fn new(label: impl Into<String>, dialogues: Vec<Dialogue>) -> Self {
        let mut counts = PatternCounts::default();
        for d in &dialogues {
            counts.add(d);
        }
        DialogueSet {
            label: label.into(),
            dialogues,
            counts,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dialogues(&self) -> &[Dialogue] {
        &self.dialogues
    }

    pub fn len(&self) -> usize {
        self.dialogues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialogues.is_empty()
    }

    pub fn counts(&self) -> &PatternCounts {
        &self.counts
    }

    pub fn into_dialogues(self) -> Vec<Dialogue> {
        self.dialogues
    }

    /// The subset of dialogues satisfying `keep`, under a new label.
    pub fn filter(&self, label: impl Into<String>, keep: impl Fn(&Dialogue) -> bool) -> DialogueSet {
        DialogueSet::new(
            label,
            self.dialogues.iter().filter(|d| keep(d)).cloned().collect(),
        )
    }

    pub fn gender_swapped(&self) -> DialogueSet {
        DialogueSet::new(
            self.label.clone(),
            self.dialogues.iter().map(Dialogue::gender_swapped).collect(),
        )
    }
}

pub fn select_count(ds: &DialogueSet, pattern: &Pattern) -> u64 {
    ds.counts.select(pattern)
}

/// Why a metric could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Undefined {
    /// Zero dialogues in the denominator.
    EmptyDenominator,
    /// Fewer gender-aligned dialogues than the reporting threshold.
    BelowThreshold { have: u64, need: u64 },
}

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Undefined::EmptyDenominator => f.write_str("empty denominator"),
            Undefined::BelowThreshold { have, need } => {
                write!(f, "{have} gender-aligned dialogues, {need} required")
            }
        }
    }
}

/// `hits / total` as exact counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub total: u64,
}

impl Proportion {
    fn checked(hits: u64, total: u64) -> Measured {
        if total == 0 {
            Err(Undefined::EmptyDenominator)
        } else {
            Ok(Proportion { hits, total })
        }
    }

    pub fn value<T: Scalar>(&self) -> T {
        T::ratio(self.hits, self.total)
    }
}

/// A metric value or the reason it is undefined.
pub type Measured = std::result::Result<Proportion, Undefined>;

/// Which dialogues count towards `|D|` in the Bechdel score denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denominator {
    /// Every dialogue, including those between two unknown-gender speakers.
    #[default]
    All,
    ExcludeBothUnknown,
}

fn denominator(ds: &DialogueSet, policy: Denominator) -> u64 {
    let all = ds.counts.select(&Pattern::ANY);
    match policy {
        Denominator::All => all,
        Denominator::ExcludeBothUnknown => {
            all - ds
                .counts
                .select(&Pattern::new(Some(Gender::U), Some(Gender::U), None, None))
        }
    }
}

fn ff_without_male() -> Pattern {
    Pattern::new(Some(Gender::F), Some(Gender::F), Some(false), None)
}

fn mm_without_female() -> Pattern {
    Pattern::new(Some(Gender::M), Some(Gender::M), None, Some(false))
}

fn aligned(g: Gender) -> Pattern {
    Pattern::new(Some(g), Some(g), None, None)
}

fn involving(g: Gender) -> Pattern {
    Pattern::new(Some(g), None, None, None).unordered()
}

/// `B_F = |D(F,F,0,*)| / |D|` and `B_M = |D(M,M,*,0)| / |D|`.
pub fn bechdel_scores(ds: &DialogueSet) -> (Measured, Measured) {
    bechdel_scores_with(ds, Denominator::All)
}

pub fn bechdel_scores_with(ds: &DialogueSet, policy: Denominator) -> (Measured, Measured) {
    let n = denominator(ds, policy);
    (
        Proportion::checked(ds.counts.select(&ff_without_male()), n),
        Proportion::checked(ds.counts.select(&mm_without_female()), n),
    )
}

/// `X_F`: share of female-involving dialogues that are with a male.
/// `X_M`: share of male-involving dialogues that are male–male.
pub fn dialogue_imbalance(ds: &DialogueSet) -> (Measured, Measured) {
    let cross = Pattern::new(Some(Gender::F), Some(Gender::M), None, None).unordered();
    (
        Proportion::checked(ds.counts.select(&cross), ds.counts.select(&involving(Gender::F))),
        Proportion::checked(
            ds.counts.select(&aligned(Gender::M)),
            ds.counts.select(&involving(Gender::M)),
        ),
    )
}

/// `I_F` and `I_M`, each undefined when fewer than `min_aligned`
/// same-gender dialogues exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Independence {
    pub i_f: Measured,
    pub i_m: Measured,
}

impl Independence {
    /// `I_M − I_F` when both are defined.
    pub fn asymmetry<T: Scalar>(&self) -> Option<T> {
        match (self.i_f, self.i_m) {
            (Ok(f), Ok(m)) => Some(m.value::<T>() - f.value::<T>()),
            _ => None,
        }
    }
}

pub fn gender_independence(ds: &DialogueSet, min_aligned: u64) -> Independence {
    let one = |hits: Pattern, g: Gender| -> Measured {
        let total = ds.counts.select(&aligned(g));
        if total < min_aligned {
            return Err(Undefined::BelowThreshold {
                have: total,
                need: min_aligned,
            });
        }
        Proportion::checked(ds.counts.select(&hits), total)
    };
    Independence {
        i_f: one(ff_without_male(), Gender::F),
        i_m: one(mm_without_female(), Gender::M),
    }
}

/// One metric with its counts, value and Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub hits: u64,
    pub total: u64,
    pub value: Option<T>,
    pub ci_low: Option<T>,
    pub ci_high: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub undefined: Option<Undefined>,
}

impl<T: Real> Estimate<T> {
    fn from_measured(m: Measured, hits: u64, total: u64, level: T) -> Self {
        match m {
            Ok(p) => {
                let (lo, hi) = wilson_ci(p.hits, p.total, level).expect("valid proportion");
                Estimate {
                    hits: p.hits,
                    total: p.total,
                    value: Some(p.value()),
                    ci_low: Some(lo),
                    ci_high: Some(hi),
                    undefined: None,
                }
            }
            Err(why) => Estimate {
                hits,
                total,
                value: None,
                ci_low: None,
                ci_high: None,
                undefined: Some(why),
            },
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub min_aligned: u64,
    pub level: f64,
    pub denominator: Denominator,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            min_aligned: DEFAULT_MIN_ALIGNED,
            level: 0.95,
            denominator: Denominator::All,
        }
    }
}

/// Every metric for one unit of analysis (a movie, a state, a cohort).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<T> {
    pub unit: String,
    pub n_dialogues: u64,
    pub b_f: Estimate<T>,
    pub b_m: Estimate<T>,
    pub x_f: Estimate<T>,
    pub x_m: Estimate<T>,
    pub i_f: Estimate<T>,
    pub i_m: Estimate<T>,
    pub asymmetry: Option<T>,
    pub counts: BTreeMap<String, u64>,
}

impl<T: Real> MetricReport<T> {
    pub fn compute(unit: impl Into<String>, ds: &DialogueSet, opts: &ReportOptions) -> Self {
        let level = T::lit(opts.level);
        let c = &ds.counts;
        let n = denominator(ds, opts.denominator);
        let (bf, bm) = bechdel_scores_with(ds, opts.denominator);
        let (xf, xm) = dialogue_imbalance(ds);
        let ind = gender_independence(ds, opts.min_aligned);
        let ff = c.select(&aligned(Gender::F));
        let mm = c.select(&aligned(Gender::M));
        let ff0 = c.select(&ff_without_male());
        let mm0 = c.select(&mm_without_female());
        MetricReport {
            unit: unit.into(),
            n_dialogues: c.total(),
            b_f: Estimate::from_measured(bf, ff0, n, level),
            b_m: Estimate::from_measured(bm, mm0, n, level),
            x_f: Estimate::from_measured(
                xf,
                c.select(&Pattern::new(Some(Gender::F), Some(Gender::M), None, None).unordered()),
                c.select(&involving(Gender::F)),
                level,
            ),
            x_m: Estimate::from_measured(xm, mm, c.select(&involving(Gender::M)), level),
            i_f: Estimate::from_measured(ind.i_f, ff0, ff, level),
            i_m: Estimate::from_measured(ind.i_m, mm0, mm, level),
            asymmetry: ind.asymmetry::<T>(),
            counts: c.to_map(),
        }
    }
}
