use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Gender;
use crate::error::{Error, Result};
use crate::ingest::NameCount;

/// Default dominance ratio: a name belongs to a gender when it is used for it
/// at least five times as often as for the other.
pub const DEFAULT_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assignment {
    M,
    F,
    Dropped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexEntry {
    pub male_count: u64,
    pub female_count: u64,
    pub assigned: Assignment,
}

impl LexEntry {
    fn classify(male_count: u64, female_count: u64, ratio: f64) -> Self {
        let (m, f) = (male_count as f64, female_count as f64);
        let assigned = if male_count > 0 && m >= ratio * f {
            Assignment::M
        } else if female_count > 0 && f >= ratio * m {
            Assignment::F
        } else {
            Assignment::Dropped
        };
        LexEntry {
            male_count,
            female_count,
            assigned,
        }
    }
}

/// Lowercase first name → usage counts and assigned gender.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenderLexicon {
    entries: BTreeMap<String, LexEntry>,
}

impl GenderLexicon {
    pub fn entry(&self, token: &str) -> Option<&LexEntry> {
        self.entries.get(token)
    }

    /// Gender assigned to `token`; `U` when absent or dropped.
    pub fn lookup(&self, token: &str) -> Gender {
        match self.entries.get(token).map(|e| e.assigned) {
            Some(Assignment::M) => Gender::M,
            Some(Assignment::F) => Gender::F,
            _ => Gender::U,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LexEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// The lexicon with male and female columns exchanged.
    pub fn swapped(&self) -> GenderLexicon {
        let entries = self
            .entries
            .iter()
            .map(|(k, e)| {
                let assigned = match e.assigned {
                    Assignment::M => Assignment::F,
                    Assignment::F => Assignment::M,
                    Assignment::Dropped => Assignment::Dropped,
                };
                (
                    k.clone(),
                    LexEntry {
                        male_count: e.female_count,
                        female_count: e.male_count,
                        assigned,
                    },
                )
            })
            .collect();
        GenderLexicon { entries }
    }
}

/// Aggregates name counts per lowercase name, removes stoplisted tokens
/// (dictionary words, toponyms) and assigns each name by the dominance
/// `ratio`. Names that dominate in neither direction are kept as `Dropped`.
pub fn build_lexicon(
    records: &[NameCount],
    stoplists: &[BTreeSet<String>],
    ratio: f64,
) -> Result<GenderLexicon> {
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lexicon ratio must be > 1, got {ratio}"
        )));
    }
    let mut totals: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for rec in records {
        let name = rec.name.trim().to_lowercase();
        if name.is_empty() || stoplists.iter().any(|s| s.contains(&name)) {
            continue;
        }
        let slot = totals.entry(name).or_default();
        match rec.gender {
            Gender::M => slot.0 += rec.count,
            Gender::F => slot.1 += rec.count,
            Gender::U => {}
        }
    }
    let entries = totals
        .into_iter()
        .map(|(name, (m, f))| (name, LexEntry::classify(m, f, ratio)))
        .collect();
    Ok(GenderLexicon { entries })
}

fn first_name_token(full_name: &str) -> Option<String> {
    let first = full_name.split_whitespace().next()?;
    let trimmed = first.trim_matches(|c: char| !c.is_alphanumeric());
    let head = trimmed.split('-').next().unwrap_or(trimmed);
    let token: String = head
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect();
    (!token.is_empty()).then_some(token)
}

/// Gender of the first whitespace-delimited token of `full_name`.
pub fn infer_gender(full_name: &str, lex: &GenderLexicon) -> Gender {
    first_name_token(full_name).map_or(Gender::U, |t| lex.lookup(&t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nc(name: &str, g: Gender, count: u64) -> NameCount {
        NameCount {
            name: name.into(),
            gender: g,
            count,
        }
    }

    fn lex(records: &[NameCount]) -> GenderLexicon {
        build_lexicon(records, &[], DEFAULT_RATIO).unwrap()
    }

    #[test]
    fn dominant_female_name() {
        let l = lex(&[nc("mary", Gender::F, 1000), nc("mary", Gender::M, 10)]);
        assert_eq!(l.entry("mary").unwrap().assigned, Assignment::F);
        assert_eq!(l.lookup("mary"), Gender::F);
    }

    #[test]
    fn ambiguous_name_dropped() {
        let l = lex(&[nc("jordan", Gender::M, 600), nc("jordan", Gender::F, 400)]);
        assert_eq!(l.entry("jordan").unwrap().assigned, Assignment::Dropped);
        assert_eq!(l.lookup("jordan"), Gender::U);
    }

    #[test]
    fn ratio_boundary_is_inclusive() {
        let l = lex(&[nc("kim", Gender::F, 50), nc("kim", Gender::M, 10)]);
        assert_eq!(l.lookup("kim"), Gender::F);
        let l = lex(&[nc("kim", Gender::F, 49), nc("kim", Gender::M, 10)]);
        assert_eq!(l.lookup("kim"), Gender::U);
    }

    #[test]
    fn stoplisted_word_absent() {
        let stop: BTreeSet<String> = ["faith".to_string()].into();
        let l = build_lexicon(&[nc("Faith", Gender::F, 5000)], &[stop], 5.0).unwrap();
        assert!(l.entry("faith").is_none());
    }

    #[test]
    fn ratio_must_exceed_one() {
        assert!(build_lexicon(&[], &[], 1.0).is_err());
        assert!(build_lexicon(&[], &[], f64::NAN).is_err());
    }

    #[test]
    fn infer_from_first_token() {
        let l = lex(&[nc("mary", Gender::F, 100), nc("ann", Gender::F, 100), nc("smith", Gender::M, 100)]);
        assert_eq!(infer_gender("Mary Ann Smith", &l), Gender::F);
        assert_eq!(infer_gender("", &l), Gender::U);
        assert_eq!(infer_gender("   ", &l), Gender::U);
        assert_eq!(infer_gender("Snoop Dogg", &l), Gender::U);
        assert_eq!(infer_gender("\"MARY\" x", &l), Gender::F);
        assert_eq!(infer_gender("Mary-Kate O", &l), Gender::F);
    }

    #[test]
    fn swap_exchanges_columns() {
        let l = lex(&[nc("mary", Gender::F, 100), nc("john", Gender::M, 100)]);
        let s = l.swapped();
        assert_eq!(s.lookup("mary"), Gender::M);
        assert_eq!(s.entry("john").unwrap().female_count, 100);
    }
}
