use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize;
use crate::error::Result;
use crate::ingest::read_token_set;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileFlags {
    pub mother: bool,
    pub father: bool,
    pub student: bool,
}

/// Keyword sets for the profile flags. Entries may be single words or
/// space-separated phrases; matching is on whole tokens, case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSets {
    pub mother: BTreeSet<String>,
    pub father: BTreeSet<String>,
    pub student: BTreeSet<String>,
}

fn set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|s| s.to_string()).collect()
}

impl Default for KeywordSets {
    fn default() -> Self {
        KeywordSets {
            mother: set(&[
                "mother", "mom", "mommy", "momma", "mama", "mum", "mummy", "mother of",
                "proud mom", "wife and mother",
            ]),
            father: set(&[
                "father", "dad", "daddy", "papa", "father of", "proud dad", "husband and father",
            ]),
            student: set(&[
                "student", "students", "college", "university", "studying", "undergrad",
                "undergraduate", "grad student", "phd student", "freshman", "sophomore",
                "alumnus", "major", "majoring",
            ]),
        }
    }
}

impl KeywordSets {
    /// Loads any of the three sets from one-token-per-line files; missing
    /// paths keep the defaults.
    pub fn from_files(
        mother: Option<&Path>,
        father: Option<&Path>,
        student: Option<&Path>,
    ) -> Result<Self> {
        let mut sets = KeywordSets::default();
        if let Some(p) = mother {
            sets.mother = read_token_set(p)?;
        }
        if let Some(p) = father {
            sets.father = read_token_set(p)?;
        }
        if let Some(p) = student {
            sets.student = read_token_set(p)?;
        }
        Ok(sets)
    }
}

fn padded_tokens(text: &str) -> String {
    let mut out = String::from(" ");
    for t in tokenize(text) {
        out.push_str(&t);
        out.push(' ');
    }
    out
}

fn any_keyword(haystack: &str, words: &BTreeSet<String>) -> bool {
    words.iter().any(|w| {
        let needle = padded_tokens(w);
        !needle.trim().is_empty() && haystack.contains(&needle)
    })
}

pub fn profile_flags(bio: &str, keywords: &KeywordSets) -> ProfileFlags {
    let hay = padded_tokens(bio);
    ProfileFlags {
        mother: any_keyword(&hay, &keywords.mother),
        father: any_keyword(&hay, &keywords.father),
        student: any_keyword(&hay, &keywords.student),
    }
}
