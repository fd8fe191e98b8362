use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{tokenize, Gender, GenderLexicon};
use crate::error::{Error, Result};

const MALE_WORDS: &[&str] = &[
    "he", "him", "his", "himself", "man", "men", "boy", "boys", "guy", "guys", "dude", "dudes",
    "bro", "bros", "brother", "brothers", "father", "fathers", "dad", "daddy", "son", "sons",
    "husband", "boyfriend", "mr", "sir", "king", "uncle", "nephew", "grandpa", "grandfather",
    "gentleman", "gentlemen", "lad", "fella", "hubby",
];

const FEMALE_WORDS: &[&str] = &[
    "she", "her", "hers", "herself", "woman", "women", "girl", "girls", "gal", "gals", "lady",
    "ladies", "sister", "sisters", "mother", "mothers", "mom", "mommy", "mum", "daughter",
    "daughters", "wife", "girlfriend", "mrs", "ms", "miss", "madam", "queen", "aunt", "niece",
    "grandma", "grandmother", "sis", "wifey",
];

/// Name lexicon plus closed-class gendered words used to flag references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLexicon {
    names: GenderLexicon,
    male_words: BTreeSet<String>,
    female_words: BTreeSet<String>,
}

impl ReferenceLexicon {
    /// Fails when a word appears in both gendered word sets.
    pub fn new(
        names: GenderLexicon,
        male_words: BTreeSet<String>,
        female_words: BTreeSet<String>,
    ) -> Result<Self> {
        let male_words: BTreeSet<String> = male_words.into_iter().map(|w| w.to_lowercase()).collect();
        let female_words: BTreeSet<String> =
            female_words.into_iter().map(|w| w.to_lowercase()).collect();
        let shared: Vec<String> = male_words.intersection(&female_words).cloned().collect();
        if !shared.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "gendered word sets overlap: {}",
                shared.join(", ")
            )));
        }
        Ok(ReferenceLexicon {
            names,
            male_words,
            female_words,
        })
    }

    /// Names plus the shipped pronoun and common-word sets.
    pub fn with_default_words(names: GenderLexicon) -> Self {
        Self::new(names, default_male_words(), default_female_words())
            .expect("shipped word sets are disjoint")
    }

    pub fn names(&self) -> &GenderLexicon {
        &self.names
    }

    pub fn male_words(&self) -> &BTreeSet<String> {
        &self.male_words
    }

    pub fn female_words(&self) -> &BTreeSet<String> {
        &self.female_words
    }

    /// Gender signalled by one lowercase token. Word sets take precedence
    /// over the name lexicon.
    pub fn classify_token(&self, token: &str) -> Gender {
        if self.male_words.contains(token) {
            Gender::M
        } else if self.female_words.contains(token) {
            Gender::F
        } else {
            self.names.lookup(token)
        }
    }

    pub fn swapped(&self) -> ReferenceLexicon {
        ReferenceLexicon {
            names: self.names.swapped(),
            male_words: self.female_words.clone(),
            female_words: self.male_words.clone(),
        }
    }
}

pub fn default_male_words() -> BTreeSet<String> {
    MALE_WORDS.iter().map(|s| s.to_string()).collect()
}

pub fn default_female_words() -> BTreeSet<String> {
    FEMALE_WORDS.iter().map(|s| s.to_string()).collect()
}

/// Presence of male (`m`) and female (`f`) references in a text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct References {
    pub m: bool,
    pub f: bool,
}

impl References {
    pub fn swapped(self) -> References {
        References { m: self.f, f: self.m }
    }
}

pub fn detect_references(text: &str, lex: &ReferenceLexicon) -> References {
    let mut refs = References::default();
    for tok in tokenize(text) {
        match lex.classify_token(&tok) {
            Gender::M => refs.m = true,
            Gender::F => refs.f = true,
            Gender::U => {}
        }
        if refs.m && refs.f {
            break;
        }
    }
    refs
}
