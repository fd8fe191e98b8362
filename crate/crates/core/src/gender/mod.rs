//! Gender inference from names, gender-reference detection in text, and
//! profile attribute extraction (parenthood/student flags, location).

pub mod lexicon;
pub mod location;
pub mod profile;
pub mod references;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

pub use lexicon::{build_lexicon, infer_gender, Assignment, GenderLexicon, LexEntry};
pub use location::{locate_user, Location, Urbanity};
pub use profile::{profile_flags, KeywordSets, ProfileFlags};
pub use references::{detect_references, ReferenceLexicon, References};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    M,
    F,
    U,
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::M, Gender::F, Gender::U];

    /// Accepts `M`/`F`/`U`, the full words, and the `actor`/`actress` labels
    /// used in cast lists. Empty input is `U`.
    pub fn parse(s: &str) -> Option<Gender> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m" | "male" | "man" | "actor" => Some(Gender::M),
            "f" | "female" | "woman" | "actress" => Some(Gender::F),
            "u" | "unknown" | "" => Some(Gender::U),
            _ => None,
        }
    }

    /// M↔F, U fixed.
    pub fn swapped(self) -> Gender {
        match self {
            Gender::M => Gender::F,
            Gender::F => Gender::M,
            Gender::U => Gender::U,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Gender::M => 0,
            Gender::F => 1,
            Gender::U => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::M => "M",
            Gender::F => "F",
            Gender::U => "U",
        }
    }
}

impl std::fmt::Display for Gender {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lowercased unicode words with possessive suffixes removed (`her's` → `her`).
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.unicode_words().map(|w| {
        let lower = w.to_lowercase();
        for suffix in ["'s", "\u{2019}s"] {
            if let Some(stem) = lower.strip_suffix(suffix) {
                if !stem.is_empty() {
                    return stem.to_string();
                }
            }
        }
        lower
    })
}
