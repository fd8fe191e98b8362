use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::ingest::{parse_cities, CityRecord, GeoTables};

const TOP_CITIES_CSV: &str = include_str!("../../data/top_cities.csv");

/// The 100 largest US cities shipped with the crate.
pub fn bundled_top_cities() -> Vec<CityRecord> {
    parse_cities(TOP_CITIES_CSV.as_bytes()).expect("bundled city table parses")
}

pub const US_STATES: &[(&str, &str)] = &[
    ("AL", "Alabama"), ("AK", "Alaska"), ("AZ", "Arizona"), ("AR", "Arkansas"),
    ("CA", "California"), ("CO", "Colorado"), ("CT", "Connecticut"), ("DE", "Delaware"),
    ("DC", "District of Columbia"), ("FL", "Florida"), ("GA", "Georgia"), ("HI", "Hawaii"),
    ("ID", "Idaho"), ("IL", "Illinois"), ("IN", "Indiana"), ("IA", "Iowa"), ("KS", "Kansas"),
    ("KY", "Kentucky"), ("LA", "Louisiana"), ("ME", "Maine"), ("MD", "Maryland"),
    ("MA", "Massachusetts"), ("MI", "Michigan"), ("MN", "Minnesota"), ("MS", "Mississippi"),
    ("MO", "Missouri"), ("MT", "Montana"), ("NE", "Nebraska"), ("NV", "Nevada"),
    ("NH", "New Hampshire"), ("NJ", "New Jersey"), ("NM", "New Mexico"), ("NY", "New York"),
    ("NC", "North Carolina"), ("ND", "North Dakota"), ("OH", "Ohio"), ("OK", "Oklahoma"),
    ("OR", "Oregon"), ("PA", "Pennsylvania"), ("RI", "Rhode Island"), ("SC", "South Carolina"),
    ("SD", "South Dakota"), ("TN", "Tennessee"), ("TX", "Texas"), ("UT", "Utah"),
    ("VT", "Vermont"), ("VA", "Virginia"), ("WA", "Washington"), ("WV", "West Virginia"),
    ("WI", "Wisconsin"), ("WY", "Wyoming"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Urbanity {
    Urban,
    Rural,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub state: Option<String>,
    pub urbanity: Urbanity,
}

impl Location {
    pub fn unknown() -> Self {
        Location {
            state: None,
            urbanity: Urbanity::Unknown,
        }
    }
}

struct Word {
    lower: String,
    /// Two uppercase ASCII letters in the source, a candidate state code.
    code_like: bool,
}

fn words(raw: &str) -> Vec<Word> {
    raw.unicode_words()
        .flat_map(|w| w.split(['-', '.']))
        .filter(|w| !w.is_empty())
        .map(|w| Word {
            lower: w.to_lowercase(),
            code_like: w.len() == 2 && w.chars().all(|c| c.is_ascii_uppercase()),
        })
        .collect()
}

fn pattern(s: &str) -> Vec<String> {
    words(s).into_iter().map(|w| w.lower).collect()
}

fn find_all(hay: &[Word], needle: &[String]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    (0..=hay.len() - needle.len())
        .filter(|&i| needle.iter().zip(&hay[i..]).all(|(n, w)| *n == w.lower))
        .collect()
}

#[derive(Debug, Clone)]
struct Span {
    state: String,
    start: usize,
    len: usize,
}

impl Span {
    fn overlaps(&self, start: usize, len: usize) -> bool {
        self.start < start + len && start < self.start + self.len
    }
}

struct CityCandidate<'a> {
    pattern: Vec<String>,
    state: &'a str,
    urban: bool,
}

/// Resolves a free-text location to a state and an urban/rural class.
///
/// City names (the top-city list plus aliases) are matched longest-first as
/// whole words. A city is accepted when its state is unambiguous or confirmed
/// by a state name/code elsewhere in the text; the user is then urban if the
/// city is a top city. Otherwise a bare state mention makes the user rural.
/// State codes only count when written in uppercase.
pub fn locate_user(location_raw: &str, geo: &GeoTables) -> Location {
    let hay = words(location_raw);
    if hay.is_empty() {
        return Location::unknown();
    }

    let mut codes: BTreeSet<&str> = US_STATES.iter().map(|(c, _)| *c).collect();
    codes.extend(geo.states.iter().map(|s| s.state.as_str()));

    let mut state_spans: Vec<Span> = Vec::new();
    for (code, name) in US_STATES {
        for start in find_all(&hay, &pattern(name)) {
            state_spans.push(Span {
                state: code.to_string(),
                start,
                len: pattern(name).len(),
            });
        }
    }
    for (i, w) in hay.iter().enumerate() {
        let upper = w.lower.to_ascii_uppercase();
        if w.code_like && codes.contains(upper.as_str()) {
            state_spans.push(Span {
                state: upper,
                start: i,
                len: 1,
            });
        }
    }

    let top: BTreeSet<(Vec<String>, &str)> = geo
        .top_cities
        .iter()
        .map(|c| (pattern(&c.city), c.state.as_str()))
        .collect();
    let mut candidates: Vec<CityCandidate> = geo
        .top_cities
        .iter()
        .map(|c| CityCandidate {
            pattern: pattern(&c.city),
            state: &c.state,
            urban: true,
        })
        .collect();
    candidates.extend(geo.aliases.iter().map(|a| CityCandidate {
        pattern: pattern(&a.alias),
        state: &a.state,
        urban: top.contains(&(pattern(&a.city), a.state.as_str())),
    }));

    // (len, start, pattern) of every city hit, longest then leftmost first
    let mut hits: Vec<(usize, usize, &Vec<String>)> = candidates
        .iter()
        .flat_map(|c| find_all(&hay, &c.pattern).into_iter().map(move |s| (c.pattern.len(), s, &c.pattern)))
        .collect();
    hits.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
    hits.dedup();

    for (len, start, pat) in hits {
        let options: Vec<&CityCandidate> = candidates.iter().filter(|c| &c.pattern == pat).collect();
        let evidence: BTreeSet<&str> = state_spans
            .iter()
            .filter(|s| !s.overlaps(start, len))
            .map(|s| s.state.as_str())
            .collect();
        let chosen: Vec<&&CityCandidate> = if evidence.is_empty() {
            options.iter().collect()
        } else {
            options.iter().filter(|c| evidence.contains(c.state)).collect()
        };
        let states: BTreeSet<&str> = chosen.iter().map(|c| c.state).collect();
        if states.len() == 1 {
            let state = states.into_iter().next().unwrap().to_string();
            let urban = chosen.iter().any(|c| c.urban);
            return Location {
                state: Some(state),
                urbanity: if urban { Urbanity::Urban } else { Urbanity::Rural },
            };
        }
    }

    state_spans.sort_by(|a, b| b.len.cmp(&a.len).then(a.start.cmp(&b.start)));
    match state_spans.first() {
        Some(s) => Location {
            state: Some(s.state.clone()),
            urbanity: Urbanity::Rural,
        },
        None => Location::unknown(),
    }
}
