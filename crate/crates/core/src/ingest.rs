//! Readers for every on-disk input and corpus-level filters.
//!
//! Message streams are JSON lines; everything else is headed CSV. Malformed
//! message lines are skipped and counted, CSV tables are validated strictly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::gender::Gender;
use crate::metrics::Dialogue;

/// One timestamped utterance in a message stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub msg_id: String,
    pub author_id: String,
    /// Epoch seconds, UTC.
    pub timestamp: i64,
    pub text: String,
    #[serde(default)]
    pub mentioned_ids: Vec<String>,
}

impl Message {
    fn check(&self) -> std::result::Result<(), String> {
        if self.timestamp < 0 {
            return Err(format!("negative timestamp {}", self.timestamp));
        }
        if self.author_id.is_empty() {
            return Err("empty author_id".into());
        }
        Ok(())
    }

    /// Whether this message mentions `user` (self-mentions never count).
    pub fn mentions(&self, user: &str) -> bool {
        user != self.author_id && self.mentioned_ids.iter().any(|m| m == user)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    #[serde(default)]
    pub full_name: String,
    #[serde(default)]
    pub bio: String,
    #[serde(default)]
    pub location_raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovieRecord {
    pub movie_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub bechdel_b: Option<u8>,
    #[serde(default, deserialize_with = "flexible_bool")]
    pub disputed: bool,
    #[serde(default)]
    pub views: Option<u64>,
    #[serde(default)]
    pub likes: Option<u64>,
    #[serde(default)]
    pub dislikes: Option<u64>,
}

impl MovieRecord {
    /// True when the movie has an undisputed test result of 3.
    pub fn passes(&self) -> Option<bool> {
        match (self.bechdel_b, self.disputed) {
            (Some(b), false) => Some(b == 3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareRecord {
    pub user_id: String,
    pub movie_id: String,
}

/// Per-state economic and geographic covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub state: String,
    pub avg_income: f64,
    pub gini: f64,
    /// Seconds north of the Equator.
    pub largest_city_latitude: i64,
    /// Seconds west of Greenwich.
    pub largest_city_longitude: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CityRecord {
    pub city: String,
    pub state: String,
}

/// Alternative spelling of a city, e.g. `NYC` for `New York`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CityAlias {
    pub alias: String,
    pub city: String,
    pub state: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeoTables {
    pub top_cities: Vec<CityRecord>,
    pub aliases: Vec<CityAlias>,
    pub states: Vec<StateRecord>,
}

impl GeoTables {
    pub fn state(&self, code: &str) -> Option<&StateRecord> {
        self.states.iter().find(|s| s.state == code)
    }
}

/// Records read from a file plus the number of malformed lines skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub skipped: usize,
}

/// Name-frequency row: `name,gender,count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameCount {
    pub name: String,
    pub gender: Gender,
    pub count: u64,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn flexible_bool<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<bool, D::Error> {
    let raw = String::deserialize(de)?;
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" | "n" => Ok(false),
        "1" | "true" | "yes" | "y" => Ok(true),
        other => Err(serde::de::Error::custom(format!("not a boolean: {other:?}"))),
    }
}

/// Parses line-delimited message records. Blank lines are ignored; lines that
/// fail to decode or violate the message invariants are skipped and counted.
pub fn parse_messages<R: BufRead>(reader: R) -> std::io::Result<Loaded<Message>> {
    let mut records = Vec::new();
    let mut skipped = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Message>(&line).map_err(|e| e.to_string()) {
            Ok(msg) => match msg.check() {
                Ok(()) => records.push(msg),
                Err(why) => {
                    log::warn!("message line {}: {why}", lineno + 1);
                    skipped += 1;
                }
            },
            Err(why) => {
                log::warn!("message line {}: {why}", lineno + 1);
                skipped += 1;
            }
        }
    }
    Ok(Loaded { records, skipped })
}

pub fn read_messages(path: impl AsRef<Path>) -> Result<Loaded<Message>> {
    let path = path.as_ref();
    let file = open(path)?;
    parse_messages(BufReader::with_capacity(1 << 20, file)).map_err(|e| Error::io(path, e))
}

/// Unordered pair of distinct user ids, stored in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserPair {
    first: String,
    second: String,
}

impl UserPair {
    /// `None` for a self-pair.
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Option<Self> {
        let (a, b) = (a.into(), b.into());
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(UserPair { first: a, second: b }),
            std::cmp::Ordering::Greater => Some(UserPair { first: b, second: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> &str {
        &self.first
    }

    pub fn second(&self) -> &str {
        &self.second
    }

    pub fn contains(&self, user: &str) -> bool {
        self.first == user || self.second == user
    }

    /// The member that is not `user`.
    pub fn other(&self, user: &str) -> Option<&str> {
        if self.first == user {
            Some(&self.second)
        } else if self.second == user {
            Some(&self.first)
        } else {
            None
        }
    }
}

impl std::fmt::Display for UserPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}|{}", self.first, self.second)
    }
}

/// How mention counts in the two directions combine into the interaction threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairRule {
    /// `a→b + b→a ≥ min_mentions`.
    #[default]
    Sum,
    /// As `Sum`, and additionally each direction has at least one mention.
    Reciprocal,
}

/// Pairs of users that exchanged at least `min_mentions` mentions.
///
/// A message contributes at most one mention per mentioned user; self-mentions
/// are ignored.
pub fn filter_interacting_pairs(
    messages: &[Message],
    min_mentions: u64,
    rule: PairRule,
) -> BTreeSet<UserPair> {
    let mut directed: HashMap<(&str, &str), u64> = HashMap::new();
    for msg in messages {
        let mut seen: Vec<&str> = Vec::with_capacity(msg.mentioned_ids.len());
        for m in &msg.mentioned_ids {
            if m == &msg.author_id || m.is_empty() || seen.contains(&m.as_str()) {
                continue;
            }
            seen.push(m);
            *directed.entry((msg.author_id.as_str(), m.as_str())).or_default() += 1;
        }
    }
    let mut out = BTreeSet::new();
    for (&(a, b), &ab) in &directed {
        if a > b && directed.contains_key(&(b, a)) {
            // counted from the other direction
            continue;
        }
        let ba = directed.get(&(b, a)).copied().unwrap_or(0);
        let keep = match rule {
            PairRule::Sum => ab + ba >= min_mentions,
            PairRule::Reciprocal => ab > 0 && ba > 0 && ab + ba >= min_mentions,
        };
        if keep {
            out.extend(UserPair::new(a, b));
        }
    }
    out
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn parse_csv<T, R>(reader: R, kind: &'static str) -> Result<Vec<T>>
where
    T: for<'de> Deserialize<'de>,
    R: Read,
{
    let mut rdr = csv_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<T>().enumerate() {
        let rec = row.map_err(|e| Error::InvalidRecord {
            kind,
            row: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn reject_duplicates<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dups.insert(id.to_string());
        }
    }
    if dups.is_empty() {
        Ok(())
    } else {
        Err(Error::DuplicateIds {
            kind,
            ids: dups.into_iter().collect(),
        })
    }
}

pub fn parse_profiles<R: Read>(reader: R) -> Result<Vec<UserProfile>> {
    let profiles: Vec<UserProfile> = parse_csv(reader, "profile")?;
    for (i, p) in profiles.iter().enumerate() {
        if p.user_id.is_empty() {
            return Err(Error::InvalidRecord {
                kind: "profile",
                row: i + 1,
                message: "empty user_id".into(),
            });
        }
    }
    reject_duplicates("user", profiles.iter().map(|p| p.user_id.as_str()))?;
    Ok(profiles)
}

pub fn read_profiles(path: impl AsRef<Path>) -> Result<Vec<UserProfile>> {
    parse_profiles(open(path.as_ref())?)
}

pub fn parse_movies<R: Read>(reader: R) -> Result<Vec<MovieRecord>> {
    let movies: Vec<MovieRecord> = parse_csv(reader, "movie")?;
    for (i, m) in movies.iter().enumerate() {
        if let Some(b) = m.bechdel_b {
            if b > 3 {
                return Err(Error::InvalidRecord {
                    kind: "movie",
                    row: i + 1,
                    message: format!("bechdel_b = {b} outside 0..=3"),
                });
            }
        }
        if m.movie_id.is_empty() {
            return Err(Error::InvalidRecord {
                kind: "movie",
                row: i + 1,
                message: "empty movie_id".into(),
            });
        }
    }
    reject_duplicates("movie", movies.iter().map(|m| m.movie_id.as_str()))?;
    Ok(movies)
}

pub fn read_movies(path: impl AsRef<Path>) -> Result<Vec<MovieRecord>> {
    parse_movies(open(path.as_ref())?)
}

pub fn parse_shares<R: Read>(reader: R) -> Result<Vec<ShareRecord>> {
    parse_csv(reader, "share")
}

pub fn read_shares(path: impl AsRef<Path>) -> Result<Vec<ShareRecord>> {
    parse_shares(open(path.as_ref())?)
}

/// Shares whose user or movie id does not resolve. Reported, never fatal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DanglingShares {
    pub unknown_users: usize,
    pub unknown_movies: usize,
}

pub fn dangling_shares(
    shares: &[ShareRecord],
    profiles: &[UserProfile],
    movies: &[MovieRecord],
) -> DanglingShares {
    let users: BTreeSet<&str> = profiles.iter().map(|p| p.user_id.as_str()).collect();
    let films: BTreeSet<&str> = movies.iter().map(|m| m.movie_id.as_str()).collect();
    DanglingShares {
        unknown_users: shares.iter().filter(|s| !users.contains(s.user_id.as_str())).count(),
        unknown_movies: shares.iter().filter(|s| !films.contains(s.movie_id.as_str())).count(),
    }
}

const MAX_LATITUDE_SECONDS: i64 = 90 * 3600;
const MAX_LONGITUDE_SECONDS: i64 = 180 * 3600;

pub fn parse_states<R: Read>(reader: R) -> Result<Vec<StateRecord>> {
    let states: Vec<StateRecord> = parse_csv(reader, "state")?;
    for (i, s) in states.iter().enumerate() {
        let bad = |message: String| Error::InvalidRecord {
            kind: "state",
            row: i + 1,
            message,
        };
        if s.state.is_empty() {
            return Err(bad("empty state code".into()));
        }
        if !(0.0..=1.0).contains(&s.gini) {
            return Err(bad(format!("gini {} outside [0, 1]", s.gini)));
        }
        if !(0..=MAX_LATITUDE_SECONDS).contains(&s.largest_city_latitude) {
            return Err(bad(format!(
                "latitude {} s outside [0, {MAX_LATITUDE_SECONDS}]",
                s.largest_city_latitude
            )));
        }
        if s.largest_city_longitude.abs() > MAX_LONGITUDE_SECONDS {
            return Err(bad(format!("longitude {} s out of range", s.largest_city_longitude)));
        }
    }
    reject_duplicates("state", states.iter().map(|s| s.state.as_str()))?;
    Ok(states)
}

pub fn parse_cities<R: Read>(reader: R) -> Result<Vec<CityRecord>> {
    parse_csv(reader, "city")
}

pub fn parse_aliases<R: Read>(reader: R) -> Result<Vec<CityAlias>> {
    parse_csv(reader, "city alias")
}

/// Loads the geographic tables. The states table is required; the city list
/// defaults to the bundled 100 largest US cities and aliases are optional.
pub fn read_geo(
    states: impl AsRef<Path>,
    cities: Option<&Path>,
    aliases: Option<&Path>,
) -> Result<GeoTables> {
    let states = parse_states(open(states.as_ref())?)?;
    let top_cities = match cities {
        Some(p) => parse_cities(open(p)?)?,
        None => crate::gender::location::bundled_top_cities(),
    };
    let aliases = match aliases {
        Some(p) => parse_aliases(open(p)?)?,
        None => Vec::new(),
    };
    Ok(GeoTables {
        top_cities,
        aliases,
        states,
    })
}

#[derive(Debug, Deserialize)]
struct CastRow {
    movie_id: String,
    character_cue: String,
    gender: String,
}

/// Cast genders keyed by movie id, then by normalized character cue.
pub type CastTable = BTreeMap<String, BTreeMap<String, Gender>>;

pub fn parse_cast<R: Read>(reader: R) -> Result<CastTable> {
    let rows: Vec<CastRow> = parse_csv(reader, "cast")?;
    let mut table = CastTable::new();
    let mut dups = BTreeSet::new();
    for (i, row) in rows.into_iter().enumerate() {
        let gender = Gender::parse(&row.gender).ok_or_else(|| Error::InvalidRecord {
            kind: "cast",
            row: i + 1,
            message: format!("unknown gender {:?}", row.gender),
        })?;
        let cue = crate::screenplay::normalize_cue(&row.character_cue);
        if cue.is_empty() {
            return Err(Error::InvalidRecord {
                kind: "cast",
                row: i + 1,
                message: "empty character cue".into(),
            });
        }
        let movie = table.entry(row.movie_id.clone()).or_default();
        if movie.insert(cue.clone(), gender).is_some() {
            dups.insert(format!("{}/{}", row.movie_id, cue));
        }
    }
    if !dups.is_empty() {
        return Err(Error::DuplicateIds {
            kind: "cast",
            ids: dups.into_iter().collect(),
        });
    }
    Ok(table)
}

pub fn read_cast(path: impl AsRef<Path>) -> Result<CastTable> {
    parse_cast(open(path.as_ref())?)
}

/// Parses `name,gender,count` rows. A header row is optional (the public
/// baby-name files have none). Counts for repeated `(name, gender)` rows are
/// summed.
pub fn parse_name_counts<R: Read>(reader: R) -> Result<Vec<NameCount>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut totals: BTreeMap<(String, Gender), u64> = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::InvalidRecord {
            kind: "name",
            row: i + 1,
            message: e.to_string(),
        })?;
        if row.len() < 3 {
            return Err(Error::InvalidRecord {
                kind: "name",
                row: i + 1,
                message: format!("expected 3 columns, found {}", row.len()),
            });
        }
        let count = match row[2].parse::<u64>() {
            Ok(c) => c,
            Err(_) if i == 0 => continue, // header
            Err(e) => {
                return Err(Error::InvalidRecord {
                    kind: "name",
                    row: i + 1,
                    message: format!("count: {e}"),
                })
            }
        };
        let gender = match Gender::parse(&row[1]) {
            Some(g @ (Gender::M | Gender::F)) => g,
            _ => {
                return Err(Error::InvalidRecord {
                    kind: "name",
                    row: i + 1,
                    message: format!("gender must be M or F, got {:?}", &row[1]),
                })
            }
        };
        *totals.entry((row[0].to_lowercase(), gender)).or_default() += count;
    }
    Ok(totals
        .into_iter()
        .map(|((name, gender), count)| NameCount { name, gender, count })
        .collect())
}

/// Reads one name file, or every `.txt`/`.csv` file of a directory (one file
/// per year in the public data), aggregating counts across them.
pub fn read_name_counts(path: impl AsRef<Path>) -> Result<Vec<NameCount>> {
    let path = path.as_ref();
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("txt") | Some("csv")
                )
            })
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut totals: BTreeMap<(String, Gender), u64> = BTreeMap::new();
    for f in files {
        for nc in parse_name_counts(open(&f)?)? {
            *totals.entry((nc.name, nc.gender)).or_default() += nc.count;
        }
    }
    Ok(totals
        .into_iter()
        .map(|((name, gender), count)| NameCount { name, gender, count })
        .collect())
}

/// One lowercase token per line; blank lines and `#` comments ignored.
pub fn parse_token_set<R: BufRead>(reader: R) -> std::io::Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.insert(t.to_lowercase());
    }
    Ok(out)
}

pub fn read_token_set(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    parse_token_set(BufReader::new(open(path)?)).map_err(|e| Error::io(path, e))
}

/// Parses a dialogue file (one JSON dialogue per line) as written by
/// [`crate::report::write_dialogues`]. Malformed lines are skipped and counted.
pub fn parse_dialogues<R: BufRead>(reader: R) -> std::io::Result<Loaded<Dialogue>> {
    let mut records = Vec::new();
    let mut skipped = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Dialogue>(&line) {
            Ok(d) => records.push(d),
            Err(e) => {
                log::warn!("dialogue line skipped: {e}");
                skipped += 1;
            }
        }
    }
    Ok(Loaded { records, skipped })
}

pub fn read_dialogues(path: impl AsRef<Path>) -> Result<Loaded<Dialogue>> {
    let path = path.as_ref();
    parse_dialogues(BufReader::new(open(path)?)).map_err(|e| Error::io(path, e))
}
