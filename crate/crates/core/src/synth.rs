//! Deterministic synthetic corpora: bursty pair message streams, profiles,
//! name counts, geography, movies, shares and screenplays, all in the file
//! formats the readers accept.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gender::Gender;
use crate::ingest::{CastTable, Message, MovieRecord, NameCount, ShareRecord, StateRecord, UserProfile};
use crate::report::write_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    pub n_messages: usize,
    pub n_scripts: usize,
    pub n_movies: usize,
    pub n_shares: usize,
    /// Exponent of the intra-dialogue gap distribution.
    pub alpha: f64,
    /// Longest intra-dialogue gap, seconds.
    pub tau: f64,
    /// Partners per user.
    pub degree: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            n_users: 20,
            n_messages: 5_000,
            n_scripts: 3,
            n_movies: 12,
            n_shares: 60,
            alpha: 1.5,
            tau: 32_768.0,
            degree: 3,
        }
    }
}

const FEMALE_NAMES: &[&str] = &["mary", "linda", "susan", "karen", "nancy", "lisa", "emma", "olivia", "sophia", "grace"];
const MALE_NAMES: &[&str] = &["james", "john", "robert", "michael", "david", "william", "thomas", "daniel", "paul", "mark"];
const AMBIGUOUS_NAMES: &[&str] = &["jordan", "taylor", "casey"];
const ARTIST_NAMES: &[&str] = &["snoop", "zorro", "moonbeam"];
const SURNAMES: &[&str] = &["smith", "jones", "brown", "miller", "davis", "garcia", "wilson", "moore"];

const NEUTRAL: &[&str] = &[
    "the", "game", "was", "great", "tonight", "see", "you", "at", "lunch", "new", "album", "out", "now", "what",
    "time", "is", "it", "lol", "thanks", "so", "much", "coffee", "later", "weekend", "plans", "movie", "trailer",
    "looks", "good", "rain", "again", "work", "tomorrow", "class", "late", "bus", "happy", "birthday", "ok", "sure",
];
const MALE_WORDS: &[&str] = &["he", "him", "his", "guy", "man", "brother", "dad"];
const FEMALE_WORDS: &[&str] = &["she", "her", "girl", "woman", "sister", "mom"];

const BIOS: &[&str] = &[
    "proud dad of two",
    "mom of three and coffee addict",
    "CS student at state university",
    "music lover",
    "",
    "runner, reader, dreamer",
    "father, husband, fan",
    "college sophomore studying biology",
    "just here for the memes",
];

const LOCATIONS: &[&str] = &[
    "Detroit, MI",
    "Ann Arbor, MI",
    "Columbus, Ohio",
    "Austin TX",
    "Chicago, IL",
    "Seattle, WA",
    "Portland, ME",
    "Los Angeles, CA",
    "New York, NY",
    "somewhere over the rainbow",
    "",
];

/// `(code, avg income, gini, latitude s, longitude s)` of the largest city.
const STATES: &[(&str, f64, f64, i64, i64)] = &[
    ("CA", 61_900.0, 0.49, 122_400, 425_880),
    ("IL", 56_800.0, 0.48, 150_480, 315_360),
    ("ME", 48_500.0, 0.45, 157_140, 252_900),
    ("MI", 48_200.0, 0.46, 152_040, 299_880),
    ("NY", 58_000.0, 0.51, 146_820, 266_400),
    ("OH", 47_400.0, 0.46, 143_640, 298_080),
    ("TX", 51_900.0, 0.48, 107_280, 343_260),
    ("WA", 60_300.0, 0.46, 171_660, 440_280),
];

const SCRIPT_WOMEN: &[&str] = &["ALICE", "CLARA", "DIANA", "EVE"];
const SCRIPT_MEN: &[&str] = &["BOB", "CARL", "DAVE", "FRANK", "GEORGE"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub messages: Vec<Message>,
    pub profiles: Vec<UserProfile>,
    pub name_counts: Vec<NameCount>,
    pub states: Vec<StateRecord>,
    pub movies: Vec<MovieRecord>,
    pub shares: Vec<ShareRecord>,
    /// `(movie id, screenplay text)`.
    pub scripts: Vec<(String, String)>,
    pub cast: CastTable,
}

/// Draw from a power law with exponent `alpha` on `[1, r]`.
pub fn power_law_draw(rng: &mut impl Rng, alpha: f64, r: f64) -> f64 {
    let u: f64 = rng.random();
    (1.0 - u * (1.0 - r.powf(1.0 - alpha))).powf(1.0 / (1.0 - alpha))
}

fn exp_draw(rng: &mut impl Rng, mean: f64) -> f64 {
    let u: f64 = rng.random();
    -mean * (1.0 - u).ln()
}

fn sentence(rng: &mut impl Rng, p_male: f64, p_female: f64) -> String {
    let len = rng.random_range(3..9);
    let mut words: Vec<&str> = (0..len).map(|_| *NEUTRAL.choose(rng).expect("non-empty")).collect();
    if rng.random_bool(p_male) {
        let w = if rng.random_bool(0.3) { MALE_NAMES } else { MALE_WORDS };
        let at = rng.random_range(0..=words.len());
        words.insert(at, w.choose(rng).expect("non-empty"));
    }
    if rng.random_bool(p_female) {
        let w = if rng.random_bool(0.3) { FEMALE_NAMES } else { FEMALE_WORDS };
        let at = rng.random_range(0..=words.len());
        words.insert(at, w.choose(rng).expect("non-empty"));
    }
    words.join(" ")
}

/// Per-message reference probabilities `(male, female)` for a speaker pair.
fn reference_rates(a: Gender, b: Gender) -> (f64, f64) {
    match (a, b) {
        (Gender::F, Gender::F) => (0.12, 0.10),
        (Gender::M, Gender::M) => (0.06, 0.05),
        _ => (0.08, 0.08),
    }
}

fn user_gender(i: usize) -> Gender {
    match i % 10 {
        0 | 3 | 5 | 8 => Gender::F,
        9 => Gender::U,
        _ => Gender::M,
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    if cfg.n_users < 2 || !(cfg.alpha > 1.0) || !(cfg.tau > 1.0) {
        return Err(Error::InvalidArgument("need ≥2 users, alpha > 1 and tau > 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut genders = Vec::with_capacity(cfg.n_users);
    let profiles: Vec<UserProfile> = (0..cfg.n_users)
        .map(|i| {
            let g = user_gender(i);
            let pool = match g {
                Gender::F => FEMALE_NAMES,
                Gender::M => MALE_NAMES,
                Gender::U => {
                    if i % 20 == 9 { ARTIST_NAMES } else { AMBIGUOUS_NAMES }
                }
            };
            let first = pool.choose(&mut rng).expect("non-empty");
            let last = SURNAMES.choose(&mut rng).expect("non-empty");
            genders.push(g);
            UserProfile {
                user_id: format!("u{i:04}"),
                full_name: format!("{}{} {}{}", first[..1].to_uppercase(), &first[1..], last[..1].to_uppercase(), &last[1..]),
                bio: BIOS.choose(&mut rng).expect("non-empty").to_string(),
                location_raw: LOCATIONS.choose(&mut rng).expect("non-empty").to_string(),
            }
        })
        .collect();

    let mut name_counts = Vec::new();
    for n in FEMALE_NAMES {
        name_counts.push(NameCount { name: n.to_string(), gender: Gender::F, count: 40_000 + rng.random_range(0..10_000) });
        name_counts.push(NameCount { name: n.to_string(), gender: Gender::M, count: rng.random_range(0..200) });
    }
    for n in MALE_NAMES {
        name_counts.push(NameCount { name: n.to_string(), gender: Gender::M, count: 40_000 + rng.random_range(0..10_000) });
        name_counts.push(NameCount { name: n.to_string(), gender: Gender::F, count: rng.random_range(0..200) });
    }
    for n in AMBIGUOUS_NAMES {
        name_counts.push(NameCount { name: n.to_string(), gender: Gender::M, count: 6_000 });
        name_counts.push(NameCount { name: n.to_string(), gender: Gender::F, count: 4_000 });
    }

    // interaction graph: every user talks to the next `degree` users
    let n = cfg.n_users;
    let degree = cfg.degree.clamp(1, n - 1);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for k in 1..=degree {
            let j = (i + k) % n;
            let p = (i.min(j), i.max(j));
            if !pairs.contains(&p) {
                pairs.push(p);
            }
        }
    }
    let mut clocks: Vec<f64> = pairs.iter().map(|_| 1_400_000_000.0 + rng.random_range(0.0..86_400.0)).collect();

    let mut raw: Vec<(i64, usize, usize, String)> = Vec::with_capacity(cfg.n_messages);
    let mut produced = 0;
    while produced < cfg.n_messages {
        if rng.random_bool(0.03) {
            // broadcast without mentions
            let a = rng.random_range(0..n);
            let t = clocks[rng.random_range(0..clocks.len())] as i64;
            raw.push((t, a, usize::MAX, sentence(&mut rng, 0.05, 0.05)));
            produced += 1;
            continue;
        }
        let pi = rng.random_range(0..pairs.len());
        let (a, b) = pairs[pi];
        let (pm, pf) = reference_rates(genders[a], genders[b]);
        let len = (1 + (exp_draw(&mut rng, 5.0) as usize)).min(cfg.n_messages - produced);
        clocks[pi] += cfg.tau + exp_draw(&mut rng, cfg.tau);
        let mut speaker = if rng.random_bool(0.5) { a } else { b };
        for k in 0..len {
            if k > 0 {
                clocks[pi] += power_law_draw(&mut rng, cfg.alpha, cfg.tau).round().max(1.0);
                if rng.random_bool(0.8) {
                    speaker = if speaker == a { b } else { a };
                }
            }
            let other = if speaker == a { b } else { a };
            raw.push((clocks[pi] as i64, speaker, other, sentence(&mut rng, pm, pf)));
        }
        produced += len;
    }
    raw.sort_by_key(|m| m.0);
    let messages: Vec<Message> = raw
        .into_iter()
        .enumerate()
        .map(|(i, (t, author, to, text))| Message {
            msg_id: format!("m{i:07}"),
            author_id: profiles[author].user_id.clone(),
            timestamp: t,
            text,
            mentioned_ids: if to == usize::MAX { vec![] } else { vec![profiles[to].user_id.clone()] },
        })
        .collect();

    let states = STATES
        .iter()
        .map(|&(s, inc, gini, lat, lon)| StateRecord {
            state: s.into(),
            avg_income: inc,
            gini,
            largest_city_latitude: lat,
            largest_city_longitude: lon,
        })
        .collect();

    let mut scripts = Vec::new();
    let mut cast = CastTable::new();
    for s in 0..cfg.n_scripts {
        let id = format!("tt{:07}", 1000 + s);
        let (text, genders) = script(&mut rng, s);
        cast.insert(id.clone(), genders);
        scripts.push((id, text));
    }

    let movies: Vec<MovieRecord> = (0..cfg.n_movies.max(cfg.n_scripts))
        .map(|k| {
            let views = rng.random_range(10_000..2_000_000u64);
            MovieRecord {
                movie_id: format!("tt{:07}", 1000 + k),
                title: format!("Synthetic Feature {}", k + 1),
                bechdel_b: if k % 7 == 6 { None } else { Some(rng.random_range(0..4)) },
                disputed: rng.random_bool(0.1),
                views: Some(views),
                likes: Some(views / rng.random_range(50..200)),
                dislikes: Some(views / rng.random_range(500..3000)),
            }
        })
        .collect();
    let shares = (0..cfg.n_shares)
        .map(|_| ShareRecord {
            user_id: profiles[rng.random_range(0..n)].user_id.clone(),
            movie_id: movies[rng.random_range(0..movies.len())].movie_id.clone(),
        })
        .collect();

    Ok(SynthCorpus {
        messages,
        profiles,
        name_counts,
        states,
        movies,
        shares,
        scripts,
        cast,
    })
}

/// A screenplay and its cast genders. Script 0 has an all-male cast.
fn script(rng: &mut ChaCha8Rng, index: usize) -> (String, BTreeMap<String, Gender>) {
    let mut cast: BTreeMap<String, Gender> = BTreeMap::new();
    let women = if index == 0 { 0 } else { 1 + index % SCRIPT_WOMEN.len() };
    for w in &SCRIPT_WOMEN[..women.min(SCRIPT_WOMEN.len())] {
        cast.insert(w.to_string(), Gender::F);
    }
    for m in &SCRIPT_MEN[..3 + index % 2] {
        cast.insert(m.to_string(), Gender::M);
    }
    let names: Vec<&String> = cast.keys().collect();
    let places = ["KITCHEN", "OFFICE", "STREET", "CAR", "BAR", "PARK"];

    let mut out = format!("Title: Synthetic Feature {}\n\nFADE IN:\n\n", index + 1);
    for scene in 0..rng.random_range(20..36) {
        let ext = if rng.random_bool(0.5) { "INT." } else { "EXT." };
        let _ = writeln!(out, "{ext} {} - DAY\n", places.choose(rng).expect("non-empty"));
        let _ = writeln!(out, "Something happens in scene {}.\n", scene + 1);
        let k = rng.random_range(2..4);
        let speakers: Vec<&&String> = names.choose_multiple(rng, k).collect();
        let mut last = usize::MAX;
        for _ in 0..rng.random_range(2..12) {
            let mut k = rng.random_range(0..speakers.len());
            if k == last {
                k = (k + 1) % speakers.len();
            }
            last = k;
            let cue = speakers[k].as_str();
            let ext = if rng.random_bool(0.1) { " (O.S.)" } else { "" };
            let _ = writeln!(out, "{cue}{ext}");
            if rng.random_bool(0.15) {
                out.push_str("(quietly)\n");
            }
            let pm = 0.25;
            let pf = 0.2;
            let _ = writeln!(out, "{}.\n", sentence(rng, pm, pf));
        }
        if rng.random_bool(0.3) {
            out.push_str("CUT TO:\n\n");
        }
    }
    out.push_str("FADE OUT.\n");
    (out, cast)
}

fn csv_string<S: Serialize>(rows: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

impl SynthCorpus {
    /// Writes `messages.jsonl`, `profiles.csv`, `names.csv`, `states.csv`,
    /// `movies.csv`, `shares.csv`, `cast.csv` and `scripts/<movie>.txt`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let mut jsonl = String::with_capacity(self.messages.len() * 128);
        for m in &self.messages {
            jsonl.push_str(&serde_json::to_string(m).expect("message serializes"));
            jsonl.push('\n');
        }
        write_text(dir.join("messages.jsonl"), &jsonl)?;
        write_text(dir.join("profiles.csv"), &csv_string(&self.profiles)?)?;
        let mut names = String::from("name,gender,count\n");
        for n in &self.name_counts {
            let _ = writeln!(names, "{},{},{}", n.name, n.gender, n.count);
        }
        write_text(dir.join("names.csv"), &names)?;
        write_text(dir.join("states.csv"), &csv_string(&self.states)?)?;
        write_text(dir.join("movies.csv"), &csv_string(&self.movies)?)?;
        write_text(dir.join("shares.csv"), &csv_string(&self.shares)?)?;
        let mut cast = String::from("movie_id,character_cue,gender\n");
        for (movie, chars) in &self.cast {
            for (cue, g) in chars {
                let _ = writeln!(cast, "{movie},{cue},{g}");
            }
        }
        write_text(dir.join("cast.csv"), &cast)?;
        for (id, text) in &self.scripts {
            write_text(dir.join("scripts").join(format!("{id}.txt")), text)?;
        }
        Ok(())
    }
}
