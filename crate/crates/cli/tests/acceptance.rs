//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use bechdel_core::analysis::resolve_users;
use bechdel_core::gender::references::{default_female_words, default_male_words};
use bechdel_core::gender::{build_lexicon, KeywordSets, ReferenceLexicon, References};
use bechdel_core::ingest::{self, GeoTables, Message, NameCount, UserPair, UserProfile};
use bechdel_core::metrics::{bechdel_scores, dialogue_imbalance, gender_independence, Measured, ReportOptions};
use bechdel_core::screenplay::{
    build_script_dialogues, classic_bechdel, parse_script, CastGenders, CharacterScope, Scene, ScriptDocument,
    ScriptLine,
};
use bechdel_core::segmentation::{fit_bimodal, segment_corpus, split_stream_dialogues, FitOptions, SegmentOptions};
use bechdel_core::stats::{ranksum_exact_p, spearman, wilson_ci};
use bechdel_core::synth::{generate, power_law_draw, SynthConfig};
use bechdel_core::{Dialogue, DialogueSet, Exact, Gender, MetricReport};

const GENDERS: [Gender; 3] = [Gender::M, Gender::F, Gender::U];

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bechdel")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn random_dialogue(rng: &mut ChaCha8Rng) -> Dialogue {
    Dialogue::new(
        *GENDERS.choose(rng).unwrap(),
        *GENDERS.choose(rng).unwrap(),
        References {
            m: rng.random_bool(0.5),
            f: rng.random_bool(0.5),
        },
    )
}

fn random_set(rng: &mut ChaCha8Rng) -> DialogueSet {
    // skew towards aligned dialogues so independence is often defined
    let n = rng.random_range(0..=500);
    let bias = rng.random_range(0.0..0.8);
    let v = (0..n)
        .map(|_| {
            let mut d = random_dialogue(rng);
            if rng.random_bool(bias) {
                d.g2 = d.g1;
            }
            d
        })
        .collect();
    DialogueSet::new("random", v)
}

fn exact(m: Measured) -> Option<Exact> {
    m.ok().map(|p| Exact::new(p.hits as i64, p.total as i64))
}

fn ratio(hits: usize, total: usize) -> Option<Exact> {
    (total > 0).then(|| Exact::new(hits as i64, total as i64))
}

// ---------------------------------------------------------------------------

fn metric_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let ds = random_set(&mut rng);
        let d = ds.dialogues();
        let count = |f: &dyn Fn(&Dialogue) -> bool| d.iter().filter(|x| f(x)).count();
        let ff0 = count(&|x| x.g1 == Gender::F && x.g2 == Gender::F && !x.m);
        let mm0 = count(&|x| x.g1 == Gender::M && x.g2 == Gender::M && !x.f);
        let ff = count(&|x| x.g1 == Gender::F && x.g2 == Gender::F);
        let mm = count(&|x| x.g1 == Gender::M && x.g2 == Gender::M);
        let fin = count(&|x| x.g1 == Gender::F || x.g2 == Gender::F);
        let min = count(&|x| x.g1 == Gender::M || x.g2 == Gender::M);
        let fm = count(&|x| matches!((x.g1, x.g2), (Gender::F, Gender::M) | (Gender::M, Gender::F)));
        let (bf, bm) = bechdel_scores(&ds);
        let (xf, xm) = dialogue_imbalance(&ds);
        let ind = gender_independence(&ds, 50);
        let want = [
            ratio(ff0, d.len()),
            ratio(mm0, d.len()),
            ratio(fm, fin),
            ratio(mm, min),
            if ff >= 50 { ratio(ff0, ff) } else { None },
            if mm >= 50 { ratio(mm0, mm) } else { None },
        ];
        let got = [exact(bf), exact(bm), exact(xf), exact(xm), exact(ind.i_f), exact(ind.i_m)];
        if want != got {
            return Err(format!("case {case}: expected {want:?}, got {got:?}"));
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(10) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("1000 sets exact in {:.2}s", t.as_secs_f64()))
}

fn decomposition() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    for case in 0..1000 {
        let ds = random_set(&mut rng);
        let (bf, _) = bechdel_scores(&ds);
        let ind = gender_independence(&ds, 50);
        let (Some(b), Some(i)) = (exact(bf), exact(ind.i_f)) else { continue };
        let ff = ds.dialogues().iter().filter(|x| x.g1 == Gender::F && x.g2 == Gender::F).count();
        if b != i * Exact::new(ff as i64, ds.len() as i64) {
            return Err(format!("case {case}: B_F={b} but I_F·|FF|/|D| differs"));
        }
        checked += 1;
    }
    if checked < 100 {
        return Err(format!("only {checked} sets had I_F defined"));
    }
    Ok(format!("identity exact on {checked} sets"))
}

// ---------------------------------------------------------------------------
// gender swap through the full pipelines

const FIRST_F: [&str; 4] = ["mary", "linda", "emma", "grace"];
const FIRST_M: [&str; 4] = ["john", "david", "paul", "mark"];
const FIRST_AMBIGUOUS: [&str; 1] = ["jordan"];

fn name_counts(swap: bool) -> Vec<NameCount> {
    let g = |g: Gender| if swap { g.swapped() } else { g };
    let mut v = Vec::new();
    for n in FIRST_F {
        v.push(NameCount { name: n.into(), gender: g(Gender::F), count: 5000 });
        v.push(NameCount { name: n.into(), gender: g(Gender::M), count: 10 });
    }
    for n in FIRST_M {
        v.push(NameCount { name: n.into(), gender: g(Gender::M), count: 7000 });
    }
    for n in FIRST_AMBIGUOUS {
        v.push(NameCount { name: n.into(), gender: Gender::F, count: 300 });
        v.push(NameCount { name: n.into(), gender: Gender::M, count: 400 });
    }
    v
}

fn word_sets(swap: bool) -> (BTreeSet<String>, BTreeSet<String>) {
    let (m, f) = (default_male_words(), default_female_words());
    if swap { (f, m) } else { (m, f) }
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let pool: Vec<&str> = ["the", "movie", "was", "fun", "see", "you", "he", "she", "his", "her", "man", "woman"]
        .into_iter()
        .chain(FIRST_F)
        .chain(FIRST_M)
        .chain(FIRST_AMBIGUOUS)
        .collect();
    let len = rng.random_range(2..7);
    (0..len)
        .map(|_| if rng.random_bool(0.8) { "ok" } else { *pool.choose(rng).unwrap() })
        .collect::<Vec<_>>()
        .join(" ")
}

fn stream_pipeline(rng: &mut ChaCha8Rng) -> [MetricReport; 2] {
    let users: Vec<UserProfile> = (0..8)
        .map(|i| {
            let first = *FIRST_F.iter().chain(&FIRST_M).chain(&FIRST_AMBIGUOUS).collect::<Vec<_>>().choose(rng).unwrap();
            UserProfile {
                user_id: format!("u{i}"),
                full_name: format!("{first} smith"),
                bio: String::new(),
                location_raw: String::new(),
            }
        })
        .collect();
    let mut t = 0i64;
    let messages: Vec<Message> = (0..400)
        .map(|i| {
            let a = rng.random_range(0..8);
            let b = (a + rng.random_range(1..8)) % 8;
            t += if rng.random_bool(0.1) { rng.random_range(5000..20000) } else { rng.random_range(1..600) };
            Message {
                msg_id: format!("m{i}"),
                author_id: format!("u{a}"),
                timestamp: t,
                text: random_text(rng),
                mentioned_ids: vec![format!("u{b}")],
            }
        })
        .collect();
    let geo = GeoTables { top_cities: vec![], aliases: vec![], states: vec![] };
    let opts = SegmentOptions { min_mentions: 3, tau_override: Some(3600.0), ..SegmentOptions::default() };
    [false, true].map(|swap| {
        let lex = build_lexicon(&name_counts(swap), &[], 5.0).unwrap();
        let (mw, fw) = word_sets(swap);
        let refdet = ReferenceLexicon::new(lex.clone(), mw, fw).unwrap();
        let users = resolve_users(&users, &lex, &KeywordSets::default(), &geo);
        let seg = segment_corpus(&messages, &users.genders(), &refdet, &opts).unwrap();
        MetricReport::compute("stream", &seg.dialogues, &ReportOptions { min_aligned: 5, ..Default::default() })
    })
}

const CHARACTERS: [&str; 6] = ["ANN", "BEA", "CID", "DON", "EVA", "GUS"];

fn random_script(rng: &mut ChaCha8Rng, scenes: usize) -> ScriptDocument {
    ScriptDocument {
        title: "Random".into(),
        scenes: (0..scenes)
            .map(|s| {
                let cast: Vec<&str> = CHARACTERS.choose_multiple(rng, 3).copied().collect();
                Scene {
                    heading: format!("INT. ROOM {s} - DAY"),
                    lines: (0..rng.random_range(1..12))
                        .map(|_| ScriptLine {
                            character_cue: cast.choose(rng).unwrap().to_string(),
                            utterance: random_text(rng),
                        })
                        .collect(),
                }
            })
            .collect(),
    }
}

fn random_cast(rng: &mut ChaCha8Rng) -> CastGenders {
    CHARACTERS.iter().map(|c| (c.to_string(), *GENDERS.choose(rng).unwrap())).collect()
}

fn script_pipeline(rng: &mut ChaCha8Rng) -> [MetricReport; 2] {
    let text = random_script(rng, 12).render();
    let cast = random_cast(rng);
    let lex = build_lexicon(&name_counts(false), &[], 5.0).unwrap();
    let refdet = ReferenceLexicon::with_default_words(lex);
    let doc = parse_script(&text).unwrap();
    let opts = ReportOptions { min_aligned: 3, ..Default::default() };
    [(cast.clone(), refdet.clone()), (cast.swapped(), refdet.swapped())]
        .map(|(c, r)| MetricReport::compute("movie", &build_script_dialogues("m", &doc, &c, &r), &opts))
}

fn gender_swap() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut defined = 0;
    for case in 0..100 {
        let [a, b] = if case % 2 == 0 { stream_pipeline(&mut rng) } else { script_pipeline(&mut rng) };
        let key = |e: &bechdel_core::Estimate| (e.hits, e.total, e.is_defined());
        if key(&a.b_f) != key(&b.b_m)
            || key(&a.b_m) != key(&b.b_f)
            || key(&a.i_f) != key(&b.i_m)
            || key(&a.i_m) != key(&b.i_f)
        {
            return Err(format!("case {case}: swap mismatch\n{a:?}\n{b:?}"));
        }
        if a.n_dialogues == 0 {
            return Err(format!("case {case}: corpus produced no dialogues"));
        }
        defined += usize::from(a.i_f.is_defined() && a.i_m.is_defined());
    }
    Ok(format!("100 corpora (50 stream, 50 script) exact, {defined} with both I defined"))
}

// ---------------------------------------------------------------------------

fn fit_recovery() -> Result<String, String> {
    let (alpha, tau) = (1.5, 32_768.0);
    let mut worst = (0.0f64, 1.0f64, Duration::ZERO);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut gaps: Vec<f64> = (0..9_000).map(|_| power_law_draw(&mut rng, alpha, tau)).collect();
        gaps.extend((0..1_000).map(|_| {
            let u: f64 = rng.random();
            tau - tau * (1.0 - u).ln()
        }));
        let start = Instant::now();
        let fit = fit_bimodal(&gaps, &FitOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        let t = start.elapsed();
        let da = (fit.alpha - alpha).abs();
        let r = fit.tau / tau;
        if da > 0.05 || !(1.0 / 1.5..=1.5).contains(&r) || t > Duration::from_secs(5) {
            return Err(format!("seed {seed}: alpha {:.4}, tau ratio {r:.3}, {t:?}", fit.alpha));
        }
        let dev = |x: f64| (x.ln()).abs();
        worst = (worst.0.max(da), if dev(r) > dev(worst.1) { r } else { worst.1 }, worst.2.max(t));
    }
    Ok(format!(
        "20 seeds: max |dα| {:.4}, worst τ ratio {:.3}, slowest fit {:.2}s",
        worst.0,
        worst.1,
        worst.2.as_secs_f64()
    ))
}

fn splitting_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let refdet = ReferenceLexicon::with_default_words(build_lexicon(&name_counts(false), &[], 5.0).unwrap());
    let pair = UserPair::new("a", "b").unwrap();
    for case in 0..500 {
        let n = rng.random_range(1..200);
        let tau = rng.random_range(1..5000) as f64;
        let mut t = rng.random_range(0..1_000_000i64);
        let msgs: Vec<Message> = (0..n)
            .map(|i| {
                t += rng.random_range(0..3 * tau as i64 + 2);
                Message {
                    msg_id: format!("{i}"),
                    author_id: if rng.random_bool(0.5) { "a" } else { "b" }.into(),
                    timestamp: t,
                    text: random_text(&mut rng),
                    mentioned_ids: vec![],
                }
            })
            .collect();
        let refs: Vec<&Message> = msgs.iter().collect();
        let got = split_stream_dialogues(&refs, tau, &refdet, &pair, (Gender::F, Gender::M));

        // brute force: walk the gaps, cut when a gap exceeds tau
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        for i in 1..msgs.len() {
            if msgs[i].timestamp - msgs[i - 1].timestamp > tau as i64 {
                groups.push(vec![]);
            }
            groups.last_mut().unwrap().push(i);
        }
        let has = |idx: &[usize], words: &BTreeSet<String>, g: Gender| {
            idx.iter().any(|&i| {
                msgs[i].text.split_whitespace().any(|w| words.contains(w) || refdet.names().lookup(w) == g)
            })
        };
        let want: Vec<(Vec<String>, bool, bool)> = groups
            .iter()
            .map(|g| {
                (
                    g.iter().map(|&i| msgs[i].msg_id.clone()).collect(),
                    has(g, refdet.male_words(), Gender::M),
                    has(g, refdet.female_words(), Gender::F),
                )
            })
            .collect();
        let got: Vec<(Vec<String>, bool, bool)> = got.into_iter().map(|d| (d.source_ids, d.m, d.f)).collect();
        if got != want {
            return Err(format!("case {case}: {} dialogues vs {} expected", got.len(), want.len()));
        }
    }
    Ok("500 streams exact".into())
}

// ---------------------------------------------------------------------------

fn ladder_script(women_talk: bool, about_man: bool, women: usize) -> (String, CastGenders) {
    let mut text = String::from("Title: Ladder\n\nINT. KITCHEN - DAY\n\n");
    let line = |who: &str, what: &str| format!("{who}\n{what}\n\n");
    text.push_str(&line("BOB", "Morning."));
    text.push_str(&line("ANN", "Morning to you."));
    text.push_str("EXT. GARDEN - DAY\n\n");
    if women_talk {
        let topic = if about_man { "Have you seen him lately?" } else { "The roses need water." };
        text.push_str(&line("ANN", topic));
        text.push_str(&line("EVA", "Yes, this morning."));
    } else {
        text.push_str(&line("EVA", "Lovely day."));
        text.push_str(&line("BOB", "It is."));
    }
    let mut cast: BTreeMap<String, Gender> = [("BOB".to_string(), Gender::M), ("ANN".to_string(), Gender::F)].into();
    cast.insert("EVA".into(), if women >= 2 { Gender::F } else { Gender::M });
    (text, CastGenders::new(cast))
}

fn classic_ladder() -> Result<String, String> {
    let refdet = ReferenceLexicon::with_default_words(Default::default());
    let cases = [
        (ladder_script(true, false, 1), 0u8),
        (ladder_script(false, false, 2), 1),
        (ladder_script(true, true, 2), 2),
        (ladder_script(true, false, 2), 3),
    ];
    for ((text, cast), want) in &cases {
        let doc = parse_script(text).map_err(|e| e.to_string())?;
        let ds = build_script_dialogues("ladder", &doc, cast, &refdet);
        let b = classic_bechdel(&ds, cast, CharacterScope::Cast);
        if b != *want {
            return Err(format!("expected b = {want}, got {b}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut passing = 0;
    for case in 0..200 {
        let scenes = rng.random_range(1..6);
        let doc = random_script(&mut rng, scenes);
        let cast = random_cast(&mut rng);
        let parsed = parse_script(&doc.render()).map_err(|e| format!("case {case}: {e}"))?;
        let ds = build_script_dialogues("r", &parsed, &cast, &refdet);
        let b = classic_bechdel(&ds, &cast, CharacterScope::Cast);
        let bf_positive = exact(bechdel_scores(&ds).0).is_some_and(|v| v > Exact::from_integer(0));
        if (b == 3) != bf_positive {
            return Err(format!("case {case}: b = {b}, B_F > 0 is {bf_positive}"));
        }
        passing += usize::from(b == 3);
    }
    Ok(format!("ladder 0..3 ok; 200 random scripts consistent ({passing} pass)"))
}

fn ann_arbor() -> Result<String, String> {
    let loaded = ingest::read_dialogues(fixtures().join("fixtures/ann_arbor.jsonl")).map_err(|e| e.to_string())?;
    let ds = DialogueSet::new("Ann Arbor", loaded.records);
    let r = MetricReport::compute("Ann Arbor", &ds, &ReportOptions::default());
    let (bf, bm) = (r.b_f.value.unwrap(), r.b_m.value.unwrap());
    if (bf - 0.06).abs() > 0.005 || (bm - 0.36).abs() > 0.005 {
        return Err(format!("B_F = {bf}, B_M = {bm}"));
    }
    Ok(format!("B_F = {bf:.3}, B_M = {bm:.3} over {} dialogues", r.n_dialogues))
}

// ---------------------------------------------------------------------------

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Two-sided exact p by listing every subset of pooled positions.
fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let rank2 = |x: f64| -> i64 {
        let below = pooled.iter().filter(|&&y| y < x).count() as i64;
        let equal = pooled.iter().filter(|&&y| y == x).count() as i64;
        2 * below + equal + 1
    };
    let ranks: Vec<i64> = pooled.iter().map(|&x| rank2(x)).collect();
    let k = a.len();
    let centre = (k * (n + 1)) as i64;
    let observed = (ranks[..k].iter().sum::<i64>() - centre).abs();
    let mut extreme = 0u64;
    let mut total = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let s: i64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        total += 1;
        extreme += u64::from((s - centre).abs() >= observed);
    }
    assert_eq!(total, binomial(n, k));
    extreme as f64 / total as f64
}

fn statistics_oracles() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut splits = 0;
    for n in 2..=12 {
        for k in 1..n {
            for _ in 0..3 {
                let draw = |rng: &mut ChaCha8Rng| rng.random_range(0..8) as f64;
                let a: Vec<f64> = (0..k).map(|_| draw(&mut rng)).collect();
                let b: Vec<f64> = (0..n - k).map(|_| draw(&mut rng)).collect();
                let got: f64 = ranksum_exact_p(&a, &b).map_err(|e| e.to_string())?;
                let want = enumerate_p(&a, &b);
                if (got - want).abs() > 1e-12 {
                    return Err(format!("rank-sum {a:?} vs {b:?}: {got} != {want}"));
                }
            }
            splits += 1;
        }
    }

    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::new(0.0, 1.0).unwrap();
    for level in [0.8, 0.9, 0.95, 0.99] {
        let z = normal.inverse_cdf(1.0 - (1.0 - level) / 2.0);
        for n in 1..=60u64 {
            for k in 0..=n {
                let (nf, p) = (n as f64, k as f64 / n as f64);
                let c = (p + z * z / (2.0 * nf)) / (1.0 + z * z / nf);
                let h = z / (1.0 + z * z / nf) * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt();
                let (lo, hi): (f64, f64) = wilson_ci(k, n, level).map_err(|e| e.to_string())?;
                if (lo - (c - h).max(0.0)).abs() > 1e-9 || (hi - (c + h).min(1.0)).abs() > 1e-9 {
                    return Err(format!("wilson k={k} n={n} level={level}"));
                }
            }
        }
    }

    for case in 0..1000 {
        let n = rng.random_range(3..40);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let base = spearman(&x, &y).map_err(|e| e.to_string())?.effect;
        let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let ty: Vec<f64> = y.iter().map(|v| 2.0 * v.powi(3) - 1.0).collect();
        let moved = spearman(&tx, &ty).map_err(|e| e.to_string())?.effect;
        if (base - moved).abs() > 1e-12 {
            return Err(format!("spearman case {case}: {base} vs {moved}"));
        }
    }
    Ok(format!("{splits} rank-sum splits enumerated, Wilson closed form, 1000 Spearman cases"))
}

// ---------------------------------------------------------------------------

fn run_report(corpus: &Path, out: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let status = Command::new(bin())
        .arg("report")
        .args(["--messages", "messages.jsonl", "--profiles", "profiles.csv", "--names", "names.csv"])
        .args(["--states", "states.csv", "--movies", "movies.csv", "--shares", "shares.csv"])
        .args(["--scripts", "scripts", "--cast", "cast.csv", "--seed", "7", "--out"])
        .arg(out)
        .current_dir(corpus)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("report exited with {status}"));
    }
    Ok(start.elapsed())
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Counts recomputed from the written dialogues against the written report.
fn cross_check(out: &Path) -> Result<(), String> {
    let dialogues = fs::read_to_string(out.join("segment/dialogues.jsonl")).map_err(|e| e.to_string())?;
    let (mut n, mut ff0, mut mm0) = (0u64, 0u64, 0u64);
    for line in dialogues.lines() {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let (g1, g2) = (v["g1"].as_str().unwrap(), v["g2"].as_str().unwrap());
        n += 1;
        ff0 += u64::from(g1 == "F" && g2 == "F" && v["m"] == 0);
        mm0 += u64::from(g1 == "M" && g2 == "M" && v["f"] == 0);
    }
    let corpus: Value =
        serde_json::from_str(&fs::read_to_string(out.join("scores/corpus.json")).unwrap()).map_err(|e| e.to_string())?;
    let got = (
        corpus["n_dialogues"].as_u64(),
        corpus["b_f"]["hits"].as_u64(),
        corpus["b_m"]["hits"].as_u64(),
    );
    if got != (Some(n), Some(ff0), Some(mm0)) {
        return Err(format!("report counts {got:?}, dialogues give ({n}, {ff0}, {mm0})"));
    }
    Ok(())
}

fn golden_run() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("corpus");
    generate(&SynthConfig::default()).and_then(|c| c.write(&corpus)).map_err(|e| e.to_string())?;
    let t1 = run_report(&corpus, &dir.path().join("a"))?;
    let t2 = run_report(&corpus, &dir.path().join("b"))?;
    let (a, b) = (tree(&dir.path().join("a")), tree(&dir.path().join("b")));
    if a != b {
        let differing: Vec<_> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
        return Err(format!("runs differ in {differing:?}"));
    }
    cross_check(&dir.path().join("a"))?;
    let golden_path = fixtures().join("golden/report.json");
    let produced = &a[Path::new("report.json")];
    if std::env::var_os("BECHDEL_BLESS").is_some() {
        fs::create_dir_all(golden_path.parent().unwrap()).unwrap();
        fs::write(&golden_path, produced).unwrap();
    }
    let golden = fs::read(&golden_path).map_err(|e| format!("{}: {e}", golden_path.display()))?;
    if &golden != produced {
        return Err("report.json differs from the golden file".into());
    }
    let total = t1 + t2;
    if t1.max(t2) > Duration::from_secs(30) {
        return Err(format!("slowest run {:?}", t1.max(t2)));
    }
    Ok(format!("{} files identical across runs, matches golden; {:.2}s per run", a.len(), total.as_secs_f64() / 2.0))
}

fn throughput() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = SynthConfig { n_messages: 1_000_000, ..SynthConfig::default() };
    generate(&cfg).and_then(|c| c.write(dir.path())).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let status = Command::new(bin())
        .arg("score")
        .args(["--messages", "messages.jsonl", "--profiles", "profiles.csv", "--names", "names.csv"])
        .args(["--states", "states.csv", "--out", "out"])
        .current_dir(dir.path())
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    let t = start.elapsed();
    if !status.success() {
        return Err(format!("score exited with {status}"));
    }
    let corpus: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/corpus.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let n = corpus["n_dialogues"].as_u64().unwrap_or(0);
    if t > Duration::from_secs(60) || n == 0 {
        return Err(format!("{t:?}, {n} dialogues"));
    }
    Ok(format!("1M messages -> {n} dialogues in {:.1}s", t.as_secs_f64()))
}

fn main() {
    type Check = fn() -> Result<String, String>;
    let criteria: [(&str, Check); 10] = [
        ("metric oracle equivalence", metric_oracle),
        ("decomposition identity", decomposition),
        ("gender-swap symmetry", gender_swap),
        ("segmentation fit recovery", fit_recovery),
        ("splitting oracle", splitting_oracle),
        ("classic-test ladder", classic_ladder),
        ("Ann Arbor fixture", ann_arbor),
        ("statistics oracles", statistics_oracles),
        ("end-to-end golden run", golden_run),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
