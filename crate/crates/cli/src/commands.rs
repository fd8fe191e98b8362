use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use bechdel_core::analysis::{
    cohort_independence, compare_shares_by_sharer_gender, distance_table, popularity_by_pass, resolve_users,
    sharer_imbalance_by_pass, state_correlates, state_independence_map, CohortSpec, GroupSummary, ImbalanceByPass,
    ShareComparison, UserDirectory,
};
use bechdel_core::gender::location::bundled_top_cities;
use bechdel_core::gender::{build_lexicon, GenderLexicon, KeywordSets, ReferenceLexicon};
use bechdel_core::ingest::{self, GeoTables, MovieRecord};
use bechdel_core::metrics::ReportOptions;
use bechdel_core::report::{self, fmt_opt, format_table, metric_table};
use bechdel_core::screenplay::{build_script_dialogues, classic_bechdel, parse_script, CastGenders};
use bechdel_core::segmentation::{segment_corpus, FitOptions, SegmentOptions, SegmentedCorpus};
use bechdel_core::stats::bootstrap_score_samples;
use bechdel_core::synth::{generate, SynthConfig};
use bechdel_core::{
    BimodalFit, CohortComparison, CorrelationRow, Dialogue, DialogueSet, MetricReport, ScoreDistance, ScoreGroup,
    StatResult,
};

use crate::config::RunConfig;
use crate::CliError;

type Res<T> = Result<T, CliError>;

/// Gender lexicon, reference detector and (with profiles) the user directory.
pub struct Context {
    pub refdet: ReferenceLexicon,
    pub users: Option<UserDirectory>,
    pub geo: Option<GeoTables>,
}

fn load_lexicon(cfg: &RunConfig) -> Res<GenderLexicon> {
    let Some(names) = &cfg.names else {
        return Ok(GenderLexicon::default());
    };
    let counts = ingest::read_name_counts(names)?;
    let stop = cfg
        .stoplists
        .iter()
        .map(ingest::read_token_set)
        .collect::<bechdel_core::Result<Vec<_>>>()?;
    Ok(build_lexicon(&counts, &stop, cfg.ratio)?)
}

impl Context {
    pub fn load(cfg: &RunConfig) -> Res<Context> {
        let lexicon = load_lexicon(cfg)?;
        let refdet = if cfg.male_words.is_some() || cfg.female_words.is_some() {
            let words = |p: &Option<PathBuf>, default: fn() -> BTreeSet<String>| -> Res<BTreeSet<String>> {
                Ok(match p {
                    Some(p) => ingest::read_token_set(p)?,
                    None => default(),
                })
            };
            ReferenceLexicon::new(
                lexicon.clone(),
                words(&cfg.male_words, bechdel_core::gender::references::default_male_words)?,
                words(&cfg.female_words, bechdel_core::gender::references::default_female_words)?,
            )?
        } else {
            ReferenceLexicon::with_default_words(lexicon.clone())
        };
        let geo = match &cfg.states {
            Some(states) => Some(ingest::read_geo(states, cfg.cities.as_deref(), cfg.aliases.as_deref())?),
            None => None,
        };
        let users = match &cfg.profiles {
            Some(p) => {
                let profiles = ingest::read_profiles(p)?;
                let keywords = KeywordSets::from_files(
                    cfg.mother_words.as_deref(),
                    cfg.father_words.as_deref(),
                    cfg.student_words.as_deref(),
                )?;
                let fallback;
                let geo_ref = match &geo {
                    Some(g) => g,
                    None => {
                        fallback = GeoTables {
                            top_cities: match &cfg.cities {
                                Some(c) => ingest::parse_cities(open(c)?)?,
                                None => bundled_top_cities(),
                            },
                            aliases: match &cfg.aliases {
                                Some(a) => ingest::parse_aliases(open(a)?)?,
                                None => Vec::new(),
                            },
                            states: Vec::new(),
                        };
                        &fallback
                    }
                };
                Some(resolve_users(&profiles, &lexicon, &keywords, geo_ref))
            }
            None => None,
        };
        Ok(Context { refdet, users, geo })
    }

    fn genders(&self) -> BTreeMap<String, bechdel_core::Gender> {
        self.users.as_ref().map(UserDirectory::genders).unwrap_or_default()
    }
}

fn open(path: &Path) -> Res<fs::File> {
    fs::File::open(path).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::NotFound {
        CliError::MissingInput(format!("{}: {e}", path.display()))
    } else {
        CliError::Other(format!("{}: {e}", path.display()))
    }
}

fn report_options(cfg: &RunConfig) -> ReportOptions {
    ReportOptions {
        min_aligned: cfg.min_aligned,
        level: cfg.level,
        denominator: cfg.denominator,
    }
}

// ---------------------------------------------------------------------------
// scripts

#[derive(Debug, Clone, Serialize)]
pub struct ScriptSummary {
    pub movie_id: String,
    pub title: String,
    pub lines: usize,
    pub classic_b: u8,
    pub report: MetricReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedScript {
    pub movie_id: String,
    pub reason: String,
}

pub struct ScriptRun {
    pub summaries: Vec<ScriptSummary>,
    pub dialogues: Vec<(String, DialogueSet)>,
    pub skipped: Vec<SkippedScript>,
}

fn script_files(path: &Path) -> Res<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| io_error(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn run_scripts(cfg: &RunConfig, ctx: &Context) -> Res<ScriptRun> {
    let dir = cfg.require(&cfg.scripts, "scripts")?;
    let cast = match &cfg.cast {
        Some(p) => ingest::read_cast(p)?,
        None => Default::default(),
    };
    let opts = report_options(cfg);
    let files = script_files(dir)?;
    let results: Vec<Res<Result<(ScriptSummary, DialogueSet), SkippedScript>>> = files
        .par_iter()
        .map(|path| {
            let movie_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let doc = match parse_script(&text) {
                Ok(doc) => doc,
                Err(e) => {
                    return Ok(Err(SkippedScript {
                        movie_id,
                        reason: e.to_string(),
                    }))
                }
            };
            let genders = CastGenders::new(cast.get(&movie_id).cloned().unwrap_or_default());
            let ds = build_script_dialogues(&movie_id, &doc, &genders, &ctx.refdet);
            let summary = ScriptSummary {
                classic_b: classic_bechdel(&ds, &genders, cfg.character_scope),
                report: MetricReport::compute(movie_id.clone(), &ds, &opts),
                lines: doc.line_count(),
                title: doc.title,
                movie_id,
            };
            Ok(Ok((summary, ds)))
        })
        .collect();
    let mut run = ScriptRun {
        summaries: vec![],
        dialogues: vec![],
        skipped: vec![],
    };
    for r in results {
        match r? {
            Ok((s, ds)) => {
                run.dialogues.push((s.movie_id.clone(), ds));
                run.summaries.push(s);
            }
            Err(skip) => {
                log::warn!("skipping {}: {}", skip.movie_id, skip.reason);
                run.skipped.push(skip);
            }
        }
    }
    Ok(run)
}

fn movies_csv(summaries: &[ScriptSummary]) -> String {
    let mut out = String::from("movie_id,lines,dialogues,classic_b,b_f,b_m,x_f,x_m\n");
    for s in summaries {
        let r = &s.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.movie_id,
            s.lines,
            r.n_dialogues,
            s.classic_b,
            fmt_opt(r.b_f.value),
            fmt_opt(r.b_m.value),
            fmt_opt(r.x_f.value),
            fmt_opt(r.x_m.value)
        ));
    }
    out
}

fn movies_table(summaries: &[ScriptSummary]) -> String {
    let dash = |s: String| if s.is_empty() { "-".to_string() } else { s };
    let rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            vec![
                s.movie_id.clone(),
                s.lines.to_string(),
                s.report.n_dialogues.to_string(),
                s.classic_b.to_string(),
                dash(fmt_opt(s.report.b_f.value)),
                dash(fmt_opt(s.report.b_m.value)),
            ]
        })
        .collect();
    format_table(&["movie", "lines", "D", "b", "B_F", "B_M"], &rows)
}

fn write_scripts(out: &Path, run: &ScriptRun) -> Res<()> {
    for (id, ds) in &run.dialogues {
        report::write_dialogues(out.join("dialogues").join(format!("{id}.jsonl")), ds.dialogues())?;
    }
    report::write_text(out.join("movies.csv"), &movies_csv(&run.summaries))?;
    #[derive(Serialize)]
    struct Out<'a> {
        movies: &'a [ScriptSummary],
        skipped: &'a [SkippedScript],
    }
    report::write_json(
        out.join("movies.json"),
        &Out {
            movies: &run.summaries,
            skipped: &run.skipped,
        },
    )?;
    Ok(())
}

pub fn parse_scripts(cfg: &RunConfig) -> Res<()> {
    let ctx = Context::load(cfg)?;
    let run = run_scripts(cfg, &ctx)?;
    write_scripts(&cfg.out, &run)?;
    print!("{}", movies_table(&run.summaries));
    if !run.skipped.is_empty() {
        println!("skipped {} file(s) without screenplay structure", run.skipped.len());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// segmentation

#[derive(Debug, Serialize)]
pub struct SegmentSummary {
    pub messages: usize,
    pub skipped_lines: usize,
    pub pairs: usize,
    pub dialogues: usize,
    pub tau: f64,
    pub tau_source: &'static str,
    pub fit: Option<BimodalFit>,
}

pub fn run_segment(cfg: &RunConfig, ctx: &Context) -> Res<(SegmentedCorpus, SegmentSummary)> {
    let path = cfg.require(&cfg.messages, "messages")?;
    let loaded = ingest::read_messages(path)?;
    if loaded.skipped > 0 {
        log::warn!("{} malformed message line(s) skipped", loaded.skipped);
    }
    let opts = SegmentOptions {
        fit: FitOptions {
            t_min: cfg.t_min,
            min_gaps: cfg.min_gaps,
            resolution: 1.0,
            ..FitOptions::default()
        },
        min_mentions: cfg.min_mentions,
        pair_rule: cfg.pair_rule,
        tau_override: cfg.tau_seconds,
        per_pair: cfg.per_pair_tau,
    };
    let seg = segment_corpus(&loaded.records, &ctx.genders(), &ctx.refdet, &opts)?;
    let summary = SegmentSummary {
        messages: loaded.records.len(),
        skipped_lines: loaded.skipped,
        pairs: seg.pairs.len(),
        dialogues: seg.dialogues.len(),
        tau: seg.tau,
        tau_source: if cfg.tau_seconds.is_some() { "override" } else { "fitted" },
        fit: seg.pooled_fit,
    };
    Ok((seg, summary))
}

fn write_segment(out: &Path, seg: &SegmentedCorpus, summary: &SegmentSummary) -> Res<()> {
    report::write_json(out.join("fit.json"), summary)?;
    let mut pairs = String::from("user_a,user_b,messages,dialogues,tau,alpha\n");
    for p in &seg.pairs {
        pairs.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.pair.first(),
            p.pair.second(),
            p.n_messages,
            p.n_dialogues,
            fmt_opt(Some(p.tau)),
            fmt_opt(p.fit.map(|f| f.alpha))
        ));
    }
    report::write_text(out.join("pairs.csv"), &pairs)?;
    report::write_dialogues(out.join("dialogues.jsonl"), seg.dialogues.dialogues())?;
    Ok(())
}

fn segment_text(s: &SegmentSummary) -> String {
    let mut rows = vec![
        vec!["messages".into(), s.messages.to_string()],
        vec!["interacting pairs".into(), s.pairs.to_string()],
        vec!["dialogues".into(), s.dialogues.to_string()],
        vec![format!("tau ({})", s.tau_source), format!("{:.1}", s.tau)],
    ];
    if let Some(f) = &s.fit {
        rows.push(vec!["alpha".into(), format!("{:.4}", f.alpha)]);
        rows.push(vec!["beta".into(), format!("{:.3e}", f.beta)]);
        rows.push(vec!["KS distance".into(), format!("{:.4}", f.ks_distance)]);
    }
    format_table(&["segmentation", ""], &rows)
}

pub fn segment(cfg: &RunConfig) -> Res<()> {
    let ctx = Context::load(cfg)?;
    let (seg, summary) = run_segment(cfg, &ctx)?;
    write_segment(&cfg.out, &seg, &summary)?;
    print!("{}", segment_text(&summary));
    Ok(())
}

// ---------------------------------------------------------------------------
// scoring

/// Stream dialogues: the `--dialogues` files, or a fresh segmentation.
fn stream_dialogues(cfg: &RunConfig, ctx: &Context) -> Res<(DialogueSet, Option<(SegmentedCorpus, SegmentSummary)>)> {
    if !cfg.dialogues.is_empty() {
        let mut all: Vec<Dialogue> = Vec::new();
        for p in &cfg.dialogues {
            let loaded = ingest::read_dialogues(p)?;
            if loaded.skipped > 0 {
                log::warn!("{}: {} malformed dialogue line(s) skipped", p.display(), loaded.skipped);
            }
            all.extend(loaded.records);
        }
        return Ok((DialogueSet::new("stream", all), None));
    }
    if cfg.messages.is_none() {
        return Err(CliError::MissingInput("--dialogues or --messages is required for this command".into()));
    }
    let (seg, summary) = run_segment(cfg, ctx)?;
    Ok((seg.dialogues.clone(), Some((seg, summary))))
}

#[derive(Debug, Serialize)]
pub struct Scores {
    pub corpus: MetricReport,
    pub cohorts: Vec<CohortComparison>,
    pub states: Vec<MetricReport>,
    pub correlations: Vec<CorrelationRow>,
}

pub fn run_score(cfg: &RunConfig, ctx: &Context, ds: &DialogueSet) -> Scores {
    let opts = report_options(cfg);
    let corpus = MetricReport::compute("corpus", ds, &opts);
    let (cohorts, states) = match &ctx.users {
        Some(users) => {
            let cohorts = CohortSpec::BUILTIN
                .iter()
                .filter_map(|name| CohortSpec::builtin(name))
                .map(|c| cohort_independence(ds, users, &c, &opts))
                .collect();
            (cohorts, state_independence_map(ds, users, &opts))
        }
        None => (vec![], vec![]),
    };
    let correlations = match &ctx.geo {
        Some(geo) if !states.is_empty() => state_correlates(&states, geo),
        _ => vec![],
    };
    Scores {
        corpus,
        cohorts,
        states,
        correlations,
    }
}

fn cohorts_csv(rows: &[CohortComparison]) -> String {
    let mut out = String::from(
        "cohort,cohort_dialogues,complement_dialogues,i_f,i_f_complement,i_f_p,i_m,i_m_complement,i_m_p\n",
    );
    for c in rows {
        let p = |t: &Option<StatResult>| fmt_opt(t.map(|t| t.p_value));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.label,
            c.cohort.n_dialogues,
            c.complement.n_dialogues,
            fmt_opt(c.cohort.i_f.value),
            fmt_opt(c.complement.i_f.value),
            p(&c.i_f_test),
            fmt_opt(c.cohort.i_m.value),
            fmt_opt(c.complement.i_m.value),
            p(&c.i_m_test)
        ));
    }
    out
}

fn write_scores(out: &Path, s: &Scores) -> Res<()> {
    report::write_json(out.join("corpus.json"), &s.corpus)?;
    report::write_text(out.join("corpus.csv"), &report::metric_reports_csv(std::slice::from_ref(&s.corpus)))?;
    if !s.cohorts.is_empty() {
        report::write_json(out.join("cohorts.json"), &s.cohorts)?;
        report::write_text(out.join("cohorts.csv"), &cohorts_csv(&s.cohorts))?;
    }
    if !s.states.is_empty() {
        report::write_json(out.join("states.json"), &s.states)?;
        report::write_text(out.join("states.csv"), &report::metric_reports_csv(&s.states))?;
    }
    if !s.correlations.is_empty() {
        report::write_text(out.join("correlations.csv"), &report::correlations_csv(&s.correlations))?;
    }
    Ok(())
}

fn scores_text(s: &Scores) -> String {
    let mut out = metric_table(std::slice::from_ref(&s.corpus));
    if !s.cohorts.is_empty() {
        out.push('\n');
        let rows: Vec<MetricReport> =
            s.cohorts.iter().flat_map(|c| [c.cohort.clone(), c.complement.clone()]).collect();
        out.push_str(&metric_table(&rows));
    }
    if !s.states.is_empty() {
        out.push('\n');
        out.push_str(&metric_table(&s.states));
    }
    out
}

pub fn score(cfg: &RunConfig) -> Res<()> {
    let ctx = Context::load(cfg)?;
    let (ds, _) = stream_dialogues(cfg, &ctx)?;
    let scores = run_score(cfg, &ctx, &ds);
    write_scores(&cfg.out, &scores)?;
    if let Some(geo) = &ctx.geo {
        write_state_plots(&cfg.out, &scores.states, geo)?;
    }
    print!("{}", scores_text(&scores));
    Ok(())
}

// ---------------------------------------------------------------------------
// comparison

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub sample_size: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub groups: Vec<GroupSummary<f64>>,
    pub distances: Vec<ScoreDistance>,
}

/// Per-movie `(B_F, B_M)` grouped by pass (`b = 3`) and fail. The rating
/// comes from the movie table when it has one, otherwise from the script.
fn movie_groups(scripts: &ScriptRun, movies: &[MovieRecord]) -> Vec<ScoreGroup> {
    let rated: BTreeMap<&str, u8> =
        movies.iter().filter_map(|m| m.bechdel_b.map(|b| (m.movie_id.as_str(), b))).collect();
    let mut pass = ScoreGroup {
        label: "b=3".into(),
        points: vec![],
    };
    let mut fail = ScoreGroup {
        label: "b<3".into(),
        points: vec![],
    };
    for s in &scripts.summaries {
        let (Some(bf), Some(bm)) = (s.report.b_f.value, s.report.b_m.value) else { continue };
        let b = rated.get(s.movie_id.as_str()).copied().unwrap_or(s.classic_b);
        if b == 3 { &mut pass } else { &mut fail }.points.push((bf, bm));
    }
    vec![pass, fail]
}

pub fn run_compare(cfg: &RunConfig, streams: &[(String, DialogueSet)], scripts: Option<&ScriptRun>) -> Res<Comparison> {
    let mut rows = Vec::new();
    for (label, ds) in streams {
        let samples = bootstrap_score_samples(ds, cfg.sample_size, cfg.n_samples, cfg.seed)?;
        rows.push(ScoreGroup {
            label: label.clone(),
            points: samples.points(),
        });
    }
    let columns = match scripts {
        Some(run) => {
            let movies = match &cfg.movies {
                Some(p) => ingest::read_movies(p)?,
                None => vec![],
            };
            movie_groups(run, &movies)
        }
        None => vec![],
    };
    let mut distances = distance_table(&rows, &columns, cfg.significance);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            distances.extend(distance_table(&rows[i..=i], &rows[j..=j], cfg.significance));
        }
    }
    let groups = rows.iter().chain(&columns).filter(|g| !g.points.is_empty()).map(ScoreGroup::summary).collect();
    Ok(Comparison {
        sample_size: cfg.sample_size,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        groups,
        distances,
    })
}

fn distances_csv(rows: &[ScoreDistance]) -> String {
    let mut out = String::from("from,to,delta_b_f,p_b_f,delta_b_m,p_b_m,euclidean\n");
    for d in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.from,
            d.to,
            fmt_opt(Some(d.delta_b_f.effect)),
            fmt_opt(Some(d.delta_b_f.p_value)),
            fmt_opt(Some(d.delta_b_m.effect)),
            fmt_opt(Some(d.delta_b_m.p_value)),
            fmt_opt(Some(d.euclidean))
        ));
    }
    out
}

fn comparison_text(c: &Comparison) -> String {
    let rows: Vec<Vec<String>> = c
        .groups
        .iter()
        .map(|g| {
            vec![
                g.label.clone(),
                g.n.to_string(),
                fmt_opt(Some(g.centroid.0)),
                fmt_opt(Some(g.centroid.1)),
            ]
        })
        .collect();
    let mut out = format_table(&["group", "n", "B_F", "B_M"], &rows);
    if !c.distances.is_empty() {
        out.push('\n');
        let rows: Vec<Vec<String>> = c
            .distances
            .iter()
            .map(|d| {
                vec![
                    format!("{} vs {}", d.from, d.to),
                    fmt_opt(Some(d.delta_b_f.effect)),
                    fmt_opt(Some(d.delta_b_m.effect)),
                    fmt_opt(Some(d.euclidean)),
                ]
            })
            .collect();
        out.push_str(&format_table(&["groups", "dB_F", "dB_M", "euclidean"], &rows));
    }
    out
}

fn write_comparison(out: &Path, c: &Comparison) -> Res<()> {
    report::write_json(out.join("comparison.json"), c)?;
    report::write_text(out.join("distances.csv"), &distances_csv(&c.distances))?;
    report::write_text(out.join("centroids.svg"), &report::centroid_svg("Bechdel score centroids", &c.groups))?;
    Ok(())
}

fn stream_sets(cfg: &RunConfig, ctx: &Context) -> Res<Vec<(String, DialogueSet)>> {
    if cfg.dialogues.is_empty() {
        let (ds, _) = stream_dialogues(cfg, ctx)?;
        return Ok(vec![("stream".into(), ds)]);
    }
    cfg.dialogues
        .iter()
        .map(|p| {
            let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let loaded = ingest::read_dialogues(p)?;
            Ok((label.clone(), DialogueSet::new(label, loaded.records)))
        })
        .collect()
}

pub fn compare(cfg: &RunConfig) -> Res<()> {
    let ctx = Context::load(cfg)?;
    let streams = stream_sets(cfg, &ctx)?;
    let scripts = match cfg.scripts {
        Some(_) => Some(run_scripts(cfg, &ctx)?),
        None => None,
    };
    let c = run_compare(cfg, &streams, scripts.as_ref())?;
    write_comparison(&cfg.out, &c)?;
    print!("{}", comparison_text(&c));
    Ok(())
}

// ---------------------------------------------------------------------------
// full report

#[derive(Debug, Serialize)]
pub struct ShareStudy {
    pub by_sharer_gender: ShareComparison<f64>,
    pub popularity_by_pass: BTreeMap<&'static str, Option<StatResult>>,
    pub imbalance_by_pass: ImbalanceByPass<f64>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub segmentation: Option<SegmentSummary>,
    pub movies: Vec<ScriptSummary>,
    pub scores: Option<Scores>,
    pub comparison: Option<Comparison>,
    pub shares: Option<ShareStudy>,
}

pub fn report(cfg: &RunConfig) -> Res<()> {
    let ctx = Context::load(cfg)?;
    let out = &cfg.out;
    let scripts = match cfg.scripts {
        Some(_) => {
            let run = run_scripts(cfg, &ctx)?;
            write_scripts(&out.join("movies"), &run)?;
            Some(run)
        }
        None => None,
    };
    let stream = if !cfg.dialogues.is_empty() || cfg.messages.is_some() {
        let (ds, seg) = stream_dialogues(cfg, &ctx)?;
        if let Some((seg, summary)) = &seg {
            write_segment(&out.join("segment"), seg, summary)?;
        }
        Some((ds, seg.map(|s| s.1)))
    } else {
        None
    };
    if scripts.is_none() && stream.is_none() {
        return Err(CliError::MissingInput(
            "report needs --scripts, --messages or --dialogues".into(),
        ));
    }

    let mut rep = Report {
        segmentation: None,
        movies: scripts.as_ref().map(|s| s.summaries.clone()).unwrap_or_default(),
        scores: None,
        comparison: None,
        shares: None,
    };
    if let Some((ds, summary)) = stream {
        let scores = run_score(cfg, &ctx, &ds);
        write_scores(&out.join("scores"), &scores)?;
        if let Some(geo) = &ctx.geo {
            write_state_plots(&out.join("scores"), &scores.states, geo)?;
        }
        if ds.len() >= cfg.sample_size {
            let c = run_compare(cfg, &[("stream".into(), ds.clone())], scripts.as_ref())?;
            write_comparison(&out.join("compare"), &c)?;
            rep.comparison = Some(c);
        } else {
            log::warn!(
                "{} stream dialogues, fewer than the sample size {}; comparison skipped",
                ds.len(),
                cfg.sample_size
            );
        }
        if let (Some(shares), Some(movies), Some(users)) = (&cfg.shares, &cfg.movies, &ctx.users) {
            let shares = ingest::read_shares(shares)?;
            let movies = ingest::read_movies(movies)?;
            let scores_by_movie: BTreeMap<String, (f64, f64)> = rep
                .movies
                .iter()
                .filter_map(|s| Some((s.movie_id.clone(), (s.report.b_f.value?, s.report.b_m.value?))))
                .collect();
            let study = ShareStudy {
                by_sharer_gender: compare_shares_by_sharer_gender(&shares, &movies, &scores_by_movie, users),
                popularity_by_pass: popularity_by_pass(&movies),
                imbalance_by_pass: sharer_imbalance_by_pass(&shares, &movies, &ds, users, cfg.min_ego_dialogues),
            };
            report::write_json(out.join("shares.json"), &study)?;
            rep.shares = Some(study);
        }
        rep.segmentation = summary;
        rep.scores = Some(scores);
    }
    report::write_json(out.join("report.json"), &rep)?;

    let mut text = String::new();
    if let Some(s) = &rep.segmentation {
        text.push_str(&segment_text(s));
        text.push('\n');
    }
    if !rep.movies.is_empty() {
        text.push_str(&movies_table(&rep.movies));
        text.push('\n');
    }
    if let Some(s) = &rep.scores {
        text.push_str(&scores_text(s));
        text.push('\n');
    }
    if let Some(c) = &rep.comparison {
        text.push_str(&comparison_text(c));
    }
    report::write_text(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn write_state_plots(out: &Path, states: &[MetricReport], geo: &GeoTables) -> Res<()> {
    type Cov = fn(&ingest::StateRecord) -> f64;
    let covariates: [(&str, Cov); 2] = [
        ("avg_income", |s| s.avg_income),
        ("latitude", |s| s.largest_city_latitude as f64),
    ];
    for (metric, pick) in [("I_F", 0usize), ("I_M", 1)] {
        for (cov, f) in covariates {
            let points: Vec<(String, f64, f64)> = states
                .iter()
                .filter_map(|r| {
                    let y = if pick == 0 { r.i_f.value } else { r.i_m.value }?;
                    Some((r.unit.clone(), f(geo.state(&r.unit)?), y))
                })
                .collect();
            if points.is_empty() {
                continue;
            }
            let svg = report::scatter_svg(&format!("{metric} by state"), cov, metric, &points, true);
            report::write_text(out.join(format!("{}_vs_{cov}.svg", metric.to_lowercase())), &svg)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// demo corpus

pub fn synth(out: &Path, seed: u64, messages: usize) -> Res<()> {
    let cfg = SynthConfig {
        seed,
        n_messages: messages,
        ..SynthConfig::default()
    };
    let corpus = generate(&cfg)?;
    corpus.write(out)?;
    println!(
        "wrote {} messages, {} profiles, {} scripts to {}",
        corpus.messages.len(),
        corpus.profiles.len(),
        corpus.scripts.len(),
        out.display()
    );
    Ok(())
}
