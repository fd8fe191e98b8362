//! Study recipes: share-cohort comparisons, profile cohorts, state maps and
//! their correlates, and distances between groups in Bechdel-score space.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gender::{infer_gender, locate_user, profile_flags, Gender, GenderLexicon, KeywordSets};
use crate::gender::{Location, ProfileFlags, Urbanity};
use crate::ingest::{GeoTables, MovieRecord, ShareRecord, UserProfile};
use crate::metrics::{dialogue_imbalance, Dialogue, DialogueSet, MetricReport, ReportOptions};
use crate::num::Real;
use crate::stats::{partial_pearson, pearson, proportion_test, spearman, wilcoxon_ranksum, StatResult};

pub const DEFAULT_MIN_EGO_DIALOGUES: usize = 25;

/// Everything the recipes need to know about one user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAttributes {
    pub gender: Gender,
    pub flags: ProfileFlags,
    pub location: Location,
}

/// Resolved attributes keyed by user id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserDirectory(BTreeMap<String, UserAttributes>);

impl UserDirectory {
    pub fn new(users: BTreeMap<String, UserAttributes>) -> Self {
        UserDirectory(users)
    }

    pub fn get(&self, user: &str) -> Option<&UserAttributes> {
        self.0.get(user)
    }

    pub fn gender(&self, user: &str) -> Gender {
        self.get(user).map_or(Gender::U, |u| u.gender)
    }

    pub fn genders(&self) -> BTreeMap<String, Gender> {
        self.0.iter().map(|(k, v)| (k.clone(), v.gender)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &UserAttributes)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Infers gender, profile flags and location for every profile.
pub fn resolve_users(
    profiles: &[UserProfile],
    lexicon: &GenderLexicon,
    keywords: &KeywordSets,
    geo: &GeoTables,
) -> UserDirectory {
    UserDirectory(
        profiles
            .par_iter()
            .map(|p| {
                let attrs = UserAttributes {
                    gender: infer_gender(&p.full_name, lexicon),
                    flags: profile_flags(&p.bio, keywords),
                    location: locate_user(&p.location_raw, geo),
                };
                (p.user_id.clone(), attrs)
            })
            .collect(),
    )
}

fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / T::lit(2.0)
    })
}

fn ranksum<T: Real>(a: &[T], b: &[T]) -> Option<StatResult<T>> {
    wilcoxon_ranksum(a, b).ok()
}

// ---------------------------------------------------------------------------
// shares

/// Female-sharer vs male-sharer distributions of the shared movies' scores.
/// Every test compares female shares (`a`) against male shares (`b`); tests
/// with an empty side are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareComparison<T> {
    pub female_shares: usize,
    pub male_shares: usize,
    pub b_f: Option<StatResult<T>>,
    pub b_m: Option<StatResult<T>>,
    pub bechdel_b: Option<StatResult<T>>,
    /// Proportion of shares about movies passing the test (undisputed `b = 3`).
    pub pass_rate: Option<StatResult<T>>,
}

/// Compares what female and male users share. Shares are counted
/// individually, so a movie shared twice contributes twice. `movie_scores`
/// holds `(B_F, B_M)` per movie id where a script was analysed.
pub fn compare_shares_by_sharer_gender<T: Real>(
    shares: &[ShareRecord],
    movies: &[MovieRecord],
    movie_scores: &BTreeMap<String, (T, T)>,
    users: &UserDirectory,
) -> ShareComparison<T> {
    let by_id: BTreeMap<&str, &MovieRecord> = movies.iter().map(|m| (m.movie_id.as_str(), m)).collect();
    #[derive(Default)]
    struct Side<T> {
        n: usize,
        bf: Vec<T>,
        bm: Vec<T>,
        b: Vec<T>,
        pass: (u64, u64),
    }
    let mut sides: [Side<T>; 2] = [
        Side { n: 0, bf: vec![], bm: vec![], b: vec![], pass: (0, 0) },
        Side { n: 0, bf: vec![], bm: vec![], b: vec![], pass: (0, 0) },
    ];
    for s in shares {
        let side = match users.gender(&s.user_id) {
            Gender::F => &mut sides[0],
            Gender::M => &mut sides[1],
            Gender::U => continue,
        };
        side.n += 1;
        if let Some(&(bf, bm)) = movie_scores.get(&s.movie_id) {
            side.bf.push(bf);
            side.bm.push(bm);
        }
        if let Some(m) = by_id.get(s.movie_id.as_str()) {
            if let Some(b) = m.bechdel_b {
                side.b.push(T::lit(f64::from(b)));
            }
            if let Some(p) = m.passes() {
                side.pass.0 += u64::from(p);
                side.pass.1 += 1;
            }
        }
    }
    let [f, m] = sides;
    ShareComparison {
        female_shares: f.n,
        male_shares: m.n,
        b_f: ranksum(&f.bf, &m.bf),
        b_m: ranksum(&f.bm, &m.bm),
        bechdel_b: ranksum(&f.b, &m.b),
        pass_rate: proportion_test(f.pass.0, f.pass.1, m.pass.0, m.pass.1).ok(),
    }
}

/// Views, likes and dislikes of passing vs failing movies (`a` = passing).
pub fn popularity_by_pass<T: Real>(movies: &[MovieRecord]) -> BTreeMap<&'static str, Option<StatResult<T>>> {
    type Field = fn(&MovieRecord) -> Option<u64>;
    let fields: [(&'static str, Field); 3] = [
        ("views", |m| m.views),
        ("likes", |m| m.likes),
        ("dislikes", |m| m.dislikes),
    ];
    fields
        .iter()
        .map(|&(name, get)| {
            let (mut pass, mut fail) = (Vec::new(), Vec::new());
            for m in movies {
                if let (Some(p), Some(v)) = (m.passes(), get(m)) {
                    let v = T::from_u64(v).expect("count fits");
                    if p { pass.push(v) } else { fail.push(v) }
                }
            }
            (name, ranksum(&pass, &fail))
        })
        .collect()
}

/// Ego dialogue imbalance of one user: `X_F` over a woman's dialogues, `X_M`
/// over a man's. `None` below `min_dialogues` or for unknown gender.
pub fn ego_imbalance<T: Real>(dialogues: &[&Dialogue], gender: Gender, min_dialogues: usize) -> Option<T> {
    if dialogues.len() < min_dialogues {
        return None;
    }
    let ds = DialogueSet::new("ego", dialogues.iter().map(|&d| d.clone()).collect());
    let (xf, xm) = dialogue_imbalance(&ds);
    match gender {
        Gender::F => xf.ok().map(|p| p.value()),
        Gender::M => xm.ok().map(|p| p.value()),
        Gender::U => None,
    }
}

fn ego_index(ds: &DialogueSet) -> BTreeMap<&str, Vec<&Dialogue>> {
    let mut idx: BTreeMap<&str, Vec<&Dialogue>> = BTreeMap::new();
    for d in ds.dialogues() {
        let (a, b) = (&d.participants.0, &d.participants.1);
        idx.entry(a.as_str()).or_default().push(d);
        if b != a {
            idx.entry(b.as_str()).or_default().push(d);
        }
    }
    idx
}

/// Ego imbalance per share, by sharer gender and movie pass status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceByPass<T> {
    pub min_dialogues: usize,
    pub female_pass: Vec<T>,
    pub female_fail: Vec<T>,
    pub male_pass: Vec<T>,
    pub male_fail: Vec<T>,
    /// Median ego imbalance of the shares of each test value: `(female, male)`.
    pub medians_by_b: BTreeMap<u8, (Option<T>, Option<T>)>,
    pub female_pass_vs_fail: Option<StatResult<T>>,
    pub male_pass_vs_fail: Option<StatResult<T>>,
    /// Female `X_F` against male `X_M` among shares of passing movies.
    pub pass_female_vs_male: Option<StatResult<T>>,
    pub fail_female_vs_male: Option<StatResult<T>>,
}

pub fn sharer_imbalance_by_pass<T: Real>(
    shares: &[ShareRecord],
    movies: &[MovieRecord],
    ds: &DialogueSet,
    users: &UserDirectory,
    min_dialogues: usize,
) -> ImbalanceByPass<T> {
    let by_id: BTreeMap<&str, &MovieRecord> = movies.iter().map(|m| (m.movie_id.as_str(), m)).collect();
    let index = ego_index(ds);
    let mut ego_cache: BTreeMap<&str, Option<T>> = BTreeMap::new();
    let mut out = ImbalanceByPass {
        min_dialogues,
        female_pass: vec![],
        female_fail: vec![],
        male_pass: vec![],
        male_fail: vec![],
        medians_by_b: BTreeMap::new(),
        female_pass_vs_fail: None,
        male_pass_vs_fail: None,
        pass_female_vs_male: None,
        fail_female_vs_male: None,
    };
    let mut by_b: BTreeMap<u8, (Vec<T>, Vec<T>)> = BTreeMap::new();
    for s in shares {
        let Some(movie) = by_id.get(s.movie_id.as_str()) else { continue };
        let gender = users.gender(&s.user_id);
        let x = *ego_cache.entry(s.user_id.as_str()).or_insert_with(|| {
            let own = index.get(s.user_id.as_str()).map_or(&[][..], Vec::as_slice);
            ego_imbalance(own, gender, min_dialogues)
        });
        let Some(x) = x else { continue };
        if let Some(b) = movie.bechdel_b {
            let cell = by_b.entry(b).or_default();
            if gender == Gender::F { cell.0.push(x) } else { cell.1.push(x) }
        }
        match (gender, movie.passes()) {
            (Gender::F, Some(true)) => out.female_pass.push(x),
            (Gender::F, Some(false)) => out.female_fail.push(x),
            (Gender::M, Some(true)) => out.male_pass.push(x),
            (Gender::M, Some(false)) => out.male_fail.push(x),
            _ => {}
        }
    }
    out.medians_by_b = by_b.into_iter().map(|(b, (f, m))| (b, (median(&f), median(&m)))).collect();
    out.female_pass_vs_fail = ranksum(&out.female_pass, &out.female_fail);
    out.male_pass_vs_fail = ranksum(&out.male_pass, &out.male_fail);
    out.pass_female_vs_male = ranksum(&out.female_pass, &out.male_pass);
    out.fail_female_vs_male = ranksum(&out.female_fail, &out.male_fail);
    out
}

// ---------------------------------------------------------------------------
// cohorts

/// A named predicate over user attributes.
#[derive(Clone)]
pub struct CohortSpec {
    pub label: String,
    predicate: Arc<dyn Fn(&UserAttributes) -> bool + Send + Sync>,
}

impl fmt::Debug for CohortSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CohortSpec").field("label", &self.label).finish_non_exhaustive()
    }
}

impl CohortSpec {
    pub fn new(label: impl Into<String>, predicate: impl Fn(&UserAttributes) -> bool + Send + Sync + 'static) -> Self {
        CohortSpec {
            label: label.into(),
            predicate: Arc::new(predicate),
        }
    }

    pub fn contains(&self, user: &UserAttributes) -> bool {
        (self.predicate)(user)
    }

    pub fn everyone() -> Self {
        Self::new("everyone", |_| true)
    }

    pub fn mothers() -> Self {
        Self::new("mothers", |u| u.flags.mother)
    }

    pub fn fathers() -> Self {
        Self::new("fathers", |u| u.flags.father)
    }

    pub fn parents() -> Self {
        Self::new("parents", |u| u.flags.mother || u.flags.father)
    }

    pub fn students() -> Self {
        Self::new("students", |u| u.flags.student)
    }

    pub fn urban() -> Self {
        Self::new("urban", |u| u.location.urbanity == Urbanity::Urban)
    }

    pub fn rural() -> Self {
        Self::new("rural", |u| u.location.urbanity == Urbanity::Rural)
    }

    pub fn state(code: &str) -> Self {
        let code = code.to_string();
        Self::new(format!("state:{code}"), move |u| u.location.state.as_deref() == Some(&code))
    }

    /// Built-in cohort by name: `everyone`, `mothers`, `fathers`, `parents`,
    /// `students`, `urban`, `rural` or `state:XX`.
    pub fn builtin(name: &str) -> Option<Self> {
        Some(match name {
            "everyone" => Self::everyone(),
            "mothers" => Self::mothers(),
            "fathers" => Self::fathers(),
            "parents" => Self::parents(),
            "students" => Self::students(),
            "urban" => Self::urban(),
            "rural" => Self::rural(),
            _ => Self::state(name.strip_prefix("state:")?),
        })
    }

    pub const BUILTIN: &'static [&'static str] =
        &["mothers", "fathers", "parents", "students", "urban", "rural"];
}

/// Which side of a cohort a dialogue falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Cohort,
    Complement,
    /// One endpoint in, one out; or an endpoint without a profile.
    Neither,
}

pub fn membership(d: &Dialogue, users: &UserDirectory, cohort: &CohortSpec) -> Membership {
    match (users.get(&d.participants.0), users.get(&d.participants.1)) {
        (Some(a), Some(b)) => match (cohort.contains(a), cohort.contains(b)) {
            (true, true) => Membership::Cohort,
            (false, false) => Membership::Complement,
            _ => Membership::Neither,
        },
        _ => Membership::Neither,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortComparison<T> {
    pub label: String,
    pub cohort: MetricReport<T>,
    pub complement: MetricReport<T>,
    /// Cohort `I_F` against complement `I_F`; absent unless both are defined.
    pub i_f_test: Option<StatResult<T>>,
    pub i_m_test: Option<StatResult<T>>,
}

/// Independence of dialogues between two cohort members against dialogues
/// between two non-members. Mixed dialogues belong to neither side.
pub fn cohort_independence<T: Real>(
    ds: &DialogueSet,
    users: &UserDirectory,
    cohort: &CohortSpec,
    opts: &ReportOptions,
) -> CohortComparison<T> {
    let inside = ds.filter(cohort.label.clone(), |d| membership(d, users, cohort) == Membership::Cohort);
    let outside = ds.filter(format!("not {}", cohort.label), |d| {
        membership(d, users, cohort) == Membership::Complement
    });
    let cohort_report: MetricReport<T> = MetricReport::compute(inside.label(), &inside, opts);
    let complement: MetricReport<T> = MetricReport::compute(outside.label(), &outside, opts);
    let test = |a: &crate::metrics::Estimate<T>, b: &crate::metrics::Estimate<T>| {
        if a.is_defined() && b.is_defined() {
            proportion_test(a.hits, a.total, b.hits, b.total).ok()
        } else {
            None
        }
    };
    CohortComparison {
        label: cohort.label.clone(),
        i_f_test: test(&cohort_report.i_f, &complement.i_f),
        i_m_test: test(&cohort_report.i_m, &complement.i_m),
        cohort: cohort_report,
        complement,
    }
}

// ---------------------------------------------------------------------------
// geography

/// Per-state reports over dialogues whose two endpoints are located in the
/// same state, ordered by state code. States without any such dialogue are
/// omitted; thin states keep undefined independence values.
pub fn state_independence_map<T: Real>(
    ds: &DialogueSet,
    users: &UserDirectory,
    opts: &ReportOptions,
) -> Vec<MetricReport<T>> {
    let mut by_state: BTreeMap<&str, Vec<Dialogue>> = BTreeMap::new();
    for d in ds.dialogues() {
        let state = |u: &str| users.get(u).and_then(|a| a.location.state.as_deref());
        if let (Some(a), Some(b)) = (state(&d.participants.0), state(&d.participants.1)) {
            if a == b {
                by_state.entry(a).or_default().push(d.clone());
            }
        }
    }
    by_state
        .into_par_iter()
        .map(|(state, v)| MetricReport::compute(state, &DialogueSet::new(state, v), opts))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow<T> {
    pub metric: String,
    pub against: String,
    pub control: Option<String>,
    pub n: usize,
    pub pearson: Option<StatResult<T>>,
    pub spearman: Option<StatResult<T>>,
    /// Why the correlation could not be computed.
    pub error: Option<String>,
}

const COVARIATES: [&str; 4] = ["avg_income", "gini", "latitude", "longitude"];

fn state_columns<T: Real>(reports: &[MetricReport<T>], geo: &GeoTables) -> BTreeMap<String, BTreeMap<String, T>> {
    let mut cols: BTreeMap<String, BTreeMap<String, T>> = BTreeMap::new();
    for r in reports {
        let mut put = |name: &str, v: Option<T>| {
            if let Some(v) = v {
                cols.entry(name.to_string()).or_default().insert(r.unit.clone(), v);
            }
        };
        put("I_F", r.i_f.value);
        put("I_M", r.i_m.value);
        if let Some(s) = geo.state(&r.unit) {
            put("avg_income", T::from_f64(s.avg_income));
            put("gini", T::from_f64(s.gini));
            put("latitude", T::from_i64(s.largest_city_latitude));
            put("longitude", T::from_i64(s.largest_city_longitude));
        }
    }
    cols
}

/// Pearson and Spearman correlations of `I_F` and `I_M` with each covariate
/// and with each other, plus partial Pearson correlations controlling for
/// every remaining variable in turn. Each row uses the states where all of
/// its variables are defined.
pub fn state_correlates<T: Real>(reports: &[MetricReport<T>], geo: &GeoTables) -> Vec<CorrelationRow<T>> {
    let cols = state_columns(reports, geo);
    let empty = BTreeMap::new();
    let col = |name: &str| cols.get(name).unwrap_or(&empty);
    let mut rows = Vec::new();
    for metric in ["I_F", "I_M"] {
        let other = if metric == "I_F" { "I_M" } else { "I_F" };
        let against: Vec<&str> = COVARIATES.iter().copied().chain([other]).collect();
        for &x in &against {
            let controls: Vec<Option<&str>> =
                [None].into_iter().chain(against.iter().filter(|&&c| c != x).map(|&c| Some(c))).collect();
            for control in controls {
                let names: Vec<&str> = [metric, x].into_iter().chain(control).collect();
                let states: Vec<&String> = col(metric)
                    .keys()
                    .filter(|s| names.iter().all(|n| col(n).contains_key(*s)))
                    .collect();
                let pick = |n: &str| -> Vec<T> { states.iter().map(|s| col(n)[*s]).collect() };
                let (y, xs) = (pick(metric), pick(x));
                let mut row = CorrelationRow {
                    metric: metric.into(),
                    against: x.into(),
                    control: control.map(str::to_string),
                    n: states.len(),
                    pearson: None,
                    spearman: None,
                    error: None,
                };
                let result = match control {
                    None => pearson(&y, &xs).inspect(|_| {
                        row.spearman = spearman(&y, &xs).ok();
                    }),
                    Some(c) => partial_pearson(&y, &xs, &[pick(c)]),
                };
                match result {
                    Ok(r) => row.pearson = Some(r),
                    Err(e) => row.error = Some(e.to_string()),
                }
                rows.push(row);
            }
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// groups in (B_F, B_M) space

/// A set of `(B_F, B_M)` points: bootstrap subsets of a stream corpus or the
/// per-movie scores of a movie group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreGroup<T> {
    pub label: String,
    pub points: Vec<(T, T)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary<T> {
    pub label: String,
    pub n: usize,
    pub centroid: (T, T),
    pub sd: (T, T),
}

impl<T: Real> ScoreGroup<T> {
    pub fn summary(&self) -> GroupSummary<T> {
        let n = self.points.len();
        let nf = T::from_count(n);
        let (sf, sm) = self.points.iter().fold((T::zero(), T::zero()), |(a, b), &(f, m)| (a + f, b + m));
        let centroid = if n == 0 { (T::nan(), T::nan()) } else { (sf / nf, sm / nf) };
        let sd = if n < 2 {
            (T::zero(), T::zero())
        } else {
            let (vf, vm) = self.points.iter().fold((T::zero(), T::zero()), |(a, b), &(f, m)| {
                (a + (f - centroid.0).powi(2), b + (m - centroid.1).powi(2))
            });
            let d = T::from_count(n - 1);
            ((vf / d).sqrt(), (vm / d).sqrt())
        };
        GroupSummary {
            label: self.label.clone(),
            n,
            centroid,
            sd,
        }
    }
}

/// Location shifts between two groups on each axis (Hodges–Lehmann with
/// rank-sum significance) and their Euclidean combination, in which shifts
/// that are not significant at `significance` count as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistance<T> {
    pub from: String,
    pub to: String,
    pub delta_b_f: StatResult<T>,
    pub delta_b_m: StatResult<T>,
    pub euclidean: T,
}

pub fn score_distance<T: Real>(a: &ScoreGroup<T>, b: &ScoreGroup<T>, significance: T) -> Result<ScoreDistance<T>> {
    let axis = |k: usize| -> Vec<T> { a.points.iter().map(|p| if k == 0 { p.0 } else { p.1 }).collect() };
    let axis_b = |k: usize| -> Vec<T> { b.points.iter().map(|p| if k == 0 { p.0 } else { p.1 }).collect() };
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let df = wilcoxon_ranksum(&axis(0), &axis_b(0))?;
    let dm = wilcoxon_ranksum(&axis(1), &axis_b(1))?;
    let part = |r: &StatResult<T>| if r.p_value < significance { r.effect } else { T::zero() };
    Ok(ScoreDistance {
        from: a.label.clone(),
        to: b.label.clone(),
        euclidean: (part(&df).powi(2) + part(&dm).powi(2)).sqrt(),
        delta_b_f: df,
        delta_b_m: dm,
    })
}

/// Distances between every ordered pair `(rows[i], columns[j])`.
pub fn distance_table<T: Real>(
    rows: &[ScoreGroup<T>],
    columns: &[ScoreGroup<T>],
    significance: T,
) -> Vec<ScoreDistance<T>> {
    rows.iter()
        .flat_map(|r| columns.iter().map(move |c| (r, c)))
        .filter_map(|(r, c)| score_distance(r, c, significance).ok())
        .collect()
}
