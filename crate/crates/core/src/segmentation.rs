//! Dialogue segmentation of pair message streams: inter-event gaps, the
//! bimodal (truncated power-law head, exponential tail) fit that selects the
//! cutoff τ, and splitting at silences longer than τ.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gender::{detect_references, Gender, ReferenceLexicon};
use crate::ingest::{filter_interacting_pairs, Message, PairRule, UserPair};
use crate::metrics::{Dialogue, DialogueSet, Origin};
use crate::num::Real;

pub const DEFAULT_MIN_GAPS: usize = 50;
pub const DEFAULT_T_MIN: f64 = 1.0;
pub const DEFAULT_MAX_CANDIDATES: usize = 512;
pub const DEFAULT_MIN_MENTIONS: u64 = 10;

const ALPHA_LO: f64 = 1.01;
const ALPHA_HI: f64 = 5.0;
const ALPHA_RTOL: f64 = 1e-6;
const GRID_LO_Q: f64 = 0.05;
const GRID_HI_Q: f64 = 0.99;

/// Which part of the gap distribution the KS distance is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsScope {
    /// Gaps in `[t_min, τ]` against the truncated power law alone.
    Head,
    /// All gaps against the two-regime mixture (head weight `n_head / n`).
    #[default]
    Bimodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions<T> {
    pub t_min: T,
    pub min_gaps: usize,
    pub scope: KsScope,
    /// Candidate τ values scanned in the coarse pass; the neighbourhood of
    /// the coarse optimum is then scanned exhaustively.
    pub max_candidates: usize,
    /// Quantization step of the gaps (1 for whole seconds, 0 for continuous
    /// data). The model CDF is compared with each ECDF step at the edges of
    /// the step's rounding interval.
    pub resolution: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            t_min: T::lit(DEFAULT_T_MIN),
            min_gaps: DEFAULT_MIN_GAPS,
            scope: KsScope::default(),
            max_candidates: DEFAULT_MAX_CANDIDATES,
            resolution: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BimodalFit<T> {
    pub alpha: T,
    /// Seconds.
    pub tau: T,
    /// Tail rate, 1/seconds.
    pub beta: T,
    #[serde(rename = "ks")]
    pub ks_distance: T,
    pub n_head: usize,
    pub t_min: T,
}

/// Messages of `pair`: authored by one member and mentioning the other,
/// ordered by timestamp (ties keep input order).
pub fn pair_stream<'a>(messages: &'a [Message], pair: &UserPair) -> Vec<&'a Message> {
    let mut out: Vec<&Message> = messages
        .iter()
        .filter(|m| pair.other(&m.author_id).is_some_and(|o| m.mentions(o)))
        .collect();
    out.sort_by_key(|m| m.timestamp);
    out
}

/// Successive differences of sorted timestamps; zero gaps become 1 s.
pub fn timestamp_gaps(timestamps: &[i64]) -> Vec<u64> {
    timestamps
        .windows(2)
        .map(|w| (w[1] - w[0]).unsigned_abs().max(1))
        .collect()
}

pub fn inter_event_gaps(messages: &[Message], pair: &UserPair) -> Vec<u64> {
    let ts: Vec<i64> = pair_stream(messages, pair).iter().map(|m| m.timestamp).collect();
    timestamp_gaps(&ts)
}

/// Score of the log-likelihood of a power law truncated to `[1, r]` (gaps
/// already divided by `t_min`), with `sum_ln = Σ ln x`. Decreasing in α.
fn alpha_score<T: Real>(alpha: T, n: T, sum_ln: T, ln_r: T) -> T {
    let u = (alpha - T::one()) * ln_r;
    n / (alpha - T::one()) - sum_ln - n * ln_r / u.exp_m1()
}

/// Maximum-likelihood α of a power law normalized on `[1, r]`, by bisection
/// on `[1.01, 5]`. Roots outside the bracket clamp to its ends.
fn solve_alpha<T: Real>(n: T, sum_ln: T, ln_r: T) -> T {
    let mut lo = T::lit(ALPHA_LO);
    let mut hi = T::lit(ALPHA_HI);
    if alpha_score(lo, n, sum_ln, ln_r) <= T::zero() {
        return lo;
    }
    if alpha_score(hi, n, sum_ln, ln_r) >= T::zero() {
        return hi;
    }
    let tol = T::lit(ALPHA_RTOL).max(T::tolerance());
    let two = T::lit(2.0);
    while hi - lo > tol * (hi + lo) / two {
        let mid = (lo + hi) / two;
        if alpha_score(mid, n, sum_ln, ln_r) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

/// α for gaps truncated to `[t_min, tau]`; gaps outside are ignored.
pub fn fit_truncated_alpha<T: Real>(gaps: &[T], t_min: T, tau: T) -> Result<T> {
    if !(t_min > T::zero() && tau > t_min) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < t_min < tau, got t_min={t_min:?} tau={tau:?}"
        )));
    }
    let head: Vec<T> = gaps.iter().copied().filter(|&g| g >= t_min && g <= tau).collect();
    if head.is_empty() {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let sum_ln = head.iter().fold(T::zero(), |s, &g| s + (g / t_min).ln());
    Ok(solve_alpha(T::from_count(head.len()), sum_ln, (tau / t_min).ln()))
}

/// CDF of the power law truncated to `[1, r]` at `x` (already scaled).
fn head_cdf<T: Real>(x: T, alpha: T, ln_r: T) -> T {
    let a1 = alpha - T::one();
    (-a1 * x.ln()).exp_m1() / (-a1 * ln_r).exp_m1()
}

struct Prepared<T> {
    /// Distinct gap values (≥ t_min), ascending.
    values: Vec<T>,
    /// Number of gaps ≤ `values[k]`.
    cum: Vec<usize>,
    /// Σ ln(g / t_min) over gaps ≤ `values[k]`.
    cum_ln: Vec<T>,
    /// Σ g over gaps ≤ `values[k]`.
    cum_sum: Vec<T>,
    n: usize,
    t_min: T,
}

impl<T: Real> Prepared<T> {
    fn new(gaps: &[T], t_min: T) -> Self {
        let mut sorted: Vec<T> = gaps.iter().copied().filter(|&g| g >= t_min).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("gaps are finite"));
        let mut p = Prepared {
            values: Vec::new(),
            cum: Vec::new(),
            cum_ln: Vec::new(),
            cum_sum: Vec::new(),
            n: sorted.len(),
            t_min,
        };
        let (mut c, mut sl, mut s) = (0usize, T::zero(), T::zero());
        for (i, &g) in sorted.iter().enumerate() {
            c += 1;
            sl = sl + (g / t_min).ln();
            s = s + g;
            if sorted.get(i + 1) != Some(&g) {
                p.values.push(g);
                p.cum.push(c);
                p.cum_ln.push(sl);
                p.cum_sum.push(s);
            }
        }
        p
    }

    /// Value at empirical quantile `q` (lower order statistic).
    fn quantile(&self, q: f64) -> T {
        let rank = ((self.n - 1) as f64 * q).floor() as usize + 1;
        let k = self.cum.partition_point(|&c| c < rank);
        self.values[k]
    }

    fn evaluate(&self, k: usize, scope: KsScope, resolution: T) -> BimodalFit<T> {
        let tau = self.values[k];
        let n_head = self.cum[k];
        let nh = T::from_count(n_head);
        let ln_r = (tau / self.t_min).ln();
        let alpha = solve_alpha(nh, self.cum_ln[k], ln_r);

        let n_tail = self.n - n_head;
        let tail_excess = *self.cum_sum.last().expect("non-empty") - self.cum_sum[k] - T::from_count(n_tail) * tau;
        let beta = if n_tail == 0 || tail_excess <= T::zero() {
            T::zero()
        } else {
            T::from_count(n_tail) / tail_excess
        };

        let n = T::from_count(self.n);
        let (w, denom) = match scope {
            KsScope::Head => (T::one(), nh),
            KsScope::Bimodal => (nh / n, n),
        };
        let model = |x: T| -> T {
            if x <= self.t_min {
                T::zero()
            } else if x <= tau {
                w * head_cdf(x / self.t_min, alpha, ln_r)
            } else if scope == KsScope::Head {
                T::one()
            } else {
                w - (T::one() - w) * (-beta * (x - tau)).exp_m1()
            }
        };
        let last = match scope {
            KsScope::Head => k,
            KsScope::Bimodal => self.values.len() - 1,
        };
        let half = resolution / T::lit(2.0);
        let mut ks = T::zero();
        let mut prev = T::zero();
        for j in 0..=last {
            let v = self.values[j];
            let after = T::from_count(self.cum[j]) / denom;
            ks = ks
                .max((model(v - half) - prev).abs())
                .max((model(v + half) - after).abs());
            prev = after;
        }
        BimodalFit {
            alpha,
            tau,
            beta,
            ks_distance: ks.min(T::one()),
            n_head,
            t_min: self.t_min,
        }
    }
}

fn better<T: Real>(a: &BimodalFit<T>, b: &BimodalFit<T>) -> bool {
    a.ks_distance < b.ks_distance || (a.ks_distance == b.ks_distance && a.tau < b.tau)
}

/// Fits the bimodal inter-event model and picks τ by minimum KS distance.
///
/// Candidates are the distinct gap values between the 5th and 99th
/// percentiles that leave at least `min_gaps` gaps in the head and at least
/// one in the tail. Gaps below `t_min` are ignored.
pub fn fit_bimodal<T: Real>(gaps: &[T], opts: &FitOptions<T>) -> Result<BimodalFit<T>> {
    if !(opts.t_min > T::zero()) {
        return Err(Error::InvalidArgument("t_min must be positive".into()));
    }
    let need = opts.min_gaps.max(2);
    let prep = Prepared::new(gaps, opts.t_min);
    if prep.n < need {
        return Err(Error::InsufficientData { got: prep.n, need });
    }
    if prep.values.len() < 2 {
        return Err(Error::DegenerateDistribution);
    }
    let lo = prep.quantile(GRID_LO_Q);
    let hi = prep.quantile(GRID_HI_Q);
    let candidates: Vec<usize> = (0..prep.values.len())
        .filter(|&k| {
            let v = prep.values[k];
            v >= lo && v <= hi && v > opts.t_min && prep.cum[k] >= need && prep.cum[k] < prep.n
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::DegenerateDistribution);
    }

    let cap = opts.max_candidates.max(2);
    let scan = |idx: &[usize]| -> (usize, BimodalFit<T>) {
        idx.par_iter()
            .enumerate()
            .map(|(i, &k)| (i, prep.evaluate(k, opts.scope, opts.resolution)))
            .reduce_with(|a, b| if better(&b.1, &a.1) { b } else { a })
            .expect("non-empty candidate list")
    };
    if candidates.len() <= cap {
        return Ok(scan(&candidates).1);
    }
    let last = candidates.len() - 1;
    let coarse: Vec<usize> = (0..cap)
        .map(|i| i * last / (cap - 1))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let coarse_k: Vec<usize> = coarse.iter().map(|&i| candidates[i]).collect();
    let (best, _) = scan(&coarse_k);
    let from = coarse[best.saturating_sub(1)];
    let to = coarse[(best + 1).min(coarse.len() - 1)];
    Ok(scan(&candidates[from..=to]).1)
}

/// Splits a time-ordered pair stream into dialogues: a new one starts at the
/// first message and after every gap strictly longer than `tau` seconds.
pub fn split_stream_dialogues(
    stream: &[&Message],
    tau: f64,
    refdet: &ReferenceLexicon,
    pair: &UserPair,
    genders: (Gender, Gender),
) -> Vec<Dialogue> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=stream.len() {
        let cut = i == stream.len() || (stream[i].timestamp - stream[i - 1].timestamp) as f64 > tau;
        if !cut {
            continue;
        }
        let part = &stream[start..i];
        let text = part.iter().map(|m| m.text.as_str()).collect::<Vec<_>>().join("\n");
        out.push(
            Dialogue::new(genders.0, genders.1, detect_references(&text, refdet))
                .with_participants(pair.first(), pair.second())
                .with_sources(part.iter().map(|m| m.msg_id.clone()).collect())
                .with_origin(Origin::Stream),
        );
        start = i;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentOptions {
    pub fit: FitOptions<f64>,
    pub min_mentions: u64,
    pub pair_rule: PairRule,
    /// Skip fitting and split at this τ.
    pub tau_override: Option<f64>,
    /// Fit τ per pair where the pair has enough gaps; others use the pooled τ.
    pub per_pair: bool,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        SegmentOptions {
            fit: FitOptions {
                resolution: 1.0,
                ..FitOptions::default()
            },
            min_mentions: DEFAULT_MIN_MENTIONS,
            pair_rule: PairRule::Sum,
            tau_override: None,
            per_pair: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSegment {
    pub pair: UserPair,
    pub tau: f64,
    pub fit: Option<BimodalFit<f64>>,
    pub n_messages: usize,
    pub n_dialogues: usize,
}

#[derive(Debug, Clone)]
pub struct SegmentedCorpus {
    /// Fit on the pooled gaps of all interacting pairs (absent with an override).
    pub pooled_fit: Option<BimodalFit<f64>>,
    pub tau: f64,
    pub pairs: Vec<PairSegment>,
    pub dialogues: DialogueSet,
}

/// Pair streams of all interacting pairs, in pair order. A message mentioning
/// several partners belongs to each of their streams.
pub fn pair_streams<'a>(messages: &'a [Message], pairs: &BTreeSet<UserPair>) -> BTreeMap<UserPair, Vec<&'a Message>> {
    let mut streams: BTreeMap<UserPair, Vec<&Message>> = BTreeMap::new();
    for m in messages {
        let mentioned: BTreeSet<&str> = m.mentioned_ids.iter().map(String::as_str).collect();
        for other in mentioned {
            if let Some(pair) = UserPair::new(m.author_id.as_str(), other) {
                if pairs.contains(&pair) {
                    streams.entry(pair).or_default().push(m);
                }
            }
        }
    }
    for s in streams.values_mut() {
        s.sort_by_key(|m| m.timestamp);
    }
    streams
}

/// Filters interacting pairs, fits τ on their pooled gaps (unless
/// overridden) and splits every pair stream into dialogues.
pub fn segment_corpus(
    messages: &[Message],
    genders: &BTreeMap<String, Gender>,
    refdet: &ReferenceLexicon,
    opts: &SegmentOptions,
) -> Result<SegmentedCorpus> {
    let pairs = filter_interacting_pairs(messages, opts.min_mentions, opts.pair_rule);
    let streams: Vec<(UserPair, Vec<&Message>)> = pair_streams(messages, &pairs).into_iter().collect();
    let gaps_of = |s: &[&Message]| -> Vec<f64> {
        let ts: Vec<i64> = s.iter().map(|m| m.timestamp).collect();
        timestamp_gaps(&ts).into_iter().map(|g| g as f64).collect()
    };

    let (pooled_fit, tau) = match opts.tau_override {
        Some(tau) => {
            if !(tau > 0.0) {
                return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
            }
            (None, tau)
        }
        None => {
            let pooled: Vec<f64> = streams.iter().flat_map(|(_, s)| gaps_of(s)).collect();
            let fit = fit_bimodal(&pooled, &opts.fit)?;
            (Some(fit), fit.tau)
        }
    };
    log::info!("segmenting {} pairs at tau={tau:.1}s", streams.len());

    let gender = |u: &str| genders.get(u).copied().unwrap_or(Gender::U);
    let per_pair: Vec<(PairSegment, Vec<Dialogue>)> = streams
        .par_iter()
        .map(|(pair, stream)| {
            let fit = if opts.per_pair && opts.tau_override.is_none() {
                fit_bimodal(&gaps_of(stream), &opts.fit).ok()
            } else {
                None
            };
            let pair_tau = fit.map_or(tau, |f| f.tau);
            let ds = split_stream_dialogues(
                stream,
                pair_tau,
                refdet,
                pair,
                (gender(pair.first()), gender(pair.second())),
            );
            let seg = PairSegment {
                pair: pair.clone(),
                tau: pair_tau,
                fit,
                n_messages: stream.len(),
                n_dialogues: ds.len(),
            };
            (seg, ds)
        })
        .collect();

    let mut segs = Vec::with_capacity(per_pair.len());
    let mut all = Vec::new();
    for (seg, ds) in per_pair {
        segs.push(seg);
        all.extend(ds);
    }
    Ok(SegmentedCorpus {
        pooled_fit,
        tau,
        pairs: segs,
        dialogues: DialogueSet::new("stream", all),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gender::GenderLexicon;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn msg(id: &str, author: &str, ts: i64, to: &str) -> Message {
        Message {
            msg_id: id.into(),
            author_id: author.into(),
            timestamp: ts,
            text: String::new(),
            mentioned_ids: vec![to.into()],
        }
    }

    fn refdet() -> ReferenceLexicon {
        ReferenceLexicon::with_default_words(GenderLexicon::default())
    }

    #[test]
    fn gaps_examples() {
        assert_eq!(timestamp_gaps(&[100, 160, 100000]), vec![60, 99840]);
        assert_eq!(timestamp_gaps(&[100]), Vec::<u64>::new());
        assert_eq!(timestamp_gaps(&[50, 50]), vec![1]);
    }

    #[test]
    fn pair_stream_filters_and_sorts() {
        let ms = vec![
            msg("3", "b", 300, "a"),
            msg("1", "a", 100, "b"),
            msg("x", "a", 150, "c"),
            msg("y", "c", 160, "a"),
            msg("2", "a", 200, "b"),
        ];
        let pair = UserPair::new("a", "b").unwrap();
        let ids: Vec<&str> = pair_stream(&ms, &pair).iter().map(|m| m.msg_id.as_str()).collect();
        assert_eq!(ids, vec!["1", "2", "3"]);
        assert_eq!(inter_event_gaps(&ms, &pair), vec![100, 100]);
    }

    fn split_ts(ts: &[i64], tau: f64) -> Vec<usize> {
        let ms: Vec<Message> = ts.iter().enumerate().map(|(i, &t)| msg(&i.to_string(), "a", t, "b")).collect();
        let refs: Vec<&Message> = ms.iter().collect();
        let pair = UserPair::new("a", "b").unwrap();
        split_stream_dialogues(&refs, tau, &refdet(), &pair, (Gender::F, Gender::M))
            .iter()
            .map(|d| d.source_ids.len())
            .collect()
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_ts(&[0, 60, 120], 3600.0), vec![3]);
        assert_eq!(split_ts(&[0, 60, 100000], 32760.0), vec![2, 1]);
        assert_eq!(split_ts(&[0, 100, 200], 100.0), vec![3]);
        assert_eq!(split_ts(&[], 100.0), Vec::<usize>::new());
    }

    #[test]
    fn insufficient_and_degenerate() {
        let forty: Vec<f64> = (1..=40).map(f64::from).collect();
        assert!(matches!(
            fit_bimodal(&forty, &FitOptions::default()),
            Err(Error::InsufficientData { got: 40, need: 50 })
        ));
        let flat = vec![7.0f64; 100];
        assert!(matches!(fit_bimodal(&flat, &FitOptions::default()), Err(Error::DegenerateDistribution)));
    }

    /// Inverse-CDF draw from a power law with exponent `alpha` on `[1, r]`.
    fn draw_head(rng: &mut ChaCha8Rng, alpha: f64, r: f64) -> f64 {
        let u: f64 = rng.random();
        (1.0 - u * (1.0 - r.powf(1.0 - alpha))).powf(1.0 / (1.0 - alpha))
    }

    #[test]
    fn alpha_from_head_only_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gaps: Vec<f64> = (0..20_000).map(|_| draw_head(&mut rng, 1.5, 4096.0)).collect();
        let a = fit_truncated_alpha(&gaps, 1.0, 4096.0).unwrap();
        assert!((a - 1.5).abs() < 0.03, "alpha {a}");
        let mut with_tail = gaps.clone();
        with_tail.extend((0..500).map(|i| 5000.0 + i as f64));
        assert_eq!(fit_truncated_alpha(&with_tail, 1.0, 4096.0).unwrap(), a);
    }

    #[test]
    fn alpha_clamps_to_bracket() {
        // nearly uniform on [1, r] pushes α toward 1
        let gaps: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(fit_truncated_alpha(&gaps, 1.0, 1000.0).unwrap(), ALPHA_LO);
    }

    #[test]
    fn segment_corpus_with_override() {
        let mut ms = Vec::new();
        for i in 0..12 {
            let t = if i < 6 { i * 60 } else { 100_000 + i * 60 };
            let (a, b) = if i % 2 == 0 { ("u1", "u2") } else { ("u2", "u1") };
            ms.push(msg(&format!("m{i}"), a, t, b));
        }
        ms.push(msg("z", "u3", 5, "u1"));
        let genders = BTreeMap::from([("u1".to_string(), Gender::F), ("u2".to_string(), Gender::F)]);
        let opts = SegmentOptions {
            tau_override: Some(32760.0),
            ..SegmentOptions::default()
        };
        let seg = segment_corpus(&ms, &genders, &refdet(), &opts).unwrap();
        assert!(seg.pooled_fit.is_none());
        assert_eq!(seg.pairs.len(), 1);
        assert_eq!(seg.dialogues.len(), 2);
        assert!(seg.dialogues.dialogues().iter().all(|d| d.g1 == Gender::F && d.g2 == Gender::F));
    }
}
