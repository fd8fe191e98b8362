use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gender::Gender;
use crate::metrics::{Dialogue, DialogueSet};
use crate::num::Real;

/// Dialogues per subset: the size of an average movie.
pub const DEFAULT_SAMPLE_SIZE: usize = 225;
pub const MIN_SAMPLES: usize = 100;

/// Per-subset Bechdel score numerators; every subset has `sample_size`
/// dialogues, so `(bf_hits[i] / sample_size, bm_hits[i] / sample_size)` is the
/// subset's `(B_F, B_M)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSamples {
    pub sample_size: usize,
    pub seed: u64,
    pub bf_hits: Vec<u64>,
    pub bm_hits: Vec<u64>,
}

impl ScoreSamples {
    pub fn len(&self) -> usize {
        self.bf_hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bf_hits.is_empty()
    }

    pub fn points<T: Real>(&self) -> Vec<(T, T)> {
        let s = T::from_count(self.sample_size);
        self.bf_hits
            .iter()
            .zip(&self.bm_hits)
            .map(|(&f, &m)| (T::from_u64(f).unwrap() / s, T::from_u64(m).unwrap() / s))
            .collect()
    }

    pub fn summary<T: Real>(&self) -> BootstrapSummary<T> {
        let (mf, sf) = mean_sd::<T>(&self.bf_hits, self.sample_size);
        let (mm, sm) = mean_sd::<T>(&self.bm_hits, self.sample_size);
        BootstrapSummary {
            centroid: (mf, mm),
            sd: (sf, sm),
            n_samples: self.len(),
            sample_size: self.sample_size,
            seed: self.seed,
        }
    }
}

/// Mean and sample standard deviation of `hits / scale`, accumulated in
/// integers so identical subsets give exactly zero spread.
fn mean_sd<T: Real>(hits: &[u64], scale: usize) -> (T, T) {
    let n = hits.len() as u128;
    let sum: u128 = hits.iter().map(|&h| h as u128).sum();
    let sum_sq: u128 = hits.iter().map(|&h| (h as u128) * (h as u128)).sum();
    let s = T::from_count(scale);
    let nf = T::from_u128(n).unwrap();
    let mean = T::from_u128(sum).unwrap() / (nf * s);
    let sd = if n < 2 {
        T::zero()
    } else {
        let num = n * sum_sq - sum * sum;
        (T::from_u128(num).unwrap() / (nf * T::from_u128(n - 1).unwrap())).sqrt() / s
    };
    (mean, sd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary<T> {
    /// Mean `(B_F, B_M)` over subsets.
    pub centroid: (T, T),
    /// Per-axis sample standard deviation.
    pub sd: (T, T),
    pub n_samples: usize,
    pub sample_size: usize,
    pub seed: u64,
}

fn bf_hit(d: &Dialogue) -> bool {
    d.g1 == Gender::F && d.g2 == Gender::F && !d.m
}

fn bm_hit(d: &Dialogue) -> bool {
    d.g1 == Gender::M && d.g2 == Gender::M && !d.f
}

/// Draws `n_samples` disjoint subsets of `sample_size` dialogues. Each pass
/// shuffles the set and cuts it into consecutive blocks, discarding the
/// remainder; passes repeat until enough subsets exist.
pub fn bootstrap_score_samples(
    ds: &DialogueSet,
    sample_size: usize,
    n_samples: usize,
    seed: u64,
) -> Result<ScoreSamples> {
    if sample_size == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    if ds.len() < sample_size {
        return Err(Error::InvalidArgument(format!(
            "{} dialogues, fewer than the sample size {sample_size}",
            ds.len()
        )));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SAMPLES} bootstrap samples required, got {n_samples}"
        )));
    }
    let dialogues = ds.dialogues();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dialogues.len()).collect();
    let mut bf_hits = Vec::with_capacity(n_samples);
    let mut bm_hits = Vec::with_capacity(n_samples);
    while bf_hits.len() < n_samples {
        order.shuffle(&mut rng);
        for block in order.chunks_exact(sample_size) {
            if bf_hits.len() == n_samples {
                break;
            }
            bf_hits.push(block.iter().filter(|&&i| bf_hit(&dialogues[i])).count() as u64);
            bm_hits.push(block.iter().filter(|&&i| bm_hit(&dialogues[i])).count() as u64);
        }
    }
    Ok(ScoreSamples {
        sample_size,
        seed,
        bf_hits,
        bm_hits,
    })
}

pub fn bootstrap_score_centroids<T: Real>(
    ds: &DialogueSet,
    sample_size: usize,
    n_samples: usize,
    seed: u64,
) -> Result<BootstrapSummary<T>> {
    Ok(bootstrap_score_samples(ds, sample_size, n_samples, seed)?.summary())
}
