use bechdel_core::gender::References;
use bechdel_core::stats::{
    bootstrap_score_centroids, partial_pearson, pearson, ranksum_exact_p, ranksum_normal_p, spearman, wilcoxon_ranksum,
};
use bechdel_core::{Dialogue, DialogueSet, Gender};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..20).prop_map(f64::from), 1..max)
}

proptest! {
    #[test]
    fn ranksum_is_antisymmetric(a in sample(30), b in sample(30)) {
        let ab = wilcoxon_ranksum(&a, &b).unwrap();
        let ba = wilcoxon_ranksum(&b, &a).unwrap();
        prop_assert_eq!(ab.p_value, ba.p_value);
        prop_assert_eq!(ab.effect, -ba.effect);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn partial_with_no_controls_is_pearson(xy in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30)) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        match (pearson(&x, &y), partial_pearson(&x, &y, &[])) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.statistic, b.statistic);
                prop_assert_eq!(a.p_value, b.p_value);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn spearman_ignores_monotone_maps(xy in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30)) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&x.iter().map(|v| v.atan()).collect::<Vec<_>>(), &y)) else {
            return Ok(());
        };
        prop_assert!((a.effect - b.effect).abs() < 1e-12);
    }
}

#[test]
fn exact_and_normal_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let a: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        let shift = rng.random_range(0.0..0.6);
        let b: Vec<f64> = (0..10).map(|_| rng.random::<f64>() + shift).collect();
        let exact: f64 = ranksum_exact_p(&a, &b).unwrap();
        let normal: f64 = ranksum_normal_p(&a, &b).unwrap();
        assert!((exact - normal).abs() < 0.03, "exact {exact} normal {normal}");
    }
}

#[test]
fn monotone_nonlinearity() {
    let x: Vec<f64> = (1..=10).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| v * v).collect();
    assert_eq!(spearman(&x, &y).unwrap().effect, 1.0);
    assert!(pearson(&x, &y).unwrap().effect < 1.0);
}

#[test]
fn bootstrap_is_bit_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<Dialogue> = (0..2_000)
        .map(|_| {
            let g = |r: &mut ChaCha8Rng| [Gender::F, Gender::M, Gender::U][r.random_range(0..3)];
            let (a, b) = (g(&mut rng), g(&mut rng));
            Dialogue::new(a, b, References { m: rng.random_bool(0.3), f: rng.random_bool(0.3) })
        })
        .collect();
    let ds = DialogueSet::new("b", v);
    let a = bootstrap_score_centroids::<f64>(&ds, 225, 150, 9).unwrap();
    let b = bootstrap_score_centroids::<f64>(&ds, 225, 150, 9).unwrap();
    assert_eq!(a.centroid.0.to_bits(), b.centroid.0.to_bits());
    assert_eq!(a, b);
    assert!(a.sd.0 >= 0.0 && a.sd.1 >= 0.0);
    let c = bootstrap_score_centroids::<f64>(&ds, 225, 150, 10).unwrap();
    assert_ne!(a, c);
}
