use bechdel_core::gender::References;
use bechdel_core::metrics::{
    bechdel_scores, dialogue_imbalance, gender_independence, select_count, Measured, ReportOptions,
};
use bechdel_core::{Dialogue, DialogueSet, Exact, Gender, MetricReport, Pattern};
use proptest::prelude::*;

fn gender() -> impl Strategy<Value = Gender> {
    prop_oneof![Just(Gender::M), Just(Gender::F), Just(Gender::U)]
}

fn dialogue(gs: &[Gender]) -> impl Strategy<Value = Dialogue> {
    let g = prop::sample::select(gs.to_vec());
    (g.clone(), g, any::<bool>(), any::<bool>()).prop_map(|(a, b, m, f)| Dialogue::new(a, b, References { m, f }))
}

fn set() -> impl Strategy<Value = DialogueSet> {
    prop::collection::vec(dialogue(&[Gender::M, Gender::F, Gender::U]), 0..300).prop_map(|v| DialogueSet::new("t", v))
}

fn exact(m: Measured) -> Option<Exact> {
    m.ok().map(|p| p.value::<Exact>())
}

fn swapped(ds: &DialogueSet) -> DialogueSet {
    ds.gender_swapped()
}


proptest! {
    #[test]
    fn decomposition_both_genders(ds in set()) {
        let (bf, bm) = bechdel_scores(&ds);
        let ind = gender_independence(&ds, 1);
        let n = ds.len() as i64;
        let ff = select_count(&ds, &Pattern::new(Some(Gender::F), Some(Gender::F), None, None)) as i64;
        let mm = select_count(&ds, &Pattern::new(Some(Gender::M), Some(Gender::M), None, None)) as i64;
        if let (Some(b), Some(i)) = (exact(bf), exact(ind.i_f)) {
            prop_assert_eq!(b, i * Exact::new(ff, n));
        }
        if let (Some(b), Some(i)) = (exact(bm), exact(ind.i_m)) {
            prop_assert_eq!(b, i * Exact::new(mm, n));
        }
    }

    #[test]
    fn swap_exchanges_metrics(ds in set()) {
        let sw = swapped(&ds);
        let (bf, bm) = bechdel_scores(&ds);
        let (sbf, sbm) = bechdel_scores(&sw);
        prop_assert_eq!((bf, bm), (sbm, sbf));
        let (i, si) = (gender_independence(&ds, 5), gender_independence(&sw, 5));
        prop_assert_eq!((i.i_f, i.i_m), (si.i_m, si.i_f));
    }

    #[test]
    fn swap_without_unknowns_complements_x_m(v in prop::collection::vec(dialogue(&[Gender::M, Gender::F]), 1..200)) {
        let ds = DialogueSet::new("t", v);
        let (_, xm) = dialogue_imbalance(&ds);
        let (sxf, _) = dialogue_imbalance(&swapped(&ds));
        if let Some(xm) = exact(xm) {
            prop_assert_eq!(exact(sxf), Some(Exact::from_integer(1) - xm));
        }
    }

    #[test]
    fn ranges_and_permutation(ds in set(), seed in any::<u64>()) {
        let r: MetricReport = MetricReport::compute("a", &ds, &ReportOptions { min_aligned: 1, ..Default::default() });
        for e in [&r.b_f, &r.b_m, &r.x_f, &r.x_m, &r.i_f, &r.i_m] {
            if let Some(v) = e.value {
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!(e.ci_low.unwrap() <= v && v <= e.ci_high.unwrap());
            }
        }
        if let Some(a) = r.asymmetry {
            prop_assert!((-1.0..=1.0).contains(&a));
        }
        let mut v = ds.dialogues().to_vec();
        let k = v.len().max(1);
        v.rotate_left((seed as usize) % k);
        v.reverse();
        let shuffled: MetricReport = MetricReport::compute("a", &DialogueSet::new("t", v), &ReportOptions { min_aligned: 1, ..Default::default() });
        prop_assert_eq!(r, shuffled);
    }

    #[test]
    fn counts_match_recount(ds in set(), g1 in prop::option::of(gender()), g2 in prop::option::of(gender()),
                            m in prop::option::of(any::<bool>()), f in prop::option::of(any::<bool>()), unordered in any::<bool>()) {
        let mut p = Pattern::new(g1, g2, m, f);
        if unordered {
            p = p.unordered();
        }
        let fits = |a: Gender, b: Gender, d: &Dialogue| {
            g1.is_none_or(|g| g == a) && g2.is_none_or(|g| g == b) && m.is_none_or(|x| x == d.m) && f.is_none_or(|x| x == d.f)
        };
        let brute = ds
            .dialogues()
            .iter()
            .filter(|d| fits(d.g1, d.g2, d) || (unordered && fits(d.g2, d.g1, d)))
            .count() as u64;
        prop_assert_eq!(select_count(&ds, &p), brute);
    }
}

#[test]
fn scalar_types_agree() {
    let v: Vec<Dialogue> = (0..120)
        .map(|i| {
            let g = [Gender::F, Gender::M, Gender::U][i % 3];
            Dialogue::new(g, if i % 4 == 0 { Gender::M } else { g }, References { m: i % 5 == 0, f: i % 7 == 0 })
        })
        .collect();
    let ds = DialogueSet::new("t", v);
    let opts = ReportOptions { min_aligned: 10, ..Default::default() };
    let a: bechdel_core::metrics::MetricReport<f64> = bechdel_core::metrics::MetricReport::compute("x", &ds, &opts);
    let b: bechdel_core::metrics::MetricReport<f32> = bechdel_core::metrics::MetricReport::compute("x", &ds, &opts);
    assert!((a.b_f.value.unwrap() - f64::from(b.b_f.value.unwrap())).abs() < 1e-6);
    assert!((a.i_m.value.unwrap() - f64::from(b.i_m.value.unwrap())).abs() < 1e-6);
    let e = bechdel_scores(&ds).0.unwrap().value::<Exact>();
    assert_eq!(e, Exact::new(a.b_f.hits as i64, a.b_f.total as i64));
}
