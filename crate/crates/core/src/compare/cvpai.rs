use super::LegendRelation;

/// Gaussian row membership centered at 1 with deviation `rc / 3`; zero for
/// an empty row.
fn row_membership(j: usize, rc: usize) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let sd = rc as f64 / 3.0;
    let d = j as f64 - 1.0;
    (-(d * d) / (2.0 * sd * sd)).exp()
}

/// Categorical variable pair association index, second version.
///
/// Every reference column with at least one correct entry scores 1; every
/// test row scores a Gaussian of its correct-entry count, peaking at
/// exactly one. The total is divided by `TC + RC`, so the result lies in
/// `[0, 1]`: 0 for an empty relation, 1 when every column is covered and
/// every row holds exactly one entry.
pub fn cvpai2(rel: &LegendRelation) -> f64 {
    let (tc, rc) = (rel.tc(), rel.rc());
    let columns = (0..rc).filter(|&r| rel.col_sum(r) > 0).count() as f64;
    let rows: f64 = (0..tc).map(|t| row_membership(rel.row_sum(t), rc)).sum();
    (columns + rows) / (tc + rc) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        let rel =
            LegendRelation::from_rows(&[vec![1, 1, 1], vec![0, 0, 1], vec![0, 0, 1]]).unwrap();
        let expected = (5.0 + (-2.0f64).exp()) / 6.0;
        assert!((cvpai2(&rel) - expected).abs() < 1e-15);
        assert!((cvpai2(&rel) - 0.8558).abs() < 5e-4);
    }

    #[test]
    fn extremes() {
        let zero = LegendRelation::from_rows(&vec![vec![0; 3]; 3]).unwrap();
        assert_eq!(cvpai2(&zero), 0.0);
        let id = LegendRelation::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(cvpai2(&id), 1.0);
    }

    #[test]
    fn full_relation_follows_the_formula() {
        // every column covered, every row holds RC entries
        let full = LegendRelation::from_rows(&vec![vec![1; 3]; 3]).unwrap();
        let expected = (3.0 + 3.0 * (-2.0f64).exp()) / 6.0;
        assert!((cvpai2(&full) - expected).abs() < 1e-15);
    }

    fn relation() -> impl Strategy<Value = LegendRelation> {
        (1usize..=8, 1usize..=8).prop_flat_map(|(tc, rc)| {
            proptest::collection::vec(0u8..=1, tc * rc).prop_map(move |cells| {
                LegendRelation::new(
                    (0..tc).map(|i| format!("t{i}")).collect(),
                    (0..rc).map(|i| format!("r{i}")).collect(),
                    cells,
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn bounded(rel in relation()) {
            let v = cvpai2(&rel);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn invariant_under_joint_permutation(rel in relation(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut pt: Vec<usize> = (0..rel.tc()).collect();
            let mut pr: Vec<usize> = (0..rel.rc()).collect();
            pt.shuffle(&mut rng);
            pr.shuffle(&mut rng);
            let cells = pt.iter().flat_map(|&t| pr.iter().map(move |&r| (t, r))).map(|(t, r)| rel.get(t, r)).collect();
            let permuted = LegendRelation::new(
                pt.iter().map(|&t| rel.test_names()[t].clone()).collect(),
                pr.iter().map(|&r| rel.reference_names()[r].clone()).collect(),
                cells,
            ).unwrap();
            prop_assert!((cvpai2(&rel) - cvpai2(&permuted)).abs() < 1e-12);
        }

        #[test]
        fn covering_functions_score_one(rc in 1usize..=8, extra in 0usize..=8, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            // rows are a surjective function onto the columns
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let tc = rc + extra;
            let mut target: Vec<usize> = (0..rc).collect();
            target.extend((0..extra).map(|_| rng.gen_range(0..rc)));
            let rows: Vec<Vec<u8>> = target.iter().map(|&c| (0..rc).map(|r| u8::from(r == c)).collect()).collect();
            let rel = LegendRelation::from_rows(&rows).unwrap();
            prop_assert_eq!(rel.tc(), tc);
            prop_assert_eq!(cvpai2(&rel), 1.0);
        }

        #[test]
        fn fan_out_only_lowers_the_row_term(rc in 2usize..=8, k in 2usize..=8) {
            let k = k.min(rc);
            let mut rows: Vec<Vec<u8>> = (0..rc).map(|i| (0..rc).map(|r| u8::from(r == i)).collect()).collect();
            rows[0] = (0..rc).map(|r| u8::from(r < k)).collect();
            let rel = LegendRelation::from_rows(&rows).unwrap();
            let expected = (2.0 * rc as f64 - 1.0 + row_membership(k, rc)) / (2 * rc) as f64;
            prop_assert!((cvpai2(&rel) - expected).abs() < 1e-12);
            prop_assert!(cvpai2(&rel) < 1.0);
        }
    }
}
