use proptest::prelude::*;
use stopped_grains::point_process::{attach_marks, sample_poisson};
use stopped_grains::{MarkDistribution, MarkedConfiguration, Model, VelocityLaw, Window};

fn dist(model: Model) -> MarkDistribution {
    MarkDistribution::new(model, VelocityLaw::HalfNormal { sigma: 1.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn same_seed_same_configuration(seed in any::<u64>(), side in 0.5..30.0f64, lambda in 0.05..3.0f64) {
        let w = Window::square(side, 0.0).unwrap();
        let a = MarkedConfiguration::generate(w, lambda, dist(Model::Bilateral), seed).unwrap();
        let b = MarkedConfiguration::generate(w, lambda, dist(Model::Bilateral), seed).unwrap();
        prop_assert_eq!(&a, &b);
        for p in &a.points {
            prop_assert!(w.contains(p.germ));
            prop_assert_eq!(p.branches.len(), 2);
        }
    }

    #[test]
    fn marks_follow_keys_not_order(seed in any::<u64>(), rot in 0usize..500) {
        let w = Window::square(10.0, 0.0).unwrap();
        let germs = sample_poisson(&w, 1.0, seed).unwrap();
        let mut shuffled = germs.clone();
        let n = shuffled.len().max(1);
        shuffled.rotate_left(rot % n);
        shuffled.reverse();
        let d = dist(Model::Unilateral);
        prop_assert_eq!(attach_marks(germs, &d, seed), attach_marks(shuffled, &d, seed));
    }
}

/// Counts in the two halves of a window should be uncorrelated.
#[test]
fn disjoint_halves_are_uncorrelated() {
    let w = Window::square(10.0, 0.0).unwrap();
    let reps = 600;
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for seed in 0..reps {
        let g = sample_poisson(&w, 0.5, seed).unwrap();
        let left = g.iter().filter(|x| x.pos.x < 5.0).count() as f64;
        l.push(left);
        r.push(g.len() as f64 - left);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ml, mr) = (mean(&l), mean(&r));
    let cov = l.iter().zip(&r).map(|(a, b)| (a - ml) * (b - mr)).sum::<f64>() / reps as f64;
    let var = |v: &[f64], m: f64| v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / reps as f64;
    let corr = cov / (var(&l, ml) * var(&r, mr)).sqrt();
    // about 4 standard errors at n = 600
    assert!(corr.abs() < 0.16, "corr {corr}");
    assert!((ml - 25.0).abs() < 4.0 * (25.0f64 / reps as f64).sqrt(), "mean {ml}");
}
