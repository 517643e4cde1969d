use adds_core::certify::radius;
use adds_core::data::{make_gmm_task, sample_dataset, Dataset};
use adds_core::oracle::{audit_random_filter_run, step_constant_reference};
use adds_core::privacy::{step_cost, BudgetVector, Verdict};
use adds_core::schedule::NoiseSchedule;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn betas() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-4..0.5f64, 1..60).prop_map(|mut b| {
        b.sort_by(f64::total_cmp);
        b
    })
}

proptest! {
    #[test]
    fn alpha_bar_recurrence(b in betas()) {
        let s = NoiseSchedule::from_betas(b).unwrap();
        prop_assert_eq!(s.alpha_bar(0), 1.0);
        for t in 1..=s.steps() {
            let want = s.alpha_bar(t - 1) * (1.0 - s.beta(t));
            prop_assert!((s.alpha_bar(t) - want).abs() <= 1e-15 * want.max(1e-300));
            prop_assert!(s.alpha_bar(t) < s.alpha_bar(t - 1));
            let pv = (1.0 - s.alpha_bar(t - 1)) / (1.0 - s.alpha_bar(t)) * s.beta(t);
            prop_assert!((s.posterior_var(t) - pv).abs() <= 1e-15);
        }
    }

    #[test]
    fn respacing_preserves_selected_alpha_bars(b in betas(), picks in prop::collection::btree_set(0usize..60, 1..10)) {
        let s = NoiseSchedule::from_betas(b).unwrap();
        let sel: Vec<usize> = picks.into_iter().map(|p| p % s.steps() + 1).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let r = s.respace(&sel).unwrap();
        for (j, &t) in sel.iter().enumerate() {
            prop_assert!((r.alpha_bar(j + 1) - s.alpha_bar(t)).abs() <= 1e-14);
        }
    }

    #[test]
    fn cost_is_quadratic_in_scale(b in betas(), seed in any::<u64>(), s in 0.0..1.0f64, k in 0.0..1.0f64) {
        let sched = NoiseSchedule::from_betas(b).unwrap();
        let t = (seed as usize % sched.steps()) + 1;
        let sd = [0.3, 1.1];
        let base = step_cost(s, t, &sched, &sd);
        let scaled = step_cost(k * s, t, &sched, &sd);
        let c = step_constant_reference(t, &sched);
        for ((a, b), sdi) in base.iter().zip(&scaled).zip(sd) {
            prop_assert!((b - k * k * a).abs() <= 1e-12 * a.max(1.0));
            prop_assert!((a - s * s * c / (sdi * sdi)).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn radius_monotone_in_lower_bound(sigma in 0.1..3.0f64, p in 0.5..0.999f64, dp in 0.0..0.0009f64) {
        let r1 = radius(sigma, p, 1.0 - p);
        let r2 = radius(sigma, p + dp, 1.0 - p - dp);
        prop_assert!(r2 >= r1);
        prop_assert!(r1 >= 0.0);
    }

    #[test]
    fn filter_never_overdraws(remaining in prop::collection::vec(0.0..4.0f64, 1..6), scale in 0.0..3.0f64) {
        let d = remaining.len();
        let b = BudgetVector::from_remaining(remaining.clone(), 2.0).unwrap();
        let cost: Vec<f64> = remaining.iter().map(|r| r * scale).collect();
        let (next, verdict) = b.filter(&cost);
        match verdict {
            Verdict::Ok => {
                prop_assert!(next.remaining().iter().all(|&v| v > 0.0));
                for i in 0..d {
                    prop_assert!((next.remaining()[i] - (remaining[i] - cost[i])).abs() < 1e-12);
                }
            }
            Verdict::No => prop_assert_eq!(next.remaining(), b.remaining()),
        }
    }

    #[test]
    fn random_filter_runs_stay_within_budget(seed in any::<u64>()) {
        let audit = audit_random_filter_run(&mut ChaCha8Rng::seed_from_u64(seed), 1.0);
        prop_assert!(audit.max_overspend <= 1e-12);
        prop_assert!(!audit.guided_after_exhaustion);
    }

    #[test]
    fn dataset_round_trips(seed in any::<u64>(), n in 1usize..40, k in 2usize..5, d in 1usize..4) {
        let k = if d == 1 { k.min(2) } else { k };
        let gmm = make_gmm_task(k, d, 2.0, 0.7, seed).unwrap();
        let data = sample_dataset(&gmm, n, seed).unwrap();
        let back = Dataset::from_text(&data.to_text()).unwrap();
        prop_assert_eq!(&back.points, &data.points);
        prop_assert_eq!(&back.labels, &data.labels);
        prop_assert_eq!(back.num_classes, data.num_classes);
    }

    #[test]
    fn schedule_table_round_trips(b in betas()) {
        let s = NoiseSchedule::from_betas(b).unwrap();
        let back = NoiseSchedule::from_table(&s.to_table()).unwrap();
        for t in 0..=s.steps() {
            prop_assert_eq!(back.alpha_bar(t), s.alpha_bar(t));
        }
    }
}
