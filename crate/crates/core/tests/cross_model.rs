//! Cross-checks between models that describe the same market in
//! different ways.

use marketdyn_core::competition::{
    competitive_path_numeric, fixed_point_no_churn, innovators_only_path, spontaneous_equilibrium, spontaneous_path,
    two_supplier_path, BassCompetition, ChurnMatrix, ChurnSpec, TwoSupplierChurn,
};
use marketdyn_core::feedback::{feedback_path, latency_metrics, FeedbackKernel, FeedbackModel};
use marketdyn_core::games::{bpq_path, bpq_path_numeric, BpqCase, BpqKind, BpqState};
use marketdyn_core::monopoly::{
    hesitation_path, scheduled_path, simple_path, HesitationParams, HesitationVariant, RateSchedule, SimpleAdoption,
};
use marketdyn_core::{Error, TimeGrid};
use proptest::prelude::*;

fn grid(t1: f64, n: usize) -> Vec<f64> {
    TimeGrid::uniform(0.0, t1, n).unwrap().into_inner()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn constant_rate_three_ways() {
    let g = grid(30.0, 301);
    let simple = simple_path(&SimpleAdoption::new(0.2, 0.05, 1.0).unwrap(), &g).unwrap();
    let sched = scheduled_path(&RateSchedule::Constant { a: 0.2 }, 0.05, 1.0, &g).unwrap();
    let fb = feedback_path(&FeedbackModel::new(FeedbackKernel::None, 0.2, 0.05, 1.0).unwrap(), &g).unwrap();
    let u = simple.channel("u").unwrap();
    assert!(max_gap(&u, &sched.channel("u").unwrap()) < 1e-14);
    assert!(max_gap(&u, &fb.channel("u").unwrap()) < 1e-12);
    assert!(max_gap(&simple.channel("D").unwrap(), &fb.channel("D").unwrap()) < 1e-12);
}

#[test]
fn bass_with_vanishing_imitation_is_constant_rate() {
    let m = FeedbackModel::new(FeedbackKernel::Bass { ratio: 1e-9 }, 0.3, 0.0, 1.0).unwrap();
    let l = latency_metrics(&m).unwrap();
    assert!((l.t50 - 2f64.ln() / 0.3).abs() < 1e-6);
}

#[test]
fn two_suppliers_closed_form_linear_and_nonlinear() {
    let g = grid(40.0, 401);
    let (m1, m2, a12, a21) = (0.3, 0.1, 0.05, 0.2);
    let closed = two_supplier_path(&TwoSupplierChurn { m1, m2, a12, a21 }, &g).unwrap();
    let c = ChurnMatrix::two(a12, a21).unwrap();
    let linear = spontaneous_path(&[m1, m2], &c, &g).unwrap();
    let market = BassCompetition::innovators(vec![m1, m2]).unwrap();
    let numeric = competitive_path_numeric(&market, Some(&ChurnSpec::Spontaneous(c)), &g).unwrap();
    for name in ["u1", "u2"] {
        let u = closed.channel(name).unwrap();
        assert!(max_gap(&u, &linear.channel(name).unwrap()) < 1e-12, "{name}");
        assert!(max_gap(&u, &numeric.channel(name).unwrap()) < 1e-9, "{name}");
    }
}

#[test]
fn innovators_without_churn_split_by_innovation() {
    let m = vec![0.1, 0.3, 0.2];
    let g = grid(60.0, 61);
    let path = innovators_only_path(&m, &g).unwrap();
    let end = path.last_state().unwrap();
    let fixed = fixed_point_no_churn(&BassCompetition::innovators(m.clone()).unwrap()).unwrap();
    for i in 0..3 {
        assert!((end[i] - fixed[i]).abs() < 1e-6);
        assert!((fixed[i] - m[i] / 0.6).abs() < 1e-15);
    }
}

#[test]
fn sir_closed_form_against_its_own_reference() {
    let case = BpqCase::new(BpqKind::Case2 { beta: 0.002, b: 0.5 }, BpqState::new(990.0, 10.0, 0.0).unwrap()).unwrap();
    let g = grid(40.0, 81);
    let closed = bpq_path(&case, &g).unwrap();
    let numeric = bpq_path_numeric(&case, &g, Some(1e-3)).unwrap();
    for name in ["B", "P", "Q"] {
        assert!(max_gap(&closed.channel(name).unwrap(), &numeric.channel(name).unwrap()) < 1e-6, "{name}");
    }
}

#[test]
fn errors_are_typed() {
    assert!(matches!(SimpleAdoption::new(-1.0, 0.0, 1.0), Err(Error::InvalidParameter { name: "a", .. })));
    let c = ChurnMatrix::new(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
    assert!(matches!(spontaneous_equilibrium(&c), Err(Error::DegenerateMarket)));
    let sir = BpqCase::new(BpqKind::Case2 { beta: 0.002, b: 0.5 }, BpqState::new(1000.0, 0.0, 0.0).unwrap());
    assert!(matches!(sir, Err(Error::Initiation(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hesitation_mass_is_conserved(a in 0.01f64..2.0, b in 0.01f64..2.0, c in 0.01f64..2.0, returning: bool) {
        let variant = if returning { HesitationVariant::Returning } else { HesitationVariant::Absorbing };
        let p = HesitationParams { a, b, c, variant };
        let tr = hesitation_path(&p, 1.0, &grid(20.0, 41)).unwrap();
        for row in tr.states() {
            prop_assert!((row[0] + row[1] + row[2] - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().take(3).all(|v| *v >= -1e-15));
        }
    }

    #[test]
    fn feedback_share_rises_to_one(kernel in 0usize..6, u0 in 0.001f64..0.4, t50 in 0.5f64..20.0) {
        let k = [
            FeedbackKernel::None,
            FeedbackKernel::Linear,
            FeedbackKernel::Sqrt,
            FeedbackKernel::Quadratic,
            FeedbackKernel::OneMinusU,
            FeedbackKernel::Bass { ratio: 3.0 },
        ][kernel];
        let m = FeedbackModel::calibrated(k, t50, u0, 1.0).unwrap();
        let u = feedback_path(&m, &grid(4.0 * t50, 101)).unwrap().channel("u").unwrap();
        prop_assert!(u.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((m.u_of_t(t50).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn churn_equilibrium_on_simplex(a in proptest::collection::vec(0.01f64..1.0, 6)) {
        let rows = vec![vec![0.0, a[0], a[1]], vec![a[2], 0.0, a[3]], vec![a[4], a[5], 0.0]];
        let c = ChurnMatrix::new(&rows).unwrap();
        let u = spontaneous_equilibrium(&c).unwrap();
        prop_assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(u.iter().all(|v| *v > 0.0));
        prop_assert!(c.flow(&u).iter().all(|f| f.abs() < 1e-12));
    }
}
