use proptest::prelude::*;

use narygw::joint::{default_j_max, joint_run};
use narygw::mc::brute_force_joint;
use narygw::{Execution, OffspringLaw};

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 4).prop_filter("non-degenerate", |w| w.iter().sum::<f64>() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recursion_matches_enumeration(w in weights(), arity in 1usize..=3, height in 1usize..=3) {
        let total: f64 = w.iter().sum();
        let coeffs: Vec<f64> = w.iter().map(|x| x / total).collect();
        let law = OffspringLaw::generic(coeffs).unwrap();
        let degree = 40;
        let table = joint_run(&law, arity, height, degree, default_j_max(degree, arity), Execution::Auto).unwrap();
        let exact = brute_force_joint(&law, arity, height).unwrap();
        for (&(j, t), &p) in &exact {
            prop_assert!((table.prob(j as usize, t as usize) - p).abs() < 1e-10);
        }
        let listed: f64 = exact.values().sum();
        let retained: f64 = table.rows.iter().flatten().sum();
        prop_assert!((listed - retained).abs() < 1e-10);
    }
}

#[test]
fn truncation_drops_only_large_progeny() {
    let law = OffspringLaw::generic(vec![0.2, 0.2, 0.2, 0.4]).unwrap();
    let exact = brute_force_joint(&law, 2, 3).unwrap();
    let degree = 12;
    let table = joint_run(&law, 2, 3, degree, default_j_max(degree, 2), Execution::Sequential).unwrap();
    for (&(j, t), &p) in &exact {
        if t as usize <= degree {
            assert!((table.prob(j as usize, t as usize) - p).abs() < 1e-12);
        }
    }
    let kept: f64 = exact.iter().filter(|((_, t), _)| *t as usize <= degree).map(|(_, p)| p).sum();
    assert!((table.retained_mass[2] - kept).abs() < 1e-12);
    assert!(table.truncation_deficit() > 0.0);
}
