use gppl::exact::{check_law, FiniteModel, Law};
use gppl::rational::ratio;
use gppl::termgen::TermGen;
use proptest::prelude::*;

fn models() -> Vec<FiniteModel> {
    vec![FiniteModel::two_cluster(), FiniteModel::resampling(&ratio(1, 3), 2)]
}

fn holds(law: Law, seed: u64) {
    let instances = TermGen::new(seed).law_instances(law, 4);
    for model in models() {
        let report = check_law(&model, law, &instances).unwrap();
        assert!(report.ok(), "{} failed for seed {seed}: {:?}", law.name(), report.first_failure());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn let_assoc(seed in any::<u64>()) { holds(Law::LetAssoc, seed) }

    #[test]
    fn let_pair(seed in any::<u64>()) { holds(Law::LetPair, seed) }

    #[test]
    fn let_comm(seed in any::<u64>()) { holds(Law::LetComm, seed) }

    #[test]
    fn affine(seed in any::<u64>()) { holds(Law::Affine, seed) }

    #[test]
    fn let_value(seed in any::<u64>()) { holds(Law::LetValue, seed) }
}

#[test]
fn axioms_separate_the_two_models() {
    let cluster = FiniteModel::two_cluster();
    let resampling = FiniteModel::resampling(&ratio(1, 2), 2);
    let run = |m: &FiniteModel, law: Law| check_law(m, law, &[law.axiom_instance().unwrap()]).unwrap().ok();
    assert!(!run(&cluster, Law::SelfLoop));
    assert!(run(&cluster, Law::Symmetry));
    assert!(run(&cluster, Law::Determinism));
    assert!(!run(&resampling, Law::Determinism));
}
