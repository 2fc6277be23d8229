use std::sync::Arc;

use metacontrol::model::{builtin, parse_model};
use metacontrol::reasoner::{infer, infer_with_order, RuleId};
use metacontrol::tomasys::{KnowledgeBase, NegativeFact, QaValue};
use proptest::prelude::*;

fn pyramid() -> KnowledgeBase {
    let model = Arc::new(parse_model(builtin::PYRAMID).unwrap());
    KnowledgeBase::new(model, [("o_build", "dual_arm"), ("o_detect", "tag_detect_normal")]).unwrap()
}

const COMPONENTS: [&str; 6] = [
    "arm_left",
    "arm_right",
    "mobile_base",
    "camera",
    "tag_detector_normal",
    "tag_detector_lowlight",
];

proptest! {
    #[test]
    fn fixpoint_is_order_independent(
        errors in prop::collection::vec(any::<bool>(), 6),
        perf in prop::option::of(0.0f64..=1.0),
        order in Just(RuleId::ALL.to_vec()).prop_shuffle(),
    ) {
        let mut kb = pyramid();
        for (c, on) in COMPONENTS.iter().zip(&errors) {
            if *on {
                kb.assert(NegativeFact::ComponentError(c.to_string())).unwrap();
            }
        }
        if let Some(v) = perf {
            kb.assert(QaValue::new("performance", v, 1.0).unwrap()).unwrap();
        }
        let mut other = kb.clone();
        let a = infer(&mut kb).derived;
        let b = infer_with_order(&mut other, &order).derived;
        prop_assert_eq!(&a, &b);
        // a second run adds nothing
        prop_assert_eq!(infer(&mut kb).derived, a);
    }

    #[test]
    fn healthy_components_never_make_designs_unrealisable(errors in prop::collection::vec(any::<bool>(), 6)) {
        let mut kb = pyramid();
        for (c, on) in COMPONENTS.iter().zip(&errors) {
            if *on {
                kb.assert(NegativeFact::ComponentError(c.to_string())).unwrap();
            }
        }
        infer(&mut kb);
        for d in &kb.model().designs.clone() {
            let broken = d.requires.iter().any(|c| errors[COMPONENTS.iter().position(|x| x == c).unwrap()]);
            prop_assert_eq!(kb.design_realisable(&d.name), !broken);
        }
    }
}
