use std::collections::BTreeMap;

use proptest::prelude::*;
use roelab::roe_ops::{classify_decay, DecayClass, DecayOptions, DecayProfile};

const L: i64 = 12;

fn profile(f: impl Fn(&[i64], f64) -> f64) -> DecayProfile {
    let mut entries = BTreeMap::new();
    for x in -L..=L {
        for y in -L..=L {
            let k = vec![x, y];
            let r = ((x * x + y * y) as f64).sqrt();
            let v = f(&k, r);
            if v != 0.0 {
                entries.insert(k, v);
            }
        }
    }
    DecayProfile::new(entries, (2.0 * (L * L) as f64).sqrt())
}

fn opts() -> DecayOptions {
    DecayOptions { window_margin: 2.0, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponential_rate_is_amplitude_independent(rate in 0.2f64..1.5, amp in 1e-3f64..1e3) {
        let c = classify_decay(&profile(|_, r| amp * (-rate * r).exp()), &opts()).unwrap();
        match c.class {
            DecayClass::Exponential { rate: fitted } => prop_assert!((fitted - rate).abs() < 1e-6 * rate.max(1.0)),
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn interference_zeros_do_not_change_the_class(rate in 0.3f64..1.0, stride in 2i64..5) {
        let clean = classify_decay(&profile(|_, r| (-rate * r).exp()), &opts()).unwrap();
        let holes = profile(|k, r| if k[0] % stride == 0 && k[0] != 0 { 1e-14 } else { (-rate * r).exp() });
        let dented = classify_decay(&holes, &opts()).unwrap();
        prop_assert!(matches!(dented.class, DecayClass::Exponential { .. }), "{:?}", dented.class);
        if let (DecayClass::Exponential { rate: a }, DecayClass::Exponential { rate: b }) = (clean.class, dented.class) {
            prop_assert!((a - b).abs() < 0.15 * a);
        }
    }

    #[test]
    fn power_laws_are_not_exponential(order in 1.0f64..3.0) {
        let c = classify_decay(&profile(|_, r| (1.0 + r).powf(-order)), &opts()).unwrap();
        prop_assert!(matches!(c.class, DecayClass::None), "{:?}", c.class);
        prop_assert!((c.poly_order - order).abs() < 1e-6);
    }
}

#[test]
fn finite_support_is_banded() {
    let c = classify_decay(&profile(|_, r| if r <= 3.0 { 1.0 / (1.0 + r) } else { 0.0 }), &opts()).unwrap();
    assert!(matches!(c.class, DecayClass::Banded { radius } if (radius - 3.0).abs() < 1e-12), "{:?}", c.class);
}
