use fracident::estimators::{identify_voigt_hom, IdentOptions};
use fracident::simulate::{test_signal, voigt_forward, SignalKind, VoigtParams};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = SignalKind> {
    prop_oneof![
        (0.5..2.0f64).prop_map(|slope| SignalKind::Ramp { slope }),
        (0.5..2.0f64, 0.5..2.0f64).prop_map(|(amplitude, omega)| SignalKind::Sine { amplitude, omega }),
        (0.5..2.0f64).prop_map(|rise| SignalKind::SmoothStep { rise }),
        (0u64..100).prop_map(|seed| SignalKind::PrbsSmoothed { hold: 0.5, seed }),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn common_scaling_leaves_alpha_and_e0(k in kind(), c in 0.01..100.0f64, alpha in 0.2..0.8f64) {
        let eps = test_signal(&k, 5.0, 0.0025).unwrap();
        let sigma = voigt_forward(&eps, &VoigtParams::homogeneous(alpha, 2.0, 1.0)).unwrap();
        let opts = IdentOptions::default();
        let base = identify_voigt_hom(&eps, &sigma, &opts).unwrap();
        let scaled = identify_voigt_hom(&eps.scale(c), &sigma.scale(c), &opts).unwrap();
        for name in ["alpha", "E0"] {
            prop_assert!(rel(scaled.estimate(name).unwrap(), base.estimate(name).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn output_scaling_scales_moduli(k in kind(), c in 0.01..100.0f64) {
        let eps = test_signal(&k, 5.0, 0.0025).unwrap();
        let sigma = voigt_forward(&eps, &VoigtParams::homogeneous(0.5, 2.0, 1.0)).unwrap();
        let opts = IdentOptions::default();
        let base = identify_voigt_hom(&eps, &sigma, &opts).unwrap();
        let scaled = identify_voigt_hom(&eps, &sigma.scale(c), &opts).unwrap();
        prop_assert!(rel(scaled.estimate("alpha").unwrap(), base.estimate("alpha").unwrap()) <= 1e-9);
        for name in ["E0", "E1"] {
            prop_assert!(rel(scaled.estimate(name).unwrap(), c * base.estimate(name).unwrap()) <= 1e-9);
        }
    }
}
