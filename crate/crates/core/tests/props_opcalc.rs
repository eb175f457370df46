use fracident::opcalc::{
    build_p, lower, rat, Bindings, FracOpExpr, Monomial, OpExpr, ParamPoly, ParamSymbol, Tag,
};
use fracident::signals::{convolve, repeated_integral, SampledSignal};
use proptest::prelude::*;

fn coeff(kind: usize, n: i64, d: i64) -> ParamPoly {
    let q = ParamPoly::constant(rat(n, d));
    let a = ParamPoly::symbol(ParamSymbol::new("a"));
    let b = ParamPoly::symbol(ParamSymbol::new("b"));
    match kind {
        0 => q,
        1 => &q * &a,
        2 => &(&q * &a) * &b,
        _ => &q + &b,
    }
}

/// `c · s^k · (−d/ds)^j`-weighted signal, or a bare power of `s`.
fn atom(params: bool, max_shift: i32) -> impl Strategy<Value = OpExpr> {
    (0..3usize, 0u32..3, -max_shift..=0, -5i64..=5, 1i64..=4, 0..4usize).prop_map(
        move |(sig, j, k, n, d, kind)| {
            let base = match sig {
                0 => OpExpr::signal("u"),
                1 => OpExpr::signal("y"),
                _ if k < 0 => OpExpr::s_pow(0),
                _ => OpExpr::signal("u"),
            };
            let mut e = base;
            for _ in 0..j {
                e = e.dds();
            }
            let c = coeff(if params { kind } else { 0 }, n, d);
            e.shift(k).scale(&c)
        },
    )
}

fn expr(params: bool, max_shift: i32) -> impl Strategy<Value = OpExpr> {
    prop::collection::vec(atom(params, max_shift), 1..4).prop_map(|v| {
        v.iter().fold(OpExpr::zero(), |acc, e| &acc + e)
    })
}

fn bindings(a: f64, w: f64) -> Bindings {
    let (dt, n) = (0.01, 151);
    [
        ("u".into(), SampledSignal::from_fn(dt, n, |t| a * (w * t).sin() + t).unwrap()),
        ("y".into(), SampledSignal::from_fn(dt, n, |t| (1.0 - (-t).exp()) * a - t * t).unwrap()),
    ]
    .into()
}

fn close(x: &SampledSignal, y: &SampledSignal, tol: f64) -> bool {
    let scale = x.max_abs().max(y.max_abs()).max(f64::MIN_POSITIVE);
    x.values().iter().zip(y.values()).all(|(p, q)| (p - q).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_laws(a in expr(true, 2), b in expr(true, 2), c in expr(true, 2)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn dds_is_a_derivation(a in expr(true, 2), b in expr(true, 2), k in -3i32..=0) {
        prop_assert_eq!((&a * &b).dds(), &(&a.dds() * &b) + &(&a * &b.dds()));
        prop_assert_eq!((&a + &b).dds(), &a.dds() + &b.dds());
        let power = ParamPoly::constant(rat(k as i64, 1));
        prop_assert_eq!(a.shift(k).dds(), &a.dds().shift(k) + &a.shift(k - 1).scale(&power));
    }

    #[test]
    fn lowering_is_additive(a in expr(true, 2), b in expr(true, 2), amp in 0.5..2.0f64, w in 0.5..3.0f64) {
        let bind = bindings(amp, w);
        let la = lower(&a, &bind);
        let lb = lower(&b, &bind);
        let (Ok(la), Ok(lb)) = (la, lb) else { return Ok(()) };
        let sum = lower(&(&a + &b), &bind).unwrap();
        let zero = SampledSignal::zeros(0.01, 151).unwrap();
        let keys: std::collections::BTreeSet<&Monomial> = la.keys().chain(lb.keys()).collect();
        for m in keys {
            let expected = la.get(m).unwrap_or(&zero).axpy(1.0, lb.get(m).unwrap_or(&zero)).unwrap();
            let got = sum.get(m).unwrap_or(&zero);
            prop_assert!(close(got, &expected, 1e-12), "monomial {m}");
        }
    }

    #[test]
    fn lowering_turns_products_into_convolutions(a in expr(false, 0), b in expr(false, 0), amp in 0.5..2.0f64, w in 0.5..3.0f64) {
        let bind = bindings(amp, w);
        let one = Monomial::one();
        let (Ok(la), Ok(lb)) = (lower(&a, &bind), lower(&b, &bind)) else { return Ok(()) };
        let (Some(la), Some(lb)) = (la.get(&one), lb.get(&one)) else { return Ok(()) };
        let prod = lower(&(&a * &b), &bind).unwrap();
        let expected = convolve(la, lb).unwrap();
        let zero = SampledSignal::zeros(0.01, 151).unwrap();
        prop_assert!(close(prod.get(&one).unwrap_or(&zero), &expected, 1e-12));
    }

    #[test]
    fn inverse_s_lowers_to_one_integral(a in expr(true, 0), amp in 0.5..2.0f64, w in 0.5..3.0f64) {
        let bind = bindings(amp, w);
        let Ok(la) = lower(&a, &bind) else { return Ok(()) };
        let shifted = lower(&a.shift(-1), &bind).unwrap();
        for (m, s) in &la {
            prop_assert!(close(&shifted[m], &repeated_integral(s, 1).unwrap(), 1e-12));
        }
    }

    #[test]
    fn operator_matrix_rows_are_repeated_dds(a in expr(true, 1), b in expr(true, 1), c in expr(true, 1)) {
        let mut row0 = FracOpExpr::new();
        row0.add_slot(Tag::zero(), &a);
        row0.add_slot(Tag::symbol("a"), &b);
        row0.add_slot(Tag::symbol("b"), &c);
        let Ok((p, tags)) = build_p(&row0) else { return Ok(()) };
        let mut direct = row0.clone();
        for i in 0..p.dim() {
            for (j, t) in tags.iter().enumerate() {
                prop_assert_eq!(p.get(i, j), direct.slot(t).unwrap());
            }
            direct = direct.dds();
        }
    }
}
