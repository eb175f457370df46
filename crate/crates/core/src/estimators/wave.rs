//! Order and propagation ratio of the fractional diffusion-wave equation
//! from the boundary signals `h = u(0, ·)` and `g = u(L, ·)`.
//!
//! With `β = α/2` and `c = L/v`, `ĝ = ĥ exp(−c s^β)`. One `d/ds` and a
//! multiplication by `ĥ` remove the exponential:
//! `ĝĥ′ − ĝ′ĥ − cβ s^{β−1} ĝĥ = 0`, a grouped equation with `c` as the
//! second-stage factor of the `s^β` group.

use super::general::{identify_prepared, signal_map};
use super::model::Prepared;
use super::result::IdentResult;
use super::IdentOptions;
use crate::error::Result;
use crate::opcalc::{FracOpExpr, OpExpr, ParamPoly, ParamSymbol, SignalId, Tag};
use crate::signals::SampledSignal;

/// Which of distance and speed is known, if any.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum WaveKnown {
    Distance(f64),
    Speed(f64),
    RatioOnly,
}

/// The grouped equation on signals `h`, `g` with the factor `c` divided out.
pub fn wave_equation() -> FracOpExpr {
    let g = OpExpr::signal("g");
    let h = OpExpr::signal("h");
    let beta = ParamPoly::symbol(ParamSymbol::new("beta"));
    let mut row0 = FracOpExpr::new();
    row0.add_slot(Tag::zero(), &(&(&g * &h.dds()) - &(&g.dds() * &h)));
    row0.add_slot(Tag::symbol("beta"), &(-&(&g * &h).shift(-1).scale(&beta)));
    row0
}

/// Estimates `alpha`, `c = L/v` and, if one of them is known, the other.
pub fn identify_diffusion_wave(
    h: &SampledSignal,
    g: &SampledSignal,
    known: WaveKnown,
    opts: &IdentOptions,
) -> Result<IdentResult> {
    h.check_grid(g)?;
    let row0 = wave_equation();
    let prep = Prepared {
        stage2_row0: row0.clone(),
        row0,
        theta1: vec![ParamSymbol::new("beta")],
        theta2: vec![(Tag::symbol("beta"), ParamSymbol::new("c"))],
        unrecovered: Vec::new(),
        output: SignalId::new("g"),
        input: SignalId::new("h"),
    };
    let b = signal_map(&[(&prep.input, h), (&prep.output, g)]);
    let mut r = identify_prepared(&prep, &b, opts)?;
    let beta = r.column("beta").expect("estimated");
    for row in &mut r.trajectories {
        row[beta] *= 2.0;
    }
    r.rename("beta", "alpha");
    r.warnings.retain(|w| !w.contains("beta"));
    let c = r.column("c").expect("estimated");
    match known {
        WaveKnown::Distance(l) => r.push_derived("v", |row| l / row[c]),
        WaveKnown::Speed(v) => r.push_derived("L", |row| v * row[c]),
        WaveKnown::RatioOnly => {}
    }
    if let Some(a) = r.estimate("alpha") {
        if !(a > 0.0 && a <= 2.0) {
            r.warnings.push(format!("alpha = {a} outside (0, 2]"));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::simulate::{diffusion_wave_forward, test_signal, SignalKind, WaveParams};
    use approx::assert_relative_eq;

    #[test]
    fn equation_eliminates_to_linear_in_beta() {
        let e = crate::opcalc::eliminate(&wave_equation()).unwrap();
        let beta = crate::opcalc::Monomial::var(ParamSymbol::new("beta"));
        let monos: Vec<_> = e.equation.monomials().into_iter().collect();
        assert_eq!(monos, vec![crate::opcalc::Monomial::one(), beta.clone()]);
        assert_eq!(e.content, beta);
    }

    #[test]
    fn delay_data() {
        let h = test_signal(&SignalKind::SmoothStep { rise: 1.0 }, 5.0, 0.00125).unwrap();
        let g = diffusion_wave_forward(&h, &WaveParams { alpha: 2.0, c: 0.5 }).unwrap();
        let r = identify_diffusion_wave(&h, &g, WaveKnown::Speed(3.0), &IdentOptions::default())
            .unwrap();
        assert_relative_eq!(r.estimate("alpha").unwrap(), 2.0, max_relative = 1e-2);
        assert_relative_eq!(r.estimate("c").unwrap(), 0.5, max_relative = 1e-2);
        assert_relative_eq!(r.estimate("L").unwrap(), 1.5, max_relative = 1e-2);
    }

    #[test]
    fn zero_input_is_singular() {
        let z = SampledSignal::zeros(0.01, 501).unwrap();
        assert!(matches!(
            identify_diffusion_wave(&z, &z, WaveKnown::RatioOnly, &IdentOptions::default()),
            Err(Error::Singular { .. })
        ));
    }
}
