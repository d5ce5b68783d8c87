//! Checks specific to the `K = 0`, perturbed and elastic families.

use num_traits::Zero;

use crate::algebra::{discriminant, discriminant_half, int, MultiPoly, Rational};
use crate::discrimsep::{check_separable, Verdict};
use crate::numeric::{c as cx, C64};
use crate::pencil::PencilSpec;

use super::efg::{efg_structure_check, EfgSpec, SXV};
use super::rigid::{rigid_map, rigid_pushforward};
use super::{DynError, GenState, System};

const WXV: [&str; 3] = ["w", "x1", "x2"];

/// `(x₁−x₂)² w² − 2(x₁+x₂) w + 1`.
pub fn k0_f2() -> MultiPoly {
    let w = MultiPoly::var("w", &WXV);
    let x1 = MultiPoly::var("x1", &WXV);
    let x2 = MultiPoly::var("x2", &WXV);
    &(&(&(&x1 - &x2).pow(2) * &w.pow(2)) - &(&(&x1 + &x2) * &w).scale(&int(2)))
        + &MultiPoly::one(&WXV)
}

/// A discriminant compared with a product of univariate factors.
#[derive(Clone, Debug)]
pub struct FactorComparison {
    pub discriminant: MultiPoly,
    pub target: MultiPoly,
    /// `λ` with `discriminant = λ · target`, if such a constant exists.
    pub ratio: Option<Rational>,
}

impl FactorComparison {
    fn new(discriminant: MultiPoly, target: MultiPoly) -> Self {
        let ratio = target.terms().next().and_then(|(e, c)| {
            let d = discriminant
                .with_vars(&target.vars().iter().map(|s| s.as_str()).collect::<Vec<_>>())
                .ok()?;
            let dc = d
                .terms()
                .find(|(f, _)| *f == e)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(Rational::zero);
            let lam = dc / c;
            (d == target.scale(&lam)).then_some(lam)
        });
        FactorComparison {
            discriminant,
            target,
            ratio,
        }
    }

    pub fn exact(&self) -> bool {
        self.ratio.as_ref().is_some_and(|r| *r == int(1))
    }

    pub fn proportional(&self) -> bool {
        self.ratio.as_ref().is_some_and(|r| !r.is_zero())
    }
}

#[derive(Clone, Debug)]
pub struct K0SepReport {
    pub verdict: Verdict,
    /// `𝒟_{x₁}F₂` in the half convention against `P(x₂) φ(w)` with
    /// `P(x) = 2x`, `φ(w) = w³`.
    pub half: FactorComparison,
    /// Same with the standard discriminant.
    pub standard: FactorComparison,
}

pub fn k0_f2_check() -> Result<K0SepReport, DynError> {
    let f2 = k0_f2();
    let sep = check_separable(&f2, Some(WXV))?;
    let target = (&MultiPoly::var("x2", &["w", "x2"]) * &MultiPoly::var("w", &["w", "x2"]).pow(3))
        .scale(&int(2));
    Ok(K0SepReport {
        verdict: sep.verdict,
        half: FactorComparison::new(discriminant_half(&f2, "x1")?, target.clone()),
        standard: FactorComparison::new(discriminant(&f2, "x1")?, target),
    })
}

/// The two rigid-coordinate lines stated for the `K = 0` system at
/// `α = ir, β = i/2`: `ṙ = 2pq + cγ′` and `γ̇″ = ic`.
#[derive(Clone, Copy, Debug)]
pub struct K0Reduction {
    pub r_dot: C64,
    pub r_dot_stated: C64,
    pub gamma2_dot: C64,
    pub gamma2_dot_stated: C64,
    /// `(i/2)(x₂e₁ − x₁e₂)/c`, the value the integrals force.
    pub gamma2_dot_derived: C64,
}

impl K0Reduction {
    pub fn r_line_holds(&self, tol: f64) -> bool {
        (self.r_dot - self.r_dot_stated).norm() <= tol * self.r_dot.norm().max(1.0)
    }

    pub fn gamma2_line_holds(&self, tol: f64) -> bool {
        (self.gamma2_dot - self.gamma2_dot_stated).norm() <= tol * self.gamma2_dot.norm().max(1.0)
    }
}

pub fn k0_rigid_reduction(sys: &System, st: &GenState) -> Result<K0Reduction, DynError> {
    let rs = rigid_map(st, sys.c)?;
    let f = rigid_pushforward(sys, st)?;
    let i = cx(0.0, 1.0);
    Ok(K0Reduction {
        r_dot: f.r,
        r_dot_stated: 2.0 * rs.p * rs.q + sys.c * rs.gamma1,
        gamma2_dot: f.gamma2,
        gamma2_dot_stated: i * sys.c,
        gamma2_dot_derived: i / 2.0 * (st.x2 * st.e1 - st.x1 * st.e2) / sys.c,
    })
}

#[derive(Clone, Debug)]
pub struct PerturbedReport {
    pub verdict: Verdict,
    pub structure_holds: bool,
    /// Standard `𝒟_{x₁}F` against the printed `φ(s) P(x₂)`.
    pub printed: FactorComparison,
}

/// `φ(s) = (2s − a₅)(2a₁ + a₅s − 2s²)` and `P(x) = 2x(2a₁x² − a₅x − 2)` in `(s, x2)`.
pub fn perturbed_printed_factors(a1: &Rational, a5: &Rational) -> MultiPoly {
    let vs = ["s", "x2"];
    let s = MultiPoly::var("s", &vs);
    let x = MultiPoly::var("x2", &vs);
    let k = |r: &Rational| MultiPoly::constant(r.clone(), &vs);
    let phi = &(&s.scale(&int(2)) - &k(a5))
        * &(&(&k(&(a1 * int(2))) + &s.scale(a5)) - &s.pow(2).scale(&int(2)));
    let p = &x.scale(&int(2)) * &(&(&x.pow(2).scale(&(a1 * int(2))) - &x.scale(a5)) - &k(&int(2)));
    &phi * &p
}

pub fn perturbed_check(
    a1: &Rational,
    a5: &Rational,
    k: [Rational; 3],
) -> Result<PerturbedReport, DynError> {
    let efg = EfgSpec::perturbed(a1, a5, k);
    let f = efg.pencil_f();
    let sep = check_separable(&f, Some(SXV))?;
    let d = discriminant(&f, "x1")?;
    Ok(PerturbedReport {
        verdict: sep.verdict,
        structure_holds: efg_structure_check(&efg)?.core_passes(),
        printed: FactorComparison::new(d, perturbed_printed_factors(a1, a5)),
    })
}

/// `a₁ = 0, a₅ = 2τ, a₂ = 2(τ−I₁)/a₀, a₃ = 2I₃/a₀, a₄ = (8τ(I₁−τ) + 4(I₂−τ²))/a₀`.
pub fn elastic_pencil(
    tau: &Rational,
    i1: &Rational,
    i2: &Rational,
    i3: &Rational,
    a0: &Rational,
) -> Result<PencilSpec, DynError> {
    if a0.is_zero() {
        return Err(DynError::ZeroA0);
    }
    let two = int(2);
    Ok(PencilSpec::new([
        a0.clone(),
        Rational::zero(),
        &two * (tau - i1) / a0,
        &two * i3 / a0,
        (int(8) * tau * (i1 - tau) + int(4) * (i2 - tau * tau)) / a0,
        &two * tau,
    ]))
}

#[derive(Clone, Debug)]
pub struct ElasticReport {
    pub spec: PencilSpec,
    /// The elastic `Ê, F̂, Ĝ` equal the `K = 1` family of `spec`.
    pub efg_matches_family: bool,
    pub separable: bool,
    /// `a₁ = a₅ = 0`, the classical top's pencil.
    pub kowalevski_type: bool,
}

pub fn elastic_check(
    tau: &Rational,
    i1: &Rational,
    i2: &Rational,
    i3: &Rational,
    a0: &Rational,
) -> Result<ElasticReport, DynError> {
    let spec = elastic_pencil(tau, i1, i2, i3, a0)?;
    let efg = EfgSpec::elastic(tau, i1, i2, i3);
    let fam = EfgSpec::kowalevski_type(&spec);
    let sep = check_separable(&efg.pencil_f(), Some(SXV))?;
    Ok(ElasticReport {
        efg_matches_family: efg.same_polys(&fam),
        separable: sep.verdict.is_separable(),
        kowalevski_type: spec.a(1).is_zero() && spec.a(5).is_zero(),
        spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, to_f64};
    use crate::dynamics::AlphaBeta;
    use crate::ode::OdeOptions;
    use crate::sampling::{complex, rng_for, small_rational};

    #[test]
    fn f2_is_separable_up_to_constants() {
        let r = k0_f2_check().unwrap();
        assert!(r.verdict.is_separable());
        assert_eq!(r.half.ratio, Some(int(2)));
        assert_eq!(r.standard.ratio, Some(int(8)));
        assert!(!r.half.exact() && r.half.proportional());
    }

    #[test]
    fn k0_integrals_and_relation() {
        let sys = System::new(EfgSpec::k0(), cx(0.8, 0.0), AlphaBeta::kowalevski()).unwrap();
        let st = sys.random_constrained_state(&mut rng_for(1, 50, 0));
        let (res, sc) = sys.identity1(&st);
        let relation = 2.0 * st.e1 * st.x2 + 2.0 * st.e2 * st.x1 - 1.0
            + st.e1 * st.e2 * (st.x1 - st.x2).powu(2);
        assert!((res - relation).norm() < 1e-12 * sc);
        assert!(relation.norm() < 1e-10 * sc);
        let tr = sys
            .integrate_to(&st, 1.0, 4, &OdeOptions::default())
            .unwrap();
        assert!(tr.worst_drift() < 1e-8, "{:?}", tr.max_drift);
    }

    #[test]
    fn k0_rigid_lines() {
        let sys = System::new(EfgSpec::k0(), cx(1.2, 0.0), AlphaBeta::kowalevski()).unwrap();
        let st = sys.random_state(&mut rng_for(1, 51, 0));
        let red = k0_rigid_reduction(&sys, &st).unwrap();
        assert!(red.r_line_holds(1e-12));
        assert!((red.gamma2_dot - red.gamma2_dot_derived).norm() < 1e-12);
        assert!(!red.gamma2_line_holds(1e-6));
    }

    #[test]
    fn perturbed_printed_factors_match_at_k2_one() {
        for i in 0..5 {
            let mut rng = rng_for(2, 52, i);
            let (a1, a5) = (small_rational(&mut rng), small_rational(&mut rng));
            let r = perturbed_check(&a1, &a5, [int(0), int(1), int(0)]).unwrap();
            assert!(r.printed.exact(), "{a1} {a5}");
            assert!(r.verdict.is_separable() && r.structure_holds);
        }
        let r = perturbed_check(&int(1), &int(2), [int(1), int(1), int(1)]).unwrap();
        assert!(r.verdict.is_separable());
        assert!(!r.printed.exact());
    }

    #[test]
    fn perturbed_integrals_conserved() {
        let efg = EfgSpec::perturbed(&rat(1, 2), &int(-1), [int(1), int(1), rat(1, 3)]);
        let sys = System::new(efg, cx(1.0, 0.0), AlphaBeta::kowalevski()).unwrap();
        let st = sys.random_constrained_state(&mut rng_for(2, 53, 0));
        let tr = sys
            .integrate_to(&st, 1.0, 4, &OdeOptions::default())
            .unwrap();
        assert!(tr.worst_drift() < 1e-8, "{:?}", tr.max_drift);
    }

    #[test]
    fn elastic_pencil_matches_family() {
        for tau in [-1, 0, 1] {
            for a0 in [int(-2), rat(3, 5)] {
                let r = elastic_check(&int(tau), &rat(1, 2), &int(3), &rat(-2, 3), &a0).unwrap();
                assert!(r.efg_matches_family && r.separable, "tau {tau}");
                assert_eq!(r.kowalevski_type, tau == 0);
            }
        }
        assert_eq!(
            elastic_pencil(&int(1), &int(1), &int(1), &int(1), &int(0)).unwrap_err(),
            DynError::ZeroA0
        );
    }

    #[test]
    fn elastic_integrals_along_flow() {
        // k² = I₁ is imposed on the initial state; the other three relations
        // carry I₂, I₃ inside Ê, F̂, Ĝ and vanish on the level set.
        for tau in [-1, 0, 1] {
            let (i1, i2, i3) = (rat(1, 2), int(3), rat(-2, 3));
            let sys = System::new(
                EfgSpec::elastic(&int(tau), &i1, &i2, &i3),
                cx(1.0, 0.0),
                AlphaBeta::kowalevski(),
            )
            .unwrap();
            let mut rng = rng_for(3, 54, (tau + 1) as u64);
            let st = loop {
                let (x1, x2) = (complex(&mut rng, 1.0), complex(&mut rng, 1.0));
                if let Some(st) = sys.constrained_state_k2(x1, x2, cx(to_f64(&i1), 0.0), 0) {
                    if st.r.norm() > 0.2 && st.g.norm() > 0.2 && st.scale() < 20.0 {
                        break st;
                    }
                }
            };
            let tr = sys
                .integrate_to(&st, 1.0, 4, &OdeOptions::default())
                .unwrap();
            assert!(tr.worst_drift() < 1e-8, "tau {tau}: {:?}", tr.max_drift);
            for iv in &tr.integrals {
                assert!((iv[0] - 0.5).norm() < 1e-8);
                assert!(iv[1..].iter().all(|z| z.norm() < 1e-8), "{iv:?}");
            }
        }
    }
}
