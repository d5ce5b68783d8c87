//! The polynomial triples `(Ê, F̂, Ĝ)` that define a generalized system.

use num_traits::{One, Zero};

use crate::algebra::{int, rat, CompiledPoly, MultiPoly, Rational};
use crate::numeric::C64;
use crate::pencil::PencilSpec;

use super::DynError;

pub const XV: [&str; 2] = ["x1", "x2"];
pub const SXV: [&str; 3] = ["s", "x1", "x2"];

#[derive(Clone, Debug, PartialEq)]
pub enum EfgSource {
    /// The pencil family with leading coefficient `K`.
    General {
        spec: PencilSpec,
        k: Rational,
    },
    K0,
    Perturbed {
        a1: Rational,
        a5: Rational,
        k: [Rational; 3],
    },
    Elastic {
        tau: Rational,
        i: [Rational; 3],
    },
}

#[derive(Clone, Debug)]
struct Compiled {
    e: CompiledPoly,
    f: CompiledPoly,
    g: CompiledPoly,
    e_1: CompiledPoly,
    e_2: CompiledPoly,
    f_1: CompiledPoly,
    f_2: CompiledPoly,
    g_1: CompiledPoly,
    g_2: CompiledPoly,
    p: CompiledPoly,
}

/// Values of `Ê, F̂, Ĝ` and their first partials at a point.
#[derive(Clone, Copy, Debug)]
pub struct EfgValues {
    pub e: C64,
    pub f: C64,
    pub g: C64,
    pub e_x: [C64; 2],
    pub f_x: [C64; 2],
    pub g_x: [C64; 2],
}

#[derive(Clone, Debug)]
pub struct EfgSpec {
    pub e: MultiPoly,
    pub f: MultiPoly,
    pub g: MultiPoly,
    pub source: EfgSource,
    compiled: Compiled,
}

fn x1() -> MultiPoly {
    MultiPoly::var("x1", &XV)
}

fn x2() -> MultiPoly {
    MultiPoly::var("x2", &XV)
}

fn k(r: &Rational) -> MultiPoly {
    MultiPoly::constant(r.clone(), &XV)
}

fn compile(p: &MultiPoly) -> CompiledPoly {
    p.with_vars(&XV)
        .expect("EFG polynomials live in (x1, x2)")
        .compile()
}

impl EfgSpec {
    pub fn new(
        e: MultiPoly,
        f: MultiPoly,
        g: MultiPoly,
        source: EfgSource,
    ) -> Result<Self, DynError> {
        let e = e.with_vars(&XV)?;
        let f = f.with_vars(&XV)?;
        let g = g.with_vars(&XV)?;
        let p = &(&e * &x1().pow(2)) + &(&(&f * &x1()).scale(&int(2)) + &g);
        let compiled = Compiled {
            e: compile(&e),
            f: compile(&f),
            g: compile(&g),
            e_1: compile(&e.derivative("x1")),
            e_2: compile(&e.derivative("x2")),
            f_1: compile(&f.derivative("x1")),
            f_2: compile(&f.derivative("x2")),
            g_1: compile(&g.derivative("x1")),
            g_2: compile(&g.derivative("x2")),
            p: compile(&p),
        };
        Ok(EfgSpec {
            e,
            f,
            g,
            source,
            compiled,
        })
    }

    /// The family attached to a pencil, with free leading coefficient `K`.
    pub fn general(spec: &PencilSpec, kk: &Rational) -> Self {
        let a = |i: usize| spec.a(i).clone();
        let s = &x1() + &x2();
        let m = &x1() * &x2();
        let e = &(&k(&-(a(0) * a(2))) - &s.pow(2).scale(kk)) - &s.scale(&(a(1) * int(2)));
        let f = &(&(&k(&(a(0) * a(3) / int(2))) + &(&m * &s).scale(kk))
            + &s.scale(&(a(5) / int(2))))
            + &m.scale(&a(1));
        let g = &(&k(&-(a(0) * a(4) / int(4))) - &m.pow(2).scale(kk)) - &m.scale(&a(5));
        Self::new(
            e,
            f,
            g,
            EfgSource::General {
                spec: spec.clone(),
                k: kk.clone(),
            },
        )
        .expect("context is (x1, x2)")
    }

    /// `K = 1`.
    pub fn kowalevski_type(spec: &PencilSpec) -> Self {
        Self::general(spec, &Rational::one())
    }

    pub fn k0() -> Self {
        Self::new(
            MultiPoly::zero(&XV),
            MultiPoly::one(&XV),
            MultiPoly::zero(&XV),
            EfgSource::K0,
        )
        .expect("constants")
    }

    pub fn perturbed(a1: &Rational, a5: &Rational, kk: [Rational; 3]) -> Self {
        let s = &x1() + &x2();
        let m = &x1() * &x2();
        let e = &k(&kk[0]) - &s.scale(&(a1 * int(2)));
        let f = &(&k(&kk[1]) + &s.scale(&(a5 / int(2)))) + &m.scale(a1);
        let g = &k(&kk[2]) - &m.scale(a5);
        Self::new(
            e,
            f,
            g,
            EfgSource::Perturbed {
                a1: a1.clone(),
                a5: a5.clone(),
                k: kk,
            },
        )
        .expect("context is (x1, x2)")
    }

    /// The elastic deformation with parameter `τ` and integral values
    /// `I₁, I₂, I₃`.
    pub fn elastic(tau: &Rational, i1: &Rational, i2: &Rational, i3: &Rational) -> Self {
        let s = &x1() + &x2();
        let m = &x1() * &x2();
        let two = int(2);
        let e = &(-&s.pow(2)) + &k(&(&two * (i1 - tau)));
        let f = &(&(&m + &k(tau)) * &s) + &k(i3);
        let g0 = -(&two * tau * (i1 - tau)) + tau * tau - i2;
        let g = &(&(-&m.pow(2)) - &m.scale(&(&two * tau))) + &k(&g0);
        Self::new(
            e,
            f,
            g,
            EfgSource::Elastic {
                tau: tau.clone(),
                i: [i1.clone(), i2.clone(), i3.clone()],
            },
        )
        .expect("context is (x1, x2)")
    }

    /// `Ê x₁² + 2F̂ x₁ + Ĝ` in `(x1, x2)`.
    pub fn p_poly(&self) -> MultiPoly {
        &(&self.e * &x1().pow(2)) + &(&(&self.f * &x1()).scale(&int(2)) + &self.g)
    }

    /// `Ê x₂² + 2F̂ x₂ + Ĝ`.
    pub fn q_poly(&self) -> MultiPoly {
        &(&self.e * &x2().pow(2)) + &(&(&self.f * &x2()).scale(&int(2)) + &self.g)
    }

    pub fn r_poly(&self) -> MultiPoly {
        &(&(&self.e * &(&x1() * &x2())) + &(&self.f * &(&x1() + &x2()))) + &self.g
    }

    pub fn r1_poly(&self) -> MultiPoly {
        &(&self.e * &self.g) - &self.f.pow(2)
    }

    /// `H = F̂² − ÊĜ`.
    pub fn h_poly(&self) -> MultiPoly {
        -self.r1_poly()
    }

    /// `(x₁−x₂)² s² − 2R s − R₁` in `(s, x1, x2)`.
    pub fn pencil_f(&self) -> MultiPoly {
        let s = MultiPoly::var("s", &SXV);
        let d = (&MultiPoly::var("x1", &SXV) - &MultiPoly::var("x2", &SXV)).pow(2);
        let r = self.r_poly().with_vars(&SXV).expect("lift");
        let r1 = self.r1_poly().with_vars(&SXV).expect("lift");
        &(&(&d * &s.pow(2)) - &(&r * &s).scale(&int(2))) - &r1
    }

    pub fn values(&self, x1: C64, x2: C64) -> EfgValues {
        let v = [x1, x2];
        let c = &self.compiled;
        EfgValues {
            e: c.e.eval(&v),
            f: c.f.eval(&v),
            g: c.g.eval(&v),
            e_x: [c.e_1.eval(&v), c.e_2.eval(&v)],
            f_x: [c.f_1.eval(&v), c.f_2.eval(&v)],
            g_x: [c.g_1.eval(&v), c.g_2.eval(&v)],
        }
    }

    /// `P(x)` of the family; meaningful when the combination depends on `x₁` only.
    pub fn p_at(&self, x: C64) -> C64 {
        self.compiled.p.eval(&[x, C64::zero()])
    }

    pub fn same_polys(&self, o: &EfgSpec) -> bool {
        self.e == o.e && self.f == o.f && self.g == o.g
    }
}

/// Outcome of the exact checks on a triple `(Ê, F̂, Ĝ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EfgStructureReport {
    pub p_depends_only_on_x1: bool,
    pub q_depends_only_on_x2: bool,
    pub symmetric: bool,
    pub pencil_separable: bool,
    /// `2P = P_pencil`; only meaningful for the `K = 1` pencil family.
    pub p_matches_pencil: Option<bool>,
    /// The pencil built from `R, R₁` equals the determinant pencil.
    pub f_matches_pencil: Option<bool>,
    /// `a₀ = −2`, the normalization under which the two `P` agree.
    pub normalized: Option<bool>,
}

impl EfgStructureReport {
    /// Everything that holds without normalization.
    pub fn core_passes(&self) -> bool {
        self.p_depends_only_on_x1
            && self.q_depends_only_on_x2
            && self.symmetric
            && self.pencil_separable
    }

    pub fn passes(&self) -> bool {
        self.core_passes()
            && self.p_matches_pencil != Some(false)
            && self.f_matches_pencil != Some(false)
    }
}

pub fn efg_structure_check(efg: &EfgSpec) -> Result<EfgStructureReport, DynError> {
    let p = efg.p_poly();
    let q = efg.q_poly();
    let symmetric = [&efg.e, &efg.f, &efg.g]
        .iter()
        .all(|m| m.is_symmetric_in("x1", "x2"));
    let sep = crate::discrimsep::check_separable(&efg.pencil_f(), Some(SXV))?;
    let (mut pm, mut fm, mut norm) = (None, None, None);
    if let EfgSource::General { spec, k } = &efg.source {
        if k.is_one() {
            let pp = crate::pencil::poly_p_in(spec, "x1").with_vars(&XV)?;
            pm = Some(p.scale(&int(2)) == pp);
            let pf = crate::pencil::pencil_f_darboux(spec).f.with_vars(&SXV)?;
            fm = Some(efg.pencil_f() == pf);
            norm = Some(*spec.a(0) == rat(-2, 1));
        }
    }
    Ok(EfgStructureReport {
        p_depends_only_on_x1: p.degree_in("x2") == 0,
        q_depends_only_on_x2: q.degree_in("x1") == 0,
        symmetric,
        pencil_separable: sep.verdict.is_separable(),
        p_matches_pencil: pm,
        f_matches_pencil: fm,
        normalized: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::sampling::{random_normalized_spec, random_spec, rng_for};

    #[test]
    fn structure_holds_for_random_specs() {
        for i in 0..20 {
            let spec = random_spec(&mut rng_for(5, 40, i));
            let r = efg_structure_check(&EfgSpec::kowalevski_type(&spec)).unwrap();
            assert!(r.core_passes(), "{spec}: {r:?}");
            assert_eq!(r.p_matches_pencil, Some(*spec.a(0) == rat(-2, 1)), "{spec}");
        }
    }

    #[test]
    fn normalized_specs_match_pencil() {
        for i in 0..10 {
            let spec = random_normalized_spec(&mut rng_for(5, 41, i));
            let r = efg_structure_check(&EfgSpec::kowalevski_type(&spec)).unwrap();
            assert!(r.passes(), "{spec}: {r:?}");
            assert_eq!(r.normalized, Some(true));
        }
    }

    #[test]
    fn kowalevski_p_has_expected_form() {
        let spec = PencilSpec::from_ints([-2, 0, 3, -2, 2, 0]);
        let p = EfgSpec::kowalevski_type(&spec)
            .p_poly()
            .with_vars(&["x1"])
            .unwrap();
        let want = MultiPoly::from_univariate(&[int(1), int(4), int(6), int(0), int(-1)], "x1");
        assert_eq!(p, want);
    }

    #[test]
    fn k0_and_perturbed_families() {
        let k0 = EfgSpec::k0();
        let r = efg_structure_check(&k0).unwrap();
        assert!(r.core_passes());
        assert_eq!(k0.p_poly(), MultiPoly::var("x1", &XV).scale(&int(2)));
        let pert = EfgSpec::perturbed(&int(0), &int(0), [int(0), int(1), int(0)]);
        assert!(pert.same_polys(&k0));
        let pert = EfgSpec::perturbed(&rat(3, 2), &int(-2), [int(1), rat(1, 3), int(2)]);
        assert!(efg_structure_check(&pert).unwrap().core_passes());
    }

    #[test]
    fn elastic_family_is_separable() {
        for tau in [-1, 0, 1] {
            let efg = EfgSpec::elastic(&int(tau), &rat(1, 2), &int(3), &rat(-2, 3));
            assert!(efg_structure_check(&efg).unwrap().core_passes());
        }
    }
}
