//! The Kötter trick, the Kowalevski change of variables, the Abel–Jacobi
//! differentials and the generalized Kötter transformation for pencils with
//! `a₀ = −2`.

use num_traits::{Signed, Zero};

use crate::algebra::{int, rat, to_c64, AlgebraError, MultiPoly, Rational};
use crate::dynamics::{DynError, EfgSpec, GenState, System};
use crate::numeric::{c, poly_roots, quadratic_roots, C64};
use crate::ode::OdeOptions;
use crate::pencil::{pencil_f_darboux, poly_j, poly_p, CurvePair, PencilError, PencilSpec};
use crate::twovalued::{p2_mul, relative_distance, PairVal, Weierstrass};

const KV: [&str; 3] = ["s", "x1", "x2"];
const KVU: [&str; 4] = ["s", "u", "x1", "x2"];

#[derive(Debug, thiserror::Error)]
pub enum KotterError {
    #[error("normalization required: a0 = -2")]
    NotNormalized,
    #[error("leading coefficient vanishes: x1 = x2")]
    Coincident,
    #[error("degenerate spectrum: f has a repeated root")]
    DegenerateSpectrum,
    #[error("A0 vanishes at the root m{0}")]
    ZeroA0(usize),
    #[error("sample too close to a branch point")]
    BranchPoint,
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Dyn(#[from] DynError),
}

fn var(n: &str) -> MultiPoly {
    MultiPoly::var(n, &KV)
}

fn cst(r: Rational) -> MultiPoly {
    MultiPoly::constant(r, &KV)
}

/// Polynomials of the generalized Kötter identity `F·A₀ = A² + f·B`, all in
/// the context `(s, x1, x2)`.
#[derive(Clone, Debug)]
pub struct KotterData {
    pub spec: PencilSpec,
    pub a0: MultiPoly,
    pub b0: MultiPoly,
    pub m0: MultiPoly,
    pub a: MultiPoly,
    pub b: MultiPoly,
    pub f: MultiPoly,
    pub f0: Rational,
    /// Coefficients of `f`, ascending.
    pub f_coeffs: [Rational; 4],
    /// The pencil polynomial `F`.
    pub pencil: MultiPoly,
}

impl KotterData {
    pub fn new(spec: &PencilSpec) -> Result<Self, KotterError> {
        let [a0, a1, a2, a3, a4, a5] = spec.coeffs();
        if *a0 != int(-2) {
            return Err(KotterError::NotNormalized);
        }
        let s = var("s");
        let (x1, x2) = (var("x1"), var("x2"));
        let a0p = &cst(a1 * a1 - a0 * a2) - &s.scale(a0);
        let b0p = (&cst(a0 * a3 - a5 * a1) + &s.scale(&(a1 * int(2)))).scale(&rat(1, 2));
        let m0p = &cst(a5 * a2 - a1 * a3) + &s.scale(&(a1 * a1 + a5));
        let sum = &x1 + &x2;
        let a = &(&(&a0p * &(&(&x1 * &x2) - &s)) + &(&b0p * &sum)) + &m0p;
        let b =
            &(&(&sum.pow(2) + &sum.scale(&(a1 * int(2)))) - &s.scale(&int(2))) - &cst(a2 * int(2));
        let f0 = a4 * a2 - a3 * a3 - a1 * a3 * a5 + (a4 * a1 * a1 + a2 * a5 * a5) / int(2);
        let f_coeffs = [
            f0.clone(),
            int(2) * (a1 * a3 - a5 * a2) + a4 + a5 * a5 / int(2),
            int(2) * (a2 - a5),
            int(2),
        ];
        let f = f_coeffs
            .iter()
            .enumerate()
            .fold(cst(int(0)), |acc, (k, co)| {
                &acc + &s.pow(k as u32).scale(co)
            });
        let pencil = pencil_f_darboux(spec).f.with_vars(&KV)?;
        Ok(KotterData {
            spec: spec.clone(),
            a0: a0p,
            b0: b0p,
            m0: m0p,
            a,
            b,
            f,
            f0,
            f_coeffs,
            pencil,
        })
    }

    fn at_s(p: &MultiPoly, s: C64) -> C64 {
        p.compile().eval(&[s, C64::zero(), C64::zero()])
    }

    pub fn a0_at(&self, s: C64) -> C64 {
        Self::at_s(&self.a0, s)
    }

    pub fn b0_at(&self, s: C64) -> C64 {
        Self::at_s(&self.b0, s)
    }

    pub fn f_at(&self, s: C64) -> C64 {
        self.f_coeffs
            .iter()
            .rev()
            .fold(C64::zero(), |acc, co| acc * s + to_c64(co))
    }

    /// Zeros `m₁, m₂, m₃` of `f`.
    pub fn f_roots(&self) -> Result<[C64; 3], KotterError> {
        let desc: Vec<C64> = self.f_coeffs.iter().rev().map(to_c64).collect();
        let r = poly_roots(&desc);
        let m = [r[0], r[1], r[2]];
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..3 {
            for j in 0..i {
                if (m[i] - m[j]).norm() < 1e-8 * scale {
                    return Err(KotterError::DegenerateSpectrum);
                }
            }
        }
        Ok(m)
    }

    /// `c₀ = a₁² + 2a₂`, so that `A₀(s) = 2s + c₀`.
    pub fn c0(&self) -> Rational {
        let a1 = self.spec.a(1);
        a1 * a1 + int(2) * self.spec.a(2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KotterIdentityReport {
    /// `F·A₀ − A² − f·B ≡ 0`.
    pub identity: bool,
    /// `f = −J/2`.
    pub f_is_minus_half_j: bool,
    /// `F(s) = F(u) + (s−u)F′(u) + (s−u)²(x₁−x₂)²`.
    pub taylor: bool,
    /// The printed `L(s₁−u)(s₂−u) = A(u)² + f(u)B(u)`, i.e. `F(u) = A² + fB`.
    pub root_relation_stated: bool,
    /// `L(s₁−u)(s₂−u)·A₀(u) = A(u)² + f(u)B(u)`.
    pub root_relation_with_a0: bool,
}

impl KotterIdentityReport {
    pub fn passes(&self) -> bool {
        self.identity && self.taylor && self.root_relation_with_a0
    }
}

pub fn kotter_identity(kd: &KotterData) -> Result<KotterIdentityReport, KotterError> {
    let lhs = &kd.pencil * &kd.a0;
    let rhs = &kd.a.pow(2) + &(&kd.f * &kd.b);
    let identity = (&lhs - &rhs).is_zero();
    let j = poly_j(&kd.spec).with_vars(&KV)?;
    let f_is_minus_half_j = (&kd.f + &j.scale(&rat(1, 2))).is_zero();

    let lift = |p: &MultiPoly| p.with_vars(&KVU);
    let u = MultiPoly::var("u", &KVU);
    let s = MultiPoly::var("s", &KVU);
    let f = lift(&kd.pencil)?;
    let at_u = |p: &MultiPoly| p.substitute("s", &u);
    let l = (&MultiPoly::var("x1", &KVU) - &MultiPoly::var("x2", &KVU)).pow(2);
    let su = &s - &u;
    let taylor_rhs = &(&at_u(&f) + &(&su * &at_u(&f.derivative("s")))) + &(&su.pow(2) * &l);
    let taylor = (&f - &taylor_rhs).is_zero();

    let ab_u = at_u(&lift(&rhs)?);
    let f_u = at_u(&f);
    let root_relation_stated = (&f_u - &ab_u).is_zero();
    let root_relation_with_a0 = (&(&f_u * &at_u(&lift(&kd.a0)?)) - &ab_u).is_zero();
    Ok(KotterIdentityReport {
        identity,
        f_is_minus_half_j,
        taylor,
        root_relation_stated,
        root_relation_with_a0,
    })
}

/// Roots of `(x₁−x₂)²s² − 2Rs − R₁` for the family `(Ê, F̂, Ĝ)`.
pub fn w_roots(efg: &EfgSpec, x1: C64, x2: C64) -> Result<[C64; 2], KotterError> {
    let d = x1 - x2;
    if d.norm() < 1e-12 * x1.norm().max(x2.norm()).max(1.0) {
        return Err(KotterError::Coincident);
    }
    let v = efg.values(x1, x2);
    let r = v.e * x1 * x2 + v.f * (x1 + x2) + v.g;
    let r1 = v.e * v.g - v.f * v.f;
    Ok(quadratic_roots(d * d, -2.0 * r, -r1))
}

#[derive(Clone, Copy, Debug)]
pub struct KotterTrick {
    /// Largest relative residual of the two `±` identities.
    pub residual: f64,
    /// Sign of the cross term `2√(e₁P(x₂))√(e₂P(x₁))` paired with `+`.
    pub cross_sign: i8,
    /// Whether `w₁, w₂` were swapped relative to the root order.
    pub swapped: bool,
    pub lhs: [C64; 2],
    pub rhs: [C64; 2],
}

/// `[√e₁√P(x₂)/(x₁−x₂) ± √e₂√P(x₁)/(x₁−x₂)]² = (w₁±k)(w₂∓k)` with `P`
/// the `x₁`-part of the family and `k = √(e₁e₂)`; branches are searched.
pub fn kotter_trick_check(efg: &EfgSpec, st: &GenState) -> Result<KotterTrick, KotterError> {
    let [w1, w2] = w_roots(efg, st.x1, st.x2)?;
    let d2 = (st.x1 - st.x2).powu(2);
    let (p1, p2) = (efg.p_at(st.x1), efg.p_at(st.x2));
    let base = (st.e1 * p2 + st.e2 * p1) / d2;
    let cross = 2.0 * (st.e1 * p2).sqrt() * (st.e2 * p1).sqrt() / d2;
    let k = (st.e1 * st.e2).sqrt();
    let mut best: Option<KotterTrick> = None;
    for cross_sign in [1i8, -1] {
        let cs = cross * f64::from(cross_sign);
        let lhs = [base + cs, base - cs];
        for swapped in [false, true] {
            let (a, b) = if swapped { (w2, w1) } else { (w1, w2) };
            let rhs = [(a + k) * (b - k), (a - k) * (b + k)];
            let residual = (0..2)
                .map(|i| (lhs[i] - rhs[i]).norm() / lhs[i].norm().max(rhs[i].norm()).max(1.0))
                .fold(0.0, f64::max);
            if best.as_ref().is_none_or(|b| residual < b.residual) {
                best = Some(KotterTrick {
                    residual,
                    cross_sign,
                    swapped,
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(best.expect("four candidates"))
}

#[derive(Clone, Copy, Debug)]
pub struct CommDiagram {
    /// `m₂(φ₁, φ₂) = [(φ₁+φ₂)², (φ₁−φ₂)²]`.
    pub left: PairVal,
    /// `f` applied to the coset product of `ψ̂⁻¹(x₁)`, `ψ̂⁻¹(x₂)`.
    pub right: PairVal,
    pub distance: f64,
    /// Distance between the coset-product `s`-values and `w_roots`.
    pub w_distance: f64,
}

/// Walks both paths of the diagram for one constrained state.
pub fn commdiagram_check(
    efg: &EfgSpec,
    cp: &CurvePair,
    st: &GenState,
) -> Result<CommDiagram, KotterError> {
    let d2 = (st.x1 - st.x2).powu(2);
    if d2.norm() < 1e-10 {
        return Err(KotterError::Coincident);
    }
    let (p1, p2) = (efg.p_at(st.x1), efg.p_at(st.x2));
    let scale = (st.x1.norm() + st.x2.norm() + 1.0).powi(4);
    if p1.norm() < 1e-8 * scale || p2.norm() < 1e-8 * scale {
        return Err(KotterError::BranchPoint);
    }
    let left = p2_mul(st.e1 * p2 / d2, st.e2 * p1 / d2).map(Some);

    let curve = Weierstrass::from_curve_pair(cp);
    let [u1, _] = curve.lift(cp.psi_inv(Some(st.x1)));
    let [u2, _] = curve.lift(cp.psi_inv(Some(st.x2)));
    let pair = curve.coset_mul(&u1, &u2);
    let [Some(s1), Some(s2)] = pair.map(|z| z.map(|z| cp.s_of_sigma(z))) else {
        return Err(KotterError::BranchPoint);
    };
    let k = (st.e1 * st.e2).sqrt();
    let right = [Some((s1 + k) * (s2 - k)), Some((s2 + k) * (s1 - k))];
    let w = w_roots(efg, st.x1, st.x2)?;
    Ok(CommDiagram {
        left,
        right,
        distance: relative_distance(&left, &right),
        w_distance: relative_distance(&[Some(s1), Some(s2)], &w.map(Some)),
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DiagramSummary {
    pub checked: usize,
    pub skipped: usize,
    pub max_distance: f64,
    pub max_w_distance: f64,
}

pub fn commdiagram_batch(efg: &EfgSpec, cp: &CurvePair, states: &[GenState]) -> DiagramSummary {
    let mut out = DiagramSummary::default();
    for st in states {
        match commdiagram_check(efg, cp, st) {
            Ok(r) => {
                out.checked += 1;
                out.max_distance = out.max_distance.max(r.distance);
                out.max_w_distance = out.max_w_distance.max(r.w_distance);
            }
            Err(e) => {
                log::debug!("diagram sample skipped: {e}");
                out.skipped += 1;
            }
        }
    }
    out
}

// The Pᵢ and the linear system for X, Y, Z

/// `P_i² = (s₁−mᵢ)(s₂−mᵢ)` in exact form: `F(mᵢ)·A₀(mᵢ) = A(mᵢ)²` for
/// rational zeros `mᵢ` of `f`, as polynomials in `x₁, x₂`.
pub fn p_i_exact_check(kd: &KotterData, m: &[Rational; 3]) -> Result<[bool; 3], KotterError> {
    let mut out = [false; 3];
    for (i, mi) in m.iter().enumerate() {
        let fm = kd.f.substitute_rational("s", mi);
        if !fm.is_zero() {
            return Err(KotterError::DegenerateSpectrum);
        }
        let a0 = kd.a0.substitute_rational("s", mi);
        if a0.is_zero() {
            return Err(KotterError::ZeroA0(i + 1));
        }
        let lhs = &kd.pencil.substitute_rational("s", mi) * &a0;
        out[i] = (&lhs - &kd.a.substitute_rational("s", mi).pow(2)).is_zero();
    }
    Ok(out)
}

fn is_square(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

/// A pencil with `a₀ = −2`, `a₁ = a₅ = 0` whose `f` has the prescribed
/// rational zeros, when `2e₃ − 2e₁e₂` is a rational square.
pub fn rational_root_spec(m: &[Rational; 3]) -> Option<PencilSpec> {
    let e1 = &m[0] + &m[1] + &m[2];
    let e2 = &m[0] * &m[1] + &m[1] * &m[2] + &m[2] * &m[0];
    let e3 = &m[0] * &m[1] * &m[2];
    let a3 = is_square(&(int(2) * &e3 - int(2) * &e1 * &e2))?;
    if m.contains(&e1) || m[0] == m[1] || m[1] == m[2] || m[0] == m[2] {
        return None;
    }
    Some(PencilSpec::new([
        int(-2),
        int(0),
        -e1,
        a3,
        int(2) * e2,
        int(0),
    ]))
}

/// Integer triples in `[-lim, lim]` admitting [`rational_root_spec`].
pub fn rational_root_specs(lim: i64) -> Vec<([Rational; 3], PencilSpec)> {
    let mut out = Vec::new();
    for a in -lim..=lim {
        for b in (a + 1)..=lim {
            for cc in (b + 1)..=lim {
                let m = [int(a), int(b), int(cc)];
                if let Some(spec) = rational_root_spec(&m) {
                    out.push((m, spec));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct PiXyzReport {
    pub m: [C64; 3],
    /// `√((s₁−mᵢ)(s₂−mᵢ))`, principal branch.
    pub p_direct: [C64; 3],
    /// Printed closed form of `Pᵢ`, best sign per `i`, relative residual.
    pub p_printed_residual: f64,
    /// `A(mᵢ)/(√A₀(mᵢ)(x₁−x₂))`, best sign per `i`.
    pub p_corrected_residual: f64,
    /// Signs `εᵢ` with `εᵢ p_direct[i]` matching the corrected closed form.
    pub signs: [i8; 3],
    pub xyz_printed: [C64; 3],
    pub xyz_corrected: [C64; 3],
    /// Printed system `X − nᵢY + Z/(2nᵢ) = Pᵢ/√nᵢ`, `nᵢ = mᵢ + a₁² + 2a₂`,
    /// minimised over the `2³` sign choices of `Pᵢ`.
    pub system_printed_residual: f64,
    /// `X − (nᵢ/2)Y + Z/nᵢ = Pᵢ/√nᵢ` with `nᵢ = A₀(mᵢ)`.
    pub system_corrected_residual: f64,
    /// Printed solution formulas for `Y, Z` against the printed definitions.
    pub closed_printed_residual: f64,
    /// Lagrange solution for `X, Y, Z` against the corrected definitions.
    pub closed_corrected_residual: f64,
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn sign_patterns() -> impl Iterator<Item = [f64; 3]> {
    (0..8).map(|b| std::array::from_fn(|i| if b >> i & 1 == 1 { -1.0 } else { 1.0 }))
}

/// `Pᵢ`, `X`, `Y`, `Z` at a point `(x₁, x₂)`, printed and corrected.
pub fn p_i_and_xyz(kd: &KotterData, x1: C64, x2: C64) -> Result<PiXyzReport, KotterError> {
    let d = x1 - x2;
    if d.norm() < 1e-10 {
        return Err(KotterError::Coincident);
    }
    let spec = &kd.spec;
    let a = |i: usize| to_c64(spec.a(i));
    let (a1, a2, a3, a5) = (a(1), a(2), a(3), a(5));
    let m = kd.f_roots()?;
    let c0 = to_c64(&kd.c0());
    let n_corr = m.map(|mi| kd.a0_at(mi));
    if let Some(i) = n_corr.iter().position(|n| n.norm() < 1e-12) {
        return Err(KotterError::ZeroA0(i + 1));
    }
    let n_print = m.map(|mi| mi + c0);
    let efg = EfgSpec::kowalevski_type(spec);
    let [s1, s2] = w_roots(&efg, x1, x2)?;
    let p_direct = m.map(|mi| ((s1 - mi) * (s2 - mi)).sqrt());

    let sum = x1 + x2;
    let ax = kd.a.compile();
    let p_corr =
        std::array::from_fn::<C64, 3, _>(|i| ax.eval(&[m[i], x1, x2]) / (n_corr[i].sqrt() * d));
    let p_print = std::array::from_fn::<C64, 3, _>(|i| {
        let sa = kd.a0_at(m[i]).sqrt();
        (sa * x1 * x2 + kd.b0_at(m[i]) / sa + m[i] * (m[i] - a5 - 2.0 * a2) - 2.0 * a5 - a1 * a3)
            / d
    });
    let best_sign = |target: &[C64; 3]| {
        let mut res: f64 = 0.0;
        let mut signs = [1i8; 3];
        for i in 0..3 {
            let (rp, rm) = (rel(target[i], p_direct[i]), rel(target[i], -p_direct[i]));
            res = res.max(rp.min(rm));
            signs[i] = if rp <= rm { 1 } else { -1 };
        }
        (res, signs)
    };
    let (p_printed_residual, _) = best_sign(&p_print);
    let (p_corrected_residual, signs) = best_sign(&p_corr);

    let xyz_printed = [
        (x1 * x2 + (2.0 * a1 * a1 + a5 + 2.0 * a2) + a1 / 2.0 * (x1 - x2)) / d,
        1.0 / d,
        ((a1.powu(3) + 2.0 * a2 * a1 + 2.0 * a5 * a1 + 2.0 * a3) * sum
            - 2.0 * (a1 * a1 + 2.0 * a2) * (a1 * a1 + a5))
            / d,
    ];
    let xyz_corrected = [
        (x1 * x2 + (2.0 * a1 * a1 + a5 + 2.0 * a2) / 2.0 + a1 * sum / 2.0) / d,
        1.0 / d,
        (-(a1.powu(3) + 2.0 * a1 * a2 + a1 * a5 + 2.0 * a3) / 2.0 * sum + a5 * a2
            - a1 * a3
            - (a1 * a1 + a5) * c0 / 2.0)
            / d,
    ];

    let system_res = |xyz: &[C64; 3], n: &[C64; 3], lhs: &dyn Fn(&[C64; 3], C64) -> C64| {
        sign_patterns()
            .map(|eps| {
                (0..3)
                    .map(|i| rel(lhs(xyz, n[i]), eps[i] * p_direct[i] / n[i].sqrt()))
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let printed_lhs = |v: &[C64; 3], n: C64| v[0] - n * v[1] + v[2] / (2.0 * n);
    let corrected_lhs = |v: &[C64; 3], n: C64| v[0] - n / 2.0 * v[1] + v[2] / n;
    let system_printed_residual = system_res(&xyz_printed, &n_print, &printed_lhs);
    let system_corrected_residual = system_res(&xyz_corrected, &n_corr, &corrected_lhs);

    // Printed solution formulas with f̂(x) = f(x − a₁² − 2a₂), so f̂′(nᵢ) = f′(mᵢ).
    let fprime = |s: C64| {
        let co: Vec<C64> = kd.f_coeffs.iter().map(to_c64).collect();
        co[1] + 2.0 * co[2] * s + 3.0 * co[3] * s * s
    };
    let closed_printed_residual = sign_patterns()
        .map(|eps| {
            let p: [C64; 3] = std::array::from_fn(|i| eps[i] * p_direct[i]);
            let y: C64 = -(0..3)
                .map(|i| p[i] * n_print[i].sqrt() / fprime(m[i]))
                .sum::<C64>();
            let z: C64 = 2.0
                * n_print.iter().product::<C64>()
                * (0..3)
                    .map(|i| p[i] / (n_print[i].sqrt() * fprime(m[i])))
                    .sum::<C64>();
            rel(y, xyz_printed[1]).max(rel(z, xyz_printed[2]))
        })
        .fold(f64::INFINITY, f64::min);

    let gprime = |i: usize| {
        (0..3)
            .filter(|&j| j != i)
            .map(|j| n_corr[i] - n_corr[j])
            .product::<C64>()
    };
    let p: [C64; 3] = std::array::from_fn(|i| f64::from(signs[i]) * p_direct[i]);
    let x: C64 = -(0..3)
        .map(|i| {
            let others: C64 = (0..3).filter(|&j| j != i).map(|j| n_corr[j]).sum();
            p[i] * n_corr[i].sqrt() * others / gprime(i)
        })
        .sum::<C64>();
    let y: C64 = -2.0
        * (0..3)
            .map(|i| p[i] * n_corr[i].sqrt() / gprime(i))
            .sum::<C64>();
    let z: C64 = n_corr.iter().product::<C64>()
        * (0..3)
            .map(|i| p[i] / (n_corr[i].sqrt() * gprime(i)))
            .sum::<C64>();
    let closed_corrected_residual = rel(x, xyz_corrected[0])
        .max(rel(y, xyz_corrected[1]))
        .max(rel(z, xyz_corrected[2]));

    Ok(PiXyzReport {
        m,
        p_direct,
        p_printed_residual,
        p_corrected_residual,
        signs,
        xyz_printed,
        xyz_corrected,
        system_printed_residual,
        system_corrected_residual,
        closed_printed_residual,
        closed_corrected_residual,
    })
}

// Abel–Jacobi differentials

/// `Φ(w) = J(w)(w−k)(w+k)` in the context `(w, k)`; with `corrected` the
/// factor `J` is replaced by `f = −J/2`.
pub fn abel_jacobi_phi(spec: &PencilSpec, corrected: bool) -> MultiPoly {
    let vars = ["w", "k"];
    let mut j = poly_j(spec)
        .rename("s", "w")
        .with_vars(&vars)
        .expect("univariate in s");
    if corrected {
        j = j.scale(&rat(-1, 2));
    }
    let w = MultiPoly::var("w", &vars);
    let k = MultiPoly::var("k", &vars);
    &j * &(&(&w - &k) * &(&w + &k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KowLine {
    /// `dx₁/√P(x₁) ± dx₂/√P(x₂) = dwᵢ/√J(wᵢ)` as printed.
    ChangePrinted,
    /// The same with `f = −J/2` in place of `J`.
    ChangeCorrected,
    /// `Σ dwᵢ/√Φ(wᵢ) = 0` with `Φ = J(w²−k²)`.
    FirstPrinted,
    /// `Σ wᵢdwᵢ/√Φ(wᵢ) = 2β dt` with `Φ = J(w²−k²)`.
    SecondPrinted,
    FirstCorrected,
    SecondCorrected,
}

impl KowLine {
    pub const ALL: [KowLine; 6] = [
        KowLine::ChangePrinted,
        KowLine::ChangeCorrected,
        KowLine::FirstPrinted,
        KowLine::SecondPrinted,
        KowLine::FirstCorrected,
        KowLine::SecondCorrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KowLine::ChangePrinted => "change_printed",
            KowLine::ChangeCorrected => "change_corrected",
            KowLine::FirstPrinted => "abel_first_printed",
            KowLine::SecondPrinted => "abel_second_printed",
            KowLine::FirstCorrected => "abel_first_corrected",
            KowLine::SecondCorrected => "abel_second_corrected",
        }
    }

    pub fn is_printed(self) -> bool {
        matches!(
            self,
            KowLine::ChangePrinted | KowLine::FirstPrinted | KowLine::SecondPrinted
        )
    }
}

#[derive(Clone, Debug)]
pub struct LineSeries {
    pub line: KowLine,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log residual` against `log h`.
    pub order: f64,
    /// Branch signs chosen at the smallest step.
    pub branch: [i8; 3],
    pub converges: bool,
}

#[derive(Clone, Debug)]
pub struct KowChangeReport {
    pub t_star: f64,
    pub hs: Vec<f64>,
    pub lines: Vec<LineSeries>,
    /// Smallest distance from a branch point (`w₁ = w₂`, `Φ(wᵢ) = 0`,
    /// `P(xᵢ) = 0`) seen on the stencil, relative.
    pub branch_clearance: f64,
}

impl KowChangeReport {
    pub fn line(&self, l: KowLine) -> &LineSeries {
        self.lines
            .iter()
            .find(|s| s.line == l)
            .expect("all lines reported")
    }

    /// All printed lines converge at second order.
    pub fn printed_passes(&self) -> bool {
        self.lines
            .iter()
            .filter(|s| s.line.is_printed())
            .all(|s| s.converges)
    }

    pub fn corrected_passes(&self) -> bool {
        self.lines
            .iter()
            .filter(|s| !s.line.is_printed())
            .all(|s| s.converges)
    }
}

fn slope(hs: &[f64], res: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = res.iter().map(|r| r.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn match_pair(reference: [C64; 2], w: [C64; 2]) -> [C64; 2] {
    let direct = (w[0] - reference[0]).norm() + (w[1] - reference[1]).norm();
    let swapped = (w[1] - reference[0]).norm() + (w[0] - reference[1]).norm();
    if swapped < direct {
        [w[1], w[0]]
    } else {
        w
    }
}

struct Stencil {
    x: [C64; 2],
    dx: [C64; 2],
    w: [C64; 2],
    dw: [C64; 2],
    k2: C64,
    beta: C64,
}

/// Residual of one line at one stencil, minimised over square-root branches.
fn line_residual(
    line: KowLine,
    st: &Stencil,
    pe: &dyn Fn(C64) -> C64,
    j: &dyn Fn(C64) -> C64,
    f: &dyn Fn(C64) -> C64,
) -> (f64, [i8; 3]) {
    let pm = [1.0, -1.0];
    let sgn = |v: f64| if v > 0.0 { 1i8 } else { -1 };
    match line {
        KowLine::ChangePrinted | KowLine::ChangeCorrected => {
            let q: &dyn Fn(C64) -> C64 = if line == KowLine::ChangePrinted { j } else { f };
            let a = st.dx[0] / pe(st.x[0]).sqrt();
            let b = st.dx[1] / pe(st.x[1]).sqrt();
            let cw = [st.dw[0] / q(st.w[0]).sqrt(), st.dw[1] / q(st.w[1]).sqrt()];
            let scale = [a, b, cw[0], cw[1]]
                .iter()
                .map(|z| z.norm())
                .fold(f64::MIN_POSITIVE, f64::max);
            let mut best = (f64::INFINITY, [1i8; 3]);
            for sb in pm {
                for swap in [false, true] {
                    let (c1, c2) = if swap { (cw[1], cw[0]) } else { (cw[0], cw[1]) };
                    let l1 = a + sb * b;
                    let l2 = a - sb * b;
                    let r1 = (l1 - c1).norm().min((l1 + c1).norm());
                    let r2 = (l2 - c2).norm().min((l2 + c2).norm());
                    let r = r1.max(r2) / scale;
                    if r < best.0 {
                        best = (r, [sgn(sb), if swap { -1 } else { 1 }, 1]);
                    }
                }
            }
            best
        }
        _ => {
            let printed = matches!(line, KowLine::FirstPrinted | KowLine::SecondPrinted);
            let phi = |w: C64| (if printed { j(w) } else { f(w) }) * (w * w - st.k2);
            let p = [
                st.dw[0] / phi(st.w[0]).sqrt(),
                st.dw[1] / phi(st.w[1]).sqrt(),
            ];
            let first = |s: f64| {
                (p[0] + s * p[1]).norm() / p[0].norm().max(p[1].norm()).max(f64::MIN_POSITIVE)
            };
            let rel_sign = if first(1.0) <= first(-1.0) { 1.0 } else { -1.0 };
            if matches!(line, KowLine::FirstPrinted | KowLine::FirstCorrected) {
                return (first(rel_sign), [sgn(rel_sign), 1, 1]);
            }
            let q = st.w[0] * p[0] + rel_sign * st.w[1] * p[1];
            let target = 2.0 * st.beta;
            let scale = q.norm().max(target.norm()).max(f64::MIN_POSITIVE);
            let (rp, rm) = ((q - target).norm() / scale, (q + target).norm() / scale);
            (
                rp.min(rm),
                [sgn(rel_sign), if rp <= rm { 1 } else { -1 }, 1],
            )
        }
    }
}

/// Central-difference residuals of the change of variables and of the
/// Abel–Jacobi lines around `t*` along the flow of `sys` from `st0`.
pub fn kow_change_check(
    sys: &System,
    spec: &PencilSpec,
    st0: &GenState,
    t_star: f64,
    hs: &[f64],
    opts: &OdeOptions,
) -> Result<KowChangeReport, KotterError> {
    let kd = KotterData::new(spec)?;
    let jc = poly_j(spec).compile();
    let j = |s: C64| jc.eval(&[s]);
    let f = |s: C64| kd.f_at(s);
    let pe = |x: C64| sys.efg.p_at(x);

    let mut times = vec![0.0, t_star];
    for h in hs {
        times.push(t_star - h);
        times.push(t_star + h);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    times.dedup();
    let traj = sys.integrate(st0, &times, opts)?;
    let at = |t: f64| {
        let i = times.iter().position(|&s| s == t).expect("output time");
        traj.states[i]
    };
    let centre = at(t_star);
    let w0 = w_roots(&sys.efg, centre.x1, centre.x2)?;
    let (_, beta) = sys.ab.eval(&centre);
    let k2 = centre.e1 * centre.e2;

    let wscale = w0[0].norm().max(w0[1].norm()).max(1.0);
    let mut clearance = (w0[0] - w0[1]).norm() / wscale;
    for w in w0 {
        clearance = clearance.min((f(w) * (w * w - k2)).norm() / wscale.powi(5));
        clearance = clearance.min(j(w).norm() / wscale.powi(3));
    }
    for x in [centre.x1, centre.x2] {
        clearance = clearance.min(pe(x).norm() / (x.norm() + 1.0).powi(4));
    }

    let mut per_line: Vec<(Vec<f64>, [i8; 3])> = vec![(Vec::new(), [1; 3]); KowLine::ALL.len()];
    for &h in hs {
        let (a, b) = (at(t_star - h), at(t_star + h));
        let wa = match_pair(w0, w_roots(&sys.efg, a.x1, a.x2)?);
        let wb = match_pair(w0, w_roots(&sys.efg, b.x1, b.x2)?);
        let stencil = Stencil {
            x: [centre.x1, centre.x2],
            dx: [(b.x1 - a.x1) / (2.0 * h), (b.x2 - a.x2) / (2.0 * h)],
            w: w0,
            dw: [(wb[0] - wa[0]) / (2.0 * h), (wb[1] - wa[1]) / (2.0 * h)],
            k2,
            beta,
        };
        for (i, line) in KowLine::ALL.iter().enumerate() {
            let (r, br) = line_residual(*line, &stencil, &pe, &j, &f);
            per_line[i].0.push(r);
            per_line[i].1 = br;
        }
    }
    let lines = KowLine::ALL
        .iter()
        .zip(per_line)
        .map(|(&line, (residuals, branch))| {
            let order = slope(hs, &residuals);
            let tiny = residuals.iter().all(|r| *r < 1e-12);
            let converges = tiny || (1.8..=2.2).contains(&order);
            LineSeries {
                line,
                residuals,
                order,
                branch,
                converges,
            }
        })
        .collect();
    Ok(KowChangeReport {
        t_star,
        hs: hs.to_vec(),
        lines,
        branch_clearance: clearance,
    })
}

/// Constrained starting state for the Kowalevski flow of a normalized spec,
/// with every branch quantity bounded away from zero.
pub fn kowalevski_flow_start(sys: &System, rng: &mut impl rand::Rng) -> GenState {
    loop {
        let st = sys.random_constrained_state(rng);
        let ok = w_roots(&sys.efg, st.x1, st.x2)
            .map(|w| (w[0] - w[1]).norm() > 0.2 && st.e1.norm() > 0.1 && st.e2.norm() > 0.1)
            .unwrap_or(false);
        if ok {
            return st;
        }
    }
}

/// Pencil `P` at a point, for reports.
pub fn pencil_p_at(spec: &PencilSpec, x: C64) -> C64 {
    poly_p(spec).compile().eval(&[x])
}

/// A fixed sample point for reports that need one.
pub fn sample_point() -> (C64, C64) {
    (c(0.37, 0.21), c(-0.52, 0.44))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::AlphaBeta;
    use crate::pencil::curve_pair;
    use crate::sampling::{complex, random_normalized_spec, rng_for};

    fn kowalevski_system(spec: &PencilSpec) -> System {
        System::new(
            EfgSpec::kowalevski_type(spec),
            c(1.0, 0.0),
            AlphaBeta::kowalevski(),
        )
        .unwrap()
    }

    #[test]
    fn printed_examples() {
        let spec = PencilSpec::from_ints([-2, 0, 3, -2, 2, 0]);
        let kd = KotterData::new(&spec).unwrap();
        let s = MultiPoly::var("s", &KV);
        assert_eq!(kd.a0, &cst(int(6)) + &s.scale(&int(2)));
        let f = [2, 2, 6, 2]
            .iter()
            .enumerate()
            .fold(cst(int(0)), |acc, (k, co)| {
                &acc + &s.pow(k as u32).scale(&int(*co))
            });
        assert_eq!(kd.f, f);
        assert!(matches!(
            KotterData::new(&PencilSpec::from_ints([1, 0, 0, 0, 0, 0])),
            Err(KotterError::NotNormalized)
        ));
    }

    #[test]
    fn identity_holds_and_root_relation_needs_a0() {
        for i in 0..20 {
            let spec = random_normalized_spec(&mut rng_for(60, 0, i));
            let kd = KotterData::new(&spec).unwrap();
            let rep = kotter_identity(&kd).unwrap();
            assert!(rep.passes() && rep.f_is_minus_half_j, "{spec}: {rep:?}");
            assert!(!rep.root_relation_stated);
        }
    }

    #[test]
    fn efg_pencil_equals_determinant_pencil_when_normalized() {
        let spec = random_normalized_spec(&mut rng_for(61, 0, 0));
        let kd = KotterData::new(&spec).unwrap();
        assert_eq!(EfgSpec::kowalevski_type(&spec).pencil_f(), kd.pencil);
    }

    #[test]
    fn w_roots_vieta_and_discriminant() {
        let spec = random_normalized_spec(&mut rng_for(62, 0, 0));
        let efg = EfgSpec::kowalevski_type(&spec);
        let kd = KotterData::new(&spec).unwrap();
        let fc = kd.pencil.compile();
        for i in 0..20 {
            let mut rng = rng_for(62, 1, i);
            let (x1, x2) = (complex(&mut rng, 1.0), complex(&mut rng, 1.0));
            let w = w_roots(&efg, x1, x2).unwrap();
            let d4 = (x1 - x2).powu(4);
            let pp = 4.0 * efg.p_at(x1) * efg.p_at(x2);
            assert!(rel((w[0] - w[1]).powu(2) * d4, pp) < 1e-10);
            assert!(
                rel(
                    (w[0] - w[1]).powu(2) * d4,
                    pencil_p_at(&spec, x1) * pencil_p_at(&spec, x2)
                ) < 1e-10
            );
            for wi in w {
                assert!(fc.eval(&[wi, x1, x2]).norm() < 1e-10 * (wi.norm() + 1.0).powi(2) * 10.0);
            }
        }
        assert!(matches!(
            w_roots(&efg, c(0.5, 0.0), c(0.5, 0.0)),
            Err(KotterError::Coincident)
        ));
    }

    #[test]
    fn kotter_trick_on_constrained_states_and_trajectory() {
        let spec = random_normalized_spec(&mut rng_for(63, 0, 0));
        let sys = kowalevski_system(&spec);
        for i in 0..30 {
            let st = sys.random_constrained_state(&mut rng_for(63, 1, i));
            let tr = kotter_trick_check(&sys.efg, &st).unwrap();
            assert!(tr.residual < 1e-9, "{tr:?}");
        }
        let st0 = kowalevski_flow_start(&sys, &mut rng_for(63, 2, 0));
        let traj = sys
            .integrate_to(
                &st0,
                0.5,
                20,
                &OdeOptions {
                    rtol: 1e-11,
                    atol: 1e-13,
                    ..Default::default()
                },
            )
            .unwrap();
        for st in &traj.states {
            assert!(kotter_trick_check(&sys.efg, st).unwrap().residual < 1e-8);
        }
    }

    #[test]
    fn kotter_trick_symmetric_case() {
        let spec = random_normalized_spec(&mut rng_for(64, 0, 0));
        let sys = kowalevski_system(&spec);
        let st = (0..)
            .find_map(|i| {
                let mut rng = rng_for(64, 1, i);
                sys.constrained_state_k2(
                    complex(&mut rng, 1.0),
                    complex(&mut rng, 1.0),
                    c(0.0, 0.0),
                    0,
                )
            })
            .unwrap_or_else(|| sys.random_constrained_state(&mut rng_for(64, 2, 0)));
        assert!(kotter_trick_check(&sys.efg, &st).unwrap().residual < 1e-9);
    }

    #[test]
    fn commutative_diagram() {
        let mut found = 0;
        for s in 0.. {
            let spec = random_normalized_spec(&mut rng_for(65, 0, s));
            let Ok(cp) = curve_pair(&spec) else { continue };
            let sys = kowalevski_system(&spec);
            let states: Vec<GenState> = (0..10)
                .map(|i| sys.random_constrained_state(&mut rng_for(65, 1 + s, i)))
                .collect();
            let sum = commdiagram_batch(&sys.efg, &cp, &states);
            assert!(sum.checked >= 8, "{sum:?}");
            assert!(
                sum.max_distance < 1e-8 && sum.max_w_distance < 1e-8,
                "{spec}: {sum:?}"
            );
            // k = 0 collapses f to a repeated value.
            let st = sys
                .constrained_state(c(0.3, 0.1), c(-0.4, 0.2), c(0.0, 0.0))
                .unwrap();
            let r = commdiagram_check(&sys.efg, &cp, &st).unwrap();
            assert!(r.distance < 1e-8 && relative_distance(&[r.right[0]], &[r.right[1]]) < 1e-12);
            found += 1;
            if found == 3 {
                break;
            }
        }
    }

    #[test]
    fn rational_roots_give_exact_p_i() {
        let specs = rational_root_specs(5);
        assert!(!specs.is_empty());
        for (m, spec) in specs.iter().take(5) {
            let kd = KotterData::new(spec).unwrap();
            assert_eq!(p_i_exact_check(&kd, m).unwrap(), [true; 3], "{spec}");
        }
    }

    #[test]
    fn p_i_printed_and_corrected() {
        for i in 0..10 {
            let spec = random_normalized_spec(&mut rng_for(66, 0, i));
            let kd = KotterData::new(&spec).unwrap();
            let mut rng = rng_for(66, 1, i);
            let Ok(rep) = p_i_and_xyz(&kd, complex(&mut rng, 1.0), complex(&mut rng, 1.0)) else {
                continue;
            };
            assert!(rep.p_corrected_residual < 1e-9, "{rep:?}");
            assert!(rep.system_corrected_residual < 1e-9, "{rep:?}");
            assert!(rep.closed_corrected_residual < 1e-9, "{rep:?}");
            assert!(rep.p_printed_residual > 1e-6, "{rep:?}");
            assert!(rep.system_printed_residual > 1e-6, "{rep:?}");
        }
    }

    #[test]
    fn phi_has_degree_five() {
        let spec = PencilSpec::from_ints([-2, 0, 3, -2, 2, 0]);
        for corrected in [false, true] {
            assert_eq!(abel_jacobi_phi(&spec, corrected).degree_in("w"), 5);
        }
    }

    #[test]
    fn change_of_variables_orders() {
        let spec = random_normalized_spec(&mut rng_for(67, 0, 0));
        let sys = kowalevski_system(&spec);
        let st0 = kowalevski_flow_start(&sys, &mut rng_for(67, 1, 0));
        let opts = OdeOptions {
            rtol: 1e-13,
            atol: 1e-15,
            ..Default::default()
        };
        let rep =
            kow_change_check(&sys, &spec, &st0, 0.5, &[0.04, 0.02, 0.01, 0.005], &opts).unwrap();
        for l in [
            KowLine::ChangeCorrected,
            KowLine::FirstCorrected,
            KowLine::SecondCorrected,
            KowLine::FirstPrinted,
        ] {
            let s = rep.line(l);
            assert!(s.converges, "{s:?}");
        }
        for l in [KowLine::ChangePrinted, KowLine::SecondPrinted] {
            let s = rep.line(l);
            assert!(
                !s.converges && s.residuals.iter().all(|r| *r > 1e-3),
                "{s:?}"
            );
        }
    }
}
