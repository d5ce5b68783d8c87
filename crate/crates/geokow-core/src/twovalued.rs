//! Two-valued groups: the p₂ group, the coset group of a Weierstrass cubic
//! modulo negation, its realization by the pencil equation, and the Poncelet
//! triangle closure.

use rand::Rng;

use crate::algebra::{CompiledPoly, MultiPoly, Rational};
use crate::numeric::{c, multiset_distance, quadratic_roots, C64};
use crate::pencil::{pencil_f_darboux, poly_p, CurvePair, PencilSpec};
use crate::sampling::complex;

/// Unordered pair; `None` is ∞.
pub type PairVal = [Option<C64>; 2];
/// Unordered quadruple; `None` is ∞.
pub type QuadVal = [Option<C64>; 4];

fn mag(vals: &[Option<C64>]) -> f64 {
    vals.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max)
}

/// Multiset distance under optimal matching, relative to the larger magnitude.
pub fn relative_distance(a: &[Option<C64>], b: &[Option<C64>]) -> f64 {
    multiset_distance(a, b) / mag(a).max(mag(b))
}

// p₂ group

/// `x *₂ y = [(√x+√y)², (√x−√y)²]`.
pub fn p2_mul(x: C64, y: C64) -> [C64; 2] {
    let (a, b) = (x.sqrt(), y.sqrt());
    [(a + b).powu(2), (a - b).powu(2)]
}

/// The two 4-multisets `x *₂ (y *₂ z)` and `(x *₂ y) *₂ z`.
pub fn p2_assoc(x: C64, y: C64, z: C64) -> ([C64; 4], [C64; 4]) {
    let [u1, u2] = p2_mul(y, z);
    let [a, b] = p2_mul(x, u1);
    let [cc, d] = p2_mul(x, u2);
    let [v1, v2] = p2_mul(x, y);
    let [e, f] = p2_mul(v1, z);
    let [g, h] = p2_mul(v2, z);
    ([a, b, cc, d], [e, f, g, h])
}

fn quartic_of_products(x: &MultiPoly, e1: &MultiPoly, e2: &MultiPoly, w: &MultiPoly) -> MultiPoly {
    // ∏ⱼ (ζⱼ² + Bζⱼ + C) over the roots of ζ² − e₁ζ + e₂, with
    // q(ζ) = p₂(w, x, ζ) = ζ² − 2(w+x)ζ + (w−x)².
    let b = (w + x).scale(&Rational::from_integer((-2).into()));
    let cc = (w - x).pow(2);
    let power_sum2 = &e1.pow(2) - &e2.scale(&Rational::from_integer(2.into()));
    let terms = [
        e2.pow(2),
        &(&b * e1) * e2,
        &cc * &power_sum2,
        &b.pow(2) * e2,
        &(&b * &cc) * e1,
        cc.pow(2),
    ];
    terms.iter().fold(MultiPoly::zero(&[]), |acc, t| &acc + t)
}

/// Exact quartics in `w` whose roots are the two associativity multisets,
/// in the context `(w, x, y, z)`.
pub fn p2_assoc_polys() -> (MultiPoly, MultiPoly) {
    let vars = ["w", "x", "y", "z"];
    let v = |n: &str| MultiPoly::var(n, &vars);
    let two = Rational::from_integer(2.into());
    let (w, x, y, z) = (v("w"), v("x"), v("y"), v("z"));
    // x *₂ (y *₂ z): intermediate roots have e₁ = 2(y+z), e₂ = (y−z)².
    let lhs = quartic_of_products(&x, &(&y + &z).scale(&two), &(&y - &z).pow(2), &w);
    // (x *₂ y) *₂ z: the same with the outer factor z.
    let rhs = quartic_of_products(&z, &(&x + &y).scale(&two), &(&x - &y).pow(2), &w);
    (lhs, rhs)
}

// Weierstrass cubic and its coset group

/// A point of `t² = 4s³ − g₂s − g₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WPoint {
    Inf,
    Fin { s: C64, t: C64 },
}

impl WPoint {
    pub fn s(&self) -> Option<C64> {
        match self {
            WPoint::Inf => None,
            WPoint::Fin { s, .. } => Some(*s),
        }
    }

    pub fn neg(&self) -> WPoint {
        match *self {
            WPoint::Inf => WPoint::Inf,
            WPoint::Fin { s, t } => WPoint::Fin { s, t: -t },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weierstrass {
    pub g2: C64,
    pub g3: C64,
}

impl Weierstrass {
    pub fn new(g2: C64, g3: C64) -> Self {
        Weierstrass { g2, g3 }
    }

    pub fn from_curve_pair(cp: &CurvePair) -> Self {
        Weierstrass::new(c(cp.g2_f64(), 0.0), c(cp.g3_f64(), 0.0))
    }

    pub fn rhs(&self, s: C64) -> C64 {
        4.0 * s * s * s - self.g2 * s - self.g3
    }

    /// `|t² − (4s³ − g₂s − g₃)|` relative to the size of the terms.
    pub fn residual(&self, p: &WPoint) -> f64 {
        match *p {
            WPoint::Inf => 0.0,
            WPoint::Fin { s, t } => {
                let scale = (4.0 * s.norm().powi(3)).max(t.norm_sqr()).max(1.0);
                (t * t - self.rhs(s)).norm() / scale
            }
        }
    }

    /// Both points over `s`; they coincide at branch points.
    pub fn lift(&self, s: Option<C64>) -> [WPoint; 2] {
        match s {
            None => [WPoint::Inf, WPoint::Inf],
            Some(s) => {
                let t = self.rhs(s).sqrt();
                [WPoint::Fin { s, t }, WPoint::Fin { s, t: -t }]
            }
        }
    }

    pub fn random_point(&self, rng: &mut impl Rng, scale: f64) -> WPoint {
        let s = complex(rng, scale);
        let t = self.rhs(s).sqrt();
        WPoint::Fin {
            s,
            t: if rng.gen::<bool>() { t } else { -t },
        }
    }

    /// Chord-tangent addition with `∞` as the neutral element.
    pub fn add(&self, p: &WPoint, q: &WPoint) -> WPoint {
        let (s1, t1, s2, t2) = match (*p, *q) {
            (WPoint::Inf, _) => return *q,
            (_, WPoint::Inf) => return *p,
            (WPoint::Fin { s: s1, t: t1 }, WPoint::Fin { s: s2, t: t2 }) => (s1, t1, s2, t2),
        };
        let scale = s1.norm().max(s2.norm()).max(1.0);
        let tscale = t1.norm().max(t2.norm()).max(1.0);
        let lambda = if (s1 - s2).norm() <= 1e-12 * scale {
            if (t1 + t2).norm() <= 1e-12 * tscale {
                return WPoint::Inf;
            }
            (12.0 * s1 * s1 - self.g2) / (2.0 * t1)
        } else {
            (t2 - t1) / (s2 - s1)
        };
        // With t = 2y the curve is y² = s³ − (g₂/4)s − g₃/4 and the slope halves.
        let m = lambda / 2.0;
        let s3 = m * m - s1 - s2;
        let y3 = m * (s1 - s3) - t1 / 2.0;
        WPoint::Fin { s: s3, t: 2.0 * y3 }
    }

    pub fn sub(&self, p: &WPoint, q: &WPoint) -> WPoint {
        self.add(p, &q.neg())
    }

    /// Group-law oracle `{x(P+Q), x(P−Q)}`.
    pub fn coset_mul_oracle(&self, p: &WPoint, q: &WPoint) -> PairVal {
        [self.add(p, q).s(), self.sub(p, q).s()]
    }

    /// The closed formula for `s₁ ≠ s₂`; `None` when it does not apply.
    pub fn coset_mul_formula(&self, p: &WPoint, q: &WPoint) -> Option<PairVal> {
        let (WPoint::Fin { s: s1, t: t1 }, WPoint::Fin { s: s2, t: t2 }) = (*p, *q) else {
            return None;
        };
        let d = s1 - s2;
        if d.norm() <= 1e-8 * s1.norm().max(s2.norm()).max(1.0) {
            return None;
        }
        let a = (t1 - t2) / (2.0 * d);
        let b = (t1 + t2) / (2.0 * d);
        Some([Some(-s1 - s2 + a * a), Some(-s1 - s2 + b * b)])
    }

    /// `s₁ *_c s₂`: the formula where it applies, the group law otherwise.
    pub fn coset_mul(&self, p: &WPoint, q: &WPoint) -> PairVal {
        self.coset_mul_formula(p, q)
            .unwrap_or_else(|| self.coset_mul_oracle(p, q))
    }

    /// `∞` acts as the unit, negation fixes `s`, and `∞ ∈ P *_c (−P)`.
    pub fn coset_unit_inv_check(&self, p: &WPoint, tol: f64) -> UnitInvReport {
        let sp = p.s();
        let unit = relative_distance(&self.coset_mul(&WPoint::Inf, p), &[sp, sp]);
        let inv = relative_distance(&[p.neg().s()], &[sp]);
        let pair = self.coset_mul(p, &p.neg());
        let contains_unit = pair.contains(&None);
        UnitInvReport {
            unit,
            inv,
            contains_unit,
            holds: unit < tol && inv < tol && contains_unit,
        }
    }

    /// Products of `p` with every lift of every value in `pair`.
    fn expand(&self, pair: &PairVal, other: &WPoint, left: bool) -> (QuadVal, f64) {
        let mut out = [None; 4];
        let mut spread: f64 = 0.0;
        for (i, u) in pair.iter().enumerate() {
            let lifts = self.lift(*u);
            let prods = lifts.map(|l| {
                if left {
                    self.coset_mul(other, &l)
                } else {
                    self.coset_mul(&l, other)
                }
            });
            spread = spread.max(relative_distance(&prods[0], &prods[1]));
            out[2 * i] = prods[0][0];
            out[2 * i + 1] = prods[0][1];
        }
        (out, spread)
    }

    /// Compares `P *_c (Q *_c R)` with `(P *_c Q) *_c R` and with the
    /// group-law oracle.
    pub fn assoc_check(&self, p: &WPoint, q: &WPoint, r: &WPoint, tol: f64) -> AssocReport {
        let (lhs, s1) = self.expand(&self.coset_mul(q, r), p, true);
        let (rhs, s2) = self.expand(&self.coset_mul(p, q), r, false);
        let pq = self.add(p, q);
        let pmq = self.sub(p, q);
        let oracle = [
            self.add(&pq, r).s(),
            self.sub(&pq, r).s(),
            self.add(&pmq, r).s(),
            self.sub(&pmq, r).s(),
        ];
        let sides = relative_distance(&lhs, &rhs);
        let vs_oracle = relative_distance(&lhs, &oracle).max(relative_distance(&rhs, &oracle));
        let lift_spread = s1.max(s2);
        if lift_spread > tol {
            log::warn!(
                "lift-dependent coset product near a branch point (spread {lift_spread:.3e})"
            );
        }
        AssocReport {
            lhs,
            rhs,
            oracle,
            sides,
            vs_oracle,
            lift_spread,
            holds: sides < tol && vs_oracle < tol,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UnitInvReport {
    pub unit: f64,
    pub inv: f64,
    pub contains_unit: bool,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct AssocReport {
    pub lhs: QuadVal,
    pub rhs: QuadVal,
    pub oracle: QuadVal,
    pub sides: f64,
    pub vs_oracle: f64,
    /// Disagreement between the two lifts of an intermediate value.
    pub lift_spread: f64,
    pub holds: bool,
}

/// Coefficients of `v² T + v V + W` for the biquadratic relation of
/// `{x(P+Q), x(P−Q)}` in terms of `τ = x(P)`, `u = x(Q)`.
pub fn tvw(curve: &Weierstrass, tau: C64, u: C64) -> [C64; 3] {
    let (g2, g3) = (curve.g2, curve.g3);
    let t = (u - tau) * (u - tau);
    let v = 2.0 * (u + tau) * (u * tau + g2 / 4.0) - 4.0 * u * tau * (u + tau) + g3;
    let w = (u * tau + g2 / 4.0).powu(2) + (u + tau) * g3;
    [t, v, w]
}

fn roots_projective(a: C64, b: C64, cc: C64) -> PairVal {
    let scale = a.norm().max(b.norm()).max(cc.norm()).max(f64::MIN_POSITIVE);
    if a.norm() <= 1e-14 * scale {
        if b.norm() <= 1e-14 * scale {
            return [None, None];
        }
        return [Some(-cc / b), None];
    }
    quadratic_roots(a, b, cc).map(Some)
}

/// Numeric pencil polynomial `F(s, x, y) = A y² + B y + C` in Darboux
/// parameters, with `P` for branch-point detection.
#[derive(Clone, Debug)]
pub struct PencilNum {
    coeffs: [CompiledPoly; 3],
    f: CompiledPoly,
    p: CompiledPoly,
}

impl PencilNum {
    pub fn new(spec: &PencilSpec) -> Self {
        let f = pencil_f_darboux(spec).f;
        let coeffs = [0, 1, 2].map(|k| f.coeff_of("x2", k).compile());
        PencilNum {
            coeffs,
            f: f.compile(),
            p: poly_p(spec).compile(),
        }
    }

    pub fn eval(&self, s: C64, x: C64, y: C64) -> C64 {
        self.f.eval(&[s, x, y])
    }

    pub fn p_at(&self, x: C64) -> C64 {
        self.p.eval(&[x])
    }

    /// The two partner tangents `y` with `F(s, x, y) = 0`.
    pub fn partners(&self, s: C64, x: C64) -> PairVal {
        let [c0, c1, c2] = [0, 1, 2].map(|k| self.coeffs[k].eval(&[s, x, C64::new(0.0, 0.0)]));
        roots_projective(c2, c1, c0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PencilAction {
    /// Partner tangents `y₁, y₂` of `x` on the conic `s`.
    pub images: PairVal,
    /// `ψ̂⁻¹` of the images, in canonical coordinates.
    pub conjugated: PairVal,
    /// Branch of `√P(x)` used to lift `x`.
    pub lift_y: C64,
    /// Largest `|F(s, x, yᵢ)|` relative to the coefficient scale.
    pub partner_residual: f64,
}

/// Action of the conic parameter `s` on the base point `x` of `Γ₁`.
pub fn pencil_action(pn: &PencilNum, cp: &CurvePair, s: C64, x: C64) -> PencilAction {
    let lift_y = pn.p_at(x).sqrt();
    log::debug!("lifted x = {x} to y = {lift_y}");
    let images = pn.partners(s, x);
    let scale = [0.0, 1.0, 2.0]
        .iter()
        .map(|k| (s.norm() + x.norm() + 1.0).powf(4.0 + k))
        .fold(1.0, f64::max);
    let partner_residual = images
        .iter()
        .flatten()
        .map(|y| pn.eval(s, x, *y).norm() / scale)
        .fold(0.0, f64::max);
    let conjugated = images.map(|y| cp.psi_inv(y));
    PencilAction {
        images,
        conjugated,
        lift_y,
        partner_residual,
    }
}

/// The coset product of `σ(s)` and `ψ̂⁻¹(x)` on the canonical cubic.
pub fn coset_of_action(curve: &Weierstrass, cp: &CurvePair, s: C64, x: C64) -> PairVal {
    let tau = cp.sigma(s);
    let u = cp.psi_inv(Some(x));
    let [p, _] = curve.lift(Some(tau));
    let [q, _] = curve.lift(u);
    curve.coset_mul(&p, &q)
}

// Poncelet triangle

#[derive(Clone, Debug)]
pub struct PonceletConfig {
    pub spec: PencilSpec,
    pub s: [C64; 3],
    pub x0: C64,
}

#[derive(Clone, Copy, Debug)]
pub struct PonceletReport {
    /// Minimal relative distance of the closing tangent from `x₀`.
    pub defect: f64,
    /// Tangent parameters of the best branch.
    pub tangents: [C64; 3],
    /// `|det|` of the three tangent lines, relative.
    pub concurrency_det: f64,
    pub degenerate: bool,
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Lines `x²z₁ − 2xz₂ + z₃ = 0` tangent to `C₂`; their determinant is
/// `2(a−b)(b−c)(c−a)` up to sign.
pub fn tangent_det(x: [C64; 3]) -> f64 {
    let row = |t: C64| [t * t, -2.0 * t, c(1.0, 0.0)];
    let [a, b, d] = x.map(row);
    let det = a[0] * (b[1] * d[2] - b[2] * d[1]) - a[1] * (b[0] * d[2] - b[2] * d[0])
        + a[2] * (b[0] * d[1] - b[1] * d[0]);
    let scale = x.iter().map(|z| z.norm()).fold(1.0, f64::max).powi(3);
    det.norm() / scale
}

/// Chain of tangents to `C := C₂` with vertices on `C_{s₁}, C_{s₂}, C_{s₃}`;
/// the defect is minimised over the `2³` branch choices.
pub fn poncelet_triangle(pn: &PencilNum, cfg: &PonceletConfig) -> PonceletReport {
    let [s1, s2, s3] = cfg.s;
    let x0 = cfg.x0;
    let mut best = PonceletReport {
        defect: f64::INFINITY,
        tangents: [x0; 3],
        concurrency_det: 0.0,
        degenerate: true,
    };
    for a2 in pn.partners(s1, x0).into_iter().flatten() {
        for a3 in pn.partners(s2, a2).into_iter().flatten() {
            for back in pn.partners(s3, a3).into_iter().flatten() {
                let d = rel(back, x0);
                if d < best.defect {
                    best.defect = d;
                    best.tangents = [x0, a2, a3];
                }
            }
        }
    }
    let t = best.tangents;
    best.concurrency_det = tangent_det(t);
    let pscale = (x0.norm() + 1.0).powi(4);
    best.degenerate = best.defect.is_infinite()
        || best.concurrency_det < 1e-10
        || pn.p_at(x0).norm() < 1e-10 * pscale
        || rel(t[0], t[1]) < 1e-10
        || rel(t[1], t[2]) < 1e-10;
    best
}

/// The two conic parameters closing every triangle through `C_{s₁}`,
/// `C_{s₂}`: the coset product of `σ(s₁)` and `σ(s₂)`, mapped back.
pub fn compatible_s3(curve: &Weierstrass, cp: &CurvePair, s1: C64, s2: C64) -> [Option<C64>; 2] {
    let [p, _] = curve.lift(Some(cp.sigma(s1)));
    let [q, _] = curve.lift(Some(cp.sigma(s2)));
    curve.coset_mul(&p, &q).map(|z| z.map(|z| cp.s_of_sigma(z)))
}

/// Poristic behaviour over many starts: largest defect and its spread.
pub fn poncelet_porism(
    pn: &PencilNum,
    spec: &PencilSpec,
    s: [C64; 3],
    starts: &[C64],
) -> PorismReport {
    let reports: Vec<PonceletReport> = starts
        .iter()
        .map(|&x0| {
            poncelet_triangle(
                pn,
                &PonceletConfig {
                    spec: spec.clone(),
                    s,
                    x0,
                },
            )
        })
        .collect();
    let ok: Vec<f64> = reports
        .iter()
        .filter(|r| !r.degenerate)
        .map(|r| r.defect)
        .collect();
    let max = ok.iter().cloned().fold(0.0, f64::max);
    let min = ok.iter().cloned().fold(f64::INFINITY, f64::min);
    PorismReport {
        max_defect: max,
        min_defect: min,
        variation: if ok.is_empty() {
            f64::INFINITY
        } else {
            max - min
        },
        degenerate: reports.len() - ok.len(),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PorismReport {
    pub max_defect: f64,
    pub min_defect: f64,
    pub variation: f64,
    pub degenerate: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;
    use crate::numeric::real;
    use crate::pencil::curve_pair;
    use crate::sampling::{random_spec, rng_for};
    use std::collections::HashMap;

    fn some(v: &[f64]) -> Vec<Option<C64>> {
        v.iter().map(|x| Some(real(*x))).collect()
    }

    #[test]
    fn p2_examples() {
        assert!(
            relative_distance(&p2_mul(real(1.0), real(1.0)).map(Some), &some(&[4.0, 0.0])) < 1e-15
        );
        let x = c(0.3, -1.2);
        assert!(relative_distance(&p2_mul(real(0.0), x).map(Some), &[Some(x), Some(x)]) < 1e-15);
        let r = p2_mul(real(4.0), real(1.0));
        assert!(relative_distance(&r.map(Some), &some(&[9.0, 1.0])) < 1e-15);
        for z in r {
            let p2 = z * z - 2.0 * z * 5.0 + 9.0;
            assert!(p2.norm() < 1e-12);
        }
    }

    #[test]
    fn p2_associativity_is_exact() {
        let (lhs, rhs) = p2_assoc_polys();
        assert_eq!(lhs, rhs);
        // The unit 0 in the middle slot reduces both sides to (x *₂ z) twice.
        let mut pt = HashMap::new();
        for (n, v) in [("w", int(9)), ("x", int(4)), ("y", int(0)), ("z", int(1))] {
            pt.insert(n, v);
        }
        assert_eq!(lhs.eval_rational(&pt).unwrap(), int(0));
        let mut rng = rng_for(3, 0, 0);
        for _ in 0..100 {
            let [x, y, z] = [0; 3].map(|_| complex(&mut rng, 2.0));
            let (a, b) = p2_assoc(x, y, z);
            let wrap = |v: [C64; 4]| v.map(Some);
            assert!(relative_distance(&wrap(a), &wrap(b)) < 1e-10);
        }
    }

    #[test]
    fn z_plus_unit() {
        let m = |x: i64, y: i64| [x + y, (x - y).abs()];
        assert_eq!(m(0, 5), [5, 5]);
        assert!(m(3, 3).contains(&0));
    }

    fn lemniscatic() -> Weierstrass {
        Weierstrass::new(real(4.0), real(0.0))
    }

    #[test]
    fn two_torsion_examples() {
        let w = lemniscatic();
        let p = WPoint::Fin {
            s: real(1.0),
            t: real(0.0),
        };
        let q = WPoint::Fin {
            s: real(0.0),
            t: real(0.0),
        };
        let r = WPoint::Fin {
            s: real(-1.0),
            t: real(0.0),
        };
        assert!(relative_distance(&w.coset_mul(&p, &q), &some(&[-1.0, -1.0])) < 1e-15);
        assert_eq!(w.residual(&r), 0.0);
        let rep = w.assoc_check(&p, &q, &r, 1e-10);
        assert!(rep.holds, "{rep:?}");
        for v in rep.lhs {
            assert!(v.is_none());
        }
    }

    #[test]
    fn doubling_goes_through_the_group_law() {
        let w = Weierstrass::new(c(1.5, 0.2), c(-0.7, 0.4));
        let p = w.random_point(&mut rng_for(4, 0, 0), 1.0);
        let pair = w.coset_mul(&p, &p);
        assert!(pair.contains(&None));
        let two_p = w.add(&p, &p);
        assert!(relative_distance(&pair, &[two_p.s(), None]) < 1e-12);
        assert!(w.residual(&two_p) < 1e-10);
    }

    #[test]
    fn formula_matches_group_law() {
        let w = Weierstrass::new(c(1.5, 0.2), c(-0.7, 0.4));
        for i in 0..200 {
            let mut rng = rng_for(5, 0, i);
            let p = w.random_point(&mut rng, 1.5);
            let q = w.random_point(&mut rng, 1.5);
            let f = w.coset_mul_formula(&p, &q).unwrap();
            assert!(relative_distance(&f, &w.coset_mul_oracle(&p, &q)) < 1e-10);
        }
    }

    #[test]
    fn unit_inverse_and_associativity() {
        let w = Weierstrass::new(c(-2.0, 1.0), c(0.5, 0.0));
        for i in 0..100 {
            let mut rng = rng_for(6, 0, i);
            let [p, q, r] = [0; 3].map(|_| w.random_point(&mut rng, 1.2));
            assert!(w.coset_unit_inv_check(&p, 1e-12).holds);
            let rep = w.assoc_check(&p, &q, &r, 1e-8);
            assert!(rep.holds, "{i}: {rep:?}");
            assert!(rep.lift_spread < 1e-8);
        }
        let mut rng = rng_for(6, 1, 0);
        let [p, q] = [0; 2].map(|_| w.random_point(&mut rng, 1.0));
        let rep = w.assoc_check(&p, &WPoint::Inf, &q, 1e-10);
        let pq = w.coset_mul(&p, &q);
        assert!(relative_distance(&rep.lhs, &[pq[0], pq[1], pq[0], pq[1]]) < 1e-10);
    }

    #[test]
    fn tvw_roots_are_the_coset_product() {
        let w = Weierstrass::new(c(0.8, -0.3), c(1.1, 0.6));
        for i in 0..50 {
            let mut rng = rng_for(7, 0, i);
            let [p, q] = [0; 2].map(|_| w.random_point(&mut rng, 1.0));
            let [t, v, ww] = tvw(&w, p.s().unwrap(), q.s().unwrap());
            let roots = roots_projective(t, v, ww);
            assert!(relative_distance(&roots, &w.coset_mul(&p, &q)) < 1e-9);
        }
    }

    fn simple_spec(seed: u64) -> (PencilSpec, CurvePair) {
        (0..)
            .find_map(|i| {
                let spec = random_spec(&mut rng_for(seed, 0, i));
                curve_pair(&spec).ok().map(|cp| (spec, cp))
            })
            .unwrap()
    }

    #[test]
    fn pencil_action_is_the_coset_product() {
        for k in 0..5 {
            let (spec, cp) = simple_spec(20 + k);
            let pn = PencilNum::new(&spec);
            let curve = Weierstrass::from_curve_pair(&cp);
            for i in 0..20 {
                let mut rng = rng_for(21 + k, 1, i);
                let (s, x) = (complex(&mut rng, 1.0), complex(&mut rng, 1.0));
                let act = pencil_action(&pn, &cp, s, x);
                assert!(act.partner_residual < 1e-10, "{act:?}");
                let d = relative_distance(&act.conjugated, &coset_of_action(&curve, &cp, s, x));
                assert!(d < 1e-8, "spec {spec}: {d:e}");
            }
        }
    }

    #[test]
    fn unit_conic_fixes_the_base_point() {
        let (spec, cp) = simple_spec(30);
        let pn = PencilNum::new(&spec);
        // The unit of the coset group is σ = ∞, so the action is read off
        // at large s: both partners tend to x.
        let x = c(0.4, 0.3);
        let act = pencil_action(&pn, &cp, real(1e7), x);
        for y in act.images.into_iter().flatten() {
            assert!((y - x).norm() < 1e-2, "{act:?}");
        }
    }

    #[test]
    fn poncelet_closes_for_compatible_conics() {
        for k in 0..10 {
            let (spec, cp) = simple_spec(40 + k);
            let pn = PencilNum::new(&spec);
            let curve = Weierstrass::from_curve_pair(&cp);
            let mut rng = rng_for(41 + k, 2, 0);
            let (s1, s2) = (complex(&mut rng, 1.0), complex(&mut rng, 1.0));
            let s3 = compatible_s3(&curve, &cp, s1, s2)[0].unwrap();
            let starts: Vec<C64> = (0..20).map(|_| complex(&mut rng, 1.0)).collect();
            let rep = poncelet_porism(&pn, &spec, [s1, s2, s3], &starts);
            assert!(rep.max_defect < 1e-7 && rep.variation < 1e-7, "{rep:?}");
            let bad = poncelet_porism(&pn, &spec, [s1, s2, complex(&mut rng, 1.0)], &starts);
            assert!(bad.min_defect > 1e-3, "{bad:?}");
        }
    }

    #[test]
    fn poncelet_flags_branch_points() {
        let (spec, cp) = simple_spec(50);
        let pn = PencilNum::new(&spec);
        let cfg = PonceletConfig {
            spec: spec.clone(),
            s: [real(0.3), real(-0.2), real(0.9)],
            x0: cp.p_roots[1],
        };
        assert!(poncelet_triangle(&pn, &cfg).degenerate);
    }
}
