//! Rigid-body coordinates `(p, q, r, γ, γ′, γ″)`, the printed rigid field
//! and the invariant-measure condition.

use std::collections::HashMap;

use num_traits::Zero;

use crate::algebra::{int, rat, MultiPoly, Rational};
use crate::numeric::{c as cx, C64};

use super::{DynError, GenState, System};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidState {
    pub p: C64,
    pub q: C64,
    pub r: C64,
    pub gamma: C64,
    pub gamma1: C64,
    pub gamma2: C64,
}

impl RigidState {
    pub fn to_array(&self) -> [C64; 6] {
        [self.p, self.q, self.r, self.gamma, self.gamma1, self.gamma2]
    }

    pub fn from_array(a: [C64; 6]) -> Self {
        RigidState {
            p: a[0],
            q: a[1],
            r: a[2],
            gamma: a[3],
            gamma1: a[4],
            gamma2: a[5],
        }
    }
}

const I: C64 = C64::new(0.0, 1.0);

pub fn rigid_map(st: &GenState, c: C64) -> Result<RigidState, DynError> {
    if c.norm() == 0.0 {
        return Err(DynError::ZeroC);
    }
    let u1 = st.e1 - st.x1 * st.x1;
    let u2 = st.e2 - st.x2 * st.x2;
    Ok(RigidState {
        p: (st.x1 + st.x2) / 2.0,
        q: (st.x1 - st.x2) / (2.0 * I),
        r: st.r,
        gamma: (u1 + u2) / (2.0 * c),
        gamma1: (u1 - u2) / (2.0 * I * c),
        gamma2: st.g,
    })
}

pub fn rigid_inverse(rs: &RigidState, c: C64) -> GenState {
    let x1 = rs.p + I * rs.q;
    let x2 = rs.p - I * rs.q;
    GenState {
        e1: x1 * x1 + c * (rs.gamma + I * rs.gamma1),
        e2: x2 * x2 + c * (rs.gamma - I * rs.gamma1),
        x1,
        x2,
        r: rs.r,
        g: rs.gamma2,
    }
}

/// The rigid field as printed, for given values of `α, β`.
pub fn printed_rigid_field(
    rs: &RigidState,
    alpha: C64,
    beta: C64,
    c: C64,
    a1: C64,
    a5: C64,
) -> RigidState {
    let RigidState {
        p,
        q,
        r,
        gamma: g0,
        gamma1: g1,
        gamma2: g2,
    } = *rs;
    let m = 2.0 * beta * r - alpha;
    RigidState {
        p: -I * beta * r * q,
        q: I * beta * r * p,
        r: 2.0 * beta * I * q * (2.0 * p + a1) - I * alpha / r * (2.0 * p * q + c * g1),
        gamma: 2.0 * I * m / c * p * q - I * alpha * g1 + 2.0 * I * beta * g2 * q,
        gamma1: -2.0 * I * m / c * (p * p - q * q) + I * alpha * g0 - 2.0 * I * beta * g2 * q,
        gamma2: -beta / c * (q * I * a5 + 2.0 * I * c * g0 * q - 2.0 * I * c * g1 * p)
            + m / (c * c * g2) * (I * c * g1 * (p * p - q * q) - 2.0 * I * c * p * q * g0),
    }
}

/// The derived field of `sys` transported to rigid coordinates.
pub fn rigid_pushforward(sys: &System, st: &GenState) -> Result<RigidState, DynError> {
    let f = sys.field(st)?;
    let c = sys.c;
    let u1 = f.e1 - 2.0 * st.x1 * f.x1;
    let u2 = f.e2 - 2.0 * st.x2 * f.x2;
    Ok(RigidState {
        p: (f.x1 + f.x2) / 2.0,
        q: (f.x1 - f.x2) / (2.0 * I),
        r: f.r,
        gamma: (u1 + u2) / (2.0 * c),
        gamma1: (u1 - u2) / (2.0 * I * c),
        gamma2: f.g,
    })
}

/// Variables of the measure condition: the six rigid coordinates followed by
/// the parameters `c, a₁, a₅`.
pub const MV: [&str; 9] = ["p", "q", "r", "gamma", "gamma1", "gamma2", "c", "a1", "a5"];

/// Polynomial with complex rational coefficients, stored as `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoly {
    pub re: MultiPoly,
    pub im: MultiPoly,
}

impl ComplexPoly {
    pub fn real(p: MultiPoly) -> Self {
        let im = MultiPoly::zero(&MV);
        ComplexPoly {
            re: p.with_vars(&MV).expect("measure variables"),
            im,
        }
    }

    pub fn imag(p: MultiPoly) -> Self {
        let re = MultiPoly::zero(&MV);
        ComplexPoly {
            re,
            im: p.with_vars(&MV).expect("measure variables"),
        }
    }

    pub fn zero() -> Self {
        Self::real(MultiPoly::zero(&MV))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn derivative(&self, v: &str) -> Self {
        ComplexPoly {
            re: self.re.derivative(v),
            im: self.im.derivative(v),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexPoly {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        ComplexPoly {
            re: self.re.scale(r),
            im: self.im.scale(r),
        }
    }

    pub fn mul_real(&self, m: &MultiPoly) -> Self {
        ComplexPoly {
            re: &self.re * m,
            im: &self.im * m,
        }
    }

    pub fn eval(&self, rs: &RigidState, params: [C64; 3]) -> C64 {
        let vals = point(rs, params);
        let ev = |p: &MultiPoly| {
            let m: HashMap<&str, C64> = MV.iter().copied().zip(vals).collect();
            p.eval_complex(&m).expect("all measure variables bound")
        };
        ev(&self.re) + I * ev(&self.im)
    }
}

fn point(rs: &RigidState, params: [C64; 3]) -> [C64; 9] {
    let a = rs.to_array();
    [
        a[0], a[1], a[2], a[3], a[4], a[5], params[0], params[1], params[2],
    ]
}

fn v(name: &str) -> MultiPoly {
    MultiPoly::var(name, &MV)
}

fn mono(coef: i64, factors: &[(&str, u32)]) -> MultiPoly {
    factors
        .iter()
        .fold(MultiPoly::constant(int(coef), &MV), |acc, (n, e)| {
            &acc * &v(n).pow(*e)
        })
}

fn sum(terms: Vec<MultiPoly>) -> MultiPoly {
    terms.into_iter().fold(MultiPoly::zero(&MV), |a, t| &a + &t)
}

/// The printed coefficient lists `A₀..A₆`, `B₀..B₆`. The symbol `g` in `A₅`
/// is read as `γ`.
pub fn measure_coefficients() -> ([MultiPoly; 7], [MultiPoly; 7]) {
    let (p, q, r, g, g1, g2, c, a1, a5) =
        ("p", "q", "r", "gamma", "gamma1", "gamma2", "c", "a1", "a5");
    let a = [
        sum(vec![
            mono(1, &[(r, 2), (g1, 1), (p, 2)]),
            mono(1, &[(c, 2), (g2, 2), (g1, 1)]),
            mono(-2, &[(r, 2), (p, 1), (q, 1), (g, 1)]),
            mono(2, &[(c, 1), (g2, 2), (p, 1), (q, 1)]),
            mono(-1, &[(r, 2), (g1, 1), (q, 2)]),
        ]),
        MultiPoly::zero(&MV),
        MultiPoly::zero(&MV),
        sum(vec![
            mono(-2, &[(c, 1), (g2, 2), (r, 1), (p, 1), (q, 1)]),
            mono(-1, &[(c, 2), (g2, 2), (r, 1), (g1, 1)]),
        ]),
        sum(vec![
            mono(-2, &[(p, 1), (q, 1), (r, 2), (g2, 2)]),
            mono(-1, &[(g1, 1), (r, 2), (c, 1), (g2, 2)]),
        ]),
        sum(vec![
            mono(-2, &[(r, 2), (g2, 2), (q, 2)]),
            mono(1, &[(g, 1), (r, 2), (c, 1), (g2, 2)]),
            mono(2, &[(r, 2), (g2, 2), (p, 2)]),
        ]),
        sum(vec![
            mono(-1, &[(r, 2), (g2, 1), (g1, 1), (p, 2)]),
            mono(2, &[(r, 2), (g2, 1), (p, 1), (q, 1), (g, 1)]),
            mono(1, &[(r, 2), (g2, 1), (g1, 1), (q, 2)]),
        ]),
    ];
    let b = [
        sum(vec![
            mono(-2, &[(r, 3), (g1, 1), (p, 2)]),
            mono(2, &[(r, 3), (g1, 1), (q, 2)]),
            mono(4, &[(r, 3), (p, 1), (q, 1), (g, 1)]),
        ]),
        mono(-1, &[(c, 1), (r, 3), (q, 1), (g2, 2)]),
        mono(1, &[(c, 1), (r, 3), (p, 1), (g2, 2)]),
        sum(vec![
            mono(4, &[(q, 1), (r, 2), (c, 1), (g2, 2), (p, 1)]),
            mono(2, &[(q, 1), (r, 2), (c, 1), (g2, 2), (a1, 1)]),
        ]),
        sum(vec![
            mono(2, &[(g2, 3), (q, 1), (r, 2), (c, 1)]),
            mono(4, &[(p, 1), (q, 1), (r, 3), (g2, 2)]),
        ]),
        sum(vec![
            mono(-4, &[(r, 3), (g2, 2), (p, 2)]),
            mono(-2, &[(g2, 3), (q, 1), (r, 2), (c, 1)]),
            mono(4, &[(r, 3), (g2, 2), (q, 2)]),
        ]),
        sum(vec![
            mono(-1, &[(r, 2), (g2, 2), (q, 1), (a5, 1)]),
            mono(-2, &[(r, 3), (g2, 1), (g1, 1), (q, 2)]),
            mono(-2, &[(r, 2), (g2, 2), (c, 1), (g, 1), (q, 1)]),
            mono(2, &[(r, 3), (g2, 1), (g1, 1), (p, 2)]),
            mono(2, &[(r, 2), (g2, 2), (c, 1), (g1, 1), (p, 1)]),
            mono(-4, &[(r, 3), (g2, 1), (p, 1), (q, 1), (g, 1)]),
        ]),
    ];
    (a, b)
}

/// `Σ Aₖ αₖ + Σ Bₖ βₖ` with `α₀ = α` and `αₖ = ∂α/∂yₖ` over the six rigid
/// coordinates; the zero polynomial exactly when the measure is preserved.
pub fn measure_condition(alpha: &ComplexPoly, beta: &ComplexPoly) -> ComplexPoly {
    let (a, b) = measure_coefficients();
    let mut out = alpha.mul_real(&a[0]).add(&beta.mul_real(&b[0]));
    for (k, name) in MV[..6].iter().enumerate() {
        out = out.add(&alpha.derivative(name).mul_real(&a[k + 1]));
        out = out.add(&beta.derivative(name).mul_real(&b[k + 1]));
    }
    out
}

/// The three pairs of the example: `(ir, i/2)`, `(2r(p²+q²), p²+q²)`, `(rγ″, 0)`.
pub fn example_pairs() -> [(ComplexPoly, ComplexPoly); 3] {
    let pq = &v("p").pow(2) + &v("q").pow(2);
    [
        (
            ComplexPoly::imag(v("r")),
            ComplexPoly::imag(MultiPoly::constant(rat(1, 2), &MV)),
        ),
        (
            ComplexPoly::real((&v("r") * &pq).scale(&int(2))),
            ComplexPoly::real(pq.clone()),
        ),
        (
            ComplexPoly::real(&v("r") * &v("gamma2")),
            ComplexPoly::zero(),
        ),
    ]
}

/// Divergence of the printed rigid field with polynomial `α, β`, by a
/// fourth-order central stencil. Returns the divergence and the sum of the
/// magnitudes of its terms.
pub fn rigid_divergence(
    alpha: &ComplexPoly,
    beta: &ComplexPoly,
    rs: &RigidState,
    params: [C64; 3],
    h: f64,
) -> (C64, f64) {
    let field = |y: [C64; 6]| {
        let s = RigidState::from_array(y);
        printed_rigid_field(
            &s,
            alpha.eval(&s, params),
            beta.eval(&s, params),
            params[0],
            params[1],
            params[2],
        )
        .to_array()
    };
    let y0 = rs.to_array();
    let mut div = C64::zero();
    let mut mag = 0.0;
    for k in 0..6 {
        let at = |t: f64| {
            let mut y = y0;
            y[k] += cx(t, 0.0);
            field(y)[k]
        };
        let d = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
        mag += d.norm();
        div += d;
    }
    (div, mag)
}

/// `−i c r² γ″²`, the factor relating the measure residual to the divergence.
pub fn measure_factor(rs: &RigidState, c: C64) -> C64 {
    -I * c * rs.r * rs.r * rs.gamma2 * rs.gamma2
}

/// Random rigid-body point with parameters `(c, a₁, a₅)`, `c` kept away from 0.
pub fn random_rigid_point(rng: &mut impl rand::Rng) -> (RigidState, [C64; 3]) {
    let rs = RigidState::from_array(std::array::from_fn(|_| crate::sampling::complex(rng, 1.0)));
    let c = crate::sampling::complex(rng, 1.0) + cx(1.5, 0.0);
    (
        rs,
        [
            c,
            crate::sampling::complex(rng, 1.0),
            crate::sampling::complex(rng, 1.0),
        ],
    )
}

/// `Σ λᵢ (αᵢ, βᵢ)`.
pub fn combine_pairs(
    pairs: &[(ComplexPoly, ComplexPoly)],
    coeffs: &[Rational],
) -> (ComplexPoly, ComplexPoly) {
    pairs.iter().zip(coeffs).fold(
        (ComplexPoly::zero(), ComplexPoly::zero()),
        |(a, b), ((pa, pb), l)| (a.add(&pa.scale(l)), b.add(&pb.scale(l))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::dynamics::{AlphaBeta, EfgSpec};
    use crate::pencil::PencilSpec;
    use crate::sampling::rng_for;

    fn random_rigid(seed: u64, i: u64) -> (RigidState, [C64; 3]) {
        random_rigid_point(&mut rng_for(seed, 30, i))
    }

    #[test]
    fn map_round_trip() {
        let st = GenState::random(&mut rng_for(1, 31, 0), 1.0);
        let c = cx(0.7, 0.2);
        let back = rigid_inverse(&rigid_map(&st, c).unwrap(), c);
        for (a, b) in back.to_array().iter().zip(st.to_array()) {
            assert!((a - b).norm() < 1e-14);
        }
        let mut st2 = st;
        st2.x2 = st.x1;
        assert_eq!(rigid_map(&st2, c).unwrap().q, C64::zero());
        assert_eq!(rigid_map(&st, C64::zero()), Err(DynError::ZeroC));
    }

    #[test]
    fn example_pairs_have_zero_residual() {
        let pairs = example_pairs();
        for (a, b) in &pairs {
            assert!(measure_condition(a, b).is_zero());
        }
        let combo_a = pairs[0]
            .0
            .scale(&rat(3, 2))
            .add(&pairs[1].0.scale(&rat(-1, 3)))
            .add(&pairs[2].0.scale(&int(5)));
        let combo_b = pairs[0]
            .1
            .scale(&rat(3, 2))
            .add(&pairs[1].1.scale(&rat(-1, 3)))
            .add(&pairs[2].1.scale(&int(5)));
        assert!(measure_condition(&combo_a, &combo_b).is_zero());
        let one = ComplexPoly::real(MultiPoly::one(&MV));
        assert!(!measure_condition(&one, &ComplexPoly::zero()).is_zero());
    }

    #[test]
    fn residual_is_a_multiple_of_the_divergence() {
        let one = ComplexPoly::real(MultiPoly::one(&MV));
        let pq = ComplexPoly::real(&v("p") * &v("q"));
        let tests = [
            (one.clone(), ComplexPoly::zero()),
            (pq.clone(), one),
            (ComplexPoly::zero(), pq),
        ];
        for (i, (a, b)) in tests.iter().enumerate() {
            let (rs, params) = random_rigid(2, i as u64);
            let res = measure_condition(a, b).eval(&rs, params);
            let (div, mag) = rigid_divergence(a, b, &rs, params, 1e-3);
            let lam = measure_factor(&rs, params[0]);
            assert!(
                (res - lam * div).norm() < 1e-8 * (res.norm() + lam.norm() * mag),
                "{res} {}",
                lam * div
            );
            assert!(div.norm() > 1e-6 * mag);
        }
    }

    #[test]
    fn divergence_vanishes_for_example_pairs() {
        for (k, (a, b)) in example_pairs().iter().enumerate() {
            for i in 0..5 {
                let (rs, params) = random_rigid(3, 10 * k as u64 + i);
                let (div, mag) = rigid_divergence(a, b, &rs, params, 1e-3);
                assert!(div.norm() < 1e-9 * mag.max(1.0), "pair {k}: {div} vs {mag}");
            }
        }
    }

    #[test]
    fn pushforward_differs_in_q_and_gamma1() {
        // The printed rigid field matches the transported field except in
        // q̇ (missing the cγ″ term) and γ̇′.
        let spec = PencilSpec::from_ints([-2, 1, 3, -2, 2, 1]);
        let c = cx(1.0, 0.0);
        let sys = System::new(EfgSpec::kowalevski_type(&spec), c, AlphaBeta::kowalevski()).unwrap();
        let st = sys.random_state(&mut rng_for(4, 32, 0));
        let rs = rigid_map(&st, c).unwrap();
        let (alpha, beta) = sys.ab.eval(&st);
        let printed =
            printed_rigid_field(&rs, alpha, beta, c, cx(1.0, 0.0), cx(1.0, 0.0)).to_array();
        let pushed = rigid_pushforward(&sys, &st).unwrap().to_array();
        let d: Vec<f64> = printed
            .iter()
            .zip(pushed)
            .map(|(a, b)| (a - b).norm())
            .collect();
        for k in [0, 2, 3, 5] {
            assert!(d[k] < 1e-12, "{d:?}");
        }
        assert!(d[1] > 1e-3 && d[4] > 1e-3, "{d:?}");
        let i = cx(0.0, 1.0);
        let q_fixed = printed[1] + i * beta * c * rs.gamma2;
        assert!((q_fixed - pushed[1]).norm() < 1e-12);
    }
}
