//! Generalized Kowalevski-type systems: the vector field on
//! `(e₁, e₂, x₁, x₂, r, g)`, its first integrals, numerical integration and
//! the special families (K = 0, perturbed, elastic).
//!
//! The field used for integration is derived from the integrals: `ė`, `ẋ`
//! follow the printed equations and `ṙ`, `ġ` are fixed by conservation of
//! `r² − e₁ − e₂ − Ê` and `c²g² − x₂²e₁ − x₁²e₂ − Ĝ`. The third integral is
//! then conserved exactly when `α = 2βr`. The literal printed `K = 1`,
//! `K = 0` and perturbed fields are kept in [`printed`] for comparison.

pub mod efg;
pub mod families;
pub mod printed;
pub mod rigid;

use rand::Rng;
use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::discrimsep::SepError;
use crate::numeric::{c, C64};
use crate::ode::{dopri5, OdeError, OdeOptions, OdeStats};
use crate::par::{self, Exec};
use crate::sampling::{complex, rng_for};

pub use efg::{efg_structure_check, EfgSource, EfgSpec, EfgStructureReport, EfgValues};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynError {
    #[error("singular state: {0} vanishes")]
    Singular(&'static str),
    #[error("c must be nonzero")]
    ZeroC,
    #[error("a0 must be nonzero")]
    ZeroA0,
    #[error("integration aborted at t = {t}: {reason}")]
    Aborted {
        t: f64,
        reason: String,
        last: Box<GenState>,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Sep(#[from] SepError),
}

impl DynError {
    /// Aborts caused by the singular set rather than bad input.
    pub fn is_singular(&self) -> bool {
        matches!(self, DynError::Singular(_) | DynError::Aborted { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenState {
    pub e1: C64,
    pub e2: C64,
    pub x1: C64,
    pub x2: C64,
    pub r: C64,
    pub g: C64,
}

impl GenState {
    pub fn to_array(&self) -> [C64; 6] {
        [self.e1, self.e2, self.x1, self.x2, self.r, self.g]
    }

    pub fn from_array(a: [C64; 6]) -> Self {
        GenState {
            e1: a[0],
            e2: a[1],
            x1: a[2],
            x2: a[3],
            r: a[4],
            g: a[5],
        }
    }

    /// `max(1, max |component|)`.
    pub fn scale(&self) -> f64 {
        self.to_array().iter().fold(1.0, |m, z| m.max(z.norm()))
    }

    pub fn random(rng: &mut impl Rng, scale: f64) -> Self {
        Self::from_array(std::array::from_fn(|_| complex(rng, scale)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbKind {
    Kowalevski,
    A,
    B,
    C,
    Custom,
}

impl AbKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AbKind::Kowalevski => "kowalevski",
            AbKind::A => "A",
            AbKind::B => "B",
            AbKind::C => "C",
            AbKind::Custom => "custom",
        }
    }
}

pub type AbFn = fn(&GenState) -> (C64, C64);

/// The pair of functions `(α, β)` selecting a system.
#[derive(Clone, Copy, Debug)]
pub struct AlphaBeta {
    pub kind: AbKind,
    pub k: C64,
    pub k1: C64,
    custom: Option<AbFn>,
}

impl AlphaBeta {
    /// `α = i r`, `β = i/2`.
    pub fn kowalevski() -> Self {
        AlphaBeta {
            kind: AbKind::Kowalevski,
            k: C64::default(),
            k1: C64::default(),
            custom: None,
        }
    }

    /// `α = k r²`, `β = (k/2) r`.
    pub fn a(k: C64) -> Self {
        AlphaBeta {
            kind: AbKind::A,
            k,
            k1: C64::default(),
            custom: None,
        }
    }

    /// `α = k r g`, `β = k₁ g`.
    pub fn b(k: C64, k1: C64) -> Self {
        AlphaBeta {
            kind: AbKind::B,
            k,
            k1,
            custom: None,
        }
    }

    /// `α = k r² g`, `β = k₁ g`.
    pub fn c(k: C64, k1: C64) -> Self {
        AlphaBeta {
            kind: AbKind::C,
            k,
            k1,
            custom: None,
        }
    }

    pub fn custom(f: AbFn) -> Self {
        AlphaBeta {
            kind: AbKind::Custom,
            k: C64::default(),
            k1: C64::default(),
            custom: Some(f),
        }
    }

    /// Named choice with `k = k₁ = 1`.
    pub fn parse(name: &str) -> Option<Self> {
        let one = c(1.0, 0.0);
        match name {
            "kowalevski" | "K" | "k" => Some(Self::kowalevski()),
            "A" | "a" => Some(Self::a(one)),
            "B" | "b" => Some(Self::b(one, one)),
            "C" | "c" => Some(Self::c(one, one)),
            _ => None,
        }
    }

    pub fn eval(&self, st: &GenState) -> (C64, C64) {
        let i = c(0.0, 1.0);
        match self.kind {
            AbKind::Kowalevski => (i * st.r, i * 0.5),
            AbKind::A => (self.k * st.r * st.r, self.k * 0.5 * st.r),
            AbKind::B => (self.k * st.r * st.g, self.k1 * st.g),
            AbKind::C => (self.k * st.r * st.r * st.g, self.k1 * st.g),
            AbKind::Custom => (self.custom.expect("custom evaluator"))(st),
        }
    }
}

/// `[k², I₂, I₃, I₄]` with `k² = e₁e₂`, `I₂ = r² − e₁ − e₂ − Ê`,
/// `I₃ = rG + x₂e₁ + x₁e₂ − F̂`, `I₄ = G² − x₂²e₁ − x₁²e₂ − Ĝ`, `G = cg`.
/// On states built from the pencil the last three vanish.
pub type IntegralValues = [C64; 4];

pub const INTEGRAL_NAMES: [&str; 4] = ["k2", "I2", "I3", "I4"];

#[derive(Clone, Debug)]
pub struct System {
    pub efg: EfgSpec,
    pub c: C64,
    pub ab: AlphaBeta,
}

const SINGULAR_REL: f64 = 1e-12;

impl System {
    pub fn new(efg: EfgSpec, c: C64, ab: AlphaBeta) -> Result<Self, DynError> {
        if c.norm() == 0.0 {
            return Err(DynError::ZeroC);
        }
        Ok(System { efg, c, ab })
    }

    pub fn field(&self, st: &GenState) -> Result<GenState, DynError> {
        let sc = st.scale();
        if st.r.norm() < SINGULAR_REL * sc {
            return Err(DynError::Singular("r"));
        }
        let gg = self.c * st.g;
        if gg.norm() < SINGULAR_REL * sc {
            return Err(DynError::Singular("g"));
        }
        let (alpha, beta) = self.ab.eval(st);
        let v = self.efg.values(st.x1, st.x2);
        let GenState {
            e1, e2, x1, x2, r, ..
        } = *st;
        let de1 = -alpha * e1;
        let de2 = alpha * e2;
        let dx1 = -beta * (r * x1 + gg);
        let dx2 = beta * (r * x2 + gg);
        let dr = (de1 + de2 + v.e_x[0] * dx1 + v.e_x[1] * dx2) / (2.0 * r);
        let dgg = (x2 * x2 * de1
            + x1 * x1 * de2
            + 2.0 * x2 * dx2 * e1
            + 2.0 * x1 * dx1 * e2
            + v.g_x[0] * dx1
            + v.g_x[1] * dx2)
            / (2.0 * gg);
        Ok(GenState {
            e1: de1,
            e2: de2,
            x1: dx1,
            x2: dx2,
            r: dr,
            g: dgg / self.c,
        })
    }

    pub fn integrals(&self, st: &GenState) -> IntegralValues {
        let v = self.efg.values(st.x1, st.x2);
        let GenState {
            e1,
            e2,
            x1,
            x2,
            r,
            g,
        } = *st;
        let gg = self.c * g;
        [
            e1 * e2,
            r * r - e1 - e2 - v.e,
            r * gg + x2 * e1 + x1 * e2 - v.f,
            gg * gg - x2 * x2 * e1 - x1 * x1 * e2 - v.g,
        ]
    }

    /// `e₂P(x₁) + e₁P(x₂) − H + e₁e₂(x₁−x₂)²`; zero on constrained states
    /// of a family whose `P` and `Q` separate. Returns the residual and a scale.
    pub fn identity1(&self, st: &GenState) -> (C64, f64) {
        let v = self.efg.values(st.x1, st.x2);
        let h = v.f * v.f - v.e * v.g;
        let d = st.x1 - st.x2;
        let p1 = self.efg.p_at(st.x1);
        let p2 = self.efg.p_at(st.x2);
        let terms = [st.e2 * p1, st.e1 * p2, -h, st.e1 * st.e2 * d * d];
        let sc = terms.iter().fold(1.0, |m: f64, t| m.max(t.norm()));
        (terms.iter().sum(), sc)
    }

    /// Squared forms of the `ẋ` formulas: `ẋ₁² − β²(P(x₁) + e₁(x₁−x₂)²)` and
    /// the same for `x₂`, each with its scale, plus the branch signs `σᵢ`
    /// with `ẋ₁ = −σ₁β√(·)`, `ẋ₂ = σ₂β√(·)` for the principal root.
    pub fn dx_check(&self, st: &GenState) -> Result<DxCheck, DynError> {
        let f = self.field(st)?;
        let (_, beta) = self.ab.eval(st);
        let d2 = (st.x1 - st.x2) * (st.x1 - st.x2);
        let rad = [
            self.efg.p_at(st.x1) + st.e1 * d2,
            self.efg.p_at(st.x2) + st.e2 * d2,
        ];
        let dx = [f.x1, f.x2];
        let mut residual = [0.0; 2];
        let mut sign = [0i8; 2];
        for i in 0..2 {
            let lhs = dx[i] * dx[i];
            let rhs = beta * beta * rad[i];
            residual[i] = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0);
            let root = beta * rad[i].sqrt();
            let root = if i == 0 { -root } else { root };
            sign[i] = if (dx[i] - root).norm() <= (dx[i] + root).norm() {
                1
            } else {
                -1
            };
        }
        Ok(DxCheck {
            residual,
            sign,
            radicand: rad,
        })
    }

    pub fn integrate(
        &self,
        st0: &GenState,
        times: &[f64],
        opts: &OdeOptions,
    ) -> Result<Trajectory, DynError> {
        let f = |_t: f64, y: &[C64; 6]| self.field(&GenState::from_array(*y)).map(|d| d.to_array());
        let (ys, stats) = dopri5(f, st0.to_array(), times, opts).map_err(|(e, last)| {
            let (t, reason) = match e {
                OdeError::Field { t, err } => (t, err.to_string()),
                OdeError::StepUnderflow { t } => (t, "step size underflow".to_string()),
                OdeError::TooManySteps { t } => (t, "step limit reached".to_string()),
            };
            DynError::Aborted {
                t,
                reason,
                last: Box::new(GenState::from_array(last)),
            }
        })?;
        let states: Vec<GenState> = ys.into_iter().map(GenState::from_array).collect();
        let integrals: Vec<IntegralValues> = states.iter().map(|s| self.integrals(s)).collect();
        let i0 = integrals[0];
        let drift: Vec<[f64; 4]> = integrals
            .iter()
            .map(|iv| std::array::from_fn(|k| (iv[k] - i0[k]).norm() / i0[k].norm().max(1.0)))
            .collect();
        let max_drift = drift
            .iter()
            .fold([0.0f64; 4], |m, d| std::array::from_fn(|k| m[k].max(d[k])));
        Ok(Trajectory {
            times: times.to_vec(),
            states,
            integrals,
            drift,
            max_drift,
            stats,
        })
    }

    /// Integrates on `[0, t_end]` with `n` equal output intervals.
    pub fn integrate_to(
        &self,
        st0: &GenState,
        t_end: f64,
        n: usize,
        opts: &OdeOptions,
    ) -> Result<Trajectory, DynError> {
        let n = n.max(1);
        let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        self.integrate(st0, &times, opts)
    }

    /// Random state with `|r|, |cg|, |x₁−x₂|` bounded away from zero.
    pub fn random_state(&self, rng: &mut impl Rng) -> GenState {
        loop {
            let st = GenState::random(rng, 1.0);
            if st.r.norm() > 0.3 && (self.c * st.g).norm() > 0.3 && (st.x1 - st.x2).norm() > 0.3 {
                return st;
            }
        }
    }

    /// State on the level set `I₂ = I₃ = I₄ = 0` with the given `x₁, x₂, e₁`.
    pub fn constrained_state(&self, x1: C64, x2: C64, e1: C64) -> Option<GenState> {
        let d2 = (x1 - x2) * (x1 - x2);
        let v = self.efg.values(x1, x2);
        let h = v.f * v.f - v.e * v.g;
        let den = self.efg.p_at(x1) + e1 * d2;
        if den.norm() < 1e-9 {
            return None;
        }
        let e2 = (h - e1 * self.efg.p_at(x2)) / den;
        self.complete(x1, x2, e1, e2, &v)
    }

    /// State on the level set with prescribed `k² = e₁e₂`; `root` picks one
    /// of the two admissible `e₁`.
    pub fn constrained_state_k2(&self, x1: C64, x2: C64, k2: C64, root: usize) -> Option<GenState> {
        let d2 = (x1 - x2) * (x1 - x2);
        let v = self.efg.values(x1, x2);
        let h = v.f * v.f - v.e * v.g;
        let (p1, p2) = (self.efg.p_at(x1), self.efg.p_at(x2));
        // e₂P₁ + e₁P₂ − H + k²d² = 0 with e₂ = k²/e₁.
        let roots = crate::numeric::quadratic_roots(p2, k2 * d2 - h, k2 * p1);
        let e1 = roots[root.min(1)];
        if !e1.is_finite() || e1.norm() < 1e-9 {
            return None;
        }
        self.complete(x1, x2, e1, k2 / e1, &v)
    }

    fn complete(&self, x1: C64, x2: C64, e1: C64, e2: C64, v: &EfgValues) -> Option<GenState> {
        let r = (e1 + e2 + v.e).sqrt();
        if r.norm() < 1e-6 || !r.is_finite() {
            return None;
        }
        let gg = (v.f - x2 * e1 - x1 * e2) / r;
        let st = GenState {
            e1,
            e2,
            x1,
            x2,
            r,
            g: gg / self.c,
        };
        (gg.norm() > 1e-6 && st.to_array().iter().all(|z| z.is_finite())).then_some(st)
    }

    /// Random constrained state with nondegenerate denominators.
    pub fn random_constrained_state(&self, rng: &mut impl Rng) -> GenState {
        loop {
            let (x1, x2, e1) = (complex(rng, 1.0), complex(rng, 1.0), complex(rng, 1.0));
            if (x1 - x2).norm() < 0.3 {
                continue;
            }
            if let Some(st) = self.constrained_state(x1, x2, e1) {
                if st.r.norm() > 0.2 && (self.c * st.g).norm() > 0.2 && st.scale() < 20.0 {
                    return st;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DxCheck {
    pub residual: [f64; 2],
    pub sign: [i8; 2],
    pub radicand: [C64; 2],
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GenState>,
    pub integrals: Vec<IntegralValues>,
    /// `|I(t) − I(0)| / max(|I(0)|, 1)` per output time.
    pub drift: Vec<[f64; 4]>,
    pub max_drift: [f64; 4],
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn worst_drift(&self) -> f64 {
        self.max_drift.iter().cloned().fold(0.0, f64::max)
    }

    /// Branch signs of the `ẋ` formulas along the trajectory, following the
    /// square root continuously; returns the number of sign flips per
    /// coordinate and the largest squared-form residual.
    pub fn branch_log(&self, sys: &System) -> Result<BranchLog, DynError> {
        let mut prev: [Option<C64>; 2] = [None, None];
        let mut last_sign = [0i8; 2];
        let mut flips = [0usize; 2];
        let mut max_residual: f64 = 0.0;
        let mut signs = Vec::with_capacity(self.states.len());
        for st in &self.states {
            let chk = sys.dx_check(st)?;
            let f = sys.field(st)?;
            let (_, beta) = sys.ab.eval(st);
            max_residual = max_residual.max(chk.residual[0].max(chk.residual[1]));
            let dx = [f.x1, f.x2];
            let mut s = [0i8; 2];
            for i in 0..2 {
                let mut w = chk.radicand[i].sqrt();
                if let Some(p) = prev[i] {
                    if (w - p).norm() > (w + p).norm() {
                        w = -w;
                    }
                }
                prev[i] = Some(w);
                let root = if i == 0 { -beta * w } else { beta * w };
                s[i] = if (dx[i] - root).norm() <= (dx[i] + root).norm() {
                    1
                } else {
                    -1
                };
                if last_sign[i] != 0 && s[i] != last_sign[i] {
                    flips[i] += 1;
                }
                last_sign[i] = s[i];
            }
            signs.push(s);
        }
        Ok(BranchLog {
            signs,
            flips,
            max_residual,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BranchLog {
    pub signs: Vec<[i8; 2]>,
    pub flips: [usize; 2],
    pub max_residual: f64,
}

/// Summary of one sample in a conservation sweep.
#[derive(Clone, Debug)]
pub struct SweepSample {
    pub index: u64,
    pub initial: GenState,
    pub max_drift: [f64; 4],
    pub accepted_steps: usize,
}

/// Integrates `n` random nonsingular states on `[0, t_end]`. Samples whose
/// trajectory reaches the singular set are redrawn within the same stream;
/// the result is independent of `exec`.
pub fn conservation_sweep(
    sys: &System,
    seed: u64,
    n: usize,
    t_end: f64,
    opts: &OdeOptions,
    exec: Exec,
) -> Vec<Result<SweepSample, DynError>> {
    par::map_range(exec, n, |i| {
        let mut rng = rng_for(seed, 100, i as u64);
        let mut last_err = None;
        for _ in 0..8 {
            let st = sys.random_state(&mut rng);
            match sys.integrate_to(&st, t_end, 4, opts) {
                Ok(tr) => {
                    return Ok(SweepSample {
                        index: i as u64,
                        initial: st,
                        max_drift: tr.max_drift,
                        accepted_steps: tr.stats.accepted,
                    })
                }
                Err(e) if e.is_singular() => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    })
}
