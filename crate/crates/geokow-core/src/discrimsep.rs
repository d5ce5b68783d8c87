//! Discriminantly separable polynomials in three variables: detection and
//! classification, the rank criteria, transposition and Möbius closure, the
//! differential form of separability, the symmetric family and
//! symmetrization.
//!
//! Discriminants use the half convention `𝒟_v(Av² + 2Bv + C) = B² − AC`.
//! A polynomial of degree one in `v` is treated as `A = 0`.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::algebra::{
    coeff_matrix, int, moebius_substitute, rank, rat, to_c64, AlgebraError, Moebius, MultiPoly,
    Rational,
};
use crate::numeric::{
    multiset_distance_finite, poly_roots, polyval, quadratic_roots, MoebiusC, C64,
};
use crate::pencil::{pencil_f_darboux, PencilSpec};
use crate::sampling::complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SepError {
    #[error("expected a polynomial in exactly three variables, got {0}")]
    Arity(usize),
    #[error("degree {deg} in {var} exceeds 2")]
    Degree { var: String, deg: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Strongly,
    Symmetrically,
    Plainly,
    Weakly,
    Not,
}

impl Verdict {
    /// Discriminantly separable in the sense of one common family `fᵢ`.
    pub fn is_separable(self) -> bool {
        matches!(
            self,
            Verdict::Strongly | Verdict::Symmetrically | Verdict::Plainly
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Strongly => "strongly",
            Verdict::Symmetrically => "symmetrically",
            Verdict::Plainly => "plainly",
            Verdict::Weakly => "weakly",
            Verdict::Not => "not",
        }
    }
}

/// `D = λ·g_a(x_a)·g_b(x_b)` with `g_a`, `g_b` monic. `λ = 0` marks `D ≡ 0`.
#[derive(Clone, Debug)]
pub struct Split {
    pub lambda: Rational,
    pub ga: MultiPoly,
    pub gb: MultiPoly,
}

impl Split {
    /// Weak-separability factors: the constant goes to the first factor.
    pub fn factors(&self) -> (MultiPoly, MultiPoly) {
        (self.ga.scale(&self.lambda), self.gb.clone())
    }
}

#[derive(Clone, Debug)]
pub struct SeparabilityReport {
    pub vars: [String; 3],
    pub verdict: Verdict,
    /// `𝒟_{xᵢ}F` in the remaining two variables.
    pub discriminants: [MultiPoly; 3],
    /// Rank of the coefficient matrix of each discriminant.
    pub ranks: [usize; 3],
    /// Rank-one splits of the discriminants, where they exist.
    pub splits: [Option<Split>; 3],
    /// Monic shapes `gᵢ` with `fᵢ = cᵢ gᵢ`.
    pub shapes: Option<[MultiPoly; 3]>,
    /// `cᵢ²`; the `cᵢ` themselves may be irrational.
    pub scales_sq: Option<[Rational; 3]>,
    /// `fᵢ` with rational coefficients when every `cᵢ` is rational.
    pub factors: Option<[MultiPoly; 3]>,
    /// Some discriminant vanishes identically.
    pub degenerate: bool,
}

impl SeparabilityReport {
    /// `fᵢ(x)` at a complex point, using the principal root of `cᵢ²`.
    pub fn eval_factor(&self, i: usize, x: C64) -> Option<C64> {
        let shapes = self.shapes.as_ref()?;
        let sq = self.scales_sq.as_ref()?;
        Some(to_c64(&sq[i]).sqrt() * eval_univariate(&shapes[i], &self.vars[i], x))
    }
}

fn eval_univariate(p: &MultiPoly, v: &str, x: C64) -> C64 {
    let coeffs = p.univariate_coeffs(v).expect("univariate");
    let desc: Vec<C64> = coeffs.iter().rev().map(to_c64).collect();
    polyval(&desc, x)
}

/// `B² − AC` for `p = Av² + 2Bv + C` of degree at most two in `v`.
pub fn discriminant_upto2(p: &MultiPoly, v: &str) -> Result<MultiPoly, SepError> {
    let d = p.degree_in(v);
    if d > 2 {
        return Err(SepError::Degree {
            var: v.to_string(),
            deg: d,
        });
    }
    let a = p.coeff_of(v, 2);
    let b = p.coeff_of(v, 1).scale(&rat(1, 2));
    let c = p.coeff_of(v, 0);
    let disc = &(&b * &b) - &(&a * &c);
    let rest: Vec<&str> = p
        .vars()
        .iter()
        .map(|s| s.as_str())
        .filter(|s| *s != v)
        .collect();
    Ok(disc.with_vars(&rest)?)
}

fn leading(p: &MultiPoly, v: &str) -> Rational {
    let c = p.univariate_coeffs(v).expect("univariate");
    c.into_iter()
        .rev()
        .find(|x| !x.is_zero())
        .unwrap_or_else(Rational::zero)
}

fn monic(p: &MultiPoly, v: &str) -> MultiPoly {
    let l = leading(p, v);
    if l.is_zero() {
        p.clone()
    } else {
        p.scale(&(Rational::one() / l))
    }
}

/// Exact split `D(xa, xb) = λ g_a(xa) g_b(xb)` if the coefficient matrix has rank one.
pub fn rank_one_split(
    d: &MultiPoly,
    xa: &str,
    xb: &str,
) -> Result<(usize, Option<Split>), SepError> {
    let t = coeff_matrix(d, xa, xb)?;
    let r = rank(&t);
    if r == 0 {
        let zero = MultiPoly::zero(&[]);
        return Ok((
            0,
            Some(Split {
                lambda: Rational::zero(),
                ga: zero.clone(),
                gb: zero,
            }),
        ));
    }
    if r != 1 {
        return Ok((r, None));
    }
    let (i0, j0) = (0..5)
        .flat_map(|i| (0..5).map(move |j| (i, j)))
        .find(|&(i, j)| !t[i][j].is_zero())
        .expect("rank one has a nonzero entry");
    let u: Vec<Rational> = (0..5).map(|i| t[i][j0].clone()).collect();
    let piv = t[i0][j0].clone();
    let w: Vec<Rational> = (0..5).map(|j| &t[i0][j] / &piv).collect();
    let ua = MultiPoly::from_univariate(&u, xa);
    let wb = MultiPoly::from_univariate(&w, xb);
    let (la, lb) = (leading(&ua, xa), leading(&wb, xb));
    Ok((
        1,
        Some(Split {
            lambda: la * lb,
            ga: monic(&ua, xa),
            gb: monic(&wb, xb),
        }),
    ))
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

fn vars3(f: &MultiPoly, vars: Option<[&str; 3]>) -> Result<[String; 3], SepError> {
    match vars {
        Some(v) => Ok(v.map(String::from)),
        None => {
            let vs = f.vars();
            if vs.len() != 3 {
                return Err(SepError::Arity(vs.len()));
            }
            Ok([vs[0].clone(), vs[1].clone(), vs[2].clone()])
        }
    }
}

/// Classifies `F(x₁, x₂, x₃)`. With `vars = None` the polynomial's own
/// context order is used; the first variable is the distinguished one for
/// the symmetric class.
pub fn check_separable(
    f: &MultiPoly,
    vars: Option<[&str; 3]>,
) -> Result<SeparabilityReport, SepError> {
    let vars = vars3(f, vars)?;
    let v: [&str; 3] = [&vars[0], &vars[1], &vars[2]];
    let f = f.with_vars(&v)?;
    let others = |i: usize| -> (usize, usize) {
        match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    };
    let mut discriminants = Vec::with_capacity(3);
    let mut ranks = [0usize; 3];
    let mut splits: [Option<Split>; 3] = [None, None, None];
    for i in 0..3 {
        let d = discriminant_upto2(&f, v[i])?;
        let (j, k) = others(i);
        let d = d.with_vars(&[v[j], v[k]])?;
        let (r, s) = rank_one_split(&d, v[j], v[k])?;
        ranks[i] = r;
        splits[i] = s;
        discriminants.push(d);
    }
    let discriminants: [MultiPoly; 3] = discriminants.try_into().expect("three");
    let zeros: Vec<usize> = (0..3).filter(|&i| ranks[i] == 0).collect();
    let degenerate = !zeros.is_empty();
    let mut report = SeparabilityReport {
        vars: vars.clone(),
        verdict: Verdict::Not,
        discriminants,
        ranks,
        splits: splits.clone(),
        shapes: None,
        scales_sq: None,
        factors: None,
        degenerate,
    };
    if splits.iter().any(|s| s.is_none()) {
        return Ok(report);
    }
    let sp: Vec<Split> = splits.into_iter().map(|s| s.expect("checked")).collect();
    // Factor of variable `j` as produced by the split of discriminant `i`.
    let shape_from = |i: usize, j: usize| -> &MultiPoly {
        let (a, _) = others(i);
        if a == j {
            &sp[i].ga
        } else {
            &sp[i].gb
        }
    };
    match zeros.len() {
        0 => {
            let mut shapes = Vec::with_capacity(3);
            for j in 0..3 {
                let (i1, i2) = others(j);
                let (g1, g2) = (shape_from(i1, j), shape_from(i2, j));
                if g1 != g2 {
                    report.verdict = Verdict::Weakly;
                    return Ok(report);
                }
                shapes.push(g1.clone());
            }
            let l = [&sp[0].lambda, &sp[1].lambda, &sp[2].lambda];
            let c0sq = l[1] * l[2] / l[0];
            let sq = [c0sq.clone(), l[2] * l[0] / l[1], l[0] * l[1] / l[2]];
            let shapes: [MultiPoly; 3] = shapes.try_into().expect("three");
            if let Some(c0) = rational_sqrt(&c0sq) {
                let c = [c0.clone(), l[2] / &c0, l[1] / &c0];
                report.factors = Some(std::array::from_fn(|i| shapes[i].scale(&c[i])));
            }
            let same = |a: usize, b: usize| {
                shapes[a].rename(&vars[a], "t") == shapes[b].rename(&vars[b], "t")
            };
            report.verdict = if same(1, 2) && l[1] == l[2] {
                if same(0, 1) && l[0] == l[1] {
                    Verdict::Strongly
                } else {
                    Verdict::Symmetrically
                }
            } else {
                Verdict::Plainly
            };
            report.shapes = Some(shapes);
            report.scales_sq = Some(sq);
        }
        1 => report.verdict = Verdict::Weakly,
        _ => {
            // Two or three vanishing discriminants: the product form holds
            // with a zero factor.
            let mut f: [MultiPoly; 3] = std::array::from_fn(|_| MultiPoly::zero(&[]));
            if zeros.len() == 2 {
                let i = (0..3).find(|i| !zeros.contains(i)).expect("one nonzero");
                let (a, b) = others(i);
                f[a] = sp[i].ga.scale(&sp[i].lambda);
                f[b] = sp[i].gb.clone();
            }
            report.factors = Some(f);
            report.verdict = Verdict::Plainly;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct RankCriterion {
    pub rank: usize,
    pub matrix: Vec<Vec<Rational>>,
    pub holds: bool,
}

fn quadratic_parts(f: &MultiPoly, s: &str) -> Result<(MultiPoly, MultiPoly, MultiPoly), SepError> {
    let d = f.degree_in(s);
    if d > 2 {
        return Err(SepError::Degree {
            var: s.to_string(),
            deg: d,
        });
    }
    Ok((
        f.coeff_of(s, 2),
        f.coeff_of(s, 1).scale(&rat(1, 2)),
        f.coeff_of(s, 0),
    ))
}

/// `rank T_{B²−AC} = 1` for `F = A s² + 2B s + C`.
pub fn rank1_criterion(
    f: &MultiPoly,
    s: &str,
    x1: &str,
    x2: &str,
) -> Result<RankCriterion, SepError> {
    let (a, b, c) = quadratic_parts(f, s)?;
    let d = &(&b * &b) - &(&a * &c);
    let matrix = coeff_matrix(&d, x1, x2)?;
    let r = rank(&matrix);
    Ok(RankCriterion {
        rank: r,
        matrix,
        holds: r == 1,
    })
}

/// `rank T_{B²} = 2` for `F = A(x₁)s² + 2B s + C(x₂)`, applied literally.
/// Ranks below two are logged since the product form may still hold there.
pub fn rank2_criterion(
    f: &MultiPoly,
    s: &str,
    x1: &str,
    x2: &str,
) -> Result<RankCriterion, SepError> {
    let (a, b, c) = quadratic_parts(f, s)?;
    if a.degree_in(x2) > 0 || c.degree_in(x1) > 0 {
        return Err(SepError::Precondition(format!(
            "A must depend on {x1} only and C on {x2} only"
        )));
    }
    let matrix = coeff_matrix(&(&b * &b), x1, x2)?;
    let r = rank(&matrix);
    if r < 2 {
        log::info!("rank T_B² = {r} < 2; the literal criterion reports false");
    }
    Ok(RankCriterion {
        rank: r,
        matrix,
        holds: r == 2,
    })
}

/// `A s² + 2B s + C ↦ C s² + 2B s + A`.
pub fn transpose(f: &MultiPoly, s: &str) -> Result<MultiPoly, SepError> {
    let (a, b, c) = quadratic_parts(f, s)?;
    let sv = MultiPoly::var(s, &[]);
    let out = &(&(&c * &sv.pow(2)) + &(&b * &sv).scale(&int(2))) + &a;
    let refs: Vec<&str> = f.vars().iter().map(|x| x.as_str()).collect();
    Ok(out.with_vars(&refs).unwrap_or(out))
}

/// `F(γ(s), α(x₁), β(x₂))` with denominators cleared.
pub fn moebius_closure(
    f: &MultiPoly,
    vars: [&str; 3],
    gamma: &Moebius,
    alpha: &Moebius,
    beta: &Moebius,
) -> Result<MultiPoly, SepError> {
    let mut g = moebius_substitute(f, vars[0], gamma)?;
    g = moebius_substitute(&g, vars[1], alpha)?;
    Ok(moebius_substitute(&g, vars[2], beta)?)
}

#[derive(Clone, Debug, Default)]
pub struct DifferentialReport {
    pub tested: usize,
    pub passed: usize,
    pub skipped: usize,
    /// Largest `|Σ εᵢ dxᵢ/√fᵢ| / Σ|dxᵢ/√fᵢ|` over the best signs.
    pub max_residual: f64,
}

impl DifferentialReport {
    pub fn all_pass(&self) -> bool {
        self.tested > 0 && self.passed == self.tested
    }
}

/// Checks `Σ ± dxᵢ/√fᵢ(xᵢ) = 0` for tangent vectors of `F = 0`. With
/// `freeze_first` the first variable is held fixed, which is the Euler
/// equation `dx₁/√f₁ ± dx₂/√f₂ = 0` on a fixed conic.
pub fn differential_separability_check(
    f: &MultiPoly,
    report: &SeparabilityReport,
    samples: usize,
    tol: f64,
    freeze_first: bool,
    rng: &mut impl Rng,
) -> Result<DifferentialReport, SepError> {
    if !report.verdict.is_separable() || report.shapes.is_none() {
        return Err(SepError::Precondition(
            "polynomial is not discriminantly separable".into(),
        ));
    }
    let v: Vec<&str> = report.vars.iter().map(|s| s.as_str()).collect();
    let f = f.with_vars(&v)?;
    let partials: Vec<MultiPoly> = v.iter().map(|x| f.derivative(x)).collect();
    let a = f.coeff_of(v[0], 2);
    let b = f.coeff_of(v[0], 1);
    let c = f.coeff_of(v[0], 0);
    let mut out = DifferentialReport::default();
    let mut attempts = 0;
    while out.tested < samples && attempts < 20 * samples.max(1) {
        attempts += 1;
        let x1 = complex(rng, 2.0);
        let x2 = complex(rng, 2.0);
        let pt = |x0: C64| HashMap::from([(v[0], x0), (v[1], x1), (v[2], x2)]);
        let p0 = pt(C64::new(0.0, 0.0));
        let ev = |p: &MultiPoly, pt: &HashMap<&str, C64>| p.eval_complex(pt).expect("context");
        let (ac, bc, cc) = (ev(&a, &p0), ev(&b, &p0), ev(&c, &p0));
        let x0 = if ac.norm() > 1e-12 {
            quadratic_roots(ac, bc, cc)[rng.gen_range(0..2)]
        } else if bc.norm() > 1e-12 {
            -cc / bc
        } else {
            out.skipped += 1;
            continue;
        };
        let point = pt(x0);
        let xs = [x0, x1, x2];
        let fv: Vec<C64> = (0..3)
            .map(|i| report.eval_factor(i, xs[i]).expect("shapes"))
            .collect();
        let grad: Vec<C64> = partials.iter().map(|p| ev(p, &point)).collect();
        if fv.iter().any(|z| z.norm() < 1e-8) || grad.iter().any(|z| z.norm() < 1e-8) {
            out.skipped += 1;
            continue;
        }
        let mut dx = [C64::new(0.0, 0.0); 3];
        if freeze_first {
            dx[1] = complex(rng, 1.0);
            dx[2] = -grad[1] * dx[1] / grad[2];
        } else {
            dx[1] = complex(rng, 1.0);
            dx[2] = complex(rng, 1.0);
            dx[0] = -(grad[1] * dx[1] + grad[2] * dx[2]) / grad[0];
        }
        let terms: Vec<C64> = (0..3).map(|i| dx[i] / fv[i].sqrt()).collect();
        let scale: f64 = terms.iter().map(|t| t.norm()).sum();
        let best = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|(e1, e2)| (terms[0] + *e1 * terms[1] + *e2 * terms[2]).norm() / scale)
            .fold(f64::INFINITY, f64::min);
        out.tested += 1;
        out.max_residual = out.max_residual.max(best);
        if best < tol {
            out.passed += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub enum FamilyFit {
    Member(PencilSpec),
    /// The candidate spec read off `K` and the nonzero difference `F − F_spec`.
    NotMember {
        candidate: PencilSpec,
        difference: MultiPoly,
    },
}

/// Matches a symmetric `F(s, x₁, x₂)` with leading coefficient `(x₁−x₂)²`
/// against the pencil family. The pencil coefficients are read off `K`; `H` is then checked.
pub fn symmetric_family_fit(
    f: &MultiPoly,
    s: &str,
    x1: &str,
    x2: &str,
) -> Result<FamilyFit, SepError> {
    let f = f.with_vars(&[s, x1, x2])?;
    let (ax1, ax2) = (MultiPoly::var(x1, &[]), MultiPoly::var(x2, &[]));
    if f.coeff_of(s, 2) != (&ax1 - &ax2).pow(2) || f.degree_in(s) != 2 {
        return Err(SepError::Precondition(
            "leading coefficient must be (x1-x2)^2".into(),
        ));
    }
    if !f.is_symmetric_in(x1, x2) {
        return Err(SepError::Precondition(
            "F must be symmetric in x1, x2".into(),
        ));
    }
    let k = f.coeff_of(s, 1);
    let kc = |i: u32, j: u32| -> Rational {
        let m = k.coeff_of(x1, i).coeff_of(x2, j);
        let c = m
            .terms()
            .next()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero);
        c
    };
    let spec = PencilSpec::new([
        -kc(2, 2),
        kc(2, 1) / int(2),
        -kc(1, 1) / int(4),
        kc(1, 0) / int(2),
        -kc(0, 0),
        -kc(2, 0),
    ]);
    let g = pencil_f_darboux(&spec)
        .f
        .rename("s", s)
        .rename("x1", x1)
        .rename("x2", x2);
    let difference = &f - &g;
    Ok(if difference.is_zero() {
        FamilyFit::Member(spec)
    } else {
        FamilyFit::NotMember {
            candidate: spec,
            difference,
        }
    })
}

#[derive(Clone, Debug)]
pub struct Symmetrizer {
    /// `x₁ ← α(x₁)` makes `f₁∘α` proportional to `f₂` after clearing denominators.
    pub alpha: MoebiusC,
    /// Largest relative deviation of `f₁(α(x))(cx+d)⁴ / f₂(x)` from a constant.
    pub ratio_deviation: f64,
    pub root_residual: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetrizeError {
    #[error("no Möbius map matches the factor roots (best residual {0:.3e})")]
    NoMatch(f64),
    #[error("symmetrization needs quartic factors with simple roots")]
    NotQuartic,
    #[error(transparent)]
    Sep(#[from] SepError),
}

fn roots_of(p: &MultiPoly, v: &str) -> Vec<C64> {
    let coeffs = p.univariate_coeffs(v).expect("univariate");
    let desc: Vec<C64> = coeffs.iter().rev().map(to_c64).collect();
    poly_roots(&desc)
}

/// Möbius `α` on `x₁` such that `F(s, α(x₁), x₂)` is symmetrically
/// separable, found by matching the roots of `f₂` to those of `f₁`.
pub fn symmetrize(f: &MultiPoly, vars: [&str; 3]) -> Result<Symmetrizer, SymmetrizeError> {
    let report = check_separable(f, Some(vars))?;
    let shapes = match (&report.shapes, report.verdict.is_separable()) {
        (Some(s), true) => s.clone(),
        _ => {
            return Err(
                SepError::Precondition("polynomial is not discriminantly separable".into()).into(),
            )
        }
    };
    let (g1, g2) = (&shapes[1], &shapes[2]);
    if report.verdict == Verdict::Symmetrically || report.verdict == Verdict::Strongly {
        return Ok(Symmetrizer {
            alpha: MoebiusC::identity(),
            ratio_deviation: 0.0,
            root_residual: 0.0,
        });
    }
    match_quartics(g1, vars[1], g2, vars[2])
}

/// Möbius `α` with `f₁(α(x))·(cx+d)⁴ ∝ f₂(x)` for quartics `f₁(v1)`, `f₂(v2)`.
/// Exists exactly when the root sets have matching cross-ratios.
pub fn match_quartics(
    g1: &MultiPoly,
    v1: &str,
    g2: &MultiPoly,
    v2: &str,
) -> Result<Symmetrizer, SymmetrizeError> {
    if g1.degree_in(v1) != 4 || g2.degree_in(v2) != 4 {
        return Err(SymmetrizeError::NotQuartic);
    }
    let r1 = roots_of(g1, v1);
    let r2 = roots_of(g2, v2);
    let scale = r1.iter().chain(&r2).map(|z| z.norm()).fold(1.0, f64::max);
    let mut best: Option<(f64, MoebiusC)> = None;
    for perm in permutations4() {
        let w = [r1[perm[0]], r1[perm[1]], r1[perm[2]]];
        let Some(m) = MoebiusC::from_three_points([r2[0], r2[1], r2[2]], w) else {
            continue;
        };
        let img: Vec<C64> = r2
            .iter()
            .map(|&z| m.apply(Some(z)).unwrap_or(C64::new(f64::INFINITY, 0.0)))
            .collect();
        let res = multiset_distance_finite(&img, &r1) / scale;
        if best.as_ref().is_none_or(|(b, _)| res < *b) {
            best = Some((res, m));
        }
    }
    let (root_residual, alpha) = best.ok_or(SymmetrizeError::NoMatch(f64::INFINITY))?;
    if root_residual > 1e-8 {
        return Err(SymmetrizeError::NoMatch(root_residual));
    }
    let probe = [
        C64::new(0.31, 0.7),
        C64::new(-1.2, 0.4),
        C64::new(0.9, -1.1),
        C64::new(2.3, 0.2),
    ];
    let ratio = |x: C64| {
        let y = alpha.apply(Some(x)).expect("finite probe");
        eval_univariate(g1, v1, y) * (alpha.c * x + alpha.d).powu(4) / eval_univariate(g2, v2, x)
    };
    let r0 = ratio(probe[0]);
    let ratio_deviation = probe
        .iter()
        .map(|&x| ((ratio(x) - r0) / r0).norm())
        .fold(0.0, f64::max);
    Ok(Symmetrizer {
        alpha,
        ratio_deviation,
        root_residual,
    })
}

fn permutations4() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if a != b && b != c && a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// `p₂(z, x, y) = (x + y + z)² − 4(xy + yz + zx)`.
pub fn p2_poly() -> MultiPoly {
    let (z, x, y) = (
        MultiPoly::var("z", &[]),
        MultiPoly::var("x", &[]),
        MultiPoly::var("y", &[]),
    );
    let sum = &(&x + &y) + &z;
    let pair = &(&(&x * &y) + &(&y * &z)) + &(&z * &x);
    (&sum.pow(2) - &pair.scale(&int(4)))
        .with_vars(&["z", "x", "y"])
        .expect("context")
}
