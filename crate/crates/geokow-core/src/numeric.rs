//! Complex floating point helpers: polynomial roots, multiset matching and
//! fractional linear maps.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Horner evaluation of descending coefficients.
pub fn polyval(desc: &[C64], x: C64) -> C64 {
    desc.iter().fold(c(0.0, 0.0), |acc, a| acc * x + a)
}

pub fn polyder(desc: &[C64]) -> Vec<C64> {
    let n = desc.len().saturating_sub(1);
    desc.iter()
        .take(n)
        .enumerate()
        .map(|(k, a)| a * (n - k) as f64)
        .collect()
}

/// Roots of `a z² + b z + c` without cancellation.
pub fn quadratic_roots(a: C64, b: C64, cc: C64) -> [C64; 2] {
    let disc = (b * b - 4.0 * a * cc).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        return [c(0.0, 0.0), c(0.0, 0.0)];
    }
    [q / a, cc / q]
}

/// All complex roots of a polynomial given by descending coefficients.
/// Leading zeros are dropped. Uses the companion matrix eigenvalues and a
/// few Newton polishing steps.
pub fn poly_roots(desc: &[C64]) -> Vec<C64> {
    let start = desc
        .iter()
        .position(|a| a.norm() > 0.0)
        .unwrap_or(desc.len());
    let p = &desc[start..];
    let n = p.len().saturating_sub(1);
    match n {
        0 => vec![],
        1 => vec![-p[1] / p[0]],
        2 => quadratic_roots(p[0], p[1], p[2]).to_vec(),
        _ => {
            let mut m = DMatrix::<C64>::zeros(n, n);
            for j in 0..n {
                m[(0, j)] = -p[j + 1] / p[0];
            }
            for i in 1..n {
                m[(i, i - 1)] = c(1.0, 0.0);
            }
            // Complex Schur form is upper triangular; eigenvalues sit on the diagonal.
            let (_, t) = m.schur().unpack();
            let eig = t.diagonal();
            let dp = polyder(p);
            eig.iter()
                .map(|&z0| {
                    let mut z = z0;
                    for _ in 0..3 {
                        let d = polyval(&dp, z);
                        if d.norm() == 0.0 {
                            break;
                        }
                        let step = polyval(p, z) / d;
                        if !step.is_finite() {
                            break;
                        }
                        z -= step;
                    }
                    if z.is_finite() {
                        z
                    } else {
                        z0
                    }
                })
                .collect()
        }
    }
}

/// Total order on complex numbers: real part, then imaginary part, with
/// values within `tol` treated as equal in each component.
pub fn cmp_complex(a: &C64, b: &C64, tol: f64) -> std::cmp::Ordering {
    let key = |x: f64, y: f64| {
        if (x - y).abs() <= tol {
            std::cmp::Ordering::Equal
        } else {
            x.total_cmp(&y)
        }
    };
    key(a.re, b.re).then_with(|| key(a.im, b.im))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Distance between two small multisets: the maximal pair distance under the
/// matching that minimises the total distance. Infinite values (`None`)
/// match only each other.
pub fn multiset_distance(a: &[Option<C64>], b: &[Option<C64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let d = |x: &Option<C64>, y: &Option<C64>| match (x, y) {
        (None, None) => 0.0,
        (Some(x), Some(y)) => (x - y).norm(),
        _ => f64::INFINITY,
    };
    let mut best = (f64::INFINITY, f64::INFINITY);
    for p in permutations(a.len()) {
        let ds: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(i, &j)| d(&a[i], &b[j]))
            .collect();
        let sum: f64 = ds.iter().sum();
        let max = ds.iter().cloned().fold(0.0, f64::max);
        if sum < best.0 || (sum == best.0 && max < best.1) {
            best = (sum, max);
        }
    }
    best.1
}

pub fn multiset_distance_finite(a: &[C64], b: &[C64]) -> f64 {
    let wrap = |v: &[C64]| v.iter().map(|z| Some(*z)).collect::<Vec<_>>();
    multiset_distance(&wrap(a), &wrap(b))
}

/// Complex fractional linear map `z ↦ (a z + b)/(c z + d)` on the Riemann
/// sphere; `None` stands for ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusC {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MoebiusC {
    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: Option<C64>) -> Option<C64> {
        match z {
            None => {
                if self.c.norm() == 0.0 {
                    None
                } else {
                    Some(self.a / self.c)
                }
            }
            Some(z) => {
                let den = self.c * z + self.d;
                if den.norm() <= 1e-300 {
                    None
                } else {
                    Some((self.a * z + self.b) / den)
                }
            }
        }
    }

    pub fn derivative(&self, z: C64) -> C64 {
        self.det() / (self.c * z + self.d).powu(2)
    }

    pub fn inverse(&self) -> Self {
        MoebiusC {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn identity() -> Self {
        MoebiusC {
            a: c(1.0, 0.0),
            b: c(0.0, 0.0),
            c: c(0.0, 0.0),
            d: c(1.0, 0.0),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &MoebiusC) -> Self {
        MoebiusC {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// The map sending finite distinct `z₁, z₂, z₃` to `0, 1, ∞`.
    pub fn to_zero_one_infinity(z: [C64; 3]) -> Option<Self> {
        let [z1, z2, z3] = z;
        let m = MoebiusC {
            a: z2 - z3,
            b: -z1 * (z2 - z3),
            c: z2 - z1,
            d: -z3 * (z2 - z1),
        };
        if m.det().norm() == 0.0 {
            None
        } else {
            Some(m)
        }
    }

    /// The map sending finite distinct `z₁, z₂, z₃` to finite distinct `w₁, w₂, w₃`.
    pub fn from_three_points(z: [C64; 3], w: [C64; 3]) -> Option<Self> {
        let mz = Self::to_zero_one_infinity(z)?;
        let mw = Self::to_zero_one_infinity(w)?;
        Some(mw.inverse().compose(&mz))
    }

    /// The map sending `∞, p1, p2` to `q0, q1, q2` (with `q0` finite).
    pub fn from_infinity_and_two(q0: C64, p1: C64, q1: C64, p2: C64, q2: C64) -> Option<Self> {
        // z ↦ (q0 z + b)/(z + d):  b − q_i d = (q_i − q0) p_i
        let (r1, r2) = ((q1 - q0) * p1, (q2 - q0) * p2);
        let det = q2 - q1;
        if det.norm() == 0.0 {
            return None;
        }
        let d = (r1 - r2) / det;
        let b = r1 + q1 * d;
        let m = MoebiusC {
            a: q0,
            b,
            c: c(1.0, 0.0),
            d,
        };
        if m.det().norm() == 0.0 {
            None
        } else {
            Some(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_known_quartic() {
        // (x−1)(x+2)(x−i)(x+i) = x⁴ + x³ − x² + x − 2
        let p = [real(1.0), real(1.0), real(-1.0), real(1.0), real(-2.0)];
        let r = poly_roots(&p);
        let want = [real(1.0), real(-2.0), c(0.0, 1.0), c(0.0, -1.0)];
        assert!(multiset_distance_finite(&r, &want) < 1e-12);
    }

    #[test]
    fn quadratic_without_cancellation() {
        let r = quadratic_roots(real(1.0), real(-1e8), real(1.0));
        assert!(multiset_distance_finite(&r, &[real(1e8), real(1e-8)]) < 1e-6);
        assert!((r[1] - real(1e-8)).norm() < 1e-20 || (r[0] - real(1e-8)).norm() < 1e-20);
    }

    #[test]
    fn multiset_handles_infinity() {
        let a = [Some(real(1.0)), None];
        let b = [None, Some(real(1.0))];
        assert_eq!(multiset_distance(&a, &b), 0.0);
        assert!(multiset_distance(&a, &[Some(real(1.0)), Some(real(1.0))]).is_infinite());
    }

    #[test]
    fn moebius_three_point() {
        let m = MoebiusC::from_infinity_and_two(
            real(2.0),
            real(0.0),
            real(5.0),
            real(1.0),
            c(0.0, 1.0),
        )
        .unwrap();
        assert!((m.apply(None).unwrap() - real(2.0)).norm() < 1e-14);
        assert!((m.apply(Some(real(0.0))).unwrap() - real(5.0)).norm() < 1e-14);
        assert!((m.apply(Some(real(1.0))).unwrap() - c(0.0, 1.0)).norm() < 1e-14);
        let z = c(0.3, -0.7);
        assert!((m.inverse().apply(m.apply(Some(z))).unwrap() - z).norm() < 1e-13);
    }

    #[test]
    fn three_point_maps() {
        let z = [real(0.0), real(1.0), c(2.0, 1.0)];
        let w = [c(1.0, 1.0), real(-3.0), c(0.5, -2.0)];
        let m = MoebiusC::from_three_points(z, w).unwrap();
        for i in 0..3 {
            assert!((m.apply(Some(z[i])).unwrap() - w[i]).norm() < 1e-13);
        }
        let id = MoebiusC::identity().compose(&m);
        assert_eq!(id, m);
    }

    #[test]
    fn complex_order() {
        use std::cmp::Ordering::*;
        assert_eq!(cmp_complex(&c(1.0, 5.0), &c(2.0, 0.0), 1e-12), Less);
        assert_eq!(
            cmp_complex(&c(1.0, -1.0), &c(1.0 + 1e-14, 1.0), 1e-12),
            Less
        );
    }
}
