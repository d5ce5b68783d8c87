//! Dormand–Prince 5(4) integrator with PI step control for complex systems.

use thiserror::Error;

use crate::numeric::C64;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h0: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError<E> {
    #[error("vector field failed at t = {t}: {err}")]
    Field { t: f64, err: E },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step limit reached at t = {t}")]
    TooManySteps { t: f64 },
}

#[derive(Clone, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| *c * k[i]).sum::<C64>())
}

/// States at the output times, or the error with the last accepted state.
pub type OdeResult<const N: usize, E> = Result<(Vec<[C64; N]>, OdeStats), (OdeError<E>, [C64; N])>;

/// Integrates `y' = f(t, y)` from `t_out[0]` and returns the state at every
/// time in `t_out` (non-decreasing). Steps are clipped to land on each
/// output time exactly.
pub fn dopri5<const N: usize, E, F>(
    f: F,
    y0: [C64; N],
    t_out: &[f64],
    opts: &OdeOptions,
) -> OdeResult<N, E>
where
    F: Fn(f64, &[C64; N]) -> Result<[C64; N], E>,
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(t_out.len());
    if t_out.is_empty() {
        return Ok((out, stats));
    }
    let mut t = t_out[0];
    let mut y = y0;
    out.push(y);
    let span = (t_out[t_out.len() - 1] - t).abs().max(f64::MIN_POSITIVE);
    let eval = |t: f64, y: &[C64; N], stats: &mut OdeStats| {
        stats.evaluations += 1;
        f(t, y).map_err(|err| OdeError::Field { t, err })
    };
    let mut k1 = eval(t, &y, &mut stats).map_err(|e| (e, y))?;
    let mut h = opts.h0.unwrap_or_else(|| (span * 1e-3).min(1e-2));
    let mut err_prev: f64 = 1e-4;
    for &target in &t_out[1..] {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err((OdeError::TooManySteps { t }, y));
            }
            let last = target - t <= h * (1.0 + 1e-12);
            let hh = if last { target - t } else { h };
            if hh < 1e-14 * span.max(t.abs()) {
                return Err((OdeError::StepUnderflow { t }, y));
            }
            let run = |stats: &mut OdeStats| -> Result<([C64; N], [C64; N], f64), OdeError<E>> {
                let k2 = eval(t + C2 * hh, &lin(&y, hh, &[(A21, &k1)]), stats)?;
                let k3 = eval(t + C3 * hh, &lin(&y, hh, &[(A31, &k1), (A32, &k2)]), stats)?;
                let k4 = eval(
                    t + C4 * hh,
                    &lin(&y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
                    stats,
                )?;
                let k5 = eval(
                    t + C5 * hh,
                    &lin(&y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                    stats,
                )?;
                let k6 = eval(
                    t + hh,
                    &lin(
                        &y,
                        hh,
                        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    ),
                    stats,
                )?;
                let y_new = lin(
                    &y,
                    hh,
                    &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                );
                let k7 = eval(t + hh, &y_new, stats)?;
                let mut acc = 0.0;
                for i in 0..N {
                    let e = hh
                        * (E1 * k1[i]
                            + E3 * k3[i]
                            + E4 * k4[i]
                            + E5 * k5[i]
                            + E6 * k6[i]
                            + E7 * k7[i]);
                    let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                    acc += (e.norm() / sc).powi(2);
                }
                Ok((y_new, k7, (acc / N as f64).sqrt()))
            };
            let (y_new, k7, err) = match run(&mut stats) {
                Ok(v) => v,
                Err(e) => {
                    // A field failure inside a trial step may be a too-long
                    // step reaching past a singularity; retry smaller first.
                    if hh > 1e-10 * span {
                        h = hh * 0.25;
                        stats.rejected += 1;
                        continue;
                    }
                    return Err((e, y));
                }
            };
            if err <= 1.0 {
                t = if last { target } else { t + hh };
                y = y_new;
                k1 = k7;
                stats.accepted += 1;
                let fac = 0.9 * err.max(1e-10).powf(-0.17) * err_prev.powf(0.04);
                h = hh * fac.clamp(0.2, 5.0);
                err_prev = err.max(1e-4);
            } else {
                stats.rejected += 1;
                let fac = if err.is_finite() {
                    0.9 * err.powf(-0.2)
                } else {
                    0.1
                };
                h = hh * fac.clamp(0.1, 0.9);
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    #[test]
    fn exponential_decay_is_accurate() {
        let lam = c(-1.0, 2.0);
        let (ys, st) = dopri5::<1, (), _>(
            |_, y| Ok([lam * y[0]]),
            [c(1.0, 0.0)],
            &[0.0, 0.5, 1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(ys.len(), 3);
        let exact = (lam * 1.0).exp();
        assert!((ys[2][0] - exact).norm() < 1e-9, "{:?}", ys[2][0] - exact);
        assert!(st.accepted > 0);
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let (ys, st) = dopri5::<2, (), _>(
            |_, y| Ok(*y),
            [c(1.0, 0.0), c(0.0, 1.0)],
            &[0.0, 0.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(ys[0], ys[1]);
        assert_eq!(st.accepted, 0);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let f = |_: f64, y: &[C64; 2]| -> Result<[C64; 2], ()> { Ok([y[1], -y[0]]) };
        let (ys, _) = dopri5(
            f,
            [c(1.0, 0.0), c(0.0, 0.0)],
            &[0.0, 10.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((ys[1][0] - c(10f64.cos(), 0.0)).norm() < 1e-8);
    }

    #[test]
    fn field_error_is_reported_with_last_state() {
        let f = |t: f64, y: &[C64; 1]| if t > 0.5 { Err("singular") } else { Ok([y[0]]) };
        let r = dopri5(f, [c(1.0, 0.0)], &[0.0, 1.0], &OdeOptions::default());
        let (e, last) = r.unwrap_err();
        assert!(matches!(
            e,
            OdeError::Field { .. } | OdeError::StepUnderflow { .. }
        ));
        assert!((last[0] - c(0.5f64.exp(), 0.0)).norm() < 1e-6);
    }
}
