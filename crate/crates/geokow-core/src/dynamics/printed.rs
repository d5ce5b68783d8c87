//! The vector fields exactly as printed, for the `K = 1`, `K = 0` and
//! perturbed families. They share the `ė`, `ẋ` lines with [`System::field`]
//! and differ in `ṙ` or `ġ`; see the tests for where they disagree.

use crate::numeric::C64;

use super::{AlphaBeta, DynError, GenState, System};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrintedFamily {
    /// `K = 1` with the pencil coefficients `a₁, a₅`.
    K1 {
        a1: f64,
        a5: f64,
    },
    K0,
    Perturbed {
        a1: f64,
        a5: f64,
    },
}

pub fn printed_field(
    st: &GenState,
    fam: PrintedFamily,
    c: C64,
    ab: &AlphaBeta,
) -> Result<GenState, DynError> {
    if c.norm() == 0.0 {
        return Err(DynError::ZeroC);
    }
    if st.r.norm() == 0.0 {
        return Err(DynError::Singular("r"));
    }
    if st.g.norm() == 0.0 {
        return Err(DynError::Singular("g"));
    }
    let (alpha, beta) = ab.eval(st);
    let GenState {
        e1,
        e2,
        x1,
        x2,
        r,
        g,
    } = *st;
    let de1 = -alpha * e1;
    let de2 = alpha * e2;
    let dx1 = -beta * (r * x1 + c * g);
    let dx2 = beta * (r * x2 + c * g);
    let tail = (2.0 * r * beta - alpha) / (2.0 * c * c * g) * (e1 * x2 * x2 - e2 * x1 * x1);
    let (dr, dg) = match fam {
        PrintedFamily::K1 { a1, a5 } => (
            -beta * (x2 - x1) * (x1 + x2 + a1) - alpha / (2.0 * r) * (e1 - e2),
            beta / (2.0 * c) * ((x2 - x1) * (x1 * x2 - a5) + e1 * x2 - e2 * x1) + tail,
        ),
        PrintedFamily::K0 => (-alpha / (2.0 * r) * (e1 - e2), 2.0 * beta * c + tail),
        PrintedFamily::Perturbed { a1, a5 } => (
            -alpha / (2.0 * r) * (e1 - e2) - a1 / 2.0 * beta * (x2 - x1),
            2.0 * beta * c + tail + a5 / 2.0 * c * beta * (x2 - x1),
        ),
    };
    Ok(GenState {
        e1: de1,
        e2: de2,
        x1: dx1,
        x2: dx2,
        r: dr,
        g: dg,
    })
}

/// Componentwise `|printed − derived|`, relative to the derived magnitude.
pub fn compare_with_derived(
    sys: &System,
    fam: PrintedFamily,
    st: &GenState,
) -> Result<[f64; 6], DynError> {
    let a = printed_field(st, fam, sys.c, &sys.ab)?.to_array();
    let b = sys.field(st)?.to_array();
    Ok(std::array::from_fn(|i| {
        (a[i] - b[i]).norm() / b[i].norm().max(1.0)
    }))
}
