//! Fresnel reflection products at imaginary frequency and the Lifshitz
//! integrand in the variable `y = q a`.

use super::LifshitzError;

/// Products of the two interface reflection coefficients for each
/// polarization. For identical media these are the squared single-interface
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionProduct {
    pub tm: f64,
    pub te: f64,
}

/// Single-interface coefficients `(Δᵀᴹ, Δᵀᴱ)` for a half-space of permittivity
/// `eps` at `p ≥ 1`.
///
/// `s − p` is evaluated as `(ε − 1)/(s + p)` and `εp − s` as
/// `(ε − 1)((ε + 1)p² − 1)/(εp + s)`; both differences otherwise cancel
/// catastrophically, for `p ≫ √ε` and for `ε → 1` respectively.
pub fn interface_coefficients(eps: f64, p: f64) -> (f64, f64) {
    let excess = eps - 1.0;
    let s = (excess + p * p).sqrt();
    let te = excess / ((s + p) * (s + p));
    let ep = eps * p;
    let tm = if eps < 1e100 {
        excess * ((eps + 1.0) * p * p - 1.0) / ((ep + s) * (ep + s))
    } else {
        let r = s / ep;
        (1.0 - r) / (1.0 + r)
    };
    (tm, te)
}

fn check_inputs(eps1: f64, eps3: f64, p: f64) -> Result<(), LifshitzError> {
    for eps in [eps1, eps3] {
        if !(eps >= 1.0) || eps.is_infinite() {
            return Err(LifshitzError::Domain(format!(
                "permittivity must be finite and >= 1, got {eps}"
            )));
        }
    }
    if !(p >= 1.0) || p.is_infinite() {
        return Err(LifshitzError::Domain(format!(
            "p = {p} is below the light line (p must be >= 1)"
        )));
    }
    Ok(())
}

/// `Δ₁Δ₂` for TM and TE between half-spaces `eps1` and `eps3` across vacuum.
pub fn reflection_product(eps1: f64, eps3: f64, p: f64) -> Result<ReflectionProduct, LifshitzError> {
    check_inputs(eps1, eps3, p)?;
    let (tm1, te1) = interface_coefficients(eps1, p);
    let (tm3, te3) = interface_coefficients(eps3, p);
    Ok(ReflectionProduct {
        tm: tm1 * tm3,
        te: te1 * te3,
    })
}

/// `(A_m, B_m)` for two identical half-spaces, built as the squares of the
/// single-interface coefficients.
pub fn similar_reflection(eps: f64, p: f64) -> Result<ReflectionProduct, LifshitzError> {
    check_inputs(eps, eps, p)?;
    let (tm, te) = interface_coefficients(eps, p);
    Ok(ReflectionProduct {
        tm: tm.powi(2),
        te: te.powi(2),
    })
}

/// TM and TE parts of `y² Δ e^{−2y} / (1 − Δ e^{−2y})`.
pub(crate) fn integrand_parts(y: f64, rp: ReflectionProduct) -> Result<[f64; 2], LifshitzError> {
    let decay = (-2.0 * y).exp();
    // 1 − Δ e^{−2y} = (1 − Δ) − Δ (e^{−2y} − 1)
    let one_minus_decay = -(-2.0 * y).exp_m1();
    let part = |r: f64| -> Result<f64, LifshitzError> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let denom = (1.0 - r) + r * one_minus_decay;
        if !(denom > 0.0) {
            return Err(LifshitzError::Singular { y, reflection: r });
        }
        Ok(y * y * r * decay / denom)
    };
    Ok([part(rp.tm)?, part(rp.te)?])
}

/// Lifshitz integrand summed over both polarizations.
pub fn integrand(y: f64, rp: ReflectionProduct) -> Result<f64, LifshitzError> {
    if !(y > 0.0) {
        return Err(LifshitzError::Domain(format!("y must be positive, got {y}")));
    }
    let [tm, te] = integrand_parts(y, rp)?;
    Ok(tm + te)
}
