//! Trilogarithm on `[0, 1]`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::ZETA_3;

#[derive(Debug, Clone, Copy, Error, PartialEq)]
#[error("polylog(3, z) requires 0 <= z <= 1, got {0}")]
pub struct PolylogDomainError(pub f64);

/// Argument of [`polylog3`], restricted to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PolylogArg(f64);

impl PolylogArg {
    pub fn new(z: f64) -> Result<Self, PolylogDomainError> {
        if (0.0..=1.0).contains(&z) {
            Ok(Self(z))
        } else {
            Err(PolylogDomainError(z))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PolylogArg {
    type Error = PolylogDomainError;

    fn try_from(z: f64) -> Result<Self, Self::Error> {
        Self::new(z)
    }
}

// Switch from the power series to the expansion about z = 1.
const SERIES_LIMIT: f64 = 0.5;

// B_2, B_4, ..., B_24
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// `Li₃(z) = Σ_{n≥1} zⁿ/n³` for `0 ≤ z ≤ 1`, accurate to about 1e-15.
///
/// For `z ≤ 1/2` the defining series is summed until the next term drops
/// below 1e-17. Closer to 1 that series needs on the order of 10⁵ terms and
/// still leaves a tail of `1/(2N²)`, so the expansion in `μ = ln z` is used:
///
/// `Li₃(e^μ) = ζ(3) + ζ(2) μ + (3/2 − ln(−μ)) μ²/2 + Σ_{k≥3} ζ(3−k) μᵏ/k!`
pub fn polylog3(z: PolylogArg) -> f64 {
    let z = z.0;
    if z == 0.0 {
        return 0.0;
    }
    if z <= SERIES_LIMIT {
        return power_series(z);
    }
    if z == 1.0 {
        return ZETA_3;
    }
    let mu = z.ln();
    let zeta_2 = PI * PI / 6.0;
    let mut sum = ZETA_3 + zeta_2 * mu + (1.5 - (-mu).ln()) * mu * mu / 2.0;

    // k = 3 carries ζ(0) = −1/2; for n = k − 3 ≥ 1, ζ(−n) = −B_{n+1}/(n+1),
    // which vanishes for even n.
    let mut power = mu * mu * mu / 6.0; // μ^k / k!
    sum += -0.5 * power;
    for k in 4..=26usize {
        power *= mu / k as f64;
        let n = k - 3;
        if n % 2 == 0 {
            continue;
        }
        let b = BERNOULLI_EVEN[n.div_ceil(2) - 1];
        sum += -b / (n + 1) as f64 * power;
    }
    sum
}

fn power_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zn = 1.0;
    let mut n = 1u32;
    loop {
        zn *= z;
        let nf = n as f64;
        let term = zn / (nf * nf * nf);
        sum += term;
        if term < 1e-17 {
            break;
        }
        n += 1;
    }
    sum
}
