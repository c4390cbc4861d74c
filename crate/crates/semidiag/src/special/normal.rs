//! Standard normal CDF, density, and quantile.

use crate::error::{Error, Result};
use crate::special::gamma_fn::{reg_lower_gamma, reg_upper_gamma};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density φ(z).
pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Complementary error function for x ≥ 0, via the regularized incomplete
/// gamma function: erfc(x) = Q(1/2, x²).
fn erfc_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let x2 = x * x;
    if x2 < 1.5 {
        1.0 - reg_lower_gamma(0.5, x2)
    } else {
        reg_upper_gamma(0.5, x2)
    }
}

/// Standard normal CDF Φ(z).
///
/// Symmetric by construction: both tails evaluate the same erfc expression,
/// so Φ(-z) = 1 - Φ(z) holds to machine precision.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let u = z * std::f64::consts::FRAC_1_SQRT_2;
    if z < 0.0 {
        0.5 * erfc_nonneg(-u)
    } else {
        1.0 - 0.5 * erfc_nonneg(u)
    }
}

/// Standard normal quantile Φ⁻¹(u) for u in (0, 1).
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "normal_quantile requires u in (0,1), got {u}"
        )));
    }
    Ok(normal_quantile_unchecked(u))
}

/// Acklam's rational approximation (|err| < 1.2e-9) refined with one Newton
/// step against `normal_cdf`, which pins the CDF/quantile round trip to the
/// accuracy of the CDF itself.
pub(crate) fn normal_quantile_unchecked(u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0);
    let z = acklam(u);
    // One Newton step: z - (Φ(z) - u)/φ(z)
    let pdf = normal_pdf(z);
    if pdf > 0.0 {
        z - (normal_cdf(z) - u) / pdf
    } else {
        z
    }
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
