use crate::{Error, Result};

// Acklam's rational approximation to the standard normal quantile,
// |relative error| < 1.15e-9 over (0, 1).
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
const P_LOW: f64 = 0.024_25;

fn tail(q: f64) -> f64 {
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

/// One-sided standard normal quantile `Φ⁻¹(p)`.
pub fn normal_ppf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    let z = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    Ok(z)
}

/// Two-sided z-value for a centered interval with the given coverage.
///
/// Returns `Φ⁻¹((1 + coverage) / 2)`, so `0.95` maps to `1.959964`.
pub fn std_normal_quantile(coverage: f64) -> Result<f64> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::Domain(format!("coverage must lie in (0, 1), got {coverage}")));
    }
    normal_ppf(0.5 + 0.5 * coverage)
}

/// Standard normal CDF, accurate to about 1.2e-7 relative.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

// Chebyshev-fitted complementary error function (Numerical Recipes `erfcc`).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let ans = t * poly.exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::erf::erf;

    // Independent oracle: bisection on an erf-based CDF.
    fn oracle_ppf(p: f64) -> f64 {
        let cdf = |x: f64| 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2));
        let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn reference_values() {
        assert!((std_normal_quantile(0.95).unwrap() - 1.959964).abs() < 1e-6);
        assert!((std_normal_quantile(0.6827).unwrap() - 1.0).abs() < 1e-3);
        // Frozen from the bisection oracle: Φ⁻¹(0.995) = 2.5758293035489.
        assert!((std_normal_quantile(0.99).unwrap() - 2.575829).abs() < 1e-6);
        assert!((oracle_ppf(0.995) - 2.575_829_303_548_9).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        for c in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(std_normal_quantile(c), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn agrees_with_oracle_across_range() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let z = normal_ppf(p).unwrap();
            assert!((z - oracle_ppf(p)).abs() < 1e-7, "p = {p}");
        }
    }

    #[test]
    fn strictly_increasing() {
        let mut prev = 0.0;
        for i in 1..2000 {
            let z = std_normal_quantile(i as f64 / 2000.0).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn cdf_inverts_quantile() {
        for p in [0.001, 0.02, 0.3, 0.5, 0.77, 0.99, 0.9999] {
            let x = normal_ppf(p).unwrap();
            assert!((normal_cdf(x) - p).abs() < 2e-7 * p.max(0.01));
        }
        assert!((normal_cdf(1.3) - 0.903_199_515_414_389_7).abs() < 1e-7);
    }
}
