use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

// Rational approximation of the normal quantile (P. J. Acklam), relative
// error about 1.2e-9 before refinement.
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

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// The `p`-th standard normal quantile, accurate to about 1e-15 after one
/// Halley step. Exactly antisymmetric: `z(1 - p) == -z(p)` whenever `1 - p`
/// is computed without rounding.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        Ok(-lower_quantile(1.0 - p))
    } else {
        Ok(lower_quantile(p))
    }
}

// p in (0, 0.5]
fn lower_quantile(p: f64) -> f64 {
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    if x == 0.0 {
        return x;
    }
    let e = std_normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Upper tail `P(X > x)` of a chi-square variable with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: u32) -> Result<f64> {
    if dof == 0 {
        return Err(Error::domain("chi-square needs at least one degree of freedom"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("chi-square tail needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(upper_incomplete_gamma(0.5 * f64::from(dof), 0.5 * x, ln_gamma_half(dof)).clamp(0.0, 1.0))
}

/// ln Γ(dof / 2), exact up to rounding via the recursion Γ(a + 1) = a Γ(a).
fn ln_gamma_half(dof: u32) -> f64 {
    let (mut a, mut acc) = if dof.is_multiple_of(2) {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * PI.ln())
    };
    let target = 0.5 * f64::from(dof);
    while a < target {
        acc += f64::ln(a);
        a += 1.0;
    }
    acc
}

/// Regularized upper incomplete gamma Q(a, x).
fn upper_incomplete_gamma(a: f64, x: f64, ln_gamma_a: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;
    let prefactor = (-x + a * x.ln() - ln_gamma_a).exp();
    if x < a + 1.0 {
        // series for P(a, x)
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        1.0 - sum * prefactor
    } else {
        // modified Lentz continued fraction for Q(a, x)
        let tiny = f64::MIN_POSITIVE / EPS;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        prefactor * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    // Oracle: Φ by quadrature of the density, inverted by bisection.
    fn oracle_normal_quantile(p: f64) -> f64 {
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
        let cdf = |x: f64| 0.5 + if x >= 0.0 { simpson(pdf, 0.0, x, 20_000) } else { -simpson(pdf, x, 0.0, 20_000) };
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..80 {
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
    fn normal_quantile_examples() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        let oracle = oracle_normal_quantile(0.1);
        assert!((oracle + 1.281_551_565_5).abs() < 1e-9, "oracle {oracle}");
        assert!((std_normal_quantile(0.1).unwrap() - oracle).abs() < 1e-9);
        assert!((std_normal_quantile(0.9).unwrap() + oracle).abs() < 1e-9);
    }

    #[test]
    fn normal_quantile_matches_quadrature_oracle() {
        for &p in &[1e-6, 1e-3, 0.01, 0.024, 0.025, 0.2, 0.4, 0.75, 0.975, 0.999] {
            let z = std_normal_quantile(p).unwrap();
            let o = oracle_normal_quantile(p);
            assert!((z - o).abs() < 1e-9, "p={p}: {z} vs {o}");
        }
    }

    #[test]
    fn normal_quantile_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(std_normal_quantile(p), Err(Error::Domain(_))));
        }
    }

    fn oracle_chi_square_sf(x: f64, dof: u32) -> f64 {
        let k = f64::from(dof);
        let norm = (ln_gamma_oracle(0.5 * k) + 0.5 * k * 2f64.ln()).exp();
        // substitute t = s^2 to tame the dof=1 endpoint singularity
        let f = |s: f64| 2.0 * s.powf(k - 1.0) * (-0.5 * s * s).exp() / norm;
        1.0 - simpson(f, 0.0, x.sqrt(), 200_000)
    }

    fn ln_gamma_oracle(a: f64) -> f64 {
        // Stirling with enough terms after shifting upward
        let mut shift = 0.0;
        let mut z = a;
        while z < 20.0 {
            shift -= z.ln();
            z += 1.0;
        }
        shift + (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3))
            + 1.0 / (1260.0 * z.powi(5))
    }

    #[test]
    fn chi_square_examples() {
        for k in 1..=16 {
            assert_eq!(chi_square_sf(0.0, k).unwrap(), 1.0);
        }
        let o1 = oracle_chi_square_sf(3.8415, 1);
        assert!((o1 - 0.05).abs() < 1e-4);
        assert!((chi_square_sf(3.8415, 1).unwrap() - o1).abs() < 1e-8);
        let s2 = chi_square_sf(5.9915, 2).unwrap();
        assert!((s2 - (-5.9915f64 / 2.0).exp()).abs() < 1e-12);
        assert!((s2 - 0.05).abs() < 1e-4);
    }

    #[test]
    fn chi_square_matches_quadrature_oracle() {
        for &dof in &[1, 2, 3, 4, 6, 9, 16] {
            for &x in &[0.01, 0.5, 1.0, 2.5, 4.0, 7.5, 12.0, 20.0, 35.0] {
                let got = chi_square_sf(x, dof).unwrap();
                let want = oracle_chi_square_sf(x, dof);
                assert!((got - want).abs() < 1e-8, "dof={dof} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn chi_square_domain() {
        assert!(chi_square_sf(-1.0, 2).is_err());
        assert!(chi_square_sf(1.0, 0).is_err());
        assert_eq!(chi_square_sf(f64::INFINITY, 3).unwrap(), 0.0);
    }

    #[test]
    fn chi_square_monotone_grid() {
        for &dof in &[1, 2, 3, 6] {
            let mut prev = 1.0;
            for i in 0..100 {
                let x = i as f64 * 0.4;
                let s = chi_square_sf(x, dof).unwrap();
                assert!(s <= prev, "dof={dof} x={x}");
                prev = s;
            }
        }
    }

    #[test]
    fn dof_one_closed_form() {
        // P(χ²₁ > x) = erfc(sqrt(x/2))
        for &x in &[0.1, 1.0, 4.0, 9.0] {
            let want = libm::erfc((x / 2.0f64).sqrt());
            assert!((chi_square_sf(x, 1).unwrap() - want).abs() < 1e-13);
        }
    }
}
