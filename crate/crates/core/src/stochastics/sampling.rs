use crate::error::{Error, Result};

use super::linalg::{cholesky, SymMatrix};
use super::rng::RngStream;

/// One draw from `N(mean, cov)` as `mean + L z`.
pub fn sample_mvnorm(rng: &mut RngStream, mean: &[f64], cov: &SymMatrix) -> Result<Vec<f64>> {
    if mean.len() != cov.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            got: mean.len(),
        });
    }
    let l = cholesky(cov)?;
    let z: Vec<f64> = (0..mean.len()).map(|_| rng.standard_normal()).collect();
    Ok(l.mul_vec(&z).iter().zip(mean).map(|(a, m)| a + m).collect())
}

/// One Wishart draw with density `∝ |W|^{(ν−p−1)/2} exp(−tr(Σ⁻¹W)/2)`,
/// so `E[W] = ν Σ`.
///
/// Bartlett construction: `T` is lower triangular with `T_ii² ∼ χ²(ν − i)`
/// and standard normal entries below the diagonal; `W = L T Tᵀ Lᵀ` with
/// `Σ = L Lᵀ`. Valid for non-integer `ν ≥ p`.
pub fn sample_wishart(rng: &mut RngStream, dof: f64, scale: &SymMatrix) -> Result<SymMatrix> {
    let p = scale.dim();
    if !(dof >= p as f64) {
        return Err(Error::DofTooSmall { dof, dim: p });
    }
    let l = cholesky(scale)?;
    let mut t = vec![0.0; p * p];
    for i in 0..p {
        t[i * p + i] = rng.chi_squared(dof - i as f64).sqrt();
        for j in 0..i {
            t[i * p + j] = rng.standard_normal();
        }
    }
    Ok(l.congruence_lower(&t))
}

/// Linear-interpolation quantile (R type 7) of unsorted draws.
pub fn empirical_quantile(draws: &[f64], q: f64) -> Result<f64> {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

/// As [`empirical_quantile`] for input already sorted ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    let m = sorted.len();
    // zero-based h = (m − 1) q
    let h = (m - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= m {
        return Ok(sorted[m - 1]);
    }
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

/// Standard normal quantile, Wichura's AS 241 (PPND16); relative accuracy
/// about 1e-16 over the open unit interval.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&PPND_A, r) / poly(&PPND_B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&PPND_C, r) / poly(&PPND_D, r)
    } else {
        let r = r - 5.0;
        poly(&PPND_E, r) / poly(&PPND_F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

const PPND_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const PPND_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545e3,
];
const PPND_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const PPND_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const PPND_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const PPND_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];
