//! Closed-form performance analytics: high-SNR rate difference between block
//! diagonalization and zero-forcing with combining, scheduling-loss bounds,
//! quantization distortion, effective-channel gains, CSI rate-loss bounds and
//! the feedback-bit and training-power scaling laws.

use std::f64::consts::{LN_2, LOG2_E};

use rand::{Rng, SeedableRng};
use statrs::function::gamma::ln_gamma;

use crate::channel::complex_gaussian;

use crate::error::{domain, Error, Result};
use crate::linalg::{gram, hermitian_eigen, inv_hpd, ln_det_hpd, real, CMatrix};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative eigenvalue gap below which the distinct-eigenvalue formulas are
/// refused.
pub const MIN_RELATIVE_GAP: f64 = 1e-6;

/// Ratio of absolute to net magnitude beyond which a signed combinatorial
/// sum is considered to have lost its precision.
const MAX_CANCELLATION: f64 = 1e9;

const FALLBACK_SEED: u64 = 0x5eed;
const FALLBACK_SAMPLES: usize = 200_000;

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct Accumulator {
    sum: f64,
    comp: f64,
    magnitude: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.magnitude += x.abs();
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn cancellation(&self) -> f64 {
        self.magnitude / self.value().abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
    Estimate,
}

/// Named analytic result with echoed inputs.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: String,
    pub direction: Direction,
    pub values: Vec<(String, f64)>,
    pub inputs: Vec<(String, String)>,
}

/// Digamma function at a positive integer.
pub fn digamma(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(domain("digamma needs a positive integer argument"));
    }
    let mut acc = Accumulator::default();
    acc.add(-EULER_GAMMA);
    for k in 1..n {
        acc.add(1.0 / k as f64);
    }
    Ok(acc.value())
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if m == 0 || m >= n {
        return Err(domain(format!("need 1 <= M < N, got N={n}, M={m}")));
    }
    Ok(())
}

fn sorted_ascending(eigs: &[f64]) -> Result<Vec<f64>> {
    if eigs.is_empty() || eigs.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(domain("eigenvalues must be positive and finite"));
    }
    let mut v = eigs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

fn check_distinct(sorted: &[f64]) -> Result<()> {
    for w in sorted.windows(2) {
        if (w[1] - w[0]) < MIN_RELATIVE_GAP * w[1] {
            return Err(Error::IllConditioned(format!(
                "eigenvalues {} and {} are not distinct enough",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Spreads eigenvalues so consecutive ones differ by at least the relative
/// factor `rel`. Because the effective-gain expectations are non-decreasing
/// in every eigenvalue and homogeneous of degree one, the induced bias is at
/// most a relative `(1 + rel)^M - 1`.
pub fn separate_eigenvalues(eigs: &[f64], rel: f64) -> Vec<f64> {
    let mut v = eigs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 1..v.len() {
        let floor = v[i - 1] * (1.0 + rel);
        if v[i] < floor {
            v[i] = floor;
        }
    }
    v
}

/// `N log2(e) / M * sum_{i=1}^{M-1} (M - i) / i`: the expected high-SNR
/// advantage of BD over ZFC on uncorrelated homogeneous channels.
pub fn uncorrelated_bd_advantage(n: usize, m: usize) -> f64 {
    let s: f64 = (1..m).map(|i| (m - i) as f64 / i as f64).sum();
    n as f64 * LOG2_E / m as f64 * s
}

/// Bounds on `z = E{log2 ||c^H H||^2} - psi(N)/ln 2` of an MRC user:
/// `(log2 lambda_max, log2 E{||c^H H||^2} - psi(N)/ln 2)`; repeated
/// eigenvalues are handled as in [`mrc_gain`].
pub fn z_bounds(eigs: &[f64], n: usize) -> Result<(f64, f64)> {
    let sorted = sorted_ascending(eigs)?;
    let top = *sorted.last().unwrap();
    let upper = mrc_gain(&sorted, n)?.log2() - digamma(n as u32)? / LN_2;
    Ok((top.log2(), upper))
}

/// Expected high-SNR sum-rate difference between BD and ZFC with MRC under
/// random selection of `N/M` BD users and `N` ZFC users.
#[derive(Debug, Clone)]
pub struct RateDifference {
    /// Uncorrelated homogeneous part.
    pub base: f64,
    /// `log2` of the product of all BD users' eigenvalues.
    pub bd_correlation: f64,
    /// Difference evaluated with the upper bounds on every `z` (a lower
    /// bound on the difference).
    pub lower: f64,
    /// Difference evaluated with `z = log2 lambda_max` (an upper bound).
    pub upper: f64,
    /// Difference with caller-supplied `z` values, when given.
    pub plugin: Option<f64>,
}

/// `bd_eigs` holds the receive-correlation eigenvalues of each BD user and
/// `zfc_eigs` those of each ZFC user; `z_plugin` optionally supplies
/// measured `z` values for the ZFC users.
pub fn beta_bd_zfc(
    n: usize,
    m: usize,
    bd_eigs: &[Vec<f64>],
    zfc_eigs: &[Vec<f64>],
    z_plugin: Option<&[f64]>,
) -> Result<RateDifference> {
    check_dims(n, m)?;
    if n % m != 0 {
        return Err(domain(format!("N/M must be an integer, got N={n}, M={m}")));
    }
    if bd_eigs.len() != n / m || zfc_eigs.len() != n {
        return Err(domain("need N/M BD users and N ZFC users"));
    }
    let base = uncorrelated_bd_advantage(n, m);
    let mut corr = 0.0;
    for e in bd_eigs {
        if e.len() != m {
            return Err(domain("each BD user needs M eigenvalues"));
        }
        corr += sorted_ascending(e)?.iter().map(|l| l.log2()).sum::<f64>();
    }
    let mut z_low = 0.0;
    let mut z_high = 0.0;
    for e in zfc_eigs {
        let (lo, hi) = z_bounds(e, n)?;
        z_low += lo;
        z_high += hi;
    }
    let plugin = match z_plugin {
        Some(z) if z.len() == n => Some(base + corr - z.iter().sum::<f64>()),
        Some(_) => return Err(domain("need one z value per ZFC user")),
        None => None,
    };
    Ok(RateDifference { base, bd_correlation: corr, lower: base + corr - z_high, upper: base + corr - z_low, plugin })
}

/// Upper bound on the rate difference when all users share eigenvalues:
/// base term plus `N log2(geometric mean / largest eigenvalue)`.
pub fn beta_homogeneous_upper(n: usize, m: usize, eigs: &[f64]) -> Result<f64> {
    check_dims(n, m)?;
    let sorted = sorted_ascending(eigs)?;
    let geo = sorted.iter().map(|l| l.ln()).sum::<f64>() / sorted.len() as f64;
    let top = sorted.last().unwrap().ln();
    Ok(uncorrelated_bd_advantage(n, m) + n as f64 * (geo - top) / LN_2)
}

/// Upper bound with `N/M` strong users (`gamma I`) served by BD and
/// `N - N/M` additional unit-gain users served by ZFC.
pub fn beta_heterogeneous_upper(n: usize, m: usize, gamma: f64) -> Result<f64> {
    check_dims(n, m)?;
    if !(gamma > 0.0) {
        return Err(domain("strong-user gain must be positive"));
    }
    Ok(uncorrelated_bd_advantage(n, m) + (n as f64 - (n / m) as f64) * gamma.log2())
}

/// Exponents of the best-of-`K` scheduling-loss lower bounds,
/// `(BD, ZFC) = (-1/(M(N-M)), -1/(N-M))`.
pub fn scheduling_loss_exponents(n: usize, m: usize) -> Result<(f64, f64)> {
    check_dims(n, m)?;
    Ok((-1.0 / (m * (n - m)) as f64, -1.0 / (n - m) as f64))
}

/// Lower bounds `-M log2(1 - c1 K^{e_BD})` and `-log2(1 - c2 K^{e_ZFC})`
/// on the interference-cancellation loss after picking the best of `K`
/// users; `None` where `K` is too small for the bound to be defined.
pub fn scheduling_loss_bounds(n: usize, m: usize, k: f64, c1: f64, c2: f64) -> Result<(Option<f64>, Option<f64>)> {
    let (e_bd, e_zfc) = scheduling_loss_exponents(n, m)?;
    if !(k >= 1.0) || !(c1 > 0.0) || !(c2 > 0.0) {
        return Err(domain("need K >= 1 and positive constants"));
    }
    let bound = |c: f64, e: f64, scale: f64| {
        let x = c * k.powf(e);
        (x < 1.0).then(|| -scale * (-x).ln_1p() / LN_2)
    };
    Ok((bound(c1, e_bd, m as f64), bound(c2, e_zfc, 1.0)))
}

/// Average squared chordal distance of `B`-bit random subspace quantization
/// of `M`-dimensional row spaces in `C^N`.
pub fn distortion_bd(n: usize, m: usize, bits: f64) -> Result<f64> {
    check_dims(n, m)?;
    let a = (m * (n - m)) as f64;
    let mut ln_inner = bits * LN_2 - ln_factorial(m * (n - m));
    for i in 1..=m {
        ln_inner += ln_factorial(n - i) - ln_factorial(m - i);
    }
    Ok((ln_gamma(1.0 / a) - a.ln() - ln_inner / a).exp())
}

/// Average squared chordal distance under quantization-based combining.
pub fn distortion_qbc(n: usize, m: usize, bits: f64) -> Result<f64> {
    check_dims(n, m)?;
    let d = (n - m) as f64;
    Ok((-bits * LN_2 / d - binomial(n - 1, m - 1).ln() / d).exp())
}

/// Expected effective-channel gain `E{||H^H c||^2}` under quantization-based
/// combining for receive eigenvalues `eigs` (all distinct).
///
/// The gain factors into `N - M + 1` times the mean of
/// `sum xi_i / sum (xi_i / lambda_i)` with i.i.d. unit exponentials; the mean
/// follows from the piecewise CDF of that ratio on each interval between
/// consecutive eigenvalues.
pub fn qbc_gain(eigs: &[f64], n: usize) -> Result<f64> {
    let lam = sorted_ascending(eigs)?;
    let m = lam.len();
    check_dims(n, m)?;
    if m == 1 {
        return Ok(lam[0] * n as f64);
    }
    check_distinct(&lam)?;
    let scale = lam[m - 1];
    let mu: Vec<f64> = lam.iter().map(|l| scale / l).collect();
    // E{X} = lambda_M - integral of the CDF over [lambda_1, lambda_M]; with
    // x = 1/a each piece is a polynomial in x times x^{-2}.
    let mut acc = Accumulator::default();
    acc.add(1.0);
    for iv in 0..m - 1 {
        let (hi, lo) = (mu[iv], mu[iv + 1]);
        let left = iv + 1;
        let k = m - left - 1;
        for nn in 0..left {
            for t in left..m {
                let mut den = mu[nn] - mu[t];
                for i in 0..left {
                    if i != nn {
                        den *= mu[nn] - mu[i];
                    }
                }
                for j in left..m {
                    if j != t {
                        den *= mu[j] - mu[t];
                    }
                }
                for s in 0..=left {
                    for r in 0..=k {
                        let coef = binomial(left, s)
                            * binomial(k, r)
                            * mu[nn].powi((left - s) as i32)
                            * if s % 2 == 0 { 1.0 } else { -1.0 }
                            * (-mu[t]).powi((k - r) as i32);
                        let p = (s + r) as i32;
                        let integral = if p == 1 {
                            (hi / lo).ln()
                        } else {
                            (hi.powi(p - 1) - lo.powi(p - 1)) / (p - 1) as f64
                        };
                        acc.add(-coef * integral / den);
                    }
                }
            }
        }
    }
    if acc.cancellation() > MAX_CANCELLATION {
        return Err(Error::IllConditioned("eigenvalues too close for the QBC gain formula".into()));
    }
    Ok((n - m + 1) as f64 * acc.value() * scale)
}

fn permutations(m: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

/// Expected largest eigenvalue of `H H^H` for `H = R^{1/2} G` with `G` an
/// `M x N` i.i.d. `CN(0,1)` matrix and `R` with distinct eigenvalues `eigs`;
/// this is the mean effective gain `E{||c^H H||^2}` under MRC.
///
/// Integrates one minus the determinantal CDF
/// `det[lambda_j^{N-i+1} gamma(N-i+1, x/lambda_j)] / det(Delta)` term by term
/// after expanding each lower incomplete gamma function.
pub fn expected_effective_gain(eigs: &[f64], n: usize) -> Result<f64> {
    let lam = sorted_ascending(eigs)?;
    let m = lam.len();
    if m > 4 || n > 16 || n < m {
        return Err(domain(format!("supported sizes are M <= 4 <= ... N <= 16 with M <= N, got N={n}, M={m}")));
    }
    if m == 1 {
        return Ok(lam[0] * n as f64);
    }
    check_distinct(&lam)?;
    let scale = lam[m - 1];
    let lam: Vec<f64> = lam.iter().map(|l| l / scale).collect();
    // Delta_{ij} = lambda_j^{N-i+1} (N-i)!, rows i = 1..M.
    let delta = nalgebra::DMatrix::from_fn(m, m, |i, j| lam[j].powi((n - i) as i32) * factorial(n - i - 1));
    let det_delta = delta.determinant();
    let mut acc = Accumulator::default();
    for (perm, sign) in permutations(m) {
        let c: f64 = (0..m).map(|i| lam[perm[i]].powi((n - i) as i32) * factorial(n - i - 1)).product();
        for mask in 1usize..(1 << m) {
            let rows: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let rate: f64 = rows.iter().map(|&i| 1.0 / lam[perm[i]]).sum();
            // Coefficients of prod_i sum_{k <= N-i} (y / lambda)^k / k!.
            let mut poly = vec![1.0];
            for &i in &rows {
                let inv = 1.0 / lam[perm[i]];
                let deg = n - i - 1;
                let factor: Vec<f64> = (0..=deg).map(|k| inv.powi(k as i32) / factorial(k)).collect();
                let mut next = vec![0.0; poly.len() + deg];
                for (a, pa) in poly.iter().enumerate() {
                    for (b, fb) in factor.iter().enumerate() {
                        next[a + b] += pa * fb;
                    }
                }
                poly = next;
            }
            // integral of x^L e^{-rate x} = L! / rate^{L+1}
            let integral: f64 = poly
                .iter()
                .enumerate()
                .map(|(l, &coef)| coef * (ln_factorial(l) - (l as f64 + 1.0) * rate.ln()).exp())
                .sum();
            let parity = if rows.len() % 2 == 1 { 1.0 } else { -1.0 };
            acc.add(sign * parity * c * integral);
        }
    }
    if acc.cancellation() > MAX_CANCELLATION {
        return Err(Error::IllConditioned("eigenvalues too close for the effective-gain formula".into()));
    }
    Ok(acc.value() / det_delta * scale)
}

/// Sample mean of the largest eigenvalue of `H H^H` with `H = R^{1/2} G`,
/// `R = diag(eigs)`; used when the closed form is ill-conditioned.
pub fn expected_effective_gain_mc<R: Rng + ?Sized>(eigs: &[f64], n: usize, samples: usize, rng: &mut R) -> Result<f64> {
    let lam = sorted_ascending(eigs)?;
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let scale: Vec<f64> = lam.iter().map(|l| l.sqrt()).collect();
    let mut acc = Accumulator::default();
    for _ in 0..samples {
        let mut g = complex_gaussian(lam.len(), n, rng);
        for (i, s) in scale.iter().enumerate() {
            g.row_mut(i).scale_mut(*s);
        }
        acc.add(hermitian_eigen(&gram(&g)).0[0]);
    }
    Ok(acc.value() / samples as f64)
}

/// Relative spread applied to repeated eigenvalues before using the
/// distinct-eigenvalue formulas.
pub const EIGENVALUE_SEPARATION: f64 = 1e-4;

/// Mean MRC gain for any eigenvalues, repeated ones included: the closed
/// form after separating the eigenvalues by [`EIGENVALUE_SEPARATION`]
/// (relative bias below `M * 1e-4`), or a seeded sample mean when the
/// expansion is still too ill-conditioned.
pub fn mrc_gain(eigs: &[f64], n: usize) -> Result<f64> {
    let spread = separate_eigenvalues(eigs, EIGENVALUE_SEPARATION);
    match expected_effective_gain(&spread, n) {
        Err(Error::IllConditioned(_)) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(FALLBACK_SEED);
            expected_effective_gain_mc(eigs, n, FALLBACK_SAMPLES, &mut rng)
        }
        other => other,
    }
}

/// QBC gain for any eigenvalues, handled like [`mrc_gain`].
pub fn qbc_gain_any(eigs: &[f64], n: usize) -> Result<f64> {
    match qbc_gain(&separate_eigenvalues(eigs, EIGENVALUE_SEPARATION), n) {
        Err(Error::IllConditioned(_)) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(FALLBACK_SEED);
            qbc_gain_mc(eigs, n, FALLBACK_SAMPLES, &mut rng)
        }
        other => other,
    }
}

/// Sample estimate of the QBC gain via its exponential-ratio representation.
pub fn qbc_gain_mc<R: Rng + ?Sized>(eigs: &[f64], n: usize, samples: usize, rng: &mut R) -> Result<f64> {
    let lam = sorted_ascending(eigs)?;
    check_dims(n, lam.len())?;
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let mut acc = Accumulator::default();
    for _ in 0..samples {
        let (mut num, mut den) = (0.0, 0.0);
        for l in &lam {
            let xi: f64 = rng.sample(rand_distr::Exp1);
            num += xi;
            den += xi / l;
        }
        acc.add(num / den);
    }
    Ok((n - lam.len() + 1) as f64 * acc.value() / samples as f64)
}

/// CSI rate-loss bounds per scheduled user.
#[derive(Debug, Clone)]
pub enum LossBound {
    /// `log2 det(I + (P/M) D R)` for quantized BD.
    BdQuantized { power: f64, distortion: f64, rx_corr: CMatrix },
    /// `log2(1 + (P/N) D G)` for quantized ZFC with QBC.
    ZfcQuantized { power: f64, n: usize, distortion: f64, gain: f64 },
    /// `log2 det(I + P (N-M)/N (R^{-T} + T^H T / noise)^{-1})` for estimated BD.
    BdEstimated { power: f64, n: usize, rx_corr: CMatrix, training: CMatrix, noise: f64 },
    /// `log2(1 + P (N-1)/N / (1/E{||h||^2} + psi / noise))` for estimated ZFC.
    ZfcEstimated { power: f64, n: usize, mean_gain: f64, psi: f64, noise: f64 },
}

/// Error covariance `(R^{-T} + T^H T / noise)^{-1}` entering the estimated-BD
/// bound; zero for noiseless training.
pub fn estimation_error_bd(rx_corr: &CMatrix, training: &CMatrix, noise: f64) -> Result<CMatrix> {
    let m = rx_corr.nrows();
    if noise == 0.0 {
        return Ok(CMatrix::zeros(m, m));
    }
    let r_inv_t = inv_hpd(rx_corr).map_err(|_| domain("receive correlation is singular"))?.transpose();
    inv_hpd(&(r_inv_t + training.adjoint() * training / real(noise)))
}

pub fn rate_loss_bound(bound: &LossBound) -> Result<f64> {
    let bits = match bound {
        LossBound::BdQuantized { power, distortion, rx_corr } => {
            let m = rx_corr.nrows();
            let a = CMatrix::identity(m, m) + rx_corr * real(power / m as f64 * distortion);
            ln_det_hpd(&a)? / LN_2
        }
        LossBound::ZfcQuantized { power, n, distortion, gain } => {
            (power / *n as f64 * distortion * gain).ln_1p() / LN_2
        }
        LossBound::BdEstimated { power, n, rx_corr, training, noise } => {
            let m = rx_corr.nrows();
            if *n <= m {
                return Err(domain("need M < N"));
            }
            let e = estimation_error_bd(rx_corr, training, *noise)?;
            let a = CMatrix::identity(m, m) + e * real(power * (n - m) as f64 / *n as f64);
            ln_det_hpd(&a)? / LN_2
        }
        LossBound::ZfcEstimated { power, n, mean_gain, psi, noise } => {
            if *noise == 0.0 {
                0.0
            } else {
                let err = 1.0 / (1.0 / mean_gain + psi / noise);
                (power * (*n as f64 - 1.0) / *n as f64 * err).ln_1p() / LN_2
            }
        }
    };
    Ok(bits.max(0.0))
}

/// Feedback bits implied by the scaling law
/// `B_total = N(N-M) log2 P - N c` (`c` per effective dimension).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitBudget {
    pub total: f64,
    /// Bits per ZFC user (one effective dimension).
    pub per_zfc_user: f64,
    /// Bits per BD user (`M` dimensions).
    pub per_bd_user: f64,
}

pub fn feedback_bit_law(n: usize, m: usize, power: f64, constant: f64) -> Result<BitBudget> {
    check_dims(n, m)?;
    if !(power > 1.0) {
        return Err(domain("the bit law needs P > 1"));
    }
    let per_dim = (n - m) as f64 * power.log2() - constant;
    Ok(BitBudget { total: n as f64 * per_dim, per_zfc_user: per_dim, per_bd_user: m as f64 * per_dim })
}

/// Constant `c` that makes the uncorrelated quantized-BD loss bound equal one
/// bit per stream, i.e. `D_BD = M / P`, when each BD user gets
/// `M ((N-M) log2 P - c)` bits.
pub fn bit_law_constant(n: usize, m: usize) -> Result<f64> {
    let d0 = distortion_bd(n, m, 0.0)?;
    Ok((n - m) as f64 * (m as f64 / d0).log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainingLaw {
    /// `psi = factor * P`.
    Proportional { factor: f64 },
    Fixed { psi: f64 },
}

pub fn training_power_law(powers: &[f64], law: TrainingLaw) -> Result<Vec<f64>> {
    if powers.is_empty() {
        return Err(domain("power sweep is empty"));
    }
    Ok(match law {
        TrainingLaw::Proportional { factor } => powers.iter().map(|p| factor * p).collect(),
        TrainingLaw::Fixed { psi } => vec![psi; powers.len()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use statrs::function::gamma::gamma_lr;

    #[test]
    fn digamma_values() {
        assert!((digamma(1).unwrap() + 0.577_215_664_901_532_9).abs() < 1e-15);
        assert!((digamma(2).unwrap() - digamma(1).unwrap() - 1.0).abs() < 1e-15);
        assert!((digamma(8).unwrap() - (363.0 / 140.0 - 0.577_215_664_901_532_9)).abs() < 1e-14);
        assert!((digamma(8).unwrap() / LN_2 - 2.90796).abs() < 1e-5);
        assert!(digamma(0).is_err());
    }

    #[test]
    fn base_term_values() {
        assert_eq!(uncorrelated_bd_advantage(4, 1), 0.0);
        assert!((uncorrelated_bd_advantage(8, 2) - 4.0 * LOG2_E).abs() < 1e-12);
        assert!((uncorrelated_bd_advantage(8, 2) - 5.7708).abs() < 1e-4);
    }

    #[test]
    fn homogeneous_bound_cancels_equal_eigenvalues() {
        let b = beta_homogeneous_upper(8, 2, &[1.7, 1.7]).unwrap();
        assert!((b - uncorrelated_bd_advantage(8, 2)).abs() < 1e-12);
        let h = beta_heterogeneous_upper(8, 2, 4.0).unwrap();
        assert!((h - uncorrelated_bd_advantage(8, 2) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn beta_single_antenna_uncorrelated_is_zero() {
        let bd: Vec<Vec<f64>> = (0..4).map(|_| vec![1.0]).collect();
        let r = beta_bd_zfc(4, 1, &bd, &bd, Some(&[0.0; 4])).unwrap();
        assert_eq!(r.plugin, Some(0.0));
        assert!(r.upper.abs() < 1e-15);
        // With one antenna z equals E{log2 chi2_{2N}/2} - psi(N)/ln 2 = 0 and
        // log2 E{||h||^2} - psi(N)/ln 2 >= 0 by Jensen.
        assert!(r.lower <= 0.0);
        assert!(beta_bd_zfc(6, 4, &bd, &bd, None).is_err());
    }

    #[test]
    fn scheduling_bounds() {
        let (a, b) = scheduling_loss_bounds(4, 1, 64.0, 0.5, 0.5).unwrap();
        assert!((a.unwrap() - b.unwrap()).abs() < 1e-15);
        let (a, b) = scheduling_loss_bounds(4, 2, 1e12, 0.5, 0.5).unwrap();
        assert!(a.unwrap() < 2e-3 && b.unwrap() < 1e-6);
        assert_eq!(scheduling_loss_bounds(4, 2, 2.0, 5.0, 5.0).unwrap(), (None, None));
        // The ZFC bound behaves like c K^{-1/(N-M)} for large K.
        let f = |k: f64| scheduling_loss_bounds(6, 2, k, 0.3, 0.3).unwrap().1.unwrap();
        let slope = (f(2e8).ln() - f(1e8).ln()) / 2f64.ln();
        assert!((slope + 0.25).abs() < 1e-3);
    }

    #[test]
    fn distortion_values() {
        assert!((distortion_bd(2, 1, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(distortion_bd(4, 2, 200.0).unwrap() < 1e-10);
        assert!((distortion_qbc(6, 2, 5.0).unwrap() - 2f64.powf(-1.25) * 5f64.powf(-0.25)).abs() < 1e-14);
        assert!((distortion_qbc(6, 2, 5.0).unwrap() - 0.2812).abs() < 1e-4);
        assert!(distortion_qbc(6, 2, 400.0).unwrap() < 1e-20);
    }

    /// Mean of `sum xi / sum (xi/lambda)` by trapezoidal integration of the
    /// piecewise CDF, evaluated directly from its product form.
    fn ratio_mean_by_quadrature(lam: &[f64]) -> f64 {
        let m = lam.len();
        let mu: Vec<f64> = lam.iter().map(|l| 1.0 / l).collect();
        let cdf = |a: f64| -> f64 {
            let left = lam.iter().filter(|&&l| l <= a).count();
            if left == 0 {
                return 0.0;
            }
            if left == m {
                return 1.0;
            }
            let mut s = 0.0;
            for nn in 0..left {
                for t in left..m {
                    let mut den = mu[nn] - mu[t];
                    for i in 0..left {
                        if i != nn {
                            den *= mu[nn] - mu[i];
                        }
                    }
                    for j in left..m {
                        if j != t {
                            den *= mu[j] - mu[t];
                        }
                    }
                    s += (mu[nn] - 1.0 / a).powi(left as i32) * (1.0 / a - mu[t]).powi((m - left - 1) as i32) / den;
                }
            }
            s
        };
        let steps = 200_000;
        let (lo, hi) = (lam[0], lam[m - 1]);
        let h = (hi - lo) / steps as f64;
        let mut area = 0.0;
        for i in 0..=steps {
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            area += w * (1.0 - cdf(lo + i as f64 * h));
        }
        lo + area * h
    }

    #[test]
    fn qbc_gain_matches_quadrature() {
        for (lam, n) in [(vec![1.0, 2.0], 6), (vec![0.5, 1.0, 3.0], 6), (vec![0.3, 0.9, 1.7, 2.5], 8)] {
            let expect = (n - lam.len() + 1) as f64 * ratio_mean_by_quadrature(&lam);
            let got = qbc_gain(&lam, n).unwrap();
            assert!((got - expect).abs() < 1e-6 * expect, "{lam:?}: {got} vs {expect}");
        }
        assert!((qbc_gain(&[1.0, 2.0], 6).unwrap() - 5.0 * 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn qbc_gain_limits() {
        assert!((qbc_gain(&[1.5], 5).unwrap() - 7.5).abs() < 1e-12);
        let g = qbc_gain(&[1.0 - 1e-4, 1.0 + 1e-4], 6).unwrap();
        assert!((g - 5.0).abs() < 1e-6);
        assert!(matches!(qbc_gain(&[1.0, 1.0], 6), Err(Error::IllConditioned(_))));
    }

    /// `E{lambda_max}` by quadrature of one minus the determinantal CDF,
    /// using regularized incomplete gamma functions.
    fn lambda_max_by_quadrature(lam: &[f64], n: usize) -> f64 {
        let m = lam.len();
        let delta = nalgebra::DMatrix::from_fn(m, m, |i, j| lam[j].powi((n - i) as i32) * factorial(n - i - 1));
        let dd = delta.determinant();
        let cdf = |x: f64| {
            nalgebra::DMatrix::from_fn(m, m, |i, j| {
                let a = (n - i) as f64;
                lam[j].powi((n - i) as i32) * factorial(n - i - 1) * gamma_lr(a, x / lam[j])
            })
            .determinant()
                / dd
        };
        let top = lam.iter().cloned().fold(0.0, f64::max);
        let end = top * (n as f64 * 12.0 + 60.0);
        let steps = 400_000;
        let h = end / steps as f64;
        let mut s = 0.0;
        for i in 0..=steps {
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            s += w * if i == 0 { 1.0 } else { 1.0 - cdf(i as f64 * h) };
        }
        s * h
    }

    #[test]
    fn effective_gain_matches_quadrature() {
        for (lam, n) in [(vec![2.0, 1.0], 4), (vec![0.5, 1.0, 3.0], 6), (vec![0.2, 0.7, 1.3, 2.9], 8)] {
            let expect = lambda_max_by_quadrature(&lam, n);
            let got = expected_effective_gain(&lam, n).unwrap();
            assert!((got - expect).abs() < 1e-6 * expect, "{lam:?}: {got} vs {expect}");
        }
    }

    #[test]
    fn effective_gain_scaling_and_errors() {
        assert!((expected_effective_gain(&[2.0], 7).unwrap() - 14.0).abs() < 1e-12);
        let a = expected_effective_gain(&[1.0, 2.0, 4.0], 6).unwrap();
        let b = expected_effective_gain(&[3.0, 6.0, 12.0], 6).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-9 * b);
        let c = expected_effective_gain(&[4.0, 1.0, 2.0], 6).unwrap();
        assert_eq!(a, c);
        assert!(matches!(expected_effective_gain(&[1.0, 1.0], 6), Err(Error::IllConditioned(_))));
        assert!(matches!(
            expected_effective_gain(&[1.0, 1.0 + 1e-3, 1.0 + 2e-3, 1.0 + 3e-3], 8),
            Err(Error::IllConditioned(_))
        ));
        assert!(expected_effective_gain(&[1.0, 2.0], 20).is_err());
    }

    #[test]
    fn separated_eigenvalues_bias_is_bounded() {
        let sep = separate_eigenvalues(&[1.0, 1.0], 1e-4);
        let g = expected_effective_gain(&sep, 8).unwrap();
        let lo = expected_effective_gain(&separate_eigenvalues(&[1.0, 1.0], 2e-4), 8).unwrap();
        assert!(g <= lo && (lo - g) / g < 2e-4);
    }

    #[test]
    fn loss_bounds_limits() {
        let r = from_real_rows(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let zero_q = LossBound::BdQuantized { power: 100.0, distortion: 0.0, rx_corr: r.clone() };
        assert_eq!(rate_loss_bound(&zero_q).unwrap(), 0.0);
        let zero_e = LossBound::BdEstimated {
            power: 100.0,
            n: 4,
            rx_corr: r.clone(),
            training: CMatrix::identity(2, 2),
            noise: 0.0,
        };
        assert_eq!(rate_loss_bound(&zero_e).unwrap(), 0.0);
        let eye = LossBound::BdQuantized { power: 10.0, distortion: 0.3, rx_corr: CMatrix::identity(2, 2) };
        assert!((rate_loss_bound(&eye).unwrap() - 2.0 * (1.0 + 5.0 * 0.3f64).log2()).abs() < 1e-12);
        let z = LossBound::ZfcEstimated { power: 10.0, n: 4, mean_gain: 5.0, psi: 10.0, noise: 0.0 };
        assert_eq!(rate_loss_bound(&z).unwrap(), 0.0);
    }

    #[test]
    fn training_laws_and_limits() {
        let p: Vec<f64> = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6].to_vec();
        let prop = training_power_law(&p, TrainingLaw::Proportional { factor: 1.0 }).unwrap();
        assert!(p.iter().zip(&prop).all(|(a, b)| a / b == 1.0));
        let fixed = training_power_law(&p, TrainingLaw::Fixed { psi: 10.0 }).unwrap();
        let bound = |power: f64, psi: f64| {
            rate_loss_bound(&LossBound::ZfcEstimated { power, n: 4, mean_gain: 6.0, psi, noise: 1.0 }).unwrap()
        };
        let fixed_b: Vec<f64> = p.iter().zip(&fixed).map(|(&a, &b)| bound(a, b)).collect();
        let prop_b: Vec<f64> = p.iter().zip(&prop).map(|(&a, &b)| bound(a, b)).collect();
        assert!(fixed_b[2..].windows(2).all(|w| w[1] > w[0] + 3.0));
        assert!((prop_b[5] - prop_b[4]).abs() < 1e-4);
        assert!((prop_b[5] - (1.0 + 0.75f64).log2()).abs() < 1e-4);
    }

    #[test]
    fn bit_law() {
        let b = feedback_bit_law(4, 2, 100.0, 0.0).unwrap();
        assert!((b.total - 8.0 * 100f64.log2()).abs() < 1e-12);
        assert!((b.total - 53.15).abs() < 0.01);
        assert!(feedback_bit_law(4, 3, 100.0, 0.0).unwrap().total < b.total);
        let lo = feedback_bit_law(4, 2, 100.0, 1.0).unwrap();
        let hi = feedback_bit_law(4, 2, 200.0, 1.0).unwrap();
        assert!((hi.total - lo.total - 8.0).abs() < 1e-12);
        assert_eq!(lo.per_bd_user, 2.0 * lo.per_zfc_user);
        // The constant puts the BD distortion at M / P.
        let c = bit_law_constant(4, 2).unwrap();
        let p = 10f64.powf(1.43);
        let bits = feedback_bit_law(4, 2, p, c).unwrap().per_bd_user;
        assert!((distortion_bd(4, 2, bits).unwrap() - 2.0 / p).abs() < 1e-12);
    }

    #[test]
    fn qbc_gain_matches_exponential_sampling() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (lam, n) in [(vec![0.5, 1.0, 3.0], 6), (vec![0.3, 0.9, 1.7, 2.5], 8)] {
            let mc = qbc_gain_mc(&lam, n, 400_000, &mut rng).unwrap();
            let exact = qbc_gain(&lam, n).unwrap();
            assert!((mc - exact).abs() < 5e-3 * exact, "{mc} vs {exact}");
        }
    }

    #[test]
    fn effective_gain_matches_sampling() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let exact = expected_effective_gain(&[2.0, 1.0], 4).unwrap();
        assert!((exact - 9.63786).abs() < 1e-4);
        let mc = expected_effective_gain_mc(&[2.0, 1.0], 4, 100_000, &mut rng).unwrap();
        assert!((mc - exact).abs() < 1e-2 * exact);
    }

    #[test]
    fn robust_fallbacks_handle_repeated_eigenvalues() {
        let g = mrc_gain(&[1.0; 4], 8).unwrap();
        let near = expected_effective_gain(&[1.0, 1.1, 1.2, 1.3], 8).unwrap();
        assert!(g > 8.0 && g < near);
        let two = mrc_gain(&[1.0, 1.0], 8).unwrap();
        assert!((two - expected_effective_gain(&[1.0, 1.0001], 8).unwrap()).abs() < 1e-9);
        assert!((qbc_gain_any(&[1.0; 2], 6).unwrap() - 5.0).abs() < 1e-3);
        let q = qbc_gain_any(&[1.0; 3], 6).unwrap();
        assert!((q - 4.0).abs() < 2e-2);
    }
}
