//! Achievable rates of a precoding plan on the true channels, high-SNR rate
//! offsets and multiplexing-gain fits.

use std::f64::consts::LN_2;

use crate::combining::{mmse_combiner, Combiner};
use crate::csi::CsiRegime;
use crate::error::{domain, Result};
use crate::linalg::{gram, inv_hpd, ln_det_hpd, stack_rows, CMatrix};
use crate::precoding::{bd_effective_grams, check_condition, PrecodePlan, Strategy};

/// Per-trial rates of one strategy.
#[derive(Debug, Clone)]
pub struct RateRecord {
    /// `(user, bits per channel use)` in plan order.
    pub per_user: Vec<(usize, f64)>,
    pub sum_rate: f64,
    pub scenario_id: String,
    pub seed: u64,
    pub trial: u64,
    pub strategy: Strategy,
    pub csi: CsiRegime,
}

impl RateRecord {
    pub fn new(per_user: Vec<(usize, f64)>, strategy: Strategy, csi: CsiRegime) -> Self {
        let sum_rate = per_user.iter().map(|(_, r)| r).sum();
        Self { per_user, sum_rate, scenario_id: String::new(), seed: 0, trial: 0, strategy, csi }
    }
}

/// `sum_{l != user} H W_l W_l^H H^H` for the blocks of `plan`.
pub fn interference_covariance(h: &CMatrix, plan: &PrecodePlan, user: usize) -> CMatrix {
    let m = h.nrows();
    let mut acc = CMatrix::zeros(m, m);
    for b in plan.blocks.iter().filter(|b| b.user != user) {
        let hw = h * b.precoder();
        acc += &hw * hw.adjoint();
    }
    acc
}

/// Rate in bits of `user` with true channel `h` and combiner `c`:
/// `log2 det(I + C^H (S + I) C) - log2 det(I + C^H I C)`, where `S` is the
/// own-signal and `I` the interference covariance.
pub fn rate_general(h: &CMatrix, combiner: &Combiner, plan: &PrecodePlan, user: usize) -> Result<f64> {
    let own = plan
        .block_of(user)
        .ok_or_else(|| domain(format!("user {user} is not scheduled")))?;
    let c = &combiner.matrix;
    let hw = h * own.precoder();
    let interference = interference_covariance(h, plan, user);
    let d = c.ncols();
    let eye = CMatrix::identity(d, d);
    let base = &eye + c.adjoint() * &interference * c;
    let with_own = &base + c.adjoint() * &hw * hw.adjoint() * c;
    let nats = ln_det_hpd(&with_own)? - ln_det_hpd(&base)?;
    Ok((nats / LN_2).max(0.0))
}

/// MMSE combiner of `user` for the realized plan.
pub fn plan_mmse_combiner(h: &CMatrix, plan: &PrecodePlan, user: usize) -> Result<Combiner> {
    let own = plan
        .block_of(user)
        .ok_or_else(|| domain(format!("user {user} is not scheduled")))?;
    mmse_combiner(h, &own.precoder(), &interference_covariance(h, plan, user))
}

/// Rates of all scheduled users. `channels` is indexed by user id;
/// `combiners` supplies preliminary combiners (indexed by user id) and
/// `None` selects the MMSE combiner.
pub fn plan_rates(
    channels: &[CMatrix],
    plan: &PrecodePlan,
    combiners: Option<&[Combiner]>,
) -> Result<Vec<(usize, f64)>> {
    plan.blocks
        .iter()
        .map(|b| {
            let h = &channels[b.user];
            let rate = match combiners {
                Some(cs) => rate_general(h, &cs[b.user], plan, b.user)?,
                None => rate_general(h, &plan_mmse_combiner(h, plan, b.user)?, plan, b.user)?,
            };
            Ok((b.user, rate))
        })
        .collect()
}

/// High-SNR offset `sum log2 |h_k^H w_k|^2` of zero-forcing on stacked
/// effective rows; `-inf` when the rows are linearly dependent.
pub fn asymptotic_offset_zfc(rows: &CMatrix) -> f64 {
    if check_condition(rows).is_err() {
        return f64::NEG_INFINITY;
    }
    match inv_hpd(&gram(rows)) {
        Ok(inv) => (0..rows.nrows()).map(|i| -inv[(i, i)].re.log2()).sum(),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// High-SNR offset `sum log2 det(H_k W_k W_k^H H_k^H)` of block
/// diagonalization; `-inf` when the stacked channel is singular.
pub fn asymptotic_offset_bd(blocks: &[CMatrix]) -> f64 {
    if check_condition(&stack_rows(blocks.iter())).is_err() {
        return f64::NEG_INFINITY;
    }
    match bd_effective_grams(blocks) {
        Ok(grams) => grams
            .iter()
            .map(|s| ln_det_hpd(s).map(|x| x / LN_2).unwrap_or(f64::NEG_INFINITY))
            .sum(),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Offset of the scheduled channels under `strategy` (BD blocks or ZFC rows).
pub fn asymptotic_offset(strategy: Strategy, blocks: &[CMatrix]) -> Result<f64> {
    match strategy {
        Strategy::Bd => Ok(asymptotic_offset_bd(blocks)),
        Strategy::Zfc => Ok(asymptotic_offset_zfc(&stack_rows(blocks.iter()))),
        other => Err(domain(format!("no rate offset defined for {}", other.label()))),
    }
}

/// Least-squares slope of `rates` against `log2(powers)`.
pub fn multiplexing_gain_fit(powers: &[f64], rates: &[f64]) -> Result<f64> {
    if powers.len() != rates.len() || powers.len() < 3 {
        return Err(domain("a slope fit needs at least three matching points"));
    }
    if powers.iter().any(|&p| !(p > 0.0)) {
        return Err(domain("powers must be positive"));
    }
    let x: Vec<f64> = powers.iter().map(|p| p.log2()).collect();
    Ok(ls_slope(&x, rates))
}

/// Ordinary least-squares slope.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combining::CombinerKind;
    use crate::linalg::from_real_rows;
    use crate::precoding::{bd_precoder, zfc_precoder, PowerMode, StreamBlock};

    fn scalar_plan(power: f64) -> PrecodePlan {
        PrecodePlan {
            strategy: Strategy::Zfc,
            blocks: vec![StreamBlock {
                user: 0,
                directions: CMatrix::identity(1, 1),
                powers: vec![power],
                gains: vec![1.0],
            }],
            total_power: power,
        }
    }

    #[test]
    fn scalar_rates() {
        let h = CMatrix::identity(1, 1);
        let c = Combiner::identity(1);
        assert!((rate_general(&h, &c, &scalar_plan(1.0), 0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(rate_general(&h, &c, &scalar_plan(0.0), 0).unwrap(), 0.0);
    }

    #[test]
    fn bd_on_orthogonal_users_has_no_interference() {
        let h1 = from_real_rows(2, 4, &[1., 2., 0., 0., 3., -1., 0., 0.]);
        let h2 = from_real_rows(2, 4, &[0., 0., 1., 1., 0., 0., 2., -1.]);
        let hs = vec![h1.clone(), h2];
        let plan = bd_precoder(&[0, 1], &hs, 4.0, PowerMode::Equal).unwrap();
        let w = plan.blocks[0].precoder();
        let hw = &h1 * &w;
        let direct = ln_det_hpd(&(CMatrix::identity(2, 2) + &hw * hw.adjoint())).unwrap() / LN_2;
        let rate = rate_general(&h1, &Combiner::identity(2), &plan, 0).unwrap();
        assert!((rate - direct).abs() < 1e-12);
        assert!(interference_covariance(&h1, &plan, 0).norm() < 1e-12);
    }

    #[test]
    fn zfc_offset_of_orthonormal_rows_is_zero() {
        let rows = from_real_rows(2, 3, &[1., 0., 0., 0., 1., 0.]);
        assert!(asymptotic_offset_zfc(&rows).abs() < 1e-15);
        let dup = from_real_rows(2, 2, &[1., 1., 1., 1.]);
        assert_eq!(asymptotic_offset_zfc(&dup), f64::NEG_INFINITY);
    }

    #[test]
    fn single_antenna_offsets_agree() {
        let rows = from_real_rows(3, 4, &[1., 2., 0., 1., -1., 0., 3., 1., 0., 1., 1., -2.]);
        let blocks: Vec<CMatrix> = (0..3).map(|i| rows.rows(i, 1).into_owned()).collect();
        let bd = asymptotic_offset(Strategy::Bd, &blocks).unwrap();
        let zfc = asymptotic_offset(Strategy::Zfc, &blocks).unwrap();
        assert!((bd - zfc).abs() < 1e-12);
    }

    #[test]
    fn high_snr_rate_approaches_offset() {
        let rows = from_real_rows(3, 3, &[1., 0.5, 0., -0.3, 1., 0.2, 0.1, 0.4, 1.]);
        let offset = asymptotic_offset_zfc(&rows);
        let mut gaps = Vec::new();
        for db in [30.0, 40.0, 50.0, 60.0] {
            let p = 10f64.powf(db / 10.0);
            let plan = zfc_precoder(&[0, 1, 2], &rows, p, PowerMode::Equal).unwrap();
            let channels: Vec<CMatrix> = (0..3).map(|i| rows.rows(i, 1).into_owned()).collect();
            let sum: f64 = plan_rates(&channels, &plan, None).unwrap().iter().map(|x| x.1).sum();
            gaps.push((sum - (3.0 * (p / 3.0).log2() + offset)).abs());
        }
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(gaps[3] < 1e-4);
    }

    #[test]
    fn slope_of_exact_line() {
        let p: Vec<f64> = [10.0, 100.0, 1000.0].to_vec();
        let r: Vec<f64> = p.iter().map(|x: &f64| 4.0 * x.log2() + 1.0).collect();
        assert!((multiplexing_gain_fit(&p, &r).unwrap() - 4.0).abs() < 1e-12);
        assert!(multiplexing_gain_fit(&p[..2], &r[..2]).is_err());
    }

    #[test]
    fn mmse_combiner_does_not_lose_rate() {
        let h1 = from_real_rows(2, 3, &[1., 0.2, 0.5, 0.3, -1., 0.1]);
        let h2 = from_real_rows(2, 3, &[0.4, 1., -0.2, 1., 0.3, 0.8]);
        let plan = zfc_precoder(
            &[0, 1],
            &stack_rows([&h1.rows(0, 1).into_owned(), &h2.rows(1, 1).into_owned()]),
            10.0,
            PowerMode::Equal,
        )
        .unwrap();
        let chans = vec![h1.clone(), h2.clone()];
        let prelim = vec![
            Combiner { matrix: from_real_rows(2, 1, &[1., 0.]), kind: CombinerKind::Custom },
            Combiner { matrix: from_real_rows(2, 1, &[0., 1.]), kind: CombinerKind::Custom },
        ];
        let a = plan_rates(&chans, &plan, Some(&prelim)).unwrap();
        let b = plan_rates(&chans, &plan, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(y.1 >= x.1 - 1e-12);
        }
    }
}
