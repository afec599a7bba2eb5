//! Zero-forcing precoders (block diagonalization, zero-forcing with
//! combining, multi-user eigenmode transmission), single-user SVD
//! transmission and water-filling.
//!
//! All multi-user precoders are built by one routine: each user's block of
//! rows is served inside the common null space of all other blocks, and the
//! streams are aligned with the right singular vectors of the projected
//! block. With one-row blocks this is exactly a normalized pseudo-inverse
//! column, so BD with single-antenna users and ZFC share code and produce
//! identical plans.

use crate::error::{domain, Error, Result};
use crate::linalg::{
    gram, inv_hpd, ln_det_hpd, orthogonal_complement, real, row_space_basis, stack_rows, svd,
    CMatrix, RANK_TOL,
};

/// Largest accepted condition number of a stacked schedule.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Bd,
    Zfc,
    Met,
    SingleUser,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Bd => "BD",
            Strategy::Zfc => "ZFC",
            Strategy::Met => "MET",
            Strategy::SingleUser => "SU",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    Equal,
    Waterfill,
}

/// Streams sent to one scheduled user.
#[derive(Debug, Clone)]
pub struct StreamBlock {
    pub user: usize,
    /// Unit-norm beam directions (`N x d`), mutually orthogonal except for
    /// the zero-forcing streams of MET.
    pub directions: CMatrix,
    /// Power on each stream.
    pub powers: Vec<f64>,
    /// Squared gain of each stream on the channel the plan was built from.
    pub gains: Vec<f64>,
}

impl StreamBlock {
    pub fn streams(&self) -> usize {
        self.directions.ncols()
    }

    /// Precoder `W = directions * diag(sqrt(powers))`.
    pub fn precoder(&self) -> CMatrix {
        let mut w = self.directions.clone();
        for (j, &p) in self.powers.iter().enumerate() {
            w.column_mut(j).scale_mut(p.max(0.0).sqrt());
        }
        w
    }

    pub fn power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct PrecodePlan {
    pub strategy: Strategy,
    pub blocks: Vec<StreamBlock>,
    pub total_power: f64,
}

impl PrecodePlan {
    pub fn scheduled(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.user).collect()
    }

    pub fn total_streams(&self) -> usize {
        self.blocks.iter().map(|b| b.streams()).sum()
    }

    pub fn used_power(&self) -> f64 {
        self.blocks.iter().map(|b| b.power()).sum()
    }

    pub fn block_of(&self, user: usize) -> Option<&StreamBlock> {
        self.blocks.iter().find(|b| b.user == user)
    }

    /// Sum rate in bits predicted from the gains the plan was built on,
    /// assuming zero inter-stream interference.
    pub fn predicted_rate(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.powers.iter().zip(&b.gains))
            .map(|(p, g)| (p * g).ln_1p())
            .sum::<f64>()
            / std::f64::consts::LN_2
    }
}

/// Orthonormal basis (columns) of the right null space of `rows`.
/// Returns an `N x 0` matrix when the rows span the whole space.
pub fn null_space_basis(rows: &CMatrix) -> Result<CMatrix> {
    let n = rows.ncols();
    if rows.nrows() == 0 {
        return Ok(CMatrix::identity(n, n));
    }
    let q = row_space_basis(rows)?;
    Ok(orthogonal_complement(&q, n))
}

/// Condition number of a stacked channel; errors above [`MAX_CONDITION`].
pub fn check_condition(stacked: &CMatrix) -> Result<f64> {
    if stacked.nrows() == 0 {
        return Ok(1.0);
    }
    if stacked.nrows() > stacked.ncols() {
        return Err(domain(format!(
            "{} stacked rows exceed {} transmit antennas",
            stacked.nrows(),
            stacked.ncols()
        )));
    }
    let d = svd(stacked)?;
    let lo = *d.s.last().unwrap();
    let cond = if lo > 0.0 { d.s[0] / lo } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::DegenerateSchedule { condition: cond });
    }
    Ok(cond)
}

/// Serves each row block inside the null space of all other blocks, aligned
/// with the right singular vectors of the projected block. Returns per-block
/// `(directions, squared singular values)` with `streams[k]` columns each.
pub fn block_zero_forcing(blocks: &[CMatrix], streams: &[usize]) -> Result<Vec<(CMatrix, Vec<f64>)>> {
    assert_eq!(blocks.len(), streams.len());
    let stacked = stack_rows(blocks.iter());
    check_condition(&stacked)?;
    let mut out = Vec::with_capacity(blocks.len());
    for (k, (own, &d)) in blocks.iter().zip(streams).enumerate() {
        let others = stack_rows(blocks.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, b)| b));
        let basis = if others.nrows() == 0 {
            CMatrix::identity(own.ncols(), own.ncols())
        } else {
            null_space_basis(&others)?
        };
        let projected = own * &basis;
        let dec = svd(&projected)?;
        if d > dec.s.len() {
            return Err(domain(format!("{d} streams requested from a rank-{} block", dec.s.len())));
        }
        let dirs = &basis * dec.v_h.rows(0, d).adjoint();
        out.push((dirs, dec.s[..d].iter().map(|s| s * s).collect()));
    }
    Ok(out)
}

/// Water-filling `p_i = max(0, mu - 1/g_i)` with `sum p_i = total`.
pub fn waterfill(gains: &[f64], total: f64) -> Vec<f64> {
    let mut out = vec![0.0; gains.len()];
    if !(total > 0.0) {
        return out;
    }
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    if order.is_empty() {
        return out;
    }
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).unwrap().then(a.cmp(&b)));
    let mut active = order.len();
    let mut level;
    loop {
        let inv_sum: f64 = order[..active].iter().map(|&i| 1.0 / gains[i]).sum();
        level = (total + inv_sum) / active as f64;
        if level > 1.0 / gains[order[active - 1]] || active == 1 {
            break;
        }
        active -= 1;
    }
    for &i in &order[..active] {
        out[i] = level - 1.0 / gains[i];
    }
    out
}

fn allocate(gains: &[Vec<f64>], total: f64, mode: PowerMode) -> Vec<Vec<f64>> {
    let n: usize = gains.iter().map(|g| g.len()).sum();
    match mode {
        PowerMode::Equal => gains.iter().map(|g| vec![total / n as f64; g.len()]).collect(),
        PowerMode::Waterfill => {
            let flat: Vec<f64> = gains.iter().flatten().copied().collect();
            let mut p = waterfill(&flat, total).into_iter();
            gains.iter().map(|g| p.by_ref().take(g.len()).collect()).collect()
        }
    }
}

fn assemble(
    strategy: Strategy,
    users: &[usize],
    zf: Vec<(CMatrix, Vec<f64>)>,
    total: f64,
    mode: PowerMode,
) -> PrecodePlan {
    let gains: Vec<Vec<f64>> = zf.iter().map(|(_, g)| g.clone()).collect();
    let powers = allocate(&gains, total, mode);
    let blocks = zf
        .into_iter()
        .zip(powers)
        .zip(users)
        .map(|(((directions, gains), powers), &user)| StreamBlock { user, directions, powers, gains })
        .collect();
    PrecodePlan { strategy, blocks, total_power: total }
}

/// Block diagonalization: every scheduled user receives as many streams as
/// its channel has rows, with zero interference to all co-users.
pub fn bd_precoder(users: &[usize], channels: &[CMatrix], total: f64, mode: PowerMode) -> Result<PrecodePlan> {
    if users.len() != channels.len() || users.is_empty() {
        return Err(domain("BD needs one channel per scheduled user"));
    }
    let rows: usize = channels.iter().map(|h| h.nrows()).sum();
    if rows > channels[0].ncols() {
        return Err(domain(format!(
            "{} users with {} receive antennas exceed {} transmit antennas",
            users.len(),
            channels[0].nrows(),
            channels[0].ncols()
        )));
    }
    let streams: Vec<usize> = channels.iter().map(|h| h.nrows()).collect();
    let zf = block_zero_forcing(channels, &streams)?;
    Ok(assemble(Strategy::Bd, users, zf, total, mode))
}

/// Zero-forcing on one effective row per user (`|S| x N`).
pub fn zfc_precoder(users: &[usize], rows: &CMatrix, total: f64, mode: PowerMode) -> Result<PrecodePlan> {
    if users.len() != rows.nrows() || users.is_empty() {
        return Err(domain("ZFC needs one effective row per scheduled user"));
    }
    let blocks: Vec<CMatrix> = (0..rows.nrows()).map(|i| rows.rows(i, 1).into_owned()).collect();
    let zf = block_zero_forcing(&blocks, &vec![1; blocks.len()])?;
    Ok(assemble(Strategy::Zfc, users, zf, total, mode))
}

/// SVD transmission to one user with water-filling; inactive modes dropped.
pub fn su_svd_precoder(user: usize, channel: &CMatrix, total: f64) -> Result<PrecodePlan> {
    let dec = svd(channel)?;
    let r = dec.rank();
    let gains: Vec<f64> = dec.s[..r].iter().map(|s| s * s).collect();
    let powers = waterfill(&gains, total);
    let active = powers.iter().filter(|&&p| p > 0.0).count().max(1);
    let directions = dec.v_h.rows(0, active).adjoint();
    Ok(PrecodePlan {
        strategy: Strategy::SingleUser,
        blocks: vec![StreamBlock {
            user,
            directions,
            powers: powers[..active].to_vec(),
            gains: gains[..active].to_vec(),
        }],
        total_power: total,
    })
}

/// Zero-forcing gains `1 / [(H H^H)^{-1}]_ii` of stacked one-row users.
pub fn zf_gains(rows: &CMatrix) -> Result<Vec<f64>> {
    let inv = inv_hpd(&gram(rows))?;
    Ok((0..rows.nrows()).map(|i| 1.0 / inv[(i, i)].re).collect())
}

/// Projected Gram matrices `H_k P_k H_k^H` of each block under block
/// zero-forcing, obtained as inverses of the diagonal blocks of the inverse
/// stacked Gram matrix.
pub fn bd_effective_grams(blocks: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let stacked = stack_rows(blocks.iter());
    let inv = inv_hpd(&gram(&stacked))?;
    let mut at = 0;
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let m = b.nrows();
        out.push(inv_hpd(&inv.view((at, at), (m, m)).into_owned())?);
        at += m;
    }
    Ok(out)
}

/// `ln det(I + A + p S) - ln det(I + A)` in nats, the rate of a block seen
/// through effective Gram `S` with per-stream power `p` and average
/// interference covariance `A` (`None` for zero).
pub fn block_rate_nats(effective: &CMatrix, p: f64, interference: Option<&CMatrix>) -> Result<f64> {
    let m = effective.nrows();
    let eye = CMatrix::identity(m, m);
    match interference {
        None => ln_det_hpd(&(&eye + effective * real(p))),
        Some(a) => {
            let base = &eye + a;
            Ok(ln_det_hpd(&(&base + effective * real(p)))? - ln_det_hpd(&base)?)
        }
    }
}

/// Multi-user eigenmode transmission. Candidate streams are the rows
/// `s_i v_i^H` of every user's SVD; streams are added greedily while the
/// equal-power zero-forcing sum rate improves, then water-filled.
pub fn met_precoder(users: &[usize], channels: &[CMatrix], total: f64) -> Result<PrecodePlan> {
    if users.len() != channels.len() || users.is_empty() {
        return Err(domain("MET needs one channel per candidate user"));
    }
    let n = channels[0].ncols();
    let mut modes: Vec<(usize, usize, CMatrix)> = Vec::new();
    for (k, h) in channels.iter().enumerate() {
        let dec = svd(h)?;
        let top = dec.s.first().copied().unwrap_or(0.0);
        for i in 0..dec.s.len() {
            if dec.s[i] > RANK_TOL * top && top > 0.0 {
                let row = dec.v_h.rows(i, 1) * real(dec.s[i]);
                modes.push((k, i, row));
            }
        }
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut best = 0.0;
    while chosen.len() < n {
        let mut step: Option<(f64, usize)> = None;
        for c in 0..modes.len() {
            if chosen.contains(&c) {
                continue;
            }
            let trial: Vec<&CMatrix> = chosen.iter().chain(std::iter::once(&c)).map(|&i| &modes[i].2).collect();
            let stacked = stack_rows(trial);
            let Ok(g) = zf_gains(&stacked) else { continue };
            let p = total / g.len() as f64;
            let rate: f64 = g.iter().map(|x| (p * x).ln_1p()).sum();
            if rate.is_finite() && step.is_none_or(|(r, _)| rate > r) {
                step = Some((rate, c));
            }
        }
        match step {
            Some((rate, c)) if rate > best => {
                best = rate;
                chosen.push(c);
            }
            _ => break,
        }
    }
    // Group streams by user, keeping the order in which users were first picked.
    let mut order: Vec<usize> = Vec::new();
    for &c in &chosen {
        if !order.contains(&modes[c].0) {
            order.push(modes[c].0);
        }
    }
    let mut rows = Vec::new();
    let mut owner = Vec::new();
    for &k in &order {
        let mut mine: Vec<usize> = chosen.iter().copied().filter(|&c| modes[c].0 == k).collect();
        mine.sort_by_key(|&c| modes[c].1);
        for c in mine {
            rows.push(modes[c].2.clone());
            owner.push(k);
        }
    }
    let zf = block_zero_forcing(&rows, &vec![1; rows.len()])?;
    let flat_gains: Vec<f64> = zf.iter().map(|(_, g)| g[0]).collect();
    let powers = waterfill(&flat_gains, total);
    let mut blocks: Vec<StreamBlock> = Vec::new();
    for (((dir, g), p), k) in zf.into_iter().zip(powers).zip(owner) {
        if let Some(b) = blocks.iter_mut().find(|b| b.user == users[k]) {
            let mut d = CMatrix::zeros(n, b.streams() + 1);
            d.columns_mut(0, b.streams()).copy_from(&b.directions);
            d.column_mut(b.streams()).copy_from(&dir.column(0));
            b.directions = d;
            b.powers.push(p);
            b.gains.push(g[0]);
        } else {
            blocks.push(StreamBlock { user: users[k], directions: dir, powers: vec![p], gains: g });
        }
    }
    Ok(PrecodePlan { strategy: Strategy::Met, blocks, total_power: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cplx, from_real_rows, semi_unitary_defect};

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut x = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        CMatrix::from_fn(rows, cols, |_, _| {
            let mut next = || {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            cplx(next(), next())
        })
    }

    fn span_eq(a: &CMatrix, b: &CMatrix) -> bool {
        let pa = a * a.adjoint();
        let pb = b * b.adjoint();
        (pa - pb).norm() < 1e-10
    }

    #[test]
    fn null_space_of_unit_rows() {
        let rows = from_real_rows(2, 4, &[1., 0., 0., 0., 0., 1., 0., 0.]);
        let b = null_space_basis(&rows).unwrap();
        let expect = from_real_rows(4, 2, &[0., 0., 0., 0., 1., 0., 0., 1.]);
        assert!(span_eq(&b, &expect));
    }

    #[test]
    fn null_space_with_duplicate_row() {
        let r = lcg_matrix(1, 5, 1);
        let rows = stack_rows([&r, &r]);
        let b = null_space_basis(&rows).unwrap();
        assert_eq!(b.ncols(), 4);
        assert!((&rows * &b).norm() < 1e-10);
    }

    #[test]
    fn null_space_residual_random() {
        let a = lcg_matrix(4, 6, 9);
        let b = null_space_basis(&a).unwrap();
        assert_eq!(b.ncols(), 2);
        assert!((&a * &b).norm() < 1e-10);
        assert!(semi_unitary_defect(&b) < 1e-10);
    }

    #[test]
    fn waterfill_hand_cases() {
        assert_eq!(waterfill(&[1.0, 1.0], 2.0), vec![1.0, 1.0]);
        let p = waterfill(&[4.0, 1.0], 1.0);
        assert!((p[0] - 0.875).abs() < 1e-15 && (p[1] - 0.125).abs() < 1e-15);
        let p = waterfill(&[4.0, 1.0], 0.5);
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1] == 0.0);
        assert_eq!(waterfill(&[0.0, 0.0], 3.0), vec![0.0, 0.0]);
    }

    #[test]
    fn bd_on_orthogonal_users() {
        let h1 = from_real_rows(2, 4, &[1., 2., 0., 0., 3., -1., 0., 0.]);
        let h2 = from_real_rows(2, 4, &[0., 0., 1., 1., 0., 0., 2., -1.]);
        let plan = bd_precoder(&[0, 1], &[h1.clone(), h2.clone()], 4.0, PowerMode::Equal).unwrap();
        let e12 = from_real_rows(4, 2, &[1., 0., 0., 1., 0., 0., 0., 0.]);
        let e34 = from_real_rows(4, 2, &[0., 0., 0., 0., 1., 0., 0., 1.]);
        assert!(span_eq(&plan.blocks[0].directions, &e12));
        assert!(span_eq(&plan.blocks[1].directions, &e34));
        assert!((&h2 * plan.blocks[0].precoder()).norm() < 1e-12);
        assert!(plan.blocks.iter().all(|b| b.powers == vec![1.0, 1.0]));
    }

    #[test]
    fn bd_single_user_is_eigenbeamforming() {
        let h = lcg_matrix(2, 4, 5);
        let plan = bd_precoder(&[3], &[h.clone()], 1.0, PowerMode::Equal).unwrap();
        let v = svd(&h).unwrap().v_h.adjoint();
        assert!(span_eq(&plan.blocks[0].directions, &v));
    }

    #[test]
    fn bd_residual_random() {
        let hs: Vec<CMatrix> = (0..4).map(|k| lcg_matrix(2, 8, 20 + k)).collect();
        let plan = bd_precoder(&[0, 1, 2, 3], &hs, 10.0, PowerMode::Waterfill).unwrap();
        for (k, b) in plan.blocks.iter().enumerate() {
            for (l, h) in hs.iter().enumerate() {
                if l != k {
                    assert!((h * &b.directions).norm() < 1e-9);
                }
            }
        }
        assert!((plan.used_power() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn bd_rejects_oversized_schedule() {
        let hs: Vec<CMatrix> = (0..3).map(|k| lcg_matrix(2, 4, k)).collect();
        assert!(matches!(bd_precoder(&[0, 1, 2], &hs, 1.0, PowerMode::Equal), Err(Error::Domain(_))));
    }

    #[test]
    fn zfc_orthogonal_and_matched_filter() {
        let rows = from_real_rows(2, 2, &[1., 0., 0., 1.]);
        let plan = zfc_precoder(&[0, 1], &rows, 2.0, PowerMode::Equal).unwrap();
        assert!((plan.blocks[0].gains[0] - 1.0).abs() < 1e-15);
        assert!((plan.blocks[0].directions[(0, 0)] - real(1.0)).norm() < 1e-15);
        let h = lcg_matrix(1, 4, 2);
        let plan = zfc_precoder(&[0], &h, 1.0, PowerMode::Equal).unwrap();
        let mf = h.adjoint() / real(h.norm());
        assert!((&plan.blocks[0].directions - mf).norm() < 1e-12);
    }

    #[test]
    fn zfc_matches_pseudo_inverse_columns() {
        let rows = lcg_matrix(8, 8, 77);
        let plan = zfc_precoder(&(0..8).collect::<Vec<_>>(), &rows, 8.0, PowerMode::Equal).unwrap();
        let pinv = rows.clone().pseudo_inverse(1e-14).unwrap();
        for (k, b) in plan.blocks.iter().enumerate() {
            let col = pinv.column(k).into_owned();
            let col = &col / real(col.norm());
            // Same direction up to a unit phase.
            let overlap = (col.adjoint() * &b.directions)[(0, 0)].norm();
            assert!((overlap - 1.0).abs() < 1e-9);
            for l in 0..8 {
                if l != k {
                    assert!((rows.row(l) * &b.directions)[(0, 0)].norm() < 1e-9);
                }
            }
            let gain = (rows.row(k) * &b.directions)[(0, 0)].norm_sqr();
            assert!((gain - b.gains[0]).abs() < 1e-9 * gain);
        }
        let fast = zf_gains(&rows).unwrap();
        for (b, g) in plan.blocks.iter().zip(fast) {
            assert!((b.gains[0] - g).abs() < 1e-8 * g);
        }
    }

    #[test]
    fn degenerate_schedule_rejected() {
        let r = lcg_matrix(1, 4, 3);
        let rows = stack_rows([&r, &r]);
        assert!(matches!(
            zfc_precoder(&[0, 1], &rows, 1.0, PowerMode::Equal),
            Err(Error::DegenerateSchedule { .. })
        ));
    }

    #[test]
    fn single_antenna_bd_equals_zfc() {
        let hs: Vec<CMatrix> = (0..3).map(|k| lcg_matrix(1, 4, 40 + k)).collect();
        let users = [2, 0, 1];
        let bd = bd_precoder(&users, &hs, 3.0, PowerMode::Equal).unwrap();
        let zfc = zfc_precoder(&users, &stack_rows(hs.iter()), 3.0, PowerMode::Equal).unwrap();
        for (a, b) in bd.blocks.iter().zip(&zfc.blocks) {
            assert_eq!(a.directions, b.directions);
            assert_eq!(a.powers, b.powers);
        }
    }

    #[test]
    fn effective_grams_match_projection() {
        let hs: Vec<CMatrix> = (0..3).map(|k| lcg_matrix(2, 6, 60 + k)).collect();
        let grams = bd_effective_grams(&hs).unwrap();
        for k in 0..3 {
            let others = stack_rows(hs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, h)| h));
            let nb = null_space_basis(&others).unwrap();
            let direct = &hs[k] * &nb * nb.adjoint() * hs[k].adjoint();
            assert!((&grams[k] - direct).norm() < 1e-9 * grams[k].norm());
        }
    }

    #[test]
    fn su_svd_waterfills_and_drops_modes() {
        let h = from_real_rows(2, 3, &[2., 0., 0., 0., 1., 0.]);
        let plan = su_svd_precoder(0, &h, 100.0).unwrap();
        let b = &plan.blocks[0];
        assert_eq!(b.streams(), 2);
        // KKT: p1 + 1/4 = p2 + 1 and p1 + p2 = 100.
        assert!((b.powers[0] - 50.375).abs() < 1e-12 && (b.powers[1] - 49.625).abs() < 1e-12);
        let plan = su_svd_precoder(0, &h, 1e-3).unwrap();
        assert_eq!(plan.blocks[0].streams(), 1);
        let rank1 = from_real_rows(2, 2, &[1., 1., 2., 2.]);
        let plan = su_svd_precoder(0, &rank1, 5.0).unwrap();
        assert_eq!(plan.blocks[0].streams(), 1);
        assert!((plan.blocks[0].powers[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn met_gives_dominant_user_all_streams() {
        let strong = from_real_rows(2, 4, &[5., 0., 0., 0., 0., 4., 0., 0.]);
        let weak = lcg_matrix(2, 4, 8) * real(1e-4);
        let plan = met_precoder(&[0, 1], &[strong, weak], 100.0).unwrap();
        assert_eq!(plan.blocks.len(), 1);
        assert_eq!(plan.blocks[0].user, 0);
        assert_eq!(plan.blocks[0].streams(), 2);
    }
}
