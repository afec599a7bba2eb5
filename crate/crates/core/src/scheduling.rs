//! User selection: random sets, greedy capacity-based selection (with an
//! optional average-interference term for imperfect CSI), long-term
//! statistical preselection, stream-allocation statistics and the
//! best-of-K interference-cancellation loss.

use rand::Rng;

use crate::error::{domain, Result};
use crate::linalg::{real, row_space_basis, stack_rows, CMatrix};
use crate::precoding::{bd_effective_grams, block_rate_nats, null_space_basis, PrecodePlan, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    Random,
    Cbsus,
    CbsusRobust,
}

impl Scheduler {
    pub fn label(self) -> &'static str {
        match self {
            Scheduler::Random => "random",
            Scheduler::Cbsus => "cbsus",
            Scheduler::CbsusRobust => "cbsus_robust",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleResult {
    /// Scheduled candidate indices in order of selection.
    pub users: Vec<usize>,
    /// Streams per scheduled user.
    pub streams: Vec<usize>,
    pub scheduler: Scheduler,
    /// Predicted sum rate (bits) of the final set under the selection
    /// objective; zero for random selection.
    pub predicted_rate: f64,
    /// Objective after each accepted greedy step.
    pub history: Vec<f64>,
}

/// `target` distinct users drawn uniformly from `0..k`.
pub fn random_schedule<R: Rng + ?Sized>(k: usize, target: usize, streams: usize, rng: &mut R) -> Result<ScheduleResult> {
    if target == 0 || k < target {
        return Err(domain(format!("cannot pick {target} users out of {k}")));
    }
    let users = rand::seq::index::sample(rng, k, target).into_vec();
    Ok(ScheduleResult {
        streams: vec![streams; users.len()],
        users,
        scheduler: Scheduler::Random,
        predicted_rate: 0.0,
        history: Vec::new(),
    })
}

/// Equal-power predicted sum rate in nats of the blocks `set` out of
/// `channels`, with each user's interference matrix scaled by
/// `P (|S|-1)/|S|`. `None` when the set cannot be zero-forced.
pub fn predicted_sum_rate(
    channels: &[CMatrix],
    set: &[usize],
    power: f64,
    avg_error: Option<&[CMatrix]>,
) -> Option<f64> {
    let blocks: Vec<CMatrix> = set.iter().map(|&k| channels[k].clone()).collect();
    let streams: usize = blocks.iter().map(|b| b.nrows()).sum();
    if streams == 0 || streams > channels[set[0]].ncols() {
        return None;
    }
    let stacked = stack_rows(blocks.iter());
    crate::precoding::check_condition(&stacked).ok()?;
    let grams = bd_effective_grams(&blocks).ok()?;
    let p = power / streams as f64;
    let share = power * (set.len() as f64 - 1.0) / set.len() as f64;
    let mut total = 0.0;
    for (g, &k) in grams.iter().zip(set) {
        let a = avg_error.map(|e| &e[k] * real(share));
        total += block_rate_nats(g, p, a.as_ref()).ok()?;
    }
    total.is_finite().then_some(total)
}

/// Greedy capacity-based user selection over the acquired channels
/// `channels` (BD: the full acquired blocks; ZFC: one effective row per
/// candidate). With `avg_error`, each candidate's error covariance enters as
/// average interference `P (|S|-1)/|S| E_k`.
pub fn cbsus(
    channels: &[CMatrix],
    power: f64,
    strategy: Strategy,
    avg_error: Option<&[CMatrix]>,
) -> Result<ScheduleResult> {
    if channels.is_empty() {
        return Err(domain("no candidates to schedule"));
    }
    if !(power > 0.0) {
        return Err(domain("scheduling needs positive power"));
    }
    let n = channels[0].ncols();
    if channels.iter().any(|h| h.ncols() != n || h.nrows() == 0) {
        return Err(domain("candidate channels must share the transmit dimension"));
    }
    match strategy {
        Strategy::Bd => {}
        Strategy::Zfc if channels.iter().all(|h| h.nrows() == 1) => {}
        Strategy::Zfc => return Err(domain("ZFC scheduling takes one effective row per candidate")),
        other => return Err(domain(format!("{} is not scheduled greedily", other.label()))),
    }
    if let Some(e) = avg_error {
        if e.len() != channels.len() || e.iter().zip(channels).any(|(a, h)| a.nrows() != h.nrows() || !a.is_square()) {
            return Err(domain("need one square error covariance per candidate"));
        }
    }
    let mut set: Vec<usize> = Vec::new();
    let mut rows = 0;
    let mut best = 0.0;
    let mut history = Vec::new();
    loop {
        let mut step: Option<(f64, usize)> = None;
        for k in 0..channels.len() {
            if set.contains(&k) || rows + channels[k].nrows() > n {
                continue;
            }
            let mut trial = set.clone();
            trial.push(k);
            if let Some(r) = predicted_sum_rate(channels, &trial, power, avg_error) {
                if step.is_none_or(|(b, _)| r > b) {
                    step = Some((r, k));
                }
            }
        }
        match step {
            Some((r, k)) if r > best => {
                best = r;
                rows += channels[k].nrows();
                set.push(k);
                history.push(r / std::f64::consts::LN_2);
            }
            _ => break,
        }
    }
    Ok(ScheduleResult {
        streams: set.iter().map(|&k| channels[k].nrows()).collect(),
        users: set,
        scheduler: if avg_error.is_some() { Scheduler::CbsusRobust } else { Scheduler::Cbsus },
        predicted_rate: best / std::f64::consts::LN_2,
        history,
    })
}

/// Indices of the `count` users with the largest `tr(R_T) tr(R_R)`, ties
/// broken by lower index.
pub fn preselect_by_statistics(tx_traces: &[f64], rx_traces: &[f64], count: usize) -> Result<Vec<usize>> {
    if tx_traces.len() != rx_traces.len() {
        return Err(domain("trace lists differ in length"));
    }
    if count > tx_traces.len() {
        return Err(domain(format!("cannot preselect {count} of {} users", tx_traces.len())));
    }
    let mut idx: Vec<usize> = (0..tx_traces.len()).collect();
    idx.sort_by(|&a, &b| {
        let (sa, sb) = (tx_traces[a] * rx_traces[a], tx_traces[b] * rx_traces[b]);
        sb.partial_cmp(&sa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    idx.truncate(count);
    Ok(idx)
}

/// Half-open distance interval `[min, max)` in meters.
#[derive(Debug, Clone)]
pub struct DistanceBin {
    pub label: String,
    pub min: f64,
    pub max: f64,
}

/// Cell-center users (< 100 m) and cell-edge users (> 200 m).
pub fn default_distance_bins() -> Vec<DistanceBin> {
    vec![
        DistanceBin { label: "center".into(), min: 0.0, max: 100.0 },
        DistanceBin { label: "edge".into(), min: 200f64.next_up(), max: f64::INFINITY },
    ]
}

#[derive(Debug, Clone)]
pub struct StreamHistogram {
    pub label: String,
    /// Scheduled users observed in the bin.
    pub count: usize,
    /// Fraction of those users given `1..=max_streams` streams; `None` for
    /// an empty bin.
    pub fractions: Option<Vec<f64>>,
}

impl StreamHistogram {
    pub fn mean_streams(&self) -> Option<f64> {
        self.fractions.as_ref().map(|f| f.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum())
    }
}

/// Distribution of streams per scheduled user in each distance bin, from
/// `(distance of the user, plan)` pairs gathered over trials.
pub fn stream_histogram<'a>(
    plans: impl IntoIterator<Item = (&'a [f64], &'a PrecodePlan)>,
    max_streams: usize,
    bins: &[DistanceBin],
) -> Vec<StreamHistogram> {
    let mut counts = vec![vec![0usize; max_streams]; bins.len()];
    for (distances, plan) in plans {
        for b in &plan.blocks {
            let d = distances[b.user];
            let s = b.streams().clamp(1, max_streams);
            for (bin, row) in bins.iter().zip(counts.iter_mut()) {
                if d >= bin.min && d < bin.max {
                    row[s - 1] += 1;
                }
            }
        }
    }
    bins.iter()
        .zip(counts)
        .map(|(bin, row)| {
            let total: usize = row.iter().sum();
            StreamHistogram {
                label: bin.label.clone(),
                count: total,
                fractions: (total > 0).then(|| row.iter().map(|&c| c as f64 / total as f64).collect()),
            }
        })
        .collect()
}

/// High-SNR loss (bits) of serving channel `h` inside the null space of the
/// stacked co-user rows `co_users`, relative to unconstrained transmission:
/// `-log2 det(B P B^H)` with `B` a row-space basis of `h` and `P` the null
/// space projector, using all `M` dimensions (BD).
pub fn cancellation_loss_bd(h: &CMatrix, co_users: &CMatrix) -> Result<f64> {
    let b = row_space_basis(h)?;
    let null = null_space_basis(co_users)?;
    if null.ncols() < b.ncols() {
        return Err(domain("co-users leave fewer dimensions than the user needs"));
    }
    let x = b.adjoint() * null;
    let g = &x * x.adjoint();
    Ok(-(g.determinant().re.max(0.0)).log2())
}

/// Same loss when the user keeps one dimension chosen by its best receive
/// combination (ZFC): `-log2 ||B^H w||^2` for the single null direction `w`.
pub fn cancellation_loss_zfc(h: &CMatrix, co_users: &CMatrix) -> Result<f64> {
    let b = row_space_basis(h)?;
    let null = null_space_basis(co_users)?;
    if null.ncols() != 1 {
        return Err(domain("ZFC loss needs exactly one free dimension"));
    }
    Ok(-(b.adjoint() * null).norm_squared().log2())
}
