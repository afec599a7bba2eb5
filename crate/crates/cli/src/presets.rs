//! Named scenario sets reproducing the published experiments.

use crate::scenario::{
    BitsConfig, CellConfig, CombinerChoice, CorrelationSide, CsiConfig, Experiment, PrecoderKind,
    Scenario, SchedulerKind, StrategyConfig, TrainingLawConfig,
};
use crate::CliError;

pub const PRESETS: [&str; 9] = [
    "fig_corr",
    "fig_equal_snr",
    "fig_cell",
    "fig_streams",
    "fig_est_equal",
    "fig_est_cell",
    "fig_est_opportunistic",
    "fig_rvq_scaling",
    "fig_rvq_fixed",
];

pub const DEFAULT_TRIALS: u64 = 2000;

const CELL: CellConfig = CellConfig {
    radius_m: 250.0,
    min_distance_m: 35.0,
    pathloss_exponent: 3.5,
    shadow_std_db: 8.0,
    edge_snr_db: 20.0,
};

const ESTIMATED: CsiConfig = CsiConfig::Estimated { training: TrainingLawConfig::Proportional { factor: 1.0 }, noise: 1.0 };

fn base(id: &str, n: usize, m: usize) -> Scenario {
    Scenario {
        id: id.to_string(),
        tx_antennas: n,
        rx_antennas: m,
        users: Vec::new(),
        snr_db: Vec::new(),
        cell: None,
        rho: vec![0.0],
        correlation: CorrelationSide::Receive,
        experiment: Experiment::SumRate,
        strategies: Vec::new(),
        csi: CsiConfig::Perfect,
        scheduler: SchedulerKind::Cbsus,
        trials: DEFAULT_TRIALS,
        seed: 0,
    }
}

fn bd() -> StrategyConfig {
    StrategyConfig::new(PrecoderKind::Bd)
}

fn zfc() -> StrategyConfig {
    StrategyConfig::new(PrecoderKind::Zfc)
}

fn met() -> StrategyConfig {
    StrategyConfig::new(PrecoderKind::Met)
}

fn su() -> StrategyConfig {
    StrategyConfig::new(PrecoderKind::Su)
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step).round() as usize;
    (0..=count).map(|i| ((start + i as f64 * step) * 1e6).round() / 1e6).collect()
}

/// Scenarios of preset `name`, all using `trials` trials per point.
pub fn preset(name: &str, trials: u64) -> Result<Vec<Scenario>, CliError> {
    let cell_users = vec![8, 12, 16, 20, 24, 32, 40];
    let equal_users = vec![8, 16, 24, 32, 40];
    let rhos = vec![0.0, 0.4, 0.8];
    let mut out = match name {
        "fig_corr" => [CorrelationSide::Receive, CorrelationSide::Transmit, CorrelationSide::Both]
            .into_iter()
            .map(|side| Scenario {
                id: format!("fig_corr_{}", side.label()),
                users: vec![8],
                rho: range(0.0, 0.9, 0.1),
                correlation: side,
                experiment: Experiment::RateDifference,
                scheduler: SchedulerKind::Random,
                ..base("", 8, 2)
            })
            .collect(),
        "fig_equal_snr" => vec![Scenario {
            users: equal_users,
            snr_db: vec![10.0, 20.0],
            rho: rhos,
            strategies: vec![bd(), zfc(), met()],
            ..base(name, 8, 4)
        }],
        "fig_cell" => vec![Scenario {
            users: cell_users,
            cell: Some(CELL),
            rho: rhos,
            strategies: vec![bd(), zfc(), met()],
            ..base(name, 8, 4)
        }],
        "fig_streams" => vec![Scenario {
            users: vec![20],
            cell: Some(CELL),
            strategies: vec![met()],
            ..base(name, 8, 4)
        }],
        "fig_est_equal" => vec![Scenario {
            users: equal_users,
            snr_db: vec![10.0, 20.0],
            rho: rhos,
            strategies: vec![bd(), zfc()],
            csi: ESTIMATED,
            scheduler: SchedulerKind::CbsusRobust,
            ..base(name, 8, 4)
        }],
        "fig_est_cell" => vec![Scenario {
            users: cell_users,
            cell: Some(CELL),
            rho: rhos,
            strategies: vec![bd(), zfc()],
            csi: ESTIMATED,
            scheduler: SchedulerKind::CbsusRobust,
            ..base(name, 8, 4)
        }],
        "fig_est_opportunistic" => vec![Scenario {
            users: cell_users,
            cell: Some(CELL),
            rho: rhos,
            strategies: vec![bd(), zfc(), met()],
            csi: ESTIMATED,
            scheduler: SchedulerKind::StatPreselect,
            ..base(name, 8, 4)
        }],
        "fig_rvq_scaling" => {
            let snr = vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.3];
            vec![
                Scenario {
                    id: "fig_rvq_scaling_quantized".into(),
                    users: vec![8],
                    snr_db: snr.clone(),
                    strategies: vec![bd(), zfc().with_combiner(CombinerChoice::Mesc, true)],
                    csi: CsiConfig::Quantized { bits: BitsConfig::Law { constant: None } },
                    scheduler: SchedulerKind::CbsusRobust,
                    ..base("", 4, 2)
                },
                Scenario {
                    id: "fig_rvq_scaling_perfect".into(),
                    users: vec![8],
                    snr_db: snr,
                    strategies: vec![bd(), su()],
                    ..base("", 4, 2)
                },
            ]
        }
        "fig_rvq_fixed" => vec![Scenario {
            users: vec![6],
            snr_db: range(0.0, 30.0, 5.0),
            strategies: vec![
                bd(),
                zfc().with_combiner(CombinerChoice::Qbc, false),
                zfc().with_combiner(CombinerChoice::Qbc, true),
                su(),
            ],
            csi: CsiConfig::Quantized { bits: BitsConfig::Fixed { bd: 10, zfc: 5 } },
            scheduler: SchedulerKind::Random,
            ..base(name, 6, 2)
        }],
        other => {
            return Err(CliError::Config {
                path: "preset".into(),
                message: format!("unknown preset `{other}`; expected one of {}", PRESETS.join(", ")),
            })
        }
    };
    for s in &mut out {
        s.trials = trials;
        s.validate()?;
    }
    Ok(out)
}
