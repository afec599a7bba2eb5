//! JSON scenario configuration.
//!
//! A scenario fixes the antenna configuration, CSI regime and scheduler and
//! sweeps user counts, SNRs and correlation factors; every strategy in
//! `strategies` is evaluated on the same channel realizations.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mimo_downlink::channel::CellGeometry;
use mimo_downlink::precoding::{PowerMode, Strategy};

use crate::CliError;

fn default_rho() -> Vec<f64> {
    vec![0.0]
}

fn default_trials() -> u64 {
    2000
}

fn default_true() -> bool {
    true
}

fn default_noise() -> f64 {
    1.0
}

fn default_factor() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Average achievable sum rate of each strategy.
    #[default]
    SumRate,
    /// High-SNR BD-minus-ZFC rate offset under random selection, with the
    /// analytic bounds.
    RateDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSide {
    #[default]
    Receive,
    Transmit,
    Both,
}

impl CorrelationSide {
    pub fn label(self) -> &'static str {
        match self {
            CorrelationSide::Receive => "receive",
            CorrelationSide::Transmit => "transmit",
            CorrelationSide::Both => "both",
        }
    }

    pub fn receive(self) -> bool {
        matches!(self, CorrelationSide::Receive | CorrelationSide::Both)
    }

    pub fn transmit(self) -> bool {
        matches!(self, CorrelationSide::Transmit | CorrelationSide::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub radius_m: f64,
    pub min_distance_m: f64,
    pub pathloss_exponent: f64,
    pub shadow_std_db: f64,
    pub edge_snr_db: f64,
}

impl CellConfig {
    pub fn geometry(&self) -> CellGeometry {
        CellGeometry {
            radius: self.radius_m,
            min_distance: self.min_distance_m,
            pathloss_exponent: self.pathloss_exponent,
            shadow_std_db: self.shadow_std_db,
            edge_snr_db: self.edge_snr_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderKind {
    Bd,
    Zfc,
    Met,
    Su,
}

impl PrecoderKind {
    pub fn strategy(self) -> Strategy {
        match self {
            PrecoderKind::Bd => Strategy::Bd,
            PrecoderKind::Zfc => Strategy::Zfc,
            PrecoderKind::Met => Strategy::Met,
            PrecoderKind::Su => Strategy::SingleUser,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CombinerChoice {
    #[default]
    Mrc,
    Qbc,
    Mesc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerChoice {
    Equal,
    Waterfill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub precoder: PrecoderKind,
    /// Preliminary combiner of ZFC users.
    #[serde(default)]
    pub combiner: CombinerChoice,
    /// Apply the MMSE combiner once the precoders are known.
    #[serde(default = "default_true")]
    pub mmse: bool,
    /// Power allocation; water-filling except under quantized CSI.
    #[serde(default)]
    pub power: Option<PowerChoice>,
    #[serde(default)]
    pub label: Option<String>,
}

impl StrategyConfig {
    pub fn new(precoder: PrecoderKind) -> Self {
        Self { precoder, combiner: CombinerChoice::Mrc, mmse: true, power: None, label: None }
    }

    pub fn with_combiner(mut self, combiner: CombinerChoice, mmse: bool) -> Self {
        self.combiner = combiner;
        self.mmse = mmse;
        self
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match self.precoder {
            PrecoderKind::Bd => "BD".into(),
            PrecoderKind::Met => "MET".into(),
            PrecoderKind::Su => "SU".into(),
            PrecoderKind::Zfc => {
                let c = match self.combiner {
                    CombinerChoice::Mrc => "MRC",
                    CombinerChoice::Qbc => "QBC",
                    CombinerChoice::Mesc => "MESC",
                };
                if self.mmse {
                    format!("ZFC-{c}+MMSE")
                } else {
                    format!("ZFC-{c}")
                }
            }
        }
    }

    pub fn power_mode(&self, csi: &CsiConfig) -> PowerMode {
        match (self.power, csi) {
            (Some(PowerChoice::Equal), _) => PowerMode::Equal,
            (Some(PowerChoice::Waterfill), _) => PowerMode::Waterfill,
            (None, CsiConfig::Quantized { .. }) => PowerMode::Equal,
            (None, _) => PowerMode::Waterfill,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BitsConfig {
    /// Fixed codebook sizes per user.
    Fixed { bd: u32, zfc: u32 },
    /// Bits grown with the SNR as `(N - M) log2 P - constant` per effective
    /// dimension; the constant defaults to the value that keeps quantized BD
    /// within one bit per stream of perfect-CSI BD.
    Law {
        #[serde(default)]
        constant: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrainingLawConfig {
    /// `psi = factor * d * P` for `d` estimated dimensions per user.
    Proportional {
        #[serde(default = "default_factor")]
        factor: f64,
    },
    Fixed { psi_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CsiConfig {
    #[default]
    Perfect,
    Quantized { bits: BitsConfig },
    Estimated {
        training: TrainingLawConfig,
        #[serde(default = "default_noise")]
        noise: f64,
    },
}

impl CsiConfig {
    pub fn label(&self) -> &'static str {
        match self {
            CsiConfig::Perfect => "perfect",
            CsiConfig::Quantized { .. } => "quantized",
            CsiConfig::Estimated { .. } => "estimated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Random,
    #[default]
    Cbsus,
    CbsusRobust,
    /// CSI acquired only from the statistically strongest users, followed
    /// by robust greedy selection.
    StatPreselect,
}

impl SchedulerKind {
    pub fn label(self) -> &'static str {
        match self {
            SchedulerKind::Random => "random",
            SchedulerKind::Cbsus => "cbsus",
            SchedulerKind::CbsusRobust => "cbsus_robust",
            SchedulerKind::StatPreselect => "stat_preselect",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    /// Candidate user counts `K`.
    pub users: Vec<usize>,
    /// Average SNR per user (dB); exclusive with `cell`.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub cell: Option<CellConfig>,
    #[serde(default = "default_rho")]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub correlation: CorrelationSide,
    #[serde(default)]
    pub experiment: Experiment,
    #[serde(default)]
    pub strategies: Vec<StrategyConfig>,
    #[serde(default)]
    pub csi: CsiConfig,
    #[serde(default)]
    pub scheduler: SchedulerKind,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), message: message.into() }
}

impl Scenario {
    /// Parses and validates a JSON scenario.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let (n, m) = (self.tx_antennas, self.rx_antennas);
        if m == 0 || m >= n {
            return Err(config_error("rx_antennas", format!("need 1 <= M < N, got M={m}, N={n}")));
        }
        if self.id.is_empty() || self.id.contains([',', '"', '\n']) {
            return Err(config_error("id", "must be non-empty without commas, quotes or newlines"));
        }
        if self.trials == 0 {
            return Err(config_error("trials", "must be positive"));
        }
        if self.users.is_empty() {
            return Err(config_error("users", "at least one user count is required"));
        }
        if self.rho.is_empty() {
            return Err(config_error("rho", "at least one correlation factor is required"));
        }
        for (i, r) in self.rho.iter().enumerate() {
            if !(0.0..1.0).contains(r) {
                return Err(config_error(format!("rho[{i}]"), "correlation factor must lie in [0, 1)"));
            }
        }
        match (&self.cell, self.snr_db.is_empty()) {
            (Some(_), false) => return Err(config_error("snr_db", "give either snr_db or cell, not both")),
            (None, true) if self.experiment == Experiment::SumRate => {
                return Err(config_error("snr_db", "give snr_db values or a cell"))
            }
            _ => {}
        }
        for (i, s) in self.snr_db.iter().enumerate() {
            if !s.is_finite() {
                return Err(config_error(format!("snr_db[{i}]"), "must be finite"));
            }
        }
        if let Some(cell) = &self.cell {
            cell.geometry().validate().map_err(|e| config_error("cell", e.to_string()))?;
        }
        match self.experiment {
            Experiment::RateDifference => {
                if n % m != 0 {
                    return Err(config_error("rx_antennas", "rate-difference experiments need N/M integer"));
                }
                if self.cell.is_some() {
                    return Err(config_error("cell", "rate-difference experiments use equal SNR"));
                }
                if !matches!(self.csi, CsiConfig::Perfect) {
                    return Err(config_error("csi", "rate-difference experiments assume perfect CSI"));
                }
            }
            Experiment::SumRate => {
                if self.strategies.is_empty() {
                    return Err(config_error("strategies", "at least one strategy is required"));
                }
                let greedy = self.scheduler != SchedulerKind::Random;
                for (i, k) in self.users.iter().enumerate() {
                    if *k == 0 {
                        return Err(config_error(format!("users[{i}]"), "must be positive"));
                    }
                    if greedy && *k < n {
                        return Err(config_error(format!("users[{i}]"), "scheduling needs K >= N candidates"));
                    }
                }
            }
        }
        for (i, s) in self.strategies.iter().enumerate() {
            let path = |f: &str| format!("strategies[{i}].{f}");
            if s.combiner != CombinerChoice::Mrc && s.precoder != PrecoderKind::Zfc {
                return Err(config_error(path("combiner"), "only ZFC uses a preliminary combiner"));
            }
            match (&self.csi, s.precoder, s.combiner) {
                (CsiConfig::Quantized { .. }, PrecoderKind::Zfc, CombinerChoice::Mrc) => {
                    return Err(config_error(path("combiner"), "quantized ZFC needs QBC or MESC"));
                }
                (CsiConfig::Quantized { .. }, PrecoderKind::Met, _) => {
                    return Err(config_error(path("precoder"), "MET is not defined for quantized CSI"));
                }
                (CsiConfig::Perfect | CsiConfig::Estimated { .. }, PrecoderKind::Zfc, c) if c != CombinerChoice::Mrc => {
                    return Err(config_error(path("combiner"), "QBC and MESC need quantized CSI"));
                }
                _ => {}
            }
        }
        match self.csi {
            CsiConfig::Estimated { noise, training } => {
                if !(noise > 0.0 && noise.is_finite()) {
                    return Err(config_error("csi.noise", "must be positive"));
                }
                if let TrainingLawConfig::Proportional { factor } = training {
                    if !(factor > 0.0) {
                        return Err(config_error("csi.training.factor", "must be positive"));
                    }
                }
            }
            CsiConfig::Quantized { bits: BitsConfig::Fixed { bd, zfc } } => {
                if bd > mimo_downlink::csi::MAX_BITS || zfc > mimo_downlink::csi::MAX_BITS {
                    return Err(config_error("csi.bits", format!("at most {} bits", mimo_downlink::csi::MAX_BITS)));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Short SHA-256 digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    /// `(SNR label in dB, linear transmit power)` for every SNR point.
    pub fn power_points(&self) -> Vec<(f64, f64)> {
        match &self.cell {
            Some(c) => vec![(c.edge_snr_db, c.geometry().transmit_power())],
            None => self.snr_db.iter().map(|&db| (db, 10f64.powf(db / 10.0))).collect(),
        }
    }
}
