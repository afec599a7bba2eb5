//! Evaluation of the closed-form results from `--params` strings.
//!
//! Parameters are `key=value` pairs separated by commas; a value may list
//! several points separated by `;`, and every combination of listed values
//! is evaluated. Powers and training budgets are given in dB.

use std::collections::BTreeMap;
use std::io::Write;

use mimo_downlink::analytics::{
    beta_bd_zfc, beta_heterogeneous_upper, beta_homogeneous_upper, distortion_bd, distortion_qbc,
    expected_effective_gain, feedback_bit_law, mrc_gain, qbc_gain, qbc_gain_any, rate_loss_bound,
    scheduling_loss_bounds, BoundReport, Direction, LossBound,
};
use mimo_downlink::channel::exp_correlation;
use mimo_downlink::csi::training_matrix;
use mimo_downlink::linalg::CMatrix;

use crate::CliError;

pub const NAMES: [&str; 9] = ["Thm1", "Thm2", "Thm3", "Thm4", "Thm5", "Thm6", "Cor1", "Cor2", "LemmaEig"];

fn param_error(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config { path: format!("params.{key}"), message: message.into() }
}

/// Parsed `--params`, keyed by name.
#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, Vec<String>>,
}

impl Params {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| param_error(pair, "expected key=value"))?;
            let list: Vec<String> = v.split(';').map(|x| x.trim().to_string()).collect();
            if list.iter().any(String::is_empty) {
                return Err(param_error(k, "empty value"));
            }
            if values.insert(k.trim().to_string(), list).is_some() {
                return Err(param_error(k, "given twice"));
            }
        }
        Ok(Self { values })
    }

    fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(param_error(k, format!("unknown parameter; expected one of {}", known.join(", ")))),
            None => Ok(()),
        }
    }

    fn list(&self, key: &str, default: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        match (self.values.get(key), default) {
            (Some(v), _) => v
                .iter()
                .map(|x| x.parse::<f64>().map_err(|e| param_error(key, format!("`{x}`: {e}"))))
                .collect(),
            (None, Some(d)) => Ok(d.to_vec()),
            (None, None) => Err(param_error(key, "required")),
        }
    }

    fn scalar(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        let v = self.list(key, default.as_ref().map(std::slice::from_ref))?;
        match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(param_error(key, "takes a single value")),
        }
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        let x = self.scalar(key, None)?;
        if x.fract() != 0.0 || x < 1.0 {
            return Err(param_error(key, "must be a positive integer"));
        }
        Ok(x as usize)
    }

    fn text(&self, key: &str, default: &str) -> Result<String, CliError> {
        match self.values.get(key).map(Vec::as_slice) {
            None => Ok(default.to_string()),
            Some([x]) => Ok(x.clone()),
            Some(_) => Err(param_error(key, "takes a single value")),
        }
    }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn report(name: &str, direction: Direction, values: Vec<(&str, f64)>, inputs: &[(&str, f64)]) -> BoundReport {
    BoundReport {
        name: name.to_string(),
        direction,
        values: values.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
    }
}

fn correlation(m: usize, rho: f64) -> Result<CMatrix, CliError> {
    Ok(exp_correlation(rho, 0.0, m)?.entries().clone())
}

fn eigenvalues(m: usize, rho: f64) -> Result<Vec<f64>, CliError> {
    Ok(exp_correlation(rho, 0.0, m)?.eigenvalues_ascending())
}

/// Evaluates the result `name` (case-insensitive) over all parameter points.
pub fn run_analytic(name: &str, params: &Params) -> Result<Vec<BoundReport>, CliError> {
    let canonical = NAMES
        .iter()
        .find(|n| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| CliError::Config { path: "name".into(), message: format!("unknown result `{name}`; expected one of {}", NAMES.join(", ")) })?;
    let mut out = Vec::new();
    match *canonical {
        "Thm1" => {
            params.check_known(&["n", "m", "rho", "gamma_db"])?;
            let (n, m) = (params.count("n")?, params.count("m")?);
            for rho in params.list("rho", Some(&[0.0]))? {
                let eigs = eigenvalues(m, rho)?;
                let b = beta_bd_zfc(n, m, &vec![eigs.clone(); n / m.max(1)], &vec![eigs.clone(); n], None)?;
                let inputs = [("n", n as f64), ("m", m as f64), ("rho", rho)];
                out.push(report("Thm1", Direction::Estimate, vec![("base", b.base), ("bd_correlation", b.bd_correlation)], &inputs));
                out.push(report("Thm1", Direction::Lower, vec![("beta", b.lower)], &inputs));
                out.push(report(
                    "Thm1",
                    Direction::Upper,
                    vec![("beta", b.upper), ("beta_homogeneous", beta_homogeneous_upper(n, m, &eigs)?)],
                    &inputs,
                ));
            }
            if params.values.contains_key("gamma_db") {
                for g in params.list("gamma_db", None)? {
                    let inputs = [("n", n as f64), ("m", m as f64), ("gamma_db", g)];
                    out.push(report("Thm1", Direction::Upper, vec![("beta_heterogeneous", beta_heterogeneous_upper(n, m, db(g))?)], &inputs));
                }
            }
        }
        "Thm2" => {
            params.check_known(&["n", "m", "k", "c1", "c2"])?;
            let (n, m) = (params.count("n")?, params.count("m")?);
            let (c1, c2) = (params.scalar("c1", None)?, params.scalar("c2", None)?);
            for k in params.list("k", None)? {
                let (bd, zfc) = scheduling_loss_bounds(n, m, k, c1, c2)?;
                let inputs = [("n", n as f64), ("m", m as f64), ("k", k), ("c1", c1), ("c2", c2)];
                out.push(report(
                    "Thm2",
                    Direction::Lower,
                    vec![("loss_bd", bd.unwrap_or(f64::NAN)), ("loss_zfc", zfc.unwrap_or(f64::NAN))],
                    &inputs,
                ));
            }
        }
        "Thm3" | "Thm4" => {
            params.check_known(&["n", "m", "bits", "p_db", "rho"])?;
            let (n, m) = (params.count("n")?, params.count("m")?);
            let rhos = params.list("rho", Some(&[0.0]))?;
            let powers = params.list("p_db", Some(&[]))?;
            for bits in params.list("bits", None)? {
                let (dist, name) = if *canonical == "Thm3" {
                    (distortion_bd(n, m, bits)?, "distortion_bd")
                } else {
                    (distortion_qbc(n, m, bits)?, "distortion_qbc")
                };
                let inputs = [("n", n as f64), ("m", m as f64), ("bits", bits)];
                out.push(report(canonical, Direction::Estimate, vec![(name, dist)], &inputs));
                for &rho in &rhos {
                    for &p in &powers {
                        let bound = if *canonical == "Thm3" {
                            LossBound::BdQuantized { power: db(p), distortion: dist, rx_corr: correlation(m, rho)? }
                        } else {
                            let gain = qbc_gain_any(&eigenvalues(m, rho)?, n)?;
                            LossBound::ZfcQuantized { power: db(p), n, distortion: dist, gain }
                        };
                        let inputs = [("n", n as f64), ("m", m as f64), ("bits", bits), ("rho", rho), ("p_db", p)];
                        out.push(report(canonical, Direction::Upper, vec![("rate_loss", rate_loss_bound(&bound)?)], &inputs));
                    }
                }
            }
        }
        "Thm5" | "Thm6" | "Cor2" => {
            params.check_known(&["n", "m", "p_db", "psi_db", "factor", "noise", "rho"])?;
            let (n, m) = (params.count("n")?, params.count("m")?);
            let noise = params.scalar("noise", Some(1.0))?;
            let fixed = params.values.contains_key("psi_db");
            let factor = params.scalar("factor", Some(1.0))?;
            if fixed && params.values.contains_key("factor") {
                return Err(param_error("factor", "give either psi_db or factor"));
            }
            for rho in params.list("rho", Some(&[0.0]))? {
                let r = correlation(m, rho)?;
                let mean_gain = mrc_gain(&eigenvalues(m, rho)?, n)?;
                for p in params.list("p_db", None)? {
                    let power = db(p);
                    let psi_for = |dims: usize| -> Result<f64, CliError> {
                        Ok(if fixed { db(params.scalar("psi_db", None)?) } else { factor * dims as f64 * power })
                    };
                    let mut values = Vec::new();
                    if *canonical != "Thm6" {
                        let psi = psi_for(m)?;
                        let t = training_matrix(&r.map(|z| z.conj()), psi, noise)?.matrix.adjoint();
                        let bound = LossBound::BdEstimated { power, n, rx_corr: r.clone(), training: t, noise };
                        values.push(("rate_loss_bd", rate_loss_bound(&bound)?));
                    }
                    if *canonical != "Thm5" {
                        let bound = LossBound::ZfcEstimated { power, n, mean_gain, psi: psi_for(1)?, noise };
                        values.push(("rate_loss_zfc", rate_loss_bound(&bound)?));
                    }
                    let inputs = [("n", n as f64), ("m", m as f64), ("rho", rho), ("p_db", p), ("noise", noise)];
                    out.push(report(canonical, Direction::Upper, values, &inputs));
                }
            }
        }
        "Cor1" => {
            params.check_known(&["n", "m", "p_db", "constant"])?;
            let (n, m) = (params.count("n")?, params.count("m")?);
            let c = params.scalar("constant", Some(0.0))?;
            for p in params.list("p_db", None)? {
                let b = feedback_bit_law(n, m, db(p), c)?;
                let inputs = [("n", n as f64), ("m", m as f64), ("p_db", p), ("constant", c)];
                out.push(report(
                    "Cor1",
                    Direction::Estimate,
                    vec![("bits_total", b.total), ("bits_zfc_user", b.per_zfc_user), ("bits_bd_user", b.per_bd_user)],
                    &inputs,
                ));
            }
        }
        "LemmaEig" => {
            params.check_known(&["n", "eigs", "method"])?;
            let n = params.count("n")?;
            let eigs = params.list("eigs", None)?;
            let method = params.text("method", "closed")?;
            let (gain, qbc) = match method.as_str() {
                "closed" => (expected_effective_gain(&eigs, n)?, qbc_gain(&eigs, n)?),
                "robust" => (mrc_gain(&eigs, n)?, qbc_gain_any(&eigs, n)?),
                other => return Err(param_error("method", format!("`{other}` is neither closed nor robust"))),
            };
            let mut inputs: Vec<(&str, f64)> = vec![("n", n as f64)];
            inputs.extend(eigs.iter().map(|&e| ("eig", e)));
            out.push(report("LemmaEig", Direction::Estimate, vec![("mrc_gain", gain), ("qbc_gain", qbc)], &inputs));
        }
        _ => unreachable!("name checked above"),
    }
    Ok(out)
}

fn direction_label(d: Direction) -> &'static str {
    match d {
        Direction::Upper => "upper",
        Direction::Lower => "lower",
        Direction::Estimate => "estimate",
    }
}

/// CSV with one line per reported value: `name,direction,quantity,value,inputs`,
/// where `inputs` lists `key=value` pairs separated by spaces.
pub fn write_reports<W: Write>(reports: &[BoundReport], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "direction", "quantity", "value", "inputs"])?;
    for r in reports {
        let inputs: Vec<String> = r.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        for (q, v) in &r.values {
            w.write_record([r.name.as_str(), direction_label(r.direction), q, &v.to_string(), &inputs.join(" ")])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str, params: &str) -> Vec<BoundReport> {
        run_analytic(name, &Params::parse(params).unwrap()).unwrap()
    }

    fn value(r: &BoundReport, q: &str) -> f64 {
        r.values.iter().find(|(k, _)| k == q).unwrap().1
    }

    #[test]
    fn qbc_distortion_value() {
        let r = run("thm4", "n=6,m=2,bits=5");
        assert!((value(&r[0], "distortion_qbc") - 0.2812).abs() < 5e-5);
    }

    #[test]
    fn rate_difference_falls_with_correlation() {
        let r = run("Thm1", "n=8,m=2,rho=0;0.1;0.2;0.3;0.4;0.5;0.6;0.7;0.8;0.9");
        let lower: Vec<f64> = r.iter().filter(|x| x.direction == Direction::Lower).map(|x| value(x, "beta")).collect();
        let upper: Vec<f64> = r.iter().filter(|x| x.direction == Direction::Upper).map(|x| value(x, "beta")).collect();
        assert_eq!(lower.len(), 10);
        assert!(lower.windows(2).all(|w| w[1] < w[0]));
        assert!(upper.windows(2).all(|w| w[1] < w[0]));
        assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u));
    }

    #[test]
    fn bit_law_is_linear_in_log_power() {
        let r = run("Cor1", "n=4,m=2,p_db=5;10;20;30");
        let totals: Vec<f64> = r.iter().map(|x| value(x, "bits_total")).collect();
        let db = [5.0, 10.0, 20.0, 30.0];
        let slopes: Vec<f64> = (1..4).map(|i| (totals[i] - totals[i - 1]) / (db[i] - db[i - 1])).collect();
        // N(N-M) bits per doubling of P, i.e. per 10 log10(2) dB.
        let expected = 8.0 / (10.0 * 2f64.log10());
        assert!(slopes.iter().all(|s| (s - expected).abs() < 1e-9));
        assert!((value(&run("cor1", "n=4,m=2,p_db=20")[0], "bits_total") - 53.15).abs() < 0.01);
    }

    #[test]
    fn training_laws() {
        let fixed = run("Cor2", "n=4,m=2,p_db=10;20;30,psi_db=10,rho=0.5");
        let prop = run("Cor2", "n=4,m=2,p_db=10;20;30,rho=0.5");
        let f: Vec<f64> = fixed.iter().map(|x| value(x, "rate_loss_zfc")).collect();
        let p: Vec<f64> = prop.iter().map(|x| value(x, "rate_loss_zfc")).collect();
        assert!(f[2] - f[1] > 3.0 && (p[2] - p[1]).abs() < 0.01);
        assert!(value(&prop[0], "rate_loss_bd") > 0.0);
    }

    #[test]
    fn bad_params_name_their_key() {
        match run_analytic("Thm3", &Params::parse("n=4,m=2,bitz=3").unwrap()) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "params.bitz"),
            other => panic!("{other:?}"),
        }
        match run_analytic("Thm3", &Params::parse("n=4,m=2,bits=x").unwrap()) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "params.bits"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(run_analytic("Thm9", &Params::default()), Err(CliError::Config { .. })));
        assert!(Params::parse("n").is_err());
    }

    #[test]
    fn csv_has_one_line_per_value() {
        let r = run("Thm2", "n=4,m=2,k=2;64,c1=1,c2=1");
        let mut buf = Vec::new();
        write_reports(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(1).unwrap().starts_with("Thm2,lower,loss_bd,"));
    }
}
