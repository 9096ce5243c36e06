use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sliding::{estimate_cost, CostEstimate, ProblemConstants};

use super::config::{Axis, ExperimentConfig, Method};
use super::run::{run_experiment, RunRecord};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// `ln y − fitted` at each point.
    pub residuals: Vec<f64>,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a scaling fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("scaling axis values must not all be equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = lx.iter().zip(&ly).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(LogLogFit {
        slope,
        intercept,
        residuals,
    })
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub value: f64,
    pub median_grad_gk_calls: f64,
    pub median_grad_f_calls: f64,
    pub runs: usize,
    pub converged_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodScaling {
    pub method: Method,
    pub points: Vec<ScalingPoint>,
    pub grad_gk_fit: LogLogFit,
    pub grad_f_fit: LogLogFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub axis: Axis,
    pub methods: Vec<MethodScaling>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

/// Per-method slopes of per-seed-median counts against the axis value.
pub fn summarize_scaling(axis: &Axis, records: &[RunRecord]) -> Result<ScalingSummary> {
    if axis.values.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a scaling study needs at least 3 axis values, got {}",
            axis.values.len()
        )));
    }
    let mut methods: Vec<Method> = records.iter().map(|r| r.row.method).collect();
    methods.sort_by_key(|m| m.as_str());
    methods.dedup();
    let mut out = Vec::new();
    for method in methods {
        let mut points = Vec::new();
        for &v in &axis.values {
            let cell: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.row.method == method && r.axis_value == Some(v))
                .collect();
            let gk: Vec<f64> = cell.iter().map(|r| r.row.grad_gk_calls as f64).collect();
            let f: Vec<f64> = cell.iter().map(|r| r.row.grad_f_calls as f64).collect();
            points.push(ScalingPoint {
                value: v,
                median_grad_gk_calls: median(&gk),
                median_grad_f_calls: median(&f),
                runs: cell.len(),
                converged_runs: cell.iter().filter(|r| r.row.converged).count(),
            });
        }
        let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
        let gk: Vec<f64> = points.iter().map(|p| p.median_grad_gk_calls).collect();
        let f: Vec<f64> = points.iter().map(|p| p.median_grad_f_calls).collect();
        out.push(MethodScaling {
            method,
            grad_gk_fit: loglog_fit(&xs, &gk)?,
            grad_f_fit: loglog_fit(&xs, &f)?,
            points,
        });
    }
    let mut warnings = Vec::new();
    let ratios: Vec<f64> = axis.values.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().any(|r| (r / ratios[0] - 1.0).abs() > 1e-6) {
        warnings.push("axis values are not geometrically spaced".to_string());
    }
    Ok(ScalingSummary {
        axis: axis.clone(),
        methods: out,
        warnings,
    })
}

/// Runs the experiment along its axis and fits the scaling slopes.
pub fn scaling_study(cfg: &ExperimentConfig) -> Result<(Vec<RunRecord>, ScalingSummary)> {
    let axis = cfg
        .axis
        .clone()
        .ok_or_else(|| Error::config("axis", "a scaling study needs an axis"))?;
    if axis.values.len() < 3 {
        return Err(Error::config(
            "axis.values",
            format!("a scaling study needs at least 3 values, got {}", axis.values.len()),
        ));
    }
    let records = run_experiment(cfg)?;
    let mut summary = summarize_scaling(&axis, &records)?;
    for v in &axis.values {
        let inst = cfg.problem_for(cfg.seeds[0], Some(*v))?.build()?;
        if !inst.objective.regime().m_lf_below_lg {
            summary
                .warnings
                .push(format!("axis value {v}: m*L_f > L_g, outside the separated regime"));
        }
    }
    Ok((records, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodCost {
    pub method: Method,
    pub median_weighted_cost: f64,
    pub median_grad_f_calls: f64,
    pub median_grad_gk_calls: f64,
    pub max_final_gap: f64,
    pub all_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Summary {
    pub costs: Vec<MethodCost>,
    /// Method with the smallest median weighted cost.
    pub winner: Method,
    pub sliding_wins: bool,
    /// Cost-model prediction for the sliding run on the first seed.
    pub predicted: Option<CostEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

/// Sliding against the FGM baseline on one instance family, scored by
/// `grad_gk · s + grad_f · n²`.
pub fn table1_comparison(cfg: &ExperimentConfig) -> Result<(Vec<RunRecord>, Table1Summary)> {
    let mut cfg = cfg.clone();
    for m in [Method::Sliding, Method::FgmBaseline] {
        if !cfg.methods.contains(&m) {
            cfg.methods.push(m);
        }
    }
    cfg.validate()?;
    let mut warnings = Vec::new();
    let p = &cfg.problem;
    if p.loss != crate::problems::LossKind::AbsSmoothed {
        warnings.push("loss is not abs_smoothed; the comparison targets smoothed absolute losses".into());
    }
    if p.s < 10 {
        warnings.push(format!("s = {} is not much larger than 1", p.s));
    }
    let inst = cfg.problem_for(cfg.seeds[0], None)?.build()?;
    let bound = 1.0 / (cfg.eps * p.m as f64);
    if inst.quadratic.lambda_max > bound * (1.0 + 1e-9) {
        warnings.push(format!(
            "lambda_max(C) = {:.3e} exceeds 1/(eps m) = {bound:.3e}",
            inst.quadratic.lambda_max
        ));
    }
    for w in &warnings {
        log::warn!("table1: {w}");
    }
    let predicted = cfg
        .sliding_config()
        .resolve_l(&inst.objective)
        .and_then(|l| estimate_cost(&ProblemConstants::of(&inst.objective), l))
        .ok();

    let records = run_experiment(&cfg)?;
    let mut costs = Vec::new();
    for &method in &cfg.methods {
        let rows: Vec<_> = records.iter().filter(|r| r.row.method == method).map(|r| &r.row).collect();
        let w: Vec<f64> = rows.iter().map(|r| r.weighted_cost()).collect();
        let f: Vec<f64> = rows.iter().map(|r| r.grad_f_calls as f64).collect();
        let gk: Vec<f64> = rows.iter().map(|r| r.grad_gk_calls as f64).collect();
        costs.push(MethodCost {
            method,
            median_weighted_cost: median(&w),
            median_grad_f_calls: median(&f),
            median_grad_gk_calls: median(&gk),
            max_final_gap: rows.iter().map(|r| r.final_gap).fold(f64::NEG_INFINITY, f64::max),
            all_converged: rows.iter().all(|r| r.converged),
        });
    }
    costs.sort_by_key(|c| c.method.as_str());
    let winner = costs
        .iter()
        .min_by(|a, b| a.median_weighted_cost.total_cmp(&b.median_weighted_cost))
        .map(|c| c.method)
        .unwrap_or(Method::Sliding);
    let cost_of = |m: Method| costs.iter().find(|c| c.method == m).map(|c| c.median_weighted_cost);
    let sliding_wins = match (cost_of(Method::Sliding), cost_of(Method::FgmBaseline)) {
        (Some(s), Some(f)) => s < f,
        _ => false,
    };
    Ok((
        records,
        Table1Summary {
            costs,
            winner,
            sliding_wins,
            predicted,
            warnings,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_slope() {
        let xs = [64.0, 256.0, 1024.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.sqrt()).collect();
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 0.5).abs() <= 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() <= 1e-12));
    }

    #[test]
    fn flat_series_slope_zero() {
        let fit = loglog_fit(&[1.0, 10.0, 100.0], &[7.0, 7.0, 7.0]).unwrap();
        assert!(fit.slope.abs() <= 1e-15);
    }

    #[test]
    fn too_few_points() {
        assert!(loglog_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
