//! Growth-class selection for a series of (size, average transient) points.
//!
//! The candidate models are constant, a·ln n + b, a·n + b, a·n² + b·n + c and
//! a·e^(b·n). All are fitted by ordinary least squares in their natural
//! parameterization and scored by R² in their fitting space — the original
//! y-space for everything except the exponential, which is fitted and scored
//! on ln y. Selection prefers the least complex model whose R² is within a
//! small window of the best, and a label is only assigned when the winning
//! R² clears 0.85; the exponential sits last in the complexity order, so it
//! wins only when it beats every same-space competitor outright.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ca::EcaRule;
use crate::estimator::{EstimateStatus, TransientEstimate};

/// One point of a growth series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub size: u32,
    pub estimate: TransientEstimate,
}

/// Ordered (size, average transient) points, the input to classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    /// Usable points, sizes strictly increasing.
    pub points: Vec<SeriesPoint>,
    /// Budget-limited sizes encountered before the series ended. Systems
    /// with modular structure (e.g. a map that is a bijection on every
    /// second size, with enormous attractors there) can have unmeasurable
    /// sizes interleaved with measurable ones.
    pub limited: Vec<SeriesPoint>,
}

impl GrowthSeries {
    /// Build a series from bare (size, mean) pairs; used by tests and
    /// synthetic-data callers.
    pub fn from_means(points: &[(u32, f64)]) -> Self {
        GrowthSeries {
            points: points
                .iter()
                .map(|&(size, mean)| SeriesPoint {
                    size,
                    estimate: TransientEstimate {
                        mean,
                        std: 0.0,
                        m: 0,
                        rel_halfwidth: None,
                        status: EstimateStatus::Converged,
                        attempted: 0,
                        exhausted: 0,
                    },
                })
                .collect(),
            limited: Vec::new(),
        }
    }
}

/// Fit model shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Constant,
    Log,
    Linear,
    Quadratic,
    Exponential,
}

impl ModelKind {
    /// Order used for nested-model tie-breaking (constant never competes).
    fn complexity(self) -> u8 {
        match self {
            ModelKind::Constant => 0,
            ModelKind::Log => 1,
            ModelKind::Linear => 2,
            ModelKind::Quadratic => 3,
            ModelKind::Exponential => 4,
        }
    }
}

/// A fitted model: parameters in the model's natural order and R² computed
/// in the model's fitting space (original y-space; ln y for the
/// exponential).
///
/// Parameter order: Constant `[c]`; Log `[a, b]` for a·ln n + b; Linear
/// `[a, b]` for a·n + b; Quadratic `[a, b, c]`; Exponential `[a, b]` for
/// a·e^(b·n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: ModelKind,
    pub params: Vec<f64>,
    pub r_squared: f64,
}

impl ModelFit {
    /// Evaluate the fitted model at size x.
    pub fn predict(&self, x: f64) -> f64 {
        match self.model {
            ModelKind::Constant => self.params[0],
            ModelKind::Log => self.params[0] * x.ln() + self.params[1],
            ModelKind::Linear => self.params[0] * x + self.params[1],
            ModelKind::Quadratic => (self.params[0] * x + self.params[1]) * x + self.params[2],
            ModelKind::Exponential => self.params[0] * (self.params[1] * x).exp(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitError {
    #[error("need at least {need} points for this model, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("exponential model infeasible: series contains a non-positive mean")]
    ExponentialInfeasible,
    #[error("degenerate design matrix (collinear sizes)")]
    Degenerate,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("need at least {MIN_POINTS} points to classify, got {got}")]
    TooFewPoints { got: usize },
    #[error("series contains a budget-limited point at size {size}")]
    BudgetLimitedPoint { size: u32 },
}

/// Growth-class labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Bounded,
    Log,
    Lin,
    Poly,
    Exp,
    Unclassified,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Label::Bounded => "Bounded",
            Label::Log => "Log",
            Label::Lin => "Lin",
            Label::Poly => "Poly",
            Label::Exp => "Exp",
            Label::Unclassified => "Unclassified",
        };
        write!(f, "{name}")
    }
}

/// Analytic side-channel annotations attached to a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotation {
    /// The local rule is an affine Boolean function with at least two
    /// essential inputs; measured growth forms grid-size-dependent patterns
    /// that no candidate model captures.
    AffineRule,
    /// An elementary rule known to alternate between ordered and chaotic
    /// behavior depending on the initial configuration.
    KnownFractal,
}

/// The selected growth class with its supporting fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    /// The winning fit. `None` when the label came from the boundedness
    /// screen (no model fit backs it) or when no model was feasible.
    pub fit: Option<ModelFit>,
    /// Fitted slope, present exactly when the label is `Lin`.
    pub lin_slope: Option<f64>,
    pub annotations: BTreeSet<Annotation>,
}

/// Minimum number of points required for classification.
pub const MIN_POINTS: usize = 6;

/// R² a fit must reach for its label to be assigned.
pub const R2_GATE: f64 = 0.85;

/// Window below the best R² within which a less complex model wins.
pub const TIE_BREAK_WINDOW: f64 = 0.01;

/// Relative spread/rise below which a series counts as bounded.
pub const BOUNDED_SPREAD: f64 = 0.15;

fn ssq_about(ys: &[f64], center: f64) -> f64 {
    ys.iter().map(|&y| (y - center) * (y - center)).sum()
}

/// R² in the original y-space: 1 − SS_res / SS_tot, with SS_tot about the
/// y-mean. Flat data (SS_tot ≈ 0) scores 0 by convention.
fn r_squared(ys: &[f64], predictions: &[f64]) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot = ssq_about(ys, mean);
    if ss_tot <= f64::MIN_POSITIVE {
        return 0.0;
    }
    let ss_res: f64 = ys
        .iter()
        .zip(predictions)
        .map(|(&y, &p)| (y - p) * (y - p))
        .sum();
    1.0 - ss_res / ss_tot
}

/// Ordinary least squares y ≈ a·x + b.
fn ols_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), FitError> {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() <= f64::MIN_POSITIVE {
        return Err(FitError::Degenerate);
    }
    let a = (n * sxy - sx * sy) / denom;
    let b = (sy - a * sx) / n;
    Ok((a, b))
}

/// Least squares y ≈ a·x² + b·x + c via the 3×3 normal equations.
fn ols_quadratic(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64), FitError> {
    let n = xs.len() as f64;
    let mut s = [0.0f64; 5]; // Σx^k for k = 0..4
    s[0] = n;
    let mut t = [0.0f64; 3]; // Σ x^k·y for k = 0..2
    for (&x, &y) in xs.iter().zip(ys) {
        let x2 = x * x;
        s[1] += x;
        s[2] += x2;
        s[3] += x2 * x;
        s[4] += x2 * x2;
        t[0] += y;
        t[1] += x * y;
        t[2] += x2 * y;
    }
    // Normal equations for (c, b, a) with rows ordered by power.
    let mut m = [
        [s[0], s[1], s[2], t[0]],
        [s[1], s[2], s[3], t[1]],
        [s[2], s[3], s[4], t[2]],
    ];
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot][col].abs() <= f64::MIN_POSITIVE {
            return Err(FitError::Degenerate);
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let c = m[0][3] / m[0][0];
    let b = m[1][3] / m[1][1];
    let a = m[2][3] / m[2][2];
    Ok((a, b, c))
}

/// Fit one model to the series by ordinary least squares.
pub fn fit_model(series: &GrowthSeries, model: ModelKind) -> Result<ModelFit, FitError> {
    let xs: Vec<f64> = series.points.iter().map(|p| f64::from(p.size)).collect();
    let ys: Vec<f64> = series.points.iter().map(|p| p.estimate.mean).collect();
    let min_points = match model {
        ModelKind::Constant => 1,
        ModelKind::Quadratic => 3,
        _ => 2,
    };
    if xs.len() < min_points {
        return Err(FitError::TooFewPoints {
            need: min_points,
            got: xs.len(),
        });
    }
    let (params, predictions): (Vec<f64>, Vec<f64>) = match model {
        ModelKind::Constant => {
            let c = ys.iter().sum::<f64>() / ys.len() as f64;
            (vec![c], vec![c; ys.len()])
        }
        ModelKind::Log => {
            let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let (a, b) = ols_line(&lx, &ys)?;
            let preds = lx.iter().map(|l| a * l + b).collect();
            (vec![a, b], preds)
        }
        ModelKind::Linear => {
            let (a, b) = ols_line(&xs, &ys)?;
            let preds = xs.iter().map(|x| a * x + b).collect();
            (vec![a, b], preds)
        }
        ModelKind::Quadratic => {
            let (a, b, c) = ols_quadratic(&xs, &ys)?;
            let preds = xs.iter().map(|&x| (a * x + b) * x + c).collect();
            (vec![a, b, c], preds)
        }
        ModelKind::Exponential => {
            if ys.iter().any(|&y| y <= 0.0) {
                return Err(FitError::ExponentialInfeasible);
            }
            // Fitted and scored in log space. Transient growth wobbles
            // multiplicatively (a factor of 2–3 around the envelope is
            // normal for chaotic rules), so an original-space score is
            // dominated by whichever point happens to end the series;
            // in log space the wobble is ordinary residual noise.
            let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
            let (b, ln_a) = ols_line(&xs, &ly)?;
            let preds: Vec<f64> = xs.iter().map(|&x| ln_a + b * x).collect();
            return Ok(ModelFit {
                model,
                params: vec![ln_a.exp(), b],
                r_squared: r_squared(&ly, &preds),
            });
        }
    };
    Ok(ModelFit {
        model,
        params,
        r_squared: r_squared(&ys, &predictions),
    })
}

/// Growth-coefficient sign check: a fit only competes when it actually grows.
fn grows(fit: &ModelFit) -> bool {
    match fit.model {
        ModelKind::Constant => false,
        ModelKind::Log | ModelKind::Linear | ModelKind::Quadratic => fit.params[0] > 0.0,
        ModelKind::Exponential => fit.params[1] > 0.0,
    }
}

/// Exponential-vs-power discrimination. Log-magnitudes of exponential data
/// are straight against n; log-magnitudes of any power-family data (linear,
/// quadratic, power laws) are straight against ln n. Because the log
/// transform compresses deviations, an exponential fit scores well on *any*
/// smooth growth, so it is only allowed to compete when it explains the
/// log-magnitudes at least as well as the power-law alternative.
fn exponential_beats_power_law(points: &[(f64, f64)]) -> bool {
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    let lxs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let lys: Vec<f64> = points.iter().map(|&(_, y)| y.ln()).collect();
    let score = |inputs: &[f64]| -> Option<f64> {
        let (slope, intercept) = ols_line(inputs, &lys).ok()?;
        let preds: Vec<f64> = inputs.iter().map(|&x| slope * x + intercept).collect();
        Some(r_squared(&lys, &preds))
    };
    match (score(&xs), score(&lxs)) {
        (Some(semilog), Some(loglog)) => semilog >= loglog,
        _ => false,
    }
}

/// True when the tail of the series has leveled off: a line fitted to the
/// upper half rises by at most [`BOUNDED_SPREAD`] of the tail's mean level
/// over the tail's span. Individual points carry sampling noise that the raw
/// spread test amplifies; the fitted rise averages it away.
fn levels_off(points: &[(f64, f64)]) -> bool {
    let tail = &points[points.len() / 2..];
    if tail.len() < 3 {
        return false;
    }
    let xs: Vec<f64> = tail.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, y)| y).collect();
    let level = ys.iter().sum::<f64>() / ys.len() as f64;
    let Ok((slope, _)) = ols_line(&xs, &ys) else {
        return false;
    };
    let rise = (slope * (xs[xs.len() - 1] - xs[0])).abs();
    rise <= BOUNDED_SPREAD * level.max(f64::MIN_POSITIVE)
}

/// Classify a growth series.
///
/// Sizes whose mean is exactly zero are degenerate — every sampled
/// configuration already sits on an attractor, as happens when the update
/// map is a bijection at that size — so they carry no growth information and
/// are excluded from fitting. A series that is all zero, or whose nonzero
/// means have relative spread within [`BOUNDED_SPREAD`], is Bounded outright
/// (a constant fit always scores R² = 0, so boundedness can never win a fit
/// comparison). Otherwise the growing models compete on R² over the nonzero
/// points — the exponential only when it survives the power-law
/// discrimination (see [`exponential_beats_power_law`]) — the least complex
/// model within [`TIE_BREAK_WINDOW`] of the best is selected, and its label
/// is assigned if its R² reaches [`R2_GATE`]. When no fit clears the gate
/// but the series has leveled off, the series is Bounded; failing that it
/// is Unclassified.
pub fn classify(series: &GrowthSeries) -> Result<Classification, ClassifyError> {
    if series.points.len() < MIN_POINTS {
        return Err(ClassifyError::TooFewPoints {
            got: series.points.len(),
        });
    }
    if let Some(p) = series
        .points
        .iter()
        .find(|p| p.estimate.status == EstimateStatus::BudgetLimited)
    {
        return Err(ClassifyError::BudgetLimitedPoint { size: p.size });
    }

    let positive: Vec<(f64, f64)> = series
        .points
        .iter()
        .filter(|p| p.estimate.mean > 0.0)
        .map(|p| (f64::from(p.size), p.estimate.mean))
        .collect();
    if positive.is_empty() {
        return Ok(bounded());
    }
    let ys: Vec<f64> = positive.iter().map(|&(_, y)| y).collect();
    let level = ys.iter().sum::<f64>() / ys.len() as f64;
    let max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if (max - min) / level.max(f64::MIN_POSITIVE) <= BOUNDED_SPREAD {
        return Ok(bounded());
    }
    if positive.len() < MIN_POINTS {
        return Ok(Classification {
            label: Label::Unclassified,
            fit: None,
            lin_slope: None,
            annotations: BTreeSet::new(),
        });
    }

    let fit_series = GrowthSeries::from_means(
        &positive
            .iter()
            .map(|&(x, y)| (x as u32, y))
            .collect::<Vec<_>>(),
    );
    let exponential_feasible = exponential_beats_power_law(&positive);
    let candidates: Vec<ModelFit> = [
        ModelKind::Log,
        ModelKind::Linear,
        ModelKind::Quadratic,
        ModelKind::Exponential,
    ]
    .into_iter()
    .filter(|&model| model != ModelKind::Exponential || exponential_feasible)
    .filter_map(|model| fit_model(&fit_series, model).ok())
    .filter(grows)
    .collect();

    let selected = candidates
        .iter()
        .map(|f| f.r_squared)
        .max_by(f64::total_cmp)
        .map(|best_r2| {
            candidates
                .iter()
                .filter(|f| f.r_squared >= best_r2 - TIE_BREAK_WINDOW)
                .min_by_key(|f| f.model.complexity())
                .expect("at least the best fit survives its own window")
                .clone()
        });

    match selected {
        Some(fit) if fit.r_squared >= R2_GATE => {
            let label = match fit.model {
                ModelKind::Log => Label::Log,
                ModelKind::Linear => Label::Lin,
                ModelKind::Quadratic => Label::Poly,
                ModelKind::Exponential => Label::Exp,
                ModelKind::Constant => unreachable!("constant never competes"),
            };
            let lin_slope = (label == Label::Lin).then(|| fit.params[0]);
            Ok(Classification {
                label,
                fit: Some(fit),
                lin_slope,
                annotations: BTreeSet::new(),
            })
        }
        _ if levels_off(&positive) => Ok(bounded()),
        selected => Ok(Classification {
            label: Label::Unclassified,
            fit: selected,
            lin_slope: None,
            annotations: BTreeSet::new(),
        }),
    }
}

fn bounded() -> Classification {
    Classification {
        label: Label::Bounded,
        fit: None,
        lin_slope: None,
        annotations: BTreeSet::new(),
    }
}

/// The affine form of an elementary rule, when one exists:
/// f(x, y, z) = a₀ ⊕ a₁x ⊕ a₂y ⊕ a₃z over GF(2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineForm {
    pub constant: u8,
    /// Coefficients of (left, center, right).
    pub coeffs: [u8; 3],
}

impl AffineForm {
    /// Number of inputs with a nonzero coefficient.
    pub fn essential_inputs(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }
}

/// Check whether the rule is an affine Boolean function by testing all 16
/// coefficient vectors against the 8 table entries.
pub fn affine_form(rule: &EcaRule) -> Option<AffineForm> {
    for mask in 0..16u8 {
        let form = AffineForm {
            constant: mask & 1,
            coeffs: [(mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1],
        };
        let matches = (0..8u8).all(|idx| {
            let (x, y, z) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            let value =
                form.constant ^ (form.coeffs[0] & x) ^ (form.coeffs[1] & y) ^ (form.coeffs[2] & z);
            value == rule.next(x, y, z)
        });
        if matches {
            return Some(form);
        }
    }
    None
}

/// Elementary rules (canonical numbers) whose behavior is known to flip
/// between ordered and chaotic with the initial configuration; their growth
/// data typically fits no candidate model.
pub const KNOWN_FRACTAL_ECA: [u8; 4] = [18, 122, 126, 146];

/// Annotations for an elementary rule: affine with at least two essential
/// inputs, or a known initial-configuration-sensitive rule.
pub fn eca_annotations(rule: &EcaRule) -> BTreeSet<Annotation> {
    let mut set = BTreeSet::new();
    if affine_form(rule).is_some_and(|f| f.essential_inputs() >= 2) {
        set.insert(Annotation::AffineRule);
    }
    if KNOWN_FRACTAL_ECA.contains(&rule.canonical_number()) {
        set.insert(Annotation::KnownFractal);
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from_fn(
        range: std::ops::RangeInclusive<u32>,
        f: impl Fn(f64) -> f64,
    ) -> GrowthSeries {
        let points: Vec<(u32, f64)> = range.map(|n| (n, f(f64::from(n)))).collect();
        GrowthSeries::from_means(&points)
    }

    #[test]
    fn exact_linear_data_recovers_parameters() {
        let series = series_from_fn(3..=12, |n| 2.0 * n + 1.0);
        let fit = fit_model(&series, ModelKind::Linear).unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-9);
        assert!((fit.params[1] - 1.0).abs() < 1e-9);
        assert!(fit.r_squared >= 1.0 - 1e-9);
    }

    #[test]
    fn constant_data_scores_zero_r2() {
        let series = series_from_fn(3..=12, |_| 5.0);
        let fit = fit_model(&series, ModelKind::Constant).unwrap();
        assert_eq!(fit.params[0], 5.0);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn exponential_data_round_trips_through_log_fit() {
        let series = series_from_fn(3..=12, |n| 3.0 * (0.4 * n).exp());
        let fit = fit_model(&series, ModelKind::Exponential).unwrap();
        assert!((fit.params[0] - 3.0).abs() < 1e-6);
        assert!((fit.params[1] - 0.4).abs() < 1e-9);
        assert!(fit.r_squared >= 0.999);
    }

    #[test]
    fn exponential_refuses_zero_means() {
        let series = GrowthSeries::from_means(&[(3, 0.0), (4, 1.0), (5, 2.0)]);
        assert_eq!(
            fit_model(&series, ModelKind::Exponential),
            Err(FitError::ExponentialInfeasible)
        );
    }

    #[test]
    fn all_zero_series_is_bounded() {
        let series = series_from_fn(3..=12, |_| 0.0);
        assert_eq!(classify(&series).unwrap().label, Label::Bounded);
    }

    #[test]
    fn flat_noisy_series_is_bounded() {
        // ±8% wiggle around a constant level: spread exceeds nothing the
        // models explain, rise is negligible.
        let wiggles = [1.05, 0.95, 1.08, 0.92, 1.0, 1.06, 0.94, 1.02, 0.97, 1.01];
        let points: Vec<(u32, f64)> = (0..10).map(|i| (i as u32 + 3, 4.0 * wiggles[i])).collect();
        let series = GrowthSeries::from_means(&points);
        assert_eq!(classify(&series).unwrap().label, Label::Bounded);
    }

    #[test]
    fn exact_model_data_recovers_each_label() {
        let cases: Vec<(GrowthSeries, Label)> = vec![
            (series_from_fn(3..=20, |n| 3.0 * n.ln() + 1.0), Label::Log),
            (series_from_fn(3..=20, |n| 2.5 * n + 4.0), Label::Lin),
            (series_from_fn(3..=20, |n| 0.5 * n * n + n), Label::Poly),
            (
                series_from_fn(3..=20, |n| 0.7 * (0.5 * n).exp()),
                Label::Exp,
            ),
        ];
        for (series, expected) in cases {
            let c = classify(&series).unwrap();
            assert_eq!(c.label, expected);
            assert!(c.fit.unwrap().r_squared >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn quadratic_beats_linear_outside_tie_break_window() {
        let series = series_from_fn(3..=20, |n| 0.5 * n * n + n);
        let c = classify(&series).unwrap();
        assert_eq!(c.label, Label::Poly);
        let linear = fit_model(&series, ModelKind::Linear).unwrap();
        let quad = fit_model(&series, ModelKind::Quadratic).unwrap();
        assert!(
            linear.r_squared < quad.r_squared - TIE_BREAK_WINDOW,
            "tie-break window would not exclude the linear fit: {} vs {}",
            linear.r_squared,
            quad.r_squared
        );
    }

    #[test]
    fn exponential_label_survives_multiplicative_wobble() {
        // Alternating ×2 / ×0.5 wobble around e^(0.5 n): in log space this
        // is symmetric noise; the envelope is unmistakably exponential.
        let points: Vec<(u32, f64)> = (3..=24)
            .map(|n| {
                let wobble = if n % 2 == 0 { 2.0 } else { 0.5 };
                (n, wobble * (0.5 * f64::from(n)).exp())
            })
            .collect();
        let series = GrowthSeries::from_means(&points);
        assert_eq!(classify(&series).unwrap().label, Label::Exp);
    }

    #[test]
    fn exponential_cannot_steal_wobbly_linear_data() {
        // The same wobble pattern around a linear trend must stay Lin (or at
        // worst Unclassified) — never Exp: log-magnitudes of linear data are
        // straighter against ln n than against n.
        let points: Vec<(u32, f64)> = (3..=40)
            .map(|n| {
                let wobble = if n % 2 == 0 { 1.25 } else { 0.8 };
                (n, wobble * 3.0 * f64::from(n))
            })
            .collect();
        let series = GrowthSeries::from_means(&points);
        let label = classify(&series).unwrap().label;
        assert_ne!(label, Label::Exp);
    }

    #[test]
    fn lin_label_carries_slope() {
        let series = series_from_fn(3..=20, |n| 2.5 * n + 4.0);
        let c = classify(&series).unwrap();
        assert_eq!(c.label, Label::Lin);
        assert!((c.lin_slope.unwrap() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let series = series_from_fn(3..=7, |n| n);
        assert_eq!(
            classify(&series).unwrap_err(),
            ClassifyError::TooFewPoints { got: 5 }
        );
    }

    #[test]
    fn budget_limited_point_is_refused() {
        let mut series = series_from_fn(3..=12, |n| n);
        series.points[4].estimate.status = EstimateStatus::BudgetLimited;
        assert_eq!(
            classify(&series).unwrap_err(),
            ClassifyError::BudgetLimitedPoint { size: 7 }
        );
    }

    #[test]
    fn decreasing_series_is_unclassified() {
        let series = series_from_fn(3..=12, |n| 100.0 - 5.0 * n);
        let c = classify(&series).unwrap();
        assert_eq!(c.label, Label::Unclassified);
        assert!(c.fit.is_none());
    }

    #[test]
    fn affine_rules_have_expected_forms() {
        use crate::ca::EcaRule;
        for k in [60u8, 90, 105, 150] {
            let form = affine_form(&EcaRule::from_wolfram(k)).unwrap_or_else(|| {
                panic!("rule {k} should be affine");
            });
            assert!(form.essential_inputs() >= 2, "rule {k}");
        }
        // Constant rule: affine with zero essential inputs.
        let form = affine_form(&EcaRule::from_wolfram(0)).unwrap();
        assert_eq!(form.essential_inputs(), 0);
        // Rule 110 is not affine.
        assert_eq!(affine_form(&EcaRule::from_wolfram(110)), None);
    }

    #[test]
    fn affine_scan_of_representatives_finds_exactly_four() {
        use crate::ca::{canonical_representatives, EcaRule};
        let affine: Vec<u8> = canonical_representatives()
            .into_iter()
            .filter(|&k| {
                affine_form(&EcaRule::from_wolfram(k)).is_some_and(|f| f.essential_inputs() >= 2)
            })
            .collect();
        assert_eq!(affine, vec![60, 90, 105, 150]);
    }

    #[test]
    fn eca_annotations_mark_affine_and_fractal() {
        use crate::ca::EcaRule;
        assert!(eca_annotations(&EcaRule::from_wolfram(90)).contains(&Annotation::AffineRule));
        assert!(eca_annotations(&EcaRule::from_wolfram(126)).contains(&Annotation::KnownFractal));
        assert!(eca_annotations(&EcaRule::from_wolfram(0)).is_empty());
        assert!(eca_annotations(&EcaRule::from_wolfram(110)).is_empty());
    }

    #[test]
    fn scale_equivariance_of_labels() {
        let bases: Vec<(GrowthSeries, Label)> = vec![
            (series_from_fn(3..=20, |n| 3.0 * n.ln() + 1.0), Label::Log),
            (series_from_fn(3..=20, |n| 2.5 * n + 4.0), Label::Lin),
            (series_from_fn(3..=20, |n| 0.5 * n * n + n), Label::Poly),
            (
                series_from_fn(3..=20, |n| 0.7 * (0.5 * n).exp()),
                Label::Exp,
            ),
            (series_from_fn(3..=20, |_| 7.0), Label::Bounded),
        ];
        for lambda in [0.001, 0.5, 3.0, 1e6] {
            for (base, expected) in &bases {
                let scaled = GrowthSeries::from_means(
                    &base
                        .points
                        .iter()
                        .map(|p| (p.size, p.estimate.mean * lambda))
                        .collect::<Vec<_>>(),
                );
                assert_eq!(
                    classify(&scaled).unwrap().label,
                    *expected,
                    "label changed under scale {lambda}"
                );
            }
        }
    }
}
