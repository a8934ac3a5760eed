//! Accuracy and privacy certificates, their composition rules, analytic
//! sensitivity bounds, and the solver linking `(ε, δ)` to the truncation
//! width `q` of the histogram mechanism.

use std::fmt;
use std::sync::Arc;

use crate::distortion::DistortionKind;
use crate::error::{check_finite, check_positive, invalid_param, Error, Result};
use crate::hist::Statistic;
use crate::mechanisms::MechParams;

/// `(α, β, γ)` flexible accuracy with respect to a distortion and an output
/// metric.
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyCert {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub distortion: DistortionKind,
    pub metric: String,
}

impl AccuracyCert {
    pub fn new(alpha: f64, beta: f64, gamma: f64, distortion: DistortionKind, metric: &str) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            check_finite(name, v)?;
            if v < 0.0 {
                return invalid_param(format!("{name} must be non-negative"));
            }
        }
        crate::error::check_unit("gamma", gamma)?;
        Ok(AccuracyCert { alpha, beta, gamma, distortion, metric: metric.to_string() })
    }
}

impl fmt::Display for AccuracyCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CERT accuracy α={} β={} γ={} distortion={} metric={}",
            self.alpha, self.beta, self.gamma, self.distortion, self.metric
        )
    }
}

/// `(ε, δ)` differential privacy with respect to a named neighborhood.
#[derive(Clone, Debug, PartialEq)]
pub struct DPCert {
    pub eps: f64,
    pub delta: f64,
    pub neighborhood: String,
}

impl DPCert {
    pub fn new(eps: f64, delta: f64, neighborhood: &str) -> Result<Self> {
        check_finite("epsilon", eps)?;
        if eps < 0.0 {
            return invalid_param("epsilon must be non-negative");
        }
        crate::error::check_unit("delta", delta)?;
        Ok(DPCert { eps, delta, neighborhood: neighborhood.to_string() })
    }
}

impl fmt::Display for DPCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CERT dp ε={} δ={} neighborhood={}", self.eps, self.delta, self.neighborhood)
    }
}

/// Arguments of an error-sensitivity bound: the incoming `(β1, γ1)` and the
/// allowed `(α2, γ2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrArgs {
    pub beta1: f64,
    pub gamma1: f64,
    pub alpha2: f64,
    pub gamma2: f64,
}

type Bound1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type BoundErr = Arc<dyn Fn(ErrArgs) -> f64 + Send + Sync>;

/// Monotone upper bounds on the sensitivities of a function or mechanism.
/// Infinite values mean "no bound available".
#[derive(Clone)]
pub struct SensitivityBound {
    pub name: String,
    /// `α ↦` bound on the distortion sensitivity.
    pub distortion: Bound1,
    /// Bound on the error sensitivity.
    pub error: BoundErr,
    /// `β ↦` bound on the metric sensitivity, for histogram statistics.
    pub metric: Option<Bound1>,
    /// Output metric of the function.
    pub output_metric: String,
}

impl fmt::Debug for SensitivityBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SensitivityBound").field("name", &self.name).finish_non_exhaustive()
    }
}

impl SensitivityBound {
    /// The identity function answered exactly: distortion passes through,
    /// error is carried over unchanged.
    pub fn identity(output_metric: &str) -> Self {
        SensitivityBound {
            name: "identity".into(),
            distortion: Arc::new(|a| a),
            error: Arc::new(|e: ErrArgs| if e.gamma1 <= e.gamma2 { e.beta1 } else { f64::INFINITY }),
            metric: Some(Arc::new(|b| b)),
            output_metric: output_metric.into(),
        }
    }

    /// The truncated Laplace histogram mechanism for the identity on
    /// histograms, whose own drop is `alpha_mech = τt`: an incoming error
    /// `β` under `dhist` stays `β` once `α2 >= τt` is allowed.
    pub fn trlap_histogram(alpha_mech: f64) -> Self {
        SensitivityBound {
            name: "trlap-histogram".into(),
            distortion: Arc::new(|a| a),
            error: Arc::new(move |e: ErrArgs| {
                if e.gamma1 == 0.0 && e.alpha2 + 1e-12 >= alpha_mech {
                    e.beta1
                } else {
                    f64::INFINITY
                }
            }),
            metric: None,
            output_metric: "dhist".into(),
        }
    }

    /// A deterministic statistic released as itself: its error sensitivity
    /// is its metric sensitivity.
    pub fn deterministic(name: &str, metric_sens: Bound1, output_metric: &str) -> Self {
        let m = metric_sens.clone();
        SensitivityBound {
            name: name.into(),
            distortion: Arc::new(|_| f64::INFINITY),
            error: Arc::new(move |e: ErrArgs| if e.gamma1 <= e.gamma2 { m(e.beta1) } else { f64::INFINITY }),
            metric: Some(metric_sens),
            output_metric: output_metric.into(),
        }
    }
}

/// Composes an accuracy certificate of `M1` for `f1` with the error
/// sensitivity of `M2` for `f2`:
/// `α = α1 + D_f1(α2)`, `β = τ(β1, γ1)`, `γ = γ2`.
pub fn compose_accuracy(
    c1: &AccuracyCert,
    s1: &SensitivityBound,
    s2: &SensitivityBound,
    alpha2: f64,
    gamma2: f64,
) -> Result<AccuracyCert> {
    check_finite("alpha2", alpha2)?;
    crate::error::check_unit("gamma2", gamma2)?;
    let extra = (s1.distortion)(alpha2);
    if !extra.is_finite() {
        return Err(Error::InfiniteSensitivity(format!("distortion sensitivity of {} at {alpha2}", s1.name)));
    }
    let beta = (s2.error)(ErrArgs { beta1: c1.beta, gamma1: c1.gamma, alpha2, gamma2 });
    if !beta.is_finite() {
        return Err(Error::InfiniteSensitivity(format!("error sensitivity of {}", s2.name)));
    }
    AccuracyCert::new(c1.alpha + extra, beta, gamma2, c1.distortion, &s2.output_metric)
}

/// Post-processing keeps the privacy parameters.
pub fn dp_postprocess(c: &DPCert) -> DPCert {
    c.clone()
}

/// Running a neighborhood-preserving map before a private mechanism keeps
/// its privacy parameters.
pub fn dp_preprocess(neighborhood_preserving: bool, c2: &DPCert) -> Result<DPCert> {
    if !neighborhood_preserving {
        return Err(Error::Infeasible("composition unavailable: pre-processing map is not neighborhood preserving".into()));
    }
    Ok(c2.clone())
}

/// `δ(q) = (e^ε − 1) / (2(e^{εq/2} − 1))`.
pub fn trlap_delta(eps: f64, q: f64) -> f64 {
    let h = eps * q / 2.0;
    if h > 700.0 {
        return 0.5 * eps.exp_m1() * (-h).exp() / -(-h).exp_m1();
    }
    eps.exp_m1() / (2.0 * h.exp_m1())
}

/// Privacy of the truncated Laplace mechanism with `q = τn`, valid when
/// `ετn >= 2`.
pub fn trlap_dp_cert(eps: f64, tau: f64, n: u64) -> Result<DPCert> {
    check_positive("epsilon", eps)?;
    check_positive("tau", tau)?;
    let q = tau * n as f64;
    if eps * q < 2.0 - 1e-12 {
        return invalid_param(format!("certificate needs epsilon*tau*n >= 2, got {}", eps * q));
    }
    DPCert::new(eps, trlap_delta(eps, q), "hist")
}

/// The variant trading a factor `1 + ν` on `ε` for the weaker condition
/// `εν >= ln(1 + 1/n)`.
pub fn trlap_dp_cert_nu(eps: f64, tau: f64, n: u64, nu: f64) -> Result<DPCert> {
    check_positive("epsilon", eps)?;
    check_positive("tau", tau)?;
    check_positive("nu", nu)?;
    if n == 0 {
        return invalid_param("n must be positive");
    }
    if eps * nu < (1.0 / n as f64).ln_1p() - 1e-12 {
        return invalid_param("certificate needs epsilon*nu >= ln(1 + 1/n)");
    }
    DPCert::new((1.0 + nu) * eps, trlap_delta(eps, tau * n as f64).min(1.0), "hist")
}

/// Inverse of [`trlap_delta`]: `q = (2/ε) ln(1 + (e^ε − 1)/(2δ))`.
pub fn solve_q(eps: f64, delta: f64) -> Result<f64> {
    check_positive("epsilon", eps)?;
    check_positive("delta", delta)?;
    if delta >= 1.0 {
        return invalid_param("delta must be below 1");
    }
    Ok(2.0 / eps * (eps.exp_m1() / (2.0 * delta)).ln_1p())
}

/// Analytic metric sensitivity of a histogram statistic under `dhist`.
pub fn analytic_metric_sens(kind: Statistic) -> Result<SensitivityBound> {
    match kind {
        Statistic::Max | Statistic::Min => {
            Ok(SensitivityBound::deterministic(&kind.name(), Arc::new(|b| b), "euclidean"))
        }
        Statistic::Support => Ok(SensitivityBound::deterministic("support", Arc::new(|b| b), "dsupp")),
        Statistic::Mode | Statistic::MaxK(_) => {
            Err(Error::UnsupportedStatistic(format!("no analytic metric sensitivity for {kind}")))
        }
    }
}

/// `(α + ηβ, 0, 0)` accuracy of a statistic released from BucketHist, under
/// the drop-then-move distortion.
pub fn drmv_accuracy_cert(p: MechParams, eta: f64) -> Result<AccuracyCert> {
    check_finite("eta", eta)?;
    if eta < 0.0 {
        return invalid_param("eta must be non-negative");
    }
    AccuracyCert::new(p.alpha + eta * p.beta, 0.0, 0.0, DistortionKind::DropMove(eta), "statistic")
}

/// Accuracy of BucketHist for the identity, assembled by composing the
/// bucketing certificate `(0, w/2, 0)` with the mechanism's error
/// sensitivity at `α2 = τt`.
pub fn buckethist_accuracy_cert(p: MechParams, dim: usize) -> Result<AccuracyCert> {
    let w = 2.0 * p.beta / (dim as f64).sqrt();
    let bucketing = AccuracyCert::new(0.0, (w / 2.0) * (dim as f64).sqrt(), 0.0, DistortionKind::Drop, "dhist")?;
    compose_accuracy(
        &bucketing,
        &SensitivityBound::identity("dhist"),
        &SensitivityBound::trlap_histogram(p.alpha),
        p.alpha,
        0.0,
    )
}

/// Accuracy of a statistic released from BucketHist, when its metric
/// sensitivity has an analytic bound.
pub fn hbs_accuracy_cert(kind: Statistic, p: MechParams, dim: usize) -> Result<AccuracyCert> {
    let hist = buckethist_accuracy_cert(p, dim)?;
    let stat = analytic_metric_sens(kind)?;
    compose_accuracy(&hist, &SensitivityBound::identity("dhist"), &stat, 0.0, 0.0)
}
