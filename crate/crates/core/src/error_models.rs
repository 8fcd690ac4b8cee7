//! Instantaneous error-rate models.
//!
//! A model evaluates Pe(x), the conditional bit or symbol error probability
//! at instantaneous SNR x = rho * z, and carries its classification:
//!
//! - pure exponential, Pe(x) = beta exp(-alpha x) (non-coherent modulations),
//! - positive exponential mixture over a finite angle range
//!   Pe(x) = int_0^theta_t g2(t) exp(-x / g1(t)) dt (Craig-form Q integrals),
//! - signed linear combination of such components (square M-QAM and friends),
//! - bound-only, when just the exponential envelope is known.
//!
//! Every model also carries an exponential witness Pe(x) <= beta e^{-alpha x},
//! which the bound checks and squeeze tests rely on. For Q-based models the
//! witness uses the Chernoff bound Q(u) <= e^{-u^2/2}/2.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

use crate::numerics::quad::integrate_seeded;
use crate::numerics::special::q_fn;
use crate::numerics::QuadratureSpec;

// Initial panel count for mixture quadrature: g2 may be spiky (user
// mixtures approaching a point mass), so seed finely enough that a
// feature 1/50th of the range still hits Kronrod nodes.
const MIXTURE_SEED_PANELS: usize = 64;

const MIXTURE_REL_TOL: f64 = 1e-12;

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Exponential envelope witness: Pe(x) <= beta exp(-alpha x).
#[derive(Debug, Clone, Copy)]
pub struct ExpBound {
    pub alpha: f64,
    pub beta: f64,
}

impl ExpBound {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        if !(alpha > 0.0) || !(beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(ModelError::BadBound { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn envelope(&self, x: f64) -> f64 {
        self.beta * (-self.alpha * x).exp()
    }
}

/// Positive exponential mixture (theta_t, g1, g2).
#[derive(Clone)]
pub struct ExpMixture {
    pub theta_t: f64,
    g1: EvalFn,
    g2: EvalFn,
}

impl fmt::Debug for ExpMixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExpMixture")
            .field("theta_t", &self.theta_t)
            .finish_non_exhaustive()
    }
}

impl ExpMixture {
    pub fn new<G1, G2>(theta_t: f64, g1: G1, g2: G2) -> Result<Self, ModelError>
    where
        G1: Fn(f64) -> f64 + Send + Sync + 'static,
        G2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(theta_t > 0.0) || theta_t >= std::f64::consts::PI {
            return Err(ModelError::BadThetaRange(theta_t));
        }
        let mixture = Self {
            theta_t,
            g1: Arc::new(g1),
            g2: Arc::new(g2),
        };
        // finite non-negative g1, g2 on the open interval
        for i in 1..64 {
            let th = theta_t * i as f64 / 64.0;
            let a = (mixture.g1)(th);
            let b = (mixture.g2)(th);
            if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
                return Err(ModelError::BadMixtureFunction(th));
            }
        }
        // the mixture mass int g2 must be finite (it is Pe(0))
        let mass = mixture.mass()?;
        if !mass.is_finite() {
            return Err(ModelError::DivergentMixture);
        }
        Ok(mixture)
    }

    pub fn g1(&self, theta: f64) -> f64 {
        (self.g1)(theta)
    }

    pub fn g2(&self, theta: f64) -> f64 {
        (self.g2)(theta)
    }

    /// int_0^theta_t g2 = Pe(0).
    pub fn mass(&self) -> Result<f64, ModelError> {
        let spec = QuadratureSpec::with_rel_tol(MIXTURE_REL_TOL);
        integrate_seeded(
            |th| (self.g2)(th),
            0.0,
            self.theta_t,
            MIXTURE_SEED_PANELS,
            &spec,
        )
        .map(|r| r.value)
        .map_err(ModelError::Quadrature)
    }

    /// Evaluate the mixture integral at x by adaptive quadrature.
    pub fn evaluate(&self, x: f64) -> f64 {
        let spec = QuadratureSpec {
            rel_tol: MIXTURE_REL_TOL,
            abs_tol: 1e-320,
            max_subdivisions: 2000,
        };
        let f = |th: f64| {
            let g1 = (self.g1)(th);
            let g2 = (self.g2)(th);
            if g2 == 0.0 {
                return 0.0;
            }
            if g1 == 0.0 {
                // exp(-x/0+) = 0 for x > 0
                return if x > 0.0 { 0.0 } else { g2 };
            }
            g2 * (-x / g1).exp()
        };
        integrate_seeded(f, 0.0, self.theta_t, MIXTURE_SEED_PANELS, &spec)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    /// int_0^theta_t g2 g1^d: the mixture constant of the asymptote engine.
    pub fn asymptote_constant(&self, d: f64) -> Result<f64, ModelError> {
        let spec = QuadratureSpec {
            rel_tol: MIXTURE_REL_TOL,
            abs_tol: 1e-320,
            max_subdivisions: 2000,
        };
        let f = |th: f64| (self.g2)(th) * (self.g1)(th).powf(d);
        let value = integrate_seeded(f, 0.0, self.theta_t, MIXTURE_SEED_PANELS, &spec)
            .map(|r| r.value)?;
        if !value.is_finite() {
            return Err(ModelError::DivergentMixture);
        }
        Ok(value)
    }
}

/// Model classification, mirroring the assumption hierarchy.
#[derive(Clone)]
pub enum ModelKind {
    /// Pe(x) = beta exp(-alpha x).
    Exponential { alpha: f64, beta: f64 },
    /// Positive exponential mixture.
    Mixture(ExpMixture),
    /// Signed linear combination of exponential / mixture components.
    Combination(Vec<(f64, ErrorRateModel)>),
    /// Only the exponential envelope is known.
    BoundOnly,
}

impl ModelKind {
    pub fn class_tag(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Mixture(_) => "mixture",
            Self::Combination(_) => "combination",
            Self::BoundOnly => "bound-only",
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("exponential bound constants must be positive and finite, got alpha={alpha}, beta={beta}")]
    BadBound { alpha: f64, beta: f64 },
    #[error("theta_t must lie in (0, pi), got {0}")]
    BadThetaRange(f64),
    #[error("g1/g2 must be finite and non-negative on (0, theta_t); violated at theta={0}")]
    BadMixtureFunction(f64),
    #[error("mixture integral diverges")]
    DivergentMixture,
    #[error("exponential witness violated at x={x}: Pe={pe} > envelope={envelope}")]
    WitnessViolated { x: f64, pe: f64, envelope: f64 },
    #[error("unknown modulation `{0}` (expected dpsk | bpsk | mpsk:M=<n> | mqam:M=<n>)")]
    UnknownModulation(String),
    #[error("mqam requires M to be a perfect square >= 4, got {0}")]
    BadQamOrder(u32),
    #[error("mpsk requires M >= 2, got {0}")]
    BadPskOrder(u32),
    #[error(transparent)]
    Quadrature(#[from] crate::numerics::QuadError),
}

/// An instantaneous error-rate function with its classification and
/// exponential witness.
#[derive(Clone)]
pub struct ErrorRateModel {
    name: String,
    kind: ModelKind,
    bound: ExpBound,
    direct: Option<EvalFn>,
}

impl fmt::Debug for ErrorRateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErrorRateModel")
            .field("name", &self.name)
            .field("class", &self.kind.class_tag())
            .field("bound", &self.bound)
            .finish()
    }
}

impl ErrorRateModel {
    fn build(
        name: impl Into<String>,
        kind: ModelKind,
        bound: ExpBound,
        direct: Option<EvalFn>,
    ) -> Result<Self, ModelError> {
        let model = Self {
            name: name.into(),
            kind,
            bound,
            direct,
        };
        model.check_witness()?;
        Ok(model)
    }

    // spot-check Pe(x) <= beta e^{-alpha x} on a log grid
    fn check_witness(&self) -> Result<(), ModelError> {
        if matches!(self.kind, ModelKind::BoundOnly) {
            return Ok(());
        }
        let mut x = 1e-3;
        while x <= 50.0 {
            let pe = self.pe(x);
            let env = self.bound.envelope(x);
            if pe > env * (1.0 + 1e-9) {
                return Err(ModelError::WitnessViolated {
                    x,
                    pe,
                    envelope: env,
                });
            }
            x *= 1.9;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn exp_bound(&self) -> ExpBound {
        self.bound
    }

    /// Instantaneous error rate at x = rho * z.
    pub fn pe(&self, x: f64) -> f64 {
        if let Some(direct) = &self.direct {
            return direct(x);
        }
        self.pe_structural(x)
    }

    /// Evaluate from the classification structure, ignoring any closed form.
    pub fn pe_structural(&self, x: f64) -> f64 {
        match &self.kind {
            ModelKind::Exponential { alpha, beta } => beta * (-alpha * x).exp(),
            ModelKind::Mixture(mix) => mix.evaluate(x),
            ModelKind::Combination(parts) => parts
                .iter()
                .map(|(a, m)| a * m.pe_structural(x))
                .sum::<f64>(),
            ModelKind::BoundOnly => self.bound.envelope(x),
        }
    }

    /// BER of DPSK: Pe(x) = e^{-x} / 2.
    pub fn dpsk_ber() -> Self {
        Self::build(
            "dpsk",
            ModelKind::Exponential {
                alpha: 1.0,
                beta: 0.5,
            },
            ExpBound::new(1.0, 0.5).unwrap(),
            None,
        )
        .expect("dpsk construction cannot fail")
    }

    /// BER of coherent BPSK: Pe(x) = Q(sqrt(2x)), in Craig form
    /// (theta_t = pi/2, g1 = sin^2, g2 = 1/pi).
    pub fn bpsk_ber() -> Self {
        let mix = ExpMixture::new(
            std::f64::consts::FRAC_PI_2,
            |th: f64| th.sin().powi(2),
            |_| std::f64::consts::FRAC_1_PI,
        )
        .expect("bpsk mixture is valid");
        Self::build(
            "bpsk",
            ModelKind::Mixture(mix),
            // Chernoff: Q(sqrt(2x)) <= e^{-x}/2
            ExpBound::new(1.0, 0.5).unwrap(),
            Some(Arc::new(|x: f64| q_fn((2.0 * x).sqrt()))),
        )
        .expect("bpsk construction cannot fail")
    }

    /// SER of M-ary PSK in Craig form: theta_t = (1 - 1/M) pi,
    /// g1 = sin^2(theta)/sin^2(pi/M), g2 = 1/pi.
    pub fn mpsk_ser(m_ary: u32) -> Result<Self, ModelError> {
        if m_ary < 2 {
            return Err(ModelError::BadPskOrder(m_ary));
        }
        let m = m_ary as f64;
        let sin2 = (std::f64::consts::PI / m).sin().powi(2);
        let theta_t = (1.0 - 1.0 / m) * std::f64::consts::PI;
        let mix = ExpMixture::new(
            theta_t,
            move |th: f64| th.sin().powi(2) / sin2,
            |_| std::f64::consts::FRAC_1_PI,
        )?;
        Self::build(
            format!("mpsk:M={m_ary}"),
            ModelKind::Mixture(mix),
            // Chernoff on the dominant Q lobe: alpha = sin^2(pi/M), beta = 1
            ExpBound::new(sin2, 1.0)?,
            None,
        )
    }

    /// SER of square M-QAM as a signed combination of Q and Q^2 mixtures.
    pub fn mqam_ser(m_ary: u32) -> Result<Self, ModelError> {
        let root = (m_ary as f64).sqrt().round() as u32;
        if m_ary < 4 || root * root != m_ary {
            return Err(ModelError::BadQamOrder(m_ary));
        }
        let m = m_ary as f64;
        let frac = 1.0 - 1.0 / m.sqrt();
        // Pe = 4 frac Q(u) - 4 frac^2 Q^2(u), u = sqrt(3x/(M-1)).
        // Q^a(u) = (1/pi) int_0^{pi/2a} exp(-u^2/(2 sin^2 th)) dth, a = 1, 2;
        // the SNR scale folds into g1 = 2(M-1) sin^2(th) / 3.
        let scale = 2.0 * (m - 1.0) / 3.0;
        let q_mix = ExpMixture::new(
            std::f64::consts::FRAC_PI_2,
            move |th: f64| scale * th.sin().powi(2),
            |_| std::f64::consts::FRAC_1_PI,
        )?;
        let q2_mix = ExpMixture::new(
            std::f64::consts::FRAC_PI_4,
            move |th: f64| scale * th.sin().powi(2),
            |_| std::f64::consts::FRAC_1_PI,
        )?;
        let alpha = 1.5 / (m - 1.0);
        let q_part = Self::build(
            format!("mqam:M={m_ary}/q"),
            ModelKind::Mixture(q_mix),
            // Q(sqrt(3x/(M-1))) <= e^{-1.5x/(M-1)}/2
            ExpBound::new(alpha, 0.5)?,
            None,
        )?;
        let q2_part = Self::build(
            format!("mqam:M={m_ary}/q2"),
            ModelKind::Mixture(q2_mix),
            ExpBound::new(alpha, 0.25)?,
            None,
        )?;
        let parts = vec![(4.0 * frac, q_part), (-4.0 * frac * frac, q2_part)];
        Self::build(
            format!("mqam:M={m_ary}"),
            ModelKind::Combination(parts),
            // Pe <= 4 frac Q(u) <= 2 frac e^{-alpha x}
            ExpBound::new(alpha, 2.0 * frac)?,
            Some(Arc::new(move |x: f64| {
                let u = (3.0 * x / (m - 1.0)).sqrt();
                let q = q_fn(u);
                4.0 * frac * q - 4.0 * frac * frac * q * q
            })),
        )
    }

    /// User-supplied positive exponential mixture with an explicit witness.
    pub fn custom_mixture(mixture: ExpMixture, bound: ExpBound) -> Result<Self, ModelError> {
        Self::build("custom-mixture", ModelKind::Mixture(mixture), bound, None)
    }

    /// Bound-only model: nothing is known beyond the exponential envelope.
    pub fn bound_only(bound: ExpBound) -> Self {
        Self {
            name: "bound-only".into(),
            kind: ModelKind::BoundOnly,
            bound,
            direct: None,
        }
    }
}

impl FromStr for ErrorRateModel {
    type Err = ModelError;

    /// Modulation grammar: `dpsk`, `bpsk`, `mpsk:M=8`, `mqam:M=16`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "dpsk" => return Ok(Self::dpsk_ber()),
            "bpsk" => return Ok(Self::bpsk_ber()),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix("mpsk:") {
            let m = parse_order(rest).ok_or_else(|| ModelError::UnknownModulation(s.into()))?;
            return Self::mpsk_ser(m);
        }
        if let Some(rest) = lower.strip_prefix("mqam:") {
            let m = parse_order(rest).ok_or_else(|| ModelError::UnknownModulation(s.into()))?;
            return Self::mqam_ser(m);
        }
        Err(ModelError::UnknownModulation(s.into()))
    }
}

fn parse_order(rest: &str) -> Option<u32> {
    let (key, val) = rest.split_once('=')?;
    if key.trim() != "m" {
        return None;
    }
    val.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_err(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    #[test]
    fn dpsk_values() {
        let m = ErrorRateModel::dpsk_ber();
        assert_eq!(m.pe(0.0), 0.5);
        assert!(rel_err(m.pe(1.0), 0.5 * (-1.0f64).exp()) < 1e-15);
        assert!(rel_err(m.pe(10.0), 0.5 * (-10.0f64).exp()) < 1e-15);
        assert!((m.pe(10.0) - 2.27e-5).abs() < 1e-7);
    }

    #[test]
    fn bpsk_direct_matches_mixture() {
        let m = ErrorRateModel::bpsk_ber();
        assert_eq!(m.pe(0.0), 0.5);
        for x in [0.1, 0.5, 2.0, 10.0, 30.0] {
            let direct = m.pe(x);
            let mixture = m.pe_structural(x);
            assert!(
                rel_err(direct, mixture) < 1e-10,
                "x={x}: {direct} vs {mixture}"
            );
        }
        // Pe(2) = Q(2)
        assert!(rel_err(m.pe(2.0), q_fn(2.0)) < 1e-15);
    }

    #[test]
    fn mpsk_two_is_bpsk() {
        let psk = ErrorRateModel::mpsk_ser(2).unwrap();
        let bpsk = ErrorRateModel::bpsk_ber();
        for x in [0.0, 0.3, 1.0, 4.0, 12.0, 25.0] {
            assert!(
                (psk.pe(x) - bpsk.pe(x)).abs() <= 1e-12 * bpsk.pe(x).max(1e-30),
                "x={x}"
            );
        }
    }

    #[test]
    fn qpsk_exact_identity() {
        // SER(QPSK at x) = 2 Q(sqrt x) - Q^2(sqrt x)
        let psk = ErrorRateModel::mpsk_ser(4).unwrap();
        for x in [0.5f64, 2.0, 10.0, 40.0] {
            let q = q_fn(x.sqrt());
            let want = 2.0 * q - q * q;
            assert!(rel_err(psk.pe(x), want) < 1e-10, "x={x}");
        }
    }

    #[test]
    fn mpsk_rest_probability_at_zero() {
        // Pe(0) = theta_t / pi = 1 - 1/M
        let psk = ErrorRateModel::mpsk_ser(8).unwrap();
        assert!((psk.pe(0.0) - 0.875).abs() < 1e-12);
    }

    #[test]
    fn mqam_closed_form_and_combination_agree() {
        let qam = ErrorRateModel::mqam_ser(16).unwrap();
        for x in [0.5, 5.0, 20.0] {
            let direct = qam.pe(x);
            let combo = qam.pe_structural(x);
            assert!(rel_err(direct, combo) < 1e-10, "x={x}: {direct} vs {combo}");
        }
    }

    #[test]
    fn mqam_at_zero_and_large_snr() {
        // M=4: Pe(0) = 4(1/2)(1/2) - 4(1/4)(1/4) = 0.75
        let qam4 = ErrorRateModel::mqam_ser(4).unwrap();
        assert!((qam4.pe(0.0) - 0.75).abs() < 1e-12);
        // M=4 QAM equals QPSK: 2Q(sqrt x) - Q^2(sqrt x)
        let psk4 = ErrorRateModel::mpsk_ser(4).unwrap();
        for x in [1.0, 8.0, 20.0] {
            assert!(rel_err(qam4.pe(x), psk4.pe(x)) < 1e-9, "x={x}");
        }
        // large x: SER ~ 2 Q(sqrt x)
        let x = 25.0;
        assert!(rel_err(qam4.pe(x), 2.0 * q_fn(x.sqrt())) < 5e-3);
    }

    #[test]
    fn mqam_rejects_non_square() {
        assert!(matches!(
            ErrorRateModel::mqam_ser(8),
            Err(ModelError::BadQamOrder(8))
        ));
        assert!(ErrorRateModel::mqam_ser(64).is_ok());
    }

    #[test]
    fn custom_mixture_reproduces_bpsk() {
        let mix = ExpMixture::new(
            std::f64::consts::FRAC_PI_2,
            |th: f64| th.sin().powi(2),
            |_| std::f64::consts::FRAC_1_PI,
        )
        .unwrap();
        let m = ErrorRateModel::custom_mixture(mix, ExpBound::new(1.0, 0.5).unwrap()).unwrap();
        let bpsk = ErrorRateModel::bpsk_ber();
        for x in [0.2, 1.0, 6.0] {
            assert!(rel_err(m.pe(x), bpsk.pe(x)) < 1e-10);
        }
    }

    #[test]
    fn narrow_bump_mixture_collapses_to_exponential() {
        // g2 = 100 on [1.0, 1.01], g1 = 1: Pe(x) ~ e^{-x}
        let mix = ExpMixture::new(
            1.5,
            |_| 1.0,
            |th: f64| if (1.0..=1.01).contains(&th) { 100.0 } else { 0.0 },
        )
        .unwrap();
        let m = ErrorRateModel::custom_mixture(mix, ExpBound::new(1.0, 1.001).unwrap()).unwrap();
        for x in [0.5, 2.0, 5.0] {
            assert!(rel_err(m.pe(x), (-x as f64).exp()) < 2e-2, "x={x}");
        }
    }

    #[test]
    fn theta_out_of_range_rejected() {
        assert!(matches!(
            ExpMixture::new(0.0, |_| 1.0, |_| 1.0),
            Err(ModelError::BadThetaRange(_))
        ));
        assert!(matches!(
            ExpMixture::new(3.5, |_| 1.0, |_| 1.0),
            Err(ModelError::BadThetaRange(_))
        ));
    }

    #[test]
    fn witness_violation_rejected() {
        // claim Pe <= 0.1 e^{-5x} for BPSK-like mixture: false
        let mix = ExpMixture::new(
            std::f64::consts::FRAC_PI_2,
            |th: f64| th.sin().powi(2),
            |_| std::f64::consts::FRAC_1_PI,
        )
        .unwrap();
        assert!(matches!(
            ErrorRateModel::custom_mixture(mix, ExpBound::new(5.0, 0.1).unwrap()),
            Err(ModelError::WitnessViolated { .. })
        ));
    }

    #[test]
    fn builtin_models_nonincreasing_and_bounded() {
        let models = vec![
            ErrorRateModel::dpsk_ber(),
            ErrorRateModel::bpsk_ber(),
            ErrorRateModel::mpsk_ser(8).unwrap(),
            ErrorRateModel::mqam_ser(16).unwrap(),
        ];
        for m in &models {
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let x = 1e-4 * (100.0f64 / 1e-4).powf(i as f64 / 199.0);
                let pe = m.pe(x);
                assert!((0.0..=1.0).contains(&pe), "{} at x={x}", m.name());
                assert!(
                    pe <= prev * (1.0 + 1e-9) + 1e-300,
                    "{} not nonincreasing at x={x}",
                    m.name()
                );
                prev = pe;
            }
        }
    }

    #[test]
    fn witness_envelope_holds_on_grid() {
        // the assumption hierarchy: every mixture obeys its exponential bound
        let models = vec![
            ErrorRateModel::dpsk_ber(),
            ErrorRateModel::bpsk_ber(),
            ErrorRateModel::mpsk_ser(4).unwrap(),
            ErrorRateModel::mpsk_ser(8).unwrap(),
            ErrorRateModel::mqam_ser(4).unwrap(),
            ErrorRateModel::mqam_ser(16).unwrap(),
        ];
        for m in &models {
            let b = m.exp_bound();
            let mut x = 1e-3;
            while x <= 50.0 {
                assert!(
                    m.pe(x) <= b.envelope(x) * (1.0 + 1e-9),
                    "{} at x={x}",
                    m.name()
                );
                x *= 1.6;
            }
        }
    }

    #[test]
    fn modulation_grammar() {
        assert_eq!("dpsk".parse::<ErrorRateModel>().unwrap().name(), "dpsk");
        assert_eq!("bpsk".parse::<ErrorRateModel>().unwrap().name(), "bpsk");
        assert_eq!(
            "mpsk:M=8".parse::<ErrorRateModel>().unwrap().name(),
            "mpsk:M=8"
        );
        assert_eq!(
            "mqam:M=16".parse::<ErrorRateModel>().unwrap().name(),
            "mqam:M=16"
        );
        assert!("qam:M=16".parse::<ErrorRateModel>().is_err());
        assert!("mpsk:M=1".parse::<ErrorRateModel>().is_err());
    }

    proptest! {
        #[test]
        fn builtins_decrease_everywhere(x in 0.0f64..60.0, dx in 0.01f64..5.0) {
            for m in [
                ErrorRateModel::dpsk_ber(),
                ErrorRateModel::bpsk_ber(),
                ErrorRateModel::mqam_ser(16).unwrap(),
            ] {
                let a = m.pe(x);
                let b = m.pe(x + dx);
                prop_assert!(b <= a * (1.0 + 1e-9) + 1e-300);
            }
        }
    }
}
