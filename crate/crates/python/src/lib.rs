//! Python bindings for the regfade core: channel models, modulations,
//! asymptotic estimates, exact quadrature averages, and reproducible
//! Monte Carlo. Built as the extension module `regfade_py`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use regfade::asymptotics;
use regfade::channels::{ChannelModel, PowerGain, VariationExponent};
use regfade::combining;
use regfade::error_models::ErrorRateModel;
use regfade::montecarlo::{self, ImportanceSpec, McConfig};
use regfade::regvar;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A fading channel power gain, single or diversity-combined.
#[pyclass(frozen)]
struct Channel {
    gain: Arc<dyn PowerGain>,
}

#[pymethods]
impl Channel {
    /// Build from a spec string, e.g. "rayleigh", "nakagami:m=2.5",
    /// "gk:m=2,k=1", "lognormal:sigma_db=8", "rician:k=5", "hoyt:q=0.5".
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let ch = ChannelModel::from_spec(spec).map_err(value_err)?;
        Ok(Self { gain: Arc::new(ch) })
    }

    /// Compose branches under a combining scheme ("mrc" | "egc" | "sc").
    #[staticmethod]
    fn combine(scheme: &str, branches: Vec<String>) -> PyResult<Self> {
        let scheme: combining::Scheme = scheme.parse().map_err(value_err)?;
        let models: Result<Vec<ChannelModel>, _> = branches
            .iter()
            .map(|s| ChannelModel::from_spec(s))
            .collect();
        let cc = combining::combine(scheme, models.map_err(value_err)?).map_err(value_err)?;
        Ok(Self { gain: Arc::new(cc) })
    }

    fn label(&self) -> String {
        self.gain.label()
    }

    /// Variation exponent d at zero; +inf for rapidly varying channels.
    fn exponent(&self) -> f64 {
        match self.gain.variation_exponent() {
            VariationExponent::Finite(d) => d,
            VariationExponent::Infinite => f64::INFINITY,
        }
    }

    fn cdf(&self, z: f64) -> f64 {
        self.gain.cdf(z)
    }

    fn pdf(&self, z: f64) -> Option<f64> {
        self.gain.pdf(z)
    }

    /// Slowly varying factor l(z) with F(z) ~ z^d l(z); None when d = inf.
    fn slowly_varying(&self, z: f64) -> Option<f64> {
        self.gain.slowly_varying(z)
    }

    /// Draw `n` gains with a seeded, reproducible generator.
    #[pyo3(signature = (n, seed=1729))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.gain.sample(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Channel({})", self.gain.label())
    }
}

/// An instantaneous error-rate model.
#[pyclass(frozen)]
struct Modulation {
    model: ErrorRateModel,
}

#[pymethods]
impl Modulation {
    /// Build from a spec string: "dpsk" | "bpsk" | "mpsk:M=8" | "mqam:M=16".
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self {
            model: spec.parse().map_err(value_err)?,
        })
    }

    fn name(&self) -> String {
        self.model.name().to_string()
    }

    /// Instantaneous error rate at SNR x.
    fn pe(&self, x: f64) -> f64 {
        self.model.pe(x)
    }

    fn __repr__(&self) -> String {
        format!("Modulation({})", self.model.name())
    }
}

/// High-SNR estimate: average error ~ c1 * F(c2 / rho).
#[pyclass(frozen)]
struct Asymptote {
    est: asymptotics::AsymptoticEstimate,
}

#[pymethods]
impl Asymptote {
    #[getter]
    fn c1(&self) -> f64 {
        self.est.c1()
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.est.c2()
    }

    #[getter]
    fn d(&self) -> f64 {
        self.est.exponent()
    }

    /// Power-law coefficient A = c1 * c2^d.
    #[getter]
    fn coefficient_a(&self) -> f64 {
        self.est.coefficient_a()
    }

    /// Constant in front of rho^-d when l(z) converges.
    #[getter]
    fn power_law_constant(&self) -> Option<f64> {
        self.est.power_law_constant()
    }

    /// Evaluate c1 * F(c2/rho) at linear SNR rho.
    fn evaluate(&self, rho: f64) -> f64 {
        self.est.evaluate(rho)
    }

    /// Evaluate at SNR in dB.
    fn evaluate_db(&self, snr_db: f64) -> f64 {
        self.est.evaluate(10f64.powf(snr_db / 10.0))
    }

    fn __repr__(&self) -> String {
        format!(
            "Asymptote(c1={}, c2={}, d={})",
            self.est.c1(),
            self.est.c2(),
            self.est.exponent()
        )
    }
}

/// Asymptotic estimate for a modulation over a channel.
#[pyfunction]
fn asymptote(channel: &Channel, modulation: &Modulation) -> PyResult<Asymptote> {
    let est =
        asymptotics::asymptote(&modulation.model, channel.gain.clone()).map_err(value_err)?;
    Ok(Asymptote { est })
}

/// Exact average error rate E[Pe(rho z)] by adaptive quadrature.
/// Requires a channel with a density (single channels and SC combiners).
#[pyfunction]
fn exact_average(channel: &Channel, modulation: &Modulation, rho: f64) -> PyResult<f64> {
    asymptotics::exact_average(&modulation.model, channel.gain.as_ref(), rho).map_err(value_err)
}

/// Reproducible conditional-error Monte Carlo; returns (estimate, ci_halfwidth).
#[pyfunction]
#[pyo3(signature = (channel, modulation, rho, seed=1729, draws=1_000_000, batches=20, importance=false))]
fn mc_average_error(
    channel: &Channel,
    modulation: &Modulation,
    rho: f64,
    seed: u64,
    draws: u64,
    batches: u32,
    importance: bool,
) -> PyResult<(f64, f64)> {
    let cfg = McConfig {
        seed,
        draws,
        batches,
        importance: importance.then(ImportanceSpec::default),
        ..McConfig::default()
    };
    cfg.validate().map_err(value_err)?;
    let r = montecarlo::mc_average_error(&modulation.model, channel.gain.as_ref(), rho, &cfg);
    Ok((r.estimate, r.ci_halfwidth))
}

/// Outage-squeeze triple (lower, exact, upper) at eta.
#[pyfunction]
#[pyo3(signature = (channel, modulation, rho, eta=1.0))]
fn bounds_check(
    channel: &Channel,
    modulation: &Modulation,
    rho: f64,
    eta: f64,
) -> PyResult<(f64, f64, f64)> {
    let b = asymptotics::bounds_check(&modulation.model, channel.gain.as_ref(), rho, eta)
        .map_err(value_err)?;
    Ok((b.lower, b.exact, b.upper))
}

/// Constant SNR offset in dB between two modulations on one channel.
#[pyfunction]
fn snr_offset_db(channel: &Channel, mod1: &Modulation, mod2: &Modulation) -> PyResult<f64> {
    let e1 = asymptotics::asymptote(&mod1.model, channel.gain.clone()).map_err(value_err)?;
    let e2 = asymptotics::asymptote(&mod2.model, channel.gain.clone()).map_err(value_err)?;
    asymptotics::snr_offset_db(&e1, &e2).map_err(value_err)
}

/// Variation-exponent estimate from the channel CDF over [1e-8, 1e-5];
/// returns (d_hat or None if rapidly varying, stderr or None).
#[pyfunction]
fn exponent_estimate(channel: &Channel) -> PyResult<(Option<f64>, Option<f64>)> {
    let gain = channel.gain.clone();
    let rep = regvar::exponent_from_cdf(move |z| gain.cdf(z), (1e-8, 1e-5)).map_err(value_err)?;
    Ok(match rep.verdict {
        regvar::ExponentVerdict::Finite { d_hat, stderr } => (Some(d_hat), Some(stderr)),
        regvar::ExponentVerdict::RapidlyVarying { .. } => (None, None),
    })
}

#[pymodule]
fn regfade_py(m: &Bound<PyModule>) -> PyResult<()> {
    m.add_class::<Channel>()?;
    m.add_class::<Modulation>()?;
    m.add_class::<Asymptote>()?;
    m.add_function(wrap_pyfunction!(asymptote, m)?)?;
    m.add_function(wrap_pyfunction!(exact_average, m)?)?;
    m.add_function(wrap_pyfunction!(mc_average_error, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_check, m)?)?;
    m.add_function(wrap_pyfunction!(snr_offset_db, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_estimate, m)?)?;
    Ok(())
}
