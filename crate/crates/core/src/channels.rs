//! Fading channel power-gain models.
//!
//! Every model exposes the CDF F(z) of the channel power gain, a sampler,
//! the declared variation exponent d at zero, and the leading slowly varying
//! factor l(z) with F(z) ~ z^d l(z). All catalog channels are normalized to
//! unit mean power, with two documented exceptions: Weibull keeps its
//! defining form F(z) = 1 - exp(-z^k) (mean Gamma(1 + 1/k)), and log-normal
//! shadowing is centered at a 0 dB median.
//!
//! Samplers take the RNG state explicitly (`ChaCha8Rng`); there is no hidden
//! global state and models are immutable after construction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::numerics::special::{
    bessel_i0_scaled, bessel_i1_scaled, bessel_k, gamma_fn, lower_incomplete_gamma_regularized,
    marcum_q1_complement, q_fn, EULER_GAMMA,
};
use crate::numerics::{integrate, QuadratureSpec};

const LN10_OVER_10: f64 = 0.230_258_509_299_404_57;

/// Variation exponent of a CDF at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariationExponent {
    /// Regular variation: F(tau z)/F(z) -> tau^d.
    Finite(f64),
    /// Rapid variation, faster than any power law (e.g. log-normal).
    Infinite,
}

impl VariationExponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(d) => Some(d),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }
}

impl fmt::Display for VariationExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(d) => write!(f, "{d}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("unknown channel family `{0}`")]
    UnknownFamily(String),
    #[error("bad channel spec `{0}`: {1}")]
    BadSpec(String, String),
    #[error("{family}: parameter out of range: {message}")]
    BadParameter {
        family: &'static str,
        message: String,
    },
    #[error("channel `{0}` is rapidly varying (d = inf): no power-law asymptote exists")]
    RapidlyVarying(String),
}

/// Parsed textual channel descriptor, grammar `family:key=value,key=value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    Rayleigh,
    Nakagami { m: f64 },
    Weibull { k: f64 },
    GeneralizedK { m: f64, k: f64 },
    LogNormal { sigma_db: f64 },
    Rician { k_factor: f64 },
    Hoyt { q: f64 },
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rayleigh => write!(f, "rayleigh"),
            Self::Nakagami { m } => write!(f, "nakagami:m={m}"),
            Self::Weibull { k } => write!(f, "weibull:k={k}"),
            Self::GeneralizedK { m, k } => write!(f, "gk:m={m},k={k}"),
            Self::LogNormal { sigma_db } => write!(f, "lognormal:sigma_db={sigma_db}"),
            Self::Rician { k_factor } => write!(f, "rician:k={k_factor}"),
            Self::Hoyt { q } => write!(f, "hoyt:q={q}"),
        }
    }
}

fn parse_params(family: &str, body: &str) -> Result<Vec<(String, f64)>, ChannelError> {
    let mut out = Vec::new();
    if body.is_empty() {
        return Ok(out);
    }
    for part in body.split(',') {
        let (key, val) = part.split_once('=').ok_or_else(|| {
            ChannelError::BadSpec(
                format!("{family}:{body}"),
                format!("expected key=value, got `{part}`"),
            )
        })?;
        let v: f64 = val.trim().parse().map_err(|_| {
            ChannelError::BadSpec(
                format!("{family}:{body}"),
                format!("`{val}` is not a number"),
            )
        })?;
        out.push((key.trim().to_ascii_lowercase(), v));
    }
    Ok(out)
}

fn take_param(
    params: &[(String, f64)],
    family: &'static str,
    names: &[&str],
) -> Result<f64, ChannelError> {
    for (k, v) in params {
        if names.contains(&k.as_str()) {
            return Ok(*v);
        }
    }
    Err(ChannelError::BadSpec(
        family.to_string(),
        format!("missing parameter `{}`", names[0]),
    ))
}

impl FromStr for ChannelSpec {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (family, body) = match s.split_once(':') {
            Some((f, b)) => (f.trim().to_ascii_lowercase(), b.trim().to_string()),
            None => (s.to_ascii_lowercase(), String::new()),
        };
        let params = parse_params(&family, &body)?;
        let spec = match family.as_str() {
            "rayleigh" => Self::Rayleigh,
            "nakagami" => Self::Nakagami {
                m: take_param(&params, "nakagami", &["m"])?,
            },
            "weibull" => Self::Weibull {
                k: take_param(&params, "weibull", &["k"])?,
            },
            "gk" => Self::GeneralizedK {
                m: take_param(&params, "gk", &["m"])?,
                k: take_param(&params, "gk", &["k"])?,
            },
            "lognormal" => Self::LogNormal {
                sigma_db: take_param(&params, "lognormal", &["sigma_db", "sigma"])?,
            },
            "rician" => Self::Rician {
                k_factor: take_param(&params, "rician", &["k", "k_factor"])?,
            },
            "hoyt" => Self::Hoyt {
                q: take_param(&params, "hoyt", &["q"])?,
            },
            other => return Err(ChannelError::UnknownFamily(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |family, message: String| Err(ChannelError::BadParameter { family, message });
        match *self {
            Self::Rayleigh => Ok(()),
            Self::Nakagami { m } => {
                if m > 0.0 && m.is_finite() {
                    Ok(())
                } else {
                    bad("nakagami", format!("m must be > 0, got {m}"))
                }
            }
            Self::Weibull { k } => {
                if k > 0.0 && k.is_finite() {
                    Ok(())
                } else {
                    bad("weibull", format!("k must be > 0, got {k}"))
                }
            }
            Self::GeneralizedK { m, k } => {
                if m > 0.0 && k > 0.0 && m.is_finite() && k.is_finite() {
                    Ok(())
                } else {
                    bad("gk", format!("m and k must be > 0, got m={m}, k={k}"))
                }
            }
            Self::LogNormal { sigma_db } => {
                if sigma_db > 0.0 && sigma_db.is_finite() {
                    Ok(())
                } else {
                    bad("lognormal", format!("sigma_db must be > 0, got {sigma_db}"))
                }
            }
            Self::Rician { k_factor } => {
                if k_factor >= 0.0 && k_factor.is_finite() {
                    Ok(())
                } else {
                    bad("rician", format!("K must be >= 0, got {k_factor}"))
                }
            }
            Self::Hoyt { q } => {
                if q > 0.0 && q <= 1.0 {
                    Ok(())
                } else {
                    bad("hoyt", format!("q must be in (0, 1], got {q}"))
                }
            }
        }
    }
}

/// Common interface over single channels and diversity-combined channels.
///
/// `cdf` is the distribution function fed to the asymptote engine. For
/// single channels it is exact everywhere; combined channels may expose an
/// asymptotic form valid near zero (see the combining module).
pub trait PowerGain: Send + Sync {
    fn label(&self) -> String;
    fn variation_exponent(&self) -> VariationExponent;
    fn cdf(&self, z: f64) -> f64;
    fn pdf(&self, _z: f64) -> Option<f64> {
        None
    }
    /// Leading slowly varying factor l(z) with F(z) ~ z^d l(z) near zero.
    fn slowly_varying(&self, z: f64) -> Option<f64>;
    /// lim_{z->0} l(z), when that limit exists and is finite.
    fn leading_l_constant(&self) -> Option<f64>;
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64;
    /// Prepared sampler for the stratum {every underlying gain < t}.
    fn small_region(&self, t: f64) -> Option<Box<dyn SmallRegionSample + '_>>;
    /// Draw a gain and flag membership of the same stratum.
    fn sample_flagged(&self, rng: &mut ChaCha8Rng, t: f64) -> (f64, bool);
    /// Per-branch threshold that makes the stratum cover {combined gain
    /// < eta/rho}. Single channels use eta/rho; N-branch combiners scale
    /// by N.
    fn stratification_threshold(&self, eta: f64, rho: f64) -> f64 {
        eta / rho
    }
}

/// Sampler conditioned on the small-gain stratum, with its probability.
pub trait SmallRegionSample: Send + Sync {
    fn prob(&self) -> f64;
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64;
}

// ---------------------------------------------------------------------------
// CDF cache for families whose CDF has no closed form (generalized-K, Hoyt)
// ---------------------------------------------------------------------------

// Log-spaced grid of (F, f, f') nodes with two-point quintic Hermite
// interpolation in between. Node density is set by the 1e-6-relative
// pdf/CDF consistency requirement, not by KS accuracy.
struct CdfCache {
    zs: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
    dpdf: Vec<f64>,
    ln_z0: f64,
    inv_step: f64,
}

const CACHE_Z_LO: f64 = 1e-12;
const CACHE_PER_DECADE: usize = 64;

impl CdfCache {
    fn build(pdf: &dyn Fn(f64) -> f64, dpdf: &dyn Fn(f64) -> f64, z_hi: f64) -> Self {
        let decades = (z_hi / CACHE_Z_LO).log10();
        let n = (decades * CACHE_PER_DECADE as f64).ceil() as usize + 1;
        let step = (z_hi / CACHE_Z_LO).ln() / (n - 1) as f64;
        let zs: Vec<f64> = (0..n)
            .map(|i| CACHE_Z_LO * (step * i as f64).exp())
            .collect();

        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-320,
            max_subdivisions: 400,
        };
        // head piece on [0, z_lo]: substitute z = z_lo v^4 so pdfs with
        // z^(d-1) behavior (d >= 1/4) lose their endpoint singularity
        let z0 = zs[0];
        let head = integrate(
            |v| {
                let z = z0 * v.powi(4);
                if z == 0.0 {
                    0.0
                } else {
                    pdf(z) * 4.0 * z0 * v.powi(3)
                }
            },
            0.0,
            1.0,
            &spec,
        )
        .map(|r| r.value)
        .unwrap_or(0.0);

        let mut cdf = Vec::with_capacity(n);
        cdf.push(head);
        for w in zs.windows(2) {
            let panel = integrate(pdf, w[0], w[1], &spec)
                .map(|r| r.value)
                .unwrap_or(0.0);
            let prev = *cdf.last().unwrap();
            cdf.push(prev + panel);
        }
        let pdf_v: Vec<f64> = zs.iter().map(|&z| pdf(z)).collect();
        let dpdf_v: Vec<f64> = zs.iter().map(|&z| dpdf(z)).collect();
        Self {
            zs,
            cdf,
            pdf: pdf_v,
            dpdf: dpdf_v,
            ln_z0: z0.ln(),
            inv_step: 1.0 / step,
        }
    }

    fn z_hi(&self) -> f64 {
        *self.zs.last().unwrap()
    }

    // quintic Hermite on the bracketing panel
    fn eval(&self, z: f64) -> f64 {
        let n = self.zs.len();
        let mut i = (((z.ln() - self.ln_z0) * self.inv_step).floor() as isize)
            .clamp(0, n as isize - 2) as usize;
        // guard against log/exp rounding at panel edges
        while i > 0 && z < self.zs[i] {
            i -= 1;
        }
        while i < n - 2 && z > self.zs[i + 1] {
            i += 1;
        }
        let (z0, z1) = (self.zs[i], self.zs[i + 1]);
        let h = z1 - z0;
        let t = ((z - z0) / h).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
        let v = self.cdf[i] * h00
            + h * self.pdf[i] * h10
            + h * h * self.dpdf[i] * h20
            + self.cdf[i + 1] * h01
            + h * self.pdf[i + 1] * h11
            + h * h * self.dpdf[i + 1] * h21;
        v.clamp(0.0, 1.0)
    }
}

// ---------------------------------------------------------------------------
// the channel model
// ---------------------------------------------------------------------------

enum Inner {
    Rayleigh,
    Nakagami {
        m: f64,
        gamma: Gamma<f64>,
    },
    Weibull {
        k: f64,
    },
    Rician {
        k_factor: f64,
    },
    Hoyt {
        q: f64,
        cache: CdfCache,
    },
    GeneralizedK {
        m: f64,
        k: f64,
        gamma_m: Gamma<f64>,
        gamma_k: Gamma<f64>,
        cache: CdfCache,
    },
    LogNormal {
        sigma_nat: f64,
    },
}

/// A fading channel power-gain distribution.
pub struct ChannelModel {
    spec: ChannelSpec,
    mean_power: f64,
    inner: Inner,
}

fn gk_pdf(m: f64, k: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let nu = k - m;
    let u = 2.0 * (k * m * z).sqrt();
    let c = 2.0 * (k * m).powf(0.5 * (k + m)) / (gamma_fn(m) * gamma_fn(k));
    let v = c * z.powf(0.5 * (k + m) - 1.0) * bessel_k(nu, u);
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn gk_dpdf(m: f64, k: f64, z: f64) -> f64 {
    // f'(z) with K_nu'(u) = -(K_{nu-1}(u) + K_{nu+1}(u))/2 and du/dz = u/(2z)
    if z <= 0.0 {
        return 0.0;
    }
    let nu = k - m;
    let u = 2.0 * (k * m * z).sqrt();
    let c = 2.0 * (k * m).powf(0.5 * (k + m)) / (gamma_fn(m) * gamma_fn(k));
    let p = 0.5 * (k + m) - 1.0;
    let kd = -0.5 * (bessel_k(nu - 1.0, u) + bessel_k(nu + 1.0, u));
    let v = c * z.powf(p - 1.0) * (p * bessel_k(nu, u) + 0.5 * u * kd);
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

// Hoyt pdf for unit mean power: z = sx^2 X^2 + sy^2 Y^2 with
// sx^2 = 1/(1+q^2), sy^2 = q^2/(1+q^2), X, Y standard normal. This gives
// pdf(z) = A exp(-a z) I0(b z) with the coefficients below, and the
// small-z limit pdf(0) = A = (1+q^2)/(2q), hence l(z) -> (1+q^2)/(2q).
fn hoyt_coeffs(q: f64) -> (f64, f64, f64) {
    let q2 = q * q;
    let a_coef = (1.0 + q2) * (1.0 + q2) / (4.0 * q2);
    let b_coef = (1.0 - q2 * q2) / (4.0 * q2);
    let amp = (1.0 + q2) / (2.0 * q);
    (amp, a_coef, b_coef)
}

fn hoyt_pdf(q: f64, z: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    let (amp, a, b) = hoyt_coeffs(q);
    amp * ((b - a) * z).exp() * bessel_i0_scaled(b * z)
}

fn hoyt_dpdf(q: f64, z: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    let (amp, a, b) = hoyt_coeffs(q);
    amp * ((b - a) * z).exp() * (b * bessel_i1_scaled(b * z) - a * bessel_i0_scaled(b * z))
}

impl ChannelModel {
    /// Build a channel model from a parsed spec.
    pub fn new(spec: ChannelSpec) -> Result<Self, ChannelError> {
        spec.validate()?;
        let inner = match spec {
            ChannelSpec::Rayleigh => Inner::Rayleigh,
            ChannelSpec::Nakagami { m } => Inner::Nakagami {
                m,
                gamma: Gamma::new(m, 1.0 / m).map_err(|e| ChannelError::BadParameter {
                    family: "nakagami",
                    message: e.to_string(),
                })?,
            },
            ChannelSpec::Weibull { k } => Inner::Weibull { k },
            ChannelSpec::Rician { k_factor } => Inner::Rician { k_factor },
            ChannelSpec::Hoyt { q } => {
                let (_, a, b) = hoyt_coeffs(q);
                // grid tail where exp(-(a-b) z) has fully decayed
                let z_hi = (42.0 / (a - b)).max(50.0);
                let cache = CdfCache::build(&|z| hoyt_pdf(q, z), &|z| hoyt_dpdf(q, z), z_hi);
                Inner::Hoyt { q, cache }
            }
            ChannelSpec::GeneralizedK { m, k } => {
                // K_nu(2 sqrt(kmz)) ~ exp(-2 sqrt(kmz)); fully decayed needs
                // 2 sqrt(km z_hi) >~ 40
                let z_hi = (400.0 / (k * m)).max(50.0);
                let cache =
                    CdfCache::build(&|z| gk_pdf(m, k, z), &|z| gk_dpdf(m, k, z), z_hi);
                Inner::GeneralizedK {
                    m,
                    k,
                    gamma_m: Gamma::new(m, 1.0 / m).map_err(|e| ChannelError::BadParameter {
                        family: "gk",
                        message: e.to_string(),
                    })?,
                    gamma_k: Gamma::new(k, 1.0 / k).map_err(|e| ChannelError::BadParameter {
                        family: "gk",
                        message: e.to_string(),
                    })?,
                    cache,
                }
            }
            ChannelSpec::LogNormal { sigma_db } => Inner::LogNormal {
                sigma_nat: sigma_db * LN10_OVER_10,
            },
        };
        Ok(Self {
            spec,
            mean_power: 1.0,
            inner,
        })
    }

    /// Parse a textual spec (`family:key=value,...`) and build the model.
    pub fn from_spec(s: &str) -> Result<Self, ChannelError> {
        Self::new(s.parse()?)
    }

    /// Multiplicative power scale; the base distribution is stretched by `p`.
    pub fn with_mean_power(mut self, p: f64) -> Result<Self, ChannelError> {
        if !(p > 0.0) {
            return Err(ChannelError::BadParameter {
                family: "mean_power",
                message: format!("must be > 0, got {p}"),
            });
        }
        self.mean_power = p;
        Ok(self)
    }

    pub fn spec(&self) -> ChannelSpec {
        self.spec
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    /// F(z) ~ z^d l(z): the family's analytically derived leading form.
    ///
    /// Errors for rapidly varying channels, which have no power-law asymptote.
    pub fn cdf_asymptote(&self, z: f64) -> Result<f64, ChannelError> {
        let d = self
            .variation_exponent()
            .finite()
            .ok_or_else(|| ChannelError::RapidlyVarying(self.label()))?;
        let l = self
            .slowly_varying(z)
            .expect("finite-d channel must expose l(z)");
        Ok(z.powf(d) * l)
    }

    fn base_cdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match &self.inner {
            Inner::Rayleigh => -(-z).exp_m1(),
            Inner::Nakagami { m, .. } => lower_incomplete_gamma_regularized(*m, m * z),
            Inner::Weibull { k } => -(-z.powf(*k)).exp_m1(),
            Inner::Rician { k_factor } => {
                let a = (2.0 * k_factor).sqrt();
                let b = (2.0 * (1.0 + k_factor) * z).sqrt();
                marcum_q1_complement(a, b)
            }
            Inner::Hoyt { cache, .. } | Inner::GeneralizedK { cache, .. } => {
                if z < CACHE_Z_LO {
                    // extrapolate with the family's asymptotic form
                    let head = cache.cdf[0];
                    let l_head = self.base_slowly_varying(CACHE_Z_LO);
                    let l_z = self.base_slowly_varying(z);
                    let d = self.variation_exponent().finite().unwrap();
                    head * (z / CACHE_Z_LO).powf(d) * l_z / l_head
                } else if z > cache.z_hi() {
                    let spec = QuadratureSpec {
                        rel_tol: 1e-11,
                        abs_tol: 1e-320,
                        max_subdivisions: 400,
                    };
                    let tail = integrate(|u| self.base_pdf_value(u), z, f64::INFINITY, &spec)
                        .map(|r| r.value)
                        .unwrap_or(0.0);
                    1.0 - tail
                } else {
                    cache.eval(z)
                }
            }
            Inner::LogNormal { sigma_nat } => q_fn(-z.ln() / sigma_nat),
        }
    }

    fn base_pdf_value(&self, z: f64) -> f64 {
        match &self.inner {
            Inner::Rayleigh => {
                if z < 0.0 {
                    0.0
                } else {
                    (-z).exp()
                }
            }
            Inner::Nakagami { m, .. } => {
                if z <= 0.0 {
                    if (*m - 1.0).abs() < 1e-12 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    m.powf(*m) / gamma_fn(*m) * z.powf(m - 1.0) * (-m * z).exp()
                }
            }
            Inner::Weibull { k } => {
                if z <= 0.0 {
                    0.0
                } else {
                    k * z.powf(k - 1.0) * (-z.powf(*k)).exp()
                }
            }
            Inner::Rician { k_factor } => {
                if z < 0.0 {
                    return 0.0;
                }
                let kk = *k_factor;
                let arg = 2.0 * (kk * (1.0 + kk) * z).sqrt();
                (1.0 + kk) * (-kk - (1.0 + kk) * z + arg).exp() * bessel_i0_scaled(arg)
            }
            Inner::Hoyt { q, .. } => hoyt_pdf(*q, z),
            Inner::GeneralizedK { m, k, .. } => gk_pdf(*m, *k, z),
            Inner::LogNormal { sigma_nat } => {
                if z <= 0.0 {
                    0.0
                } else {
                    let u = z.ln() / sigma_nat;
                    (-0.5 * u * u).exp() / (z * sigma_nat * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
        }
    }

    fn base_slowly_varying(&self, z: f64) -> f64 {
        match &self.inner {
            Inner::Rayleigh | Inner::Weibull { .. } => 1.0,
            Inner::Nakagami { m, .. } => m.powf(*m) / gamma_fn(m + 1.0),
            // Rician: pdf(0) = (1+K) e^-K (complex Gaussian with LOS offset),
            // so F(z) ~ (1+K) e^-K z near zero.
            Inner::Rician { k_factor } => (1.0 + k_factor) * (-k_factor).exp(),
            // Hoyt: pdf(0) = (1+q^2)/(2q), see hoyt_coeffs.
            Inner::Hoyt { q, .. } => (1.0 + q * q) / (2.0 * q),
            Inner::GeneralizedK { m, k, .. } => {
                let (mu, ma) = if m <= k { (*m, *k) } else { (*k, *m) };
                if (ma - mu).abs() < 1e-9 {
                    // integrating f(z) ~ 2 m^{2m} z^{m-1} (-ln(m sqrt z) - gamma_em)
                    //                    / Gamma(m)^2:
                    // l(z) = 2 m^{2m} (-ln(m sqrt z) - gamma_em + 1/(2m))
                    //        / (m Gamma(m)^2)
                    let g = gamma_fn(mu);
                    2.0 * mu.powf(2.0 * mu) / (mu * g * g)
                        * (-(mu * z.sqrt()).ln() - EULER_GAMMA + 0.5 / mu)
                } else {
                    gamma_fn(ma - mu) * (m * k).powf(mu) / (gamma_fn(mu + 1.0) * gamma_fn(ma))
                }
            }
            Inner::LogNormal { .. } => f64::NAN,
        }
    }

    fn base_sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.inner {
            Inner::Rayleigh => {
                let u: f64 = rng.random();
                -(1.0 - u).ln()
            }
            Inner::Nakagami { gamma, .. } => gamma.sample(rng),
            Inner::Weibull { k } => {
                let u: f64 = rng.random();
                (-(1.0 - u).ln()).powf(1.0 / k)
            }
            Inner::Rician { k_factor } => {
                let s = (k_factor / (1.0 + k_factor)).sqrt();
                let sigma = (0.5 / (1.0 + k_factor)).sqrt();
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                let re = s + sigma * g1;
                let im = sigma * g2;
                re * re + im * im
            }
            Inner::Hoyt { q, .. } => {
                let q2 = q * q;
                let sx2 = 1.0 / (1.0 + q2);
                let sy2 = q2 / (1.0 + q2);
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                sx2 * g1 * g1 + sy2 * g2 * g2
            }
            Inner::GeneralizedK {
                gamma_m, gamma_k, ..
            } => gamma_m.sample(rng) * gamma_k.sample(rng),
            Inner::LogNormal { sigma_nat } => {
                let g: f64 = rng.sample(StandardNormal);
                (sigma_nat * g).exp()
            }
        }
    }

    /// Draw `n` independent gains; deterministic for a given RNG state.
    pub fn sample_gain(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

impl PowerGain for ChannelModel {
    fn label(&self) -> String {
        self.spec.to_string()
    }

    fn variation_exponent(&self) -> VariationExponent {
        match &self.inner {
            Inner::Rayleigh | Inner::Rician { .. } | Inner::Hoyt { .. } => {
                VariationExponent::Finite(1.0)
            }
            Inner::Nakagami { m, .. } => VariationExponent::Finite(*m),
            Inner::Weibull { k } => VariationExponent::Finite(*k),
            Inner::GeneralizedK { m, k, .. } => VariationExponent::Finite(m.min(*k)),
            Inner::LogNormal { .. } => VariationExponent::Infinite,
        }
    }

    fn cdf(&self, z: f64) -> f64 {
        self.base_cdf(z / self.mean_power)
    }

    fn pdf(&self, z: f64) -> Option<f64> {
        Some(self.base_pdf_value(z / self.mean_power) / self.mean_power)
    }

    fn slowly_varying(&self, z: f64) -> Option<f64> {
        let d = self.variation_exponent().finite()?;
        // F(z) = F_base(z/p) ~ (z/p)^d l_base(z/p) = z^d [p^-d l_base(z/p)]
        Some(self.mean_power.powf(-d) * self.base_slowly_varying(z / self.mean_power))
    }

    fn leading_l_constant(&self) -> Option<f64> {
        match &self.inner {
            Inner::GeneralizedK { m, k, .. } if (m - k).abs() < 1e-9 => None,
            Inner::LogNormal { .. } => None,
            _ => self.slowly_varying(1e-30),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.mean_power * self.base_sample(rng)
    }

    fn small_region(&self, t: f64) -> Option<Box<dyn SmallRegionSample + '_>> {
        if !(t > 0.0) {
            return None;
        }
        let d = self.variation_exponent().finite()?;
        let prob = self.cdf(t);
        if prob <= 0.0 || prob >= 1.0 {
            return None;
        }
        // proposal Z = t V^{2/d} has density (d/2) z^{d/2-1} t^{-d/2};
        // bound the ratio pdf/z^{d/2-1} on a log grid with a safety factor
        let mut bound: f64 = 0.0;
        for i in 0..=256 {
            let z = t * 10f64.powf(-10.0 * (1.0 - i as f64 / 256.0));
            let f = self.pdf(z).unwrap_or(0.0);
            bound = bound.max(f * z.powf(1.0 - 0.5 * d));
        }
        if !(bound > 0.0) {
            return None;
        }
        Some(Box::new(ChannelSmallRegion {
            ch: self,
            t,
            prob,
            d,
            bound: bound * 1.05,
        }))
    }

    fn sample_flagged(&self, rng: &mut ChaCha8Rng, t: f64) -> (f64, bool) {
        let z = self.sample(rng);
        (z, z < t)
    }
}

struct ChannelSmallRegion<'a> {
    ch: &'a ChannelModel,
    t: f64,
    prob: f64,
    d: f64,
    bound: f64,
}

impl SmallRegionSample for ChannelSmallRegion<'_> {
    fn prob(&self) -> f64 {
        self.prob
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let v: f64 = rng.random();
            if v == 0.0 {
                continue;
            }
            let z = self.t * v.powf(2.0 / self.d);
            let f = self.ch.pdf(z).unwrap_or(0.0);
            let ratio = f * z.powf(1.0 - 0.5 * self.d) / self.bound;
            let u: f64 = rng.random();
            if u < ratio {
                return z;
            }
        }
    }
}
