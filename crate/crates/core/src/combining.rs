//! Diversity combining: compose N independent, possibly non-identical
//! branches into a combined channel for MRC, EGC, and SC.
//!
//! The combined variation exponent is always the sum of the branch
//! exponents. Near zero the combined CDF takes the product form
//!
//! - MRC:  F_c(z) ~ [Gamma(d_c+1)]^-1 prod Gamma(d_n+1) * prod F_n(z)
//! - EGC:  F_c(z) ~ [Gamma(2 d_c+1)]^-1 prod Gamma(2 d_n+1) * prod F_n(N z)
//! - SC:   F_c(z)  = prod F_n(z) (exact at every z, not just near zero)
//!
//! The evaluators keep the full branch CDFs F_n rather than their leading
//! monomials, which is what buys the moderate-SNR accuracy of the combined
//! asymptotes. Samplers draw each branch independently and apply the
//! scheme map (sum, scaled squared root-sum, max).

use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

use crate::asymptotics::{asymptote, AsymptoticEstimate, AsymptoticsError};
use crate::channels::{ChannelModel, PowerGain, SmallRegionSample, VariationExponent};
use crate::error_models::ErrorRateModel;
use crate::montecarlo::{mc_average_error, McConfig, McResult};
use crate::numerics::special::gamma_fn;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Maximum ratio combining: z_c = sum z_n.
    Mrc,
    /// Equal gain combining: z_c = (sum sqrt(z_n))^2 / N.
    Egc,
    /// Selection combining: z_c = max z_n.
    Sc,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Mrc => "mrc",
            Self::Egc => "egc",
            Self::Sc => "sc",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Scheme {
    type Err = CombiningError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mrc" => Ok(Self::Mrc),
            "egc" => Ok(Self::Egc),
            "sc" => Ok(Self::Sc),
            other => Err(CombiningError::UnknownScheme(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum CombiningError {
    #[error("unknown combining scheme `{0}` (expected mrc | egc | sc)")]
    UnknownScheme(String),
    #[error("need at least one branch")]
    NoBranches,
    #[error("branch `{0}` is rapidly varying (d = inf): no power-law composition exists")]
    InfiniteBranch(String),
    #[error("branch `{0}`: l(z) failed the slow-variation spot check (ratio {1})")]
    NotSlowlyVarying(String, f64),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

/// Result of composing branches under a combining scheme.
pub struct CombinedChannel {
    scheme: Scheme,
    branches: Vec<Arc<ChannelModel>>,
    d_c: f64,
    /// Gamma-ratio constant in front of the product of branch CDFs.
    prefactor: f64,
    /// Argument scale inside the branch CDFs (N for EGC, else 1).
    arg_scale: f64,
}

/// Compose independent branches under MRC, EGC, or SC.
pub fn combine(
    scheme: Scheme,
    branches: Vec<ChannelModel>,
) -> Result<CombinedChannel, CombiningError> {
    if branches.is_empty() {
        return Err(CombiningError::NoBranches);
    }
    let mut ds = Vec::with_capacity(branches.len());
    for b in &branches {
        match b.variation_exponent() {
            VariationExponent::Finite(d) => ds.push(d),
            VariationExponent::Infinite => {
                return Err(CombiningError::InfiniteBranch(b.label()))
            }
        }
        // spot-check that l is slowly varying: l(4z)/l(z) -> 1 near zero.
        // For EGC this is the y-domain condition that G_n(y) = y^{2 d_n}
        // l_n(y^2) keeps a slowly varying factor.
        let z = 1e-8;
        let (l1, l4) = (b.slowly_varying(z), b.slowly_varying(4.0 * z));
        if let (Some(l1), Some(l4)) = (l1, l4) {
            let ratio = l4 / l1;
            if !(0.75..=1.3333).contains(&ratio) {
                return Err(CombiningError::NotSlowlyVarying(b.label(), ratio));
            }
        }
    }
    let d_c: f64 = ds.iter().sum();
    let n = branches.len() as f64;
    let (prefactor, arg_scale) = match scheme {
        Scheme::Mrc => (
            ds.iter().map(|&d| gamma_fn(d + 1.0)).product::<f64>() / gamma_fn(d_c + 1.0),
            1.0,
        ),
        Scheme::Egc => (
            ds.iter().map(|&d| gamma_fn(2.0 * d + 1.0)).product::<f64>()
                / gamma_fn(2.0 * d_c + 1.0),
            n,
        ),
        Scheme::Sc => (1.0, 1.0),
    };
    Ok(CombinedChannel {
        scheme,
        branches: branches.into_iter().map(Arc::new).collect(),
        d_c,
        prefactor,
        arg_scale,
    })
}

impl fmt::Debug for CombinedChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CombinedChannel")
            .field("scheme", &self.scheme)
            .field("d_c", &self.d_c)
            .field("prefactor", &self.prefactor)
            .finish_non_exhaustive()
    }
}

impl CombinedChannel {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn branches(&self) -> &[Arc<ChannelModel>] {
        &self.branches
    }

    pub fn combined_exponent(&self) -> f64 {
        self.d_c
    }

    /// The Gamma-ratio constant of the asymptotic CDF.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    fn map_gains(&self, zs: impl Iterator<Item = f64>) -> f64 {
        match self.scheme {
            Scheme::Mrc => zs.sum(),
            Scheme::Egc => {
                let mut count = 0usize;
                let mut acc = 0.0;
                for z in zs {
                    acc += z.sqrt();
                    count += 1;
                }
                acc * acc / count as f64
            }
            Scheme::Sc => zs.fold(0.0, f64::max),
        }
    }
}

impl PowerGain for CombinedChannel {
    fn label(&self) -> String {
        let parts: Vec<String> = self.branches.iter().map(|b| b.label()).collect();
        format!("{}({})", self.scheme, parts.join(","))
    }

    fn variation_exponent(&self) -> VariationExponent {
        VariationExponent::Finite(self.d_c)
    }

    /// Asymptotic combined CDF (exact for SC).
    fn cdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        self.prefactor
            * self
                .branches
                .iter()
                .map(|b| b.cdf(self.arg_scale * z))
                .product::<f64>()
    }

    /// Density of the combined gain; closed form only for SC.
    fn pdf(&self, z: f64) -> Option<f64> {
        match self.scheme {
            Scheme::Sc => {
                let mut total = 0.0;
                for (i, bi) in self.branches.iter().enumerate() {
                    let mut term = bi.pdf(z)?;
                    for (j, bj) in self.branches.iter().enumerate() {
                        if i != j {
                            term *= bj.cdf(z);
                        }
                    }
                    total += term;
                }
                Some(total)
            }
            _ => None,
        }
    }

    fn slowly_varying(&self, z: f64) -> Option<f64> {
        // F_c(z) = pref * prod F_n(s z) ~ z^{d_c} [pref s^{d_c} prod l_n(s z)]
        let mut l = self.prefactor * self.arg_scale.powf(self.d_c);
        for b in &self.branches {
            l *= b.slowly_varying(self.arg_scale * z)?;
        }
        Some(l)
    }

    fn leading_l_constant(&self) -> Option<f64> {
        let mut l = self.prefactor * self.arg_scale.powf(self.d_c);
        for b in &self.branches {
            l *= b.leading_l_constant()?;
        }
        Some(l)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let zs: Vec<f64> = self.branches.iter().map(|b| b.sample(rng)).collect();
        self.map_gains(zs.into_iter())
    }

    fn small_region(&self, t: f64) -> Option<Box<dyn SmallRegionSample + '_>> {
        let mut plans = Vec::with_capacity(self.branches.len());
        let mut prob = 1.0;
        for b in &self.branches {
            let plan = b.small_region(t)?;
            prob *= plan.prob();
            plans.push(plan);
        }
        if !(prob > 0.0) {
            return None;
        }
        Some(Box::new(CombinedSmallRegion {
            cc: self,
            plans,
            prob,
        }))
    }

    fn sample_flagged(&self, rng: &mut ChaCha8Rng, t: f64) -> (f64, bool) {
        let zs: Vec<f64> = self.branches.iter().map(|b| b.sample(rng)).collect();
        let inside = zs.iter().all(|&z| z < t);
        (self.map_gains(zs.into_iter()), inside)
    }

    fn stratification_threshold(&self, eta: f64, rho: f64) -> f64 {
        // {z_c < eta/rho} implies every branch gain < N eta / rho for all
        // three scheme maps, so this per-branch box covers the event
        eta * self.branches.len() as f64 / rho
    }
}

struct CombinedSmallRegion<'a> {
    cc: &'a CombinedChannel,
    plans: Vec<Box<dyn SmallRegionSample + 'a>>,
    prob: f64,
}

impl SmallRegionSample for CombinedSmallRegion<'_> {
    fn prob(&self) -> f64 {
        self.prob
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let zs: Vec<f64> = self.plans.iter().map(|p| p.sample(rng)).collect();
        self.cc.map_gains(zs.into_iter())
    }
}

/// Asymptotic average error rate over the combined channel: the single
/// channel computation with (d_c, F_c) in place of (d, F).
pub fn combined_asymptote(
    model: &ErrorRateModel,
    cc: Arc<CombinedChannel>,
) -> Result<AsymptoticEstimate, CombiningError> {
    Ok(asymptote(model, cc)?)
}

/// Conditional-error Monte Carlo estimate of the combined average error
/// rate, with small-gain stratification on by default.
pub fn combined_exact_average(
    model: &ErrorRateModel,
    cc: &CombinedChannel,
    rho: f64,
    cfg: &McConfig,
) -> McResult {
    let cfg = McConfig {
        importance: cfg
            .importance
            .or(Some(crate::montecarlo::ImportanceSpec::default())),
        ..*cfg
    };
    mc_average_error(model, cc, rho, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{empirical_diversity_order, exact_average};
    use crate::montecarlo::ImportanceSpec;
    use crate::numerics::{db_to_linear, integrate, QuadratureSpec};
    use rand::SeedableRng;

    fn branches(specs: &[&str]) -> Vec<ChannelModel> {
        specs
            .iter()
            .map(|s| ChannelModel::from_spec(s).unwrap())
            .collect()
    }

    fn rel_err(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    #[test]
    fn mrc_rayleigh_leading_term() {
        // N rayleigh branches: F_c(z) ~ z^N / N!
        for n in [2usize, 3] {
            let cc = combine(Scheme::Mrc, branches(&vec!["rayleigh"; n])).unwrap();
            assert_eq!(cc.combined_exponent(), n as f64);
            let z = 1e-4f64;
            let want = z.powi(n as i32) / gamma_fn(n as f64 + 1.0);
            assert!(rel_err(cc.cdf(z), want) < 1e-3, "N={n}");
            // oracle: exact sum-of-exponentials CDF 1 - e^-z sum z^k/k!
            let mut tail = 0.0;
            let mut term = 1.0;
            for k in 0..n {
                if k > 0 {
                    term *= z / k as f64;
                }
                tail += term;
            }
            let exact = 1.0 - (-z).exp() * tail;
            assert!(rel_err(cc.cdf(z), exact) < 1e-3, "N={n}");
        }
    }

    #[test]
    fn egc_two_rayleigh_constant() {
        // F_c(z) ~ (2/3) z^2, against the direct convolution oracle
        let cc = combine(Scheme::Egc, branches(&["rayleigh", "rayleigh"])).unwrap();
        let z = 1e-4;
        let got = cc.cdf(z) / (z * z);
        assert!(rel_err(got, 2.0 / 3.0) < 0.01, "{got}");

        // convolution oracle: y_n = sqrt(z_n) has pdf 2y e^{-y^2};
        // P(y1 + y2 <= y) by quadrature, then F_c(z) = P(y_c <= sqrt(2 z))
        let spec = QuadratureSpec::with_rel_tol(1e-11);
        let y = (2.0 * z).sqrt();
        let conv = integrate(
            |u: f64| {
                let rest = y - u;
                2.0 * u * (-u * u).exp() * (1.0 - (-rest * rest).exp())
            },
            0.0,
            y,
            &spec,
        )
        .unwrap()
        .value;
        assert!(rel_err(cc.cdf(z), conv) < 0.01, "{} vs {conv}", cc.cdf(z));
    }

    #[test]
    fn sc_is_exact_product() {
        let cc = combine(
            Scheme::Sc,
            branches(&["nakagami:m=0.5", "nakagami:m=1", "nakagami:m=1.5"]),
        )
        .unwrap();
        assert_eq!(cc.combined_exponent(), 3.0);
        for z in [0.01, 0.5, 2.0] {
            let want: f64 = cc.branches().iter().map(|b| b.cdf(z)).product();
            assert_eq!(cc.cdf(z), want);
        }
        assert_eq!(cc.prefactor(), 1.0);
    }

    #[test]
    fn samplers_follow_scheme_maps() {
        let specs = ["nakagami:m=0.5", "nakagami:m=1", "nakagami:m=1.5"];
        for (scheme, map) in [
            (Scheme::Mrc, &(|z: &[f64]| z.iter().sum::<f64>()) as &dyn Fn(&[f64]) -> f64),
            (Scheme::Egc, &|z: &[f64]| {
                z.iter().map(|v| v.sqrt()).sum::<f64>().powi(2) / z.len() as f64
            }),
            (Scheme::Sc, &|z: &[f64]| z.iter().fold(0.0, |a, &b| a.max(b))),
        ] {
            let cc = combine(scheme, branches(&specs)).unwrap();
            // identical RNG stream: combined draw equals map of branch draws
            let mut r1 = ChaCha8Rng::seed_from_u64(13);
            let got = cc.sample(&mut r1);
            let mut r2 = ChaCha8Rng::seed_from_u64(13);
            let zs: Vec<f64> = cc.branches().iter().map(|b| b.sample(&mut r2)).collect();
            assert_eq!(got, map(&zs), "{scheme}");
        }
    }

    #[test]
    fn infinite_branch_rejected() {
        let err = combine(
            Scheme::Mrc,
            branches(&["rayleigh", "lognormal:sigma_db=8"]),
        )
        .unwrap_err();
        assert!(matches!(err, CombiningError::InfiniteBranch(_)));
    }

    #[test]
    fn single_branch_sc_degenerates() {
        let cc = combine(Scheme::Sc, branches(&["rayleigh"])).unwrap();
        let single = ChannelModel::from_spec("rayleigh").unwrap();
        let est_c =
            combined_asymptote(&ErrorRateModel::bpsk_ber(), Arc::new(cc)).unwrap();
        let est_s = asymptote(&ErrorRateModel::bpsk_ber(), Arc::new(single)).unwrap();
        assert!(rel_err(est_c.coefficient_a(), est_s.coefficient_a()) < 1e-12);
        for rho in [10.0, 1e4] {
            assert!(rel_err(est_c.evaluate(rho), est_s.evaluate(rho)) < 1e-12);
        }
    }

    #[test]
    fn bpsk_two_branch_mrc_constant() {
        // classical high-SNR MRC coefficient 3/16 for N=2 rayleigh
        let cc = combine(Scheme::Mrc, branches(&["rayleigh", "rayleigh"])).unwrap();
        let est = combined_asymptote(&ErrorRateModel::bpsk_ber(), Arc::new(cc)).unwrap();
        let a = est.power_law_constant().unwrap();
        assert!(rel_err(a, 3.0 / 16.0) < 1e-9, "{a}");
    }

    #[test]
    fn three_scheme_curves_share_slope() {
        let specs = ["nakagami:m=0.5", "nakagami:m=1", "nakagami:m=1.5"];
        let mut constants = Vec::new();
        for scheme in [Scheme::Mrc, Scheme::Egc, Scheme::Sc] {
            let cc = Arc::new(combine(scheme, branches(&specs)).unwrap());
            let est = combined_asymptote(&ErrorRateModel::bpsk_ber(), cc).unwrap();
            assert_eq!(est.exponent(), 3.0);
            constants.push(est.power_law_constant().unwrap());
        }
        // common slope, differing constants; MRC has the smallest
        assert!(constants[0] < constants[1]);
        assert!(constants[1] < constants[2]);
    }

    #[test]
    fn mrc_dpsk_matches_product_mgf() {
        // MRC of 2 rayleigh, dpsk at rho=100: 0.5 (1+rho)^-2
        let cc = combine(Scheme::Mrc, branches(&["rayleigh", "rayleigh"])).unwrap();
        let model = ErrorRateModel::dpsk_ber();
        let cfg = McConfig {
            seed: 33,
            draws: 2_000_000,
            ..McConfig::default()
        };
        let r = combined_exact_average(&model, &cc, 100.0, &cfg);
        let want = 0.5 * 101.0f64.powi(-2);
        assert!(
            (r.estimate - want).abs() < 4.0 * r.ci_halfwidth,
            "{r:?} vs {want}"
        );
    }

    #[test]
    fn sc_dpsk_matches_quadrature() {
        // SC of 2 rayleigh: density 2 e^-z (1 - e^-z);
        // E[0.5 e^-rho z] = 1/(1+rho) - 1/(2+rho)
        let cc = combine(Scheme::Sc, branches(&["rayleigh", "rayleigh"])).unwrap();
        let model = ErrorRateModel::dpsk_ber();
        let rho = 100.0;
        let want = 1.0 / (1.0 + rho) - 1.0 / (2.0 + rho);
        // quadrature path through the exact SC density
        let quad = exact_average(&model, &cc, rho).unwrap();
        assert!(rel_err(quad, want) < 1e-9, "{quad} vs {want}");
        // Monte Carlo path agrees within CI
        let cfg = McConfig {
            seed: 44,
            draws: 2_000_000,
            ..McConfig::default()
        };
        let r = combined_exact_average(&model, &cc, rho, &cfg);
        assert!((r.estimate - want).abs() < 4.0 * r.ci_halfwidth, "{r:?}");
        // rho -> 0: Pe(0)
        let low = combined_exact_average(&model, &cc, 1e-9, &cfg);
        assert!((low.estimate - 0.5).abs() < 1e-6);
    }

    #[test]
    fn exponent_additivity_from_curves() {
        // empirical diversity order of the combined exact-average curve
        // equals sum d_n within 0.05 over 50..70 dB
        let specs = ["nakagami:m=0.5", "nakagami:m=1", "nakagami:m=1.5"];
        // SC has an exact density, so its curve is true quadrature values
        let cc = Arc::new(combine(Scheme::Sc, branches(&specs)).unwrap());
        let curve: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let rho = db_to_linear(50.0 + i as f64);
                (
                    rho,
                    exact_average(&ErrorRateModel::bpsk_ber(), cc.as_ref(), rho).unwrap(),
                )
            })
            .collect();
        let d = empirical_diversity_order(&curve).unwrap();
        assert!((d.d_hat - 3.0).abs() < 0.05, "sc: {}", d.d_hat);
        // MRC and EGC through the asymptotic CDF composition
        for scheme in [Scheme::Mrc, Scheme::Egc] {
            let cc = Arc::new(combine(scheme, branches(&specs)).unwrap());
            let est = combined_asymptote(&ErrorRateModel::bpsk_ber(), cc.clone()).unwrap();
            let curve: Vec<(f64, f64)> = (0..=20)
                .map(|i| {
                    let rho = db_to_linear(50.0 + i as f64);
                    (rho, est.evaluate(rho))
                })
                .collect();
            let d = empirical_diversity_order(&curve).unwrap();
            assert!((d.d_hat - 3.0).abs() < 0.05, "{scheme}: {}", d.d_hat);
        }
    }

    #[test]
    fn scheme_ordering_mrc_beats_egc_beats_sc() {
        // identical branch sets: MRC <= EGC <= SC at every test point
        let specs = ["rayleigh", "rayleigh", "rayleigh"];
        let model = ErrorRateModel::bpsk_ber();
        let cfg = McConfig {
            seed: 55,
            draws: 400_000,
            importance: Some(ImportanceSpec::default()),
            common_random_numbers: true,
            ..McConfig::default()
        };
        for db in [5.0, 15.0, 25.0] {
            let rho = db_to_linear(db);
            let mut values = Vec::new();
            for scheme in [Scheme::Mrc, Scheme::Egc, Scheme::Sc] {
                let cc = combine(scheme, branches(&specs)).unwrap();
                let r = combined_exact_average(&model, &cc, rho, &cfg);
                values.push((r.estimate, r.ci_halfwidth));
            }
            let slack = |a: (f64, f64), b: (f64, f64)| a.0 <= b.0 + 2.0 * (a.1 + b.1);
            assert!(slack(values[0], values[1]), "{db} dB: MRC vs EGC {values:?}");
            assert!(slack(values[1], values[2]), "{db} dB: EGC vs SC {values:?}");
        }
    }

    #[test]
    fn mrc_transform_identity() {
        // L_c(s) = prod L_n(s), estimated from the combined sampler via
        // the exponential error model (its mean IS the transform)
        let cc = combine(Scheme::Mrc, branches(&["rayleigh", "rayleigh"])).unwrap();
        let exp_model = ErrorRateModel::bound_only(crate::ExpBound::new(1.0, 1.0).unwrap());
        let cfg = McConfig {
            seed: 66,
            draws: 6_000_000,
            importance: Some(ImportanceSpec {
                eta: 5.0,
                fraction: 0.4,
            }),
            ..McConfig::default()
        };
        for s in [100.0, 1000.0] {
            let r = mc_average_error(&exp_model, &cc, s, &cfg);
            let want = (1.0 + s).powi(-2);
            assert!(
                rel_err(r.estimate, want) < 0.01,
                "s={s}: {} vs {want} (ci {})",
                r.estimate,
                r.ci_halfwidth
            );
            assert!((r.estimate - want).abs() < 3.5 * r.ci_halfwidth);
        }
    }
}
