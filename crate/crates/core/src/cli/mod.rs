//! Command-line front end.
//!
//! Subcommands: `asymptote`, `exact`, `mc`, `figure`, `exponent`, `offset`,
//! `combine`, `tauberian`. All curve output is CSV with `#`-prefixed
//! provenance headers (specs, seed, version, constants) and the row schema
//! `snr_db,value,method,ci_halfwidth`; `ci_halfwidth` is empty except for
//! Monte Carlo rows. Output is deterministic given flags and seed.

pub mod figures;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use crate::asymptotics::{asymptote, exact_average, exact_average_with_tol, snr_offset_db, AsymptoticEstimate};
use crate::channels::{ChannelModel, PowerGain};
use crate::combining::{combine, combined_asymptote, Scheme};
use crate::error_models::ErrorRateModel;
use crate::montecarlo::{mc_curve, ImportanceSpec, McConfig, DEFAULT_SEED};
use crate::numerics::{crossing_snr, db_to_linear};
use crate::regvar::{exponent_from_cdf, tauberian_check, ExponentVerdict};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "regfade",
    version,
    about = "High-SNR asymptotic error rates over fading channels, with quadrature and Monte Carlo validation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// RNG seed for Monte Carlo subcommands.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Monte Carlo draw budget per point.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub draws: u64,

    /// Relative quadrature tolerance override for exact curves.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Output path; `figure` treats it as a directory. Stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit the asymptotic curve C1 * F(C2/rho) over an SNR grid.
    Asymptote {
        /// Channel spec, e.g. rayleigh | nakagami:m=2.5 | gk:m=2,k=1.
        #[arg(long)]
        channel: String,
        /// Modulation spec: dpsk | bpsk | mpsk:M=8 | mqam:M=16.
        #[arg(long = "mod")]
        modulation: String,
        /// SNR grid in dB as lo:hi:step.
        #[arg(long, default_value = "0:50:2")]
        snr: String,
    },
    /// Emit the exact average error rate by adaptive quadrature.
    Exact {
        #[arg(long)]
        channel: String,
        #[arg(long = "mod")]
        modulation: String,
        #[arg(long, default_value = "0:50:2")]
        snr: String,
    },
    /// Emit Monte Carlo estimates with confidence intervals.
    Mc {
        #[arg(long)]
        channel: String,
        #[arg(long = "mod")]
        modulation: String,
        #[arg(long, default_value = "0:50:2")]
        snr: String,
        /// Batch count for the batch-means confidence interval.
        #[arg(long, default_value_t = 20)]
        batches: u32,
        /// Stratify draws into the small-gain region.
        #[arg(long)]
        importance: bool,
        /// Reuse the same draws at every grid point (smoother curves).
        #[arg(long)]
        crn: bool,
    },
    /// Reproduce a figure's curve data (1..=4) as CSV files.
    Figure {
        /// 1: Nakagami m=2 DPSK+BPSK; 2: m=3; 3: MRC+SC over three
        /// Nakagami branches m=0.5,1,1.5; 4: EGC over the same branches.
        n: u8,
        /// Include Monte Carlo rows (slower).
        #[arg(long)]
        with_mc: bool,
    },
    /// Estimate the variation exponent of a channel CDF at zero.
    Exponent {
        #[arg(long)]
        channel: String,
    },
    /// Constant SNR offset between two modulations on a shared channel.
    Offset {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        mod1: String,
        #[arg(long)]
        mod2: String,
    },
    /// Combined-channel asymptote (and optional MC) for MRC/EGC/SC.
    Combine {
        /// mrc | egc | sc.
        #[arg(long)]
        scheme: String,
        /// Comma-separated branch channel specs.
        #[arg(long)]
        branches: String,
        #[arg(long = "mod")]
        modulation: String,
        #[arg(long, default_value = "0:30:1")]
        snr: String,
        /// Include Monte Carlo rows.
        #[arg(long)]
        with_mc: bool,
        #[arg(long, default_value_t = 20)]
        batches: u32,
    },
    /// Transform-domain consistency check for a channel.
    Tauberian {
        #[arg(long)]
        channel: String,
    },
}

/// Parse an SNR grid `lo:hi:step` (dB) into grid points.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("SNR grid must be lo:hi:step, got `{s}`");
    }
    let lo: f64 = parts[0].parse().context("bad grid lo")?;
    let hi: f64 = parts[1].parse().context("bad grid hi")?;
    let step: f64 = parts[2].parse().context("bad grid step")?;
    if !(step > 0.0) || hi < lo {
        bail!("SNR grid must satisfy lo <= hi, step > 0, got `{s}`");
    }
    let mut grid = Vec::new();
    let mut v = lo;
    while v <= hi + 1e-9 {
        grid.push(v);
        v += step;
    }
    Ok(grid)
}

/// Split a branch list on commas, gluing `key=value` continuations back
/// onto their family (so `gk:m=2,k=1,rayleigh` parses as two branches).
pub fn parse_branch_list(s: &str) -> Result<Vec<ChannelModel>> {
    let mut specs: Vec<String> = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        let is_param = token.contains('=') && !token.contains(':');
        if is_param {
            let last = specs
                .last_mut()
                .ok_or_else(|| anyhow!("branch list starts with a bare parameter `{token}`"))?;
            last.push(',');
            last.push_str(token);
        } else {
            specs.push(token.to_string());
        }
    }
    specs
        .iter()
        .map(|spec| ChannelModel::from_spec(spec).map_err(|e| anyhow!(e)))
        .collect()
}

struct CsvWriter<W: Write> {
    out: W,
}

impl<W: Write> CsvWriter<W> {
    fn new(out: W) -> Self {
        Self { out }
    }

    fn header(&mut self, lines: &[String]) -> Result<()> {
        writeln!(self.out, "# regfade {VERSION}")?;
        for line in lines {
            writeln!(self.out, "# {line}")?;
        }
        writeln!(self.out, "snr_db,value,method,ci_halfwidth")?;
        Ok(())
    }

    fn row(&mut self, snr_db: f64, value: f64, method: &str, ci: Option<f64>) -> Result<()> {
        match ci {
            Some(ci) => writeln!(self.out, "{snr_db},{value:.10e},{method},{ci:.4e}")?,
            None => writeln!(self.out, "{snr_db},{value:.10e},{method},")?,
        }
        Ok(())
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => Ok(Box::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn estimate_header(est: &AsymptoticEstimate) -> Vec<String> {
    vec![format!(
        "c1={:.12e} c2={:.12e} d={} a={:.12e}",
        est.c1(),
        est.c2(),
        est.exponent(),
        est.coefficient_a()
    )]
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Asymptote {
            ref channel,
            ref modulation,
            ref snr,
        } => {
            let ch: Arc<ChannelModel> =
                Arc::new(ChannelModel::from_spec(channel).map_err(|e| anyhow!(e))?);
            let model: ErrorRateModel = modulation.parse().map_err(|e| anyhow!("{e}"))?;
            let grid = parse_snr_grid(snr)?;
            let est = asymptote(&model, ch.clone()).map_err(|e| anyhow!(e))?;
            let mut w = CsvWriter::new(open_output(&cli.out)?);
            let mut hdr = vec![
                "command: asymptote".to_string(),
                format!("channel: {} (d={})", ch.label(), ch.variation_exponent()),
                format!("modulation: {}", model.name()),
            ];
            hdr.extend(estimate_header(&est));
            w.header(&hdr)?;
            for &db in &grid {
                w.row(db, est.evaluate(db_to_linear(db)), "asymptote", None)?;
            }
            Ok(())
        }
        Command::Exact {
            ref channel,
            ref modulation,
            ref snr,
        } => {
            let ch = ChannelModel::from_spec(channel).map_err(|e| anyhow!(e))?;
            let model: ErrorRateModel = modulation.parse().map_err(|e| anyhow!("{e}"))?;
            let grid = parse_snr_grid(snr)?;
            let mut w = CsvWriter::new(open_output(&cli.out)?);
            w.header(&[
                "command: exact".to_string(),
                format!("channel: {}", ch.label()),
                format!("modulation: {}", model.name()),
                format!("quadrature rel tol: {}", cli.tol.unwrap_or(1e-11)),
            ])?;
            let tol = cli.tol.unwrap_or(1e-11);
            for &db in &grid {
                let v = exact_average_with_tol(&model, &ch, db_to_linear(db), tol)
                    .map_err(|e| anyhow!(e))?;
                w.row(db, v, "exact", None)?;
            }
            Ok(())
        }
        Command::Mc {
            ref channel,
            ref modulation,
            ref snr,
            batches,
            importance,
            crn,
        } => {
            let ch = ChannelModel::from_spec(channel).map_err(|e| anyhow!(e))?;
            let model: ErrorRateModel = modulation.parse().map_err(|e| anyhow!("{e}"))?;
            let grid = parse_snr_grid(snr)?;
            let cfg = McConfig {
                seed: cli.seed,
                draws: cli.draws,
                batches,
                common_random_numbers: crn,
                importance: importance.then(ImportanceSpec::default),
                ..McConfig::default()
            };
            cfg.validate().map_err(|e| anyhow!(e))?;
            let mut w = CsvWriter::new(open_output(&cli.out)?);
            w.header(&[
                "command: mc".to_string(),
                format!("channel: {}", ch.label()),
                format!("modulation: {}", model.name()),
                format!(
                    "seed: {} draws: {} batches: {} importance: {} crn: {}",
                    cfg.seed, cfg.draws, cfg.batches, importance, crn
                ),
            ])?;
            for (db, r) in mc_curve(&model, &ch, &grid, &cfg) {
                w.row(db, r.estimate, "montecarlo", Some(r.ci_halfwidth))?;
            }
            Ok(())
        }
        Command::Figure { n, with_mc } => {
            let opts = figures::FigureOptions {
                with_mc,
                seed: cli.seed,
                draws: cli.draws,
            };
            let series = figures::generate_figure(n, &opts)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
            for s in &series {
                let path = dir.join(format!("fig{n}_{}.csv", s.label));
                let mut w = CsvWriter::new(Box::new(File::create(&path)?) as Box<dyn Write>);
                w.header(&s.header)?;
                for row in &s.rows {
                    w.row(row.snr_db, row.value, row.method, row.ci_halfwidth)?;
                }
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Exponent { ref channel } => {
            let ch = ChannelModel::from_spec(channel).map_err(|e| anyhow!(e))?;
            let mut out = open_output(&cli.out)?;
            let rep =
                exponent_from_cdf(|z| ch.cdf(z), (1e-8, 1e-5)).map_err(|e| anyhow!(e))?;
            writeln!(out, "channel: {}", ch.label())?;
            writeln!(out, "declared d: {}", ch.variation_exponent())?;
            match rep.verdict {
                ExponentVerdict::Finite { d_hat, stderr } => {
                    writeln!(
                        out,
                        "estimated d: {d_hat:.4} +- {stderr:.4} (method {}, window [{:.1e}, {:.1e}])",
                        rep.method, rep.window.0, rep.window.1
                    )?;
                    if let Some(r) = rep.ratio_estimate {
                        writeln!(out, "ratio-limit estimate (tau=2): {r:.4}")?;
                    }
                    let tb = tauberian_check(&ch).map_err(|e| anyhow!(e))?;
                    writeln!(
                        out,
                        "tauberian check: {} (cdf-side vs transform-side {:.4}, tolerance {})",
                        if tb.pass { "pass" } else { "FAIL" },
                        tb.transform_side,
                        tb.tolerance
                    )?;
                    if let Some(r) = tb.sharp_ratio {
                        writeln!(out, "sharp ratio L(s)/(Gamma(d+1) F(1/s)) at s=1e6: {r:.4}")?;
                    }
                }
                ExponentVerdict::RapidlyVarying { drift } => {
                    writeln!(
                        out,
                        "rapidly varying (d=inf): windowed slope drifted by {drift:.2}"
                    )?;
                }
            }
            Ok(())
        }
        Command::Offset {
            ref channel,
            ref mod1,
            ref mod2,
        } => {
            let ch: Arc<ChannelModel> =
                Arc::new(ChannelModel::from_spec(channel).map_err(|e| anyhow!(e))?);
            let m1: ErrorRateModel = mod1.parse().map_err(|e| anyhow!("{e}"))?;
            let m2: ErrorRateModel = mod2.parse().map_err(|e| anyhow!("{e}"))?;
            let e1 = asymptote(&m1, ch.clone()).map_err(|e| anyhow!(e))?;
            let e2 = asymptote(&m2, ch.clone()).map_err(|e| anyhow!(e))?;
            let off = snr_offset_db(&e1, &e2).map_err(|e| anyhow!(e))?;
            let mut out = open_output(&cli.out)?;
            writeln!(out, "channel: {}", ch.label())?;
            writeln!(out, "offset ({} vs {}): {off:.4} dB", m1.name(), m2.name())?;

            // empirical check: crossing gap of the exact curves at 1e-6
            let target = 1e-6;
            let gap = empirical_offset(&m1, &m2, &ch, target)?;
            writeln!(out, "empirical crossing gap at {target:.0e}: {gap:.4} dB")?;
            Ok(())
        }
        Command::Combine {
            ref scheme,
            ref branches,
            ref modulation,
            ref snr,
            with_mc,
            batches,
        } => {
            let scheme: Scheme = scheme.parse().map_err(|e| anyhow!("{e}"))?;
            let branch_models = parse_branch_list(branches)?;
            let model: ErrorRateModel = modulation.parse().map_err(|e| anyhow!("{e}"))?;
            let grid = parse_snr_grid(snr)?;
            let cc = Arc::new(combine(scheme, branch_models).map_err(|e| anyhow!(e))?);
            let est = combined_asymptote(&model, cc.clone()).map_err(|e| anyhow!(e))?;
            let mut w = CsvWriter::new(open_output(&cli.out)?);
            let mut hdr = vec![
                "command: combine".to_string(),
                format!("scheme: {} d_c={}", cc.scheme(), cc.combined_exponent()),
                format!("channel: {}", cc.label()),
                format!("modulation: {}", model.name()),
            ];
            hdr.extend(estimate_header(&est));
            if with_mc {
                hdr.push(format!("seed: {} draws: {}", cli.seed, cli.draws));
            }
            w.header(&hdr)?;
            for &db in &grid {
                w.row(db, est.evaluate(db_to_linear(db)), "asymptote", None)?;
            }
            if with_mc {
                let cfg = McConfig {
                    seed: cli.seed,
                    draws: cli.draws,
                    batches,
                    importance: Some(ImportanceSpec::default()),
                    ..McConfig::default()
                };
                for &db in &grid {
                    let r = crate::combining::combined_exact_average(
                        &model,
                        &cc,
                        db_to_linear(db),
                        &cfg,
                    );
                    w.row(db, r.estimate, "montecarlo", Some(r.ci_halfwidth))?;
                }
            }
            Ok(())
        }
        Command::Tauberian { ref channel } => {
            let ch = ChannelModel::from_spec(channel).map_err(|e| anyhow!(e))?;
            let mut out = open_output(&cli.out)?;
            if ch.variation_exponent().is_infinite() {
                writeln!(out, "channel: {}", ch.label())?;
                writeln!(out, "rapidly varying (d=inf); transform check not applicable")?;
                return Ok(());
            }
            let rep = tauberian_check(&ch).map_err(|e| anyhow!(e))?;
            writeln!(out, "channel: {}", rep.channel)?;
            let cdf_d = rep
                .cdf_side
                .d_hat()
                .map(|d| format!("{d:.4}"))
                .unwrap_or_else(|| "inf".into());
            writeln!(out, "cdf-side exponent: {cdf_d}")?;
            writeln!(out, "transform-side exponent: {:.4}", rep.transform_side)?;
            writeln!(out, "tolerance: {}", rep.tolerance)?;
            if let Some(r) = rep.sharp_ratio {
                writeln!(out, "sharp ratio at s=1e6: {r:.4}")?;
            } else {
                writeln!(out, "sharp ratio: skipped (l divergent)")?;
            }
            writeln!(out, "verdict: {}", if rep.pass { "pass" } else { "FAIL" })?;
            if !rep.pass {
                bail!("tauberian consistency check failed for {}", rep.channel);
            }
            Ok(())
        }
    }
}

/// Horizontal gap between the exact curves of two modulations at `target`.
fn empirical_offset(
    m1: &ErrorRateModel,
    m2: &ErrorRateModel,
    ch: &ChannelModel,
    target: f64,
) -> Result<f64> {
    // search upward in SNR until both curves cross the target
    let mut curve1 = Vec::new();
    let mut curve2 = Vec::new();
    let mut db = 0.0;
    while db <= 120.0 {
        let rho = db_to_linear(db);
        curve1.push((db, exact_average(m1, ch, rho).map_err(|e| anyhow!(e))?));
        curve2.push((db, exact_average(m2, ch, rho).map_err(|e| anyhow!(e))?));
        if curve1.last().unwrap().1 < target && curve2.last().unwrap().1 < target {
            break;
        }
        db += 0.5;
    }
    let c1 = crossing_snr(&curve1, target).map_err(|e| anyhow!(e))?;
    let c2 = crossing_snr(&curve2, target).map_err(|e| anyhow!(e))?;
    Ok(c1 - c2)
}
