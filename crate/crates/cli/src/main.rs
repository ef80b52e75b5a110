//! Command-line pipeline: generate → sample → reduce → compare → diagnose.
//!
//! Exit codes: 0 success, 2 validation error (flags, files, shapes),
//! 3 numerical infeasibility (solver or data feasibility failures).

use clap::{Args, Parser, Subcommand};
use loewner_bt::balance::{auto_order, balance_reduce};
use loewner_bt::data::{conjugate_close, validate_for_variant, SampleSet};
use loewner_bt::grid::{log_spaced, InterpolationGrid};
use loewner_bt::loewner::build_loewner;
use loewner_bt::metrics::{
    frequency_response_csv, hankel_like_values, relative_hinf_error, ComparisonReport, GridSpec,
};
use loewner_bt::model::{generate_model, sample_transfer, ModelKind, StateSpaceModel};
use loewner_bt::oracle::{hankel_values, intrusive_reduce, variant_gramians};
use loewner_bt::theory::{prop2_bounds, xp_closed_form, xz_solution};
use loewner_bt::weights::{variant_factors, Variant, VariantConfig};
use loewner_bt::{Error, Result};
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "loewner-bt",
    about = "Data-driven balanced truncation family in the Loewner framework",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark model.
    GenModel(GenModelArgs),
    /// Sample the transfer function of a stored model.
    Sample(SampleArgs),
    /// Build a reduced model from samples (non-intrusive).
    Reduce(ReduceArgs),
    /// Print the non-intrusive singular values (and the intrusive ones when
    /// a model is supplied).
    Hsv(HsvArgs),
    /// Compare the non-intrusive pipeline against the intrusive oracle over
    /// a range of orders and write a CSV report.
    Compare(CompareArgs),
    /// Diagonal-dominance and bound diagnostics for the sampled grid.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct GenModelArgs {
    /// Model family: rlc | modal
    #[arg(long)]
    kind: String,
    /// State dimension (must be even; sections/modes = order/2).
    #[arg(long)]
    order: usize,
    /// Plant an anti-resonance at this frequency (modal only), rad/s.
    #[arg(long)]
    dip: Option<f64>,
    /// Additive feedthrough offset D.
    #[arg(long, default_value_t = 0.0)]
    d_offset: f64,
    /// RLC series resistance.
    #[arg(long, default_value_t = 0.1)]
    r: f64,
    /// RLC series inductance.
    #[arg(long, default_value_t = 0.1)]
    lind: f64,
    /// RLC shunt capacitance.
    #[arg(long, default_value_t = 0.1)]
    cap: f64,
    /// RLC load resistance.
    #[arg(long, default_value_t = 1.0)]
    rload: f64,
    /// Modal band lower edge, rad/s.
    #[arg(long, default_value_t = 0.1)]
    freq_lo: f64,
    /// Modal band upper edge, rad/s.
    #[arg(long, default_value_t = 1000.0)]
    freq_hi: f64,
    /// Modal damping ratio in (0,1).
    #[arg(long, default_value_t = 0.05)]
    zeta: f64,
    /// Seed for the modal residue draw.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Frequency grid spec log:A:B:K (10^A..10^B rad/s, K points).
    #[arg(long, default_value = "log:-1:3:50")]
    freqs: String,
    /// Close the grid under conjugation (default on).
    #[arg(long, conflicts_with = "one_sided")]
    two_sided: bool,
    /// Keep only the positive frequencies.
    #[arg(long)]
    one_sided: bool,
    /// Record derivative samples H'(jω) (default on; required by BST and
    /// Hermite Loewner entries).
    #[arg(long, conflicts_with = "no_derivatives")]
    derivatives: bool,
    /// Skip derivative sampling.
    #[arg(long)]
    no_derivatives: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct VariantArgs {
    /// bt | flbt | tlbt | swbt | lqg | hinf | prbt | brbt | bst
    #[arg(long)]
    variant: String,
    /// Damping offset ε of the prescribed poles.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// FLBT band W1,W2 in rad/s.
    #[arg(long)]
    band: Option<String>,
    /// TLBT window T1,T2 in seconds (T2 may be inf).
    #[arg(long)]
    window: Option<String>,
    /// H∞BT parameter γ.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    samples: PathBuf,
    #[command(flatten)]
    variant: VariantArgs,
    /// Reduction order, or "auto".
    #[arg(long, default_value = "auto")]
    order: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HsvArgs {
    #[arg(long)]
    samples: PathBuf,
    #[command(flatten)]
    variant: VariantArgs,
    /// Optional model file; prints the intrusive spectrum alongside.
    #[arg(long)]
    model: Option<PathBuf>,
    /// How many values to print.
    #[arg(long, default_value_t = 25)]
    count: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    #[command(flatten)]
    variant: VariantArgs,
    /// Order list: "lo:hi" or comma-separated.
    #[arg(long, default_value = "1:25")]
    orders: String,
    /// H∞ estimator grid points.
    #[arg(long, default_value_t = 2000)]
    grid_points: usize,
    #[arg(long)]
    out: PathBuf,
    /// Optional frequency-response CSV (ω, |H|, |H̃|) for the largest order.
    #[arg(long)]
    response_out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
}

fn parse_variant(v: &VariantArgs) -> Result<VariantConfig> {
    let pair = |spec: &str, what: &str| -> Result<(f64, f64)> {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Config(format!("--{what} expects two comma-separated values")));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| {
            Error::Config(format!("--{what}: cannot parse '{}'", parts[0]))
        })?;
        let b: f64 = if parts[1].trim() == "inf" {
            f64::INFINITY
        } else {
            parts[1].trim().parse().map_err(|_| {
                Error::Config(format!("--{what}: cannot parse '{}'", parts[1]))
            })?
        };
        Ok((a, b))
    };
    let variant = match v.variant.to_lowercase().as_str() {
        "bt" => Variant::Bt,
        "flbt" => {
            let (w1, w2) = pair(
                v.band.as_deref().ok_or(Error::Config(
                    "flbt requires --band W1,W2".into(),
                ))?,
                "band",
            )?;
            Variant::Flbt { w1, w2 }
        }
        "tlbt" => {
            let (t1, t2) = pair(
                v.window.as_deref().ok_or(Error::Config(
                    "tlbt requires --window T1,T2".into(),
                ))?,
                "window",
            )?;
            Variant::Tlbt { t1, t2 }
        }
        "swbt" => Variant::Swbt,
        "lqg" | "lqgbt" => Variant::Lqgbt,
        "hinf" | "hinfbt" => Variant::HinfBt {
            gamma: v
                .gamma
                .ok_or(Error::Config("hinf requires --gamma G".into()))?,
        },
        "prbt" => Variant::Prbt,
        "brbt" => Variant::Brbt,
        "bst" => Variant::Bst,
        other => {
            return Err(Error::Config(format!(
                "unknown variant '{other}' (expected bt|flbt|tlbt|swbt|lqg|hinf|prbt|brbt|bst)"
            )))
        }
    };
    let cfg = VariantConfig::new(variant, v.eps);
    cfg.validate()?;
    Ok(cfg)
}

fn parse_freq_spec(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 || parts[0] != "log" {
        return Err(Error::Config(format!(
            "--freqs expects log:A:B:K, got '{spec}'"
        )));
    }
    let lo: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("bad exponent '{}'", parts[1])))?;
    let hi: f64 = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("bad exponent '{}'", parts[2])))?;
    let k: usize = parts[3]
        .parse()
        .map_err(|_| Error::Config(format!("bad count '{}'", parts[3])))?;
    if k == 0 || hi <= lo {
        return Err(Error::Config("freq spec needs K >= 1 and B > A".into()));
    }
    Ok(log_spaced(lo, hi, k))
}

fn parse_orders(spec: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = spec.split_once(':') {
        let lo: usize = lo
            .parse()
            .map_err(|_| Error::Config(format!("bad order '{lo}'")))?;
        let hi: usize = hi
            .parse()
            .map_err(|_| Error::Config(format!("bad order '{hi}'")))?;
        if lo == 0 || hi < lo {
            return Err(Error::Config("orders lo:hi needs 1 <= lo <= hi".into()));
        }
        Ok((lo..=hi).collect())
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad order '{s}'")))
            })
            .collect()
    }
}

fn load_samples(path: &PathBuf) -> Result<SampleSet> {
    SampleSet::from_json(&fs::read_to_string(path)?)
}

fn load_model(path: &PathBuf) -> Result<StateSpaceModel> {
    StateSpaceModel::from_json(&fs::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenModel(args) => {
            if args.order == 0 || args.order % 2 != 0 {
                return Err(Error::Config(format!(
                    "--order must be a positive even number, got {}",
                    args.order
                )));
            }
            let kind = match args.kind.as_str() {
                "rlc" => {
                    if args.dip.is_some() {
                        return Err(Error::Config("--dip is only meaningful for modal".into()));
                    }
                    ModelKind::RlcLadder {
                        sections: args.order / 2,
                        r: args.r,
                        lind: args.lind,
                        cap: args.cap,
                        rload: args.rload,
                        d_offset: args.d_offset,
                    }
                }
                "modal" => ModelKind::Modal {
                    num_modes: args.order / 2,
                    freq_lo: args.freq_lo,
                    freq_hi: args.freq_hi,
                    damping_ratio: args.zeta,
                    seed: args.seed,
                    zero_dip_at: args.dip,
                    d_offset: args.d_offset,
                },
                other => {
                    return Err(Error::Config(format!(
                        "unknown kind '{other}' (expected rlc|modal)"
                    )))
                }
            };
            let model = generate_model(&kind)?;
            fs::write(&args.out, model.to_json()?)?;
            println!(
                "wrote {} (order {}, spectral abscissa {:.3e})",
                args.out.display(),
                model.order(),
                model.spectral_abscissa()?
            );
        }
        Command::Sample(args) => {
            let model = load_model(&args.model)?;
            let freqs = parse_freq_spec(&args.freqs)?;
            let with_derivs = !args.no_derivatives;
            let raw = sample_transfer(&model, &freqs, with_derivs)?;
            // two-sided is the default; --two-sided only makes it explicit
            let two_sided = args.two_sided || !args.one_sided;
            let set = if two_sided { conjugate_close(&raw)? } else { raw };
            fs::write(&args.out, set.to_json()?)?;
            println!(
                "wrote {} ({} frequencies, two-sided: {}, derivatives: {})",
                args.out.display(),
                set.freqs.len(),
                two_sided,
                with_derivs
            );
        }
        Command::Reduce(args) => {
            let cfg = parse_variant(&args.variant)?;
            let set = load_samples(&args.samples)?;
            let diag = validate_for_variant(&set, &cfg);
            if !diag.pass {
                return Err(Error::Infeasible {
                    variant: cfg.variant.to_string(),
                    detail: diag.reasons.join("; "),
                });
            }
            let quad = build_loewner(&set)?;
            let factors = variant_factors(&set, &cfg)?;
            let sigma = hankel_like_values(&quad, &factors)?;
            let r = if args.order == "auto" {
                auto_order(&sigma, quad.n_s(), quad.n_u())
            } else {
                args.order
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad --order '{}'", args.order)))?
            };
            let rom = balance_reduce(&quad, &factors, r)?;
            let unstable = rom.unstable_poles()?;
            fs::write(&args.out, rom.to_json()?)?;
            println!("wrote {} (order {})", args.out.display(), rom.order());
            if !unstable.is_empty() {
                println!(
                    "note: {} pole(s) with nonnegative real part: {:?}",
                    unstable.len(),
                    unstable
                );
            }
        }
        Command::Hsv(args) => {
            let cfg = parse_variant(&args.variant)?;
            let set = load_samples(&args.samples)?;
            let quad = build_loewner(&set)?;
            let factors = variant_factors(&set, &cfg)?;
            let sv = hankel_like_values(&quad, &factors)?;
            let k = args.count.min(sv.len());
            match args.model {
                Some(path) => {
                    let model = load_model(&path)?;
                    let pair = variant_gramians(&model, &cfg)?;
                    let hv = hankel_values(&pair)?;
                    println!("i,sigma_data,sigma_true");
                    for i in 0..k.min(hv.len()) {
                        println!("{},{:.9e},{:.9e}", i + 1, sv[i], hv[i]);
                    }
                }
                None => {
                    println!("i,sigma_data");
                    for (i, s) in sv.iter().take(k).enumerate() {
                        println!("{},{:.9e}", i + 1, s);
                    }
                }
            }
        }
        Command::Compare(args) => {
            let cfg = parse_variant(&args.variant)?;
            let set = load_samples(&args.samples)?;
            let model = load_model(&args.model)?;
            let orders = parse_orders(&args.orders)?;
            let report = run_compare(&model, &set, &cfg, &orders, args.grid_points)?;
            fs::write(&args.out, report.to_csv())?;
            println!("wrote {}", args.out.display());
            print_policy_summary(&report);
            if let Some(resp) = args.response_out {
                let rmax = *orders.iter().max().unwrap();
                let quad = build_loewner(&set)?;
                let factors = variant_factors(&set, &cfg)?;
                let rom = balance_reduce(&quad, &factors, rmax)?;
                let band = sampled_band(&set);
                let csv = frequency_response_csv(
                    &|w| model.eval(w),
                    &rom,
                    (band.0 * 1e-2, band.1 * 1e2),
                    2000,
                )?;
                fs::write(&resp, csv)?;
                println!("wrote {}", resp.display());
            }
        }
        Command::Diagnose(args) => {
            let set = load_samples(&args.samples)?;
            let grid = InterpolationGrid::matched(set.freqs.clone(), args.eps)?;
            let bounds = prop2_bounds(&grid)?;
            let xp = xp_closed_form(&grid, set.num_inputs())?;
            let mut out = serde_json::json!({
                "eps": args.eps,
                "delta_min": grid.delta_min(),
                "prop2": bounds,
                "xp_condition": xp.condition()?,
            });
            // zero-placement margins need a square system with invertible D
            if set.num_inputs() == set.num_outputs() {
                let d = loewner_bt::la::to_complex(&set.static_gain);
                if let Ok(dinv) = loewner_bt::la::inv(&d) {
                    if let Ok((_, dom)) = xz_solution(&grid, &set, &dinv) {
                        out["xz_row_dominance"] = serde_json::to_value(&dom)?;
                    }
                }
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

fn sampled_band(set: &SampleSet) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &w in &set.freqs {
        let a = w.abs();
        if a > 0.0 {
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    (lo, hi.max(lo))
}

fn run_compare(
    model: &StateSpaceModel,
    set: &SampleSet,
    cfg: &VariantConfig,
    orders: &[usize],
    grid_points: usize,
) -> Result<ComparisonReport> {
    let quad = build_loewner(set)?;
    let factors = variant_factors(set, cfg)?;
    let sv_data = hankel_like_values(&quad, &factors)?;
    let pair = variant_gramians(model, cfg)?;
    let sv_true = hankel_values(&pair)?;
    let band = sampled_band(set);
    let spec = GridSpec {
        points: grid_points,
        ..Default::default()
    };
    let reference = |w: f64| model.eval(w);
    let mut rel_err_data = Vec::with_capacity(orders.len());
    let mut rel_err_intrusive = Vec::with_capacity(orders.len());
    for &r in orders {
        let rom = balance_reduce(&quad, &factors, r)?;
        rel_err_data.push(relative_hinf_error(&reference, &rom, band, &spec)?);
        let (irom, _) = intrusive_reduce(model, cfg, r)?;
        rel_err_intrusive.push(relative_hinf_error(&reference, &irom, band, &spec)?);
    }
    Ok(ComparisonReport {
        variant: cfg.variant.to_string(),
        orders: orders.to_vec(),
        sv_data,
        sv_true,
        rel_err_data,
        rel_err_intrusive,
        grid: format!("band [{:.3e}, {:.3e}] x{}", band.0, band.1, grid_points),
    })
}

/// Tolerance policy lives in the environment, not in code constants:
/// LOEWNER_BT_TOP10_TOL (default 0.05), LOEWNER_BT_TOP20_TOL (0.10),
/// LOEWNER_BT_ERR_FACTOR (10).
fn print_policy_summary(report: &ComparisonReport) {
    let envf = |name: &str, default: f64| -> f64 {
        std::env::var(name)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    };
    let tol10 = envf("LOEWNER_BT_TOP10_TOL", 0.05);
    let tol20 = envf("LOEWNER_BT_TOP20_TOL", 0.10);
    let factor = envf("LOEWNER_BT_ERR_FACTOR", 10.0);
    let k = report.sv_data.len().min(report.sv_true.len());
    let dev = |count: usize| -> f64 {
        (0..count.min(k))
            .map(|i| (report.sv_data[i] / report.sv_true[i] - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let d10 = dev(10);
    let d20 = dev(20);
    println!(
        "sigma top-10 max dev {:.3e} (tol {:.2e}): {}",
        d10,
        tol10,
        if d10 <= tol10 { "PASS" } else { "FAIL" }
    );
    println!(
        "sigma top-20 max dev {:.3e} (tol {:.2e}): {}",
        d20,
        tol20,
        if d20 <= tol20 { "PASS" } else { "FAIL" }
    );
    let worst_ratio = report
        .rel_err_data
        .iter()
        .zip(&report.rel_err_intrusive)
        .map(|(d, i)| {
            let lo = d.min(*i).max(1e-300);
            d.max(*i) / lo
        })
        .fold(0.0f64, f64::max);
    println!(
        "error comparability worst factor {:.3e} (limit {:.1e}): {}",
        worst_ratio,
        factor,
        if worst_ratio <= factor { "PASS" } else { "FAIL" }
    );
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_validation() { 2 } else { 3 });
        }
    }
}
