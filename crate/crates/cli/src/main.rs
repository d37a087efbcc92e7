//! lumpvol: command-line laboratory for moduli-space volumes of rational
//! maps and abelian vortices on the sphere.
//!
//! Exit codes: 0 success, 2 usage or constraint violation, 3 numerical
//! failure.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use lumpvol_core::formula::{
    baptista_volume, baptista_volume_exact, dim_hol, main_volume, rational_display, strata_dim,
    FormulaInput,
};
use lumpvol_core::metric::{l2_metric_matrix, volume_density};
use lumpvol_core::poly::PolyTuple;
use lumpvol_core::sphere::SphereGrid;
use lumpvol_core::volume::{calibrate_cpq, mc_volume_l2, mc_volume_vortex, sample_parameter,
    tuple_from_sample};
use lumpvol_core::vortex::{
    approx_solution, convergence_sweep, kw_solve, norm_function, vortex_metric, VortexConfig,
};

#[derive(Parser)]
#[command(name = "lumpvol", version, about = "moduli-space volume laboratory")]
struct Cli {
    /// Worker threads (default: LUMPVOL_THREADS or all cores); changes wall
    /// time only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact closed-form volumes and dimensions.
    Formula(FormulaArgs),
    /// Solve the gauge equation at one moduli point.
    KwSolve(KwArgs),
    /// Limiting L2 metric matrix at one moduli point.
    Metric(MapArgs),
    /// Finite-coupling vortex metric with X/Y/Z breakdown.
    VortexMetric(KwArgs),
    /// Coupling sweep: metric and gauge convergence indicators (CSV).
    Converge(ConvergeArgs),
    /// Monte Carlo volume of the moduli space (L2, or finite-s with --s2).
    McVolume(McArgs),
    /// Calibration anchor: recovers pi^q/q! through the full pipeline.
    Calibrate(CalArgs),
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long)]
    b: i64,
    #[arg(long)]
    r: i64,
    #[arg(long)]
    k: i64,
    /// Coupling squared; accepts pi literals like "16pi" or "33/2pi".
    #[arg(long)]
    s2: Option<String>,
    /// Surface volume (default 1).
    #[arg(long, default_value = "1")]
    vol_sigma: f64,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long, default_value_t = 1)]
    r: i64,
    #[arg(long, default_value_t = 1)]
    k: i64,
    /// Band limit of the quadrature grid.
    #[arg(long, default_value_t = 24)]
    l: i64,
    /// Path to a PolyTuple JSON file; defaults to the standard map.
    #[arg(long)]
    map: Option<String>,
    /// Draw the map uniformly at random with this seed instead.
    #[arg(long)]
    map_seed: Option<u64>,
}

#[derive(Args)]
struct KwArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Coupling squared ("32pi" or a number).
    #[arg(long, default_value = "32pi")]
    s2: String,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Comma-separated list of couplings; default 8pi,16pi,...,512pi times r.
    #[arg(long)]
    s2_list: Option<String>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 1)]
    r: i64,
    #[arg(long, default_value_t = 1)]
    k: i64,
    /// Finite coupling; omit for the limiting L2 volume.
    #[arg(long)]
    s2: Option<String>,
    #[arg(long, default_value_t = 24)]
    l: i64,
    #[arg(long, default_value_t = 4000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CalArgs {
    #[arg(long)]
    q: i64,
    #[arg(long, default_value_t = 4000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// "16pi", "33/2pi", or a plain decimal.
fn parse_s2(text: &str) -> Result<(f64, Option<BigRational>), String> {
    let t = text.trim();
    if let Some(stripped) = t.strip_suffix("pi") {
        let stripped = stripped.trim();
        let ratio = if stripped.is_empty() {
            BigRational::from_integer(BigInt::from(1))
        } else if let Some((num, den)) = stripped.split_once('/') {
            let n: i64 = num.parse().map_err(|_| format!("bad pi multiple: {t}"))?;
            let d: i64 = den.parse().map_err(|_| format!("bad pi multiple: {t}"))?;
            if d == 0 {
                return Err("zero denominator".into());
            }
            BigRational::new(BigInt::from(n), BigInt::from(d))
        } else {
            let n: i64 = stripped.parse().map_err(|_| format!("bad pi multiple: {t}"))?;
            BigRational::from_integer(BigInt::from(n))
        };
        let value = ratio.to_f64().ok_or("unrepresentable pi multiple")? * PI;
        Ok((value, Some(ratio)))
    } else {
        let value: f64 = t.parse().map_err(|_| format!("bad coupling: {t}"))?;
        Ok((value, None))
    }
}

fn load_map(args: &MapArgs) -> Result<PolyTuple, String> {
    if args.r < 1 || args.k < 1 {
        return Err("need r >= 1 and k >= 1".into());
    }
    let (r, k) = (args.r as usize, args.k as usize);
    if let Some(path) = &args.map {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
        let p: PolyTuple =
            serde_json::from_str(&text).map_err(|e| format!("bad map JSON: {e}"))?;
        if p.r != r || p.k != k {
            return Err(format!(
                "map file has (r, k) = ({}, {}), expected ({r}, {k})",
                p.r, p.k
            ));
        }
        Ok(p)
    } else if let Some(seed) = args.map_seed {
        let q = (k + 1) * (r + 1) - 1;
        let pt = sample_parameter(q, seed, 0);
        tuple_from_sample(r, k, &pt).map_err(|e| e.to_string())
    } else {
        Ok(PolyTuple::standard(k, r))
    }
}

fn emit(out: &Option<String>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| format!("cannot write {path}: {e}")),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .map_err(|e| e.to_string())
        }
    }
}

#[derive(Serialize)]
struct FormulaReport {
    config: serde_json::Value,
    q: usize,
    dim: i64,
    strata_dims: Vec<i64>,
    main_volume_exact: String,
    main_volume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite_s_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite_s: Option<f64>,
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("LUMPVOL_THREADS").ok().and_then(|v| v.parse().ok()));
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t.max(1));
        }
        builder.build().map_err(|e| (3, e.to_string()))?
    };

    let out = cli.out.clone();
    pool.install(|| dispatch(&cli.command, &out))
}

fn usage_err(msg: String) -> (u8, String) {
    (2, msg)
}

fn num_err(e: lumpvol_core::Error) -> (u8, String) {
    match e {
        lumpvol_core::Error::InvalidGenusDegree(_)
        | lumpvol_core::Error::NegativeBandLimit(_)
        | lumpvol_core::Error::InvalidInput(_)
        | lumpvol_core::Error::InvalidIndex(_) => (2, e.to_string()),
        other => (3, format!("{{\"error\":\"{other}\"}}")),
    }
}

fn dispatch(cmd: &Command, out: &Option<String>) -> Result<(), (u8, String)> {
    match cmd {
        Command::Formula(a) => {
            if a.b < 0 {
                return Err(usage_err("genus must be nonnegative".into()));
            }
            if a.r < 0 || a.k < 1 {
                return Err(usage_err("need r >= 1 and k >= 1".into()));
            }
            let inp = FormulaInput::new(a.b as usize, a.r as usize, a.k as usize)
                .map_err(num_err)?;
            let main = main_volume(&inp).map_err(num_err)?;
            let mut report = FormulaReport {
                config: serde_json::json!({
                    "b": a.b, "r": a.r, "k": a.k, "s2": a.s2, "vol_sigma": a.vol_sigma
                }),
                q: inp.q,
                dim: dim_hol(&inp),
                strata_dims: (0..=inp.r)
                    .map(|l| strata_dim(&inp, l).unwrap())
                    .collect(),
                main_volume_exact: rational_display(&main),
                main_volume: main.to_f64().unwrap_or(f64::NAN),
                finite_s_exact: None,
                finite_s: None,
            };
            if let Some(s2text) = &a.s2 {
                let (s2, ratio) = parse_s2(s2text).map_err(usage_err)?;
                let inp_s = FormulaInput::new(a.b as usize, a.r as usize, a.k as usize)
                    .map_err(num_err)?
                    .with_s2(s2)
                    .with_vol_sigma(a.vol_sigma);
                report.finite_s = Some(baptista_volume(&inp_s).map_err(num_err)?);
                if let Some(ratio) = ratio {
                    if let Ok(vol_rat) = approx_rational(a.vol_sigma) {
                        let exact = baptista_volume_exact(&inp_s, &ratio, &vol_rat)
                            .map_err(num_err)?;
                        report.finite_s_exact = Some(rational_display(&exact));
                    }
                }
            }
            if a.format == "text" {
                let mut text = format!(
                    "q = {}, dim = {}\nmain volume = {} = {}\n",
                    report.q, report.dim, report.main_volume_exact, report.main_volume
                );
                if let Some(fs_exact) = &report.finite_s_exact {
                    text += &format!(
                        "finite-s volume = {} = {}\n",
                        fs_exact,
                        report.finite_s.unwrap()
                    );
                } else if let Some(v) = report.finite_s {
                    text += &format!("finite-s volume = {v}\n");
                }
                emit(out, text.trim_end()).map_err(usage_err)
            } else {
                emit(out, &serde_json::to_string_pretty(&report).unwrap()).map_err(usage_err)
            }
        }
        Command::KwSolve(a) => {
            let p = load_map(&a.map).map_err(usage_err)?;
            let (s2, _) = parse_s2(&a.s2).map_err(usage_err)?;
            let grid = SphereGrid::try_new(a.map.l).map_err(num_err)?;
            let cfg = VortexConfig::new(p.r, p.k, s2).map_err(num_err)?;
            let chart = lumpvol_core::poly::Chart::largest_modulus(&p);
            let tuple = p.normalized_at(chart.fixed).map_err(num_err)?;
            let h = norm_function(&tuple, &grid).map_err(num_err)?;
            let (v, e) = approx_solution(&h, &cfg).map_err(num_err)?;
            let sol = kw_solve(&h, &cfg, 1e-10).map_err(num_err)?;
            let phi_inf_gap = {
                let phi_inf = h.map(|x| num_complex::Complex64::new((cfg.c2 / -x.re).ln(), 0.0));
                (&sol.phi - &phi_inf).sup_abs()
            };
            let report = serde_json::json!({
                "config": { "r": p.r, "k": p.k, "s2": s2, "grid_L": grid.band_limit(),
                             "chart": chart.fixed },
                "residual_sup": sol.residual_sup,
                "iterations": sol.iterations,
                "phi_range": [sol.phi.min_re(), sol.phi.max_re()],
                "sup_phi_minus_v": (&sol.phi - &v).sup_abs(),
                "sup_phi_minus_infinity_gauge": phi_inf_gap,
                "sup_error_term": e.sup_abs(),
            });
            emit(out, &serde_json::to_string_pretty(&report).unwrap()).map_err(usage_err)
        }
        Command::Metric(a) => {
            let p = load_map(a).map_err(usage_err)?;
            let grid = SphereGrid::try_new(a.l).map_err(num_err)?;
            let g = l2_metric_matrix(&p, &grid).map_err(num_err)?;
            let det = volume_density(&g).map_err(num_err)?;
            let report = serde_json::json!({
                "config": { "r": p.r, "k": p.k, "grid_L": grid.band_limit() },
                "metric": g,
                "volume_density": det,
            });
            emit(out, &serde_json::to_string_pretty(&report).unwrap()).map_err(usage_err)
        }
        Command::VortexMetric(a) => {
            let p = load_map(&a.map).map_err(usage_err)?;
            let (s2, _) = parse_s2(&a.s2).map_err(usage_err)?;
            let grid = SphereGrid::try_new(a.map.l).map_err(num_err)?;
            let cfg = VortexConfig::new(p.r, p.k, s2).map_err(num_err)?;
            let rep = vortex_metric(&p, &cfg, &grid).map_err(num_err)?;
            let det = volume_density(&rep.g).map_err(num_err)?;
            let report = serde_json::json!({
                "report": rep,
                "volume_density": det,
            });
            emit(out, &serde_json::to_string_pretty(&report).unwrap()).map_err(usage_err)
        }
        Command::Converge(a) => {
            let p = load_map(&a.map).map_err(usage_err)?;
            let grid = SphereGrid::try_new(a.map.l).map_err(num_err)?;
            let s2_list: Vec<f64> = match &a.s2_list {
                Some(text) => text
                    .split(',')
                    .map(|t| parse_s2(t).map(|x| x.0))
                    .collect::<Result<_, _>>()
                    .map_err(usage_err)?,
                None => (0..7)
                    .map(|j| 8.0 * PI * 2.0f64.powi(j) * p.r as f64)
                    .collect(),
            };
            let sweep = convergence_sweep(&p, &s2_list, &grid).map_err(num_err)?;
            if a.format == "json" {
                emit(out, &serde_json::to_string_pretty(&sweep).unwrap()).map_err(usage_err)
            } else {
                let mut csv = String::from("s2,g_diff,phi_v_diff,phi_inf_diff,slope\n");
                for (i, row) in sweep.rows.iter().enumerate() {
                    let slope = if i == 0 {
                        String::new()
                    } else {
                        let prev = &sweep.rows[i - 1];
                        if row.phi_inf_diff > 1e-13 && prev.phi_inf_diff > 1e-13 {
                            format!(
                                "{:.6}",
                                (row.phi_inf_diff.ln() - prev.phi_inf_diff.ln())
                                    / (row.s2.sqrt().ln() - prev.s2.sqrt().ln())
                            )
                        } else {
                            String::new()
                        }
                    };
                    csv += &format!(
                        "{},{:.12e},{:.12e},{:.12e},{}\n",
                        row.s2, row.g_diff, row.phi_v_diff, row.phi_inf_diff, slope
                    );
                }
                emit(out, csv.trim_end()).map_err(usage_err)
            }
        }
        Command::McVolume(a) => {
            if a.r < 1 || a.k < 1 {
                return Err(usage_err("need r >= 1 and k >= 1".into()));
            }
            if a.l < 0 {
                return Err(usage_err("band limit must be nonnegative".into()));
            }
            let est = match &a.s2 {
                Some(s2text) => {
                    let (s2, _) = parse_s2(s2text).map_err(usage_err)?;
                    mc_volume_vortex(a.r as usize, a.k as usize, s2, a.n, a.seed, a.l as usize)
                        .map_err(num_err)?
                }
                None => mc_volume_l2(a.r as usize, a.k as usize, a.n, a.seed, a.l as usize)
                    .map_err(num_err)?,
            };
            emit(out, &serde_json::to_string(&est).unwrap()).map_err(usage_err)
        }
        Command::Calibrate(a) => {
            if a.q < 1 {
                return Err(usage_err("need q >= 1".into()));
            }
            let est = calibrate_cpq(a.q as usize, a.n, a.seed).map_err(num_err)?;
            emit(out, &serde_json::to_string(&est).unwrap()).map_err(usage_err)
        }
    }
}

fn approx_rational(v: f64) -> Result<BigRational, ()> {
    // exact only for reasonably small rationals; used for vol_sigma
    for den in 1..=1000i64 {
        let num = (v * den as f64).round();
        if (num / den as f64 - v).abs() < 1e-12 {
            return Ok(BigRational::new(
                BigInt::from(num as i64),
                BigInt::from(den),
            ));
        }
    }
    Err(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
