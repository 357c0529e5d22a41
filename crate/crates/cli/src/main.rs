//! Command-line front end: ray tracing, landing points, itineraries,
//! classification, dimension experiments, and escape-time rendering.
//!
//! Every subcommand reads flags, optionally defaulted from a JSON config
//! file (`--config path`, schema `{"version": 1, "<flag-name>": value, ...}`
//! with flag names in snake_case).  Results go to stdout as JSON (CSV for
//! `trace-ray`, PPM for `render`) or to `--out`.  Exit codes: 0 success,
//! 1 domain error, 2 usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde_json::json;

use cosine_rays::address::{parse_address, ExternalAddress};
use cosine_rays::classify::{classify_point, Budget};
use cosine_rays::dimension::{
    escape_fraction, escaping_set_dimension, ray_family_dimension, Window,
};
use cosine_rays::map::{sinh_family_params, solve_fixed_value_family, MapParams};
use cosine_rays::partition::{
    build_partition, itinerary_of_address, itinerary_of_point, BaseRays, RayPolicy,
};
use cosine_rays::ray::{landing_point, trace_ray, TraceConfig};
use cosine_rays::render::{render_escape, Overlay, RenderJob};

#[derive(Parser)]
#[command(
    name = "cosine-rays",
    about = "Dynamic rays, symbolic dynamics and dimension experiments for maps a e^z + b e^-z",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Parser, Debug)]
struct CommonOpts {
    /// JSON config file supplying defaults for any flag (snake_case keys).
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    /// Built-in family: currently "sinh" (z -> kπ sinh z).
    #[arg(long)]
    family: Option<String>,
    /// Family index k.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i64>,
    /// Solve the fixed-value family member k instead of using --family.
    #[arg(long, action = ArgAction::SetTrue)]
    fixed_value_family: bool,
    /// JSON file with {"a": [re, im], "b": [re, im]}.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve map parameters and print them (with solver residual).
    FindParams {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Trace a dynamic ray and emit CSV samples.
    TraceRay {
        #[command(flatten)]
        common: CommonOpts,
        /// External address literal, e.g. "2L 1R (0R)*".
        #[arg(long)]
        address: Option<String>,
        /// Potential grid start:stop:count, e.g. 0.5:10:64.
        #[arg(long)]
        t: Option<String>,
    },
    /// Compute the landing point of a ray.
    Land {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        address: Option<String>,
    },
    /// Itinerary of a ray (--address) or of a point orbit (--point).
    Itinerary {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        address: Option<String>,
        /// Point "re,im".
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Number of entries.
        #[arg(long)]
        length: Option<usize>,
    },
    /// Classify a point: on a ray, landing point, precritical, or undecided.
    Classify {
        #[command(flatten)]
        common: CommonOpts,
        /// Point "re,im".
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Box-counting dimension of a ray family or of the escaping set.
    Boxdim {
        #[command(flatten)]
        common: CommonOpts,
        /// "rays" (periodic-tail family) or "escaping" (pixel grid).
        #[arg(long)]
        mode: Option<String>,
        /// Strip bound M for the ray family.
        #[arg(long)]
        strip_bound: Option<i64>,
        /// Maximum periodic-tail period.
        #[arg(long)]
        tail_depth: Option<usize>,
        /// Truncation potential for the ray family.
        #[arg(long)]
        t_floor: Option<f64>,
        /// Window "re_min,re_max,im_min,im_max".
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Pixel resolution (escaping mode).
        #[arg(long)]
        resolution: Option<usize>,
        /// Iteration budget (escaping mode).
        #[arg(long)]
        budget: Option<usize>,
        /// Number of dyadic scales.
        #[arg(long)]
        scales: Option<usize>,
    },
    /// Monte-Carlo escape fraction over a window.
    EscapeStats {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Escape-time render as binary PPM.
    Render {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        /// Repeatable: "partition", "postsingular", or "ray:<address>".
        #[arg(long)]
        overlay: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// Config-file defaults: flags win, then config values, then built-ins.
struct Cfg(Option<serde_json::Value>);

impl Cfg {
    fn load(path: &Option<PathBuf>) -> Result<Cfg, String> {
        let Some(path) = path else { return Ok(Cfg(None)) };
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("config is not JSON: {e}"))?;
        if let Some(v) = value.get("version") {
            if v != 1 {
                return Err(format!("unsupported config version {v} (expected 1)"));
            }
        }
        Ok(Cfg(Some(value)))
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        self.0
            .as_ref()
            .and_then(|v| v.get(key))
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }
}

fn resolve_params(common: &CommonOpts, cfg: &Cfg) -> Result<(MapParams, f64), String> {
    let family: Option<String> = common.family.clone().or_else(|| cfg.get("family"));
    let k: Option<i64> = common.k.or_else(|| cfg.get("k"));
    let fixed = common.fixed_value_family || cfg.get("fixed_value_family").unwrap_or(false);
    let params_file: Option<PathBuf> = common.params.clone().or_else(|| cfg.get("params"));
    if let Some(path) = params_file {
        let text = fs::read_to_string(&path)
            .map_err(|e| format!("cannot read params {}: {e}", path.display()))?;
        let p: MapParams =
            serde_json::from_str(&text).map_err(|e| format!("bad params file: {e}"))?;
        return Ok((p, 0.0));
    }
    if fixed {
        let k = k.ok_or("--fixed-value-family needs --k")?;
        let p = solve_fixed_value_family(k, None).map_err(|e| e.to_string())?;
        // report the defining equation's residual at the solved parameter
        let two_a = 2.0 * p.a;
        let res = (p.a * (1.0 - two_a.sin()) - Complex64::new(std::f64::consts::PI * k as f64, 0.0))
            .norm();
        return Ok((p, res));
    }
    match family.as_deref() {
        Some("sinh") | None => {
            let k = k.ok_or("--family sinh needs --k")?;
            if k < 1 {
                return Err("sinh family needs k >= 1".into());
            }
            Ok((sinh_family_params(k), 0.0))
        }
        Some(other) => Err(format!("unknown family {other:?} (built-in: sinh)")),
    }
}

fn parse_point(text: &str) -> Result<Complex64, String> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| format!("point must be \"re,im\", got {text:?}"))?;
    Ok(Complex64::new(
        re.trim().parse().map_err(|e| format!("bad re: {e}"))?,
        im.trim().parse().map_err(|e| format!("bad im: {e}"))?,
    ))
}

fn parse_window(text: &str) -> Result<Window, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad window: {e}"))?;
    if parts.len() != 4 {
        return Err("window must be \"re_min,re_max,im_min,im_max\"".into());
    }
    Ok(Window::new(parts[0], parts[1], parts[2], parts[3]))
}

fn parse_t_grid(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err("t grid must be start:stop:count".into());
    }
    Ok((
        parts[0].parse().map_err(|e| format!("bad t start: {e}"))?,
        parts[1].parse().map_err(|e| format!("bad t stop: {e}"))?,
        parts[2].parse().map_err(|e| format!("bad t count: {e}"))?,
    ))
}

fn parse_addr(text: &str) -> Result<ExternalAddress, String> {
    parse_address(text).map_err(|e| format!("bad address {text:?}: {e}"))
}

fn emit(common: &CommonOpts, bytes: &[u8]) -> Result<(), String> {
    match &common.out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| e.to_string())
        }
    }
}

fn emit_json(common: &CommonOpts, value: &serde_json::Value) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    emit(common, text.as_bytes())
}

fn run(command: Command) -> Result<(), String> {
    let cfg_default = TraceConfig::default();
    match command {
        Command::FindParams { common } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, residual) = resolve_params(&common, &cfg)?;
            let out = json!({
                "a": [p.a.re, p.a.im],
                "b": [p.b.re, p.b.im],
                "alpha": [p.alpha.re, p.alpha.im],
                "beta": [p.beta.re, p.beta.im],
                "v": [p.v.re, p.v.im],
                "v_prime": [p.v_prime.re, p.v_prime.im],
                "residual": residual,
            });
            emit_json(&common, &out)
        }
        Command::TraceRay { common, address, t } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, _) = resolve_params(&common, &cfg)?;
            let address: String = address
                .or_else(|| cfg.get("address"))
                .ok_or("trace-ray needs --address")?;
            let t: String = t.or_else(|| cfg.get("t")).unwrap_or("0.5:10:64".into());
            let s = parse_addr(&address)?;
            let (t0, t1, n) = parse_t_grid(&t)?;
            let path = trace_ray(&p, &s, t0, t1, n, &cfg_default).map_err(|e| e.to_string())?;
            emit(&common, path.to_csv().as_bytes())
        }
        Command::Land { common, address } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, _) = resolve_params(&common, &cfg)?;
            let address: String = address
                .or_else(|| cfg.get("address"))
                .ok_or("land needs --address")?;
            let s = parse_addr(&address)?;
            let l = landing_point(&p, &s, &cfg_default).map_err(|e| e.to_string())?;
            emit_json(
                &common,
                &json!({
                    "landing": [l.z.re, l.z.im],
                    "converged": l.converged,
                    "estimate_gap": l.estimate_gap,
                }),
            )
        }
        Command::Itinerary {
            common,
            address,
            point,
            length,
        } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, _) = resolve_params(&common, &cfg)?;
            let address: Option<String> = address.or_else(|| cfg.get("address"));
            let point: Option<String> = point.or_else(|| cfg.get("point"));
            let length = length.or_else(|| cfg.get("length")).unwrap_or(10);
            let part = build_partition(&p, &BaseRays::Policy(RayPolicy::Right), &cfg_default)
                .map_err(|e| e.to_string())?;
            let (labels, escaped_at) = match (&address, &point) {
                (Some(a), None) => {
                    let s = parse_addr(a)?;
                    let it = itinerary_of_address(&part, &p, &s, length, &cfg_default)
                        .map_err(|e| e.to_string())?;
                    (it, None)
                }
                (None, Some(pt)) => {
                    let z = parse_point(pt)?;
                    let pi =
                        itinerary_of_point(&part, &p, z, length).map_err(|e| e.to_string())?;
                    (pi.itinerary, pi.escaped_at)
                }
                _ => return Err("itinerary needs exactly one of --address or --point".into()),
            };
            emit_json(
                &common,
                &json!({
                    "doubled_labels": labels.doubled_entries(),
                    "labels": labels.to_string(),
                    "escaped_at": escaped_at,
                }),
            )
        }
        Command::Classify { common, point } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, _) = resolve_params(&common, &cfg)?;
            let point: String = point
                .or_else(|| cfg.get("point"))
                .ok_or("classify needs --point re,im")?;
            let z = parse_point(&point)?;
            let part = build_partition(&p, &BaseRays::Policy(RayPolicy::Right), &cfg_default)
                .map_err(|e| e.to_string())?;
            let c = classify_point(&p, &part, z, &Budget::default(), &cfg_default);
            let mut v = serde_json::to_value(&c).map_err(|e| e.to_string())?;
            // attach printable address literals next to the structured forms
            if let cosine_rays::classify::Classification::LandingPoint { candidates } = &c {
                v["candidate_literals"] = json!(candidates
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>());
            }
            emit_json(&common, &v)
        }
        Command::Boxdim {
            common,
            mode,
            strip_bound,
            tail_depth,
            t_floor,
            window,
            resolution,
            budget,
            scales,
        } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, _) = resolve_params(&common, &cfg)?;
            let mode: String = mode.or_else(|| cfg.get("mode")).unwrap_or("rays".into());
            let window = window
                .or_else(|| cfg.get("window"))
                .unwrap_or("-10,10,-10,10".into());
            let w = parse_window(&window)?;
            let scales = scales.or_else(|| cfg.get("scales")).unwrap_or(8);
            match mode.as_str() {
                "rays" => {
                    let m = strip_bound.or_else(|| cfg.get("strip_bound")).unwrap_or(1);
                    let depth = tail_depth.or_else(|| cfg.get("tail_depth")).unwrap_or(3);
                    let t_floor = t_floor.or_else(|| cfg.get("t_floor")).unwrap_or(1.0);
                    let out = ray_family_dimension(&p, m, depth, t_floor, &w, scales, &cfg_default)
                        .map_err(|e| e.to_string())?;
                    emit_json(&common, &serde_json::to_value(&out).map_err(|e| e.to_string())?)
                }
                "escaping" => {
                    let res = resolution.or_else(|| cfg.get("resolution")).unwrap_or(512);
                    let budget = budget.or_else(|| cfg.get("budget")).unwrap_or(100);
                    let out = escaping_set_dimension(&p, &w, res, budget, scales)
                        .map_err(|e| e.to_string())?;
                    emit_json(&common, &serde_json::to_value(&out).map_err(|e| e.to_string())?)
                }
                other => Err(format!("unknown boxdim mode {other:?} (rays | escaping)")),
            }
        }
        Command::EscapeStats {
            common,
            window,
            samples,
            budget,
            seed,
        } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, _) = resolve_params(&common, &cfg)?;
            let window = window
                .or_else(|| cfg.get("window"))
                .unwrap_or("-10,10,-10,10".into());
            let w = parse_window(&window)?;
            let samples = samples.or_else(|| cfg.get("samples")).unwrap_or(100_000);
            let budget = budget.or_else(|| cfg.get("budget")).unwrap_or(50);
            let seed = seed.or_else(|| cfg.get("seed")).unwrap_or(0);
            let stats = escape_fraction(&p, &w, samples, budget, seed);
            emit_json(
                &common,
                &serde_json::to_value(&stats).map_err(|e| e.to_string())?,
            )
        }
        Command::Render {
            common,
            window,
            width,
            height,
            budget,
            overlay,
        } => {
            let cfg = Cfg::load(&common.config)?;
            let (p, _) = resolve_params(&common, &cfg)?;
            let window = window
                .or_else(|| cfg.get("window"))
                .unwrap_or("-5,5,-5,5".into());
            let w = parse_window(&window)?;
            let width = width.or_else(|| cfg.get("width")).unwrap_or(512);
            let height = height.or_else(|| cfg.get("height")).unwrap_or(512);
            let budget = budget.or_else(|| cfg.get("budget")).unwrap_or(50);
            let overlay = if overlay.is_empty() {
                cfg.get::<Vec<String>>("overlays").unwrap_or_default()
            } else {
                overlay
            };
            let mut overlays = Vec::new();
            for o in &overlay {
                overlays.push(match o.as_str() {
                    "partition" => Overlay::Partition,
                    "postsingular" => Overlay::Postsingular,
                    other => match other.strip_prefix("ray:") {
                        Some(lit) => Overlay::Ray(parse_addr(lit)?),
                        None => {
                            return Err(format!(
                                "unknown overlay {o:?} (partition | postsingular | ray:<address>)"
                            ))
                        }
                    },
                });
            }
            let job = RenderJob {
                params: p,
                window: w,
                width,
                height,
                budget,
                overlays,
                palette: "default".into(),
            };
            let img = render_escape(&job, &cfg_default).map_err(|e| e.to_string())?;
            emit(&common, &img.to_ppm())
        }
    }
}
