//! Run configuration: a small, strict "key = value" file format with `#`
//! comments, full validation at parse time, and a serializer whose output
//! reparses to an equal configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernels::Vec2;

/// How the initial level set is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// φ(x) = radius − d(x, center) with the torus distance d: a disc patch.
    Circle { center: Vec2, radius: f64 },
    /// φ(x) = cos(2π · d(x, ξ)) with ξ the chart corner (1/2, 1/2): the
    /// default disc of radius 1/4 centered on the corner.
    AnnulusCosine,
    /// Load φ from a field snapshot file (its stored time is ignored).
    CustomFile(PathBuf),
}

/// Fully validated simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Grid size per axis (power of two, ≥ 8).
    pub n: usize,
    /// CFL number in (0, 1/2].
    pub cfl: f64,
    /// Final time, > 0.
    pub t_final: f64,
    /// Time between snapshots, in (0, t_final].
    pub snapshot_interval: f64,
    /// Gaussian mollifier width; 0 disables regularization.
    pub epsilon: f64,
    pub initial_condition: InitialCondition,
    pub output_dir: PathBuf,
    /// Upper bound on the time step, > 0.
    pub dt_max: f64,
    /// Relative patch-area drift that aborts the run, > 0.
    pub area_error_abort: f64,
    /// Seed for the sampled diagnostics.
    pub seed: u64,
}

pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_DT_MAX: f64 = 1e-2;
pub const DEFAULT_EPSILON: f64 = 0.0;
pub const DEFAULT_AREA_ERROR_ABORT: f64 = 0.01;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Parse and validate a configuration file.
///
/// Grammar: one `key = value` per line; `#` starts a comment; blank lines
/// ignored. `n` and `t_final` are required; on a repeated key the last
/// assignment wins. Defaults: `cfl` 0.5, `dt_max` 1e-2, `epsilon` 0,
/// `area_error_abort` 0.01, `seed` 0, `snapshot_interval` t_final/10,
/// `output_dir` "out", `initial_condition` annulus_cosine.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut n: Option<(usize, usize)> = None; // (value, line)
    let mut cfl: Option<(f64, usize)> = None;
    let mut t_final: Option<(f64, usize)> = None;
    let mut snapshot_interval: Option<(f64, usize)> = None;
    let mut epsilon: Option<(f64, usize)> = None;
    let mut initial_condition: Option<(InitialCondition, usize)> = None;
    let mut output_dir: Option<PathBuf> = None;
    let mut dt_max: Option<(f64, usize)> = None;
    let mut area_error_abort: Option<(f64, usize)> = None;
    let mut seed: Option<u64> = None;

    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config_at(
                line_no,
                format!("expected `key = value`, got {line:?}"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "n" => {
                let v: usize = value.parse().map_err(|_| {
                    Error::config_at(line_no, format!("n must be an integer, got {value:?}"))
                })?;
                n = Some((v, line_no));
            }
            "cfl" => cfl = Some((parse_real(value, key, line_no)?, line_no)),
            "t_final" => t_final = Some((parse_real(value, key, line_no)?, line_no)),
            "snapshot_interval" => {
                snapshot_interval = Some((parse_real(value, key, line_no)?, line_no))
            }
            "epsilon" => epsilon = Some((parse_real(value, key, line_no)?, line_no)),
            "dt_max" => dt_max = Some((parse_real(value, key, line_no)?, line_no)),
            "area_error_abort" => {
                area_error_abort = Some((parse_real(value, key, line_no)?, line_no))
            }
            "seed" => {
                let v: u64 = value.parse().map_err(|_| {
                    Error::config_at(
                        line_no,
                        format!("seed must be a nonnegative integer, got {value:?}"),
                    )
                })?;
                seed = Some(v);
            }
            "output_dir" => {
                if value.is_empty() {
                    return Err(Error::config_at(line_no, "output_dir must not be empty"));
                }
                output_dir = Some(PathBuf::from(value));
            }
            "initial_condition" => {
                initial_condition = Some((parse_initial_condition(value, line_no)?, line_no))
            }
            other => {
                return Err(Error::config_at(line_no, format!("unknown key {other:?}")));
            }
        }
    }

    let (n, n_line) = n.ok_or_else(|| Error::config("missing required key `n`"))?;
    GridSpec::new(n).map_err(|e| Error::config_at(n_line, e.to_string()))?;
    let (t_final, t_line) =
        t_final.ok_or_else(|| Error::config("missing required key `t_final`"))?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::config_at(
            t_line,
            format!("t_final must be positive and finite, got {t_final}"),
        ));
    }
    let ic_line = initial_condition_line(&initial_condition);
    let cfg = SimConfig {
        n,
        cfl: check(cfl, DEFAULT_CFL, "cfl", |v| v > 0.0 && v <= 0.5, "in (0, 1/2]")?,
        t_final,
        snapshot_interval: check(
            snapshot_interval,
            t_final / 10.0,
            "snapshot_interval",
            |v| v > 0.0 && v <= t_final,
            "in (0, t_final]",
        )?,
        epsilon: check(epsilon, DEFAULT_EPSILON, "epsilon", |v| v >= 0.0 && v.is_finite(), "≥ 0")?,
        initial_condition: initial_condition
            .map(|(ic, _)| ic)
            .unwrap_or(InitialCondition::AnnulusCosine),
        output_dir: output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        dt_max: check(dt_max, DEFAULT_DT_MAX, "dt_max", |v| v > 0.0 && v.is_finite(), "> 0")?,
        area_error_abort: check(
            area_error_abort,
            DEFAULT_AREA_ERROR_ABORT,
            "area_error_abort",
            |v| v > 0.0 && v.is_finite(),
            "> 0",
        )?,
        seed: seed.unwrap_or(DEFAULT_SEED),
    };
    if let InitialCondition::Circle { radius, .. } = cfg.initial_condition {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(Error::config_at(
                ic_line,
                format!("circle radius must lie in (0, 1/2), got {radius}"),
            ));
        }
    }
    Ok(cfg)
}

fn initial_condition_line(slot: &Option<(InitialCondition, usize)>) -> usize {
    slot.as_ref().map(|(_, l)| *l).unwrap_or(0)
}

fn parse_real(value: &str, key: &str, line_no: usize) -> Result<f64> {
    value.parse().map_err(|_| {
        Error::config_at(line_no, format!("{key} must be a real number, got {value:?}"))
    })
}

fn check(
    slot: Option<(f64, usize)>,
    default: f64,
    key: &str,
    ok: impl Fn(f64) -> bool,
    range: &str,
) -> Result<f64> {
    match slot {
        None => Ok(default),
        Some((v, line)) => {
            if ok(v) {
                Ok(v)
            } else {
                Err(Error::config_at(
                    line,
                    format!("{key} must be {range}, got {v}"),
                ))
            }
        }
    }
}

fn parse_initial_condition(value: &str, line_no: usize) -> Result<InitialCondition> {
    if value == "annulus_cosine" {
        return Ok(InitialCondition::AnnulusCosine);
    }
    if let Some(rest) = value.strip_prefix("circle(") {
        let Some(inner) = rest.strip_suffix(')') else {
            return Err(Error::config_at(line_no, "unterminated circle(...)"));
        };
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::config_at(
                line_no,
                "circle takes three arguments: circle(x, y, radius)",
            ));
        }
        let nums: Result<Vec<f64>> = parts
            .iter()
            .map(|p| parse_real(p, "circle argument", line_no))
            .collect();
        let nums = nums?;
        return Ok(InitialCondition::Circle {
            center: Vec2::new(nums[0], nums[1]),
            radius: nums[2],
        });
    }
    if let Some(rest) = value.strip_prefix("custom_file(") {
        let Some(path) = rest.strip_suffix(')') else {
            return Err(Error::config_at(line_no, "unterminated custom_file(...)"));
        };
        let path = path.trim();
        if path.is_empty() {
            return Err(Error::config_at(line_no, "custom_file needs a path"));
        }
        return Ok(InitialCondition::CustomFile(PathBuf::from(path)));
    }
    Err(Error::config_at(
        line_no,
        format!(
            "initial_condition must be annulus_cosine, circle(x, y, r) or custom_file(path), got {value:?}"
        ),
    ))
}

/// Render a configuration as a file that [`parse_config`] reads back to an
/// equal value. Floats use the shortest round-tripping decimal form.
pub fn serialize_config(cfg: &SimConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n = {}", cfg.n);
    let _ = writeln!(out, "cfl = {}", cfg.cfl);
    let _ = writeln!(out, "t_final = {}", cfg.t_final);
    let _ = writeln!(out, "snapshot_interval = {}", cfg.snapshot_interval);
    let _ = writeln!(out, "epsilon = {}", cfg.epsilon);
    let ic = match &cfg.initial_condition {
        InitialCondition::AnnulusCosine => "annulus_cosine".to_string(),
        InitialCondition::Circle { center, radius } => {
            format!("circle({}, {}, {})", center.x, center.y, radius)
        }
        InitialCondition::CustomFile(path) => format!("custom_file({})", path.display()),
    };
    let _ = writeln!(out, "initial_condition = {ic}");
    let _ = writeln!(out, "output_dir = {}", cfg.output_dir.display());
    let _ = writeln!(out, "dt_max = {}", cfg.dt_max);
    let _ = writeln!(out, "area_error_abort = {}", cfg.area_error_abort);
    let _ = writeln!(out, "seed = {}", cfg.seed);
    out
}
