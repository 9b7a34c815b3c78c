//! On-disk formats: the binary field snapshot, the contour CSV, the
//! diagnostics CSV, and an optional PGM raster preview of the indicator.
//! Every writer goes through a temp-file-plus-rename so readers never see a
//! half-written file.

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::monitors::DiagnosticsRecord;
use crate::quadrature::{Orientation, PatchContour};

/// Magic prefix of field snapshot files.
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"PSTK0001";

/// Diagnostics CSV column header.
pub const DIAGNOSTICS_HEADER: &str =
    "t,area,q1,q2,max_speed,realized_cfl,max_curvature,gradphi_inf,gradphi_holder,delta,hess_sup";

/// Format a float with 17 significant digits (enough to round-trip f64).
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `bytes` to `path` atomically (temp file in the same directory, then
/// rename over the target).
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp: PathBuf = {
        let mut name = path.file_name().map(|n| n.to_os_string()).ok_or_else(|| {
            Error::Format(format!("cannot write to {:?}: no file name", path))
        })?;
        name.push(".tmp");
        match dir {
            Some(d) => d.join(name),
            None => PathBuf::from(name),
        }
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Write a field snapshot: magic, then little-endian u32 n, f64 time, and the
/// n² samples row-major. The payload is the exact bit pattern of the field,
/// so a read-back compares equal bit for bit.
pub fn write_snapshot(path: &Path, phi: &ScalarField, time: f64) -> Result<()> {
    let n = phi.grid().n();
    let mut bytes = Vec::with_capacity(8 + 4 + 8 + 8 * n * n);
    bytes.extend_from_slice(SNAPSHOT_MAGIC);
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&time.to_le_bytes());
    for &v in phi.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &bytes)
}

/// Read a field snapshot written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<(ScalarField, f64)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 + 4 + 8 {
        return Err(Error::Format(format!(
            "snapshot too short: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let time = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let grid = GridSpec::new(n).map_err(|e| Error::Format(format!("snapshot header: {e}")))?;
    let expected = 8 + 4 + 8 + 8 * n * n;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "snapshot length {} does not match n = {n} (expected {expected})",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[20..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ScalarField::from_values(grid, values)?, time))
}

/// Write a contour file: a `# t=<time> n=<points> orientation=<cw|ccw>`
/// header, then one `x,y` node per line at 17 significant digits. Points are
/// stored as extracted (continuity-unwrapped torus coordinates), with no
/// presentation alignment applied.
pub fn write_contour_csv(path: &Path, contour: &PatchContour, time: f64) -> Result<()> {
    let orientation = match contour.orientation() {
        Orientation::Clockwise => "cw",
        Orientation::Counterclockwise => "ccw",
    };
    let mut text = format!(
        "# t={} n={} orientation={}\n",
        fmt17(time),
        contour.points().len(),
        orientation
    );
    for p in contour.points() {
        text.push_str(&fmt17(p.x));
        text.push(',');
        text.push_str(&fmt17(p.y));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// Read back a contour file (used by the verification paths).
pub fn read_contour_csv(path: &Path) -> Result<(PatchContour, f64)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty contour file".into()))?;
    let mut time = None;
    let mut orientation = None;
    for token in header.trim_start_matches('#').split_whitespace() {
        if let Some(v) = token.strip_prefix("t=") {
            time = v.parse::<f64>().ok();
        } else if let Some(v) = token.strip_prefix("orientation=") {
            orientation = Some(v.to_string());
        }
    }
    let time = time.ok_or_else(|| Error::Format("contour header lacks t=".into()))?;
    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (x, y) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("contour line {} lacks a comma", idx + 2)))?;
        let x: f64 = x
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad x on contour line {}", idx + 2)))?;
        let y: f64 = y
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad y on contour line {}", idx + 2)))?;
        points.push(crate::kernels::Vec2::new(x, y));
    }
    let contour = PatchContour::new(points)?;
    if let Some(o) = orientation {
        let expect = match contour.orientation() {
            Orientation::Clockwise => "cw",
            Orientation::Counterclockwise => "ccw",
        };
        if o != expect {
            return Err(Error::Format(format!(
                "contour header claims orientation {o}, data is {expect}"
            )));
        }
    }
    Ok((contour, time))
}

/// Write the diagnostics table: the fixed header then one row per record at
/// 17 significant digits. The whole file is rewritten atomically on each
/// snapshot (the table stays small).
pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut text = String::from(DIAGNOSTICS_HEADER);
    text.push('\n');
    for r in records {
        let row = [
            r.t,
            r.area,
            r.q.x,
            r.q.y,
            r.max_speed,
            r.realized_cfl,
            r.max_curvature,
            r.grad_phi_inf_on_band,
            r.grad_phi_holder,
            r.delta_cutoff,
            r.hess_u_sup_estimate,
        ];
        let row: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// Read back a diagnostics table.
pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DIAGNOSTICS_HEADER => {}
        other => {
            return Err(Error::Format(format!(
                "bad diagnostics header: {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Format(format!("bad diagnostics row {}", idx + 2)))?;
        if fields.len() != 11 {
            return Err(Error::Format(format!(
                "diagnostics row {} has {} fields, expected 11",
                idx + 2,
                fields.len()
            )));
        }
        records.push(DiagnosticsRecord {
            t: fields[0],
            area: fields[1],
            q: crate::kernels::Vec2::new(fields[2], fields[3]),
            max_speed: fields[4],
            realized_cfl: fields[5],
            max_curvature: fields[6],
            grad_phi_inf_on_band: fields[7],
            grad_phi_holder: fields[8],
            delta_cutoff: fields[9],
            hess_u_sup_estimate: fields[10],
        });
    }
    Ok(records)
}

/// Write a binary PGM (P5) preview of an indicator field: 0 ↦ black,
/// 1 ↦ white, drawn with x₁ rightward and x₂ upward.
pub fn write_pgm(path: &Path, theta: &ScalarField) -> Result<()> {
    let n = theta.grid().n();
    let mut bytes = format!("P5\n{n} {n}\n255\n").into_bytes();
    for row in (0..n).rev() {
        for col in 0..n {
            let v = theta.get(col, row).clamp(0.0, 1.0);
            bytes.push((v * 255.0).round() as u8);
        }
    }
    write_atomic(path, &bytes)
}
