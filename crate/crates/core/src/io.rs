//! CSV output and the binary density checkpoint.
//!
//! Checkpoint layout, all little-endian:
//!
//! ```text
//! magic    4 bytes  "NSDN"
//! version  u32      1
//! count    u32      number of bodies
//! per body:
//!   axes     3 × f64  a, b, c
//!   angles   3 × f64  φ, θ, ψ
//!   center   3 × f64
//!   n1 m1 n2 m2  4 × u32
//!   grid 1 density  n1·(m1+1) × 3 × f64, row k = 0..=m1, column j = 0..n1
//!   grid 2 density  n2·(m2+1) × 3 × f64
//! ```
//!
//! Densities are stored in the body's standard frame.

use std::io::{Read, Write};
use std::path::Path;

use crate::flowsim::{Streamline, TraceRecord};
use crate::geom::{Chart, Pose, StandardEllipsoid};
use crate::stokes::Body;
use crate::{Error, Result, Vec3};

const MAGIC: &[u8; 4] = b"NSDN";
const VERSION: u32 = 1;

/// Full double precision, 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Write a header row and records to a CSV file or, for `None`, to stdout.
pub fn write_csv(path: Option<&Path>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub const TRACE_HEADER: [&str; 7] = ["y0", "z0", "T_fin", "y_fin_1", "y_fin_2", "status", "error"];

pub fn trace_rows(records: &[TraceRecord]) -> impl Iterator<Item = Vec<String>> + '_ {
    records.iter().map(|r| {
        vec![
            fmt(r.y0),
            fmt(r.z0),
            fmt(r.t_fin),
            fmt(r.y_fin[0]),
            fmt(r.y_fin[1]),
            r.status.as_str().to_string(),
            fmt_opt(r.error),
        ]
    })
}

pub const STREAMLINE_HEADER: [&str; 6] = ["seed", "point", "x", "y", "z", "status"];

pub fn streamline_rows(lines: &[Streamline]) -> impl Iterator<Item = Vec<String>> + '_ {
    lines.iter().flat_map(|l| {
        l.points.iter().enumerate().map(move |(i, p)| {
            vec![l.seed.to_string(), i.to_string(), fmt(p.x), fmt(p.y), fmt(p.z), l.status.as_str().to_string()]
        })
    })
}

pub const CONVERGENCE_HEADER: [&str; 4] = ["n", "d", "err_corrected", "err_uncorrected"];

/// Read trace records back, e.g. a reference run.
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    use crate::flowsim::TraceStatus;
    let mut r = csv::Reader::from_path(path)?;
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Invalid(format!("bad number {s:?}: {e}")));
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != TRACE_HEADER.len() {
            return Err(Error::Invalid(format!("trace row has {} fields", rec.len())));
        }
        let status = match &rec[5] {
            "crossed" => TraceStatus::Crossed,
            "timed_out" => TraceStatus::TimedOut,
            "entered_body" => TraceStatus::EnteredBody,
            s => return Err(Error::Invalid(format!("unknown status {s:?}"))),
        };
        out.push(TraceRecord {
            y0: num(&rec[0])?,
            z0: num(&rec[1])?,
            t_fin: num(&rec[2])?,
            y_fin: [num(&rec[3])?, num(&rec[4])?],
            status,
            error: if rec[6].is_empty() { None } else { Some(num(&rec[6])?) },
        });
    }
    Ok(out)
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_u32(w: &mut impl Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Invalid("lattice too large for the checkpoint".into()))?;
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_u32(r: &mut impl Read) -> Result<usize> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

pub fn write_checkpoint(w: &mut impl Write, bodies: &[Body]) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, VERSION as usize)?;
    put_u32(w, bodies.len())?;
    for b in bodies {
        for v in b.ellipsoid.axes() {
            put_f64(w, v)?;
        }
        for v in [b.pose.phi, b.pose.theta, b.pose.psi] {
            put_f64(w, v)?;
        }
        for v in b.pose.center {
            put_f64(w, v)?;
        }
        let (g1, g2) = (b.grid(Chart::Grid1), b.grid(Chart::Grid2));
        for v in [g1.n, g1.m, g2.n, g2.m] {
            put_u32(w, v)?;
        }
        for chart in [Chart::Grid1, Chart::Grid2] {
            for f in b.density(chart) {
                for c in f.iter() {
                    put_f64(w, *c)?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<Vec<Body>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Invalid("not a density checkpoint".into()));
    }
    let version = get_u32(r)?;
    if version != VERSION as usize {
        return Err(Error::Invalid(format!("checkpoint version {version} is not supported")));
    }
    let count = get_u32(r)?;
    let mut bodies = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = [0.0; 9];
        for x in v.iter_mut() {
            *x = get_f64(r)?;
        }
        let (n1, m1, n2, m2) = (get_u32(r)?, get_u32(r)?, get_u32(r)?, get_u32(r)?);
        let ell = StandardEllipsoid::new(v[0], v[1], v[2])?;
        let pose = Pose::new([v[3], v[4], v[5]], [v[6], v[7], v[8]]);
        let mut body = Body::new(ell, pose, (n1, m1), (n2, m2))?;
        let mut read_lattice = |len: usize| -> Result<Vec<Vec3>> {
            (0..len).map(|_| Ok(Vec3::new(get_f64(r)?, get_f64(r)?, get_f64(r)?))).collect()
        };
        let d1 = read_lattice(n1 * (m1 + 1))?;
        let d2 = read_lattice(n2 * (m2 + 1))?;
        body.set_density_both(d1, d2)?;
        bodies.push(body);
    }
    Ok(bodies)
}

pub fn save_checkpoint(path: &Path, bodies: &[Body]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(&mut w, bodies)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<Body>> {
    read_checkpoint(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}
