use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use super::MetricsError;
use crate::sim::{SimLog, SimRecord};
use crate::trajectory::ReferenceTrajectory;

pub const CSV_HEADER: [&str; 17] = [
    "t",
    "ref_x",
    "ref_y",
    "ref_z",
    "pos_x",
    "pos_y",
    "pos_z",
    "yaw_ref",
    "yaw",
    "thrust_1",
    "thrust_2",
    "thrust_3",
    "thrust_4",
    "arm_q1",
    "arm_q2",
    "arm_q3",
    "payload_attached",
];

/// Formats like C's `%.9g`, with negative zero printed as `0`.
pub fn format_sig9(v: f64) -> String {
    const P: i32 = 9;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, v);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One parsed log row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub reference: Vector3<f64>,
    pub position: Vector3<f64>,
    pub yaw_ref: f64,
    pub yaw: f64,
    pub thrusts: [f64; 4],
    pub arm_q: Vector3<f64>,
    pub payload_attached: bool,
}

impl From<&SimRecord> for LogRow {
    fn from(r: &SimRecord) -> Self {
        Self {
            t: r.t,
            reference: r.reference,
            position: r.position,
            yaw_ref: r.yaw_ref,
            yaw: r.attitude.yaw,
            thrusts: r.thrusts,
            arm_q: r.arm_q,
            payload_attached: r.payload_attached,
        }
    }
}

impl LogRow {
    fn fields(&self) -> [f64; 16] {
        let (r, p, q, th) = (self.reference, self.position, self.arm_q, self.thrusts);
        [
            self.t,
            r.x,
            r.y,
            r.z,
            p.x,
            p.y,
            p.z,
            self.yaw_ref,
            self.yaw,
            th[0],
            th[1],
            th[2],
            th[3],
            q.x,
            q.y,
            q.z,
        ]
    }

    fn from_fields(v: &[f64; 16], payload_attached: bool) -> Self {
        Self {
            t: v[0],
            reference: Vector3::new(v[1], v[2], v[3]),
            position: Vector3::new(v[4], v[5], v[6]),
            yaw_ref: v[7],
            yaw: v[8],
            thrusts: [v[9], v[10], v[11], v[12]],
            arm_q: Vector3::new(v[13], v[14], v[15]),
            payload_attached,
        }
    }
}

fn csv_error(e: csv::Error) -> MetricsError {
    MetricsError::Malformed(e.to_string())
}

/// Writes the header and one row per record.
pub fn write_log_to<W: Write>(log: &SimLog, out: W) -> Result<(), MetricsError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for rec in &log.records {
        let row = LogRow::from(rec);
        let mut fields: Vec<String> = row.fields().iter().map(|v| format_sig9(*v)).collect();
        fields.push(if row.payload_attached { "1" } else { "0" }.into());
        w.write_record(&fields).map_err(csv_error)?;
    }
    w.flush().map_err(|source| MetricsError::Io {
        path: "<writer>".into(),
        source,
    })
}

pub fn write_log_csv(log: &SimLog, path: impl AsRef<Path>) -> Result<(), MetricsError> {
    let path = path.as_ref();
    let io = |source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    write_log_to(log, &mut buf)?;
    buf.flush().map_err(io)
}

pub fn read_log_from<R: Read>(input: R) -> Result<Vec<LogRow>, MetricsError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(MetricsError::Malformed(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let mut v = [0.0; 16];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k]
                .parse()
                .map_err(|_| MetricsError::Malformed(format!("row {}: bad number '{}'", line + 1, &rec[k])))?;
        }
        let attached = match &rec[16] {
            "0" => false,
            "1" => true,
            other => {
                return Err(MetricsError::Malformed(format!(
                    "row {}: payload flag must be 0 or 1, got '{other}'",
                    line + 1
                )))
            }
        };
        rows.push(LogRow::from_fields(&v, attached));
    }
    Ok(rows)
}

pub fn read_log_csv(path: impl AsRef<Path>) -> Result<Vec<LogRow>, MetricsError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_log_from(std::io::BufReader::new(file))
}

/// Reference trajectory as `t, x, y, z, vx, vy, vz, yaw`.
pub fn write_reference_csv<W: Write>(traj: &ReferenceTrajectory, out: W) -> Result<(), MetricsError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["t", "x", "y", "z", "vx", "vy", "vz", "yaw"])
        .map_err(csv_error)?;
    for (k, s) in traj.samples.iter().enumerate() {
        let vals = [
            k as f64 * traj.dt,
            s.position.x,
            s.position.y,
            s.position.z,
            s.velocity.x,
            s.velocity.y,
            s.velocity.z,
            s.yaw,
        ];
        w.write_record(vals.iter().map(|v| format_sig9(*v)))
            .map_err(csv_error)?;
    }
    w.flush().map_err(|source| MetricsError::Io {
        path: "<writer>".into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g9() {
        let cases = [
            (1.0, "1"),
            (-0.0, "0"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5e-300, "-2.5e-300"),
            (9.999999999, "10"),
            (99999999.95, "100000000"),
            (999999999.5, "1e+09"),
        ];
        for (v, s) in cases {
            assert_eq!(format_sig9(v), s, "{v}");
        }
    }
}
