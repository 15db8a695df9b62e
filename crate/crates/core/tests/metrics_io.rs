use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use quadarm::control::ControllerKind;
use quadarm::metrics_io::{
    format_sig9, read_log_csv, read_log_from, rms_error, write_log_csv, write_log_to, LogRow, MetricsError, RmsReport,
    CSV_HEADER,
};
use quadarm::quadcopter::Attitude;
use quadarm::sim::{SimLog, SimRecord};

fn record(t: f64, k: f64) -> SimRecord {
    SimRecord {
        t,
        reference: Vector3::new(k, -k, 2.0),
        yaw_ref: 0.1 * k,
        position: Vector3::new(k + 1e-3 * k.sin(), -k, 2.0 + 1.0 / 3.0),
        velocity: Vector3::zeros(),
        attitude: Attitude::new(0.01, -0.02, 0.1 * k + 1e-7),
        setpoint: Vector3::zeros(),
        collective: 0.0,
        thrusts: [15.0, 15.1 + k, 14.9, 1.0 / 7.0],
        saturated: false,
        arm_q: Vector3::new(-PI / 2.0, 0.2 * k, 1e-12),
        payload_attached: k < 3.0,
    }
}

fn sample_log(n: usize) -> SimLog {
    let mut log = SimLog::new("sample", ControllerKind::Pid, true, 1e-3);
    log.records = (0..n).map(|k| record(k as f64 * 1e-3, k as f64)).collect();
    log
}

#[test]
fn sine_rms_is_amplitude_over_root_two() {
    let n = 10_000;
    let amp = 0.7;
    let actual: Vec<_> = (0..n)
        .map(|k| {
            let s = amp * (2.0 * PI * k as f64 / n as f64).sin();
            Vector3::new(s, 0.0, -s)
        })
        .collect();
    let rms = rms_error(&actual, &vec![Vector3::zeros(); n]).unwrap();
    assert!((rms[0] - amp / 2.0_f64.sqrt()).abs() < 1e-12);
    assert_eq!(rms[1], 0.0);
    assert!((rms[2] - rms[0]).abs() < 1e-15);
}

#[test]
fn rms_rejects_bad_series() {
    assert!(matches!(rms_error(&[], &[]), Err(MetricsError::Empty)));
    assert!(matches!(
        rms_error(&[Vector3::zeros()], &[]),
        Err(MetricsError::LengthMismatch {
            actual: 1,
            reference: 0
        })
    ));
}

#[test]
fn empty_log_is_header_only() {
    let mut out = Vec::new();
    write_log_to(&sample_log(0), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(text.trim_end().split(',').collect::<Vec<_>>(), CSV_HEADER);
    assert!(read_log_from(text.as_bytes()).unwrap().is_empty());
}

#[test]
fn every_row_has_the_header_width() {
    let mut out = Vec::new();
    write_log_to(&sample_log(5), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.split(',').count() == CSV_HEADER.len()));
}

#[test]
fn file_round_trip_recovers_printed_values() {
    let log = sample_log(6);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    write_log_csv(&log, &path).unwrap();
    let rows = read_log_csv(&path).unwrap();
    assert_eq!(rows.len(), log.records.len());
    let reparse = |v: f64| format_sig9(v).parse::<f64>().unwrap();
    for (row, rec) in rows.iter().zip(&log.records) {
        let want = LogRow::from(rec);
        assert_eq!(row.payload_attached, want.payload_attached);
        assert_eq!(row.thrusts, want.thrusts.map(reparse));
        assert_eq!(row.position, want.position.map(reparse));
        assert_eq!(row.arm_q, want.arm_q.map(reparse));
        assert_eq!(row.yaw, reparse(want.yaw));
    }
    let from_file = RmsReport::from_rows(&rows).unwrap();
    let direct = RmsReport::from_log(&log).unwrap();
    for (a, b) in from_file.axes().iter().zip(direct.axes()) {
        // positions up to 5 m printed at 9 digits
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    assert!(from_file.payload);
}

#[test]
fn truncated_rows_are_malformed() {
    let text = format!("{}\n0,1,2\n", CSV_HEADER.join(","));
    assert!(matches!(
        read_log_from(text.as_bytes()),
        Err(MetricsError::Malformed(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 2048, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn nine_significant_digits_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let text = format_sig9(v);
        let back: f64 = text.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs(), "{} -> {} -> {}", v, text, back);
        prop_assert_eq!(format_sig9(back), text);
    }
}
