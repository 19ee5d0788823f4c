mod common;

use common::c;
use paramray::geometry::{NestedDiskSystem, TestMap};
use paramray::io::{param_ray_csv, ray_csv, to_json, LandingReport, Table};
use paramray::portrait::{enumerate_portraits, EnumerationLimits};
use paramray::rays::{trace_ray, StepControl};
use paramray::shift_locus::{continue_param_ray, Extrapolation, Verdict};
use paramray::{Angle, CriticalPortrait, Poly};
use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn fixed_point<V: Serialize + DeserializeOwned>(text: &str) -> String {
    let value: V = serde_json::from_str(text).unwrap();
    let again = to_json(&value).unwrap();
    let value: V = serde_json::from_str(&again).unwrap();
    assert_eq!(to_json(&value).unwrap(), again);
    again
}

proptest! {
    #[test]
    fn polynomial_json_round_trips(d in 2u32..7, raw in prop::collection::vec(any::<(f64, f64)>(), 5)) {
        prop_assume!(raw.iter().all(|(a, b)| a.is_finite() && b.is_finite()));
        let f = Poly::new(d, raw[..d as usize - 1].iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
        let text = to_json(&f).unwrap();
        let back: Poly = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn table_emit_is_a_fixed_point(rows in prop::collection::vec(prop::collection::vec(-1e12..1e12f64, 4), 0..20)) {
        let t = Table { header: vec!["s".into(), "re".into(), "im".into(), "green_residual".into()], rows };
        let text = t.emit();
        let back = Table::parse(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.emit(), text);
    }
}

#[test]
fn portrait_json_round_trips() {
    for (d, max_den) in [(2, 9), (3, 6)] {
        for p in enumerate_portraits(d, max_den, EnumerationLimits::default()).unwrap() {
            let text = to_json(&p).unwrap();
            assert_eq!(fixed_point::<CriticalPortrait>(&text), text);
        }
    }
    let text = r#"{"degree":2,"blocks":[[{"num":1,"den":6},{"num":2,"den":3}]]}"#;
    let p: CriticalPortrait = serde_json::from_str(text).unwrap();
    assert_eq!(p.blocks()[0].angles()[0], Angle::frac(1, 6));
}

#[test]
fn ray_and_param_ray_csv_parse_back_exactly() {
    let f = Poly::quadratic(c(-0.12, 0.75));
    let path = trace_ray(&f, &Angle::frac(1, 7), 4.0, 1e-3, &StepControl::default()).unwrap();
    let text = ray_csv(&path);
    let table = Table::parse(&text).unwrap();
    assert_eq!(table.rows.len(), path.samples.len());
    assert_eq!(table.emit(), text);
    for (row, s) in table.rows.iter().zip(&path.samples) {
        assert_eq!((row[0], row[1], row[2]), (s.potential, s.point.re, s.point.im));
    }

    let p = CriticalPortrait::from_fracs(3, &[&[(1, 9), (4, 9), (7, 9)]]).unwrap();
    let points = continue_param_ray(&p, 5.0, 0.5, 0.8).unwrap();
    let text = param_ray_csv(3, &points);
    let table = Table::parse(&text).unwrap();
    assert_eq!(table.header, ["r", "a0_re", "a0_im", "a1_re", "a1_im", "residual"]);
    assert_eq!(table.emit(), text);
}

#[test]
fn report_and_disk_json_round_trip() {
    let report = LandingReport {
        portrait: "{1/9, 4/9, 7/9}".into(),
        schedule: vec![1.0, 0.1, 0.01],
        increments: vec![0.3, 0.03],
        decay_ratio: 0.1,
        schedule_factor: 10,
        sub_geometric: false,
        method: Extrapolation::Aitken,
        extrapolated: Poly::new(3, vec![c(0.1, -0.2), c(1.0 / 3.0, 1e-17)]).unwrap(),
        error_estimate: 3.3e-4,
        max_residual: 1.2e-13,
        tolerance: 1e-3,
        verdict: Verdict::Landed,
    };
    let text = to_json(&report).unwrap();
    assert_eq!(fixed_point::<LandingReport<f64>>(&text), text);

    let system = r#"[
      {"label":[0,0],"inner":{"c":[0,0],"r":0.1},"mid":{"c":[0,0],"r":0.2},"outer":{"c":[0,0],"r":2}},
      {"label":[0.5,0],"inner":{"c":[0.5,0],"r":0.01},"mid":{"c":[0.5,0],"r":0.02},"outer":{"c":[0.5,0],"r":0.1}}
    ]"#;
    let text = fixed_point::<NestedDiskSystem<f64>>(system);
    assert!(text.contains("\"outer\""));

    let maps = TestMap::catalogue(&paramray::Disk::new(c(0.3, 0.0), 2.5).unwrap());
    let text = to_json(&maps).unwrap();
    assert_eq!(fixed_point::<Vec<TestMap<f64>>>(&text), text);
}
