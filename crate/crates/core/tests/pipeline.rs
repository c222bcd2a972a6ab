use fairgini_core::panel::{synthetic_panel, with_reference, SyntheticLaw, REFERENCE_ALARM_LEVELS};
use fairgini_core::{ingest_csv, ingest_reader, year_report, GiniPanel, PanelError, ReportOptions, Units};
use std::io::Write;

const NORMAL: SyntheticLaw = SyntheticLaw::Normal {
    mean: 0.40,
    std_dev: 0.08,
};

fn round_trip(panel: &GiniPanel, units: Units) -> GiniPanel {
    let mut buf = Vec::new();
    panel.write_csv_as(&mut buf, units).unwrap();
    ingest_reader(buf.as_slice(), units).unwrap()
}

#[test]
fn export_then_ingest_is_identity() {
    let panel = synthetic_panel(&[1990, 1995, 2000], 140, NORMAL, 1);
    assert_eq!(round_trip(&panel, Units::Fraction).records(), panel.records());
    assert_eq!(round_trip(&panel, Units::Percent).records(), panel.records());
}

#[test]
fn percent_and_fraction_files_give_identical_reports() {
    let panel = synthetic_panel(&[1995], 140, NORMAL, 2);
    let (mut pct, mut frac) = (Vec::new(), Vec::new());
    panel.write_csv_as(&mut pct, Units::Percent).unwrap();
    panel.write_csv_as(&mut frac, Units::Fraction).unwrap();
    assert_ne!(pct, frac);
    let a = ingest_reader(pct.as_slice(), Units::Percent).unwrap();
    let b = ingest_reader(frac.as_slice(), Units::Fraction).unwrap();
    let opts = ReportOptions::default();
    assert_eq!(year_report(&a, 1995, opts).unwrap(), year_report(&b, 1995, opts).unwrap());
}

#[test]
fn hand_written_percent_rows() {
    let pct = "country,year,gini\nNarnia,1995,35.2\nGondor,1995,41\nMordor,1995,62.75\n";
    let frac = "country,year,gini\nNarnia,1995,0.352\nGondor,1995,0.41\nMordor,1995,0.6275\n";
    let a = ingest_reader(pct.as_bytes(), Units::Percent).unwrap();
    let b = ingest_reader(frac.as_bytes(), Units::Fraction).unwrap();
    assert_eq!(a.records(), b.records());
}

#[test]
fn ingest_from_file_with_crlf_and_bom() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "\u{feff}country,year,gini\r\nNarnia,1995,35.2\r\nGondor,1995,40.1\r\n").unwrap();
    let panel = ingest_csv(f.path(), Units::Percent).unwrap();
    assert_eq!(panel.records().len(), 2);
    assert_eq!(panel.year_values(1995), vec![0.352, 0.401]);
}

#[test]
fn errors_carry_line_numbers() {
    let bad = "country,year,gini\nA,1995,30\nB,1995,x\n";
    assert!(matches!(
        ingest_reader(bad.as_bytes(), Units::Percent),
        Err(PanelError::BadNumeric { line: 3, .. })
    ));
    let high = "country,year,gini\nA,1995,30\nB,1995,152\n";
    assert!(matches!(
        ingest_reader(high.as_bytes(), Units::Percent),
        Err(PanelError::OutOfRange { line: 3, .. })
    ));
}

#[test]
fn synthetic_normal_panels_give_alarm_near_056() {
    let (mut in_band, mut above_half, mut valid) = (0, 0, 0);
    for seed in 0..100 {
        let panel = synthetic_panel(&[2000], 140, NORMAL, seed);
        let r = year_report(&panel, 2000, ReportOptions::default()).unwrap();
        let a = r.alarm.alarm_level;
        in_band += usize::from((0.53..=0.59).contains(&a));
        above_half += usize::from(a > 0.5);
        valid += usize::from(r.alarm.valid);
    }
    assert!(in_band >= 95, "in band {in_band}/100");
    assert!(above_half >= 95, "above 0.5 {above_half}/100");
    assert!(valid >= 90, "normality kept {valid}/100");
}

#[test]
fn heavy_tailed_panels_are_flagged() {
    let law = SyntheticLaw::ShiftedExponential {
        offset: 0.25,
        mean: 0.10,
    };
    let flagged = (0..100)
        .filter(|&seed| {
            let panel = synthetic_panel(&[1990], 140, law, seed);
            let r = year_report(&panel, 1990, ReportOptions::default()).unwrap();
            r.headline_alarm().is_none() && !r.alarm.valid
        })
        .count();
    assert!(flagged >= 95, "{flagged}/100");
}

#[test]
fn reference_comparison_reports_both_conventions() {
    let panel = synthetic_panel(&[1995], 140, NORMAL, 3);
    let r = with_reference(year_report(&panel, 1995, ReportOptions::default()).unwrap());
    let cmp = r.reference.unwrap();
    assert_eq!(cmp.reference, REFERENCE_ALARM_LEVELS[0].1);
    assert_eq!(cmp.sample_convention, r.alarm.alarm_level);
    assert!(cmp.population_convention < cmp.sample_convention);
    assert!(!cmp.matches);
}
