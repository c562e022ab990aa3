//! CSV in, report and JSON out. A header row is detected automatically and
//! all-zero columns are stabilized on load.

use hdnr::io::{load_matrix, write_matrix, LoadOptions};
use hdnr::sim::{icm_generate, IcmSpec, Innovation, Mixing};
use hdnr::{TestReport, TwoSampleInput, TwoSampleOptions, TwoSampleTest};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let spec = IcmSpec::centered(50, Mixing::Identity, Innovation::StudentT { df: 6.0 });
    let mut a = icm_generate(&spec, 18, 1)?.into_inner();
    let mut b = icm_generate(&spec, 22, 2)?.into_inner();
    // an unexpressed feature
    a.column_mut(7).fill(0.0);
    b.column_mut(7).fill(0.0);

    let pa = dir.path().join("control.csv");
    let pb = dir.path().join("treated.csv");
    write_matrix(&pa, &a)?;
    write_matrix(&pb, &b)?;

    let y1 = load_matrix(&pa, &LoadOptions::default())?;
    let y2 = load_matrix(&pb, &LoadOptions::default())?;
    let opts = TwoSampleOptions {
        data_name: "control and treated".into(),
        ..TwoSampleOptions::default()
    };
    let report = TwoSampleTest::Zzz2023.run_with(&TwoSampleInput::new(&y1, &y2)?, &opts)?;
    print!("{report}");

    let json = report.to_json();
    println!("{json}");
    let back = TestReport::from_json(&json)?;
    assert_eq!(back.p_value, report.p_value);
    Ok(())
}
