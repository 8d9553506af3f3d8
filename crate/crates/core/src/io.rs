//! CSV serialization of sweep records and thresholds.
//!
//! Floats are written with 17 significant digits in exponent form so output is
//! byte-deterministic and parses back to the identical `f64`.

use std::io::{Read, Write};

use crate::experiments::{SweepRecord, ThresholdResult};

pub type CsvResult<T> = std::result::Result<T, csv::Error>;

/// `{:.16e}`: one leading digit plus sixteen decimals.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn record_row(r: &SweepRecord) -> [String; 18] {
    [
        r.experiment_id.clone(),
        format_f64(r.phi),
        format_f64(r.phase),
        r.theta_xz.map(format_f64).unwrap_or_default(),
        format_f64(r.p),
        format_f64(r.epsilon),
        r.prep_mode.as_str().to_string(),
        r.n_iterations.to_string(),
        format_f64(r.l_ctc_sigma_z),
        format_f64(r.l_ctc_optimal),
        format_f64(r.d_ctc),
        format_f64(r.l_qm),
        format_f64(r.d_qm),
        format_f64(r.p_succ_ctc),
        format_f64(r.p_succ_qm),
        format_f64(r.fixed_point_residual),
        format_f64(r.consistency_fidelity),
        r.fixed_set_dimension.to_string(),
    ]
}

pub fn write_records<W: Write>(out: W, records: &[SweepRecord]) -> CsvResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SweepRecord::FIELDS)?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> CsvResult<Vec<SweepRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub const THRESHOLD_FIELDS: [&str; 6] = [
    "parameter",
    "crossing",
    "bracket_lo",
    "bracket_hi",
    "achieved_tolerance",
    "residual",
];

pub fn write_thresholds<W: Write>(out: W, results: &[ThresholdResult]) -> CsvResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(THRESHOLD_FIELDS)?;
    for t in results {
        w.write_record([
            t.parameter.as_str().to_string(),
            format_f64(t.crossing),
            format_f64(t.bracket.0),
            format_f64(t.bracket.1),
            format_f64(t.achieved_tolerance),
            format_f64(t.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{fig3_sweep, fig5_sweep, Fig5Variant, PrepMode};
    use proptest::prelude::*;

    fn sample() -> Vec<SweepRecord> {
        let mut r = fig3_sweep(&[0.3, 1.2], &[0.0, 2.0], &[1, 3]).unwrap();
        r.extend(fig5_sweep(PrepMode::NonLocal, Fig5Variant::FIXED_GATE, 5).unwrap());
        r
    }

    #[test]
    fn header_uses_field_names() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "experiment_id,phi,phase,theta_xz,p,epsilon,prep_mode,n_iterations,L_ctc_sigma_z,"
        ));
        assert!(text
            .trim_end()
            .ends_with("consistency_fidelity,fixed_set_dimension"));
    }

    #[test]
    fn round_trip_is_exact() {
        let records = sample();
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn output_is_deterministic() {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_records(&mut a, &sample()).unwrap();
        write_records(&mut b, &sample()).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn float_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
