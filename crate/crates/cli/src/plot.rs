//! Minimal SVG scatter plots of the primary quantity against the swept axis.

use std::fmt::Write;

use ctcsim::experiments::SweepRecord;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Picks the coordinate that varies across the records.
fn x_axis(records: &[SweepRecord]) -> (&'static str, fn(&SweepRecord) -> f64) {
    let varies = |f: fn(&SweepRecord) -> f64| {
        records
            .first()
            .is_some_and(|r0| records.iter().any(|r| f(r) != f(r0)))
    };
    let candidates: [(&'static str, fn(&SweepRecord) -> f64); 4] = [
        ("phi", |r| r.phi),
        ("theta_xz", |r| r.theta_xz.unwrap_or(0.0)),
        ("p", |r| r.p),
        ("epsilon", |r| r.epsilon),
    ];
    candidates
        .into_iter()
        .find(|(_, f)| varies(*f))
        .unwrap_or(candidates[0])
}

/// `L_ctc_sigma_z` (red) and `L_qm` (blue) against the swept coordinate.
pub fn records_svg(title: &str, records: &[SweepRecord]) -> String {
    let (x_name, x_of) = x_axis(records);
    let xs: Vec<f64> = records.iter().map(x_of).collect();
    let (x_lo, x_hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let sx = |x: f64| MARGIN + (x - x_lo) / span * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - y * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {t} V{b} H{r}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-size="16">{}</text>"#,
        MARGIN,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12">{x_name}</text>"#,
        W / 2.0,
        H - 15.0
    );
    for (y, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.1}" font-size="12">{label}</text>"#,
            sy(y) + 4.0
        );
    }
    for (r, x) in records.iter().zip(&xs) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="red"/>"#,
            sx(*x),
            sy(r.l_ctc_sigma_z)
        );
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="none" stroke="blue"/>"#,
            sx(*x),
            sy(r.l_qm)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
