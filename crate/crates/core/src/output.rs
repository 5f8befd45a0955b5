//! CSV and index-file rendering.
//!
//! All floating-point CSV fields use Rust's shortest round-trip formatting
//! (up to 17 significant digits), so files parse back bit-identically. The
//! snapshot-time index file uses explicit 17-significant-digit scientific
//! notation, one time per line.

use std::fmt::Write as _;

use crate::characteristics::FieldHistory;
use crate::diagnostics::DiagnosticsRow;
use crate::ensemble::ParticleEnsemble;
use crate::field::RadialField;

/// Header of the diagnostics time series.
pub const SERIES_HEADER: &str = "t,E_kin,E_pot,E_tot,rho_inf,sup_m_r,r_eps,a,D_core";

/// Header of ensemble dumps.
pub const ENSEMBLE_HEADER: &str = "id,x1,x2,x3,v1,v2,v3,weight";

/// Header of radial field dumps.
pub const FIELD_HEADER: &str = "r,m";

/// Renders the diagnostics time series.
pub fn render_series_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t, r.e_kin, r.e_pot, r.e_tot, r.rho_inf, r.sup_m_over_r, r.r_eps, r.a, r.d_core
        );
    }
    out
}

/// Renders an ensemble dump: one row per particle.
pub fn render_ensemble_csv(ensemble: &ParticleEnsemble) -> String {
    let mut out = String::with_capacity(64 * (ensemble.len() + 1));
    out.push_str(ENSEMBLE_HEADER);
    out.push('\n');
    for i in 0..ensemble.len() {
        let x = ensemble.positions[i];
        let v = ensemble.velocities[i];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i, x[0], x[1], x[2], v[0], v[1], v[2], ensemble.weights[i]
        );
    }
    out
}

/// Renders a radial field dump: sorted radius and cumulative mass.
pub fn render_field_csv(field: &RadialField) -> String {
    let mut out = String::with_capacity(32 * (field.len() + 1));
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (r, m) in field.radii().iter().zip(field.cum_mass()) {
        let _ = writeln!(out, "{r},{m}");
    }
    out
}

/// Renders the snapshot-time index: one time per line, 17 significant
/// digits.
pub fn render_history_index(history: &FieldHistory) -> String {
    let mut out = String::new();
    for t in history.times() {
        let _ = writeln!(out, "{t:.16e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trips_through_parse() {
        let rows = vec![DiagnosticsRow {
            t: 0.1,
            e_kin: 1.0 / 3.0,
            e_pot: -0.7213171293,
            e_tot: 1.0 / 3.0 - 0.7213171293,
            rho_inf: 0.238732,
            sup_m_over_r: 1.0000000000000002,
            r_eps: 0.99,
            a: 0.995,
            d_core: 1e-17,
        }];
        let csv = render_series_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SERIES_HEADER);
        let fields: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(fields[1], 1.0 / 3.0);
        assert_eq!(fields[5], 1.0000000000000002);
        assert_eq!(fields[8], 1e-17);
    }

    #[test]
    fn history_index_has_17_significant_digits() {
        let mut h = FieldHistory::new(0.01).unwrap();
        h.push(RadialField::from_parts(vec![], vec![]).unwrap());
        h.push(RadialField::from_parts(vec![], vec![]).unwrap());
        let idx = render_history_index(&h);
        let lines: Vec<&str> = idx.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("1.0000000000000000e-2"));
        let back: f64 = lines[1].parse().unwrap();
        assert_eq!(back, 0.01);
    }
}
