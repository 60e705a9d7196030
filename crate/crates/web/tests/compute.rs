use std::f64::consts::PI;

use disentangle_web::compute::{cat_q_grid, pdc_curves, thermal_curves, MAX_DIM};

#[test]
fn lossless_cat_map_is_symmetric_and_revives() {
    let points = 21;
    let start = cat_q_grid(2.0, 1.0, 0.0, 0.0, 24, 4.0, points).unwrap();
    assert_eq!(start.len(), points * points);
    // |α⟩ + |−α⟩ is invariant under α → −α, i.e. reversing the grid
    for (a, b) in start.iter().zip(start.iter().rev()) {
        assert!((a - b).abs() < 1e-14);
    }
    let revived = cat_q_grid(2.0, 1.0, 0.0, 2.0 * PI, 24, 4.0, points).unwrap();
    for (a, b) in start.iter().zip(&revived) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn thermal_curves_relax_to_bath_occupation() {
    let (gm, gp) = (0.3, 0.1);
    let rows = thermal_curves(1.0, gm, gp, 1.0, 30, 40.0, 5).unwrap();
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[0], 0.0);
    assert!((rows[1] - 1.0).abs() < 1e-12 && (rows[2] - 1.0).abs() < 1e-12);
    let last = &rows[12..];
    assert_eq!(last[0], 40.0);
    let nbar = gp / (gm - gp);
    assert!((last[1] - nbar).abs() < 1e-6, "{}", last[1]);
}

#[test]
fn pdc_from_vacuum_gains_photons() {
    let c = pdc_curves(0.3, 0.0, 1.0, 16, 2.0, 3).unwrap();
    assert_eq!(c.rows.len(), 9);
    assert_eq!(c.rows[1], 0.0);
    assert!(c.rows[4] > 0.0 && c.rows[7] > c.rows[4]);
    assert!(c.rows[8] < 1.0);
    assert!(c.condition_number >= 1.0 && c.condition_number < 1e4);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(cat_q_grid(2.0, 1.0, 0.0, 0.0, MAX_DIM + 1, 4.0, 10).is_err());
    assert!(cat_q_grid(2.0, 1.0, 0.0, 0.0, 10, 0.0, 10).is_err());
    assert!(thermal_curves(1.0, 0.2, 0.1, 1.0, 10, 1.0, 1).is_err());
    assert!(thermal_curves(1.0, 0.2, 0.1, 1.0, 10, f64::NAN, 5).is_err());
    assert!(pdc_curves(2.0, 0.0, 1.0, 10, 1.0, 5).is_err());
}
