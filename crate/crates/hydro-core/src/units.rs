//! Conversions between the catalogue units used at the API surface
//! (cc/rev, rpm, bar, L/min) and the SI quantities used internally
//! (m³/rad, rad/s, Pa, m³/s).

use std::f64::consts::{PI, TAU};

/// Pascals per bar.
pub const PA_PER_BAR: f64 = 1.0e5;
/// Litres-per-minute per cubic-metre-per-second.
pub const LPM_PER_M3S: f64 = 60_000.0;

/// Displacement: cc/rev to m³/rad.
pub fn cc_per_rev_to_m3_per_rad(d: f64) -> f64 {
    d * 1.0e-6 / TAU
}

/// Displacement: m³/rad to cc/rev.
pub fn m3_per_rad_to_cc_per_rev(d: f64) -> f64 {
    d * TAU * 1.0e6
}

/// Shaft speed: rpm to rad/s.
pub fn rpm_to_rad_per_s(n: f64) -> f64 {
    n * PI / 30.0
}

/// Shaft speed: rad/s to rpm.
pub fn rad_per_s_to_rpm(w: f64) -> f64 {
    w * 30.0 / PI
}

/// Pressure: bar to Pa.
pub fn bar_to_pa(p: f64) -> f64 {
    p * PA_PER_BAR
}

/// Pressure: Pa to bar.
pub fn pa_to_bar(p: f64) -> f64 {
    p / PA_PER_BAR
}

/// Flow: L/min to m³/s.
pub fn lpm_to_m3_per_s(q: f64) -> f64 {
    q / LPM_PER_M3S
}

/// Flow: m³/s to L/min.
pub fn m3_per_s_to_lpm(q: f64) -> f64 {
    q * LPM_PER_M3S
}

/// Pressure-flow gradient (valve slope or slip coefficient):
/// (L/min)/bar to (m³/s)/Pa.
pub fn lpm_per_bar_to_si(c: f64) -> f64 {
    c / (LPM_PER_M3S * PA_PER_BAR)
}

/// Pressure-flow gradient: (m³/s)/Pa to (L/min)/bar.
pub fn si_to_lpm_per_bar(c: f64) -> f64 {
    c * LPM_PER_M3S * PA_PER_BAR
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_litre_per_minute_in_si() {
        assert_eq!(lpm_to_m3_per_s(1.0), 1.0 / 60_000.0);
    }

    #[test]
    fn one_rpm_in_si() {
        assert_eq!(rpm_to_rad_per_s(1.0), PI / 30.0);
    }

    #[test]
    fn displacement_scale() {
        // 2π cc/rev is exactly 1e-6 m³/rad.
        let d = cc_per_rev_to_m3_per_rad(TAU);
        assert!((d - 1.0e-6).abs() < 1.0e-21);
    }

    proptest! {
        #[test]
        fn displacement_roundtrip(d in 0.1f64..2000.0) {
            let back = m3_per_rad_to_cc_per_rev(cc_per_rev_to_m3_per_rad(d));
            prop_assert!((back - d).abs() <= 4.0 * f64::EPSILON * d.abs());
        }

        #[test]
        fn speed_roundtrip(n in -5000.0f64..5000.0) {
            let back = rad_per_s_to_rpm(rpm_to_rad_per_s(n));
            prop_assert!((back - n).abs() <= 4.0 * f64::EPSILON * n.abs().max(1.0));
        }

        #[test]
        fn pressure_roundtrip(p in -1.0e9f64..1.0e9) {
            let back = pa_to_bar(bar_to_pa(p));
            prop_assert!((back - p).abs() <= 4.0 * f64::EPSILON * p.abs().max(1.0));
        }

        #[test]
        fn flow_roundtrip(q in -5000.0f64..5000.0) {
            let back = m3_per_s_to_lpm(lpm_to_m3_per_s(q));
            prop_assert!((back - q).abs() <= 4.0 * f64::EPSILON * q.abs().max(1.0));
        }

        #[test]
        fn gradient_roundtrip(c in 0.0f64..100.0) {
            let back = si_to_lpm_per_bar(lpm_per_bar_to_si(c));
            prop_assert!((back - c).abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0));
        }
    }
}
