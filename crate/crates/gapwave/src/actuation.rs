//! The tuning-screw model: converting screw turns to strip deflection and
//! back, solving for the setting that realises a phase target, and building
//! calibration tables.
//!
//! The screw presses on the strip centre, so its advance equals the peak
//! deflection: `deflection = turns * pitch`. The phase shift is strictly
//! increasing in deflection, which makes target solving a plain monotone
//! root-finding problem handled by bisection in turns space.

use rayon::prelude::*;

use crate::design::feasible_max_deflection;
use crate::error::{Error, Result};
use crate::phase::{phase_shift_deg, QuadratureSpec};
use crate::physics::WaveguideSpec;

/// The tuning screw: thread pitch and usable travel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewSpec {
    /// Strip deflection per full turn [m].
    pub pitch_m_per_turn: f64,
    /// Usable travel [turns].
    pub max_turns: f64,
}

impl ScrewSpec {
    /// Creates a screw spec, requiring positive finite pitch and travel.
    pub fn new(pitch_m_per_turn: f64, max_turns: f64) -> Result<Self> {
        if !(pitch_m_per_turn.is_finite() && pitch_m_per_turn > 0.0) {
            return Err(Error::invariant("screw.pitch_m_per_turn > 0"));
        }
        if !(max_turns.is_finite() && max_turns > 0.0) {
            return Err(Error::invariant("screw.max_turns > 0"));
        }
        Ok(ScrewSpec {
            pitch_m_per_turn,
            max_turns,
        })
    }
}

/// One screw position and the phase shift it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewSetting {
    /// Screw position [turns], within `[0, max_turns]`.
    pub turns: f64,
    /// Resulting strip deflection, `turns * pitch` [m].
    pub deflection_m: f64,
    /// Resulting phase shift [deg].
    pub phase_shift_deg: f64,
}

/// Relative slack for travel-range checks, forgiving the one-ulp overshoot a
/// turns -> deflection -> turns round trip can produce at the boundary.
const RANGE_SLACK: f64 = 1e-12;

/// Strip deflection produced by a screw position [m].
///
/// Errors with [`Error::TurnsOutOfRange`] outside `[0, max_turns]`.
pub fn turns_to_deflection(turns: f64, screw: &ScrewSpec) -> Result<f64> {
    if !turns.is_finite() || turns < 0.0 || turns > screw.max_turns * (1.0 + RANGE_SLACK) {
        return Err(Error::TurnsOutOfRange {
            turns,
            max_turns: screw.max_turns,
        });
    }
    Ok(turns * screw.pitch_m_per_turn)
}

/// Screw position that produces a given strip deflection [turns].
///
/// Errors with [`Error::DeflectionOutOfTravel`] when the deflection needs a
/// position outside `[0, max_turns]`.
pub fn deflection_to_turns(deflection_m: f64, screw: &ScrewSpec) -> Result<f64> {
    let turns = deflection_m / screw.pitch_m_per_turn;
    if !turns.is_finite() || turns < 0.0 || turns > screw.max_turns * (1.0 + RANGE_SLACK) {
        return Err(Error::DeflectionOutOfTravel {
            deflection_m,
            turns,
            max_turns: screw.max_turns,
        });
    }
    Ok(turns)
}

/// Acceptable distance from the phase target when solving [deg]; well inside
/// the 0.02 degree round-trip contract of [`solve_setting`].
const SOLVE_TOL_DEG: f64 = 0.005;

/// Finds the screw setting that realises `target_phase_deg` at
/// `frequency_hz` for a strip of the given half-length, to within 0.02
/// degrees.
///
/// The usable deflection range is the smaller of the screw travel and the
/// cutoff limit at the guide's low band edge ([`feasible_max_deflection`]
/// with zero margin). A zero target returns the rest position exactly.
/// Errors with [`Error::InfeasibleTarget`] reporting the largest reachable
/// shift when the target exceeds it.
pub fn solve_setting(
    target_phase_deg: f64,
    frequency_hz: f64,
    half_length_m: f64,
    guide: &WaveguideSpec,
    screw: &ScrewSpec,
    quad: &QuadratureSpec,
) -> Result<ScrewSetting> {
    if !(target_phase_deg.is_finite() && target_phase_deg >= 0.0) {
        return Err(Error::invariant("target_phase_deg >= 0"));
    }
    if target_phase_deg == 0.0 {
        return Ok(ScrewSetting {
            turns: 0.0,
            deflection_m: 0.0,
            phase_shift_deg: 0.0,
        });
    }

    let limit_m = feasible_max_deflection(guide, guide.band.low_hz, 0.0);
    let top_turns = (limit_m / screw.pitch_m_per_turn).min(screw.max_turns);
    if top_turns <= 0.0 {
        return Err(Error::InfeasibleTarget {
            target_deg: target_phase_deg,
            achievable_deg: 0.0,
            max_deflection_m: 0.0,
        });
    }

    // The cutoff limit itself can sit exactly on the cutoff boundary; back
    // the bracket top off until it evaluates cleanly (a few parts in 1e12,
    // far below the solve tolerance).
    let mut hi_turns = top_turns;
    let phase_at = |turns: f64| {
        phase_shift_deg(
            turns * screw.pitch_m_per_turn,
            half_length_m,
            guide,
            frequency_hz,
            quad,
        )
    };
    let mut hi_phase = phase_at(hi_turns);
    for _ in 0..4 {
        match hi_phase {
            Err(Error::Evanescent { .. }) => {
                hi_turns *= 1.0 - 1e-12;
                hi_phase = phase_at(hi_turns);
            }
            _ => break,
        }
    }
    let hi_phase = hi_phase?;

    if target_phase_deg > hi_phase {
        return Err(Error::InfeasibleTarget {
            target_deg: target_phase_deg,
            achievable_deg: hi_phase,
            max_deflection_m: hi_turns * screw.pitch_m_per_turn,
        });
    }
    if (hi_phase - target_phase_deg).abs() <= SOLVE_TOL_DEG {
        return Ok(ScrewSetting {
            turns: hi_turns,
            deflection_m: hi_turns * screw.pitch_m_per_turn,
            phase_shift_deg: hi_phase,
        });
    }

    // Bisection in turns space keeps `deflection = turns * pitch` exact in
    // the returned setting. Phase is continuous and strictly increasing, so
    // the interval always brackets the target.
    let mut lo = 0.0f64;
    let mut hi = hi_turns;
    while hi - lo > 4.0 * f64::EPSILON * hi_turns {
        let mid = 0.5 * (lo + hi);
        let phase = phase_at(mid)?;
        if (phase - target_phase_deg).abs() <= SOLVE_TOL_DEG {
            return Ok(ScrewSetting {
                turns: mid,
                deflection_m: mid * screw.pitch_m_per_turn,
                phase_shift_deg: phase,
            });
        }
        if phase < target_phase_deg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::invariant(
        "phase root refinement stalled before reaching tolerance",
    ))
}

/// Tabulates `n_points` screw settings from rest to the usable maximum
/// (the smaller of the screw travel and the cutoff limit at the guide's low
/// band edge), uniformly spaced in turns, with the phase shift each one
/// produces at `frequency_hz`.
///
/// The first row is exactly zero; phase increases strictly down the table.
/// Feasibility failures at the top row (e.g. asking for the table exactly at
/// the low band edge with the screw reaching the cutoff limit) propagate.
pub fn calibration_table(
    frequency_hz: f64,
    half_length_m: f64,
    guide: &WaveguideSpec,
    screw: &ScrewSpec,
    quad: &QuadratureSpec,
    n_points: usize,
) -> Result<Vec<ScrewSetting>> {
    if n_points < 2 {
        return Err(Error::invariant(
            "calibration table needs at least 2 points",
        ));
    }
    let limit_m = feasible_max_deflection(guide, guide.band.low_hz, 0.0);
    let top_turns = (limit_m / screw.pitch_m_per_turn).min(screw.max_turns);
    let step = top_turns / (n_points - 1) as f64;
    (0..n_points)
        .into_par_iter()
        .map(|i| {
            let turns = if i == n_points - 1 {
                top_turns
            } else {
                i as f64 * step
            };
            let deflection_m = turns * screw.pitch_m_per_turn;
            let phase = phase_shift_deg(deflection_m, half_length_m, guide, frequency_hz, quad)?;
            Ok(ScrewSetting {
                turns,
                deflection_m,
                phase_shift_deg: phase,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::FrequencyBand;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn test_guide() -> WaveguideSpec {
        WaveguideSpec::new(3.76e-3, FrequencyBand::new(64e9, 75e9).unwrap()).unwrap()
    }

    /// M1.6 thread: 0.35 mm per turn; travel covering the cutoff limit.
    fn test_screw() -> ScrewSpec {
        ScrewSpec::new(0.35e-3, 4.5).unwrap()
    }

    #[test]
    fn turn_conversion_reference_values() {
        let screw = test_screw();
        assert_eq!(turns_to_deflection(0.0, &screw).unwrap(), 0.0);
        assert_relative_eq!(
            turns_to_deflection(1.0, &screw).unwrap(),
            0.35e-3,
            max_relative = 1e-15
        );
        // A 0.05 mm deflection is about a seventh of a turn.
        let turns = deflection_to_turns(0.05e-3, &screw).unwrap();
        assert_relative_eq!(turns, 0.05e-3 / 0.35e-3, max_relative = 1e-15);
        assert_abs_diff_eq!(turns, 0.142_857_142_857, epsilon = 1e-12);
    }

    #[test]
    fn turn_conversion_round_trips() {
        let screw = test_screw();
        for &turns in &[0.0, 0.1428, 1.0, 2.853, 4.5] {
            let deflection = turns_to_deflection(turns, &screw).unwrap();
            let back = deflection_to_turns(deflection, &screw).unwrap();
            assert_relative_eq!(back, turns, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn travel_limits_are_enforced() {
        let screw = test_screw();
        assert!(matches!(
            turns_to_deflection(-0.1, &screw),
            Err(Error::TurnsOutOfRange { .. })
        ));
        assert!(matches!(
            turns_to_deflection(4.6, &screw),
            Err(Error::TurnsOutOfRange { .. })
        ));
        assert!(matches!(
            deflection_to_turns(-1e-6, &screw),
            Err(Error::DeflectionOutOfTravel { .. })
        ));
        assert!(matches!(
            deflection_to_turns(1.6e-3, &screw),
            Err(Error::DeflectionOutOfTravel { .. })
        ));
    }

    #[test]
    fn screw_spec_validation() {
        assert!(ScrewSpec::new(0.0, 4.5).is_err());
        assert!(ScrewSpec::new(0.35e-3, 0.0).is_err());
        assert!(ScrewSpec::new(f64::NAN, 4.5).is_err());
    }

    #[test]
    fn zero_target_returns_rest_position_exactly() {
        let setting = solve_setting(
            0.0,
            70e9,
            11e-3,
            &test_guide(),
            &test_screw(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(setting.turns, 0.0);
        assert_eq!(setting.deflection_m, 0.0);
        assert_eq!(setting.phase_shift_deg, 0.0);
    }

    #[test]
    fn solve_reference_setting_for_250_degrees() {
        let guide = test_guide();
        let setting = solve_setting(
            250.0,
            70e9,
            11e-3,
            &guide,
            &test_screw(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        // Independently computed root of the phase model.
        assert_abs_diff_eq!(setting.deflection_m, 0.998_640_554_88e-3, epsilon = 5e-8);
        assert_abs_diff_eq!(setting.turns, 2.853_258_728, epsilon = 2e-4);
        assert_abs_diff_eq!(setting.phase_shift_deg, 250.0, epsilon = SOLVE_TOL_DEG);
        assert_eq!(
            setting.deflection_m,
            setting.turns * test_screw().pitch_m_per_turn
        );
    }

    #[test]
    fn solved_settings_round_trip_through_the_phase_model() {
        let guide = test_guide();
        let screw = test_screw();
        let quad = QuadratureSpec::default();
        for &target in &[10.0, 100.0, 250.0, 400.0] {
            let setting = solve_setting(target, 70e9, 11e-3, &guide, &screw, &quad).unwrap();
            let phase = phase_shift_deg(setting.deflection_m, 11e-3, &guide, 70e9, &quad).unwrap();
            assert_abs_diff_eq!(phase, target, epsilon = 0.02);
            assert!(setting.turns >= 0.0 && setting.turns <= screw.max_turns);
        }
    }

    #[test]
    fn solve_reports_achievable_maximum_when_infeasible() {
        let guide = test_guide();
        match solve_setting(
            600.0,
            70e9,
            11e-3,
            &guide,
            &test_screw(),
            &QuadratureSpec::default(),
        )
        .unwrap_err()
        {
            Error::InfeasibleTarget {
                target_deg,
                achievable_deg,
                max_deflection_m,
            } => {
                assert_eq!(target_deg, 600.0);
                assert_abs_diff_eq!(achievable_deg, 496.415_442_67, epsilon = 0.01);
                assert_abs_diff_eq!(max_deflection_m, 1.417_871_421_875e-3, epsilon = 1e-10);
            }
            other => panic!("expected infeasible-target error, got {other:?}"),
        }
    }

    #[test]
    fn short_travel_screw_limits_the_bracket() {
        let guide = test_guide();
        // Travel stops at 1 turn = 0.35 mm, well short of the cutoff limit.
        let screw = ScrewSpec::new(0.35e-3, 1.0).unwrap();
        let quad = QuadratureSpec::default();
        let achievable = phase_shift_deg(0.35e-3, 11e-3, &guide, 70e9, &quad).unwrap();
        match solve_setting(achievable + 50.0, 70e9, 11e-3, &guide, &screw, &quad).unwrap_err() {
            Error::InfeasibleTarget { achievable_deg, .. } => {
                assert_abs_diff_eq!(achievable_deg, achievable, epsilon = 1e-9)
            }
            other => panic!("expected infeasible-target error, got {other:?}"),
        }
        // A target just inside the travel succeeds.
        let setting = solve_setting(achievable - 1.0, 70e9, 11e-3, &guide, &screw, &quad).unwrap();
        assert!(setting.turns <= 1.0);
    }

    #[test]
    fn negative_target_is_rejected() {
        assert!(matches!(
            solve_setting(
                -1.0,
                70e9,
                11e-3,
                &test_guide(),
                &test_screw(),
                &QuadratureSpec::default()
            ),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn calibration_table_shape_and_monotonicity() {
        let guide = test_guide();
        let table = calibration_table(
            69.5e9,
            11e-3,
            &guide,
            &test_screw(),
            &QuadratureSpec::default(),
            11,
        )
        .unwrap();
        assert_eq!(table.len(), 11);
        let first = &table[0];
        assert_eq!(first.turns, 0.0);
        assert_eq!(first.deflection_m, 0.0);
        assert_eq!(first.phase_shift_deg, 0.0);
        for pair in table.windows(2) {
            assert!(pair[1].turns > pair[0].turns);
            assert!(pair[1].phase_shift_deg > pair[0].phase_shift_deg);
        }
        // Top row reaches the cutoff limit, not the (longer) screw travel.
        let top = table.last().unwrap();
        assert_abs_diff_eq!(top.deflection_m, 1.417_871_421_875e-3, epsilon = 1e-12);
        assert_abs_diff_eq!(top.phase_shift_deg, 505.547_071_73, epsilon = 0.01);
    }

    #[test]
    fn calibration_table_mean_sensitivity_reference() {
        // Overall degrees-per-turn slope at 69.5 GHz, pinned as a regression
        // value; the physical sensitivity is the same order as (though not
        // equal to) measured full-device slopes of this geometry class.
        let guide = test_guide();
        let table = calibration_table(
            69.5e9,
            11e-3,
            &guide,
            &test_screw(),
            &QuadratureSpec::default(),
            11,
        )
        .unwrap();
        let top = table.last().unwrap();
        let mean_deg_per_turn = top.phase_shift_deg / top.turns;
        assert_abs_diff_eq!(mean_deg_per_turn, 124.793_738_26, epsilon = 0.01);
    }

    #[test]
    fn calibration_table_is_deterministic() {
        let guide = test_guide();
        let quad = QuadratureSpec::default();
        let a = calibration_table(70e9, 11e-3, &guide, &test_screw(), &quad, 21).unwrap();
        let b = calibration_table(70e9, 11e-3, &guide, &test_screw(), &quad, 21).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn calibration_table_validates_point_count() {
        assert!(matches!(
            calibration_table(
                70e9,
                11e-3,
                &test_guide(),
                &test_screw(),
                &QuadratureSpec::default(),
                1
            ),
            Err(Error::Invariant(_))
        ));
    }
}
