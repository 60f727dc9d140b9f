//! Thermal time constants, validation errors and sensor-group statistics.

use alloc::string::String;
use alloc::vec::Vec;

use crate::transient::TemperatureTrace;
use crate::{Error, Result};

/// Fraction of the initial-to-ambient drop that defines the time constant:
/// `1 - 1/e`, so a pure exponential yields exactly its own time constant.
pub const TIME_CONSTANT_FRACTION: f64 = 1.0 - 0.367_879_441_171_442_33;

/// A trace must start this close to the stated initial temperature, °C.
pub const START_TOLERANCE_C: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeConstantResult {
    /// Seconds after the first sample.
    pub tau: f64,
    pub threshold: f64,
    /// Sample indices straddling the threshold.
    pub bracket: (usize, usize),
}

/// Time for `trace` to cover `1 - 1/e` of the way from `t_init` to
/// `t_ambient`, measured from its first sample.
///
/// The first crossing counts; the crossing time is interpolated linearly
/// between the bracketing samples. Works for heating as well as cooling.
pub fn time_constant(trace: &TemperatureTrace, t_init: f64, t_ambient: f64) -> Result<TimeConstantResult> {
    let (ts, vs) = (trace.times(), trace.temperatures());
    if !(t_init.is_finite() && t_ambient.is_finite()) || t_init == t_ambient {
        return Err(Error::InvalidArgument(
            "initial and ambient temperature must be finite and distinct".into(),
        ));
    }
    if (vs[0] - t_init).abs() > START_TOLERANCE_C {
        return Err(Error::InvalidTrace(alloc::format!(
            "trace starts at {} °C, not within {START_TOLERANCE_C} °C of {t_init} °C",
            vs[0]
        )));
    }
    let threshold = t_init - TIME_CONSTANT_FRACTION * (t_init - t_ambient);
    let sign = if t_init > t_ambient { 1.0 } else { -1.0 };
    let k = vs
        .iter()
        .position(|&v| sign * (v - threshold) <= 0.0)
        .ok_or(Error::ThresholdNotCrossed { threshold })?;
    if k == 0 {
        return Err(Error::InvalidTrace("trace starts beyond the threshold".into()));
    }
    let (t0, t1, v0, v1) = (ts[k - 1], ts[k], vs[k - 1], vs[k]);
    let crossing = if v1 == v0 { t1 } else { t0 + (threshold - v0) / (v1 - v0) * (t1 - t0) };
    Ok(TimeConstantResult {
        tau: crossing - ts[0],
        threshold,
        bracket: (k - 1, k),
    })
}

/// `|tau_meas - tau_sim| / tau_meas`.
pub fn relative_error(tau_meas: f64, tau_sim: f64) -> Result<f64> {
    if !(tau_meas > 0.0 && tau_meas.is_finite()) || !tau_sim.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "measured time constant must be positive, got {tau_meas}"
        )));
    }
    Ok((tau_meas - tau_sim).abs() / tau_meas)
}

/// Pointwise mean of traces sharing one time grid.
pub fn sensor_group_mean(id: impl Into<String>, traces: &[TemperatureTrace]) -> Result<TemperatureTrace> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidTrace("no traces to average".into()))?;
    if traces.iter().any(|t| t.times() != first.times()) {
        return Err(Error::InvalidTrace("traces do not share one time grid".into()));
    }
    let n = traces.len() as f64;
    // Averaging deviations from the first trace keeps identical inputs exact.
    let mean = (0..first.len())
        .map(|k| {
            let base = first.temperatures()[k];
            base + traces.iter().map(|t| t.temperatures()[k] - base).sum::<f64>() / n
        })
        .collect();
    TemperatureTrace::new(id, first.times().to_vec(), mean)
}

/// `trace` linearly interpolated at `times`; every time must lie inside
/// the trace's range.
pub fn resample(trace: &TemperatureTrace, times: &[f64]) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            trace.value_at(t).ok_or_else(|| {
                Error::InvalidTrace(alloc::format!("time {t} s lies outside trace `{}`", trace.probe_id))
            })
        })
        .collect()
}

/// `|T_meas - T_sim|` at the measured sample times that fall inside the
/// simulated range. Simulation is resampled onto the measurement, never the
/// reverse.
pub fn abs_error_trace(measured: &TemperatureTrace, simulated: &TemperatureTrace) -> Result<TemperatureTrace> {
    let (times, errors): (Vec<f64>, Vec<f64>) = measured
        .times()
        .iter()
        .zip(measured.temperatures())
        .filter_map(|(&t, &m)| simulated.value_at(t).map(|s| (t, (m - s).abs())))
        .unzip();
    if times.is_empty() {
        return Err(Error::InvalidTrace("measured and simulated traces do not overlap in time".into()));
    }
    TemperatureTrace::new(measured.probe_id.clone(), times, errors)
}

/// One row of the published cooldown validation: time constants in minutes
/// and the stated relative error in percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceTimeConstant {
    pub initial_temperature: f64,
    pub domain: &'static str,
    pub tau_meas_min: f64,
    pub tau_sim_min: f64,
    pub rel_error_percent: f64,
}

const fn row(t: f64, domain: &'static str, meas: f64, sim: f64, err: f64) -> ReferenceTimeConstant {
    ReferenceTimeConstant {
        initial_temperature: t,
        domain,
        tau_meas_min: meas,
        tau_sim_min: sim,
        rel_error_percent: err,
    }
}

/// Cooldown time constants reported for the test machine (ambient 26 °C).
pub const REFERENCE_TIME_CONSTANTS: [ReferenceTimeConstant; 12] = [
    row(93.0, "slot", 7.01, 6.97, 0.6),
    row(93.0, "stator_yoke", 4.94, 4.88, 1.6),
    row(83.0, "slot", 6.81, 6.81, 0.02),
    row(83.0, "stator_yoke", 4.82, 4.75, 1.4),
    row(73.0, "slot", 6.77, 6.77, 0.04),
    row(73.0, "stator_yoke", 4.78, 4.70, 1.5),
    row(63.0, "slot", 7.24, 7.18, 0.6),
    row(63.0, "stator_yoke", 5.19, 5.29, 1.9),
    row(53.0, "slot", 5.73, 5.81, 1.5),
    row(53.0, "stator_yoke", 3.98, 3.90, 2.0),
    row(45.0, "slot", 6.17, 6.21, 0.7),
    row(45.0, "stator_yoke", 4.27, 4.33, 1.4),
];

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    #[allow(unused_imports)]
    use num_traits::Float;

    fn exponential(tau: f64, dt: f64, t_end: f64) -> TemperatureTrace {
        let n = (t_end / dt) as usize;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let temps = times.iter().map(|t| 26.0 + 67.0 * (-t / tau).exp()).collect();
        TemperatureTrace::new("x", times, temps).unwrap()
    }

    #[test]
    fn exponential_recovers_tau() {
        let r = time_constant(&exponential(420.0, 1.0, 3000.0), 93.0, 26.0).unwrap();
        assert!((r.tau - 420.0).abs() < 0.42e-3 * 420.0);
        let (a, b) = r.bracket;
        let v = exponential(420.0, 1.0, 3000.0);
        assert!(v.temperatures()[a] > r.threshold && v.temperatures()[b] <= r.threshold);
    }

    #[test]
    fn constant_trace_never_crosses() {
        let t = TemperatureTrace::new("c", vec![0.0, 1.0, 2.0], vec![93.0; 3]).unwrap();
        assert!(matches!(time_constant(&t, 93.0, 26.0), Err(Error::ThresholdNotCrossed { .. })));
    }

    #[test]
    fn two_point_interpolation() {
        let t = TemperatureTrace::new("c", vec![0.0, 100.0], vec![93.0, 26.0]).unwrap();
        let r = time_constant(&t, 93.0, 26.0).unwrap();
        assert!((r.tau - 100.0 * TIME_CONSTANT_FRACTION).abs() < 1e-12);
    }

    #[test]
    fn heating_trace_is_supported() {
        let times: Vec<f64> = (0..=2000).map(|k| k as f64).collect();
        let temps = times.iter().map(|t| 40.0 - 14.0 * (-t / 300.0).exp()).collect();
        let t = TemperatureTrace::new("h", times, temps).unwrap();
        let r = time_constant(&t, 26.0, 40.0).unwrap();
        assert!((r.tau - 300.0).abs() < 0.3);
    }

    #[test]
    fn start_far_from_initial_is_rejected() {
        assert!(time_constant(&exponential(100.0, 1.0, 500.0), 80.0, 26.0).is_err());
    }

    #[test]
    fn relative_error_examples() {
        assert!((relative_error(7.01, 6.97).unwrap() - 0.0057).abs() < 5e-5);
        assert!((relative_error(4.27, 4.33).unwrap() - 0.0141).abs() < 5e-5);
        assert_eq!(relative_error(5.0, 5.0).unwrap(), 0.0);
        assert!(relative_error(0.0, 1.0).is_err());
        let (a, b) = (relative_error(3.0, 2.5).unwrap(), relative_error(300.0, 250.0).unwrap());
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn group_mean() {
        let t = |v: f64| TemperatureTrace::new("s", vec![0.0, 1.0], vec![v, v]).unwrap();
        let m = sensor_group_mean("g", &[t(40.0), t(48.0)]).unwrap();
        assert_eq!(m.temperatures(), &[44.0, 44.0]);
        let x = TemperatureTrace::new("s", vec![0.0, 1.0, 2.0], vec![0.1, 0.7, 1.3]).unwrap();
        let m = sensor_group_mean("g", &[x.clone(), x.clone(), x.clone()]).unwrap();
        assert_eq!(m.temperatures(), x.temperatures());
        let y = TemperatureTrace::new("s", vec![0.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!(sensor_group_mean("g", &[t(1.0), y]).is_err());
    }

    #[test]
    fn abs_error_of_linear_traces() {
        let meas = TemperatureTrace::new("m", vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let sim = TemperatureTrace::new("s", vec![0.0, 3.0], vec![0.0, 6.0]).unwrap();
        let e = abs_error_trace(&meas, &sim).unwrap();
        assert_eq!(e.temperatures(), &[0.0, 1.0, 2.0, 3.0]);
        let far = TemperatureTrace::new("s", vec![10.0, 11.0], vec![0.0, 0.0]).unwrap();
        assert!(abs_error_trace(&meas, &far).is_err());
    }
}
