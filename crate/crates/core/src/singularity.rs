//! Blow-up rate, singular time and type of a recorded trajectory.

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::flow::{FlowState, TrajectoryRecord};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;
/// Fewest samples an estimate is attempted on.
pub const MIN_SAMPLES: usize = 20;
/// `max |f|` must grow by this factor over the run.
pub const BLOWUP_FACTOR: f64 = 10.0;
/// Type-1 verdict: tail maximum of `m(t)` at most this multiple of its median.
pub const TYPE1_SPREAD: f64 = 2.0;
/// Curvature growth that counts as blow-up of `k`.
pub const K_BLOWUP_FACTOR: f64 = 10.0;
/// Final `min r` below this fraction of the initial one counts as reaching the
/// origin.
pub const ORIGIN_FRACTION: f64 = 0.05;

/// Where the curve becomes singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityClass {
    /// Curvature blows up at the origin.
    C1,
    /// Curvature blows up away from the origin.
    C2,
    /// The curve reaches the origin with bounded curvature; heuristic.
    C3,
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    #[serde(rename = "T_est")]
    pub t_est: f64,
    /// `c` in `|A|² ≈ c/(T - t)`.
    pub fit_c: f64,
    pub class: SingularityClass,
    pub type1: bool,
    /// `m(t) = |A|²(T_est - t)` at every sample.
    pub rescaled_sup: Vec<f64>,
    /// First sample index of the tail.
    pub tail_start: usize,
    /// Median of `m` over the tail.
    pub m_tail: f64,
    /// `max/median` of `m` over the tail.
    pub tail_spread: f64,
    /// Largest `m` on the tail over `m` at the first tail sample.
    pub tail_growth: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        0.5 * (s[mid - 1] + s[mid])
    }
}

/// Least-squares line `y = a + b x`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let len = x.len() as f64;
    let mx = x.iter().sum::<f64>() / len;
    let my = y.iter().sum::<f64>() / len;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Fits `|A|² ≈ c/(T - t)` (a straight line in `1/|A|²`) to the last
/// `tail_fraction` of the samples and judges the type from
/// `m(t) = |A|²(T_est - t)` on that tail.
pub fn estimate_singularity(record: &TrajectoryRecord, tail_fraction: f64) -> Result<SingularityReport> {
    let len = record.len();
    if len < MIN_SAMPLES {
        return Err(Error::TooFewSamples { min: MIN_SAMPLES, got: len });
    }
    // a collapsing neck can keep f bounded while |A| blows up, so either
    // growing counts
    let growth = |v: &[f64]| v.iter().copied().fold(0.0, f64::max) / v[0];
    let a_growth = growth(&record.a_proxy_sq).sqrt();
    let (initial, peak) = (record.max_abs_f[0], record.max_abs_f.iter().copied().fold(0.0, f64::max));
    if !(peak >= BLOWUP_FACTOR * initial || a_growth >= BLOWUP_FACTOR) {
        return Err(Error::InsufficientBlowup { initial, peak });
    }
    let tail_len = ((tail_fraction.clamp(0.0, 1.0) * len as f64).ceil() as usize).clamp(3, len);
    let tail_start = len - tail_len;
    let t = &record.times;
    let a2 = &record.a_proxy_sq;
    let inv: Vec<f64> = a2[tail_start..].iter().map(|a| 1.0 / a).collect();
    let (a, b) = fit_line(&t[tail_start..], &inv);
    let t_last = t[len - 1];
    let (mut t_est, fit_c) = if b < 0.0 { (-a / b, -1.0 / b) } else { (f64::INFINITY, f64::NAN) };
    if !t_est.is_finite() {
        return Err(Error::InsufficientBlowup { initial, peak });
    }
    if t_est < t_last {
        t_est = t_last;
    }
    let rescaled_sup: Vec<f64> = t.iter().zip(a2).map(|(ti, ai)| ai * (t_est - ti)).collect();
    let tail = &rescaled_sup[tail_start..];
    let m_tail = median(tail);
    let tail_max = tail.iter().copied().fold(0.0, f64::max);
    let tail_spread = tail_max / m_tail;
    let type1 = tail_max <= TYPE1_SPREAD * m_tail;
    let tail_growth = tail_max / tail[0];

    let k_blowup = record.max_abs_k[len - 1] >= K_BLOWUP_FACTOR * record.max_abs_k[0];
    let origin = record.min_r[len - 1] <= ORIGIN_FRACTION * record.min_r[0];
    let class = match (k_blowup, origin) {
        (true, true) => SingularityClass::C1,
        (true, false) => SingularityClass::C2,
        (false, true) => SingularityClass::C3,
        (false, false) => SingularityClass::None,
    };
    Ok(SingularityReport { t_est, fit_c, class, type1, rescaled_sup, tail_start, m_tail, tail_spread, tail_growth })
}

/// Huisken rescaling `z̃ = z / √(2(T - t))` with rescaled time
/// `s = -½ log(T - t)`.
pub fn rescale_huisken(state: &FlowState, t_est: f64) -> Result<(DiscreteCurve, f64)> {
    let gap = t_est - state.t;
    if !(gap > 0.0) {
        return Err(Error::BadHorizon { horizon: t_est, t: state.t });
    }
    let curve = state.curve.scaled(1.0 / (2.0 * gap).sqrt())?;
    Ok((curve, -0.5 * gap.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::geometry;
    use crate::topology::symplectic_area;
    use crate::vec2::Vec2;
    use std::f64::consts::PI;

    /// Samples of the exact shrinking circle `R² = R₀² - 2n t`.
    fn circle_record(n: u32, samples: usize) -> TrajectoryRecord {
        let big_t = 1.0 / (2.0 * f64::from(n));
        let mut rec = TrajectoryRecord { n, ..Default::default() };
        for i in 0..samples {
            // geometric approach to T
            let t = big_t * (1.0 - 0.7f64.powi(i as i32));
            let r = (2.0 * f64::from(n) * (big_t - t)).sqrt();
            rec.times.push(t);
            rec.min_r.push(r);
            rec.max_r.push(r);
            rec.max_abs_k.push(1.0 / r);
            rec.max_abs_f.push(f64::from(n) / r);
            rec.a_proxy_sq.push(f64::from(n) / (r * r));
        }
        rec
    }

    #[test]
    fn exact_circle_is_type1_c1() {
        for n in [2, 3] {
            let rep = estimate_singularity(&circle_record(n, 40), 0.25).unwrap();
            let big_t = 1.0 / (2.0 * f64::from(n));
            assert!((rep.t_est - big_t).abs() < 1e-9 * big_t);
            assert!((rep.fit_c - 0.5).abs() < 1e-9);
            assert_eq!(rep.class, SingularityClass::C1);
            assert!(rep.type1);
            let tail = &rep.rescaled_sup[rep.tail_start..];
            assert!(tail.iter().all(|m| (m - 0.5).abs() < 0.1));
            assert!(rep.t_est >= *circle_record(n, 40).times.last().unwrap());
        }
    }

    #[test]
    fn curvature_blowup_away_from_origin_is_c2() {
        let mut rec = circle_record(1, 40);
        // same blow-up, but the curve sits far from the origin
        rec.min_r = vec![2.0; rec.len()];
        let rep = estimate_singularity(&rec, 0.25).unwrap();
        assert_eq!(rep.class, SingularityClass::C2);
        assert!(rep.type1);
    }

    #[test]
    fn faster_blowup_is_not_type1() {
        // |A|² ~ 1/(T-t)² grows like a type-2 singularity
        let mut rec = circle_record(2, 60);
        let big_t = 0.25;
        rec.a_proxy_sq = rec.times.iter().map(|t| 1.0 / (big_t - t).powi(2)).collect();
        let rep = estimate_singularity(&rec, 0.25).unwrap();
        assert!(!rep.type1);
        assert!(rep.tail_growth > 5.0, "{rep:?}");
    }

    #[test]
    fn refuses_short_or_tame_records() {
        assert!(matches!(estimate_singularity(&circle_record(2, 10), 0.25), Err(Error::TooFewSamples { .. })));
        let mut rec = circle_record(2, 40);
        rec.max_abs_f = vec![1.0; 40];
        rec.a_proxy_sq = vec![1.0; 40];
        assert!(matches!(estimate_singularity(&rec, 0.25), Err(Error::InsufficientBlowup { .. })));
    }

    #[test]
    fn rescaled_circle() {
        for n in [1u32, 2, 3] {
            let big_t = 0.7;
            for t in [0.0, 0.3, 0.6, 0.69] {
                let radius = (2.0 * f64::from(n) * (big_t - t)).sqrt();
                let c = DiscreteCurve::from_fn(128, n, |p| Vec2::from_polar(radius, p)).unwrap();
                let state = FlowState { curve: c, t, dt_last: 0.0, steps: 0 };
                let (r, s) = rescale_huisken(&state, big_t).unwrap();
                for p in r.points() {
                    assert!((p.norm() - f64::from(n).sqrt()).abs() < 1e-6);
                }
                assert!((s + 0.5 * (big_t - t).ln()).abs() < 1e-15);
                let area = symplectic_area(&r, &geometry(&r).unwrap());
                assert!((area - PI * f64::from(n)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn unit_scale_when_gap_is_half() {
        let c = DiscreteCurve::from_fn(64, 2, |p| Vec2::from_polar(1.0 + 0.1 * p.sin(), p)).unwrap();
        let state = FlowState { curve: c.clone(), t: 1.5, dt_last: 0.0, steps: 0 };
        let (r, _) = rescale_huisken(&state, 2.0).unwrap();
        assert_eq!(r, c);
        assert!(matches!(rescale_huisken(&state, 1.5), Err(Error::BadHorizon { .. })));
    }
}
