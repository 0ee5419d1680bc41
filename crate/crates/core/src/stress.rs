//! Multivariate stress: per-cell Euclidean distance from the initial state in
//! N-P-K space, its dominant channel, and field summaries.

use crate::error::Result;
use crate::lattice::{Channel, GridSpec, LatticeState};

/// Single-nutrient stress threshold for a 30 % depletion.
pub const DEFAULT_CRITICAL_STRESS: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct StressMap {
    pub grid: GridSpec,
    pub year: usize,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressSummary {
    pub mean_d: f64,
    pub max_d: f64,
    pub min_d: f64,
    /// Sample standard deviation over mean.
    pub cv_d: f64,
    pub exceed_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub dominant: Vec<Channel>,
    /// Share of cells dominated by N, P, K.
    pub fractions: [f64; 3],
}

pub fn stress_map(state: &LatticeState, year: usize) -> Result<StressMap> {
    let devs = squared_deviations(state, year)?;
    let d = devs.into_iter().map(|[n, p, k]| (n + p + k).sqrt()).collect();
    Ok(StressMap {
        grid: state.grid(),
        year,
        d,
    })
}

fn squared_deviations(state: &LatticeState, year: usize) -> Result<Vec<[f64; 3]>> {
    let [n, p, k] = Channel::ALL.map(|c| (state.slice(year, c), state.slice(0, c)));
    let (n, p, k) = ((n.0?, n.1?), (p.0?, p.1?), (k.0?, k.1?));
    Ok((0..state.grid().len())
        .map(|i| {
            [
                (n.0[i] - n.1[i]).powi(2),
                (p.0[i] - p.1[i]).powi(2),
                (k.0[i] - k.1[i]).powi(2),
            ]
        })
        .collect())
}

/// Channel with the largest squared deviation; ties resolve to the earlier channel (N, P, K).
pub fn dominant_channel(sq: [f64; 3]) -> Channel {
    let mut best = Channel::N;
    for c in [Channel::P, Channel::K] {
        if sq[c.index()] > sq[best.index()] {
            best = c;
        }
    }
    best
}

pub fn decompose(state: &LatticeState, year: usize) -> Result<Decomposition> {
    let dominant: Vec<Channel> = squared_deviations(state, year)?
        .into_iter()
        .map(dominant_channel)
        .collect();
    let mut counts = [0usize; 3];
    for c in &dominant {
        counts[c.index()] += 1;
    }
    let n = dominant.len() as f64;
    Ok(Decomposition {
        fractions: counts.map(|k| k as f64 / n),
        dominant,
    })
}

pub fn summarize(map: &StressMap, threshold: f64) -> StressSummary {
    let d = &map.d;
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let sd = if d.len() > 1 {
        (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let cv = if mean > 0.0 { sd / mean } else { 0.0 };
    let exceed = d.iter().filter(|&&v| v > threshold).count() as f64 / n;
    StressSummary {
        mean_d: mean,
        max_d: max,
        min_d: min,
        cv_d: cv,
        exceed_fraction: exceed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Layer;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(2, 2, 10.0).unwrap()
    }

    fn state_with_final(n: f64, p: f64, k: f64) -> LatticeState {
        let g = grid();
        let mut s = LatticeState::new_uniform(g, 2, 1.0).unwrap();
        s.store(1, Channel::N, &Layer::filled(g, n)).unwrap();
        s.store(1, Channel::P, &Layer::filled(g, p)).unwrap();
        s.store(1, Channel::K, &Layer::filled(g, k)).unwrap();
        s
    }

    #[test]
    fn zero_when_unchanged() {
        let s = LatticeState::new_uniform(grid(), 2, 1.0).unwrap();
        let m = stress_map(&s, 1).unwrap();
        assert!(m.d.iter().all(|&v| v == 0.0));
        let d = decompose(&s, 1).unwrap();
        assert!(d.dominant.iter().all(|&c| c == Channel::N));
        assert_eq!(d.fractions, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn sandy_and_clay_chains() {
        let sand = stress_map(&state_with_final(0.384, 0.432, 0.648), 1).unwrap();
        assert!((sand.d[0] - 0.825984f64.sqrt()).abs() < 1e-12, "{}", sand.d[0]);
        let clay = stress_map(&state_with_final(0.878592, 0.865536, 0.921984), 1).unwrap();
        let sq: f64 = [0.121408f64, 0.134464, 0.078016].iter().map(|v| v * v).sum();
        assert!((clay.d[0] - sq.sqrt()).abs() < 1e-12, "{}", clay.d[0]);
    }

    #[test]
    fn year_out_of_range() {
        let s = LatticeState::new_uniform(grid(), 2, 1.0).unwrap();
        assert!(stress_map(&s, 2).is_err());
        assert!(decompose(&s, 5).is_err());
    }

    #[test]
    fn argmax_dominance() {
        assert_eq!(dominant_channel([0.01, 0.25, 0.04]), Channel::P);
        assert_eq!(dominant_channel([0.1, 0.1, 0.1]), Channel::N);
        assert_eq!(dominant_channel([0.0, 0.2, 0.2]), Channel::P);
        let d = decompose(&state_with_final(0.9, 0.5, 0.8), 1).unwrap();
        assert_eq!(d.fractions, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn summary_examples() {
        let g = grid();
        let m = StressMap {
            grid: g,
            year: 1,
            d: vec![0.5; 4],
        };
        let s = summarize(&m, DEFAULT_CRITICAL_STRESS);
        assert_eq!((s.mean_d, s.cv_d, s.exceed_fraction), (0.5, 0.0, 1.0));
        let m = StressMap {
            grid: g,
            year: 1,
            d: vec![0.2, 0.4],
        };
        let s = summarize(&m, 0.3);
        assert!((s.mean_d - 0.3).abs() < 1e-15);
        assert_eq!(s.max_d, 0.4);
        assert_eq!(s.min_d, 0.2);
        assert!((s.cv_d - 0.02f64.sqrt() / 0.3).abs() < 1e-12);
        assert!((s.cv_d - 0.4714).abs() < 1e-4);
        assert_eq!(s.exceed_fraction, 0.5);
    }

    proptest! {
        #[test]
        fn single_channel_deviation_is_exact(delta in -0.99f64..0.99, c in 0usize..3) {
            let mut v = [1.0; 3];
            v[c] += delta;
            let m = stress_map(&state_with_final(v[0], v[1], v[2]), 1).unwrap();
            prop_assert!((m.d[0] - delta.abs()).abs() < 1e-15);
        }

        #[test]
        fn monotone_in_each_channel(n in 0.01f64..2.0, p in 0.01f64..2.0, k in 0.01f64..2.0, bump in 0.0f64..0.5) {
            let base = stress_map(&state_with_final(n, p, k), 1).unwrap().d[0];
            let further = if n < 1.0 { (n - bump).max(1e-6) } else { n + bump };
            let more = stress_map(&state_with_final(further, p, k), 1).unwrap().d[0];
            prop_assert!(more >= base - 1e-15);
        }

        #[test]
        fn dominance_scale_invariant(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, s in 1e-3f64..1e3) {
            prop_assert_eq!(dominant_channel([a, b, c]), dominant_channel([a * s, b * s, c * s]));
        }

        #[test]
        fn triangle_inequality(a in proptest::array::uniform3(0.1f64..2.0), b in proptest::array::uniform3(0.1f64..2.0)) {
            // d(a, 1) <= d(a, b) + d(b, 1), with the metric on channel triples.
            let dist = |u: [f64; 3], v: [f64; 3]| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let da = stress_map(&state_with_final(a[0], a[1], a[2]), 1).unwrap().d[0];
            let db = stress_map(&state_with_final(b[0], b[1], b[2]), 1).unwrap().d[0];
            prop_assert!(da <= dist(a, b) + db + 1e-12);
            prop_assert!((da - dist(a, [1.0; 3])).abs() < 1e-12);
        }

        #[test]
        fn summary_ordering(d in proptest::collection::vec(0.0f64..2.0, 2..50)) {
            let m = StressMap { grid: grid(), year: 1, d };
            let s = summarize(&m, 0.3);
            prop_assert!(s.min_d <= s.mean_d + 1e-12 && s.mean_d <= s.max_d + 1e-12);
            prop_assert!(s.cv_d >= 0.0);
        }
    }
}
