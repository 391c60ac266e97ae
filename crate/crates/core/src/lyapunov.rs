//! Lyapunov exponents along periodic orbits and sampled orbits, and a
//! screen for average conformality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{periodic_words, ExpandingMap, Point, Word};
use crate::error::{LabError, Result};
use crate::linalg::{Derivative, Mat2};
use crate::pressure::csv_field;

/// Shortest orbit accepted by [`lyapunov_exponents`].
pub const MIN_ORBIT_LENGTH: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum OrbitStart {
    /// Forward iteration from a point.
    Point(Point),
    /// The periodic orbit with this itinerary, repeated.
    Periodic(Word),
    /// The suffix-representative orbit of a cylinder word.
    Cylinder(Word),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSample {
    pub measure_tag: String,
    /// Ascending, one per ambient dimension.
    pub exponents: Vec<f64>,
    pub length: usize,
}

impl LyapunovSample {
    pub fn spread(&self) -> f64 {
        self.exponents[self.exponents.len() - 1] - self.exponents[0]
    }
}

/// Accumulates `log|R_ii|` of the QR re-factorization `D·Q = Q′·R` one step at a time.
struct QrCocycle {
    q: Mat2,
    sums: Vec<f64>,
}

impl QrCocycle {
    fn new(dim: usize) -> Self {
        QrCocycle { q: Mat2::IDENTITY, sums: vec![0.0; dim] }
    }

    fn push(&mut self, d: &Derivative) {
        match d {
            Derivative::Scalar(s) => self.sums[0] += s.abs().ln(),
            Derivative::Matrix(m) => {
                let (q, r) = (*m * self.q).qr();
                self.q = q;
                self.sums[0] += r[0].ln();
                self.sums[1] += r[1].ln();
            }
        }
    }

    fn exponents(&self, n: usize) -> Vec<f64> {
        let mut e: Vec<f64> = self.sums.iter().map(|s| s / n as f64).collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// Exponents in nats per iterate over `n` steps (periodic orbits round `n`
/// up to a whole number of periods).
pub fn lyapunov_exponents(map: &ExpandingMap, start: &OrbitStart, n: usize) -> Result<LyapunovSample> {
    if n < MIN_ORBIT_LENGTH {
        return Err(LabError::BadSpec(format!("orbit length {n} below {MIN_ORBIT_LENGTH}")));
    }
    let mut acc = QrCocycle::new(map.dim());
    match start {
        OrbitStart::Point(x) => {
            let mut p = *x;
            for step in 0..n {
                let (i, next) = map.apply(p).ok_or(LabError::EscapedRepeller { step })?;
                acc.push(&map.branch_derivative(i, map.domain().wrap(p)));
                p = next;
            }
            Ok(LyapunovSample { measure_tag: format!("point({x})"), exponents: acc.exponents(n), length: n })
        }
        OrbitStart::Periodic(w) => {
            if !w.is_cyclically_admissible(map) {
                return Err(LabError::NonMarkov(format!("word {w} does not close up")));
            }
            let orbit = map.periodic_orbit(w);
            let period = w.len();
            let reps = n.div_ceil(period);
            for _ in 0..reps {
                for (p, &a) in orbit.iter().zip(w.symbols()) {
                    acc.push(&map.branch_derivative(a as usize, *p));
                }
            }
            let length = reps * period;
            Ok(LyapunovSample { measure_tag: format!("periodic({w})"), exponents: acc.exponents(length), length })
        }
        OrbitStart::Cylinder(w) => {
            if w.len() < n {
                return Err(LabError::BadSpec(format!("word of length {} shorter than {n}", w.len())));
            }
            let orbit = map.cylinder_orbit(w);
            for (p, &a) in orbit.iter().zip(w.symbols()).take(n) {
                acc.push(&map.branch_derivative(a as usize, *p));
            }
            Ok(LyapunovSample { measure_tag: "cylinder".into(), exponents: acc.exponents(n), length: n })
        }
    }
}

/// Random admissible word of length `n`: uniform first symbol, then uniform
/// among allowed successors.
pub fn random_word(map: &ExpandingMap, n: usize, rng: &mut impl Rng) -> Word {
    let k = map.branch_count();
    let mut symbols = vec![rng.gen_range(0..k) as u8];
    while symbols.len() < n {
        let last = *symbols.last().unwrap() as usize;
        let next: Vec<usize> = (0..k).filter(|&b| map.allowed(last, b)).collect();
        symbols.push(next[rng.gen_range(0..next.len())] as u8);
    }
    Word::new(map, symbols).expect("random walk on the adjacency graph is admissible")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConformalLike,
    SpreadDetected,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ConformalLike => "conformal_like",
            Verdict::SpreadDetected => "spread_detected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalityConfig {
    /// Largest exponent spread still called conformal, in nats.
    pub threshold: f64,
    /// Orbit length of each Birkhoff sample.
    pub birkhoff_length: usize,
    pub seed: u64,
}

impl Default for ConformalityConfig {
    fn default() -> Self {
        ConformalityConfig { threshold: 1e-6, birkhoff_length: 256, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalityReport {
    pub samples: Vec<LyapunovSample>,
    pub max_spread: f64,
    pub min_exponent: f64,
    pub verdict: Verdict,
}

impl ConformalityReport {
    pub const CSV_HEADER: &'static str = "measure,length,lambda_min,lambda_max,spread,verdict";

    /// One row per sample and a closing summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},\n",
                csv_field(&s.measure_tag),
                s.length,
                s.exponents[0],
                s.exponents[s.exponents.len() - 1],
                s.spread()
            ));
        }
        out.push_str(&format!(
            "summary,{},{},,{},{}\n",
            self.samples.len(),
            self.min_exponent,
            self.max_spread,
            self.verdict.as_str()
        ));
        out
    }
}

/// Exponents of every periodic-orbit measure of period `≤ max_period` plus
/// `birkhoff_samples` random cylinder orbits.
pub fn average_conformal_check(
    map: &ExpandingMap,
    max_period: usize,
    birkhoff_samples: usize,
    cfg: &ConformalityConfig,
) -> Result<ConformalityReport> {
    assert!(max_period >= 3, "need periods up to at least 3");
    let words = periodic_words(map, max_period);
    let mut samples: Vec<LyapunovSample> = words
        .par_iter()
        .map(|w| {
            let n = MIN_ORBIT_LENGTH.div_ceil(w.len()) * w.len();
            lyapunov_exponents(map, &OrbitStart::Periodic(w.clone()), n)
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..birkhoff_samples {
        let w = random_word(map, cfg.birkhoff_length, &mut rng);
        let mut s = lyapunov_exponents(map, &OrbitStart::Cylinder(w), cfg.birkhoff_length)?;
        s.measure_tag = format!("birkhoff({}:{i})", cfg.seed);
        samples.push(s);
    }
    let max_spread = samples.iter().map(LyapunovSample::spread).fold(0.0, f64::max);
    let min_exponent = samples.iter().map(|s| s.exponents[0]).fold(f64::INFINITY, f64::min);
    let verdict = if max_spread <= cfg.threshold && min_exponent > 0.0 {
        Verdict::ConformalLike
    } else {
        Verdict::SpreadDetected
    };
    Ok(ConformalityReport { samples, max_spread, min_exponent, verdict })
}
