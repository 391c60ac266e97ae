//! Flat key-value map descriptions, e.g. `family=cookie_cutter r1=3 r2=3 alpha=1.0`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{LabError, Result};
use crate::linalg::Mat2;

use super::branch::{solve_increasing, BranchKind, Homeo, Piece};
use super::{Branch, Domain, ExpandingMap};

/// Built-in map families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `x ↦ degree·x + amp·sin(2πx) mod 1` on the circle.
    Circle { degree: u32, amp: f64 },
    /// Linear full-branch interval map with the given slopes, pieces laid
    /// out left to right with equal gaps.
    CookieCutter { slopes: Vec<f64> },
    /// The golden-mean Markov map `x ↦ φx` on `[0, 1/φ)`, `x ↦ φx − 1` on
    /// `[1/φ, 1]` with adjacency `((1,1),(1,0))`.
    Golden,
    /// Toral endomorphism `x ↦ A x mod 1` for a monomial integer matrix.
    Toral { matrix: [[i64; 2]; 2] },
    /// A circle map conjugated by `x ↦ x + h·sin(2πx)/(2π)`.
    Conjugated { degree: u32, amp: f64, homeo_amp: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub family: Family,
    pub alpha: f64,
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::BadSpec(msg.into())
}

impl MapSpec {
    pub fn parse(text: &str) -> Result<MapSpec> {
        let mut family: Option<String> = None;
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        for tok in text.split_whitespace() {
            match tok.split_once('=') {
                Some(("family", v)) => family = Some(v.to_string()),
                Some((k, v)) => {
                    if params.insert(k.to_string(), v.to_string()).is_some() {
                        return Err(bad(format!("duplicate key {k}")));
                    }
                }
                None if family.is_none() => family = Some(tok.to_string()),
                None => return Err(bad(format!("unexpected token {tok:?}"))),
            }
        }
        let family = family.ok_or_else(|| bad("missing family"))?;
        let num = |params: &mut BTreeMap<String, String>, k: &str| -> Result<Option<f64>> {
            params.remove(k).map(|v| v.parse::<f64>().map_err(|_| bad(format!("{k}={v} is not a number")))).transpose()
        };
        let int = |params: &mut BTreeMap<String, String>, k: &str| -> Result<Option<i64>> {
            params
                .remove(k)
                .map(|v| v.parse::<i64>().map_err(|_| bad(format!("{k}={v} is not an integer"))))
                .transpose()
        };
        let alpha = num(&mut params, "alpha")?.unwrap_or(1.0);
        let family = match family.as_str() {
            "doubling" => Family::Circle { degree: 2, amp: 0.0 },
            "circle" => {
                let degree = int(&mut params, "n")?.unwrap_or(2);
                if degree < 2 {
                    return Err(bad("circle degree must be at least 2"));
                }
                Family::Circle { degree: degree as u32, amp: num(&mut params, "a")?.unwrap_or(0.0) }
            }
            "cookie_cutter" => {
                let mut slopes = Vec::new();
                for i in 1.. {
                    match num(&mut params, &format!("r{i}"))? {
                        Some(r) => slopes.push(r),
                        None => break,
                    }
                }
                if slopes.len() < 2 {
                    return Err(bad("cookie_cutter needs r1 and r2"));
                }
                Family::CookieCutter { slopes }
            }
            "golden" => Family::Golden,
            "toral" => {
                let matrix = if params.contains_key("scale") {
                    let s = int(&mut params, "scale")?.unwrap();
                    let turns = int(&mut params, "turns")?.unwrap_or(0).rem_euclid(4);
                    match turns {
                        0 => [[s, 0], [0, s]],
                        1 => [[0, -s], [s, 0]],
                        2 => [[-s, 0], [0, -s]],
                        _ => [[0, s], [-s, 0]],
                    }
                } else {
                    let mut m = [[0i64; 2]; 2];
                    for (i, row) in m.iter_mut().enumerate() {
                        for (j, v) in row.iter_mut().enumerate() {
                            *v = int(&mut params, &format!("m{}{}", i + 1, j + 1))?
                                .ok_or_else(|| bad("toral needs m11 m12 m21 m22 or scale"))?;
                        }
                    }
                    m
                };
                Family::Toral { matrix }
            }
            "conjugated" => Family::Conjugated {
                degree: int(&mut params, "n")?.unwrap_or(2) as u32,
                amp: num(&mut params, "a")?.unwrap_or(0.0),
                homeo_amp: num(&mut params, "h")?.unwrap_or(0.1),
            },
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(bad(format!("unknown key {k:?}")));
        }
        Ok(MapSpec { family, alpha })
    }

    pub fn build(&self) -> Result<ExpandingMap> {
        let id = self.to_string();
        match &self.family {
            Family::Circle { degree, amp } => circle_map(id, *degree, *amp, self.alpha),
            Family::CookieCutter { slopes } => cookie_cutter(id, slopes, self.alpha),
            Family::Golden => {
                let phi = 0.5 * (1.0 + 5f64.sqrt());
                let cut = 1.0 / phi;
                let branches = vec![
                    Branch {
                        piece: Piece::Interval { lo: 0.0, hi: cut, closed_hi: false },
                        kind: BranchKind::Affine { slope: phi, offset: 0.0 },
                    },
                    Branch {
                        piece: Piece::Interval { lo: cut, hi: 1.0, closed_hi: true },
                        kind: BranchKind::Affine { slope: phi, offset: -1.0 },
                    },
                ];
                ExpandingMap::new(id, Domain::Interval, branches, vec![vec![true, true], vec![true, false]], self.alpha)
            }
            Family::Toral { matrix } => toral(id, *matrix, self.alpha),
            Family::Conjugated { degree, amp, homeo_amp } => {
                if homeo_amp.abs() >= 1.0 {
                    return Err(bad("conjugacy amplitude must be below 1"));
                }
                let base = circle_map(String::new(), *degree, *amp, self.alpha)?;
                let mut map = base.conjugate_by(Homeo::SineShift { amp: *homeo_amp })?;
                map.id = id;
                Ok(map)
            }
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Circle { degree, amp } => write!(f, "family=circle n={degree} a={amp}")?,
            Family::CookieCutter { slopes } => {
                write!(f, "family=cookie_cutter")?;
                for (i, r) in slopes.iter().enumerate() {
                    write!(f, " r{}={r}", i + 1)?;
                }
            }
            Family::Golden => write!(f, "family=golden")?,
            Family::Toral { matrix: m } => {
                write!(f, "family=toral m11={} m12={} m21={} m22={}", m[0][0], m[0][1], m[1][0], m[1][1])?
            }
            Family::Conjugated { degree, amp, homeo_amp } => {
                write!(f, "family=conjugated n={degree} a={amp} h={homeo_amp}")?
            }
        }
        write!(f, " alpha={}", self.alpha)
    }
}

/// Parses a map description and builds the validated map.
pub fn build_markov_map(spec: &str) -> Result<ExpandingMap> {
    MapSpec::parse(spec)?.build()
}

pub(crate) fn circle_map(id: String, degree: u32, amp: f64, alpha: f64) -> Result<ExpandingMap> {
    let n = degree as f64;
    let lift = |x: f64| n * x + amp * (std::f64::consts::TAU * x).sin();
    let dlift = |x: f64| n + amp * std::f64::consts::TAU * (std::f64::consts::TAU * x).cos();
    // the lift must be increasing for the cut points to be well defined
    if n - std::f64::consts::TAU * amp.abs() <= 0.0 {
        return Err(LabError::NonExpanding { branch: 0, min_expansion: n - std::f64::consts::TAU * amp.abs() });
    }
    let cuts: Vec<f64> = (0..=degree)
        .map(|i| match i {
            0 => 0.0,
            i if i == degree => 1.0,
            i => solve_increasing(lift, dlift, i as f64, 0.0, 1.0),
        })
        .collect();
    let k = degree as usize;
    let branches = (0..k)
        .map(|i| Branch {
            piece: Piece::Interval { lo: cuts[i], hi: cuts[i + 1], closed_hi: i + 1 == k },
            kind: BranchKind::SineLift { degree: n, amp, shift: i as f64 },
        })
        .collect();
    ExpandingMap::new(id, Domain::Circle, branches, vec![vec![true; k]; k], alpha)
}

pub(crate) fn cookie_cutter(id: String, slopes: &[f64], alpha: f64) -> Result<ExpandingMap> {
    for (i, &r) in slopes.iter().enumerate() {
        if !(r > 1.0) {
            return Err(LabError::NonExpanding { branch: i, min_expansion: r });
        }
    }
    let total: f64 = slopes.iter().map(|r| 1.0 / r).sum();
    if total > 1.0 + 1e-12 {
        return Err(LabError::NonMarkov(format!("pieces of total length {total} do not fit in [0, 1]")));
    }
    let k = slopes.len();
    let gap = ((1.0 - total) / (k - 1) as f64).max(0.0);
    let touching = gap <= 1e-12;
    let mut lo = 0.0;
    let mut branches = Vec::with_capacity(k);
    for (i, &r) in slopes.iter().enumerate() {
        let hi = if i + 1 == k { 1.0 } else { lo + 1.0 / r };
        branches.push(Branch {
            piece: Piece::Interval { lo, hi, closed_hi: !touching || i + 1 == k },
            kind: BranchKind::Affine { slope: r, offset: -r * lo },
        });
        lo = hi + gap;
    }
    let domain = if touching { Domain::Circle } else { Domain::Interval };
    ExpandingMap::new(id, domain, branches, vec![vec![true; k]; k], alpha)
}

fn toral(id: String, m: [[i64; 2]; 2], alpha: f64) -> Result<ExpandingMap> {
    // monomial matrices map the unit square onto a union of unit squares,
    // so the grid cells below form a Markov partition
    let (n1, n2) = if m[0][1] == 0 && m[1][0] == 0 {
        (m[0][0].unsigned_abs(), m[1][1].unsigned_abs())
    } else if m[0][0] == 0 && m[1][1] == 0 {
        (m[1][0].unsigned_abs(), m[0][1].unsigned_abs())
    } else {
        return Err(bad("toral matrices must be diagonal or anti-diagonal"));
    };
    if n1 < 2 || n2 < 2 {
        let e = n1.min(n2) as f64;
        return Err(LabError::NonExpanding { branch: 0, min_expansion: e });
    }
    let count = (n1 * n2) as usize;
    if count > u8::MAX as usize {
        return Err(bad("too many toral branches"));
    }
    let a = Mat2::new(m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64);
    let inv = a.inverse()?;
    let mut branches = Vec::with_capacity(count);
    for i in 0..n1 {
        for j in 0..n2 {
            let lo = [i as f64 / n1 as f64, j as f64 / n2 as f64];
            let hi = [(i + 1) as f64 / n1 as f64, (j + 1) as f64 / n2 as f64];
            let c = a.apply([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]);
            branches.push(Branch {
                piece: Piece::Cell { lo, hi },
                kind: BranchKind::Toral { matrix: a, inverse: inv, shift: [c[0].floor(), c[1].floor()] },
            });
        }
    }
    ExpandingMap::new(id, Domain::Torus, branches, vec![vec![true; count]; count], alpha)
}
