use std::fmt;
use std::sync::Arc;

use crate::dynamics::{sweep, ExpandingMap, Point, SweepSpec};
use crate::error::{LabError, Result};
use crate::linalg::LogProduct;

pub type PotentialFn = Arc<dyn Fn(&ExpandingMap, Point) -> f64 + Send + Sync>;
pub type PointMap = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// A potential: either a single-point function summed along orbits, or one
/// of the two singular-value families `φ_n = −t·log‖D f^n‖` (sup-additive)
/// and `φ_n = −t·log m(D f^n)` (sub-additive).
#[derive(Clone)]
pub enum Potential {
    Additive {
        func: PotentialFn,
        description: String,
        /// Lipschitz constant when known independently of the map.
        lipschitz: Option<f64>,
    },
    SingularUpper {
        t: f64,
    },
    SingularLower {
        t: f64,
    },
    /// A singular family of `target` pulled back through `conj`.
    PulledBackSingular {
        upper: bool,
        t: f64,
        target: Arc<ExpandingMap>,
        conj: PointMap,
    },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description())
    }
}

impl Potential {
    pub fn from_fn(
        description: impl Into<String>,
        lipschitz: Option<f64>,
        func: impl Fn(&ExpandingMap, Point) -> f64 + Send + Sync + 'static,
    ) -> Potential {
        Potential::Additive { func: Arc::new(func), description: description.into(), lipschitz }
    }

    pub fn zero() -> Potential {
        Potential::from_fn("zero", Some(0.0), |_, _| 0.0)
    }

    pub fn constant(c: f64) -> Potential {
        Potential::from_fn(format!("const c={c}"), Some(0.0), move |_, _| c)
    }

    /// `−t·log m(D_x f)`, i.e. `−t·log|f′(x)|` in 1D.
    pub fn neg_log_jacobian(t: f64) -> Potential {
        Potential::from_fn(format!("neglogjac t={t}"), None, move |map, p| {
            let d = map.derivative_at(p).expect("potential evaluated off the repeller");
            let (_, conorm) = d.singular_norms().expect("expanding maps have invertible derivatives");
            -t * conorm.ln()
        })
    }

    /// `amp·sin(2π·freq·x₁)`.
    pub fn sine(amp: f64, freq: f64) -> Potential {
        let tau = std::f64::consts::TAU;
        Potential::from_fn(format!("sine amp={amp} freq={freq}"), Some(amp.abs() * tau * freq.abs()), move |_, p| {
            amp * (tau * freq * p.coords()[0]).sin()
        })
    }

    /// `self + scale·other` for additive potentials.
    pub fn plus(&self, scale: f64, other: &Potential) -> Result<Potential> {
        match (self, other) {
            (
                Potential::Additive { func: f, description: d1, lipschitz: l1 },
                Potential::Additive { func: g, description: d2, lipschitz: l2 },
            ) => {
                let (f, g) = (f.clone(), g.clone());
                let lip = match (l1, l2) {
                    (Some(a), Some(b)) => Some(a + scale.abs() * b),
                    _ => None,
                };
                Ok(Potential::from_fn(format!("{d1} + {scale}*({d2})"), lip, move |m, p| f(m, p) + scale * g(m, p)))
            }
            _ => Err(LabError::BadSpec("only additive potentials can be summed".into())),
        }
    }

    /// `F ∘ φ`: this potential (defined for `target`) pulled back to a map
    /// semi-conjugated onto `target` by `conj`.
    pub fn pull_back(&self, target: &ExpandingMap, conj: PointMap) -> Potential {
        match self {
            Potential::Additive { func, description, .. } => {
                let func = func.clone();
                let target = target.clone();
                let conj2 = conj.clone();
                Potential::from_fn(format!("({description})∘h"), None, move |_, p| func(&target, conj2(p)))
            }
            Potential::SingularUpper { t } => {
                Potential::PulledBackSingular { upper: true, t: *t, target: Arc::new(target.clone()), conj }
            }
            Potential::SingularLower { t } => {
                Potential::PulledBackSingular { upper: false, t: *t, target: Arc::new(target.clone()), conj }
            }
            Potential::PulledBackSingular { upper, t, target: inner, conj: inner_conj } => {
                let inner_conj = inner_conj.clone();
                Potential::PulledBackSingular {
                    upper: *upper,
                    t: *t,
                    target: inner.clone(),
                    conj: Arc::new(move |p| inner_conj(conj(p))),
                }
            }
        }
    }

    pub fn description(&self) -> String {
        match self {
            Potential::Additive { description, .. } => description.clone(),
            Potential::SingularUpper { t } => format!("singular_upper t={t}"),
            Potential::SingularLower { t } => format!("singular_lower t={t}"),
            Potential::PulledBackSingular { upper, t, .. } => {
                let kind = if *upper { "singular_upper" } else { "singular_lower" };
                format!("({kind} t={t})∘h")
            }
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Potential::Additive { .. })
    }

    pub fn is_singular(&self) -> bool {
        !self.is_additive()
    }

    /// The same singular family at another parameter `t`.
    pub fn with_t(&self, t: f64) -> Potential {
        match self {
            Potential::SingularUpper { .. } => Potential::SingularUpper { t },
            Potential::SingularLower { .. } => Potential::SingularLower { t },
            other => other.clone(),
        }
    }

    /// Lipschitz constant on `map`'s pieces, when it can be bounded.
    pub fn lipschitz_on(&self, map: &ExpandingMap) -> Option<f64> {
        match self {
            Potential::Additive { lipschitz: Some(l), .. } => Some(*l),
            Potential::Additive { description, .. } if description.starts_with("neglogjac") => {
                let t: f64 = description.trim_start_matches("neglogjac t=").parse().ok()?;
                let lip = map
                    .branches()
                    .iter()
                    .map(|b| b.kind.derivative_lipschitz())
                    .try_fold(0.0_f64, |acc, l| l.map(|l| acc.max(l)))?;
                Some(t.abs() * lip / map.min_expansion())
            }
            _ => None,
        }
    }

    /// Single-point value of an additive potential.
    pub fn eval(&self, map: &ExpandingMap, p: Point) -> Option<f64> {
        match self {
            Potential::Additive { func, .. } => Some(func(map, p)),
            _ => None,
        }
    }

    /// `φ_n(x)` by forward iteration from `x`.
    pub fn orbit_value(&self, map: &ExpandingMap, x: Point, n: usize) -> Result<f64> {
        match self {
            Potential::Additive { func, .. } => {
                let mut p = x;
                let mut sum = 0.0;
                for step in 0..n {
                    sum += func(map, p);
                    p = map.apply(p).ok_or(LabError::EscapedRepeller { step })?.1;
                }
                Ok(sum)
            }
            Potential::SingularUpper { t } => Ok(-t * map.cocycle(x, n)?.log_norm),
            Potential::SingularLower { t } => Ok(-t * map.cocycle(x, n)?.log_conorm),
            Potential::PulledBackSingular { upper, t, target, conj } => {
                let c = target.cocycle(conj(x), n)?;
                Ok(-t * if *upper { c.log_norm } else { c.log_conorm })
            }
        }
    }

    /// `log` weights `φ_n(x_w)` of all `n`-cylinders of `map`, where the
    /// singular families are evaluated blockwise with block length `block`
    /// (`block = n` gives the plain `n`-step family).
    pub fn cylinder_weights(&self, map: &ExpandingMap, n: usize, block: usize, cap: usize) -> Result<Vec<f64>> {
        let mut spec = SweepSpec::deterministic(map, n, cap);
        spec.block = block;
        self.sweep_weights(spec)
    }

    /// `φ_n` at every representative of a (possibly non-autonomous) sweep;
    /// any additive function already set on `spec` is replaced.
    pub fn sweep_weights<'a>(&'a self, mut spec: SweepSpec<'a>) -> Result<Vec<f64>> {
        if let Potential::Additive { func, .. } = self {
            spec.additive = Some(&**func);
        }
        let n = spec.fibers.len();
        let block = spec.block;
        let rows = sweep(&spec)?;
        match self {
            Potential::Additive { .. } => Ok(rows.iter().map(|r| r.birkhoff).collect()),
            Potential::SingularUpper { t } => Ok(rows.iter().map(|r| -t * r.log_norm).collect()),
            Potential::SingularLower { t } => Ok(rows.iter().map(|r| -t * r.log_conorm).collect()),
            Potential::PulledBackSingular { upper, t, target, conj } => {
                let b = block.clamp(1, n);
                rows.iter()
                    .map(|r| {
                        // blockwise cocycle of the target along the image orbit
                        let mut p = conj(r.point);
                        let mut total = 0.0;
                        let mut prod = LogProduct::new(target.dim());
                        for j in 0..n {
                            let (i, next) = target.apply(p).ok_or(LabError::EscapedRepeller { step: j })?;
                            prod.push_left(&target.branch_derivative(i, p));
                            p = next;
                            if (j + 1) % b == 0 || j + 1 == n {
                                let (ln, lc) = prod.log_norms()?;
                                total += if *upper { ln } else { lc };
                                prod = LogProduct::new(target.dim());
                            }
                        }
                        Ok(-t * total)
                    })
                    .collect()
            }
        }
    }

    /// Parses `zero`, `const c=…`, `neglogjac t=…`, `sine amp=… freq=…`,
    /// `singular_upper t=…` or `singular_lower t=…`.
    pub fn parse(text: &str) -> Result<Potential> {
        let kind = text.split_whitespace().next().ok_or_else(|| LabError::BadSpec("empty potential".into()))?;
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            for tok in text.split_whitespace().skip(1) {
                if let Some((k, v)) = tok.split_once('=') {
                    if k == key {
                        return v.parse().map_err(|_| LabError::BadSpec(format!("{key}={v} is not a number")));
                    }
                }
            }
            default.ok_or_else(|| LabError::BadSpec(format!("potential {kind} needs {key}")))
        };
        let pot = match kind {
            "zero" => Potential::zero(),
            "const" => Potential::constant(get("c", None)?),
            "neglogjac" => Potential::neg_log_jacobian(get("t", Some(1.0))?),
            "sine" => Potential::sine(get("amp", None)?, get("freq", Some(1.0))?),
            "singular_upper" => Potential::SingularUpper { t: get("t", None)? },
            "singular_lower" => Potential::SingularLower { t: get("t", None)? },
            other => return Err(LabError::BadSpec(format!("unknown potential {other:?}"))),
        };
        Ok(pot)
    }
}
