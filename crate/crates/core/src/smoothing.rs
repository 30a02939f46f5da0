//! φ-smooth perturbation of adversarial skeletons.
//!
//! Each model perturbs exactly its designated parameters: every table entry
//! (tabular), every jump with break points fixed (step function), the nonzero
//! coefficients with supports fixed (polynomial), and the fixed costs (cost
//! sharing). Draws come from a counter-based generator keyed by
//! `(seed, parameter index)`, so the result does not depend on evaluation
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{CostModel, CostSharingCosts, PolynomialCosts, StepFunctionCosts, TabularCosts};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::scalar::Scalar;

/// Shape of a φ-smooth distribution on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// Uniform on the width-`1/φ` window centred at `center`, slid (not
    /// truncated) to stay inside `[0, 1]`.
    UniformWindow { center: f64 },
    /// Uniform on `[0, 1/φ]`; the extremal family for the truncated
    /// reciprocal bound.
    UniformLow,
}

/// A distribution on `[0, 1]` with density exactly `φ` on its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiSmoothFamily {
    pub kind: FamilyKind,
    pub phi: f64,
}

impl PhiSmoothFamily {
    pub fn new(kind: FamilyKind, phi: f64) -> Result<Self> {
        if !(phi >= 1.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "phi must be a finite value >= 1, got {phi}"
            )));
        }
        if let FamilyKind::UniformWindow { center } = kind {
            if !(0.0..=1.0).contains(&center) {
                return Err(Error::InvalidParameter(format!(
                    "window center {center} outside [0, 1]"
                )));
            }
        }
        Ok(Self { kind, phi })
    }

    pub fn uniform_low(phi: f64) -> Result<Self> {
        Self::new(FamilyKind::UniformLow, phi)
    }

    pub fn window(center: f64, phi: f64) -> Result<Self> {
        Self::new(FamilyKind::UniformWindow { center }, phi)
    }

    /// Support `[lo, lo + 1/φ]`.
    pub fn support(&self) -> (f64, f64) {
        let width = 1.0 / self.phi;
        let lo = match self.kind {
            FamilyKind::UniformLow => 0.0,
            FamilyKind::UniformWindow { center } => (center - width / 2.0).clamp(0.0, 1.0 - width),
        };
        (lo, (lo + width).min(1.0))
    }

    /// Maps a unit uniform draw into the support. Monotone in `u`, which is
    /// what paired comparisons between families rely on.
    #[inline]
    pub fn from_unit(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        (lo + u / self.phi).min(hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_unit(rng.random::<f64>())
    }

    /// A strictly positive sample; a literal 0.0 is redrawn.
    pub fn sample_positive<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.sample(rng);
            if x > 0.0 {
                return x;
            }
        }
    }
}

/// Samples one value from `family`.
pub fn sample_phi_smooth<R: Rng + ?Sized>(family: &PhiSmoothFamily, rng: &mut R) -> f64 {
    family.sample(rng)
}

/// Which family the perturbation draws each parameter from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationFamily {
    /// Uniform on `[0, 1/φ]`; nominal values are ignored.
    UniformLow,
    /// Window of width `1/φ` around each nominal value.
    UniformWindow,
}

impl PerturbationFamily {
    pub fn name(self) -> &'static str {
        match self {
            PerturbationFamily::UniformLow => "uniform_low",
            PerturbationFamily::UniformWindow => "uniform_window",
        }
    }
}

impl std::fmt::Display for PerturbationFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PerturbationFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_low" | "low" => Ok(PerturbationFamily::UniformLow),
            "uniform_window" | "window" => Ok(PerturbationFamily::UniformWindow),
            _ => Err(Error::InvalidParameter(format!(
                "unknown perturbation family `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub phi: f64,
    pub family: PerturbationFamily,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(phi: f64, family: PerturbationFamily, seed: u64) -> Self {
        Self { phi, family, seed }
    }
}

/// Generator for the `index`-th draw stream of `seed`.
pub fn parameter_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Replaces the designated parameters of `skeleton` with independent
/// φ-smooth draws. Strategy sets, graphs, break points and supports are
/// carried over unchanged.
pub fn perturb<S: Scalar>(skeleton: &Game<S>, spec: &PerturbationSpec) -> Result<Game<S>> {
    PhiSmoothFamily::uniform_low(spec.phi)?;
    let mut index = 0u64;
    let mut draw = |nominal: S| -> Result<S> {
        let family = match spec.family {
            PerturbationFamily::UniformLow => PhiSmoothFamily::uniform_low(spec.phi)?,
            PerturbationFamily::UniformWindow => {
                PhiSmoothFamily::window(nominal.to_f64().clamp(0.0, 1.0), spec.phi)?
            }
        };
        let mut rng = parameter_rng(spec.seed, index);
        index += 1;
        Ok(S::from_f64(family.sample_positive(&mut rng)))
    };
    let costs = match skeleton.costs() {
        CostModel::Tabular(t) => CostModel::Tabular(TabularCosts {
            table: t
                .table
                .iter()
                .map(|row| row.iter().map(|&c| draw(c)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
        }),
        CostModel::StepFunction(s) => CostModel::StepFunction(StepFunctionCosts {
            breaks: s.breaks.clone(),
            jumps: s
                .jumps
                .iter()
                .map(|row| row.iter().map(|&a| draw(a)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
        }),
        CostModel::Polynomial(p) => CostModel::Polynomial(PolynomialCosts {
            degree: p.degree,
            coefficients: p
                .coefficients
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&a| if a == S::zero() { Ok(a) } else { draw(a) })
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?,
        }),
        CostModel::CostSharing(c) => CostModel::CostSharing(CostSharingCosts {
            fixed: c.fixed.iter().map(|&a| draw(a)).collect::<Result<_>>()?,
        }),
    };
    skeleton.with_costs(costs)
}
