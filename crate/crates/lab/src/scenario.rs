//! Initial profile curves.

use std::f64::consts::FRAC_1_SQRT_2;

use clap::ValueEnum;
use lagflow_core::resample::resample_arclength_to;
use lagflow_core::{DiscreteCurve, Vec2};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Oversampling factor for seeds built in a non-arclength parameter.
const OVERSAMPLE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ScenarioKind {
    Circle,
    OffsetCircle,
    PerturbedSymmetric,
    FigureEight,
    Dumbbell,
    Chekanov,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Circle => "circle",
            ScenarioKind::OffsetCircle => "offset_circle",
            ScenarioKind::PerturbedSymmetric => "perturbed_symmetric",
            ScenarioKind::FigureEight => "figure_eight",
            ScenarioKind::Dumbbell => "dumbbell",
            ScenarioKind::Chekanov => "chekanov",
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A scenario and all its parameters; each kind reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: u32,
    /// Number of nodes.
    #[serde(rename = "N")]
    pub nodes: usize,
    /// Radius, or overall scale for the figure-eight and the Chekanov curve.
    #[serde(rename = "R")]
    pub radius: f64,
    /// Circle centre; `None` means the origin for `circle` and `(2R, 0)` for
    /// `offset_circle`.
    pub center: Option<[f64; 2]>,
    pub a: f64,
    pub l: u32,
    pub omega0: u32,
    /// Dumbbell lobe centres at `(±separation, 0)`.
    pub separation: f64,
    /// Dumbbell neck half-width.
    pub neck_width: f64,
    /// Dumbbell blend length.
    pub blend: f64,
    pub kappa: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::Circle,
            n: 2,
            nodes: 512,
            radius: 1.0,
            center: None,
            a: 0.1,
            l: 9,
            omega0: 1,
            separation: 1.5,
            neck_width: 0.25,
            blend: 0.1,
            kappa: FRAC_1_SQRT_2,
        }
    }
}

fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidSpec(msg.into())
}

impl ScenarioSpec {
    pub fn of(kind: ScenarioKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn center(&self) -> Vec2 {
        match (self.center, self.kind) {
            (Some([x, y]), _) => Vec2::new(x, y),
            (None, ScenarioKind::OffsetCircle) => Vec2::new(2.0 * self.radius, 0.0),
            (None, _) => Vec2::ZERO,
        }
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.nodes < 16 {
            return Err(invalid(format!("N must be at least 16, got {}", self.nodes)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(format!("R must be positive, got {}", self.radius)));
        }
        match self.kind {
            ScenarioKind::PerturbedSymmetric => {
                if !(0.0..1.0).contains(&self.a) {
                    return Err(invalid(format!("perturbed_symmetric needs 0 <= a < 1, got {}", self.a)));
                }
                if self.l == 0 || self.omega0 == 0 {
                    return Err(invalid("perturbed_symmetric needs l >= 1 and omega0 >= 1"));
                }
            }
            ScenarioKind::Dumbbell => {
                if !(self.neck_width > 0.0 && self.neck_width < self.radius) {
                    return Err(invalid(format!("dumbbell needs 0 < neck_width < R, got {}", self.neck_width)));
                }
                if !(self.blend > 0.0) {
                    return Err(invalid("dumbbell needs blend > 0"));
                }
                if !(self.separation > self.radius * (1.0 - self.neck_width * self.neck_width).sqrt()) {
                    return Err(invalid("dumbbell lobes overlap; increase separation"));
                }
            }
            ScenarioKind::FigureEight if self.n != 1 => {
                return Err(invalid("figure_eight passes through the origin and needs n = 1"));
            }
            ScenarioKind::Chekanov if !(self.kappa > 0.0) => return Err(invalid("chekanov needs kappa > 0")),
            _ => {}
        }
        Ok(())
    }

    /// `l ≥ 1 + 4nω₀` for the perturbed symmetric seed.
    pub fn symmetry_hypothesis(&self) -> bool {
        self.l >= 1 + 4 * self.n * self.omega0
    }
}

/// Dumbbell half-height over `x`: the lobe circles blended into a neck of
/// half-width `w` by `B = ½(1 - tanh((|x| - x_j)/λ))`, where `x_j` is the
/// point at which the circle height equals `w`.
fn dumbbell_height(spec: &ScenarioSpec, x: f64) -> f64 {
    let (r, d, w, lambda) = (spec.radius, spec.separation, spec.neck_width, spec.blend);
    let u = x.abs() - d;
    let circle_sq = r * r - u * u;
    let x_join = d - (r * r - w * w).sqrt();
    let b = 0.5 * (1.0 - ((x.abs() - x_join) / lambda).tanh());
    (b * w * w + (1.0 - b) * circle_sq).max(0.0).sqrt()
}

pub fn generate(spec: &ScenarioSpec) -> LabResult<DiscreteCurve> {
    spec.validate()?;
    let (nodes, n, big_r) = (spec.nodes, spec.n, spec.radius);
    let curve = match spec.kind {
        ScenarioKind::Circle | ScenarioKind::OffsetCircle => {
            let c = spec.center();
            DiscreteCurve::from_fn(nodes, n, |p| c + Vec2::from_polar(big_r, p))?
        }
        ScenarioKind::PerturbedSymmetric => {
            let (a, l, w) = (spec.a, f64::from(spec.l), f64::from(spec.omega0));
            DiscreteCurve::from_fn(nodes, n, |p| Vec2::from_polar(big_r * (1.0 + a * (l * p).cos()), w * p))?
        }
        ScenarioKind::FigureEight => {
            // Bernoulli lemniscate r² = cos 2φ
            DiscreteCurve::from_fn(nodes, n, |t| {
                let (s, c) = t.sin_cos();
                let q = big_r / (1.0 + s * s);
                Vec2::new(q * c, q * s * c)
            })?
        }
        ScenarioKind::Dumbbell => {
            let reach = spec.separation + big_r;
            let fine = DiscreteCurve::from_fn(OVERSAMPLE * nodes, n, |psi| {
                let x = reach * psi.cos();
                let y = dumbbell_height(spec, x);
                Vec2::new(x, if psi.sin() < 0.0 { -y } else { y })
            })?;
            resample_arclength_to(&fine, nodes)?
        }
        ScenarioKind::Chekanov => {
            let kappa = spec.kappa;
            DiscreteCurve::from_fn(nodes, n, |p| {
                let (s, c) = p.sin_cos();
                let first = Vec2::from_polar(c, kappa * c);
                let second = Vec2::from_polar(kappa * s, std::f64::consts::FRAC_PI_2 - kappa * c);
                (first + second) * big_r
            })?
        }
    };
    Ok(curve)
}

/// Fourier-perturbed circle `r = R(1 + Σ a_m cos(mφ + p_m))` used by the
/// randomized suites.
pub fn fourier_circle(nodes: usize, n: u32, radius: f64, modes: &[(u32, f64, f64)]) -> LabResult<DiscreteCurve> {
    Ok(DiscreteCurve::from_fn(nodes, n, |p| {
        let wobble: f64 = modes.iter().map(|(m, a, ph)| a * (f64::from(*m) * p + ph).cos()).sum();
        Vec2::from_polar(radius * (1.0 + wobble), p)
    })?)
}

/// Every scenario with its default parameters, `n = 1` where required.
pub fn catalogue() -> Vec<ScenarioSpec> {
    [
        ScenarioKind::Circle,
        ScenarioKind::OffsetCircle,
        ScenarioKind::PerturbedSymmetric,
        ScenarioKind::FigureEight,
        ScenarioKind::Dumbbell,
        ScenarioKind::Chekanov,
    ]
    .into_iter()
    .map(|kind| {
        let n = if matches!(kind, ScenarioKind::FigureEight | ScenarioKind::OffsetCircle) { 1 } else { 2 };
        ScenarioSpec { n, nodes: 256, ..ScenarioSpec::of(kind) }
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lagflow_core::exec::Mode;
    use lagflow_core::geometry::geometry;
    use lagflow_core::predicates::{is_embedded, lagrangian_embedding};
    use lagflow_core::topology::topology;
    use lagflow_core::LagrangianEmbedding;
    use std::f64::consts::TAU;

    #[test]
    fn circle_speed_is_n_over_r() {
        let spec = ScenarioSpec { radius: 1.5, nodes: 256, n: 3, ..ScenarioSpec::of(ScenarioKind::Circle) };
        let g = geometry(&generate(&spec).unwrap()).unwrap();
        assert!(g.f.iter().all(|f| (f - 2.0).abs() < 1e-6));
    }

    #[test]
    fn perturbed_symmetric_is_exactly_symmetric() {
        let spec = ScenarioSpec { nodes: 513, ..ScenarioSpec::of(ScenarioKind::PerturbedSymmetric) };
        let c = generate(&spec).unwrap();
        let shift = spec.nodes / spec.l as usize;
        let turned = c.rotated(TAU * f64::from(spec.omega0) / f64::from(spec.l));
        let shifted = c.shifted(shift);
        for (p, q) in turned.points().iter().zip(shifted.points()) {
            assert!(p.dist(*q) < 1e-12);
        }
        assert!(spec.symmetry_hypothesis());
    }

    #[test]
    fn figure_eight_has_zero_area() {
        let spec = ScenarioSpec { n: 1, ..ScenarioSpec::of(ScenarioKind::FigureEight) };
        let c = generate(&spec).unwrap();
        let top = topology(&c, &geometry(&c).unwrap()).unwrap();
        assert!(top.area.abs() < 1e-10);
        assert!(generate(&ScenarioSpec { n: 2, ..spec }).is_err());
    }

    #[test]
    fn dumbbell_shape() {
        let spec = ScenarioSpec::of(ScenarioKind::Dumbbell);
        let c = generate(&spec).unwrap();
        let g = geometry(&c).unwrap();
        let top = topology(&c, &g).unwrap();
        assert_eq!((top.rot, top.wind0), (1, Some(1)));
        // the neck passes the origin at about the neck width
        assert!((c.min_r() - spec.neck_width).abs() < 0.02, "{}", c.min_r());
        assert!(top.area > 2.0 * std::f64::consts::PI * 0.8);
        // equal arclength spacing after the oversampled build
        assert!(c.max_segment() / c.min_segment() < 1.0 + 1e-6);
    }

    #[test]
    fn chekanov_curve() {
        let spec = ScenarioSpec::of(ScenarioKind::Chekanov);
        let c = generate(&spec).unwrap();
        let g = geometry(&c).unwrap();
        let top = topology(&c, &g).unwrap();
        assert_eq!(top.rot, 1);
        assert!(is_embedded(Mode::Sequential, c.points()));
        // z(π/2) = iκ and z(3π/2) = -iκ, so the curve meets its reflection
        let quarter = spec.nodes / 4;
        assert!(c.point(quarter).dist(Vec2::new(0.0, spec.kappa)) < 1e-15);
        assert!(c.point(3 * quarter).dist(-Vec2::new(0.0, spec.kappa)) < 1e-15);
        assert_eq!(lagrangian_embedding(Mode::Sequential, &c, &g), LagrangianEmbedding::NotEmbedded);
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            ScenarioSpec { a: 1.0, ..ScenarioSpec::of(ScenarioKind::PerturbedSymmetric) },
            ScenarioSpec { l: 0, ..ScenarioSpec::of(ScenarioKind::PerturbedSymmetric) },
            ScenarioSpec { neck_width: 0.0, ..ScenarioSpec::of(ScenarioKind::Dumbbell) },
            ScenarioSpec { nodes: 4, ..ScenarioSpec::default() },
            ScenarioSpec { radius: -1.0, ..ScenarioSpec::default() },
        ];
        for spec in bad {
            assert!(matches!(generate(&spec), Err(LabError::InvalidSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn catalogue_generates() {
        for spec in catalogue() {
            generate(&spec).unwrap();
        }
    }
}
