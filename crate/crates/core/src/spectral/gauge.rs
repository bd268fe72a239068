//! Ground-state gauge `u = omega^(-1/2) v` turning the Laplace–Beltrami
//! operator into `div(G^-1 grad v) - (c/x^2 + mu2) v` on flat `L^2`.

use crate::frame::{FrameKind, FrameSpec, Point};
use crate::{FrameError, SpectralError};

use super::modes::singular_coefficient;

/// Effective potential `c/x^2 + mu2(x, y)` of the gauge-transformed
/// operator. For F2 frames with `phi` written `Phi`,
///
/// `mu2 = sgn(x) Phi_x / (2|x|) + Phi_x^2/4 - Phi_xx/2 - x^2 e^(2 Phi) (Phi_yy/2 + 3 Phi_y^2/4)`.
#[derive(Clone, Debug)]
pub struct GaugePotential {
    pub c_singular: f64,
    /// True when the frame's `phi` is identically zero, so `mu2 == 0`.
    pub phi_vanishes: bool,
    frame: FrameSpec,
}

impl GaugePotential {
    pub fn mu2(&self, p: Point) -> Result<f64, FrameError> {
        if p.x == 0.0 {
            return Err(FrameError::SingularPoint { x: p.x, y: p.y });
        }
        if !matches!(self.frame.kind, FrameKind::F2(_)) {
            return Ok(0.0);
        }
        let phi = self.frame.phi_jet(p);
        let x = p.x;
        let ax = x.abs();
        Ok(x.signum() * phi.dx / (2.0 * ax) + 0.25 * phi.dx * phi.dx - 0.5 * phi.dxx
            - x * x * (2.0 * phi.value).exp() * (0.5 * phi.dyy + 0.75 * phi.dy * phi.dy))
    }

    /// `c/x^2 + mu2`, the potential added to `-div(G^-1 grad)`.
    pub fn effective_potential(&self, p: Point) -> Result<f64, FrameError> {
        Ok(self.c_singular / (p.x * p.x) + self.mu2(p)?)
    }

    /// `mu = omega^(1/2) Delta omega^(-1/2) = -(c/x^2 + mu2)`.
    pub fn mu(&self, p: Point) -> Result<f64, FrameError> {
        self.effective_potential(p).map(|v| -v)
    }

    pub fn frame(&self) -> &FrameSpec {
        &self.frame
    }
}

pub fn gauge_transform(frame: &FrameSpec) -> Result<GaugePotential, SpectralError> {
    match &frame.kind {
        FrameKind::F2(phi) => Ok(GaugePotential {
            c_singular: singular_coefficient(1.0),
            phi_vanishes: phi.is_zero(),
            frame: frame.clone(),
        }),
        FrameKind::AlphaGrushin { alpha } => Ok(GaugePotential {
            c_singular: singular_coefficient(*alpha),
            phi_vanishes: true,
            frame: frame.clone(),
        }),
        other => Err(SpectralError::UnsupportedFrame(other.name())),
    }
}

/// `v = omega^(1/2) u`, unitary from `L^2(omega dx dy)` to `L^2(dx dy)`.
pub fn to_flat(frame: &FrameSpec, p: Point, u: f64) -> Result<f64, FrameError> {
    Ok(frame.metric_at(p)?.omega.sqrt() * u)
}

/// Inverse of [`to_flat`].
pub fn from_flat(frame: &FrameSpec, p: Point, v: f64) -> Result<f64, FrameError> {
    Ok(v / frame.metric_at(p)?.omega.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Domain, PhiPreset};
    use crate::quadrature;

    #[test]
    fn flat_phi_has_no_remainder() {
        let g = gauge_transform(&FrameSpec::grushin()).unwrap();
        assert_eq!(g.c_singular, 0.75);
        assert!(g.phi_vanishes);
        for i in 1..50 {
            let p = Point::new(-3.0 + 0.123 * i as f64, 0.37 * i as f64);
            if p.x != 0.0 {
                assert_eq!(g.mu2(p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn alpha_family_coefficient() {
        for alpha in [0.25, 0.5, 1.0, 2.0] {
            let g = gauge_transform(&FrameSpec::alpha_grushin(alpha).unwrap()).unwrap();
            assert_eq!(g.c_singular, 0.5 * alpha * (0.5 * alpha + 1.0));
        }
    }

    #[test]
    fn unsupported_frames() {
        assert!(gauge_transform(&FrameSpec::f1(PhiPreset::Zero)).is_err());
        assert!(gauge_transform(&FrameSpec::martinet()).is_err());
    }

    #[test]
    fn linear_phi_remainder() {
        // Phi = eps x: mu2 = sgn(x) eps / (2|x|) + eps^2 / 4
        let eps = 0.3;
        let fr = FrameSpec::f2(PhiPreset::Polynomial { coefficients: vec![vec![0.0], vec![eps]] }).with_domain(Domain::Plane);
        let g = gauge_transform(&fr).unwrap();
        for x in [-2.0f64, -0.5, 0.25, 1.0, 3.0] {
            let expected = x.signum() * eps / (2.0 * f64::abs(x)) + eps * eps / 4.0;
            assert!((g.mu2(Point::new(x, 0.4)).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn gauge_map_is_unitary() {
        // |u|^2 omega integrated against |v|^2 for a smooth bump away from x = 0
        let fr = FrameSpec::f2(PhiPreset::gaussian_bump(0.4, 0.7));
        let u = |x: f64, y: f64| (-(x - 1.2f64).powi(2) / 0.05).exp() * (1.0 + 0.3 * y.cos());
        let weighted = quadrature::adaptive(
            &|x: f64| {
                quadrature::adaptive(
                    &|y: f64| {
                        let p = Point::new(x, y);
                        u(x, y).powi(2) * fr.metric_at(p).unwrap().omega
                    },
                    0.0,
                    2.0 * std::f64::consts::PI,
                    1e-13,
                )
            },
            0.3,
            2.5,
            1e-12,
        );
        let flat = quadrature::adaptive(
            &|x: f64| {
                quadrature::adaptive(
                    &|y: f64| to_flat(&fr, Point::new(x, y), u(x, y)).unwrap().powi(2),
                    0.0,
                    2.0 * std::f64::consts::PI,
                    1e-13,
                )
            },
            0.3,
            2.5,
            1e-12,
        );
        assert!(((weighted - flat) / weighted).abs() < 1e-8);
        let p = Point::new(-0.8, 2.0);
        assert!((from_flat(&fr, p, to_flat(&fr, p, 1.7).unwrap()).unwrap() - 1.7).abs() < 1e-15);
    }
}
