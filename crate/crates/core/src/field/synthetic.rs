//! Closed-form test fields.

use serde_json::Value;

use super::{BoxRegion, PlanarField, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Named closed-form fields with exact values, gradients and indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Synthetic {
    /// `u ≡ 0`, empty patch.
    Zero { omega: f64 },
    /// `u ≡ c`, empty patch.
    Constant { c: f64, omega: f64 },
    /// `u = x1`, empty patch.
    Linear { omega: f64 },
    /// `u = s (x1² - x2²)`, empty patch.
    Saddle { scale: f64, omega: f64 },
    /// `u = s x1 x2`, empty patch.
    Cross { scale: f64, omega: f64 },
    /// `u = |x|²`, empty patch.
    Radial { omega: f64 },
    /// `u = x1³` with the unit disk as patch.
    Cubic { omega: f64 },
    /// `u = x1⁴`, empty patch.
    Quartic { omega: f64 },
    /// `u = Ω x2²`: a cusp whose patch is the positive `x1` ray (measure zero).
    CuspRay { omega: f64 },
    /// `u = -(1-2Ω) x2² / 2` with the whole plane as patch.
    CuspComplement { omega: f64 },
    /// `u = (x1² - x2²) log(1/|x|)` with the 90° sector `-π/4 ≤ θ < π/4` as patch.
    CornerLog { omega: f64 },
    /// Stream function of the unit-disk patch.
    Rankine { omega: f64 },
}

pub const SYNTHETIC_IDS: [&str; 12] = [
    "zero",
    "constant",
    "linear",
    "saddle",
    "cross",
    "radial",
    "cubic",
    "quartic",
    "cusp_ray",
    "cusp_complement",
    "corner_log",
    "rankine",
];

impl Synthetic {
    /// Looks up an expression by id. Recognized parameters: `omega`
    /// (default 0.25), `c` (constant, default 1) and `scale` (default 1).
    pub fn from_id(id: &str, params: &Value) -> Result<Self> {
        let get = |k: &str, d: f64| -> Result<f64> {
            match params.get(k) {
                None | Some(Value::Null) => Ok(d),
                Some(v) => v.as_f64().ok_or_else(|| Error::InvalidParameter(format!("`{k}` must be a number"))),
            }
        };
        let omega = get("omega", 0.25)?;
        let scale = get("scale", 1.0)?;
        Ok(match id {
            "zero" => Self::Zero { omega },
            "constant" => Self::Constant { c: get("c", 1.0)?, omega },
            "linear" => Self::Linear { omega },
            "saddle" => Self::Saddle { scale, omega },
            "cross" => Self::Cross { scale, omega },
            "radial" => Self::Radial { omega },
            "cubic" => Self::Cubic { omega },
            "quartic" => Self::Quartic { omega },
            "cusp_ray" => Self::CuspRay { omega },
            "cusp_complement" => Self::CuspComplement { omega },
            "corner_log" => Self::CornerLog { omega },
            "rankine" => Self::Rankine { omega },
            other => return Err(Error::UnknownExpression(other.to_string())),
        })
    }

    pub fn omega(&self) -> f64 {
        match *self {
            Self::Zero { omega }
            | Self::Constant { omega, .. }
            | Self::Linear { omega }
            | Self::Saddle { omega, .. }
            | Self::Cross { omega, .. }
            | Self::Radial { omega }
            | Self::Cubic { omega }
            | Self::Quartic { omega }
            | Self::CuspRay { omega }
            | Self::CuspComplement { omega }
            | Self::CornerLog { omega }
            | Self::Rankine { omega } => omega,
        }
    }

    pub fn indicator(&self, p: Point) -> bool {
        match self {
            Self::CuspComplement { .. } => true,
            // half-open so that the four rotated copies tile the plane
            Self::CornerLog { .. } => p[0] > p[1] && p[0] >= -p[1],
            Self::Rankine { .. } | Self::Cubic { .. } => p[0].hypot(p[1]) < 1.0 - crate::geometry::BOUNDARY_TIE,
            _ => false,
        }
    }

    /// Source term `(1-2Ω) I_D - 2Ω I_{D^c}` at `p`.
    pub fn source(&self, p: Point) -> f64 {
        let w = self.omega();
        if self.indicator(p) {
            1.0 - 2.0 * w
        } else {
            -2.0 * w
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let [x, y] = p;
        match *self {
            Self::Zero { .. } => 0.0,
            Self::Constant { c, .. } => c,
            Self::Linear { .. } => x,
            Self::Saddle { scale, .. } => scale * (x * x - y * y),
            Self::Cross { scale, .. } => scale * x * y,
            Self::Radial { .. } => x * x + y * y,
            Self::Cubic { .. } => x * x * x,
            Self::Quartic { .. } => x.powi(4),
            Self::CuspRay { omega } => omega * y * y,
            Self::CuspComplement { omega } => -0.5 * (1.0 - 2.0 * omega) * y * y,
            Self::CornerLog { .. } => {
                let r2 = x * x + y * y;
                if r2 == 0.0 {
                    0.0
                } else {
                    -0.5 * (x * x - y * y) * r2.ln()
                }
            }
            Self::Rankine { omega } => {
                let r2 = x * x + y * y;
                if r2 <= 1.0 {
                    0.25 * (1.0 - 2.0 * omega) * (1.0 - r2)
                } else {
                    -0.25 * r2.ln() + 0.5 * omega * (r2 - 1.0)
                }
            }
        }
    }

    pub fn grad(&self, p: Point) -> Point {
        let [x, y] = p;
        match *self {
            Self::Zero { .. } | Self::Constant { .. } => [0.0, 0.0],
            Self::Linear { .. } => [1.0, 0.0],
            Self::Saddle { scale, .. } => [2.0 * scale * x, -2.0 * scale * y],
            Self::Cross { scale, .. } => [scale * y, scale * x],
            Self::Radial { .. } => [2.0 * x, 2.0 * y],
            Self::Cubic { .. } => [3.0 * x * x, 0.0],
            Self::Quartic { .. } => [4.0 * x.powi(3), 0.0],
            Self::CuspRay { omega } => [0.0, 2.0 * omega * y],
            Self::CuspComplement { omega } => [0.0, -(1.0 - 2.0 * omega) * y],
            Self::CornerLog { .. } => {
                let r2 = x * x + y * y;
                if r2 == 0.0 {
                    return [0.0, 0.0];
                }
                let l = -0.5 * r2.ln();
                let q = (x * x - y * y) / r2;
                [2.0 * x * l - q * x, -2.0 * y * l - q * y]
            }
            Self::Rankine { omega } => {
                let r2 = x * x + y * y;
                let c = if r2 <= 1.0 { -0.5 * (1.0 - 2.0 * omega) } else { -0.5 / r2 + omega };
                [c * x, c * y]
            }
        }
    }

    /// Samples the expression and its indicator on the cell centers of `bx`.
    pub fn sample(&self, bx: &BoxRegion, h: f64) -> Result<ScalarField> {
        ScalarField::from_fn(bx, h, self.omega(), |p| self.eval(p), |p| self.indicator(p))
    }
}

impl PlanarField for Synthetic {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.eval(p))
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        Ok(self.grad(p))
    }
}

/// Samples the closed form named `id` on the grid of `bx`.
pub fn synthetic_field(id: &str, params: &Value, bx: &BoxRegion, h: f64) -> Result<ScalarField> {
    Synthetic::from_id(id, params)?.sample(bx, h)
}
