use super::params::HullGeometry;
use crate::error::ModelError;

/// Myring hull radius at axial station `xi` measured from the nose, m.
pub fn myring_radius(xi: f64, hull: &HullGeometry) -> Result<f64, ModelError> {
    if !xi.is_finite() || xi < 0.0 || xi > hull.l {
        return Err(ModelError::Domain {
            quantity: "xi",
            value: xi,
            domain: format!("[0, {}]", hull.l),
        });
    }
    let HullGeometry {
        a,
        a_offset,
        c,
        n,
        theta,
        d,
        l_f,
        ..
    } = *hull;
    let nose_end = a - a_offset;
    let r = if xi < nose_end {
        let s = (xi + a_offset - a) / a;
        0.5 * d * (1.0 - s * s).max(0.0).powf(1.0 / n)
    } else if xi <= l_f {
        0.5 * d
    } else {
        let t = xi - l_f;
        let tan = theta.tan();
        0.5 * d - (1.5 * d / (c * c) - tan / c) * t * t
            + (d / c.powi(3) - tan / (c * c)) * t.powi(3)
    };
    Ok(r)
}

/// Samples the profile on a uniform grid over [0, l] including both ends.
pub fn hull_profile(hull: &HullGeometry, samples: usize) -> Result<Vec<(f64, f64)>, ModelError> {
    if samples < 2 {
        return Err(ModelError::Domain {
            quantity: "samples",
            value: samples as f64,
            domain: ">= 2".into(),
        });
    }
    (0..samples)
        .map(|i| {
            let xi = if i + 1 == samples {
                hull.l
            } else {
                hull.l * i as f64 / (samples - 1) as f64
            };
            myring_radius(xi, hull).map(|r| (xi, r))
        })
        .collect()
}
