//! Changes of the angle `θ ↦ θ + g(φ, θ)` on grid functions.

use super::{KamError, TorusGrid};
use crate::fourier::{eval_spectrum, spectrum};
use crate::par::{map_range, Exec};

/// `u(φ, θ + shift(φ, θ))`, resampled through the row-wise trigonometric interpolant.
pub fn compose_theta(u: &TorusGrid, shift: &TorusGrid) -> TorusGrid {
    assert_eq!((u.d, u.g), (shift.d, shift.g));
    let g = u.g;
    let h = 2.0 * std::f64::consts::PI / g as f64;
    let rows: Vec<Vec<f64>> = map_range(Exec::default(), u.rows(), |r| {
        let spec = spectrum(&u.values[r * g..(r + 1) * g]);
        (0..g).map(|c| eval_spectrum(&spec, c as f64 * h + shift.values[r * g + c])).collect()
    });
    TorusGrid { d: u.d, g, values: rows.concat() }
}

/// `ĝ` with `y = θ + g(φ, θ) ⇔ θ = y + ĝ(φ, y)`, by the fixed point
/// `ĝ(y) = -g(φ, y + ĝ(y))` iterated to 1e-13.
pub fn invert_shift(shift: &TorusGrid) -> Result<TorusGrid, KamError> {
    let slope = shift.d_theta().max_abs();
    if slope >= 1.0 {
        return Err(KamError::Composition(slope));
    }
    let g = shift.g;
    let h = 2.0 * std::f64::consts::PI / g as f64;
    let rows: Vec<Result<Vec<f64>, KamError>> = map_range(Exec::default(), shift.rows(), |r| {
        let row = &shift.values[r * g..(r + 1) * g];
        let spec = spectrum(row);
        let mut hat: Vec<f64> = row.iter().map(|v| -v).collect();
        for _ in 0..1000 {
            let mut change: f64 = 0.0;
            for (c, slot) in hat.iter_mut().enumerate() {
                let next = -eval_spectrum(&spec, c as f64 * h + *slot);
                change = change.max((next - *slot).abs());
                *slot = next;
            }
            if change <= 1e-13 {
                return Ok(hat);
            }
        }
        Err(KamError::Composition(slope))
    });
    let mut values = Vec::with_capacity(shift.values.len());
    for r in rows {
        values.extend(r?);
    }
    Ok(TorusGrid { d: shift.d, g, values })
}
