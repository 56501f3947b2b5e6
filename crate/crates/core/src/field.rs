//! Rowwise lift of the scalar play and its derivatives to space-time fields:
//! `W[y](x, t) = V[y(x, .)](t)`.

use crate::error::Result;
use crate::grid::SpaceTimeField;
use crate::hysteresis::{bouligand_fold, newton_fold, play_fold, PlayConfig};

pub fn apply_w(y: &SpaceTimeField, cfg: &PlayConfig) -> SpaceTimeField {
    let mut out = SpaceTimeField::zeros(y.mesh(), y.grid());
    for i in 0..y.n_x() {
        play_fold(y.row(i), cfg, out.row_mut(i));
    }
    out
}

/// `W^BD[y; d]`, the rowwise directional derivative of the play at `y`.
pub fn apply_w_bouligand(
    y: &SpaceTimeField,
    d: &SpaceTimeField,
    cfg: &PlayConfig,
) -> Result<SpaceTimeField> {
    y.check_shape(d, "apply_w_bouligand")?;
    let w = apply_w(y, cfg);
    let mut out = SpaceTimeField::zeros(y.mesh(), y.grid());
    for i in 0..y.n_x() {
        bouligand_fold(y.row(i), w.row(i), d.row(i), cfg, out.row_mut(i));
    }
    Ok(out)
}

/// `M^W d` with the active-branch Newton selection taken at `y_base`.
pub fn apply_w_newton(
    y_base: &SpaceTimeField,
    d: &SpaceTimeField,
    cfg: &PlayConfig,
) -> Result<SpaceTimeField> {
    y_base.check_shape(d, "apply_w_newton")?;
    let w = apply_w(y_base, cfg);
    let mut out = SpaceTimeField::zeros(y_base.mesh(), y_base.grid());
    for i in 0..y_base.n_x() {
        newton_fold(y_base.row(i), w.row(i), d.row(i), cfg, out.row_mut(i));
    }
    Ok(out)
}
