//! The exp(-1/x) mollifier and the flat-ended cutoffs and bumps built from it.

use once_cell::sync::Lazy;

use crate::jet::{Jet, JetN};
use crate::quad::{adaptive_simpson, CumulativeTable};

/// Below this argument `exp(-1/x)` and all its derivatives underflow to zero.
const Q_FLOOR: f64 = 1.0 / 700.0;

/// `q(x) = exp(-1/x)` for `x > 0`, zero otherwise, composed with `x`.
pub fn q(x: Jet) -> Jet {
    if x.v() <= Q_FLOOR {
        return Jet::ZERO;
    }
    (-x.recip()).exp()
}

/// Flat nonincreasing cutoff: 1 for `x <= 0`, 0 for `x >= 1`, composed with `x`.
pub fn step_down(x: Jet) -> Jet {
    let v = x.v();
    if v <= 0.0 {
        return Jet::constant(1.0);
    }
    if v >= 1.0 {
        return Jet::constant(0.0);
    }
    let a = q(x);
    let b = q(Jet::constant(1.0) - x);
    if a == Jet::ZERO {
        return Jet::constant(1.0);
    }
    if b == Jet::ZERO {
        return Jet::constant(0.0);
    }
    // Form the smaller side directly so its derivatives carry no cancellation.
    if v < 0.5 {
        Jet::constant(1.0) - a / (a + b)
    } else {
        b / (a + b)
    }
}

/// [`step_down`] on jets of any order.
pub fn step_down_n<const N: usize>(x: JetN<N>) -> JetN<N> {
    let v = x.v();
    if v <= Q_FLOOR {
        return JetN::constant(1.0);
    }
    if v >= 1.0 - Q_FLOOR {
        return JetN::constant(0.0);
    }
    let a = x.recip().scale(-1.0).exp();
    let b = x.scale(-1.0).add_const(1.0).recip().scale(-1.0).exp();
    b.mul(a.add(b).recip())
}

/// Flat nondecreasing step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn step_up(x: Jet) -> Jet {
    Jet::constant(1.0) - step_down(x)
}

pub fn step_down_at(t: f64) -> f64 {
    step_down(Jet::constant(t)).v()
}

static STEP_TABLE: Lazy<CumulativeTable> =
    Lazy::new(|| CumulativeTable::build(&|t| step_down_at(t), &[(0.0, 1.0)], 1e-15));

/// `∫_0^x step_down`: equals `x` for `x <= 0` and `1/2` for `x >= 1`.
pub fn step_down_integral(x: f64) -> f64 {
    if x <= 0.0 {
        return x;
    }
    if x >= 1.0 {
        return 0.5;
    }
    STEP_TABLE.eval(&|t| step_down_at(t), x).0
}

static BUMP_NORM: Lazy<f64> = Lazy::new(|| {
    let raw = |t: f64| raw_bump(Jet::constant(t)).v();
    adaptive_simpson(&raw, 0.0, 1.0, 1e-18)
});

fn raw_bump(x: Jet) -> Jet {
    let v = x.v();
    if v <= 0.0 || v >= 1.0 {
        return Jet::ZERO;
    }
    q(x) * q(Jet::constant(1.0) - x)
}

/// Nonnegative bump supported on [0, 1] with unit integral.
pub fn bump(x: Jet) -> Jet {
    raw_bump(x).scale(1.0 / *BUMP_NORM)
}

static BUMP_TABLE: Lazy<CumulativeTable> =
    Lazy::new(|| CumulativeTable::build(&|t| bump(Jet::constant(t)).v(), &[(0.0, 1.0)], 1e-15));

/// `∫_0^x bump`: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn bump_integral(x: f64) -> f64 {
    bump_moments(x).0
}

/// `(∫_0^x bump, ∫_0^x u bump(u) du)`, clamped to `[0, 1]`.
pub fn bump_moments(x: f64) -> (f64, f64) {
    let x = x.clamp(0.0, 1.0);
    BUMP_TABLE.eval(&|t| bump(Jet::constant(t)).v(), x)
}

/// Width fraction of the rise and fall of [`plateau`].
pub const PLATEAU_EDGE: f64 = 0.2;

/// Flat-topped bump on [0, 1]: rises on `[0, w]`, equals 1 on `[w, 1-w]`,
/// falls on `[1-w, 1]`, with `w = PLATEAU_EDGE`.
pub fn plateau(x: Jet) -> Jet {
    let w = PLATEAU_EDGE;
    let v = x.v();
    if v <= 0.0 || v >= 1.0 {
        return Jet::ZERO;
    }
    let rise = step_up(x.scale(1.0 / w));
    let fall = step_down((x - (1.0 - w)).scale(1.0 / w));
    rise * fall
}

static PLATEAU_TABLE: Lazy<CumulativeTable> =
    Lazy::new(|| CumulativeTable::build(&|t| plateau(Jet::constant(t)).v(), &[(0.0, 1.0)], 1e-15));

/// `(∫_0^x plateau, ∫_0^x u plateau(u) du)`, clamped to `[0, 1]`.
pub fn plateau_moments(x: f64) -> (f64, f64) {
    let x = x.clamp(0.0, 1.0);
    PLATEAU_TABLE.eval(&|t| plateau(Jet::constant(t)).v(), x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_is_flat_and_symmetric() {
        for &t in &[0.1, 0.3, 0.5, 0.77] {
            let a = step_down_at(t);
            let b = step_down_at(1.0 - t);
            assert!((a + b - 1.0).abs() < 1e-15);
        }
        let j = step_down(Jet::var(1e-3));
        assert!(j.0.iter().skip(1).all(|d| d.abs() < 1e-100));
        // Maximal slope 2 at the midpoint.
        let m = step_down(Jet::var(0.5));
        assert!((m.d(1) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn step_integral_is_half_and_antisymmetric() {
        assert!((step_down_integral(1.0) - 0.5).abs() < 1e-15);
        let mid = adaptive_simpson(&step_down_at, 0.0, 0.3, 1e-15);
        assert!((step_down_integral(0.3) - mid).abs() < 1e-13);
        // Symmetry φ(x) + φ(1-x) = 1 gives ∫_0^x φ = x - 1/2 + ∫_0^{1-x} φ.
        let x = 0.8;
        assert!((step_down_integral(x) - (x - 0.5 + step_down_integral(1.0 - x))).abs() < 1e-14);
    }

    #[test]
    fn bump_has_unit_mass() {
        let v = adaptive_simpson(&|t| bump(Jet::constant(t)).v(), 0.0, 1.0, 1e-15);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn higher_order_step_agrees() {
        for &x in &[0.01, 0.2, 0.5, 0.93] {
            let a = step_down(Jet::var(x));
            let b = step_down_n(JetN::<7>::var(x)).truncate();
            for k in 0..5 {
                assert!((a.d(k) - b.d(k)).abs() < 1e-9 * (1.0 + a.d(k).abs()), "x={x} k={k}");
            }
        }
        assert!((bump_integral(0.5) - 0.5).abs() < 1e-13);
        assert!((bump_integral(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plateau_equals_one_in_the_middle() {
        assert_eq!(plateau(Jet::var(0.5)).v(), 1.0);
        assert_eq!(plateau(Jet::var(0.5)).d(1), 0.0);
        assert!(plateau(Jet::var(0.05)).v() < 1.0);
    }
}
