//! Truncated Taylor jets: a value together with its first four derivatives.
//!
//! Every smooth function in the crate evaluates to a [`Jet`], so curvature
//! formulas never need finite differences. Arithmetic follows the Leibniz
//! rule and composition follows Faà di Bruno, both truncated at order 4.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order carried by a jet.
pub const ORDER: usize = 4;

/// `[f, f', f'', f''', f'''']` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub [f64; 5]);

impl Jet {
    pub const ZERO: Jet = Jet([0.0; 5]);

    pub fn constant(c: f64) -> Jet {
        Jet([c, 0.0, 0.0, 0.0, 0.0])
    }

    /// The identity function evaluated at `t`.
    pub fn var(t: f64) -> Jet {
        Jet([t, 1.0, 0.0, 0.0, 0.0])
    }

    /// Affine map `a + b t` evaluated at `t`.
    pub fn affine(t: f64, a: f64, b: f64) -> Jet {
        Jet([a + b * t, b, 0.0, 0.0, 0.0])
    }

    #[inline]
    pub fn v(&self) -> f64 {
        self.0[0]
    }

    /// Derivative of order `k` (0 is the value).
    #[inline]
    pub fn d(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn scale(self, c: f64) -> Jet {
        let a = self.0;
        Jet([c * a[0], c * a[1], c * a[2], c * a[3], c * a[4]])
    }

    pub fn add_const(mut self, c: f64) -> Jet {
        self.0[0] += c;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Composition `outer ∘ self`, where `outer` holds the derivatives of the
    /// outer function evaluated at `self.v()`.
    pub fn compose(self, outer: Jet) -> Jet {
        let g = self.0;
        let f = outer.0;
        let (g1, g2, g3, g4) = (g[1], g[2], g[3], g[4]);
        let g1s = g1 * g1;
        Jet([
            f[0],
            f[1] * g1,
            f[2] * g1s + f[1] * g2,
            f[3] * g1s * g1 + 3.0 * f[2] * g1 * g2 + f[1] * g3,
            f[4] * g1s * g1s
                + 6.0 * f[3] * g1s * g2
                + f[2] * (3.0 * g2 * g2 + 4.0 * g1 * g3)
                + f[1] * g4,
        ])
    }

    /// Apply a scalar function given its value and four derivatives at `self.v()`.
    pub fn map(self, derivs: impl FnOnce(f64) -> [f64; 5]) -> Jet {
        let outer = Jet(derivs(self.v()));
        self.compose(outer)
    }

    /// Jet of the inverse function at `self.v()`, for a strictly monotone
    /// function whose jet at `x` is `self`. The value slot of the result is
    /// `x`, supplied by the caller.
    pub fn inverse(self, x: f64) -> Jet {
        let [_, g1, g2, g3, g4] = self.0;
        let i1 = 1.0 / g1;
        let i2 = -g2 * i1.powi(3);
        let i3 = (3.0 * g2 * g2 - g1 * g3) * i1.powi(5);
        let i4 = (-15.0 * g2.powi(3) + 10.0 * g1 * g2 * g3 - g1 * g1 * g4) * i1.powi(7);
        Jet([x, i1, i2, i3, i4])
    }

    pub fn recip(self) -> Jet {
        self.map(|x| {
            let r = 1.0 / x;
            let r2 = r * r;
            [r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2, 24.0 * r2 * r2 * r]
        })
    }

    pub fn exp(self) -> Jet {
        self.map(|x| {
            let e = x.exp();
            [e; 5]
        })
    }

    pub fn ln(self) -> Jet {
        self.map(|x| {
            let r = 1.0 / x;
            let r2 = r * r;
            [x.ln(), r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2]
        })
    }

    pub fn sin(self) -> Jet {
        self.map(|x| {
            let (s, c) = x.sin_cos();
            [s, c, -s, -c, s]
        })
    }

    pub fn cos(self) -> Jet {
        self.map(|x| {
            let (s, c) = x.sin_cos();
            [c, -s, -c, s, c]
        })
    }

    pub fn sqrt(self) -> Jet {
        self.powf(0.5)
    }

    /// `x^p` for positive base.
    pub fn powf(self, p: f64) -> Jet {
        self.map(|x| {
            let c1 = p;
            let c2 = c1 * (p - 1.0);
            let c3 = c2 * (p - 2.0);
            let c4 = c3 * (p - 3.0);
            let xp = x.powf(p);
            if x == 0.0 {
                return [xp, 0.0, 0.0, 0.0, 0.0];
            }
            let r = 1.0 / x;
            [xp, c1 * xp * r, c2 * xp * r * r, c3 * xp * r * r * r, c4 * xp * r * r * r * r]
        })
    }

    pub fn powi(self, k: i32) -> Jet {
        let mut acc = Jet::constant(1.0);
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }

    /// Shift the derivative slots down by one: the jet of `f'`, with the
    /// unknown fifth derivative set to zero.
    pub fn derivative(self) -> Jet {
        let a = self.0;
        Jet([a[1], a[2], a[3], a[4], 0.0])
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4]])
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3], a[4] - b[4]])
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (f, g) = (self.0, o.0);
        Jet([
            f[0] * g[0],
            f[1] * g[0] + f[0] * g[1],
            f[2] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[2],
            f[3] * g[0] + 3.0 * f[2] * g[1] + 3.0 * f[1] * g[2] + f[0] * g[3],
            f[4] * g[0] + 4.0 * f[3] * g[1] + 6.0 * f[2] * g[2] + 4.0 * f[1] * g[3] + f[0] * g[4],
        ])
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        self.add_const(c)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        self.add_const(-c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Jet, b: [f64; 5], tol: f64) {
        for k in 0..5 {
            assert!((a.0[k] - b[k]).abs() <= tol * (1.0 + b[k].abs()), "slot {k}: {:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn product_of_polynomials() {
        // (t^2)(t^3) = t^5 at t = 2
        let t = Jet::var(2.0);
        let p = (t * t) * (t * t * t);
        close(p, [32.0, 80.0, 160.0, 240.0, 240.0], 1e-14);
    }

    #[test]
    fn composition_matches_closed_form() {
        // exp(sin t)
        let t = 0.7f64;
        let j = Jet::var(t).sin().exp();
        let (s, c) = t.sin_cos();
        let e = s.exp();
        let d1 = e * c;
        let d2 = e * (c * c - s);
        let d3 = e * (c.powi(3) - 3.0 * s * c - c);
        let d4 = e * (c.powi(4) - 6.0 * s * c * c - 4.0 * c * c + 3.0 * s * s + s);
        close(j, [e, d1, d2, d3, d4], 1e-13);
    }

    #[test]
    fn inverse_of_exp_is_log() {
        let x = 0.3f64;
        let g = Jet::var(x).exp();
        let inv = g.inverse(x);
        let s = x.exp();
        close(inv, [x, 1.0 / s, -1.0 / (s * s), 2.0 / s.powi(3), -6.0 / s.powi(4)], 1e-13);
    }

    #[test]
    fn division_and_powers() {
        let t = Jet::var(1.5);
        let q = Jet::constant(1.0) / t;
        close(q, t.powf(-1.0).0, 1e-14);
        close(t.sqrt() * t.sqrt(), t.0, 1e-14);
    }
}

/// Jet of arbitrary fixed order `N - 1`, with arithmetic carried out on
/// truncated Taylor series. Used where a quantity is a derivative of a
/// smooth function and still needs four derivatives of its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetN<const N: usize>(pub [f64; N]);

fn factorials<const N: usize>() -> [f64; N] {
    let mut f = [1.0; N];
    for k in 1..N {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

impl<const N: usize> JetN<N> {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; N];
        a[0] = c;
        JetN(a)
    }

    pub fn var(t: f64) -> Self {
        Self::affine(t, 0.0, 1.0)
    }

    pub fn affine(t: f64, a: f64, b: f64) -> Self {
        let mut s = [0.0; N];
        s[0] = a + b * t;
        if N > 1 {
            s[1] = b;
        }
        JetN(s)
    }

    pub fn v(&self) -> f64 {
        self.0[0]
    }

    pub fn scale(self, c: f64) -> Self {
        let mut a = self.0;
        for x in a.iter_mut() {
            *x *= c;
        }
        JetN(a)
    }

    pub fn add(self, o: Self) -> Self {
        let mut a = self.0;
        for k in 0..N {
            a[k] += o.0[k];
        }
        JetN(a)
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.scale(-1.0))
    }

    pub fn add_const(mut self, c: f64) -> Self {
        self.0[0] += c;
        self
    }

    fn to_series(self) -> [f64; N] {
        let f = factorials::<N>();
        let mut s = self.0;
        for k in 0..N {
            s[k] /= f[k];
        }
        s
    }

    fn from_series(s: [f64; N]) -> Self {
        let f = factorials::<N>();
        let mut a = s;
        for k in 0..N {
            a[k] *= f[k];
        }
        JetN(a)
    }

    fn series_mul(a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        let mut c = [0.0; N];
        for i in 0..N {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..(N - i) {
                c[i + j] += a[i] * b[j];
            }
        }
        c
    }

    pub fn mul(self, o: Self) -> Self {
        Self::from_series(Self::series_mul(&self.to_series(), &o.to_series()))
    }

    /// `outer ∘ self`, with `outer` the derivatives of the outer function at `self.v()`.
    pub fn compose(self, outer: [f64; N]) -> Self {
        let mut delta = self.to_series();
        delta[0] = 0.0;
        let b = JetN(outer).to_series();
        let mut out = [0.0; N];
        let mut pow = [0.0; N];
        pow[0] = 1.0;
        for j in 0..N {
            for m in 0..N {
                out[m] += b[j] * pow[m];
            }
            pow = Self::series_mul(&pow, &delta);
        }
        Self::from_series(out)
    }

    pub fn exp(self) -> Self {
        let e = self.v().exp();
        self.compose([e; N])
    }

    pub fn recip(self) -> Self {
        let x = self.v();
        let mut d = [0.0; N];
        let mut c = 1.0 / x;
        for k in 0..N {
            d[k] = c;
            c *= -((k + 1) as f64) / x;
        }
        self.compose(d)
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.v();
        let mut d = [0.0; N];
        let mut coef = 1.0;
        for k in 0..N {
            d[k] = coef * x.powf(p - k as f64);
            coef *= p - k as f64;
        }
        self.compose(d)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v().sin_cos();
        let cyc = [s, c, -s, -c];
        let mut d = [0.0; N];
        for k in 0..N {
            d[k] = cyc[k % 4];
        }
        self.compose(d)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v().sin_cos();
        let cyc = [c, -s, -c, s];
        let mut d = [0.0; N];
        for k in 0..N {
            d[k] = cyc[k % 4];
        }
        self.compose(d)
    }

    /// Jet of the derivative; the last slot becomes unknown and is set to 0.
    pub fn derivative(self) -> Self {
        let mut a = [0.0; N];
        for k in 0..N - 1 {
            a[k] = self.0[k + 1];
        }
        JetN(a)
    }

    /// The first five slots as a [`Jet`].
    pub fn truncate(self) -> Jet {
        Jet([self.0[0], self.0[1], self.0[2], self.0[3], self.0[4]])
    }
}

#[cfg(test)]
mod jetn_tests {
    use super::*;

    #[test]
    fn agrees_with_fixed_jet() {
        let t = 0.37;
        let a = Jet::var(t).sin().exp().recip();
        let b = JetN::<7>::var(t).sin().exp().recip().truncate();
        for k in 0..5 {
            assert!((a.d(k) - b.d(k)).abs() < 1e-12 * (1.0 + a.d(k).abs()));
        }
        let p = JetN::<7>::var(t).powf(2.5).mul(JetN::<7>::var(t).cos());
        let q = Jet::var(t).powf(2.5) * Jet::var(t).cos();
        for k in 0..5 {
            assert!((p.0[k] - q.d(k)).abs() < 1e-12 * (1.0 + q.d(k).abs()));
        }
    }

    #[test]
    fn sixth_derivative_of_sine() {
        let j = JetN::<7>::var(0.4).sin();
        assert!((j.0[6] + 0.4f64.sin()).abs() < 1e-14);
    }
}
