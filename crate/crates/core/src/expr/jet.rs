//! Truncated multivariate Taylor jets of order at most 3.
//!
//! A jet stores the value and the partial derivatives of a scalar function
//! at a point: gradient, Hessian and third derivatives. Mixed partials are
//! stored once in packed symmetric arrays; accessors sort their indices.
//! Jets carry a truncation order so the curvature engine can differentiate
//! (which lowers the order by one) without keeping meaningless coefficients.

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 3;

#[inline]
fn idx2(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

#[inline]
fn idx3(i: usize, j: usize, k: usize) -> usize {
    let mut s = [i, j, k];
    s.sort_unstable();
    let [a, b, c] = s;
    c * (c + 1) * (c + 2) / 6 + b * (b + 1) / 2 + a
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    dim: usize,
    order: usize,
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
}

impl Jet3 {
    pub fn constant(dim: usize, order: usize, c: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        Jet3 {
            dim,
            order,
            value: c,
            grad: if order >= 1 { vec![0.0; dim] } else { Vec::new() },
            hess: if order >= 2 { vec![0.0; dim * (dim + 1) / 2] } else { Vec::new() },
            third: if order >= 3 { vec![0.0; dim * (dim + 1) * (dim + 2) / 6] } else { Vec::new() },
        }
    }

    /// The coordinate function `x_i` expanded at `x_i = at`.
    pub fn variable(dim: usize, order: usize, i: usize, at: f64) -> Self {
        let mut j = Self::constant(dim, order, at);
        if order >= 1 {
            j.grad[i] = 1.0;
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// First partial derivative; zero above the truncation order.
    pub fn d1(&self, i: usize) -> f64 {
        if self.order >= 1 {
            self.grad[i]
        } else {
            0.0
        }
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.order >= 2 {
            self.hess[idx2(i, j)]
        } else {
            0.0
        }
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        if self.order >= 3 {
            self.third[idx3(i, j, k)]
        } else {
            0.0
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().chain(&self.hess).chain(&self.third).all(|v| v.is_finite())
    }

    /// Drop all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet3 {
        if order >= self.order {
            return self.clone();
        }
        let mut out = Jet3::constant(self.dim, order, self.value);
        if order >= 1 {
            out.grad.copy_from_slice(&self.grad);
        }
        if order >= 2 {
            out.hess.copy_from_slice(&self.hess);
        }
        out
    }

    /// Partial derivative along coordinate `i`, one order lower.
    pub fn derivative(&self, i: usize) -> Jet3 {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let m = self.dim;
        let mut out = Jet3::constant(m, self.order - 1, self.grad[i]);
        if out.order >= 1 {
            for j in 0..m {
                out.grad[j] = self.d2(i, j);
            }
        }
        if out.order >= 2 {
            for b in 0..m {
                for a in 0..=b {
                    out.hess[idx2(a, b)] = self.d3(i, a, b);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        self.map(|v| v * s)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet3 {
        Jet3 {
            dim: self.dim,
            order: self.order,
            value: f(self.value),
            grad: self.grad.iter().map(|&v| f(v)).collect(),
            hess: self.hess.iter().map(|&v| f(v)).collect(),
            third: self.third.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip(&self, other: &Jet3, f: impl Fn(f64, f64) -> f64) -> Jet3 {
        assert_eq!(self.dim, other.dim, "jet dimension mismatch");
        let (a, b) = (self.truncate(other.order), other.truncate(self.order));
        Jet3 {
            dim: a.dim,
            order: a.order,
            value: f(a.value, b.value),
            grad: a.grad.iter().zip(&b.grad).map(|(&x, &y)| f(x, y)).collect(),
            hess: a.hess.iter().zip(&b.hess).map(|(&x, &y)| f(x, y)).collect(),
            third: a.third.iter().zip(&b.third).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    /// Leibniz rule, truncated at the smaller of the two orders.
    pub fn mul_jet(&self, g: &Jet3) -> Jet3 {
        assert_eq!(self.dim, g.dim, "jet dimension mismatch");
        let f = self;
        let m = f.dim;
        let order = f.order.min(g.order);
        let mut out = Jet3::constant(m, order, f.value * g.value);
        if order >= 1 {
            for i in 0..m {
                out.grad[i] = f.grad[i] * g.value + f.value * g.grad[i];
            }
        }
        if order >= 2 {
            for b in 0..m {
                for a in 0..=b {
                    out.hess[idx2(a, b)] = f.d2(a, b) * g.value
                        + f.grad[a] * g.grad[b]
                        + f.grad[b] * g.grad[a]
                        + f.value * g.d2(a, b);
                }
            }
        }
        if order >= 3 {
            for c in 0..m {
                for b in 0..=c {
                    for a in 0..=b {
                        out.third[idx3(a, b, c)] = f.d3(a, b, c) * g.value
                            + f.d2(a, b) * g.grad[c]
                            + f.d2(a, c) * g.grad[b]
                            + f.d2(b, c) * g.grad[a]
                            + f.grad[a] * g.d2(b, c)
                            + f.grad[b] * g.d2(a, c)
                            + f.grad[c] * g.d2(a, b)
                            + f.value * g.d3(a, b, c);
                    }
                }
            }
        }
        out
    }

    /// Chain rule for `h(self)` given `h, h', h'', h'''` at the base value.
    pub fn compose(&self, h: [f64; 4]) -> Jet3 {
        let f = self;
        let m = f.dim;
        let mut out = Jet3::constant(m, f.order, h[0]);
        if f.order >= 1 {
            for i in 0..m {
                out.grad[i] = h[1] * f.grad[i];
            }
        }
        if f.order >= 2 {
            for b in 0..m {
                for a in 0..=b {
                    out.hess[idx2(a, b)] = h[2] * f.grad[a] * f.grad[b] + h[1] * f.d2(a, b);
                }
            }
        }
        if f.order >= 3 {
            for c in 0..m {
                for b in 0..=c {
                    for a in 0..=b {
                        out.third[idx3(a, b, c)] = h[3] * f.grad[a] * f.grad[b] * f.grad[c]
                            + h[2]
                                * (f.d2(a, b) * f.grad[c]
                                    + f.d2(a, c) * f.grad[b]
                                    + f.d2(b, c) * f.grad[a])
                            + h[1] * f.d3(a, b, c);
                    }
                }
            }
        }
        out
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value.exp();
        self.compose([e; 4])
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose([c, -s, -c, s])
    }

    /// `1/self`. The caller checks that the value is nonzero.
    pub fn recip(&self) -> Jet3 {
        let r = 1.0 / self.value;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn powi(&self, n: u32) -> Jet3 {
        let u = self.value;
        let mut h = [0.0; 4];
        let mut coeff = 1.0;
        for (k, slot) in h.iter_mut().enumerate() {
            let k = k as u32;
            if k > n {
                break;
            }
            *slot = coeff * u.powi((n - k) as i32);
            coeff *= (n - k) as f64;
        }
        self.compose(h)
    }
}

impl Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.map(|v| -v)
    }
}
