//! Scalar reverse-mode tape.
//!
//! Every operation appends one node holding its output value. Nodes are
//! recorded in evaluation order, so a single reverse sweep visits each node
//! after all of its consumers and accumulates adjoints additively.
//!
//! Non-smooth operations use subgradients: `max` routes the whole adjoint to
//! the first argument on ties (the lower alphabet index when folded left to
//! right), floors and clamps pass the adjoint only while the input lies
//! inside the admissible range.

use crate::unfolded::constrain;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    /// `scale * a + offset`
    Affine(u32, f64),
    Square(u32),
    Exp(u32),
    /// `exp(a + c)`
    ExpOffset(u32),
    /// `exp(a - b)`
    ExpDiff(u32, u32),
    Ln(u32),
    Max(u32, u32),
    /// `max(a, c)`; adjoint flows only when `a > c`.
    Floor(u32, f64),
    Logistic(u32),
    /// `sum args`
    Sum { start: u32, len: u32 },
    /// `offset + sum coeffs[k] * args[k]`
    LinComb { start: u32, len: u32 },
    /// `sum coeffs[k] * max(args[k], floor)`
    FlooredLinComb { start: u32, len: u32, floor: f64 },
    /// `(1 - t) a + t b`
    Lerp(u32, u32, u32),
    /// `clamp((1 - d) l cur - w + d prev, lo, hi)`; inputs in `args`.
    Correct { start: u32, lo: f64, hi: f64 },
}

/// Recorded computation with per-node adjoint accumulators.
#[derive(Debug, Default)]
pub struct Tape {
    ops: Vec<Op>,
    values: Vec<f64>,
    grads: Vec<f64>,
    args: Vec<u32>,
    coeffs: Vec<f64>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Forgets every node but keeps the allocations.
    pub fn clear(&mut self) {
        self.ops.clear();
        self.values.clear();
        self.grads.clear();
        self.args.clear();
        self.coeffs.clear();
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    #[inline]
    fn push(&mut self, op: Op, value: f64) -> Var {
        let id = self.ops.len() as u32;
        self.ops.push(op);
        self.values.push(value);
        Var(id)
    }

    #[inline]
    pub fn value(&self, v: Var) -> f64 {
        self.values[v.index()]
    }

    #[inline]
    fn val(&self, i: u32) -> f64 {
        self.values[i as usize]
    }

    /// Independent input or constant.
    pub fn leaf(&mut self, value: f64) -> Var {
        self.push(Op::Leaf, value)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(Op::Add(a.0, b.0), v)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) - self.value(b);
        self.push(Op::Sub(a.0, b.0), v)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(Op::Mul(a.0, b.0), v)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) / self.value(b);
        self.push(Op::Div(a.0, b.0), v)
    }

    pub fn affine(&mut self, a: Var, scale: f64, offset: f64) -> Var {
        let v = scale * self.value(a) + offset;
        self.push(Op::Affine(a.0, scale), v)
    }

    pub fn scale(&mut self, a: Var, scale: f64) -> Var {
        self.affine(a, scale, 0.0)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let x = self.value(a);
        self.push(Op::Square(a.0), x * x)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.value(a).exp();
        self.push(Op::Exp(a.0), v)
    }

    pub fn exp_offset(&mut self, a: Var, c: f64) -> Var {
        let v = (self.value(a) + c).exp();
        self.push(Op::ExpOffset(a.0), v)
    }

    pub fn exp_diff(&mut self, a: Var, b: Var) -> Var {
        let v = (self.value(a) - self.value(b)).exp();
        self.push(Op::ExpDiff(a.0, b.0), v)
    }

    pub fn ln(&mut self, a: Var) -> Var {
        let v = self.value(a).ln();
        self.push(Op::Ln(a.0), v)
    }

    pub fn max(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).max(self.value(b));
        self.push(Op::Max(a.0, b.0), v)
    }

    pub fn floor(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a).max(c);
        self.push(Op::Floor(a.0, c), v)
    }

    pub fn logistic(&mut self, a: Var) -> Var {
        let v = constrain(self.value(a));
        self.push(Op::Logistic(a.0), v)
    }

    pub fn sum(&mut self, xs: &[Var]) -> Var {
        let start = self.args.len() as u32;
        let mut acc = 0.0;
        for x in xs {
            acc += self.value(*x);
            self.args.push(x.0);
        }
        self.push(
            Op::Sum {
                start,
                len: xs.len() as u32,
            },
            acc,
        )
    }

    pub fn lin_comb(&mut self, xs: &[Var], coeffs: &[f64], offset: f64) -> Var {
        debug_assert_eq!(xs.len(), coeffs.len());
        self.align_coeffs();
        let start = self.args.len() as u32;
        let mut acc = offset;
        for (x, &c) in xs.iter().zip(coeffs) {
            acc += c * self.value(*x);
            self.args.push(x.0);
            self.coeffs.push(c);
        }
        self.push(
            Op::LinComb {
                start,
                len: xs.len() as u32,
            },
            acc,
        )
    }

    pub fn floored_lin_comb(&mut self, xs: &[Var], coeffs: &[f64], floor: f64) -> Var {
        debug_assert_eq!(xs.len(), coeffs.len());
        // args and coeffs share `start` for this op
        self.align_coeffs();
        let start = self.args.len() as u32;
        let mut acc = 0.0;
        for (x, &c) in xs.iter().zip(coeffs) {
            acc += self.value(*x).max(floor) * c;
            self.args.push(x.0);
            self.coeffs.push(c);
        }
        self.push(
            Op::FlooredLinComb {
                start,
                len: xs.len() as u32,
                floor,
            },
            acc,
        )
    }

    pub fn lerp(&mut self, a: Var, b: Var, t: Var) -> Var {
        let tv = self.value(t);
        let v = (1.0 - tv) * self.value(a) + tv * self.value(b);
        self.push(Op::Lerp(a.0, b.0, t.0), v)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn correct(&mut self, cur: Var, prev: Var, delta: Var, lambda: Var, omega: Var, lo: f64, hi: f64) -> Var {
        let (c, p, d, l, w) = (
            self.value(cur),
            self.value(prev),
            self.value(delta),
            self.value(lambda),
            self.value(omega),
        );
        let v = ((1.0 - d) * l * c - w + d * p).clamp(lo, hi);
        let start = self.args.len() as u32;
        self.args.extend([cur.0, prev.0, delta.0, lambda.0, omega.0]);
        self.push(Op::Correct { start, lo, hi }, v)
    }

    // LinComb-style ops index `coeffs` with the same `start` as `args`; pad
    // `coeffs` so both vectors have equal length before recording one.
    #[inline]
    fn align_coeffs(&mut self) {
        if self.coeffs.len() < self.args.len() {
            self.coeffs.resize(self.args.len(), 0.0);
        }
    }

    /// Reverse sweep seeded with `d output / d output = 1`.
    pub fn backward(&mut self, output: Var) {
        self.grads.clear();
        self.grads.resize(self.ops.len(), 0.0);
        self.grads[output.index()] = 1.0;
        for n in (0..=output.index()).rev() {
            let g = self.grads[n];
            if g == 0.0 {
                continue;
            }
            match self.ops[n] {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    self.grads[a as usize] += g;
                    self.grads[b as usize] += g;
                }
                Op::Sub(a, b) => {
                    self.grads[a as usize] += g;
                    self.grads[b as usize] -= g;
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.val(a), self.val(b));
                    self.grads[a as usize] += g * vb;
                    self.grads[b as usize] += g * va;
                }
                Op::Div(a, b) => {
                    let vb = self.val(b);
                    let out = self.values[n];
                    self.grads[a as usize] += g / vb;
                    self.grads[b as usize] -= g * out / vb;
                }
                Op::Affine(a, s) => self.grads[a as usize] += g * s,
                Op::Square(a) => {
                    let va = self.val(a);
                    self.grads[a as usize] += 2.0 * g * va;
                }
                Op::Exp(a) | Op::ExpOffset(a) => {
                    let out = self.values[n];
                    self.grads[a as usize] += g * out;
                }
                Op::ExpDiff(a, b) => {
                    let out = self.values[n];
                    self.grads[a as usize] += g * out;
                    self.grads[b as usize] -= g * out;
                }
                Op::Ln(a) => {
                    let va = self.val(a);
                    self.grads[a as usize] += g / va;
                }
                Op::Max(a, b) => {
                    if self.val(a) >= self.val(b) {
                        self.grads[a as usize] += g;
                    } else {
                        self.grads[b as usize] += g;
                    }
                }
                Op::Floor(a, c) => {
                    if self.val(a) > c {
                        self.grads[a as usize] += g;
                    }
                }
                Op::Logistic(a) => {
                    let out = self.values[n];
                    self.grads[a as usize] += g * out * (1.0 - out);
                }
                Op::Sum { start, len } => {
                    for k in start..start + len {
                        let a = self.args[k as usize] as usize;
                        self.grads[a] += g;
                    }
                }
                Op::LinComb { start, len } => {
                    for k in start as usize..(start + len) as usize {
                        let a = self.args[k] as usize;
                        self.grads[a] += g * self.coeffs[k];
                    }
                }
                Op::FlooredLinComb { start, len, floor } => {
                    for k in start as usize..(start + len) as usize {
                        let a = self.args[k] as usize;
                        if self.values[a] > floor {
                            self.grads[a] += g * self.coeffs[k];
                        }
                    }
                }
                Op::Lerp(a, b, t) => {
                    let (va, vb, vt) = (self.val(a), self.val(b), self.val(t));
                    self.grads[a as usize] += g * (1.0 - vt);
                    self.grads[b as usize] += g * vt;
                    self.grads[t as usize] += g * (vb - va);
                }
                Op::Correct { start, lo, hi } => {
                    let s = start as usize;
                    let idx: [usize; 5] = std::array::from_fn(|k| self.args[s + k] as usize);
                    let [c, p, d, l, w] = idx.map(|i| self.values[i]);
                    let raw = (1.0 - d) * l * c - w + d * p;
                    if raw >= lo && raw <= hi {
                        self.grads[idx[0]] += g * (1.0 - d) * l;
                        self.grads[idx[1]] += g * d;
                        self.grads[idx[2]] += g * (p - l * c);
                        self.grads[idx[3]] += g * (1.0 - d) * c;
                        self.grads[idx[4]] -= g;
                    }
                }
            }
        }
    }

    /// Adjoint of `v` after [`Tape::backward`].
    #[inline]
    pub fn grad(&self, v: Var) -> f64 {
        self.grads.get(v.index()).copied().unwrap_or(0.0)
    }
}
