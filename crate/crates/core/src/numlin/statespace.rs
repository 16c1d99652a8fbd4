use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Continuous-time realization `G(s) = C (sI - A)^-1 B + D`.
///
/// Construction checks that the four blocks are conformal and finite; the
/// fields are private so those invariants hold for every value in circulation.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace<T: Real> {
    a: DMatrix<T>,
    b: DMatrix<T>,
    c: DMatrix<T>,
    d: DMatrix<T>,
}

impl<T: Real> StateSpace<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>, d: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!("B has {} rows, A has {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!("C has {} columns, A has {n}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// Strictly proper system with `D = 0`.
    pub fn strictly_proper(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>) -> Result<Self> {
        let d = DMatrix::zeros(c.nrows(), b.ncols());
        Self::new(a, b, c, d)
    }

    /// Memoryless gain `y = D u`.
    pub fn static_gain(d: DMatrix<T>) -> Result<Self> {
        let (p, m) = d.shape();
        Self::new(DMatrix::zeros(0, 0), DMatrix::zeros(0, m), DMatrix::zeros(p, 0), d)
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<T> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<T> {
        &self.d
    }

    /// Number of states.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn into_parts(self) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>, DMatrix<T>) {
        (self.a, self.b, self.c, self.d)
    }

    /// `true` when every entry of `D` is exactly zero.
    pub fn has_zero_feedthrough(&self) -> bool {
        self.d.iter().all(|x| x.is_zero())
    }

    /// Sub-system from the selected inputs to the selected outputs.
    pub fn select(&self, inputs: &[usize], outputs: &[usize]) -> Result<Self> {
        if let Some(&bad) = inputs.iter().find(|&&j| j >= self.m()) {
            return Err(Error::DimensionMismatch(format!("input index {bad} out of range")));
        }
        if let Some(&bad) = outputs.iter().find(|&&i| i >= self.p()) {
            return Err(Error::DimensionMismatch(format!("output index {bad} out of range")));
        }
        let b = self.b.select_columns(inputs);
        let c = self.c.select_rows(outputs);
        let d = self.d.select_rows(outputs).select_columns(inputs);
        Ok(Self { a: self.a.clone(), b, c, d })
    }

    /// State-coordinate change `x' = T x`: `(T A T^-1, T B, C T^-1, D)`.
    pub fn similarity(&self, t: &DMatrix<T>) -> Result<Self> {
        let n = self.n();
        if t.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("transform must be {n}x{n}")));
        }
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("singular similarity transform".into()))?;
        Self::new(t * &self.a * &t_inv, t * &self.b, &self.c * &t_inv, self.d.clone())
    }

    /// Block-diagonal stacking of two independent systems.
    pub fn append(&self, other: &Self) -> Self {
        let blockdiag = |x: &DMatrix<T>, y: &DMatrix<T>| {
            let mut out = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols() + y.ncols());
            out.view_mut((0, 0), x.shape()).copy_from(x);
            out.view_mut(x.shape(), y.shape()).copy_from(y);
            out
        };
        Self {
            a: blockdiag(&self.a, &other.a),
            b: blockdiag(&self.b, &other.b),
            c: blockdiag(&self.c, &other.c),
            d: blockdiag(&self.d, &other.d),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonconformal_blocks() {
        let a = DMatrix::<f64>::zeros(2, 2);
        let b = DMatrix::zeros(3, 1);
        let c = DMatrix::zeros(1, 2);
        assert!(matches!(
            StateSpace::strictly_proper(a, b, c),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let a = DMatrix::from_element(1, 1, f64::NAN);
        let r = StateSpace::strictly_proper(a, DMatrix::zeros(1, 1), DMatrix::zeros(1, 1));
        assert_eq!(r, Err(Error::NonFinite("A")));
    }

    #[test]
    fn static_gain_has_no_states() {
        let g = StateSpace::static_gain(DMatrix::from_element(2, 3, 1.0f32)).unwrap();
        assert_eq!((g.n(), g.m(), g.p()), (0, 3, 2));
    }

    #[test]
    fn select_picks_sub_block() {
        let a = DMatrix::from_diagonal_element(2, 2, -1.0);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let c = DMatrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let d = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let g = StateSpace::new(a, b, c, d).unwrap();
        let s = g.select(&[1], &[0]).unwrap();
        assert_eq!(s.b().as_slice(), &[2.0, 4.0]);
        assert_eq!(s.c().as_slice(), &[5.0, 6.0]);
        assert_eq!(s.d()[(0, 0)], 0.2);
    }
}
