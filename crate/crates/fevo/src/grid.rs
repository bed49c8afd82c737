//! Uniform function grids for the operator calculus.
//!
//! A [`FunctionGrid`] samples a real function on `x_j = a + j·Δx`,
//! `j = 0..N-1`, `Δx = (b-a)/N`, with N a power of two (the right
//! endpoint is excluded, the usual DFT convention). Off-grid evaluation
//! uses local cubic (Catmull-Rom) interpolation with zero extension
//! outside `[a, b]`; functions fed to the operators are expected to be
//! supported well inside the interval, or flagged periodic.

/// 1-d uniform grid of sampled real values.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionGrid {
    a: f64,
    b: f64,
    n: usize,
    periodic: bool,
    pub values: Vec<f64>,
}

fn check_axis(a: f64, b: f64, n: usize) {
    assert!(b > a, "empty interval [{a}, {b}]");
    assert!(n >= 8 && n.is_power_of_two(), "N must be a power of two >= 8, got {n}");
}

impl FunctionGrid {
    pub fn new(a: f64, b: f64, n: usize) -> FunctionGrid {
        check_axis(a, b, n);
        FunctionGrid {
            a,
            b,
            n,
            periodic: false,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> FunctionGrid {
        let mut g = FunctionGrid::new(a, b, n);
        for j in 0..n {
            g.values[j] = f(g.x(j));
        }
        g
    }

    /// Mark the grid as genuinely periodic: boundary-support checks are
    /// skipped for periodic data.
    pub fn periodic(mut self) -> FunctionGrid {
        self.periodic = true;
        self
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx()
    }

    /// DFT frequency of bin m, negative convention in the upper half:
    /// ξ_m = 2π m̃ / (b-a) with m̃ = m for m < N/2 and m - N otherwise.
    pub fn xi(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 {
            m as f64
        } else {
            m as f64 - self.n as f64
        };
        std::f64::consts::TAU * signed / (self.b - self.a)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// max(|f(a)|, |f(b-Δx)|) / sup|f|; zero for the zero function.
    pub fn boundary_ratio(&self) -> f64 {
        let sup = self.sup_norm();
        if sup == 0.0 {
            return 0.0;
        }
        self.values[0].abs().max(self.values[self.n - 1].abs()) / sup
    }

    /// Catmull-Rom interpolation at `x`; `None` when `x` leaves `[a, b]`
    /// (the function is treated as 0 there and the caller counts the
    /// escape). Missing stencil neighbors are zero-extended.
    pub fn eval_cubic(&self, x: f64) -> Option<f64> {
        if x < self.a || x > self.b {
            return None;
        }
        let u = (x - self.a) / self.dx();
        let j = (u.floor() as isize).clamp(0, self.n as isize - 1);
        let t = u - j as f64;
        let pick = |k: isize| -> f64 {
            if k < 0 || k >= self.n as isize {
                0.0
            } else {
                self.values[k as usize]
            }
        };
        let p0 = pick(j - 1);
        let p1 = pick(j);
        let p2 = pick(j + 1);
        let p3 = pick(j + 2);
        Some(
            0.5 * (2.0 * p1
                + (p2 - p0) * t
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
                + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t * t * t),
        )
    }

    pub fn max_abs_diff(&self, other: &FunctionGrid) -> f64 {
        assert!(self.same_axis(other), "grid mismatch");
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn same_axis(&self, other: &FunctionGrid) -> bool {
        self.a == other.a && self.b == other.b && self.n == other.n
    }

    /// Pointwise linear combination `α·self + β·other` on a shared axis.
    pub fn axpy(&self, alpha: f64, other: &FunctionGrid, beta: f64) -> FunctionGrid {
        assert!(self.same_axis(other), "grid mismatch");
        let mut out = self.clone();
        for (o, (a, b)) in out
            .values
            .iter_mut()
            .zip(self.values.iter().zip(other.values.iter()))
        {
            *o = alpha * a + beta * b;
        }
        out
    }
}

/// Row-major 2-d grid over (s, x): row i holds the x-samples at
/// s_i = s_a + i·Δs.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    s_a: f64,
    s_b: f64,
    n_s: usize,
    x_a: f64,
    x_b: f64,
    n_x: usize,
    pub values: Vec<f64>,
}

impl Grid2D {
    pub fn new(s_axis: (f64, f64, usize), x_axis: (f64, f64, usize)) -> Grid2D {
        check_axis(s_axis.0, s_axis.1, s_axis.2);
        check_axis(x_axis.0, x_axis.1, x_axis.2);
        Grid2D {
            s_a: s_axis.0,
            s_b: s_axis.1,
            n_s: s_axis.2,
            x_a: x_axis.0,
            x_b: x_axis.1,
            n_x: x_axis.2,
            values: vec![0.0; s_axis.2 * x_axis.2],
        }
    }

    pub fn from_fn(
        s_axis: (f64, f64, usize),
        x_axis: (f64, f64, usize),
        f: impl Fn(f64, f64) -> f64,
    ) -> Grid2D {
        let mut g = Grid2D::new(s_axis, x_axis);
        for i in 0..g.n_s {
            for j in 0..g.n_x {
                g.values[i * g.n_x + j] = f(g.s(i), g.x(j));
            }
        }
        g
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn ds(&self) -> f64 {
        (self.s_b - self.s_a) / self.n_s as f64
    }

    pub fn dx(&self) -> f64 {
        (self.x_b - self.x_a) / self.n_x as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s_a + i as f64 * self.ds()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_a + j as f64 * self.dx()
    }

    pub fn x_axis(&self) -> (f64, f64, usize) {
        (self.x_a, self.x_b, self.n_x)
    }

    pub fn s_axis(&self) -> (f64, f64, usize) {
        (self.s_a, self.s_b, self.n_s)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_x..(i + 1) * self.n_x]
    }

    /// Copy of row i as a [`FunctionGrid`] over the x-axis.
    pub fn row_grid(&self, i: usize) -> FunctionGrid {
        let mut g = FunctionGrid::new(self.x_a, self.x_b, self.n_x);
        g.values.copy_from_slice(self.row(i));
        g
    }

    pub fn set_row(&mut self, i: usize, row: &[f64]) {
        assert_eq!(row.len(), self.n_x);
        self.values[i * self.n_x..(i + 1) * self.n_x].copy_from_slice(row);
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_x + j]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Grid2D) -> f64 {
        assert!(
            self.s_axis() == other.s_axis() && self.x_axis() == other.x_axis(),
            "grid mismatch"
        );
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = FunctionGrid::new(-16.0, 16.0, 1024);
        assert_eq!(g.dx(), 32.0 / 1024.0);
        assert_eq!(g.x(0), -16.0);
        assert_eq!(g.x(512), 0.0);
        // Nyquist bin carries the negative frequency
        assert!(g.xi(512) < 0.0);
        assert_eq!(g.xi(1), -g.xi(1023));
    }

    #[test]
    fn cubic_interpolation_accuracy() {
        let g = FunctionGrid::from_fn(-8.0, 8.0, 512, |x| (-0.5 * x * x).exp());
        for k in 0..100 {
            let x = -4.0 + 8.0 * k as f64 / 99.0;
            let exact = (-0.5 * x * x).exp();
            let interp = g.eval_cubic(x).unwrap();
            assert!((interp - exact).abs() < 1e-6, "x={x}: {interp} vs {exact}");
        }
        assert_eq!(g.eval_cubic(-8.2), None);
        assert_eq!(g.eval_cubic(9.0), None);
    }

    #[test]
    fn boundary_ratio_flags_support() {
        let ok = FunctionGrid::from_fn(-16.0, 16.0, 256, |x| (-0.5 * x * x).exp());
        assert!(ok.boundary_ratio() < 1e-8);
        let bad = FunctionGrid::from_fn(-2.0, 2.0, 256, |x| (-0.5 * x * x).exp());
        assert!(bad.boundary_ratio() > 1e-2);
        let zero = FunctionGrid::new(0.0, 1.0, 8);
        assert_eq!(zero.boundary_ratio(), 0.0);
    }

    #[test]
    fn grid2d_rows() {
        let g = Grid2D::from_fn((0.0, 1.0, 8), (-1.0, 1.0, 16), |s, x| s + 10.0 * x);
        assert_eq!(g.row(3).len(), 16);
        let row = g.row_grid(3);
        assert_eq!(row.values[0], g.s(3) + 10.0 * -1.0);
    }

    #[test]
    #[should_panic(expected = "power of two")]
    fn rejects_non_power_of_two() {
        FunctionGrid::new(0.0, 1.0, 100);
    }
}
