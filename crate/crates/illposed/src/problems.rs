//! Classical discrete ill-posed test problems.
//!
//! Each constructor returns a matrix `A`, an exact solution `x_true`, and the
//! consistent right-hand side `b_true = A x_true` (computed exactly that way,
//! so the triple is consistent to the last bit of the matvec). The
//! discretizations follow the standard constructions: Galerkin with
//! orthonormal box functions for `phillips` and `deriv2` (integrals in closed
//! form), midpoint quadrature for `shaw` and `heat`. All four matrices have
//! smoothly decaying singular values with no isolated gap, which is the
//! regime the filter methods in this crate are meant for.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Vector};

/// A discretized test problem: `b_true = a * x_true` exactly.
#[derive(Debug, Clone)]
pub struct TestProblem {
    pub name: &'static str,
    pub a: DenseMatrix,
    pub x_true: Vector,
    pub b_true: Vector,
}

impl TestProblem {
    fn assemble(name: &'static str, a: DenseMatrix, x_true: Vector) -> TestProblem {
        let b_true = a.matvec(&x_true);
        TestProblem {
            name,
            a,
            x_true,
            b_true,
        }
    }
}

/// The four built-in problems, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Phillips,
    Shaw,
    Deriv2,
    Heat,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::Phillips,
        ProblemKind::Shaw,
        ProblemKind::Deriv2,
        ProblemKind::Heat,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ProblemKind::Phillips => "phillips",
            ProblemKind::Shaw => "shaw",
            ProblemKind::Deriv2 => "deriv2",
            ProblemKind::Heat => "heat",
        }
    }

    pub fn parse(s: &str) -> Option<ProblemKind> {
        Self::ALL.into_iter().find(|k| k.token() == s)
    }

    pub fn build(self, n: usize) -> Result<TestProblem> {
        match self {
            ProblemKind::Phillips => phillips(n),
            ProblemKind::Shaw => shaw(n),
            ProblemKind::Deriv2 => deriv2(n),
            ProblemKind::Heat => heat(n),
        }
    }
}

// Second antiderivative of the even hat-shaped kernel profile
// phi(u) = 1 + cos(pi u / 3) on |u| < 3 (zero outside), matched C^1 at the
// support edge. Cell-pair integrals of phi reduce to second differences of
// this function.
fn phillips_psi(u: f64) -> f64 {
    let a = u.abs();
    let nine_over_pi2 = 9.0 / (PI * PI);
    if a <= 3.0 {
        0.5 * u * u - nine_over_pi2 * (PI * u / 3.0).cos()
    } else {
        3.0 * a - 4.5 + nine_over_pi2
    }
}

// Antiderivative of the exact solution profile f(t) = 1 + cos(pi t / 3) on
// |t| < 3, clamped outside the support.
fn phillips_solution_area(t: f64) -> f64 {
    if t <= -3.0 {
        -3.0
    } else if t >= 3.0 {
        3.0
    } else {
        t + (3.0 / PI) * (PI * t / 3.0).sin()
    }
}

/// Phillips test problem on `[-6, 6]`: convolution with the hat-shaped
/// profile `1 + cos(pi u / 3)` (support `|u| < 3`), Galerkin-discretized with
/// orthonormal box functions. `n` must be divisible by 4 so the kernel
/// support lines up with the grid.
pub fn phillips(n: usize) -> Result<TestProblem> {
    if n < 4 || !n.is_multiple_of(4) {
        return Err(Error::InvalidParam {
            name: "n",
            details: format!("phillips needs n divisible by 4 and at least 4, got {n}"),
        });
    }
    let h = 12.0 / n as f64;
    let quarter = n / 4;
    // Symmetric Toeplitz: first column via exact cell-pair integrals. Entries
    // with |i - j| > n/4 are outside the kernel support.
    let mut first = vec![0.0; n];
    for (d, slot) in first.iter_mut().enumerate() {
        if d <= quarter {
            let u = d as f64 * h;
            *slot = (phillips_psi(u + h) - 2.0 * phillips_psi(u) + phillips_psi(u - h)) / h;
        }
    }
    let a = DenseMatrix::from_fn(n, n, |i, j| first[i.abs_diff(j)]);
    let x_true = Vector::from_fn(n, |j| {
        let t0 = -6.0 + j as f64 * h;
        let t1 = -6.0 + (j + 1) as f64 * h;
        (phillips_solution_area(t1) - phillips_solution_area(t0)) / h.sqrt()
    });
    Ok(TestProblem::assemble("phillips", a, x_true))
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// Shaw's one-dimensional image restoration model on `[-pi/2, pi/2]`:
/// midpoint quadrature of the kernel
/// `(cos s + cos t)^2 (sin(u)/u)^2` with `u = pi (sin s + sin t)`.
/// `n` must be even.
pub fn shaw(n: usize) -> Result<TestProblem> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParam {
            name: "n",
            details: format!("shaw needs even n of at least 2, got {n}"),
        });
    }
    let h = PI / n as f64;
    let t: Vec<f64> = (0..n).map(|i| -PI / 2.0 + (i as f64 + 0.5) * h).collect();
    let cos_t: Vec<f64> = t.iter().map(|x| x.cos()).collect();
    let sin_t: Vec<f64> = t.iter().map(|x| x.sin()).collect();
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        let c = cos_t[i] + cos_t[j];
        let u = PI * (sin_t[i] + sin_t[j]);
        let v = c * sinc(u);
        h * v * v
    });
    let x_true = Vector::from_fn(n, |i| {
        2.0 * (-6.0 * (t[i] - 0.8) * (t[i] - 0.8)).exp()
            + (-2.0 * (t[i] + 0.5) * (t[i] + 0.5)).exp()
    });
    Ok(TestProblem::assemble("shaw", a, x_true))
}

/// Exact data function for [`deriv2`]: the image of the hat-shaped solution
/// under the Green's-function kernel, in closed form. Exposed so tests can
/// cross-check the discretized right-hand side (`g(0.5) = -1/24`).
pub fn deriv2_exact_rhs(s: f64) -> f64 {
    if s < 0.5 {
        (4.0 * s * s * s - 3.0 * s) / 24.0
    } else {
        (-4.0 * s * s * s + 12.0 * s * s - 9.0 * s + 1.0) / 24.0
    }
}

/// Second-derivative model problem on `[0, 1]`: Galerkin discretization of
/// the Green's function `G(s, t) = s t - min(s, t)` with orthonormal box
/// functions (integrals in closed form) and the hat-function solution
/// `f(t) = min(t, 1 - t)`. Requires `n >= 4`.
pub fn deriv2(n: usize) -> Result<TestProblem> {
    if n < 4 {
        return Err(Error::InvalidParam {
            name: "n",
            details: format!("deriv2 needs n of at least 4, got {n}"),
        });
    }
    let h = 1.0 / n as f64;
    let a = DenseMatrix::from_fn(n, n, |i0, j0| {
        // 1-based indices to keep the closed forms in their usual shape.
        let (hi, lo) = (i0.max(j0) + 1, i0.min(j0) + 1);
        if hi == lo {
            let i = hi as f64;
            h * h * (((i * i - i + 0.25) * h) - (i - 2.0 / 3.0))
        } else {
            let (i, j) = (hi as f64, lo as f64);
            h * h * (j - 0.5) * ((i - 0.5) * h - 1.0)
        }
    });
    // Antiderivative of the hat solution, piecewise: t^2/2, then
    // 1/4 - (1-t)^2/2 past the peak.
    let area = |t: f64| {
        if t <= 0.5 {
            0.5 * t * t
        } else {
            0.25 - 0.5 * (1.0 - t) * (1.0 - t)
        }
    };
    let x_true = Vector::from_fn(n, |j| {
        let t0 = j as f64 * h;
        let t1 = (j + 1) as f64 * h;
        (area(t1) - area(t0)) / h.sqrt()
    });
    Ok(TestProblem::assemble("deriv2", a, x_true))
}

/// Inverse heat conduction model on `[0, 1]` (unit diffusivity): Volterra
/// convolution with kernel `t^{-3/2} exp(-1/(4t)) / (2 sqrt(pi))`, midpoint
/// quadrature, giving a lower-triangular Toeplitz matrix. Requires even
/// `n >= 4`.
pub fn heat(n: usize) -> Result<TestProblem> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParam {
            name: "n",
            details: format!("heat needs even n of at least 4, got {n}"),
        });
    }
    let h = 1.0 / n as f64;
    let c = h / (2.0 * PI.sqrt());
    let kcol: Vec<f64> = (0..n)
        .map(|d| {
            let t = (d as f64 + 0.5) * h;
            c * t.powf(-1.5) * (-0.25 / t).exp()
        })
        .collect();
    let a = DenseMatrix::from_fn(n, n, |i, j| if i >= j { kcol[i - j] } else { 0.0 });
    let x_true = Vector::from_fn(n, |i| {
        if i >= n / 2 {
            return 0.0;
        }
        let ti = (i + 1) as f64 * 20.0 / n as f64;
        if ti < 2.0 {
            0.75 * ti * ti / 4.0
        } else if ti < 3.0 {
            0.75 + (ti - 2.0) * (3.0 - ti)
        } else {
            0.75 * (-2.0 * (ti - 3.0)).exp()
        }
    });
    Ok(TestProblem::assemble("heat", a, x_true))
}

/// Renders a matrix in the plain text interchange format: a `rows cols`
/// header line, then one whitespace-separated row per line. Floats use the
/// shortest representation that round-trips.
pub fn matrix_to_text(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Renders a vector as a single-column matrix in the text format.
pub fn vector_to_text(v: &Vector) -> String {
    let mut out = format!("{} 1\n", v.len());
    for x in v.iter() {
        out.push_str(&format!("{x}\n"));
    }
    out
}

/// Parses the text format produced by [`matrix_to_text`]; whitespace layout
/// is free-form beyond the leading `rows cols` pair.
pub fn matrix_from_text(text: &str) -> Result<DenseMatrix> {
    let mut tokens = text.split_whitespace();
    let mut dim = || -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(Error::InvalidParam {
                name: "text",
                details: "missing or malformed dimension header".into(),
            })
    };
    let rows = dim()?;
    let cols = dim()?;
    let mut data = Vec::with_capacity(rows * cols);
    for tok in tokens {
        let x: f64 = tok.parse().map_err(|_| Error::InvalidParam {
            name: "text",
            details: format!("malformed entry {tok:?}"),
        })?;
        data.push(x);
    }
    DenseMatrix::new(rows, cols, data)
}
