//! Reference computations that share no code with `atomlink`.
//!
//! They are deliberately naive: dense linear algebra, closed forms and direct
//! summation, and are only suitable for small problems.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64 as C;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major `n × n`. Returns `None` for a singular matrix.
pub fn solve_dense(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[pivot][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == C::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let s: C = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Point scatterers at `x_j = j·a`, `j = 0..n`, each re-radiating
/// `β·E(x_j)` into both directions, where `E(x_j)` is the total field at the
/// scatterer. A unit wave enters from the right at `x = n·a`; `phase = k·a`.
///
/// Returns `(t, r)`: the left-going amplitude at `x = 0` and the right-going
/// amplitude at `x = n·a`.
pub fn coupled_scatterers(n: usize, phase: f64, beta: C) -> Option<(C, C)> {
    let prop = |d: usize| C::cis(phase * d as f64);
    let mut a = vec![vec![C::new(0.0, 0.0); n]; n];
    let mut b = vec![C::new(0.0, 0.0); n];
    for j in 0..n {
        for k in 0..n {
            a[j][k] = -beta * prop(j.abs_diff(k));
        }
        a[j][j] += 1.0;
        b[j] = prop(n - j);
    }
    let e = solve_dense(a, b)?;
    let r = (0..n).map(|k| beta * prop(n - k) * e[k]).sum();
    let t = prop(n) + (0..n).map(|k| beta * prop(k) * e[k]).sum::<C>();
    Some((t, r))
}

/// The scatterer strength for a site response `ζ` with `m` atoms.
pub fn site_strength(zeta: C, atoms: u32) -> C {
    C::i() * zeta * f64::from(atoms)
}

/// Atomic response `ζ` evaluated directly from the three-level susceptibility
/// with the control field, without simplification.
pub fn zeta_reference(delta: f64, gamma_1d: f64, gamma_out: f64, omega: f64, control_detuning: f64) -> C {
    // ζ = −Γ1D / (iΓ' + 2(δ+Δ) − 2Ω²/δ)
    let denom = C::new(2.0 * (delta + control_detuning), gamma_out) - 2.0 * omega * omega / delta;
    -gamma_1d / denom
}

/// Real roots of `x³ + b x² + c x + d`, ascending. Uses the trigonometric
/// form for three real roots.
pub fn cubic_real_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if disc > 1e-14 * (1.0 + q * q) {
        let s = (disc).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    } else if p.abs() < 1e-300 {
        vec![shift; 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect()
    };
    roots.sort_by(f64::total_cmp);
    roots
}

/// Eigenvalues of the single-cell coupling matrix
/// `−[[0,0,1],[0,0,1/η],[1,1/η,δ]]`, from its characteristic polynomial
/// `λ³ + δλ² − (1 + η⁻²)λ`.
pub fn single_cell_energies(eta: f64, delta: f64) -> Vec<f64> {
    cubic_real_roots(delta, -(1.0 + 1.0 / (eta * eta)), 0.0)
}

/// Adiabaticity sum of the single-cell dark state, summed over the two bright
/// states in closed form.
pub fn single_cell_epsilon1(eta: f64, delta: f64) -> f64 {
    let a2 = 1.0 / (eta * eta);
    let disc = (delta * delta + 4.0 * (1.0 + a2)).sqrt();
    [(-delta + disc) / 2.0, (-delta - disc) / 2.0]
        .iter()
        .map(|&l| 1.0 / (l.abs() * eta * (1.0 + eta * eta).sqrt() * (1.0 + a2 + l * l).sqrt()))
        .sum()
}

/// Trapezoidal rule on arbitrary abscissae.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}
