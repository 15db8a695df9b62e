//! Classical fourth-order Runge-Kutta on fixed-size states.

/// Advances `x` from `t` to `t + dt` for `x' = f(t, x)`.
///
/// Inputs that are held over the step belong in the closure.
pub fn rk4_step<const N: usize, F>(f: F, t: f64, x: &[f64; N], dt: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let shifted = |k: &[f64; N], h: f64| std::array::from_fn(|i| x[i] + h * k[i]);
    let k1 = f(t, x);
    let k2 = f(t + dt / 2.0, &shifted(&k1, dt / 2.0));
    let k3 = f(t + dt / 2.0, &shifted(&k2, dt / 2.0));
    let k4 = f(t + dt, &shifted(&k3, dt));
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates `steps` fixed steps and returns the final state.
pub fn integrate<const N: usize, F>(f: F, t0: f64, x0: [f64; N], dt: f64, steps: usize) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    (0..steps).fold(x0, |x, k| rk4_step(&f, t0 + k as f64 * dt, &x, dt))
}
