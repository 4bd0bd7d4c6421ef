use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::taylor::{sum_series, taylor_coefficients};
use super::{check_state, check_step_size, Quadrature, StepResult, Stepper};
use crate::numeric::newton::converged;
use crate::numeric::{norm2, solve_linear, Dual, Matrix, NewtonConfig, Scalar};
use crate::{Error, ExtendedState, HamiltonianSystem, Monitor, PoincareSystem};

const MIN_MONITOR: f64 = 1e-14;

/// Hamiltonian Taylor variational integrator: Taylor order `r` for the
/// stages, `r + 1` for the boundary, and a quadrature rule of order `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct HtviScheme {
    taylor_order: usize,
    quadrature: Quadrature,
}

impl HtviScheme {
    pub fn new(taylor_order: usize, quadrature: Quadrature) -> Result<Self, Error> {
        if taylor_order > 3 {
            return Err(Error::InvalidArgument(format!(
                "htvi taylor order must be in [0, 3], got {taylor_order}"
            )));
        }
        Ok(Self {
            taylor_order,
            quadrature,
        })
    }

    /// Taylor order 3 with Simpson's rule.
    pub fn htvi4() -> Self {
        Self::new(3, Quadrature::simpson()).unwrap()
    }

    /// Taylor order 0 with the left rectangle rule; this is Euler-B.
    pub fn rectangle() -> Self {
        Self::new(0, Quadrature::left_rectangle()).unwrap()
    }

    pub fn taylor_order(&self) -> usize {
        self.taylor_order
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    /// `min(r + 1, s)`.
    pub fn order(&self) -> usize {
        (self.taylor_order + 1).min(self.quadrature.order())
    }
}

/// HTVI stepper with its Newton settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Htvi {
    pub scheme: HtviScheme,
    pub newton: NewtonConfig,
}

impl Htvi {
    pub fn new(scheme: HtviScheme, newton: NewtonConfig) -> Self {
        Self { scheme, newton }
    }

    pub fn htvi4() -> Self {
        Self::new(HtviScheme::htvi4(), NewtonConfig::default())
    }
}

impl<H: HamiltonianSystem, M: Monitor> Stepper<H, M> for Htvi {
    fn name(&self) -> &'static str {
        "htvi"
    }

    fn step(&self, sys: &PoincareSystem<H, M>, x0: &ExtendedState, h: f64) -> Result<StepResult, Error> {
        htvi_step(sys, &self.scheme, x0, h, &self.newton)
    }
}

struct Assembly<S> {
    value: S,
    momentum: Vec<S>,
    boundary: Vec<S>,
}

/// `p̄₁ᵀQ̃₁ − h Σ bᵢ [p̄ᵢᵀ ∂H̄/∂p̄(xᵢ) − H̄(xᵢ)]` for the Taylor expansion
/// through `(q̄₀, p̃₀)`, together with the end momentum of the order-`r`
/// expansion and the boundary configuration `Q̃₁`.
fn assemble<S, H, M>(
    sys: &PoincareSystem<H, M>,
    scheme: &HtviScheme,
    qbar0: &[S],
    ptilde: &[S],
    pbar1: &[f64],
    h: f64,
) -> Result<Assembly<S>, Error>
where
    S: Scalar,
    H: HamiltonianSystem,
    M: Monitor,
{
    let n = sys.dim();
    let r = scheme.taylor_order;
    let mut z0 = Vec::with_capacity(2 * n + 2);
    z0.extend_from_slice(qbar0);
    z0.extend_from_slice(ptilde);
    let coeffs = taylor_coefficients(sys, &z0, r + 1)?;
    let boundary = sum_series(&coeffs, h, r + 1, 0..n + 1);
    let momentum = sum_series(&coeffs, h, r, n + 1..2 * n + 1);
    let mut quad = S::zero();
    for (&c, &b) in scheme.quadrature.nodes().iter().zip(scheme.quadrature.weights()) {
        let x = sum_series(&coeffs, c * h, r, 0..2 * n + 2);
        let d = sys.partials(&x[..n], &x[n + 1..2 * n + 1], x[2 * n + 1])?;
        let mut pairing = x[2 * n + 1] * d.dpt;
        for i in 0..n {
            pairing += x[n + 1 + i] * d.dp[i];
        }
        quad += (pairing - d.value) * b;
    }
    let mut value = -(quad * h);
    for (&bi, &pi) in boundary.iter().zip(pbar1) {
        value += bi * pi;
    }
    Ok(Assembly {
        value,
        momentum,
        boundary,
    })
}

fn end_momentum<S, H, M>(
    sys: &PoincareSystem<H, M>,
    r: usize,
    qbar0: &[S],
    ptilde: &[S],
    h: f64,
) -> Result<Vec<S>, Error>
where
    S: Scalar,
    H: HamiltonianSystem,
    M: Monitor,
{
    let n = sys.dim();
    let mut z0 = Vec::with_capacity(2 * n + 2);
    z0.extend_from_slice(qbar0);
    z0.extend_from_slice(ptilde);
    let coeffs = taylor_coefficients(sys, &z0, r)?;
    Ok(sum_series(&coeffs, h, r, n + 1..2 * n + 1))
}

fn constants(x: &[f64]) -> Vec<Dual<f64>> {
    x.iter().map(|&v| Dual::constant(v)).collect()
}

/// Solves `P(q̄₀, (p̃, pᵗ₁)) = p₁` for `p̃`, where `P` is the momentum of the
/// order-`r` Taylor expansion.
fn inner_solve<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    scheme: &HtviScheme,
    qbar0: &[f64],
    pbar1: &[f64],
    h: f64,
    cfg: &NewtonConfig,
    guess: &[f64],
) -> Result<Vec<f64>, Error> {
    let n = sys.dim();
    let r = scheme.taylor_order;
    if r == 0 {
        return Ok(pbar1[..n].to_vec());
    }
    let mut ptilde = guess.to_vec();
    ptilde.push(pbar1[n]);
    let q_dual = constants(qbar0);
    let mut jac = Matrix::zeros(n, n);
    let mut residual = vec![0.0; n];
    let mut previous = f64::INFINITY;
    for iteration in 0..=cfg.max_iterations {
        let p = end_momentum(sys, r, qbar0, &ptilde, h)?;
        for i in 0..n {
            residual[i] = p[i] - pbar1[i];
        }
        let norm = norm2(&residual);
        if converged(norm, previous, cfg.tolerance) {
            break;
        }
        if !norm.is_finite() || iteration == cfg.max_iterations {
            if norm <= cfg.tolerance {
                break;
            }
            return Err(Error::NotConverged {
                iterations: iteration,
                residual_norm: norm,
            });
        }
        previous = norm;
        let mut p_dual = constants(&ptilde);
        for j in 0..n {
            p_dual[j].du = 1.0;
            let col = end_momentum(sys, r, &q_dual, &p_dual, h)?;
            p_dual[j].du = 0.0;
            for i in 0..n {
                jac[(i, j)] = col[i].du;
            }
        }
        let dx = solve_linear(&jac, &residual)?;
        for i in 0..n {
            ptilde[i] -= dx[i];
        }
    }
    ptilde.truncate(n);
    Ok(ptilde)
}

/// `D₁H̄_d⁺`, `D₂H̄_d⁺` and the converged inner momentum.
struct Derivatives {
    d1: Vec<f64>,
    d2: Vec<f64>,
    ptilde: Vec<f64>,
}

/// Both partial derivatives of the discrete right Hamiltonian by forward
/// differentiation of the assembly, with the inner solve `p̃(q̄₀, p̄₁)`
/// handled by the implicit function theorem.
fn discrete_derivatives<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    scheme: &HtviScheme,
    qbar0: &[f64],
    pbar1: &[f64],
    h: f64,
    cfg: &NewtonConfig,
    guess: &[f64],
) -> Result<Derivatives, Error> {
    let n = sys.dim();
    let m = n + 1;
    let ptilde = inner_solve(sys, scheme, qbar0, pbar1, h, cfg, guess)?;
    let mut vars: Vec<Dual<f64>> = constants(qbar0);
    vars.extend(ptilde.iter().map(|&v| Dual::constant(v)));
    vars.push(Dual::constant(pbar1[n]));

    // dg[v] = ∂G/∂v, dp[v][i] = ∂Pᵢ/∂v over v = (q̄₀, p̃, p̃ᵗ)
    let mut dg = vec![0.0; 2 * m];
    let mut dp = vec![vec![0.0; n]; 2 * m];
    let mut boundary = vec![0.0; m];
    for v in 0..2 * m {
        vars[v].du = 1.0;
        let a = assemble(sys, scheme, &vars[..m], &vars[m..], pbar1, h)?;
        vars[v].du = 0.0;
        dg[v] = a.value.du;
        for (d, mom) in dp[v].iter_mut().zip(&a.momentum[..n]) {
            *d = mom.du;
        }
        if v == 0 {
            for (b, x) in boundary.iter_mut().zip(&a.boundary[..m]) {
                *b = x.re;
            }
        }
    }

    // λ = A⁻ᵀ w with A = ∂P/∂p̃, w = ∂G/∂p̃
    let mut at = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            at[(j, i)] = dp[m + j][i];
        }
    }
    let lambda = solve_linear(&at, &dg[m..m + n])?;
    let correction = |v: usize| -> f64 { (0..n).map(|i| lambda[i] * dp[v][i]).sum() };

    let d1: Vec<f64> = (0..m).map(|j| dg[j] - correction(j)).collect();
    let mut d2: Vec<f64> = (0..n).map(|i| boundary[i] + lambda[i]).collect();
    d2.push(boundary[n] + dg[2 * m - 1] - correction(2 * m - 1));
    if !d1.iter().chain(&d2).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteDerivative);
    }
    Ok(Derivatives { d1, d2, ptilde })
}

/// `H̄_d⁺(q̄₀, p̄₁; h)`.
pub fn htvi_discrete_hamiltonian<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    scheme: &HtviScheme,
    qbar0: &[f64],
    pbar1: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<f64, Error> {
    let m = sys.dim() + 1;
    for len in [qbar0.len(), pbar1.len()] {
        if len != m {
            return Err(Error::DimensionMismatch { expected: m, found: len });
        }
    }
    check_step_size(h)?;
    let mut ptilde = inner_solve(sys, scheme, qbar0, pbar1, h, cfg, &pbar1[..m - 1])?;
    ptilde.push(pbar1[m - 1]);
    Ok(assemble(sys, scheme, qbar0, &ptilde, pbar1, h)?.value)
}

/// One HTVI step: `pᵗ₁ = pᵗ₀`, then `p₀ = D₁H̄_d⁺(q̄₀, p̄₁)` for `p₁` by Newton
/// with a central-difference Jacobian, then `q̄₁ = D₂H̄_d⁺(q̄₀, p̄₁)`.
pub fn htvi_step<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    scheme: &HtviScheme,
    x0: &ExtendedState,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult, Error> {
    check_step_size(h)?;
    check_state(sys, x0)?;
    let n = sys.dim();
    let g0 = sys.monitor_value(&x0.q, &x0.p, x0.pt)?;
    if g0 < MIN_MONITOR {
        return Err(Error::positivity(sys.monitor.name(), g0, &x0.q, &x0.p, x0.pt));
    }
    let qbar0 = x0.q_bar();
    let mut p1 = x0.p.clone();
    if sys.base.inverse_mass().is_some() {
        let mut grad_v = vec![0.0; n];
        let mut unused = vec![0.0; n];
        sys.base.gradient(&x0.q, &x0.p, &mut grad_v, &mut unused)?;
        for i in 0..n {
            p1[i] -= h * g0 * grad_v[i];
        }
    }

    let mut guess = p1.clone();
    let mut pbar1 = p1.clone();
    pbar1.push(x0.pt);
    let mut evaluate = |p: &[f64], guess: &mut Vec<f64>| -> Result<(Vec<f64>, Derivatives), Error> {
        pbar1[..n].copy_from_slice(p);
        let d = discrete_derivatives(sys, scheme, &qbar0, &pbar1, h, cfg, guess)?;
        guess.copy_from_slice(&d.ptilde);
        let r = (0..n).map(|i| d.d1[i] - x0.p[i]).collect();
        Ok((r, d))
    };

    let (mut r, mut der) = evaluate(&p1, &mut guess)?;
    let mut norm = norm2(&r);
    let mut jac: Option<Matrix> = None;
    let mut iterations = 0;
    let mut previous = f64::INFINITY;
    while !converged(norm, previous, cfg.tolerance) {
        if !norm.is_finite() || iterations == cfg.max_iterations {
            if norm <= cfg.tolerance {
                break;
            }
            return Err(Error::NotConverged {
                iterations,
                residual_norm: norm,
            });
        }
        if jac.is_none() {
            let mut j = Matrix::zeros(n, n);
            let step = cfg.fd_step * norm2(&p1).max(1.0);
            let mut xp = p1.clone();
            for col in 0..n {
                let mut trial = guess.clone();
                xp[col] = p1[col] + step;
                let up = xp[col];
                let (fp, _) = evaluate(&xp, &mut trial)?;
                let mut trial = guess.clone();
                xp[col] = p1[col] - step;
                let down = xp[col];
                let (fm, _) = evaluate(&xp, &mut trial)?;
                xp[col] = p1[col];
                for row in 0..n {
                    j[(row, col)] = (fp[row] - fm[row]) / (up - down);
                }
            }
            jac = Some(j);
        }
        let dx = solve_linear(jac.as_ref().unwrap(), &r)?;
        for i in 0..n {
            p1[i] -= dx[i];
        }
        let (r_new, der_new) = evaluate(&p1, &mut guess)?;
        let norm_new = norm2(&r_new);
        if norm_new > 0.5 * norm {
            // chord iteration stalled; refresh the Jacobian
            jac = None;
        }
        r = r_new;
        der = der_new;
        previous = norm;
        norm = norm_new;
        iterations += 1;
    }

    let state = ExtendedState {
        q: der.d2[..n].to_vec(),
        qt: der.d2[n],
        p: p1,
        pt: x0.pt,
    };
    if !state.is_finite() {
        return Err(Error::NonFinite("htvi step"));
    }
    Ok(StepResult {
        h_physical: state.qt - x0.qt,
        state,
        h_fictive: h,
        newton_iterations: iterations,
        monitor_value: g0,
    })
}
