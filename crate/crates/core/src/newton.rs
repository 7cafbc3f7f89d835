//! Damped Newton iteration for small square systems.

use nalgebra::{Const, DimMin, SMatrix, SVector};

use crate::error::{Result, RicciError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Absolute tolerance on the sup norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Maximum number of step halvings per iteration.
    pub max_halvings: usize,
    /// When the line search stalls (rounding noise), a residual at or below
    /// this value is still reported as converged.
    pub stall_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            max_halvings: 40,
            stall_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOutcome<const N: usize> {
    pub x: SVector<f64, N>,
    pub iterations: usize,
}

/// `system(x)` returns `None` when `x` leaves the domain, which makes the
/// line search shrink the step.
pub(crate) fn damped_newton<const N: usize, F>(
    system: F,
    x0: SVector<f64, N>,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome<N>>
where
    F: Fn(&SVector<f64, N>) -> Option<(SVector<f64, N>, SMatrix<f64, N, N>)>,
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let Some((mut f, mut jac)) = system(&x0) else {
        return Err(RicciError::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        });
    };
    let mut x = x0;
    for iter in 0..=opts.max_iter {
        let res = f.amax();
        if res <= opts.tol {
            return Ok(NewtonOutcome {
                x,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let Some(step) = jac.lu().solve(&(-f)) else {
            return Err(RicciError::NoConvergence {
                iterations: iter,
                residual: res,
            });
        };
        let merit = f.norm();
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = x + step * damping;
            if let Some((ft, jt)) = system(&trial) {
                if ft.norm() < (1.0 - 1e-4 * damping) * merit {
                    accepted = Some((trial, ft, jt));
                    break;
                }
            }
            damping *= 0.5;
        }
        match accepted {
            Some((xn, fnew, jnew)) => {
                x = xn;
                f = fnew;
                jac = jnew;
            }
            None if res <= opts.stall_tol => {
                return Ok(NewtonOutcome {
                    x,
                    iterations: iter,
                })
            }
            None => {
                return Err(RicciError::NoConvergence {
                    iterations: iter,
                    residual: res,
                })
            }
        }
    }
    Err(RicciError::NoConvergence {
        iterations: opts.max_iter,
        residual: f.amax(),
    })
}
