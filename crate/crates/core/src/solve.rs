//! One-dimensional deterministic solvers used by the game layer.
//!
//! Two tools, both allocation-free and branch-deterministic:
//!
//! * [`golden_section_max`] — derivative-free maximizer for a unimodal
//!   (here: strictly concave) objective on a closed interval.
//! * [`newton_bisection_root`] — safeguarded Newton iteration for a root of a
//!   monotone function on a bracket, falling back to bisection whenever a
//!   Newton step leaves the bracket or stalls.
//!
//! Determinism matters more than raw speed here: every reported number in the
//! simulator must be bit-identical across runs, so the iteration schedules
//! below depend only on the inputs, never on timing or thread count.

// ---------------------------------------------------------------------------
// Golden-section search
// ---------------------------------------------------------------------------

/// `1 - 1/phi` where `phi` is the golden ratio; the interior-point fraction
/// of golden-section search.
const INV_GOLD: f64 = 0.381_966_011_250_105_1;

/// Maximizes `f` over `[lo, hi]` by golden-section search, shrinking the
/// interval until its width is at most `tol` (or 200 iterations, whichever
/// comes first). Returns `(argmax, max)`.
///
/// Exact for unimodal objectives; for a strictly concave `f` the returned
/// point is within `tol` of the true maximizer.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    debug_assert!(lo <= hi, "golden_section_max needs lo <= hi");
    let mut a = lo;
    let mut b = hi;
    let mut x1 = a + INV_GOLD * (b - a);
    let mut x2 = b - INV_GOLD * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 < f2 {
            // Maximum lies in [x1, b].
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - INV_GOLD * (b - a);
            f2 = f(x2);
        } else {
            // Maximum lies in [a, x2].
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_GOLD * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    // Return the best point actually evaluated, so the reported maximum is
    // never below a probe value.
    if f1 >= f2 && f1 >= fm {
        (x1, f1)
    } else if f2 >= fm {
        (x2, f2)
    } else {
        (mid, fm)
    }
}

// ---------------------------------------------------------------------------
// Safeguarded Newton
// ---------------------------------------------------------------------------

/// Outcome of [`newton_bisection_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    /// Final iterate.
    pub x: f64,
    /// Function value at the final iterate.
    pub f_value: f64,
    /// Whether a stopping criterion was met (as opposed to exhausting the
    /// iteration budget).
    pub converged: bool,
}

/// Finds a root of `f` on `[lo, hi]` by Newton's method with a bisection
/// safeguard, using the analytic derivative `df`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs (or one of them to be
/// zero); the bracket is maintained on every step, so the iterate can never
/// escape `[lo, hi]`. A Newton step is taken whenever it lands strictly
/// inside the current bracket and the derivative is usable; otherwise the
/// step is a bisection. Stops when `|step| < step_tol` or `|f(x)| < f_tol`.
///
/// Returns the post-step iterate, i.e. the point produced by the final
/// (converged) update — for a well-behaved `f` this polishes `|f(x)|` well
/// below `f_tol`.
pub fn newton_bisection_root(
    mut f: impl FnMut(f64) -> f64,
    mut df: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    step_tol: f64,
    f_tol: f64,
) -> RootResult {
    debug_assert!(lo < hi, "newton_bisection_root needs lo < hi");
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return RootResult {
            x: a,
            f_value: 0.0,
            converged: true,
        };
    }
    if fb == 0.0 {
        return RootResult {
            x: b,
            f_value: 0.0,
            converged: true,
        };
    }
    debug_assert!(
        fa * fb < 0.0,
        "newton_bisection_root needs a sign change on the bracket"
    );

    let mut x = 0.5 * (a + b);
    let mut fx = f(x);
    for _ in 0..200 {
        if fx.abs() < f_tol {
            return RootResult {
                x,
                f_value: fx,
                converged: true,
            };
        }
        // Shrink the bracket around the sign change.
        if (fx > 0.0) == (fa > 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d.is_finite() && d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        let step = next - x;
        x = next;
        fx = f(x);
        if step.abs() < step_tol {
            return RootResult {
                x,
                f_value: fx,
                converged: true,
            };
        }
    }
    RootResult {
        x,
        f_value: fx,
        converged: false,
    }
}
