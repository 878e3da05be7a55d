//! Quadrature helpers: adaptive composite Simpson with substitutions that
//! remove inverse-square-root endpoint singularities, plus fixed
//! Gauss–Legendre rules for per-cell 2D integration.

/// Absolute tolerance per adaptive panel.
pub const PANEL_TOL: f64 = 1e-9;

const MAX_DEPTH: u32 = 32;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    parent_delta: f64,
    stagnant_streak: u32,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    // Evaluation-noise floor: densities evaluated near a cancellation zone
    // carry relative noise well above machine epsilon; below this scale
    // `delta` measures noise rather than curvature.
    let noise_floor = (b - a) * (fa.abs() + 4.0 * fm.abs() + fb.abs()) / 6.0 * 1e-11;
    // Stagnation: on smooth pieces the Simpson defect contracts ~16x per
    // level and ~2.83x across a square-root kink (with oscillation, hence
    // the two-level streak); a defect that repeatedly fails to contract is
    // evaluation noise and splitting cannot converge.
    let streak = if delta.abs() > 0.45 * parent_delta.abs() {
        stagnant_streak + 1
    } else {
        0
    };
    let stagnated = depth >= 12 && streak >= 2;
    // Width floor: panels this narrow carry no resolvable structure, and a
    // non-finite sample (an unflagged point within rounding distance of a
    // divergence) must not fan the recursion out.
    let exhausted = depth >= MAX_DEPTH
        || (b - a) <= 1e-14 * (a.abs() + b.abs() + 1.0)
        || (!delta.is_finite() && depth >= 12);
    if !exhausted && !stagnated && (!delta.is_finite() || delta.abs() > (15.0 * tol).max(noise_floor)) {
        return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, delta, streak, depth + 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, delta, streak, depth + 1);
    }
    let refined = left + right + delta / 15.0;
    if refined.is_finite() {
        return refined;
    }
    if (left + right).is_finite() {
        return left + right;
    }
    if whole.is_finite() {
        whole
    } else {
        0.0
    }
}

/// Adaptive Simpson over `[lo, hi]` for a bounded integrand.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let m = 0.5 * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(m), f(hi));
    let whole = simpson(fa, fm, fb, hi - lo);
    adaptive_step(&f, lo, hi, fa, fm, fb, whole, tol, f64::INFINITY, 0, 0)
}

/// Integrates `f` over `[lo, hi]` where `f` may carry integrable
/// `1/sqrt(distance)` divergences at the flagged endpoints. A flagged end
/// `e` is removed by the substitution `x = e ∓ u²`, after which the
/// integrand extends continuously to `u = 0` (evaluated just inside).
pub fn integrate_singular<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    singular_lo: bool,
    singular_hi: bool,
    tol: f64,
) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    // The u = 0 limit is evaluated a resolvable distance inside the
    // interval: u_min² must survive being subtracted from the endpoint in
    // f64, otherwise the evaluator sees the singular point itself.
    let u_min = |width: f64, endpoint: f64| {
        (width * 1e-12)
            .max(endpoint.abs() * 8.0 * f64::EPSILON)
            .max(f64::MIN_POSITIVE)
            .sqrt()
    };
    let from_lo = |f: &F, lo: f64, hi: f64, tol: f64| {
        let width = hi - lo;
        let eps = u_min(width, lo);
        let g = |u: f64| {
            let u = u.max(eps);
            let v = f(lo + u * u);
            if v.is_finite() {
                2.0 * u * v
            } else {
                2.0 * u * f(lo + 4.0 * u * u)
            }
        };
        integrate(g, 0.0, width.sqrt(), tol)
    };
    let from_hi = |f: &F, lo: f64, hi: f64, tol: f64| {
        let width = hi - lo;
        let eps = u_min(width, hi);
        let g = |u: f64| {
            let u = u.max(eps);
            let v = f(hi - u * u);
            if v.is_finite() {
                2.0 * u * v
            } else {
                2.0 * u * f(hi - 4.0 * u * u)
            }
        };
        integrate(g, 0.0, width.sqrt(), tol)
    };
    match (singular_lo, singular_hi) {
        (false, false) => integrate(f, lo, hi, tol),
        (true, false) => from_lo(&f, lo, hi, tol),
        (false, true) => from_hi(&f, lo, hi, tol),
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            from_lo(&f, lo, mid, 0.5 * tol) + from_hi(&f, mid, hi, 0.5 * tol)
        }
    }
}

/// 4-point Gauss–Legendre nodes/weights on [-1, 1].
pub const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_26,
    0.339_981_043_584_856_26,
    0.861_136_311_594_052_6,
];
pub const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_2,
    0.652_145_154_862_546_2,
    0.347_854_845_137_453_85,
];

/// 8-point Gauss–Legendre nodes/weights on [-1, 1].
pub const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
pub const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// 8-point Gauss–Legendre on `[a, b]`. Nodes are interior, so the rule is
/// safe next to (but not across) singular endpoints.
pub fn gauss8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (n, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        acc += w * f(c + h * n);
    }
    acc * h
}

/// Tensor 4x4 Gauss–Legendre over one rectangular cell.
pub fn gauss_legendre_cell<F: Fn(f64, f64) -> f64>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
) -> f64 {
    let cx = 0.5 * (x0 + x1);
    let hx = 0.5 * (x1 - x0);
    let cy = 0.5 * (y0 + y1);
    let hy = 0.5 * (y1 - y0);
    let mut acc = 0.0;
    for (nx, wx) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
        let x = cx + hx * nx;
        for (ny, wy) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            acc += wx * wy * f(x, cy + hy * ny);
        }
    }
    acc * hx * hy
}
