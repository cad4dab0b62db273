"""Numerical oracle: entropy, Fisher information, and conjecture scans.

Everything here evaluates closed-form Gaussian-mixture densities under
the heat flow, so the symbolic canonical forms can be cross-checked two
independent ways:

* ``functional`` integrates a derivative-monomial combination directly;
* ``fd_entropy_deriv`` differences the entropy in t, never touching the
  symbolic calculus.

Scans sweep a t-grid and record both routes together with the quantities
the sign conjectures speak about (log J and 1/J curvature, the entropy
power, the interpolation W_t = sqrt(t) X + sqrt(1-t) Z).  Sign verdicts
are three-sigma style: a check passes or fails only when the value clears
the estimated numeric error by a factor of three, and is otherwise
reported as inconclusive rather than asserted.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .mixtures import GaussianMixture, derivative_ratios, log_density
from .quadrature import Mesh, QuadResult, adaptive_quad, build_mesh
from .reduction import entropy_derivative
from .terms import Combination

DEFAULT_TOL = 1e-11


class FdAccuracyWarning(UserWarning):
    """A finite-difference estimate carries more than 10% estimated error."""


def _worker_count() -> int:
    env = os.environ.get("HEATCALC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Integrands and basic functionals
# ---------------------------------------------------------------------------


def _entropy_integrand(mix: GaussianMixture, t: float) -> Callable[[np.ndarray], np.ndarray]:
    def fn(y: np.ndarray) -> np.ndarray:
        lf = log_density(mix, t, y)
        return -np.exp(lf) * lf

    return fn


def _combination_integrand(
    comb: Combination, mix: GaussianMixture, t: float
) -> Callable[[np.ndarray], np.ndarray]:
    items = [
        (mono.exps, float(coeff)) for mono, coeff in comb.items()
    ]
    max_m = max((mono.max_order for mono, _ in comb.items()), default=0)

    def fn(y: np.ndarray) -> np.ndarray:
        lf = log_density(mix, t, y)
        f = np.exp(lf)
        ratios = derivative_ratios(mix, t, y, max_m) if max_m else None
        acc = np.zeros_like(y, dtype=float)
        for exps, coeff in items:
            term = np.full_like(acc, coeff)
            for m, k in exps:
                term = term * ratios[m] ** k
            acc += term
        return f * acc

    return fn


def entropy_result(
    mix: GaussianMixture, t: float, tol: float = DEFAULT_TOL, mesh: Optional[Mesh] = None
) -> QuadResult:
    if t <= 0:
        raise ValueError("entropy along the flow needs t > 0")
    fn = _entropy_integrand(mix, t)
    if mesh is not None:
        return QuadResult(mesh.integrate(fn), tol)
    a, b = mix.support_interval(t)
    return adaptive_quad(fn, a, b, tol)


def entropy(mix: GaussianMixture, t: float, tol: float = DEFAULT_TOL) -> float:
    """Differential entropy of the mixture flowed to time t (natural log)."""
    return entropy_result(mix, t, tol).value


def fisher_result(
    mix: GaussianMixture, t: float, tol: float = DEFAULT_TOL
) -> QuadResult:
    if t <= 0:
        raise ValueError("Fisher information along the flow needs t > 0")

    def fn(y: np.ndarray) -> np.ndarray:
        f = np.exp(log_density(mix, t, y))
        r1 = derivative_ratios(mix, t, y, 1)[1]
        return f * r1 * r1

    a, b = mix.support_interval(t)
    return adaptive_quad(fn, a, b, tol)


def fisher(mix: GaussianMixture, t: float, tol: float = DEFAULT_TOL) -> float:
    """Fisher information (second moment of the score) at time t."""
    return fisher_result(mix, t, tol).value


def functional_result(
    comb: Combination, mix: GaussianMixture, t: float, tol: float = DEFAULT_TOL
) -> QuadResult:
    if t <= 0:
        raise ValueError("functionals along the flow need t > 0")
    if comb.is_zero():
        return QuadResult(0.0, 0.0)
    a, b = mix.support_interval(t)
    return adaptive_quad(_combination_integrand(comb, mix, t), a, b, tol)


def functional(
    comb: Combination, mix: GaussianMixture, t: float, tol: float = DEFAULT_TOL
) -> float:
    """Integral over y of the combination evaluated on the flowed density.

    Monomials are evaluated as f * prod (f_m/f)^k with stable ratio
    averaging, so high powers like f1^8/f^7 stay finite in the tails.
    """
    return functional_result(comb, mix, t, tol).value


# ---------------------------------------------------------------------------
# Finite differences in t
# ---------------------------------------------------------------------------


def _central_stencil(n: int) -> List[Tuple[int, float]]:
    """Centered stencil (offset, coefficient) with f^(n) ~ sum c f(t+k h) / h^n.

    Even orders use the plain binomial stencil; odd orders convolve the
    next-lower even stencil with the centered first difference, which
    keeps every point on the integer grid (2 ceil(n/2) + 1 points).
    """
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    m = n if n % 2 == 0 else n - 1
    coeffs: Dict[int, float] = {}
    for k in range(m + 1):
        off = m // 2 - k
        coeffs[off] = coeffs.get(off, 0.0) + (-1.0) ** k * math.comb(m, k)
    if n % 2:
        odd: Dict[int, float] = {}
        for off, c in coeffs.items():
            odd[off + 1] = odd.get(off + 1, 0.0) + 0.5 * c
            odd[off - 1] = odd.get(off - 1, 0.0) - 0.5 * c
        coeffs = odd
    return sorted((off, c) for off, c in coeffs.items() if c)


def _stencil_reach(n: int) -> int:
    return max(abs(off) for off, _ in _central_stencil(n))


def default_fd_step(mix: GaussianMixture, t: float, n: int) -> float:
    """Step scaled by the local smoothness scale of h, clamped inside (0, t).

    The entropy varies on the scale of the smallest flowed variance, so
    the step follows t + min variance; a pure-t step would be far too
    small when the mixture is much wider than t.
    """
    scale = t + float(np.min(mix.variances))
    step = max(1e-3, 0.02 * scale)
    reach = _stencil_reach(n)
    return min(step, 0.9 * t / reach)


def fd_entropy_deriv_result(
    mix: GaussianMixture,
    t: float,
    n: int,
    step: Optional[float] = None,
    tol: float = DEFAULT_TOL,
) -> Tuple[float, float]:
    """Richardson-extrapolated central difference of entropy; returns (value, error).

    Both step levels (h and h/2) are evaluated on one shared quadrature
    mesh so the quadrature error varies smoothly across the stencil and
    cancels in the differences.  The error estimate combines the
    Richardson correction with a roundoff/quadrature floor.
    """
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    h = default_fd_step(mix, t, n) if step is None else float(step)
    reach = _stencil_reach(n)
    if h <= 0 or t - reach * h <= 0:
        raise ValueError(f"step {h} reaches t <= 0 for order {n} at t = {t}")

    stencil = _central_stencil(n)
    offsets = sorted(
        {2 * off for off, _ in stencil} | {off for off, _ in stencil}
    )
    half = h / 2.0
    t_values = [t + off * half for off in offsets]

    a, b = mix.support_interval(max(t_values))
    probes = [
        _entropy_integrand(mix, min(t_values)),
        _entropy_integrand(mix, t),
        _entropy_integrand(mix, max(t_values)),
    ]
    mesh = build_mesh(probes, a, b, tol)
    h_at = {off: mesh.integrate(_entropy_integrand(mix, tv)) for off, tv in zip(offsets, t_values)}

    coarse = sum(c * h_at[2 * off] for off, c in stencil) / h**n
    fine = sum(c * h_at[off] for off, c in stencil) / half**n
    value = (4.0 * fine - coarse) / 3.0

    coeff_l1 = sum(abs(c) for _, c in stencil)
    eval_noise = tol + 1e-15 * max(abs(v) for v in h_at.values())
    roundoff = coeff_l1 * eval_noise * (1.0 / h**n + 4.0 / half**n) / 3.0
    error = abs(fine - coarse) / 3.0 + roundoff
    return value, error


def fd_entropy_deriv(
    mix: GaussianMixture,
    t: float,
    n: int,
    step: Optional[float] = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """n-th t-derivative of entropy by central differences (symbolic-free oracle)."""
    value, error = fd_entropy_deriv_result(mix, t, n, step, tol)
    if abs(value) > 0 and error > 0.1 * abs(value):
        warnings.warn(
            f"order-{n} finite difference at t={t} has estimated error "
            f"{error:.2e} (> 10% of value {value:.2e})",
            FdAccuracyWarning,
            stacklevel=2,
        )
    return value


# ---------------------------------------------------------------------------
# Grids and second differences
# ---------------------------------------------------------------------------


def time_grid(start: float, stop: float, points: int, spacing: str = "linear") -> np.ndarray:
    if start <= 0 or stop <= start or points < 3:
        raise ValueError("grid needs 0 < start < stop and at least 3 points")
    if spacing == "linear":
        return np.linspace(start, stop, points)
    if spacing == "log":
        return np.geomspace(start, stop, points)
    raise ValueError(f"unknown spacing {spacing!r}")


def second_difference(
    ts: Sequence[float], values: Sequence[float], errors: Optional[Sequence[float]] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Three-point second-derivative estimates on a possibly non-uniform grid.

    Endpoints are nan.  The error output propagates per-point value errors
    through the stencil; for a genuinely convex (concave) function the
    estimate is nonnegative (nonpositive) up to exactly this noise, with
    no truncation term.
    """
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=float)
    errs = np.zeros_like(vals) if errors is None else np.asarray(errors, dtype=float)
    out = np.full_like(vals, np.nan)
    out_err = np.full_like(vals, np.nan)
    for i in range(1, len(ts) - 1):
        hp = ts[i + 1] - ts[i]
        hm = ts[i] - ts[i - 1]
        slope_up = (vals[i + 1] - vals[i]) / hp
        slope_dn = (vals[i] - vals[i - 1]) / hm
        out[i] = 2.0 * (slope_up - slope_dn) / (hp + hm)
        noise = (
            errs[i + 1] / hp + errs[i] * (1.0 / hp + 1.0 / hm) + errs[i - 1] / hm
        )
        out_err[i] = 2.0 * noise / (hp + hm)
    return out, out_err


def _sign_status(value: float, error: float, wanted: int) -> str:
    if abs(value) <= 3.0 * error:
        return "inconclusive"
    return "pass" if math.copysign(1.0, value) == wanted else "fail"


# ---------------------------------------------------------------------------
# Conjecture scan
# ---------------------------------------------------------------------------


@dataclass
class ScanRow:
    """Per-t record of the scan."""

    t: float
    h: float
    h_err: float
    J: float
    J_err: float
    d_fd: Tuple[Tuple[float, float], ...]  # (value, error) for n = 1..max_order
    d_sym: Tuple[float, ...]  # symbolic d^n h for n = 1..min(4, max_order)
    costa_margin: float  # -J' - J^2, zero for a single Gaussian
    costa_margin_err: float
    logJ_dd: float = math.nan
    logJ_dd_err: float = math.nan
    invJ_dd: float = math.nan
    invJ_dd_err: float = math.nan
    e2h_dd: float = math.nan
    e2h_dd_err: float = math.nan
    sign_status: Tuple[str, ...] = ()
    signs_ok: bool = True
    costa_ok: bool = True


@dataclass
class ScanResult:
    """Scan output plus the grid-level verdicts."""

    mixture: GaussianMixture
    max_order: int
    rows: List[ScanRow] = field(default_factory=list)

    def ts(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def all_signs_ok(self) -> bool:
        return all(r.signs_ok for r in self.rows)

    def all_costa_ok(self) -> bool:
        return all(r.costa_ok for r in self.rows)

    def invJ_dd_has_both_signs(self) -> bool:
        """Both curvature signs present, each clearing its noise estimate."""
        pos = neg = False
        for r in self.rows:
            if not math.isfinite(r.invJ_dd):
                continue
            if r.invJ_dd > 3.0 * r.invJ_dd_err:
                pos = True
            elif r.invJ_dd < -3.0 * r.invJ_dd_err:
                neg = True
        return pos and neg

    def logJ_convexity_violations(self, tol: float = 0.0) -> int:
        count = 0
        for r in self.rows:
            if math.isfinite(r.logJ_dd) and r.logJ_dd < -(tol + 3.0 * r.logJ_dd_err):
                count += 1
        return count


_SYM_ORDERS = 4


def _scan_row_core(
    mix: GaussianMixture, t: float, max_order: int, tol: float
) -> ScanRow:
    h_res = entropy_result(mix, t, tol)
    j_res = fisher_result(mix, t, tol)
    d_fd = tuple(
        fd_entropy_deriv_result(mix, t, n, tol=tol) for n in range(1, max_order + 1)
    )
    d_sym = tuple(
        0.5 * functional_result(entropy_derivative(n), mix, t, tol).value
        for n in range(1, min(_SYM_ORDERS, max_order) + 1)
    )
    jprime = 2.0 * (d_sym[1] if len(d_sym) >= 2 else fd_entropy_deriv_result(mix, t, 2, tol=tol)[0])
    costa_margin = -jprime - j_res.value * j_res.value
    costa_err = 2.0 * tol + 2.0 * j_res.value * j_res.error + 1e-12 * abs(jprime)
    return ScanRow(
        t=t,
        h=h_res.value,
        h_err=h_res.error,
        J=j_res.value,
        J_err=j_res.error,
        d_fd=d_fd,
        d_sym=d_sym,
        costa_margin=costa_margin,
        costa_margin_err=costa_err,
    )


def scan_conjectures(
    mix: GaussianMixture,
    t_grid: Sequence[float],
    max_order: int = 4,
    tol: float = DEFAULT_TOL,
    threads: Optional[int] = None,
) -> ScanResult:
    """Evaluate the sign conjectures on a t-grid.

    Asserted per row (never on inconclusive data): the derivative signs
    alternate starting positive, the entropy power has nonpositive
    curvature, and -J' >= J^2.  The curvatures of log J and 1/J are
    recorded; 1/J is expected to show both signs for well-separated
    mixtures and gets no verdict.
    """
    ts = [float(t) for t in t_grid]
    if any(t <= 0 for t in ts) or sorted(ts) != ts:
        raise ValueError("grid must be positive and strictly increasing")
    workers = threads if threads is not None else _worker_count()
    if workers > 1 and len(ts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: _scan_row_core(mix, t, max_order, tol), ts))
    else:
        rows = [_scan_row_core(mix, t, max_order, tol) for t in ts]

    h_vals = [r.h for r in rows]
    h_errs = [r.h_err for r in rows]
    j_vals = [r.J for r in rows]
    j_errs = [r.J_err for r in rows]

    # per-point noise floors include one ulp of the stored value, which
    # dominates when the quadrature is machine-exact
    logj_dd, logj_err = second_difference(
        ts, np.log(j_vals), [max(e / v, 3e-16) for v, e in zip(j_vals, j_errs)]
    )
    invj_dd, invj_err = second_difference(
        ts,
        [1.0 / v for v in j_vals],
        [max(e / (v * v), 3e-16 / v) for v, e in zip(j_vals, j_errs)],
    )
    e2h = [math.exp(2.0 * v) for v in h_vals]
    e2h_dd, e2h_err = second_difference(
        ts, e2h, [2.0 * p * e for p, e in zip(e2h, h_errs)]
    )

    for i, row in enumerate(rows):
        row.logJ_dd = float(logj_dd[i])
        row.logJ_dd_err = float(logj_err[i])
        row.invJ_dd = float(invj_dd[i])
        row.invJ_dd_err = float(invj_err[i])
        row.e2h_dd = float(e2h_dd[i])
        row.e2h_dd_err = float(e2h_err[i])

        status = []
        ok = True
        for n, (value, error) in enumerate(row.d_fd, start=1):
            wanted = 1 if n % 2 else -1
            verdict = _sign_status(value, error, wanted)
            status.append(verdict)
            ok = ok and verdict != "fail"
        for n, value in enumerate(row.d_sym, start=1):
            wanted = 1 if n % 2 else -1
            verdict = _sign_status(value, tol * 3, wanted)
            status.append(verdict)
            ok = ok and verdict != "fail"
        row.sign_status = tuple(status)
        row.signs_ok = ok

        costa_ok = row.costa_margin >= -3.0 * row.costa_margin_err
        if math.isfinite(row.e2h_dd):
            costa_ok = costa_ok and row.e2h_dd <= 3.0 * row.e2h_dd_err
        row.costa_ok = costa_ok

    return ScanResult(mix, max_order, rows)


CSV_HEADER = (
    "t,h,J,d1_fd,d2_fd,d3_fd,d4_fd,d1_sym,d2_sym,d3_sym,d4_sym,"
    "logJ_dd,invJ_dd,e2h_dd,costa_ok,signs_ok"
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def scan_to_csv(result: ScanResult) -> str:
    """Render the scan in the stable CSV schema (first four orders)."""
    lines = [CSV_HEADER]
    for row in result.rows:
        d_fd = [row.d_fd[i][0] if i < len(row.d_fd) else math.nan for i in range(4)]
        d_sym = [row.d_sym[i] if i < len(row.d_sym) else math.nan for i in range(4)]
        fields = (
            [_fmt(row.t), _fmt(row.h), _fmt(row.J)]
            + [_fmt(v) for v in d_fd]
            + [_fmt(v) for v in d_sym]
            + [_fmt(row.logJ_dd), _fmt(row.invJ_dd), _fmt(row.e2h_dd)]
            + [str(int(row.costa_ok)), str(int(row.signs_ok))]
        )
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# The covariance-preserving interpolation W_t = sqrt(t) X + sqrt(1-t) Z
# ---------------------------------------------------------------------------


@dataclass
class WtRow:
    t: float
    s: float  # 1/t - 1, the equivalent flow time
    hW: float
    hW_err: float
    JW: float
    txz_margin: float  # -J'(Y_s) + t^2 - 2 t J(Y_s)
    txz_err: float
    hW_dd: float = math.nan
    hW_dd_err: float = math.nan
    JW_dd: float = math.nan


@dataclass
class WtReport:
    mixture: GaussianMixture
    rows: List[WtRow]

    def concavity_ok(self, tol: float = 1e-8) -> bool:
        return all(
            not math.isfinite(r.hW_dd) or r.hW_dd <= tol + 3.0 * r.hW_dd_err
            for r in self.rows
        )

    def txz_ok(self) -> bool:
        return all(r.txz_margin >= -3.0 * r.txz_err for r in self.rows)

    def jw_dd_has_both_signs(self) -> bool:
        dd = np.array([r.JW_dd for r in self.rows])
        finite = dd[np.isfinite(dd)]
        return bool(np.any(finite > 0) and np.any(finite < 0))


def wt_checks(
    mix: GaussianMixture,
    t_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    threads: Optional[int] = None,
) -> WtReport:
    """Concavity/convexity checks for the interpolation on 0 < t < 1.

    Uses the scaling identity h(W_t) = h(X + sqrt(1/t - 1) Z) + log(t)/2
    and J(W_t) = J(X + sqrt(1/t - 1) Z) / t, so everything reduces to flow
    quantities at s = 1/t - 1.
    """
    ts = [float(t) for t in t_grid]
    if any(not 0 < t < 1 for t in ts) or sorted(ts) != ts:
        raise ValueError("grid must lie strictly inside (0, 1) and increase")

    c2 = entropy_derivative(2)

    def row_core(t: float) -> WtRow:
        s = 1.0 / t - 1.0
        h_res = entropy_result(mix, s, tol)
        j_res = fisher_result(mix, s, tol)
        jprime = functional_result(c2, mix, s, tol).value
        margin = -jprime + t * t - 2.0 * t * j_res.value
        margin_err = 2.0 * tol + 2.0 * t * j_res.error
        return WtRow(
            t=t,
            s=s,
            hW=h_res.value + 0.5 * math.log(t),
            hW_err=h_res.error,
            JW=j_res.value / t,
            txz_margin=margin,
            txz_err=margin_err,
        )

    workers = threads if threads is not None else _worker_count()
    if workers > 1 and len(ts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row_core, ts))
    else:
        rows = [row_core(t) for t in ts]

    hw_dd, hw_err = second_difference(
        ts, [r.hW for r in rows], [r.hW_err for r in rows]
    )
    jw_dd, _ = second_difference(ts, [r.JW for r in rows])
    for i, row in enumerate(rows):
        row.hW_dd = float(hw_dd[i])
        row.hW_dd_err = float(hw_err[i])
        row.JW_dd = float(jw_dd[i])
    return WtReport(mix, rows)


WT_CSV_HEADER = "t,s,hW,JW,hW_dd,JW_dd,txz_margin,txz_ok"


def wt_to_csv(report: WtReport) -> str:
    lines = [WT_CSV_HEADER]
    for r in report.rows:
        ok = int(r.txz_margin >= -3.0 * r.txz_err)
        lines.append(
            ",".join(
                [
                    _fmt(r.t),
                    _fmt(r.s),
                    _fmt(r.hW),
                    _fmt(r.JW),
                    _fmt(r.hW_dd),
                    _fmt(r.JW_dd),
                    _fmt(r.txz_margin),
                    str(ok),
                ]
            )
        )
    return "\n".join(lines) + "\n"
