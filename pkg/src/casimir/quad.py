"""Adaptive quadrature, oscillatory transforms and series summation.

All integrands are vectorised: they receive a 1-D array of abscissae and
return an array whose last axis matches it.  Leading axes are treated as a
batch of independent integrals that share one adaptive partition, which is
how the cavity code evaluates many frequencies in a single pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

# Gauss-Kronrod 21-point rule (QUADPACK qk21); the 10-point Gauss nodes are
# the odd-indexed Kronrod nodes.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
    -0.148874338981631210884826001129720,
    -0.294392862701460198131126603103866,
    -0.433395394129247190799265943165784,
    -0.562757134668604683339000099272694,
    -0.679409568299024406234327365114874,
    -0.780817726586416897063717578345042,
    -0.865063366688984510732096688423493,
    -0.930157491355708226001207180059508,
    -0.973906528517171720077964012084452,
    -0.995657163025808080735527280689003,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
    0.295524224714752870173892994651338,
    0.269266719309996355091226921569469,
    0.219086362515982043995534934228163,
    0.149451349150580593145776339657697,
    0.066671344308688137593568809893332,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
    0.147739104901338491374841515972068,
    0.142775938577060080797094273138717,
    0.134709217311473325928054001771707,
    0.123491976262065851077958109831074,
    0.109387158802297641899210590325805,
    0.093125454583697605535065465083366,
    0.075039674810919952767043140916190,
    0.054755896574351996031381300244580,
    0.032558162307964727478818972459390,
    0.011694638867371874278064396062192,
])
_NODES = _XGK.size
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    """Accuracy request for an integral or a series.

    A result is accepted once its error estimate is below
    ``max(rel * |value|, abs)``.
    """

    rel: float = 1e-8
    abs: float = 0.0
    max_evals: int = 2_000_000

    def __post_init__(self):
        if not (self.rel >= 1e-14):
            raise ValueError(f"rel tolerance must be >= 1e-14, got {self.rel}")
        if not (self.abs >= 0.0):
            raise ValueError(f"abs tolerance must be >= 0, got {self.abs}")
        if self.max_evals < 64:
            raise ValueError(f"max_evals must be >= 64, got {self.max_evals}")

    def target(self, value):
        return np.maximum(self.rel * np.abs(value), self.abs)

    def scaled(self, factor: float, abs_floor: float = 0.0) -> "Tolerance":
        """Tighter copy used for sub-problems (rel never below 1e-14)."""
        return Tolerance(rel=max(self.rel * factor, 1e-14),
                         abs=max(self.abs * factor, abs_floor),
                         max_evals=self.max_evals)


@dataclass(frozen=True)
class NumericResult:
    """Value of an integral or series with its error bookkeeping.

    ``value`` and ``error_estimate`` are floats for scalar problems and arrays
    for batched integrands; ``converged`` is true only if every batch member
    met its tolerance.
    """

    value: float
    error_estimate: float
    evaluations: int
    converged: bool

    def __post_init__(self):
        if np.ndim(self.value) == 0:
            object.__setattr__(self, "value", float(self.value))
        if np.ndim(self.error_estimate) == 0:
            object.__setattr__(self, "error_estimate", float(self.error_estimate))
        object.__setattr__(self, "evaluations", int(self.evaluations))
        object.__setattr__(self, "converged", bool(np.all(self.converged)))


DEFAULT_TOLERANCE = Tolerance()


def _apply_rule(f, lefts, rights):
    centre = 0.5 * (lefts + rights)
    half = 0.5 * (rights - lefts)
    nodes = centre[:, None] + half[:, None] * _XGK
    y = np.asarray(f(nodes.ravel()))
    y = y.reshape(y.shape[:-1] + nodes.shape)
    kronrod = (y @ _WGK) * half
    gauss = (y[..., 1::2] @ _WG) * half
    absint = (np.abs(y) @ _WGK) * half
    return kronrod, np.abs(kronrod - gauss), absint


def _adaptive(f, edges, tol: Tolerance, panel_ids=None, n_panels=None):
    """Globally adaptive GK21 on the partition ``edges``.

    Returns ``(value, error, evaluations, converged, panel_values)`` where
    ``panel_values`` holds per-panel totals when ``panel_ids`` labels the
    initial intervals (otherwise ``None``).
    """
    edges = np.asarray(edges, dtype=float)
    lefts = edges[:-1].copy()
    rights = edges[1:].copy()
    if panel_ids is None:
        panel = np.zeros(lefts.size, dtype=int)
    else:
        panel = np.asarray(panel_ids, dtype=int)
    val, err, absint = _apply_rule(f, lefts, rights)
    evals = _NODES * lefts.size
    converged = False
    while True:
        total = val.sum(-1)
        error = err.sum(-1)
        resabs = absint.sum(-1)
        target = np.maximum(tol.target(total), 50.0 * _EPS * resabs)
        if np.all(error <= target):
            converged = True
            break
        if evals >= tol.max_evals:
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = err / target[..., None]
        ratio = np.where(np.isnan(ratio) | (err > 0) & (target[..., None] == 0),
                         np.inf, ratio)
        score = ratio.reshape(-1, lefts.size).max(axis=0)
        width = rights - lefts
        splittable = width > 64 * _EPS * np.maximum(np.abs(lefts), np.abs(rights))
        score = np.where(splittable, score, -1.0)
        top = score.max()
        if top <= 0:
            break
        cand = np.flatnonzero(score >= top / 4)
        room = (tol.max_evals - evals) // (2 * _NODES)
        if room <= 0:
            break
        if cand.size > room:
            cand = cand[np.argsort(score[cand])[::-1][:room]]
            cand.sort()
        mids = 0.5 * (lefts[cand] + rights[cand])
        new_l = np.concatenate([lefts[cand], mids])
        new_r = np.concatenate([mids, rights[cand]])
        nv, ne, na = _apply_rule(f, new_l, new_r)
        evals += _NODES * new_l.size
        keep = np.ones(lefts.size, dtype=bool)
        keep[cand] = False
        lefts = np.concatenate([lefts[keep], new_l])
        rights = np.concatenate([rights[keep], new_r])
        panel = np.concatenate([panel[keep], panel[cand], panel[cand]])
        val = np.concatenate([val[..., keep], nv], axis=-1)
        err = np.concatenate([err[..., keep], ne], axis=-1)
        absint = np.concatenate([absint[..., keep], na], axis=-1)

    # fixed left-to-right reduction order keeps results reproducible
    order = np.argsort(lefts, kind="stable")
    val = val[..., order]
    err = err[..., order]
    panel = panel[order]
    total = val.sum(-1)
    error = err.sum(-1)
    panel_values = None
    if n_panels is not None:
        flat = val.reshape(-1, val.shape[-1])
        panel_values = np.stack([np.bincount(panel, weights=row, minlength=n_panels)
                                 for row in flat]).reshape(val.shape[:-1] + (n_panels,))
    return total, error, evals, converged, panel_values


def _result(value, error, evals, converged) -> NumericResult:
    if np.ndim(value) == 0:
        value = float(value)
        error = float(error)
    return NumericResult(value=value, error_estimate=error, evaluations=int(evals),
                         converged=bool(np.all(converged)))


def integrate(f: Callable, a: float, b: float, tol: Tolerance = DEFAULT_TOLERANCE,
              breaks: Sequence[float] = ()) -> NumericResult:
    """Integrate ``f`` over the finite interval ``[a, b]``."""
    if not b > a:
        raise ValueError(f"need b > a, got [{a}, {b}]")
    inner = sorted(x for x in breaks if a < x < b)
    total, error, evals, ok, _ = _adaptive(f, [a, *inner, b], tol)
    return _result(total, error, evals, ok)


def integrate_half_line(f: Callable, tol: Tolerance = DEFAULT_TOLERANCE,
                        scale: float = 1.0,
                        breaks: Sequence[float] = ()) -> NumericResult:
    r"""Integrate ``f`` over :math:`(0, \infty)`.

    The half line is mapped to the unit interval by ``u = t/(t + scale)``;
    ``scale`` should be the length over which ``f`` varies.  Known kinks are
    passed in ``breaks`` so that the initial partition is aligned with them.

    Parameters
    ----------
    f : callable
        Vectorised integrand, ``f(t)`` with ``t`` a 1-D array.
    tol : Tolerance
        Requested accuracy.
    scale : float
        Positive length scale of the mapping.
    breaks : sequence of float
        Points in ``(0, inf)`` where ``f`` is not smooth.

    Returns
    -------
    NumericResult
        ``converged`` is false if the evaluation budget ran out first.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")

    def mapped(u):
        w = 1.0 - u
        t = scale * u / w
        return f(t) * (scale / (w * w))

    ub = sorted(b / (b + scale) for b in breaks if 0 < b < math.inf)
    edges = [0.0, *ub, 1.0]
    if len(edges) == 2:
        edges = [0.0, 0.5, 1.0]
    total, error, evals, ok, _ = _adaptive(mapped, edges, tol)
    return _result(total, error, evals, ok)


def radial_mode_integral(f: Callable, tol: Tolerance = DEFAULT_TOLERANCE,
                         scale: float = 1.0) -> NumericResult:
    r"""Per-unit-area transverse mode sum :math:`\frac{1}{2\pi}\int_0^\infty k f(k)\,dk`.

    This is the continuum limit of the sum over transverse wavevectors for an
    isotropic integrand, with the polar Jacobian ``k/(2 pi)`` included.
    """
    r = integrate_half_line(lambda k: k * f(k), tol, scale)
    return NumericResult(r.value / (2 * math.pi), r.error_estimate / (2 * math.pi),
                         r.evaluations, r.converged)


def wynn_epsilon(partial_sums: Sequence[float]) -> tuple[float, float]:
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns the highest-order even-column estimate and the distance to the
    previous estimate in that column, which serves as the error estimate.
    """
    s = [float(x) for x in partial_sums]
    if len(s) < 3:
        return s[-1], (abs(s[-1] - s[-2]) if len(s) == 2 else math.inf)
    prev = [0.0] * (len(s) + 1)
    cur = s
    estimates = [s[-2], s[-1]]
    column = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            d = cur[i + 1] - cur[i]
            if d == 0.0:
                break
            nxt.append(prev[i + 1] + 1.0 / d)
        else:
            prev, cur = cur, nxt
            column += 1
            if column % 2 == 0 and cur:
                estimates.append(cur[-1])
            continue
        if column % 2 == 0:
            # even column already stationary
            return cur[-1], abs(cur[-1] - estimates[-2]) if len(estimates) > 2 else 0.0
        break
    return estimates[-1], abs(estimates[-1] - estimates[-2])


def richardson_limit(partial_sums: Sequence[float], base: int = 4) -> tuple[float, float]:
    """Extrapolate partial sums assuming ``S_N = S + sum_j c_j N**-j``.

    Uses the partial sums at ``N = base * 2**j`` (``partial_sums[i]`` is the
    sum of the first ``i + 1`` terms) in a Romberg-style table, which stays
    well conditioned unlike fixed-order extrapolation at large ``N``.
    Returns the extrapolated value and an error estimate taken from the
    summed spread of the last table entries.
    """
    counts = []
    n = base
    while n <= len(partial_sums):
        counts.append(n)
        n *= 2
    if len(counts) < 3:
        raise ValueError("need partial sums up to at least 4 * base")
    table = [[partial_sums[c - 1]] for c in counts]
    for j in range(1, len(counts)):
        for k in range(1, j + 1):
            prev = table[j][k - 1]
            table[j].append(prev + (prev - table[j - 1][k - 1]) / (2.0 ** k - 1.0))
    best = table[-1][-1]
    err = abs(best - table[-1][-2]) + abs(best - table[-2][-1])
    return best, err


def primed_sum(term: Callable, tol: Tolerance = DEFAULT_TOLERANCE, *,
               tail_bound: Optional[Callable[[int], float]] = None,
               accelerate: Optional[str] = None,
               max_terms: int = 100_000,
               chunk: int = 1,
               first_weight: float = 0.5) -> NumericResult:
    r"""Sum :math:`\frac12 a_0 + \sum_{n\ge1} a_n` with convergence control.

    Truncation happens when the tail bound drops below the tolerance.  If
    ``tail_bound(n)`` is given it must bound :math:`|\sum_{m>n} a_m|`;
    otherwise the ratio estimate ``|a_n| r/(1-r)`` with the observed ratio
    ``r`` is used.  For slowly decaying terms ``accelerate`` may be
    ``"epsilon"`` (Wynn) or ``"richardson"`` (polynomial in ``1/N``), in which
    case the extrapolated value is returned once two successive
    extrapolations agree.

    With ``chunk > 1`` the term function is called with an integer array of
    consecutive indices and must return an array.
    """
    if accelerate not in (None, "epsilon", "richardson"):
        raise ValueError(f"unknown acceleration {accelerate!r}")
    terms: list[float] = []
    partial: list[float] = []
    running = 0.0
    n = 0
    history: list[tuple[float, float]] = []
    seen: dict[int, float] = {}
    while n < max_terms:
        stop = min(n + chunk, max_terms)
        if chunk > 1:
            block = np.asarray(term(np.arange(n, stop)), dtype=float)
        else:
            block = [float(term(n))]
        for i, a in enumerate(block):
            a = float(a)
            w = first_weight if n + i == 0 else 1.0
            terms.append(w * a)
            running += w * a
            partial.append(running)
        n = stop

        value = running
        target = float(tol.target(value))
        if tail_bound is not None:
            tb = float(tail_bound(n - 1))
            if tb <= target:
                return NumericResult(value, tb, n, True)
        else:
            tb = _ratio_tail(terms)
            if tb <= target:
                return NumericResult(value, tb, n, True)
        if accelerate is not None and n >= 12:
            est = _accelerated(partial, accelerate)
            if est is not None:
                history.append(est)
                seen[n] = est[0]
                ok = est[1] <= float(tol.target(est[0]))
                if ok and accelerate == "epsilon":
                    # epsilon stalls on logarithmic convergence: require the
                    # estimate from half as many terms to agree as well
                    half = [v for m, v in seen.items() if m <= n // 2]
                    ok = bool(half) and abs(est[0] - half[-1]) <= float(tol.target(est[0]))
                if ok:
                    return NumericResult(est[0], est[1], n, True)

    if history:
        value, err = history[-1]
        # extrapolation that never settled: do not claim more than it moved
        err = max(err, abs(value - running), _ratio_tail(terms))
    else:
        value, err = running, _ratio_tail(terms)
    if tail_bound is not None and float(tail_bound(n - 1)) < err:
        value, err = running, float(tail_bound(n - 1))
    return NumericResult(value, err, n, False)


def _ratio_tail(terms: list[float]) -> float:
    # the n = 0 term is often of a different nature (e.g. the vacuum term)
    if len(terms) < 4:
        return math.inf
    recent = [abs(t) for t in terms[-4:]]
    if all(t == 0.0 for t in recent[-3:]) and len(terms) >= 3:
        return 0.0
    ratios = []
    for a, b in zip(recent[:-1], recent[1:]):
        if a == 0.0:
            if b == 0.0:
                continue
            return math.inf
        ratios.append(b / a)
    if not ratios:
        return 0.0
    r = max(ratios)
    if r >= 1.0:
        return math.inf
    # doubled: for algebraic decay n**-p the geometric formula undershoots by p/(p-1)
    return 2.0 * recent[-1] * r / (1.0 - r)


def _accelerated(partial: list[float], method: str) -> Optional[tuple[float, float]]:
    if method == "epsilon":
        return wynn_epsilon(partial[-16:])
    n = len(partial)
    # only at N = 4 * 2**j, where the Romberg table gains a row
    if n < 16 or n % 4 or (n // 4) & (n // 4 - 1):
        return None
    return richardson_limit(partial, 4)


def cosine_transform(f: Callable, x: float, tol: Tolerance = DEFAULT_TOLERANCE,
                     scale: float = 1.0) -> NumericResult:
    r"""Cosine transform :math:`2\int_0^\infty \cos(\xi x) f(\xi)\,d\xi`.

    For ``x > 0`` the half line is cut at the zeros of ``cos(xi x)``; the
    panel integrals are computed in vectorised blocks and their alternating
    partial sums are accelerated with the Wynn epsilon algorithm.  ``scale``
    is the decay length of ``f`` and only shapes the initial partition.
    """
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    if x == 0:
        r = integrate_half_line(f, tol, scale)
        return NumericResult(2 * r.value, 2 * r.error_estimate, r.evaluations, r.converged)

    def g(xi):
        return 2.0 * np.cos(x * xi) * f(xi)

    half_period = math.pi / x
    first_zero = 0.5 * half_period
    # sub-breaks inside the first panel when f decays well before it
    hints = []
    h = scale
    while h < first_zero:
        hints.append(h)
        h *= 4.0

    panel_sums: list[float] = []
    partial: list[float] = []
    quad_error = 0.0
    evals = 0
    all_ok = True
    block = 8
    next_panel = 0
    estimates: list[float] = []
    block_tol = tol.scaled(0.1)
    while True:
        if next_panel == 0:
            edges = [0.0, *hints, first_zero]
            edges += [first_zero + half_period * j for j in range(1, block)]
            ids = [0] * (len(hints) + 1) + list(range(1, block))
        else:
            edges = [first_zero + half_period * (next_panel - 1 + j) for j in range(block + 1)]
            ids = list(range(block))
        total, error, ev, ok, per_panel = _adaptive(g, edges, block_tol,
                                                    panel_ids=ids, n_panels=block)
        evals += ev
        quad_error += float(error)
        all_ok &= bool(ok)
        for v in per_panel:
            panel_sums.append(float(v))
            partial.append(partial[-1] + float(v) if partial else float(v))
        next_panel += block
        running = partial[-1]
        target = float(tol.target(running))
        if next_panel == block:
            # later blocks are held to an absolute budget set by the first one
            block_tol = Tolerance(rel=block_tol.rel, abs=max(0.1 * target, block_tol.abs),
                                  max_evals=tol.max_evals)

        last = max(abs(v) for v in panel_sums[-2:])
        if last <= 0.05 * target:
            err = quad_error + last
            return NumericResult(running, err, evals, all_ok and err <= target)
        est, _ = wynn_epsilon(partial[-24:])
        estimates.append(est)
        if len(estimates) >= 2:
            acc_err = abs(estimates[-1] - estimates[-2])
            if acc_err <= 0.25 * float(tol.target(est)):
                err = quad_error + acc_err
                return NumericResult(est, err, evals, all_ok and err <= float(tol.target(est)))
        if evals >= tol.max_evals:
            value = estimates[-1]
            err = quad_error + (abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else abs(last))
            return NumericResult(value, err, evals, False)
        block = min(2 * block, 256)
