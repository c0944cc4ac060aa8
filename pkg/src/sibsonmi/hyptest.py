"""Composite hypothesis testing: iid triples from the joint (null)
against iid triples from Q_Z P(x|z) P(y|z) with Q_Z arbitrary
(alternative).

The per-symbol statistic is log(P(x,y|z) / (P(x|z) P(y|z))): it is free
of Q_Z, so one deterministic threshold test covers the whole composite
alternative.  The test decides the alternative when the score sum falls
below n tau.  Small n is handled exactly by convolving the quantised
per-symbol score distribution; larger n by seeded Monte Carlo.  The
worst-case type-2 rate is certified on a Q_Z grid (plus the point P_Z)
over the reachable-z simplex; a grid can only over-state the rate, so
the certified claim keeps an explicit 1e-3 margin below the grid
minimum and everything is labelled per fixed n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Alpha, Joint3
from .errors import (
    InequalityViolation,
    ResourceLimitError,
    ShapeMismatchError,
    ValidationError,
)
from .oracles import simplex_grid
from .sibson import cond_sibson_z

SCORE_QUANT = 1e-9  # scores are pooled on this lattice before convolution
STATE_CAP = 10**6
EXACT_DP = "EXACT_DP"
MONTE_CARLO = "MONTE_CARLO"
CHECK_TOL = 1e-9
RATE_MARGIN = 1e-3
_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True, eq=False)
class ThresholdTest:
    """Per-triple score table with an acceptance threshold.

    Decides the alternative exactly when the n-symbol score sum is
    below n * tau.  Scores are -inf off the support of P(.,.|z), which
    is where only the alternative can put mass.
    """

    scores: np.ndarray  # (nx, ny, nz), read-only, -inf allowed
    tau: float
    n: int


def threshold_test(j: Joint3, tau: float, n: int) -> ThresholdTest:
    """Build the Q_Z-free log-ratio test for a joint."""
    if n < 1:
        raise ValidationError(f"sample length must be >= 1, got {n}")
    _, reach, cxy, cx, cy = j.conditionals_given_z()
    nx, ny, nz = j.shape
    scores = np.full((nx, ny, nz), -math.inf)
    for z in np.flatnonzero(reach):
        pos = cxy[z] > 0
        denom = np.outer(cx[z], cy[z])
        s = np.full((nx, ny), -math.inf)
        s[pos] = np.log(cxy[z][pos] / denom[pos])
        scores[:, :, z] = s
    scores.flags.writeable = False
    return ThresholdTest(scores=scores, tau=float(tau), n=int(n))


@dataclass(frozen=True)
class QzRow:
    """Type-2 behaviour of one alternative on the grid."""

    qz: tuple[float, ...]
    type2: float
    rate: float
    halfwidth: float = 0.0


@dataclass(frozen=True, eq=False)
class ErrorReport:
    p1: float
    p2_worst: float
    rate_R: float
    method: str
    n: int
    seed: int | None = None
    p1_halfwidth: float = 0.0
    qz_table: tuple[QzRow, ...] = ()


def _quantize(scores: np.ndarray) -> np.ndarray:
    q = np.full(scores.shape, np.iinfo(np.int64).min, dtype=np.int64)
    finite = np.isfinite(scores)
    q[finite] = np.round(scores[finite] / SCORE_QUANT).astype(np.int64)
    return q


def _base_dist(flat_probs, flat_q, finite_mask):
    """Pool a per-symbol distribution on the quantised score lattice.

    Returns ``(dict score->prob over finite scores, mass on -inf)``.
    """
    dist: dict[int, float] = {}
    inf_mass = 0.0
    for p, s, ok in zip(flat_probs, flat_q, finite_mask):
        if p <= 0:
            continue
        if ok:
            dist[int(s)] = dist.get(int(s), 0.0) + float(p)
        else:
            inf_mass += float(p)
    return dist, inf_mass


def _convolve(base: dict[int, float], n: int, cap: int = STATE_CAP):
    dist = {0: 1.0}
    for _ in range(n):
        nxt: dict[int, float] = {}
        for s1, p1 in dist.items():
            for s2, p2 in base.items():
                key = s1 + s2
                nxt[key] = nxt.get(key, 0.0) + p1 * p2
        if len(nxt) > cap:
            raise ResourceLimitError(
                f"score-sum support exceeded the {cap}-state cap"
            )
        dist = nxt
    return dist


def _mass_below(dist: dict[int, float], threshold: float) -> float:
    return sum(p for s, p in dist.items() if s * SCORE_QUANT < threshold)


def _qz_grid(j: Joint3, step: float):
    """Grid over the reachable-z simplex, embedded, plus the point P_Z."""
    pz = j.probs.sum(axis=(0, 1))
    reach = pz > 0
    idx = np.flatnonzero(reach)
    grid_r = simplex_grid(len(idx), step)
    grid = np.zeros((grid_r.shape[0] + 1, j.shape[2]))
    grid[:-1, idx] = grid_r
    grid[-1] = pz
    return grid


def _alt_flat(j: Joint3, qz: np.ndarray) -> np.ndarray:
    _, reach, _, cx, cy = j.conditionals_given_z()
    if np.any((qz > 0) & ~reach):
        raise ValidationError(
            "alternative weights a z symbol with no conditional structure"
        )
    return np.einsum("zx,zy,z->xyz", cx, cy, qz).ravel()


def _check_test(j: Joint3, test: ThresholdTest) -> None:
    if test.scores.shape != j.shape:
        raise ShapeMismatchError("score table does not match the joint shape")


def exact_errors(
    j: Joint3,
    test: ThresholdTest,
    qz_grid_step: float = 0.01,
    state_cap: int = STATE_CAP,
) -> ErrorReport:
    """Exact error probabilities by convolution over quantised scores.

    ``p1`` is the null mass of score sums below n tau; for every grid
    alternative the type-2 error is its mass at or above n tau (any
    symbol off the null support scores -inf and is always rejected).
    ``rate_R`` is the grid minimum of -(1/n) log type2.
    """
    _check_test(j, test)
    n, tau = test.n, test.tau
    flat_p = j.probs.ravel()
    q = _quantize(test.scores).ravel()
    finite = np.isfinite(test.scores).ravel()
    if tau == -math.inf:
        null_below = 0.0
    elif tau == math.inf:
        null_below = 1.0
    else:
        base_null, null_inf = _base_dist(flat_p, q, finite)
        if null_inf > 0:
            raise ValidationError(
                "null distribution puts mass off its own product support"
            )
        null_dist = _convolve(base_null, n, state_cap)
        null_below = _mass_below(null_dist, n * tau)
    rows = []
    for qz in _qz_grid(j, qz_grid_step):
        flat_alt = _alt_flat(j, qz)
        if tau == -math.inf:
            type2 = 1.0
        elif tau == math.inf:
            type2 = 0.0
        else:
            # sequences containing a -inf score sum to -inf < n tau and
            # are always rejected, so only the defective finite part of
            # the n-fold convolution can sit at or above the threshold
            base_alt, _ = _base_dist(flat_alt, q, finite)
            alt_dist = _convolve(base_alt, n, state_cap)
            finite_mass = sum(alt_dist.values())
            type2 = finite_mass - _mass_below(alt_dist, n * tau)
            type2 = min(max(type2, 0.0), 1.0)
        rate = 0.0 if type2 >= 1.0 else (
            math.inf if type2 <= 0 else -math.log(type2) / n
        )
        rows.append(QzRow(qz=tuple(float(v) for v in qz), type2=type2, rate=rate))
    p2_worst = max(r.type2 for r in rows)
    rate_r = min(r.rate for r in rows)
    return ErrorReport(
        p1=null_below,
        p2_worst=p2_worst,
        rate_R=rate_r,
        method=EXACT_DP,
        n=n,
        seed=None,
        qz_table=tuple(rows),
    )


def _agresti_coull_halfwidth(successes: float, trials: int) -> float:
    z2 = _Z95 * _Z95
    n_t = trials + z2
    p_t = (successes + z2 / 2.0) / n_t
    return _Z95 * math.sqrt(p_t * (1.0 - p_t) / n_t)


def monte_carlo_errors(
    j: Joint3,
    test: ThresholdTest,
    qz_list,
    trials: int,
    seed: int,
) -> ErrorReport:
    """Seeded sampling estimate of the same quantities at larger n.

    Reports point estimates with 95% binomial (Agresti-Coull)
    half-widths; identical seeds give identical reports.
    """
    _check_test(j, test)
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    n, tau = test.n, test.tau
    rng = np.random.default_rng(seed)
    values = np.where(
        np.isfinite(test.scores).ravel(),
        _quantize(test.scores).ravel() * SCORE_QUANT,
        -math.inf,
    )
    cells = values.shape[0]

    def sample_sums(flat_probs: np.ndarray) -> np.ndarray:
        idx = rng.choice(cells, size=(trials, n), p=flat_probs / flat_probs.sum())
        return values[idx].sum(axis=1)

    null_sums = sample_sums(j.probs.ravel())
    p1_hits = int(np.count_nonzero(null_sums < n * tau))
    p1 = p1_hits / trials
    rows = []
    for qz in qz_list:
        qz_arr = np.asarray(qz.probs if hasattr(qz, "probs") else qz, dtype=float)
        alt_sums = sample_sums(_alt_flat(j, qz_arr))
        hits = int(np.count_nonzero(alt_sums >= n * tau))
        type2 = hits / trials
        rate = math.inf if type2 <= 0 else -math.log(type2) / n
        rows.append(
            QzRow(
                qz=tuple(float(v) for v in qz_arr),
                type2=type2,
                rate=rate,
                halfwidth=_agresti_coull_halfwidth(hits, trials),
            )
        )
    p2_worst = max((r.type2 for r in rows), default=0.0)
    rate_r = min((r.rate for r in rows), default=math.inf)
    return ErrorReport(
        p1=p1,
        p2_worst=p2_worst,
        rate_R=rate_r,
        method=MONTE_CARLO,
        n=n,
        seed=seed,
        p1_halfwidth=_agresti_coull_halfwidth(p1_hits, trials),
        qz_table=tuple(rows),
    )


@dataclass(frozen=True, eq=False)
class Theorem6Report:
    """Premise-conditioned decay bound on the null acceptance mass."""

    lhs: float  # 1 - p1, exact
    rhs: float  # exp(-((a-1)/a) n (R - I^Z))
    claimed_rate: float
    grid_rate: float
    certified: bool
    alpha: Alpha
    n: int
    i_alpha_z: float
    exact: ErrorReport

    @property
    def empirical_exponent(self) -> float:
        """(1/n) log(1 - p1); -inf when the null is never accepted."""
        if self.lhs <= 0:
            return -math.inf
        return math.log(self.lhs) / self.n

    @property
    def bound_exponent(self) -> float:
        return -_alpha_frac(self.alpha) * (self.claimed_rate - self.i_alpha_z)


def _alpha_frac(a: Alpha) -> float:
    return 1.0 if a.is_inf else (a.value - 1.0) / a.value


def _structurally_silent(test: ThresholdTest) -> bool:
    # with every finite score below tau no sequence can reach the
    # threshold, so the type-2 error is exactly 0 for every alternative
    finite = test.scores[np.isfinite(test.scores)]
    return finite.size == 0 or float(finite.max()) < test.tau


def theorem6_check(
    j: Joint3,
    test: ThresholdTest,
    a,
    qz_grid_step: float = 0.01,
    claimed_rate: float | None = None,
) -> Theorem6Report:
    """Check 1 - p1 <= exp(-((a-1)/a) n (R - I^Z(X,Y|Z))).

    The premise (type-2 error <= exp(-nR) for every alternative) is
    certified only when the grid minimum rate exceeds the claimed R by
    the 1e-3 margin, or when no finite score reaches the threshold at
    all (then the type-2 error vanishes identically).  Uncertified
    reports carry no assertion.  With ``claimed_rate=None`` the claim is
    the grid rate minus the margin.  Raises InequalityViolation if a
    certified check fails beyond 1e-9.
    """
    a = Alpha.coerce(a)
    if a.is_one or (a.is_finite and a.value <= 1.0):
        raise ValidationError("the decay bound needs an order above 1")
    er = exact_errors(j, test, qz_grid_step=qz_grid_step)
    grid_rate = er.rate_R
    silent = _structurally_silent(test)
    if claimed_rate is None:
        if silent:
            claimed = math.inf
        elif math.isinf(grid_rate):
            claimed = math.inf  # grid says 0 everywhere but no structural proof
        else:
            claimed = grid_rate - RATE_MARGIN
    else:
        claimed = float(claimed_rate)
    if silent:
        certified = True
    elif math.isinf(grid_rate):
        certified = False  # cannot extrapolate exact zeros off the grid
    else:
        certified = claimed > 0 and grid_rate >= claimed + RATE_MARGIN - 1e-15
    i_z = cond_sibson_z(j, a).value_nats
    frac = _alpha_frac(a)
    lhs = 1.0 - er.p1
    if math.isinf(claimed):
        rhs = 0.0
    else:
        rhs = math.exp(-frac * test.n * (claimed - i_z))
    report = Theorem6Report(
        lhs=lhs,
        rhs=rhs,
        claimed_rate=claimed,
        grid_rate=grid_rate,
        certified=certified,
        alpha=a,
        n=test.n,
        i_alpha_z=i_z,
        exact=er,
    )
    if certified and lhs > rhs + CHECK_TOL:
        raise InequalityViolation(
            f"decay bound failed at n={test.n}, order {a}: {lhs!r} > {rhs!r}"
        )
    return report


@dataclass(frozen=True)
class SweepRow:
    n: int
    alpha: Alpha
    empirical: float  # (1/n) log(1 - p1)
    bound: float  # -((a-1)/a) (R - I^Z)
    certified: bool


@dataclass(frozen=True, eq=False)
class SweepResult:
    rows: tuple[SweepRow, ...]
    best_bound: tuple[tuple[int, float], ...]  # per n, min over the order grid

    def row(self, n: int, a: Alpha) -> SweepRow:
        for r in self.rows:
            if r.n == n and r.alpha == a:
                return r
        raise KeyError((n, a))


def exponent_sweep(
    j: Joint3,
    test: ThresholdTest,
    a_grid,
    n_grid,
    qz_grid_step: float = 0.01,
    claimed_rate: float | None = None,
) -> SweepResult:
    """Tabulate empirical decay exponents against the per-order bounds.

    One exact-error computation per n; the order grid (finite > 1 and
    the symbolic sup order are both allowed) then prices the bound
    exponent -((a-1)/a)(R - I^Z).  ``best_bound`` optimises over the
    grid for each n, so it is at most every single-order bound.
    """
    alphas = [Alpha.coerce(a) for a in a_grid]
    for a in alphas:
        if a.is_one or (a.is_finite and a.value <= 1.0):
            raise ValidationError("sweep orders must exceed 1")
    rows = []
    best = []
    for n in n_grid:
        t_n = replace(test, n=int(n))
        er = exact_errors(j, t_n, qz_grid_step=qz_grid_step)
        silent = _structurally_silent(t_n)
        if claimed_rate is None:
            if silent or math.isinf(er.rate_R):
                claimed = math.inf
            else:
                claimed = er.rate_R - RATE_MARGIN
        else:
            claimed = float(claimed_rate)
        if silent:
            certified = True
        elif math.isinf(er.rate_R):
            certified = False
        else:
            certified = claimed > 0 and er.rate_R >= claimed + RATE_MARGIN - 1e-15
        lhs = 1.0 - er.p1
        empirical = -math.inf if lhs <= 0 else math.log(lhs) / n
        n_best = math.inf
        for a in alphas:
            i_z = cond_sibson_z(j, a).value_nats
            if math.isinf(claimed):
                bound = -math.inf
            else:
                bound = -_alpha_frac(a) * (claimed - i_z)
            rows.append(
                SweepRow(
                    n=int(n), alpha=a, empirical=empirical, bound=bound,
                    certified=certified,
                )
            )
            n_best = min(n_best, bound)
        best.append((int(n), n_best))
    return SweepResult(rows=tuple(rows), best_bound=tuple(best))
