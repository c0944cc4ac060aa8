"""Contraction behaviour of the order-a Hellinger integral under a
Markov kernel, and the additive strong-data-processing checks it feeds.

Two ratio functionals are tracked.  The literal ratio
D(K mu || K nu) / D(mu || nu) tends to 1 as mu -> nu because the
Hellinger integral of two equal measures is 1, not 0; the normalised
variant subtracts that baseline from numerator and denominator and is
the usual f-divergence contraction coefficient.  Both are reported.
The additive inequalities below consume the searched *lower* bound of
the literal ratio: its log is more negative than the true value, which
makes every check strictly harder, so a pass certifies the inequality
on the instance and can never be an artifact of an unlucky search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Alpha, Joint2, Joint4, Kernel
from .errors import (
    InequalityViolation,
    PreconditionError,
    ValidationError,
)
from .sibson import cond_sibson_z, sibson_mi

CHECK_TOL = 1e-9
_ASCENT_FLOOR = 1e-9  # keep ascent iterates strictly inside the simplex


@dataclass(frozen=True, eq=False)
class ContractionEstimate:
    """Best ratio values found by seeded search (lower bounds on the sups)."""

    alpha: Alpha
    eta_normalized: float
    eta_ratio_lower: float
    witness_normalized: tuple[np.ndarray, np.ndarray]
    witness_ratio: tuple[np.ndarray, np.ndarray]
    budget: int
    seed: int


def _hellinger_rows(ps: np.ndarray, qs: np.ndarray, av: float) -> np.ndarray:
    """Row-wise sum p^a q^(1-a) with the usual zero conventions."""
    pos = ps > 0
    bad = pos & (qs <= 0)
    safe = np.where(qs > 0, qs, 1.0)
    terms = np.where(pos, ps**av * safe ** (1.0 - av), 0.0)
    terms = np.where(bad, 0.0, terms)
    out = terms.sum(axis=1)
    if av > 1:
        out[bad.any(axis=1)] = math.inf
    return out


def _pair_values(rows: np.ndarray, mus, nus, av):
    d_in = _hellinger_rows(mus, nus, av)
    d_out = _hellinger_rows(mus @ rows, nus @ rows, av)
    return d_in, d_out


def _literal(d_in, d_out):
    with np.errstate(invalid="ignore"):
        r = np.where(np.isinf(d_in), 0.0, d_out / d_in)
    return r


def _normalized(d_in, d_out):
    # numerators below 1e-13 are float junk (the integrals are O(1) sums),
    # and denominators below 1e-6 would let that junk masquerade as
    # contraction; both cutoffs only ever shrink the reported lower bound
    num = np.maximum(d_out - 1.0, 0.0)
    num = np.where(num < 1e-13, 0.0, num)
    den = d_in - 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 1e-6, num / den, -math.inf)
    return r


def contraction_search(
    k: Kernel, a, budget: int = 10_000, seed: int = 0
) -> ContractionEstimate:
    """Seeded random search plus coordinate ascent over input pairs.

    Maximises both ratio functionals over (mu, nu) on the input simplex
    and returns the best values found together with the witness pairs.
    The results are lower bounds on the respective suprema and are
    bit-for-bit reproducible for a given seed and budget; candidate
    evaluation is a vectorised max-reduction, so evaluation order does
    not matter.
    """
    a = Alpha.coerce(a)
    if not a.is_finite or a.value <= 1.0:
        raise ValidationError("contraction search needs a finite order > 1")
    if budget < 1:
        raise ValidationError("budget must be at least 1")
    if not np.all(k.reachable):
        raise ValidationError("contraction search needs fully reachable rows")
    av = a.value
    d = len(k.in_labels)
    rng = np.random.default_rng(seed)
    mus = rng.dirichlet(np.ones(d), size=budget)
    nus = rng.dirichlet(np.ones(d), size=budget)
    distinct = np.max(np.abs(mus - nus), axis=1) > 1e-12
    mus, nus = mus[distinct], nus[distinct]
    d_in, d_out = _pair_values(k.rows, mus, nus, av)
    lit = _literal(d_in, d_out)
    norm = _normalized(d_in, d_out)

    def ascend(score_fn, order_scores):
        top = np.argsort(order_scores)[-10:]
        best_val = -math.inf
        best_pair = None
        for idx in top:
            mu, nu = mus[idx].copy(), nus[idx].copy()
            val = float(score_fn(mu, nu))
            for it in range(100):
                delta = (0.1, 0.03, 0.01, 0.003, 0.001)[min(it // 20, 4)]
                improved = False
                for vec in (mu, nu):
                    for i in range(d):
                        for sign in (1.0, -1.0):
                            cand = vec.copy()
                            cand[i] = max(cand[i] + sign * delta, _ASCENT_FLOOR)
                            cand /= cand.sum()
                            old = vec.copy()
                            vec[:] = cand
                            trial = float(score_fn(mu, nu))
                            if trial > val + 1e-15:
                                val = trial
                                improved = True
                            else:
                                vec[:] = old
                if not improved:
                    break
            if val > best_val:
                best_val = val
                best_pair = (mu.copy(), nu.copy())
        return best_val, best_pair

    def lit_score(mu, nu):
        d_i, d_o = _pair_values(k.rows, mu[None, :], nu[None, :], av)
        return _literal(d_i, d_o)[0]

    def norm_score(mu, nu):
        d_i, d_o = _pair_values(k.rows, mu[None, :], nu[None, :], av)
        return _normalized(d_i, d_o)[0]

    lit_best, lit_wit = ascend(lit_score, lit)
    norm_best, norm_wit = ascend(norm_score, norm)
    lit_best = max(lit_best, float(np.max(lit, initial=0.0)))
    norm_best = max(norm_best, float(np.max(norm, initial=0.0)), 0.0)
    return ContractionEstimate(
        alpha=a,
        eta_normalized=norm_best,
        eta_ratio_lower=lit_best,
        witness_normalized=norm_wit,
        witness_ratio=lit_wit,
        budget=budget,
        seed=seed,
    )


def sdpi_conditional_check(
    j4: Joint4, a, est: ContractionEstimate
) -> tuple[float, float]:
    """Additive contraction inequality on a (Z,W) - X - Y chain.

    Checks I^Z(W,Y|Z) <= log(eta)/(a-1) + I^Z(W,X|Z) with eta the
    searched lower bound for the X -> Y channel's literal ratio; raises
    InequalityViolation beyond 1e-9, otherwise returns ``(lhs, rhs)``.
    """
    a = Alpha.coerce(a)
    if not a.is_finite or a.value <= 1.0:
        raise ValidationError("the additive inequality needs a finite order > 1")
    if not j4.is_markov_zw_x_y(1e-10):
        raise PreconditionError(
            "joint does not factor as P(w,x,z) P(y|x) within 1e-10"
        )
    lhs = cond_sibson_z(j4.marginal_wyz(), a).value_nats
    rhs = math.log(est.eta_ratio_lower) / (a.value - 1.0) + cond_sibson_z(
        j4.marginal_wxz(), a
    ).value_nats
    if lhs > rhs + CHECK_TOL:
        raise InequalityViolation(
            f"conditional contraction check failed: {lhs!r} > {rhs!r} + {CHECK_TOL}"
        )
    return lhs, rhs


def sdpi_unconditional_check(
    jxy: Joint2, channel_wx: Kernel, a, est: ContractionEstimate
) -> tuple[float, float]:
    """Additive contraction inequality along the chain W - X - Y.

    W is generated from X through ``channel_wx`` (so the chain holds by
    construction); checks I_a(W,Y) <= log(eta)/(a-1) + I_a(X,Y) with
    eta the searched lower bound for that channel.  Raises
    InequalityViolation beyond 1e-9, otherwise returns ``(lhs, rhs)``.
    """
    a = Alpha.coerce(a)
    if not a.is_finite or a.value <= 1.0:
        raise ValidationError("the additive inequality needs a finite order > 1")
    if channel_wx.in_labels != jxy.x_labels:
        raise PreconditionError("channel input alphabet must be the X axis")
    px = jxy.probs.sum(axis=1)
    if np.any((px > 0) & ~channel_wx.reachable):
        raise ValidationError("joint puts mass on an unreachable channel row")
    p_wy = np.einsum("xy,xw->wy", jxy.probs, channel_wx.rows)
    jwy = Joint2(channel_wx.out_labels, jxy.y_labels, p_wy)
    lhs = sibson_mi(jwy, a).value_nats
    rhs = math.log(est.eta_ratio_lower) / (a.value - 1.0) + sibson_mi(
        jxy, a
    ).value_nats
    if lhs > rhs + CHECK_TOL:
        raise InequalityViolation(
            f"unconditional contraction check failed: {lhs!r} > {rhs!r} + {CHECK_TOL}"
        )
    return lhs, rhs
