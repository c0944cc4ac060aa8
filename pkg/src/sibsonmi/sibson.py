"""Sibson's alpha-mutual information, the information radius, maximal
leakage, and the two conditional variants obtained by minimising the
order-alpha divergence from the joint to a Markov-product factorisation
over Q_Z or over Q_{Y|Z}.

Closed forms are evaluated in log space with max subtraction.  Each
report carries the minimising distribution, and plugging that optimiser
back into the defining divergence reproduces the reported value (the
test suite checks this to 1e-8).  Sup-order values always come from
dedicated max-based formulas, never from a large finite order, so the
limit claims stay testable instead of circular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import (
    Alpha,
    Joint2,
    Joint3,
    Kernel,
    Pmf,
    tensor_power,
)
from .divergences import hellinger_integral, renyi_divergence
from .errors import ValidationError
from .oracles import min_weighted_radius

UNCOND = "UNCOND"
COND_Z = "COND_Z"
COND_YGZ = "COND_YGZ"
INFO_RADIUS = "INFO_RADIUS"
LEAKAGE = "LEAKAGE"
COND_LEAKAGE = "COND_LEAKAGE"


@dataclass(frozen=True, eq=False)
class MiReport:
    """Value of one mutual-information variant plus its minimiser."""

    alpha: Alpha
    value_nats: float
    variant: str
    optimizer: Pmf | Kernel | None = None


def _log(a: np.ndarray) -> np.ndarray:
    out = np.full(a.shape, -math.inf)
    pos = a > 0
    out[pos] = np.log(a[pos])
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    finite = logits[np.isfinite(logits)]
    if finite.size == 0:
        raise ValidationError("cannot normalise an all-zero optimiser")
    w = np.exp(logits - finite.max())
    w[~np.isfinite(logits)] = 0.0
    return w / w.sum()


def shannon_mi(jxy: Joint2) -> float:
    """Shannon mutual information of a two-way joint, in nats."""
    p = jxy.probs
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    pos = p > 0
    ratio = p[pos] / (np.outer(px, py)[pos])
    return float(np.sum(p[pos] * np.log(ratio)))


def conditional_mi(j: Joint3) -> float:
    """Shannon conditional mutual information I(X;Y|Z), in nats."""
    pz, reach, cxy, cx, cy = j.conditionals_given_z()
    total = 0.0
    for z in np.flatnonzero(reach):
        p = cxy[z]
        pos = p > 0
        ratio = p[pos] / np.outer(cx[z], cy[z])[pos]
        total += pz[z] * float(np.sum(p[pos] * np.log(ratio)))
    return total


def sibson_mi(jxy: Joint2, a) -> MiReport:
    """Sibson mutual information of order a for a two-way joint.

    Finite orders use the factored form
    (a/(a-1)) log sum_y (sum_x P_X(x) P(y|x)^a)^(1/a),
    whose minimiser over output pmfs is Q(y) prop. to the inner sum to
    the power 1/a.  Order one is Shannon MI (minimiser P_Y), the sup
    order is maximal leakage.
    """
    a = Alpha.coerce(a)
    p = jxy.probs
    px = p.sum(axis=1)
    if a.is_one:
        return MiReport(a, shannon_mi(jxy), UNCOND, Pmf(jxy.y_labels, p.sum(axis=0)))
    if a.is_inf:
        value = maximal_leakage(jxy)
        sup = px > 0
        col_max = (p[sup] / px[sup, None]).max(axis=0)
        q = col_max / col_max.sum()
        return MiReport(a, value, LEAKAGE, Pmf(jxy.y_labels, q))
    av = a.value
    sup = px > 0  # unsupported x rows carry no mass and no kernel row
    log_px = _log(px[sup])
    log_k = _log(p[sup]) - log_px[:, None]
    log_b = logsumexp(log_px[:, None] + av * log_k, axis=0)
    value = av / (av - 1.0) * float(logsumexp(log_b / av))
    q = _softmax(log_b / av)
    return MiReport(a, value, UNCOND, Pmf(jxy.y_labels, q))


def maximal_leakage(jxy: Joint2) -> float:
    """log sum_y max over supported x of P(y|x); the sup-order limit."""
    p = jxy.probs
    px = p.sum(axis=1)
    sup = px > 0
    k = p[sup] / px[sup, None]
    return float(np.log(k.max(axis=0).sum()))


def info_radius(measures, weights, a, grid_step: float | None = None) -> float:
    """Weighted divergence radius of a family of measures, order a > 1.

    (1/(a-1)) min over centres nu of
    log sum_i w_i exp((a-1) D_a(mu_i || nu)), evaluated by the grid
    minimiser; this quantity has no dedicated closed form here and the
    test suite pins it against the assembled-joint identity instead.
    """
    a = Alpha.coerce(a)
    if not (a.is_finite and a.value > 1):
        raise ValidationError("the information radius needs a finite order > 1")
    labels = measures[0].labels if hasattr(measures[0], "labels") else None
    if labels is not None:
        for m in measures:
            if getattr(m, "labels", labels) != labels:
                raise ValidationError("measures live on different alphabets")
    value, _ = min_weighted_radius(measures, weights, a, step=grid_step)
    return value


def _cond_log_structs(j: Joint3):
    pz, reach, cxy, cx, cy = j.conditionals_given_z()
    return pz, reach, _log(cxy), _log(cx), _log(cy), cxy, cx, cy


def cond_sibson_z(j: Joint3, a) -> MiReport:
    """Conditional Sibson information minimised over the Z marginal.

    Finite orders use
    (a/(a-1)) log sum_z P_Z(z) (sum_xy P(x,y|z)^a (P(x|z)P(y|z))^(1-a))^(1/a),
    with unreachable z skipped; order one is I(X;Y|Z) with minimiser
    P_Z; the sup order is log sum_z P_Z(z) max_xy P(x,y|z)/(P(x|z)P(y|z)).
    This variant is symmetric in X and Y.
    """
    a = Alpha.coerce(a)
    pz, reach, lcxy, lcx, lcy, cxy, cx, cy = _cond_log_structs(j)
    ridx = np.flatnonzero(reach)
    if a.is_one:
        return MiReport(a, conditional_mi(j), COND_Z, Pmf(j.z_labels, pz))
    if a.is_inf:
        m = np.zeros(len(pz))
        for z in ridx:
            pos = cxy[z] > 0
            m[z] = float(np.max(cxy[z][pos] / np.outer(cx[z], cy[z])[pos]))
        value = float(np.log(np.dot(pz[ridx], m[ridx])))
        q = pz * m
        return MiReport(a, value, COND_Z, Pmf(j.z_labels, q / q.sum()))
    av = a.value
    log_a_z = np.full(len(pz), -math.inf)
    for z in ridx:
        # cells off the support of P(.,.|z) contribute nothing; computing
        # them would mix -inf logs of different signs into NaN
        mask = cxy[z] > 0
        with np.errstate(invalid="ignore"):
            terms = av * lcxy[z] + (1.0 - av) * (
                lcx[z][:, None] + lcy[z][None, :]
            )
        log_a_z[z] = float(logsumexp(terms[mask]))
    lpz = _log(pz)
    value = av / (av - 1.0) * float(logsumexp(lpz[ridx] + log_a_z[ridx] / av))
    q = np.zeros(len(pz))
    q[ridx] = _softmax(lpz[ridx] + log_a_z[ridx] / av)
    return MiReport(a, value, COND_Z, Pmf(j.z_labels, q))


def cond_sibson_ygz(j: Joint3, a) -> MiReport:
    """Conditional Sibson information minimised over kernels Q_{Y|Z}.

    The minimisation splits per z, giving
    (1/(a-1)) log sum_z P_Z(z) (sum_y (sum_x P(x,y|z)^a P(x|z)^(1-a))^(1/a))^a
    with row minimisers Q(y|z) prop. to the inner sum to the power 1/a.
    Setting Z constant recovers the unconditional measure; the sup order
    is the conditional maximal leakage.  Order one degenerates to
    I(X;Y|Z) with minimiser P_{Y|Z}.
    """
    a = Alpha.coerce(a)
    pz, reach, lcxy, lcx, _, cxy, cx, cy = _cond_log_structs(j)
    ridx = np.flatnonzero(reach)
    ny = j.shape[1]
    if a.is_one:
        rows = np.zeros((len(pz), ny))
        rows[ridx] = cy[ridx]
        opt = Kernel(j.z_labels, j.y_labels, rows, reach)
        return MiReport(a, conditional_mi(j), COND_YGZ, opt)
    if a.is_inf:
        value, rows = _cond_leakage_parts(j)
        opt = Kernel(j.z_labels, j.y_labels, rows, reach)
        return MiReport(a, value, COND_LEAKAGE, opt)
    av = a.value
    lpz = _log(pz)
    l_z = np.full(len(pz), -math.inf)
    rows = np.zeros((len(pz), ny))
    for z in ridx:
        mask = cxy[z] > 0
        with np.errstate(invalid="ignore"):
            raw = av * lcxy[z] + (1.0 - av) * lcx[z][:, None]
        raw = np.where(mask, raw, -math.inf)
        log_b = logsumexp(raw, axis=0)
        l_z[z] = av * float(logsumexp(log_b / av))
        rows[z] = _softmax(log_b / av)
    value = float(logsumexp(lpz[ridx] + l_z[ridx])) / (av - 1.0)
    opt = Kernel(j.z_labels, j.y_labels, rows, reach)
    return MiReport(a, value, COND_YGZ, opt)


def _cond_leakage_parts(j: Joint3):
    """Per-z leakage sums and the rows attaining the sup-order minimum."""
    pz, reach, cxy, cx, _ = j.conditionals_given_z()
    nz, ny = j.shape[2], j.shape[1]
    rows = np.zeros((nz, ny))
    sums = np.zeros(nz)
    for z in np.flatnonzero(reach):
        sup = cx[z] > 0
        ratios = cxy[z][sup] / cx[z][sup, None]  # P(y | x, z) on support
        m = ratios.max(axis=0)
        sums[z] = m.sum()
        rows[z] = m / m.sum()
    value = float(np.log(sums[reach].max()))
    return value, rows


def cond_maximal_leakage(j: Joint3) -> float:
    """max over reachable z of log sum_y max over supported x of P(y|x,z).

    The sup-order limit of the kernel-minimised conditional measure.
    """
    value, _ = _cond_leakage_parts(j)
    return value


def lmgf_representation(j: Joint3, a) -> tuple[float, float, float]:
    """Three routes to the Z-minimised measure that must coincide.

    Returns the closed form, the route through per-z divergences
    (a/(a-1)) log E_Z[exp(((a-1)/a) D_a(P_XY|Z || P_X|Z P_Y|Z))], and
    the route through per-z Hellinger integrals
    (a/(a-1)) log E_Z[(E_prod[(dP/dprod)^a])^(1/a)].  The second and
    third are computed with the divergence module, not the closed form.
    """
    a = Alpha.coerce(a)
    if not (a.is_finite and a.value > 1):
        raise ValidationError("the representation identity needs a finite order > 1")
    av = a.value
    lhs = cond_sibson_z(j, a).value_nats
    pz, reach, cxy, cx, cy = j.conditionals_given_z()
    ridx = np.flatnonzero(reach)
    d_terms = np.empty(len(ridx))
    h_terms = np.empty(len(ridx))
    for k, z in enumerate(ridx):
        prod = np.outer(cx[z], cy[z])
        d = renyi_divergence(cxy[z], prod, a)
        h = hellinger_integral(cxy[z], prod, a)
        if math.isinf(d) or math.isinf(h):
            return lhs, math.inf, math.inf
        d_terms[k] = (av - 1.0) / av * d
        h_terms[k] = math.log(h) / av if h > 0 else -math.inf
    lpz = np.log(pz[ridx])
    rhs1 = av / (av - 1.0) * float(logsumexp(lpz + d_terms))
    rhs2 = av / (av - 1.0) * float(logsumexp(lpz + h_terms))
    return lhs, rhs1, rhs2


def additivity_check(j: Joint3, a, n: int, cell_cap: int | None = None):
    """Tensorisation probe: the Z-minimised measure of the n-fold power
    against n times the single-letter value.  Returns ``(lhs, rhs)``.
    """
    a = Alpha.coerce(a)
    if not a.is_finite:
        raise ValidationError("the additivity probe needs a finite order")
    lhs = cond_sibson_z(tensor_power(j, n, cell_cap=cell_cap), a).value_nats
    rhs = n * cond_sibson_z(j, a).value_nats
    return lhs, rhs
