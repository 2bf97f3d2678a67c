"""Binary broadcast channels and their closed-form information bounds.

A channel is a row-stochastic 2x2 matrix: entry ``pij`` is the probability
that a child takes value ``j`` given its parent has value ``i``.  Everything
downstream (density evolution, couplings, thresholds) consumes the derived
quantities defined here: the stationary root law, the likelihood-ratio
coefficients ``c0`` and ``c1``, the hard-core parametrization, and the
closed-form bounds that decide when reconstruction of the root from deep
levels is impossible.

The hard-core family deserves a note: with occupation weight ``w`` the
matrix is ``[[1/(1+w), w/(1+w)], [1, 0]]``, i.e. an occupied parent forces
an empty child.  Its activity is ``lambda = w*(1+w)**k`` where ``k`` is the
branching number of the tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateChannel, InvalidParameter, UndefinedLimit

_ROW_TOL = 1e-12


@dataclass(frozen=True)
class BinaryChannel:
    """Row-stochastic 2x2 transition matrix with derived accessors.

    Parameters
    ----------
    p00, p01 : float
        First row: transition probabilities out of parent value 0.
    p10, p11 : float
        Second row: transition probabilities out of parent value 1.

    Raises
    ------
    InvalidParameter
        If an entry is outside [0, 1] or a row does not sum to 1.
    DegenerateChannel
        If ``p01 + p10 == 0`` (the stationary law would be undefined).
    """

    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        for name in ("p00", "p01", "p10", "p11"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParameter(f"{name} must be a finite number, got {v!r}")
            if v < -_ROW_TOL or v > 1 + _ROW_TOL:
                raise InvalidParameter(f"{name}={v} is not a probability")
        if abs(self.p00 + self.p01 - 1.0) > _ROW_TOL:
            raise InvalidParameter(f"first row sums to {self.p00 + self.p01}, not 1")
        if abs(self.p10 + self.p11 - 1.0) > _ROW_TOL:
            raise InvalidParameter(f"second row sums to {self.p10 + self.p11}, not 1")
        if self.p01 + self.p10 <= 0.0:
            raise DegenerateChannel("p01 + p10 = 0: stationary root law undefined")

    @property
    def pi0(self) -> float:
        """Stationary probability of value 0: p10 / (p01 + p10)."""
        return self.p10 / (self.p01 + self.p10)

    @property
    def pi1(self) -> float:
        return 1.0 - self.pi0

    @property
    def c0(self) -> float:
        """p01 / p00, or +inf when p00 = 0."""
        return self.p01 / self.p00 if self.p00 > 0 else math.inf

    @property
    def c1(self) -> float:
        """p11 / p10, or +inf when p10 = 0."""
        return self.p11 / self.p10 if self.p10 > 0 else math.inf

    @property
    def log_prior_ratio(self) -> float:
        """ln(pi0 / pi1); +-inf when a stationary weight vanishes."""
        if self.pi1 == 0.0:
            return math.inf
        if self.pi0 == 0.0:
            return -math.inf
        return math.log(self.pi0 / self.pi1)

    def as_dict(self) -> dict:
        return {"p00": self.p00, "p01": self.p01, "p10": self.p10, "p11": self.p11}


@dataclass(frozen=True)
class HardCoreParams:
    """Occupancy parametrization of the hard-core channel.

    ``lam`` is the activity ``w*(1+w)**k``; the field is named ``lam``
    because ``lambda`` is reserved in Python (serialized as "lambda").
    """

    k: int
    w: float
    lam: float

    def __post_init__(self):
        if abs(self.lam - lambda_of_w(self.w, self.k)) > 1e-10 * max(1.0, abs(self.lam)):
            raise InvalidParameter(
                f"lam={self.lam} is not w*(1+w)**k for w={self.w}, k={self.k}"
            )


def make_channel(p00: float, p10: float) -> BinaryChannel:
    """Build a channel from its first column; rows completed by stochasticity.

    Parameters
    ----------
    p00 : float
        Probability a child of a 0-parent is 0.
    p10 : float
        Probability a child of a 1-parent is 0.

    Returns
    -------
    BinaryChannel
    """
    for name, v in (("p00", p00), ("p10", p10)):
        if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
            raise InvalidParameter(f"{name}={v!r} is not a probability")
    return BinaryChannel(p00=float(p00), p01=1.0 - float(p00),
                         p10=float(p10), p11=1.0 - float(p10))


def symmetric_channel(eps: float) -> BinaryChannel:
    """Binary symmetric channel with flip probability ``eps``."""
    if not 0.0 <= eps <= 1.0:
        raise InvalidParameter(f"eps={eps} is not a probability")
    return make_channel(1.0 - eps, eps)


def hardcore_channel(w: float, k: int) -> tuple[BinaryChannel, HardCoreParams]:
    """Hard-core channel with occupation weight ``w`` on a k-ary tree.

    Parameters
    ----------
    w : float
        Positive occupation weight; the channel is
        ``[[1/(1+w), w/(1+w)], [1, 0]]``.
    k : int
        Branching number, used only to derive the activity.

    Returns
    -------
    (BinaryChannel, HardCoreParams)
    """
    if not (isinstance(w, (int, float)) and w > 0 and math.isfinite(w)):
        raise InvalidParameter(f"w must be positive and finite, got {w!r}")
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise InvalidParameter(f"k must be a positive integer, got {k!r}")
    c = BinaryChannel(p00=1.0 / (1.0 + w), p01=w / (1.0 + w), p10=1.0, p11=0.0)
    return c, HardCoreParams(k=int(k), w=float(w), lam=lambda_of_w(w, k))


def lambda_of_w(w: float, k: int) -> float:
    """Activity ``w*(1+w)**k``, evaluated in log space to avoid overflow."""
    if w <= 0:
        raise InvalidParameter(f"w must be positive, got {w}")
    return math.exp(math.log(w) + k * math.log1p(w))


def w_of_lambda(lam: float, k: int) -> float:
    """Invert the activity map: the unique ``w > 0`` with ``w*(1+w)**k = lam``.

    Solved as a monotone root-find in ``t = ln w``, which is robust for any
    positive activity and any branching number.
    """
    if not (isinstance(lam, (int, float)) and lam > 0 and math.isfinite(lam)):
        raise InvalidParameter(f"lambda must be positive and finite, got {lam!r}")
    target = math.log(lam)

    def h(t: float) -> float:
        return t + k * math.log1p(math.exp(t)) - target

    lo, hi = -745.0, max(1.0, target) + 1.0
    # h(lo) < 0 for any representable lam; widen hi if needed
    while h(hi) < 0:
        hi *= 2.0
    t = brentq(h, lo, hi, xtol=1e-15, rtol=8.9e-16)
    return math.exp(t)


def mossel_peres_lhs(c: BinaryChannel) -> float:
    """Column-based impossibility statistic for a binary channel.

    Reconstruction on the k-ary tree is impossible whenever this value is
    at most ``1/k``.

    Returns
    -------
    float
        ``(p10-p00)*(p01-p11) / min(p00+p10, p01+p11)``.
    """
    denom = min(c.p00 + c.p10, c.p01 + c.p11)
    if denom <= 0.0:
        raise DegenerateChannel("both entries of a channel column are 0")
    return (c.p10 - c.p00) * (c.p01 - c.p11) / denom


def geometric_mean_bound_lhs(c: BinaryChannel) -> float:
    """Sharper impossibility statistic based on geometric row means.

    Always at most :func:`mossel_peres_lhs`; reconstruction is impossible
    whenever this value is at most ``1/k``.

    Returns
    -------
    float
        ``(sqrt(p00*p11) - sqrt(p01*p10))**2``.
    """
    return (math.sqrt(c.p00 * c.p11) - math.sqrt(c.p01 * c.p10)) ** 2


def kesten_stigum_symmetric(eps: float, k: int) -> float:
    """Second-eigenvalue statistic ``k*(1-2*eps)**2`` for the symmetric channel.

    Reconstruction is possible if and only if this exceeds 1.
    """
    if not 0.0 <= eps <= 1.0:
        raise InvalidParameter(f"eps={eps} is not a probability")
    return k * (1.0 - 2.0 * eps) ** 2


def kesten_stigum_eps_c(k: int) -> float:
    """Critical flip probability ``(1 - 1/sqrt(k))/2`` of the symmetric family."""
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise InvalidParameter(f"k must be a positive integer, got {k!r}")
    return 0.5 * (1.0 - 1.0 / math.sqrt(k))


def kelly_threshold(k: int) -> float:
    """Uniqueness threshold ``k**k / (k-1)**(k+1)`` of the hard-core tree model.

    Computed in log space so large ``k`` does not overflow.
    """
    if not (isinstance(k, (int, np.integer)) and k >= 2):
        raise InvalidParameter(f"kelly_threshold requires integer k >= 2, got {k!r}")
    return math.exp(k * math.log(k) - (k + 1) * math.log(k - 1))


def llr_step(c: BinaryChannel, x):
    """One-child contribution ``g(x) = ln(1 + (c0-c1)/(exp(x)+c1))`` to the
    log-likelihood-ratio recursion.

    Vectorized over ``x``; extended-real rules: ``g(+inf) = 0`` always, and
    ``g(-inf) = ln(c0/c1)`` when ``c1 > 0``.

    Raises
    ------
    UndefinedLimit
        When ``x = -inf`` and ``c1 = 0`` (the update diverges).
    InvalidParameter
        When ``p00 = 0`` or ``p10 = 0`` (the coefficients are infinite).
    """
    if c.p00 <= 0.0 or c.p10 <= 0.0:
        raise InvalidParameter("llr_step requires p00 > 0 and p10 > 0")
    arr = np.asarray(x, dtype=np.float64)
    if c.c1 == 0.0 and np.any(np.isneginf(arr)):
        raise UndefinedLimit("llr_step at -inf is undefined when p11 = 0")
    with np.errstate(over="ignore"):
        out = np.log1p((c.c0 - c.c1) / (np.exp(arr) + c.c1))
    out = np.where(np.isposinf(arr), 0.0, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def gap_kernel(c: BinaryChannel, x):
    """Mean-gap kernel ``(p11 - p01) * g(x)`` driving the contraction analysis.

    Vectorized over ``x``; same extended-real rules and errors as
    :func:`llr_step`.
    """
    scale = c.p11 - c.p01
    if scale == 0.0:
        # rows equal in the second column: the kernel is identically 0
        out = np.zeros_like(np.asarray(x, dtype=np.float64))
        return float(out) if np.ndim(x) == 0 else out
    g = llr_step(c, x)
    return scale * g


def gap_kernel_peak(c: BinaryChannel) -> tuple[float, float]:
    """Closed-form maximizer and maximum of the gap-kernel derivative.

    Returns
    -------
    (argmax, value) : tuple of float
        ``argmax = (ln(p01*p11) - ln(p00*p10)) / 2`` and the supremum of the
        derivative, which equals :func:`geometric_mean_bound_lhs`.

    Raises
    ------
    InvalidParameter
        If any entry is 0 (the argmax formula needs strict positivity).
    """
    if min(c.p00, c.p01, c.p10, c.p11) <= 0.0:
        raise InvalidParameter("gap_kernel_peak requires all entries positive")
    argmax = 0.5 * (math.log(c.p01 * c.p11) - math.log(c.p00 * c.p10))
    return argmax, geometric_mean_bound_lhs(c)


def hardcore_contraction(w: float, k: int) -> float:
    """Contraction coefficient of the hard-core gap kernel.

    Returns
    -------
    float
        ``(w/(1+w)) * (ln(1+lam)/ln(1+w) - 1)`` with ``lam = w*(1+w)**k``;
        strictly below ``ln(1+lam)``, and below 1 whenever ``lam <= e-1``.
    """
    if w <= 0:
        raise InvalidParameter(f"w must be positive, got {w}")
    lam = lambda_of_w(w, k)
    return (w / (1.0 + w)) * (math.log1p(lam) / math.log1p(w) - 1.0)


def brightwell_winkler_lower_w(k: int) -> float:
    """Comparison curve ``(ln k - ln ln k)/k`` bounding the critical weight below.

    Defined for ``k >= 3`` only (``ln ln k`` must be positive for the bound
    to carry information).
    """
    if not (isinstance(k, (int, np.integer)) and k >= 3):
        raise InvalidParameter(f"brightwell_winkler_lower_w requires k >= 3, got {k!r}")
    return (math.log(k) - math.log(math.log(k))) / k
