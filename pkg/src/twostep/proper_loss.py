"""Strongly proper composite losses and the hinge baseline.

Each loss exposes its partial losses l(+1, f), l(-1, f). Proper losses also
carry the link psi mapping a probability estimate to a score, its inverse
and the strong-properness constant lambda. Hinge has no link; its raw score
is thresholded directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit as _sigmoid
from scipy.special import logit as _logit

from .errors import EtaAtBoundary, UnknownLoss

ETA_CLAMP = 1e-12
_EXP_CAP = 700.0

Array = np.ndarray
Fn = Callable[[Array], Array]


@dataclass(frozen=True)
class ProperLoss:
    name: str
    lambda_: float
    partial_pos: Fn
    partial_neg: Fn
    _link: Fn
    _inv_link: Fn
    cpe_pos: Fn
    cpe_neg: Fn
    finite_link_at_boundary: bool = False

    def link(self, eta):
        eta = np.clip(np.asarray(eta, dtype=float), ETA_CLAMP, 1.0 - ETA_CLAMP)
        return self._link(eta)

    def inv_link(self, f):
        return np.clip(self._inv_link(np.asarray(f, dtype=float)), ETA_CLAMP, 1.0 - ETA_CLAMP)

    def optimal_score(self, eta):
        return self.link(eta)

    def bayes_risk(self, eta):
        eta = np.asarray(eta, dtype=float)
        if not self.finite_link_at_boundary and np.any((eta <= 0.0) | (eta >= 1.0)):
            raise EtaAtBoundary(f"{self.name} link diverges at eta in {{0, 1}}")
        f = self._link(eta) if self.finite_link_at_boundary else self.link(eta)
        return conditional_risk(self, eta, f)


@dataclass(frozen=True)
class MarginLoss:
    name: str
    partial_pos: Fn
    partial_neg: Fn

    def optimal_score(self, eta):
        eta = np.asarray(eta, dtype=float)
        return np.where(2.0 * eta - 1.0 > 0, 1.0, -1.0)

    def bayes_risk(self, eta):
        eta = np.asarray(eta, dtype=float)
        return 2.0 * np.minimum(eta, 1.0 - eta)


def _cap(f):
    return np.clip(f, -_EXP_CAP, _EXP_CAP)


LOGISTIC = ProperLoss(
    name="logistic",
    lambda_=4.0,
    partial_pos=lambda f: np.logaddexp(0.0, -f),
    partial_neg=lambda f: np.logaddexp(0.0, f),
    _link=_logit,
    _inv_link=_sigmoid,
    cpe_pos=lambda p: -np.log(p),
    cpe_neg=lambda p: -np.log1p(-p),
)

SQUARED = ProperLoss(
    name="squared",
    lambda_=8.0,
    partial_pos=lambda f: (1.0 - f) ** 2,
    partial_neg=lambda f: (1.0 + f) ** 2,
    _link=lambda p: 2.0 * p - 1.0,
    _inv_link=lambda f: (f + 1.0) / 2.0,
    cpe_pos=lambda p: 4.0 * (1.0 - p) ** 2,
    cpe_neg=lambda p: 4.0 * p**2,
    finite_link_at_boundary=True,
)

EXPONENTIAL = ProperLoss(
    name="exponential",
    lambda_=4.0,
    partial_pos=lambda f: np.exp(-_cap(f)),
    partial_neg=lambda f: np.exp(_cap(f)),
    _link=lambda p: 0.5 * _logit(p),
    _inv_link=lambda f: _sigmoid(2.0 * f),
    cpe_pos=lambda p: np.sqrt((1.0 - p) / p),
    cpe_neg=lambda p: np.sqrt(p / (1.0 - p)),
)

HINGE = MarginLoss(
    name="hinge",
    partial_pos=lambda f: np.maximum(0.0, 1.0 - f),
    partial_neg=lambda f: np.maximum(0.0, 1.0 + f),
)

_LOSSES = {loss.name: loss for loss in (LOGISTIC, SQUARED, EXPONENTIAL, HINGE)}
LOSS_NAMES = tuple(_LOSSES)
PROPER_LOSS_NAMES = ("logistic", "squared", "exponential")


def builtin_loss(name: str) -> ProperLoss | MarginLoss:
    try:
        return _LOSSES[name.strip().lower()]
    except KeyError:
        raise UnknownLoss(f"unknown loss {name!r}; choose from {LOSS_NAMES}") from None


def partial(loss: ProperLoss | MarginLoss, y, f):
    """l(y, f) for labels y in {-1, +1}."""
    y = np.asarray(y)
    f = np.asarray(f, dtype=float)
    return np.where(y > 0, loss.partial_pos(f), loss.partial_neg(f))


def conditional_risk(loss: ProperLoss | MarginLoss, eta, f):
    eta = np.asarray(eta, dtype=float)
    f = np.asarray(f, dtype=float)
    # Skip a partial whose weight is zero so that 0 * inf never appears.
    pos = np.where(eta > 0, eta * loss.partial_pos(f), 0.0)
    neg = np.where(eta < 1, (1.0 - eta) * loss.partial_neg(f), 0.0)
    out = pos + neg
    return out if out.ndim else float(out)


def conditional_regret(loss: ProperLoss | MarginLoss, eta, f):
    """risk(eta, f) - inf_f' risk(eta, f'); tiny negative roundoff is clipped to 0."""
    reg = np.asarray(conditional_risk(loss, eta, f)) - np.asarray(loss.bayes_risk(eta))
    reg = np.maximum(reg, 0.0)
    return reg if reg.ndim else float(reg)


def cpe_partials(loss: ProperLoss, y: int, eta_hat):
    """c(y, eta_hat) from the closed-form CPE loss table."""
    eta_hat = np.asarray(eta_hat, dtype=float)
    if np.any((eta_hat <= 0.0) | (eta_hat >= 1.0)):
        raise EtaAtBoundary("eta_hat must lie strictly inside (0, 1)")
    out = loss.cpe_pos(eta_hat) if y > 0 else loss.cpe_neg(eta_hat)
    return out if np.ndim(out) else float(out)
