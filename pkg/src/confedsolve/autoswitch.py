"""Stiffness detection and the composite nonstiff/stiff switching integrator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import Integrator
from .linalg import spectral_radius

STIFF_THRESHOLD = 3.25
VOTES_TO_SWITCH = 3

NONSTIFF = "nonstiff"
STIFF = "stiff"


def estimate_stiffness(g1, g2, k1, k2) -> float:
    """Dominant-eigenvalue magnitude from two stages at the same time.

    ``g1, g2`` are stage states and ``k1, k2`` their derivatives:
    ``rho = |k2 - k1| / |g2 - g1|``, or 0 when the states coincide.
    """
    den = float(np.linalg.norm(np.asarray(g2) - np.asarray(g1)))
    if den == 0.0 or not math.isfinite(den):
        return 0.0
    num = float(np.linalg.norm(np.asarray(k2) - np.asarray(k1)))
    if not math.isfinite(num):
        return math.inf
    return num / den


def is_stiff(rho: float, dt: float, threshold: float = STIFF_THRESHOLD) -> bool:
    return rho * dt > threshold


@dataclass
class StiffnessEstimate:
    """Hysteresis bookkeeping: a regime change needs consecutive opposing votes."""

    rho: float = 0.0
    stiff_votes: int = 0
    nonstiff_votes: int = 0
    votes_needed: int = VOTES_TO_SWITCH
    threshold: float = STIFF_THRESHOLD

    def vote(self, rho: float, dt: float, regime: str) -> bool:
        """Record one step's estimate; return True when the regime should flip."""
        self.rho = rho
        stiff = is_stiff(rho, dt, self.threshold)
        if regime == NONSTIFF:
            self.stiff_votes = self.stiff_votes + 1 if stiff else 0
            self.nonstiff_votes = 0
            flip = self.stiff_votes >= self.votes_needed
        else:
            self.nonstiff_votes = self.nonstiff_votes + 1 if not stiff else 0
            self.stiff_votes = 0
            flip = self.nonstiff_votes >= self.votes_needed
        if flip:
            self.stiff_votes = self.nonstiff_votes = 0
        return flip


class AutoSwitch(Integrator):
    """Runs a nonstiff member until stiffness is detected, then a stiff one.

    In the nonstiff regime the estimate comes from the last two stages of
    the explicit method (which share the same time node). In the stiff
    regime it is the spectral radius of the stiff member's Jacobian, and a
    vote for switching back is cast when the stiff member's step would be
    stable for the explicit method. The handoff restarts the new member at
    the current state and carries the step size across.
    ``stats.metadata`` receives ``regime_trace`` (one entry per accepted
    step) and ``switches``.
    """

    adaptive = True

    def __init__(self, prob, opts, stats, parts=(), registry=None,
                 threshold: float = STIFF_THRESHOLD, votes_needed: int = VOTES_TO_SWITCH):
        super().__init__(prob, opts, stats)
        if len(parts) != 2:
            raise ValueError("autoswitch needs exactly two parts: (nonstiff, stiff)")
        self.names = {NONSTIFF: parts[0], STIFF: parts[1]}
        self.members = {}
        for regime, name in self.names.items():
            _, factory = registry.lookup(name)
            member = factory(prob, opts, stats)
            member.rhs = self.rhs
            self.members[regime] = member
        self.regime = NONSTIFF
        self.detector = StiffnessEstimate(votes_needed=votes_needed, threshold=threshold)
        self._started = False
        self._switched_dt = None
        stats.metadata.setdefault("regime_trace", [])
        stats.metadata.setdefault("switches", [])

    @property
    def current(self) -> Integrator:
        return self.members[self.regime]

    @property
    def order(self):
        return self.current.order

    def reset(self, t, u):
        if not self._started:
            self.regime = NONSTIFF
            self._started = True
        self.detector = StiffnessEstimate(votes_needed=self.detector.votes_needed,
                                          threshold=self.detector.threshold)
        self.current.reset(t, u)

    def initial_dt(self, t, u):
        return self.current.initial_dt(t, u)

    def attempt(self, t, u, dt):
        return self.current.attempt(t, u, dt)

    def reject(self, step):
        self.current.reject(step)

    def _rho(self, step) -> float:
        member = self.current
        if self.regime == NONSTIFF:
            data = step.data
            if not isinstance(data, dict) or "g_last" not in data:
                return 0.0
            g1, g2 = data["g_last"]
            K = data["K"]
            return estimate_stiffness(g1, g2, K[-2], K[-1])
        J = getattr(member, "J", None)
        if J is None:
            return math.inf
        return spectral_radius(J)

    def accept(self, step):
        self.current.accept(step)
        self.stats.metadata["regime_trace"].append(self.regime)
        self._switched_dt = None
        rho = self._rho(step)
        if self.detector.vote(rho, step.dt, self.regime):
            old = self.regime
            carried = self.current.propose_dt(step, True)
            self.regime = STIFF if old == NONSTIFF else NONSTIFF
            self.stats.metadata["switches"].append((step.t_new, old, self.regime))
            self.current.reset(step.t_new, step.u_new)
            fresh = self.current.initial_dt(step.t_new, step.u_new)
            # a fresh estimate on a stiff problem is far below what the stiff
            # member can take, which would immediately vote to switch back
            if self.regime == STIFF:
                self._switched_dt = max(fresh, carried)
            else:
                bound = self.detector.threshold / rho if rho > 0 else math.inf
                self._switched_dt = min(carried, bound)

    def propose_dt(self, step, accepted):
        if accepted and self._switched_dt is not None:
            return self._switched_dt
        return self.current.propose_dt(step, accepted)

    @property
    def J(self):
        return getattr(self.current, "J", None)
