"""Formal existence-time calculator from intersection data.

The class of the evolving form moves linearly, so each curve pairing is an
affine function of time; the first time a negative-self-intersection curve
loses positive area is the formal existence bound tau*.  The calculator
consumes pairing numbers only (no cohomology is computed from forms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class Curve:
    name: str
    self_intersection: int     # D.D
    canonical_pairing: int     # K.D
    area: float                # initial pairing of the metric class with D

    def __post_init__(self):
        if self.area <= 0:
            raise ValidationError(f"curve {self.name}: area must be positive",
                                  field=f"curves.{self.name}.area")

    @property
    def c1_pairing(self):
        # c1 = -K as a pairing
        return -self.canonical_pairing


@dataclass
class ConeProblem:
    curves: list
    gamma_pairing: float | None = None   # positive pairing with the cone generator
    kahler: bool = False

    def validate(self):
        for c in self.curves:
            if not isinstance(c, Curve):
                raise ValidationError("curves must be Curve instances",
                                      field="curves")
        if not self.kahler:
            if self.gamma_pairing is None or self.gamma_pairing <= 0:
                raise ValidationError(
                    "non-Kahler problems need a positive gamma pairing",
                    field="gamma_pairing")
        return self


def class_trajectory(p: ConeProblem, t: float):
    """Per-curve pairings at time t: area + t * (K . D).

    The gamma pairing is constant in time (the degree reasons that fix it
    along the flow are modeled as exact conservation).
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    pairings = {c.name: c.area + t * c.canonical_pairing for c in p.curves}
    return {"t": t, "curve_pairings": pairings,
            "gamma_pairing": p.gamma_pairing}


def tau_star(p: ConeProblem) -> float:
    """Formal existence time from negative curves; inf if nothing binds."""
    p.validate()
    best = math.inf
    for c in p.curves:
        if c.self_intersection < 0 and c.canonical_pairing < 0:
            best = min(best, c.area / (-c.canonical_pairing))
    return best


def kahler_tau_star(p: ConeProblem):
    """Same linear program over user-supplied generators (Kahler variant).

    The curve list is whatever finite set of constraints the caller supplies;
    with an incomplete list the result is only an upper bound, which the
    returned flag records.
    """
    p.validate()
    best = math.inf
    for c in p.curves:
        if c.canonical_pairing < 0:
            best = min(best, c.area / (-c.canonical_pairing))
    return {"tau_star": best,
            "incomplete_data": len(p.curves) == 0,
            "note": ("no binding constraints supplied; value is an upper "
                     "bound" if len(p.curves) == 0 else
                     "upper bound if the generator list is incomplete")}


def binding_report(p: ConeProblem):
    """Which condition exits the positive cone first, reported separately.

    The gamma condition never moves in this model, so it can only fail at
    t = 0; it is still reported alongside the curve conditions.
    """
    p.validate()
    ts = tau_star(p)
    binding = [c.name for c in p.curves
               if c.self_intersection < 0 and c.canonical_pairing < 0
               and math.isclose(c.area / (-c.canonical_pairing), ts)] \
        if math.isfinite(ts) else []
    return {
        "tau_star": ts,
        "binding_curves": binding,
        "gamma_condition": ("holds for all t" if p.kahler or
                            (p.gamma_pairing or 0) > 0 else "violated at t=0"),
    }


def as_json_dict(p: ConeProblem):
    res = binding_report(p)
    out = {
        "kahler": p.kahler,
        "curves": [{"name": c.name, "D.D": c.self_intersection,
                    "K.D": c.canonical_pairing, "area": c.area}
                   for c in p.curves],
        "gamma_pairing": p.gamma_pairing,
        "tau_star": res["tau_star"] if math.isfinite(res["tau_star"])
        else "infinity",
        "binding_curves": res["binding_curves"],
    }
    if p.kahler:
        out["kahler_tau_star"] = kahler_tau_star(p)["tau_star"] \
            if math.isfinite(kahler_tau_star(p)["tau_star"]) else "infinity"
    return out
