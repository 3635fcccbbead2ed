"""Partner potentials and the constant conventions that link them.

Three potentials describe the minus sector:

* ``v_swanson_frame``: ``r W^2 - W'/s``, read straight off the Swanson Hamiltonian.
* the canonical ``V_-``, written in terms of the partner parameters with
  the constant convention of the printed potential rows;
* ``w^2 - w'``, the bare SUSY form.

They must differ by x-independent constants only.  ``convention_offset`` is
``V_- - v_swanson_frame`` and ``additive_constant`` is ``V_- - (w^2 - w')``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import CaseId, ModelId, ModelSpec, partner_native
from .errors import NotConstant
from .riccati import PartnerParameters

CONSTANCY_TOL = 1e-9


def v_swanson_frame(spec: ModelSpec, x) -> np.ndarray:
    """Hermitian-frame potential of the Swanson model, ``r W^2 - W'/s``."""
    x = spec.check_inside(x)
    W = spec.W(x)
    return spec.couple.r * W * W - spec.Wp(x) / spec.couple.s


def susy_superpotential(partner: PartnerParameters, spec: ModelSpec, x):
    x = spec.check_inside(x)
    return partner.w(spec, x), partner.wp(spec, x)


def _canonical(spec: ModelSpec, partner: PartnerParameters, x, sign: int) -> np.ndarray:
    """Case formula for ``V_+`` (sign=+1) or ``V_-`` (sign=-1)."""
    r, s = spec.couple.r, spec.couple.s
    lam1, dl1 = partner.lambda1, partner.delta1
    lam2, dl2 = spec.lambda2, spec.delta2
    if spec.case is CaseId.CASE1:
        return ((lam1**2 * spec.c1 + sign * lam1) * spec.fp(x) + 2 * lam1 * dl1 * spec.f(x)
                + r * (lam2**2 * spec.c2 + dl2**2))
    if spec.case is CaseId.CASE2:
        f, g = spec.f(x), spec.g(x)
        return (lam1**2 * spec.c1 + (lam1**2 * spec.c2 + dl1**2 + sign * lam1 * spec.c3) * g * g
                + (2 * lam1 * dl1 + sign * dl1 * spec.c4) * f * g + lam2**2 * spec.c1 * r)
    a1, b1 = partner_native(spec, partner)
    if spec.case is CaseId.CASE3:
        e = np.exp(-x)
        return a1**2 + b1**2 * e * e - b1 * (2 * a1 - sign) * e + spec.native["a"] ** 2 * r
    return 0.25 * a1**2 * (x - 2 * b1 / a1) ** 2 + sign * 0.5 * a1 - spec.native["a"] / (2 * s)


def v_pair(spec: ModelSpec, partner: PartnerParameters, x):
    """Canonical ``(V_-, V_+)`` at ``x``."""
    x = spec.check_inside(x)
    return _canonical(spec, partner, x, -1), _canonical(spec, partner, x, +1)


def printed_potential_pair(spec: ModelSpec, partner: PartnerParameters, x):
    """Printed potential rows for ``(V_-, V_+)``, verbatim."""
    x = spec.check_inside(x)
    r = spec.couple.r
    lam1, dl1, lam2 = partner.lambda1, partner.delta1, spec.lambda2
    m = spec.id
    out = []
    for sign in (-1, +1):
        if m in (ModelId.ROSEN_MORSE_I, ModelId.ROSEN_MORSE_II, ModelId.ECKART):
            a2, b2 = spec.native["a"], spec.native["b"]
            a1, _ = partner_native(spec, partner)
            if m is ModelId.ROSEN_MORSE_I:
                v = -(a2**2 - b2**2 / a2**2) * r + a1 * (a1 + sign) / np.sin(x) ** 2 + 2 * b2 * r / np.tan(x)
            elif m is ModelId.ROSEN_MORSE_II:
                v = (a2**2 + b2**2 / a2**2) * r - a1 * (a1 + sign) / np.cosh(x) ** 2 + 2 * b2 * r * np.tanh(x)
            else:
                v = (a2**2 + b2**2 / a2**2) * r + a1 * (a1 + sign) / np.sinh(x) ** 2 - 2 * b2 * r / np.tanh(x)
        elif m is ModelId.SCARF_I:
            sec = 1 / np.cos(x)
            v = (-(lam2**2) * r - lam1**2 + (dl1**2 + lam1**2 + sign * lam1) * sec**2
                 - dl1 * (2 * lam1 + sign) * sec * np.tan(x))
        elif m is ModelId.SCARF_II:
            sech = 1 / np.cosh(x)
            v = (lam2**2 * r + lam1**2 + (dl1**2 - lam1**2 + sign * lam1) * sech**2
                 + dl1 * (2 * lam1 - sign) * sech * np.tanh(x))
        elif m is ModelId.POSCHL_TELLER:
            csch = 1 / np.sinh(x)
            v = (lam2**2 * r + lam1**2 + (dl1**2 + lam1**2 + sign * lam1) * csch**2
                 - dl1 * (2 * lam1 - sign) * csch / np.tanh(x))
        else:
            v = _canonical(spec, partner, x, sign)
        out.append(v)
    return out[0], out[1]


def _constant_difference(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    d = a - b
    mean = float(np.mean(d))
    return mean, float(np.std(d)) / max(1.0, abs(mean))


def convention_offset(spec: ModelSpec, partner: PartnerParameters, samples=None, *, check: bool = True) -> float:
    """Constant ``V_-(canonical) - v_swanson_frame``; raises NotConstant if it varies with x."""
    xs = spec.sample_points() if samples is None else spec.check_inside(samples)
    vm, _ = v_pair(spec, partner, xs)
    mean, std = _constant_difference(vm, v_swanson_frame(spec, xs))
    if check and std > CONSTANCY_TOL:
        raise NotConstant(f"{spec.id.value}: V_- minus v_swanson_frame varies (scaled stddev {std:.3g})")
    return mean


def additive_constant(spec: ModelSpec, partner: PartnerParameters, samples=None) -> tuple[float, float]:
    """``(mean, scaled stddev)`` of ``V_-(canonical) - (w^2 - w')``."""
    xs = spec.sample_points() if samples is None else spec.check_inside(samples)
    vm, _ = v_pair(spec, partner, xs)
    w, wp = susy_superpotential(partner, spec, xs)
    return _constant_difference(vm, w * w - wp)


@dataclass(frozen=True)
class PotentialPair:
    spec: ModelSpec
    partner: PartnerParameters
    additive_constant: float
    convention_offset: float

    def v_minus(self, x):
        return _canonical(self.spec, self.partner, self.spec.check_inside(x), -1)

    def v_plus(self, x):
        return _canonical(self.spec, self.partner, self.spec.check_inside(x), +1)

    def v_minus_swanson(self, x):
        """Minus-sector potential built from the base superpotential alone.

        Used wherever the original Hamiltonian must not depend on the partner
        parameters (intertwining checks, perturbation tests).
        """
        return v_swanson_frame(self.spec, x) + self.convention_offset


def potential_pair(spec: ModelSpec, partner: PartnerParameters, *, check: bool = True) -> PotentialPair:
    offset = convention_offset(spec, partner, check=check)
    const, _ = additive_constant(spec, partner)
    return PotentialPair(spec, partner, const, offset)


def printed_pair_audit(spec: ModelSpec, partner: PartnerParameters, samples=None) -> dict:
    """Compare the printed potential rows with the canonical forms.

    For each sector reports the mean and scaled stddev of ``printed - canonical``;
    a nonzero stddev means the printed row is not the canonical potential up to
    a constant.
    """
    xs = spec.sample_points() if samples is None else spec.check_inside(samples)
    canon = v_pair(spec, partner, xs)
    printed = printed_potential_pair(spec, partner, xs)
    out = {}
    for name, p, c in zip(("minus", "plus"), printed, canon):
        mean, std = _constant_difference(p, c)
        out[name] = {"mean": mean, "stddev": std, "consistent": std <= CONSTANCY_TOL and abs(mean) <= 1e-9}
    w, wp = susy_superpotential(partner, spec, xs)
    diff = printed[1] - printed[0] - 2 * wp
    out["plus_minus_difference_defect"] = float(np.max(np.abs(diff)) / max(1.0, float(np.max(np.abs(2 * wp)))))
    return out
