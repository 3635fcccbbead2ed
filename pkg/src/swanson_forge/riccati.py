"""Partner superpotential from coefficient matching.

The partner ``w = lambda1 f + delta1 g`` must satisfy

    w^2 - w' = r W^2 - W'/s + const

for every x.  Substituting the structure identities of each case turns this
into a small algebraic system in (lambda1, delta1).  The leftover constant is
the factorization offset; it is recorded, never forced to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .catalog import CaseId, ModelId, ModelSpec
from .errors import NoBracketedRoot, NoRealRoot, ResidualNotConstant

CONSTANCY_TOL = 1e-9


@dataclass(frozen=True)
class Branch:
    root_index: int
    rule: str


@dataclass(frozen=True)
class PartnerParameters:
    lambda1: float
    delta1: float
    branch: Branch
    factorization_offset: float = 0.0
    residual_stddev: float = 0.0
    printed_form_discrepancy: dict | None = field(default=None, compare=False)

    def perturbed(self, d_lambda: float = 0.0, d_delta: float = 0.0) -> "PartnerParameters":
        """A copy with shifted parameters; the offset is left stale on purpose."""
        return replace(
            self,
            lambda1=self.lambda1 + d_lambda,
            delta1=self.delta1 + d_delta,
            branch=Branch(self.branch.root_index, self.branch.rule + " (perturbed)"),
        )

    def w(self, spec: ModelSpec, x):
        return self.lambda1 * spec.f(x) + self.delta1 * spec.g(x)

    def wp(self, spec: ModelSpec, x):
        return self.lambda1 * spec.fp(x) + self.delta1 * spec.gp(x)


# -- per-case solvers ---------------------------------------------------------
def _sigma_minus(spec: ModelSpec) -> float:
    r, s = spec.couple.r, spec.couple.s
    return spec.c1 * spec.lambda2**2 * r - spec.lambda2 / s


def _choose_root(roots: list[float], target: float) -> tuple[int, float]:
    """Root sharing the sign of ``target``, closest to it (continuity)."""
    same = [(i, x) for i, x in enumerate(roots) if math.copysign(1.0, x) == math.copysign(1.0, target) and x != 0]
    if not same:
        raise NoRealRoot(f"no root shares the sign of {target:.6g}: {roots}")
    return min(same, key=lambda item: abs(item[1] - target))


def _solve_case1(spec: ModelSpec) -> tuple[float, float, Branch]:
    r = spec.couple.r
    c1 = spec.c1
    sigma = _sigma_minus(spec)
    # c1 l^2 - l - sigma = 0
    disc = 1.0 + 4.0 * c1 * sigma
    if disc < 0:
        raise NoRealRoot(f"{spec.id.value}: discriminant 1 + 4 c1 sigma = {disc:.6g} < 0")
    sq = math.sqrt(disc)
    roots = [(1.0 + sq) / (2.0 * c1), (1.0 - sq) / (2.0 * c1)]
    idx, lam1 = _choose_root(roots, spec.lambda2)
    dl1 = r * spec.lambda2 * spec.delta2 / lam1
    return lam1, dl1, Branch(idx, "sign(lambda1) = sign(lambda2), nearest to lambda2")


def _case2_functions(spec: ModelSpec):
    r, s = spec.couple.r, spec.couple.s
    lam2, dl2, c2, c3, c4 = spec.lambda2, spec.delta2, spec.c2, spec.c3, spec.c4
    k_fg = 2.0 * lam2 * dl2 * r - dl2 * c4 / s
    k_gg = (lam2**2 * c2 + dl2**2) * r - lam2 * c3 / s

    def delta_of(lam1):
        return k_fg / (2.0 * lam1 - c4)

    def residual(lam1):
        d = delta_of(lam1)
        return d * d + lam1 * lam1 * c2 - lam1 * c3 - k_gg

    return delta_of, residual


def _solve_case2(spec: ModelSpec) -> tuple[float, float, Branch]:
    delta_of, residual = _case2_functions(spec)
    lam2 = spec.lambda2
    pole = 0.5 * spec.c4
    if lam2 == 0:
        raise NoBracketedRoot(f"{spec.id.value}: lambda2 = 0 has no sign to anchor the branch")
    lo, hi = sorted((0.25 * lam2, 4.0 * lam2))
    for _ in range(8):
        grid = np.linspace(lo, hi, 4001)
        grid = grid[np.abs(grid - pole) > 1e-9]
        vals = residual(grid)
        roots = []
        for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
            a, b = grid[i], grid[i + 1]
            if (a - pole) * (b - pole) <= 0:
                continue  # sign change across the pole, not a root
            if vals[i] == 0:
                roots.append(float(a))
                continue
            roots.append(brentq(residual, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))
        if roots:
            idx, lam1 = _choose_root(roots, lam2)
            return lam1, float(delta_of(lam1)), Branch(idx, "bracketed root nearest to lambda2")
        # geometric expansion away from lambda2, keeping its sign
        lo, hi = (lo / 2.0, hi * 2.0) if lam2 > 0 else (lo * 2.0, hi / 2.0)
    raise NoBracketedRoot(f"{spec.id.value}: no sign change of the g^2 residual near lambda2={lam2}")


def _solve_case3(spec: ModelSpec) -> tuple[float, float, Branch]:
    # native: W = a2 - b2 e^{-x}, w = a1 - b1 e^{-x}
    r, s = spec.couple.r, spec.couple.s
    a2, b2 = spec.native["a"], spec.native["b"]
    b1 = b2 * math.sqrt(r)
    a1 = (2.0 * a2 * b2 * r + b2 / s - b1) / (2.0 * b1)
    lam1, dl1 = -b1, a1
    return lam1, dl1, Branch(0, "positive root of the exp(-2x) match")


def _solve_case4(spec: ModelSpec) -> tuple[float, float, Branch]:
    sr = math.sqrt(spec.couple.r)
    return spec.lambda2 * sr, spec.delta2 * sr, Branch(0, "positive root of the x^2 match")


_SOLVERS = {
    CaseId.CASE1: _solve_case1,
    CaseId.CASE2: _solve_case2,
    CaseId.CASE3: _solve_case3,
    CaseId.CASE4: _solve_case4,
}


def riccati_residual(spec: ModelSpec, partner: PartnerParameters, xs) -> np.ndarray:
    """R(x) = [w^2 - w'] - [r W^2 - W'/s]."""
    x = spec.check_inside(xs)
    r, s = spec.couple.r, spec.couple.s
    w, wp = partner.w(spec, x), partner.wp(spec, x)
    W, Wp = spec.W(x), spec.Wp(x)
    return (w * w - wp) - (r * W * W - Wp / s)


def riccati_residual_profile(spec: ModelSpec, partner: PartnerParameters, xs):
    """Return ``(mean, scaled_stddev, profile)`` of the residual on ``xs``.

    The stddev is divided by ``max(1, |mean|)`` so it is the audit metric
    directly.
    """
    prof = riccati_residual(spec, partner, xs)
    mean = float(np.mean(prof))
    std = float(np.std(prof)) / max(1.0, abs(mean))
    return mean, std, prof


def solve_partner(spec: ModelSpec, *, check: bool = True) -> PartnerParameters:
    """Solve for (lambda1, delta1) and verify the residual is x-independent."""
    lam1, dl1, branch = _SOLVERS[spec.case](spec)
    partner = PartnerParameters(lam1, dl1, branch)
    mean, std, _ = riccati_residual_profile(spec, partner, spec.sample_points(200))
    if check and std > CONSTANCY_TOL:
        raise ResidualNotConstant(f"{spec.id.value}: residual stddev {std:.3g} exceeds {CONSTANCY_TOL}")
    partner = replace(partner, factorization_offset=mean, residual_stddev=std)
    return replace(partner, printed_form_discrepancy=printed_form_audit(spec, partner))


def matching_residuals(spec: ModelSpec, partner: PartnerParameters) -> dict[str, float]:
    """Residuals of each coefficient-matching equation (should vanish)."""
    r, s = spec.couple.r, spec.couple.s
    lam2, dl2, lam1, dl1 = spec.lambda2, spec.delta2, partner.lambda1, partner.delta1
    c1, c2, c3, c4 = spec.c1, spec.c2, spec.c3, spec.c4
    if spec.case is CaseId.CASE1:
        return {
            "f_prime": spec.c1 * lam1**2 - lam1 - _sigma_minus(spec),
            "f": lam1 * dl1 - r * lam2 * dl2,
        }
    if spec.case is CaseId.CASE2:
        return {
            "g_squared": dl1**2 + lam1**2 * c2 - lam1 * c3 - ((lam2**2 * c2 + dl2**2) * r - lam2 * c3 / s),
            "fg": 2 * lam1 * dl1 - dl1 * c4 - (2 * lam2 * dl2 * r - dl2 * c4 / s),
        }
    if spec.case is CaseId.CASE3:
        # f = e^{-x}: f^2 and f coefficients
        return {
            "f_squared": lam1**2 - r * lam2**2,
            "f": 2 * lam1 * dl1 + lam1 - (2 * r * lam2 * dl2 + lam2 / s),
        }
    return {
        "x_squared": lam1**2 - r * lam2**2,
        "x": 2 * lam1 * dl1 - 2 * r * lam2 * dl2,
    }


def printed_form_audit(spec: ModelSpec, partner: PartnerParameters) -> dict:
    """Evaluate the printed per-case closed forms verbatim against the solve.

    Returns a dict of ``{quantity: {"printed", "solved", "discrepancy", ...}}``.
    ``discrepancy`` is ``nan`` when the printed form is not even real.
    """
    c = spec.couple
    r, s = c.r, c.s
    one_m4ab = 1.0 - 4.0 * c.alpha * c.beta
    out: dict = {}

    def entry(name, printed, solved, **extra):
        disc = abs(printed - solved) if math.isfinite(printed) else math.nan
        out[name] = {"printed": printed, "solved": solved, "discrepancy": disc, **extra}

    if spec.case is CaseId.CASE1:
        sigma = _sigma_minus(spec)
        printed_disc = 1.0 + 4.0 * sigma
        exact_disc = 1.0 + 4.0 * spec.c1 * sigma
        lam_printed = (1.0 + math.sqrt(printed_disc)) / (2.0 * spec.c1) if printed_disc >= 0 else math.nan
        entry("lambda1", lam_printed, partner.lambda1,
              printed_discriminant=printed_disc, exact_discriminant=exact_disc)
        dl_printed = spec.lambda2 * spec.delta2 / partner.lambda1 * one_m4ab / s
        entry("delta1", dl_printed, partner.delta1)
    elif spec.case is CaseId.CASE2:
        res = matching_residuals(spec, partner)
        entry("g_squared_match", res["g_squared"], 0.0)
        entry("fg_match", res["fg"], 0.0)
    elif spec.case is CaseId.CASE3:
        a2, b2 = spec.native["a"], spec.native["b"]
        a1, b1 = spec.definition.to_native(partner.lambda1, partner.delta1)
        b1_printed = b2 * math.sqrt(one_m4ab) / s
        a1_printed = (b2 / s**2 * (2.0 * a2 * one_m4ab + (1.0 + c.alpha + c.beta)) - b1) / (2.0 * b1)
        entry("b1", b1_printed, b1)
        entry("a1", a1_printed, a1)
    else:
        a2, b2 = spec.native["a"], spec.native["b"]
        a1, b1 = spec.definition.to_native(partner.lambda1, partner.delta1)
        entry("a1", a2 * math.sqrt(one_m4ab) / s, a1)
        entry("b1", b2 * math.sqrt(one_m4ab) / s, b1)
    return out


def printed_case3_partner(spec: ModelSpec) -> PartnerParameters:
    """Morse partner using the printed a1 closed form instead of matching."""
    if spec.id is not ModelId.MORSE:
        raise ValueError("printed a1 form exists for the Morse model only")
    solved = solve_partner(spec)
    a1_printed = solved.printed_form_discrepancy["a1"]["printed"]
    return replace(solved, delta1=a1_printed, branch=Branch(0, "printed closed form"))
