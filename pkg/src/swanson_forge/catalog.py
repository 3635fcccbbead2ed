"""The eight shape-invariant models.

Every model writes its base superpotential as ``W = lambda2 * f + delta2 * g``
for a fixed pair of structure functions ``(f, g)``.  The partner superpotential
``w = lambda1 * f + delta1 * g`` uses the same pair, which is what makes the
coefficient matching in :mod:`swanson_forge.riccati` finite dimensional.

Native parameters are the ones people quote for each potential (``a``, ``b``
for the Rosen-Morse, Eckart, Morse and oscillator families, ``lambda``,
``delta`` for the Scarf / Poschl-Teller family).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import BeyondBoundStates, ConstraintViolated, OutOfDomain, UnknownModel, UnknownParameter
from .params import SwansonCouple

LN2 = math.log(2.0)


class ConstraintWarning(UserWarning):
    """A parameter set outside the range where closed-form waveforms normalize."""


class SpectrumWarning(UserWarning):
    """Closed-form levels that fail to increase with n."""


class ModelId(str, enum.Enum):
    ROSEN_MORSE_I = "rosen-morse-1"
    ROSEN_MORSE_II = "rosen-morse-2"
    ECKART = "eckart"
    SCARF_I = "scarf-1"
    SCARF_II = "scarf-2"
    POSCHL_TELLER = "poschl-teller"
    MORSE = "morse"
    SHIFTED_OSCILLATOR = "shifted-oscillator"


class CaseId(enum.IntEnum):
    """Structural class of the (f, g) pair.

    1: g = 1, f^2 = c1 f' + c2.
    2: f^2 = c1 + c2 g^2, f' = c3 g^2, g' = c4 f g.
    3: g = 1, f' = -f.
    4: g = 1, f = x.
    """

    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4


FINITE_SINGULAR = "finite-singular"
FINITE_REGULAR = "finite-regular"
INFINITE = "infinite"


@dataclass(frozen=True)
class Domain:
    lo: float
    hi: float
    lo_kind: str
    hi_kind: str
    reference: float

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x > self.lo) & (x < self.hi)

    @property
    def finite(self) -> bool:
        return self.lo_kind != INFINITE and self.hi_kind != INFINITE


# -- stable elementary pieces ---------------------------------------------------
def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - LN2


def _log_sinh(x):
    # x > 0
    return x + np.log1p(-np.exp(-2.0 * x)) - LN2


def _log_tanh_half(x):
    # log tanh(x/2) for x > 0
    e = np.exp(-x)
    return np.log1p(-e) - np.log1p(e)


def _sech(x):
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def _csch(x):
    # x > 0
    e = np.exp(-x)
    return 2.0 * e / (1.0 - e * e)


def _coth(x):
    return 1.0 / np.tanh(x)


@dataclass(frozen=True)
class _ModelDef:
    id: ModelId
    case: CaseId
    c: tuple[float, float, float, float]
    domain: Domain
    param_names: tuple[str, str]
    f: Callable
    fp: Callable
    g: Callable
    gp: Callable
    int_f: Callable
    int_g: Callable
    to_internal: Callable[[float, float], tuple[float, float]]
    to_native: Callable[[float, float], tuple[float, float]]
    constraints: str
    sample_window: tuple[float, float]


_ONE = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
_ZERO = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731

_HALF_PI = 0.5 * math.pi

_MODELS: dict[ModelId, _ModelDef] = {
    ModelId.ROSEN_MORSE_I: _ModelDef(
        ModelId.ROSEN_MORSE_I, CaseId.CASE1, (-1.0, -1.0, 0.0, 0.0),
        Domain(0.0, math.pi, FINITE_SINGULAR, FINITE_SINGULAR, _HALF_PI),
        ("a", "b"),
        f=lambda x: 1.0 / np.tan(x),
        fp=lambda x: -1.0 / np.sin(x) ** 2,
        g=_ONE, gp=_ZERO,
        int_f=lambda x: np.log(np.sin(x)),
        int_g=lambda x: np.asarray(x, dtype=float) - _HALF_PI,
        to_internal=lambda a, b: (-a, -b / a),
        to_native=lambda lam, dl: (-lam, lam * dl),
        constraints="a > 0, b > 0; waveforms need α > β",
        sample_window=(0.05 * math.pi, 0.95 * math.pi),
    ),
    ModelId.ROSEN_MORSE_II: _ModelDef(
        ModelId.ROSEN_MORSE_II, CaseId.CASE1, (-1.0, 1.0, 0.0, 0.0),
        Domain(-math.inf, math.inf, INFINITE, INFINITE, 0.0),
        ("a", "b"),
        f=np.tanh, fp=lambda x: _sech(x) ** 2,
        g=_ONE, gp=_ZERO,
        int_f=_log_cosh,
        int_g=lambda x: np.asarray(x, dtype=float),
        to_internal=lambda a, b: (a, b / a),
        to_native=lambda lam, dl: (lam, lam * dl),
        constraints="a > 0, b > 0, b < a²; waveforms need α < β",
        sample_window=(-6.0, 6.0),
    ),
    ModelId.ECKART: _ModelDef(
        ModelId.ECKART, CaseId.CASE1, (-1.0, 1.0, 0.0, 0.0),
        Domain(0.0, math.inf, FINITE_SINGULAR, INFINITE, 1.0),
        ("a", "b"),
        f=_coth, fp=lambda x: -_csch(x) ** 2,
        g=_ONE, gp=_ZERO,
        int_f=lambda x: _log_sinh(x) - _log_sinh(1.0),
        int_g=lambda x: np.asarray(x, dtype=float) - 1.0,
        to_internal=lambda a, b: (-a, b / a),
        to_native=lambda lam, dl: (-lam, -lam * dl),
        constraints="a > 0, b > 0, b > a²; waveforms need α < β",
        sample_window=(0.05, 6.0),
    ),
    ModelId.SCARF_I: _ModelDef(
        ModelId.SCARF_I, CaseId.CASE2, (-1.0, 1.0, 1.0, 1.0),
        Domain(-_HALF_PI, _HALF_PI, FINITE_SINGULAR, FINITE_SINGULAR, 0.0),
        ("lambda", "delta"),
        f=np.tan, fp=lambda x: 1.0 / np.cos(x) ** 2,
        g=lambda x: -1.0 / np.cos(x),
        gp=lambda x: -np.tan(x) / np.cos(x),
        int_f=lambda x: -np.log(np.cos(x)),
        int_g=lambda x: -np.log((1.0 + np.sin(x)) / np.cos(x)),
        to_internal=lambda lam, dl: (lam, dl),
        to_native=lambda lam, dl: (lam, dl),
        constraints="none beyond the couple",
        sample_window=(-0.45 * math.pi, 0.45 * math.pi),
    ),
    ModelId.SCARF_II: _ModelDef(
        ModelId.SCARF_II, CaseId.CASE2, (1.0, -1.0, 1.0, -1.0),
        Domain(-math.inf, math.inf, INFINITE, INFINITE, 0.0),
        ("lambda", "delta"),
        f=np.tanh, fp=lambda x: _sech(x) ** 2,
        g=_sech, gp=lambda x: -_sech(x) * np.tanh(x),
        int_f=_log_cosh,
        int_g=lambda x: np.arctan(np.sinh(x)),
        to_internal=lambda lam, dl: (lam, dl),
        to_native=lambda lam, dl: (lam, dl),
        constraints="none beyond the couple",
        sample_window=(-6.0, 6.0),
    ),
    ModelId.POSCHL_TELLER: _ModelDef(
        ModelId.POSCHL_TELLER, CaseId.CASE2, (1.0, 1.0, -1.0, -1.0),
        Domain(0.0, math.inf, FINITE_SINGULAR, INFINITE, 1.0),
        ("lambda", "delta"),
        f=_coth, fp=lambda x: -_csch(x) ** 2,
        g=lambda x: -_csch(x), gp=lambda x: _csch(x) * _coth(x),
        int_f=lambda x: _log_sinh(x) - _log_sinh(1.0),
        int_g=lambda x: -(_log_tanh_half(x) - _log_tanh_half(1.0)),
        to_internal=lambda lam, dl: (lam, dl),
        to_native=lambda lam, dl: (lam, dl),
        constraints="λ < δ; waveforms need α < β",
        sample_window=(0.05, 6.0),
    ),
    ModelId.MORSE: _ModelDef(
        ModelId.MORSE, CaseId.CASE3, (0.0, 0.0, 0.0, 0.0),
        Domain(-math.inf, math.inf, INFINITE, INFINITE, 0.0),
        ("a", "b"),
        f=lambda x: np.exp(-np.asarray(x, dtype=float)),
        fp=lambda x: -np.exp(-np.asarray(x, dtype=float)),
        g=_ONE, gp=_ZERO,
        int_f=lambda x: 1.0 - np.exp(-np.asarray(x, dtype=float)),
        int_g=lambda x: np.asarray(x, dtype=float),
        to_internal=lambda a, b: (-b, a),
        to_native=lambda lam, dl: (dl, -lam),
        constraints="a > 0, b > 0",
        sample_window=(-2.0, 6.0),
    ),
    ModelId.SHIFTED_OSCILLATOR: _ModelDef(
        ModelId.SHIFTED_OSCILLATOR, CaseId.CASE4, (0.0, 0.0, 0.0, 0.0),
        Domain(-math.inf, math.inf, INFINITE, INFINITE, 0.0),
        ("a", "b"),
        f=lambda x: np.asarray(x, dtype=float),
        fp=_ONE,
        g=_ONE, gp=_ZERO,
        int_f=lambda x: 0.5 * np.asarray(x, dtype=float) ** 2,
        int_g=lambda x: np.asarray(x, dtype=float),
        to_internal=lambda a, b: (0.5 * a, -b),
        to_native=lambda lam, dl: (2.0 * lam, -dl),
        constraints="a > 0; waveforms need |α + β| < 1",
        sample_window=(-6.0, 6.0),
    ),
}


def model_ids() -> list[ModelId]:
    return list(_MODELS)


def model_def(model: ModelId | str) -> _ModelDef:
    try:
        return _MODELS[ModelId(model)]
    except ValueError:
        raise UnknownModel(f"unknown model {model!r}; choose from {[m.value for m in ModelId]}") from None


@dataclass(frozen=True)
class ModelSpec:
    id: ModelId
    case: CaseId
    c1: float
    c2: float
    c3: float
    c4: float
    lambda2: float
    delta2: float
    native: Mapping[str, float]
    domain: Domain
    couple: SwansonCouple
    display: Mapping[str, float] = field(default_factory=dict)

    @property
    def definition(self) -> _ModelDef:
        return _MODELS[self.id]

    # structure functions -------------------------------------------------
    def f(self, x):
        return self.definition.f(x)

    def fp(self, x):
        return self.definition.fp(x)

    def g(self, x):
        return self.definition.g(x)

    def gp(self, x):
        return self.definition.gp(x)

    def W(self, x):
        return self.lambda2 * self.f(x) + self.delta2 * self.g(x)

    def Wp(self, x):
        return self.lambda2 * self.fp(x) + self.delta2 * self.gp(x)

    def int_W(self, x):
        d = self.definition
        return self.lambda2 * d.int_f(x) + self.delta2 * d.int_g(x)

    def check_inside(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not np.all(self.domain.contains(x)):
            bad = x[~self.domain.contains(x)] if x.ndim else x
            raise OutOfDomain(
                f"{self.id.value}: x={np.ravel(bad)[0]:.6g} outside ({self.domain.lo}, {self.domain.hi})"
            )
        return x

    def sample_points(self, n: int = 200) -> np.ndarray:
        lo, hi = self.definition.sample_window
        return np.linspace(lo, hi, n)

    def with_couple(self, couple: SwansonCouple) -> "ModelSpec":
        return instantiate(self.id, self.native, couple, warn=False)


def _display_constants(model: ModelId, lam: float, dl: float) -> dict[str, float]:
    """Constants k1, k2 of the textbook potential written from (lambda, delta).

    Report-only: they come from expanding W^2 - W' with the base parameters.
    """
    if model is ModelId.SCARF_I:
        # W^2 - W' = (lam^2 + dl^2 - lam) sec^2 - dl (2 lam - 1) sec tan - lam^2
        return {"k1": lam**2 + dl**2 - lam, "k2": dl * (2 * lam - 1), "constant": -(lam**2)}
    if model is ModelId.SCARF_II:
        return {"k1": dl**2 - lam**2 - lam, "k2": dl * (2 * lam + 1), "constant": lam**2}
    if model is ModelId.POSCHL_TELLER:
        return {"k1": dl**2 + lam**2 + lam, "k2": dl * (2 * lam + 1), "constant": lam**2}
    return {}


def _native_constraints(model: ModelId, p: Mapping[str, float]) -> None:
    if model in (ModelId.ROSEN_MORSE_I, ModelId.ROSEN_MORSE_II, ModelId.ECKART):
        a, b = p["a"], p["b"]
        if a <= 0:
            raise ConstraintViolated("a > 0", f"{model.value} needs a > 0, got a={a}")
        if b <= 0:
            raise ConstraintViolated("b > 0", f"{model.value} needs b > 0, got b={b}")
        if model is ModelId.ROSEN_MORSE_II and not b < a * a:
            raise ConstraintViolated("b < a²", f"rosen-morse-2 needs b < a², got b={b}, a²={a * a}")
        if model is ModelId.ECKART and not b > a * a:
            raise ConstraintViolated("b > a²", f"eckart needs b > a², got b={b}, a²={a * a}")
    elif model is ModelId.POSCHL_TELLER:
        if not p["lambda"] < p["delta"]:
            raise ConstraintViolated("lambda < delta", f"poschl-teller needs lambda < delta, got {dict(p)}")
    elif model is ModelId.MORSE:
        if p["a"] <= 0 or p["b"] <= 0:
            raise ConstraintViolated("a > 0, b > 0", f"morse needs positive a and b, got {dict(p)}")
    elif model is ModelId.SHIFTED_OSCILLATOR:
        if p["a"] <= 0:
            raise ConstraintViolated("a > 0", f"shifted-oscillator needs a > 0, got a={p['a']}")


def normalizability_rule(spec: ModelSpec) -> tuple[str, bool] | None:
    """The named condition under which the closed-form waveforms normalize.

    Returns ``(rule, satisfied)`` or ``None`` for models without one.  The
    Hermitian limit has a trivial gauge and always satisfies its rule.
    """
    a, b = spec.couple.alpha, spec.couple.beta
    m = spec.id
    if m is ModelId.ROSEN_MORSE_I:
        rule, ok = "alpha > beta", a > b
    elif m in (ModelId.ROSEN_MORSE_II, ModelId.ECKART, ModelId.POSCHL_TELLER):
        rule, ok = "alpha < beta", a < b
    elif m is ModelId.SHIFTED_OSCILLATOR:
        rule, ok = "|alpha + beta| < 1", abs(a + b) < 1.0
    else:
        return None
    return rule, ok or spec.couple.limit


def instantiate(
    model: ModelId | str,
    params: Mapping[str, float],
    couple: SwansonCouple,
    *,
    warn: bool = True,
) -> ModelSpec:
    """Build a :class:`ModelSpec` from native parameters."""
    d = model_def(model)
    params = dict(params)
    unknown = set(params) - set(d.param_names)
    if unknown:
        raise UnknownParameter(f"{d.id.value} takes {d.param_names}, got unknown {sorted(unknown)}")
    missing = set(d.param_names) - set(params)
    if missing:
        raise UnknownParameter(f"{d.id.value} is missing parameters {sorted(missing)}")
    native = {k: float(params[k]) for k in d.param_names}
    if not all(math.isfinite(v) for v in native.values()):
        raise ConstraintViolated("finite parameters", str(native))
    _native_constraints(d.id, native)
    lam, dl = d.to_internal(*(native[k] for k in d.param_names))
    c1, c2, c3, c4 = d.c
    spec = ModelSpec(
        id=d.id, case=d.case, c1=c1, c2=c2, c3=c3, c4=c4,
        lambda2=lam, delta2=dl, native=native, domain=d.domain, couple=couple,
        display=_display_constants(d.id, lam, dl),
    )
    if warn:
        rule = normalizability_rule(spec)
        if rule is not None and not rule[1]:
            warnings.warn(f"{d.id.value}: closed-form waveforms need {rule[0]}", ConstraintWarning, stacklevel=2)
    return spec


@dataclass(frozen=True)
class Structure:
    f: np.ndarray
    g: np.ndarray
    fp: np.ndarray
    gp: np.ndarray
    W: np.ndarray
    Wp: np.ndarray
    int_W: np.ndarray


def structure_eval(spec: ModelSpec, x) -> Structure:
    x = spec.check_inside(x)
    return Structure(
        f=spec.f(x), g=spec.g(x), fp=spec.fp(x), gp=spec.gp(x),
        W=spec.W(x), Wp=spec.Wp(x), int_W=spec.int_W(x),
    )


def case_structure_check(spec: ModelSpec, xs) -> float:
    """Largest relative residual of the case-defining identities over ``xs``."""
    x = spec.check_inside(xs)
    f, g, fp, gp = spec.f(x), spec.g(x), spec.fp(x), spec.gp(x)
    c1, c2, c3, c4 = spec.c1, spec.c2, spec.c3, spec.c4
    if spec.case is CaseId.CASE1:
        pairs = [(g - 1.0, 1.0), (gp, 1.0), (f * f - c1 * fp - c2, f * f + abs(fp) + 1.0)]
    elif spec.case is CaseId.CASE2:
        pairs = [
            (f * f - c1 - c2 * g * g, f * f + g * g + 1.0),
            (fp - c3 * g * g, np.abs(fp) + g * g + 1.0),
            (gp - c4 * f * g, np.abs(gp) + np.abs(f * g) + 1.0),
        ]
    elif spec.case is CaseId.CASE3:
        pairs = [(g - 1.0, 1.0), (fp + f, np.abs(f) + 1.0)]
    else:
        pairs = [(g - 1.0, 1.0), (f - x, np.abs(x) + 1.0)]
    return float(max(np.max(np.abs(res) / scale) for res, scale in pairs))


# -- spectra ------------------------------------------------------------------
def partner_native(spec: ModelSpec, partner) -> tuple[float, float]:
    """(a1, b1) or (lambda1, delta1) in the model's native convention."""
    return spec.definition.to_native(partner.lambda1, partner.delta1)


def bound_state_limit(spec: ModelSpec, partner) -> float:
    """Supremum of admissible n (levels are ``n < limit``); ``inf`` when unbounded."""
    p1, q1 = partner_native(spec, partner)
    m = spec.id
    if m is ModelId.ROSEN_MORSE_II:
        return p1 - math.sqrt(max(q1, 0.0))
    if m is ModelId.ECKART:
        return math.sqrt(max(q1, 0.0)) - p1
    if m in (ModelId.SCARF_II, ModelId.POSCHL_TELLER, ModelId.MORSE):
        return p1
    return math.inf


def bound_state_count(spec: ModelSpec, partner) -> float:
    lim = bound_state_limit(spec, partner)
    if math.isinf(lim):
        return math.inf
    return max(0, math.ceil(lim))


def ground_constant(spec: ModelSpec, partner) -> float:
    """Additive constant of the canonical minus-sector potential.

    Equal to the closed-form ground level; the canonical ``V_-`` is
    ``w^2 - w' + ground_constant``.
    """
    r, s = spec.couple.r, spec.couple.s
    lam2, dl2, lam1, dl1 = spec.lambda2, spec.delta2, partner.lambda1, partner.delta1
    case = spec.case
    if case is CaseId.CASE1:
        # the printed constant r(lam2^2 c2 + dl2^2) sits where w^2 - w' has lam1^2 c2 + dl1^2
        return r * (lam2**2 * spec.c2 + dl2**2) - (lam1**2 * spec.c2 + dl1**2)
    if case is CaseId.CASE2:
        return spec.c1 * lam2**2 * r
    if case is CaseId.CASE3:
        return dl2**2 * r
    return -lam2 / s  # -a2 / (2 s)


def _closed_minus(spec: ModelSpec, partner, n: int) -> float:
    r, s = spec.couple.r, spec.couple.s
    p1, q1 = partner_native(spec, partner)
    m = spec.id
    if spec.case is CaseId.CASE1:
        k = r * (spec.lambda2**2 * spec.c2 + spec.delta2**2)
        if m is ModelId.ROSEN_MORSE_I:
            return k + (p1 + n) ** 2 - q1**2 / (p1 + n) ** 2
        if m is ModelId.ROSEN_MORSE_II:
            return k - (p1 - n) ** 2 - q1**2 / (p1 - n) ** 2
        return k - (p1 + n) ** 2 - q1**2 / (p1 + n) ** 2
    if m is ModelId.SCARF_I:
        return -(spec.lambda2**2) * r - p1**2 + (p1 + n) ** 2
    if spec.case is CaseId.CASE2:
        return spec.lambda2**2 * r + p1**2 - (p1 - n) ** 2
    if spec.case is CaseId.CASE3:
        a2 = spec.native["a"]
        return p1**2 - (p1 - n) ** 2 + a2**2 * r
    a2 = spec.native["a"]
    return p1 * n - a2 / (2.0 * s)


def closed_spectrum(spec: ModelSpec, partner, n: int, sector: str = "minus") -> float:
    """Closed-form level ``eps_n`` of the minus or plus sector.

    The plus sector is the minus sector shifted by one index.
    """
    if n < 0:
        raise BeyondBoundStates(f"negative level index {n}")
    if sector not in ("minus", "plus"):
        raise ValueError(f"sector must be 'minus' or 'plus', got {sector!r}")
    k = n + 1 if sector == "plus" else n
    count = bound_state_count(spec, partner)
    if k >= count:
        raise BeyondBoundStates(f"{spec.id.value}: level {k} of the minus sector is not bound (count={count})")
    return _closed_minus(spec, partner, k)


def closed_levels(spec: ModelSpec, partner, nmax: int, sector: str = "minus") -> list[float]:
    """Levels ``0..nmax`` clipped to the bound range; warns if not increasing."""
    count = bound_state_count(spec, partner)
    top = min(nmax, count - 1 - (1 if sector == "plus" else 0))
    levels = [closed_spectrum(spec, partner, n, sector) for n in range(int(top) + 1)]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        warnings.warn(f"{spec.id.value}: closed-form levels not increasing: {levels}", SpectrumWarning, stacklevel=2)
    return levels


REFERENCE_CONFIGS: dict[ModelId, tuple[dict[str, float], float, float]] = {
    ModelId.ROSEN_MORSE_I: ({"a": 2.0, "b": 1.0}, 0.1, 0.05),
    ModelId.ROSEN_MORSE_II: ({"a": 1.0, "b": 0.5}, 0.05, 0.1),
    ModelId.ECKART: ({"a": 1.0, "b": 2.0}, 0.05, 0.1),
    ModelId.SCARF_I: ({"lambda": 3.0, "delta": 1.0}, 0.05, 0.1),
    ModelId.SCARF_II: ({"lambda": 2.0, "delta": 1.0}, 0.05, 0.1),
    ModelId.POSCHL_TELLER: ({"lambda": 1.0, "delta": 2.5}, 0.05, 0.1),
    ModelId.MORSE: ({"a": 3.0, "b": 1.0}, 0.05, 0.1),
    ModelId.SHIFTED_OSCILLATOR: ({"a": 2.0, "b": 0.5}, 0.1, 0.3),
}


def reference_spec(model: ModelId | str) -> ModelSpec:
    from .params import new_couple

    params, alpha, beta = REFERENCE_CONFIGS[ModelId(model)]
    return instantiate(model, params, new_couple(alpha, beta))
