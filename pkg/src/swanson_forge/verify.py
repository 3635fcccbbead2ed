"""Numeric verification checks and report assembly.

Every check returns one :class:`CheckResult`.  Operator identities are
measured on smooth probe vectors rather than as matrix norms: a product of
two central first differences is a wide stencil that differs from the compact
second difference by ``O(1)`` on rough vectors but by ``O(h^2)`` on smooth
ones, which is the statement the identities actually make.

Convergence checks rerun a metric on the same window with the spacing halved
and report ``3.5 / ratio`` so that, like every other check, they pass when the
metric is at most the tolerance (here 1).
"""

from __future__ import annotations

import datetime as _dt
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sps

from . import eigenfunctions as ef
from . import numerics as nm
from .catalog import (
    ModelSpec,
    bound_state_count,
    case_structure_check,
    closed_spectrum,
    instantiate,
    partner_native,
)
from .errors import ConstraintViolated, GaugeOverflow, SwansonError
from .params import hermitian_limit, new_couple
from .potentials import PotentialPair, _canonical, potential_pair, printed_pair_audit, v_swanson_frame
from .riccati import (
    Branch,
    PartnerParameters,
    matching_residuals,
    printed_case3_partner,
    riccati_residual_profile,
    solve_partner,
)

CHECK_NAMES = (
    "riccati",
    "spectrum",
    "spectrum_convergence",
    "susy_shift",
    "partner_ground_absent",
    "nonhermitian",
    "nonhermitian_reality",
    "operators",
    "operators_convergence",
    "pseudo",
    "pseudo_convergence",
    "superalgebra",
    "wavefunctions",
    "wavefunctions_convergence",
    "waveform_realness",
    "normalization_identity",
    "swanson_form",
)

RICCATI_TOL = 1e-9
SPECTRUM_TOL = 5e-3
SHIFT_TOL = 1e-2
NONHERMITIAN_TOL = 1e-2
IMAG_TOL = 1e-6
IDENTITY_TOL = 1e-3
STRUCTURAL_TOL = 1e-12
WAVEFUNCTION_TOL = 1e-3
REALNESS_TOL = 1e-8
NORMALIZATION_TOL = 1e-13
CONVERGENCE_RATIO = 3.5
ROUNDOFF_FLOOR = 1e-9

SYMMETRIC_N = 2000
GENERAL_N = 1000
IDENTITY_WIDTH = 12.0
WAVEFUNCTION_WIDTH = 8.0
SINGULAR_MARGIN = 0.05
EDGE_ROWS = 5


@dataclass
class CheckResult:
    name: str
    metric: float
    tolerance: float
    passed: bool = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.metric = float(abs(self.metric)) if not math.isnan(self.metric) else math.nan
        self.passed = bool(self.metric <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "metric": self.metric, "tolerance": self.tolerance,
                "passed": self.passed, "details": self.details}


def failed_check(name: str, exc: BaseException) -> CheckResult:
    return CheckResult(name, math.inf, 0.0, {"error": type(exc).__name__, "message": str(exc)})


@dataclass
class Report:
    config: dict
    derived: dict
    checks: list[CheckResult]
    findings: list[dict]
    spectra: list[dict] = field(default_factory=list)
    timestamp: str = ""
    input_error: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "derived": self.derived,
            "checks": [c.to_dict() for c in self.checks],
            "findings": self.findings,
            "pass": self.passed,
            "timestamp": self.timestamp,
            **({"input_error": self.input_error} if self.input_error else {}),
        }


# -- shared helpers -------------------------------------------------------------
def mixed_error(value, reference) -> float:
    return float(abs(value - reference) / max(1.0, abs(reference)))


def top_level(spec: ModelSpec, partner: PartnerParameters, nmax: int, sector: str = "minus") -> int:
    """Highest checked index: ``nmax`` clipped to the bound levels of the sector."""
    count = bound_state_count(spec, partner)
    shift = 1 if sector == "plus" else 0
    return int(min(nmax, count - 1 - shift))


def focus_window(spec: ModelSpec, partner: PartnerParameters, levels, width: float, base) -> tuple[float, float]:
    """``mean +- width*stddev`` of the densities ``|phi_n|^2``, clipped to ``base``."""
    lo, hi = base
    xs = np.linspace(lo, hi, 20003)[1:-1]
    a, b = math.inf, -math.inf
    for n in levels:
        env = np.abs(ef.phi_minus(spec, partner, n, xs)) ** 2
        wgt = env / env.sum()
        mean = float(wgt @ xs)
        sd = math.sqrt(float(wgt @ (xs - mean) ** 2))
        a, b = min(a, mean - width * sd), max(b, mean + width * sd)
    return (max(lo, a), min(hi, b))


def check_rows(grid: nm.Grid) -> np.ndarray:
    """Rows used by residual metrics.

    Drops ``EDGE_ROWS`` rows at each end and, next to a regular-singular
    endpoint, a fixed fraction of the window where closed forms behave like
    ``t^p`` and pointwise truncation errors cannot converge uniformly.
    """
    x = grid.x
    lo, hi = grid.window
    span = hi - lo
    ok = np.ones(grid.N, dtype=bool)
    ok[:EDGE_ROWS] = False
    ok[-EDGE_ROWS:] = False
    if grid.lo_kind == nm.FINITE_SINGULAR:
        ok &= x - lo >= SINGULAR_MARGIN * span
    if grid.hi_kind == nm.FINITE_SINGULAR:
        ok &= hi - x >= SINGULAR_MARGIN * span
    return ok


def probe_vectors(grid: nm.Grid) -> list[np.ndarray]:
    """Smooth bump ``chi`` and ``chi*u``, ``chi*u^2`` supported inside the window."""
    lo, hi = grid.window
    span = hi - lo
    a, b = lo + SINGULAR_MARGIN * span, hi - SINGULAR_MARGIN * span
    u = (2 * grid.x - (a + b)) / (b - a)
    chi = np.zeros(grid.N)
    inside = np.abs(u) < 1
    chi[inside] = np.exp(1 - 1 / (1 - u[inside] ** 2))
    return [chi, chi * u, chi * u * u]


def _relative(residual, reference, rows) -> float:
    den = np.linalg.norm(reference[rows])
    return float(np.linalg.norm(residual[rows]) / den) if den > 0 else math.inf


def _ratio(coarse: float, fine: float) -> float:
    if fine == 0:
        return math.inf
    return abs(coarse) / abs(fine)


def convergence_result(name: str, coarse: dict, fine: dict, extra: dict | None = None) -> CheckResult:
    """``3.5 / min ratio`` over metrics above the round-off floor."""
    ratios = {}
    skipped = []
    for key, c in coarse.items():
        if not np.isfinite(c) or abs(c) < ROUNDOFF_FLOOR:
            skipped.append(key)
            continue
        ratios[key] = _ratio(c, fine[key])
    worst = min(ratios.values()) if ratios else math.inf
    metric = CONVERGENCE_RATIO / worst if ratios else 0.0
    details = {"coarse": coarse, "fine": fine, "ratios": ratios, "at_roundoff": skipped,
               "required_ratio": CONVERGENCE_RATIO}
    details.update(extra or {})
    return CheckResult(name, metric, 1.0, details)


# -- Riccati ---------------------------------------------------------------------
def check_riccati(spec: ModelSpec, partner: PartnerParameters) -> CheckResult:
    """Constancy of ``[w^2 - w'] - [r W^2 - W'/s]`` over 200 interior samples."""
    mean, std, _ = riccati_residual_profile(spec, partner, spec.sample_points(200))
    details = {
        "factorization_offset": mean,
        "matching_residuals": matching_residuals(spec, partner),
        "structure_identity_residual": case_structure_check(spec, spec.sample_points(200)),
        "branch": partner.branch.rule,
    }
    return CheckResult("riccati", std, RICCATI_TOL, details)


# -- spectra ---------------------------------------------------------------------
@dataclass
class _Context:
    spec: ModelSpec
    partner: PartnerParameters
    pair: PotentialPair
    nmax: int
    grid_n: int | None
    window: tuple[float, float] | None
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _cache: dict = field(default_factory=dict)

    @property
    def symmetric_n(self) -> int:
        return self.grid_n or SYMMETRIC_N

    @property
    def general_n(self) -> int:
        return min(nm.GENERAL_SIZE_LIMIT, self.grid_n // 2 if self.grid_n else GENERAL_N)

    def _memo(self, key, fn):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = fn()
        with self._lock:
            return self._cache.setdefault(key, value)

    def eigen_window(self) -> tuple[float, float]:
        return self._memo("eigen_window", lambda: self.window or nm.default_window(self.spec, self.partner, self.nmax))

    def identity_window(self) -> tuple[float, float]:
        return self._memo("identity_window", lambda: self.window or focus_window(
            self.spec, self.partner, [0], IDENTITY_WIDTH, self.eigen_window()))

    def wavefunction_window(self) -> tuple[float, float]:
        top = top_level(self.spec, self.partner, self.nmax)
        return self._memo("wf_window", lambda: self.window or focus_window(
            self.spec, self.partner, range(top + 1), WAVEFUNCTION_WIDTH, self.eigen_window()))

    def symmetric_levels(self, sector: str, N: int, k: int, *, singular_ends: bool = True) -> np.ndarray:
        def solve():
            grid = nm.build_grid(self.spec, N, self.eigen_window())
            V = self.pair.v_minus if sector == "minus" else self.pair.v_plus
            op = nm.discretize_hermitian(V, grid, singular_ends=singular_ends, tag=f"h{sector}")
            return nm.eig_symmetric(op, k).values
        return self._memo(("sym", sector, N, k, singular_ends), solve)


def _spectrum_table(ctx: _Context, N: int, singular_ends: bool = True):
    spec, partner = ctx.spec, ctx.partner
    top = top_level(spec, partner, ctx.nmax)
    numeric = ctx.symmetric_levels("minus", N, top + 1, singular_ends=singular_ends)
    rows = []
    for n in range(top + 1):
        closed = closed_spectrum(spec, partner, n)
        rows.append({"n": n, "closed": closed, "numeric": float(numeric[n]),
                     "abs_err": abs(float(numeric[n]) - closed), "mixed_err": mixed_error(numeric[n], closed)})
    return rows


def check_spectrum(spec: ModelSpec, partner: PartnerParameters, nmax: int = 3, N: int = SYMMETRIC_N, *,
                   ctx: _Context | None = None) -> CheckResult:
    """Symmetric eigensolve of the canonical ``h_-`` against the closed-form levels."""
    ctx = ctx or _Context(spec, partner, potential_pair(spec, partner), nmax, N, None)
    rows = _spectrum_table(ctx, N)
    plain = _spectrum_table(ctx, N, singular_ends=False)
    metric = max(r["mixed_err"] for r in rows)
    details = {"N": N, "window": list(ctx.eigen_window()), "levels": rows,
               "max_mixed_err_without_endpoint_correction": max(r["mixed_err"] for r in plain)}
    return CheckResult("spectrum", metric, SPECTRUM_TOL, details)


def check_spectrum_convergence(ctx: _Context) -> CheckResult:
    N = ctx.symmetric_n
    coarse = {f"n={r['n']}": r["abs_err"] for r in _spectrum_table(ctx, N)}
    fine = {f"n={r['n']}": r["abs_err"] for r in _spectrum_table(ctx, 2 * N + 1)}
    return convergence_result("spectrum_convergence", coarse, fine, {"N": [N, 2 * N + 1]})


def _shift_levels(ctx: _Context):
    spec, partner = ctx.spec, ctx.partner
    top_minus = top_level(spec, partner, ctx.nmax)
    top_plus = top_level(spec, partner, ctx.nmax - 1, "plus")
    N = ctx.symmetric_n
    minus = ctx.symmetric_levels("minus", N, top_minus + 1)
    plus = ctx.symmetric_levels("plus", N, max(top_plus + 1, 3))
    return top_plus, minus, plus


def check_susy_shift(ctx: _Context) -> CheckResult:
    """Level ``n`` of ``h_+`` equals level ``n+1`` of ``h_-`` (bound levels only)."""
    top_plus, minus, plus = _shift_levels(ctx)
    rows = [{"n": n, "plus": float(plus[n]), "minus_next": float(minus[n + 1]),
             "mixed_err": mixed_error(plus[n], minus[n + 1])} for n in range(top_plus + 1)]
    metric = max((r["mixed_err"] for r in rows), default=0.0)
    details = {"levels": rows}
    if not rows:
        details["note"] = "partner sector has no bound level to compare"
    return CheckResult("susy_shift", metric, SHIFT_TOL, details)


def check_partner_ground_absent(ctx: _Context) -> CheckResult:
    """No low ``h_+`` level sits on the ``h_-`` ground level.

    Metric ``10*tol / min gap``: passes when every gap is at least ten times
    the shift tolerance.
    """
    _, minus, plus = _shift_levels(ctx)
    gaps = [mixed_error(p, minus[0]) for p in plus]
    gap = min(gaps)
    metric = 10 * SHIFT_TOL / gap if gap > 0 else math.inf
    return CheckResult("partner_ground_absent", metric, 1.0,
                       {"minus_ground": float(minus[0]), "plus_levels": [float(p) for p in plus], "min_gap": gap})


def _general_levels(ctx: _Context):
    def solve():
        spec, partner = ctx.spec, ctx.partner
        top = top_level(spec, partner, ctx.nmax)
        grid = nm.build_grid(spec, ctx.general_n, ctx.eigen_window())
        H = nm.discretize_swanson(spec, ctx.pair.v_minus_swanson, grid, singular_ends=True, tag="H-")
        return top, nm.eig_general(H, top + 1)
    return ctx._memo("general", solve)


def check_nonhermitian(ctx: _Context) -> CheckResult:
    """Dense eigensolve of the nonsymmetric ``H_-``: real parts against ``s*eps_n``."""
    top, res = _general_levels(ctx)
    s = ctx.spec.couple.s
    rows = []
    for n in range(top + 1):
        ref = s * closed_spectrum(ctx.spec, ctx.partner, n)
        val = res.values[n]
        rows.append({"n": n, "reference": ref, "real": float(val.real), "imag": float(val.imag),
                     "mixed_err": mixed_error(val.real, ref), "residual": float(res.residuals[n])})
    metric = max(r["mixed_err"] for r in rows)
    return CheckResult("nonhermitian", metric, NONHERMITIAN_TOL, {"N": ctx.general_n, "levels": rows})


def check_nonhermitian_reality(ctx: _Context) -> CheckResult:
    top, res = _general_levels(ctx)
    s = ctx.spec.couple.s
    scale = max(1.0, max(abs(s * closed_spectrum(ctx.spec, ctx.partner, n)) for n in range(top + 1)))
    metric = float(np.max(np.abs(res.values.imag))) / scale
    return CheckResult("nonhermitian_reality", metric, IMAG_TOL, {"scale": scale, "N": ctx.general_n})


# -- operator identities -----------------------------------------------------------
def _plus_potential(spec: ModelSpec, partner: PartnerParameters):
    return lambda x: _canonical(spec, partner, spec.check_inside(x), +1)


@dataclass
class _Operators:
    grid: nm.Grid
    Hm: sps.csr_matrix
    Hp: sps.csr_matrix
    Dp: sps.csr_matrix
    Dm: sps.csr_matrix
    At: sps.csr_matrix
    Ad: sps.csr_matrix


def _operators(spec: ModelSpec, partner: PartnerParameters, pair: PotentialPair, grid: nm.Grid) -> _Operators:
    """``H_-`` from the base superpotential, ``H_+`` and ``D+-`` from ``partner``."""
    Hm = nm.discretize_swanson(spec, pair.v_minus_swanson, grid, tag="H-").matrix
    Hp = nm.discretize_swanson(spec, _plus_potential(spec, partner), grid, tag="H+").matrix
    return _Operators(
        grid, Hm, Hp,
        nm.first_order_operator("Dplus", partner, spec, grid).matrix,
        nm.first_order_operator("Dminus", partner, spec, grid).matrix,
        nm.first_order_operator("Atilde", partner, spec, grid).matrix,
        nm.first_order_operator("AtildeDagger", partner, spec, grid).matrix,
    )


def identity_metrics(spec: ModelSpec, partner: PartnerParameters, pair: PotentialPair, grid: nm.Grid) -> dict:
    """Factorization of both sectors and intertwining, on probe vectors."""
    ops = _operators(spec, partner, pair, grid)
    shift = spec.couple.s * pair.additive_constant
    rows = check_rows(grid)
    out = {"factorization_minus": 0.0, "factorization_plus": 0.0, "intertwining": 0.0}
    for v in probe_vectors(grid):
        Hm_v, Hp_v = ops.Hm @ v, ops.Hp @ v
        Dm_v = ops.Dm @ v
        out["factorization_minus"] = max(out["factorization_minus"],
                                         _relative(ops.Dp @ Dm_v - Hm_v + shift * v, Hm_v, rows))
        out["factorization_plus"] = max(out["factorization_plus"],
                                        _relative(ops.Dm @ (ops.Dp @ v) - Hp_v + shift * v, Hp_v, rows))
        DmHm_v = ops.Dm @ Hm_v
        out["intertwining"] = max(out["intertwining"], _relative(DmHm_v - ops.Hp @ Dm_v, DmHm_v, rows))
    return out


def check_factorization_and_intertwining(spec: ModelSpec, partner: PartnerParameters, grid: nm.Grid, *,
                                         pair: PotentialPair | None = None) -> CheckResult:
    pair = pair or potential_pair(spec, partner)
    m = identity_metrics(spec, partner, pair, grid)
    return CheckResult("operators", max(m.values()), IDENTITY_TOL,
                       {"N": grid.N, "window": list(grid.window), "metrics": m})


def _shrink_for_gauge(spec: ModelSpec, window) -> tuple[float, float]:
    """Largest sub-window around the reference point where the gauge exponent is safe."""
    lo, hi = window
    xs = np.linspace(lo, hi, 20003)[1:-1]
    safe = np.abs(ef.log_gauge(spec, xs)) <= 0.9 * ef.GAUGE_GUARD
    ref = int(np.argmin(np.abs(xs - spec.domain.reference))) if spec.domain.contains(spec.domain.reference) else 0
    i = j = ref
    while i > 0 and safe[i - 1]:
        i -= 1
    while j < xs.size - 1 and safe[j + 1]:
        j += 1
    return (lo if i == 0 else float(xs[i]), hi if j == xs.size - 1 else float(xs[j]))


def pseudo_metrics(spec: ModelSpec, partner: PartnerParameters, pair: PotentialPair, grid: nm.Grid) -> dict:
    """Pseudo-Hermiticity, pseudo-adjointness and the gauge map of the supercharges."""
    ops = _operators(spec, partner, pair, grid)
    eta = nm.gauge_diagonal(spec, grid, 2).matrix
    eta_inv = nm.gauge_diagonal(spec, grid, -2).matrix
    rho = nm.gauge_diagonal(spec, grid, 1).matrix
    rho_inv = nm.gauge_diagonal(spec, grid, -1).matrix
    root = spec.couple.sqrt_s
    rows = check_rows(grid)
    keys = ("pseudo_hermitian_minus", "pseudo_hermitian_plus", "pseudo_adjoint", "gauge_map_minus", "gauge_map_plus")
    out = dict.fromkeys(keys, 0.0)
    HmT, HpT, DpT = ops.Hm.T.tocsr(), ops.Hp.T.tocsr(), ops.Dp.T.tocsr()
    for v in probe_vectors(grid):
        for key, H, HT in (("pseudo_hermitian_minus", ops.Hm, HmT), ("pseudo_hermitian_plus", ops.Hp, HpT)):
            ref = eta @ (H @ v)
            out[key] = max(out[key], _relative(ref - HT @ (eta @ v), ref, rows))
        Dm_v, Dp_v = ops.Dm @ v, ops.Dp @ v
        out["pseudo_adjoint"] = max(out["pseudo_adjoint"],
                                    _relative(eta_inv @ (DpT @ (eta @ v)) - Dm_v, Dm_v, rows))
        out["gauge_map_minus"] = max(out["gauge_map_minus"],
                                     _relative(root * (rho_inv @ (ops.At @ (rho @ v))) - Dm_v, Dm_v, rows))
        out["gauge_map_plus"] = max(out["gauge_map_plus"],
                                    _relative(root * (rho_inv @ (ops.Ad @ (rho @ v))) - Dp_v, Dp_v, rows))
    return out


def check_pseudo_structure(spec: ModelSpec, partner: PartnerParameters, grid: nm.Grid, *,
                           pair: PotentialPair | None = None) -> CheckResult:
    pair = pair or potential_pair(spec, partner)
    m = pseudo_metrics(spec, partner, pair, grid)
    return CheckResult("pseudo", max(m.values()), IDENTITY_TOL,
                       {"N": grid.N, "window": list(grid.window), "metrics": m})


def superalgebra_blocks(spec: ModelSpec, partner: PartnerParameters, grid: nm.Grid) -> dict:
    """Exact block identities of the supercharges.

    ``Q = [[0, 0], [D-, 0]]`` and ``Q# = [[0, D+], [0, 0]]``; the
    anticommutators are assembled as 2N x 2N sparse matrices.
    """
    Dp = nm.first_order_operator("Dplus", partner, spec, grid).matrix
    Dm = nm.first_order_operator("Dminus", partner, spec, grid).matrix
    Z = sps.csr_matrix(Dp.shape)
    Q = sps.bmat([[Z, Z], [Dm, Z]], format="csr")
    Qs = sps.bmat([[Z, Dp], [Z, Z]], format="csr")
    expected = sps.bmat([[Dp @ Dm, Z], [Z, Dm @ Dp]], format="csr")

    def maxabs(M):
        M = M.tocsr()
        return float(abs(M).max()) if M.nnz else 0.0

    scale = max(maxabs(expected), 1.0)
    return {
        "QQ": maxabs(Q @ Q + Q @ Q) / scale,
        "QsQs": maxabs(Qs @ Qs + Qs @ Qs) / scale,
        "anticommutator_block_form": maxabs(Qs @ Q + Q @ Qs - expected) / scale,
    }


def check_superalgebra(spec: ModelSpec, partner: PartnerParameters, grid: nm.Grid) -> CheckResult:
    m = superalgebra_blocks(spec, partner, grid)
    return CheckResult("superalgebra", max(m.values()), STRUCTURAL_TOL, {"N": grid.N, "metrics": m})


def swanson_form_metric(spec: ModelSpec, pair: PotentialPair, grid: nm.Grid) -> float:
    """``A^dag A + alpha A^2 + beta A^dag^2`` against the gauge-form ``H_-``."""
    c = spec.couple
    D1 = nm.first_difference(grid)
    W = sps.diags(spec.W(grid.x))
    A, Ad = D1 + W, -D1 + W
    quad = Ad @ A + c.alpha * (A @ A) + c.beta * (Ad @ Ad)
    H = nm.discretize_swanson(spec, lambda x: v_swanson_frame(spec, x), grid).matrix
    rows = check_rows(grid)
    worst = 0.0
    for v in probe_vectors(grid):
        Hv = H @ v
        worst = max(worst, _relative(quad @ v - Hv, Hv, rows))
    return worst


# -- wavefunctions -----------------------------------------------------------------
def wavefunction_metrics(spec: ModelSpec, partner: PartnerParameters, pair: PotentialPair, grid: nm.Grid,
                         nmax: int, interpretation: str = ef.LIMIT_CONSISTENT, **kw) -> dict:
    """Discrete ODE residuals ``|H_- psi_n - E_n psi_n| / |psi_n|`` and ``|A~ phi_0| / |phi_0|``."""
    H = nm.discretize_swanson(spec, pair.v_minus_swanson, grid).matrix
    rows = check_rows(grid)
    x = grid.x
    out = {}
    for n in range(top_level(spec, partner, nmax) + 1):
        psi = ef.waveform(spec, partner, n, x, interpretation, **kw)
        E = spec.couple.s * closed_spectrum(spec, partner, n)
        out[f"ode_n={n}"] = _relative(H @ psi - E * psi, psi, rows)
    if interpretation == ef.LIMIT_CONSISTENT:
        At = nm.first_order_operator("Atilde", partner, spec, grid).matrix
        phi0 = ef.phi_minus(spec, partner, 0, x)
        out["annihilation"] = _relative(At @ phi0, phi0, rows)
    return out


def log_derivative_defect(spec: ModelSpec, partner: PartnerParameters, xs) -> float:
    """``max |w + phi_0'/phi_0| / max(1, |w|)`` from a high-order difference of the closed form."""
    xs = spec.check_inside(xs)

    def log_abs_phi0(t):
        logp, poly = ef._textbook(spec, partner, 0, t)
        return np.real(logp) + np.log(np.abs(poly))

    lp = ef._derivative(log_abs_phi0, xs, spec.domain.lo, spec.domain.hi)
    w = partner.w(spec, xs)
    return float(np.max(np.abs(w + lp) / np.maximum(1.0, np.abs(w))))


def check_wavefunctions(spec: ModelSpec, partner: PartnerParameters, grid: nm.Grid, nmax: int = 3, *,
                        pair: PotentialPair | None = None) -> CheckResult:
    pair = pair or potential_pair(spec, partner)
    m = wavefunction_metrics(spec, partner, pair, grid, nmax)
    interior = grid.x[check_rows(grid)]
    sample = interior[:: max(1, interior.size // 50)]
    details = {"N": grid.N, "window": list(grid.window), "metrics": m,
               "log_derivative_defect": log_derivative_defect(spec, partner, sample)}
    return CheckResult("wavefunctions", max(m.values()), WAVEFUNCTION_TOL, details)


def check_waveform_realness(spec: ModelSpec, partner: PartnerParameters, grid: nm.Grid, nmax: int) -> CheckResult:
    defects = {f"n={n}": ef.realness_defect(ef.waveform(spec, partner, n, grid.x))
               for n in range(top_level(spec, partner, nmax) + 1)}
    return CheckResult("waveform_realness", max(defects.values()), REALNESS_TOL, {"defects": defects})


def normalization_defect(spec: ModelSpec, psi, grid: nm.Grid) -> float:
    """``|sum eta |psi|^2 h - sum |rho psi|^2 h|`` relative to the second sum."""
    eta = nm.gauge_diagonal(spec, grid, 2).matrix.diagonal()
    phi = ef.phi_from_psi(spec, psi, grid.x)
    lhs = float(np.sum(eta * np.abs(psi) ** 2) * grid.h)
    rhs = float(np.sum(np.abs(phi) ** 2) * grid.h)
    return abs(lhs - rhs) / rhs


def check_normalization_identity(spec: ModelSpec, partner: PartnerParameters, grid: nm.Grid, nmax: int) -> CheckResult:
    defects = {f"n={n}": normalization_defect(spec, ef.waveform(spec, partner, n, grid.x), grid)
               for n in range(top_level(spec, partner, nmax) + 1)}
    return CheckResult("normalization_identity", max(defects.values()), NORMALIZATION_TOL, {"defects": defects})


# -- audit findings -----------------------------------------------------------------
def printed_partners(spec: ModelSpec, solved: PartnerParameters) -> dict[str, PartnerParameters]:
    """Partners assembled from the printed closed forms, where those are real."""
    audit = solved.printed_form_discrepancy or {}
    out = {}
    branch = Branch(0, "printed closed form")
    if "delta1" in audit and "lambda1" in audit:
        out["delta1"] = replace(solved, delta1=audit["delta1"]["printed"], branch=branch)
        lam = audit["lambda1"]["printed"]
        if math.isfinite(lam):
            out["lambda1"] = replace(solved, lambda1=lam, branch=branch)
    elif "a1" in audit and "b1" in audit and spec.case.value == 3:
        out["a1"] = printed_case3_partner(spec)
    elif "a1" in audit and "b1" in audit:
        lam, dl = spec.definition.to_internal(audit["a1"]["printed"], audit["b1"]["printed"])
        out["a1_b1"] = replace(solved, lambda1=lam, delta1=dl, branch=branch)
    return out


_FINDING_NAMES = {
    1: {"lambda1": "case1-closed-form-discriminant", "delta1": "case1-delta1-closed-form"},
    2: {"g_squared_match": "case2-matching-g-squared", "fg_match": "case2-matching-fg"},
    3: {"b1": "morse-b1-closed-form", "a1": "morse-a1-closed-form"},
    4: {"a1": "oscillator-a1-closed-form", "b1": "oscillator-b1-closed-form"},
}


def _flag(entry: dict) -> bool:
    d = entry["discrepancy"]
    return bool(not math.isfinite(d) or d > 1e-9)


def audit_findings(spec: ModelSpec, partner: PartnerParameters, pair: PotentialPair, ctx: _Context | None) -> list[dict]:
    findings = []
    limit_partner = solve_partner(spec.with_couple(hermitian_limit()), check=False)
    for which, part in (("config", partner), ("hermitian_limit", limit_partner)):
        for key, entry in (part.printed_form_discrepancy or {}).items():
            name = _FINDING_NAMES[spec.case.value].get(key, key)
            findings.append({"name": name, "at": which, "flagged": _flag(entry), "discrepancy": entry["discrepancy"],
                             "details": entry})

    identity_grid = None
    if ctx is not None:
        identity_grid = nm.build_grid(spec, ctx.general_n, ctx.identity_window())
    for label, printed in printed_partners(spec, partner).items():
        _, std, _ = riccati_residual_profile(spec, printed, spec.sample_points(200))
        detail = {"riccati_residual_stddev": std, "lambda1": printed.lambda1, "delta1": printed.delta1}
        if identity_grid is not None:
            detail["identity_metrics"] = identity_metrics(spec, printed, pair, identity_grid)
            detail["identity_metrics_solved"] = identity_metrics(spec, partner, pair, identity_grid)
            detail["printed_fails_identities"] = max(detail["identity_metrics"].values()) > IDENTITY_TOL
        findings.append({"name": f"printed-partner-{label}", "at": "config",
                         "flagged": bool(std > RICCATI_TOL), "discrepancy": std, "details": detail})

    tab = printed_pair_audit(spec, partner)
    flagged = not (tab["minus"]["consistent"] and tab["plus"]["consistent"])
    findings.append({"name": "printed-potential-pair", "at": "config", "flagged": flagged,
                     "discrepancy": max(tab["minus"]["stddev"], tab["plus"]["stddev"],
                                        abs(tab["minus"]["mean"]), abs(tab["plus"]["mean"])),
                     "details": tab})

    if ctx is not None:
        findings.extend(_waveform_findings(ctx))
    return findings


def _waveform_findings(ctx: _Context) -> list[dict]:
    spec, partner, pair = ctx.spec, ctx.partner, ctx.pair
    grid = nm.build_grid(spec, ctx.symmetric_n, ctx.wavefunction_window())
    out = []
    try:
        consistent = wavefunction_metrics(spec, partner, pair, grid, min(ctx.nmax, 2))
    except SwansonError as exc:
        return [{"name": "waveform-as-printed", "at": "config", "flagged": False, "discrepancy": math.nan,
                 "details": {"error": str(exc)}}]
    readings = ("printed", "base") if spec.case.value == 1 else ("printed",)
    for reading in readings:
        try:
            printed = wavefunction_metrics(spec, partner, pair, grid, min(ctx.nmax, 2), ef.AS_PRINTED,
                                           mu_reading=reading)
            worst = max(printed.values())
            detail = {"as_printed": printed, "limit_consistent": consistent}
        except SwansonError as exc:
            worst, detail = math.nan, {"error": str(exc)}
        name = "waveform-as-printed" if reading == "printed" else "waveform-as-printed-base-mu"
        out.append({"name": name, "at": "config", "flagged": bool(not worst <= WAVEFUNCTION_TOL),
                    "discrepancy": worst, "details": detail})
    return out


# -- orchestration ---------------------------------------------------------------------
def _thread_count() -> int:
    raw = os.environ.get("SWANSON_FORGE_THREADS")
    cap = os.cpu_count() or 1
    if raw:
        try:
            return max(1, min(int(raw), 64))
        except ValueError:
            return 1
    return max(1, min(4, cap))


def _runner(name: str, ctx: _Context):
    spec, partner, pair, nmax = ctx.spec, ctx.partner, ctx.pair, ctx.nmax

    def identity_grid(N=None):
        return nm.build_grid(spec, N or ctx.general_n, ctx.identity_window())

    def wf_grid(N=None):
        return nm.build_grid(spec, N or ctx.symmetric_n, ctx.wavefunction_window())

    def pseudo_grid():
        grid = identity_grid()
        try:
            nm.gauge_diagonal(spec, grid, 2)
            return grid
        except GaugeOverflow:
            return nm.build_grid(spec, ctx.general_n, _shrink_for_gauge(spec, grid.window))

    if name == "riccati":
        return lambda: check_riccati(spec, partner)
    if name == "spectrum":
        return lambda: check_spectrum(spec, partner, nmax, ctx.symmetric_n, ctx=ctx)
    if name == "spectrum_convergence":
        return lambda: check_spectrum_convergence(ctx)
    if name == "susy_shift":
        return lambda: check_susy_shift(ctx)
    if name == "partner_ground_absent":
        return lambda: check_partner_ground_absent(ctx)
    if name == "nonhermitian":
        return lambda: check_nonhermitian(ctx)
    if name == "nonhermitian_reality":
        return lambda: check_nonhermitian_reality(ctx)
    if name == "operators":
        return lambda: check_factorization_and_intertwining(spec, partner, identity_grid(), pair=pair)
    if name == "operators_convergence":
        def run():
            g = identity_grid()
            return convergence_result("operators_convergence", identity_metrics(spec, partner, pair, g),
                                      identity_metrics(spec, partner, pair, g.refined()), {"N": [g.N, 2 * g.N + 1]})
        return run
    if name == "pseudo":
        return lambda: check_pseudo_structure(spec, partner, pseudo_grid(), pair=pair)
    if name == "pseudo_convergence":
        def run():
            g = pseudo_grid()
            return convergence_result("pseudo_convergence", pseudo_metrics(spec, partner, pair, g),
                                      pseudo_metrics(spec, partner, pair, g.refined()), {"N": [g.N, 2 * g.N + 1]})
        return run
    if name == "superalgebra":
        return lambda: check_superalgebra(spec, partner, identity_grid())
    if name == "wavefunctions":
        return lambda: check_wavefunctions(spec, partner, wf_grid(), nmax, pair=pair)
    if name == "wavefunctions_convergence":
        def run():
            g = wf_grid()
            return convergence_result("wavefunctions_convergence", wavefunction_metrics(spec, partner, pair, g, nmax),
                                      wavefunction_metrics(spec, partner, pair, g.refined(), nmax),
                                      {"N": [g.N, 2 * g.N + 1]})
        return run
    if name == "waveform_realness":
        return lambda: check_waveform_realness(spec, partner, wf_grid(), nmax)
    if name == "normalization_identity":
        return lambda: check_normalization_identity(spec, partner, wf_grid(), nmax)
    if name == "swanson_form":
        return lambda: CheckResult("swanson_form", swanson_form_metric(spec, pair, identity_grid()), IDENTITY_TOL,
                                   {"N": ctx.general_n})
    raise KeyError(name)


def _safe(name: str, fn) -> CheckResult:
    try:
        return fn()
    except (SwansonError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return failed_check(name, exc)


def spectra_rows(ctx: _Context) -> list[dict]:
    """One row per checked minus level for the CSV export."""
    rows = []
    table = _spectrum_table(ctx, ctx.symmetric_n)
    top_plus = top_level(ctx.spec, ctx.partner, ctx.nmax - 1, "plus")
    plus = ctx.symmetric_levels("plus", ctx.symmetric_n, top_plus + 1) if top_plus >= 0 else []
    for r in table:
        n = r["n"]
        eps_plus = float(plus[n - 1]) if 1 <= n <= len(plus) else None
        rows.append({"n": n, "eps_minus_closed": r["closed"], "eps_minus_numeric": r["numeric"],
                     "eps_plus_numeric": eps_plus, "abs_err": r["abs_err"], "mixed_err": r["mixed_err"]})
    return rows


def build_context(config) -> _Context:
    """Instantiate, solve and set up shared state for a run (input errors propagate)."""
    couple = new_couple(config.alpha, config.beta)
    spec = instantiate(config.model, config.params, couple)
    partner = solve_partner(spec)
    pair = potential_pair(spec, partner)
    return _Context(spec, partner, pair, config.nmax, config.grid_n, config.window)


def derived_block(ctx: _Context) -> dict:
    spec, partner = ctx.spec, ctx.partner
    a1, b1 = partner_native(spec, partner)
    return {
        "mu": spec.couple.mu, "r": spec.couple.r, "s": spec.couple.s,
        "lambda1": partner.lambda1, "delta1": partner.delta1,
        "partner_native": dict(zip(spec.definition.param_names, (a1, b1))),
        "factorization_offset": partner.factorization_offset,
        "convention_offset": ctx.pair.convention_offset,
        "additive_constant": ctx.pair.additive_constant,
        "bound_state_count": None if math.isinf(bound_state_count(spec, partner)) else int(bound_state_count(spec, partner)),
    }


def _stamp(timestamp: str | None) -> str:
    return timestamp if timestamp is not None else _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run_all(config, *, timestamp: str | None = None) -> Report:
    """Run the selected checks; check failures become failed results, never exceptions.

    An invalid couple or unknown parameter raises before anything runs.  A
    violated model constraint is surfaced in the report: every selected check
    fails with the constraint error and ``input_error`` names the rule.
    """
    names = config.selected_checks()
    try:
        ctx = build_context(config)
    except ConstraintViolated as exc:
        new_couple(config.alpha, config.beta)
        checks = [failed_check(name, exc) for name in names]
        error = {"error": type(exc).__name__, "rule": exc.rule, "message": str(exc)}
        return Report(config.to_dict(), {}, checks, [], [], _stamp(timestamp), error)
    threads = _thread_count()
    # windows are shared by several checks; settle them before fanning out
    for prime in (ctx.eigen_window, ctx.identity_window, ctx.wavefunction_window):
        try:
            prime()
        except SwansonError:
            pass
    jobs = [(name, _runner(name, ctx)) for name in names]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_safe, name, fn) for name, fn in jobs]
            checks = [f.result() for f in futures]
    else:
        checks = [_safe(name, fn) for name, fn in jobs]
    try:
        findings = audit_findings(ctx.spec, ctx.partner, ctx.pair, ctx)
    except SwansonError as exc:
        findings = [{"name": "audit-error", "at": "config", "flagged": False, "discrepancy": math.nan,
                     "details": {"error": str(exc)}}]
    try:
        spectra = spectra_rows(ctx)
    except SwansonError:
        spectra = []
    return Report(config.to_dict(), derived_block(ctx), checks, findings, spectra, _stamp(timestamp))
