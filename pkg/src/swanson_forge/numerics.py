"""Finite-difference discretization on uniform Dirichlet grids.

Operators are stored as sparse matrices because every identity check only
needs matrix-vector products; ``GridOperator.dense()`` materializes them for
the dense eigensolvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps

from . import eigenfunctions as ef
from .catalog import FINITE_SINGULAR, ModelId, ModelSpec, bound_state_count, partner_native
from .errors import (
    ConvergenceFailure,
    GaugeOverflow,
    NonFiniteValue,
    NotSymmetric,
    SizeGuard,
    WindowNotConverged,
)
from .riccati import PartnerParameters, solve_partner

MIN_POINTS = 16
GENERAL_SIZE_LIMIT = 1600
GROUND_EDGE_TOL = 1e-10
EXCITED_EDGE_TOL = 1e-6
START_HALF_WIDTH = 12.0
MAX_DOUBLINGS = 6
TRUNCATED = "truncated"


@dataclass(frozen=True)
class Grid:
    """Uniform interior points ``x0 + i h`` for ``i = 0..N-1``."""

    x0: float
    h: float
    N: int
    window: tuple[float, float]
    lo_kind: str
    hi_kind: str

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.N)

    def refined(self) -> "Grid":
        """Same window with ``2N + 1`` points, so the spacing halves exactly."""
        lo, hi = self.window
        n = 2 * self.N + 1
        h = (hi - lo) / (n + 1)
        return Grid(lo + h, h, n, self.window, self.lo_kind, self.hi_kind)

    def interior_rows(self, margin: int = 5) -> slice:
        return slice(margin, self.N - margin)


def _edge_ok(spec: ModelSpec, partner: PartnerParameters, window, nmax: int) -> bool:
    lo, hi = window
    dom = spec.domain
    xs = np.linspace(lo, hi, 4003)[1:-1]
    check_lo = not math.isfinite(dom.lo)
    check_hi = not math.isfinite(dom.hi)

    def tail_ok(values, tol):
        mag = np.abs(values)
        ok = True
        if check_lo:
            ok &= mag[0] <= tol
        if check_hi:
            ok &= mag[-1] <= tol
        return bool(ok)

    count = bound_state_count(spec, partner)
    top = int(min(nmax, count - 1))
    for n in range(top + 1):
        tol = GROUND_EDGE_TOL if n == 0 else EXCITED_EDGE_TOL
        if not tail_ok(ef.phi_minus(spec, partner, n, xs), tol):
            return False
    rule = ef.normalizability_rule(spec)
    if rule is None or rule[1]:
        if not tail_ok(ef.waveform(spec, partner, 0, xs), GROUND_EDGE_TOL):
            return False
    return True


def default_window(spec: ModelSpec, partner: PartnerParameters | None = None, nmax: int = 3) -> tuple[float, float]:
    """Truncation window for the model domain.

    Finite domains are used as they are.  Morse uses a fixed rule in terms
    of the partner parameters; other infinite directions start at
    ``|x| = 12`` and double until the closed-form states have decayed.
    """
    dom = spec.domain
    if dom.finite:
        return (dom.lo, dom.hi)
    partner = partner or solve_partner(spec)
    if spec.id is ModelId.MORSE:
        a1, b1 = partner_native(spec, partner)
        return (math.log(2.0 * b1 / 80.0), 25.0 / max(0.5, a1 - nmax))
    half = START_HALF_WIDTH
    for _ in range(MAX_DOUBLINGS + 1):
        window = (dom.lo if math.isfinite(dom.lo) else -half, dom.hi if math.isfinite(dom.hi) else half)
        if _edge_ok(spec, partner, window, nmax):
            return window
        half *= 2.0
    raise WindowNotConverged(f"{spec.id.value}: states not decayed at |x| = {half / 2:g}")


def build_grid(spec: ModelSpec, N: int, window=None, *, partner: PartnerParameters | None = None,
               nmax: int = 3) -> Grid:
    """Uniform grid with ``N`` interior points and Dirichlet ends."""
    if N < MIN_POINTS:
        raise ValueError(f"grid needs at least {MIN_POINTS} points, got {N}")
    if window is None:
        window = default_window(spec, partner, nmax)
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError(f"empty window [{lo}, {hi}]")
    h = (hi - lo) / (N + 1)
    dom = spec.domain
    lo_kind = dom.lo_kind if lo == dom.lo else TRUNCATED
    hi_kind = dom.hi_kind if hi == dom.hi else TRUNCATED
    grid = Grid(lo + h, h, N, (lo, hi), lo_kind, hi_kind)
    spec.check_inside(grid.x)
    return grid


@dataclass(frozen=True)
class GridOperator:
    matrix: sps.csr_matrix
    grid: Grid
    symmetric: bool
    tag: str

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, other):
        if isinstance(other, GridOperator):
            return GridOperator((self.matrix @ other.matrix).tocsr(), self.grid, False, f"{self.tag}*{other.tag}")
        return self.matrix @ other


def _finite(values, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"{what} is not finite on the grid")
    return values


def second_difference(grid: Grid, order: int = 2) -> sps.csr_matrix:
    n, h = grid.N, grid.h
    if order == 2:
        return sps.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="csr") / h**2
    if order == 4:
        c = np.array([-1, 16, -30, 16, -1]) / 12.0
        return sps.diags([c[k] * np.ones(n - abs(k - 2)) for k in range(5)], [-2, -1, 0, 1, 2], format="csr") / h**2
    raise ValueError("stencil order must be 2 or 4")


def first_difference(grid: Grid, order: int = 2) -> sps.csr_matrix:
    n, h = grid.N, grid.h
    if order == 2:
        return sps.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], format="csr") / (2 * h)
    if order == 4:
        c = np.array([1, -8, 0, 8, -1]) / 12.0
        return sps.diags([c[k] * np.ones(n - abs(k - 2)) for k in (0, 1, 3, 4)], [-2, -1, 1, 2], format="csr") / h
    raise ValueError("stencil order must be 2 or 4")


def singular_coefficients(Vfn, x0: float, side: int) -> tuple[float, float]:
    """``(kappa, kappa1)`` in ``V ~ kappa/t^2 + kappa1/t`` with ``t = side*(x - x0)``.

    Fitted from a quadratic in ``t`` through three samples of ``t^2 V``.
    """
    ts = np.array([1e-4, 2e-4, 3e-4])
    k = ts * ts * np.asarray(Vfn(x0 + side * ts), dtype=float)
    c2, c1, c0 = np.polyfit(ts, k, 2)
    return float(c0), float(c1)


def endpoint_correction(Vfn, grid: Grid) -> np.ndarray:
    """Potential correction at regular-singular Dirichlet ends.

    Near an end where ``V ~ kappa/t^2 + kappa1/t`` the regular solution is
    ``u = t^p exp(c t) (1 + O(t^2))`` with ``p(p-1) = kappa`` and
    ``c = kappa1/(2p)``.  For ``p < 3/2`` the three-point stencil resolves such
    functions only to ``O(h^(2p-1))``; adding ``(D2[u] - u'')/u`` at each node
    cancels that local error and restores second-order convergence of the
    eigenvalues.  The part of the correction due to ``exp(c t)`` alone is
    smooth and is left out.
    """
    corr = np.zeros(grid.N)
    lo, hi = grid.window
    for x0, kind, side in ((lo, grid.lo_kind, 1), (hi, grid.hi_kind, -1)):
        if kind != FINITE_SINGULAR:
            continue
        kappa, kappa1 = singular_coefficients(Vfn, x0, side)
        if kappa < -0.25 or abs(kappa) < 1e-12:
            continue
        p = 0.5 + math.sqrt(0.25 + kappa)
        c = kappa1 / (2 * p)
        h = grid.h
        i = np.arange(1, grid.N + 1, dtype=float) if side == 1 else np.arange(grid.N, 0, -1, dtype=float)
        t = h * i
        # ratios u(t +- h)/u(t) written without overflow
        up = (1 + 1 / i) ** p * math.exp(c * h)
        dn = (1 - 1 / i) ** p * math.exp(-c * h)
        stencil = (up - 2 + dn) / h**2
        exact = p * (p - 1) / t**2 + 2 * p * c / t + c * c
        smooth = (2 * math.cosh(c * h) - 2) / h**2 - c * c
        corr += stencil - exact - smooth
    return corr


def discretize_hermitian(Vfn, grid: Grid, *, order: int = 2, tag: str = "h",
                         singular_ends: bool = False) -> GridOperator:
    """``-d^2/dx^2 + V`` as a symmetric matrix.

    ``singular_ends`` applies :func:`endpoint_correction` (second order only).
    """
    V = _finite(Vfn(grid.x), "potential")
    if singular_ends:
        if order != 2:
            raise ValueError("endpoint correction is defined for the three-point stencil")
        V = V + endpoint_correction(Vfn, grid)
    M = (-second_difference(grid, order) + sps.diags(V)).tocsr()
    return GridOperator(M, grid, True, tag)


def discretize_swanson(spec: ModelSpec, Vfn, grid: Grid, *, order: int = 2, tag: str = "H",
                       singular_ends: bool = False) -> GridOperator:
    """``s [-(d/dx - mu W)^2 + V]`` expanded with central differences (nonsymmetric).

    ``singular_ends`` adds the Hermitian-frame :func:`endpoint_correction`.
    The gauge factor shifts the local exponent by ``mu`` times the residue of
    ``W``, so the correction is approximate here but removes most of the
    endpoint error.
    """
    c = spec.couple
    x = grid.x
    V = _finite(Vfn(x), "potential")
    if singular_ends:
        V = V + endpoint_correction(Vfn, grid)
    W = sps.diags(_finite(spec.W(x), "W"))
    D1 = first_difference(grid, order)
    inner = -second_difference(grid, order) + c.mu * (W @ D1 + D1 @ W) - c.mu**2 * (W @ W) + sps.diags(V)
    return GridOperator((c.s * inner).tocsr(), grid, c.mu == 0.0, tag)


FIRST_ORDER_KINDS = ("Atilde", "AtildeDagger", "Dplus", "Dminus")


def first_order_operator(kind: str, partner: PartnerParameters, spec: ModelSpec, grid: Grid, *,
                         order: int = 2, phase: float = 1.0) -> GridOperator:
    """``A~ = d + w``, ``A~dag = -d + w``, ``D+ = sqrt(s)(-d + mu W + w)``, ``D- = sqrt(s)(d - mu W + w)``.

    ``phase = -1`` gives the equally valid opposite-sign choice of the square root.
    """
    x = grid.x
    D1 = first_difference(grid, order)
    w = sps.diags(_finite(partner.w(spec, x), "w"))
    muW = sps.diags(spec.couple.mu * _finite(spec.W(x), "W"))
    root = phase * spec.couple.sqrt_s
    if kind == "Atilde":
        M = D1 + w
    elif kind == "AtildeDagger":
        M = -D1 + w
    elif kind == "Dplus":
        M = root * (-D1 + muW + w)
    elif kind == "Dminus":
        M = root * (D1 - muW + w)
    else:
        raise ValueError(f"unknown first-order operator {kind!r}; expected one of {FIRST_ORDER_KINDS}")
    return GridOperator(M.tocsr(), grid, False, kind)


_GAUGE_TAGS = {1: "rho", -1: "rho_inv", 2: "eta", -2: "eta_inv"}


def gauge_diagonal(spec: ModelSpec, grid: Grid, power: int = 1) -> GridOperator:
    """Diagonal ``rho^power`` with ``rho = exp(-mu int W)``; power 2 is the metric."""
    if power not in _GAUGE_TAGS:
        raise ValueError("power must be one of 1, -1, 2, -2")
    x = grid.x
    log_rho = ef.log_gauge(spec, x)
    bad = np.abs(log_rho) > ef.GAUGE_GUARD
    if np.any(bad):
        i = int(np.argmax(np.abs(log_rho)))
        raise GaugeOverflow(float(x[i]), float(log_rho[i]))
    return GridOperator(sps.diags(np.exp(power * log_rho)).tocsr(), grid, True, _GAUGE_TAGS[power])


@dataclass(frozen=True)
class EigResult:
    values: np.ndarray
    vectors: np.ndarray | None
    residuals: np.ndarray

    @property
    def imag_max(self) -> np.ndarray:
        return np.abs(np.imag(self.values))


def _residuals(M, values, vectors) -> np.ndarray:
    out = []
    for j, lam in enumerate(values):
        v = vectors[:, j]
        out.append(np.linalg.norm(M @ v - lam * v) / np.linalg.norm(v))
    return np.array(out)


def _bandwidth(M: sps.csr_matrix) -> int:
    coo = M.tocoo()
    return int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0


def eig_symmetric(op: GridOperator, k: int) -> EigResult:
    """The ``k`` smallest eigenpairs of a symmetric operator, ascending."""
    M = op.matrix
    N = M.shape[0]
    if not 1 <= k <= N:
        raise ValueError(f"k must be in [1, {N}]")
    scale = max(abs(M).max(), 1e-300)
    if abs(M - M.T).max() > 1e-13 * scale:
        raise NotSymmetric(f"{op.tag}: matrix is not symmetric")
    bw = _bandwidth(M)
    try:
        if bw <= 1:
            d = M.diagonal()
            e = M.diagonal(1) if N > 1 else np.zeros(0)
            vals, vecs = sla.eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
        else:
            bands = np.zeros((bw + 1, N))
            for j in range(bw + 1):
                bands[bw - j, j:] = M.diagonal(j)
            vals, vecs = sla.eig_banded(bands, select="i", select_range=(0, k - 1))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"{op.tag}: {exc}") from exc
    return EigResult(vals, vecs, _residuals(M, vals, vecs))


def eig_general(op: GridOperator | np.ndarray, k: int, *, vectors: bool = True) -> EigResult:
    """Full dense eigensolve; returns the ``k`` eigenvalues with smallest real part."""
    A = op.dense() if isinstance(op, GridOperator) else np.asarray(op)
    N = A.shape[0]
    if N > GENERAL_SIZE_LIMIT:
        raise SizeGuard(f"dense nonsymmetric eigensolve limited to N <= {GENERAL_SIZE_LIMIT}, got {N}")
    if not 1 <= k <= N:
        raise ValueError(f"k must be in [1, {N}]")
    try:
        if vectors:
            vals, vecs = sla.eig(A, right=True)
        else:
            vals, vecs = sla.eigvals(A), None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.lexsort((np.imag(vals), np.real(vals)))[:k]
    vals = vals[order]
    if vecs is None:
        return EigResult(vals, None, np.full(k, np.nan))
    vecs = vecs[:, order]
    return EigResult(vals, vecs, _residuals(A, vals, vecs))
