"""Mild solutions of the MHD system in differential-form language.

Unknowns: a co-closed 1-form ``u`` (velocity) and an exact 2-form ``b``
(magnetic field). The mild formulation is the fixed point

    u = a1 + B1(u, u) + B2(b, b),     b = a2 + B3(u, b)

with ``a1 = exp(-tS) u0``, ``a2 = exp(-tM) b0`` and the Duhamel integrals

    B1(u, v)(t)  = int_0^t exp(-(t-s)S) P(-u(s) _| dv(s)) ds
    B2(b, b')(t) = int_0^t exp(-(t-s)S) P(-d*b(s) _| b'(s)) ds
    B3(u, b)(t)  = int_0^t exp(-(t-s)M) (-d(u(s) _| b(s))) ds

Time discretisation: trajectories live on graded nodes
``t_j = T (j/J)^gamma``, i.e. uniform in ``sigma = (t/T)^(1/gamma)``, plus
the initial value at ``sigma = 0``. Duhamel integrals are taken in the
``sigma`` variable (``s = T sigma^gamma``), with Gauss-Legendre points on
each node interval and cubic Lagrange interpolation of the trajectories in
``sigma``. The semigroup factor is applied exactly in Fourier space, and
the node values are accumulated with the exact recursion
``I(t_j) = exp(-(t_j - t_{j-1})A) I(t_{j-1}) + panel_j``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import grid as gs
from . import lambda3 as l3
from . import hodge
from .grid import FormField, Grid
from .lambda3 import grade_indices
from .propagators import heat_multiplier

log = logging.getLogger(__name__)

_COMPS = {1: grade_indices({1}), 2: grade_indices({2})}


@dataclass(frozen=True)
class ExponentConfig:
    """Integrability exponent ``q`` of the auxiliary norms; ``alpha = 1 - 3/q``."""

    q: float = 4.0

    def __post_init__(self):
        if not 3 < self.q < 6:
            raise ValueError(f"q must lie in (3, 6), got {self.q}")

    @property
    def alpha(self) -> float:
        return 1.0 - 3.0 / self.q


@dataclass(frozen=True)
class SolverConfig:
    exponents: ExponentConfig = field(default_factory=ExponentConfig)
    J: int = 64
    gamma: float = 2.0
    gauss_points: int = 4
    tol: float = 1e-8
    max_iter: int = 50
    project_tol: float = 1e-6

    def __post_init__(self):
        if self.J < 4:
            raise ValueError("need at least 4 time nodes")
        if self.gamma < 1:
            raise ValueError("node grading exponent must be >= 1")
        if self.gauss_points < 1:
            raise ValueError("need at least one quadrature point per panel")

    @property
    def q(self) -> float:
        return self.exponents.q

    @property
    def alpha(self) -> float:
        return self.exponents.alpha


# -- trajectories -----------------------------------------------------------------

def _lagrange_stencil(sigma: float, J: int) -> tuple[int, np.ndarray]:
    """First node index and weights of the 4-point interpolant at ``sigma``."""
    m = min(int(np.floor(sigma * J)), J - 1)
    start = min(max(m - 1, 0), J - 3)
    nodes = (start + np.arange(4)) / J
    w = np.ones(4)
    for i in range(4):
        for k in range(4):
            if k != i:
                w[i] *= (sigma - nodes[k]) / (nodes[i] - nodes[k])
    return start, w


@dataclass
class Trajectory:
    """Spectral snapshots of a pure-grade field at ``sigma_j = j/J``, j = 0..J.

    ``coeffs`` has shape (J+1, 3, n, n, n//2+1); index 0 holds the value at
    ``t = 0``.
    """

    grid: Grid
    grade: int
    T: float
    gamma: float
    coeffs: np.ndarray

    @property
    def J(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return self.T * (np.arange(self.J + 1) / self.J) ** self.gamma

    @classmethod
    def zeros(cls, grid: Grid, grade: int, T: float, J: int, gamma: float) -> "Trajectory":
        return cls(grid, grade, T, gamma, np.zeros((J + 1, 3) + grid.spectral_shape, dtype=complex))

    @classmethod
    def from_function(cls, grid, grade, T, J, gamma, fn) -> "Trajectory":
        """Sample ``fn(t) -> FormField`` at the nodes."""
        out = cls.zeros(grid, grade, T, J, gamma)
        for j, t in enumerate(out.times):
            out.coeffs[j] = fn(float(t)).to_spectral().data[_COMPS[grade]]
        return out

    def _wrap(self, compact: np.ndarray) -> FormField:
        data = np.zeros((8,) + self.grid.spectral_shape, dtype=complex)
        data[_COMPS[self.grade]] = compact
        return FormField(self.grid, data, True, {self.grade})

    def field(self, j: int) -> FormField:
        return self._wrap(self.coeffs[j])

    def compact_at_sigma(self, sigma: float) -> np.ndarray:
        if not -1e-14 <= sigma <= 1 + 1e-14:
            raise ValueError(f"sigma = {sigma} outside [0, 1]")
        start, w = _lagrange_stencil(min(max(sigma, 0.0), 1.0), self.J)
        c = self.coeffs
        return w[0] * c[start] + w[1] * c[start + 1] + w[2] * c[start + 2] + w[3] * c[start + 3]

    def at_sigma(self, sigma: float) -> FormField:
        return self._wrap(self.compact_at_sigma(sigma))

    def at(self, t: float) -> FormField:
        """Value at ``0 <= t <= T`` (nodes exactly, cubic interpolation in sigma between)."""
        if not 0 <= t <= self.T * (1 + 1e-14):
            raise ValueError(f"t = {t} outside [0, T = {self.T}]")
        sigma = min(t / self.T, 1.0) ** (1.0 / self.gamma)
        j = sigma * self.J
        if abs(j - round(j)) < 1e-12:
            return self.field(int(round(j)))
        return self.at_sigma(sigma)

    def same_nodes(self, other: "Trajectory") -> bool:
        return (self.grid == other.grid and self.T == other.T and self.gamma == other.gamma
                and self.J == other.J)

    def _check(self, other):
        if not self.same_nodes(other) or self.grade != other.grade:
            raise ValueError("trajectories live on different grids, nodes or grades")

    def __add__(self, other):
        self._check(other)
        return Trajectory(self.grid, self.grade, self.T, self.gamma, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return Trajectory(self.grid, self.grade, self.T, self.gamma, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return Trajectory(self.grid, self.grade, self.T, self.gamma, self.coeffs * scalar)

    __rmul__ = __mul__


# -- compact kernels ---------------------------------------------------------------
# Trajectories store only the three components of their grade. These helpers
# apply d, d*, the Leray projection and the interior product directly to such
# (3, ...) stacks; the generic FormField operators give the same numbers.

_D1 = tuple((m, r - 4, c - 1, s) for m, r, c, s in l3.WEDGE_ENTRIES if 1 <= c <= 3)
_I2 = tuple((m, r - 1, c - 4, s) for m, r, c, s in l3.INTERIOR_ENTRIES if 4 <= c <= 6)


def _d1(grid: Grid, u: np.ndarray) -> np.ndarray:
    """d of a compact 1-form, as a compact 2-form."""
    ik = grid.ik
    out = np.zeros_like(u)
    for m, r, c, s in _D1:
        out[r] += (s * ik[m]) * u[c]
    return out


def _delta2(grid: Grid, w: np.ndarray) -> np.ndarray:
    """d* of a compact 2-form, as a compact 1-form."""
    ik = grid.ik
    out = np.zeros_like(w)
    for m, r, c, s in _I2:
        out[r] -= (s * ik[m]) * w[c]
    return out


def _leray(grid: Grid, u: np.ndarray) -> np.ndarray:
    k = grid.dk
    inv = np.zeros_like(grid.ksq)
    np.divide(1.0, grid.ksq, out=inv, where=grid.ksq > 0)
    kdotu = (k[0] * u[0] + k[1] * u[1] + k[2] * u[2]) * inv
    return u - np.stack([ki * kdotu for ki in k])


def _interior(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Fiberwise ``a _| w`` for physical compact 1-form ``a`` and 2-form ``w``."""
    out = np.zeros_like(a)
    for m, r, c, s in _I2:
        out[r] += s * (a[m] * w[c])
    return out


def _to_phys(grid: Grid, x: np.ndarray, dealiased: bool = True) -> np.ndarray:
    if dealiased:
        x = x * grid.dealias_mask
    return sfft.irfftn(x, s=grid.shape, axes=(1, 2, 3), norm="forward")


def _to_spec(grid: Grid, x: np.ndarray) -> np.ndarray:
    return sfft.rfftn(x, axes=(1, 2, 3), norm="forward") * grid.dealias_mask


def _lq(grid: Grid, x: np.ndarray, q: float) -> float:
    p = _to_phys(grid, x, dealiased=False)
    mag = np.sqrt(np.einsum("c...,c...->...", p, p))
    return float((grid.h ** 3 * np.sum(mag ** q)) ** (1.0 / q))


# -- critical norms -----------------------------------------------------------------

@dataclass
class CriticalNorms:
    """``sup_j t_j^(alpha/2) ||w(t_j)||_q + t_j^((1+alpha)/2) ||D w(t_j)||_q``.

    ``D`` is ``d`` for the velocity space and ``d*`` for the magnetic space.
    """

    kind: str
    value: float
    value_terms: np.ndarray
    derivative_terms: np.ndarray
    times: np.ndarray

    @property
    def argmax_time(self) -> float:
        return float(self.times[np.argmax(self.value_terms + self.derivative_terms)])


def critical_norm(traj: Trajectory, kind: str, config: SolverConfig) -> CriticalNorms:
    if kind not in ("U", "B"):
        raise ValueError("kind must be 'U' or 'B'")
    if (kind == "U") != (traj.grade == 1):
        raise ValueError(f"norm {kind} does not match a grade-{traj.grade} trajectory")
    deriv = _d1 if kind == "U" else _delta2
    grid, q, alpha = traj.grid, config.q, config.alpha
    times = traj.times[1:]
    vals = np.zeros(traj.J)
    ders = np.zeros(traj.J)
    for j in range(1, traj.J + 1):
        c = traj.coeffs[j]
        if not np.any(c):
            continue
        t = times[j - 1]
        vals[j - 1] = t ** (alpha / 2) * _lq(grid, c, q)
        ders[j - 1] = t ** ((1 + alpha) / 2) * _lq(grid, deriv(grid, c), q)
    total = vals + ders
    return CriticalNorms(kind, float(total.max(initial=0.0)), vals, ders, times)


def pair_norm(u: Trajectory, b: Trajectory, config: SolverConfig) -> float:
    """Norm of ``(u, b)`` in the product space: ``||u||_U + ||b||_B``."""
    return critical_norm(u, "U", config).value + critical_norm(b, "B", config).value


# -- initial data -----------------------------------------------------------------

def prepare_initial_data(u0: FormField, b0: FormField, tol: float = 1e-6) -> tuple[FormField, FormField]:
    """Project ``u0`` onto N(d*) and ``b0`` onto R(d) if they are within ``tol``.

    Raises ``ValueError`` when the relative defect is larger.
    """
    if u0.grades != {1} or b0.grades != {2}:
        raise ValueError("initial data must be a 1-form u0 and a 2-form b0")
    du, db = hodge.coclosed_defect(u0), hodge.exactness_defect(b0)
    if du > tol:
        raise ValueError(f"u0 is not divergence free (relative defect {du:.3e} > {tol:g})")
    if db > tol:
        raise ValueError(f"b0 is not in the range of d (relative defect {db:.3e} > {tol:g})")
    return hodge.leray_P(u0), hodge.Q_proj(b0.to_spectral())


def initial_terms(u0: FormField, b0: FormField, T: float,
                  config: SolverConfig) -> tuple[Trajectory, Trajectory]:
    """Node samples of ``a1 = exp(-tS) u0`` and ``a2 = exp(-tM) b0``."""
    if T <= 0:
        raise ValueError("T must be positive")
    u0, b0 = prepare_initial_data(u0, b0, config.project_tol)
    grid = u0.grid
    a1 = Trajectory.zeros(grid, 1, T, config.J, config.gamma)
    a2 = Trajectory.zeros(grid, 2, T, config.J, config.gamma)
    uc = u0.data[_COMPS[1]]
    bc = b0.data[_COMPS[2]]
    for j, t in enumerate(a1.times):
        e = heat_multiplier(grid, float(t))
        a1.coeffs[j] = e * uc
        a2.coeffs[j] = e * bc
    return a1, a2


# -- Duhamel integrals -------------------------------------------------------------

class _Integrand:
    """Nonlinear forcing at one time: P(-u _| dv - d*b _| b') and -d(u _| b')."""

    def __init__(self, u=None, v=None, b=None, b2=None, parts=("B1", "B2", "B3")):
        self.u, self.v, self.b, self.b2 = u, v, b, b2
        self.parts = set(parts)
        self.grid = next(t.grid for t in (u, v, b, b2) if t is not None)

    def __call__(self, sigma: float):
        grid, parts = self.grid, self.parts
        fu = fb = None
        up = b2p = None
        if parts & {"B1", "B3"}:
            up = _to_phys(grid, self.u.compact_at_sigma(sigma))
        if parts & {"B2", "B3"}:
            b2p = _to_phys(grid, self.b2.compact_at_sigma(sigma))
        nu = None
        if "B1" in parts:
            dv = _d1(grid, self.v.compact_at_sigma(sigma))
            nu = _interior(up, _to_phys(grid, dv))
        if "B2" in parts:
            dbp = _to_phys(grid, _delta2(grid, self.b.compact_at_sigma(sigma)))
            t = _interior(dbp, b2p)
            nu = t if nu is None else nu + t
        if nu is not None:
            fu = -_leray(grid, _to_spec(grid, nu))
        if "B3" in parts:
            fb = -_d1(grid, _to_spec(grid, _interior(up, b2p)))
        return fu, fb


def _gauss(G: int):
    x, w = np.polynomial.legendre.leggauss(G)
    return (x + 1) / 2, w / 2


def _duhamel(integrand, grid: Grid, T: float, J: int, gamma: float, G: int, t_end: float | None = None):
    """Accumulate ``int_0^t exp(-(t-s)|k|^2) F(s) ds``.

    Returns node arrays (J+1, 3, ...) for the u- and b-parts when ``t_end`` is
    None, otherwise the single values at ``t_end``.
    """
    xg, wg = _gauss(G)
    shape = (3,) + grid.spectral_shape
    acc = [np.zeros(shape, dtype=complex), np.zeros(shape, dtype=complex)]
    nodes_out = None
    if t_end is None:
        nodes_out = [np.zeros((J + 1,) + shape, dtype=complex) for _ in range(2)]
        sig_end = 1.0
    else:
        if not 0 <= t_end <= T * (1 + 1e-14):
            raise ValueError(f"t = {t_end} outside [0, T = {T}]")
        sig_end = min(t_end / T, 1.0) ** (1.0 / gamma)
    sig_prev = 0.0
    m = 0
    used = [False, False]
    while sig_prev < sig_end - 1e-15:
        m += 1
        sig_next = min(m / J, sig_end)
        t_prev, t_next = T * sig_prev ** gamma, T * sig_next ** gamma
        step = heat_multiplier(grid, t_next - t_prev)
        for i in range(2):
            acc[i] *= step
        width = sig_next - sig_prev
        for x, w in zip(xg, wg):
            sg = sig_prev + width * x
            s = T * sg ** gamma
            jac = w * width * gamma * T * sg ** (gamma - 1)
            fu, fb = integrand(sg)
            kern = jac * heat_multiplier(grid, t_next - s)
            for i, f in enumerate((fu, fb)):
                if f is not None:
                    acc[i] += kern * f
                    used[i] = True
        if nodes_out is not None:
            for i in range(2):
                nodes_out[i][m] = acc[i]
        sig_prev = sig_next
    if nodes_out is not None:
        return nodes_out, used
    return acc, used


def _check_inputs(*trajs):
    ref = trajs[0]
    for t in trajs[1:]:
        if not ref.same_nodes(t):
            raise ValueError("trajectories must share grid and time nodes")


def _bilinear(parts, u=None, v=None, b=None, b2=None, t=None, config: SolverConfig | None = None):
    trajs = [x for x in (u, v, b, b2) if x is not None]
    _check_inputs(*trajs)
    ref = trajs[0]
    G = (config or SolverConfig()).gauss_points
    integrand = _Integrand(u, v, b, b2, parts)
    out, _ = _duhamel(integrand, ref.grid, ref.T, ref.J, ref.gamma, G, t_end=t)
    return out


def _as_result(ref: Trajectory, grade: int, arr, t):
    idx = 0 if grade == 1 else 1
    if t is None:
        return Trajectory(ref.grid, grade, ref.T, ref.gamma, arr[idx])
    data = np.zeros((8,) + ref.grid.spectral_shape, dtype=complex)
    data[_COMPS[grade]] = arr[idx]
    return FormField(ref.grid, data, True, {grade})


def B1(u: Trajectory, v: Trajectory, t: float | None = None, config: SolverConfig | None = None):
    """``int_0^t exp(-(t-s)S) P(-u _| dv) ds``; a trajectory if ``t`` is None."""
    if u.grade != 1 or v.grade != 1:
        raise ValueError("B1 takes two 1-form trajectories")
    return _as_result(u, 1, _bilinear({"B1"}, u=u, v=v, t=t, config=config), t)


def B2(b: Trajectory, b2: Trajectory, t: float | None = None, config: SolverConfig | None = None):
    """``int_0^t exp(-(t-s)S) P(-d*b _| b') ds``."""
    if b.grade != 2 or b2.grade != 2:
        raise ValueError("B2 takes two 2-form trajectories")
    return _as_result(b, 1, _bilinear({"B2"}, b=b, b2=b2, t=t, config=config), t)


def B3(u: Trajectory, b: Trajectory, t: float | None = None, config: SolverConfig | None = None):
    """``int_0^t exp(-(t-s)M) (-d(u _| b)) ds``."""
    if u.grade != 1 or b.grade != 2:
        raise ValueError("B3 takes a 1-form and a 2-form trajectory")
    return _as_result(u, 2, _bilinear({"B3"}, u=u, b2=b, t=t, config=config), t)


def bilinear_pair(u: Trajectory, b: Trajectory, v: Trajectory, b2: Trajectory,
                  config: SolverConfig, t: float | None = None):
    """``B((u, b), (v, b')) = (B1(u, v) + B2(b, b'), B3(u, b'))`` in one pass."""
    out = _bilinear({"B1", "B2", "B3"}, u=u, v=v, b=b, b2=b2, t=t, config=config)
    return _as_result(u, 1, out, t), _as_result(u, 2, out, t)


# -- Picard iteration --------------------------------------------------------------

@dataclass
class MildSolution:
    u: Trajectory
    b: Trajectory
    a1: Trajectory
    a2: Trajectory
    config: SolverConfig
    iterations: int
    residuals: list[float]
    status: str                      # converged | diverged | stalled
    norm_a: float
    iterate_norms: list[float]
    fixed_point_residual: float | None = None
    C_hat: float | None = None
    subspace_defect: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def eps_hat(self) -> float | None:
        return None if not self.C_hat else 1.0 / (4.0 * self.C_hat)

    @property
    def ratios(self) -> list[float]:
        r = self.residuals
        return [r[i] / r[i - 1] for i in range(1, len(r)) if r[i - 1] > 0]

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    @property
    def decay_rate(self) -> float:
        """Geometric-mean residual ratio over the iteration."""
        r = [x for x in self.residuals if x > 0]
        if len(r) < 2:
            return 0.0
        return float((r[-1] / r[0]) ** (1.0 / (len(r) - 1)))

    @property
    def T(self) -> float:
        return self.u.T

    def norms(self) -> dict:
        return {"U": critical_norm(self.u, "U", self.config).value,
                "B": critical_norm(self.b, "B", self.config).value}

    def value_at(self, t: float) -> tuple[FormField, FormField]:
        """Evaluate the right-hand side of the fixed-point equations at any ``t``."""
        e = heat_multiplier(self.u.grid, t)
        bu, bb = bilinear_pair(self.u, self.b, self.u, self.b, self.config, t=t)
        u = self.a1.field(0)
        b = self.a2.field(0)
        u = FormField(u.grid, u.data * e, True, {1}) + bu
        b = FormField(b.grid, b.data * e, True, {2}) + bb
        return u, b


def subspace_defect(u: Trajectory, b: Trajectory) -> float:
    """Largest relative constraint violation over all nodes (co-closed u, exact b)."""
    worst = 0.0
    for j in range(u.J + 1):
        uj, bj = u.field(j), b.field(j)
        worst = max(worst, hodge.coclosed_defect(uj), hodge.exactness_defect(bj))
    return worst


def picard_solve(u0: FormField, b0: FormField, T: float, config: SolverConfig | None = None,
                 C_hat: float | None = None, certify: bool = True) -> MildSolution:
    """Iterate ``w <- a + B(w, w)`` from ``w = a`` in the norm ``||u||_U + ||b||_B``.

    Stops when the update norm drops below ``config.tol`` (converged), when
    it grows on three consecutive iterations or becomes non-finite
    (diverged), or after ``config.max_iter`` iterations (stalled).
    """
    config = config or SolverConfig()
    a1, a2 = initial_terms(u0, b0, T, config)
    norm_a = pair_norm(a1, a2, config)
    u, b = a1, a2
    residuals: list[float] = []
    norms = [norm_a]
    status = "stalled"
    growth = 0
    for it in range(1, config.max_iter + 1):
        bu, bb = bilinear_pair(u, b, u, b, config)
        u_new, b_new = a1 + bu, a2 + bb
        res = pair_norm(u_new - u, b_new - b, config)
        residuals.append(res)
        u, b = u_new, b_new
        norms.append(pair_norm(u, b, config))
        log.debug("picard iteration %d: residual %.3e, norm %.3e", it, res, norms[-1])
        if not np.isfinite(res) or res > 1e12:
            status = "diverged"
            break
        if res < config.tol:
            status = "converged"
            break
        growth = growth + 1 if len(residuals) > 1 and res > residuals[-2] else 0
        if growth >= 3:
            status = "diverged"
            break
    sol = MildSolution(u=u, b=b, a1=a1, a2=a2, config=config, iterations=it, residuals=residuals,
                       status=status, norm_a=norm_a, iterate_norms=norms, C_hat=C_hat)
    if status == "converged":
        sol.subspace_defect = subspace_defect(u, b)
        if certify:
            bu, bb = bilinear_pair(u, b, u, b, config)
            sol.fixed_point_residual = pair_norm(u - a1 - bu, b - a2 - bb, config)
    return sol


@dataclass
class LocalExistenceAttempt:
    T: float
    status: str
    iterations: int
    max_ratio: float

    @property
    def success(self) -> bool:
        return self.status == "converged" and self.max_ratio <= 0.9


def local_existence_search(u0, b0, T0: float, config: SolverConfig, max_halvings: int = 6):
    """Solve on ``T0, T0/2, ...`` until the iteration converges with ratio <= 0.9."""
    attempts = []
    T = T0
    for _ in range(max_halvings + 1):
        sol = picard_solve(u0, b0, T, config, certify=False)
        att = LocalExistenceAttempt(T, sol.status, sol.iterations, sol.max_ratio)
        attempts.append(att)
        if att.success:
            break
        T /= 2
    return attempts


# -- bilinear constants ----------------------------------------------------------------

@dataclass
class ContractionEstimate:
    C_hat: float
    eps_hat: float
    ratios: list[float]
    T: float


def contraction_estimate(ensemble, config: SolverConfig) -> ContractionEstimate:
    """``C_hat = max ||B(w, w')|| / (||w|| ||w'||)`` over pairs ``((u, b), (v, b'))``."""
    ensemble = list(ensemble)
    if not ensemble:
        raise ValueError("empty ensemble")
    ratios = []
    for (u, b), (v, b2) in ensemble:
        nw, nv = pair_norm(u, b, config), pair_norm(v, b2, config)
        if nw == 0 or nv == 0:
            raise ValueError("ensemble members must be nonzero")
        bu, bb = bilinear_pair(u, b, v, b2, config)
        ratios.append(pair_norm(bu, bb, config) / (nw * nv))
    C = max(ratios)
    if C == 0:
        raise ValueError("every ensemble pair gave B = 0; cannot bound the constant")
    return ContractionEstimate(C, 1.0 / (4.0 * C), ratios, ensemble[0][0][0].T)


def heat_pair_ensemble(grid: Grid, T: float, config: SolverConfig, size: int,
                       rng: np.random.Generator, data_factory):
    """Pairs of heat trajectories ``(exp(-tS)u0, exp(-tM)b0)`` from random data.

    ``data_factory(grid, rng) -> (u0, b0)`` supplies the initial data.
    """
    out = []
    for _ in range(size):
        w = initial_terms(*data_factory(grid, rng), T, config)
        v = initial_terms(*data_factory(grid, rng), T, config)
        out.append((w, v))
    return out


# -- continuity in L^3 and the Leibniz-type inequality -----------------------------------

@dataclass
class ContinuityReport:
    times: list[float]
    u_norms: list[float]
    b_norms: list[float]
    sup: float
    bound: float
    bounded: bool
    increments_at_zero: list[float]
    max_step_increment: float


def l3_continuity_check(sol: MildSolution, levels: int = 12, fine: int = 64,
                        K: float = 10.0) -> ContinuityReport:
    """Sample ``||u(t)||_3``, ``||b(t)||_3`` on dyadic times ``T 2^-k`` and a uniform grid."""
    T = sol.T
    dyadic = [0.0] + [T * 2.0 ** (-k) for k in range(levels, -1, -1)]
    uniform = list(np.linspace(0.0, T, fine + 1))
    times = sorted(set(dyadic) | set(float(t) for t in uniform))
    us = {t: sol.u.at(t) for t in times}
    bs = {t: sol.b.at(t) for t in times}
    un = [gs.lq_norm(us[t], 3) for t in times]
    bn = [gs.lq_norm(bs[t], 3) for t in times]
    u0, b0 = us[0.0], bs[0.0]
    inc0 = [gs.lq_norm(us[t] - u0, 3) + gs.lq_norm(bs[t] - b0, 3) for t in dyadic[1:]]
    steps = [gs.lq_norm(us[t1] - us[t0], 3) + gs.lq_norm(bs[t1] - bs[t0], 3)
             for t0, t1 in zip(uniform[:-1], uniform[1:])]
    sup = max(u + b for u, b in zip(un, bn))
    bound = K * (un[0] + bn[0] + 1.0)
    return ContinuityReport(times, un, bn, sup, bound, sup <= bound, inc0, max(steps, default=0.0))


def leibniz_ratio(grid: Grid, q: float, pairs: int, rng: np.random.Generator, kmax: int = 3) -> float:
    """Largest observed ``||d(w1 _| w2)||_{q/2} / (||Dw1||_q ||w2||_q + ||w1||_q ||Dw2||_q)``
    over random band-limited 1-forms ``w1`` and 2-forms ``w2``, ``D = d + d*``."""
    worst = 0.0
    for _ in range(pairs):
        w1 = gs.random_field(grid, {1}, rng, kmax)
        w2 = gs.random_field(grid, {2}, rng, kmax)
        lhs = gs.lq_norm(gs.d(gs.interior_product(w1, w2)), q / 2)
        D1 = gs.d(w1) + gs.delta(w1)
        D2 = gs.d(w2) + gs.delta(w2)
        rhs = gs.lq_norm(D1, q) * gs.lq_norm(w2, q) + gs.lq_norm(w1, q) * gs.lq_norm(D2, q)
        worst = max(worst, lhs / rhs)
    return worst
