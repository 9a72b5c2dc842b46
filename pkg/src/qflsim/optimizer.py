"""Derivative-free trust-region optimizer in the COBYLA family.

Works from linear approximations only: it keeps a nondegenerate simplex of
n+1 interpolation points, fits the linear model that interpolates the
objective on its vertices, and minimizes that model inside a trust region.
Two radii drive the run, Powell-style: ``delta`` is the working step bound
(shrinks on failed steps, may grow on very successful ones) and ``rho`` is
the resolution, reduced only when steps stall at an adequate simplex
geometry. The run stops once ``rho`` reaches its floor or the evaluation
budget is spent. There is no randomness anywhere, so a run is a pure
function of (objective, start point, settings).

The training objectives here are unconstrained, so the constraint handling
of the original method reduces to nothing and is omitted; the simplex,
linear-model and radius machinery is the full scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OptimizationError

# Step-quality thresholds and radius factors; conventional values for
# trust-region methods of this family, with a fast radius recovery
# (_GAMMA2) that pays off on curved valleys.
_ETA1 = 0.01
_ETA2 = 0.7
_GAMMA1 = 0.5
_GAMMA2 = 4.0
_GAMMA3 = 1.5  # snap delta down to rho when within this factor
_SHORT_STEP = 0.1  # steps below this fraction of rho are not worth evaluating
_ALPHA_FLAT = 0.25  # min vertex-to-opposite-face distance, as a fraction of rho
_BETA_FAR = 2.0  # max vertex distance from the pole, as a multiple of delta


@dataclass(frozen=True)
class CobylaSettings:
    rho_begin: float = 1.0
    rho_end: float = 1e-4
    max_evals: int = 1000

    def __post_init__(self):
        if not 0.0 < self.rho_end < self.rho_begin:
            raise ValueError("settings require 0 < rho_end < rho_begin")
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")


@dataclass(frozen=True)
class OptimResult:
    best_point: np.ndarray
    best_value: float
    n_evals: int
    converged: bool


class _BudgetExhausted(Exception):
    pass


@dataclass
class _Simplex:
    """Pole vertex plus n displacement columns and their inverse."""

    pole: np.ndarray      # best-so-far vertex, shape (n,)
    fpole: float
    sim: np.ndarray       # displacements vertex_j - pole as columns, (n, n)
    fvals: np.ndarray     # objective at pole + sim[:, j], shape (n,)
    simi: np.ndarray = field(init=False)  # inverse of sim

    def __post_init__(self):
        self.simi = np.linalg.inv(self.sim)

    def gradient(self) -> np.ndarray:
        """Gradient of the linear model interpolating all n+1 vertices."""
        return self.simi.T @ (self.fvals - self.fpole)

    def column_sq_norms(self) -> np.ndarray:
        return (self.sim * self.sim).sum(axis=0)

    def face_distances(self) -> np.ndarray:
        """Distance of each vertex from the face spanned by the others.

        Row j of the inverse is normal to that face, so the distance is the
        reciprocal of its length; small values flag a flattening simplex.
        """
        row_norms = np.linalg.norm(self.simi, axis=1)
        return 1.0 / row_norms

    def replace_vertex(self, j: int, d: np.ndarray, f: float) -> None:
        """Swap vertex j for the point pole + d, then re-center on the best."""
        self.sim[:, j] = d
        self.fvals[j] = f
        self.simi = np.linalg.inv(self.sim)
        self.recenter()

    def recenter(self) -> None:
        """Move the pole onto the lowest vertex if one beats it."""
        jopt = int(np.argmin(self.fvals))
        if self.fvals[jopt] >= self.fpole:
            return
        shift = self.sim[:, jopt].copy()
        self.pole = self.pole + shift
        self.fpole, self.fvals[jopt] = self.fvals[jopt], self.fpole
        self.sim = self.sim - shift[:, None]
        self.sim[:, jopt] = -shift
        self.simi = np.linalg.inv(self.sim)


def _geometry_offender(splx: _Simplex, delta: float, rho: float) -> int | None:
    """Vertex whose position most degrades the interpolation geometry.

    A simplex is acceptable when no vertex sits further than _BETA_FAR *
    delta from the pole and none is closer than _ALPHA_FLAT * rho to the
    face spanned by the others (a flat simplex ruins the linear model even
    when all its edges are short). Returns None when acceptable; a far
    vertex takes priority over a flat one.
    """
    dists = np.sqrt(splx.column_sq_norms())
    faces = splx.face_distances()
    offender: int | None = None
    worst = _ALPHA_FLAT * rho
    for j in range(dists.size):
        if faces[j] < worst:
            offender = j
            worst = faces[j]
    far = _BETA_FAR * delta
    for j in range(dists.size):
        if dists[j] > far:
            offender = j
            far = dists[j]
    return offender


def _choose_drop(splx: _Simplex, d: np.ndarray, improved: bool,
                 delta: float, rho: float) -> int | None:
    """Pick the vertex to swap for the trial point pole + d.

    |simi @ d| at index j is the factor the simplex determinant picks up
    when vertex j is replaced, so it guards nondegeneracy; the distance
    weight prefers retiring far-away vertices. A non-improving point only
    enters when the swap clearly helps the geometry (score > 1).
    """
    if improved:
        diff = splx.sim - d[:, None]
        distsq = (diff * diff).sum(axis=0)
    else:
        distsq = splx.column_sq_norms()
    weight = np.maximum(1.0, distsq / max(rho, 0.1 * delta) ** 2)
    score = weight * np.abs(splx.simi @ d)
    if score.max() > 1.0 or (improved and score.max() > 0.0):
        return int(np.argmax(score))
    if improved:
        return int(np.argmax(distsq))
    return None


def cobyla_minimize(objective, x0, settings: CobylaSettings | None = None) -> OptimResult:
    """Minimize a black-box function of a real vector.

    Raises OptimizationError (carrying the offending point) if the
    objective ever returns a non-finite value, and ValueError if the
    evaluation budget cannot even build the initial simplex
    (max_evals >= n + 2 is required).
    """
    if settings is None:
        settings = CobylaSettings()
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    if n < 1:
        raise ValueError("x0 must have at least one component")
    if settings.max_evals < n + 2:
        raise ValueError(
            f"max_evals must be at least n + 2 = {n + 2}, got {settings.max_evals}"
        )

    n_evals = 0
    best_x = x0.copy()
    best_f = np.inf

    def feval(x: np.ndarray) -> float:
        nonlocal n_evals, best_x, best_f
        if n_evals >= settings.max_evals:
            raise _BudgetExhausted
        fx = float(objective(x))
        n_evals += 1
        if not np.isfinite(fx):
            raise OptimizationError(
                f"objective returned {fx!r} at {x.tolist()}", point=x.copy()
            )
        if fx < best_f:
            best_f = fx
            best_x = x.copy()
        return fx

    rho = settings.rho_begin
    delta = settings.rho_begin
    converged = False

    try:
        fpole = feval(x0)
        sim = rho * np.eye(n)
        fvals = np.empty(n)
        for j in range(n):
            fvals[j] = feval(x0 + sim[:, j])
        splx = _Simplex(x0.copy(), fpole, sim, fvals)
        splx.recenter()

        # Iterations without an evaluation can only shrink delta, so this
        # bound never binds in practice; it just guarantees termination.
        for _ in range(100 * settings.max_evals):
            g = splx.gradient()
            gnorm = float(np.linalg.norm(g))
            if gnorm > 0.0 and np.isfinite(gnorm):
                d = (-delta / gnorm) * g
                dnorm = delta
                prered = delta * gnorm
                trfail = not np.isfinite(prered) or prered <= 0.0
            else:
                d = np.zeros(n)
                dnorm = 0.0
                prered = 0.0
                trfail = True
            shortd = dnorm <= _SHORT_STEP * rho

            adequate_geo = _geometry_offender(splx, delta, rho) is None

            ratio = -1.0
            jdrop: int | None = None
            if shortd or trfail:
                delta *= 0.1
                if delta <= _GAMMA3 * rho:
                    delta = rho
            else:
                f = feval(splx.pole + d)
                actred = splx.fpole - f
                ratio = actred / prered
                if ratio <= _ETA1:
                    delta = _GAMMA1 * dnorm
                elif ratio <= _ETA2:
                    delta = max(_GAMMA1 * delta, dnorm)
                else:
                    delta = max(_GAMMA1 * delta, _GAMMA2 * dnorm)
                if delta <= _GAMMA3 * rho:
                    delta = rho
                jdrop = _choose_drop(splx, d, actred > 0.0, delta, rho)
                if jdrop is not None:
                    splx.replace_vertex(jdrop, d, f)

            bad_step = shortd or trfail or ratio <= 0.0 or jdrop is None
            improve_geo = bad_step and not adequate_geo
            reduce_rho = bad_step and adequate_geo and max(delta, dnorm) <= rho

            if improve_geo:
                # Re-check with the current simplex; the step above may
                # already have repaired the geometry.
                jgeo = _geometry_offender(splx, delta, rho)
                if jgeo is not None:
                    normal = splx.simi[jgeo, :]
                    normal = normal / np.linalg.norm(normal)
                    dgeo = (0.5 * delta) * normal
                    if float(splx.gradient() @ dgeo) > 0.0:
                        dgeo = -dgeo
                    f = feval(splx.pole + dgeo)
                    splx.replace_vertex(jgeo, dgeo, f)
            elif reduce_rho:
                if rho <= settings.rho_end:
                    converged = True
                    break
                delta = 0.5 * rho
                rho = 0.5 * rho
                if rho <= 1.5 * settings.rho_end:
                    rho = settings.rho_end
                delta = max(delta, rho)
                splx.recenter()
    except _BudgetExhausted:
        pass

    return OptimResult(best_x, float(best_f), n_evals, converged)
