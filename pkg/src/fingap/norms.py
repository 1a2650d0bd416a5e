"""Minkowski norm families on R^n with duals, Legendre transforms and metric tensors.

A Minkowski norm F is positively 1-homogeneous (F(tv) = tF(v) for t > 0),
positive away from the origin, and strongly convex: the Hessian of F^2/2 is
positive definite at every v != 0.  Non-reversible norms (F(-v) != F(v)) are
fully supported; nothing here symmetrizes.

Supported families:

  euclidean      F(v) = |v|_2
  quadratic      F(v) = sqrt(v^T A v),  A symmetric positive definite
  randers        F(v) = sqrt(v^T A v) + b.v,  with b^T A^{-1} b < 1
  two_slope_1d   F(v) = a_plus*v for v >= 0, a_minus*(-v) for v < 0  (dim 1)

The dual norm is F*(xi) = sup {xi(v) : F(v) <= 1} on covectors.  Covectors are
represented as plain arrays of components.  The Legendre transform l maps a
vector v to the covector g_v(v, .); its inverse is the gradient of F*^2/2.
Every closed form here is cross-checked in the test suite against a generic
numeric supremum oracle (``dual_norm_numeric``).

All evaluation functions accept batched input with the vector components on
the last axis and are pure; NormSpec values are immutable and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "NormSpec",
    "NormValidation",
    "euclidean_norm",
    "quadratic_norm",
    "randers_norm",
    "two_slope_norm",
    "norm_eval",
    "dual_norm_eval",
    "dual_norm_numeric",
    "legendre",
    "legendre_inverse",
    "legendre_inverse_fd",
    "metric_tensor",
    "validate_norm",
    "is_reversible",
    "to_config",
    "from_config",
]

_FAMILIES = ("euclidean", "quadratic", "randers", "two_slope_1d")


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A parametric Minkowski norm on R^dim.

    Use the constructors (:func:`euclidean_norm` etc.) rather than building
    instances directly; they validate parameters and precompute dual data.
    """

    family: str
    dim: int
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    a_plus: Optional[float] = None
    a_minus: Optional[float] = None
    # derived, filled in __post_init__
    A_inv: Optional[np.ndarray] = field(default=None, repr=False)
    dual_A: Optional[np.ndarray] = field(default=None, repr=False)
    dual_b: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.family == "two_slope_1d":
            if self.dim != 1:
                raise ValueError("two_slope_1d requires dim == 1")
            if self.a_plus is None or self.a_minus is None:
                raise ValueError("two_slope_1d requires a_plus and a_minus")
            if self.a_plus <= 0 or self.a_minus <= 0:
                raise ValueError("two-slope coefficients must be positive")
        if self.family in ("quadratic", "randers"):
            A = np.asarray(self.A, dtype=float)
            if A.shape != (self.dim, self.dim):
                raise ValueError("A must be dim x dim")
            if not np.allclose(A, A.T, atol=1e-12):
                raise ValueError("A must be symmetric")
            if np.linalg.eigvalsh(A).min() <= 0:
                raise ValueError("A must be positive definite")
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "A_inv", np.linalg.inv(A))
        if self.family == "randers":
            b = np.asarray(self.b, dtype=float)
            if b.shape != (self.dim,):
                raise ValueError("b must have length dim")
            s = float(b @ self.A_inv @ b)
            if s >= 1.0:
                raise ValueError(
                    f"randers drift too large: |b|_Ainv^2 = {s:.6g} >= 1"
                )
            object.__setattr__(self, "b", b)
            # Dual of a Randers norm is again Randers-type.  From the support
            # function of the unit ball {v : v^T(A - bb^T)v + 2b.v <= 1}:
            #   F*(xi) = sqrt(xi^T A* xi) + b*.xi
            p = self.A_inv @ b
            dual_A = ((1.0 - s) * self.A_inv + np.outer(p, p)) / (1.0 - s) ** 2
            dual_b = -p / (1.0 - s)
            object.__setattr__(self, "dual_A", dual_A)
            object.__setattr__(self, "dual_b", dual_b)

    def __hash__(self):
        return id(self)


def euclidean_norm(dim: int) -> NormSpec:
    """Standard Euclidean norm on R^dim."""
    return NormSpec(family="euclidean", dim=dim)


def quadratic_norm(A) -> NormSpec:
    """Riemannian-type norm sqrt(v^T A v) for symmetric positive definite A."""
    A = np.asarray(A, dtype=float)
    return NormSpec(family="quadratic", dim=A.shape[0], A=A)


def randers_norm(A, b) -> NormSpec:
    """Randers norm sqrt(v^T A v) + b.v; requires b^T A^{-1} b < 1."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return NormSpec(family="randers", dim=A.shape[0], A=A, b=b)


def two_slope_norm(a_plus: float, a_minus: float) -> NormSpec:
    """The general 1-D Minkowski norm: two linear pieces with slopes a+/a-."""
    return NormSpec(
        family="two_slope_1d", dim=1, a_plus=float(a_plus), a_minus=float(a_minus)
    )


def _check_dim(norm: NormSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape == () and norm.dim == 1:
        x = x.reshape(1)
    if x.shape[-1] != norm.dim:
        raise ValueError(f"expected last axis {norm.dim}, got shape {x.shape}")
    return x


def norm_eval(norm: NormSpec, v) -> np.ndarray:
    """Evaluate F(v).  Batched over leading axes; F(0) = 0."""
    v = _check_dim(norm, v)
    if norm.family == "euclidean":
        return np.sqrt(np.einsum("...i,...i->...", v, v))
    if norm.family == "quadratic":
        return np.sqrt(np.einsum("...i,ij,...j->...", v, norm.A, v))
    if norm.family == "randers":
        alpha = np.sqrt(np.einsum("...i,ij,...j->...", v, norm.A, v))
        return alpha + np.einsum("...i,i->...", v, norm.b)
    # two_slope_1d
    x = v[..., 0]
    return np.where(x >= 0, norm.a_plus * x, -norm.a_minus * x)


def dual_norm_eval(norm: NormSpec, xi) -> np.ndarray:
    """Evaluate the dual norm F*(xi) = sup {xi(v) : F(v) <= 1} in closed form."""
    xi = _check_dim(norm, xi)
    if norm.family == "euclidean":
        return np.sqrt(np.einsum("...i,...i->...", xi, xi))
    if norm.family == "quadratic":
        return np.sqrt(np.einsum("...i,ij,...j->...", xi, norm.A_inv, xi))
    if norm.family == "randers":
        alpha = np.sqrt(np.einsum("...i,ij,...j->...", xi, norm.dual_A, xi))
        return alpha + np.einsum("...i,i->...", xi, norm.dual_b)
    x = xi[..., 0]
    # unit ball is [-1/a_minus, 1/a_plus], so slopes swap and invert
    return np.where(x >= 0, x / norm.a_plus, -x / norm.a_minus)


def legendre(norm: NormSpec, v) -> np.ndarray:
    """Legendre transform l(v) = g_v(v, .) as a covector; l(0) = 0."""
    v = _check_dim(norm, v)
    if norm.family == "euclidean":
        return v.copy()
    if norm.family == "quadratic":
        return np.einsum("ij,...j->...i", norm.A, v)
    if norm.family == "randers":
        Av = np.einsum("ij,...j->...i", norm.A, v)
        alpha = np.sqrt(np.einsum("...i,...i->...", v, Av))
        F = alpha + np.einsum("...i,i->...", v, norm.b)
        safe = np.where(alpha == 0.0, 1.0, alpha)
        # grad(F^2/2) = F * (Av/alpha + b), and = 0 at v = 0
        out = F[..., None] * (Av / safe[..., None] + norm.b)
        return np.where(alpha[..., None] == 0.0, 0.0, out)
    x = v[..., 0]
    return np.where(x >= 0, norm.a_plus**2 * x, norm.a_minus**2 * x)[..., None]


def legendre_inverse(norm: NormSpec, xi) -> np.ndarray:
    """Inverse Legendre transform: the gradient of xi -> F*^2(xi)/2.

    Satisfies F(l^{-1}(xi)) = F*(xi) and xi(l^{-1}(xi)) = F*(xi)^2.
    """
    xi = _check_dim(norm, xi)
    if norm.family == "euclidean":
        return xi.copy()
    if norm.family == "quadratic":
        return np.einsum("ij,...j->...i", norm.A_inv, xi)
    if norm.family == "randers":
        Axi = np.einsum("ij,...j->...i", norm.dual_A, xi)
        alpha = np.sqrt(np.einsum("...i,...i->...", xi, Axi))
        Fs = alpha + np.einsum("...i,i->...", xi, norm.dual_b)
        safe = np.where(alpha == 0.0, 1.0, alpha)
        out = Fs[..., None] * (Axi / safe[..., None] + norm.dual_b)
        return np.where(alpha[..., None] == 0.0, 0.0, out)
    x = xi[..., 0]
    return np.where(x >= 0, x / norm.a_plus**2, x / norm.a_minus**2)[..., None]


def legendre_inverse_fd(norm: NormSpec, xi) -> np.ndarray:
    """Inverse Legendre transform by central differences of F*^2/2.

    Step h = 1e-6 * max(1, |xi|).  Reference implementation for validating
    the closed forms in :func:`legendre_inverse`; O(h^2) accurate.
    """
    xi = _check_dim(norm, xi)
    if xi.ndim != 1:
        raise ValueError("legendre_inverse_fd takes a single covector")
    h = 1e-6 * max(1.0, float(np.linalg.norm(xi)))
    out = np.empty(norm.dim)
    for i in range(norm.dim):
        e = np.zeros(norm.dim)
        e[i] = h
        fp = float(dual_norm_eval(norm, xi + e)) ** 2
        fm = float(dual_norm_eval(norm, xi - e)) ** 2
        out[i] = (fp - fm) / (4.0 * h)
    return out


def metric_tensor(norm: NormSpec, v) -> np.ndarray:
    """Fundamental tensor g_ij(v) = Hessian of F^2/2 at v != 0.

    Symmetric positive definite; satisfies g_v(v, v) = F(v)^2.
    """
    v = _check_dim(norm, v)
    if v.ndim != 1:
        raise ValueError("metric_tensor takes a single vector")
    if np.linalg.norm(v) == 0.0:
        raise ValueError("metric tensor is undefined at v = 0")
    if norm.family == "euclidean":
        return np.eye(norm.dim)
    if norm.family == "quadratic":
        return norm.A.copy()
    if norm.family == "randers":
        Av = norm.A @ v
        alpha = float(np.sqrt(v @ Av))
        beta = float(norm.b @ v)
        g = (
            norm.A
            + beta * (norm.A / alpha - np.outer(Av, Av) / alpha**3)
            + (np.outer(Av, norm.b) + np.outer(norm.b, Av)) / alpha
            + np.outer(norm.b, norm.b)
        )
        return g
    slope = norm.a_plus if v[0] > 0 else norm.a_minus
    return np.array([[slope**2]])


def is_reversible(norm: NormSpec) -> bool:
    """True iff F(-v) = F(v) identically."""
    if norm.family in ("euclidean", "quadratic"):
        return True
    if norm.family == "randers":
        return bool(np.all(norm.b == 0.0))
    return norm.a_plus == norm.a_minus


def dual_norm_numeric(norm: NormSpec, xi, n_dirs: Optional[int] = None) -> float:
    """Numeric supremum oracle for the dual norm.

    Maximizes xi(v) over the unit ball {F(v) <= 1} by coarse sampling of
    directions (at least 64*dim) followed by local refinement.  Ground truth
    for the closed forms in :func:`dual_norm_eval`.
    """
    xi = _check_dim(norm, xi)
    if np.linalg.norm(xi) == 0.0:
        return 0.0
    if norm.dim == 1:
        vals = [
            float(xi[0]) / float(norm_eval(norm, np.array([1.0]))),
            float(-xi[0]) / float(norm_eval(norm, np.array([-1.0]))),
        ]
        return max(vals)

    if n_dirs is None:
        n_dirs = max(64 * norm.dim, 128)
    rng = np.random.default_rng(12345)
    dirs = rng.standard_normal((n_dirs, norm.dim))
    dirs = np.concatenate([dirs, np.eye(norm.dim), -np.eye(norm.dim)])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    F = norm_eval(norm, dirs)
    vals = dirs @ xi / F

    def objective(w):
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return np.inf
        u = w / nw
        return -float(u @ xi) / float(norm_eval(norm, u))

    best = -np.inf
    for idx in np.argsort(vals)[-3:]:
        res = minimize(
            objective,
            dirs[idx],
            method="Nelder-Mead",
            options={"xatol": 1e-14, "fatol": 1e-15, "maxiter": 4000},
        )
        best = max(best, -res.fun)
    return float(best)


@dataclass
class NormValidation:
    """Sampled sanity report for a NormSpec."""

    passed: bool
    max_homogeneity_violation: float
    min_norm_on_sphere: float
    min_metric_eigenvalue: float
    max_fenchel_violation: float
    failures: list[str]


def validate_norm(norm: NormSpec, n_samples: int = 100, seed: int = 0) -> NormValidation:
    """Sample directions and check homogeneity, positivity, strong convexity
    and the Fenchel inequality xi(v) <= F(v) F*(xi).  Reports, never throws.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n_samples, norm.dim))
    v = v[np.linalg.norm(v, axis=1) > 1e-8]
    t = rng.uniform(0.01, 10.0, size=v.shape[0])

    Fv = norm_eval(norm, v)
    Ftv = norm_eval(norm, t[:, None] * v)
    homog = np.max(np.abs(Ftv - t * Fv) / (1.0 + Ftv))

    unit = v / np.linalg.norm(v, axis=1, keepdims=True)
    min_sphere = float(np.min(norm_eval(norm, unit)))

    min_eig = np.inf
    for w in v[: min(20, v.shape[0])]:
        g = metric_tensor(norm, w)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(g).min()))

    xi = rng.standard_normal((v.shape[0], norm.dim))
    pair = np.einsum("ni,ni->n", xi, v)
    prod = Fv * dual_norm_eval(norm, xi)
    fenchel = float(np.max(pair - prod * (1.0 + 1e-10)))

    failures = []
    if homog > 1e-12:
        failures.append(f"homogeneity violated by {homog:.3e}")
    if min_sphere <= 0:
        failures.append("norm not positive on unit sphere")
    if min_eig <= 0:
        failures.append("metric tensor not positive definite")
    if fenchel > 0:
        failures.append(f"Fenchel inequality violated by {fenchel:.3e}")
    return NormValidation(
        passed=not failures,
        max_homogeneity_violation=float(homog),
        min_norm_on_sphere=min_sphere,
        min_metric_eigenvalue=float(min_eig),
        max_fenchel_violation=fenchel,
        failures=failures,
    )


def to_config(norm: NormSpec) -> dict:
    """Serialize to a plain config record; matrices flattened row-major."""
    params: dict = {}
    if norm.family in ("quadratic", "randers"):
        params["A"] = [float(x) for x in norm.A.reshape(-1)]
    if norm.family == "randers":
        params["b"] = [float(x) for x in norm.b]
    if norm.family == "two_slope_1d":
        params["a_plus"] = norm.a_plus
        params["a_minus"] = norm.a_minus
    return {"family": norm.family, "dim": norm.dim, "params": params}


def from_config(cfg: dict) -> NormSpec:
    """Rebuild a NormSpec from a config record (accepts flat or nested A)."""
    family = cfg["family"]
    dim = int(cfg["dim"])
    params = cfg.get("params", cfg)
    if family == "euclidean":
        return euclidean_norm(dim)
    if family == "quadratic":
        A = np.asarray(params["A"], dtype=float).reshape(dim, dim)
        return quadratic_norm(A)
    if family == "randers":
        A = np.asarray(params["A"], dtype=float).reshape(dim, dim)
        return randers_norm(A, np.asarray(params["b"], dtype=float))
    if family == "two_slope_1d":
        return two_slope_norm(params["a_plus"], params["a_minus"])
    raise ValueError(f"unknown norm family {family!r}")
