"""Dense state-vector and density-matrix utilities at desk scale.

States are plain complex numpy vectors of length ``N = 2**n``; density
matrices are ``(D, D)`` complex arrays.  Tensor-power objects are formed
explicitly, so the dimension ``N**t`` is capped at :data:`MAX_DIM`.
"""

from __future__ import annotations

import math
import os

import numpy as np

MAX_DIM = 4096
UNIT_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-9


def _vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    return v


def check_dimension(n: int, t: int = 1) -> int:
    """Return ``N**t`` for ``N = 2**n`` or raise if it exceeds :data:`MAX_DIM`."""
    if n < 0 or t < 1:
        raise ValueError("need n >= 0 and t >= 1")
    dim = (1 << n) ** t
    if dim > MAX_DIM:
        raise ValueError(f"N**t = {dim} exceeds the dense cap {MAX_DIM}")
    return dim


def inner_product(u, v) -> complex:
    """``<u|v>`` (conjugate-linear in the first argument)."""
    u, v = _vector(u), _vector(v)
    if u.shape != v.shape:
        raise ValueError("dimension mismatch")
    return complex(np.vdot(u, v))


def normalize(v) -> np.ndarray:
    v = _vector(v)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalise the zero vector")
    return v / norm


def is_state(v, tol: float = UNIT_TOL) -> bool:
    v = np.asarray(v)
    return v.ndim == 1 and abs(np.linalg.norm(v) - 1.0) <= tol


def trace_distance_pure(psi, phi) -> float:
    """``sqrt(1 - |<psi|phi>|^2)`` for unit vectors."""
    psi, phi = _vector(psi), _vector(phi)
    if not (is_state(psi) and is_state(phi)):
        raise ValueError("trace_distance_pure needs unit vectors")
    overlap = abs(inner_product(psi, phi)) ** 2
    return math.sqrt(max(0.0, 1.0 - min(overlap, 1.0)))


def check_density_matrix(rho, name: str = "rho") -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be square, got shape {rho.shape}")
    if rho.shape[0] > MAX_DIM:
        raise ValueError(f"{name} dimension {rho.shape[0]} exceeds {MAX_DIM}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError(f"{name} is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} does not have unit trace")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise ValueError(f"{name} is not positive semidefinite")
    return rho


def trace_distance_mixed(rho0, rho1, validate: bool = True) -> float:
    """``0.5 * ||rho0 - rho1||_1`` via a dense Hermitian eigendecomposition."""
    if validate:
        rho0 = check_density_matrix(rho0, "rho0")
        rho1 = check_density_matrix(rho1, "rho1")
    else:
        rho0 = np.asarray(rho0, dtype=np.complex128)
        rho1 = np.asarray(rho1, dtype=np.complex128)
    if rho0.shape != rho1.shape:
        raise ValueError("dimension mismatch")
    diff = rho0 - rho1
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def tensor_power(psi, t: int) -> np.ndarray:
    """``psi^{(x) t}`` as a flat vector (last factor varies fastest)."""
    psi = _vector(psi)
    out = psi
    for _ in range(t - 1):
        out = np.kron(out, psi)
    return out


def tensor_powers(states: np.ndarray, t: int) -> np.ndarray:
    """Row-wise tensor powers of a ``(k, N)`` batch, shape ``(k, N**t)``."""
    states = np.asarray(states, dtype=np.complex128)
    out = states
    for _ in range(t - 1):
        out = (out[:, :, None] * states[:, None, :]).reshape(states.shape[0], -1)
    return out


def ensemble_t_tensor(states, weights, t: int) -> np.ndarray:
    """``sum_j w_j (|psi_j><psi_j|)^{(x) t}`` for a finite ensemble."""
    states = np.atleast_2d(np.asarray(states, dtype=np.complex128))
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (states.shape[0],):
        raise ValueError("need one weight per state")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    norms = np.linalg.norm(states, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ValueError("ensemble states must be unit vectors")
    if states.shape[1] ** t > MAX_DIM:
        raise ValueError(f"N**t = {states.shape[1] ** t} exceeds the dense cap {MAX_DIM}")
    phi = tensor_powers(states, t)
    return (phi.T * weights) @ phi.conj()


def haar_samples(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random states on ``n`` qubits, shape ``(count, 2**n)``."""
    N = 1 << n
    z = rng.standard_normal((count, N)) + 1j * rng.standard_normal((count, N))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_sample(n: int, rng: np.random.Generator) -> np.ndarray:
    """A Haar-random state: a normalised standard complex Gaussian vector."""
    return haar_samples(n, 1, rng)[0]


def symmetric_projector(N: int, t: int) -> np.ndarray:
    """Projector onto the symmetric subspace of ``(C^N)^{(x) t}``.

    Basis indices whose digit multisets agree form one orbit under factor
    permutations; within an orbit of size ``c`` the projector has entries
    ``1/c`` and it vanishes between orbits.
    """
    dim = N ** t
    if dim > MAX_DIM:
        raise ValueError(f"N**t = {dim} exceeds the dense cap {MAX_DIM}")
    digits = np.indices((N,) * t).reshape(t, dim).T
    _, orbit, sizes = np.unique(np.sort(digits, axis=1), axis=0,
                                return_inverse=True, return_counts=True)
    orbit = orbit.ravel()
    same = orbit[:, None] == orbit[None, :]
    return np.where(same, 1.0 / sizes[orbit][:, None], 0.0)


_VALIDATED: set[tuple[int, int]] = set()


def haar_moment(n: int, t: int, validate: bool = True) -> np.ndarray:
    """Haar average of ``(|psi><psi|)^{(x) t}``: ``P_sym / C(N + t - 1, t)``.

    On first use for a given ``(n, t)`` the closed form is checked against a
    Monte Carlo estimate (see :func:`validate_haar_moment`); a mismatch
    raises.  Set ``ARSIM_SKIP_HAAR_VALIDATION=1`` to bypass the check.
    """
    check_dimension(n, t)
    N = 1 << n
    moment = symmetric_projector(N, t) / math.comb(N + t - 1, t)
    if validate and (n, t) not in _VALIDATED and not os.environ.get("ARSIM_SKIP_HAAR_VALIDATION"):
        validate_haar_moment(n, t, moment)
        _VALIDATED.add((n, t))
    return moment.astype(np.complex128)


def validate_haar_moment(n: int, t: int, moment: np.ndarray, samples: int = 20000,
                         probes: int = 6, z: float = 6.0) -> float:
    """Check probe matrix elements of ``moment`` against Haar sampling.

    Probes are random vectors of the full space plus random product vectors
    ``a^{(x) t}``.  Every element ``<p_i|moment|p_j>`` must lie within ``z``
    standard errors of its sample mean.  Returns the largest z-score seen.
    """
    rng = np.random.default_rng([0x4A17, n, t])
    N = 1 << n
    dim = N ** t
    general = rng.standard_normal((probes, dim)) + 1j * rng.standard_normal((probes, dim))
    product = tensor_powers(haar_samples(n, probes, rng), t)
    P = np.concatenate([general / np.linalg.norm(general, axis=1, keepdims=True), product])
    exact = P.conj() @ moment @ P.T
    k = P.shape[0]
    s1 = np.zeros((k, k), complex)
    s2 = np.zeros((k, k))
    for lo in range(0, samples, 1000):
        c = tensor_powers(haar_samples(n, min(1000, samples - lo), rng), t) @ P.conj().T
        x = c[:, :, None] * c[:, None, :].conj()
        s1 += x.sum(axis=0)
        s2 += (np.abs(x) ** 2).sum(axis=0)
    mean = s1 / samples
    se = np.sqrt(np.maximum(s2 / samples - np.abs(mean) ** 2, 0.0) / samples)
    worst = float(np.max(np.abs(mean - exact) / (se + 1e-300)))
    if worst > z:
        raise RuntimeError(
            f"Haar moment closed form disagrees with sampling for n={n}, t={t} "
            f"(z-score {worst:.2f})")
    return worst
