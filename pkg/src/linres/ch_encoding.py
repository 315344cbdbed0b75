"""Cayley-Hamilton expansion of reservoir powers and the network-encoded input.

Every power ``W^k`` of an ``n x n`` matrix is a combination
``sum_j phi_j^(k) W^j`` of its first ``n`` powers. The coefficient vectors
``phi^(k)`` start as standard basis vectors for ``k < n`` and are then
advanced by the companion matrix of ``W``. Summing them against a
(time-reversed) input window gives the encoded input ``s`` with
``x_0 = C s``.

Input windows are ordered backwards in time throughout this module:
``u[0]`` is the most recent input ``u_0``, ``u[k]`` is ``u_{-k}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .exceptions import DivergenceError, ValidationError
from .linalg_core import as_vector, char_poly_negated_coeffs, spectral_radius
from .topology import Reservoir, TopologyKind

__all__ = [
    "CharCoeffs",
    "EncodedInput",
    "char_coeffs",
    "reservoir_char_coeffs",
    "companion_matrix",
    "iter_phi",
    "phi_sequence",
    "encode_input",
    "encode_input_cyclic",
    "encode_input_delay",
    "truncation_horizon",
]

DIVERGENCE_LIMIT = 1e100
TAIL_STEPS = 50


@dataclass(frozen=True, eq=False)
class CharCoeffs:
    """Negated characteristic coefficients, ``W^n = sum_k varphi[k] W^k``."""

    varphi: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "varphi", as_vector(self.varphi))

    @property
    def n(self) -> int:
        return self.varphi.size


@dataclass(frozen=True, eq=False)
class EncodedInput:
    """Encoded input vector ``s`` from a window of ``horizon_K`` inputs.

    ``tail_estimate`` approximates the contribution of inputs older than
    the window. It is a heuristic for general reservoirs, not a bound.
    """

    s: np.ndarray = field(repr=False)
    horizon_K: int
    tail_estimate: float

    def to_dict(self) -> dict:
        return {"s": self.s.tolist(), "horizon_K": self.horizon_K,
                "tail_estimate": self.tail_estimate}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def char_coeffs(W) -> CharCoeffs:
    return CharCoeffs(char_poly_negated_coeffs(W))


def reservoir_char_coeffs(R: Reservoir, closed_form: bool = True) -> CharCoeffs:
    """Characteristic coefficients of ``R.W``.

    For the delay line (``W^n = 0``) and the ring (``W^n = rho^n I``) the
    exact coefficients are returned unless ``closed_form`` is False; other
    topologies go through the eigenvalue expansion.
    """
    n = R.n
    if closed_form and R.kind is TopologyKind.DELAY_LINE:
        return CharCoeffs(np.zeros(n))
    if closed_form and R.kind is TopologyKind.CYCLIC:
        varphi = np.zeros(n)
        varphi[0] = R.spec.rho ** n
        return CharCoeffs(varphi)
    return char_coeffs(R.W)


def companion_matrix(c: CharCoeffs) -> np.ndarray:
    """Frobenius companion matrix: ones on the subdiagonal, ``varphi`` in the last column."""
    n = c.n
    M = np.zeros((n, n))
    idx = np.arange(n - 1)
    M[idx + 1, idx] = 1.0
    M[:, n - 1] = c.varphi
    return M


def _advance(phi: np.ndarray, varphi: np.ndarray) -> np.ndarray:
    # companion matvec without forming M
    nxt = varphi * phi[-1]
    nxt[1:] += phi[:-1]
    return nxt


def iter_phi(c: CharCoeffs, start: int = 0) -> Iterator[np.ndarray]:
    """Yield ``phi^(k)`` for ``k = start, start + 1, ...`` indefinitely.

    Raises
    ------
    DivergenceError
        When a coefficient exceeds ``1e100`` in magnitude.
    """
    n = c.n
    varphi = c.varphi
    k = 0
    phi = None
    while True:
        if k < n:
            phi = np.zeros(n)
            phi[k] = 1.0
        else:
            phi = _advance(phi, varphi)
            if np.max(np.abs(phi)) > DIVERGENCE_LIMIT:
                raise DivergenceError(
                    f"expansion coefficients exceed {DIVERGENCE_LIMIT:.0e} at k={k}; "
                    "the reservoir is likely not contracting (rho >= 1)"
                )
        if k >= start:
            yield phi
        k += 1


def phi_sequence(c: CharCoeffs, K: int) -> np.ndarray:
    """Array of shape ``(K, n)`` whose row ``k`` is ``phi^(k)``."""
    if K < 1:
        raise ValidationError(f"K must be >= 1, got {K}")
    out = np.empty((K, c.n))
    for k, phi in zip(range(K), iter_phi(c)):
        out[k] = phi
    return out


def truncation_horizon(rho: float, epsilon: float = 1e-12, n: int = 1,
                       max_K: int = 10**6) -> int:
    """Smallest ``K`` with ``rho**K <= epsilon``, clamped to ``[n, max_K]``.

    >>> truncation_horizon(0.5)
    40
    """
    if not 0 < rho < 1:
        raise ValidationError(f"truncation needs 0 < rho < 1, got {rho}")
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    # the 1e-9 slack keeps exact powers (0.1**3 vs 1e-3) from rounding up
    K = math.ceil(math.log(epsilon) / math.log(rho) - 1e-9)
    return int(min(max(K, n, 1), max_K))


def _window(u, K: Optional[int], n: int) -> tuple[np.ndarray, int]:
    u = as_vector(u)
    if K is None:
        K = u.size
    if K < n:
        raise ValidationError(f"horizon K={K} is shorter than the reservoir size n={n}")
    if K > u.size:
        raise ValidationError(f"horizon K={K} exceeds the window length {u.size}")
    return u, int(K)


def encode_input(c: CharCoeffs, u, K: Optional[int] = None,
                 bound: Optional[float] = None) -> EncodedInput:
    """Encoded input ``s_j = sum_{k<K} phi_j^(k) u_{-k}``.

    Parameters
    ----------
    c : CharCoeffs
        Characteristic coefficients of the reservoir matrix.
    u : array_like
        Input window, most recent first.
    K : int, optional
        Number of window entries to use (default: all). Must be >= n.
    bound : float, optional
        Bound ``U`` on ``|u|`` used for the tail estimate; defaults to the
        largest magnitude in the window.

    Notes
    -----
    The first ``n`` inputs enter ``s`` unchanged (``phi^(k) = e_k``), so
    only steps ``k >= n`` involve arithmetic. The tail estimate sums
    ``U * ||phi^(k)||_1`` over the next 50 steps and extrapolates the
    remainder geometrically from the observed decay, falling back to the
    companion spectral radius when no decay is visible in that window.
    """
    n = c.n
    u, K = _window(u, K, n)
    s = u[:n].copy()
    gen = iter_phi(c, start=n)
    for k in range(n, K):
        s += next(gen) * u[k]

    U = float(np.max(np.abs(u[:K]))) if bound is None else float(bound)
    norms = np.array([np.sum(np.abs(next(gen))) for _ in range(TAIL_STEPS)])
    tail = float(np.sum(norms))
    if norms[-1] > 0:
        q = (norms[-1] / norms[0]) ** (1.0 / (TAIL_STEPS - 1)) if norms[0] > 0 else 1.0
        if not q < 1:
            q = spectral_radius(companion_matrix(c))
        if not q < 1:
            raise DivergenceError(
                f"expansion coefficients do not decay (rate {q:.6f}); rho >= 1?"
            )
        tail += norms[-1] * q / (1 - q)
    return EncodedInput(s, K, U * tail)


def encode_input_cyclic(rho: float, n: int, u, K: Optional[int] = None) -> EncodedInput:
    """Rescaled encoded input of the ring reservoir ``rho * W_c``.

    ``s~_j = sum_{p : j + p n < K} rho^(j + p n) u_{-(j + p n)}``, which pairs
    with the rho-free matrix of shifted input weights. ``s~_j = rho^j s_j``.
    The tail estimate is the geometric bound ``U rho^K / (1 - rho)``.
    """
    if not 0 <= rho < 1:
        raise ValidationError(f"cyclic encoding needs 0 <= rho < 1, got {rho}")
    u, K = _window(u, K, n)
    P = -(-K // n)
    padded = np.zeros(P * n)
    padded[:K] = u[:K]
    powers = np.zeros(P * n)
    powers[:K] = float(rho) ** np.arange(K)
    s_tilde = (padded * powers).reshape(P, n).sum(axis=0)
    U = float(np.max(np.abs(u[:K])))
    return EncodedInput(s_tilde, K, U * rho**K / (1 - rho))


def encode_input_delay(u, n: int) -> EncodedInput:
    """Delay-line encoded input: the last ``n`` inputs verbatim."""
    u = as_vector(u)
    if u.size < n:
        raise ValidationError(f"window of length {u.size} is shorter than n={n}")
    return EncodedInput(u[:n].copy(), n, 0.0)
