"""Controllability matrix ``C = [w, Ww, ..., W^(n-1) w]`` and its analysis."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .exceptions import FullRankError, ValidationError
from .linalg_core import as_matrix, as_vector, rank_decomposition
from .topology import Reservoir

__all__ = [
    "ControllabilityReport",
    "controllability_matrix",
    "analyze",
    "expected_column_norms",
    "cyclic_controllability_tilde",
    "indistinguishability_demo",
    "trailing_energy",
    "nullspace_profile",
    "older_share",
    "TRAILING_ENERGY_THRESHOLD",
]

# minimum share of nullspace energy in components k >= rank // 2, see older_share
TRAILING_ENERGY_THRESHOLD = 0.9


@dataclass(frozen=True, eq=False)
class ControllabilityReport:
    C: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    rank: int
    nullspace: np.ndarray = field(repr=False)
    column_norms: np.ndarray = field(repr=False)
    rank_tolerance: float

    @property
    def n(self) -> int:
        return self.C.shape[1]

    @property
    def nullity(self) -> int:
        return self.nullspace.shape[1]

    def to_dict(self, include_matrix: bool = False) -> dict:
        doc = {
            "n": self.n,
            "rank": self.rank,
            "nullity": self.nullity,
            "rank_tolerance": self.rank_tolerance,
            "singular_values": self.singular_values.tolist(),
            "column_norms": self.column_norms.tolist(),
            "nullspace": self.nullspace.T.tolist(),
        }
        if include_matrix:
            doc["C"] = self.C.tolist()
        return doc

    def to_json(self, include_matrix: bool = False, **kwargs) -> str:
        return json.dumps(self.to_dict(include_matrix), **kwargs)


def controllability_matrix(R: Union[Reservoir, np.ndarray], w=None) -> np.ndarray:
    """Stack the Krylov vectors ``W^k w`` as columns, by repeated matvec.

    Accepts either a :class:`Reservoir` or the pair ``(W, w)``.
    """
    if isinstance(R, Reservoir):
        W, w = R.W, R.w
    else:
        if w is None:
            raise ValidationError("pass a Reservoir or both W and w")
        W = as_matrix(R, square=True)
        w = as_vector(w)
        if w.size != W.shape[0]:
            raise ValidationError(f"w has length {w.size}, W is {W.shape}")
    n = w.size
    C = np.empty((n, n))
    col = np.array(w, dtype=np.float64)
    C[:, 0] = col
    for k in range(1, n):
        col = W @ col
        C[:, k] = col
    return C


def analyze(C, tol: Optional[float] = None) -> ControllabilityReport:
    """Rank, nullspace, singular values and column norms of ``C``."""
    C = as_matrix(C, square=True)
    sv, tol, rank, null = rank_decomposition(C, tol)
    return ControllabilityReport(
        C=C,
        singular_values=sv,
        rank=rank,
        nullspace=null,
        column_norms=np.linalg.norm(C, axis=0),
        rank_tolerance=tol,
    )


def expected_column_norms(rho: float, n: int) -> np.ndarray:
    """Expected column norms ``(1, rho, ..., rho^(n-1))`` of a random reservoir's ``C``."""
    if rho <= 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    return float(rho) ** np.arange(n, dtype=np.float64)


def cyclic_controllability_tilde(w, n: Optional[int] = None) -> np.ndarray:
    """Matrix whose column ``i`` is ``w`` cyclically shifted ``i`` times.

    This is the rho-free controllability matrix of the ring, to be paired
    with :func:`linres.ch_encoding.encode_input_cyclic`.
    """
    w = as_vector(w)
    if n is not None and w.size != n:
        raise ValidationError(f"w has length {w.size}, expected {n}")
    m = w.size
    rows = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return w[rows]


def trailing_energy(report: ControllabilityReport) -> np.ndarray:
    """Per nullspace vector, share of squared norm in components ``rank..n-1``."""
    null = report.nullspace
    if null.shape[1] == 0:
        return np.empty(0)
    total = np.sum(null**2, axis=0)
    return np.sum(null[report.rank:] ** 2, axis=0) / total


def nullspace_profile(report: ControllabilityReport) -> np.ndarray:
    """Energy of the nullspace per component, normalised to sum to 1.

    This is the diagonal of the orthogonal projector onto the nullspace
    divided by its dimension, so it does not depend on the chosen basis.
    Component ``k`` is the weight of the encoded input ``s_k``, i.e. of
    inputs ``k`` steps in the past.
    """
    null = report.nullspace
    if null.shape[1] == 0:
        return np.zeros(report.n)
    return np.sum(null**2, axis=1) / null.shape[1]


def older_share(report: ControllabilityReport, start: Optional[int] = None) -> float:
    """Share of nullspace energy in components ``start..n-1`` (default ``rank // 2``).

    Values near 1 mean the encoded inputs that ``C`` cannot tell apart
    differ only in the older part of the signal.
    """
    if report.nullity == 0:
        return 0.0
    start = report.rank // 2 if start is None else start
    return float(np.sum(nullspace_profile(report)[start:]))


def indistinguishability_demo(R: Union[Reservoir, np.ndarray], s1, d_index: int = 0,
                              tol: Optional[float] = None):
    """Final states ``C s1`` and ``C (s1 + d)`` for a nullspace vector ``d``.

    ``R`` may be a :class:`Reservoir` or a controllability matrix. The two
    states agree up to the rank tolerance, although the encoded inputs
    differ by a unit vector.

    Raises
    ------
    FullRankError
        If ``C`` has no numerical nullspace.
    """
    C = controllability_matrix(R) if isinstance(R, Reservoir) else as_matrix(R, square=True)
    report = analyze(C, tol)
    if report.nullity == 0:
        raise FullRankError(
            f"controllability matrix has full rank {report.rank}: "
            "the reservoir has full memory rank and no indistinguishable inputs"
        )
    if not 0 <= d_index < report.nullity:
        raise ValidationError(f"d_index {d_index} out of range for nullity {report.nullity}")
    s1 = as_vector(s1)
    s2 = s1 + report.nullspace[:, d_index]
    return C @ s1, C @ s2
