"""Reservoir architectures: delay line, cyclic ring, random Gaussian, Wigner.

All constructors are deterministic in their seeds. Random draws come
from a PCG64 stream keyed by ``numpy.random.SeedSequence(seed)``, and the
random matrices are drawn as standard normals scaled by ``rho / sqrt(n)``,
so the same seed at a different ``rho`` gives the same matrix up to scale.
"""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import ValidationError
from .linalg_core import as_vector, max_singular_value, spectral_radius

__all__ = [
    "TopologyKind",
    "RescaleMode",
    "ReservoirSpec",
    "Reservoir",
    "build_delay_line",
    "build_cyclic",
    "build_random",
    "build_wigner",
    "build_reservoir",
    "check_aperiodic",
    "input_weights",
]

_MAX_SEED = 2**64 - 1


class TopologyKind(str, enum.Enum):
    DELAY_LINE = "delay"
    CYCLIC = "cyclic"
    RANDOM = "random"
    WIGNER = "wigner"

    @classmethod
    def parse(cls, value) -> "TopologyKind":
        if isinstance(value, cls):
            return value
        aliases = {"delayline": "delay", "delay_line": "delay", "delay-line": "delay",
                   "ring": "cyclic", "gaussian": "random", "randomgaussian": "random"}
        key = str(value).strip().lower()
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(
                f"unknown topology {value!r}; choose from {[k.value for k in cls]}"
            ) from None


class RescaleMode(str, enum.Enum):
    """How a random matrix is normalised after sampling.

    ``AS_DISTRIBUTED`` keeps the raw draw, whose spectral radius equals
    ``rho`` only in expectation. ``EXACT_SPECTRAL_RADIUS`` rescales so the
    realised spectral radius is ``rho``; ``EXACT_MAX_SINGULAR_VALUE`` does
    the same for the largest singular value.
    """

    AS_DISTRIBUTED = "as-distributed"
    EXACT_SPECTRAL_RADIUS = "exact"
    EXACT_MAX_SINGULAR_VALUE = "exact-msv"

    @classmethod
    def parse(cls, value) -> "RescaleMode":
        if isinstance(value, cls):
            return value
        aliases = {"none": "as-distributed", "asdistributed": "as-distributed",
                   "exactspectralradius": "exact", "sr": "exact", "msv": "exact-msv"}
        key = str(value).strip().lower()
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(
                f"unknown rescale mode {value!r}; choose from {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class ReservoirSpec:
    kind: TopologyKind
    n: int
    rho: float
    seed: int = 0
    input_seed: int = 0
    rescale_mode: RescaleMode = RescaleMode.AS_DISTRIBUTED

    def __post_init__(self):
        object.__setattr__(self, "kind", TopologyKind.parse(self.kind))
        object.__setattr__(self, "rescale_mode", RescaleMode.parse(self.rescale_mode))
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"reservoir size must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not np.isfinite(self.rho) or self.rho <= 0:
            raise ValidationError(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "rho", float(self.rho))
        if self.rho > 1:
            warnings.warn(
                f"rho={self.rho} > 1: the encoded-input series need not converge",
                RuntimeWarning,
                stacklevel=3,
            )
        for name in ("seed", "input_seed"):
            value = getattr(self, name)
            if int(value) != value or not 0 <= value <= _MAX_SEED:
                raise ValidationError(f"{name} must be a 64-bit unsigned integer, got {value}")
            object.__setattr__(self, name, int(value))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["rescale_mode"] = self.rescale_mode.value
        return d


@dataclass(frozen=True, eq=False)
class Reservoir:
    """A realised reservoir: connection matrix ``W`` and input weights ``w``."""

    spec: ReservoirSpec
    W: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def kind(self) -> TopologyKind:
        return self.spec.kind

    def to_json(self, **kwargs) -> str:
        doc = self.spec.to_dict()
        doc["W"] = self.W.tolist()
        doc["w"] = self.w.tolist()
        return json.dumps(doc, **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Reservoir":
        try:
            doc = json.loads(text)
            spec = ReservoirSpec(
                kind=doc["kind"], n=doc["n"], rho=doc["rho"],
                seed=doc.get("seed", 0), input_seed=doc.get("input_seed", 0),
                rescale_mode=doc.get("rescale_mode", RescaleMode.AS_DISTRIBUTED),
            )
            W = np.asarray(doc["W"], dtype=np.float64)
            w = np.asarray(doc["w"], dtype=np.float64)
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"malformed reservoir document: {exc}") from exc
        if W.shape != (spec.n, spec.n) or w.shape != (spec.n,):
            raise ValidationError(
                f"reservoir document shapes W{W.shape}, w{w.shape} do not match n={spec.n}"
            )
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(w))):
            raise ValidationError("reservoir document has non-finite entries")
        return cls(spec, W, w)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def check_aperiodic(w, tol: float = 1e-9) -> bool:
    """True iff no nontrivial cyclic shift of ``w`` reproduces ``w``.

    A shift by ``p`` counts as a match when
    ``||roll(w, p) - w|| <= tol * ||w||``. The zero vector matches every
    shift and is reported as periodic.
    """
    w = as_vector(w)
    norm = np.linalg.norm(w)
    if norm == 0:
        return False
    for p in range(1, w.size):
        if np.linalg.norm(np.roll(w, p) - w) <= tol * norm:
            return False
    return True


def input_weights(n: int, input_seed: int) -> np.ndarray:
    """Input weight vector with i.i.d. ``Normal(0, 1/n)`` entries."""
    return _rng(input_seed).standard_normal(n) / np.sqrt(n)


def _spec(kind, n, rho, seed=0, input_seed=0, rescale_mode=RescaleMode.AS_DISTRIBUTED):
    return ReservoirSpec(kind, n, rho, seed, input_seed, rescale_mode)


def _shift_matrix(n: int, rho: float) -> np.ndarray:
    W = np.zeros((n, n))
    idx = np.arange(n - 1)
    W[idx + 1, idx] = rho
    return W


def build_delay_line(n: int, rho: float = 1.0, *, spec: ReservoirSpec | None = None) -> Reservoir:
    """Chain reservoir: neuron ``i`` feeds neuron ``i + 1``, no wrap-around.

    ``rho`` is the uniform connection weight; the spectral radius of the
    result is 0 regardless. Input enters only through the first neuron.
    """
    spec = spec or _spec(TopologyKind.DELAY_LINE, n, rho)
    W = _shift_matrix(spec.n, spec.rho)
    w = np.zeros(spec.n)
    w[0] = 1.0
    return Reservoir(spec, W, w)


def build_cyclic(n: int, rho: float = 1.0, input_seed: int = 0, *,
                 spec: ReservoirSpec | None = None) -> Reservoir:
    """Ring reservoir ``rho * W_c``: the delay line plus the edge ``n-1 -> 0``.

    Input weights are ``Normal(0, 1/n)``, redrawn until aperiodic.
    """
    spec = spec or _spec(TopologyKind.CYCLIC, n, rho, input_seed=input_seed)
    W = _shift_matrix(spec.n, spec.rho)
    W[0, spec.n - 1] = spec.rho
    rng = _rng(spec.input_seed)
    w = rng.standard_normal(spec.n) / np.sqrt(spec.n)
    while not check_aperiodic(w):
        w = rng.standard_normal(spec.n) / np.sqrt(spec.n)
    return Reservoir(spec, W, w)


def _rescale(W: np.ndarray, spec: ReservoirSpec) -> np.ndarray:
    if spec.rescale_mode is RescaleMode.EXACT_SPECTRAL_RADIUS:
        return W * (spec.rho / spectral_radius(W))
    if spec.rescale_mode is RescaleMode.EXACT_MAX_SINGULAR_VALUE:
        return W * (spec.rho / max_singular_value(W))
    return W


def build_random(n: int, rho: float, seed: int = 0, input_seed: int = 0,
                 rescale_mode=RescaleMode.AS_DISTRIBUTED, *,
                 spec: ReservoirSpec | None = None) -> Reservoir:
    """Dense Gaussian reservoir with entries ``Normal(0, rho^2 / n)``."""
    spec = spec or _spec(TopologyKind.RANDOM, n, rho, seed, input_seed, rescale_mode)
    W = _rng(spec.seed).standard_normal((spec.n, spec.n)) * (spec.rho / np.sqrt(spec.n))
    W = _rescale(W, spec)
    return Reservoir(spec, W, input_weights(spec.n, spec.input_seed))


def build_wigner(n: int, rho: float, seed: int = 0, input_seed: int = 0,
                 rescale_mode=RescaleMode.AS_DISTRIBUTED, *,
                 spec: ReservoirSpec | None = None) -> Reservoir:
    """Symmetric Gaussian reservoir with expected spectral radius ``rho``.

    Off-diagonal pairs are ``Normal(0, (rho/2)^2 / n)`` and diagonal entries
    ``Normal(0, (rho/4)^2 / n)``, so the diagonal standard deviation is half
    the off-diagonal one. The semicircle edge of a symmetric matrix with
    off-diagonal variance ``v`` sits at ``2 sqrt(n v)``, hence the factor 1/2
    relative to :func:`build_random`; spectral radius and largest singular
    value coincide.
    """
    spec = spec or _spec(TopologyKind.WIGNER, n, rho, seed, input_seed, rescale_mode)
    m = spec.n
    Z = _rng(spec.seed).standard_normal((m, m))
    scale = 0.5 * spec.rho / np.sqrt(m)
    upper = np.triu(Z, k=1) * scale
    W = upper + upper.T
    W[np.diag_indices(m)] = np.diag(Z) * (0.5 * scale)
    W = _rescale(W, spec)
    # rescaling by a scalar keeps W exactly symmetric
    return Reservoir(spec, W, input_weights(m, spec.input_seed))


_BUILDERS = {
    TopologyKind.DELAY_LINE: build_delay_line,
    TopologyKind.CYCLIC: build_cyclic,
    TopologyKind.RANDOM: build_random,
    TopologyKind.WIGNER: build_wigner,
}


def build_reservoir(spec: ReservoirSpec) -> Reservoir:
    """Realise ``spec`` with the matching constructor."""
    return _BUILDERS[spec.kind](spec.n, spec.rho, spec=spec)
