"""
Quaternion algebra used by every spectral quantity

Two layers live here:

* scalar value types (``Quaternion``, ``PureUnitQuaternion``, ``ComplexPair``)
  for readable per-bin code and tests;
* vectorized kernels (``qmul``, ``qconj``, ``qinvolution``, ``qexp``, ...)
  working on float arrays whose last axis holds the components
  ``(a, b, c, d)`` on the basis ``(1, i, j, k)``.

The complex-pair representation treats numpy's imaginary unit as ``j``:
``q = q1 + i q2`` with ``q1 = a + j c`` and ``q2 = b + j d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Tuple, Union, overload

import numpy as np

from app.exceptions import InvalidInputError

AXIS_MIN_NORM = 1e-12

Axis = Literal["i", "j", "k"]

_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])
_INVOLUTION_SIGNS = {
    "i": np.array([1.0, 1.0, -1.0, -1.0]),
    "j": np.array([1.0, -1.0, 1.0, -1.0]),
    "k": np.array([1.0, -1.0, -1.0, 1.0]),
}


# ---------------------------------------------------------------------------
# Vectorized kernels
# ---------------------------------------------------------------------------


def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product of broadcastable (..., 4) arrays"""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    a2, b2, c2, d2 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


def qconj(q: np.ndarray) -> np.ndarray:
    return np.asarray(q, dtype=float) * _CONJ_SIGNS


def qnorm(q: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def qinvolution(q: np.ndarray, axis: Axis) -> np.ndarray:
    """Reflect the two components orthogonal to ``axis`` (q̄^μ = −μ q μ)"""
    try:
        signs = _INVOLUTION_SIGNS[axis]
    except KeyError:
        raise InvalidInputError(f"Involution axis must be one of i, j, k (got {axis!r})")
    return np.asarray(q, dtype=float) * signs


def pure(v: np.ndarray) -> np.ndarray:
    """Embed (..., 3) vectors on (i, j, k) as pure quaternions"""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def qexp(mu: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """exp(μθ) = cos θ + μ sin θ for unit axes (..., 3) and angles (...)"""
    mu = np.asarray(mu, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.concatenate(
        [np.cos(theta)[..., None], np.sin(theta)[..., None] * mu], axis=-1
    )


def qinner(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Euclidean inner product of (..., 3) axes, clipped to [-1, 1]"""
    return np.clip(np.sum(np.asarray(u) * np.asarray(v), axis=-1), -1.0, 1.0)


def polar_product(q: np.ndarray) -> np.ndarray:
    """q j conj(q) for (..., 4) arrays, a pure quaternion"""
    return qmul(qmul(q, UNIT_J), qconj(q))


def to_complex_pair(q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 2], q[..., 1] + 1j * q[..., 3]


def from_complex_pair(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    q1 = np.asarray(q1, dtype=complex)
    q2 = np.asarray(q2, dtype=complex)
    return np.stack([q1.real, q2.real, q1.imag, q2.imag], axis=-1)


def embed_cj(z: np.ndarray) -> np.ndarray:
    """Embed complex numbers of the j-subfield as quaternions a + j c"""
    z = np.asarray(z, dtype=complex)
    zeros = np.zeros(z.shape)
    return np.stack([z.real, zeros, z.imag, zeros], axis=-1)


def normalize_axes(vectors: np.ndarray, allow_missing: bool = False) -> np.ndarray:
    """
    Normalize (n, 3) axis vectors.

    Rows with norm below ``AXIS_MIN_NORM`` (or NaN rows) are rejected, unless
    ``allow_missing`` is set, in which case they come back as NaN rows.
    """
    v = np.array(vectors, dtype=float)
    if v.ndim == 1:
        v = v[None, :]
    if v.shape[-1] != 3:
        raise InvalidInputError(f"Axis vectors must have 3 components, got shape {v.shape}")
    norms = np.linalg.norm(v, axis=-1)
    degenerate = ~np.isfinite(norms) | (norms < AXIS_MIN_NORM)
    if np.any(degenerate) and not allow_missing:
        first = int(np.flatnonzero(degenerate)[0])
        raise InvalidInputError(f"degenerate axis at bin {first} (norm < {AXIS_MIN_NORM})")
    out = np.full_like(v, np.nan)
    ok = ~degenerate
    out[ok] = v[ok] / norms[ok, None]
    return out


# ---------------------------------------------------------------------------
# Scalar value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quaternion:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_array(cls, values: np.ndarray) -> "Quaternion":
        a, b, c, d = (float(x) for x in np.asarray(values, dtype=float).reshape(4))
        return cls(a, b, c, d)

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    @property
    def scalar(self) -> float:
        return self.a

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.b, self.c, self.d])

    def conj(self) -> "Quaternion":
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def norm(self) -> float:
        return math.sqrt(self.a**2 + self.b**2 + self.c**2 + self.d**2)

    def involution(self, axis: Axis) -> "Quaternion":
        return Quaternion.from_array(qinvolution(self.to_array(), axis))

    def isclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.to_array(), other.to_array(), rtol=0.0, atol=atol))

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(self.to_array() + _as_quaternion(other).to_array())

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(self.to_array() - _as_quaternion(other).to_array())

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other: Union["Quaternion", "PureUnitQuaternion", float]) -> "Quaternion":
        if isinstance(other, (int, float)):
            return Quaternion.from_array(self.to_array() * float(other))
        return Quaternion.from_array(qmul(self.to_array(), _as_quaternion(other).to_array()))

    def __rmul__(self, other: float) -> "Quaternion":
        if isinstance(other, (int, float)):
            return Quaternion.from_array(self.to_array() * float(other))
        return NotImplemented


@dataclass(frozen=True, init=False)
class PureUnitQuaternion:
    """Unit axis on {i, j, k}; construction normalizes and rejects near-zero input"""

    x: float
    y: float
    z: float

    def __init__(self, x: float, y: float, z: float):
        norm = math.sqrt(x * x + y * y + z * z)
        if not math.isfinite(norm) or norm < AXIS_MIN_NORM:
            raise InvalidInputError(f"degenerate axis ({x}, {y}, {z})")
        object.__setattr__(self, "x", x / norm)
        object.__setattr__(self, "y", y / norm)
        object.__setattr__(self, "z", z / norm)

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "PureUnitQuaternion":
        x, y, z = (float(c) for c in np.asarray(v, dtype=float).reshape(3))
        return cls(x, y, z)

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> "PureUnitQuaternion":
        return cls(q.b, q.c, q.d)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    def __neg__(self) -> "PureUnitQuaternion":
        return PureUnitQuaternion(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class ComplexPair:
    """q = q1 + i·q2 with q1, q2 in the j-subfield"""

    q1: complex
    q2: complex

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> "ComplexPair":
        return cls(complex(q.a, q.c), complex(q.b, q.d))

    def to_quaternion(self) -> Quaternion:
        return Quaternion(self.q1.real, self.q2.real, self.q1.imag, self.q2.imag)


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)  # noqa: E741
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)

AXIS_I = PureUnitQuaternion(1.0, 0.0, 0.0)
AXIS_J = PureUnitQuaternion(0.0, 1.0, 0.0)
AXIS_K = PureUnitQuaternion(0.0, 0.0, 1.0)

UNIT_I = I.to_array()
UNIT_J = J.to_array()


def _as_quaternion(q: Union[Quaternion, PureUnitQuaternion]) -> Quaternion:
    if isinstance(q, PureUnitQuaternion):
        return q.as_quaternion()
    if isinstance(q, Quaternion):
        return q
    raise TypeError(f"Expected a quaternion, got {type(q).__name__}")


# ---------------------------------------------------------------------------
# Polymorphic operations (scalar types in, scalar types out; arrays in, arrays out)
# ---------------------------------------------------------------------------


@overload
def mul(p: Quaternion, q: Quaternion) -> Quaternion: ...
@overload
def mul(p: np.ndarray, q: np.ndarray) -> np.ndarray: ...
def mul(p, q):
    if isinstance(p, (Quaternion, PureUnitQuaternion)) and isinstance(
        q, (Quaternion, PureUnitQuaternion)
    ):
        return _as_quaternion(p) * _as_quaternion(q)
    return qmul(p, q)


def conj(q):
    if isinstance(q, (Quaternion, PureUnitQuaternion)):
        return _as_quaternion(q).conj()
    return qconj(q)


def involution(q, axis: Axis):
    if isinstance(q, (Quaternion, PureUnitQuaternion)):
        return _as_quaternion(q).involution(axis)
    return qinvolution(q, axis)


def exp_pure(axis, theta):
    """exp(axis·theta); a PureUnitQuaternion axis gives a Quaternion"""
    if isinstance(axis, PureUnitQuaternion):
        t = float(theta)
        s = math.sin(t)
        return Quaternion(math.cos(t), s * axis.x, s * axis.y, s * axis.z)
    return qexp(axis, theta)


def inner3(u, v):
    if isinstance(u, PureUnitQuaternion) and isinstance(v, PureUnitQuaternion):
        return float(np.clip(u.x * v.x + u.y * v.y + u.z * v.z, -1.0, 1.0))
    return qinner(u, v)
