"""Truncated Fourier series on the flat torus T^m = R^m / Z^m.

A :class:`TrigPolynomial` stores a finite map ``mode -> complex coefficient``
for the expansion ``f(x) = sum_k c_k exp(2 pi i k.x)``.  Modes are stored as a
lexicographically sorted integer array so that iteration, serialization and
summation order are all deterministic.

Real functions keep their full spectrum; :meth:`TrigPolynomial.is_real`
checks the Hermitian symmetry ``c_{-k} = conj(c_k)`` directly.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

PRUNE_THRESHOLD = 1e-14
TWO_PI = 2.0 * np.pi

Mode = tuple  # tuple[int, ...], a lattice point in Z^m


class DimensionMismatch(ValueError):
    pass


def _exact_group_sum(x: np.ndarray, starts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Correctly rounded sum of each contiguous group of a real array.

    Correct rounding makes the result independent of summation order and
    odd under negation, which is what makes add and mul exactly commutative
    and brackets exactly antisymmetric.
    """
    out = np.add.reduceat(x, starts)  # exact for groups of size <= 2
    for i in np.flatnonzero(sizes > 2):
        s0 = starts[i]
        out[i] = math.fsum(x[s0:s0 + sizes[i]])
    return out


def _aggregate(modes: np.ndarray, values: np.ndarray, dim: int):
    """Sum duplicate modes and drop coefficients below the prune threshold."""
    if len(values) == 0:
        return np.zeros((0, dim), dtype=np.int64), np.zeros(0, dtype=complex)
    order = np.lexsort([modes[:, j] for j in range(dim - 1, -1, -1)])
    modes = modes[order]
    values = values[order]
    if len(values) > 1:
        new_group = np.any(modes[1:] != modes[:-1], axis=1)
        starts = np.concatenate(([0], np.flatnonzero(new_group) + 1))
    else:
        starts = np.array([0])
    sizes = np.diff(np.append(starts, len(values)))
    summed = _exact_group_sum(values.real.copy(), starts, sizes) + 1j * _exact_group_sum(
        values.imag.copy(), starts, sizes
    )
    modes = modes[starts]
    keep = np.abs(summed) >= PRUNE_THRESHOLD
    return modes[keep], summed[keep]


def _cmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Complex product from real parts; numpy's complex multiply may fuse and is then not symmetric."""
    re = a.real * b.real - a.imag * b.imag
    im = a.real * b.imag + a.imag * b.real
    return re + 1j * im


def _apply_factors(base: np.ndarray, factors: tuple) -> np.ndarray:
    """base * prod(factors), the factors multiplied in a canonical (sorted) order per mode."""
    if not factors:
        return base
    stacked = np.sort(np.stack(factors), axis=0)
    prod = stacked[0]
    for f in stacked[1:]:
        prod = _cmul(prod, f)
    return _cmul(base, prod)


class TrigPolynomial:
    """Immutable trigonometric polynomial on T^dim."""

    __slots__ = ("dim", "_m", "_c", "_pending")

    def __init__(self, dim: int, coeffs: Mapping[Mode, complex] | None = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        coeffs = coeffs or {}
        if coeffs:
            modes = np.array([tuple(k) for k in coeffs], dtype=np.int64)
            if modes.ndim != 2 or modes.shape[1] != int(dim):
                raise DimensionMismatch(f"modes must have length {int(dim)}")
            values = np.array([complex(c) for c in coeffs.values()], dtype=complex)
        else:
            modes = np.zeros((0, int(dim)), dtype=np.int64)
            values = np.zeros(0, dtype=complex)
        self._set(int(dim), *_aggregate(modes, values, int(dim)))

    def _set(self, dim: int, modes: np.ndarray, coeffs: np.ndarray, pending: tuple = ()):
        self.dim = dim
        modes.setflags(write=False)
        coeffs.setflags(write=False)
        self._m, self._c, self._pending = modes, coeffs, pending

    @classmethod
    def _from_arrays(cls, dim: int, modes: np.ndarray, values: np.ndarray) -> "TrigPolynomial":
        obj = cls.__new__(cls)
        obj._set(dim, *_aggregate(
            np.asarray(modes, dtype=np.int64).reshape(-1, dim), np.asarray(values, dtype=complex), dim
        ))
        return obj

    def _settle(self):
        # symbol multiplications are deferred so that commuting ones commute exactly
        if self._pending:
            c = _apply_factors(np.array(self._c), self._pending)
            keep = np.abs(c) >= PRUNE_THRESHOLD
            self._set(self.dim, self._m[keep], c[keep])

    @property
    def _modes(self) -> np.ndarray:
        self._settle()
        return self._m

    @property
    def _coeffs(self) -> np.ndarray:
        self._settle()
        return self._c

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "TrigPolynomial":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value: complex = 1.0) -> "TrigPolynomial":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def monomial(cls, k: Iterable[int], coeff: complex = 1.0) -> "TrigPolynomial":
        k = tuple(int(x) for x in k)
        return cls(len(k), {k: coeff})

    @classmethod
    def cos_mode(cls, k: Iterable[int], amplitude: float = 1.0) -> "TrigPolynomial":
        """amplitude * cos(2 pi k.x)"""
        k = tuple(int(x) for x in k)
        minus = tuple(-x for x in k)
        if k == minus:
            return cls.constant(len(k), amplitude)
        return cls(len(k), {k: amplitude / 2, minus: amplitude / 2})

    @classmethod
    def sin_mode(cls, k: Iterable[int], amplitude: float = 1.0) -> "TrigPolynomial":
        """amplitude * sin(2 pi k.x)"""
        k = tuple(int(x) for x in k)
        minus = tuple(-x for x in k)
        if k == minus:
            return cls.zero(len(k))
        return cls(len(k), {k: -0.5j * amplitude, minus: 0.5j * amplitude})

    @classmethod
    def random_real(
        cls,
        dim: int,
        degree: int,
        rng: np.random.Generator,
        n_terms: int | None = None,
        zero_mean: bool = False,
    ) -> "TrigPolynomial":
        """Random real polynomial with modes in the sup-norm ball of radius ``degree``.

        ``n_terms`` Hermitian pairs are drawn (all of them when ``None``).
        """
        side = np.arange(-degree, degree + 1)
        grid = np.stack(np.meshgrid(*([side] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        # one representative per +/- pair: first nonzero entry positive
        reps = []
        for k in grid:
            nz = np.flatnonzero(k)
            if len(nz) and k[nz[0]] > 0:
                reps.append(tuple(int(x) for x in k))
        if n_terms is not None and n_terms < len(reps):
            idx = rng.choice(len(reps), size=n_terms, replace=False)
            reps = [reps[i] for i in sorted(idx)]
        coeffs: dict = {}
        for k in reps:
            c = complex(rng.normal(), rng.normal()) / 2
            coeffs[k] = c
            coeffs[tuple(-x for x in k)] = c.conjugate()
        if not zero_mean:
            coeffs[(0,) * dim] = float(rng.normal())
        return cls(dim, coeffs)

    # inspection ---------------------------------------------------------

    @property
    def modes(self) -> np.ndarray:
        return self._modes

    @property
    def values(self) -> np.ndarray:
        return self._coeffs

    @property
    def coeffs(self) -> dict:
        return {tuple(int(x) for x in k): complex(c) for k, c in zip(self._modes, self._coeffs)}

    def items(self):
        for k, c in zip(self._modes, self._coeffs):
            yield tuple(int(x) for x in k), complex(c)

    def __getitem__(self, k) -> complex:
        k = np.asarray(k, dtype=np.int64)
        hit = np.flatnonzero(np.all(self._modes == k, axis=1))
        return complex(self._coeffs[hit[0]]) if len(hit) else 0j

    def __len__(self) -> int:
        return len(self._coeffs)

    @property
    def degree(self) -> int:
        if len(self._modes) == 0:
            return 0
        return int(np.abs(self._modes).max())

    def is_zero(self) -> bool:
        return len(self._coeffs) == 0

    def is_real(self, atol: float = 1e-12) -> bool:
        lookup = self.coeffs
        for k, c in lookup.items():
            partner = lookup.get(tuple(-x for x in k), 0j)
            if abs(partner - c.conjugate()) > atol:
                return False
        return True

    def __repr__(self) -> str:
        terms = ", ".join(f"{k}: {c:.6g}" for k, c in self.items())
        return f"TrigPolynomial(dim={self.dim}, {{{terms}}})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return (
            self.dim == other.dim
            and self._modes.shape == other._modes.shape
            and np.array_equal(self._modes, other._modes)
            and np.array_equal(self._coeffs, other._coeffs)
        )

    __hash__ = None

    def allclose(self, other: "TrigPolynomial", atol: float = 1e-12) -> bool:
        return (self - other).sup_norm_estimate() <= atol

    # arithmetic ---------------------------------------------------------

    def _check(self, other: "TrigPolynomial"):
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TrigPolynomial.constant(self.dim, other)
        self._check(other)
        return TrigPolynomial._from_arrays(
            self.dim,
            np.concatenate([self._modes, other._modes]),
            np.concatenate([self._coeffs, other._coeffs]),
        )

    __radd__ = __add__

    def __neg__(self):
        return TrigPolynomial._from_arrays(self.dim, self._modes, -self._coeffs)

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: complex) -> "TrigPolynomial":
        return TrigPolynomial._from_arrays(self.dim, self._modes, self._coeffs * c)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        self._check(other)
        if self.is_zero() or other.is_zero():
            return TrigPolynomial.zero(self.dim)
        targets = (self._modes[:, None, :] + other._modes[None, :, :]).reshape(-1, self.dim)
        products = _cmul(self._coeffs[:, None], other._coeffs[None, :]).reshape(-1)
        return TrigPolynomial._from_arrays(self.dim, targets, products)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scale(1.0 / c)

    def conj(self) -> "TrigPolynomial":
        return TrigPolynomial._from_arrays(self.dim, -self._modes, np.conj(self._coeffs))

    def mode_multiply(self, symbol) -> "TrigPolynomial":
        """Multiply each coefficient by ``symbol(modes)`` (vectorized over the mode array).

        The multiplication is applied lazily, together with any other pending
        symbols, in an order that does not depend on the call sequence.
        """
        obj = TrigPolynomial.__new__(TrigPolynomial)
        sym = np.asarray(symbol(self._m), dtype=complex)
        obj._set(self.dim, self._m, self._c, self._pending + (sym,))
        return obj

    # evaluation ---------------------------------------------------------

    def __call__(self, points) -> np.ndarray:
        """Evaluate at points of shape (..., dim)."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise DimensionMismatch("point dimension mismatch")
        flat = pts.reshape(-1, self.dim)
        out = np.zeros(len(flat), dtype=complex)
        for k, c in zip(self._modes, self._coeffs):
            out += c * np.exp(TWO_PI * 1j * (flat @ k))
        return out.reshape(pts.shape[:-1])

    # norms --------------------------------------------------------------

    def sup_norm_estimate(self) -> float:
        return float(np.abs(self._coeffs).sum())

    def sobolev_norm(self, s: float) -> float:
        weight = (1.0 + (self._modes.astype(float) ** 2).sum(axis=1)) ** s
        return float(np.sqrt((weight * np.abs(self._coeffs) ** 2).sum()))


def add(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    return f + g


def mul(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    return f * g


def partial_derivative(f: TrigPolynomial, j: int) -> TrigPolynomial:
    if not 0 <= j < f.dim:
        raise IndexError(f"axis {j} out of range for dimension {f.dim}")
    return f.mode_multiply(lambda k: TWO_PI * 1j * k[:, j])


def directional_derivative(f: TrigPolynomial, v) -> TrigPolynomial:
    v = np.asarray(v, dtype=float)
    if v.shape != (f.dim,):
        raise DimensionMismatch(f"direction must have length {f.dim}")
    return f.mode_multiply(lambda k: TWO_PI * 1j * (k @ v))


def mean(f: TrigPolynomial) -> complex:
    return f[(0,) * f.dim]


def sup_norm_estimate(f: TrigPolynomial) -> float:
    return f.sup_norm_estimate()


def sobolev_norm(f: TrigPolynomial, s: float) -> float:
    return f.sobolev_norm(s)


def lattice_pairing(f: TrigPolynomial, g: TrigPolynomial) -> complex:
    """sum_k f_k g_{-k}"""
    gc = g.coeffs
    total = 0j
    for k, c in f.items():
        total += c * gc.get(tuple(-x for x in k), 0j)
    return total


def box_modes(dim: int, N: int) -> np.ndarray:
    """All modes with |k|_inf <= N, in lexicographic order."""
    side = np.arange(-N, N + 1)
    return np.stack(np.meshgrid(*([side] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
