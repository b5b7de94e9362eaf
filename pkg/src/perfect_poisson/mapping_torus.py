"""Equivariant calculus on the cover of the mapping torus T^3_A.

Functions on T^3_A are functions ``F(m, t)`` on ``T^2 x R`` with
``F(A m, t + 1) = F(m, t)``.  Expanding in the fibre, ``F = sum_k c_k(t) e_k(m)``,
this becomes ``c_{A^T k}(t) = c_k(t + 1)``: characters are transported by
the transpose.  Leafwise objects that pick up a factor of the eigenvalue under
the gluing carry a *weight* ``w``::

    c_{A^T k}(t) = lam**w * c_k(t + 1)

Weight 0 are functions.  The leafwise coframe component ``nu`` dual to the
contracting direction ``V = v . grad`` has weight -1, so does the top
coefficient relative to ``nu ^ dt``.

Profiles ``c_k(t)`` are sampled on ``G`` equispaced nodes of [0, 1], both
ends included; the seam relation above is what ties the two ends of
neighbouring modes together.  The t-derivative is spectral along each
unrolled orbit by default; centred finite differences ("fd2", "fd4", "fd6")
take their ghost values from the same relation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .fourier import PRUNE_THRESHOLD, TWO_PI
from .models import MappingTorusModel

SEAM_TOL = 1e-8
ORBIT_STEP_BUDGET = 64
DEFAULT_DIVISOR_FLOOR = 1e-9

MIN_GRID = 16

# centred stencils for the optional finite-difference t-derivative
_FD_WEIGHTS = {
    "fd2": np.array([-1 / 2, 0.0, 1 / 2]),
    "fd4": np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]),
    "fd6": np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60]),
}


class MappingTorusSolverFailure(RuntimeError):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


class GridMismatch(ValueError):
    pass


def _box(N: int) -> np.ndarray:
    side = np.arange(-N, N + 1)
    return np.stack(np.meshgrid(side, side, indexing="ij"), axis=-1)  # (2N+1, 2N+1, 2)


def transport(model: MappingTorusModel, k, power: int = 1) -> np.ndarray:
    """Apply (A^T)^power to modes of shape (..., 2)."""
    k = np.asarray(k, dtype=np.int64)
    M = model.transport if power >= 0 else model.transport_inv
    for _ in range(abs(power)):
        k = k @ M.T
    return k


def _fourier_derivative(u: np.ndarray, length: float) -> np.ndarray:
    """Spectral derivative along axis 0 of samples of a `length`-periodic function."""
    n = u.shape[0]
    freq = TWO_PI * np.fft.fftfreq(n, d=length / n)
    if n % 2 == 0:
        freq[n // 2] = 0.0
    shape = (n,) + (1,) * (u.ndim - 1)
    return np.fft.ifft(1j * freq.reshape(shape) * np.fft.fft(u, axis=0), axis=0)


def _chains(model: MappingTorusModel, N: int) -> list:
    """Orbit chains covering the nonzero box modes: lists of (j, k) over a full j-range."""
    out = []
    for orb in orbit_decomposition(model, N):
        if orb.fixed:
            continue
        idx = orb.indexed()
        j0, j1 = idx[0][0], idx[-1][0]
        out.append([(j, tuple(int(x) for x in transport(model, orb.base, j))) for j in range(j0, j1 + 1)])
    return out


def _spectral_dt(f: "EquivariantFunction") -> np.ndarray:
    """t-derivative computed on the unrolled orbit lines.

    Along an orbit ``k_j = A'^j k_0`` the profiles glue into one function
    ``psi(s) = lam^{-j w} c_{k_j}(s - j)`` on the real line, compactly
    supported inside the box; it is differentiated spectrally on a zero-padded
    window.  The fixed mode is ``lam^{-w t}`` times a 1-periodic function.
    """
    model, N, G, w = f.model, f.N, f.G, f.weight
    lam = model.lam
    n = G - 1
    t = f.t
    out = np.zeros_like(f.coeffs)
    # fixed mode
    p = lam ** (w * t[:-1]) * f.coeffs[:-1, N, N]
    dp = _fourier_derivative(p, 1.0) - w * math.log(lam) * p
    d0 = lam ** (-w * t[:-1]) * dp
    out[:-1, N, N] = d0
    out[-1, N, N] = lam ** (-w) * d0[0]
    for chain in _chains(model, N):
        cells = len(chain)
        total = (cells + 2) * n  # one zero cell of padding on each side
        psi = np.zeros(total, dtype=complex)
        for c, (j, k) in enumerate(chain):
            if max(abs(k[0]), abs(k[1])) > N:
                continue
            psi[(c + 1) * n:(c + 2) * n] = lam ** (-j * w) * f.coeffs[:-1, k[0] + N, k[1] + N]
        dpsi = _fourier_derivative(psi, float(cells + 2))
        for c, (j, k) in enumerate(chain):
            if max(abs(k[0]), abs(k[1])) > N:
                continue
            out[:, k[0] + N, k[1] + N] = lam ** (j * w) * dpsi[(c + 1) * n:(c + 2) * n + 1]
    return out


class EquivariantFunction:
    """Mode profiles ``c_k(t)`` for |k|_inf <= N on a G-node t-grid, with a weight."""

    __slots__ = ("model", "coeffs", "weight", "scheme")

    def __init__(self, model: MappingTorusModel, coeffs: np.ndarray, weight: int = 0, scheme: str = "spectral"):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2] or coeffs.shape[1] % 2 != 1:
            raise ValueError("coefficients must have shape (G, 2N+1, 2N+1)")
        if scheme != "spectral" and scheme not in _FD_WEIGHTS:
            raise ValueError(f"unknown t-derivative scheme {scheme!r}")
        if coeffs.shape[0] < MIN_GRID:
            raise ValueError(f"t-grid needs at least {MIN_GRID} nodes")
        self.model = model
        self.coeffs = coeffs
        self.weight = int(weight)
        self.scheme = scheme

    # shape ----------------------------------------------------------------

    @property
    def G(self) -> int:
        return self.coeffs.shape[0]

    @property
    def N(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.G)

    @property
    def h(self) -> float:
        return 1.0 / (self.G - 1)

    @classmethod
    def zeros(cls, model, N: int, G: int, weight: int = 0) -> "EquivariantFunction":
        return cls(model, np.zeros((G, 2 * N + 1, 2 * N + 1), dtype=complex), weight)

    @classmethod
    def from_k0_profile(cls, model, profile, N: int, weight: int = 0) -> "EquivariantFunction":
        profile = np.asarray(profile, dtype=complex)
        out = cls.zeros(model, N, len(profile), weight)
        out.coeffs[:, N, N] = profile
        return out

    @classmethod
    def constant(cls, model, N: int, G: int, value: complex = 1.0) -> "EquivariantFunction":
        return cls.from_k0_profile(model, np.full(G, value, dtype=complex), N, 0)

    def mode(self, k) -> np.ndarray:
        k1, k2 = int(k[0]), int(k[1])
        N = self.N
        if max(abs(k1), abs(k2)) > N:
            return np.zeros(self.G, dtype=complex)
        return self.coeffs[:, k1 + N, k2 + N]

    def padded(self, N: int) -> "EquivariantFunction":
        if N < self.N:
            raise ValueError("cannot pad to a smaller box")
        d = N - self.N
        c = np.pad(self.coeffs, ((0, 0), (d, d), (d, d)))
        return EquivariantFunction(self.model, c, self.weight, self.scheme)

    def _compatible(self, other: "EquivariantFunction"):
        if other.model is not self.model and other.model.A.tolist() != self.model.A.tolist():
            raise GridMismatch("functions live on different mapping tori")
        if other.G != self.G:
            raise GridMismatch(f"t-grid sizes differ: {self.G} vs {other.G}")

    # seam and realness ----------------------------------------------------

    def _gather(self, modes: np.ndarray, node: int) -> np.ndarray:
        """Values c_k(t_node) for arbitrary modes (zero outside the box)."""
        N = self.N
        inside = np.all(np.abs(modes) <= N, axis=-1)
        out = np.zeros(modes.shape[:-1], dtype=complex)
        idx = modes[inside] + N
        out[inside] = self.coeffs[node, idx[:, 0], idx[:, 1]]
        return out

    def seam_mismatch(self) -> float:
        """max over modes of |c_{A'k}(0) - lam^w c_k(1)|, zero outside the box."""
        N = self.N
        box = _box(N)
        lam_w = self.model.lam ** self.weight
        fwd = transport(self.model, box, 1)
        err1 = np.abs(self._gather(fwd, 0) - lam_w * self.coeffs[-1])
        back = transport(self.model, box, -1)
        err2 = np.abs(self.coeffs[0] - lam_w * self._gather(back, self.G - 1))
        return float(max(err1.max(), err2.max()))

    def realness_mismatch(self) -> float:
        return float(np.abs(self.coeffs[:, ::-1, ::-1] - np.conj(self.coeffs)).max())

    # algebra --------------------------------------------------------------

    def __add__(self, other: "EquivariantFunction") -> "EquivariantFunction":
        self._compatible(other)
        if self.weight != other.weight:
            raise ValueError("cannot add functions of different weight")
        N = max(self.N, other.N)
        return EquivariantFunction(
            self.model, self.padded(N).coeffs + other.padded(N).coeffs, self.weight, self.scheme
        )

    def __neg__(self):
        return EquivariantFunction(self.model, -self.coeffs, self.weight, self.scheme)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: complex) -> "EquivariantFunction":
        return EquivariantFunction(self.model, self.coeffs * c, self.weight, self.scheme)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        self._compatible(other)
        n1, n2 = 2 * self.N + 1, 2 * other.N + 1
        size = n1 + n2 - 1
        fa = np.fft.fft2(self.coeffs, s=(size, size))
        fb = np.fft.fft2(other.coeffs, s=(size, size))
        c = np.fft.ifft2(fa * fb)
        return EquivariantFunction(self.model, c, self.weight + other.weight, self.scheme)

    __rmul__ = __mul__

    def lam_power(self, p: float) -> "EquivariantFunction":
        """Multiply by lam**(p t); shifts the weight by -p."""
        factor = self.model.lam ** (p * self.t)
        return EquivariantFunction(self.model, self.coeffs * factor[:, None, None], self.weight - int(p), self.scheme)

    def V(self) -> "EquivariantFunction":
        """Derivative along the contracting direction v; lowers the weight by one."""
        sym = TWO_PI * 1j * (_box(self.N) @ self.model.v)
        return EquivariantFunction(self.model, self.coeffs * sym[None], self.weight - 1, self.scheme)

    def _extended(self, depth: int) -> np.ndarray:
        """Profiles on nodes -depth .. G-1+depth, ghosts filled by equivariance."""
        N, G = self.N, self.G
        box = _box(N)
        lam = self.model.lam
        fwd = transport(self.model, box, 1)
        back = transport(self.model, box, -1)
        ext = np.zeros((G + 2 * depth,) + self.coeffs.shape[1:], dtype=complex)
        ext[depth:depth + G] = self.coeffs
        for s in range(1, depth + 1):
            # c_k(1 + s h) = lam^{-w} c_{A'k}(s h)
            ext[depth + G - 1 + s] = lam ** (-self.weight) * self._gather(fwd, s)
            # c_k(-s h) = lam^{w} c_{A'^{-1}k}(1 - s h)
            ext[depth - s] = lam ** self.weight * self._gather(back, G - 1 - s)
        return ext

    def dt(self) -> "EquivariantFunction":
        if self.scheme == "spectral":
            return EquivariantFunction(self.model, _spectral_dt(self), self.weight, self.scheme)
        w = _FD_WEIGHTS[self.scheme]
        depth = len(w) // 2
        ext = self._extended(depth)
        G = self.G
        out = np.zeros_like(self.coeffs)
        for j, wj in enumerate(w):
            if wj:
                out += wj * ext[j:j + G]
        return EquivariantFunction(self.model, out / self.h, self.weight, self.scheme)

    def truncated(self, N: int) -> "EquivariantFunction":
        if N >= self.N:
            return self
        d = self.N - N
        return EquivariantFunction(self.model, self.coeffs[:, d:-d, d:-d], self.weight, self.scheme)

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def to_dict(self) -> dict:
        nz = np.argwhere(np.abs(self.coeffs).max(axis=0) >= PRUNE_THRESHOLD)
        modes = []
        for i, j in nz:
            prof = self.coeffs[:, i, j]
            modes.append({"k": [int(i - self.N), int(j - self.N)], "re": prof.real.tolist(), "im": prof.imag.tolist()})
        return {"N": self.N, "G": self.G, "weight": self.weight, "modes": modes}


def mt_bracket(f: EquivariantFunction, g: EquivariantFunction) -> EquivariantFunction:
    """{f, g} = lam^{-t} (V f dt g - dt f V g)."""
    f._compatible(g)
    inner = f.V() * g.dt() - f.dt() * g.V()
    return inner.lam_power(-1)


def phi_mt(f: EquivariantFunction) -> EquivariantFunction:
    """Top coefficient of f times the Liouville form lam^t nu ^ dt."""
    if f.weight != 0:
        raise ValueError("phi takes a function (weight 0)")
    return f.lam_power(1)


def d_F_mt(a: EquivariantFunction, b: EquivariantFunction) -> EquivariantFunction:
    """d_F(a nu + b dt) = (V b - dt a) nu ^ dt."""
    return b.V() - a.dt()


# ---------------------------------------------------------------------------
# orbits


@dataclass
class LatticeOrbit:
    base: tuple
    forward: list  # [(j, k)] for j >= 1 inside the extended box
    backward: list  # [(j, k)] for j <= -1 inside the extended box
    fixed: bool = False

    def modes(self) -> list:
        return [k for _, k in reversed(self.backward)] + [self.base] + [k for _, k in self.forward]

    def indexed(self) -> list:
        return list(reversed(self.backward)) + [(0, self.base)] + list(self.forward)


def _walk(model, k0, direction: int, N_ext: int, max_steps: int) -> list:
    """Orbit points inside |k|_inf <= N_ext, stopping once the orbit has provably escaped.

    The Euclidean norm squared along an orbit is a sum of a constant and two
    exponentials in j, hence convex; once it exceeds the circumscribed radius
    and is increasing the orbit cannot come back.
    """
    out = []
    k = np.asarray(k0, dtype=np.int64)
    prev = float(k @ k)
    radius2 = 2.0 * N_ext * N_ext
    for j in range(1, max_steps + 1):
        k = transport(model, k, direction)
        n2 = float(k @ k)
        if np.abs(k).max() <= N_ext:
            out.append((direction * j, (int(k[0]), int(k[1]))))
        if n2 > radius2 and n2 > prev:
            break
        prev = n2
    return out


def orbit_decomposition(model: MappingTorusModel, N: int, N_ext: int | None = None,
                        max_steps: int = ORBIT_STEP_BUDGET) -> list:
    """Partition the modes |k|_inf <= N into A^T-orbits (lexicographic representatives)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    N_ext = N if N_ext is None else max(N_ext, N)
    seen = set()
    orbits = []
    side = range(-N, N + 1)
    for k1 in side:
        for k2 in side:
            k0 = (k1, k2)
            if k0 in seen:
                continue
            if k0 == (0, 0):
                orbits.append(LatticeOrbit(k0, [], [], fixed=True))
                seen.add(k0)
                continue
            orb = LatticeOrbit(k0, _walk(model, k0, 1, N_ext, max_steps), _walk(model, k0, -1, N_ext, max_steps))
            for k in orb.modes():
                seen.add(k)
            orbits.append(orb)
    return orbits


def _segment(model, k0, N: int) -> tuple[int, int]:
    """Contiguous j-range around 0 with A'^j k0 inside the box."""
    hi = 0
    k = np.asarray(k0)
    while True:
        k = transport(model, k, 1)
        if np.abs(k).max() > N:
            break
        hi += 1
    lo = 0
    k = np.asarray(k0)
    while True:
        k = transport(model, k, -1)
        if np.abs(k).max() > N:
            break
        lo -= 1
    return lo, hi


# Gaussian width relative to the half-length of the orbit segment; at the
# segment ends the profile is below exp(-40.5) ~ 3e-18
BUMP_WIDTH = 1.0 / 9.0


def _bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * (x / BUMP_WIDTH) ** 2)


def random_equivariant(model: MappingTorusModel, N: int, G: int, weight: int, rng: np.random.Generator,
                       n_orbits: int = 3, zero_mode: bool = True, amplitude: float = 1.0) -> EquivariantFunction:
    """Random real equivariant profile set of the given weight.

    Each orbit is seeded by a smooth compactly supported profile psi(s) on
    the unrolled line and folded back: ``c_{k_j}(tau) = lam^{j w} psi(tau + j)``.
    The k = 0 profile is ``lam^{-w t} p(t)`` with p a random real 1-periodic
    trigonometric polynomial.
    """
    out = EquivariantFunction.zeros(model, N, G, weight)
    t = out.t
    lam = model.lam
    used = set()
    candidates = [(a, b) for a in range(-N, N + 1) for b in range(-N, N + 1) if (a, b) != (0, 0)]
    order = rng.permutation(len(candidates))
    picked = 0
    for idx in order:
        if picked >= n_orbits:
            break
        k0 = candidates[idx]
        if k0 in used:
            continue
        lo, hi = _segment(model, k0, N)
        ks = [tuple(int(x) for x in transport(model, k0, j)) for j in range(lo, hi + 1)]
        if any(k in used or (-k[0], -k[1]) in used for k in ks) or (-k0[0], -k0[1]) in ks:
            continue
        s_lo, s_hi = lo, hi + 1
        centre, radius = (s_lo + s_hi) / 2, (s_hi - s_lo) / 2
        phase = complex(rng.normal(), rng.normal()) * amplitude / math.sqrt(2)
        freq = rng.uniform(-1.0, 1.0)
        for j, k in zip(range(lo, hi + 1), ks):
            s = t + j
            prof = lam ** (j * weight) * phase * _bump((s - centre) / radius) * np.exp(1j * freq * s)
            out.coeffs[:, k[0] + N, k[1] + N] += prof
            out.coeffs[:, -k[0] + N, -k[1] + N] += np.conj(prof)
            used.add(k)
            used.add((-k[0], -k[1]))
        picked += 1
    if zero_mode:
        c = rng.normal(size=3) * amplitude
        p = c[0] + c[1] * np.cos(TWO_PI * t) + c[2] * np.sin(TWO_PI * t)
        out.coeffs[:, N, N] += lam ** (-weight * t) * p
    return out


# ---------------------------------------------------------------------------
# top-degree solver


def seam_constant(model: MappingTorusModel, k0_profile: np.ndarray) -> float:
    """a_0(0) = -(int_0^1 f_0) / (lam - 1): the unique start of -a_0' = f_0 with a_0(1) = lam a_0(0)."""
    t = np.linspace(0.0, 1.0, len(k0_profile))
    integral = simpson(np.asarray(k0_profile, dtype=complex), x=t)
    return -integral / (model.lam - 1.0)


def _twisted_dt_matrix(G: int, twist: float, scheme: str) -> np.ndarray:
    """d/dt on the nodes 0..G-2 of a profile with c(t + 1) = twist * c(t)."""
    n = G - 1
    h = 1.0 / n
    if scheme == "spectral":
        t = np.arange(n) * h
        log_tw = math.log(twist)
        Dp = _fourier_derivative(np.eye(n), 1.0).real
        return (twist ** t)[:, None] * (Dp + log_tw * np.eye(n)) * (twist ** (-t))[None, :]
    w = _FD_WEIGHTS[scheme]
    depth = len(w) // 2
    D = np.zeros((n, n))
    for i in range(n):
        for off, wj in zip(range(-depth, depth + 1), w):
            if not wj:
                continue
            idx, factor = i + off, 1.0
            if idx >= n:
                idx, factor = idx - n, twist
            elif idx < 0:
                idx, factor = idx + n, 1.0 / twist
            D[i, idx] += wj * factor / h
    return D


@dataclass
class MTSolveResult:
    a: EquivariantFunction
    b: EquivariantFunction
    residual: float
    report: dict = field(default_factory=dict)


def solve_mt_top_primitive(F: EquivariantFunction, tol: float = 1e-8,
                           divisor_floor: float = DEFAULT_DIVISOR_FLOOR) -> MTSolveResult:
    """Find (a, b) with V b - dt a = F, F the weight -1 coefficient of a top leafwise form.

    Modes k != 0 are inverted along V: the divisor ``2 pi k.v`` shrinks by
    1/lam per forward step of the orbit while the input is transported with
    the compensating weight, so ``b_k = F_k / (2 pi i k.v)`` is consistent
    across the seam.  The k = 0 mode has V-symbol zero and is integrated in t
    against the twisted seam ``a_0(1) = lam a_0(0)``; that boundary condition
    is what makes the fixed mode solvable, unlike on a torus.
    """
    if F.weight != -1:
        raise ValueError("top coefficients relative to nu ^ dt have weight -1")
    model, N, G = F.model, F.N, F.G
    sym = TWO_PI * 1j * (_box(N) @ model.v)
    absd = np.abs(sym)
    support = np.abs(F.coeffs).max(axis=0) >= PRUNE_THRESHOLD
    support[N, N] = False
    bad = support & (absd < divisor_floor)
    if bad.any():
        ks = [[int(i - N), int(j - N)] for i, j in np.argwhere(bad)]
        raise MappingTorusSolverFailure("divisor below floor on supported modes", {"modes": ks})
    b = np.zeros_like(F.coeffs)
    mask = support
    b[:, mask] = F.coeffs[:, mask] / sym[mask][None, :]
    a = np.zeros_like(F.coeffs)
    # k = 0: -D a_0 = F_0 on nodes 0..G-2, with a_0(1) = lam^{-w} a_0(0)
    twist = model.lam ** (-F.weight)
    D = _twisted_dt_matrix(G, twist, F.scheme)
    a0 = np.linalg.solve(-D, F.coeffs[:-1, N, N])
    a[:-1, N, N] = a0
    a[-1, N, N] = twist * a0[0]
    A_ = EquivariantFunction(model, a, -1, F.scheme)
    B_ = EquivariantFunction(model, b, 0, F.scheme)
    residual = (d_F_mt(A_, B_) - F).max_abs()

    orbit_rows = []
    for orb in orbit_decomposition(model, N):
        if orb.fixed:
            continue
        ks = orb.modes()
        if not any(support[k[0] + N, k[1] + N] for k in ks):
            continue
        divs = [float(absd[k[0] + N, k[1] + N]) for k in ks]
        ratios = [divs[i] / divs[i + 1] for i in range(len(divs) - 1)]
        orbit_rows.append({"base": list(orb.base), "length": len(ks), "min_divisor": min(divs),
                           "divisor_ratio": float(np.mean(ratios)) if ratios else None})
    report = {
        "residual": residual,
        "tol": tol,
        "converged": residual <= tol,
        "seam_constant_closed_form": complex(seam_constant(model, F.coeffs[:, N, N])),
        "a0_start_discrete": complex(a[0, N, N]),
        "input_seam_mismatch": F.seam_mismatch(),
        "output_seam_mismatch": max(A_.seam_mismatch(), B_.seam_mismatch()),
        "orbits": orbit_rows,
        "orbit_extension_steps": 0,
        "smallest_divisor": float(absd[mask].min()) if mask.any() else None,
        "scheme": F.scheme,
    }
    return MTSolveResult(A_, B_, residual, report)


@dataclass
class H2Certificate:
    passed: bool
    N: int
    G: int
    trials: int
    tol: float
    seed: int
    residuals: list
    seam_mismatches: list
    unit_seam_constant: float
    lam: float
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "N": self.N,
            "G": self.G,
            "trials": self.trials,
            "tol": self.tol,
            "seed": self.seed,
            "max_residual": max(self.residuals) if self.residuals else None,
            "residuals": self.residuals,
            "seam_mismatches": self.seam_mismatches,
            "unit_seam_constant": self.unit_seam_constant,
            "lambda": self.lam,
            "failures": self.failures,
            "notes": self.notes,
        }


def h2_vanishing_certificate(model: MappingTorusModel, N: int = 8, G: int = 64, trials: int = 20,
                             tol: float = 1e-8, seed: int = 0, seam_tol: float = SEAM_TOL,
                             include_unit: bool = True) -> H2Certificate:
    """Solve d_F gamma = F for `trials` random top forms and record the residuals.

    The first trial (when ``include_unit``) is phi(1), the Liouville form
    itself, which on a torus would be the obstruction.
    """
    rng = np.random.default_rng(seed)
    residuals, seams, failures = [], [], []
    for i in range(trials):
        if i == 0 and include_unit:
            F = phi_mt(EquivariantFunction.constant(model, N, G))
        else:
            F = random_equivariant(model, N, G, -1, rng)
        try:
            res = solve_mt_top_primitive(F, tol)
        except MappingTorusSolverFailure as exc:
            failures.append({"trial": i, "error": str(exc), **exc.report})
            continue
        residuals.append(res.residual)
        seam = max(res.report["input_seam_mismatch"], res.report["output_seam_mismatch"])
        seams.append(seam)
        if res.residual > tol or seam > seam_tol:
            failures.append({"trial": i, "residual": res.residual, "seam": seam})
    unit = float(seam_constant(model, np.ones(G)).real)
    return H2Certificate(
        passed=not failures,
        N=N, G=G, trials=trials, tol=tol, seed=seed,
        residuals=residuals, seam_mismatches=seams,
        unit_seam_constant=unit, lam=model.lam, failures=failures,
        notes=["truncation/tolerance statement on the discretized leafwise complex"],
    )
