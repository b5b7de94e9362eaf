"""Foliated de Rham complex for rank-two characteristic foliations on tori.

Forms are written in the constant leafwise coframe (eps^1, eps^2) dual to the
model's frame (E1, E2).  Because the frame is constant, each leafwise
derivative acts diagonally on Fourier modes with symbol
``D_j(k) = 2 pi i k.E_j`` and the top-degree equation ``d_F gamma = top`` can be
solved mode by mode.  Modes whose symbols vanish identically carry the top
foliated cohomology; modes whose symbols are nonzero but below the divisor
floor are reported as numerically resonant and never inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import TWO_PI, DimensionMismatch, TrigPolynomial, box_modes, directional_derivative
from .models import TORUS_MODELS, ModelError, ProductModel

DEFAULT_DIVISOR_FLOOR = 1e-9
# relative size below which a symbol is an exact (lattice) zero rather than a small divisor
EXACT_ZERO_RTOL = 64 * np.finfo(float).eps


class DegreeError(ValueError):
    pass


def torus_frame(model) -> np.ndarray:
    if isinstance(model, ProductModel):
        model = model.as_torus()
    if not isinstance(model, TORUS_MODELS):
        raise ModelError(f"{type(model).__name__} is not a torus model")
    return model.frame


@dataclass(frozen=True)
class LeafwiseForm:
    degree: int
    coeffs: tuple

    def __post_init__(self):
        expected = {0: 1, 1: 2, 2: 1}.get(self.degree)
        if expected is None:
            raise DegreeError(f"degree {self.degree} outside 0..2")
        if len(self.coeffs) != expected:
            raise DegreeError(f"degree {self.degree} needs {expected} coefficients")
        if len({c.dim for c in self.coeffs}) != 1:
            raise DimensionMismatch("coefficients must share the ambient dimension")

    @property
    def dim(self) -> int:
        return self.coeffs[0].dim

    def __add__(self, other: "LeafwiseForm") -> "LeafwiseForm":
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        return LeafwiseForm(self.degree, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "LeafwiseForm") -> "LeafwiseForm":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "LeafwiseForm":
        return LeafwiseForm(self.degree, tuple(a.scale(c) for a in self.coeffs))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.coeffs)

    def norm(self) -> float:
        return max(c.sup_norm_estimate() for c in self.coeffs)

    @classmethod
    def zero(cls, degree: int, dim: int) -> "LeafwiseForm":
        n = 2 if degree == 1 else 1
        return cls(degree, tuple(TrigPolynomial.zero(dim) for _ in range(n)))


def d_F(model, form: LeafwiseForm) -> LeafwiseForm:
    E = torus_frame(model)
    if len(E) != 2:
        raise ModelError("leafwise forms are implemented for rank-two foliations")
    if form.degree == 0:
        f = form.coeffs[0]
        return LeafwiseForm(1, (directional_derivative(f, E[0]), directional_derivative(f, E[1])))
    if form.degree == 1:
        a, b = form.coeffs
        return LeafwiseForm(2, (directional_derivative(b, E[0]) - directional_derivative(a, E[1]),))
    raise DegreeError("d_F of a top-degree form is not defined here")


def phi(model, f: TrigPolynomial) -> LeafwiseForm:
    """f times the leafwise Liouville volume (coefficient 1 in the stored coframe)."""
    return LeafwiseForm(2, (f,))


def leafwise_volume(model) -> LeafwiseForm:
    return phi(model, TrigPolynomial.constant(model.dim, 1.0))


def interior_hamiltonian_volume(model, f: TrigPolynomial) -> LeafwiseForm:
    """i_{X_f} (eps^1 ^ eps^2) = eps^1(X_f) eps^2 - eps^2(X_f) eps^1 = -(E1 f) eps^1 - (E2 f) eps^2."""
    E = torus_frame(model)
    return LeafwiseForm(2 - 1, (-directional_derivative(f, E[0]), -directional_derivative(f, E[1])))


def multiply(g: TrigPolynomial, form: LeafwiseForm) -> LeafwiseForm:
    return LeafwiseForm(form.degree, tuple(g * c for c in form.coeffs))


# ---------------------------------------------------------------------------
# solvers


@dataclass
class ObstructionReport:
    obstructed: list = field(default_factory=list)  # (mode, coefficient), symbols exactly zero
    resonant: list = field(default_factory=list)  # (mode, coefficient, divisor), 0 < divisor < floor
    smallest_divisor: float = math.inf
    divisor_histogram: dict = field(default_factory=dict)  # "1e-k" decade -> count
    divisor_floor: float = DEFAULT_DIVISOR_FLOOR

    @property
    def reliable(self) -> bool:
        return not self.resonant

    def to_dict(self) -> dict:
        return {
            "obstructed": [[list(k), [c.real, c.imag]] for k, c in self.obstructed],
            "resonant": [[list(k), [c.real, c.imag], d] for k, c, d in self.resonant],
            "smallest_divisor": None if math.isinf(self.smallest_divisor) else self.smallest_divisor,
            "divisor_histogram": dict(sorted(self.divisor_histogram.items())),
            "divisor_floor": self.divisor_floor,
            "reliable": self.reliable,
        }


def _histogram(divisors: np.ndarray) -> dict:
    if len(divisors) == 0:
        return {}
    decades = np.floor(np.log10(divisors)).astype(int)
    values, counts = np.unique(decades, return_counts=True)
    return {f"1e{int(v):+d}": int(c) for v, c in zip(values, counts)}


def _classify_symbols(symbols: np.ndarray, modes: np.ndarray, frame: np.ndarray, floor: float):
    """Split modes into solvable / exactly obstructed / numerically resonant.

    ``symbols`` has shape (n_modes, rank) and holds |D_j(k)|.
    """
    biggest = symbols.max(axis=1) if symbols.shape[1] else np.zeros(len(modes))
    scale = TWO_PI * np.abs(modes) @ np.abs(frame).sum(axis=0) if len(frame) else np.zeros(len(modes))
    exact_zero = biggest <= EXACT_ZERO_RTOL * np.maximum(scale, 1.0)
    resonant = ~exact_zero & (biggest < floor)
    solvable = ~exact_zero & ~resonant
    return biggest, solvable, exact_zero, resonant


def solve_top_primitive(model, top: LeafwiseForm, divisor_floor: float = DEFAULT_DIVISOR_FLOOR):
    """Invert d_F mode by mode on a degree-2 form.

    Returns ``(primitive, report)`` with ``d_F(primitive) + obstruction = top``
    where the obstruction is the part of ``top`` on the reported modes.
    """
    if top.degree != 2:
        raise DegreeError("solve_top_primitive expects a degree-2 form")
    E = torus_frame(model)
    if len(E) != 2:
        raise ModelError("solve_top_primitive is implemented for rank-two foliations")
    c = top.coeffs[0]
    modes, vals = c.modes, c.values
    D = TWO_PI * 1j * (modes @ E.T)  # (n, 2)
    absD = np.abs(D)
    biggest, solvable, exact_zero, resonant = _classify_symbols(absD, modes, E, divisor_floor)
    use_first = absD[:, 0] >= absD[:, 1]
    a_vals = np.zeros(len(vals), dtype=complex)
    b_vals = np.zeros(len(vals), dtype=complex)
    s1 = solvable & use_first
    s2 = solvable & ~use_first
    b_vals[s1] = vals[s1] / D[s1, 0]
    a_vals[s2] = -vals[s2] / D[s2, 1]
    dim = c.dim
    primitive = LeafwiseForm(
        1,
        (
            TrigPolynomial._from_arrays(dim, modes[s2], a_vals[s2]),
            TrigPolynomial._from_arrays(dim, modes[s1], b_vals[s1]),
        ),
    )
    report = ObstructionReport(
        obstructed=[(tuple(int(x) for x in modes[i]), complex(vals[i])) for i in np.flatnonzero(exact_zero)],
        resonant=[
            (tuple(int(x) for x in modes[i]), complex(vals[i]), float(biggest[i])) for i in np.flatnonzero(resonant)
        ],
        smallest_divisor=float(biggest[solvable].min()) if solvable.any() else math.inf,
        divisor_histogram=_histogram(biggest[solvable]),
        divisor_floor=divisor_floor,
    )
    return primitive, report


def obstruction_part(report: ObstructionReport, dim: int) -> TrigPolynomial:
    """The unsolved part of the input, obstructed and resonant modes together."""
    coeffs = {k: c for k, c in report.obstructed}
    coeffs.update({k: c for k, c, _ in report.resonant})
    return TrigPolynomial(dim, coeffs)


def solve_cohomological_equation(w, f: TrigPolynomial, divisor_floor: float = DEFAULT_DIVISOR_FLOOR):
    """Solve ``w . grad u = f`` on the modes with |2 pi k.w| >= divisor_floor."""
    w = np.asarray(w, dtype=float)
    if w.shape != (f.dim,):
        raise DimensionMismatch("direction length must equal the torus dimension")
    modes, vals = f.modes, f.values
    D = TWO_PI * 1j * (modes @ w)
    absD = np.abs(D)[:, None]
    biggest, solvable, exact_zero, resonant = _classify_symbols(absD, modes, w[None, :], divisor_floor)
    u = TrigPolynomial._from_arrays(f.dim, modes[solvable], vals[solvable] / D[solvable])
    report = ObstructionReport(
        obstructed=[(tuple(int(x) for x in modes[i]), complex(vals[i])) for i in np.flatnonzero(exact_zero)],
        resonant=[
            (tuple(int(x) for x in modes[i]), complex(vals[i]), float(biggest[i])) for i in np.flatnonzero(resonant)
        ],
        smallest_divisor=float(biggest[solvable].min()) if solvable.any() else math.inf,
        divisor_histogram=_histogram(biggest[solvable]),
        divisor_floor=divisor_floor,
    )
    return u, report


# ---------------------------------------------------------------------------
# dimension estimates


@dataclass
class HomologyReport:
    model_id: str
    truncation: int
    dim_estimate: int
    stable: bool
    basis: list  # obstructed-mode descriptors
    smallest_divisor: float
    normalization: str = ""
    half_truncation_dim: int | None = None
    reliable: bool = True
    resonant_count: int = 0
    divisor_floor: float = DEFAULT_DIVISOR_FLOOR
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.dim_estimate != len(self.basis):
            raise ValueError("dim estimate must equal the number of basis functionals")

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "truncation": self.truncation,
            "dim_estimate": self.dim_estimate,
            "half_truncation_dim": self.half_truncation_dim,
            "stable": self.stable,
            "reliable": self.reliable,
            "resonant_count": self.resonant_count,
            "basis": self.basis,
            "smallest_divisor": None if math.isinf(self.smallest_divisor) else self.smallest_divisor,
            "divisor_floor": self.divisor_floor,
            "normalization": self.normalization,
            "notes": list(self.notes),
        }


def mode_functional(k) -> str:
    k = tuple(int(x) for x in k)
    if not any(k):
        return "mean"
    return f"coefficient{list(k)}"


def _count_top(model, N: int, divisor_floor: float):
    E = torus_frame(model)
    modes = box_modes(model.dim, N)
    absD = np.abs(TWO_PI * (modes @ E.T))
    biggest, solvable, exact_zero, resonant = _classify_symbols(absD, modes, E, divisor_floor)
    return modes[exact_zero], int(resonant.sum()), float(biggest[solvable].min()) if solvable.any() else math.inf


def estimate_h_top_dim(model, N: int, divisor_floor: float = DEFAULT_DIVISOR_FLOOR) -> HomologyReport:
    """Count the modes |k|_inf <= N where phi(e_k) has no primitive.

    Each mode's leafwise complex is the Koszul complex of its symbol vector,
    so phi(e_k) is exact iff some leafwise symbol is nonzero.  The count is
    therefore a statement at truncation N; ``stable`` compares it with the
    count at ceil(N/2).
    """
    if N < 1:
        raise ValueError("truncation must be at least 1")
    obstructed, n_res, smallest = _count_top(model, N, divisor_floor)
    half = math.ceil(N / 2)
    obstructed_half, n_res_half, _ = _count_top(model, half, divisor_floor)
    dim = len(obstructed)
    return HomologyReport(
        model_id=getattr(model, "name", type(model).__name__),
        truncation=N,
        dim_estimate=dim,
        stable=dim == len(obstructed_half),
        basis=[mode_functional(k) for k in obstructed],
        smallest_divisor=smallest,
        normalization="Liouville volume = eps^1 ^ ... in the stored constant leafwise coframe",
        half_truncation_dim=len(obstructed_half),
        reliable=(n_res == 0 and n_res_half == 0),
        resonant_count=n_res,
        divisor_floor=divisor_floor,
        notes=["dimension counted at Fourier truncation; not a statement about the smooth category"],
    )


def casimir_count(model, N: int, divisor_floor: float = DEFAULT_DIVISOR_FLOOR) -> int:
    """dim ker(d_F) on functions at truncation N (modes killed by every leafwise derivative)."""
    obstructed, _, _ = _count_top(model, N, divisor_floor)
    return len(obstructed)
