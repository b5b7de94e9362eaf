"""Regular Poisson structures on tori and on the hyperbolic mapping torus.

Three families are supported:

* :class:`ConstantTorusModel` -- a constant antisymmetric bivector on T^m;
* :class:`CosymplecticTorusModel` -- constant closed forms (theta, eta) on
  T^{2n+1}, converted to the corank-one bivector whose leaves are ker(theta);
* :class:`MappingTorusModel` -- the mapping torus of a hyperbolic matrix in
  SL(2, Z), foliated by the eigenline field times the circle direction.

:class:`ProductModel` pairs any two of these.

Bracket convention throughout: ``{f, g} = sum_ij P_ij d_i f d_j g``, so that
``X_f(g) = {f, g}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fourier import TWO_PI, DimensionMismatch, TrigPolynomial, partial_derivative

RANK_RTOL = 1e-10
VOLUME_MIN = 1e-12


class ModelError(ValueError):
    """Raised when a model descriptor cannot be built at all."""


# ---------------------------------------------------------------------------
# linear algebra helpers


def numerical_rank(P: np.ndarray) -> int:
    s = np.linalg.svd(P, compute_uv=False)
    if len(s) == 0 or s[0] == 0:
        return 0
    return int((s > RANK_RTOL * s[0]).sum())


def _row_reduced_basis(M: np.ndarray, rank: int) -> np.ndarray:
    """Reduced row echelon basis (rows) of the row space of M, with partial pivoting."""
    R = np.array(M, dtype=float)
    rows, cols = R.shape
    scale = np.abs(R).max() or 1.0
    pivot_row = 0
    for c in range(cols):
        if pivot_row == rows:
            break
        p = pivot_row + int(np.argmax(np.abs(R[pivot_row:, c])))
        if abs(R[p, c]) <= RANK_RTOL * scale:
            continue
        R[[pivot_row, p]] = R[[p, pivot_row]]
        R[pivot_row] /= R[pivot_row, c]
        for r in range(rows):
            if r != pivot_row:
                R[r] -= R[r, c] * R[pivot_row]
        pivot_row += 1
    basis = R[:rank]
    basis[np.abs(basis) < 1e-15] = 0.0
    return basis


def pfaffian(M: np.ndarray) -> float:
    n = M.shape[0]
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0
    total = 0.0
    rest = list(range(1, n))
    for idx, j in enumerate(rest):
        if M[0, j] == 0:
            continue
        others = [r for r in rest if r != j]
        total += (-1) ** idx * M[0, j] * pfaffian(M[np.ix_(others, others)])
    return total


def leafwise_frame(P: np.ndarray) -> np.ndarray:
    """Constant frame (rows) of the image of P.

    Rows are the reduced row echelon basis of image(P).  In rank two the
    second vector is rescaled so that ``P = E1 E2^T - E2 E1^T``; the Liouville
    volume is then exactly ``eps^1 ^ eps^2`` in the dual coframe.
    """
    rank = numerical_rank(P)
    if rank == 0:
        return np.zeros((0, P.shape[0]))
    E = _row_reduced_basis(P.T, rank)
    if rank == 2:
        M = np.outer(E[0], E[1]) - np.outer(E[1], E[0])
        s = float((P * M).sum() / (M * M).sum())
        E = E.copy()
        E[1] *= s
    return E


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True, eq=False)
class ConstantTorusModel:
    bivector: np.ndarray
    name: str = "constant-torus"

    def __post_init__(self):
        P = np.array(self.bivector, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ModelError("bivector must be a square matrix")
        P.setflags(write=False)
        object.__setattr__(self, "bivector", P)
        frame = leafwise_frame(P)
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    family = "constant-torus"

    @property
    def dim(self) -> int:
        return self.bivector.shape[0]

    @property
    def rank(self) -> int:
        return numerical_rank(self.bivector)

    def descriptor(self) -> dict:
        return {"family": self.family, "name": self.name, "bivector": self.bivector.tolist()}

    def validate(self) -> list[CheckResult]:
        P = self.bivector
        out = [CheckResult("antisymmetric", bool(np.array_equal(P, -P.T)), "P == -P^T")]
        r = self.rank
        out.append(CheckResult("even-rank", r % 2 == 0 and r > 0, f"rank {r}"))
        if r > 0:
            E = self.frame
            span_ok = numerical_rank(np.vstack([E, P.T])) == r
            out.append(CheckResult("frame-spans-image", span_ok and len(E) == r))
            if r == 2:
                M = np.outer(E[0], E[1]) - np.outer(E[1], E[0])
                err = float(np.abs(M - P).max())
                out.append(CheckResult("frame-liouville-normalized", err <= 1e-12, f"|E1^E2 - P| = {err:.2e}"))
        return [c for c in out if not c.ok]


@dataclass(frozen=True, eq=False)
class CosymplecticTorusModel:
    """Cosymplectic pair on T^{2n+1}: theta a covector, eta an antisymmetric matrix."""

    theta: np.ndarray
    eta: np.ndarray
    name: str = "cosymplectic-torus"

    family = "cosymplectic-torus"

    def __post_init__(self):
        th = np.array(self.theta, dtype=float)
        eta = np.array(self.eta, dtype=float)
        if th.ndim != 1 or eta.shape != (len(th), len(th)):
            raise ModelError("theta must be a vector and eta a matching square matrix")
        if len(th) % 2 != 1:
            raise ModelError("cosymplectic models live in odd dimension")
        th.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "eta", eta)
        P = self._derive_bivector()
        P.setflags(write=False)
        object.__setattr__(self, "bivector", P)
        frame = leafwise_frame(P)
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    @property
    def dim(self) -> int:
        return len(self.theta)

    @property
    def rank(self) -> int:
        return self.dim - 1

    def volume_coefficient(self) -> float:
        """Coefficient of theta ^ eta^n / n! on dx_1 ^ ... ^ dx_m."""
        m = self.dim
        B = np.zeros((m + 1, m + 1))
        B[0, 1:] = self.theta
        B[1:, 0] = -self.theta
        B[1:, 1:] = self.eta
        return pfaffian(B)

    def _derive_bivector(self) -> np.ndarray:
        th = self.theta
        if not np.any(th):
            return np.zeros((self.dim, self.dim))
        # orthonormal basis of ker(theta)
        _, _, vt = np.linalg.svd(th[None, :])
        K = vt[1:].T
        H = K.T @ self.eta @ K
        if abs(np.linalg.det(H)) < VOLUME_MIN:
            return np.zeros((self.dim, self.dim))
        Q = -np.linalg.inv(H)
        P = K @ Q @ K.T
        P = 0.5 * (P - P.T)
        P[np.abs(P) < 1e-15] = 0.0
        return P

    def descriptor(self) -> dict:
        return {"family": self.family, "name": self.name, "theta": self.theta.tolist(), "eta": self.eta.tolist()}

    def validate(self) -> list[CheckResult]:
        out = []
        eta = self.eta
        out.append(CheckResult("eta-antisymmetric", bool(np.array_equal(eta, -eta.T))))
        vol = self.volume_coefficient()
        out.append(CheckResult("volume-form", abs(vol) > VOLUME_MIN, f"theta^eta^n/n! = {vol:.6g}"))
        P = self.bivector
        if abs(vol) > VOLUME_MIN:
            out.append(
                CheckResult(
                    "image-in-ker-theta",
                    float(np.abs(self.theta @ P).max()) <= 1e-12,
                    "theta(P xi) = 0",
                )
            )
            out.append(CheckResult("rank", numerical_rank(P) == self.dim - 1, f"rank {numerical_rank(P)}"))
        return [c for c in out if not c.ok]


@dataclass(frozen=True, eq=False)
class MappingTorusModel:
    """Mapping torus T^3_A = T^2 x R / (m, t) ~ (A m, t + 1).

    ``lam`` is the eigenvalue of A of modulus > 1.  The leaf direction ``v``
    is the unit eigenvector of the *contracting* eigenvalue ``1/lam``, and the
    gluing-invariant bivector on the cover is ``lam**(-t) v ^ d/dt``.
    Fourier modes are transported by ``A^T`` (pullback of characters).
    """

    A: np.ndarray
    name: str = "mapping-torus"

    family = "mapping-torus"

    def __post_init__(self):
        A = np.array(self.A)
        if A.shape != (2, 2):
            raise ModelError("A must be 2x2")
        if not np.all(np.asarray(A, dtype=float) == np.round(np.asarray(A, dtype=float))):
            raise ModelError("A must have integer entries")
        A = np.asarray(np.round(np.asarray(A, dtype=float)), dtype=np.int64)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        tr = int(A[0, 0] + A[1, 1])
        disc = tr * tr - 4
        if disc > 0:
            lam = (tr + math.copysign(math.sqrt(disc), tr)) / 2.0
            mu = 1.0 / lam
        else:
            lam = mu = float("nan")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "v", self._eigvec(mu))
        object.__setattr__(self, "v_unstable", self._eigvec(lam))
        At = A.T.copy()
        At.setflags(write=False)
        object.__setattr__(self, "transport", At)
        inv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]], dtype=np.int64).T
        inv.setflags(write=False)
        object.__setattr__(self, "transport_inv", inv)

    def _eigvec(self, ev: float) -> np.ndarray:
        if not np.isfinite(ev):
            return np.array([np.nan, np.nan])
        a, b = float(self.A[0, 0]), float(self.A[0, 1])
        c, d = float(self.A[1, 0]), float(self.A[1, 1])
        # (A - ev) v = 0; use the better-conditioned row
        if abs(b) + abs(a - ev) >= abs(c) + abs(d - ev):
            v = np.array([b, ev - a])
        else:
            v = np.array([ev - d, c])
        v = v / np.linalg.norm(v)
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = -v
        return v

    dim = 3
    rank = 2

    @property
    def log_lam(self) -> float:
        return math.log(abs(self.lam))

    @property
    def slope(self) -> float:
        """Slope of the leaf direction in the torus fibre."""
        return float(self.v[1] / self.v[0])

    def descriptor(self) -> dict:
        return {"family": self.family, "name": self.name, "A": self.A.tolist()}

    def validate(self) -> list[CheckResult]:
        A = self.A
        det = int(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
        tr = int(A[0, 0] + A[1, 1])
        out = [
            CheckResult("det-one", det == 1, f"det A = {det}"),
            CheckResult("hyperbolic", abs(tr) > 2, f"trace A = {tr}"),
            # trace < -2 glues v to -v; the weight calculus here assumes lam > 0
            CheckResult("positive-eigenvalues", tr > 2 or abs(tr) <= 2, f"trace A = {tr}"),
        ]
        if abs(tr) > 2:
            Af = A.astype(float)
            err_s = float(np.abs(Af @ self.v - self.mu * self.v).max())
            err_u = float(np.abs(Af @ self.v_unstable - self.lam * self.v_unstable).max())
            out.append(CheckResult("eigenvector-contracting", err_s <= 1e-12, f"|Av - v/lam| = {err_s:.2e}"))
            out.append(CheckResult("eigenvector-expanding", err_u <= 1e-12, f"|Au - lam u| = {err_u:.2e}"))
            out.append(CheckResult("lambda-expanding", abs(self.lam) > 1, f"lambda = {self.lam}"))
            Av = Af @ self.v
            cross = abs(Av[0] * self.v[1] - Av[1] * self.v[0])
            out.append(CheckResult("line-field-invariant", cross <= 1e-12, "A v parallel to v"))
        return [c for c in out if not c.ok]

    def bivector_factor(self, t) -> np.ndarray:
        return np.asarray(self.lam, dtype=float) ** (-np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class ProductModel:
    left: object
    right: object
    name: str = "product"

    family = "product"

    @property
    def dim(self) -> int:
        return self.left.dim + self.right.dim

    @property
    def rank(self) -> int:
        return self.left.rank + self.right.rank

    def descriptor(self) -> dict:
        return {"family": self.family, "name": self.name, "left": self.left.descriptor(), "right": self.right.descriptor()}

    def validate(self) -> list[CheckResult]:
        out = [CheckResult(f"left:{c.name}", c.ok, c.detail) for c in self.left.validate()]
        out += [CheckResult(f"right:{c.name}", c.ok, c.detail) for c in self.right.validate()]
        return out

    def is_torus(self) -> bool:
        return all(isinstance(m, TORUS_MODELS) or (isinstance(m, ProductModel) and m.is_torus())
                   for m in (self.left, self.right))

    def as_torus(self) -> ConstantTorusModel:
        """Flatten a product of torus models into one constant bivector."""
        if not self.is_torus():
            raise ModelError("product involves a mapping torus; no flat torus form")
        P1 = as_constant_bivector(self.left)
        P2 = as_constant_bivector(self.right)
        P = np.zeros((self.dim, self.dim))
        P[: len(P1), : len(P1)] = P1
        P[len(P1):, len(P1):] = P2
        return ConstantTorusModel(P, name=f"{self.name} (flattened)")


TORUS_MODELS = (ConstantTorusModel, CosymplecticTorusModel)


def as_constant_bivector(model) -> np.ndarray:
    if isinstance(model, TORUS_MODELS):
        return model.bivector
    if isinstance(model, ProductModel):
        return model.as_torus().bivector
    raise ModelError(f"{type(model).__name__} has no constant bivector")


def validate(model) -> list[CheckResult]:
    return model.validate()


# ---------------------------------------------------------------------------
# brackets on torus models


def _torus(model):
    if isinstance(model, ProductModel):
        return model.as_torus()
    if isinstance(model, TORUS_MODELS):
        return model
    raise ModelError(f"bracket on {type(model).__name__} needs EquivariantFunction inputs; use mapping_torus.mt_bracket")


def bracket(model, f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    """{f, g} = sum_{i<j} P_ij (d_i f d_j g - d_j f d_i g)."""
    model = _torus(model)
    if f.dim != model.dim or g.dim != model.dim:
        raise DimensionMismatch(f"model dimension {model.dim}, got {f.dim} and {g.dim}")
    P = model.bivector
    df = [partial_derivative(f, i) for i in range(model.dim)]
    dg = [partial_derivative(g, i) for i in range(model.dim)]
    total = TrigPolynomial.zero(model.dim)
    for i in range(model.dim):
        for j in range(i + 1, model.dim):
            if P[i, j] == 0:
                continue
            total = total + (df[i] * dg[j] - df[j] * dg[i]).scale(P[i, j])
    return total


def hamiltonian_field_apply(model, f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    """X_f(g); equal to {f, g} and to -X_g(f)."""
    return bracket(model, f, g)


def hamiltonian_vector_field(model, f: TrigPolynomial) -> list[TrigPolynomial]:
    """Components of X_f in the coordinate frame: (X_f)^j = sum_i P_ij d_i f."""
    model = _torus(model)
    P = model.bivector
    df = [partial_derivative(f, i) for i in range(model.dim)]
    comps = []
    for j in range(model.dim):
        c = TrigPolynomial.zero(model.dim)
        for i in range(model.dim):
            if P[i, j]:
                c = c + df[i].scale(P[i, j])
        comps.append(c)
    return comps


def monomial_bracket_symbol(P: np.ndarray, a, b) -> complex:
    """{e_a, e_b} = (2 pi i)^2 a^T P b e_{a+b}."""
    return (TWO_PI * 1j) ** 2 * float(np.asarray(a, float) @ P @ np.asarray(b, float))


# ---------------------------------------------------------------------------
# descriptor parsing


def _num(x) -> float:
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def _matrix(rows) -> np.ndarray:
    return np.array([[_num(x) for x in row] for row in rows], dtype=float)


def build_model(desc: dict):
    family = desc.get("family")
    name = desc.get("name", family)
    if family == "constant-torus":
        return ConstantTorusModel(_matrix(desc["bivector"]), name=name)
    if family == "cosymplectic-torus":
        return CosymplecticTorusModel(np.array([_num(x) for x in desc["theta"]]), _matrix(desc["eta"]), name=name)
    if family == "mapping-torus":
        rows = desc["A"]
        for row in rows:
            for x in row:
                if isinstance(x, float) and not x.is_integer():
                    raise ModelError("mapping-torus matrix must be integral")
        return MappingTorusModel(np.array([[int(_num(x)) for x in row] for row in rows]), name=name)
    if family == "product":
        return ProductModel(build_model(desc["left"]), build_model(desc["right"]), name=name)
    raise ModelError(f"unknown model family {family!r}")


# ---------------------------------------------------------------------------
# gallery constructors

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def symplectic_t2() -> ConstantTorusModel:
    return ConstantTorusModel(np.array([[0.0, 1.0], [-1.0, 0.0]]), name="symplectic-t2")


def _dxdy3() -> np.ndarray:
    eta = np.zeros((3, 3))
    eta[0, 1], eta[1, 0] = 1.0, -1.0
    return eta


def fibration_cosymplectic_t3() -> CosymplecticTorusModel:
    return CosymplecticTorusModel(np.array([0.0, 0.0, 1.0]), _dxdy3(), name="fibration-cosymplectic-t3")


def kronecker_cosymplectic_t3(alpha: float = GOLDEN) -> CosymplecticTorusModel:
    """theta = dz - alpha dx, eta = dx ^ dy; leaves spanned by d_x + alpha d_z and d_y."""
    return CosymplecticTorusModel(np.array([-alpha, 0.0, 1.0]), _dxdy3(), name="kronecker-cosymplectic-t3")


def cat_mapping_torus() -> MappingTorusModel:
    return MappingTorusModel(np.array([[2, 1], [1, 1]]), name="mapping-torus-cat")
