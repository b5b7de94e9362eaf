"""Zeroth Poisson homology, commutator certificates, modular class and verdicts.

H_0 = C^inf / {C^inf, C^inf} is computed through the leafwise Liouville
volume: f is a sum of brackets exactly when f times the volume is leafwise
exact, so dim H_0 is the dimension of top foliated cohomology.  Everything
here is a statement at Fourier truncation N (and t-grid G on the mapping
torus); reports carry those parameters.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import TWO_PI, TrigPolynomial, box_modes, mean
from .leafwise import (
    DEFAULT_DIVISOR_FLOOR,
    EXACT_ZERO_RTOL,
    HomologyReport,
    casimir_count,
    estimate_h_top_dim,
    mode_functional,
)
from .mapping_torus import (
    EquivariantFunction,
    SEAM_TOL,
    MappingTorusSolverFailure,
    _twisted_dt_matrix,
    h2_vanishing_certificate,
)
from .models import (
    TORUS_MODELS,
    ConstantTorusModel,
    CosymplecticTorusModel,
    MappingTorusModel,
    ModelError,
    ProductModel,
    as_constant_bivector,
    bracket,
    build_model,
)

PERFECT = "Perfect"
NOT_PERFECT = "NotPerfect"
INCONCLUSIVE = "Inconclusive"


def _model_id(model) -> str:
    return getattr(model, "name", type(model).__name__)


# ---------------------------------------------------------------------------
# zeroth homology


def zeroth_homology(model, N: int, divisor_floor: float = DEFAULT_DIVISOR_FLOOR, *, G: int = 64,
                    trials: int = 20, tol: float = 1e-8, seed: int = 0,
                    seam_tol: float = SEAM_TOL) -> HomologyReport:
    """dim H_0 at truncation N, via the top foliated cohomology.

    Torus models (and products of them) count the modes of phi(e_k) with no
    leafwise primitive.  The mapping torus runs the H^2 vanishing certificate;
    a failed certificate raises :class:`MappingTorusSolverFailure`.  Products
    involving a mapping torus go through the Kunneth composition of the two
    top degrees.
    """
    if isinstance(model, MappingTorusModel):
        return _mapping_torus_homology(model, N, G, trials, tol, seed, seam_tol)
    if isinstance(model, ProductModel) and not model.is_torus():
        opts = dict(G=G, trials=trials, tol=tol, seed=seed, seam_tol=seam_tol)
        left = zeroth_homology(model.left, N, divisor_floor, **opts)
        right = zeroth_homology(model.right, N, divisor_floor, **opts)
        return _product_top_report(_model_id(model), left, right)
    report = estimate_h_top_dim(model, N, divisor_floor)
    report.notes.append("H_0 identified with top foliated cohomology via f -> f * leafwise volume")
    return report


def _mapping_torus_homology(model: MappingTorusModel, N: int, G: int, trials: int, tol: float,
                            seed: int, seam_tol: float) -> HomologyReport:
    cert = h2_vanishing_certificate(model, N=N, G=G, trials=trials, tol=tol, seed=seed, seam_tol=seam_tol)
    if not cert.passed:
        raise MappingTorusSolverFailure("H^2 vanishing certificate failed", cert.to_dict())
    return HomologyReport(
        model_id=_model_id(model),
        truncation=N,
        dim_estimate=0,
        stable=True,
        basis=[],
        smallest_divisor=_mt_smallest_divisor(model, N),
        normalization="Liouville form lam^t nu ^ dt; nu dual to the contracting eigendirection",
        half_truncation_dim=0,
        reliable=True,
        divisor_floor=DEFAULT_DIVISOR_FLOOR,
        notes=[
            f"certificate: {trials} trials at N={N}, G={G}, tol={tol}, max residual {max(cert.residuals):.3e}",
            f"k=0 seam constant for f = 1: {cert.unit_seam_constant!r}",
            "truncation/tolerance statement on the discretized leafwise complex",
        ],
    )


def _mt_smallest_divisor(model: MappingTorusModel, N: int) -> float:
    modes = box_modes(2, N)
    d = np.abs(TWO_PI * (modes @ model.v))
    d = d[np.any(modes != 0, axis=1)]
    return float(d.min())


def _product_top_report(model_id: str, left: HomologyReport, right: HomologyReport) -> HomologyReport:
    basis = [f"{a} (x) {b}" for a in left.basis for b in right.basis]
    half = None
    if left.half_truncation_dim is not None and right.half_truncation_dim is not None:
        half = left.half_truncation_dim * right.half_truncation_dim
    return HomologyReport(
        model_id=model_id,
        truncation=min(left.truncation, right.truncation),
        dim_estimate=len(basis),
        stable=(half == len(basis)) if half is not None else False,
        basis=basis,
        smallest_divisor=min(left.smallest_divisor, right.smallest_divisor),
        normalization="product of the factor Liouville volumes",
        half_truncation_dim=half,
        reliable=left.reliable and right.reliable,
        resonant_count=left.resonant_count + right.resonant_count,
        divisor_floor=max(left.divisor_floor, right.divisor_floor),
        notes=[f"Kunneth composition of top degrees: {left.model_id} x {right.model_id}"],
    )


# ---------------------------------------------------------------------------
# commutator certificates


@dataclass
class CommutatorCertificate:
    model: dict  # descriptor
    f: TrigPolynomial
    pairs: list  # [(g, h)]
    obstruction: complex
    residual: float
    divisor_floor: float = DEFAULT_DIVISOR_FLOOR

    def to_dict(self) -> dict:
        return {
            "kind": "commutator-certificate",
            "model": self.model,
            "f": poly_to_list(self.f),
            "obstruction": [self.obstruction.real, self.obstruction.imag],
            "pairs": [{"g": poly_to_list(g), "h": poly_to_list(h)} for g, h in self.pairs],
            "residual": self.residual,
            "divisor_floor": self.divisor_floor,
        }


def poly_to_list(f: TrigPolynomial) -> dict:
    return {"dim": f.dim, "terms": [[list(map(int, k)), [c.real, c.imag]] for k, c in f.items()]}


def poly_from_list(data: dict) -> TrigPolynomial:
    return TrigPolynomial(int(data["dim"]), {tuple(k): complex(re, im) for k, (re, im) in data["terms"]})


def _rank_two_torus(model):
    if isinstance(model, ProductModel) and model.is_torus():
        model = model.as_torus()
    if not isinstance(model, TORUS_MODELS) or model.rank != 2:
        raise ModelError("commutator decomposition needs a rank-two torus model")
    return model


def decompose_commutators(model, f: TrigPolynomial, N: int | None = None,
                          divisor_floor: float = DEFAULT_DIVISOR_FLOOR) -> CommutatorCertificate:
    """Write f - mean(f) as a sum of brackets {g_i, h_i}, one pair per mode.

    For a mode c the pair is (s e_e, e_{c-e}) with e the first positive unit
    vector, in lexicographic order, whose pairing e^T P c clears the divisor
    floor; {e_e, e_{c-e}} = -4 pi^2 (e^T P c) e_c fixes the scale s.  Modes
    where P c vanishes are the obstructed ones; on a unimodular rank-two model
    with dense leaves that is only the constant mode.
    """
    torus = _rank_two_torus(model)
    if N is not None and f.degree > N:
        raise ValueError(f"input degree {f.degree} exceeds truncation {N}")
    P = torus.bivector
    dim = torus.dim
    units = [tuple(int(i == j) for i in range(dim)) for j in reversed(range(dim))]  # lex order
    pairs = []
    obstruction = complex(mean(f))
    for k, c in f.items():
        if not any(k):
            continue
        kv = np.asarray(k, dtype=float)
        Pk = P @ kv
        scale = TWO_PI * np.abs(kv).sum() * np.abs(P).max()
        if np.abs(Pk).max() <= EXACT_ZERO_RTOL * max(scale, 1.0):
            raise ModelError(f"mode {list(k)} is obstructed; only the mean is supported as an obstruction")
        for e in units:
            pairing = float(np.asarray(e, dtype=float) @ Pk)
            symbol = -4.0 * math.pi ** 2 * pairing
            if abs(symbol) >= divisor_floor:
                break
        else:
            raise ModelError(f"mode {list(k)} is resonant below the divisor floor {divisor_floor}")
        g = TrigPolynomial.monomial(e, c / symbol)
        h = TrigPolynomial.monomial(tuple(a - b for a, b in zip(k, e)), 1.0)
        pairs.append((g, h))
    total = TrigPolynomial.constant(dim, obstruction)
    for g, h in pairs:
        total = total + bracket(torus, g, h)
    residual = (f - total).sup_norm_estimate()
    return CommutatorCertificate(model.descriptor(), f, pairs, obstruction, residual, divisor_floor)


def independent_bracket(P: np.ndarray, g: TrigPolynomial, h: TrigPolynomial) -> TrigPolynomial:
    """{g, h} from the monomial rule {e_a, e_b} = (2 pi i)^2 a^T P b e_{a+b}, summed in a dict."""
    out: dict = {}
    for a, ga in g.items():
        for b, hb in h.items():
            s = -4.0 * math.pi ** 2 * float(np.asarray(a, float) @ P @ np.asarray(b, float))
            if s == 0.0:
                continue
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0.0) + s * ga * hb
    return TrigPolynomial(g.dim, out)


def verify_certificate(data: dict) -> dict:
    """Recompute a certificate's residual from its serialized form only."""
    model = build_model(data["model"])
    P = as_constant_bivector(model)
    f = poly_from_list(data["f"])
    obstruction = complex(*data["obstruction"])
    total = TrigPolynomial.constant(f.dim, obstruction)
    pair_sums = []
    for pair in data["pairs"]:
        br = independent_bracket(P, poly_from_list(pair["g"]), poly_from_list(pair["h"]))
        pair_sums.append(br)
        total = total + br
    residual = (f - total).sup_norm_estimate()
    commutator_mean = sum((complex(mean(b)) for b in pair_sums), 0j)
    stated = float(data["residual"])
    return {
        "stated_residual": stated,
        "recomputed_residual": residual,
        "difference": abs(residual - stated),
        "commutator_mean": abs(commutator_mean),
        "pairs": len(pair_sums),
    }


# ---------------------------------------------------------------------------
# modular class


@dataclass
class ModularReport:
    model_id: str
    volume: str
    field: str
    is_hamiltonian: bool
    obstruction: float
    tol: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "volume": self.volume,
            "modular_field": self.field,
            "is_hamiltonian": self.is_hamiltonian,
            "unimodular": self.is_hamiltonian,
            "obstruction": self.obstruction,
            "tol": self.tol,
            "notes": list(self.notes),
        }


def _volume_label(volume) -> str:
    if volume is None:
        return "standard"
    if isinstance(volume, (int, float)):
        if not volume > 0:
            raise ValueError("volume form must be positive")
        return f"{float(volume)!r} * standard"
    if isinstance(volume, str):
        return volume
    raise ValueError(f"unsupported volume descriptor {volume!r}")


def modular_class(model, volume=None, *, N: int = 4, G: int = 64, tol: float = 1e-8) -> ModularReport:
    """Modular field f -> div_vol(X_f) and whether it is Hamiltonian.

    ``volume`` is None (the standard coordinate volume) or a positive
    constant multiple of it.  For constant bivectors the divergence of every
    Hamiltonian field vanishes.  On the mapping torus, with bracket
    lam^{-t}(V f dt g - dt f V g) and volume dx dy dt, the modular field is
    -(log lam) lam^{-t} V; matching it with X_g forces V g = 0 and
    dt g_0 = log lam on the fixed mode, and periodicity of g_0 fails by the
    integral of the right-hand side.
    """
    label = _volume_label(volume)
    if isinstance(model, ProductModel):
        left = modular_class(model.left, None, N=N, G=G, tol=tol)
        right = modular_class(model.right, None, N=N, G=G, tol=tol)
        obstruction = math.hypot(left.obstruction, right.obstruction)
        return ModularReport(
            model_id=_model_id(model),
            volume=label,
            field=f"({left.field}) + ({right.field})",
            is_hamiltonian=left.is_hamiltonian and right.is_hamiltonian,
            obstruction=obstruction,
            tol=tol,
            notes=["product volume; modular field is the sum of the factor fields"],
        )
    if isinstance(model, TORUS_MODELS):
        P = model.bivector
        # div(X_f) = sum_j d_j (sum_i P_ij d_i f) = sum_ij P_ij d_i d_j f = 0 by antisymmetry
        field_coeff = float(np.abs(P + P.T).max())
        return ModularReport(
            model_id=_model_id(model),
            volume=label if volume is not None else _torus_volume_name(model),
            field="0",
            is_hamiltonian=field_coeff <= tol,
            obstruction=field_coeff,
            tol=tol,
            notes=["constant bivector and constant volume"],
        )
    if isinstance(model, MappingTorusModel):
        return _mapping_torus_modular(model, label, N, G, tol)
    raise ModelError(f"no modular class for {type(model).__name__}")


def _torus_volume_name(model) -> str:
    if isinstance(model, CosymplecticTorusModel):
        return "theta ^ eta"
    if isinstance(model, ConstantTorusModel) and model.rank == model.dim:
        return "symplectic Liouville volume"
    return "standard"


def _mapping_torus_modular(model: MappingTorusModel, label: str, N: int, G: int, tol: float) -> ModularReport:
    log_lam = model.log_lam
    # required dt g on the fixed mode, as a weight-0 profile
    rhs = EquivariantFunction.constant(model, N, G, log_lam)
    r0 = rhs.coeffs[:, N, N]
    D = _twisted_dt_matrix(G, 1.0, rhs.scheme)
    # periodic d/dt has the constants as kernel; its range is the zero-mean profiles
    n = G - 1
    r = r0[:-1]
    mean_r = complex(np.mean(r))
    g0, *_ = np.linalg.lstsq(D, r - mean_r, rcond=None)
    solved = float(np.abs(D @ g0 - (r - mean_r)).max())
    obstruction = float(mean_r.real)
    return ModularReport(
        model_id=_model_id(model),
        volume=label if label != "standard" else "dx ^ dy ^ dt",
        field="-(log lam) lam^{-t} V",
        is_hamiltonian=abs(obstruction) <= tol,
        obstruction=obstruction,
        tol=tol,
        notes=[
            f"X_g = modular field requires dt g_0 = log lam = {log_lam!r} with g_0 periodic",
            f"obstruction is the mean of dt g_0 over one period; zero-mean remainder solved to {solved:.1e} on {n} nodes",
        ],
    )


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class PerfectnessVerdict:
    status: str
    justification: str
    inputs: dict

    def to_dict(self) -> dict:
        return {"status": self.status, "justification": self.justification, "inputs": dict(self.inputs)}


def decide(dim: int, half_dim: int | None, stable: bool, reliable: bool, unimodular: bool) -> tuple[str, str]:
    """The decision table; a pure function of its arguments."""
    if not reliable:
        return INCONCLUSIVE, "small divisors below the floor were not inverted; dimension estimate unreliable"
    if dim >= 2 and (half_dim is None or half_dim >= 2):
        return NOT_PERFECT, (
            "dim H_0 >= 2 at this and half truncation: the commutators plus constants have codimension >= 1 "
            "(derived from the definition of perfectness; codimension argument)"
        )
    if not stable:
        return INCONCLUSIVE, "truncation-unstable dimension estimate"
    if dim == 0:
        return PERFECT, "H_0 = 0: every function is a sum of brackets"
    if dim == 1 and unimodular:
        return PERFECT, "unimodular with dim H_0 = 1"
    return INCONCLUSIVE, "dim H_0 = 1 without unimodularity; no rule applies"


def perfectness_verdict(homology: HomologyReport, modular: ModularReport) -> PerfectnessVerdict:
    if homology.model_id != modular.model_id:
        raise ValueError(f"reports for different models: {homology.model_id!r} vs {modular.model_id!r}")
    status, why = decide(homology.dim_estimate, homology.half_truncation_dim, homology.stable,
                         homology.reliable, modular.is_hamiltonian)
    inputs = {
        "dim_H0": homology.dim_estimate,
        "half_truncation_dim": homology.half_truncation_dim,
        "stable": homology.stable,
        "reliable": homology.reliable,
        "unimodular": modular.is_hamiltonian,
        "truncation": homology.truncation,
        "divisor_floor": homology.divisor_floor,
    }
    return PerfectnessVerdict(status, why, inputs)


# ---------------------------------------------------------------------------
# degree tables and Kunneth


@dataclass
class DegreeTable:
    """Leafwise cohomology dimensions by degree; None marks a missing entry."""

    model_id: str
    top_degree: int
    dims: dict  # degree -> int | None
    truncation: int
    half_dims: dict = field(default_factory=dict)
    top_basis: list = field(default_factory=list)
    reliable: bool = True
    partial: list = field(default_factory=list)  # degrees with missing inputs

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "top_degree": self.top_degree,
            "dims": {str(k): v for k, v in sorted(self.dims.items())},
            "half_truncation_dims": {str(k): v for k, v in sorted(self.half_dims.items())},
            "truncation": self.truncation,
            "reliable": self.reliable,
            "partial_degrees": list(self.partial),
        }


def degree_table(model, N: int, divisor_floor: float = DEFAULT_DIVISOR_FLOOR, **mt_options) -> DegreeTable:
    """Degree-indexed leafwise cohomology at truncation N.

    For constant frames each mode's complex is the Koszul complex of its
    symbol vector, acyclic unless every symbol vanishes, where it is the
    full exterior algebra; so dim H^p = (number of such modes) * C(r, p).
    Degree 0 is the Casimir count.  For the mapping torus only degrees 0
    (constants) and 2 (certificate) are available.
    """
    if isinstance(model, MappingTorusModel):
        top = zeroth_homology(model, N, divisor_floor, **mt_options)
        return DegreeTable(_model_id(model), 2, {0: 1, 1: None, 2: top.dim_estimate}, N,
                           half_dims={0: 1, 1: None, 2: 0}, top_basis=[], reliable=True, partial=[1])
    if isinstance(model, ProductModel) and not model.is_torus():
        left = degree_table(model.left, N, divisor_floor, **mt_options)
        right = degree_table(model.right, N, divisor_floor, **mt_options)
        out = kunneth_compose(left, right)
        out.model_id = _model_id(model)
        return out
    r = model.rank
    top = estimate_h_top_dim(model, N, divisor_floor)
    count, half = top.dim_estimate, top.half_truncation_dim
    dims = {p: count * math.comb(r, p) for p in range(r + 1)}
    dims[0] = casimir_count(model, N, divisor_floor)
    return DegreeTable(
        _model_id(model), r, dims, N,
        half_dims={p: half * math.comb(r, p) for p in range(r + 1)},
        top_basis=list(top.basis), reliable=top.reliable,
    )


def _convolve(a: dict, b: dict, top: int):
    out, missing = {}, []
    for n in range(top + 1):
        total, ok = 0, True
        for p in range(n + 1):
            x, y = a.get(p), b.get(n - p)
            if p not in a or (n - p) not in b:
                continue  # degree outside a factor's range contributes nothing
            if x is None or y is None:
                # a known zero on the other side still determines the term
                if (x == 0) or (y == 0):
                    continue
                ok = False
                break
            total += x * y
        out[n] = total if ok else None
        if not ok:
            missing.append(n)
    return out, missing


def kunneth_compose(left: DegreeTable, right: DegreeTable) -> DegreeTable:
    """dim H^n(product) = sum_{p+q=n} dim H^p(left) dim H^q(right)."""
    top = left.top_degree + right.top_degree
    dims, missing = _convolve(left.dims, right.dims, top)
    half, _ = _convolve(left.half_dims, right.half_dims, top)
    basis = [f"{a} (x) {b}" for a in left.top_basis for b in right.top_basis]
    return DegreeTable(
        f"{left.model_id} x {right.model_id}", top, dims,
        min(left.truncation, right.truncation), half_dims=half, top_basis=basis,
        reliable=left.reliable and right.reliable, partial=missing,
    )


def kunneth_homology(table: DegreeTable) -> HomologyReport:
    """Top-degree entry of a composed table as a zeroth-homology report."""
    dim = table.dims.get(table.top_degree)
    if dim is None:
        raise ValueError("top-degree entry is missing")
    basis = table.top_basis if len(table.top_basis) == dim else [f"product class {i}" for i in range(dim)]
    half = table.half_dims.get(table.top_degree)
    return HomologyReport(
        model_id=table.model_id,
        truncation=table.truncation,
        dim_estimate=dim,
        stable=half == dim,
        basis=basis,
        smallest_divisor=math.inf,
        normalization="product of the factor Liouville volumes",
        half_truncation_dim=half,
        reliable=table.reliable,
        notes=["Kunneth composition of factor degree tables"],
    )


# ---------------------------------------------------------------------------
# top Poisson cohomology


def wedge_matrix(u: np.ndarray, p: int) -> np.ndarray:
    """Matrix of w -> u ^ w from Lambda^p to Lambda^{p+1} in the sorted-index bases."""
    m = len(u)
    src = list(itertools.combinations(range(m), p))
    dst = {c: i for i, c in enumerate(itertools.combinations(range(m), p + 1))}
    M = np.zeros((len(dst), len(src)), dtype=complex)
    for j, I in enumerate(src):
        for a in range(m):
            if a in I:
                continue
            sign = (-1) ** sum(1 for i in I if i < a)
            M[dst[tuple(sorted(I + (a,)))], j] += sign * u[a]
    return M


def top_poisson_cohomology_dim(model, N: int, divisor_floor: float = DEFAULT_DIVISOR_FLOOR) -> HomologyReport:
    """Top-degree Lichnerowicz cohomology of a constant bivector at truncation N.

    With pi constant, d_pi(e_k X) = -e_k (u_k ^ X) for constant multivectors
    X, where u_k = 2 pi i P k is the Hamiltonian field of e_k up to the factor.
    Each mode block is exterior multiplication by u_k, and the top cokernel is
    dim Lambda^m minus the rank of Lambda^{m-1} -> Lambda^m.
    """
    if isinstance(model, ProductModel):
        if not model.is_torus():
            raise ModelError("Poisson cohomology needs a constant bivector")
        model = model.as_torus()
    if not isinstance(model, TORUS_MODELS):
        raise ModelError(f"{type(model).__name__} has no constant bivector")
    if N < 1:
        raise ValueError("truncation must be at least 1")

    P = model.bivector
    m = model.dim
    # wedge_matrix is linear in u: W(u) = sum_a u_a W(e_a)
    W_units = np.stack([wedge_matrix(np.eye(m)[a], m - 1) for a in range(m)], axis=-1)

    def count(n):
        modes = box_modes(m, n)
        u = TWO_PI * 1j * (modes @ P.T)
        W = np.einsum("ija,na->nij", W_units, u)
        s = np.linalg.svd(W, compute_uv=False).max(axis=-1)
        scale = TWO_PI * (np.abs(modes) @ np.abs(P).sum(axis=0))
        exact = s <= EXACT_ZERO_RTOL * np.maximum(scale, 1.0)
        resonant = ~exact & (s < divisor_floor)
        solvable = ~exact & ~resonant
        basis = [mode_functional(k) for k in modes[exact]]
        smallest = float(s[solvable].min()) if solvable.any() else math.inf
        return basis, int(resonant.sum()), smallest

    basis, resonant, smallest = count(N)
    half_basis, half_res, _ = count(math.ceil(N / 2))
    return HomologyReport(
        model_id=_model_id(model),
        truncation=N,
        dim_estimate=len(basis),
        stable=len(basis) == len(half_basis),
        basis=basis,
        smallest_divisor=smallest,
        normalization="top multivector field d_1 ^ ... ^ d_m",
        half_truncation_dim=len(half_basis),
        reliable=resonant == 0 and half_res == 0,
        resonant_count=resonant,
        divisor_floor=divisor_floor,
        notes=["Lichnerowicz differential assembled mode by mode; top-degree cokernel"],
    )
