"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import record_acceptance
from oracles import fd_bracket_grid, grid_values
from perfect_poisson.cli import RunConfig, gallery, run
from perfect_poisson.diophantine import from_quotients, min_divisor
from perfect_poisson.fourier import TrigPolynomial
from perfect_poisson.homology import (
    decompose_commutators,
    degree_table,
    kunneth_compose,
    kunneth_homology,
    modular_class,
    perfectness_verdict,
    top_poisson_cohomology_dim,
    zeroth_homology,
)
from perfect_poisson.leafwise import (
    LeafwiseForm,
    d_F,
    estimate_h_top_dim,
    solve_cohomological_equation,
)
from perfect_poisson.mapping_torus import (
    h2_vanishing_certificate,
    mt_bracket,
    random_equivariant,
    seam_constant,
)
from perfect_poisson.models import (
    GOLDEN,
    CosymplecticTorusModel,
    ProductModel,
    bracket,
    cat_mapping_torus,
    fibration_cosymplectic_t3,
    kronecker_cosymplectic_t3,
    symplectic_t2,
)

TORUS_MODELS = [symplectic_t2, fibration_cosymplectic_t3, kronecker_cosymplectic_t3]


def _silver_kronecker():
    a = math.sqrt(2.0) - 1.0
    return CosymplecticTorusModel(np.array([-a, 0.0, 1.0]), kronecker_cosymplectic_t3().eta,
                                  name="kronecker-cosymplectic-t3-silver")


def test_criterion_1_bracket_matches_finite_differences():
    worst = {}
    for make in TORUS_MODELS:
        model = make()
        rng = np.random.default_rng(2024)
        err = 0.0
        for _ in range(50):
            f = TrigPolynomial.random_real(model.dim, 6, rng, n_terms=6)
            g = TrigPolynomial.random_real(model.dim, 6, rng, n_terms=6)
            rest = rng.uniform(size=model.dim - 2)
            spectral = grid_values(bracket(model, f, g), 128, rest)
            fd = fd_bracket_grid(model.bivector, f, g, 128, rest)
            err = max(err, float(np.abs(spectral - fd).max()))
        worst[model.name] = err
    ok = max(worst.values()) <= 1e-6
    record_acceptance(1, ok, "max |spectral - FD| on 128^2 grids: "
                      + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def test_criterion_2_complex_identities():
    # inputs: degree <= 3, normalized to unit sup-norm estimate; Jacobi is roundoff-limited,
    # so its absolute size scales with |f||g||h| (2 pi degree)^4
    rng = np.random.default_rng(7)
    dd_exact, antisym_exact, jacobi, relative = True, True, {}, 0.0
    models = [m() for m in TORUS_MODELS] + [ProductModel(kronecker_cosymplectic_t3(), symplectic_t2(), name="kxt2")]
    for model in models:
        worst = 0.0
        for _ in range(5):
            f, g, h = (TrigPolynomial.random_real(model.dim, 3, rng, n_terms=4) for _ in range(3))
            f, g, h = (p.scale(1.0 / p.sup_norm_estimate()) for p in (f, g, h))
            if model.rank == 2 and not isinstance(model, ProductModel):
                dd = d_F(model, d_F(model, LeafwiseForm(0, (f,))))
                dd_exact &= dd.is_zero()
            antisym_exact &= (bracket(model, f, g) + bracket(model, g, f)).is_zero()
            terms = [bracket(model, f, bracket(model, g, h)), bracket(model, g, bracket(model, h, f)),
                     bracket(model, h, bracket(model, f, g))]
            cyc = terms[0] + terms[1] + terms[2]
            worst = max(worst, cyc.sup_norm_estimate())
            relative = max(relative, cyc.sup_norm_estimate() / max(t.sup_norm_estimate() for t in terms))
        jacobi[model.name] = worst
    cat = cat_mapping_torus()
    mt_worst = 0.0
    for seed in range(3):
        r = np.random.default_rng(seed)
        f, g, h = (random_equivariant(cat, 2, 64, 0, r) for _ in range(3))
        cyc = mt_bracket(f, mt_bracket(g, h)) + mt_bracket(g, mt_bracket(h, f)) + mt_bracket(h, mt_bracket(f, g))
        mt_worst = max(mt_worst, cyc.max_abs())
    ok = dd_exact and antisym_exact and max(jacobi.values()) <= 1e-10 and mt_worst <= 1e-6
    record_acceptance(2, ok, f"d_F d_F = 0 exact: {dd_exact}; antisymmetry exact: {antisym_exact}; "
                      f"Jacobi max {max(jacobi.values()):.1e} (torus, relative {relative:.1e}), "
                      f"{mt_worst:.1e} (mapping torus, G=64)")
    assert ok


def test_criterion_3_symplectic_torus_homology():
    model = symplectic_t2()
    dims_ok = all(
        (r := zeroth_homology(model, N)).dim_estimate == 1 and r.basis == ["mean"] for N in (4, 8, 16)
    )
    rng = np.random.default_rng(3)
    residuals = []
    for _ in range(20):
        f = TrigPolynomial.random_real(2, 6, rng, zero_mean=True)
        residuals.append(decompose_commutators(model, f).residual)
    unit = decompose_commutators(model, TrigPolynomial.constant(2, 1.0))
    unit_ok = unit.obstruction == 1 and unit.pairs == []
    ok = dims_ok and max(residuals) <= 1e-10 and unit_ok
    record_acceptance(3, ok, f"dim H_0 = 1 (mean) at N=4,8,16: {dims_ok}; max residual {max(residuals):.1e}; "
                      f"f=1 -> obstruction {unit.obstruction.real:g}, {len(unit.pairs)} pairs")
    assert ok


def test_criterion_4_mapping_torus_perfect():
    cat = cat_mapping_torus()
    cert = h2_vanishing_certificate(cat, N=8, G=64, trials=20, tol=1e-8)
    seam = seam_constant(cat, np.ones(64)).real
    seam_err = abs(seam + (math.sqrt(5.0) - 1.0) / 2.0)
    h0 = zeroth_homology(cat, 8, G=64, trials=20, tol=1e-8)
    verdict = perfectness_verdict(h0, modular_class(cat))
    ok = cert.passed and seam_err <= 1e-10 and h0.dim_estimate == 0 and verdict.status == "Perfect"
    record_acceptance(4, ok, f"certificate {cert.passed} (max residual {max(cert.residuals):.1e}); "
                      f"seam constant {seam:.13f} (err {seam_err:.1e}); dim H_0 {h0.dim_estimate}; {verdict.status}")
    assert ok


def test_criterion_5_modular_class():
    zero_ok = all(modular_class(m()).is_hamiltonian and modular_class(m()).obstruction == 0 for m in TORUS_MODELS)
    rep = modular_class(cat_mapping_torus())
    expected = math.log((3.0 + math.sqrt(5.0)) / 2.0)
    err = abs(rep.obstruction - expected)
    ok = zero_ok and not rep.is_hamiltonian and err <= 1e-8
    record_acceptance(5, ok, f"torus models unimodular: {zero_ok}; cat map obstruction {rep.obstruction:.12f} "
                      f"vs log lambda {expected:.12f} (err {err:.1e})")
    assert ok


def test_criterion_6_poisson_cohomology_duality():
    rows = []
    ok = True
    for make, expect in ((kronecker_cosymplectic_t3, lambda N: 1), (symplectic_t2, lambda N: 1),
                         (fibration_cosymplectic_t3, lambda N: 2 * N + 1)):
        model = make()
        for N in (4, 8):
            a = top_poisson_cohomology_dim(model, N).dim_estimate
            b = zeroth_homology(model, N).dim_estimate
            ok &= a == b == expect(N)
            rows.append(f"{model.name} N={N}: {a}/{b}")
    record_acceptance(6, ok, "top Poisson cohomology / dim H_0: " + "; ".join(rows))
    assert ok


def test_criterion_7_kunneth_products():
    K, T2, C = kronecker_cosymplectic_t3(), symplectic_t2(), cat_mapping_torus()
    N = 4
    composed = kunneth_compose(degree_table(K, N), degree_table(T2, N))
    direct = degree_table(ProductModel(K, T2), N)
    counts_ok = composed.dims == direct.dims and not composed.partial
    verdicts = {}
    for left, right in ((K, _silver_kronecker()), (K, T2), (C, T2), (K, C)):
        prod = ProductModel(left, right, name=f"{left.name} x {right.name}")
        table = kunneth_compose(degree_table(left, N), degree_table(right, N))
        table.model_id = prod.name
        verdicts[prod.name] = perfectness_verdict(kunneth_homology(table), modular_class(prod)).status
    ok = counts_ok and all(v == "Perfect" for v in verdicts.values())
    record_acceptance(7, ok, f"Kunneth = direct on Kronecker x T^2 {composed.dims}: {counts_ok}; verdicts "
                      + ", ".join(f"{k}: {v}" for k, v in verdicts.items()))
    assert ok


def test_criterion_8_diophantine_diagnostics():
    brute = min(abs(k1 + GOLDEN * k2) for k1 in range(-8, 9) for k2 in range(-8, 9) if (k1, k2) != (0, 0))
    md = min_divisor(GOLDEN, 8)
    md_ok = abs(md - brute) <= 1e-10 and abs(md - 0.0557) < 1e-4
    alpha = float(from_quotients([0, 1, 1, 10**11]))
    f = TrigPolynomial.cos_mode((-1, 2)) + TrigPolynomial.cos_mode((1, 1))
    u, report = solve_cohomological_equation(np.array([1.0, alpha]), f)
    flagged = {k for k, _, _ in report.resonant}
    not_inverted = all(u[k] == 0 for k in flagged)
    model = kronecker_cosymplectic_t3(alpha)
    h = estimate_h_top_dim(model, 2)
    verdict = perfectness_verdict(h, modular_class(model)).status
    ok = md_ok and (-1, 2) in flagged and not_inverted and not report.reliable and not h.reliable
    record_acceptance(8, ok, f"min_divisor(golden, 8) = {md:.12f} (oracle {brute:.12f}); resonant modes "
                      f"{sorted(flagged)} not inverted: {not_inverted}; estimate reliable: {h.reliable} ({verdict})")
    assert ok


def test_criterion_9_certificates_verify_from_file(tmp_path):
    names = {"symplectic-t2", "kronecker-cosymplectic-t3"}
    diffs = []
    for cfg in gallery():
        if cfg.name not in names:
            continue
        cfg = RunConfig.from_dict({**cfg.to_dict(), "analyses": ["decompose"], "decompose_samples": 5})
        path = tmp_path / f"{cfg.name}.json"
        path.write_text(json.dumps(run(cfg)))
        out = subprocess.run([sys.executable, "-m", "perfect_poisson", "verify-certificate", str(path)],
                             capture_output=True, text=True, check=False)
        assert out.returncode == 0, out.stderr
        diffs += [r["difference"] for r in json.loads(out.stdout)["certificates"]]
    ok = len(diffs) == 12 and max(diffs) <= 1e-12
    record_acceptance(9, ok, f"{len(diffs)} certificates re-verified from file; max |recomputed - stated| "
                      f"{max(diffs):.1e}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
