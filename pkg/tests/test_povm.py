"""Projector effects, their reduction, and the commutation structure."""

import itertools
import math

import numpy as np
import pytest

from dpsqkd import fock
from dpsqkd.fock import FockOperator, FockVector
from dpsqkd.optics import InterferometerConfig, fock_unitary
from dpsqkd.povm import (E2_PATTERN, E3_PATTERN, all_click_patterns,
                         build_e2_e3, build_projector_effects,
                         conjugated_commutator_norm, detection_registry,
                         pattern_diagonal, pattern_index, reduce_effect,
                         reduced_effect_set, signal_registry, t_term,
                         t_term_numeric)

# frozen by the pre-build dense oracle (multinomial-expansion route)
COMM_SILENT_C3 = 0.154605219372170
COMM_SILENT_C4 = 0.154605603393748
COMM_MARGINAL_C3 = 0.193111115979741
COMM_SILENT_C2 = 0.154580929198511
COMM_MARGINAL_C2 = 0.186778649145374


def closed_form_e2_e3(cutoff):
    """Test-local independent construction of the two explicit effects."""
    reg = signal_registry(2, cutoff)
    vac = np.zeros(reg.dim, dtype=complex)
    vac[0] = 1.0
    a0 = fock.ladder_operator(reg, (0, 0), "creation").matrix
    a1 = fock.ladder_operator(reg, (0, 1), "creation").matrix
    a2 = fock.ladder_operator(reg, (0, 2), "creation").matrix

    def one(raiser):
        E = np.zeros((reg.dim, reg.dim), dtype=complex)
        v = vac.copy()
        for n in range(1, 2 * cutoff + 1):
            v = raiser @ v
            if not np.any(v):
                break
            E += np.outer(v, v.conj()) / (4 ** n * math.factorial(n))
        return E

    return one(a0 + a1), one(a1 - a2), reg


def test_effect_family_structure():
    effects = build_projector_effects(2, 3)
    mats = [effects.effect(p).matrix for p in effects.patterns]
    assert len(mats) == 16
    eye = np.eye(effects.registry.dim)
    assert np.max(np.abs(sum(mats) - eye)) <= 1e-10
    for m in mats:
        assert np.max(np.abs(m @ m - m)) <= 1e-12
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            assert np.max(np.abs(mats[i] @ mats[j])) <= 1e-12
            comm = np.linalg.norm(mats[i] @ mats[j] - mats[j] @ mats[i])
            assert comm <= 1e-12


def test_all_vacuum_effect_fixes_vacuum():
    effects = build_projector_effects(2, 3)
    g1 = effects.effect(effects.patterns[0])
    vac = fock.vacuum(effects.registry)
    assert abs(fock.expectation(vac, g1).real - 1.0) < 1e-14


def test_pattern_indexing():
    pats = all_click_patterns(2)
    assert pats[0] == ((False, False), (False, False))
    assert pats[-1] == ((True, True), (True, True))
    assert pattern_index(pats[0]) == 0
    assert pattern_index(pats[-1]) == 15
    assert len({pattern_index(p) for p in pats}) == 16


def test_reduce_identity_effect_gives_identity():
    cfg = InterferometerConfig.compensated()
    U = fock_unitary(cfg, 2, 2)
    eye_det = fock.identity(detection_registry(1, 2))
    E = reduce_effect(eye_det, U)
    assert np.max(np.abs(E.matrix - np.eye(E.registry.dim))) < 1e-10


def test_probability_consistency_random_states():
    # <psi|E_j|psi> equals the joint-state expectation of the conjugated
    # effect, for 20 random signal states
    cfg = InterferometerConfig.compensated()
    U = fock_unitary(cfg, 2, 2)
    wreg = U.registry
    effects = build_projector_effects(1, 2)
    rng = np.random.default_rng(17)
    vac1 = np.zeros(9)
    vac1[0] = 1.0
    for p in effects.patterns:
        E = reduce_effect(effects.effect(p), U)
        G = fock.embed(effects.effect(p), wreg)
        M = U.dagger().matrix @ G.matrix @ U.matrix
        for _ in range(5):
            psi = rng.normal(size=9) + 1j * rng.normal(size=9)
            psi /= np.linalg.norm(psi)
            joint = np.kron(psi, vac1)
            assert abs(psi.conj() @ E.matrix @ psi
                       - joint.conj() @ M @ joint) < 1e-10


def test_reduced_family_complete_and_positive():
    cfg = InterferometerConfig.compensated()
    U = fock_unitary(cfg, 2, 2)
    effects = build_projector_effects(1, 2)
    total = None
    for p in effects.patterns:
        E = reduce_effect(effects.effect(p), U)
        assert np.linalg.eigvalsh(E.matrix)[0] >= -1e-10
        total = E.matrix if total is None else total + E.matrix
    assert np.max(np.abs(total - np.eye(total.shape[0]))) <= 1e-9


def test_reduce_effect_boundary_vacuum_matches_closed_form_low_block():
    # with the dense unitary at wire cutoff c, matrix elements between
    # states of total photon number <= c carry no truncation leakage
    cutoff = 2
    E2c, E3c, reg = closed_form_e2_e3(cutoff)
    cfg = InterferometerConfig.compensated()
    U = fock_unitary(cfg, 3, cutoff)
    effects = build_projector_effects(2, cutoff)
    E2r = reduce_effect(effects.effect(E2_PATTERN), U, boundary="vacuum")
    totals = sum(reg.occupations(m) for m in reg.modes)
    low = totals <= cutoff
    gap = np.abs(E2c - E2r.matrix)[np.ix_(low, low)]
    assert np.max(gap) < 1e-9


def test_reduced_effect_set_exact_block_matches_closed_form():
    cutoff = 2
    E2c, E3c, _ = closed_form_e2_e3(cutoff)
    red = reduced_effect_set(2, cutoff, boundary="vacuum",
                             patterns=(E2_PATTERN, E3_PATTERN))
    assert np.max(np.abs(red[E2_PATTERN].matrix - E2c)) < 1e-12
    assert np.max(np.abs(red[E3_PATTERN].matrix - E3c)) < 1e-12
    comm = fock.commutator_norm(red[E2_PATTERN], red[E3_PATTERN])
    assert abs(comm - COMM_SILENT_C2) < 1e-12


def test_marginal_reduction_regression_value():
    red = reduced_effect_set(2, 2, boundary="marginal",
                             patterns=(E2_PATTERN, E3_PATTERN))
    comm = fock.commutator_norm(red[E2_PATTERN], red[E3_PATTERN])
    assert abs(comm - COMM_MARGINAL_C2) < 1e-12


def test_build_e2_e3_matches_oracle_values():
    E2, E3 = build_e2_e3(3)
    assert abs(fock.commutator_norm(E2, E3) - COMM_SILENT_C3) < 1e-12
    E2c, E3c, _ = closed_form_e2_e3(3)
    assert np.max(np.abs(E2.matrix - E2c)) < 1e-14
    assert np.max(np.abs(E3.matrix - E3c)) < 1e-14


def test_e2_examples():
    E2, E3 = build_e2_e3(3)
    reg = E2.registry
    vac = fock.vacuum(reg)
    assert fock.expectation(vac, E2) == 0.0
    sym = FockVector(reg, (fock.basis_state(reg, [1, 0, 0]).amplitudes
                           + fock.basis_state(reg, [0, 1, 0]).amplitudes)
                     / math.sqrt(2))
    assert abs(fock.expectation(sym, E2).real - 0.5) < 1e-12
    assert fock.commutator_norm(E2, E2) == 0.0


def test_commutator_converges_with_cutoff():
    E2a, E3a = build_e2_e3(3)
    E2b, E3b = build_e2_e3(4)
    va = fock.commutator_norm(E2a, E3a)
    vb = fock.commutator_norm(E2b, E3b)
    assert abs(vb - COMM_SILENT_C4) < 1e-12
    assert abs(vb - va) < 1e-6   # truncation-tail sized drift


def test_build_e2_e3_cutoff_guard():
    with pytest.raises(ValueError, match="cutoff too small"):
        build_e2_e3(2)


def test_t_term_table():
    for n in range(1, 5):
        for m in range(1, 5):
            expect = math.factorial(n) if n == m else 0
            assert t_term(n, m) == expect
            assert abs(t_term_numeric(n, m, 5) - expect) < 1e-9
    assert t_term(1, 1) == 1
    assert t_term(3, 3) == 6
    assert t_term(2, 3) == 0
    with pytest.raises(ValueError):
        t_term(0, 1)
    with pytest.raises(ValueError):
        t_term_numeric(3, 3, 2)


def test_conjugated_commutator_gram_matches_dense():
    cfg = InterferometerConfig.compensated()
    U = fock_unitary(cfg, 2, 2)
    wreg = U.registry
    pats = all_click_patterns(1)
    for pi, pj in itertools.combinations(pats, 2):
        di = pattern_diagonal(wreg, pi)
        dj = pattern_diagonal(wreg, pj)
        fast = conjugated_commutator_norm(U, di, dj)
        Mi = U.dagger().matrix @ np.diag(di) @ U.matrix
        Mj = U.dagger().matrix @ np.diag(dj) @ U.matrix
        direct = np.linalg.norm(Mi @ Mj - Mj @ Mi)
        assert abs(fast - direct) < 1e-10
        assert fast <= 1e-10   # unitary conjugation preserves commutation


def test_enumeration_guard():
    with pytest.raises(ValueError):
        build_projector_effects(4, 2)
