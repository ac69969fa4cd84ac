"""Bob's measurement: projector effects, their reduction to POVM elements
on the signal path, and certification of the commutation structure.

On the full output space Bob's effects are products, over the two
detection wires of every key bin, of a vacuum projector (no click) or its
complement (one or more photons): mutually commuting orthogonal
projectors, and still commuting after conjugation with the interferometer
unitary.  Taking the vacuum expectation over the unpopulated second input
path reduces them to effects on the signal path alone, and that reduction
is what breaks commutativity: the certified positive lower bound on
``||[E2, E3]||_F`` is this package's headline check.

Effects are indexed by click patterns: a tuple with one ``(d0, d1)`` bool
pair per key bin 1..N.  (A printed enumeration of these effects elsewhere
repeats a factor in one row; the systematic one-factor-per-mode indexing
used here is the intended reading.)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import fock
from .fock import FockOperator, ModeRegistry
from .optics import (InterferometerConfig, fock_unitary, wire_registry,
                     _evolve_wire_batch)

ClickPattern = Tuple[Tuple[bool, bool], ...]

#: pattern of the effect "click at D0 in bin 1, nothing else" (reduces to E2)
#: and "click at D1 in bin 2, nothing else" (reduces to E3), at N = 2
E2_PATTERN: ClickPattern = ((True, False), (False, False))
E3_PATTERN: ClickPattern = ((False, False), (False, True))

#: certified positive floor for ||[E2, E3]||_F at any cutoff >= 3, fixed by
#: a pre-build dense evaluation (0.15460521937... at cutoff 3, increasing
#: with cutoff)
NONCOMMUTATIVITY_FLOOR = 0.1546

G_COMMUTE_TOL = 1e-12
CONJUGATED_COMMUTE_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
PSD_TOL = 1e-10


def detection_registry(n_bins: int, cutoff: int) -> ModeRegistry:
    """Registry of the 2N detection wires for key bins 1..N, path-major:
    wire (0, i) feeds detector D0 and wire (1, i) detector D1."""
    modes = [(0, i) for i in range(1, n_bins + 1)] + \
            [(1, i) for i in range(1, n_bins + 1)]
    return ModeRegistry(modes, cutoff)


def all_click_patterns(n_bins: int) -> Tuple[ClickPattern, ...]:
    """The 4^N patterns, all-vacuum first, all-click last."""
    per_bin = ((False, False), (False, True), (True, False), (True, True))
    return tuple(itertools.product(per_bin, repeat=n_bins))


def pattern_index(pattern: ClickPattern) -> int:
    """Bin-major base-4 index of a pattern (digit = 2*d0 + d1)."""
    idx = 0
    for d0, d1 in pattern:
        idx = idx * 4 + 2 * int(d0) + int(d1)
    return idx


def pattern_diagonal(registry: ModeRegistry, pattern: ClickPattern) -> np.ndarray:
    """Diagonal (0/1) of the projector onto a click pattern, on any registry
    containing the detection wires (identity on other modes)."""
    diag = np.ones(registry.dim)
    for i, (d0, d1) in enumerate(pattern, start=1):
        for path, clicked in ((0, d0), (1, d1)):
            occ = registry.occupations((path, i))
            diag = diag * ((occ >= 1) if clicked else (occ == 0))
    return diag


@dataclass(frozen=True)
class EffectSet:
    """Indexed family of measurement effects over click patterns."""

    registry: ModeRegistry
    patterns: Tuple[ClickPattern, ...]
    effects: Dict[ClickPattern, FockOperator]

    def effect(self, pattern: ClickPattern) -> FockOperator:
        return self.effects[pattern]

    def __iter__(self):
        return (self.effects[p] for p in self.patterns)

    def __len__(self):
        return len(self.patterns)

    def completeness_defect(self) -> float:
        """``max |sum_j effects_j - identity|`` entrywise."""
        total = sum(e.matrix for e in self)
        return float(np.max(np.abs(total - np.eye(self.registry.dim))))

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(e.matrix)[0]) for e in self)


def build_projector_effects(n_bins: int, cutoff: int) -> EffectSet:
    """The full 4^N family of projector effects on the detection wires.

    Each effect is diagonal in the occupation basis; they are idempotent,
    mutually orthogonal and sum to the identity.
    """
    if n_bins > 3:
        raise ValueError("full enumeration is desk scale (N <= 3); "
                         "build single patterns via pattern_diagonal instead")
    reg = detection_registry(n_bins, cutoff)
    patterns = all_click_patterns(n_bins)
    effects = {
        p: FockOperator(reg, np.diag(pattern_diagonal(reg, p).astype(complex)),
                        hermitian=True)
        for p in patterns
    }
    return EffectSet(reg, patterns, effects)


def signal_registry(n_bins: int, cutoff: int) -> ModeRegistry:
    """Registry of the signal-path input modes, time bins 0..N."""
    return ModeRegistry([(0, i) for i in range(n_bins + 1)], cutoff)


# ---------------------------------------------------------------------------
# reduction through the interferometer


def _vacuum_column_indices(registry: ModeRegistry) -> np.ndarray:
    """Basis indices whose path-1 wires are all in vacuum, ordered like the
    path-0 sub-registry (a consequence of path-major mode order)."""
    keep = np.ones(registry.dim, dtype=bool)
    for m in registry.modes:
        if m[0] == 1:
            keep &= registry.occupations(m) == 0
    return np.flatnonzero(keep)


def _boundary_vacuum_diagonal(registry: ModeRegistry,
                              detection_modes) -> np.ndarray:
    """0/1 diagonal of the projector onto vacuum of every wire outside the
    detection set."""
    diag = np.ones(registry.dim)
    det = set(detection_modes)
    for m in registry.modes:
        if m not in det:
            diag = diag * (registry.occupations(m) == 0)
    return diag


def reduce_effect(effect: FockOperator, U: FockOperator,
                  boundary: str = "marginal") -> FockOperator:
    """Vacuum reduction of a conjugated effect onto the signal path:
    the operator with matrix elements ``<x,vac| U* G U |y,vac>`` over the
    path-1 wires, acting on the path-0 wires.

    `effect` may live on the detection registry or on U's full wire
    registry.  `boundary` fixes how the lift treats the output wires the
    effect does not mention: ``"marginal"`` (identity: those outcomes are
    summed over, the convention under which the reduced family stays
    complete) or ``"vacuum"`` (the event additionally demands silence
    there; the convention the explicit closed forms of the two
    illustrative effects correspond to).
    """
    if boundary not in ("marginal", "vacuum"):
        raise ValueError(f"boundary must be 'marginal' or 'vacuum', "
                         f"got {boundary!r}")
    if effect.registry != U.registry:
        detection_modes = effect.registry.modes
        G = fock.embed(effect, U.registry)
    else:
        detection_modes = U.registry.modes
        G = effect
    offdiag = G.matrix - np.diag(np.diag(G.matrix))
    cols = _vacuum_column_indices(U.registry)
    if not np.any(offdiag):
        g = np.diag(G.matrix).real
        if boundary == "vacuum":
            g = g * _boundary_vacuum_diagonal(U.registry, detection_modes)
        V = U.matrix[:, cols]
        E = V.conj().T @ (g[:, None] * V)
    else:
        if boundary == "vacuum":
            bv = _boundary_vacuum_diagonal(U.registry, detection_modes)
            G = FockOperator(U.registry, bv[:, None] * G.matrix * bv[None, :])
        M = U.dagger().matrix @ G.matrix @ U.matrix
        E = M[np.ix_(cols, cols)]
    E = 0.5 * (E + E.conj().T)
    reg = ModeRegistry([m for m in U.registry.modes if m[0] == 0],
                       U.registry.cutoff)
    return FockOperator(reg, E, hermitian=True)


def _evolved_signal_block(n_bins: int, cutoff: int,
                          config: InterferometerConfig,
                          internal_cutoff: int):
    """Evolve every signal-block basis state through the interferometer.

    Returns ``(psi, pids, boundary_vac, sreg)``: the evolved block
    (n_signal_states x wire_dim), the click-pattern id of every wire basis
    state, the boundary-silence indicator, and the target signal registry.
    """
    bins = n_bins + 1
    wreg = wire_registry(bins, internal_cutoff)
    sreg = signal_registry(n_bins, cutoff)

    # one-hot batch of the signal block embedded at the internal cutoff
    d_t, d_i = cutoff + 1, internal_cutoff + 1
    n_sig = d_t ** bins
    strides = d_i ** np.arange(2 * bins - 1, -1, -1)
    occ = np.array(list(itertools.product(range(d_t), repeat=bins)))
    flat = occ @ strides[:bins]
    batch = np.zeros((n_sig, wreg.dim))
    batch[np.arange(n_sig), flat] = 1.0
    psi = _evolve_wire_batch(batch, bins, d_i, config)

    pids = np.zeros(wreg.dim, dtype=np.int64)
    for i in range(1, n_bins + 1):
        c0 = (wreg.occupations((0, i)) >= 1).astype(np.int64)
        c1 = (wreg.occupations((1, i)) >= 1).astype(np.int64)
        pids = pids * 4 + 2 * c0 + c1
    boundary_vac = np.ones(wreg.dim, dtype=bool)
    for path in (0, 1):
        boundary_vac &= wreg.occupations((path, 0)) == 0
    return psi, pids, boundary_vac, sreg


def _effects_from_block(psi, pids, keep, sreg, patterns):
    out = {}
    for p in patterns:
        rows = np.flatnonzero((pids == pattern_index(p)) & keep)
        block = psi[:, rows]
        E = block @ block.conj().T
        E = 0.5 * (E + E.conj().T)
        out[p] = FockOperator(sreg, E, hermitian=True)
    return out


def reduced_effect_set(n_bins: int, cutoff: int,
                       config: Optional[InterferometerConfig] = None,
                       internal_cutoff: Optional[int] = None,
                       patterns: Optional[Sequence[ClickPattern]] = None,
                       boundary: str = "marginal"
                       ) -> Dict[ClickPattern, FockOperator]:
    """Reduced effects E_j on the signal registry at `cutoff`, one per
    click pattern.

    The reduction is evaluated by evolving every signal basis state
    through the interferometer at `internal_cutoff` and reading off the
    Gram matrices of the click-pattern row groups.  The default internal
    cutoff, (N+1) * cutoff, bounds the total photon number of the signal
    block, which makes every returned matrix element exact (no truncation
    leakage); lower values trade exactness at high occupation for speed.

    `boundary` as in :func:`reduce_effect`: ``"marginal"`` yields the
    complete POVM, ``"vacuum"`` the silent-boundary events the explicit
    closed forms correspond to.
    """
    if boundary not in ("marginal", "vacuum"):
        raise ValueError(f"boundary must be 'marginal' or 'vacuum', "
                         f"got {boundary!r}")
    config = config or InterferometerConfig.compensated()
    if internal_cutoff is None:
        internal_cutoff = (n_bins + 1) * cutoff
    if internal_cutoff < cutoff:
        raise ValueError("internal cutoff below the target cutoff")
    if patterns is None:
        patterns = all_click_patterns(n_bins)
    psi, pids, boundary_vac, sreg = _evolved_signal_block(
        n_bins, cutoff, config, internal_cutoff)
    keep = boundary_vac if boundary == "vacuum" else \
        np.ones(pids.size, dtype=bool)
    return _effects_from_block(psi, pids, keep, sreg, patterns)


# ---------------------------------------------------------------------------
# the explicit reduced effects of the two illustrative click events


def build_e2_e3(cutoff: int) -> Tuple[FockOperator, FockOperator]:
    """Closed forms of the two illustrative reduced effects on three
    signal time bins:

    ``E2 = sum_n (1/(4^n n!)) (A0+A1)^n |0><0| (A0+A1)*^n`` (click at D0 in
    bin 1) and ``E3`` with ``(A1-A2)`` (click at D1 in bin 2), where ``Ak``
    is the creation operator of time bin k.  The sums run until the
    operator powers annihilate the truncated space identically (n beyond
    twice the cutoff); stopping at n = cutoff would visibly miss
    high-occupation matrix elements.
    """
    if cutoff < 3:
        raise ValueError(f"cutoff too small: need cutoff >= 3, got {cutoff}")
    reg = signal_registry(2, cutoff)
    vac = fock.vacuum(reg).amplitudes

    def effect(raiser: np.ndarray) -> FockOperator:
        E = np.zeros((reg.dim, reg.dim), dtype=complex)
        v = vac.copy()
        for n in range(1, 2 * cutoff + 1):
            v = raiser @ v
            if not np.any(v):
                break
            E += np.outer(v, v.conj()) / (4 ** n * math.factorial(n))
        return FockOperator(reg, E, hermitian=True)

    a0 = fock.ladder_operator(reg, (0, 0), "creation").matrix
    a1 = fock.ladder_operator(reg, (0, 1), "creation").matrix
    a2 = fock.ladder_operator(reg, (0, 2), "creation").matrix
    return effect(a0 + a1), effect(a1 - a2)


def t_term(n: int, m: int) -> int:
    """The vacuum contraction ``<0| (a0+a1)^n (A1-A2)^m |0>``: photon
    bookkeeping forces it to ``n!`` when n == m and 0 otherwise."""
    if n < 1 or m < 1:
        raise ValueError("t_term is defined for n, m >= 1")
    return math.factorial(n) if n == m else 0


def t_term_numeric(n: int, m: int, cutoff: int) -> float:
    """Same contraction evaluated by dense matrix application."""
    if cutoff < max(n, m):
        raise ValueError("cutoff must be at least max(n, m)")
    reg = signal_registry(2, cutoff)
    raise1 = fock.ladder_operator(reg, (0, 1), "creation").matrix
    raise2 = fock.ladder_operator(reg, (0, 2), "creation").matrix
    lower0 = fock.ladder_operator(reg, (0, 0), "annihilation").matrix
    lower1 = fock.ladder_operator(reg, (0, 1), "annihilation").matrix
    v = fock.vacuum(reg).amplitudes.copy()
    for _ in range(m):
        v = (raise1 - raise2) @ v
    for _ in range(n):
        v = (lower0 + lower1) @ v
    val = complex(v[0])
    if abs(val.imag) > 1e-12:
        raise AssertionError(f"contraction came out complex: {val}")
    return val.real


# ---------------------------------------------------------------------------
# certification


def conjugated_commutator_norm(U: FockOperator, diag_i: np.ndarray,
                               diag_j: np.ndarray) -> float:
    """``||[U* G_i U, U* G_j U]||_F`` for diagonal 0/1 projectors G, via
    the Gram structure of the selected unitary rows (no conjugated
    operator is materialized)."""
    rows_i = np.flatnonzero(diag_i)
    rows_j = np.flatnonzero(diag_j)
    Wi = U.matrix[rows_i]
    Wj = U.matrix[rows_j]
    X = Wi @ Wj.conj().T
    Pi = Wi @ Wi.conj().T
    Pj = Wj @ Wj.conj().T
    XtX = X.conj().T @ X
    t1 = np.trace(X.conj().T @ Pi @ X @ Pj).real
    t2 = np.trace(XtX @ XtX).real
    return math.sqrt(max(2.0 * (t1 - t2), 0.0))


@dataclass(frozen=True)
class NoncommutativityReport:
    """Outcome of the commutation certification.

    Thresholds are part of the report: `g_zero_tol` separates "commuting"
    from noise, `nonzero_floor` is the certified positive lower bound the
    reduced-effect commutator must clear.
    """

    n_bins: int
    cutoff: int
    internal_cutoff: int
    detection_dim: int
    wire_dim: int
    g_comm_max: float
    g_idempotency_max: float
    g_orthogonality_max: float
    g_sum_defect: float
    conjugated_pairs: tuple
    conjugated_comm_max: float
    e2e3_comm_norm: float              # closed forms
    e2e3_comm_norm_reduced: float      # silent-boundary reduction
    e2e3_comm_norm_marginal: float     # complete-POVM reduction
    e2_reduction_gap: float
    e3_reduction_gap: float
    e_sum_defect: float
    e_min_eigenvalue: float
    g_zero_tol: float = G_COMMUTE_TOL
    conj_zero_tol: float = CONJUGATED_COMMUTE_TOL
    completeness_tol: float = COMPLETENESS_TOL
    psd_tol: float = PSD_TOL
    nonzero_floor: float = NONCOMMUTATIVITY_FLOOR
    reduction_agreement_tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return (self.g_comm_max <= self.g_zero_tol
                and self.conjugated_comm_max <= self.conj_zero_tol
                and self.e2e3_comm_norm >= self.nonzero_floor
                and self.e2e3_comm_norm_reduced >= self.nonzero_floor
                and self.e2e3_comm_norm_marginal >= self.nonzero_floor
                and self.e2_reduction_gap <= self.reduction_agreement_tol
                and self.e3_reduction_gap <= self.reduction_agreement_tol
                and self.e_sum_defect <= self.completeness_tol
                and self.e_min_eigenvalue >= -self.psd_tol)

    def to_text(self) -> str:
        lines = [
            f"keyBins = {self.n_bins}, cutoff = {self.cutoff} "
            f"(reduction ran at internal cutoff {self.internal_cutoff})",
            f"detection dim = {self.detection_dim}, wire dim = {self.wire_dim}",
            f"max ||[G_i, G_j]||_F           = {self.g_comm_max:.3e}"
            f"   (zero threshold {self.g_zero_tol:.0e})",
            f"max |G^2 - G|                  = {self.g_idempotency_max:.3e}",
            f"max |G_i G_j| (i != j)         = {self.g_orthogonality_max:.3e}",
            f"|sum G - I|                    = {self.g_sum_defect:.3e}",
            f"max ||[U*G_iU, U*G_jU]||_F     = {self.conjugated_comm_max:.3e}"
            f"   (zero threshold {self.conj_zero_tol:.0e})",
            f"||[E2, E3]||_F closed form     = {self.e2e3_comm_norm:.15f}",
            f"||[E2, E3]||_F silent boundary = {self.e2e3_comm_norm_reduced:.15f}"
            f"   (floor {self.nonzero_floor})",
            f"||[E2, E3]||_F complete POVM   = {self.e2e3_comm_norm_marginal:.15f}"
            f"   (floor {self.nonzero_floor})",
            f"|E2 closed - reduced|          = {self.e2_reduction_gap:.3e}"
            f"   (threshold {self.reduction_agreement_tol:.0e})",
            f"|E3 closed - reduced|          = {self.e3_reduction_gap:.3e}",
            f"|sum E - I|                    = {self.e_sum_defect:.3e}"
            f"   (threshold {self.completeness_tol:.0e})",
            f"min eigenvalue over E_j        = {self.e_min_eigenvalue:.3e}"
            f"   (PSD threshold -{self.psd_tol:.0e})",
            f"verdict: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines)

    def to_csv(self) -> str:
        head = ("schema_version,keyBins,cutoff,internalCutoff,gCommMax,"
                "conjCommMax,e2e3CommClosed,e2e3CommSilentBoundary,"
                "e2e3CommCompletePovm,eSumDefect,eMinEigenvalue,passed")
        row = (f"1,{self.n_bins},{self.cutoff},{self.internal_cutoff},"
               f"{self.g_comm_max!r},{self.conjugated_comm_max!r},"
               f"{self.e2e3_comm_norm!r},{self.e2e3_comm_norm_reduced!r},"
               f"{self.e2e3_comm_norm_marginal!r},"
               f"{self.e_sum_defect!r},{self.e_min_eigenvalue!r},"
               f"{int(self.passed)}")
        return head + "\n" + row


def certify_noncommutativity(cutoff: int, n_bins: int = 2,
                             config: Optional[InterferometerConfig] = None
                             ) -> NoncommutativityReport:
    """Certify the commutation structure at desk scale.

    Checks, with every threshold recorded in the report: the projector
    effects commute pairwise (and are idempotent, orthogonal and
    complete); conjugation with the interferometer unitary preserves
    commutation on sampled pairs; the vacuum-reduced effects are complete
    and positive; and the two illustrative reduced effects do NOT commute,
    with a commutator norm above the recorded floor, computed both from
    the closed forms and from the generic reduction.
    """
    if cutoff < 3:
        raise ValueError(f"cutoff too small: need cutoff >= 3, got {cutoff}")
    if n_bins != 2:
        raise ValueError("the illustrative effects live at n_bins = 2")
    config = config or InterferometerConfig.compensated()

    effects = build_projector_effects(n_bins, cutoff)
    mats = [effects.effect(p).matrix for p in effects.patterns]
    g_comm = 0.0
    g_orth = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            prod = mats[i] @ mats[j]
            g_orth = max(g_orth, float(np.max(np.abs(prod))))
            g_comm = max(g_comm, float(np.linalg.norm(prod - mats[j] @ mats[i])))
    g_idem = max(float(np.max(np.abs(m @ m - m))) for m in mats)
    g_sum = effects.completeness_defect()

    bins = n_bins + 1
    U = fock_unitary(config, bins, cutoff)
    wreg = U.registry
    pats = effects.patterns
    pair_choice = ((E2_PATTERN, E3_PATTERN),
                   (pats[0], pats[-1]),
                   (E2_PATTERN, pats[-1]))
    conj_vals = []
    for pi, pj in pair_choice:
        di = pattern_diagonal(wreg, pi)
        dj = pattern_diagonal(wreg, pj)
        conj_vals.append((pi, pj, conjugated_commutator_norm(U, di, dj)))
    conj_max = max(v for _, _, v in conj_vals)

    E2c, E3c = build_e2_e3(cutoff)
    e2e3_closed = fock.commutator_norm(E2c, E3c)

    # one evolution pass serves both boundary conventions
    psi, pids, boundary_vac, sreg = _evolved_signal_block(
        n_bins, cutoff, config, bins * cutoff)
    patterns = all_click_patterns(n_bins)
    marginal = _effects_from_block(psi, pids, np.ones(pids.size, dtype=bool),
                                   sreg, patterns)
    silent = _effects_from_block(psi, pids, boundary_vac, sreg,
                                 (E2_PATTERN, E3_PATTERN))

    E2r, E3r = silent[E2_PATTERN], silent[E3_PATTERN]
    e2e3_silent = fock.commutator_norm(E2r, E3r)
    e2e3_marginal = fock.commutator_norm(marginal[E2_PATTERN],
                                         marginal[E3_PATTERN])
    gap2 = float(np.linalg.norm(E2c.matrix - E2r.matrix, 2))
    gap3 = float(np.linalg.norm(E3c.matrix - E3r.matrix, 2))
    e_sum = float(np.max(np.abs(
        sum(e.matrix for e in marginal.values()) - np.eye(sreg.dim))))
    e_min = min(float(np.linalg.eigvalsh(e.matrix)[0])
                for e in marginal.values())

    return NoncommutativityReport(
        n_bins=n_bins, cutoff=cutoff, internal_cutoff=bins * cutoff,
        detection_dim=effects.registry.dim, wire_dim=wreg.dim,
        g_comm_max=g_comm, g_idempotency_max=g_idem,
        g_orthogonality_max=g_orth, g_sum_defect=g_sum,
        conjugated_pairs=tuple(conj_vals), conjugated_comm_max=conj_max,
        e2e3_comm_norm=e2e3_closed, e2e3_comm_norm_reduced=e2e3_silent,
        e2e3_comm_norm_marginal=e2e3_marginal,
        e2_reduction_gap=gap2, e3_reduction_gap=gap3,
        e_sum_defect=e_sum, e_min_eigenvalue=e_min,
    )
