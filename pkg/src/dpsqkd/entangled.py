"""Entanglement-based form of the protocol.

Instead of preparing pulse trains, a bipartite state is distributed whose
Alice half is a register of qubits and whose Bob half is the photonic
train; Alice's projective measurement in the computational basis prepares
Bob's signal remotely.  The state factorizes per time bin as
``(|0>|alpha> + |1>|-alpha>)/sqrt(2)``, so the joint vector is only
materialized at desk scale and the factorized form is used everywhere
else.

``compare_statistics`` certifies that the click statistics Bob sees are
the same whichever way the signal was prepared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fock
from .fock import FockVector, ModeRegistry
from .optics import InterferometerConfig, interferometer_coefficients

#: largest pulse count for which the joint Alice x photon vector is built
JOINT_MATERIALIZE_LIMIT = 3


@dataclass(frozen=True)
class EbState:
    """The distributed bipartite state, one factor per time bin.

    ``factors[i]`` is a (2, cutoff+1) array: row b holds the (unnormalized)
    photonic amplitudes paired with Alice outcome b in bin i.  `joint` is
    the flattened (2^{N+1}, photon_dim) vector, materialized only for
    small pulse counts.
    """

    registry: ModeRegistry
    alpha: complex
    factors: tuple
    joint: Optional[np.ndarray]

    @property
    def n_pulses(self) -> int:
        return len(self.factors)

    @property
    def qubit_count(self) -> int:
        return self.n_pulses

    def factor_born_probabilities(self, i: int) -> np.ndarray:
        """Born probabilities of Alice's two outcomes in bin i."""
        f = self.factors[i]
        w = np.sum(np.abs(f) ** 2, axis=1)
        return w / w.sum()

    def collapsed_bin_state(self, i: int, bit: int) -> np.ndarray:
        """Normalized photonic state of bin i given Alice outcome `bit`."""
        row = self.factors[i][bit]
        return row / np.linalg.norm(row)

    def norm2(self) -> float:
        out = 1.0
        for i in range(self.n_pulses):
            out *= float(np.sum(np.abs(self.factors[i]) ** 2))
        return out


def build_eb_state(n_key_bins: int, alpha: complex, cutoff: int,
                   materialize_limit: int = JOINT_MATERIALIZE_LIMIT) -> EbState:
    """Construct the distributed state for N key bins (N+1 pulses)."""
    n_pulses = n_key_bins + 1
    alpha = complex(alpha)
    reg = ModeRegistry([(0, i) for i in range(n_pulses)], cutoff)
    row0 = fock.coherent_amplitudes(alpha, cutoff) / math.sqrt(2.0)
    row1 = fock.coherent_amplitudes(-alpha, cutoff) / math.sqrt(2.0)
    factor = np.stack([row0, row1])
    factors = tuple(factor.copy() for _ in range(n_pulses))

    joint = None
    if n_pulses <= materialize_limit:
        joint = factors[0]
        for f in factors[1:]:
            # kron over both the Alice index and the photon index
            joint = np.einsum("ap,bq->abpq", joint.reshape(-1, joint.shape[-1]),
                              f).reshape(joint.shape[0] * 2, -1)
    return EbState(reg, alpha, factors, joint)


def alice_measure(state: EbState, rng: np.random.Generator):
    """Project Alice's register in the computational basis.

    Returns ``(s_prime, collapsed)``: the sampled bit string (uniform by
    construction) and the post-measurement photonic state, which is the
    corresponding pulse-train vector.
    """
    bits = np.empty(state.n_pulses, dtype=np.uint8)
    vec = None
    for i in range(state.n_pulses):
        p = state.factor_born_probabilities(i)
        b = int(rng.random() < p[1])
        bits[i] = b
        row = state.collapsed_bin_state(i, b)
        vec = row if vec is None else np.kron(vec, row)
    return bits, FockVector(state.registry, vec, normalized=True)


def pulse_train_vector(state: EbState, s_prime: np.ndarray) -> FockVector:
    """The P&M pulse-train vector for a given S', on the same registry and
    cutoff as the EB state (normalized)."""
    vec = None
    for b in np.asarray(s_prime, dtype=int):
        row = fock.coherent_amplitudes((-1) ** b * state.alpha, state.registry.cutoff)
        row = row / np.linalg.norm(row)
        vec = row if vec is None else np.kron(vec, row)
    return FockVector(state.registry, vec, normalized=True)


def alice_reduced_density(state: EbState) -> np.ndarray:
    """Alice's reduced density matrix (requires the materialized joint)."""
    if state.joint is None:
        raise ValueError("joint state was not materialized at this size")
    return state.joint @ state.joint.conj().T / state.norm2()


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits of a density matrix."""
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def factor_schmidt_values(state: EbState, i: int) -> np.ndarray:
    """Schmidt coefficients of factor i (both nonzero iff entangled)."""
    f = state.factors[i]
    s = np.linalg.svd(f, compute_uv=False)
    return s / np.linalg.norm(f)


def collapsed_mean_amplitude(state: EbState, i: int, bit: int) -> complex:
    """Coherent amplitude of bin i's collapsed state, from the state itself."""
    v = state.collapsed_bin_state(i, bit)
    w = np.sqrt(np.arange(1, v.size))
    return complex(np.sum(v[:-1].conj() * v[1:] * w))


# ---------------------------------------------------------------------------
# statistical equivalence of the two preparations


@dataclass(frozen=True)
class EbComparisonReport:
    """Total-variation distance between Bob's click-pattern distributions
    under the two preparations."""

    n_key_bins: int
    alpha2: float
    analytic_distance: float
    empirical_distance: Optional[float]
    trials: int
    sigma: float

    def to_text(self) -> str:
        lines = [f"keyBins = {self.n_key_bins}",
                 f"alphaSquared = {self.alpha2!r}",
                 f"analyticDistance = {self.analytic_distance!r}"]
        if self.empirical_distance is None:
            lines.append("empiricalDistance = absent (no trials requested)")
        else:
            lines += [f"empiricalDistance = {self.empirical_distance!r}",
                      f"trials = {self.trials}",
                      f"sigma = {self.sigma!r}  (bounded-differences scale)"]
        return "\n".join(lines)


def _defective_coefficients(config: InterferometerConfig,
                            delay_defect: float) -> np.ndarray:
    """Mode-map coefficients with an uncompensated extra phase in the
    delay arm.  A nonzero defect breaks the interference contrast, which
    (unlike a phase on the output paths) ideal bucket detectors can see;
    this is the inconsistency-injection test hook."""
    c = interferometer_coefficients(config).copy()
    c[2:] *= np.exp(1j * delay_defect)
    return c


def _pattern_distribution(amps: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Distribution over the 4^N click patterns of one pulse train with
    ideal detectors, bins indexed bin-major, pattern digit = 2*d0 + d1;
    `c` is the mode-map coefficient vector."""
    a = np.concatenate([[0.0], amps, [0.0]])
    b4 = (c[0] * a[1:] + c[2] * a[:-1])[1:-1]
    b5 = (c[1] * a[1:] + c[3] * a[:-1])[1:-1]
    p0 = 1.0 - np.exp(-np.abs(b4) ** 2)
    p1 = 1.0 - np.exp(-np.abs(b5) ** 2)
    dist = np.array([1.0])
    for i in range(p0.size):
        cell = np.array([(1 - p0[i]) * (1 - p1[i]), (1 - p0[i]) * p1[i],
                         p0[i] * (1 - p1[i]), p0[i] * p1[i]])
        dist = np.outer(dist, cell).reshape(-1)
    return dist


def _sample_patterns(amp_matrix: np.ndarray, c: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
    """Per-trial click-pattern indices for a (trials, N+1) amplitude matrix."""
    t, npulse = amp_matrix.shape
    a = np.zeros((t, npulse + 2), dtype=complex)
    a[:, 1:-1] = amp_matrix
    b4 = (c[0] * a[:, 1:] + c[2] * a[:, :-1])[:, 1:-1]
    b5 = (c[1] * a[:, 1:] + c[3] * a[:, :-1])[:, 1:-1]
    p0 = 1.0 - np.exp(-np.abs(b4) ** 2)
    p1 = 1.0 - np.exp(-np.abs(b5) ** 2)
    c0 = rng.random(p0.shape) < p0
    c1 = rng.random(p1.shape) < p1
    digits = 2 * c0.astype(np.int64) + c1.astype(np.int64)
    pattern = np.zeros(t, dtype=np.int64)
    for i in range(digits.shape[1]):
        pattern = pattern * 4 + digits[:, i]
    return pattern


def compare_statistics(n_key_bins: int, alpha: complex, trials: int = 0,
                       cutoff: int = 10, seed: int = 0,
                       config: Optional[InterferometerConfig] = None,
                       eb_delay_defect: float = 0.0) -> EbComparisonReport:
    """Compare Bob's click-pattern distribution under P&M preparation with
    uniform S' against EB preparation plus Alice's measurement.

    The analytic distance enumerates all S' exactly; the empirical distance
    (when ``trials > 0``) Monte Carlo samples both flows.
    `eb_delay_defect` is a test hook: it injects an uncompensated phase
    into the delay arm of the EB flow only, an inconsistency the
    comparison must catch.  (Phases on the output paths would not do:
    ideal bucket detection is insensitive to them.)
    """
    if n_key_bins < 1:
        raise ValueError("need at least one key bin")
    config = config or InterferometerConfig.compensated()
    c_pm = interferometer_coefficients(config)
    c_eb = _defective_coefficients(config, eb_delay_defect)
    alpha = complex(alpha)
    state = build_eb_state(n_key_bins, alpha, cutoff)
    n_pulses = n_key_bins + 1

    # analytic: exact mixture over all S' for both flows
    bit_probs = [state.factor_born_probabilities(i) for i in range(n_pulses)]
    amp_of_bit = np.array([collapsed_mean_amplitude(state, 0, 0),
                           collapsed_mean_amplitude(state, 0, 1)])
    dist_pm = np.zeros(4 ** n_key_bins)
    dist_eb = np.zeros(4 ** n_key_bins)
    for idx in range(2 ** n_pulses):
        sp = np.array([(idx >> (n_pulses - 1 - k)) & 1 for k in range(n_pulses)])
        pm_amps = (1.0 - 2.0 * sp) * alpha
        dist_pm += (0.5 ** n_pulses) * _pattern_distribution(pm_amps, c_pm)
        w = math.prod(bit_probs[i][sp[i]] for i in range(n_pulses))
        dist_eb += w * _pattern_distribution(amp_of_bit[sp], c_eb)
    analytic = 0.5 * float(np.sum(np.abs(dist_pm - dist_eb)))

    empirical = None
    sigma = 0.0
    if trials > 0:
        rng = np.random.default_rng(seed)
        sp_pm = rng.integers(0, 2, size=(trials, n_pulses))
        pat_pm = _sample_patterns((1.0 - 2.0 * sp_pm) * alpha, c_pm, rng)
        p1s = np.array([bit_probs[i][1] for i in range(n_pulses)])
        sp_eb = (rng.random((trials, n_pulses)) < p1s).astype(int)
        pat_eb = _sample_patterns(amp_of_bit[sp_eb], c_eb, rng)
        h_pm = np.bincount(pat_pm, minlength=4 ** n_key_bins) / trials
        h_eb = np.bincount(pat_eb, minlength=4 ** n_key_bins) / trials
        empirical = 0.5 * float(np.sum(np.abs(h_pm - h_eb)))
        sigma = 1.0 / math.sqrt(2.0 * trials)

    return EbComparisonReport(n_key_bins, abs(alpha) ** 2, analytic,
                              empirical, trials, sigma)
