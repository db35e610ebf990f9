"""Measurement model, binary-tree hierarchical search, and adjudication.

A single training symbol is sent per candidate codeword.  Under the total
power model the received sample is

    y = sqrt(p) * w_rx^H H w_tx + w_rx^H noise,

and under the per-antenna model the transmit scale grows with the number of
active transmit antennas, ``sqrt(p * n_tx_active)``.  The search descends the
receive codebook first (transmitter pinned to its widest codeword), then the
transmit codebook, testing the two children of the current parent at every
stage and keeping the larger measured power.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .arrays import Awv, leaf_angles, steering_matrix
from .channels import Channel
from .codebooks import Codebook, Codeword

__all__ = [
    "PowerMode",
    "PowerModel",
    "Measurement",
    "SearchStep",
    "SearchTrace",
    "SearchOutcome",
    "AdjudicationPolicy",
    "measure",
    "hierarchical_search",
    "exhaustive_search",
    "adjudicate",
    "nearest_leaf",
    "trace_rows",
    "TRACE_COLUMNS",
]


class PowerMode(str, Enum):
    TOTAL = "total"
    PER_ANTENNA = "per-antenna"


@dataclass(frozen=True)
class PowerModel:
    """Transmit-power convention plus the per-antenna noise power (watts).

    ``power`` is the total radiated power for the ``total`` mode and the
    per-antenna power for the ``per-antenna`` mode, where the radiated power
    scales with the number of active transmit antennas.
    """

    mode: PowerMode
    power: float
    noise_power: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", PowerMode(self.mode))
        if self.power <= 0.0:
            raise ValueError("transmit power must be positive")
        if self.noise_power < 0.0:
            raise ValueError("noise power must be non-negative")

    @classmethod
    def total(cls, power: float = 1.0, noise_power: float = 1e-4) -> "PowerModel":
        return cls(PowerMode.TOTAL, power, noise_power)

    @classmethod
    def per_antenna(cls, power: float = 1.0, noise_power: float = 1e-4) -> "PowerModel":
        return cls(PowerMode.PER_ANTENNA, power, noise_power)

    @classmethod
    def from_snr_db(
        cls, mode: PowerMode | str, snr_db: float, power: float = 1.0
    ) -> "PowerModel":
        """Fix the transmit power at ``power`` watts and set the noise floor
        so that power/noise equals the requested SNR."""
        return cls(PowerMode(mode), power, power * 10.0 ** (-snr_db / 10.0))

    def tx_power(self, n_tx_active: int) -> float:
        """Radiated power for a transmit codeword with the given active count."""
        if self.mode is PowerMode.TOTAL:
            return self.power
        return self.power * n_tx_active

    def gain(self, coupling_sq: float, n_tx_active: int):
        """Power gain: the squared beamformed coupling, scaled by the active
        transmit count under the per-antenna model."""
        if self.mode is PowerMode.TOTAL:
            return coupling_sq
        return n_tx_active * coupling_sq


@dataclass(frozen=True)
class Measurement:
    """One training observation: measured |y|^2 and the noiseless power gain."""

    y_power: float
    noiseless_gain: float


@dataclass(frozen=True)
class SearchStep:
    stage: int
    side: str
    layer: int
    candidates: tuple[int, int]
    winner: int
    measurement: Measurement


@dataclass(frozen=True)
class SearchTrace:
    steps: tuple[SearchStep, ...]

    @property
    def n_stages(self) -> int:
        return len(self.steps)

    @property
    def n_measurements(self) -> int:
        return 2 * len(self.steps)


@dataclass(frozen=True)
class SearchOutcome:
    tx_leaf: Codeword
    rx_leaf: Codeword
    trace: SearchTrace

    @property
    def pair(self) -> tuple[int, int]:
        """(transmit leaf index, receive leaf index), both 1-based."""
        return (self.tx_leaf.index, self.rx_leaf.index)


class AdjudicationPolicy(str, Enum):
    MATCH_EXHAUSTIVE = "match-exhaustive"
    ALIGN_ANY_MPC = "align-any-mpc"
    ALIGN_STRONGEST = "align-strongest"


def _complex_noise(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    z = rng.standard_normal(2 * n)
    return np.sqrt(variance / 2.0) * (z[:n] + 1j * z[n:])


def measure(
    w_tx: Awv,
    w_rx: Awv,
    channel: Channel,
    power_model: PowerModel,
    rng: np.random.Generator,
) -> Measurement:
    """Send one unit training symbol through the channel and beamformers.

    Noise is drawn as a circularly symmetric complex Gaussian vector across
    the receive antennas with per-entry variance ``noise_power`` and combined
    by the receive weights.  The same number of variates is consumed even in
    the noiseless case so runs at different noise levels stay stream-aligned.
    """
    if w_tx.size != channel.n_tx or w_rx.size != channel.n_rx:
        raise ValueError("beamformer sizes do not match the channel")
    g = channel.coupling(w_tx, w_rx)
    noise = w_rx.weights.conj() @ _complex_noise(rng, channel.n_rx, power_model.noise_power)
    y = np.sqrt(power_model.tx_power(w_tx.active_count)) * g + noise
    return Measurement(
        y_power=float(abs(y) ** 2),
        noiseless_gain=float(power_model.gain(abs(g) ** 2, w_tx.active_count)),
    )


def _descend(
    cb: Codebook,
    fixed: Awv,
    fixed_is_tx: bool,
    channel: Channel,
    power_model: PowerModel,
    rng: np.random.Generator,
    side: str,
    first_stage: int,
) -> tuple[Codeword, list[SearchStep]]:
    steps: list[SearchStep] = []
    parent = 1
    for k in range(1, cb.depth + 1):
        lo = cb.codeword(k, 2 * parent - 1)
        hi = cb.codeword(k, 2 * parent)
        if fixed_is_tx:
            m_lo = measure(fixed, lo.awv, channel, power_model, rng)
            m_hi = measure(fixed, hi.awv, channel, power_model, rng)
        else:
            m_lo = measure(lo.awv, fixed, channel, power_model, rng)
            m_hi = measure(hi.awv, fixed, channel, power_model, rng)
        # Ties go to the lower child index.
        winner, m_win = (hi, m_hi) if m_hi.y_power > m_lo.y_power else (lo, m_lo)
        parent = winner.index
        steps.append(
            SearchStep(
                stage=first_stage + k - 1,
                side=side,
                layer=k,
                candidates=(lo.index, hi.index),
                winner=winner.index,
                measurement=m_win,
            )
        )
    return cb.codeword(cb.depth, parent), steps


def hierarchical_search(
    cb_tx: Codebook,
    cb_rx: Codebook,
    channel: Channel,
    power_model: PowerModel,
    rng: np.random.Generator,
) -> SearchOutcome:
    """Two-phase binary-tree search over the receive and transmit codebooks.

    Phase one pins the transmitter to its widest codeword and walks the
    receive tree from layer 1 down to the leaves, measuring both children of
    the current parent once per stage.  Phase two pins the receiver to the
    found leaf and walks the transmit tree the same way.  The trace holds
    ``log2(n_rx) + log2(n_tx)`` stages (two measurements each).
    """
    if cb_tx.n != channel.n_tx or cb_rx.n != channel.n_rx:
        raise ValueError("codebook sizes do not match the channel")
    tx_root = cb_tx.codeword(0, 1)
    rx_leaf, rx_steps = _descend(
        cb_rx, tx_root.awv, True, channel, power_model, rng, "rx", first_stage=1
    )
    tx_leaf, tx_steps = _descend(
        cb_tx,
        rx_leaf.awv,
        False,
        channel,
        power_model,
        rng,
        "tx",
        first_stage=cb_rx.depth + 1,
    )
    return SearchOutcome(
        tx_leaf=tx_leaf, rx_leaf=rx_leaf, trace=SearchTrace(tuple(rx_steps + tx_steps))
    )


def exhaustive_search(
    channel: Channel, power_model: PowerModel
) -> tuple[int, int, float]:
    """Noiseless scan over every pair of last-layer steering vectors.

    Returns ``(tx_index, rx_index, gain)`` with 1-based indices; ties are
    broken toward the smallest (tx_index, rx_index) lexicographically.  The
    gain follows the power model (last-layer codewords keep every transmit
    antenna active).
    """
    s_rx = steering_matrix(channel.n_rx)
    s_tx = steering_matrix(channel.n_tx)
    coupling_sq = np.abs(s_rx.conj().T @ channel.matrix @ s_tx) ** 2
    by_tx = coupling_sq.T  # row-major argmax scans tx first, then rx
    tx_idx, rx_idx = divmod(int(np.argmax(by_tx)), channel.n_rx)
    gain = power_model.gain(float(by_tx[tx_idx, rx_idx]), channel.n_tx)
    return tx_idx + 1, rx_idx + 1, float(gain)


def nearest_leaf(n: int, angle: float) -> int:
    """1-based index of the last-layer steering angle closest to ``angle``,
    with wrap-around distance on the period-2 domain; ties go to the lower
    index."""
    diff = np.abs(leaf_angles(n) - angle)
    return int(np.argmin(np.minimum(diff, 2.0 - diff))) + 1


def adjudicate(
    outcome: SearchOutcome, channel: Channel, policy: AdjudicationPolicy | str
) -> bool:
    """Decide whether a search outcome counts as a success.

    ``match-exhaustive``: the found pair equals the exhaustive-search pair.
    ``align-any-mpc``: the found pair equals the nearest-leaf pair of at
    least one path.  ``align-strongest``: same, but only the path with the
    largest coefficient magnitude qualifies.
    """
    policy = AdjudicationPolicy(policy)
    found = outcome.pair
    if policy is AdjudicationPolicy.MATCH_EXHAUSTIVE:
        tx_idx, rx_idx, _ = exhaustive_search(channel, PowerModel.total(1.0, 0.0))
        return found == (tx_idx, rx_idx)
    mpcs = channel.mpcs
    if policy is AdjudicationPolicy.ALIGN_STRONGEST:
        mpcs = (max(mpcs, key=lambda m: abs(m.coeff)),)
    return any(
        found == (nearest_leaf(channel.n_tx, m.psi), nearest_leaf(channel.n_rx, m.omega))
        for m in mpcs
    )


TRACE_COLUMNS = (
    "stage",
    "side",
    "candidate_1",
    "candidate_2",
    "winner",
    "y_power",
    "noiseless_gain",
)


def trace_rows(outcome: SearchOutcome) -> list[tuple]:
    """Row-per-stage tabular view of a search trace (see TRACE_COLUMNS)."""
    return [
        (
            step.stage,
            step.side,
            step.candidates[0],
            step.candidates[1],
            step.winner,
            step.measurement.y_power,
            step.measurement.noiseless_gain,
        )
        for step in outcome.trace.steps
    ]
