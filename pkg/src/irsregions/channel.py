"""Channel generation and reflection-pattern evaluation.

Covers path loss, Rician/Rayleigh small-scale fading, the discrete
phase set of the sub-surface-grouped IRS, combined channel power gains,
successive-decoding orders, and exhaustive enumeration of reflection
patterns (with a hard budget so runaway requests fail loudly).

Everything here is a pure function of its inputs; the dataclasses are
frozen, so concurrent use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .config import ChannelParams, SystemConfig

DEFAULT_ENUM_BUDGET = 2**20


class BudgetExceededError(RuntimeError):
    """Enumeration would exceed the configured budget."""

    def __init__(self, required: int, budget: int, what: str = "phase configurations"):
        self.required = required
        self.budget = budget
        super().__init__(f"enumerating {required} {what} exceeds budget {budget}")


def path_loss(d: float, alpha_exp: float, params: ChannelParams) -> float:
    """Distance-dependent path loss rho0 * (d / d0) ** -alpha, linear."""
    if d <= 0.0:
        raise ValueError(f"distance must be positive, got {d}")
    return params.rho0 * (d / params.d0) ** (-alpha_exp)


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence block of channels.

    h[k]  : direct AP-user link (complex scalar per user)
    v[m]  : AP-IRS link per sub-surface
    g[k,m]: IRS-user link per user and sub-surface
    """

    h: np.ndarray
    v: np.ndarray
    g: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        g = np.asarray(self.g, dtype=complex)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "g", g)
        if h.ndim != 1 or v.ndim != 1 or g.ndim != 2:
            raise ValueError("expected h (K,), v (M,), g (K, M)")
        if g.shape != (h.shape[0], v.shape[0]):
            raise ValueError(f"g shape {g.shape} inconsistent with K={h.shape[0]}, M={v.shape[0]}")
        for name, arr in (("h", h), ("v", v), ("g", g)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in channel {name}")

    @property
    def K(self) -> int:
        return self.h.shape[0]

    @property
    def M(self) -> int:
        return self.v.shape[0]

    def reflected_terms(self) -> np.ndarray:
        """Per-user, per-sub-surface cascade coefficients conj(g[k,m]) * v[m]."""
        return np.conj(self.g) * self.v[None, :]


def _los_steering(m_count: int, direction_cosine: float) -> np.ndarray:
    """Unit-modulus line-of-sight vector, half-wavelength ULA convention."""
    m_idx = np.arange(m_count)
    return np.exp(-1j * np.pi * m_idx * direction_cosine)


def sample_channels(
    config: SystemConfig, params: ChannelParams, seed: int
) -> ChannelRealization:
    """Draw one channel realization.

    Direct links are Rayleigh; AP-IRS and IRS-user links are Rician
    with deterministic unit-modulus LoS components (ULA steering toward
    the geometric direction) and CN(0, 1) scatter. Deterministic for a
    fixed seed.
    """
    if len(params.d_users) < config.K:
        raise ValueError(
            f"params.d_users has {len(params.d_users)} entries but K={config.K}"
        )
    rng = np.random.default_rng(seed)
    K, M = config.K, config.M

    def cn01(*shape: int) -> np.ndarray:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    h = np.array(
        [np.sqrt(path_loss(params.d_AU(k), params.alpha_AU, params)) for k in range(K)],
        dtype=complex,
    )
    h = h * cn01(K)

    d_ai = params.d_AI()
    v_los = _los_steering(M, params.d_R / d_ai)
    pl_v = path_loss(d_ai, params.alpha_AI, params) if M > 0 else 0.0
    v = np.sqrt(pl_v / (params.K_AI + 1.0)) * (
        np.sqrt(params.K_AI) * v_los + cn01(M)
    )

    g = np.zeros((K, M), dtype=complex)
    for k in range(K):
        d_iu = params.d_IU(k)
        pl_g = path_loss(d_iu, params.alpha_IU, params) if M > 0 else 0.0
        g_los = _los_steering(M, (params.d_users[k] - params.d_R) / d_iu)
        g[k] = np.sqrt(pl_g / (params.K_IU + 1.0)) * (
            np.sqrt(params.K_IU) * g_los + cn01(M)
        )

    return ChannelRealization(h=h, v=v, g=g)


@dataclass(frozen=True)
class PhaseConfig:
    """One reflection pattern: M phase indices, element m applies
    exp(2j*pi*idx[m]/L) with unit amplitude."""

    idx: tuple[int, ...]
    L: int

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if any(i < 0 or i >= self.L for i in self.idx):
            raise ValueError(f"phase indices must lie in [0, {self.L}), got {self.idx}")

    @property
    def M(self) -> int:
        return len(self.idx)

    def phases(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.idx, dtype=float) / self.L

    def coefficients(self) -> np.ndarray:
        """Diagonal of the reflection matrix (unit-modulus)."""
        return np.exp(1j * self.phases())

    def flat_index(self) -> int:
        """Position in lexicographic enumeration order."""
        out = 0
        for i in self.idx:
            out = out * self.L + i
        return out


def phase_config_from_flat(flat: int, M: int, L: int) -> PhaseConfig:
    """Inverse of ``PhaseConfig.flat_index`` (lexicographic, base L)."""
    if flat < 0 or flat >= L**M:
        raise ValueError(f"flat index {flat} out of range for L^M={L**M}")
    digits = []
    for _ in range(M):
        digits.append(flat % L)
        flat //= L
    return PhaseConfig(idx=tuple(reversed(digits)), L=L)


def enumerate_phase_configs(
    config: SystemConfig, budget: int = DEFAULT_ENUM_BUDGET
) -> Iterator[PhaseConfig]:
    """Yield all L**M reflection patterns in lexicographic index order."""
    total = config.n_phase_configs
    if total > budget:
        raise BudgetExceededError(total, budget)
    for flat in range(total):
        yield phase_config_from_flat(flat, config.M, config.L)


def effective_gain(ch: ChannelRealization, theta: PhaseConfig, k: int) -> float:
    """Combined channel power gain |h_k + g_k^H Theta v|^2 for user k."""
    if theta.M != ch.M:
        raise ValueError(f"phase config has M={theta.M}, channels have M={ch.M}")
    amp = ch.h[k] + np.sum(ch.reflected_terms()[k] * theta.coefficients())
    return float(np.abs(amp) ** 2)


def effective_gains(ch: ChannelRealization, theta: PhaseConfig) -> np.ndarray:
    """Combined gains for all users under one reflection pattern."""
    if theta.M != ch.M:
        raise ValueError(f"phase config has M={theta.M}, channels have M={ch.M}")
    amps = ch.h + ch.reflected_terms() @ theta.coefficients()
    return np.abs(amps) ** 2


def aligned_phases(ch: ChannelRealization, k: int) -> tuple[np.ndarray, float]:
    """Continuous phases aligning every reflected term with the direct
    link of user k, and the resulting (maximal) power gain
    (|h_k| + sum_m |conj(g_km) v_m|)^2."""
    terms = ch.reflected_terms()[k]
    phases = np.angle(ch.h[k]) - np.angle(terms)
    gain = float((np.abs(ch.h[k]) + np.sum(np.abs(terms))) ** 2)
    return phases, gain


@dataclass(frozen=True)
class DecodingOrder:
    """Successive-decoding positions. ``mu[k]`` is the 1-based position
    at which user k's signal is decoded; earlier positions must have
    weaker combined gains."""

    mu: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.mu) != list(range(1, len(self.mu) + 1)):
            raise ValueError(f"mu must be a permutation of 1..K, got {self.mu}")

    @property
    def K(self) -> int:
        return len(self.mu)

    def sequence(self) -> tuple[int, ...]:
        """User indices in decode order (0-based users)."""
        seq = [0] * self.K
        for user, pos in enumerate(self.mu):
            seq[pos - 1] = user
        return tuple(seq)

    def interferers(self, k: int) -> tuple[int, ...]:
        """Users decoded after user k (their power interferes at k)."""
        return tuple(i for i in range(self.K) if self.mu[i] > self.mu[k])


def decoding_order(gains: np.ndarray) -> DecodingOrder:
    """Order users by ascending combined gain (weakest decoded first);
    ties broken by ascending user index."""
    gains = np.asarray(gains, dtype=float)
    if np.any(~np.isfinite(gains)) or np.any(gains < 0.0):
        raise ValueError("gains must be finite and non-negative")
    seq = np.argsort(gains, kind="stable")
    mu = np.empty(len(gains), dtype=int)
    mu[seq] = np.arange(1, len(gains) + 1)
    return DecodingOrder(mu=tuple(int(x) for x in mu))


class PhaseGainTable:
    """Precomputed combined gains for every reflection pattern.

    Row c holds the per-user gains of the pattern with flat index c
    (lexicographic order). Also caches the ascending-gain decode
    ordering per row, which is what the weighted-rate maximization
    needs on every dual iteration.
    """

    def __init__(
        self,
        ch: ChannelRealization,
        config: SystemConfig,
        budget: int = DEFAULT_ENUM_BUDGET,
        chunk: int = 2**16,
    ):
        total = config.n_phase_configs
        if total > budget:
            raise BudgetExceededError(total, budget)
        self.ch = ch
        self.config = config
        self.n_configs = total
        K, M, L = config.K, config.M, config.L

        gains = np.empty((total, K), dtype=float)
        terms = ch.reflected_terms()  # (K, M)
        for start in range(0, total, chunk):
            stop = min(start + chunk, total)
            idx = _flat_to_digits(np.arange(start, stop), M, L)
            coeff = np.exp(2j * np.pi * idx / L)  # (rows, M)
            amps = ch.h[None, :] + coeff @ terms.T  # (rows, K)
            gains[start:stop] = np.abs(amps) ** 2
        self.gains = gains
        # stable ascending sort implements the index tie-break
        self.order = np.argsort(gains, axis=1, kind="stable")
        self.gains_sorted = np.take_along_axis(gains, self.order, axis=1)

    def phase_config(self, flat: int) -> PhaseConfig:
        return phase_config_from_flat(int(flat), self.config.M, self.config.L)

    def best_config_for_user(self, k: int) -> tuple[int, float]:
        """Flat index (lexicographically first among ties) and value of
        the pattern maximizing user k's gain."""
        flat = int(np.argmax(self.gains[:, k]))
        return flat, float(self.gains[flat, k])


def _flat_to_digits(flat: np.ndarray, M: int, L: int) -> np.ndarray:
    """Vectorized base-L digit expansion, most-significant digit first."""
    digits = np.empty((flat.shape[0], M), dtype=np.int64)
    rem = flat.astype(np.int64, copy=True)
    for pos in range(M - 1, -1, -1):
        digits[:, pos] = rem % L
        rem //= L
    return digits
