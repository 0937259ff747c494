"""Rate-region engine for the orthogonal-access scheme.

In the ideal reconfiguration limit, every Pareto point is achieved by
serving one user at a time with its combined gain maximized; the
durations come from a small LP whose optimum also has a harmonic-mean
closed form that is cross-checked on every solve. For finitely many
blocks, the ideal schedule is apportioned onto blocks and the remaining
jointly-concave share/power allocation is maximized with the shared
concave engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    DEFAULT_ENUM_BUDGET,
    ChannelRealization,
    PhaseConfig,
    PhaseGainTable,
    aligned_phases,
    effective_gains,
)
from .config import SystemConfig
from .noma import (
    InfeasibleProfileError,
    RateProfile,
    apportion_blocks,
    time_sharing_lp,
)
from .solvers import BlockSimplex, FeasibleProduct, maximize_min_ratio

OMEGA_MIN = 1e-9
OMEGA_SNAP = 1e-6


def oma_rate(gain: float, p: float, omega: float, sigma2: float) -> float:
    """Orthogonal-access rate omega*log2(1 + H p / (omega sigma^2)).

    Defined as 0 at omega = 0 (the continuity limit), which keeps the
    function jointly concave in (omega, p)."""
    if omega < 0.0 or omega > 1.0 or p < 0.0:
        raise ValueError(f"need 0 <= omega <= 1 and p >= 0, got omega={omega}, p={p}")
    if omega == 0.0:
        return 0.0
    return float(omega * np.log2(1.0 + gain * p / (omega * sigma2)))


def oma_rate_grid(gain: float, p: np.ndarray, omega: np.ndarray, sigma2: float) -> np.ndarray:
    """Vectorized ``oma_rate`` with the omega -> 0 limit handled."""
    omega = np.asarray(omega, dtype=float)
    p = np.asarray(p, dtype=float)
    out = np.zeros(np.broadcast_shapes(omega.shape, p.shape))
    pos = omega > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = omega * np.log2(1.0 + gain * p / (omega * sigma2))
    out = np.where(pos, vals, 0.0)
    return out


def best_phase_for_user(
    k: int,
    ch: ChannelRealization,
    config: SystemConfig,
    mode: str = "discrete",
    budget: int = DEFAULT_ENUM_BUDGET,
    table: PhaseGainTable | None = None,
) -> tuple[PhaseConfig | np.ndarray, float]:
    """Reflection pattern maximizing user k's combined gain.

    Discrete mode searches the full pattern set exhaustively with a
    lexicographic tie-break; continuous mode aligns every reflected term
    with the direct link, which upper-bounds every discrete resolution.
    """
    if mode == "continuous":
        return aligned_phases(ch, k)
    if mode != "discrete":
        raise ValueError(f"unknown mode {mode!r}")
    if table is None:
        table = PhaseGainTable(ch, config, budget=budget)
    flat, gain = table.best_config_for_user(k)
    return table.phase_config(flat), gain


@dataclass(frozen=True)
class GammaSolution:
    """Single-user atom: user k served alone, full power and resources,
    under the pattern maximizing its gain."""

    user: int
    theta: PhaseConfig | np.ndarray
    power: np.ndarray
    share: np.ndarray
    rate: float

    def per_user_rates(self) -> np.ndarray:
        out = np.zeros(self.power.shape[0])
        out[self.user] = self.rate
        return out


@dataclass(frozen=True)
class ResourceAllocation:
    """Orthogonal shares and powers per user and block."""

    omega: np.ndarray  # (K, N)
    p: np.ndarray  # (K, N)

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega, dtype=float)
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "p", p)
        if omega.shape != p.shape:
            raise ValueError("omega and p must have matching (K, N) shapes")
        if np.any(omega < -1e-12) or np.any(p < -1e-12):
            raise ValueError("shares and powers must be non-negative")
        if np.any(omega.sum(axis=0) > 1.0 + 1e-9):
            raise ValueError("per-block shares exceed the resource budget")


def harmonic_common_rate(alpha: np.ndarray, rates: np.ndarray) -> float:
    """Closed-form optimum of the single-user time-sharing LP:
    R = 1 / sum_k alpha_k / r_k over the positive-target users."""
    alpha = np.asarray(alpha, dtype=float)
    rates = np.asarray(rates, dtype=float)
    active = alpha > 0.0
    if np.any(rates[active] <= 0.0):
        raise InfeasibleProfileError("positive-target user with zero single-user rate")
    return float(1.0 / np.sum(alpha[active] / rates[active]))


@dataclass
class OmaInfiniteResult:
    value: float
    atoms: tuple[GammaSolution, ...]
    tau: np.ndarray
    rates: np.ndarray
    closed_form: float


def solve_oma_infinite(
    alpha: RateProfile | np.ndarray,
    ch: ChannelRealization,
    config: SystemConfig,
    budget: int = DEFAULT_ENUM_BUDGET,
    table: PhaseGainTable | None = None,
    phase_mode: str = "discrete",
) -> OmaInfiniteResult:
    """Pareto point of the orthogonal-access rate region in the ideal
    reconfiguration limit: single-user atoms time-shared by LP, with the
    harmonic closed form as a mandatory cross-check."""
    profile = alpha if isinstance(alpha, RateProfile) else RateProfile(alpha)
    if profile.K != config.K:
        raise ValueError(f"profile has {profile.K} entries, config K={config.K}")
    K = config.K
    if table is None and phase_mode == "discrete":
        table = PhaseGainTable(ch, config, budget=budget)
    active = profile.active()

    atoms: list[GammaSolution] = []
    single_rates = np.zeros(K)
    for k in active:
        theta, gain = best_phase_for_user(int(k), ch, config, mode=phase_mode, table=table)
        rate = float(np.log2(1.0 + gain * config.P_max / config.sigma2))
        power = np.zeros(K)
        share = np.zeros(K)
        power[k] = config.P_max
        share[k] = 1.0
        atoms.append(GammaSolution(user=int(k), theta=theta, power=power,
                                   share=share, rate=rate))
        single_rates[k] = rate

    closed_form = harmonic_common_rate(profile.alpha, single_rates)
    rate_matrix = np.stack([a.per_user_rates() for a in atoms])
    value, tau = time_sharing_lp(rate_matrix, profile.alpha)
    if abs(value - closed_form) > 1e-9 * max(1.0, abs(closed_form)):
        raise RuntimeError(
            f"time-sharing LP value {value} disagrees with closed form {closed_form}"
        )
    rates = tau @ rate_matrix
    return OmaInfiniteResult(value=value, atoms=tuple(atoms), tau=tau,
                             rates=rates, closed_form=closed_form)


def water_filling_levels(lam: np.ndarray, delta: float, gains: np.ndarray,
                         sigma2: float) -> np.ndarray:
    """Per-user power densities (lam_k / (delta ln2) - sigma^2/H_k)^+
    at a given power-price dual."""
    lam = np.asarray(lam, dtype=float)
    gains = np.asarray(gains, dtype=float)
    if np.any(lam < 0.0) or delta <= 0.0:
        raise ValueError("dual variables must be non-negative and the price positive")
    with np.errstate(divide="ignore"):
        levels = lam / (delta * np.log(2.0)) - sigma2 / gains
    return np.maximum(np.where(np.isfinite(levels), levels, 0.0), 0.0)


def oma_dual_block_solution(
    lam: np.ndarray, gains: np.ndarray, sigma2: float, P_max: float
) -> tuple[int, np.ndarray, np.ndarray, float]:
    """Structure of the per-block dual maximizer: sweep the power price
    until the winning user's density equals the full budget.

    Returns (winner, powers, shares, price); powers and shares come out
    one-hot at the winner, which is the structural fact the ideal-case
    schedule construction relies on."""
    lam = np.asarray(lam, dtype=float)
    gains = np.asarray(gains, dtype=float)

    def winner_level(delta: float) -> tuple[int, float]:
        t = water_filling_levels(lam, delta, gains, sigma2)
        scores = np.where(t > 0.0, lam * np.log2(1.0 + gains * t / sigma2), 0.0)
        k = int(np.argmax(scores))
        return k, float(t[k])

    lo, hi = 1e-12, 1.0
    while winner_level(hi)[1] > P_max:
        hi *= 2.0
        if hi > 1e18:
            raise RuntimeError("power price sweep failed to bracket the budget")
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        if winner_level(mid)[1] > P_max:
            lo = mid
        else:
            hi = mid
    k_star, _ = winner_level(hi)
    p = np.zeros(lam.shape[0])
    w = np.zeros(lam.shape[0])
    p[k_star] = P_max
    w[k_star] = 1.0
    return k_star, p, w, float(hi)


@dataclass
class OmaFiniteResult:
    value: float
    allocation: ResourceAllocation
    theta_blocks: list[PhaseConfig]
    rates: np.ndarray
    infinite: OmaInfiniteResult | None = None


def solve_oma_finite(
    alpha: RateProfile | np.ndarray,
    ch: ChannelRealization,
    config: SystemConfig,
    N: int | None = None,
    theta_blocks: list[PhaseConfig] | None = None,
    budget: int = DEFAULT_ENUM_BUDGET,
    inner_iter: int = 500,
    tol: float = 1e-6,
    infinite_result: OmaInfiniteResult | None = None,
) -> OmaFiniteResult:
    """Inner bound of the rate region for finitely many blocks.

    Blocks are apportioned to the ideal-case single-user atoms, then the
    jointly concave share/power allocation across blocks is maximized
    by common-rate bisection. Sub-threshold shares are snapped to zero
    on output and the reported value is recomputed from the snapped,
    feasible allocation."""
    profile = alpha if isinstance(alpha, RateProfile) else RateProfile(alpha)
    K = config.K
    if theta_blocks is None:
        if N is None:
            raise ValueError("pass N or explicit theta_blocks")
        if infinite_result is None:
            infinite_result = solve_oma_infinite(profile, ch, config, budget=budget)
        keep = infinite_result.tau > 1e-12
        tau = infinite_result.tau[keep] / infinite_result.tau[keep].sum()
        kept_atoms = [a for a, kp in zip(infinite_result.atoms, keep) if kp]
        counts = apportion_blocks(tau, N)
        theta_blocks = []
        for atom, count in zip(kept_atoms, counts):
            theta_blocks.extend([atom.theta] * int(count))
    else:
        if N is not None and N != len(theta_blocks):
            raise ValueError("N inconsistent with theta_blocks")
    N = len(theta_blocks)

    gains = np.empty((K, N))
    for n, theta in enumerate(theta_blocks):
        gains[:, n] = effective_gains(ch, theta)
    active = profile.active()
    if np.any(gains.max(axis=1)[active] <= 0.0):
        raise InfeasibleProfileError("a positive-target user has zero gain in every block")
    sigma2 = config.sigma2

    # x layout: per block n, K shares then K powers
    def idx_omega(n: int, k: int) -> int:
        return n * 2 * K + k

    def idx_power(n: int, k: int) -> int:
        return n * 2 * K + K + k

    blocks = []
    for n in range(N):
        blocks.append(BlockSimplex(indices=tuple(idx_omega(n, k) for k in range(K)),
                                   budget=1.0, lb=OMEGA_MIN, ub=1.0))
        blocks.append(BlockSimplex(indices=tuple(idx_power(n, k) for k in range(K)),
                                   budget=config.P_max))
    feasible = FeasibleProduct(dim=2 * K * N, blocks=tuple(blocks))

    def unpack(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        arr = x.reshape(N, 2 * K)
        return arr[:, :K].T.copy(), arr[:, K:].T.copy()  # omega (K,N), p (K,N)

    def avg_rates(omega: np.ndarray, p: np.ndarray) -> np.ndarray:
        out = np.zeros(K)
        for k in range(K):
            out[k] = oma_rate_grid(1.0, gains[k] * p[k], omega[k], sigma2).sum() / N
        return out

    def values(x: np.ndarray) -> np.ndarray:
        omega, p = unpack(x)
        return avg_rates(omega, p)

    def supergradients(x: np.ndarray) -> np.ndarray:
        omega, p = unpack(x)
        grads = np.zeros((K, 2 * K * N))
        for k in range(K):
            w = np.maximum(omega[k], OMEGA_MIN)
            u = gains[k] * p[k] / (w * sigma2)
            d_p = gains[k] * np.log2(np.e) / (sigma2 * (1.0 + u)) / N
            d_w = (np.log2(1.0 + u) - u / ((1.0 + u) * np.log(2.0))) / N
            for n in range(N):
                grads[k, idx_omega(n, k)] = d_w[n]
                grads[k, idx_power(n, k)] = d_p[n]
        return grads

    # start every block at duration-proportional sharing: strictly
    # positive rates for every targeted user, so the min-ratio ascent
    # never starts on a flat zero plateau
    if infinite_result is not None:
        share0 = np.full(K, OMEGA_MIN)
        for atom, t in zip(infinite_result.atoms, infinite_result.tau):
            share0[atom.user] = max(t, OMEGA_MIN)
    else:
        share0 = np.where(profile.alpha > 0.0, profile.alpha, OMEGA_MIN)
    share0 = share0 / share0.sum()
    x0 = np.zeros(2 * K * N)
    for n in range(N):
        for k in range(K):
            x0[idx_omega(n, k)] = share0[k]
            x0[idx_power(n, k)] = share0[k] * config.P_max

    rate_caps = np.log2(1.0 + gains.max(axis=1) * config.P_max / sigma2)
    r_hi = float(np.min(rate_caps[active] / profile.alpha[active]))

    res = maximize_min_ratio(
        values=values,
        supergradients=supergradients,
        alpha=profile.alpha,
        feasible=feasible,
        x0=x0,
        r_hi=r_hi,
        tol=tol,
        inner_iter=inner_iter,
    )

    omega, p = unpack(res.x)
    omega = np.where(omega <= OMEGA_SNAP, 0.0, omega)
    p = np.where(omega <= 0.0, 0.0, p)
    allocation = ResourceAllocation(omega=omega, p=p)
    rates = avg_rates(omega, p)
    value = float(np.min(rates[active] / profile.alpha[active]))
    return OmaFiniteResult(value=value, allocation=allocation,
                           theta_blocks=theta_blocks, rates=rates,
                           infinite=infinite_result)
