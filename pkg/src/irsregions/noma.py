"""Capacity-region engine for the superposition-coding (NOMA) scheme.

Two solvers share the machinery here:

* ``solve_noma_infinite`` finds exact Pareto points for the ideal case
  where the reflection pattern can be reconfigured continuously: a
  constrained ellipsoid searches the dual variables, the inner weighted
  sum-rate maximization is solved in closed form over cumulative-power
  candidates and exhaustively over reflection patterns, and a final LP
  time-shares the maximizing atoms.
* ``solve_noma_finite`` builds an inner bound for a finite number of
  reconfiguration blocks: the ideal schedule is apportioned onto blocks
  and the remaining power allocation is solved by successive convex
  approximation with tangent lower bounds on each rate.

Power is tracked through cumulative tail sums q_i = sum of the powers
of the i-th and all later-decoded users, so the per-user rate telescopes
into log2(sigma^2 + H q_i) - log2(sigma^2 + H q_{i+1}).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .channel import (
    DEFAULT_ENUM_BUDGET,
    ChannelRealization,
    DecodingOrder,
    PhaseConfig,
    PhaseGainTable,
    decoding_order,
    effective_gains,
)
from .config import SystemConfig
from .solvers import (
    BlockSimplex,
    FeasibleProduct,
    LinearProgram,
    LPStatus,
    ellipsoid_minimize,
    lp_solve,
    maximize_min_ratio,
)

MAX_USERS_CANDIDATES = 6
ATOM_REL_TOL = 1e-6
MAX_ATOMS = 256


class InfeasibleProfileError(RuntimeError):
    """A user has a positive rate target but zero gain everywhere."""


@dataclass(frozen=True)
class RateProfile:
    """Target per-user share of the common rate; normalized to sum 1."""

    alpha: np.ndarray

    def __post_init__(self) -> None:
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if np.any(a < 0.0) or not np.all(np.isfinite(a)):
            raise ValueError("profile entries must be finite and non-negative")
        total = a.sum()
        if total <= 0.0:
            raise ValueError("profile must have a positive entry")
        object.__setattr__(self, "alpha", a / total)

    @property
    def K(self) -> int:
        return self.alpha.shape[0]

    def active(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0.0)


@dataclass(frozen=True)
class PowerCandidate:
    """Cumulative powers along the decode order.

    q[i] is the total power of the users decoded at positions i..K-1, so
    q[0] = P_max and the chain is non-increasing. p = -diff(q) are the
    per-position powers; ``active`` marks served positions.
    """

    q: tuple[float, ...]
    P_max: float

    def __post_init__(self) -> None:
        q = tuple(float(v) for v in self.q)
        object.__setattr__(self, "q", q)
        if abs(q[0] - self.P_max) > 1e-9 * max(1.0, self.P_max):
            raise ValueError(f"q[0]={q[0]} must equal P_max={self.P_max}")
        for a, b in zip(q, q[1:]):
            if b > a + 1e-9 * max(1.0, self.P_max):
                raise ValueError(f"cumulative powers must be non-increasing, got {q}")
        if q[-1] < -1e-12:
            raise ValueError("cumulative powers must be non-negative")

    @property
    def p(self) -> tuple[float, ...]:
        q = self.q + (0.0,)
        return tuple(max(q[i] - q[i + 1], 0.0) for i in range(len(self.q)))

    @property
    def active_pattern(self) -> tuple[bool, ...]:
        scale = 1e-12 * max(1.0, self.P_max)
        return tuple(pi > scale for pi in self.p)


@dataclass(frozen=True)
class SolutionAtom:
    """One (reflection pattern, power split, decode order) maximizer."""

    theta: PhaseConfig
    candidate: PowerCandidate
    order: DecodingOrder
    per_user_rates: np.ndarray
    weighted_value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_user_rates",
                           np.asarray(self.per_user_rates, dtype=float))

    def per_user_powers(self) -> np.ndarray:
        """Powers indexed by user (not decode position)."""
        p = np.zeros(self.order.K)
        seq = self.order.sequence()
        for pos, user in enumerate(seq):
            p[user] = self.candidate.p[pos]
        return p


@dataclass(frozen=True)
class TimeSharingSchedule:
    """Atoms plus the fraction of the block spent on each."""

    atoms: tuple[SolutionAtom, ...]
    tau: np.ndarray

    def __post_init__(self) -> None:
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        object.__setattr__(self, "tau", tau)
        if tau.shape[0] != len(self.atoms):
            raise ValueError("one duration per atom required")
        if np.any(tau < -1e-12) or abs(tau.sum() - 1.0) > 1e-9:
            raise ValueError(f"durations must be non-negative and sum to 1, got {tau}")

    def average_rates(self) -> np.ndarray:
        rates = np.stack([a.per_user_rates for a in self.atoms])
        return self.tau @ rates

    def mixed_with(self, other: "TimeSharingSchedule", nu: float) -> "TimeSharingSchedule":
        """Convex mixture: this schedule for a nu fraction, other for 1-nu."""
        if not 0.0 <= nu <= 1.0:
            raise ValueError("mixing fraction must lie in [0, 1]")
        return TimeSharingSchedule(
            atoms=self.atoms + other.atoms,
            tau=np.concatenate([nu * self.tau, (1.0 - nu) * other.tau]),
        )


def noma_rate(gain: float, candidate: PowerCandidate, order: DecodingOrder,
              k: int, sigma2: float) -> float:
    """Achievable rate of user k under successive decoding (bit/s/Hz)."""
    pos = order.mu[k] - 1
    q = candidate.q + (0.0,)
    return float(np.log2((sigma2 + gain * q[pos]) / (sigma2 + gain * q[pos + 1])))


def rates_from_chain(gains_sorted: np.ndarray, q: np.ndarray, sigma2: float) -> np.ndarray:
    """Per-position rates for gains/cumulative powers in decode order."""
    q_next = np.concatenate([q[..., 1:], np.zeros(q.shape[:-1] + (1,))], axis=-1)
    return np.log2((sigma2 + gains_sorted * q) / (sigma2 + gains_sorted * q_next))


def weighted_sum_rate(lam: np.ndarray, theta: PhaseConfig, q: np.ndarray,
                      ch: ChannelRealization, config: SystemConfig) -> float:
    """Dual-weighted sum rate as a function of cumulative powers.

    Evaluates the telescoped form: the first decoded user contributes
    lam*log2(sigma^2 + H q_1), the tail contributes the paired
    log-differences, and the constant -lam_K*log2(sigma^2) closes it.
    Equals sum_k lam_k * rate_k for the induced power split.
    """
    lam = np.asarray(lam, dtype=float)
    q = np.asarray(q, dtype=float)
    gains = effective_gains(ch, theta)
    order = decoding_order(gains)
    seq = list(order.sequence())
    lam_s = lam[seq]
    h_s = gains[seq]
    s2 = config.sigma2
    val = lam_s[0] * np.log2(s2 + h_s[0] * q[0]) - lam_s[-1] * np.log2(s2)
    for i in range(1, len(seq)):
        val += lam_s[i] * np.log2(s2 + h_s[i] * q[i])
        val -= lam_s[i - 1] * np.log2(s2 + h_s[i - 1] * q[i])
    return float(val)


def stationary_cumulative_power(
    lam_prev: float, lam_cur: float, h_prev: float, h_cur: float,
    P_max: float, sigma2: float,
) -> float | None:
    """Interior stationary point of one cumulative-power coordinate.

    Solves d/dq [lam_cur*log2(s2+h_cur*q) - lam_prev*log2(s2+h_prev*q)] = 0
    and clips to [0, P_max]. Returns None when the dual weights tie (the
    objective is then monotone in q and the maximum sits on a vertex
    that other candidates already cover).
    """
    scale = max(abs(lam_prev), abs(lam_cur), 1e-300)
    if abs(lam_cur - lam_prev) <= 1e-12 * scale:
        return None
    if h_prev <= 0.0 or h_cur <= 0.0:
        return None
    q = sigma2 * (lam_prev / h_cur - lam_cur / h_prev) / (lam_cur - lam_prev)
    return float(min(max(q, 0.0), P_max))


# Chain relation patterns. For K users the constraint chain
# P_max = q_1 >= q_2 >= ... >= q_K >= 0 carries K relation slots; each
# is either an equality or strict, and the all-equal pattern is
# infeasible, leaving 2^K - 1 candidates.
def _chain_patterns(K: int) -> list[tuple[bool, ...]]:
    pats = [p for p in product((True, False), repeat=K) if not all(p)]
    return pats  # True = equality at that slot


def _pattern_groups(pattern: tuple[bool, ...]) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Split q indices 1..K-1 into segments tied together by equalities.

    Returns (free_groups, top_tied, zero_tied) where each free group is
    an inclusive (start, end) index range strictly between its
    neighbors, top_tied indices equal q_0 = P_max, and zero_tied equal 0.
    """
    K = len(pattern)
    top_tied: list[int] = []
    zero_tied: list[int] = []
    free_groups: list[tuple[int, int]] = []
    i = 1
    # indices tied to the top through leading equalities
    while i <= K - 1 and pattern[i - 1]:
        top_tied.append(i)
        i += 1
    # indices tied to zero through trailing equalities
    j = K - 1
    tail: list[int] = []
    while j >= i and pattern[j]:
        tail.append(j)
        j -= 1
    zero_tied = sorted(tail)
    # remaining indices form free groups glued by internal equalities
    k = i
    while k <= j:
        start = k
        while k + 1 <= j and pattern[k]:
            k += 1
        free_groups.append((start, k))
        k += 1
    return free_groups, top_tied, zero_tied


def _phi_rows(lam_s: np.ndarray, h_s: np.ndarray, q: np.ndarray, sigma2: float) -> np.ndarray:
    """Row-wise dual-weighted sum rate for (rows, K) inputs."""
    return np.sum(lam_s * rates_from_chain(h_s, q, sigma2), axis=-1)


def _pattern_q_rows(
    pattern: tuple[bool, ...],
    lam_s: np.ndarray,
    h_s: np.ndarray,
    P_max: float,
    sigma2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate cumulative powers for one chain pattern, row-wise.

    For every merged group the stationary point of the telescoped group
    objective uses the bracketing indices (neighbor above the group,
    last index of the group); for groups of size > 1 the literal
    variant bracketed by the last two indices is also evaluated and the
    better of the two kept. Rows whose stationary point is undefined
    (tied dual weights) are flagged invalid.
    """
    rows, K = lam_s.shape
    free_groups, top_tied, zero_tied = _pattern_groups(pattern)
    q = np.zeros((rows, K))
    q[:, 0] = P_max
    for i in top_tied:
        q[:, i] = P_max
    valid = np.ones(rows, dtype=bool)

    def stationary(a: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        la, lj = lam_s[:, a], lam_s[:, j]
        ha, hj = h_s[:, a], h_s[:, j]
        scale = np.maximum(np.abs(la), np.abs(lj)) + 1e-300
        ok = (np.abs(lj - la) > 1e-12 * scale) & (ha > 0.0) & (hj > 0.0)
        qv = np.zeros(rows)
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = sigma2 * (la / hj - lj / ha) / (lj - la)
        qv[ok] = np.clip(raw[ok], 0.0, P_max)
        return qv, ok

    variants: list[tuple[np.ndarray, np.ndarray]] = [(q, valid)]
    for start, end in free_groups:
        new_variants: list[tuple[np.ndarray, np.ndarray]] = []
        fills: list[tuple[np.ndarray, np.ndarray]] = [stationary(start - 1, end)]
        if end > start:
            fills.append(stationary(end - 1, end))
        for base_q, base_ok in variants:
            for qv, ok in fills:
                q2 = base_q.copy()
                q2[:, start : end + 1] = qv[:, None]
                new_variants.append((q2, base_ok & ok))
        variants = new_variants

    # enforce the chain by clipping against the upper neighbor, then
    # keep the better variant per row
    best_q = None
    best_phi = None
    best_ok = None
    for q2, ok in variants:
        for i in range(1, K):
            q2[:, i] = np.minimum(q2[:, i], q2[:, i - 1])
        phi = _phi_rows(lam_s, h_s, q2, sigma2)
        phi = np.where(ok, phi, -np.inf)
        if best_q is None:
            best_q, best_phi, best_ok = q2, phi, ok
        else:
            better = phi > best_phi
            best_q = np.where(better[:, None], q2, best_q)
            best_phi = np.where(better, phi, best_phi)
            best_ok = best_ok | ok
    return best_q, best_ok


def enumerate_power_candidates(
    lam: np.ndarray, theta: PhaseConfig, ch: ChannelRealization, config: SystemConfig
) -> list[PowerCandidate]:
    """All cumulative-power candidates for one reflection pattern.

    One candidate per equality/strict pattern of the power chain, at
    most 2^K - 1; patterns whose interior stationary point is undefined
    are dropped.
    """
    K = config.K
    if K > MAX_USERS_CANDIDATES:
        raise ValueError(f"candidate enumeration supports K <= {MAX_USERS_CANDIDATES}")
    gains = effective_gains(ch, theta)
    order = decoding_order(gains)
    seq = list(order.sequence())
    lam_s = np.asarray(lam, dtype=float)[seq][None, :]
    h_s = gains[seq][None, :]
    out: list[PowerCandidate] = []
    for pattern in _chain_patterns(K):
        q, ok = _pattern_q_rows(pattern, lam_s, h_s, config.P_max, config.sigma2)
        if ok[0]:
            out.append(PowerCandidate(q=tuple(q[0]), P_max=config.P_max))
    return out


@dataclass
class DualEvaluation:
    """Result of maximizing the dual-weighted sum rate over all patterns."""

    value: float
    best: SolutionAtom
    atoms: list[SolutionAtom]


def _build_atom(table: PhaseGainTable, flat: int, q: np.ndarray, lam: np.ndarray) -> SolutionAtom:
    config = table.config
    gains = table.gains[flat]
    order = decoding_order(gains)
    seq = list(order.sequence())
    rates_sorted = rates_from_chain(gains[seq], q, config.sigma2)
    rates_user = np.zeros(config.K)
    rates_user[seq] = rates_sorted
    lam_s = np.asarray(lam, dtype=float)[seq]
    return SolutionAtom(
        theta=table.phase_config(flat),
        candidate=PowerCandidate(q=tuple(q), P_max=config.P_max),
        order=order,
        per_user_rates=rates_user,
        weighted_value=float(lam_s @ rates_sorted),
    )


def _candidate_q_row(pattern: tuple[bool, ...], lam: np.ndarray,
                     table: PhaseGainTable, flat: int) -> np.ndarray:
    config = table.config
    seq_order = table.order[flat]
    lam_s = np.asarray(lam, dtype=float)[seq_order][None, :]
    h_s = table.gains_sorted[flat][None, :]
    q, _ = _pattern_q_rows(pattern, lam_s, h_s, config.P_max, config.sigma2)
    return q[0]


def evaluate_dual(
    lam: np.ndarray,
    table: PhaseGainTable,
    rel_tol: float = ATOM_REL_TOL,
    max_atoms: int = MAX_ATOMS,
    collect: bool = True,
) -> DualEvaluation:
    """Maximize the dual-weighted sum rate over every reflection pattern
    and power-chain candidate. With ``collect`` the near-optimal atoms
    within rel_tol of the maximum are gathered (deduplicated by their
    rate tuple); without it only the maximizer is materialized, which is
    what the dual search needs on every iteration."""
    config = table.config
    lam = np.asarray(lam, dtype=float)
    C, K = table.gains.shape
    lam_s = lam[table.order]
    h_s = table.gains_sorted
    patterns = _chain_patterns(K)

    value = -np.inf
    best_pi = best_c = 0
    phi_rows: list[np.ndarray] = []
    for pi, pattern in enumerate(patterns):
        q, ok = _pattern_q_rows(pattern, lam_s, h_s, config.P_max, config.sigma2)
        phi = np.where(ok, _phi_rows(lam_s, h_s, q, config.sigma2), -np.inf)
        if collect:
            phi_rows.append(phi)
        c = int(np.argmax(phi))
        if phi[c] > value:
            value, best_pi, best_c = float(phi[c]), pi, c

    best_atom = _build_atom(
        table, best_c, _candidate_q_row(patterns[best_pi], lam, table, best_c), lam
    )
    atoms: list[SolutionAtom] = []
    if collect:
        threshold = value - rel_tol * max(abs(value), 1e-12)
        near = [(c, pi) for pi, phi in enumerate(phi_rows)
                for c in np.flatnonzero(phi >= threshold)]
        near.sort()
        seen: set[tuple] = set()
        for c, pi in near:
            atom = _build_atom(
                table, int(c), _candidate_q_row(patterns[pi], lam, table, int(c)), lam
            )
            key = tuple(np.round(atom.per_user_rates, 9))
            if key in seen:
                continue
            seen.add(key)
            atoms.append(atom)
            if len(atoms) >= max_atoms:
                break
    return DualEvaluation(value=value, best=best_atom, atoms=atoms)


def time_sharing_lp(rate_matrix: np.ndarray, alpha: np.ndarray) -> tuple[float, np.ndarray]:
    """Optimal durations over atoms: max R s.t. sum_w tau_w r_kw >= alpha_k R,
    sum tau = 1. rate_matrix is (n_atoms, K)."""
    rate_matrix = np.atleast_2d(np.asarray(rate_matrix, dtype=float))
    n_atoms, K = rate_matrix.shape
    # variables: [R, tau_1..tau_n]
    c = np.zeros(n_atoms + 1)
    c[0] = 1.0
    A_ub = np.zeros((K, n_atoms + 1))
    A_ub[:, 0] = alpha
    A_ub[:, 1:] = -rate_matrix.T
    b_ub = np.zeros(K)
    A_eq = np.zeros((1, n_atoms + 1))
    A_eq[0, 1:] = 1.0
    res = lp_solve(LinearProgram(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.array([1.0])))
    if res.status is not LPStatus.OPTIMAL:
        raise RuntimeError(f"time-sharing LP ended with status {res.status}")
    return float(res.value), res.x[1:]


@dataclass
class NomaInfiniteResult:
    value: float
    schedule: TimeSharingSchedule
    rates: np.ndarray
    dual: np.ndarray
    dual_value: float
    duality_gap: float
    iterations: int
    degraded: bool


def solve_noma_infinite(
    alpha: RateProfile | np.ndarray,
    ch: ChannelRealization,
    config: SystemConfig,
    budget: int = DEFAULT_ENUM_BUDGET,
    eps: float = 1e-4,
    table: PhaseGainTable | None = None,
) -> NomaInfiniteResult:
    """Pareto point of the capacity region in the ideal reconfiguration
    limit: ellipsoid search over the dual weights, exhaustive inner
    maximization, then time-sharing LP over the collected atoms."""
    profile = alpha if isinstance(alpha, RateProfile) else RateProfile(alpha)
    if profile.K != config.K:
        raise ValueError(f"profile has {profile.K} entries, config K={config.K}")
    if table is None:
        table = PhaseGainTable(ch, config, budget=budget)
    active = profile.active()
    K = config.K

    if active.size == 1:
        k = int(active[0])
        flat, gain = table.best_config_for_user(k)
        pos = decoding_order(table.gains[flat]).mu[k] - 1
        q = np.where(np.arange(K) <= pos, config.P_max, 0.0)  # lone user takes all power
        lam = np.zeros(K)
        lam[k] = 1.0 / profile.alpha[k]
        atom = _build_atom(table, flat, q, lam)
        schedule = TimeSharingSchedule(atoms=(atom,), tau=np.array([1.0]))
        rate = float(atom.per_user_rates[k])
        value = rate / profile.alpha[k]
        return NomaInfiniteResult(
            value=value, schedule=schedule, rates=schedule.average_rates(),
            dual=lam, dual_value=value, duality_gap=0.0, iterations=0, degraded=False,
        )

    union: dict[tuple, SolutionAtom] = {}

    def embed(lam_active: np.ndarray) -> np.ndarray:
        lam = np.zeros(K)
        lam[active] = lam_active
        return lam

    def oracle(lam_active: np.ndarray) -> tuple[float, np.ndarray]:
        de = evaluate_dual(embed(lam_active), table, collect=False)
        key = tuple(np.round(de.best.per_user_rates, 9))
        union.setdefault(key, de.best)
        return de.value, de.best.per_user_rates[active]

    res = ellipsoid_minimize(oracle, a=profile.alpha[active], rhs=1.0, eps=eps)
    lam_star = embed(res.x)
    final = evaluate_dual(lam_star, table)
    for atom in final.atoms:
        key = tuple(np.round(atom.per_user_rates, 9))
        union.setdefault(key, atom)

    atoms = [union[k] for k in sorted(union.keys())]
    rate_matrix = np.stack([a.per_user_rates for a in atoms])
    value, tau = time_sharing_lp(rate_matrix, profile.alpha)
    keep = tau > 1e-12
    schedule = TimeSharingSchedule(
        atoms=tuple(a for a, kp in zip(atoms, keep) if kp),
        tau=tau[keep] / tau[keep].sum(),
    )
    dual_value = min(res.value, final.value)
    gap = abs(dual_value - value) / max(abs(dual_value), 1e-12)
    return NomaInfiniteResult(
        value=value,
        schedule=schedule,
        rates=schedule.average_rates(),
        dual=lam_star,
        dual_value=dual_value,
        duality_gap=gap,
        iterations=res.iterations,
        degraded=res.degraded,
    )


def apportion_blocks(tau: np.ndarray, N: int) -> np.ndarray:
    """Largest-remainder apportionment of N blocks to durations tau.

    Guarantees the counts sum to exactly N (independent nearest-integer
    rounding can over- or under-shoot)."""
    tau = np.asarray(tau, dtype=float)
    if N < 1:
        raise ValueError("need at least one block")
    shares = tau * N / tau.sum()
    counts = np.floor(shares).astype(int)
    rest = N - counts.sum()
    remainders = shares - counts
    for idx in np.lexsort((np.arange(len(tau)), -remainders))[:rest]:
        counts[idx] += 1
    return counts


def build_theta_schedule(schedule: TimeSharingSchedule, N: int) -> tuple[list[PhaseConfig], np.ndarray]:
    """Assign the N reflection blocks to schedule atoms by
    largest-remainder apportionment. Atoms receiving zero blocks are
    dropped. Returns (per-block reflection pattern, per-block atom index)."""
    counts = apportion_blocks(schedule.tau, N)
    thetas: list[PhaseConfig] = []
    atom_of_block = []
    for idx, count in enumerate(counts):
        thetas.extend([schedule.atoms[idx].theta] * int(count))
        atom_of_block.extend([idx] * int(count))
    return thetas, np.asarray(atom_of_block, dtype=int)


def sca_rate_lower_bound(
    gain: np.ndarray,
    interference: np.ndarray,
    interference_local: np.ndarray,
    received: np.ndarray,
    sigma2: float,
) -> np.ndarray:
    """Tangent lower bound on log2(g*P + s2) - log2(g*Q + s2).

    ``received`` is the own-plus-interference power sum P, ``interference``
    the current Q and ``interference_local`` the expansion point. Exact at
    Q = Q_local, below the true rate elsewhere.
    """
    gain = np.asarray(gain, dtype=float)
    t0 = np.log2(gain * received + sigma2)
    t1 = np.log2(gain * interference_local + sigma2)
    slope = gain * np.log2(np.e) / (gain * interference_local + sigma2)
    return t0 - t1 - slope * (np.asarray(interference) - np.asarray(interference_local))


@dataclass
class NomaFiniteResult:
    value: float
    powers: np.ndarray  # (K, N)
    theta_blocks: list[PhaseConfig]
    rates: np.ndarray
    history: list[float]
    infinite: NomaInfiniteResult | None = None


def _block_structure(ch: ChannelRealization, config: SystemConfig,
                     theta_blocks: list[PhaseConfig]) -> tuple[np.ndarray, np.ndarray]:
    """Per-block gains (K, N) and interference masks (N, K, K).

    mask[n, k, i] = 1 when user i is decoded after user k in block n,
    i.e. its power interferes at user k."""
    N = len(theta_blocks)
    K = config.K
    gains = np.empty((K, N))
    mask = np.zeros((N, K, K))
    for n, theta in enumerate(theta_blocks):
        g = effective_gains(ch, theta)
        gains[:, n] = g
        order = decoding_order(g)
        for k in range(K):
            for i in order.interferers(k):
                mask[n, k, i] = 1.0
    return gains, mask


def noma_block_rates(p: np.ndarray, gains: np.ndarray, mask: np.ndarray,
                     sigma2: float) -> np.ndarray:
    """True per-user per-block rates for powers p (K, N)."""
    K, N = p.shape
    rates = np.empty((K, N))
    for n in range(N):
        interf = mask[n] @ p[:, n]
        rates[:, n] = np.log2(1.0 + gains[:, n] * p[:, n] / (gains[:, n] * interf + sigma2))
    return rates


def solve_noma_finite(
    alpha: RateProfile | np.ndarray,
    ch: ChannelRealization,
    config: SystemConfig,
    N: int | None = None,
    theta_blocks: list[PhaseConfig] | None = None,
    budget: int = DEFAULT_ENUM_BUDGET,
    max_outer: int = 100,
    rel_tol: float = 1e-5,
    inner_iter: int = 400,
    infinite_result: NomaInfiniteResult | None = None,
) -> NomaFiniteResult:
    """Inner bound of the capacity region for finitely many blocks.

    Builds the block schedule from the ideal-case solution (unless
    explicit reflection patterns are given), then alternates tangent
    lower bounds with common-rate maximization. Reported value is the
    true common rate of the final feasible powers, so it is an attained
    inner-bound point; the iteration history is non-decreasing.
    """
    profile = alpha if isinstance(alpha, RateProfile) else RateProfile(alpha)
    if theta_blocks is None:
        if N is None:
            raise ValueError("pass N or explicit theta_blocks")
        if infinite_result is None:
            infinite_result = solve_noma_infinite(profile, ch, config, budget=budget)
        theta_blocks, atom_of_block = build_theta_schedule(infinite_result.schedule, N)
        p0 = np.stack(
            [infinite_result.schedule.atoms[a].per_user_powers() for a in atom_of_block],
            axis=1,
        )
    else:
        if N is not None and N != len(theta_blocks):
            raise ValueError("N inconsistent with theta_blocks")
        N = len(theta_blocks)
        p0 = np.full((config.K, N), config.P_max / config.K)

    K = config.K
    N = len(theta_blocks)
    gains, mask = _block_structure(ch, config, theta_blocks)
    active = profile.active()
    if np.any(gains.max(axis=1)[active] <= 0.0):
        raise InfeasibleProfileError("a positive-target user has zero gain in every block")
    sigma2 = config.sigma2

    feasible = FeasibleProduct(
        dim=K * N,
        blocks=tuple(
            BlockSimplex(indices=tuple(n * K + k for k in range(K)), budget=config.P_max)
            for n in range(N)
        ),
    )

    def unpack(x: np.ndarray) -> np.ndarray:
        return x.reshape(N, K).T  # (K, N)

    def pack(p: np.ndarray) -> np.ndarray:
        return p.T.reshape(-1)

    def true_common_rate(p: np.ndarray) -> tuple[float, np.ndarray]:
        rates = noma_block_rates(p, gains, mask, sigma2).mean(axis=1)
        value = float(np.min(rates[active] / profile.alpha[active]))
        return value, rates

    rate_caps = np.log2(1.0 + gains.max(axis=1) * config.P_max / sigma2)
    r_hi = float(np.min(rate_caps[active] / profile.alpha[active]))

    x = pack(p0)
    best_value, best_rates = true_common_rate(unpack(x))
    if best_value <= 0.0:
        # a schedule atom can starve a targeted user; uniform power is
        # always strictly positive for positive gains
        x = pack(np.full((K, N), config.P_max / K))
        best_value, best_rates = true_common_rate(unpack(x))
    best_x = x.copy()
    history = [best_value]

    own_sum = mask + np.eye(K)[None, :, :]

    for _ in range(max_outer):
        p_loc = unpack(best_x)
        q_loc = np.einsum("nki,in->kn", mask, p_loc)
        # tangent pieces that depend only on the expansion point
        slope = gains * np.log2(np.e) / (gains * q_loc + sigma2)  # (K, N)
        const = np.log2(gains * q_loc + sigma2) - slope * q_loc  # (K, N)

        def lb_values(xv: np.ndarray) -> np.ndarray:
            p = unpack(xv)
            recv = np.einsum("nki,in->kn", own_sum, p)
            interf = np.einsum("nki,in->kn", mask, p)
            lb = np.log2(gains * recv + sigma2) - const - slope * interf
            return lb.mean(axis=1)

        def lb_supergradients(xv: np.ndarray) -> np.ndarray:
            p = unpack(xv)
            recv = np.einsum("nki,in->kn", own_sum, p)
            coef = gains * np.log2(np.e) / (gains * recv + sigma2)  # (K, N)
            grads = np.empty((K, K * N))
            for k in range(K):
                gk = own_sum[:, k, :] * coef[k][:, None] - mask[:, k, :] * slope[k][:, None]
                grads[k] = gk.reshape(-1) / N
            return grads

        res = maximize_min_ratio(
            values=lb_values,
            supergradients=lb_supergradients,
            alpha=profile.alpha,
            feasible=feasible,
            x0=best_x,
            r_hi=r_hi,
            inner_iter=inner_iter,
        )
        value, rates = true_common_rate(unpack(res.x))
        if value > best_value:
            improvement = (value - best_value) / max(best_value, 1e-12)
            best_value, best_rates, best_x = value, rates, res.x.copy()
            history.append(best_value)
            if improvement < rel_tol:
                break
        else:
            break

    return NomaFiniteResult(
        value=best_value,
        powers=unpack(best_x),
        theta_blocks=theta_blocks,
        rates=best_rates,
        history=history,
        infinite=infinite_result,
    )
