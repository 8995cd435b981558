"""Weighted unilateral shifts at finite horizon.

A weight rule w : N -> (0, inf) defines T e_j = w(j) e_{j+1}.  Everything the
examples need lives on the first basis vector:

    a_n = <T*^n T^n e_1, e_1> = prod_{j<=n} w(j)^2,
    ||T^n||^2 = sup over start positions of the window product of w(j)^2.

Both are computed in log2 space; for the built-in examples the weights are
powers of sqrt(2), so the exponents are exact integers at any horizon (the
raw values overflow doubles long before the exponents lose exactness).

The built-in rules place events at powers of three:

    example1: boost at j = 3^l, damp at j = 3^l + l   (Cesaro mean converges)
    example2: boost at j = 3^l, damp at j = 2 * 3^l   (Cesaro mean oscillates)
    example3: boost on every j in [3^l, 3^l + l)      (power norms unbounded)

``banach_bracket`` estimates the attainable range of generalized (Banach)
limits of the a_n sequence by the Lorentz recipe: averaging over shift
tuples (n_1..n_p) can only shrink the [liminf, limsup] interval, and the
range is exactly [sup of liminfs, inf of limsups] over all tuples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import HorizonTooSmall, MatrixFileError

__all__ = [
    "ShiftRule",
    "RunRule",
    "DiagonalTrace",
    "CesaroVerdict",
    "PowerVerdict",
    "BanachBracket",
    "evaluate",
    "cesaro_verdict",
    "powerbounded_verdict",
    "banach_bracket",
    "shifted_average",
    "probe_scales",
    "HORIZON_CEILING",
]

HORIZON_CEILING = 10**7
_VERDICT_MIN_HORIZON = 3**6
_BANACH_MIN_HORIZON = 3**8
_DIVERGENCE_LEVEL = 1e6
_GROWTH_GAIN_FLOOR = 4   # log2 units of ||T^n||^2 before we call it unbounded


@dataclass(frozen=True)
class RunRule:
    """One family of weighted runs: for l = 1, 2, ... the positions
    [base^l + offset, base^l + offset + length(l)) get weight ``value``.

    length(l) is 1 for kind "power_set"; for kind "window" it is either the
    scale index l (length_fn = "l") or a constant (length_fn = "const:c").
    """

    kind: str          # "power_set" | "window"
    base: int
    offset: int = 0
    length_fn: str = "const:1"
    value: float = 1.0

    def length_at(self, l: int) -> int:
        if self.kind == "power_set":
            return 1
        if self.length_fn == "l":
            return l
        if self.length_fn.startswith("const:"):
            return int(self.length_fn.split(":", 1)[1])
        raise MatrixFileError(f"unknown length_fn {self.length_fn!r}")


@dataclass(frozen=True)
class ShiftRule:
    name: str                 # "example1" | "example2" | "example3" | "custom"
    default: float = 1.0
    rules: tuple = ()

    @staticmethod
    def example(n: int) -> "ShiftRule":
        if n not in (1, 2, 3):
            raise ValueError("built-in examples are 1, 2, 3")
        return ShiftRule(name=f"example{n}")

    @staticmethod
    def custom(default: float = 1.0, rules=()) -> "ShiftRule":
        return ShiftRule(name="custom", default=float(default), rules=tuple(rules))

    @staticmethod
    def from_json(obj) -> "ShiftRule":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            default = float(obj.get("default", 1.0))
            rules = tuple(
                RunRule(
                    kind=str(r["kind"]),
                    base=int(r["base"]),
                    offset=int(r.get("offset", 0)),
                    length_fn=str(r.get("length_fn", "const:1")),
                    value=float(r["value"]),
                )
                for r in obj.get("rules", ())
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MatrixFileError(f"bad shift rule: {exc}") from exc
        for r in rules:
            if r.kind not in ("power_set", "window"):
                raise MatrixFileError(f"unknown rule kind {r.kind!r}")
            if r.base < 2:
                raise MatrixFileError("rule base must be >= 2")
            r.length_at(1)  # validates length_fn
        return ShiftRule.custom(default, rules)


@dataclass(frozen=True)
class DiagonalTrace:
    """Diagonal sequence data for e_1 plus window power norms.

    ``a_log2`` carries log2(a_n) exactly (integer-valued for the built-in
    examples); ``power_log2[n-1]`` is log2(||T^n||^2) for n up to the power
    cap used at evaluation time.
    """

    horizon: int
    a: np.ndarray
    cesaro: np.ndarray
    power_norm: np.ndarray
    a_log2: np.ndarray
    power_log2: np.ndarray
    exact_dyadic: bool


def _weight_log2(rule: ShiftRule, horizon: int) -> tuple[np.ndarray, bool]:
    """log2(w(j)^2) for j = 1..horizon; exact int64 for the built-ins."""
    N = horizon
    if rule.name in ("example1", "example2", "example3"):
        e = np.zeros(N + 1, dtype=np.int64)
        l = 1
        while 3**l <= N:
            p = 3**l
            if rule.name == "example1":
                e[p] += 1
                if p + l <= N:
                    e[p + l] -= 1
            elif rule.name == "example2":
                e[p] += 1
                if 2 * p <= N:
                    e[2 * p] -= 1
            else:
                hi = min(p + l - 1, N)
                e[p : hi + 1] += 1
            l += 1
        return e[1:], True
    if rule.name != "custom":
        raise ValueError(f"unknown rule name {rule.name!r}")
    if not (rule.default > 0 and math.isfinite(rule.default)):
        raise MatrixFileError("default weight must be positive and finite")
    w = np.full(N + 1, float(rule.default))
    for r in rule.rules:
        if not (r.value > 0 and math.isfinite(r.value)):
            raise MatrixFileError("rule weights must be positive and finite")
        l = 1
        while r.base**l + r.offset <= N:
            start = r.base**l + r.offset
            if start >= 1:
                stop = min(start + r.length_at(l) - 1, N)
                w[start : stop + 1] = r.value
            l += 1
    return 2.0 * np.log2(w[1:]), False


def evaluate(
    rule: ShiftRule,
    horizon: int,
    power_cap: int = 512,
) -> DiagonalTrace:
    """Exact diagonal and window-norm sequences up to the horizon.

    power_cap limits how many window lengths n get a power norm; each one
    costs a full scan of the horizon.
    """
    if horizon < 1:
        raise HorizonTooSmall("horizon must be >= 1")
    if horizon > HORIZON_CEILING:
        raise ValueError(f"horizon above the supported ceiling {HORIZON_CEILING}")
    w2, exact = _weight_log2(rule, horizon)
    elog = np.cumsum(w2)
    a = np.exp2(elog.astype(float))
    cesaro = np.cumsum(a) / np.arange(1, horizon + 1)

    cap = min(power_cap, horizon)
    prefix = np.concatenate([[0], elog])
    power_log2 = np.empty(cap, dtype=w2.dtype)
    for n in range(1, cap + 1):
        power_log2[n - 1] = (prefix[n:] - prefix[:-n]).max()
    power_norm = np.exp2(power_log2.astype(float) / 2.0)

    return DiagonalTrace(
        horizon=horizon,
        a=a,
        cesaro=cesaro,
        power_norm=power_norm,
        a_log2=elog,
        power_log2=power_log2,
        exact_dyadic=exact,
    )


def probe_scales(horizon: int) -> list[int]:
    """Scales l whose structural probes 3^l, 2*3^l, 3^l + l all fit."""
    out = []
    l = 1
    while 2 * 3**l <= horizon and 3**l + l <= horizon:
        out.append(l)
        l += 1
    return out


@dataclass(frozen=True)
class CesaroVerdict:
    kind: str                  # "converges" | "oscillates" | "diverges"
    value: float | None = None
    lo: float | None = None
    hi: float | None = None


@dataclass(frozen=True)
class PowerVerdict:
    kind: str                  # "bounded" | "unbounded"
    sup: float | None = None
    growth_exponent: float | None = None   # d(ln ||T^n||)/dn over the growth run


def cesaro_verdict(trace: DiagonalTrace, tol: Tolerances = DEFAULT) -> CesaroVerdict:
    """Convergence verdict for the Cesaro means of a_n along structural probes.

    The built-in constructions oscillate exactly on the scales 3^l, 2*3^l
    and 3^l + l, so the means are compared there: converged when the spread
    over the last two scales drops below tol.seq.
    """
    if trace.horizon < _VERDICT_MIN_HORIZON:
        raise HorizonTooSmall(f"need horizon >= {_VERDICT_MIN_HORIZON}")
    scales = probe_scales(trace.horizon)
    last = scales[-2:]
    vals = []
    for l in last:
        for p in (3**l, 2 * 3**l, 3**l + l):
            vals.append(float(trace.cesaro[p - 1]))
    if max(vals) > _DIVERGENCE_LEVEL:
        return CesaroVerdict(kind="diverges")
    spread = max(vals) - min(vals)
    if spread <= tol.seq:
        final_probe = 2 * 3 ** last[-1]
        return CesaroVerdict(kind="converges", value=float(trace.cesaro[final_probe - 1]))
    return CesaroVerdict(kind="oscillates", lo=min(vals), hi=max(vals))


def powerbounded_verdict(trace: DiagonalTrace) -> PowerVerdict:
    """Bounded/unbounded verdict from the window power norms.

    Truncation stalls the computable window maxima at the longest fully
    boosted run, so growth is judged on the initial segment: a sustained
    climb of the log2 exponents by at least _GROWTH_GAIN_FLOOR means the
    norms are genuinely unbounded, and the slope is fitted over that climb.
    """
    if trace.horizon < _VERDICT_MIN_HORIZON:
        raise HorizonTooSmall(f"need horizon >= {_VERDICT_MIN_HORIZON}")
    M = np.asarray(trace.power_log2, dtype=float)
    gain = float(M.max() - M[0])
    if gain < _GROWTH_GAIN_FLOOR:
        return PowerVerdict(kind="bounded", sup=float(np.exp2(M.max() / 2.0)))
    # steepest growth segment from the start: windows wider than the longest
    # certified run only creep upward by combining runs, so the honest slope
    # lives on the initial climb; ties resolve to the longest such segment
    steps = np.arange(1, len(M), dtype=float)
    avg = (M[1:] - M[0]) / steps
    stop = int(np.nonzero(avg >= avg.max() - 1e-12)[0][-1]) + 1
    ns = np.arange(1, stop + 2, dtype=float)
    lognorms = M[: stop + 1] * (np.log(2.0) / 2.0)
    slope = float(np.polyfit(ns, lognorms, 1)[0])
    return PowerVerdict(kind="unbounded", growth_exponent=slope)


@dataclass(frozen=True)
class BanachBracket:
    q_upper: float               # best upper estimate for the Lorentz q
    qprime_lower: float          # best lower estimate for q'
    trivial_bounds: tuple        # (liminf, limsup) estimates from the bare sequence
    witnesses: dict              # shift tuples achieving each bound


def shifted_average(x: np.ndarray, shifts) -> np.ndarray:
    """Averaged shifted sequence y_k = (1/p) sum_j x[k + n_j] (0-based k)."""
    x = np.asarray(x, dtype=float)
    shifts = tuple(int(s) for s in shifts)
    if not shifts or min(shifts) < 1:
        raise ValueError("shift tuples need entries >= 1")
    span = max(shifts)
    n = len(x) - span
    if n <= 0:
        raise HorizonTooSmall("sequence shorter than the shift span")
    out = np.zeros(n)
    for s in shifts:
        out += x[s - 1 : s - 1 + n]
    return out / len(shifts)


def _tuple_stream(p_max: int, cap: int, budget: int, seed: int):
    """Deterministic tuple enumeration; a prefix of the stream never changes
    when the budget grows, which keeps the bracket monotone in budget."""
    seen = set()
    out = []

    def push(t):
        if t not in seen:
            seen.add(t)
            out.append(t)

    push((1,))
    for p in range(2, p_max + 1):
        for step in range(1, cap):
            t = tuple(1 + i * step for i in range(p))
            if max(t) <= cap:
                push(t)
    rng = np.random.default_rng(seed)
    attempts = 0
    while len(out) < budget and attempts < 50 * budget:
        p = int(rng.integers(1, p_max + 1))
        t = tuple(sorted(int(v) for v in rng.integers(1, cap + 1, size=p)))
        push(t)
        attempts += 1
    return out[:budget]


def banach_bracket(
    trace: DiagonalTrace,
    p_max: int = 4,
    tuples_budget: int = 200,
    seed: int = 0,
) -> BanachBracket:
    """Bracket the Banach-limit range of a_n by searching shift tuples.

    Estimates limsup/liminf of each averaged sequence over k in
    [sqrt(N), N - span]: the structural events of the built-in rules live at
    powers of three, so a tail window on a log scale sees every scale while
    a linear "second half" would miss them all.  Tuple entries are capped at
    about log3(N) so a tuple always fits inside runs the horizon certifies;
    wider tuples would understate limsups purely through truncation.
    """
    N = trace.horizon
    if N < _BANACH_MIN_HORIZON:
        raise HorizonTooSmall(f"need horizon >= {_BANACH_MIN_HORIZON}")
    x = trace.a
    k_lo = int(math.isqrt(N))
    cap = max(4, int(math.floor(math.log(N) / math.log(3))) - 2)
    tuples = _tuple_stream(p_max, cap, max(tuples_budget, 1), seed)

    q_upper, qprime_lower = np.inf, -np.inf
    wit_up, wit_lo = None, None
    trivial = None
    for t in tuples:
        y = shifted_average(x, t)[k_lo:]
        hi, lo = float(y.max()), float(y.min())
        if t == (1,):
            trivial = (lo, hi)
        if hi < q_upper:
            q_upper, wit_up = hi, t
        if lo > qprime_lower:
            qprime_lower, wit_lo = lo, t
    return BanachBracket(
        q_upper=q_upper,
        qprime_lower=qprime_lower,
        trivial_bounds=trivial,
        witnesses={"upper": wit_up, "lower": wit_lo},
    )
