from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional

import networkx as nx
from pydantic import BaseModel
from sympy import primerange

from .config_utils import KernelSettings, OracleSettings
from .divisor_graph import divisor_graph, reduce
from .kernels import (
    SmallGraph,
    count_independent_sets,
    count_maximal_independent_sets,
    gp_free_max_model,
    gp_free_profile,
    max_independent_set,
    min_path_cover,
)
from .local_stats import LocalStats, StatKind
from .logger_utils import LoggingAgent


class OracleGuardError(Exception):
    pass


class GlobalCounts(BaseModel):
    n: int
    lo: int = 1
    Q: int
    M_size: int
    M_count: int
    m_count: int
    H: int
    G: int
    C: Optional[int] = None
    method: str = "exhaustive"

    def quantity(self, kind: StatKind):
        return {
            StatKind.R: self.Q,
            StatKind.S: self.M_count,
            StatKind.W: self.m_count,
            StatKind.H: self.H,
            StatKind.G: self.G,
            StatKind.V: self.C,
        }[StatKind(kind)]


class ForwardG(BaseModel):
    k: int
    value: Fraction

    model_config = {"arbitrary_types_allowed": True}


class TelescopeRow(BaseModel):
    k: int
    triple: tuple[int, int, int]
    value: str
    partial: str
    expected: str
    ok: bool


class TelescopeReport(BaseModel):
    kind: StatKind
    n: int
    passed: bool
    rows: list[TelescopeRow]

    @property
    def first_mismatch(self) -> Optional[TelescopeRow]:
        return next((row for row in self.rows if not row.ok), None)


class Counterexample(BaseModel):
    family: str
    args: tuple[int, ...]
    lhs: str
    rhs: str


def _primitive_profile(lo: int, n: int) -> tuple[int, int, int, int]:
    """(count, max size, max count, maximal count) of primitive subsets of [lo, n]."""
    size = n - lo + 1
    related = []
    for k in range(size):
        x = lo + k
        mask = 0
        for j in range(size):
            y = lo + j
            if x % y == 0 or y % x == 0:
                mask |= 1 << j
        related.append(mask)
    full = (1 << size) - 1

    def walk(k: int, chosen: int, dominated: int, depth: int) -> tuple[int, int, int, int]:
        if k == size:
            return 1, depth, 1, 1 if dominated == full else 0
        skip = walk(k + 1, chosen, dominated, depth)
        # x can join iff no chosen element divides it (chosen elements are smaller)
        if related[k] & chosen:
            return skip
        take = walk(k + 1, chosen | (1 << k), dominated | related[k], depth + 1)
        if take[1] > skip[1]:
            best_size, best_count = take[1], take[2]
        elif take[1] < skip[1]:
            best_size, best_count = skip[1], skip[2]
        else:
            best_size, best_count = skip[1], skip[2] + take[2]
        return skip[0] + take[0], best_size, best_count, skip[3] + take[3]

    return walk(0, 0, 0, 0)


def _gp_free_profile(lo: int, n: int) -> tuple[int, int]:
    """(count, max size) of GP-free subsets of [lo, n] by direct search."""
    chosen: set[int] = set()

    def closes_progression(x: int) -> bool:
        for r in range(2, isqrt(x) + 1):
            if x % (r * r) == 0 and x // (r * r) in chosen and x // r in chosen:
                return True
        return False

    def walk(x: int) -> tuple[int, int]:
        if x > n:
            return 1, len(chosen)
        count, best = walk(x + 1)
        if not closes_progression(x):
            chosen.add(x)
            more, more_best = walk(x + 1)
            chosen.discard(x)
            count += more
            best = max(best, more_best)
        return count, best

    return walk(lo)


class Oracle:
    """Brute-force global quantities on small intervals."""

    def __init__(
        self,
        settings: Optional[OracleSettings] = None,
        limits: Optional[KernelSettings] = None,
    ):
        self.settings = settings or OracleSettings.load()
        self.limits = limits or KernelSettings.load()
        self.logger = LoggingAgent("Oracle").logger
        self._interval_memo: dict[tuple[int, int], GlobalCounts] = {}
        self._q_memo: dict[int, int] = {1: 2}

    def _path_cover(self, lo: int, n: int) -> Optional[int]:
        if n > self.settings.max_path_cover_n:
            return None
        return min_path_cover(SmallGraph.from_networkx(divisor_graph(lo, n)), self.limits)

    def interval_counts(self, lo: int, n: int) -> GlobalCounts:
        """Exhaustive counts for the interval [lo, n]."""
        if not 1 <= lo <= n:
            raise ValueError(f"interval [{lo}, {n}] is empty")
        if n > self.settings.max_exhaustive_n:
            raise OracleGuardError(
                f"exhaustive enumeration limited to n <= {self.settings.max_exhaustive_n}, got {n}"
            )
        key = (lo, n)
        if key not in self._interval_memo:
            q, m_size, m_count, maximal = _primitive_profile(lo, n)
            h, g = _gp_free_profile(lo, n)
            self._interval_memo[key] = GlobalCounts(
                n=n, lo=lo, Q=q, M_size=m_size, M_count=m_count, m_count=maximal,
                H=h, G=g, C=self._path_cover(lo, n),
            )
        return self._interval_memo[key]

    def _tail_components(self, n: int) -> list[SmallGraph]:
        graph = divisor_graph(2, n)
        return [
            SmallGraph.from_networkx(graph.subgraph(nodes))
            for nodes in nx.connected_components(graph)
        ]

    def decomposed_counts(self, n: int) -> GlobalCounts:
        """
        Counts for [1, n] from the components of [2, n].

        1 divides everything, so the only primitive set holding it is {1};
        a GP-free set holding 1 must also avoid every pair {r, r*r}.
        """
        if n > self.settings.max_decomposed_n:
            raise OracleGuardError(
                f"decomposed counting limited to n <= {self.settings.max_decomposed_n}, got {n}"
            )
        if n == 1:
            return self.interval_counts(1, 1)

        independent, top_size, top_count, maximal = 1, 0, 1, 1
        without_one, with_one, best_without, best_with = 1, 1, 0, 1
        for part in self._tail_components(n):
            independent *= count_independent_sets(part, self.limits)
            best = max_independent_set(part, self.limits)
            top_size += best.size
            top_count *= best.count
            maximal *= count_maximal_independent_sets(part, self.limits)

            labels = set(part.vertices)
            pairs = [(r, r * r) for r in labels if r * r in labels]
            best_free, count_free = gp_free_profile(part.vertices, self.limits)
            best_pair, count_pair = gp_free_profile(part.vertices, self.limits, pairs)
            without_one *= count_free
            best_without += best_free
            with_one *= count_pair
            best_with += best_pair

        if top_size == 1:
            top_count += 1
        return GlobalCounts(
            n=n,
            Q=independent + 1,
            M_size=top_size,
            M_count=top_count,
            m_count=maximal + 1,
            H=without_one + with_one,
            G=max(best_without, best_with),
            C=self._path_cover(1, n),
            method="decomposed",
        )

    def brute_all(self, n: int) -> GlobalCounts:
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        if n <= self.settings.max_exhaustive_n:
            return self.interval_counts(1, n)
        return self.decomposed_counts(n)

    def Q(self, k: int) -> int:
        """Primitive subsets of [1, k]: 1 + independent sets of the divisor graph of [2, k]."""
        if k not in self._q_memo:
            count = 1
            for part in self._tail_components(k):
                count *= count_independent_sets(part, self.limits)
            self._q_memo[k] = count + 1
        return self._q_memo[k]

    def forward_g(self, k: int) -> ForwardG:
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        if k == 1:
            return ForwardG(k=1, value=Fraction(1))
        return ForwardG(k=k, value=Fraction(self.Q(k), self.Q(k - 1)) - 1)

    def check_submultiplicative(self, limit: int, long_run: bool = False) -> list[Counterexample]:
        if limit > self.settings.conjecture_limit and not long_run:
            raise OracleGuardError(
                f"limit {limit} exceeds {self.settings.conjecture_limit}; pass long_run to proceed"
            )
        g = {k: self.forward_g(k).value for k in range(1, limit + 1)}
        found = []
        for n in range(2, limit + 1):
            for m in range(n + 1, limit // n + 1):
                if gcd(n, m) != 1:
                    continue
                if g[n * m] > g[n] * g[m]:
                    found.append(
                        Counterexample(
                            family="coprime", args=(n, m),
                            lhs=str(g[n * m]), rhs=str(g[n] * g[m]),
                        )
                    )
        for p in primerange(2, limit + 1):
            power = p
            while power * p <= limit:
                if g[power * p] > g[power]:
                    found.append(
                        Counterexample(
                            family="prime-power", args=(p, power * p),
                            lhs=str(g[power * p]), rhs=str(g[power]),
                        )
                    )
                power *= p
        self.logger.info(f"Checked g up to {limit}: {len(found)} counterexamples")
        return found

    def verify_telescoping_report(self, kind: StatKind, n: int) -> TelescopeReport:
        """Compare every suffix product (or sum) of local values with brute force on [k, n]."""
        kind = StatKind(kind)
        if n > self.settings.max_exhaustive_n:
            raise OracleGuardError(
                f"telescoping check limited to n <= {self.settings.max_exhaustive_n}, got {n}"
            )
        if kind is StatKind.V and n > self.settings.max_path_cover_n:
            raise OracleGuardError(
                f"path-cover oracle limited to n <= {self.settings.max_path_cover_n}, got {n}"
            )
        stats = LocalStats(limits=self.limits)
        partial = Fraction(1) if kind.multiplicative else Fraction(0)
        rows = []
        for k in range(n, 0, -1):
            triple = reduce(k, n)
            value = stats.stat(kind, triple.d, triple.t).value
            partial = partial * value if kind.multiplicative else partial + value
            expected = self.interval_counts(k, n).quantity(kind)
            rows.append(
                TelescopeRow(
                    k=k, triple=triple.as_tuple(), value=str(value),
                    partial=str(partial), expected=str(expected), ok=partial == expected,
                )
            )
        rows.reverse()
        return TelescopeReport(kind=kind, n=n, passed=all(r.ok for r in rows), rows=rows)

    def verify_telescoping(self, kind: StatKind, n: int) -> bool:
        return self.verify_telescoping_report(kind, n).passed

    def _model_limits(self) -> KernelSettings:
        return self.limits.model_copy(
            update={
                "path_cover_max_vertices": max(self.limits.path_cover_max_vertices, self.settings.max_model_n),
                "solver_time_limit": self.settings.model_time_limit,
            }
        )

    def interval_optimum(self, kind: StatKind, n: int) -> int:
        """G or C on the whole interval [1, n] from exact CP-SAT models."""
        kind = StatKind(kind)
        if kind not in (StatKind.G, StatKind.V):
            raise ValueError("interval optima are defined for the g and v statistics")
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        if n > self.settings.max_model_n:
            raise OracleGuardError(
                f"interval models limited to n <= {self.settings.max_model_n}, got {n}"
            )
        limits = self._model_limits()
        self.logger.info(f"Solving the {kind.value} optimum on [1, {n}]")
        if kind is StatKind.V:
            return min_path_cover(SmallGraph.from_networkx(divisor_graph(1, n)), limits)
        return gp_free_max_model(range(1, n + 1), limits)

    def empirical_average(self, kind: StatKind, n: int) -> Fraction:
        """
        (1/n) * sum over k <= n of the local value at reduce(k, n); additive kinds only.

        The local values telescope to the optimum on [1, n], so past the
        exhaustive guard the sum is read off the whole-interval model.
        """
        kind = StatKind(kind)
        if kind.multiplicative:
            raise ValueError("empirical averages are defined for the g and v statistics")
        if n > self.settings.max_exhaustive_n:
            return Fraction(self.interval_optimum(kind, n), n)
        stats = LocalStats(limits=self.limits)
        total = Fraction(0)
        for k in range(1, n + 1):
            triple = reduce(k, n)
            total += stats.stat(kind, triple.d, triple.t).value
        return total / n


@lru_cache(maxsize=1)
def _default_oracle() -> Oracle:
    return Oracle()


def brute_all(n: int) -> GlobalCounts:
    return _default_oracle().brute_all(n)


def verify_telescoping(kind: StatKind, n: int) -> bool:
    return _default_oracle().verify_telescoping(kind, n)


def forward_g(k: int) -> ForwardG:
    return _default_oracle().forward_g(k)


def check_submultiplicative(limit: int, long_run: bool = False) -> list[Counterexample]:
    return _default_oracle().check_submultiplicative(limit, long_run)
