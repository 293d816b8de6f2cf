from dataclasses import dataclass, field
from typing import Mapping, Optional, Union


class UnknownPresetError(ValueError):
    pass


@dataclass(frozen=True)
class BudgetSpec:
    """
    Which (i, d) blocks an estimate covers.

    A block is included when d * i**5 <= product_limit, or when ``d_caps``
    names an inclusive cap for i and d is at most that cap.
    """

    product_limit: int
    d_caps: tuple[tuple[int, int], ...] = field(default=())
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if self.product_limit < 1:
            raise ValueError(f"budget must be positive, got {self.product_limit}")

    @property
    def caps(self) -> dict[int, int]:
        return dict(self.d_caps)

    @property
    def max_i(self) -> int:
        i = 1
        while (i + 1) ** 5 <= self.product_limit:
            i += 1
        return max([i, *self.caps.keys()])

    def max_d(self, i: int) -> int:
        return max(self.product_limit // i**5, self.caps.get(i, 0))

    @property
    def descriptor(self) -> str:
        if self.name:
            return self.name
        return f"d*i^5<={self.product_limit}"


def _caps(ranges: Mapping[tuple[int, int], int]) -> tuple[tuple[int, int], ...]:
    caps = {}
    for (first, last), cap in ranges.items():
        for i in range(first, last + 1):
            caps[i] = cap
    return tuple(sorted(caps.items()))


DESK_LIMIT = 10**6

PRESETS: dict[str, BudgetSpec] = {
    "desk": BudgetSpec(DESK_LIMIT, name="desk"),
    # d*i^5 <= 1e8, extended to d < 11250000 (i=5), d < 2400000 (i=6), d < 27440 (i=7)
    "paper-alpha": BudgetSpec(
        10**8,
        _caps({(5, 5): 11_249_999, (6, 6): 2_399_999, (7, 7): 27_439}),
        name="paper-alpha",
    ),
    "paper-eta": BudgetSpec(
        DESK_LIMIT,
        _caps(
            {
                (5, 5): 3_600_000, (6, 6): 1_000_000, (7, 7): 32_000,
                (8, 8): 6_400, (9, 9): 2_160, (10, 10): 1_176, (11, 11): 625,
                (12, 12): 405, (13, 13): 270, (14, 14): 189, (15, 15): 169,
                (16, 16): 160, (17, 17): 119, (18, 18): 112, (19, 19): 88,
                (20, 20): 44, (21, 26): 30, (27, 30): 25, (31, 35): 14,
                (36, 40): 11, (41, 50): 10, (51, 60): 9, (61, 70): 8,
                (71, 80): 7, (81, 90): 6, (91, 100): 5,
            }
        ),
        name="paper-eta",
    ),
    "paper-theta": BudgetSpec(
        DESK_LIMIT,
        _caps(
            {
                (12, 12): 6_144, (13, 15): 1_536, (16, 20): 1_152, (21, 24): 256,
                (25, 25): 150, (26, 30): 16, (31, 40): 12, (41, 55): 8,
                (56, 60): 7, (61, 75): 4, (76, 100): 3, (101, 250): 1,
            }
        ),
        name="paper-theta",
    ),
    "paper-c": BudgetSpec(
        DESK_LIMIT,
        _caps(
            {
                (6, 6): 10_000, (7, 7): 120, (8, 8): 36, (9, 9): 32,
                (10, 10): 14, (11, 11): 12, (12, 13): 8, (14, 14): 7,
                (15, 18): 6,
            }
        ),
        name="paper-c",
    ),
}


def resolve_budget(budget: Union[int, BudgetSpec, None] = None, preset: Optional[str] = None) -> BudgetSpec:
    if preset is not None:
        try:
            return PRESETS[preset]
        except KeyError:
            raise UnknownPresetError(
                f"unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}"
            )
    if budget is None:
        return PRESETS["desk"]
    if isinstance(budget, BudgetSpec):
        return budget
    return BudgetSpec(int(budget))
