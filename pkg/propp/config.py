"""Analysis configuration: dataclass-based config with the defaults every run echoes."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .borrowing.base import DeltaPrior
from .errors import InputError
from .propensity.weights import WeightScheme

SIMPLE_METHODS = ("ignore", "pool", "mpp", "propp")


@dataclass(frozen=True)
class MethodSpec:
    """A parsed method name; ``value`` is δ for ``fixed`` and the fraction for ``wang``."""

    kind: str
    value: float | None = None

    @property
    def uses_propensity(self) -> bool:
        return self.kind in ("propp", "wang")

    def __str__(self) -> str:
        return self.kind if self.value is None else f"{self.kind}:{self.value:g}"


@dataclass
class AnalysisConfig:
    # Method: ignore | pool | mpp | propp | fixed:<delta> | wang:<fraction>
    method: str = "propp"

    # Borrowing
    delta_prior: tuple[float, float] = (1.0, 1.0)   # Beta(a, b) on the power parameter
    n_samples: int = 10_000
    grid_size: int = 1001          # envelope grid for the delta sampler
    seed: int | None = None        # None: drawn from system entropy and recorded

    # Propensity weighting
    weight_scheme: str = "att"     # ate | att | ate-ext
    cap: bool = True               # external weights bounded by 1
    ridge: float = 1e-4
    weight_floor: float = 0.0      # external weights below this become 0
    tol: float = 1e-8
    max_iter: int = 100

    # Stratified comparator
    n_strata: int = 5

    def __post_init__(self) -> None:
        self.method_spec()
        self.scheme()
        self.prior()
        if self.n_samples < 1:
            raise InputError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.grid_size < 3:
            raise InputError(f"grid_size must be >= 3, got {self.grid_size}")
        if self.seed is not None and self.seed < 0:
            raise InputError(f"seed must be >= 0, got {self.seed}")
        if self.ridge < 0 or self.weight_floor < 0:
            raise InputError("ridge and weight_floor must be >= 0")
        if self.n_strata < 2:
            raise InputError(f"n_strata must be >= 2, got {self.n_strata}")

    def method_spec(self) -> MethodSpec:
        name = self.method.strip().lower()
        if name in SIMPLE_METHODS:
            return MethodSpec(name)
        kind, sep, arg = name.partition(":")
        if sep and kind in ("fixed", "wang"):
            try:
                value = float(arg)
            except ValueError:
                raise InputError(f"method '{self.method}' needs a numeric argument") from None
            if kind == "fixed" and not 0.0 <= value <= 1.0:
                raise InputError(f"fixed power must lie in [0, 1], got {value}")
            if kind == "wang" and not 0.0 < value <= 1.0:
                raise InputError(f"borrow fraction must lie in (0, 1], got {value}")
            return MethodSpec(kind, value)
        raise InputError(
            f"unknown method '{self.method}' "
            "(choose from ignore, pool, mpp, propp, fixed:<delta>, wang:<fraction>)"
        )

    def scheme(self) -> WeightScheme:
        return WeightScheme.parse(self.weight_scheme, self.cap)

    def prior(self) -> DeltaPrior:
        a, b = self.delta_prior
        try:
            return DeltaPrior.of(float(a), float(b))
        except ValueError as exc:
            raise InputError(f"invalid delta prior: {exc}") from None

    def with_seed(self, seed: int) -> AnalysisConfig:
        return AnalysisConfig(**{**asdict(self), "seed": seed})

    def to_dict(self) -> dict:
        out = asdict(self)
        out["delta_prior"] = list(self.delta_prior)
        out["method"] = str(self.method_spec())
        return out
