"""Experiment configuration: defaults, TOML loading, CLI overrides, and a
stable content hash recorded in every CSV artifact."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

EXPERIMENTS = (
    "beam_pattern",
    "fig2",
    "fig3",
    "qpsk_sweep",
    "lemma_check",
    "theorem_sweep",
)

_DEFAULT_DELTA_T = {
    "beam_pattern": ("1/2", "1/4"),
    "fig2": ("1/4",),
    "fig3": ("1/2", "1/4"),
    "qpsk_sweep": ("1/2", "1/4", "1/8", "1/16"),
    "lemma_check": ("1/4",),
    "theorem_sweep": ("1/4",),
}


def as_fraction(value) -> Fraction:
    """Parse ``1/4``, ``0.25``, ``[1, 4]``, or a Fraction into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(1_000_000)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    raise ValueError(f"cannot parse {value!r} as a fraction")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run, fully determined by its fields and the seed."""

    experiment: str
    l_t: int = 8
    l_r: int = 4
    delta_t_list: tuple[Fraction, ...] = ()
    delta_r: Fraction = Fraction(1, 2)
    gamma_tilde_db_grid: tuple[float, ...] = tuple(float(db) for db in range(-10, 45, 5))
    p_paths: int | None = None  # default 4 * min{2 L_t, 2 L_r}
    trials: int = 200
    master_seed: int = 123456789
    s_l_rule: str | int = "sqrt"
    output_path: str = ""
    threads: int = 1
    # qpsk_sweep precoder: "main_lobe" or "identity"
    precoder: str = "main_lobe"
    # theorem_sweep (L_t, L_r) ladder
    sizes: tuple[tuple[int, int], ...] = ((8, 4), (16, 8), (32, 16))
    # lemma_check scan axes
    lengths: tuple[int, ...] = (16, 32, 64)
    deltas: tuple[Fraction, ...] = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
    # beam_pattern axes; an empty k list means every beam index
    beam_k_list: tuple[int, ...] = ()
    phi_points: int = 721
    restrict_domain: bool = False
    # Assumption-1 tagging threshold on the scaled top singular value
    sigma_bound: float = 4.0

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.delta_t_list:
            object.__setattr__(
                self,
                "delta_t_list",
                tuple(Fraction(s) for s in _DEFAULT_DELTA_T[self.experiment]),
            )
        if not self.output_path:
            object.__setattr__(self, "output_path", f"{self.experiment}.csv")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not self.gamma_tilde_db_grid:
            raise ValueError("SNR grid must be nonempty")
        if self.threads < 1:
            raise ValueError("thread count must be positive")
        if self.master_seed < 0:
            raise ValueError("master seed must be a nonnegative integer")
        if self.precoder not in ("main_lobe", "identity"):
            raise ValueError(f"unknown precoder {self.precoder!r}")
        if self.p_paths is not None and self.experiment != "lemma_check":
            if self.p_paths < min(2 * self.l_t, 2 * self.l_r):
                raise ValueError(
                    "path count below min{2 L_t, 2 L_r} cannot reach full spatial rank"
                )

    def paths_for(self, l_t: int, l_r: int) -> int:
        """Path count: configured, or 4x the full-rank threshold."""
        return self.p_paths if self.p_paths is not None else 4 * min(2 * l_t, 2 * l_r)

    def s_l_for(self, length: int) -> int:
        if self.s_l_rule == "sqrt":
            import math

            return math.isqrt(length - 1) + 1 if length > 1 else 1
        return int(self.s_l_rule)

    def content_hash(self) -> str:
        """Short stable hash of every field except the output path."""
        record = dataclasses.asdict(self)
        record.pop("output_path")
        record.pop("threads")  # worker count must not change the artifact

        def encode(value):
            if isinstance(value, Fraction):
                return f"{value.numerator}/{value.denominator}"
            if isinstance(value, tuple):
                return [encode(v) for v in value]
            if isinstance(value, (list, dict)):
                return value
            return value

        canon = json.dumps(
            {k: encode(v) for k, v in record.items()}, sort_keys=True, separators=(",", ":"),
            default=encode,
        )
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def load_config(experiment: str, toml_path: str | None = None, **overrides) -> ExperimentConfig:
    """Build a config from defaults, an optional TOML file, then overrides.

    TOML keys mirror the field names; ``None`` overrides are ignored.
    """
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values: dict = {}
    if toml_path:
        with open(toml_path, "rb") as fh:
            doc = tomllib.load(fh)
        unknown = set(doc) - fields
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["experiment"] = experiment

    if "delta_t_list" in values:
        values["delta_t_list"] = tuple(as_fraction(v) for v in values["delta_t_list"])
    if "delta_r" in values:
        values["delta_r"] = as_fraction(values["delta_r"])
    if "deltas" in values:
        values["deltas"] = tuple(as_fraction(v) for v in values["deltas"])
    if "sizes" in values:
        values["sizes"] = tuple((int(a), int(b)) for a, b in values["sizes"])
    if "gamma_tilde_db_grid" in values:
        values["gamma_tilde_db_grid"] = tuple(float(v) for v in values["gamma_tilde_db_grid"])
    if "lengths" in values:
        values["lengths"] = tuple(int(v) for v in values["lengths"])
    if "beam_k_list" in values and values["beam_k_list"] is not None:
        values["beam_k_list"] = tuple(int(v) for v in values["beam_k_list"])
    return ExperimentConfig(**values)
