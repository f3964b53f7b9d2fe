"""Signed marginal/sign structures over a joint embedding, and the four
named coupling measures built from them.

A combination is evaluated as (sum_i signs[i] * H(marginal_i)) - H(joint).
It is well formed when, for every joint coordinate, the signs of the
marginals containing it sum to exactly 1; validate() checks that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .embedding import (
    ROLE_CONDITIONER,
    ROLE_FUTURE,
    ROLE_SOURCE,
    ROLE_TARGET,
    EmbeddingSpec,
)
from .ensemble import ChannelRef, TrialEnsemble
from .errors import ConfigError

MEASURE_KINDS = ("mi", "te", "pmi", "pte")


@dataclass(frozen=True)
class CombinationSpec:
    """Joint width, marginal coordinate sets (0-based), and their signs."""

    width: int
    marginals: tuple[tuple[int, ...], ...]
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ConfigError(f"joint width must be >= 1, got {self.width}")
        marginals = tuple(tuple(int(c) for c in m) for m in self.marginals)
        signs = tuple(int(s) for s in self.signs)
        if len(marginals) != len(signs):
            raise ConfigError(
                f"{len(marginals)} marginals but {len(signs)} signs"
            )
        if not marginals:
            raise ConfigError("need at least one marginal")
        for i, m in enumerate(marginals):
            if len(set(m)) != len(m):
                raise ConfigError(f"marginal {i} repeats a coordinate: {m}")
            if any(not 0 <= c < self.width for c in m):
                raise ConfigError(
                    f"marginal {i} has coordinates outside [0, {self.width}): {m}"
                )
        if any(s not in (-1, 1) for s in signs):
            raise ConfigError(f"signs must be +1 or -1, got {signs}")
        object.__setattr__(self, "marginals", tuple(tuple(sorted(m)) for m in marginals))
        object.__setattr__(self, "signs", signs)

    @property
    def n_marginals(self) -> int:
        return len(self.marginals)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    coverage: tuple[int, ...]          # signed coverage per coordinate
    bad_coordinates: tuple[int, ...]   # coordinates whose coverage != 1
    empty_marginals: tuple[int, ...]   # indices of empty marginal sets

    def message(self) -> str:
        if self.ok:
            return "ok"
        parts = []
        for c in self.bad_coordinates:
            parts.append(f"coordinate {c} has signed coverage {self.coverage[c]} != 1")
        for i in self.empty_marginals:
            parts.append(f"marginal {i} is empty")
        return "; ".join(parts)


def validate(spec: CombinationSpec) -> ValidationReport:
    """Check the signed-coverage identity and marginal non-emptiness."""
    coverage = [0] * spec.width
    for m, s in zip(spec.marginals, spec.signs):
        for c in m:
            coverage[c] += s
    bad = tuple(c for c, v in enumerate(coverage) if v != 1)
    empty = tuple(i for i, m in enumerate(spec.marginals) if not m)
    return ValidationReport(
        ok=not bad and not empty,
        coverage=tuple(coverage),
        bad_coordinates=bad,
        empty_marginals=empty,
    )


def spec_to_json(spec: CombinationSpec) -> dict:
    """Stable serialization: keys m, marginals, signs; 0-based coordinates."""
    return {
        "m": spec.width,
        "marginals": [list(m) for m in spec.marginals],
        "signs": list(spec.signs),
    }


def spec_from_json(doc: dict) -> CombinationSpec:
    try:
        return CombinationSpec(
            width=int(doc["m"]),
            marginals=tuple(tuple(m) for m in doc["marginals"]),
            signs=tuple(doc["signs"]),
        )
    except KeyError as exc:
        raise ConfigError(f"combination document missing key {exc}") from None


def _span(start: int, dim: int) -> tuple[int, ...]:
    return tuple(range(start, start + dim))


def mutual_information_spec(dim_x: int, dim_y: int) -> CombinationSpec:
    """Undirected dependence between two blocks: H_X + H_Y - H_XY."""
    x = _span(0, dim_x)
    y = _span(dim_x, dim_y)
    return CombinationSpec(dim_x + dim_y, (x, y), (1, 1))


def transfer_entropy_spec(dim_target: int, dim_source: int) -> CombinationSpec:
    """Directed flow source -> target over joint (W, X, Y):
    H_WX + H_XY - H_X - H_WXY with W the target's next sample."""
    w = _span(0, 1)
    x = _span(1, dim_target)
    y = _span(1 + dim_target, dim_source)
    return CombinationSpec(
        1 + dim_target + dim_source,
        (w + x, x + y, x),
        (1, 1, -1),
    )


def partial_mi_spec(dim_target: int, dim_conditioner: int,
                    dim_source: int) -> CombinationSpec:
    """Conditioned dependence over joint (X, Z, Y):
    H_XZ + H_ZY - H_Z - H_XZY."""
    x = _span(0, dim_target)
    z = _span(dim_target, dim_conditioner)
    y = _span(dim_target + dim_conditioner, dim_source)
    return CombinationSpec(
        dim_target + dim_conditioner + dim_source,
        (x + z, z + y, z),
        (1, 1, -1),
    )


def partial_te_spec(dim_target: int, dim_conditioner: int,
                    dim_source: int) -> CombinationSpec:
    """Conditioned directed flow over joint (W, X, Z, Y):
    H_WXZ + H_XZY - H_XZ - H_WXZY."""
    w = _span(0, 1)
    x = _span(1, dim_target)
    z = _span(1 + dim_target, dim_conditioner)
    y = _span(1 + dim_target + dim_conditioner, dim_source)
    return CombinationSpec(
        1 + dim_target + dim_conditioner + dim_source,
        (w + x + z, x + z + y, x + z),
        (1, 1, -1),
    )


@dataclass(frozen=True)
class MeasureKind:
    """A named measure plus the channels playing each role."""

    kind: str
    target: ChannelRef
    source: ChannelRef
    conditioner: Optional[ChannelRef] = None
    dim_target: int = 1
    dim_source: int = 1
    dim_conditioner: int = 1
    delay: int = 1

    def __post_init__(self) -> None:
        if self.kind not in MEASURE_KINDS:
            raise ConfigError(
                f"unknown measure kind {self.kind!r}; expected one of {MEASURE_KINDS}"
            )
        needs_conditioner = self.kind in ("pmi", "pte")
        if needs_conditioner and self.conditioner is None:
            raise ConfigError(f"measure {self.kind} requires a conditioner channel")
        if not needs_conditioner and self.conditioner is not None:
            raise ConfigError(f"measure {self.kind} takes no conditioner channel")
        for name in ("dim_target", "dim_source", "dim_conditioner"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.delay < 1:
            raise ConfigError(f"delay must be >= 1, got {self.delay}")

    @property
    def directed(self) -> bool:
        return self.kind in ("te", "pte")


def build_measure(measure: MeasureKind,
                  ensemble: TrialEnsemble) -> tuple[CombinationSpec, tuple[EmbeddingSpec, ...]]:
    """Resolve a measure against an ensemble.

    Returns the combination structure plus the ordered embedding plan
    producing its joint space. Block order is fixed (future, target past,
    conditioner past, source past) so marginal indices are reproducible.
    """
    roles = [(ROLE_TARGET, measure.target), (ROLE_SOURCE, measure.source)]
    if measure.conditioner is not None:
        roles.append((ROLE_CONDITIONER, measure.conditioner))
    seen = set()
    for _, ref in roles:
        idx = ensemble.channel_index(ref)
        if idx in seen:
            raise ConfigError("measure roles must use distinct channels")
        seen.add(idx)

    d = measure.delay
    target_past = EmbeddingSpec(measure.target, measure.dim_target, d, 0, ROLE_TARGET)
    source_past = EmbeddingSpec(measure.source, measure.dim_source, d, 0, ROLE_SOURCE)
    if measure.conditioner is not None:
        cond_past = EmbeddingSpec(
            measure.conditioner, measure.dim_conditioner, d, 0, ROLE_CONDITIONER
        )
    if measure.directed:
        future = EmbeddingSpec(measure.target, 1, d, 1, ROLE_FUTURE)

    if measure.kind == "mi":
        plan = (target_past, source_past)
        spec = mutual_information_spec(measure.dim_target, measure.dim_source)
    elif measure.kind == "te":
        plan = (future, target_past, source_past)
        spec = transfer_entropy_spec(measure.dim_target, measure.dim_source)
    elif measure.kind == "pmi":
        plan = (target_past, cond_past, source_past)
        spec = partial_mi_spec(
            measure.dim_target, measure.dim_conditioner, measure.dim_source
        )
    else:
        plan = (future, target_past, cond_past, source_past)
        spec = partial_te_spec(
            measure.dim_target, measure.dim_conditioner, measure.dim_source
        )

    report = validate(spec)
    if not report.ok:
        raise ConfigError(f"measure factory produced invalid spec: {report.message()}")
    return spec, plan
