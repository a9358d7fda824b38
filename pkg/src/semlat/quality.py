"""Semantic quality as monotone curves over the conditioning-stream BER.

Curves are measured data: anchor points (ber, normalized value), joined
linearly in log10(ber) and held flat outside the anchored range. The
optimizer needs the generalized inverse: the largest BER whose quality
still meets a threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, InfeasibleQualityError


@dataclass(frozen=True)
class QualityCurve:
    name: str
    anchors: tuple[tuple[float, float], ...]
    reference_value: float | None = None

    def __post_init__(self):
        anchors = tuple((float(b), float(v)) for b, v in self.anchors)
        if not anchors:
            raise ConfigError(f"curve {self.name!r} has no anchors")
        for b, v in anchors:
            if not b > 0:
                raise ConfigError(f"curve {self.name!r}: anchor BER must be > 0")
            if not 0 < v <= 1:
                raise ConfigError(f"curve {self.name!r}: anchor value must lie in (0, 1]")
        object.__setattr__(self, "anchors", anchors)

    @property
    def bers(self) -> np.ndarray:
        return np.array([b for b, _ in self.anchors])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.anchors])

    def evaluate(self, ber):
        """Normalized quality at `ber` (scalar or array)."""
        ber_arr = np.asarray(ber, dtype=float)
        if np.any(~(ber_arr > 0)):
            raise DomainError("BER must be > 0; use any BER below the first anchor for error-free")
        out = np.interp(np.log10(ber_arr), np.log10(self.bers), self.values)
        return float(out) if out.ndim == 0 else out

    def inverse(self, threshold: float) -> float:
        """Largest BER with ``evaluate(ber) >= threshold``.

        Thresholds at or below the curve minimum never bind and return the
        largest anchored BER. Thresholds above the maximum raise
        InfeasibleQualityError.
        """
        bers, vals = self.bers, self.values
        top = float(vals.max())
        if threshold > top:
            raise InfeasibleQualityError(self.name, threshold, top)
        ok = np.nonzero(vals >= threshold)[0]
        i = int(ok[-1])
        if i == len(vals) - 1 or vals[i] == threshold:
            return float(bers[i])
        # crossing inside segment i -> i+1; v[i] > threshold > v[i+1]
        t = (vals[i] - threshold) / (vals[i] - vals[i + 1])
        lo, hi = math.log10(bers[i]), math.log10(bers[i + 1])
        return 10.0 ** (lo + t * (hi - lo))


@dataclass(frozen=True)
class QualityRequirement:
    curve: QualityCurve
    threshold: float

    def __post_init__(self):
        if not self.threshold > 0:
            raise ConfigError("quality threshold must be > 0")


@dataclass(frozen=True)
class CurveCheck:
    ok: bool
    curve: str
    pair: tuple[int, int] | None = None
    message: str = ""


def validate(curve: QualityCurve) -> CurveCheck:
    """Check anchors: strictly increasing BER, non-increasing value."""
    a = curve.anchors
    for i in range(len(a) - 1):
        (b0, v0), (b1, v1) = a[i], a[i + 1]
        if not b1 > b0:
            return CurveCheck(False, curve.name, (i, i + 1), f"BER not increasing: {b0:g} -> {b1:g}")
        if v1 > v0:
            return CurveCheck(False, curve.name, (i, i + 1), f"value increases: {v0:g} -> {v1:g}")
    return CurveCheck(True, curve.name)


def target_ber(requirements) -> float:
    """Binding BER across requirements: the min of the per-metric inverses."""
    reqs = list(requirements)
    if not reqs:
        raise DomainError("at least one quality requirement is needed")
    return min(r.curve.inverse(r.threshold) for r in reqs)


# Error-free plateau anchored two decades below the first measured point.
DEFAULT_CLIP = QualityCurve(
    name="clip",
    anchors=((1e-8, 0.999), (1e-6, 0.999), (1e-5, 0.997), (1e-4, 0.978)),
    reference_value=0.918,
)
DEFAULT_MSSSIM = QualityCurve(
    name="ms-ssim",
    anchors=((1e-8, 0.991), (1e-6, 0.991), (1e-5, 0.982), (1e-4, 0.918)),
)
# absolute CLIP at error-free conditioning with BLIP prompts instead of GPT-4
CLIP_REFERENCE_BLIP = 0.896


def default_curves() -> dict[str, QualityCurve]:
    return {c.name: c for c in (DEFAULT_CLIP, DEFAULT_MSSSIM)}


@dataclass(frozen=True)
class TargetSet:
    """A labelled set of (metric name, threshold) pairs."""

    label: str
    thresholds: tuple[tuple[str, float], ...] = field(default=())

    def requirements(self, curves: dict[str, QualityCurve]) -> list[QualityRequirement]:
        out = []
        for metric, eps in self.thresholds:
            if metric not in curves:
                raise ConfigError(
                    f"target {self.label!r} names unknown metric {metric!r}; have {sorted(curves)}"
                )
            out.append(QualityRequirement(curves[metric], eps))
        return out


PRESET_TARGETS = {
    "t0999": TargetSet("t0999", (("clip", 0.999), ("ms-ssim", 0.991))),
    "t0997": TargetSet("t0997", (("clip", 0.997), ("ms-ssim", 0.982))),
    "t0978": TargetSet("t0978", (("clip", 0.978), ("ms-ssim", 0.918))),
}


def curve_from_dict(d: dict) -> QualityCurve:
    try:
        return QualityCurve(
            name=str(d["name"]),
            anchors=tuple(tuple(p) for p in d["anchors"]),
            reference_value=d.get("reference_value"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed curve entry: {exc}") from exc


def curve_to_dict(c: QualityCurve) -> dict:
    return {"name": c.name, "reference_value": c.reference_value, "anchors": [list(p) for p in c.anchors]}


def load_curves(path) -> dict[str, QualityCurve]:
    """Read a JSON list of ``{"name", "reference_value", "anchors"}``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read curve file {path}: {exc}") from exc
    return curves_from_list(data)


def curves_from_list(data) -> dict[str, QualityCurve]:
    if not isinstance(data, list):
        raise ConfigError("curve file must hold a JSON list")
    curves = [curve_from_dict(d) for d in data]
    names = [c.name for c in curves]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate curve names in {names}")
    return {c.name: c for c in curves}


def load_targets(path) -> TargetSet:
    """Read ``{"label": ..., "requirements": [{"metric", "threshold"}, ...]}``."""
    try:
        data = json.loads(Path(path).read_text())
        reqs = tuple((str(r["metric"]), float(r["threshold"])) for r in data["requirements"])
        label = str(data.get("label", Path(path).stem))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read target file {path}: {exc}") from exc
    if not reqs:
        raise ConfigError(f"target file {path} lists no requirements")
    return TargetSet(label, reqs)
