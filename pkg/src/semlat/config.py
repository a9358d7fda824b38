"""System configuration and its JSON form.

The JSON document is flat, takes path loss in dB, noise in dBm/Hz and
power in mW, and every key is optional (defaults shown):

    {
      "pathloss_ref_db": -30, "pathloss_exp": 3.4, "distance_m": 100,
      "noise_density_dbm_hz": -174, "total_power_mw": 10,
      "bw_prompt_hz": 1e6, "bw_cond_hz": 1e6,
      "prompt_bits": 629, "cond_bits": 7864,
      "packet_bits": null, "code_rate": 0.5, "prompt_mod_order": 4,
      "per_k": 0.374, "per_b": -0.31,
      "alpha": 1.5, "beta": 5, "mod_set": [4, 16, 64],
      "compute_latency_s": 0,
      "curves": [...] or "curves.json"
    }

``packet_bits: null`` ties the packet length to ``prompt_bits``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .channel import ChannelParams
from .cond_link import CondLinkConfig
from .errors import ConfigError
from .prompt_link import PromptLinkConfig
from .quality import QualityCurve, curve_to_dict, curves_from_list, default_curves, load_curves, validate
from .units import db_to_linear, dbm_to_watts

DEFAULTS = {
    "pathloss_ref_db": -30.0,
    "pathloss_exp": 3.4,
    "distance_m": 100.0,
    "noise_density_dbm_hz": -174.0,
    "total_power_mw": 10.0,
    "bw_prompt_hz": 1e6,
    "bw_cond_hz": 1e6,
    "prompt_bits": 629,
    "cond_bits": 7864,
    "packet_bits": None,
    "code_rate": 0.5,
    "prompt_mod_order": 4,
    "per_k": 0.374,
    "per_b": -0.31,
    "alpha": 1.5,
    "beta": 5.0,
    "mod_set": [4, 16, 64],
    "compute_latency_s": 0.0,
    "curves": None,
}


@dataclass(frozen=True)
class SystemConfig:
    channel: ChannelParams
    total_power: float
    bw_prompt: float
    bw_cond: float
    prompt_bits: float
    cond_bits: float
    prompt_link: PromptLinkConfig = field(default_factory=PromptLinkConfig)
    cond_link: CondLinkConfig = field(default_factory=CondLinkConfig)
    compute_latency: float = 0.0

    def __post_init__(self):
        if not self.total_power > 0:
            raise ConfigError("total_power must be > 0")
        if not (self.bw_prompt > 0 and self.bw_cond > 0):
            raise ConfigError("bandwidths must be > 0")
        if not (self.prompt_bits > 0 and self.cond_bits > 0):
            raise ConfigError("payload sizes must be > 0")
        if not self.compute_latency >= 0:
            raise ConfigError("compute_latency must be >= 0")

    def with_payloads(self, prompt_bits=None, cond_bits=None, tie_packet=True) -> SystemConfig:
        """Copy with new payload sizes; the packet length follows the prompt by default."""
        pb = self.prompt_bits if prompt_bits is None else prompt_bits
        cb = self.cond_bits if cond_bits is None else cond_bits
        link = replace(self.prompt_link, packet_bits=int(pb)) if tie_packet else self.prompt_link
        return replace(self, prompt_bits=pb, cond_bits=cb, prompt_link=link)


@dataclass(frozen=True)
class LoadedConfig:
    """A parsed config document: system parameters plus quality curves."""

    system: SystemConfig
    curves: dict[str, QualityCurve]
    raw: dict

    @property
    def digest(self) -> str:
        """Hash of the raw document with the curves it resolved to."""
        doc = dict(self.raw)
        doc["curves"] = [curve_to_dict(self.curves[k]) for k in sorted(self.curves)]
        return config_digest(doc)


def config_digest(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def system_from_dict(d: dict) -> SystemConfig:
    unknown = set(d) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    v = {**DEFAULTS, **d}
    try:
        prompt_bits = float(v["prompt_bits"])
        packet_bits = v["packet_bits"]
        packet_bits = int(round(prompt_bits)) if packet_bits is None else int(packet_bits)
        channel = ChannelParams(
            pathloss_ref=db_to_linear(float(v["pathloss_ref_db"])),
            pathloss_exp=float(v["pathloss_exp"]),
            distance=float(v["distance_m"]),
            noise_density=dbm_to_watts(float(v["noise_density_dbm_hz"])),
        )
        return SystemConfig(
            channel=channel,
            total_power=float(v["total_power_mw"]) * 1e-3,
            bw_prompt=float(v["bw_prompt_hz"]),
            bw_cond=float(v["bw_cond_hz"]),
            prompt_bits=prompt_bits,
            cond_bits=float(v["cond_bits"]),
            prompt_link=PromptLinkConfig(
                packet_bits=packet_bits,
                code_rate=float(v["code_rate"]),
                mod_order=int(v["prompt_mod_order"]),
                per_k=float(v["per_k"]),
                per_b=float(v["per_b"]),
            ),
            cond_link=CondLinkConfig(
                alpha=float(v["alpha"]),
                beta=float(v["beta"]),
                mod_set=tuple(v["mod_set"]),
            ),
            compute_latency=float(v["compute_latency_s"]),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def default_system() -> SystemConfig:
    return system_from_dict({})


def load_config(path=None) -> LoadedConfig:
    """Parse and fully validate a config file; None gives the defaults."""
    if path is None:
        raw, base = {}, Path.cwd()
    else:
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config document must be a JSON object")
        base = path.parent
    system = system_from_dict(raw)
    spec = raw.get("curves")
    if spec is None:
        curves = default_curves()
    elif isinstance(spec, str):
        curves = load_curves(base / spec)
    else:
        curves = curves_from_list(spec)
    for c in curves.values():
        check = validate(c)
        if not check.ok:
            raise ConfigError(f"curve {c.name!r} is not monotone at anchors {check.pair}: {check.message}")
    return LoadedConfig(system, curves, raw)
