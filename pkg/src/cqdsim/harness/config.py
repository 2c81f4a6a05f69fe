"""Run specifications: parsed from a YAML/JSON file, then overridden by CLI flags."""
from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from ..channel import BasisPolicy, ChannelModel, EveKind, EveStrategy
from ..errors import ConfigError
from ..protocols.common import DecoyMode, DecoyPlan, ProtocolId, SessionConfig, parse_bits

_RANDOM_RE = re.compile(r"^random:(\d+)$")
_TOP_KEYS = {"protocol", "rounds", "seed", "channel", "decoy", "messages", "bell_efficiency"}


@dataclass(frozen=True)
class MessageSpec:
    """Explicit bits, or ``random:<n>`` drawn per round from the session stream."""

    bits: tuple[int, ...] | None = None
    random_length: int | None = None

    @classmethod
    def parse(cls, text: str | None, name: str) -> "MessageSpec":
        if text is None or text == "":
            return cls(bits=())
        text = str(text).strip()
        m = _RANDOM_RE.match(text)
        if m:
            n = int(m.group(1))
            if n < 1:
                raise ConfigError(name, "random length must be >= 1")
            return cls(random_length=n)
        return cls(bits=parse_bits(text, name))

    def draw(self, rng: np.random.Generator) -> tuple[int, ...]:
        if self.bits is not None:
            return self.bits
        return tuple(int(b) for b in rng.integers(0, 2, size=self.random_length))

    def __str__(self) -> str:
        if self.bits is not None:
            return "".join(map(str, self.bits))
        return f"random:{self.random_length}"


@dataclass(frozen=True)
class RunSpec:
    protocol: ProtocolId
    rounds: int = 1
    master_seed: int = 0
    channel: ChannelModel = field(default_factory=ChannelModel)
    decoy: DecoyPlan = field(default_factory=DecoyPlan)
    abort_threshold: float = 0.05
    alice: MessageSpec = field(default_factory=lambda: MessageSpec(random_length=4))
    bob: MessageSpec | None = None  # None: same shape as Alice's for two-way protocols
    bell_efficiency: float = 1.0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ConfigError("rounds", f"must be >= 1, got {self.rounds}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if not 0.0 <= self.abort_threshold <= 1.0:
            raise ConfigError("decoy.threshold", f"must lie in [0, 1], got {self.abort_threshold}")
        if not 0.0 <= self.bell_efficiency <= 1.0:
            raise ConfigError("bell_efficiency", f"must lie in [0, 1], got {self.bell_efficiency}")

    def bob_spec(self) -> MessageSpec:
        if self.bob is not None:
            return self.bob
        if self.protocol.two_way:
            return self.alice
        return MessageSpec(bits=())

    def session_config(self, rng: np.random.Generator) -> SessionConfig:
        alice = self.alice.draw(rng)
        bob = self.bob_spec().draw(rng)
        return SessionConfig(
            protocol=self.protocol, alice_bits=alice, bob_bits=bob, decoy=self.decoy,
            channel=self.channel, abort_threshold=self.abort_threshold,
            bell_efficiency=self.bell_efficiency)

    def to_dict(self) -> dict[str, Any]:
        ch = self.channel
        return {
            "protocol": self.protocol.value,
            "rounds": self.rounds,
            "seed": self.master_seed,
            "channel": {"loss": ch.p_loss, "depol": ch.p_depol,
                        "eve": {"kind": ch.eve.kind.value, "basis_policy": ch.eve.basis_policy.value,
                                "fraction": ch.eve.fraction}},
            "decoy": {"mode": self.decoy.mode.value, "fraction": self.decoy.fraction,
                      "threshold": self.abort_threshold, "min_decoys": self.decoy.min_decoys},
            "messages": {"alice": str(self.alice), "bob": str(self.bob_spec())},
            "bell_efficiency": self.bell_efficiency,
        }


def _number(value: Any, name: str, kind: type = float) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _enum(enum_cls, value: Any, name: str):
    try:
        return enum_cls(value)
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise ConfigError(name, f"unknown value {value!r} (expected one of {options})") from None


def _section(raw: Mapping[str, Any], key: str, allowed: set[str]) -> Mapping[str, Any]:
    sec = raw.get(key) or {}
    if not isinstance(sec, Mapping):
        raise ConfigError(key, "expected a mapping")
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"{key}.{sorted(extra)[0]}", "unknown key")
    return sec


def spec_from_mapping(raw: Mapping[str, Any]) -> RunSpec:
    """Build a RunSpec from the config-file structure."""
    if not isinstance(raw, Mapping):
        raise ConfigError("<root>", "config must be a mapping")
    extra = set(raw) - _TOP_KEYS
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown key")
    if "protocol" not in raw:
        raise ConfigError("protocol", "is required")
    ch = _section(raw, "channel", {"loss", "depol", "eve"})
    eve_raw = ch.get("eve") or {}
    if not isinstance(eve_raw, Mapping):
        raise ConfigError("channel.eve", "expected a mapping")
    bad = set(eve_raw) - {"kind", "basis_policy", "fraction"}
    if bad:
        raise ConfigError(f"channel.eve.{sorted(bad)[0]}", "unknown key")
    eve = EveStrategy(
        kind=_enum(EveKind, eve_raw.get("kind", "none"), "channel.eve.kind"),
        basis_policy=_enum(BasisPolicy, eve_raw.get("basis_policy", "random"), "channel.eve.basis_policy"),
        fraction=_number(eve_raw.get("fraction", 1.0), "channel.eve.fraction"))
    channel = ChannelModel(p_loss=_number(ch.get("loss", 0.0), "channel.loss"),
                           p_depol=_number(ch.get("depol", 0.0), "channel.depol"), eve=eve)
    dec = _section(raw, "decoy", {"mode", "fraction", "threshold", "min_decoys"})
    decoy = DecoyPlan(mode=_enum(DecoyMode, dec.get("mode", "permutation"), "decoy.mode"),
                      fraction=_number(dec.get("fraction", 0.5), "decoy.fraction"),
                      min_decoys=_number(dec.get("min_decoys", 64), "decoy.min_decoys", int))
    msgs = _section(raw, "messages", {"alice", "bob"})
    alice = MessageSpec.parse(msgs.get("alice", "random:4"), "messages.alice")
    bob = MessageSpec.parse(msgs["bob"], "messages.bob") if "bob" in msgs else None
    return RunSpec(
        protocol=ProtocolId.parse(raw["protocol"]),
        rounds=_number(raw.get("rounds", 1), "rounds", int),
        master_seed=_number(raw.get("seed", 0), "seed", int),
        channel=channel, decoy=decoy,
        abort_threshold=_number(dec.get("threshold", 0.05), "decoy.threshold"),
        alice=alice, bob=bob,
        bell_efficiency=_number(raw.get("bell_efficiency", 1.0), "bell_efficiency"))


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a YAML or JSON config file into a plain mapping."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {p}: {exc.strerror}") from None
    try:
        data = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError("--config", f"cannot parse {p}: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    return data


def merge_overrides(raw: Mapping[str, Any], overrides: Mapping[str, Any]) -> dict[str, Any]:
    """Apply dotted-key overrides (``channel.eve.fraction``) on top of ``raw``."""
    out: dict[str, Any] = json.loads(json.dumps(raw))  # deep copy of plain data
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = out
        *parents, leaf = dotted.split(".")
        for key in parents:
            child = node.get(key)
            if not isinstance(child, dict):
                child = {}
                node[key] = child
            node = child
        node[leaf] = value
    return out


def replace_axis(spec: RunSpec, axis: str, value: float) -> RunSpec:
    """Copy of ``spec`` with one sweepable channel parameter set."""
    ch = spec.channel
    if axis == "p_loss":
        ch = dataclasses.replace(ch, p_loss=value)
    elif axis == "p_depol":
        ch = dataclasses.replace(ch, p_depol=value)
    elif axis == "eve.fraction":
        kind = ch.eve.kind if ch.eve.kind is not EveKind.NONE else EveKind.INTERCEPT_RESEND
        ch = dataclasses.replace(ch, eve=dataclasses.replace(ch.eve, kind=kind, fraction=value))
    else:
        raise ConfigError("--axis", f"unknown axis {axis!r} (expected p_loss, p_depol or eve.fraction)")
    return dataclasses.replace(spec, channel=ch)


SWEEP_AXES = ("p_loss", "p_depol", "eve.fraction")
