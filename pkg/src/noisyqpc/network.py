"""Simulated three-party network: parties with append-only records and channels.

Quantum channels apply Pauli noise (and an optional eavesdropper hook) to
quantum payloads in place.  Classical channels deliver payloads unchanged;
their hook only ever sees a read-only view.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping

import numpy as np

from .gf2 import BitString
from .noise import IDENTITY, INTERCEPT_RESEND, PauliChannel, PauliErrorString, Rng, sample_error


class QuantumPayload:
    """Qubits in flight.  Subclasses own the state and absorb Pauli errors."""

    shape: tuple[int, ...]

    def apply_pauli(self, err: PauliErrorString) -> None:
        raise NotImplementedError


class Party:
    """A protocol participant and the log of every value it handles."""

    def __init__(self, name: str):
        self.name = name
        self._record: list[tuple[str, Any]] = []

    def log(self, label: str, value: Any) -> Any:
        self._record.append((label, value))
        return value

    @property
    def record(self) -> tuple[tuple[str, Any], ...]:
        return tuple(self._record)

    def labels(self) -> set[str]:
        return {label for label, _ in self._record}

    def knows(self, label: str) -> bool:
        return any(lab == label for lab, _ in self._record)

    def value(self, label: str) -> Any:
        for lab, v in reversed(self._record):
            if lab == label:
                return v
        raise KeyError(label)

    def __repr__(self) -> str:
        return f"Party({self.name!r}, {len(self._record)} entries)"


class ChannelKind(enum.Enum):
    QUANTUM = "quantum"
    CLASSICAL = "classical"


EveHook = Callable[..., None]


@dataclass
class Channel:
    kind: ChannelKind
    noise: PauliChannel = IDENTITY
    eve_hook: EveHook | None = None
    eve_after_noise: bool = True
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind is ChannelKind.CLASSICAL and not self.noise.is_identity():
            raise ValueError("classical channels are noiseless")


def quantum_channel(noise: PauliChannel = IDENTITY, eve_hook: EveHook | None = None,
                    eve_after_noise: bool = True, name: str = "") -> Channel:
    return Channel(ChannelKind.QUANTUM, noise, eve_hook, eve_after_noise, name)


def classical_channel(eve_hook: EveHook | None = None, name: str = "") -> Channel:
    return Channel(ChannelKind.CLASSICAL, IDENTITY, eve_hook, True, name)


def intercept_resend(payload: QuantumPayload, rng: Rng) -> None:
    """Eve measures every qubit in a random Z/X basis and resends what she saw.

    Averaged over her outcomes this is exactly the Pauli channel
    ``INTERCEPT_RESEND`` on each qubit, which is what honest parties see.
    """
    payload.apply_pauli(sample_error(INTERCEPT_RESEND, payload.shape, rng))


def _read_only(payload: Any) -> Any:
    if isinstance(payload, np.ndarray):
        view = payload.view()
        view.flags.writeable = False
        return view
    if isinstance(payload, Mapping):
        return {k: _read_only(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return tuple(_read_only(v) for v in payload)
    return payload


def _snapshot(payload: Any) -> Any:
    if isinstance(payload, np.ndarray):
        return payload.copy()
    if isinstance(payload, Mapping):
        return {k: _snapshot(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_snapshot(v) for v in payload]
    return payload


def _same(a: Any, b: Any) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(a, b)
    if isinstance(a, Mapping):
        return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return a == b


class ChannelTamperError(RuntimeError):
    pass


def route(channel: Channel, payload: Any, rng: Rng) -> Any:
    """Deliver ``payload`` across ``channel``."""
    if channel.kind is ChannelKind.QUANTUM:
        if not isinstance(payload, QuantumPayload):
            raise TypeError(f"quantum channel cannot carry {type(payload).__name__}")
        if channel.eve_hook is not None and not channel.eve_after_noise:
            channel.eve_hook(payload, rng)
        if not channel.noise.is_identity():
            payload.apply_pauli(sample_error(channel.noise, payload.shape, rng))
        if channel.eve_hook is not None and channel.eve_after_noise:
            channel.eve_hook(payload, rng)
        return payload

    if isinstance(payload, QuantumPayload):
        raise TypeError("classical channel cannot carry qubits")
    if channel.eve_hook is not None:
        before = _snapshot(payload)
        channel.eve_hook(_read_only(payload))
        if not _same(before, payload):
            raise ChannelTamperError("classical payload changed in transit")
    return payload


def send(channel: Channel, sender: Party, receiver: Party, label: str, payload: Any, rng: Rng) -> Any:
    """Route a payload and log it on both ends under ``label``."""
    sender.log(label, payload)
    delivered = route(channel, payload, rng)
    receiver.log(label, delivered)
    return delivered


# line-oriented key=value records


def _format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, BitString):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, np.ndarray):
        return "".join(str(int(b)) for b in v.ravel())
    return str(v)


def format_record(fields: Mapping[str, Any]) -> str:
    lines = []
    for key, value in fields.items():
        if "=" in key or "\n" in key:
            raise ValueError(f"bad record key {key!r}")
        text = _format_value(value)
        if "\n" in text:
            raise ValueError(f"value for {key!r} spans lines")
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def parse_record(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"record line without '=': {line!r}")
        out[key] = value
    return out


@dataclass
class Network:
    """The three parties plus the channels between them."""

    alice: Party = field(default_factory=lambda: Party("Alice"))
    bob: Party = field(default_factory=lambda: Party("Bob"))
    charlie: Party = field(default_factory=lambda: Party("Charlie"))
    public: Channel = field(default_factory=lambda: classical_channel(name="public"))

    def parties(self) -> Iterator[Party]:
        return iter((self.alice, self.bob, self.charlie))
