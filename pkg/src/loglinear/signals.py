"""Bounded wind-disturbance signals (per-channel sinusoid or square wave)."""
from dataclasses import dataclass, field

import numpy as np

KINDS = ("sinusoid", "square")


@dataclass(frozen=True)
class DisturbanceSignal:
    kind: str = "sinusoid"
    amplitude: tuple = (0.0, 0.0, 0.0)
    frequency: float = 0.5
    phase: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        amp = np.broadcast_to(np.asarray(self.amplitude, dtype=float), (3,))
        if np.any(amp < 0):
            raise ValueError("amplitudes must be non-negative")
        object.__setattr__(self, "amplitude", tuple(float(a) for a in amp))
        ph = np.broadcast_to(np.asarray(self.phase, dtype=float), (3,))
        object.__setattr__(self, "phase", tuple(float(p) for p in ph))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        arg = 2 * np.pi * self.frequency * t + np.asarray(self.phase)
        s = np.sin(arg)
        if self.kind == "square":
            s = np.where(s >= 0, 1.0, -1.0)
        return np.asarray(self.amplitude) * s


@dataclass
class DisturbanceBank:
    """Vectorised evaluation of many signals; ``bank(t)`` has shape (n, 3)."""

    signals: list = field(default_factory=list)

    def __post_init__(self):
        self._amp = np.array([s.amplitude for s in self.signals], dtype=float).reshape(-1, 3)
        self._freq = np.array([s.frequency for s in self.signals], dtype=float)[:, None]
        self._phase = np.array([s.phase for s in self.signals], dtype=float).reshape(-1, 3)
        self._square = np.array([s.kind == "square" for s in self.signals])[:, None]

    def __len__(self):
        return len(self.signals)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)[..., None, None]
        s = np.sin(2 * np.pi * self._freq * t + self._phase)
        s = np.where(self._square, np.where(s >= 0, 1.0, -1.0), s)
        return self._amp * s


def random_bank(n, bounds, rng, frequencies=(0.1, 0.5, 1.0, 2.0), kinds=KINDS):
    """Signals at exactly the declared amplitude bounds, cycling through ``kinds``."""
    signals = []
    for i in range(n):
        kind = kinds[i % len(kinds)]
        f = float(rng.choice(frequencies))
        phase = rng.uniform(0, 2 * np.pi, size=3)
        signals.append(DisturbanceSignal(kind, tuple(bounds), f, tuple(phase)))
    return DisturbanceBank(signals)
