"""Current-profile ingestion and synthesis.

Profiles are zero-order-hold sample lists: the pack current between two
sample times is the earlier sample's value. The synthetic generator builds a
charge-depleting pulse train (urban-drive surrogate) followed by an exactly
zero rest window in which balancing can run.
"""

from __future__ import annotations

import csv
import random
from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import ConfigError, ProfileError


@dataclass(frozen=True)
class CurrentProfile:
    """Ordered (time_s, amps) samples with zero-order hold between them."""

    samples: tuple[tuple[float, float], ...]
    duration: float
    _times: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.samples:
            raise ProfileError("profile has no samples")
        times = tuple(t for t, _ in self.samples)
        if times[0] != 0.0:
            raise ProfileError(f"profile must start at t=0, got t={times[0]}")
        for k in range(1, len(times)):
            if times[k] <= times[k - 1]:
                raise ProfileError(
                    f"profile times must be strictly increasing: sample {k} "
                    f"has t={times[k]} after t={times[k - 1]}"
                )
        if self.duration < times[-1]:
            raise ProfileError("profile duration is shorter than its last sample")
        object.__setattr__(self, "_times", times)

    def current_at(self, t: float) -> float:
        """Pack current at time ``t``, zero-order hold."""
        idx = bisect_right(self._times, t) - 1
        if idx < 0:
            idx = 0
        return self.samples[idx][1]

    @property
    def rest_onset(self) -> float:
        """Start of the trailing window where the current is identically 0.

        Equals ``duration`` when the profile never comes to rest.
        """
        onset = self.duration
        for t, amps in reversed(self.samples):
            if amps != 0.0:
                break
            onset = t
        return onset


def load_profile(path: str) -> CurrentProfile:
    """Read a two-column CSV profile (time_s, current_A); header optional."""
    samples: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ProfileError(f"{path}:{lineno}: expected two columns, got {len(row)}")
            try:
                t, amps = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ProfileError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
            if samples and t <= samples[-1][0]:
                raise ProfileError(
                    f"{path}:{lineno}: time {t} not after previous sample {samples[-1][0]}"
                )
            samples.append((t, amps))
    if not samples:
        raise ProfileError(f"{path}: no samples found")
    return CurrentProfile(samples=tuple(samples), duration=samples[-1][0])


def synth_drive_cycle(active_hours: float, rest_hours: float, mean_depletion_a: float,
                      pulse_period_s: float, pulse_amplitude_a: float,
                      seed: int = 0) -> CurrentProfile:
    """Synthesize a pulse-train drive segment followed by a pure rest window.

    The active segment alternates charge/discharge pulses around the
    depleting mean; pulses come in equal-duration (+a, -a) pairs with seeded
    amplitude jitter, so the net charge of the active segment is exactly
    active_hours * mean_depletion_a amp-hours. After the active segment the
    current is exactly zero for rest_hours.
    """
    if active_hours <= 0 or rest_hours <= 0 or pulse_period_s <= 0:
        raise ConfigError("active_hours, rest_hours and pulse_period_s must be positive")
    if pulse_amplitude_a < 0:
        raise ConfigError("pulse_amplitude_a must be >= 0")

    active_s = active_hours * 3600.0
    rng = random.Random(seed)
    samples: list[tuple[float, float]] = []

    n_pairs = int(active_s // (2.0 * pulse_period_s))
    t = 0.0
    for _ in range(n_pairs):
        amp = pulse_amplitude_a * (0.8 + 0.4 * rng.random())
        samples.append((t, mean_depletion_a + amp))
        samples.append((t + pulse_period_s, mean_depletion_a - amp))
        t += 2.0 * pulse_period_s
    if t < active_s:
        samples.append((t, mean_depletion_a))  # remainder at exactly the mean
    samples.append((active_s, 0.0))

    return CurrentProfile(samples=tuple(samples), duration=active_s + rest_hours * 3600.0)
