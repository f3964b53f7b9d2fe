"""Seeded benchmark generator: three nonlinearly coupled AR(1) processes.

The chain is x -> y -> z with delayed sinusoidal-envelope couplings:

    x[n] = 0.4*x[n-1] + eta_x[n]
    y[n] = 0.5*y[n-1] + kyx(n)*sin(x[n - delay_yx]) + eta_y[n]
    z[n] = 0.5*z[n-1] + kzy(n)*sin(y[n - delay_zy]) + eta_z[n]

with kyx(n) = sin(2 pi n / 500) on 250 <= n < 750 (else 0) and
kzy(n) = cos(2 pi n / 500) on 750 <= n < 1250 (else 0). Coupling
strengths can be rescaled (0 turns a link off). Time n = 0 is the first
retained sample after burn-in, so the coupling windows land at the
indices above. Each trial draws its own noise block from a child seed of
the master seed, so trials are independent and any subset is
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import TrialEnsemble
from .errors import ConfigError

CHANNELS = ("x", "y", "z")

COUPLING_PERIOD = 500
YX_WINDOW = (250, 750)
ZY_WINDOW = (750, 1250)


@dataclass(frozen=True)
class CoupledARConfig:
    n_times: int = 1500
    n_trials: int = 50
    seed: int = 0
    ar_x: float = 0.4
    ar_y: float = 0.5
    ar_z: float = 0.5
    delay_yx: int = 10
    delay_zy: int = 15
    coupling_yx_scale: float = 1.0
    coupling_zy_scale: float = 1.0
    noise_std: float = 1.0
    burn_in: int = 100

    def __post_init__(self) -> None:
        if self.n_times < 1 or self.n_trials < 1:
            raise ConfigError("n_times and n_trials must be >= 1")
        if min(self.delay_yx, self.delay_zy) < 1:
            raise ConfigError("coupling delays must be >= 1")
        if max(self.delay_yx, self.delay_zy) >= self.n_times:
            raise ConfigError("coupling delays must be < n_times")
        if self.burn_in < max(self.delay_yx, self.delay_zy):
            raise ConfigError(
                f"burn_in {self.burn_in} must cover the largest coupling "
                f"delay {max(self.delay_yx, self.delay_zy)}"
            )
        if self.noise_std <= 0:
            raise ConfigError(f"noise_std must be > 0, got {self.noise_std}")


def coupling_profiles(n):
    """Envelope values (kyx, kzy) at time n; n may be an array.

    Zero outside the two half-open activation windows, including all
    negative (pre-recording) times.
    """
    n = np.asarray(n)
    phase = 2.0 * np.pi * n / COUPLING_PERIOD
    kyx = np.where((n >= YX_WINDOW[0]) & (n < YX_WINDOW[1]), np.sin(phase), 0.0)
    kzy = np.where((n >= ZY_WINDOW[0]) & (n < ZY_WINDOW[1]), np.cos(phase), 0.0)
    if n.ndim == 0:
        return float(kyx), float(kzy)
    return kyx, kzy


def generate_coupled_ar(config: CoupledARConfig = CoupledARConfig()) -> TrialEnsemble:
    """Simulate the ensemble; same config always yields identical bytes."""
    total = config.burn_in + config.n_times
    # coupling envelopes indexed by simulation step; burn-in maps to n < 0
    kyx, kzy = coupling_profiles(np.arange(total) - config.burn_in)
    kyx = kyx * config.coupling_yx_scale
    kzy = kzy * config.coupling_zy_scale

    samples = np.empty((config.n_trials, config.n_times, 3))
    trial_seeds = np.random.SeedSequence(config.seed).spawn(config.n_trials)
    for r in range(config.n_trials):
        noise = np.random.default_rng(trial_seeds[r]).normal(
            0.0, config.noise_std, size=(3, total)
        )
        x = np.zeros(total)
        y = np.zeros(total)
        z = np.zeros(total)
        dyx, dzy = config.delay_yx, config.delay_zy
        for i in range(1, total):
            x[i] = config.ar_x * x[i - 1] + noise[0, i]
            cy = kyx[i] * math.sin(x[i - dyx]) if i >= dyx else 0.0
            y[i] = config.ar_y * y[i - 1] + cy + noise[1, i]
            cz = kzy[i] * math.sin(y[i - dzy]) if i >= dzy else 0.0
            z[i] = config.ar_z * z[i - 1] + cz + noise[2, i]
        samples[r, :, 0] = x[config.burn_in:]
        samples[r, :, 1] = y[config.burn_in:]
        samples[r, :, 2] = z[config.burn_in:]
    return TrialEnsemble(samples, CHANNELS, time_start=0)
