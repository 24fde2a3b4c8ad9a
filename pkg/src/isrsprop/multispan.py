"""Closed-form propagation across multi-span links with in-line amplifiers.

The worst-case amplification model: each in-line amplifier applies one scalar
gain restoring the total power to its span-input value, so spectral tilt is
never equalized and accumulates span over span.  A per-band restoring policy
and a fixed-gain policy are available as variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .closedform import ClosedFormParams, derive_params, power_profile
from .errors import ConfigurationError
from .ode_oracle import PowerSpectrum
from .profiles import FiberSpec

GAIN_POLICIES = ("restore-total-power", "restore-band-power", "fixed-gain")


@dataclass(frozen=True)
class AmplifierSpec:
    """One amplification stage between spans (or the receiver boost).

    ``noise_figure_db`` maps band names to noise figures; it is only needed
    when ASE is being tracked.
    """

    gain_policy: str = "restore-total-power"
    gain: float | None = None
    noise_figure_db: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.gain_policy not in GAIN_POLICIES:
            raise ConfigurationError(
                f"unknown gain policy {self.gain_policy!r}; expected one of {GAIN_POLICIES}"
            )
        if self.gain_policy == "fixed-gain" and (self.gain is None or self.gain <= 0):
            raise ConfigurationError("fixed-gain amplifier needs a positive linear gain")
        if self.noise_figure_db is not None:
            for band, nf in self.noise_figure_db.items():
                if nf <= 0:
                    raise ConfigurationError(
                        f"noise figure for band {band!r} must be > 0 dB"
                    )


@dataclass(frozen=True)
class LinkSpec:
    """Ordered spans plus the in-line amplifier at each span boundary.

    ``amplifiers`` has one entry per boundary (span count - 1).  When
    ``receiver_boost`` is set, a total-power-restoring stage is applied at
    the link end; it scales signal and accumulated noise identically and
    injects nothing.
    """

    spans: tuple[FiberSpec, ...]
    amplifiers: tuple[AmplifierSpec, ...] = ()
    receiver_boost: bool = False

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(self.spans))
        object.__setattr__(self, "amplifiers", tuple(self.amplifiers))
        if not self.spans:
            raise ConfigurationError("link needs at least one span")
        if len(self.amplifiers) != len(self.spans) - 1:
            raise ConfigurationError(
                f"expected {len(self.spans) - 1} in-line amplifiers for "
                f"{len(self.spans)} spans, got {len(self.amplifiers)}"
            )

    @classmethod
    def uniform(
        cls,
        fiber: FiberSpec,
        n_spans: int,
        amplifier: AmplifierSpec | None = None,
        receiver_boost: bool = False,
    ) -> "LinkSpec":
        """Homogeneous link: the same fiber and amplifier repeated."""
        amp = amplifier if amplifier is not None else AmplifierSpec()
        return cls(
            spans=tuple(fiber for _ in range(n_spans)),
            amplifiers=tuple(amp for _ in range(n_spans - 1)),
            receiver_boost=receiver_boost,
        )

    @property
    def total_length(self) -> float:
        return float(sum(s.length for s in self.spans))

    def span_starts(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum([s.length for s in self.spans])))


def span_gain(span_output: PowerSpectrum, total_launch_power: float) -> float:
    """Scalar gain restoring the span-input total power (the span's total loss)."""
    out = span_output.total_power
    if out <= 0:
        raise ConfigurationError("span output power must be positive")
    return total_launch_power / out


def boundary_gain(
    amplifier: AmplifierSpec,
    span_output: PowerSpectrum,
    total_launch_power: float,
    band_targets: np.ndarray,
):
    """Per-channel linear gain applied at a span boundary (scalar broadcast)."""
    if amplifier.gain_policy == "restore-total-power":
        return span_gain(span_output, total_launch_power)
    if amplifier.gain_policy == "fixed-gain":
        return amplifier.gain
    idx = span_output.grid.band_index
    gains = np.empty(span_output.grid.n_channels)
    for i in range(len(span_output.grid.bands)):
        sel = idx == i
        band_out = span_output.powers[sel].sum()
        if band_out <= 0:
            raise ConfigurationError("band output power must be positive")
        gains[sel] = band_targets[i] / band_out
    return gains


@dataclass(frozen=True)
class MultiSpanResult:
    """Per-span parameters, boundary gains and spectra for one closed-form run.

    ``gains[k]`` is the gain applied after span k (scalar or per-channel
    array); ``final`` includes the receiver boost when the link has one,
    while ``span_outputs[-1]`` never does.
    """

    link: LinkSpec
    params: tuple[ClosedFormParams, ...]
    gains: tuple
    span_inputs: tuple[PowerSpectrum, ...]
    span_outputs: tuple[PowerSpectrum, ...]
    final: PowerSpectrum
    boost_gain: float | None = None

    def spectrum_at(self, z: float) -> PowerSpectrum:
        """In-fiber profile at global position z (boost excluded)."""
        starts = self.link.span_starts()
        if not 0.0 <= z <= starts[-1]:
            raise ConfigurationError(f"z = {z} km outside the link [0, {starts[-1]}] km")
        k = min(int(np.searchsorted(starts, z, side="right")) - 1, len(self.link.spans) - 1)
        slope = self.link.spans[k].raman.as_triangular().slope
        local = power_profile(self.span_inputs[k], self.params[k], slope, z - starts[k])
        return PowerSpectrum(local.grid, local.powers, z=z)

    def total_power_at(self, z: float) -> float:
        starts = self.link.span_starts()
        k = min(int(np.searchsorted(starts, z, side="right")) - 1, len(self.link.spans) - 1)
        return self.params[k].total_power_at(z - starts[k])


def propagate_multispan_closedform(
    launch: PowerSpectrum, link: LinkSpec, order: int = 3
) -> MultiSpanResult:
    """Forward closed-form recursion over all spans of a link.

    Every span's shaping values, alpha0 and reference shaping value are
    re-derived from that span's own input spectrum, so heterogeneous spans
    and accumulated tilt are handled naturally.
    """
    total_launch = launch.total_power
    band_targets = np.array(
        [launch.powers[launch.grid.band_index == i].sum() for i in range(len(launch.grid.bands))]
    )
    params: list[ClosedFormParams] = []
    gains: list = []
    span_inputs: list[PowerSpectrum] = []
    span_outputs: list[PowerSpectrum] = []
    current = launch
    for k, fiber in enumerate(link.spans):
        current = PowerSpectrum(current.grid, current.powers, z=0.0)
        span_inputs.append(current)
        p = derive_params(current, fiber, order)
        params.append(p)
        out = power_profile(current, p, fiber.raman.as_triangular().slope, fiber.length)
        span_outputs.append(out)
        if k < len(link.spans) - 1:
            gain = boundary_gain(link.amplifiers[k], out, total_launch, band_targets)
            gains.append(gain)
            current = out.scaled(gain)
    final = span_outputs[-1]
    boost = None
    if link.receiver_boost:
        boost = total_launch / final.total_power
        final = final.scaled(boost)
    return MultiSpanResult(
        link=link,
        params=tuple(params),
        gains=tuple(gains),
        span_inputs=tuple(span_inputs),
        span_outputs=tuple(span_outputs),
        final=final,
        boost_gain=boost,
    )
