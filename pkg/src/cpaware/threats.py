"""Intent-driven threat signal generation and capability labelling.

Three received-signal families, all built on the same legitimate CO-OFDM
transmission ``x`` with per-sample transmit amplitude ``a = sqrt(P) * h``:

* non-adversarial:  y = a_l * x + w
* disruptive:       y = a_l * x + h_j * alpha(n) * j(n) + w, where j(n) is
  complex Gaussian with per-sample power equal to the jammer's transmit
  power and alpha(n) is an i.i.d. Bernoulli on/off mask (per discrete-time
  sample) that obfuscates the attack,
* deceptive:        y = a_l * x + (a_s * s - a_l * (1 - err) * x) + w,
  a spoofed CO-OFDM signal ``s`` carrying independent malicious bits minus
  the spoofer's estimate of the legitimate component; ``err`` is the
  spoofer's fractional channel-estimation error, so the residual
  legitimate amplitude is ``err * a_l``.

Labelling policy: non-adversarial and disruptive samples carry the
legitimate receiver's BER (equalizing with the true legitimate
amplitude).  Deceptive samples instead carry the *adversary's* BER, i.e.
the receiver equalizes with the spoofer's amplitude and errors are
counted against the malicious bits; a deceptive signal that decodes
cleanly is a highly capable threat even though it barely disturbs the
legitimate metrics.

The capability label is ``log10(BER)`` floored at one error per sample
(``1 / bits_per_sample``) so error-free samples get a finite label.

Generators are pure functions of (scenario, seed).  Each randomness
consumer (legitimate bits, receiver noise, jammer waveform, obfuscation
mask, malicious bits) draws from its own derived stream, so switching a
threat knob never perturbs the other components: a disruptive sample
with obfuscation probability 0 is bit-identical to the non-adversarial
sample at the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .channel import LinkBudget, NoiseConfig, awgn, channel_gain, gain_series
from .ofdm import (
    FrameConfig,
    compute_ber,
    ofdm_demodulate,
    ofdm_modulate,
    qam_demodulate,
    qam_modulate,
    random_bits,
    remove_cp,
)


class ThreatKind(Enum):
    """Intent classes; the value is the one-hot index."""

    DECEPTIVE = 0
    DISRUPTIVE = 1
    NON_ADVERSARIAL = 2

    @property
    def one_hot(self) -> np.ndarray:
        vec = np.zeros(3)
        vec[self.value] = 1.0
        return vec


INTENT_NAMES = {k: k.name.lower() for k in ThreatKind}


# Derived-stream tags; one PRNG stream per randomness consumer.
_STREAM_LEGIT_BITS = 0
_STREAM_NOISE = 1
_STREAM_JAMMER = 2
_STREAM_OBFUSCATION = 3
_STREAM_MALICIOUS_BITS = 4


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), tag])


@dataclass(frozen=True)
class ThreatScenario:
    """One fully specified generation setup."""

    kind: ThreatKind
    legit_link: LinkBudget
    noise: NoiseConfig
    frame: FrameConfig
    adversary_link: Optional[LinkBudget] = None
    obfuscation_prob: float = 0.5
    estimation_error: float = 0.3

    def __post_init__(self) -> None:
        if self.kind is not ThreatKind.NON_ADVERSARIAL and self.adversary_link is None:
            raise ValueError(f"{self.kind.name} scenario requires an adversary link")
        if not 0.0 <= self.obfuscation_prob <= 1.0:
            raise ValueError("obfuscation_prob must lie in [0, 1]")
        if not 0.0 <= self.estimation_error <= 1.0:
            raise ValueError("estimation_error must lie in [0, 1]")


@dataclass
class LabeledSample:
    """Received series (prefix intact) plus intent and capability labels."""

    received: np.ndarray
    kind: ThreatKind
    intent: np.ndarray
    log_ber: float
    raw_ber: float
    metadata: dict = field(default_factory=dict)


def label_log_ber(ber: float, frame: FrameConfig) -> float:
    """Capability label: log10 of the BER, floored at one resolvable error."""
    if not 0.0 <= ber <= 1.0:
        raise ValueError("ber must lie in [0, 1]")
    floor = 1.0 / frame.bits_per_sample
    return float(np.log10(max(ber, floor)))


def _tx_amplitude(link: LinkBudget, length: int):
    """sqrt(P) * h(n); a scalar unless the link drifts."""
    root_p = np.sqrt(link.tx_power_w)
    if link.drift_m_per_sample == 0.0:
        return root_p * channel_gain(link)
    return root_p * gain_series(link, length)


def _decode_ber(received, amplitude, frame: FrameConfig, ref_bits) -> float:
    """Equalize with a known amplitude and count bit errors."""
    payload = remove_cp(received, frame)
    if np.ndim(amplitude) == 0:
        grid = ofdm_demodulate(payload, complex(amplitude), frame)
    else:
        gains = remove_cp(np.asarray(amplitude), frame)
        grid = ofdm_demodulate(payload / gains, 1.0, frame)
    return compute_ber(ref_bits, qam_demodulate(grid, frame))


def generate_components(scenario: ThreatScenario, seed: int) -> dict:
    """All additive terms of one sample, for composition and inspection."""
    frame = scenario.frame
    length = frame.sample_len

    legit_bits = random_bits(frame.bits_per_sample, _stream(seed, _STREAM_LEGIT_BITS))
    x = ofdm_modulate(qam_modulate(legit_bits, frame), frame)
    legit_amp = _tx_amplitude(scenario.legit_link, length)
    noise = awgn(length, scenario.noise, _stream(seed, _STREAM_NOISE))

    parts: dict = {
        "legit_bits": legit_bits,
        "legit_series": x,
        "legit_amp": legit_amp,
        "legit_term": legit_amp * x,
        "noise": noise,
    }

    if scenario.kind is ThreatKind.DISRUPTIVE:
        adv = scenario.adversary_link
        jam_gain = channel_gain(adv)
        waveform = awgn(
            length,
            NoiseConfig.from_linear(adv.tx_power_w),
            _stream(seed, _STREAM_JAMMER),
        )
        mask = _stream(seed, _STREAM_OBFUSCATION).binomial(
            1, scenario.obfuscation_prob, size=length
        )
        parts.update(
            jam_gain=jam_gain,
            obfuscation_mask=mask,
            jam_term=jam_gain * mask * waveform,
        )
    elif scenario.kind is ThreatKind.DECEPTIVE:
        adv = scenario.adversary_link
        malicious_bits = random_bits(
            frame.bits_per_sample, _stream(seed, _STREAM_MALICIOUS_BITS)
        )
        s = ofdm_modulate(qam_modulate(malicious_bits, frame), frame)
        adv_amp = _tx_amplitude(adv, length)
        estimate = legit_amp * (1.0 - scenario.estimation_error)
        parts.update(
            malicious_bits=malicious_bits,
            spoof_series=s,
            adv_amp=adv_amp,
            spoof_term=adv_amp * s,
            deceptive_term=adv_amp * s - estimate * x,
        )
    return parts


def _assemble(scenario: ThreatScenario, seed: int, parts: dict) -> LabeledSample:
    frame = scenario.frame
    kind = scenario.kind

    if kind is ThreatKind.NON_ADVERSARIAL:
        received = parts["legit_term"] + parts["noise"]
    elif kind is ThreatKind.DISRUPTIVE:
        received = parts["legit_term"] + parts["jam_term"] + parts["noise"]
    else:
        received = parts["legit_term"] + parts["deceptive_term"] + parts["noise"]

    if kind is ThreatKind.DECEPTIVE:
        ber = _decode_ber(received, parts["adv_amp"], frame, parts["malicious_bits"])
    else:
        ber = _decode_ber(received, parts["legit_amp"], frame, parts["legit_bits"])

    meta = {
        "kind": INTENT_NAMES[kind],
        "seed": int(seed),
        "legit_power_w": scenario.legit_link.tx_power_w,
        "legit_distance_m": scenario.legit_link.distance_m,
        "noise_dbw": scenario.noise.variance_dbw,
    }
    if scenario.adversary_link is not None:
        meta["adversary_power_w"] = scenario.adversary_link.tx_power_w
        meta["adversary_distance_m"] = scenario.adversary_link.distance_m
    if kind is ThreatKind.DISRUPTIVE:
        meta["obfuscation_prob"] = scenario.obfuscation_prob
    if kind is ThreatKind.DECEPTIVE:
        meta["estimation_error"] = scenario.estimation_error

    return LabeledSample(
        received=received,
        kind=kind,
        intent=kind.one_hot,
        log_ber=label_log_ber(ber, frame),
        raw_ber=ber,
        metadata=meta,
    )


def generate_sample(scenario: ThreatScenario, seed: int) -> LabeledSample:
    """Generate one labelled sample; deterministic in (scenario, seed)."""
    return _assemble(scenario, seed, generate_components(scenario, seed))


def gen_non_adversarial(scenario: ThreatScenario, seed: int) -> LabeledSample:
    if scenario.kind is not ThreatKind.NON_ADVERSARIAL:
        raise ValueError("scenario kind must be NON_ADVERSARIAL")
    return generate_sample(scenario, seed)


def gen_disruptive(scenario: ThreatScenario, seed: int) -> LabeledSample:
    if scenario.kind is not ThreatKind.DISRUPTIVE:
        raise ValueError("scenario kind must be DISRUPTIVE")
    return generate_sample(scenario, seed)


def gen_deceptive(scenario: ThreatScenario, seed: int) -> LabeledSample:
    if scenario.kind is not ThreatKind.DECEPTIVE:
        raise ValueError("scenario kind must be DECEPTIVE")
    return generate_sample(scenario, seed)


@dataclass(frozen=True)
class ScenarioSpace:
    """Value sets that per-sample scenario draws are taken from.

    Distances, powers and the noise level are drawn uniformly and
    independently; optics are fixed across the space.
    """

    legit_powers_w: tuple = (0.5,)
    legit_distances_m: tuple = (500e3, 750e3, 1500e3)
    adversary_powers_w: tuple = (0.25, 0.5)
    adversary_distances_m: tuple = (750e3, 1500e3, 3000e3)
    noise_dbw_levels: tuple = (-56.0, -57.0)
    wavelength_m: float = 1500e-9
    tx_aperture_m: float = 0.1
    rx_aperture_m: float = 0.2
    jitter_rad: float = 0.002
    divergence_rad: float = 0.02
    tx_efficiency: float = 1.0
    rx_efficiency: float = 1.0
    obfuscation_prob: float = 0.5
    estimation_error: float = 0.3

    def __post_init__(self) -> None:
        for name in ("legit_powers_w", "legit_distances_m", "adversary_powers_w",
                     "adversary_distances_m", "noise_dbw_levels"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be non-empty")

    def _link(self, power_w: float, distance_m: float) -> LinkBudget:
        return LinkBudget(
            tx_power_w=power_w,
            distance_m=distance_m,
            wavelength_m=self.wavelength_m,
            tx_aperture_m=self.tx_aperture_m,
            rx_aperture_m=self.rx_aperture_m,
            tx_efficiency=self.tx_efficiency,
            rx_efficiency=self.rx_efficiency,
            jitter_rad=self.jitter_rad,
            divergence_rad=self.divergence_rad,
        )

    def draw(self, kind: ThreatKind, frame: FrameConfig,
             rng: np.random.Generator) -> ThreatScenario:
        """Draw one concrete scenario for the given intent."""
        def pick(values):
            return values[rng.integers(len(values))]

        legit = self._link(pick(self.legit_powers_w), pick(self.legit_distances_m))
        adversary = None
        if kind is not ThreatKind.NON_ADVERSARIAL:
            adversary = self._link(
                pick(self.adversary_powers_w), pick(self.adversary_distances_m)
            )
        return ThreatScenario(
            kind=kind,
            legit_link=legit,
            noise=NoiseConfig(variance_dbw=float(pick(self.noise_dbw_levels))),
            frame=frame,
            adversary_link=adversary,
            obfuscation_prob=self.obfuscation_prob,
            estimation_error=self.estimation_error,
        )
