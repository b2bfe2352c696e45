"""Synthetic signals with known fractal dimension, and labelled cohorts built from them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameter
from .seeding import derive_seed
from .signal import ChannelRegistry, Group, PresentationStyle, Recording, Style, TimeSeries

# Weierstrass terms are summed until the next amplitude a**n falls below this.
WEIERSTRASS_TOL = 1e-12


class Kind(str, enum.Enum):
    RAMP = "ramp"
    SINE = "sine"
    WHITE_NOISE = "white_noise"
    FBM = "fbm"
    WEIERSTRASS = "weierstrass"
    ALTERNATING = "alternating"


@dataclass(frozen=True)
class SynthSpec:
    kind: Kind
    length: int
    seed: int = 0
    sample_rate_hz: float = 256.0
    amplitude: float = 1.0
    frequency_hz: float = 10.0  # sine
    hurst: float = 0.5  # fbm
    a: float = 0.5  # weierstrass amplitude ratio
    b: float = 3.0  # weierstrass frequency ratio

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.length) != self.length or self.length < 2:
            raise InvalidParameter(f"length must be an integer >= 2, got {self.length}")
        if not self.sample_rate_hz > 0:
            raise InvalidParameter("sample_rate_hz must be positive")
        if self.kind is Kind.FBM and not 0 < self.hurst < 1:
            raise InvalidParameter(f"Hurst exponent must lie in (0, 1), got {self.hurst}")
        if self.kind is Kind.WEIERSTRASS and not (0 < self.a < 1 and self.a * self.b > 1):
            raise InvalidParameter(f"Weierstrass needs 0 < a < 1 and a*b > 1, got a={self.a}, b={self.b}")
        if self.kind is Kind.SINE and not self.frequency_hz > 0:
            raise InvalidParameter("sine frequency must be positive")


def fgn_autocovariance(n: int, hurst: float) -> np.ndarray:
    """Unit-variance fractional Gaussian noise autocovariance at lags 0..n-1."""
    k = np.arange(n, dtype=np.float64)
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k ** h2 + np.abs(k - 1) ** h2)


def fgn(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Exact fractional Gaussian noise by circulant embedding (Davies-Harte).

    The n x n Toeplitz covariance is embedded in a 2n circulant whose
    eigenvalues are nonnegative for every H in (0, 1).
    """
    if not 0 < hurst < 1:
        raise InvalidParameter(f"Hurst exponent must lie in (0, 1), got {hurst}")
    r = fgn_autocovariance(n + 1, hurst)
    row = np.concatenate([r, r[-2:0:-1]])
    m = row.size
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        raise InvalidParameter(f"circulant embedding not nonnegative definite for H={hurst}")
    lam = np.clip(lam, 0.0, None)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(lam / m) * z)
    return w.real[:n]


def weierstrass(n: int, a: float, b: float, phases=None) -> np.ndarray:
    """Truncated Weierstrass cosine series sampled on t = 0, 1/n, ..., (n-1)/n."""
    n_terms = int(math.floor(math.log(WEIERSTRASS_TOL) / math.log(a))) + 1
    if phases is None:
        phases = np.zeros(n_terms)
    t = np.arange(n, dtype=np.float64) / n
    y = np.zeros(n)
    for j in range(n_terms):
        # reduce b**j * t modulo 1 before scaling by 2*pi
        arg = np.mod((b ** j) * t, 1.0)
        y += (a ** j) * np.cos(2.0 * np.pi * arg + phases[j])
    return y


def generate(spec: SynthSpec) -> TimeSeries:
    """Deterministic realization of ``spec`` (same seed, same series)."""
    n = int(spec.length)
    rng = np.random.default_rng(spec.seed)
    if spec.kind is Kind.RAMP:
        x = np.arange(1, n + 1, dtype=np.float64)
    elif spec.kind is Kind.SINE:
        t = np.arange(n) / spec.sample_rate_hz
        x = np.sin(2.0 * np.pi * spec.frequency_hz * t)
    elif spec.kind is Kind.WHITE_NOISE:
        x = rng.standard_normal(n)
    elif spec.kind is Kind.FBM:
        x = np.cumsum(fgn(n, spec.hurst, rng))
    elif spec.kind is Kind.WEIERSTRASS:
        n_terms = int(math.floor(math.log(WEIERSTRASS_TOL) / math.log(spec.a))) + 1
        x = weierstrass(n, spec.a, spec.b, rng.uniform(0.0, 2.0 * np.pi, n_terms))
    elif spec.kind is Kind.ALTERNATING:
        x = (np.arange(n) % 2).astype(np.float64)
    else:  # pragma: no cover
        raise InvalidParameter(f"unknown kind {spec.kind}")
    if spec.kind not in (Kind.RAMP, Kind.ALTERNATING):
        x = spec.amplitude * x
    return TimeSeries(x, spec.sample_rate_hz)


def expected_fd(spec: SynthSpec) -> float | None:
    """Analytic fractal dimension of the generated graph, where known."""
    if spec.kind in (Kind.RAMP, Kind.SINE):
        return 1.0
    if spec.kind is Kind.WHITE_NOISE:
        return 2.0
    if spec.kind is Kind.FBM:
        return 2.0 - spec.hurst
    if spec.kind is Kind.WEIERSTRASS:
        return 2.0 + math.log(spec.a) / math.log(spec.b)
    return None


def presentation_ids(n_presentations: int) -> list[str]:
    """``1A, 1G, 2A, 2G, ...``"""
    return [PresentationStyle(Style.ALGEBRAIC if p % 2 == 0 else Style.GEOMETRIC, p // 2 + 1).label
            for p in range(n_presentations)]


def subject_group(index: int) -> Group:
    # alternate so a subject's group does not depend on cohort size
    return Group.EXPERT if index % 2 == 0 else Group.NOVICE


def make_recording(subject_index: int, presentation_index: int, spec: SynthSpec,
                   channels: ChannelRegistry, root_seed: int = 0) -> Recording:
    group = subject_group(subject_index)
    pid = presentation_ids(presentation_index + 1)[presentation_index]
    data = {}
    for c, label in enumerate(channels.labels):
        seed = derive_seed(root_seed, "cohort", subject_index, presentation_index, c)
        data[label] = generate(replace(spec, seed=seed))
    return Recording(
        subject_id=f"S{subject_index + 1:03d}",
        group=group,
        presentation_id=pid,
        style=PresentationStyle.parse(pid).style,
        channels=data,
    )


def make_cohort(n_subjects: int, n_presentations: int, expert_spec: SynthSpec, novice_spec: SynthSpec,
                channels: ChannelRegistry, root_seed: int = 0) -> list[Recording]:
    """Labelled recordings for every (subject, presentation) pair.

    Even-indexed subjects are experts, odd-indexed novices. Each channel gets
    its own seed derived from (root_seed, "cohort", subject, presentation,
    channel); the seed field of the input specs is ignored.
    """
    if n_subjects < 1 or n_presentations < 1:
        raise InvalidParameter("cohort needs at least one subject and one presentation")
    out = []
    for s in range(n_subjects):
        spec = expert_spec if subject_group(s) is Group.EXPERT else novice_spec
        for p in range(n_presentations):
            out.append(make_recording(s, p, spec, channels, root_seed))
    return out
