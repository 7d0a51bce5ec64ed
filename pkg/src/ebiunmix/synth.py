"""Ground-truth cardiac/respiratory sources and four-channel pseudo-EBI mixtures.

Stands in for a measured dataset so separation quality can be scored against
known sources. The cardiac source is a quasi-periodic train of Gaussian
volume-pulse bumps (fixed template, per-beat interval jitter); the
respiratory source is a small harmonic series. Both are returned zero-mean,
unit-variance. Mixing is a fixed full-column-rank channel matrix plus white
Gaussian noise.

`correlation_injection` amplitude-modulates the cardiac pulse train with the
respiratory signal. The modulation acts on the nonnegative physical pulse
waveform (the zero-baseline bump train), which is what makes the mixed
sources measurably correlated; modulating the zero-mean source would leave
the sample correlation at noise level.

All randomness flows from the explicit seed passed to each call; there is no
global random state.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dsp import SignalMatrix
from .errors import InvalidInputError
from .linalg import check_matrix, svd

CARDIAC_DEFAULT_HZ = 1.2
RESPIRATORY_DEFAULT_HZ = 0.25

# Gaussian bump with 60 ms full width at half maximum.
CARDIAC_BUMP_SIGMA_S = 0.060 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

DEFAULT_MIXING = (
    (1.0, 0.8),
    (0.6, 1.0),
    (0.9, -0.4),
    (-0.3, 1.1),
)


@dataclass(frozen=True)
class SourceSpec:
    """Parameters of one generated source signal."""

    kind: str
    fundamental_hz: float
    amplitude: float = 1.0
    harmonics: int = 3
    jitter_pct: float = 0.0

    def __post_init__(self):
        if self.kind not in ("cardiac", "respiratory"):
            raise InvalidInputError(f"kind must be 'cardiac' or 'respiratory', got {self.kind!r}")
        if not (self.fundamental_hz > 0):
            raise InvalidInputError(f"fundamental_hz must be > 0, got {self.fundamental_hz}")
        if self.harmonics < 1:
            raise InvalidInputError(f"harmonics must be >= 1, got {self.harmonics}")
        if self.jitter_pct < 0:
            raise InvalidInputError(f"jitter_pct must be >= 0, got {self.jitter_pct}")

    @classmethod
    def cardiac(cls, fundamental_hz: float = CARDIAC_DEFAULT_HZ, amplitude: float = 1.0,
                jitter_pct: float = 2.0) -> "SourceSpec":
        return cls("cardiac", fundamental_hz, amplitude, harmonics=1, jitter_pct=jitter_pct)

    @classmethod
    def respiratory(cls, fundamental_hz: float = RESPIRATORY_DEFAULT_HZ, amplitude: float = 1.0,
                    harmonics: int = 3) -> "SourceSpec":
        return cls("respiratory", fundamental_hz, amplitude, harmonics=harmonics)

    def check_rate(self, rate_hz: float) -> None:
        if not (self.fundamental_hz < rate_hz / 2.0):
            raise InvalidInputError(
                f"fundamental {self.fundamental_hz} Hz at/above Nyquist for rate {rate_hz} Hz"
            )


@dataclass(frozen=True)
class MixtureSpec:
    """How sources are combined into channels."""

    mixing: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_MIXING))
    noise_sigma: float = 0.0
    correlation_injection: float = 0.0

    def __post_init__(self):
        a = check_matrix(self.mixing, "mixing")
        if a.shape[1] > a.shape[0]:
            raise InvalidInputError(
                f"mixing needs at least as many channels as sources, got {a.shape}"
            )
        sv = svd(a).D
        if sv[-1] <= 1e-6 * sv[0]:
            raise InvalidInputError("mixing matrix is rank deficient")
        if self.noise_sigma < 0:
            raise InvalidInputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not (0.0 <= self.correlation_injection < 1.0):
            raise InvalidInputError(
                f"correlation_injection must be in [0, 1), got {self.correlation_injection}"
            )
        object.__setattr__(self, "mixing", a)


def _normalize(x: np.ndarray) -> np.ndarray:
    x = x - x.mean()
    sd = x.std()
    if sd == 0.0:
        return x
    return x / sd


def gen_cardiac(spec: SourceSpec, n: int, rate_hz: float, seed) -> np.ndarray:
    """Quasi-periodic pulse train: one Gaussian bump per beat.

    Beat intervals are 1/fundamental scaled by (1 + u), u drawn uniformly in
    +-jitter_pct/100 per beat. Output is zero-mean unit-variance (all-zero if
    amplitude is 0).
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    spec.check_rate(rate_hz)
    if spec.amplitude == 0.0:
        return np.zeros(n)
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate_hz
    sig = np.zeros(n)
    sigma = CARDIAC_BUMP_SIGMA_S
    period = 1.0 / spec.fundamental_hz
    center = 0.5 * period
    end = n / rate_hz + 5.0 * sigma
    while center < end:
        lo = max(0, int((center - 5.0 * sigma) * rate_hz))
        hi = min(n, int((center + 5.0 * sigma) * rate_hz) + 1)
        if hi > lo:
            sig[lo:hi] += np.exp(-0.5 * ((t[lo:hi] - center) / sigma) ** 2)
        jitter = (spec.jitter_pct / 100.0) * rng.uniform(-1.0, 1.0)
        center += period * (1.0 + jitter)
    return _normalize(spec.amplitude * sig)


def gen_respiratory(spec: SourceSpec, n: int, rate_hz: float, seed) -> np.ndarray:
    """Harmonic series: sinusoids at m * fundamental with 1/m amplitudes and
    seeded phases; zero-mean unit-variance. Harmonics at/above Nyquist are
    dropped with a warning."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    spec.check_rate(rate_hz)
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate_hz
    sig = np.zeros(n)
    for m in range(1, spec.harmonics + 1):
        freq = m * spec.fundamental_hz
        phase = rng.uniform(0.0, 2.0 * math.pi)
        if freq >= rate_hz / 2.0:
            warnings.warn(
                f"harmonic {m} at {freq} Hz is at/above Nyquist; truncated", stacklevel=2
            )
            break
        sig += np.sin(2.0 * math.pi * freq * t + phase) / m
    return _normalize(spec.amplitude * sig)


def effective_sources(sources, spec: MixtureSpec) -> np.ndarray:
    """Sources as actually mixed, after correlation injection.

    Column 0 is taken as the cardiac source, column 1 as respiratory. With
    injection c > 0 the cardiac column is shifted to its nonnegative physical
    baseline, multiplied by (1 + c * respiratory), and re-centered.
    """
    s = check_matrix(sources, "sources")
    c = spec.correlation_injection
    if c <= 0.0 or s.shape[1] < 2:
        return s
    s = s.copy()
    pulse = s[:, 0] - s[:, 0].min()
    modulated = (1.0 + c * s[:, 1]) * pulse
    s[:, 0] = modulated - modulated.mean()
    return s


def mix(sources, spec: MixtureSpec, seed, rate_hz: float = 1000.0,
        channel_labels: tuple = ()) -> SignalMatrix:
    """Combine source columns into channels: sources @ mixing^T + noise.

    Applies correlation injection first (see effective_sources). The noise is
    iid Gaussian with spec.noise_sigma, drawn from the given seed.
    """
    s = check_matrix(sources, "sources")
    if spec.mixing.shape[1] != s.shape[1]:
        raise InvalidInputError(
            f"mixing expects {spec.mixing.shape[1]} sources, got {s.shape[1]}"
        )
    s = effective_sources(s, spec)
    channels = s @ spec.mixing.T
    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        channels = channels + spec.noise_sigma * rng.standard_normal(channels.shape)
    return SignalMatrix(channels, rate_hz, channel_labels)


def default_scenario(
    n: int = 25000,
    rate_hz: float = 1000.0,
    seed: int = 0,
    noise_sigma: float = 0.05,
    correlation_injection: float = 0.0,
    cardiac: SourceSpec | None = None,
    respiratory: SourceSpec | None = None,
    mixing=None,
) -> tuple[SignalMatrix, SignalMatrix]:
    """Generate a four-channel mixture plus its ground-truth source pair.

    Returns:
        (mixture, truth): mixture has one channel per mixing row; truth holds
        the two sources exactly as mixed (so a perfect unmixer scores
        correlation 1 against it), labeled "cardiac" and "respiratory".
    """
    cardiac = cardiac or SourceSpec.cardiac()
    respiratory = respiratory or SourceSpec.respiratory()
    mix_spec = MixtureSpec(
        mixing=np.array(DEFAULT_MIXING) if mixing is None else np.asarray(mixing, dtype=float),
        noise_sigma=noise_sigma,
        correlation_injection=correlation_injection,
    )
    seed_cardiac, seed_resp, seed_noise = np.random.SeedSequence(seed).spawn(3)
    sources = np.column_stack(
        [
            gen_cardiac(cardiac, n, rate_hz, seed_cardiac),
            gen_respiratory(respiratory, n, rate_hz, seed_resp),
        ]
    )
    truth = SignalMatrix(
        effective_sources(sources, mix_spec), rate_hz, ("cardiac", "respiratory")
    )
    mixture = mix(sources, mix_spec, seed_noise, rate_hz)
    return mixture, truth
