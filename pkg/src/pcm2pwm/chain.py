"""Six-behavior PCM-to-PWM conversion chain plus the PWM waveform generator.

The chain runs strictly sequentially:

    S0    conditioning: scale 16-bit integers into [-1, +1)
    S1    x2 interpolation  (44.1 kHz  -> 88.2 kHz)
    S2    x2 interpolation  (88.2 kHz  -> 176.4 kHz)
    S3    x2 interpolation  (176.4 kHz -> 352.8 kHz)
    LINE  pulse-edge linearization (pseudo natural sampling)
    MOLD  second-order noise-shaped quantization to 7 bits

followed by the waveform generator, which expands each 7-bit code into a
128-bit leading-edge pulse frame.  The resulting bit clock is
352800 * 128 = 45,158,400 Hz; doing the same job without the chain would
take 2^16 * 44100 = 2,890,137,600 Hz of pulse resolution.

S1-S3 share one FIR kernel.  All arithmetic is double precision; stages are
pure functions, and an optional operation recorder can observe each stage's
work for cost estimation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio_io import PcmStream, PwmBitstream

BEHAVIORS = ("S0", "S1", "S2", "S3", "LINE", "MOLD")

PCM_FULL_SCALE = 32768  # divisor for S0; 16-bit two's-complement range


@dataclass(frozen=True)
class ChainConfig:
    """Knobs of the conversion chain.  Defaults give the 45.1584 MHz design."""

    input_rate: int = 44100
    interp_factor_per_stage: int = 2
    num_interp_stages: int = 3
    quantizer_bits: int = 7
    shaper_order: int = 2
    fir_taps: int = 63

    @property
    def total_interp(self) -> int:
        return self.interp_factor_per_stage ** self.num_interp_stages

    @property
    def output_rate(self) -> int:
        return self.input_rate * self.total_interp

    @property
    def frame_bits(self) -> int:
        return 2 ** self.quantizer_bits

    @property
    def pwm_clock_hz(self) -> int:
        return self.output_rate * self.frame_bits

    @property
    def naive_clock_hz(self) -> int:
        # pulse resolution a direct 16-bit amplitude-to-width mapping would need
        return 2 ** 16 * self.input_rate

    def interp_group_delay(self) -> int:
        """Accumulated interpolator delay in output-rate samples.

        Each x2 stage delays by (taps - 1) / 2 samples at its own output
        rate; summed here at the final rate.
        """
        per_stage = (self.fir_taps - 1) // 2
        f = self.interp_factor_per_stage
        return per_stage * sum(f ** k for k in range(self.num_interp_stages))


@dataclass
class SampleStream:
    """Real-valued samples in [-1, +1] at a fixed rate."""

    samples: np.ndarray  # float64
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    def __len__(self):
        return len(self.samples)


@dataclass
class QuantizedStream:
    """Integer codes in [0, 2^bits - 1] at a fixed rate."""

    codes: np.ndarray  # int
    bits: int
    sample_rate: int

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.int64)
        if len(self.codes) and (self.codes.min() < 0
                                or self.codes.max() >= 2 ** self.bits):
            raise ValueError(f"codes out of range for {self.bits} bits")

    def __len__(self):
        return len(self.codes)


@dataclass(frozen=True)
class FirKernel:
    """Odd-length symmetric FIR taps for a x2 interpolator, DC gain 2."""

    taps: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.taps)


def design_interp_kernel(num_taps: int = 63) -> FirKernel:
    """Blackman-windowed sinc, cutoff at a quarter of the stage output rate.

    The kernel is scaled so each polyphase branch sums to exactly 1, which
    makes the x2 stage DC-exact (total tap sum 2.0).
    """
    if num_taps % 2 == 0 or num_taps < 3:
        raise ValueError("num_taps must be odd and >= 3")
    m = np.arange(num_taps) - (num_taps - 1) // 2
    taps = 0.5 * np.sinc(0.5 * m) * np.blackman(num_taps)
    taps = 2.0 * taps
    # exact unit DC gain per polyphase branch
    for phase in (0, 1):
        s = taps[phase::2].sum()
        if s != 0.0:
            taps[phase::2] /= s
    taps.flags.writeable = False
    return FirKernel(taps=taps)


def windowed_sinc_lowpass(num_taps: int, cutoff: float) -> np.ndarray:
    """Blackman-windowed sinc lowpass, unit DC gain.

    cutoff is the half-amplitude frequency as a fraction of the sampling
    rate, 0 < cutoff < 0.5.  Stopband rejection is about 74 dB.
    """
    if num_taps % 2 == 0 or num_taps < 3:
        raise ValueError("num_taps must be odd and >= 3")
    if not 0.0 < cutoff < 0.5:
        raise ValueError("cutoff must be in (0, 0.5)")
    m = np.arange(num_taps) - (num_taps - 1) // 2
    taps = 2.0 * cutoff * np.sinc(2.0 * cutoff * m) * np.blackman(num_taps)
    return taps / taps.sum()


# Static per-sample operation model of each behavior, used by the recorder
# hooks.  Interpolators are dominated by the kernel MACs and get their tally
# from the kernel length at run time.
_S0_OPS = {"mul": 1, "mem": 2}
_LINE_OPS = {"add": 6, "mul": 7, "cmp": 3, "mem": 4}
_MOLD_OPS = {"add": 4, "mul": 3, "cmp": 2, "mem": 3}


def s0_condition(pcm: PcmStream, recorder=None) -> SampleStream:
    """S0: map 16-bit integers onto [-1, +1); the rate is unchanged."""
    samples = pcm.samples.astype(np.float64) / PCM_FULL_SCALE
    if recorder is not None:
        _record_block(recorder, "S0", _S0_OPS, len(samples))
    return SampleStream(samples=samples, sample_rate=pcm.sample_rate)


def upsample2(stream: SampleStream, kernel: FirKernel,
              recorder=None, behavior: str = "S1") -> SampleStream:
    """One x2 interpolation stage: zero-stuff, filter, saturate.

    Output is the causal head of the full convolution, so the stage delays
    the signal by (taps - 1) / 2 output samples.
    """
    if len(stream) == 0:
        raise ValueError("cannot upsample an empty stream")
    stuffed = np.zeros(2 * len(stream))
    stuffed[::2] = stream.samples
    out = np.convolve(stuffed, kernel.taps)[:len(stuffed)]
    np.clip(out, -1.0, 1.0, out=out)
    if recorder is not None:
        recorder.record(behavior, "mac", len(kernel) * len(out))
        _record_block(recorder, behavior, {"cmp": 2, "mem": 2}, len(out))
    return SampleStream(samples=out, sample_rate=2 * stream.sample_rate)


def linearize(stream: SampleStream, recorder=None) -> SampleStream:
    """LINE: replace each sample with the signal value at its pulse crossing.

    Uniformly sampled PWM fixes the pulse width from the sample at the frame
    start, which distorts the demodulated audio.  Natural sampling would set
    the width where the signal crosses the frame's ramp.  This stage
    approximates that crossing with a quadratic fit through neighbours
    (k-1, k, k+1): with u = (x + 1) / 2 mapped onto the ramp's unit scale,
    solve u(t) = t on the frame, 0 <= t <= 1, and emit 2 t - 1.  The first
    and last samples have no complete neighbourhood and pass through
    unchanged.
    """
    x = stream.samples
    if len(x) < 3:
        return SampleStream(samples=x.copy(), sample_rate=stream.sample_rate)

    u = 0.5 * (x + 1.0)
    c0 = u[1:-1]
    c1 = 0.5 * (u[2:] - u[:-2])
    c2 = 0.5 * (u[2:] - 2.0 * u[1:-1] + u[:-2])

    # u(t) = c0 + c1 t + c2 t^2;  u(t) = t  =>  c2 t^2 + (c1 - 1) t + c0 = 0.
    # In-band slopes keep c1 < 1, so -b > 0 and this root is the physical
    # crossing, continuous with the linear case as c2 -> 0.
    b = c1 - 1.0
    disc = b * b - 4.0 * c2 * c0
    denom = -b + np.sqrt(np.maximum(disc, 0.0))
    bad = (disc < 0.0) | (denom <= 1e-12)  # no usable crossing: keep the sample
    t = 2.0 * c0 / np.where(bad, 1.0, denom)
    t = np.where(bad, c0, t)
    np.clip(t, 0.0, 1.0, out=t)

    out = np.empty_like(x)
    out[0] = x[0]
    out[-1] = x[-1]
    out[1:-1] = 2.0 * t - 1.0
    if recorder is not None:
        _record_block(recorder, "LINE", _LINE_OPS, max(len(x) - 2, 0))
    return SampleStream(samples=out, sample_rate=stream.sample_rate)


def noise_shape(stream: SampleStream, cfg: ChainConfig,
                recorder=None) -> QuantizedStream:
    """MOLD: error-feedback quantizer with noise transfer (1 - z^-1)^order.

    Per sample: v = x + feedback of past errors, v is clamped to [-1, 1],
    rounded half-up onto the 2^bits - 1 grid, and the pre-clamp error
    v - dequantized(code) is fed back.  State starts at zero.
    """
    n_levels = 2 ** cfg.quantizer_bits - 1
    half = n_levels / 2.0
    inv_half = 1.0 / half
    order = cfg.shaper_order

    codes = []
    append = codes.append
    if order == 2:
        # unrolled hot path: v[k] = x[k] + 2 e[k-1] - e[k-2]
        e1 = e2 = 0.0
        for xv in stream.samples.tolist():
            v = xv + 2.0 * e1 - e2
            c = 1.0 if v > 1.0 else (-1.0 if v < -1.0 else v)
            code = int((c + 1.0) * half + 0.5)  # round half-up, argument >= 0
            if code > n_levels:
                code = n_levels
            append(code)
            e2 = e1
            e1 = v - (code * inv_half - 1.0)
    else:
        # v[k] = x[k] + sum_i fb[i] e[k-1-i], taps from (1 - z^-1)^order
        fb = [(-1.0) ** i * _binom(order, i + 1) for i in range(order)]
        err = [0.0] * order
        for xv in stream.samples.tolist():
            v = xv
            for i in range(order):
                v += fb[i] * err[i]
            c = 1.0 if v > 1.0 else (-1.0 if v < -1.0 else v)
            code = int((c + 1.0) * half + 0.5)
            if code > n_levels:
                code = n_levels
            append(code)
            if order:
                err[1:] = err[:-1]
                err[0] = v - (code * inv_half - 1.0)
    if recorder is not None:
        _record_block(recorder, "MOLD", _MOLD_OPS, len(codes))
    return QuantizedStream(codes=np.array(codes, dtype=np.int64),
                           bits=cfg.quantizer_bits,
                           sample_rate=stream.sample_rate)


def generate_pwm(q: QuantizedStream) -> PwmBitstream:
    """Expand codes into leading-edge pulse frames.

    A frame for code c is c ones followed by (2^bits - c) zeros: the
    hardware equivalent compares a free-running counter against a code
    register.  The bit clock is sample_rate * 2^bits.
    """
    frame_bits = 2 ** q.bits
    ramp = np.arange(frame_bits, dtype=np.int64)
    bits = (ramp[np.newaxis, :] < q.codes[:, np.newaxis]).view(np.uint8)
    return PwmBitstream(bits=bits.reshape(-1), clock_hz=q.sample_rate * frame_bits,
                        frame_bits=frame_bits)


def convert(pcm: PcmStream, cfg: ChainConfig | None = None,
            recorder=None, apply_linearization: bool = True) -> PwmBitstream:
    """Full sequential chain S0 -> S1 -> S2 -> S3 -> LINE -> MOLD -> PWM.

    apply_linearization=False bypasses LINE, e.g. to measure how much
    distortion the correction removes.
    """
    cfg = cfg or ChainConfig()
    if pcm.sample_rate != cfg.input_rate:
        raise ValueError(f"input rate {pcm.sample_rate} != configured "
                         f"{cfg.input_rate}")
    kernel = design_interp_kernel(cfg.fir_taps)
    stream = s0_condition(pcm, recorder)
    for i in range(cfg.num_interp_stages):
        stream = upsample2(stream, kernel, recorder, f"S{i + 1}")
    if apply_linearization:
        stream = linearize(stream, recorder)
    q = noise_shape(stream, cfg, recorder)
    return generate_pwm(q)


def _record_block(recorder, behavior, ops, n):
    for kind, per_sample in ops.items():
        recorder.record(behavior, kind, per_sample * n)


def _binom(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out
