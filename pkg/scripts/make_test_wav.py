#!/usr/bin/env python3
"""Generate 16-bit PCM WAV test signals (sine, noise or silence)."""

import argparse
import wave

import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--kind", choices=("sine", "noise", "silence"),
                        default="sine")
    parser.add_argument("--freq", type=float, default=1000.0)
    parser.add_argument("--amp-dbfs", type=float, default=-6.0)
    parser.add_argument("--seconds", type=float, default=4.3)
    parser.add_argument("--rate", type=int, default=44100)
    parser.add_argument("--channels", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    n = int(round(args.seconds * args.rate))
    amp = 10.0 ** (args.amp_dbfs / 20.0)
    if args.kind == "sine":
        t = np.arange(n) / args.rate
        signal = amp * np.sin(2.0 * np.pi * args.freq * t)
    elif args.kind == "noise":
        rng = np.random.default_rng(args.seed)
        signal = amp * rng.uniform(-1.0, 1.0, n)
    else:
        signal = np.zeros(n)

    pcm = np.clip(np.round(signal * 32767.0), -32768, 32767).astype(np.int16)
    frames = np.repeat(pcm[:, None], args.channels, axis=1).reshape(-1)

    with wave.open(args.out, "wb") as wf:
        wf.setnchannels(args.channels)
        wf.setsampwidth(2)
        wf.setframerate(args.rate)
        wf.writeframes(frames.tobytes())
    print(f"wrote {args.out}: {n} samples, {args.rate} Hz, "
          f"{args.channels} ch, {args.kind}")


if __name__ == "__main__":
    main()
