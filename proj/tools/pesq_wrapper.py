#!/usr/bin/env python3
# Copyright 2026 The MAVe-sim Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""PESQ command-line adapter backed by the `pesq` Python package.

Accepts the reference tool's argument order, e.g.

    pesq_wrapper.py +16000 +wb reference.wav degraded.wav

and prints "P.862.2 Prediction (MOS-LQO):  = <score>".
Point MAVE_PESQ_BIN at this file to enable PESQ columns.
"""

import sys

import numpy as np
from pesq import pesq
from scipy.io import wavfile


def main(argv):
    rate, mode, files = 16000, "nb", []
    for arg in argv[1:]:
        if arg == "+wb":
            mode = "wb"
        elif arg.startswith("+") and arg[1:].isdigit():
            rate = int(arg[1:])
        else:
            files.append(arg)
    if len(files) != 2:
        print("usage: pesq_wrapper.py +16000 [+wb] REF DEG", file=sys.stderr)
        return 2
    signals = []
    for path in files:
        fs, x = wavfile.read(path)
        if fs != rate:
            print(f"{path}: expected {rate} Hz, got {fs}", file=sys.stderr)
            return 2
        if x.dtype == np.int16:
            x = x.astype(np.float64) / 32768.0
        signals.append(np.asarray(x, dtype=np.float64))
    score = pesq(rate, signals[0], signals[1], mode)
    label = "P.862.2" if mode == "wb" else "P.862.1"
    print(f"{label} Prediction (MOS-LQO):  = {score:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
