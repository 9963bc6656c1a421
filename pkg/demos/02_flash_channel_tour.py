"""What happens to one wordline of SLC flash between erase and read.

We erase a three-wordline block, program the wordlines in order and follow
the coded middle wordline: how many cells a pre-read flags before it is
written, how much interference its erased cells collect afterwards, and how
many of them read back wrong.
"""

import numpy as np

from pbchflash.channel import (
    ChannelParams,
    erase_block,
    pre_read,
    read_wordline,
    write_wordline,
)
from pbchflash.codec import STUCK1

rng = np.random.default_rng(7)
n = 1023

for eta_pre in (0.0, -1.0):
    params = ChannelParams(alpha=0.6, sigma_read=0.3, eta_pre=eta_pre)
    block = erase_block(params, 3, n, rng)
    write_wordline(block, 0, rng.integers(0, 2, n), params)
    flagged = pre_read(block, 1, params) == STUCK1

    # program the flagged cells (as masking would), leave the rest random
    data = rng.integers(0, 2, n).astype(bool) | flagged
    before = block.vth[1].copy()
    write_wordline(block, 1, data, params)
    write_wordline(block, 2, rng.integers(0, 2, n), params)

    erased = ~data
    shift = block.vth[1, erased] - before[erased]
    y = read_wordline(block, 1, params, rng)
    print(f"eta_pre={eta_pre:+.1f}: {flagged.sum():3d} cells flagged, "
          f"erased-cell shift mean {shift.mean():.3f} V max {shift.max():.3f} V, "
          f"{int(np.sum(y != data))} read errors")
