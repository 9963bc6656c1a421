"""Trading masking redundancy against error-correction redundancy.

The [1023, 923] family splits 100 redundant bits between masking (l) and
correction (r). A modest Monte Carlo run at the nominal operating point shows
the U-shaped failure curve; raise TRIALS for smoother numbers.
"""

from pbchflash.channel import ChannelParams
from pbchflash.codec import ALLOCATIONS
from pbchflash.experiments import run_grid

TRIALS = 2000

for eta_pre in (0.0, -1.0):
    params = ChannelParams(alpha=0.6, sigma_read=0.3, eta_pre=eta_pre)
    res = run_grid(params, [(0.6, 0.3, eta_pre)], ALLOCATIONS, TRIALS, seed=0)
    print(f"pre-read level {eta_pre:+.1f}")
    for pt in res.points:
        bar = "#" * round(40 * pt.p_fail)
        print(f"  (l, r) = ({pt.l:3d}, {pt.r:3d})  p_fail = {pt.p_fail:.4f} +/- {pt.stderr:.4f}  {bar}")
    best = res.argmin()
    print(f"  lowest failure rate at (l, r) = ({best.l}, {best.r})\n")
