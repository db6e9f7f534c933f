"""
Four sequences, four modes
==========================

Each gallery family is judged in every mode at once.  The verdicts are
certificates at a finite horizon, so a third answer (undetermined) is allowed.
"""

from modeconv.modes import Mode, by_mode, lp_stat, trimmed_stat, verdict, verdict_table
from modeconv.sequences import GALLERY_NAMES, gallery

# the full table at the default horizon (256) and p = 1
for name in GALLERY_NAMES:
    print(f"{name:11s}", verdict_table(verdict(gallery(name), 1)))

# the spike keeps unit mass in Lp but vanishes off a shrinking set
spike = gallery("spike", 2)
print("spike lp:", [str(v) for v in lp_stat(spike, 2, 8).values])
print("spike trimmed at delta=1/4:", [str(v) for v in trimmed_stat(spike, 2, 1 / 4, 8).values])

# spread loses height but not mass; at p = 2 its height n^(-1/2) is still
# above 1/64 at n = 256, which the statistics show honestly
spread = gallery("spread", 2)
print("spread trimmed at delta=1/4:", [str(v) for v in trimmed_stat(spread, 2, 1 / 4, 20).values])

# the almost_Lp certificate for the spike is a single small exceptional set
cert = by_mode(verdict(spike, 2))[Mode.ALMOST_LP].certificate
print("exceptional set of measure", cert.exceptional_set.measure, "from n =", cert.start)
