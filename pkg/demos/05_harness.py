"""The experiment harness: seeded trials, summaries, reproducible files.

Equivalent command line:
    cubefpp fpp --n 10 --trials 500 --seed 1 --out results/fpp10
"""

import os
import tempfile

from cubefpp import experiments as ex

cfg = ex.ExperimentConfig("fpp", n=10, trials=500, seed=1)
s = ex.run_fpp(cfg)
for name in ("t_first", "length_per_n", "norm_p1", "norm_p2", "n_l1", "n2_var", "below_theta"):
    m = s.metric(name)
    print(f"{name:>14}: {m.mean:.5f} +- {m.stderr:.5f}")

out = os.path.join(tempfile.mkdtemp(), "fpp10")
paths = ex.write_summary(s, out)
print(open(paths["summary"]).read()[:600])

# the alive first arrival at 1̂ and T_3 have the same law
print(ex.model_equivalence(n=3, trials=3000, seed=1))
