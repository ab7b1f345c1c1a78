# %% [markdown]
# Fiber bunching from two sides: the word sweep over the generator and the
# periodic-orbit quantity, then the same gap read off the exponents.

# %%
import math

import numpy as np

from cocylab import (CocycleSystem, Generator, Metric, TransitionStructure, certify,
                     enumerate_periodic_orbits, periodic_exponents)
from cocylab.sft import admissible_words
from cocylab.spectrum import markov_sampler, measure_exponents

ts = TransitionStructure.full_shift(2)
metric = Metric(0.5, 1.0)


def constant(m, label):
    return CocycleSystem(Generator.constant(ts, np.asarray(m, float)), metric, label=label)


# %% hand cases: a = 2 log 1.1 + log .5 < 0, while diag(2, 1/2) has q = log 2 > 0
for cs in (constant(np.diag([1.1, 1 / 1.1]), "mild"), constant(np.diag([2.0, 0.5]), "strong")):
    out = certify(cs, max_N=8)
    d, p = out["direct"], out["periodic"]
    print(f"{cs.label:6s} direct {d.verdict.value:12s} theta={d.theta}  periodic eta={p.eta:.6f}")
print("hand values:", 1.1 ** 2 * 0.5, math.log(2))

# %% a random generator of radius 1 near a rotation-scaling
rng = np.random.default_rng(3)
rot = np.array([[0.0, -1.0], [1.0, 0.0]])
table = {w: 1.2 * (np.eye(2) * math.cos(0.4) + rot * math.sin(0.4)) + 0.05 * rng.standard_normal((2, 2))
         for w in admissible_words(ts, 3)}
cs = CocycleSystem(Generator(ts, 1, table), metric, label="near-conformal")
print(certify(cs)["direct"])

# %% periodic exponents against a Parry-measure estimate
orbits = enumerate_periodic_orbits(ts, 8)
exps = np.array([periodic_exponents(cs, o) for o in orbits])
print("periodic lambda+ range", exps[:, 0].min(), exps[:, 0].max())
est = measure_exponents(cs, markov_sampler(ts, seed=1), n_steps=2000, n_samples=16)
print("measure estimate", est.lam_plus, est.lam_minus)
