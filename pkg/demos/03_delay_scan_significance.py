"""Finding the interaction delay and testing directedness.

A destination that copies its source with a three-step lag is scanned over
candidate delays; the capacity-bound curve peaks at the true lag.  The
significance machinery then compares the best causal value against the best
value at mirrored acausal alignments (source read from the future): genuine
directed coupling wins causally, while dependence inherited from shared
history would win acausally.  The margin is ranked against circular-shift
surrogates for an exactly calibrated p-value.
"""
import numpy as np

from tetensor import (
    EmbeddingSpec,
    acausal_mirror,
    delay_scan,
    null_distribution,
    p_value,
    scan_statistic,
)
from tetensor.significance import SurrogateConfig


def main():
    rng = np.random.default_rng(11)
    n = 20_000
    x = rng.integers(0, 2, n)
    y = np.empty(n, dtype=int)
    y[:3] = 0
    y[3:] = x[:-3]
    y = np.where(rng.random(n) < 0.1, 1 - y, y)   # 10% symbol noise

    spec = EmbeddingSpec(ell=1, m_len=1)
    taus = range(1, 9)
    scan = delay_scan(x, y, spec, taus, objective="capacity_bound")
    print("delay -> capacity bound (bits):")
    for tau, value in sorted(scan.curve.items()):
        marker = "  <-- optimum" if tau == scan.tau_star else ""
        print(f"  {tau}: {value:.6f}{marker}")

    ac = acausal_mirror(taus)
    cfg = SurrogateConfig(n_surrogates=199, alpha=0.01, seed=0)
    for src, dst, label in ((x, y, "x -> y"), (y, x, "y -> x")):
        obs = scan_statistic(src, dst, spec, "capacity_bound",
                             tau_range=taus, acausal_range=ac)
        null = null_distribution(src, dst, spec, "capacity_bound", cfg,
                                 tau_range=taus, acausal_range=ac)
        print(f"{label}: causal margin = {obs:+.6f} bits, "
              f"p = {p_value(obs, null):.3f}")


if __name__ == "__main__":
    main()
