"""Directed information flow in a coupled Ulam lattice.

Generates a ring of unidirectionally coupled chaotic maps, quantizes each
series by marking local extrema, and measures the capacity bound and its
significance in both directions at a few coupling strengths.  Forward
transfer (down the coupling direction) is significant wherever the maps
stay desynchronized; the reverse direction never is.  A full fine-grained
sweep is available from the command line:

    tetensor sweep-epsilon --eps-step 0.02 --output sweep.csv
"""
import numpy as np

from tetensor import (
    EmbeddingSpec,
    LatticeConfig,
    acausal_mirror,
    delay_scan,
    generate_lattice,
    null_distribution,
    p_value,
    quantize_extrema,
    scan_statistic,
)
from tetensor.significance import SurrogateConfig


def main():
    spec = EmbeddingSpec(ell=1, m_len=2)   # source vector spans two lags
    taus = range(1, 21)
    ac = acausal_mirror(taus)
    print(" eps |   fwd p   tau* |   rev p")
    for eps in (0.0, 0.1, 0.18, 0.5, 0.82, 1.0):
        cfg = LatticeConfig(n_maps=30, epsilon=eps, boundary="periodic",
                            n_samples=30_000, transient=10_000, seed=5)
        data = generate_lattice(cfg)
        x1 = quantize_extrema(data[:, 0])
        x2 = quantize_extrema(data[:, 1])
        row = [f"{eps:4.2f} |"]
        for src, dst in ((x1, x2), (x2, x1)):
            scfg = SurrogateConfig(n_surrogates=199, alpha=0.01, seed=1)
            obs = scan_statistic(src, dst, spec, "capacity_bound",
                                 tau_range=taus, acausal_range=ac)
            null = null_distribution(src, dst, spec, "capacity_bound", scfg,
                                     tau_range=taus, acausal_range=ac)
            p = p_value(obs, null)
            if (src is x1):
                tau_star = delay_scan(src, dst, spec, taus,
                                      objective="capacity_bound").tau_star
                row.append(f"  {p:.3f}   {tau_star:3d}  |")
            else:
                row.append(f"  {p:.3f}")
        print(" ".join(row))
    print("\ndips near eps = 0.18 and 0.82 are collective periodic windows")
    print("of the lattice: the dynamics lock into a cycle and the quantized")
    print("series stop carrying directed information.")


if __name__ == "__main__":
    main()
