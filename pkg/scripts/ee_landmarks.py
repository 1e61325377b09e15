"""Where the EE optimum lands under nearby power-model variants.

Prints the 1 dB grid argmax of EE over (P_s, P_r) at N=256, K=5, P_p=10 dB,
and the best RF-chain count at P_s = P_p = 5 dB, for:

* the shipped model (half-duplex factor 1/2 on transmit power),
* the same model without the 1/2 factor,
* the shipped model with P_APS = 2 mW.
"""
import math

import numpy as np

from mimorelay import energy
from mimorelay.channel import Scenario, estimation_variances
from mimorelay.energy import PowerModel
from mimorelay.rate import equal_path_loss_sum_rate


def ee(P_s, P_r, N, K, P_p, tau, model, half):
    sigma2, eps2 = estimation_variances(1.0, tau, P_p)
    se = equal_path_loss_sum_rate(N, K, P_s, P_r, sigma2, eps2)
    transmit = (2 * K * P_s + P_r) / model.kappa
    return se / ((0.5 if half else 1.0) * transmit + model.circuit_power(K, N))


def surface_argmax(model, half):
    grid_db = np.arange(-20, 21)
    g = 10 ** (grid_db / 10)
    values = ee(g[:, None], g[None, :], 256, 5, 10.0, 10, model, half)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    return grid_db[i], grid_db[j]


def best_L(N, model, half, K_max=25):
    P = 10 ** 0.5
    K = np.arange(1, K_max + 1)
    values = [ee(P, 2 * k * P, N, int(k), P, 10, model, half) for k in K]
    return 2 * int(K[int(np.argmax(values))])


def main():
    variants = [
        ("shipped (1/2 factor, P_APS=20 mW)", PowerModel(), True),
        ("no 1/2 factor", PowerModel(), False),
        ("P_APS = 2 mW", PowerModel(P_APS=0.002), True),
    ]
    print(f"{'variant':36s}{'argmax P_s,P_r [dB]':>22s}{'L* at N=128/256/512':>24s}")
    for label, model, half in variants:
        s, r = surface_argmax(model, half)
        Ls = "/".join(str(best_L(N, model, half)) for N in (128, 256, 512))
        print(f"{label:36s}{f'{s}, {r}':>22s}{Ls:>24s}")
    opt = energy.optimize_Ps(Scenario(N=256, K=5, P_p=10.0), PowerModel())
    print(f"\ncontinuous optimum (shipped): P_s* = {10 * math.log10(opt.P_s):.2f} dB")


if __name__ == "__main__":
    main()
