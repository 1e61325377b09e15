"""Gap between the scaled-power sum rate and its N -> infinity limit, for several budgets E_s = E_r."""
import numpy as np

from mimorelay import rate
from mimorelay.channel import Scenario
from mimorelay.rate import ScalingSpec


def main():
    Ns = [2**k for k in range(8, 17, 2)]
    print("case          E     " + "".join(f"{f'N={N}':>11s}" for N in Ns))
    for case, alpha in (("fixed-pilot", 1.0), ("scaled-pilot", 0.5)):
        for E in (0.01, 0.1, 0.3, 1.0, 3.0):
            spec = ScalingSpec(alpha, E, E, case)
            limit = rate.scaling_limit(Scenario(N=1, K=5, P_p=10.0), spec)
            gaps = [abs(rate.scaled_sum_rate(Scenario(N=N, K=5, P_p=10.0), spec).sum - limit) / limit
                    for N in Ns]
            print(f"{case:14s}{E:<6g}" + "".join(f"{g:11.2%}" for g in np.array(gaps)))


if __name__ == "__main__":
    main()
