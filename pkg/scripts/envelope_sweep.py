"""Grid refinement sweep of the se-envelope of the symmetric example.

Truncated grids only remove feasible e-variables, so f0 grows with the cap M
and the resolution n.  The one-step envelope at e1 = 0 stays at 1/4.
"""

import argparse

from emerge.reorder import merge_symmetric_example
from emerge.verify import GridSpec, se_envelope


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--caps", default="5,10,25,50,100,200")
    p.add_argument("--resolutions", default="0,1,2,3")
    args = p.parse_args()
    F = lambda e: merge_symmetric_example(*e)

    print(f"{'n':>3}{'M':>7}{'cells':>10}{'f0':>16}{'F_1(0)':>10}{'root bet':>10}")
    for n in (int(x) for x in args.resolutions.split(",")):
        for M in (float(x) for x in args.caps.split(",")):
            grid = GridSpec(n, M, 2)
            if grid.cells > 10**7:
                continue
            res = se_envelope(F, grid)
            print(f"{n:>3}{M:>7g}{grid.cells:>10}{res.f0:>16.12f}{res.levels[1][0]:>10.6f}{float(res.bet_levels[0]):>10.6f}")


if __name__ == "__main__":
    main()
