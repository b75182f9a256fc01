"""Smooth the capped catenoid with a short unconstrained pre-flow, then
evolve the result under a constrained flow.

A brief unconstrained mean curvature flow acts like a heat semigroup on
the curvature: it should turn the weakly mean-convex capped catenoid
(H = 0 on the neck) into a strictly mean-convex surface. The theoretical
interior gain, however, is of order exp(-d^2 / 4s) for pre-flow time s
and distance d ~ 1.18 from the caps — astronomically below the
finite-difference noise floor of ~1e-10 at this resolution. The measured
post-pre-flow minimum therefore reports the sign of the discretization
noise, and the strict positivity column below is honest about that.

The point of the experiment survives discretization untouched: every
member of the family still loses mean convexity under the constrained
flow, at nearly the same time.
"""

from curvflow import FlowConfig, capped_catenoid
from curvflow.diagnostics import perturbation_experiment


def main():
    catenoid = capped_catenoid(N=1025)
    cfg = FlowConfig(variant="vp", dt=1e-5, t_end=0.005, record_every=100)
    report = perturbation_experiment(catenoid, [1e-4, 1e-3], cfg)

    header = (f"{'s':>8} {'min H after pre-flow':>22} {'strictly H>0':>13} "
              f"{'min H over run':>15} {'goes negative':>14} {'t of crossing':>14}")
    print(header)
    print("-" * len(header))
    for row in report["rows"]:
        t_cross = (f"{row['first_crossing_t']:.6f}"
                   if row["first_crossing_t"] is not None else "-")
        print(f"{row['s']:>8g} {row['minH_after_preflow']:>22.3e} "
              f"{str(row['strictly_mean_convex_after_preflow']):>13} "
              f"{row['min_H_over_run']:>15.4f} "
              f"{str(row['reaches_negative_H']):>14} {t_cross:>14}")
    print()
    print("experiment passed:", report["passed"],
          "(strict positivity after pre-flow is below the noise floor;"
          " see the docstring)")


if __name__ == "__main__":
    main()
