#!/usr/bin/env python3
"""Regenerate the shipped simulation specs under specs/.

The specs use independent per-lab true-value draws: the analytical
variance identities the verifier checks (var(x_K) = u^2(x_K) and its
relatives) presuppose uncorrelated lab results. Heterogeneous budgets
keep the weighted means non-trivial.
"""

from pathlib import Path

from keycomp import Distribution, EffectModel, SimSpec, UncertaintyBudget
from keycomp.io import emit_sim_spec

SPEC_DIR = Path(__file__).resolve().parent.parent / "specs"

N_REPS = 100_000

S_Y = [0.020, 0.045, 0.070, 0.035, 0.090, 0.015, 0.060, 0.080, 0.025, 0.055]
U_E = [0.100, 0.200, 0.140, 0.300, 0.180, 0.250, 0.120, 0.350, 0.160, 0.220]
S_B = [0.150, 0.080, 0.220, 0.120, 0.300, 0.100, 0.180, 0.250, 0.060, 0.200]


def lab_ids(n: int) -> tuple[str, ...]:
    return tuple(f"L{i + 1:02d}" for i in range(n))


def build() -> dict[str, SimSpec]:
    specs: dict[str, SimSpec] = {}
    for n, seed in ((3, 20260301), (5, 20260302), (10, 20260303)):
        specs[f"none_n{n}"] = SimSpec(
            Y=10.0,
            budgets=tuple(UncertaintyBudget(s_Y=S_Y[i], u_e=U_E[i]) for i in range(n)),
            model=EffectModel.NONE,
            n_reps=N_REPS,
            seed=seed,
            shared_true_value=False,
            distribution=Distribution.GAUSSIAN,
            lab_ids=lab_ids(n),
        )
    for n, seed in ((3, 20260304), (5, 20260305), (10, 20260306)):
        specs[f"random_n{n}"] = SimSpec(
            Y=10.0,
            budgets=tuple(
                UncertaintyBudget(s_Y=S_Y[i], u_e=U_E[i], s_b=S_B[i]) for i in range(n)
            ),
            model=EffectModel.RANDOM,
            n_reps=N_REPS,
            seed=seed,
            shared_true_value=False,
            distribution=Distribution.GAUSSIAN,
            lab_ids=lab_ids(n),
        )
    specs["systematic_equal"] = SimSpec(
        Y=10.0,
        budgets=(
            UncertaintyBudget(s_Y=0.05, u_e=0.20, b=0.3),
            UncertaintyBudget(s_Y=0.05, u_e=0.20, b=-0.1),
            UncertaintyBudget(s_Y=0.05, u_e=0.20, b=0.0),
        ),
        model=EffectModel.SYSTEMATIC,
        n_reps=N_REPS,
        seed=20260307,
        shared_true_value=False,
        lab_ids=lab_ids(3),
    )
    specs["systematic_hetero"] = SimSpec(
        Y=10.0,
        budgets=(
            UncertaintyBudget(s_Y=0.02, u_e=0.10, b=0.3),
            UncertaintyBudget(s_Y=0.06, u_e=0.25, b=-0.1),
            UncertaintyBudget(s_Y=0.04, u_e=0.15, b=0.0),
            UncertaintyBudget(s_Y=0.08, u_e=0.30, b=0.15),
        ),
        model=EffectModel.SYSTEMATIC,
        n_reps=N_REPS,
        seed=20260308,
        shared_true_value=False,
        lab_ids=lab_ids(4),
    )
    return specs


def main() -> None:
    SPEC_DIR.mkdir(exist_ok=True)
    for name, spec in build().items():
        path = SPEC_DIR / f"{name}.json"
        path.write_bytes(emit_sim_spec(spec))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
