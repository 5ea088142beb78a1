"""Run every bundled scenario: validate both connection matrices, solve for
the transition matrix and print the forced entries and certificates."""

from vdpconley.conley import infer_bifurcation, solve_transition_matrices, validate_connection_matrix
from vdpconley.scenario import PRESETS, load_preset


def main():
    for name in PRESETS:
        sc = load_preset(name)
        print(f"== {name}")
        for side, D in (("before", sc.delta_before), ("after", sc.delta_after)):
            print(f"Delta {side}: {validate_connection_matrix(D).summary()}")
            print(D.to_text())
        sol = solve_transition_matrices(sc.delta_before, sc.delta_after, sc.constraint)
        print("T pattern:")
        print(sol.pattern_text())
        for (t, s, q), v in sol.forced.items():
            print(f"  forced T({t},{s}) @{q} = {'iso' if v else '0'}")
        for cert in infer_bifurcation(sol, sc.bracket):
            print(f"  certificate: {cert}")
        print()


if __name__ == "__main__":
    main()
