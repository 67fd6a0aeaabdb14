"""Qubit fidelity against magnetic field and polar angle.

Field sweeps use the Psi_k peak time of each chain; both closed-form
variants are written side by side.
"""

from _common import parser, run


def main() -> None:
    args = parser(__doc__).parse_args()
    for n, k in [(51, 2), (51, 4), (201, 2), (201, 4), (201, 3)]:
        run(args.out_dir, f"field_n{n}_k{k}.csv", "field-sweep", "--n", str(n), "--k", str(k),
            "--theta", "pi/2", "--grid", "0:0.5:0.0025", "--variant", "eq8", "--quiet")
    for n, k in [(203, 2), (201, 3), (201, 2), (203, 3)]:
        for variant in ("eq6", "eq8"):
            run(args.out_dir, f"theta_n{n}_k{k}_{variant}.csv", "theta-sweep", "--n", str(n),
                "--k", str(k), "--grid", "0:pi:pi/100", "--variant", variant, "--quiet")


if __name__ == "__main__":
    main()
