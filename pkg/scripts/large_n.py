"""Peak fidelity versus N and theta-averaged qubit fidelities up to N = 10000.

Long chains use the envelope-restricted peak search; expect a few minutes
for the full grid on one core.
"""

from _common import parser, run


def main() -> None:
    p = parser(__doc__)
    p.add_argument("--n-max", type=int, default=10_000)
    args = p.parse_args()
    w = str(args.workers)
    ns = sorted({100, 200, 500, 1000, 2000, 5000, args.n_max})
    ns = ",".join(str(n) for n in ns if n <= args.n_max)
    run(args.out_dir, "scaling.csv", "scaling", "--k", "2,3,4,6,11", "--n", ns, "--workers", w)
    run(args.out_dir, "averages.csv", "avg", "--k", "2,3,11", "--n", ns, "--workers", w)


if __name__ == "__main__":
    main()
