"""Peak fidelity tables for Psi_k and for the SVD-optimal encodings."""

from _common import parser, run


def main() -> None:
    args = parser(__doc__).parse_args()
    w = str(args.workers)
    run(args.out_dir, "table1.csv", "table1", "--k", "2:5", "--n", "100:600:100", "--workers", w)
    run(args.out_dir, "table2.csv", "table2", "--r", "3,5,7,9", "--n", "100,200,300,400,500,3000",
        "--workers", w)


if __name__ == "__main__":
    main()
