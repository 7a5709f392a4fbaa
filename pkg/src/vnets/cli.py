"""Command-line front end.

Machine-readable output (``--format machine``) is line oriented.  Every
matrix is printed as a header line ``<name> <rows> <cols>`` followed by one
line per row of space-separated numbers in ``%.17g`` format; scalars are
printed as ``<key> <value>`` lines.  The same invocation always produces the
same bytes.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import io
from .algebra import (
    AlgebraError,
    analyze_algebra,
    builtin_algebra,
    BUILTINS,
    format_element,
    left_mult_matrix,
    multiply,
    random_algebra,
)
from .layers import dense_param_counts
from .linalg import (
    VMatrix,
    big_left_matrix,
    big_left_matrix_blockwise,
    phi_matrix,
    unphi_matrix,
    vmat_mul_direct,
    vmat_mul_emulated,
)
from .training import TARGETS, DEMO_CONFIG, TrainConfig, TrainingDiverged, approximation_demo


class CliError(Exception):
    pass


def _num(v: float) -> str:
    return "%.17g" % (v + 0.0)  # + 0.0 folds -0.0 into 0


def _dump_matrix(name: str, A, out) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    out.write(f"{name} {A.shape[0]} {A.shape[1]}\n")
    for row in A:
        out.write(" ".join(_num(v) for v in row) + "\n")


def _pretty_matrix(A, out, indent="  ") -> None:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    cells = [[f"{v + 0.0:.6g}" for v in row] for row in A]
    width = max(len(c) for row in cells for c in row)
    for row in cells:
        out.write(indent + " ".join(c.rjust(width) for c in row) + "\n")


def _parse_coords(text: str, n: int, what: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"{what}: could not parse {text!r} as numbers") from None
    if len(vals) != n:
        raise CliError(f"{what}: expected {n} coordinates, got {len(vals)}")
    return np.array(vals)


def _load_algebra(args, default=None):
    if getattr(args, "file", None):
        return io.load_algebra(args.file)
    name = getattr(args, "builtin", None) or default
    if name is None:
        raise CliError("give an algebra with --builtin NAME or --file PATH")
    return builtin_algebra(name)


# --- subcommands ----------------------------------------------------------


def cmd_inspect(args, out) -> int:
    A = _load_algebra(args)
    rep = analyze_algebra(A, args.tol)
    if args.export:
        io.save_algebra(A, args.export)
    identity = None if rep.identity is None else rep.identity
    if args.format == "machine":
        out.write(f"name {A.name}\n")
        out.write(f"dim {A.n}\n")
        out.write("basis " + " ".join(A.basis_labels) + "\n")
        for i in range(A.n):
            _dump_matrix(f"table_row_{i + 1}", A.p[i], out)
        out.write(f"commutative {int(rep.commutative)}\n")
        out.write(f"associative {int(rep.associative)}\n")
        out.write(f"hypercomplex {int(rep.is_hypercomplex)}\n")
        out.write("identity " + ("none" if identity is None else " ".join(_num(v) for v in identity)) + "\n")
        out.write(f"nondegenerate {int(rep.nondegenerate)}\n")
        out.write("singular_b " + (" ".join(map(str, rep.singular_bk_indices)) or "none") + "\n")
        return 0
    labels = A.basis_labels
    out.write(f"algebra: {A.name} (dimension {A.n})\n")
    out.write("basis: " + ", ".join(labels) + "\n")
    out.write("multiplication table (row * column):\n")
    cells = [[format_element(A, A.p[i, j]) for j in range(A.n)] for i in range(A.n)]
    width = max(max(len(c) for row in cells for c in row), max(len(l) for l in labels))
    out.write("  " + " " * width + " | " + " ".join(l.rjust(width) for l in labels) + "\n")
    for i in range(A.n):
        out.write("  " + labels[i].rjust(width) + " | " + " ".join(c.rjust(width) for c in cells[i]) + "\n")
    yes = {True: "yes", False: "no"}
    out.write(f"commutative: {yes[rep.commutative]}\n")
    out.write(f"associative: {yes[rep.associative]}\n")
    if identity is None:
        out.write("identity: none\n")
    else:
        out.write(f"identity: {format_element(A, identity)}\n")
    out.write(f"hypercomplex: {yes[rep.is_hypercomplex]}\n")
    if rep.nondegenerate:
        out.write("non-degenerate: yes\n")
    else:
        idx = ", ".join(str(k) for k in rep.singular_bk_indices)
        out.write(f"non-degenerate: no (singular B_k for k = {idx})\n")
    return 0


def cmd_mul(args, out) -> int:
    A = _load_algebra(args)
    x = _parse_coords(args.x, A.n, "x")
    y = _parse_coords(args.y, A.n, "y")
    z = multiply(A, x, y)
    if args.format == "machine":
        out.write(" ".join(_num(v) for v in z) + "\n")
    else:
        out.write(f"({format_element(A, x)}) * ({format_element(A, y)}) = {format_element(A, z)}\n")
    return 0


def cmd_emulate(args, out) -> int:
    A_raw = io._read_json(args.a_file)
    B_raw = io._read_json(args.b_file)
    if args.file or args.builtin:
        alg = _load_algebra(args)
    elif "algebra" in A_raw:
        alg = io.algebra_from_dict(A_raw["algebra"], "algebra.")
    else:
        raise CliError("no algebra given: use --builtin/--file or embed 'algebra' in the matrix file")
    A = io.matrix_from_dict(A_raw, alg)
    B = io.matrix_from_dict(B_raw, alg)
    if A.cols != B.rows:
        raise CliError(f"shape mismatch: A is {A.rows}x{A.cols}, B is {B.rows}x{B.cols}")
    ML = big_left_matrix(A)
    phiB = phi_matrix(B)
    phiC = ML @ phiB
    if args.format == "machine":
        _dump_matrix("M_L(A)", ML, out)
        _dump_matrix("phi(B)", phiB, out)
        _dump_matrix("phi(C)", phiC, out)
        return 0
    C = unphi_matrix(alg, phiC)
    out.write(f"M_L(A) ({ML.shape[0]}x{ML.shape[1]}):\n")
    _pretty_matrix(ML, out)
    out.write(f"phi(B) ({phiB.shape[0]}x{phiB.shape[1]}):\n")
    _pretty_matrix(phiB, out)
    out.write(f"C = A B ({C.rows}x{C.cols}):\n")
    for i in range(C.rows):
        out.write("  " + " | ".join(format_element(alg, C[i, j]) for j in range(C.cols)) + "\n")
    return 0


def _rel_err(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(1.0, np.abs(b).max()))


def cmd_check(args, out) -> int:
    """Numerical self-checks of the emulation identities on one algebra."""
    A = _load_algebra(args) if (args.file or args.builtin) else random_algebra(args.dim, np.random.default_rng(args.seed))
    rng = np.random.default_rng(args.seed)
    n = A.n
    results = []

    worst = 0.0
    for _ in range(args.trials):
        a, x = rng.uniform(-1, 1, (2, n))
        worst = max(worst, _rel_err(left_mult_matrix(A, a) @ x, multiply(A, a, x)))
    results.append(("left multiplication matrix", worst, 1e-12))

    worst = 0.0
    for _ in range(args.trials):
        x, y, z = rng.uniform(-1, 1, (3, n))
        s, t = rng.uniform(-2, 2, 2)
        worst = max(worst, _rel_err(multiply(A, s * x + t * y, z), s * multiply(A, x, z) + t * multiply(A, y, z)))
        worst = max(worst, _rel_err(multiply(A, z, s * x + t * y), s * multiply(A, z, x) + t * multiply(A, z, y)))
    results.append(("bilinearity", worst, 1e-12))

    worst = worst_blocks = 0.0
    for _ in range(args.trials):
        M, L, N = rng.integers(1, 6, 3)
        P = VMatrix(A, rng.uniform(-1, 1, (M, L, n)))
        Q = VMatrix(A, rng.uniform(-1, 1, (L, N, n)))
        worst = max(worst, _rel_err(vmat_mul_emulated(P, Q).data, vmat_mul_direct(P, Q).data))
        worst_blocks = max(worst_blocks, _rel_err(big_left_matrix(P), big_left_matrix_blockwise(P)))
    results.append(("matrix product emulation", worst, 1e-10))
    results.append(("Kronecker vs blockwise M_L", worst_blocks, 1e-12))

    rep = analyze_algebra(A)
    if rep.identity is not None:
        worst = 0.0
        for _ in range(args.trials):
            x = rng.uniform(-1, 1, n)
            worst = max(worst, _rel_err(multiply(A, rep.identity, x), x), _rel_err(multiply(A, x, rep.identity), x))
        results.append(("identity element", worst, 1e-12))

    failed = 0
    for name, err, tol in results:
        ok = err <= tol
        failed += not ok
        if args.format == "machine":
            out.write(f"{name.replace(' ', '_')} {int(ok)} {_num(err)}\n")
        else:
            out.write(f"[{'PASS' if ok else 'FAIL'}] {name}: max rel. error {err:.3g} (tol {tol:g})\n")
    if failed:
        print(f"vnets: {failed} check(s) failed", file=sys.stderr)
    return 1 if failed else 0


def cmd_params(args, out) -> int:
    for key in ("n", "M", "N"):
        if getattr(args, key) < 1:
            raise CliError(f"{key} must be a positive integer, got {getattr(args, key)}")
    vnet, real = dense_param_counts(args.n, args.M, args.N)
    ratio = real / vnet
    if args.format == "machine":
        out.write(f"vnet {vnet}\nreal {real}\nratio {_num(ratio)}\n")
    else:
        out.write(f"vector-valued dense layer (n={args.n}, M={args.M}, N={args.N}): {vnet} parameters\n")
        out.write(f"equivalent real dense layer: {real} parameters\n")
        out.write(f"ratio real/vector-valued: {ratio:.4g}\n")
    return 0


def cmd_train_demo(args, out) -> int:
    A = _load_algebra(args, default="quaternion")
    cfg = TrainConfig(
        learning_rate=args.lr,
        iterations=args.iterations,
        momentum=args.momentum,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    if args.hidden < 1:
        raise CliError("--hidden must be at least 1")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            report = approximation_demo(A, args.target, args.hidden, cfg, n_train=args.samples,
                                        n_grid=args.grid, act=args.activation)
        finally:
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
    if args.table:
        with open(args.table, "w") as fh:
            fh.write(report.to_table())
    if args.save_model:
        io.save_model(report.model, args.save_model)
    if args.format == "machine":
        out.write(f"final_train_mse {_num(report.final_train_mse)}\n")
        out.write(f"sup_error_on_grid {_num(report.sup_error_on_grid)}\n")
        out.write(f"checkpoints {len(report.mse_history)}\n")
        out.write(f"first_mse {_num(report.mse_history[0])}\n")
    else:
        out.write(f"target {args.target} on the unit ball of {A.name}, {args.hidden} hidden neurons,"
                  f" split {args.activation}\n")
        out.write(f"initial train MSE: {report.mse_history[0]:.6g}\n")
        out.write(f"final train MSE:   {report.final_train_mse:.6g}\n")
        out.write(f"sup error on grid: {report.sup_error_on_grid:.6g}\n")
    return 0


# --- parser ---------------------------------------------------------------


def _add_algebra_args(p, required=False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--builtin", choices=sorted(BUILTINS), help="built-in algebra")
    g.add_argument("--file", help="algebra definition file (JSON)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "machine"), default="human",
                        help="output style (default: human)")
    parser = argparse.ArgumentParser(prog="vnets", description="Vector-valued neural network toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", parents=[common], help="show the multiplication table and algebraic properties")
    _add_algebra_args(p, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--export", metavar="PATH", help="write the algebra definition file")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("mul", parents=[common], help="multiply two elements given as coordinate lists")
    _add_algebra_args(p, required=True)
    p.add_argument("x", help="coordinates, e.g. 1,2,3,4 (put -- before negative values)")
    p.add_argument("y")
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("emulate", parents=[common], help="real emulation of a vector-valued matrix product")
    _add_algebra_args(p)
    p.add_argument("a_file", metavar="A")
    p.add_argument("b_file", metavar="B")
    p.set_defaults(func=cmd_emulate)

    p = sub.add_parser("check", parents=[common], help="numerical self-checks on an algebra")
    _add_algebra_args(p)
    p.add_argument("--dim", type=int, default=3, help="dimension of a random algebra if none given")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("params", parents=[common], help="parameter counts of vector-valued vs real dense layers")
    p.add_argument("n", type=int)
    p.add_argument("M", type=int)
    p.add_argument("N", type=int)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("train-demo", parents=[common], help="fit a shallow V-MLP to a target on the unit ball")
    _add_algebra_args(p)
    p.add_argument("--target", choices=TARGETS, default="square")
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--activation", choices=("sigmoid", "relu", "tanh", "identity"), default="sigmoid")
    p.add_argument("--lr", type=float, default=DEMO_CONFIG.learning_rate)
    p.add_argument("--momentum", type=float, default=DEMO_CONFIG.momentum)
    p.add_argument("--iterations", type=int, default=DEMO_CONFIG.iterations)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEMO_CONFIG.seed)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--table", metavar="PATH", help="write the (iteration, mse) table")
    p.add_argument("--save-model", metavar="PATH")
    p.set_defaults(func=cmd_train_demo)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage or help
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args, sys.stdout)
    except TrainingDiverged as exc:
        print(f"vnets: error: training diverged at iteration {exc.iteration}", file=sys.stderr)
        return 2
    except (CliError, AlgebraError, ValueError, OSError) as exc:
        print(f"vnets: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
