"""Multiply a 2x3 quaternion matrix by a 3-vector, directly and through the
equivalent real matrix product, and print both."""

from pathlib import Path

import numpy as np

from vnets import io
from vnets.algebra import format_element
from vnets.linalg import big_left_matrix, phi_matrix, vmat_mul_direct, vmat_mul_emulated

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    A = io.load_matrix(DATA / "quaternion_A.json")
    x = io.load_matrix(DATA / "quaternion_x.json", A.algebra)
    Q = A.algebra

    ML = big_left_matrix(A)
    print(f"M_L(A), {ML.shape[0]}x{ML.shape[1]}:")
    print(np.array2string(ML.astype(int), max_line_width=120))
    print("phi(x):", phi_matrix(x)[:, 0].astype(int))

    direct = vmat_mul_direct(A, x)
    emulated = vmat_mul_emulated(A, x)
    print("y = A x:")
    for i in range(direct.rows):
        print("  ", format_element(Q, direct[i, 0]))
    print("phi(y) via real product:", phi_matrix(emulated)[:, 0].astype(int))
    print("paths agree exactly:", bool(np.array_equal(direct.data, emulated.data)))


if __name__ == "__main__":
    main()
