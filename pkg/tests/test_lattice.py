from hypothesis import given, settings
from hypothesis import strategies as st

from tropsplit.lattice import (
    INFINITE,
    IntMatrix,
    hermite_rows,
    in_lattice,
    kernel_basis,
    kernel_image_cokernel,
    lattice_fiber_product,
    multi_fiber_product,
    saturate,
    saturation_index,
    smith_normal_form,
    solve_integral,
    sublattice_index,
)

from oracles import coset_count, coset_saturation_index, lcm_all, minors_gcd, random_small_matrices, sympy_divisors

SUITE = random_small_matrices(200)


def small_matrix(max_dim=3, entry=6):
    return st.integers(1, max_dim).flatmap(
        lambda n: st.integers(1, max_dim).flatmap(
            lambda k: st.lists(
                st.lists(st.integers(-entry, entry), min_size=k, max_size=k), min_size=n, max_size=n
            )
        )
    )


def test_snf_identity():
    snf = smith_normal_form(IntMatrix.identity(2))
    assert snf.diag.to_rows() == [[1, 0], [0, 1]]


def test_snf_known_divisors():
    assert smith_normal_form(IntMatrix.from_rows([[2, 4], [6, 8]])).divisors == [2, 4]


def test_index_suite_against_coset_enumeration():
    checked_full = 0
    for rows in SUITE:
        m = IntMatrix.from_rows(rows)
        divs = [d for d in sympy_divisors(rows) if d]
        assert saturation_index(m) == minors_gcd(rows) == coset_saturation_index(rows), rows
        idx = sublattice_index(m, m.rows)
        if len(divs) < m.rows:
            assert idx == INFINITE
            continue
        checked_full += 1
        assert idx == coset_count(rows, lcm_all(divs)), rows
    assert checked_full > 30


@settings(max_examples=150, deadline=None)
@given(small_matrix())
def test_snf_matches_sympy(rows):
    m = IntMatrix.from_rows(rows)
    snf = smith_normal_form(m)
    ours = tuple(d for d in snf.divisors if d)
    theirs = tuple(d for d in sympy_divisors(rows) if d)
    assert ours == theirs
    assert (snf.left @ m @ snf.right).to_rows() == snf.diag.to_rows()
    for a, b in zip(ours, ours[1:]):
        assert b % a == 0


@settings(max_examples=100, deadline=None)
@given(small_matrix())
def test_saturation_is_saturated(rows):
    m = IntMatrix.from_rows(rows)
    s = saturate(m)
    assert saturation_index(s) == 1
    for c in m.columns():
        assert in_lattice(s, c)


@settings(max_examples=100, deadline=None)
@given(small_matrix())
def test_kernel_image_cokernel_ranks(rows):
    m = IntMatrix.from_rows(rows)
    ker, img, cok = kernel_image_cokernel(m)
    assert ker.cols + img.cols == m.cols
    assert img.cols + cok.free_rank == m.rows
    assert (m @ ker).is_zero() if ker.cols else True
    prod = 1
    for t in cok.torsion:
        prod *= t
    assert prod == saturation_index(m)


@settings(max_examples=80, deadline=None)
@given(small_matrix(), small_matrix())
def test_fiber_product_commutes(f_rows, g_rows):
    n = min(len(f_rows), len(g_rows))
    f = IntMatrix.from_rows(f_rows[:n])
    g = IntMatrix.from_rows(g_rows[:n])
    k, (p1, p2) = lattice_fiber_product(f, g)
    if k:
        assert (f @ p1).to_rows() == (g @ p2).to_rows()
        stacked = p1.vstack(p2)
        assert saturation_index(stacked) == 1


def test_fiber_product_of_doubling_maps():
    two = IntMatrix.from_rows([[2]])
    k, (p1, p2) = lattice_fiber_product(two, two)
    assert k == 1
    assert (p1.to_rows(), p2.to_rows()) in (([[1]], [[1]]), ([[-1]], [[-1]]))


def test_multi_fiber_product_single_map_is_whole_source():
    assert multi_fiber_product([IntMatrix.from_rows([[1, 2]])], 1).to_rows() == [[1, 0], [0, 1]]


@settings(max_examples=100, deadline=None)
@given(small_matrix(), st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_solve_integral_roundtrip(rows, coeffs):
    m = IntMatrix.from_rows(rows)
    b = m @ tuple(coeffs[: m.cols])
    x = solve_integral(m, b)
    assert x is not None
    assert tuple(m @ tuple(x)) == tuple(b)


@settings(max_examples=100, deadline=None)
@given(small_matrix())
def test_hermite_rows_canonical(rows):
    cols = [list(c) for c in IntMatrix.from_rows(rows).columns()]
    n = len(rows)
    h1 = hermite_rows(cols, n)
    h2 = hermite_rows(list(reversed(cols)) + [[2 * x for x in c] for c in cols], n)
    assert h1 == h2


def test_kernel_basis_of_difference():
    k = kernel_basis(IntMatrix.from_rows([[1, -1]]))
    assert k.cols == 1 and set(k.col(0)) <= {1, -1}
