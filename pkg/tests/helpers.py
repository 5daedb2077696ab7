"""Independent oracles and random generators shared by the tests.

Nothing here calls into the package's linear algebra, so the checks stay
independent of the code paths under test.
"""

from fractions import Fraction
from itertools import permutations
import random


def leibniz_det(rows):
    """Determinant by the permutation expansion."""
    n = len(rows)
    total = Fraction(0)
    for perm in permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = Fraction(-1 if inversions % 2 else 1)
        for r, c in enumerate(perm):
            term *= rows[r][c]
        total += term
    return total


def mul(a, b):
    return [[sum((Fraction(a[i][k]) * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))] for i in range(len(a))]


def inverse(a):
    """Gauss-Jordan inverse over the rationals."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


def transpose(a):
    return [list(col) for col in zip(*a)]


def rand_rational(rng, lo=-9, hi=9, max_den=5):
    return Fraction(rng.randint(lo, hi), rng.randint(1, max_den))


def rand_invertible(rng, size, max_den=5):
    while True:
        m = [[rand_rational(rng, max_den=max_den) for _ in range(size)] for _ in range(size)]
        if leibniz_det(m) != 0:
            return m


def rand_affine_frame_rows(rng, n):
    """Base point and n neighbours in R^n with independent edge vectors."""
    while True:
        base = [rand_rational(rng) for _ in range(n)]
        nbrs = [[rand_rational(rng) for _ in range(n)] for _ in range(n)]
        edges = [[x - y for x, y in zip(p, base)] for p in nbrs]
        if leibniz_det(edges) != 0:
            return base, nbrs


def apply_affine(linear, translation, p):
    out = [sum((Fraction(a) * x for a, x in zip(row, p)), Fraction(0)) for row in linear]
    if translation is not None:
        out = [x + t for x, t in zip(out, translation)]
    return tuple(out)


def commuting_family(rng, n, affine=False):
    """A valid constant family N_1..N_n together with its seed frame.

    Built as ``A_i = P diag(lambda_i) P^-1`` (commuting by construction),
    frame ``F = (r, A_1 r, ..., A_n r)`` and ``N_i = F^-1 A_i F`` with F
    holding frame vectors as columns. With ``affine=True`` the ``A_i`` fix
    the hyperplane x_{n+1} = 1 and r lies on it.
    Returns (family as nested lists, frame rows in R^{n+1}).
    """
    size = n + 1
    while True:
        if affine:
            q = rand_invertible(rng, n)
            qv = [rand_rational(rng) for _ in range(n)]
            p = [row + [t] for row, t in zip(q, qv)] + [[Fraction(0)] * n + [Fraction(1)]]
            lams = [[Fraction(rng.choice([-3, -2, 2, 3]), rng.randint(1, 2)) for _ in range(n)] + [Fraction(1)] for _ in range(n)]
            r = [rand_rational(rng) for _ in range(n)] + [Fraction(1)]
        else:
            p = rand_invertible(rng, size)
            lams = [[Fraction(rng.choice([-3, -2, -1, 2, 3]), rng.randint(1, 2)) for _ in range(size)] for _ in range(n)]
            r = [rand_rational(rng) for _ in range(size)]
        pinv = inverse(p)
        mats = [mul(mul(p, [[lam[i] if i == j else Fraction(0) for j in range(size)] for i in range(size)]), pinv) for lam in lams]
        frame = [r] + [[row_sum for row_sum in (sum((a * x for a, x in zip(row, r)), Fraction(0)) for row in m)] for m in mats]
        fcols = transpose(frame)
        if leibniz_det(fcols) == 0:
            continue
        finv = inverse(fcols)
        family = [mul(mul(finv, m), fcols) for m in mats]
        return family, frame


def brute_sponge(a, m):
    """Membership by recursive removal of the middle thirds, without digit code."""
    side = 3 ** m
    xs = [x - 1 for x in a]
    while side > 1:
        side //= 3
        middles = sum(1 for x in xs if (x // side) % 3 == 1)
        if middles >= 2:
            return False
    return True


def recursive_simplex_cells(n, m):
    """Cells from the copy rule: S_{k+1} = S_k plus S_k shifted by 2^k along each axis."""
    cells = {(1,) * n}
    for k in range(m):
        shift = 2 ** k
        cells = cells | {tuple(c[j] + shift * (j == i) for j in range(n)) for c in cells for i in range(n)}
    return cells


def sample_rng(seed):
    return random.Random(seed)
