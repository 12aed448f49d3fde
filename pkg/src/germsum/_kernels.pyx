# Compiled kernels for sparse truncated series arithmetic.
#
# Exponents are packed into one int64 per term in radix (cap + 1).  Under the
# total-degree truncation every digit of a kept product stays <= cap, so
# packing is injective and exponent addition becomes integer addition.

from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free
from libc.math cimport log2

from germsum import _kernels_py

DEF DENSE_LIMIT = 4194304


cdef inline int64_t _pack(tuple e, int dim, int64_t base) except? -1:
    cdef int64_t key = 0
    cdef int64_t mult = 1
    cdef int k
    for k in range(dim):
        key += (<int64_t>e[k]) * mult
        mult *= base
    return key


cdef tuple _unpack(int64_t key, int dim, int64_t base):
    cdef list out = [0] * dim
    cdef int k
    for k in range(dim):
        out[k] = key % base
        key //= base
    return tuple(out)


def mul_terms(dict a, dict b, int dim, int cap):
    """Truncated Cauchy product of two term maps (compiled)."""
    if cap < 0 or not a or not b:
        return {}
    cdef int64_t base = cap + 1
    if dim * log2(<double>base) > 62.0:
        return _kernels_py.mul_terms(a, b, dim, cap)
    if len(a) > len(b):
        a, b = b, a

    cdef Py_ssize_t na = len(a), nb = len(b), i, j, n_touch = 0
    cdef int64_t *ka = <int64_t *> malloc(na * sizeof(int64_t))
    cdef int *da = <int *> malloc(na * sizeof(int))
    cdef int64_t *kb = <int64_t *> malloc(nb * sizeof(int64_t))
    cdef int *db = <int *> malloc(nb * sizeof(int))
    if ka == NULL or da == NULL or kb == NULL or db == NULL:
        free(ka); free(da); free(kb); free(db)
        raise MemoryError()

    cdef list ca = [None] * na
    cdef list cb = [None] * nb
    cdef tuple e
    cdef int room, dj
    cdef int64_t ki, key, total
    cdef object ci, prod, cur
    cdef list dense
    cdef dict sparse
    cdef list touched = []
    cdef dict out = {}

    try:
        i = 0
        for e, ci in a.items():
            ka[i] = _pack(e, dim, base)
            da[i] = sum(e)
            ca[i] = ci
            i += 1
        rows = sorted([(sum(e), e, c) for e, c in b.items()], key=lambda r: r[0])
        for j in range(nb):
            db[j] = rows[j][0]
            kb[j] = _pack(rows[j][1], dim, base)
            cb[j] = rows[j][2]

        total = 1
        for i in range(dim):
            total *= base
        if total <= DENSE_LIMIT:
            dense = [None] * total
            for i in range(na):
                room = cap - da[i]
                if room < 0:
                    continue
                ki = ka[i]
                ci = ca[i]
                for j in range(nb):
                    if db[j] > room:
                        break
                    key = ki + kb[j]
                    prod = ci * cb[j]
                    cur = dense[key]
                    if cur is None:
                        dense[key] = prod
                        touched.append(key)
                    else:
                        dense[key] = cur + prod
            for key in touched:
                cur = dense[key]
                if cur != 0:
                    out[_unpack(key, dim, base)] = cur
        else:
            sparse = {}
            for i in range(na):
                room = cap - da[i]
                if room < 0:
                    continue
                ki = ka[i]
                ci = ca[i]
                for j in range(nb):
                    if db[j] > room:
                        break
                    key = ki + kb[j]
                    prod = ci * cb[j]
                    cur = sparse.get(key)
                    sparse[key] = prod if cur is None else cur + prod
            for key, cur in sparse.items():
                if cur != 0:
                    out[_unpack(key, dim, base)] = cur
    finally:
        free(ka); free(da); free(kb); free(db)
    return out


def addmul_shifted(dict acc, dict src, coef, tuple shift, int cap):
    """In place: ``acc += coef * x**shift * src``, truncated at ``cap`` (compiled)."""
    cdef int dim = len(shift)
    cdef int room = cap - sum(shift)
    cdef int k
    cdef tuple e, key
    cdef list buf
    cdef object c, prev, val
    if room < 0:
        return
    for e, c in src.items():
        if sum(e) > room:
            continue
        buf = [0] * dim
        for k in range(dim):
            buf[k] = <long>e[k] + <long>shift[k]
        key = tuple(buf)
        prev = acc.get(key)
        val = coef * c if prev is None else prev + coef * c
        if val == 0:
            acc.pop(key, None)
        else:
            acc[key] = val
