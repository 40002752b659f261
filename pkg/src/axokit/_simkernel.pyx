# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled packed-simulation kernel.

Same contract as axokit._simpy.run_program; the word loop runs without the
GIL so characterization threads overlap.
"""

from libc.stdint cimport int32_t, uint64_t


def run_program(const int32_t[:, ::1] prog, uint64_t[:, ::1] sig, const uint64_t[::1] gate):
    cdef Py_ssize_t k, w
    cdef Py_ssize_t n_instr = prog.shape[0]
    cdef Py_ssize_t W = sig.shape[1]
    cdef int32_t op, out, i0, i1, i2, i3, flags, cfg
    cdef uint64_t g, neg, d, s
    with nogil:
        for k in range(n_instr):
            op = prog[k, 0]
            out = prog[k, 1]
            i0 = prog[k, 2]
            i1 = prog[k, 3]
            i2 = prog[k, 4]
            i3 = prog[k, 5]
            flags = prog[k, 6]
            cfg = prog[k, 7]
            g = gate[cfg] if cfg >= 0 else <uint64_t>0xFFFFFFFFFFFFFFFFUL
            neg = <uint64_t>0xFFFFFFFFFFFFFFFFUL if (flags & 1) else <uint64_t>0
            if op == 0:
                for w in range(W):
                    sig[out, w] = (sig[i0, w] ^ sig[i1, w]) & g
            elif op == 1:
                for w in range(W):
                    sig[out, w] = (((sig[i0, w] & sig[i1, w]) ^ (sig[i2, w] & sig[i3, w])) ^ neg) & g
            else:
                for w in range(W):
                    d = ((sig[i2, w] & sig[i3, w]) ^ neg) & g
                    s = sig[i0, w]
                    sig[out, w] = (s & sig[i1, w]) | (~s & d)
