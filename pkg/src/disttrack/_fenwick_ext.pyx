# Compiled Fenwick tree; same interface as _fenwick_py.FenwickTree.
from libc.stdlib cimport calloc, free


cdef class FenwickTree:
    cdef long long* _tree
    cdef public long size
    cdef public long long total
    cdef long _top

    def __cinit__(self, long size):
        if size < 1:
            raise ValueError("size must be >= 1")
        self.size = size
        self.total = 0
        self._tree = <long long*> calloc(size + 1, sizeof(long long))
        if self._tree == NULL:
            raise MemoryError()
        cdef long top = 1
        while top * 2 <= size:
            top *= 2
        self._top = top

    def __dealloc__(self):
        free(self._tree)

    cpdef void add(self, long i, long long delta=1) except *:
        if i < 1 or i > self.size:
            raise IndexError(i)
        self.total += delta
        while i <= self.size:
            self._tree[i] += delta
            i += i & -i

    cpdef long long prefix(self, long i):
        if i <= 0:
            return 0
        if i >= self.size:
            return self.total
        cdef long long s = 0
        while i > 0:
            s += self._tree[i]
            i -= i & -i
        return s

    cpdef long find_kth(self, long long k) except -1:
        if k < 1 or k > self.total:
            raise IndexError(k)
        cdef long pos = 0
        cdef long step = self._top
        cdef long nxt
        while step:
            nxt = pos + step
            if nxt <= self.size and self._tree[nxt] < k:
                pos = nxt
                k -= self._tree[nxt]
            step >>= 1
        return pos + 1
