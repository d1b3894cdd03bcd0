"""Compiled row-chunk kernels for the full-matrix drivers.

Each kernel processes rows [lo, hi) of the output, reading shared immutable
CSR/CSC arrays and writing only to per-row output slots plus its own worker
scratch, so any row partition over any number of threads yields bitwise
identical results.  All kernels release the GIL.

Semiring dispatch: sr == 0 is arithmetic (product = a*b), sr == 1 is
plus-pair (product = one).  ``one`` is passed as a typed scalar so each
value dtype gets its own specialization.

Numeric kernels return the number of products actually evaluated; value
computation is skipped for keys the mask discards (the compiled form of the
lazy value thunks).  Symbolic kernels run the same control flow with value
operations elided and only fill per-row output counts.

States: 0 = NOT-ALLOWED, 1 = ALLOWED, 2 = SET.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


# ---------------------------------------------------------------------------
# MSA: dense values/states arrays indexed by column
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def msa_numeric(lo, hi, a_ptr, a_idx, a_val, b_ptr, b_idx, b_val,
                m_ptr, m_idx, comp, sr, one,
                states, values, inserted,
                out_off, out_idx, out_val, row_nnz):
    evaluated = 0
    for i in range(lo, hi):
        ms, me = m_ptr[i], m_ptr[i + 1]
        if comp:
            for t in range(ms, me):
                states[m_idx[t]] = 0
        else:
            if ms == me:
                row_nnz[i] = 0
                continue
            for t in range(ms, me):
                states[m_idx[t]] = 1
        nins = 0
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            av = a_val[t]
            for s in range(b_ptr[k], b_ptr[k + 1]):
                j = b_idx[s]
                st = states[j]
                if st == 0:
                    continue
                p = av * b_val[s] if sr == 0 else one
                evaluated += 1
                if st == 1:
                    values[j] = p
                    states[j] = 2
                    if comp:
                        inserted[nins] = j
                        nins += 1
                else:
                    values[j] += p
        w = out_off[i]
        n = 0
        if comp:
            inserted[:nins].sort()
            for q in range(nins):
                j = inserted[q]
                out_idx[w + n] = j
                out_val[w + n] = values[j]
                n += 1
                states[j] = 1
            for t in range(ms, me):
                states[m_idx[t]] = 1
        else:
            for t in range(ms, me):
                j = m_idx[t]
                if states[j] == 2:
                    out_idx[w + n] = j
                    out_val[w + n] = values[j]
                    n += 1
                states[j] = 0
        row_nnz[i] = n
    return evaluated


@njit(cache=True, nogil=True)
def msa_symbolic(lo, hi, a_ptr, a_idx, b_ptr, b_idx,
                 m_ptr, m_idx, comp, states, inserted, row_nnz):
    for i in range(lo, hi):
        ms, me = m_ptr[i], m_ptr[i + 1]
        if comp:
            for t in range(ms, me):
                states[m_idx[t]] = 0
        else:
            if ms == me:
                row_nnz[i] = 0
                continue
            for t in range(ms, me):
                states[m_idx[t]] = 1
        n = 0
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            for s in range(b_ptr[k], b_ptr[k + 1]):
                j = b_idx[s]
                if states[j] == 1:
                    states[j] = 2
                    if comp:
                        inserted[n] = j
                    n += 1
        if comp:
            for q in range(n):
                states[inserted[q]] = 1
            for t in range(ms, me):
                states[m_idx[t]] = 1
        else:
            for t in range(ms, me):
                states[m_idx[t]] = 0
        row_nnz[i] = n
    return 0


# ---------------------------------------------------------------------------
# Hash: open addressing, linear probing, per-row capacity, sentinel = ncols
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def hash_numeric(lo, hi, a_ptr, a_idx, a_val, b_ptr, b_idx, b_val,
                 m_ptr, m_idx, comp, sr, one, ncols, row_cap,
                 hkeys, hstates, hvals, inserted,
                 out_off, out_idx, out_val, row_nnz):
    evaluated = 0
    empty = ncols
    for i in range(lo, hi):
        ms, me = m_ptr[i], m_ptr[i + 1]
        flops = np.int64(0)
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            flops += b_ptr[k + 1] - b_ptr[k]
        if (not comp and ms == me) or flops == 0:
            row_nnz[i] = 0
            continue
        cap = row_cap[i]
        cap_mask = cap - 1
        shift = np.int64(64)
        c = cap
        while c > 1:
            c >>= 1
            shift -= 1
        hkeys[:cap] = empty
        # mark mask keys
        mark = np.int8(0) if comp else np.int8(1)
        for t in range(ms, me):
            j = m_idx[t]
            h = np.int64((np.uint64(j) * _GOLDEN) >> np.uint64(shift)) & cap_mask
            while hkeys[h] != empty and hkeys[h] != j:
                h = (h + 1) & cap_mask
            hkeys[h] = j
            hstates[h] = mark
        nins = 0
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            av = a_val[t]
            for s in range(b_ptr[k], b_ptr[k + 1]):
                j = b_idx[s]
                h = np.int64((np.uint64(j) * _GOLDEN) >> np.uint64(shift)) & cap_mask
                while hkeys[h] != empty and hkeys[h] != j:
                    h = (h + 1) & cap_mask
                if hkeys[h] == empty:
                    if not comp:
                        continue  # absent key is NOT-ALLOWED: discard unevaluated
                    hkeys[h] = j  # absent key is ALLOWED under complement
                    hvals[h] = av * b_val[s] if sr == 0 else one
                    evaluated += 1
                    hstates[h] = 2
                    inserted[nins] = j
                    nins += 1
                else:
                    st = hstates[h]
                    if st == 0:
                        continue
                    p = av * b_val[s] if sr == 0 else one
                    evaluated += 1
                    if st == 1:
                        hvals[h] = p
                        hstates[h] = 2
                        if comp:
                            inserted[nins] = j
                            nins += 1
                    else:
                        hvals[h] += p
        w = out_off[i]
        n = 0
        if comp:
            inserted[:nins].sort()
            for q in range(nins):
                j = inserted[q]
                h = np.int64((np.uint64(j) * _GOLDEN) >> np.uint64(shift)) & cap_mask
                while hkeys[h] != j:
                    h = (h + 1) & cap_mask
                out_idx[w + n] = j
                out_val[w + n] = hvals[h]
                n += 1
        else:
            for t in range(ms, me):
                j = m_idx[t]
                h = np.int64((np.uint64(j) * _GOLDEN) >> np.uint64(shift)) & cap_mask
                while hkeys[h] != empty and hkeys[h] != j:
                    h = (h + 1) & cap_mask
                if hkeys[h] == j and hstates[h] == 2:
                    out_idx[w + n] = j
                    out_val[w + n] = hvals[h]
                    n += 1
        row_nnz[i] = n
    return evaluated


@njit(cache=True, nogil=True)
def hash_symbolic(lo, hi, a_ptr, a_idx, b_ptr, b_idx,
                  m_ptr, m_idx, comp, ncols, row_cap,
                  hkeys, hstates, row_nnz):
    empty = ncols
    for i in range(lo, hi):
        ms, me = m_ptr[i], m_ptr[i + 1]
        flops = np.int64(0)
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            flops += b_ptr[k + 1] - b_ptr[k]
        if (not comp and ms == me) or flops == 0:
            row_nnz[i] = 0
            continue
        cap = row_cap[i]
        cap_mask = cap - 1
        shift = np.int64(64)
        c = cap
        while c > 1:
            c >>= 1
            shift -= 1
        hkeys[:cap] = empty
        mark = np.int8(0) if comp else np.int8(1)
        for t in range(ms, me):
            j = m_idx[t]
            h = np.int64((np.uint64(j) * _GOLDEN) >> np.uint64(shift)) & cap_mask
            while hkeys[h] != empty and hkeys[h] != j:
                h = (h + 1) & cap_mask
            hkeys[h] = j
            hstates[h] = mark
        n = 0
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            for s in range(b_ptr[k], b_ptr[k + 1]):
                j = b_idx[s]
                h = np.int64((np.uint64(j) * _GOLDEN) >> np.uint64(shift)) & cap_mask
                while hkeys[h] != empty and hkeys[h] != j:
                    h = (h + 1) & cap_mask
                if hkeys[h] == empty:
                    if comp:
                        hkeys[h] = j
                        hstates[h] = 2
                        n += 1
                elif hstates[h] == 1:
                    hstates[h] = 2
                    n += 1
        row_nnz[i] = n
    return 0


# ---------------------------------------------------------------------------
# MCA: arrays of length nnz(mask row), indexed by mask rank
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def mca_numeric(lo, hi, a_ptr, a_idx, a_val, b_ptr, b_idx, b_val,
                m_ptr, m_idx, sr, one,
                states, values,
                out_off, out_idx, out_val, row_nnz):
    evaluated = 0
    for i in range(lo, hi):
        ms, me = m_ptr[i], m_ptr[i + 1]
        nm = me - ms
        if nm == 0:
            row_nnz[i] = 0
            continue
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            av = a_val[t]
            pos = b_ptr[k]
            end = b_ptr[k + 1]
            for rank in range(nm):
                j = m_idx[ms + rank]
                while pos < end and b_idx[pos] < j:
                    pos += 1
                if pos >= end:
                    break
                if b_idx[pos] == j:
                    p = av * b_val[pos] if sr == 0 else one
                    evaluated += 1
                    if states[rank] == 1:
                        values[rank] = p
                        states[rank] = 2
                    else:
                        values[rank] += p
        w = out_off[i]
        n = 0
        for rank in range(nm):
            if states[rank] == 2:
                out_idx[w + n] = m_idx[ms + rank]
                out_val[w + n] = values[rank]
                n += 1
                states[rank] = 1
        row_nnz[i] = n
    return evaluated


@njit(cache=True, nogil=True)
def mca_symbolic(lo, hi, a_ptr, a_idx, b_ptr, b_idx,
                 m_ptr, m_idx, states, row_nnz):
    for i in range(lo, hi):
        ms, me = m_ptr[i], m_ptr[i + 1]
        nm = me - ms
        if nm == 0:
            row_nnz[i] = 0
            continue
        n = 0
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            pos = b_ptr[k]
            end = b_ptr[k + 1]
            for rank in range(nm):
                j = m_idx[ms + rank]
                while pos < end and b_idx[pos] < j:
                    pos += 1
                if pos >= end:
                    break
                if b_idx[pos] == j and states[rank] == 1:
                    states[rank] = 2
                    n += 1
        for rank in range(nm):
            states[rank] = 1
        row_nnz[i] = n
    return 0


# ---------------------------------------------------------------------------
# Heap: multiway merge of row iterators keyed by current column
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _heap_push(hcol, hpos, hend, hapos, hn, col, pos, end, apos):
    c = hn
    hcol[c] = col
    hpos[c] = pos
    hend[c] = end
    hapos[c] = apos
    while c > 0:
        parent = (c - 1) >> 1
        if hcol[parent] <= hcol[c]:
            break
        hcol[parent], hcol[c] = hcol[c], hcol[parent]
        hpos[parent], hpos[c] = hpos[c], hpos[parent]
        hend[parent], hend[c] = hend[c], hend[parent]
        hapos[parent], hapos[c] = hapos[c], hapos[parent]
        c = parent
    return hn + 1


@njit(cache=True, nogil=True)
def _heap_pop(hcol, hpos, hend, hapos, hn):
    col = hcol[0]
    pos = hpos[0]
    end = hend[0]
    apos = hapos[0]
    hn -= 1
    if hn > 0:
        hcol[0] = hcol[hn]
        hpos[0] = hpos[hn]
        hend[0] = hend[hn]
        hapos[0] = hapos[hn]
        c = 0
        while True:
            left = 2 * c + 1
            if left >= hn:
                break
            small = left
            right = left + 1
            if right < hn and hcol[right] < hcol[left]:
                small = right
            if hcol[c] <= hcol[small]:
                break
            hcol[small], hcol[c] = hcol[c], hcol[small]
            hpos[small], hpos[c] = hpos[c], hpos[small]
            hend[small], hend[c] = hend[c], hend[small]
            hapos[small], hapos[c] = hapos[c], hapos[small]
            c = small
    return col, pos, end, apos, hn


@njit(cache=True, nogil=True)
def _heap_insert(hcol, hpos, hend, hapos, hn, b_idx, pos, end, apos,
                 m_idx, mpos, mend, ninspect):
    """Alg-5 style insert: inspect up to ninspect mask elements (local copy
    of the row cursor position) before pushing; ninspect < 0 means inspect
    the whole remaining mask (the HeapDot mode)."""
    if pos >= end:
        return hn
    if ninspect == 0:
        return _heap_push(hcol, hpos, hend, hapos, hn, b_idx[pos], pos, end, apos)
    to_inspect = ninspect
    rp = pos
    mp = mpos
    while rp < end and mp < mend:
        rc = b_idx[rp]
        mc = m_idx[mp]
        if rc == mc:
            return _heap_push(hcol, hpos, hend, hapos, hn, rc, rp, end, apos)
        elif rc < mc:
            rp += 1
        else:
            mp += 1
            if ninspect > 0:
                to_inspect -= 1
                if to_inspect == 0:
                    return _heap_push(hcol, hpos, hend, hapos, hn,
                                      b_idx[rp], rp, end, apos)
    return hn  # row or mask exhausted: no possible match remains


@njit(cache=True, nogil=True)
def heap_numeric(lo, hi, a_ptr, a_idx, a_val, b_ptr, b_idx, b_val,
                 m_ptr, m_idx, comp, ninspect, sr, one,
                 hcol, hpos, hend, hapos,
                 out_off, out_idx, out_val, row_nnz):
    evaluated = 0
    ni = 0 if comp else ninspect
    for i in range(lo, hi):
        mpos = m_ptr[i]
        mend = m_ptr[i + 1]
        if not comp and mpos == mend:
            row_nnz[i] = 0
            continue
        hn = 0
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            hn = _heap_insert(hcol, hpos, hend, hapos, hn, b_idx,
                              b_ptr[k], b_ptr[k + 1], t, m_idx, mpos, mend, ni)
        w = out_off[i]
        n = 0
        prev = np.int64(-1)
        while hn > 0:
            col, pos, end, apos, hn = _heap_pop(hcol, hpos, hend, hapos, hn)
            while mpos < mend and m_idx[mpos] < col:
                mpos += 1
            if comp:
                hit = not (mpos < mend and m_idx[mpos] == col)
            else:
                if mpos >= mend:
                    break
                hit = m_idx[mpos] == col
            if hit:
                p = a_val[apos] * b_val[pos] if sr == 0 else one
                evaluated += 1
                if prev == col:
                    out_val[w + n - 1] += p
                else:
                    out_idx[w + n] = col
                    out_val[w + n] = p
                    n += 1
                    prev = col
            hn = _heap_insert(hcol, hpos, hend, hapos, hn, b_idx,
                              pos + 1, end, apos, m_idx, mpos, mend, ni)
        row_nnz[i] = n
    return evaluated


@njit(cache=True, nogil=True)
def heap_symbolic(lo, hi, a_ptr, a_idx, b_ptr, b_idx,
                  m_ptr, m_idx, comp, ninspect,
                  hcol, hpos, hend, hapos, row_nnz):
    ni = 0 if comp else ninspect
    for i in range(lo, hi):
        mpos = m_ptr[i]
        mend = m_ptr[i + 1]
        if not comp and mpos == mend:
            row_nnz[i] = 0
            continue
        hn = 0
        for t in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[t]
            hn = _heap_insert(hcol, hpos, hend, hapos, hn, b_idx,
                              b_ptr[k], b_ptr[k + 1], t, m_idx, mpos, mend, ni)
        n = 0
        prev = np.int64(-1)
        while hn > 0:
            col, pos, end, apos, hn = _heap_pop(hcol, hpos, hend, hapos, hn)
            while mpos < mend and m_idx[mpos] < col:
                mpos += 1
            if comp:
                hit = not (mpos < mend and m_idx[mpos] == col)
            else:
                if mpos >= mend:
                    break
                hit = m_idx[mpos] == col
            if hit and prev != col:
                n += 1
                prev = col
            hn = _heap_insert(hcol, hpos, hend, hapos, hn, b_idx,
                              pos + 1, end, apos, m_idx, mpos, mend, ni)
        row_nnz[i] = n
    return 0


# ---------------------------------------------------------------------------
# Inner: pull-based sparse dot products over mask nonzeros (B in CSC)
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def inner_numeric(lo, hi, a_ptr, a_idx, a_val, bc_ptr, bc_row, bc_val,
                  m_ptr, m_idx, sr, one,
                  out_off, out_idx, out_val, row_nnz):
    evaluated = 0
    for i in range(lo, hi):
        w = out_off[i]
        n = 0
        ae = a_ptr[i + 1]
        for t in range(m_ptr[i], m_ptr[i + 1]):
            j = m_idx[t]
            ap = a_ptr[i]
            bp = bc_ptr[j]
            be = bc_ptr[j + 1]
            acc = one
            hit = False
            while ap < ae and bp < be:
                ak = a_idx[ap]
                bk = bc_row[bp]
                if ak == bk:
                    p = a_val[ap] * bc_val[bp] if sr == 0 else one
                    evaluated += 1
                    acc = p if not hit else acc + p
                    hit = True
                    ap += 1
                    bp += 1
                elif ak < bk:
                    ap += 1
                else:
                    bp += 1
            if hit:
                out_idx[w + n] = j
                out_val[w + n] = acc
                n += 1
        row_nnz[i] = n
    return evaluated


@njit(cache=True, nogil=True)
def inner_symbolic(lo, hi, a_ptr, a_idx, bc_ptr, bc_row,
                   m_ptr, m_idx, row_nnz):
    for i in range(lo, hi):
        n = 0
        ae = a_ptr[i + 1]
        for t in range(m_ptr[i], m_ptr[i + 1]):
            j = m_idx[t]
            ap = a_ptr[i]
            bp = bc_ptr[j]
            be = bc_ptr[j + 1]
            while ap < ae and bp < be:
                ak = a_idx[ap]
                bk = bc_row[bp]
                if ak == bk:
                    n += 1
                    break
                elif ak < bk:
                    ap += 1
                else:
                    bp += 1
        row_nnz[i] = n
    return 0


# ---------------------------------------------------------------------------
# Assembly and small structural helpers
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def compact_rows(bounds_off, row_nnz, tmp_idx, tmp_val, out_ptr, out_idx, out_val):
    """Stitch per-row slots written at bound offsets into contiguous CSR."""
    for i in range(row_nnz.shape[0]):
        w = out_ptr[i]
        r = bounds_off[i]
        for t in range(row_nnz[i]):
            out_idx[w + t] = tmp_idx[r + t]
            out_val[w + t] = tmp_val[r + t]


@njit(cache=True, nogil=True)
def lookup_rows(x_ptr, x_idx, y_ptr, y_idx, y_val, out, found):
    """For every stored entry of X, fetch the matching entry value of Y
    (same shape, both canonically sorted).  found[t] marks hits."""
    for i in range(x_ptr.shape[0] - 1):
        yp = y_ptr[i]
        ye = y_ptr[i + 1]
        for t in range(x_ptr[i], x_ptr[i + 1]):
            j = x_idx[t]
            while yp < ye and y_idx[yp] < j:
                yp += 1
            if yp < ye and y_idx[yp] == j:
                out[t] = y_val[yp]
                found[t] = True
            else:
                found[t] = False
